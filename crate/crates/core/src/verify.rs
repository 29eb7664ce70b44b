//! Residual checks on ruled 3-folds: the SL conditions on tangent frames,
//! phase estimation, ruling classification and asymptotic order.

use std::f64::consts::PI;

use nalgebra::{Matrix3x6, Matrix6, Matrix6x3, Vector6};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex3::{c3_cross, metric_g, omega, omega_complex, plane_defect_parts, CVec3, Frame3};
use crate::cone::{ConeKind, ConePatch};
use crate::constructions::RuledSurface;
use crate::error::{Error, Result};
use crate::grid::{Grid2, Grid3};
use crate::report::{ResidualReport, SamplePoint, Tally};

/// Frames whose singular-value ratio falls below this are non-immersion
/// samples.
pub const DEGENERACY_RATIO: f64 = 1e-8;

fn real_matrix(frame: &Frame3) -> Matrix6x3<f64> {
    let vs = frame.vectors();
    Matrix6x3::from_fn(|i, j| vs[j].to_real6()[i])
}

fn is_degenerate(frame: &Frame3) -> bool {
    if frame.vectors().iter().any(|v| v.norm() == 0.0 || !v.is_finite()) {
        return true;
    }
    let sv = real_matrix(frame).singular_values();
    let max = sv.max();
    !(sv.min() >= DEGENERACY_RATIO * max && max > 0.0)
}

/// Defects at one `(s, t, r)` sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleDefect {
    pub s: f64,
    pub t: f64,
    pub r: f64,
    pub kahler: f64,
    pub phase: f64,
    pub degenerate: bool,
}

/// Per-sample Kähler and phase defects of the tangent frames of `surf`,
/// ordered by `s`, then `t`, then `r`.
pub fn sl_defect_samples(
    surf: &RuledSurface,
    grid: &Grid3,
    phase_angle: f64,
) -> Result<Vec<SampleDefect>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let plane = grid.plane();
    let rows: Vec<Vec<SampleDefect>> = (0..plane.s.n)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::with_capacity(plane.t.n * grid.r.len());
            for (s, t) in plane.row(i) {
                let jet = surf.jet(s, t);
                for &r in &grid.r {
                    let frame = jet.frame(r);
                    let degenerate = is_degenerate(&frame);
                    let (kahler, phase) = if degenerate {
                        (0.0, 0.0)
                    } else {
                        let norms = frame.vectors().map(CVec3::norm);
                        plane_defect_parts(&frame, &norms, phase_angle)
                    };
                    out.push(SampleDefect {
                        s,
                        t,
                        r,
                        kahler,
                        phase,
                        degenerate,
                    });
                }
            }
            out
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// Normalized SL defect of `surf` at the given phase over an `(s, t, r)` grid.
///
/// Conditions are `kahler` (the pairwise `ω` terms) and `phase` (the
/// imaginary part of `e^{-iθ} Ω`). Degenerate frames are counted in
/// `excluded` and left out of the statistics.
pub fn sl_defect(
    surf: &RuledSurface,
    grid: &Grid3,
    phase_angle: f64,
    tolerance: f64,
) -> Result<ResidualReport> {
    let samples = sl_defect_samples(surf, grid, phase_angle)?;
    Ok(report_from_samples(&samples, tolerance))
}

/// Aggregate per-sample defects into a report.
pub fn report_from_samples(samples: &[SampleDefect], tolerance: f64) -> ResidualReport {
    let mut kahler = Tally::default();
    let mut phase = Tally::default();
    let mut excluded = 0;
    for d in samples {
        if d.degenerate {
            excluded += 1;
            continue;
        }
        let at = SamplePoint::str(d.s, d.t, d.r);
        kahler.push(d.kahler, at);
        phase.push(d.phase, at);
    }
    let mut report =
        ResidualReport::from_tallies(vec![("kahler", kahler), ("phase", phase)], excluded, tolerance);
    if excluded > 0 {
        report
            .warnings
            .push(format!("{excluded} non-immersion samples excluded"));
    }
    report
}

/// Circular mean of the phase modulo π and the largest deviation from it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseEstimate {
    /// Mean phase angle in `[0, π)`.
    pub angle: f64,
    /// Largest folded deviation from `angle`, in `[0, π/2]`.
    pub dispersion: f64,
    pub samples: usize,
}

/// Wrap an angle into `(-π/2, π/2]`.
fn fold_half(x: f64) -> f64 {
    let y = x.rem_euclid(PI);
    if y > PI / 2.0 {
        y - PI
    } else {
        y
    }
}

/// Estimate the phase `θ` from `arg Ω` over the non-degenerate frames.
pub fn estimate_phase(surf: &RuledSurface, grid: &Grid3) -> Result<PhaseEstimate> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let plane = grid.plane();
    let rows: Vec<Vec<f64>> = (0..plane.s.n)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            for (s, t) in plane.row(i) {
                let jet = surf.jet(s, t);
                for &r in &grid.r {
                    let frame = jet.frame(r);
                    if is_degenerate(&frame) {
                        continue;
                    }
                    let vol = omega_complex(&frame);
                    if vol.norm() > 0.0 {
                        out.push(vol.arg());
                    }
                }
            }
            out
        })
        .collect();
    let angles: Vec<f64> = rows.into_iter().flatten().collect();
    if angles.is_empty() {
        return Err(Error::AllDegenerate);
    }
    let sum: Complex64 = angles.iter().map(|&a| Complex64::from_polar(1.0, 2.0 * a)).sum();
    let angle = (0.5 * sum.arg()).rem_euclid(PI);
    let dispersion = angles
        .iter()
        .map(|&a| fold_half(a - angle).abs())
        .fold(0.0, f64::max);
    Ok(PhaseEstimate {
        angle: if angle >= PI { 0.0 } else { angle },
        dispersion,
        samples: angles.len(),
    })
}

/// Which of the two ruling conditions a surface satisfies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CaseI,
    CaseII,
    Both,
    Neither,
}

/// Classification verdict with the defect witnessing each case.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RulingClass {
    pub verdict: Verdict,
    /// Sup of the cone conditions on `φ`.
    pub cone_defect: f64,
    /// Sup of `|ω(φ, ψ_s)|` and the `f`-residual, scaled.
    pub case_i_defect: f64,
    /// Sup of `|ψ_t − φ × ψ_s − f φ|` with `f = g(ψ_t − φ × ψ_s, φ)`, scaled.
    pub f_residual: f64,
    /// Sup distance of `ψ_s`, `ψ_t` from the real span of `φ, φ_s, φ_t`, scaled.
    pub case_ii_defect: f64,
    /// Sup deviation of the tangent-plane projector from its first value;
    /// computed when the verdict is `CaseII`.
    pub planarity_defect: Option<f64>,
}

#[derive(Clone, Copy, Default)]
struct ClassTally {
    cone: f64,
    kahler_i: f64,
    f_res: f64,
    span: f64,
}

impl ClassTally {
    fn merge(self, o: Self) -> Self {
        Self {
            cone: self.cone.max(o.cone),
            kahler_i: self.kahler_i.max(o.kahler_i),
            f_res: self.f_res.max(o.f_res),
            span: self.span.max(o.span),
        }
    }
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::INFINITY
    } else {
        a.max(b)
    }
}

fn span_distance(basis: &Matrix6x3<f64>, y: CVec3) -> f64 {
    let y = Vector6::from_column_slice(&y.to_real6());
    let svd = basis.svd(true, true);
    match svd.solve(&y, 1e-12) {
        Ok(x) => (y - basis * x).norm(),
        Err(_) => f64::INFINITY,
    }
}

fn projector(frame: &Frame3) -> Option<Matrix6<f64>> {
    if is_degenerate(frame) {
        return None;
    }
    let u = real_matrix(frame).svd(true, false).u?;
    let q: Matrix6x3<f64> = u;
    let qt: Matrix3x6<f64> = q.transpose();
    Some(q * qt)
}

/// Test the two ruling conditions over `grid` at tolerance `tolerance`.
pub fn classify_ruling(surf: &RuledSurface, grid: &Grid2, tolerance: f64) -> RulingClass {
    let tally = (0..grid.s.n)
        .into_par_iter()
        .map(|i| {
            let mut acc = ClassTally::default();
            for (s, t) in grid.row(i) {
                let j = surf.jet(s, t);
                let cone = omega(j.phi, j.phi_s)
                    .abs()
                    .max((j.phi_t - c3_cross(j.phi, j.phi_s)).norm());
                let scale = 1f64.max(j.psi_s.norm()).max(j.psi_t.norm());
                let kahler_i = omega(j.phi, j.psi_s).abs() / scale;
                let rest = j.psi_t - c3_cross(j.phi, j.psi_s);
                let f = metric_g(rest, j.phi);
                let f_res = (rest - j.phi.scale(f)).norm() / scale;
                let basis = real_matrix(&Frame3::new(j.phi, j.phi_s, j.phi_t));
                let span =
                    span_distance(&basis, j.psi_s).max(span_distance(&basis, j.psi_t)) / scale;
                acc = ClassTally {
                    cone: nan_max(acc.cone, cone),
                    kahler_i: nan_max(acc.kahler_i, kahler_i),
                    f_res: nan_max(acc.f_res, f_res),
                    span: nan_max(acc.span, span),
                };
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(ClassTally::default(), ClassTally::merge);

    let case_i_defect = tally.kahler_i.max(tally.f_res);
    let cone_ok = tally.cone < tolerance;
    let case_i = case_i_defect < tolerance;
    let case_ii = tally.span < tolerance;
    let verdict = match (cone_ok, case_i, case_ii) {
        (false, _, _) | (true, false, false) => Verdict::Neither,
        (true, true, true) => Verdict::Both,
        (true, true, false) => Verdict::CaseI,
        (true, false, true) => Verdict::CaseII,
    };
    let planarity_defect = (verdict == Verdict::CaseII).then(|| planarity(surf, grid));
    RulingClass {
        verdict,
        cone_defect: tally.cone,
        case_i_defect,
        f_residual: tally.f_res,
        case_ii_defect: tally.span,
        planarity_defect,
    }
}

/// Largest Frobenius distance between tangent-plane projectors at `r = ±1`
/// over the grid and the first non-degenerate one.
fn planarity(surf: &RuledSurface, grid: &Grid2) -> f64 {
    let mut reference: Option<Matrix6<f64>> = None;
    let mut worst = 0.0_f64;
    for i in 0..grid.s.n {
        for (s, t) in grid.row(i) {
            let j = surf.jet(s, t);
            for r in [-1.0, 1.0] {
                let Some(p) = projector(&j.frame(r)) else {
                    continue;
                };
                match &reference {
                    None => reference = Some(p),
                    Some(q) => worst = worst.max((p - q).norm()),
                }
            }
        }
    }
    if reference.is_none() {
        f64::INFINITY
    } else {
        worst
    }
}

/// Log-log fit of the displacement `d(r)` against `r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    /// Fitted exponent; `None` when every `d(r)` is zero.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// Root-mean-square residual of the fit in `log d`.
    pub residual: f64,
    /// `true` when the surface coincides with the cone on every sample.
    pub exact: bool,
    pub distances: Vec<(f64, f64)>,
}

/// `n` points per decade from `r_min` to `r_max`, geometric.
pub fn geometric_samples(r_min: f64, r_max: f64, per_decade: usize) -> Vec<f64> {
    let decades = (r_max / r_min).log10();
    let n = ((decades * per_decade as f64).round() as usize).max(1);
    (0..=n)
        .map(|k| r_min * (r_max / r_min).powf(k as f64 / n as f64))
        .collect()
}

/// Measure the decay of `|Φ(r φ(s, t)) − r φ(s, t)|` along the cone, where
/// `Φ(r φ(s, t)) = r φ(s − u/r, t − v/r) + ψ(s − u/r, t − v/r)` is the
/// comparison map for a constant twist `(u, v)`.
pub fn asymptotic_order(
    c: &ConePatch,
    surf: &RuledSurface,
    r_samples: &[f64],
    grid: &Grid2,
) -> Result<AsymptoticFit> {
    let Some((kind, u, v)) = surf.provenance().constant_twist() else {
        return Err(Error::BadFamily(
            "surface is not a constant-field twist of a catalog cone".into(),
        ));
    };
    if kind != c.kind() || kind == ConeKind::NumericGrid {
        return Err(Error::BadFamily(format!(
            "surface twists {kind:?}, not the given {:?}",
            c.kind()
        )));
    }
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let (lo, hi) = r_samples
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(a, b), &r| (a.min(r), b.max(r)));
    if r_samples.len() < 2 || !(lo > 0.0) || hi / lo < 1e3 * (1.0 - 1e-12) {
        return Err(Error::BadRange(format!(
            "r samples must be positive and span at least three decades, got [{lo}, {hi}]"
        )));
    }
    let distances: Vec<(f64, f64)> = r_samples
        .par_iter()
        .map(|&r| {
            let mut d = 0.0_f64;
            for i in 0..grid.s.n {
                for (s, t) in grid.row(i) {
                    let image = surf.point(s - u / r, t - v / r, r);
                    d = d.max((image - c.phi(s, t).scale(r)).norm());
                }
            }
            (r, d)
        })
        .collect();
    if distances.iter().all(|&(_, d)| d == 0.0) {
        return Ok(AsymptoticFit {
            slope: None,
            intercept: None,
            residual: 0.0,
            exact: true,
            distances,
        });
    }
    if distances.iter().any(|&(_, d)| !(d > 0.0) || !d.is_finite()) {
        return Err(Error::BadFamily(
            "displacement vanishes at some but not all radii".into(),
        ));
    }
    let pts: Vec<(f64, f64)> = distances.iter().map(|&(r, d)| (r.ln(), d.ln())).collect();
    let (slope, intercept, residual) = linear_fit(&pts);
    Ok(AsymptoticFit {
        slope: Some(slope),
        intercept: Some(intercept),
        residual,
        exact: false,
        distances,
    })
}

/// Least-squares line through `pts`: `(slope, intercept, rms residual)`.
fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    (slope, intercept, (rss / n).sqrt())
}

/// Check that every `r φ + ψ` stays within `sup |ψ|` of the line `R φ`, with
/// a distance that does not depend on `r`.
///
/// Conditions are `excess` (distance above `sup |ψ|`) and `r_variation`
/// (spread of the distance along each ruling line).
pub fn bounded_distance_check(
    surf: &RuledSurface,
    grid: &Grid2,
    r_samples: &[f64],
    tolerance: f64,
) -> Result<ResidualReport> {
    if grid.is_empty() || r_samples.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let sup_psi = (0..grid.s.n)
        .into_par_iter()
        .map(|i| {
            grid.row(i)
                .map(|(s, t)| surf.psi(s, t).norm())
                .fold(0.0, f64::max)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max);
    let rows: Vec<(Tally, Tally)> = (0..grid.s.n)
        .into_par_iter()
        .map(|i| {
            let mut excess = Tally::default();
            let mut spread = Tally::default();
            for (s, t) in grid.row(i) {
                let (phi, psi) = (surf.phi(s, t), surf.psi(s, t));
                let mut lo = f64::INFINITY;
                let mut hi = 0.0_f64;
                let mut worst_r = r_samples[0];
                for &r in r_samples {
                    let p = phi.scale(r) + psi;
                    let dist = (p - phi.scale(metric_g(p, phi) / phi.norm_sqr())).norm();
                    if dist > hi {
                        worst_r = r;
                    }
                    lo = lo.min(dist);
                    hi = hi.max(dist);
                }
                excess.push((hi - sup_psi).max(0.0), SamplePoint::str(s, t, worst_r));
                spread.push(hi - lo, SamplePoint::st(s, t));
            }
            (excess, spread)
        })
        .collect();
    let mut excess = Tally::default();
    let mut spread = Tally::default();
    for (e, v) in &rows {
        excess.merge(e);
        spread.merge(v);
    }
    Ok(ResidualReport::from_tallies(
        vec![("excess", excess), ("r_variation", spread)],
        0,
        tolerance,
    ))
}
