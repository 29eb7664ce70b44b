//! Special Lagrangian cones given by their link `φ: Σ → S⁵` in oriented
//! conformal coordinates `(s, t)`.
//!
//! A cone `{r φ(s, t)}` is SL exactly when `ω(φ, φ_s) = 0` and
//! `φ_t = φ × φ_s`; [`cone_condition_defect`] measures both.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex3::{c3_cross, omega, CVec3, I};
use crate::elliptic::{jacobi, jacobi_period};
use crate::error::{Error, Result};
use crate::grid::Grid2;
use crate::report::{ResidualReport, SamplePoint, Tally};
use crate::spectral::Fourier2;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// `φ` with all first and second partial derivatives at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConeJet {
    pub phi: CVec3,
    pub phi_s: CVec3,
    pub phi_t: CVec3,
    pub phi_ss: CVec3,
    pub phi_st: CVec3,
    pub phi_tt: CVec3,
}

impl ConeJet {
    /// Conformal factor `|φ_s|²`.
    pub fn lambda(&self) -> f64 {
        self.phi_s.norm_sqr()
    }
}

/// Integer data of a Joyce `T²`-cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "[i64; 3]", into = "[i64; 3]")]
pub struct JoyceParams {
    b: [i64; 3],
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl JoyceParams {
    /// Requires coprime integers with `b2 ≥ b3 > 0 > b1` and zero sum.
    pub fn new(b1: i64, b2: i64, b3: i64) -> Result<Self> {
        if b1 + b2 + b3 != 0 {
            return Err(Error::BadParams(format!(
                "b1 + b2 + b3 = {} must vanish",
                b1 + b2 + b3
            )));
        }
        if !(b2 >= b3 && b3 > 0 && b1 < 0) {
            return Err(Error::BadParams(format!(
                "need b2 >= b3 > 0 > b1, got ({b1}, {b2}, {b3})"
            )));
        }
        if gcd(gcd(b1, b2), b3) != 1 {
            return Err(Error::BadParams(format!(
                "({b1}, {b2}, {b3}) are not coprime"
            )));
        }
        Ok(Self { b: [b1, b2, b3] })
    }

    pub fn b(&self) -> [i64; 3] {
        self.b
    }

    /// `a² = b2 (b3 − b1)`.
    pub fn a_squared(&self) -> i64 {
        let [b1, b2, b3] = self.b;
        b2 * (b3 - b1)
    }

    /// The squared modulus as a reduced fraction `(num, den)`.
    pub fn modulus_squared(&self) -> (i64, i64) {
        let [b1, b2, b3] = self.b;
        let mut num = b1 * (b2 - b3);
        let mut den = b2 * (b1 - b3);
        if den < 0 {
            num = -num;
            den = -den;
        }
        let g = gcd(num, den).max(1);
        (num / g, den / g)
    }

    pub fn a(&self) -> f64 {
        (self.a_squared() as f64).sqrt()
    }

    pub fn modulus(&self) -> f64 {
        let (n, d) = self.modulus_squared();
        (n as f64 / d as f64).sqrt()
    }

    /// Amplitudes of the three components of `φ`.
    pub fn amplitudes(&self) -> [f64; 3] {
        let [b1, b2, b3] = self.b.map(|x| x as f64);
        [
            (b2 / (b2 - b1)).sqrt(),
            (b1 / (b1 - b2)).sqrt(),
            (b1 / (b1 - b3)).sqrt(),
        ]
    }
}

impl TryFrom<[i64; 3]> for JoyceParams {
    type Error = Error;

    fn try_from(b: [i64; 3]) -> Result<Self> {
        Self::new(b[0], b[1], b[2])
    }
}

impl From<JoyceParams> for [i64; 3] {
    fn from(p: JoyceParams) -> Self {
        p.b
    }
}

/// Which family a [`ConePatch`] belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConeKind {
    HarveyLawson,
    Joyce { b: JoyceParams },
    NumericGrid,
}

/// Serializable description of a catalog cone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConeSpec {
    Hl,
    Joyce { b: JoyceParams },
}

impl ConeSpec {
    pub fn build(&self) -> ConePatch {
        match self {
            ConeSpec::Hl => hl_cone(),
            ConeSpec::Joyce { b } => joyce_cone(*b),
        }
    }
}

#[derive(Clone, Debug)]
enum Evaluator {
    HarveyLawson,
    Joyce {
        a: f64,
        k: f64,
        amp: [f64; 3],
        freq: [f64; 3],
    },
    Numeric(Box<Fourier2>),
}

/// Sampler for the link of an SL cone with derivative oracles.
#[derive(Clone, Debug)]
pub struct ConePatch {
    kind: ConeKind,
    eval: Evaluator,
    periods: Option<[(f64, f64); 2]>,
}

// Phase slopes of the Harvey–Lawson link: φ_j = e^{i(A_j s + B_j t)}/√3.
const HL_A: [f64; 3] = [1.0, -0.5, -0.5];
const HL_B: [f64; 3] = [0.0, -0.5 * SQRT3, 0.5 * SQRT3];

/// Phases `α_j(s, t)` of the Harvey–Lawson link.
pub(crate) fn hl_phases(s: f64, t: f64) -> [f64; 3] {
    [0, 1, 2].map(|j| HL_A[j] * s + HL_B[j] * t)
}

pub(crate) fn hl_phase_slopes() -> ([f64; 3], [f64; 3]) {
    (HL_A, HL_B)
}

impl ConePatch {
    pub fn kind(&self) -> ConeKind {
        self.kind
    }

    /// Generators of the period lattice, or `None` if unknown.
    pub fn periods(&self) -> Option<[(f64, f64); 2]> {
        self.periods
    }

    pub fn phi(&self, s: f64, t: f64) -> CVec3 {
        match &self.eval {
            Evaluator::HarveyLawson => {
                let a = hl_phases(s, t);
                CVec3::from_array(a.map(|x| Complex64::from_polar(1.0 / SQRT3, x)))
            }
            _ => self.jet(s, t).phi,
        }
    }

    pub fn jet(&self, s: f64, t: f64) -> ConeJet {
        match &self.eval {
            Evaluator::HarveyLawson => hl_jet(s, t),
            Evaluator::Joyce { a, k, amp, freq } => joyce_jet(s, t, *a, *k, amp, freq),
            Evaluator::Numeric(f) => {
                let j = f.jet(s, t);
                ConeJet {
                    phi: j.value,
                    phi_s: j.ds,
                    phi_t: j.dt,
                    phi_ss: j.dss,
                    phi_st: j.dst,
                    phi_tt: j.dtt,
                }
            }
        }
    }

    /// Conformal factor `λ = |φ_s|²`.
    pub fn lambda(&self, s: f64, t: f64) -> f64 {
        self.jet(s, t).lambda()
    }
}

fn hl_jet(s: f64, t: f64) -> ConeJet {
    let alpha = hl_phases(s, t);
    let phi = CVec3::from_array(alpha.map(|x| Complex64::from_polar(1.0 / SQRT3, x)));
    let scaled = |f: [Complex64; 3]| {
        let mut v = phi;
        for j in 0..3 {
            v[j] *= f[j];
        }
        v
    };
    let re = |x: f64| Complex64::new(x, 0.0);
    ConeJet {
        phi,
        phi_s: scaled(HL_A.map(|a| I * a)),
        phi_t: scaled(HL_B.map(|b| I * b)),
        phi_ss: scaled(HL_A.map(|a| re(-a * a))),
        phi_st: scaled([0, 1, 2].map(|j| re(-HL_A[j] * HL_B[j]))),
        phi_tt: scaled(HL_B.map(|b| re(-b * b))),
    }
}

fn joyce_jet(s: f64, t: f64, a: f64, k: f64, amp: &[f64; 3], freq: &[f64; 3]) -> ConeJet {
    let e = jacobi(a * t, k).expect("modulus validated at construction");
    let (sn, cn, dn) = (e.sn, e.cn, e.dn);
    let k2 = k * k;
    let f = [dn, cn, sn];
    let f1 = [-k2 * sn * cn, -sn * dn, cn * dn];
    let f2 = [
        -k2 * dn * (cn * cn - sn * sn),
        -cn * dn * dn + k2 * sn * sn * cn,
        -sn * dn * dn - k2 * sn * cn * cn,
    ];
    let mut jet = ConeJet::default();
    for j in 0..3 {
        let base = I * Complex64::from_polar(amp[j], freq[j] * s);
        let ib = I * freq[j];
        jet.phi[j] = base * f[j];
        jet.phi_s[j] = ib * jet.phi[j];
        jet.phi_t[j] = base * (a * f1[j]);
        jet.phi_ss[j] = -freq[j] * freq[j] * jet.phi[j];
        jet.phi_st[j] = ib * jet.phi_t[j];
        jet.phi_tt[j] = base * (a * a * f2[j]);
    }
    jet
}

/// The Harvey–Lawson `T²`-cone.
pub fn hl_cone() -> ConePatch {
    ConePatch {
        kind: ConeKind::HarveyLawson,
        eval: Evaluator::HarveyLawson,
        periods: Some([(2.0 * PI, 2.0 * PI / SQRT3), (0.0, 4.0 * PI / SQRT3)]),
    }
}

/// The Joyce `T²`-cone built from Jacobi elliptic functions.
pub fn joyce_cone(p: JoyceParams) -> ConePatch {
    let a = p.a();
    let k = p.modulus();
    let period_t = jacobi_period(k).expect("modulus is below one") / a;
    ConePatch {
        kind: ConeKind::Joyce { b: p },
        eval: Evaluator::Joyce {
            a,
            k,
            amp: p.amplitudes(),
            freq: p.b().map(|x| x as f64),
        },
        periods: Some([(2.0 * PI, 0.0), (0.0, period_t)]),
    }
}

/// Samples of `φ` on a rectangular period cell, including the duplicated
/// wrap row and column: `values[i * (nt + 1) + j]` sits at
/// `origin + (i L_s / ns, j L_t / nt)` for `0 ≤ i ≤ ns`, `0 ≤ j ≤ nt`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicSamples {
    pub ns: usize,
    pub nt: usize,
    pub origin: (f64, f64),
    pub periods: (f64, f64),
    pub values: Vec<CVec3>,
}

impl PeriodicSamples {
    pub fn sample(
        f: impl Fn(f64, f64) -> CVec3,
        ns: usize,
        nt: usize,
        origin: (f64, f64),
        periods: (f64, f64),
    ) -> Self {
        let mut values = Vec::with_capacity((ns + 1) * (nt + 1));
        for i in 0..=ns {
            for j in 0..=nt {
                let s = origin.0 + i as f64 * periods.0 / ns as f64;
                let t = origin.1 + j as f64 * periods.1 / nt as f64;
                values.push(f(s, t));
            }
        }
        Self {
            ns,
            nt,
            origin,
            periods,
            values,
        }
    }
}

const UNIT_TOL: f64 = 1e-6;
const WRAP_TOL: f64 = 1e-6;

/// Wrap a periodic grid of link samples as a cone with spectral derivatives.
pub fn numeric_cone_from_grid(samples: &PeriodicSamples) -> Result<ConePatch> {
    let (ns, nt) = (samples.ns, samples.nt);
    if ns == 0 || nt == 0 {
        return Err(Error::EmptyGrid);
    }
    let w = nt + 1;
    if samples.values.len() != (ns + 1) * w {
        return Err(Error::BadParams(format!(
            "expected {} samples, got {}",
            (ns + 1) * w,
            samples.values.len()
        )));
    }
    for (index, v) in samples.values.iter().enumerate() {
        let norm = v.norm();
        if !((norm - 1.0).abs() <= UNIT_TOL) {
            return Err(Error::NotUnitNorm { index, norm });
        }
    }
    let at = |i: usize, j: usize| samples.values[i * w + j];
    let mismatch_s = (0..=nt)
        .map(|j| (at(ns, j) - at(0, j)).norm())
        .fold(0.0, f64::max);
    if mismatch_s > WRAP_TOL {
        return Err(Error::NotPeriodic {
            axis: "s",
            mismatch: mismatch_s,
        });
    }
    let mismatch_t = (0..=ns)
        .map(|i| (at(i, nt) - at(i, 0)).norm())
        .fold(0.0, f64::max);
    if mismatch_t > WRAP_TOL {
        return Err(Error::NotPeriodic {
            axis: "t",
            mismatch: mismatch_t,
        });
    }
    let interior: Vec<CVec3> = (0..ns)
        .flat_map(|i| (0..nt).map(move |j| (i, j)))
        .map(|(i, j)| at(i, j))
        .collect();
    let f = Fourier2::new(&interior, ns, nt, samples.periods, samples.origin);
    Ok(ConePatch {
        kind: ConeKind::NumericGrid,
        eval: Evaluator::Numeric(Box::new(f)),
        periods: Some([(samples.periods.0, 0.0), (0.0, samples.periods.1)]),
    })
}

/// Below this `|φ_s|²` a sample is reported as a non-immersion point.
const IMMERSION_FLOOR: f64 = 1e-12;

/// Sup over the grid of `|ω(φ, φ_s)|` and `|φ_t − φ × φ_s|_∞`.
pub fn cone_condition_defect(
    c: &ConePatch,
    grid: &Grid2,
    tolerance: f64,
) -> Result<ResidualReport> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let rows: Vec<(Tally, Tally, usize)> = (0..grid.s.n)
        .into_par_iter()
        .map(|i| {
            let mut kahler = Tally::default();
            let mut cross = Tally::default();
            let mut flat = 0;
            for (s, t) in grid.row(i) {
                let j = c.jet(s, t);
                let at = SamplePoint::st(s, t);
                kahler.push(omega(j.phi, j.phi_s).abs(), at);
                cross.push((j.phi_t - c3_cross(j.phi, j.phi_s)).sup_norm(), at);
                if j.lambda() < IMMERSION_FLOOR {
                    flat += 1;
                }
            }
            (kahler, cross, flat)
        })
        .collect();
    let mut kahler = Tally::default();
    let mut cross = Tally::default();
    let mut flat = 0;
    for (k, x, f) in &rows {
        kahler.merge(k);
        cross.merge(x);
        flat += f;
    }
    let mut report =
        ResidualReport::from_tallies(vec![("kahler", kahler), ("cross", cross)], 0, tolerance);
    if flat > 0 {
        report.warnings.push(format!(
            "degenerate immersion: {flat} of {} samples have |phi_s|^2 < {IMMERSION_FLOOR:e}",
            grid.len()
        ));
    }
    Ok(report)
}
