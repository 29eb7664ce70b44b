//! Method-of-lines solver for the curve evolution
//! `∂φ/∂t = φ × ∂φ/∂s`, `∂ψ/∂t = φ × ∂ψ/∂s`, which sweeps a curve of
//! ruling data into a ruled SL 3-fold.
//!
//! The system is elliptic, so high modes grow like `e^{|k| t}`; it is only
//! meaningful for analytic data over short times.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex3::{c3_cross, omega, CVec3};
use crate::cone::{ConeSpec, JoyceParams};
use crate::constructions::{DerivativeSource, Provenance, RuledMap, RuledSurface, RulingJet};
use crate::error::{Error, Result};
use crate::report::{ResidualReport, SamplePoint, Tally};
use crate::spectral::{chebyshev, Fourier1, PeriodicDiff};

/// Residuals above this refuse to start an evolution.
pub const START_TOL: f64 = 1e-8;

/// Largest `||φ_j| − 1|` tolerated before a step reports `BlowUp`.
pub const BLOWUP_DEVIATION: f64 = 0.1;

/// Largest spacing in `t` between stored snapshots of an evolved surface.
const SNAPSHOT_SPACING: f64 = 0.0025;

/// Discretization of the curve parameter `s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Discretization {
    /// Uniform grid on the circle `R / L Z`, Fourier differentiation.
    Periodic { period: f64 },
    /// Chebyshev extrema on `[a, b]`.
    Chebyshev { a: f64, b: f64 },
}

#[derive(Clone, Debug)]
enum Diff {
    Fourier(PeriodicDiff),
    Matrix(Arc<Vec<f64>>),
}

/// Samples of `φ` and `ψ` along the curve at evolution time `t`.
#[derive(Clone, Debug)]
pub struct CurveState {
    pub phi: Vec<CVec3>,
    pub psi: Vec<CVec3>,
    pub t: f64,
    disc: Discretization,
    diff: Diff,
}

impl CurveState {
    /// Samples at `s_j = j L / n` on a circle of length `period`; `n` must
    /// be a power of two.
    pub fn periodic(phi: Vec<CVec3>, psi: Vec<CVec3>, period: f64, t: f64) -> Result<Self> {
        let n = phi.len();
        if !n.is_power_of_two() || n < 4 {
            return Err(Error::BadParams(format!(
                "periodic grid size must be a power of two at least 4, got {n}"
            )));
        }
        if !(period > 0.0) {
            return Err(Error::BadParams(format!("period must be positive, got {period}")));
        }
        Self::check_lengths(&phi, &psi)?;
        Ok(Self {
            phi,
            psi,
            t,
            disc: Discretization::Periodic { period },
            diff: Diff::Fourier(PeriodicDiff::new(n, period)),
        })
    }

    /// Samples at the Chebyshev extrema of `[a, b]`, ascending.
    pub fn chebyshev(phi: Vec<CVec3>, psi: Vec<CVec3>, a: f64, b: f64, t: f64) -> Result<Self> {
        let n = phi.len();
        if n < 2 || !(b > a) {
            return Err(Error::BadParams(format!(
                "Chebyshev grid needs n >= 2 and a < b, got n = {n} on [{a}, {b}]"
            )));
        }
        Self::check_lengths(&phi, &psi)?;
        let (_, d) = chebyshev(n, a, b);
        Ok(Self {
            phi,
            psi,
            t,
            disc: Discretization::Chebyshev { a, b },
            diff: Diff::Matrix(Arc::new(d)),
        })
    }

    /// Sample `(φ, ψ)` from closures on the nodes of `disc`.
    pub fn sample(
        disc: Discretization,
        n: usize,
        t: f64,
        f: impl Fn(f64) -> (CVec3, CVec3),
    ) -> Result<Self> {
        let nodes = nodes_of(disc, n);
        let (phi, psi) = nodes.iter().map(|&s| f(s)).unzip();
        match disc {
            Discretization::Periodic { period } => Self::periodic(phi, psi, period, t),
            Discretization::Chebyshev { a, b } => Self::chebyshev(phi, psi, a, b, t),
        }
    }

    fn check_lengths(phi: &[CVec3], psi: &[CVec3]) -> Result<()> {
        if phi.len() != psi.len() {
            return Err(Error::BadParams(format!(
                "phi has {} samples but psi has {}",
                phi.len(),
                psi.len()
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.phi.len()
    }

    pub fn discretization(&self) -> Discretization {
        self.disc
    }

    pub fn nodes(&self) -> Vec<f64> {
        nodes_of(self.disc, self.n())
    }

    /// Spectral derivative in `s` of a sampled curve.
    pub fn ds(&self, v: &[CVec3]) -> Vec<CVec3> {
        match &self.diff {
            Diff::Fourier(d) => d.apply_vec(v),
            Diff::Matrix(d) => {
                let n = v.len();
                (0..n)
                    .map(|i| {
                        let row = &d[i * n..(i + 1) * n];
                        row.iter()
                            .zip(v)
                            .fold(CVec3::ZERO, |acc, (&w, x)| acc + x.scale(w))
                    })
                    .collect()
            }
        }
    }

    /// Time derivatives `(φ × D_s φ, φ × D_s ψ)`.
    pub fn rhs(&self, phi: &[CVec3], psi: &[CVec3]) -> (Vec<CVec3>, Vec<CVec3>) {
        let dphi = self.ds(phi);
        let dpsi = self.ds(psi);
        let a = phi.iter().zip(&dphi).map(|(p, d)| c3_cross(*p, *d)).collect();
        let b = phi.iter().zip(&dpsi).map(|(p, d)| c3_cross(*p, *d)).collect();
        (a, b)
    }

    /// Largest `||φ_j| − 1|`.
    pub fn norm_drift(&self) -> f64 {
        self.phi
            .iter()
            .map(|p| (p.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|ω(φ, D_s φ)|` and `|ω(φ, D_s ψ)|`.
    pub fn constraint_residuals(&self) -> (f64, f64) {
        let dphi = self.ds(&self.phi);
        let dpsi = self.ds(&self.psi);
        let mut a = 0.0_f64;
        let mut b = 0.0_f64;
        for j in 0..self.n() {
            a = a.max(omega(self.phi[j], dphi[j]).abs());
            b = b.max(omega(self.phi[j], dpsi[j]).abs());
        }
        (a, b)
    }
}

fn nodes_of(disc: Discretization, n: usize) -> Vec<f64> {
    match disc {
        Discretization::Periodic { period } => {
            (0..n).map(|j| j as f64 * period / n as f64).collect()
        }
        Discretization::Chebyshev { a, b } => {
            if n < 2 {
                return vec![a; n];
            }
            chebyshev(n, a, b).0
        }
    }
}

/// Unit-norm defect of `φ₀` and the two `ω` constraints on the initial curve.
pub fn validate_initial(state: &CurveState) -> ResidualReport {
    let dphi = state.ds(&state.phi);
    let dpsi = state.ds(&state.psi);
    let mut norm = Tally::default();
    let mut w_phi = Tally::default();
    let mut w_psi = Tally::default();
    for (j, s) in state.nodes().into_iter().enumerate() {
        let at = SamplePoint::st(s, state.t);
        norm.push((state.phi[j].norm() - 1.0).abs(), at);
        w_phi.push(omega(state.phi[j], dphi[j]).abs(), at);
        w_psi.push(omega(state.phi[j], dpsi[j]).abs(), at);
    }
    ResidualReport::from_tallies(
        vec![("norm", norm), ("omega_phi", w_phi), ("omega_psi", w_psi)],
        0,
        START_TOL,
    )
}

/// Step options.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepOptions {
    /// Rescale each `φ_j` to unit length after every step.
    #[serde(default)]
    pub renormalize: bool,
}

fn axpy(y: &[CVec3], h: f64, k: &[CVec3]) -> Vec<CVec3> {
    y.iter().zip(k).map(|(a, b)| *a + b.scale(h)).collect()
}

/// One classical RK4 step of size `dt`.
pub fn step(state: &CurveState, dt: f64, opts: StepOptions) -> Result<CurveState> {
    let (y1, z1) = (&state.phi, &state.psi);
    let (k1, l1) = state.rhs(y1, z1);
    let (y2, z2) = (axpy(y1, 0.5 * dt, &k1), axpy(z1, 0.5 * dt, &l1));
    let (k2, l2) = state.rhs(&y2, &z2);
    let (y3, z3) = (axpy(y1, 0.5 * dt, &k2), axpy(z1, 0.5 * dt, &l2));
    let (k3, l3) = state.rhs(&y3, &z3);
    let (y4, z4) = (axpy(y1, dt, &k3), axpy(z1, dt, &l3));
    let (k4, l4) = state.rhs(&y4, &z4);
    let combine = |y: &[CVec3], a: &[CVec3], b: &[CVec3], c: &[CVec3], d: &[CVec3]| -> Vec<CVec3> {
        (0..y.len())
            .map(|j| y[j] + (a[j] + (b[j] + c[j]).scale(2.0) + d[j]).scale(dt / 6.0))
            .collect()
    };
    let mut phi = combine(y1, &k1, &k2, &k3, &k4);
    let psi = combine(z1, &l1, &l2, &l3, &l4);
    let t = state.t + dt;
    let deviation = phi
        .iter()
        .map(|p| (p.norm() - 1.0).abs())
        .fold(0.0, |m: f64, d| if d.is_nan() { f64::INFINITY } else { m.max(d) });
    if deviation > BLOWUP_DEVIATION {
        return Err(Error::BlowUp { t, deviation });
    }
    if opts.renormalize {
        for p in phi.iter_mut() {
            *p = p.scale(1.0 / p.norm());
        }
    }
    Ok(CurveState {
        phi,
        psi,
        t,
        ..state.clone()
    })
}

/// Solver diagnostics at one stored time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub t: f64,
    pub norm_drift: f64,
    pub omega_phi: f64,
    pub omega_psi: f64,
}

impl Diagnostic {
    fn of(state: &CurveState) -> Self {
        let (omega_phi, omega_psi) = state.constraint_residuals();
        Self {
            t: state.t,
            norm_drift: state.norm_drift(),
            omega_phi,
            omega_psi,
        }
    }
}

/// Header line identifying the diagnostics CSV layout.
pub const DIAGNOSTICS_HEADER: &str = "# ruledsl evolve diagnostics v1";

/// Diagnostics as CSV, ordered by `t`.
pub fn diagnostics_csv(rows: &[Diagnostic]) -> String {
    let mut out = format!("{DIAGNOSTICS_HEADER}\nt,norm_drift,omega_phi,omega_psi\n");
    for d in rows {
        out.push_str(&format!(
            "{:?},{:e},{:e},{:e}\n",
            d.t, d.norm_drift, d.omega_phi, d.omega_psi
        ));
    }
    out
}

/// Output of a symmetric sweep.
#[derive(Clone, Debug)]
pub struct Evolution {
    pub surface: RuledSurface,
    /// Diagnostics at every stored snapshot, ordered by `t`.
    pub diagnostics: Vec<Diagnostic>,
    /// Step size used; `t_max` is an integer multiple of it.
    pub dt: f64,
}

/// Interpolant of a sampled curve in `s` with its first derivative.
#[derive(Clone, Debug)]
enum Curve1 {
    Fourier(Fourier1),
    Bary {
        nodes: Arc<Vec<f64>>,
        weights: Arc<Vec<f64>>,
        values: Vec<CVec3>,
        derivs: Vec<CVec3>,
    },
}

fn bary_eval(nodes: &[f64], weights: &[f64], values: &[CVec3], s: f64) -> CVec3 {
    let mut num = CVec3::ZERO;
    let mut den = 0.0;
    for (j, &x) in nodes.iter().enumerate() {
        let d = s - x;
        if d == 0.0 {
            return values[j];
        }
        let w = weights[j] / d;
        num += values[j].scale(w);
        den += w;
    }
    num.scale(1.0 / den)
}

impl Curve1 {
    fn eval(&self, s: f64) -> (CVec3, CVec3) {
        match self {
            Curve1::Fourier(f) => f.eval(s),
            Curve1::Bary {
                nodes,
                weights,
                values,
                derivs,
            } => (
                bary_eval(nodes, weights, values, s),
                bary_eval(nodes, weights, derivs, s),
            ),
        }
    }
}

#[derive(Clone, Debug)]
struct Snapshot {
    t: f64,
    phi: Curve1,
    psi: Curve1,
    phi_t: Curve1,
    psi_t: Curve1,
}

/// Surface swept by an evolution: spectral in `s`, cubic Hermite in `t`.
#[derive(Debug)]
struct EvolvedMap {
    snaps: Vec<Snapshot>,
}

/// Cubic Hermite basis `(h00, h10, h01, h11)` and its `t`-derivative.
fn hermite(x: f64, h: f64) -> ([f64; 4], [f64; 4]) {
    let x2 = x * x;
    let x3 = x2 * x;
    (
        [2.0 * x3 - 3.0 * x2 + 1.0, (x3 - 2.0 * x2 + x) * h, -2.0 * x3 + 3.0 * x2, (x3 - x2) * h],
        [
            (6.0 * x2 - 6.0 * x) / h,
            3.0 * x2 - 4.0 * x + 1.0,
            (-6.0 * x2 + 6.0 * x) / h,
            3.0 * x2 - 2.0 * x,
        ],
    )
}

impl EvolvedMap {
    /// Index of the snapshot interval containing `t`, clamped to the ends.
    fn interval(&self, t: f64) -> usize {
        let last = self.snaps.len() - 2;
        match self.snaps.binary_search_by(|s| s.t.total_cmp(&t)) {
            Ok(i) => i.min(last),
            Err(i) => i.saturating_sub(1).min(last),
        }
    }
}

impl RuledMap for EvolvedMap {
    fn jet(&self, s: f64, t: f64) -> RulingJet {
        let i = self.interval(t);
        let (a, b) = (&self.snaps[i], &self.snaps[i + 1]);
        let h = b.t - a.t;
        let (w, dw) = hermite((t - a.t) / h, h);
        let mix = |x: &Curve1, dx: &Curve1, y: &Curve1, dy: &Curve1| {
            let (x0, x1) = x.eval(s);
            let (m0, m1) = dx.eval(s);
            let (y0, y1) = y.eval(s);
            let (n0, n1) = dy.eval(s);
            let value = x0.scale(w[0]) + m0.scale(w[1]) + y0.scale(w[2]) + n0.scale(w[3]);
            let ds = x1.scale(w[0]) + m1.scale(w[1]) + y1.scale(w[2]) + n1.scale(w[3]);
            let dt = x0.scale(dw[0]) + m0.scale(dw[1]) + y0.scale(dw[2]) + n0.scale(dw[3]);
            (value, ds, dt)
        };
        let (phi, phi_s, phi_t) = mix(&a.phi, &a.phi_t, &b.phi, &b.phi_t);
        let (psi, psi_s, psi_t) = mix(&a.psi, &a.psi_t, &b.psi, &b.psi_t);
        RulingJet {
            phi,
            phi_s,
            phi_t,
            psi,
            psi_s,
            psi_t,
        }
    }
}

fn snapshot(state: &CurveState) -> Snapshot {
    let (phi_t, psi_t) = state.rhs(&state.phi, &state.psi);
    let curve = |v: &[CVec3]| match state.disc {
        Discretization::Periodic { period } => Curve1::Fourier(Fourier1::new(v, period)),
        Discretization::Chebyshev { .. } => {
            let n = v.len();
            let weights: Vec<f64> = (0..n)
                .map(|j| {
                    let edge = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
                    edge * if j % 2 == 0 { 1.0 } else { -1.0 }
                })
                .collect();
            Curve1::Bary {
                nodes: Arc::new(state.nodes()),
                weights: Arc::new(weights),
                values: v.to_vec(),
                derivs: state.ds(v),
            }
        }
    };
    Snapshot {
        t: state.t,
        phi: curve(&state.phi),
        psi: curve(&state.psi),
        phi_t: curve(&phi_t),
        psi_t: curve(&psi_t),
    }
}

/// Evolve until `|t − t₀| = t_max` in both directions and assemble the swept
/// surface over `s × [t₀ − t_max, t₀ + t_max]`.
///
/// The step is shrunk so that `t_max` is a whole number of steps.
pub fn evolve_to_surface(
    state: &CurveState,
    t_max: f64,
    dt: f64,
    opts: StepOptions,
) -> Result<Evolution> {
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::BadRange(format!("t_max must be positive, got {t_max}")));
    }
    if !(dt > 0.0) {
        return Err(Error::BadRange(format!("dt must be positive, got {dt}")));
    }
    let start = validate_initial(state);
    if !start.pass {
        return Err(Error::ConstraintViolation {
            residual: start.max(),
            tolerance: START_TOL,
        });
    }
    let steps = (t_max / dt - 1e-9).ceil().max(1.0) as usize;
    let h = t_max / steps as f64;
    let stride = ((SNAPSHOT_SPACING / h).floor() as usize).max(1);

    let sweep = |sign: f64| -> Result<Vec<CurveState>> {
        let mut out = Vec::new();
        let mut cur = state.clone();
        for k in 1..=steps {
            cur = step(&cur, sign * h, opts)?;
            cur.t = state.t + sign * (k as f64) * h;
            if k % stride == 0 || k == steps {
                out.push(cur.clone());
            }
        }
        Ok(out)
    };
    let forward = sweep(1.0)?;
    let backward = sweep(-1.0)?;
    let states: Vec<&CurveState> = backward
        .iter()
        .rev()
        .chain(std::iter::once(state))
        .chain(forward.iter())
        .collect();
    let diagnostics = states.iter().map(|s| Diagnostic::of(s)).collect();
    let snaps = states.iter().map(|s| snapshot(s)).collect();

    let (n, period) = match state.disc {
        Discretization::Periodic { period } => (state.n(), period),
        Discretization::Chebyshev { a, b } => (state.n(), b - a),
    };
    let surface = RuledSurface::new(
        Arc::new(EvolvedMap { snaps }),
        Provenance::Evolved {
            n,
            period,
            dt: h,
            t_max,
        },
        DerivativeSource::Spectral,
    );
    Ok(Evolution {
        surface,
        diagnostics,
        dt: h,
    })
}

/// Initial curve data with a known exact evolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// `φ₀(s) = φ(s, t₀)` on a catalog cone and `ψ₀ = twist · φ_s` there.
    ConeSlice {
        cone: ConeSpec,
        #[serde(default)]
        t0: f64,
        #[serde(default)]
        twist: f64,
    },
    /// Harvey–Lawson link composed with the conformal map
    /// `F(ζ) = ζ + (log(1 − q e^{−iζ/2}) − log(1 − q e^{iζ/2})) / 2i`,
    /// which keeps period `4π` in `s` but has every Fourier mode; `ψ₀ = 0`.
    HlReparametrized { q: f64 },
}

impl InitialData {
    /// Period of the curve in `s`.
    pub fn period(&self) -> f64 {
        match self {
            InitialData::ConeSlice {
                cone: ConeSpec::Joyce { .. },
                ..
            } => 2.0 * PI,
            _ => 4.0 * PI,
        }
    }

    fn validate(&self) -> Result<()> {
        if let InitialData::HlReparametrized { q } = self {
            if !(q.abs() < 0.9) {
                return Err(Error::BadParams(format!("|q| must be below 0.9, got {q}")));
            }
        }
        Ok(())
    }

    /// Periodic curve state with `n` samples.
    pub fn state(&self, n: usize) -> Result<CurveState> {
        self.validate()?;
        let period = self.period();
        let t0 = match self {
            InitialData::ConeSlice { t0, .. } => *t0,
            InitialData::HlReparametrized { .. } => 0.0,
        };
        CurveState::sample(Discretization::Periodic { period }, n, t0, |s| {
            self.exact(s, t0)
        })
    }

    /// The exact solution `(φ, ψ)` at `(s, t)`.
    pub fn exact(&self, s: f64, t: f64) -> (CVec3, CVec3) {
        match *self {
            InitialData::ConeSlice { cone, twist, .. } => {
                let j = cone.build().jet(s, t);
                (j.phi, j.phi_s.scale(twist))
            }
            InitialData::HlReparametrized { q } => {
                let z = reparametrize(q, Complex64::new(s, t));
                (crate::cone::hl_cone().phi(z.re, z.im), CVec3::ZERO)
            }
        }
    }

    /// The cone parameters when the data is a cone slice.
    pub fn joyce_params(&self) -> Option<JoyceParams> {
        match self {
            InitialData::ConeSlice {
                cone: ConeSpec::Joyce { b },
                ..
            } => Some(*b),
            _ => None,
        }
    }
}

fn reparametrize(q: f64, z: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let e = (Complex64::i() * z * 0.5).exp();
    let d = (one - q / e).ln() - (one - q * e).ln();
    z + d / Complex64::new(0.0, 2.0)
}

/// Largest `|φ − φ_exact|` and `|ψ − ψ_exact|` over the nodes of `state`.
pub fn error_against(state: &CurveState, exact: impl Fn(f64, f64) -> (CVec3, CVec3)) -> (f64, f64) {
    let mut a = 0.0_f64;
    let mut b = 0.0_f64;
    for (j, s) in state.nodes().into_iter().enumerate() {
        let (p, q) = exact(s, state.t);
        a = a.max((state.phi[j] - p).norm());
        b = b.max((state.psi[j] - q).norm());
    }
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Axis, Grid2, Grid3};
    use crate::verify::sl_defect;

    const HL: InitialData = InitialData::ConeSlice {
        cone: ConeSpec::Hl,
        t0: 0.0,
        twist: 0.0,
    };

    fn run(state: &CurveState, t_end: f64, dt: f64) -> CurveState {
        let steps = (t_end / dt).round() as usize;
        let mut cur = state.clone();
        for _ in 0..steps {
            cur = step(&cur, dt, StepOptions::default()).unwrap();
        }
        cur
    }

    #[test]
    fn cone_slice_satisfies_constraints() {
        let rep = validate_initial(&HL.state(64).unwrap());
        assert!(rep.max() < 1e-12, "{rep:?}");
        let joyce = InitialData::ConeSlice {
            cone: ConeSpec::Joyce {
                b: JoyceParams::new(-2, 1, 1).unwrap(),
            },
            t0: 0.3,
            twist: 1.0,
        };
        assert!(validate_initial(&joyce.state(64).unwrap()).max() < 1e-10);
    }

    #[test]
    fn constant_curve_is_admissible() {
        let disc = Discretization::Periodic { period: 1.0 };
        let st = CurveState::sample(disc, 8, 0.0, |_| (CVec3::real(0.0, 1.0, 0.0), CVec3::ZERO)).unwrap();
        assert_eq!(validate_initial(&st).max(), 0.0);
    }

    #[test]
    fn omega_violation_is_reported() {
        let disc = Discretization::Periodic { period: 2.0 * PI };
        let st = CurveState::sample(disc, 16, 0.0, |s| {
            (CVec3::new(Complex64::from_polar(1.0, s), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)), CVec3::ZERO)
        })
        .unwrap();
        let rep = validate_initial(&st);
        assert!(rep.condition("omega_phi").unwrap().max > 1e-2);
        assert!(matches!(
            evolve_to_surface(&st, 0.1, 0.01, StepOptions::default()),
            Err(Error::ConstraintViolation { .. })
        ));
    }

    #[test]
    fn zero_step_is_identity() {
        let st = HL.state(16).unwrap();
        let next = step(&st, 0.0, StepOptions::default()).unwrap();
        assert_eq!(next.phi, st.phi);
        assert_eq!(next.psi, st.psi);
    }

    #[test]
    fn bad_sizes_are_rejected() {
        let v = vec![CVec3::ZERO; 12];
        assert!(CurveState::periodic(v.clone(), v.clone(), 1.0, 0.0).is_err());
        assert!(CurveState::periodic(vec![CVec3::ZERO; 8], v, 1.0, 0.0).is_err());
    }

    #[test]
    fn hl_slice_tracks_closed_form() {
        let st = HL.state(128).unwrap();
        let end = run(&st, 0.25, 1e-3);
        let (err, _) = error_against(&end, |s, t| HL.exact(s, t));
        assert!(err < 1e-6, "{err}");
        assert!(end.norm_drift() < 1e-8);
        let (a, b) = end.constraint_residuals();
        assert!(a < 1e-7 && b < 1e-7);
    }

    #[test]
    fn lie_derivative_data_tracks_closed_form() {
        let data = InitialData::ConeSlice {
            cone: ConeSpec::Hl,
            t0: 0.0,
            twist: 1.0,
        };
        let end = run(&data.state(64).unwrap(), 0.25, 1e-3);
        let (_, err) = error_against(&end, |s, t| data.exact(s, t));
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn zero_psi_stays_zero() {
        let end = run(&HL.state(32).unwrap(), 0.05, 1e-2);
        assert!(end.psi.iter().all(|p| *p == CVec3::ZERO));
    }

    #[test]
    fn reparametrized_data_is_a_valid_start() {
        let data = InitialData::HlReparametrized { q: 0.5 };
        let rep = validate_initial(&data.state(128).unwrap());
        assert!(rep.max() < 1e-12, "{rep:?}");
    }

    #[test]
    fn spatial_refinement_gains_an_order_of_magnitude() {
        let data = InitialData::HlReparametrized { q: 0.5 };
        let err = |n: usize| {
            let end = run(&data.state(n).unwrap(), 0.25, 1e-3);
            error_against(&end, |s, t| data.exact(s, t)).0
        };
        let (e32, e64) = (err(32), err(64));
        assert!(e64 <= 0.1 * e32, "{e32} {e64}");
    }

    #[test]
    fn halving_the_step_gains_fourth_order() {
        let st = HL.state(32).unwrap();
        let err = |dt: f64| error_against(&run(&st, 0.25, dt), |s, t| HL.exact(s, t)).0;
        let ratio = err(0.025) / err(0.0125);
        let order = ratio.log2();
        assert!((3.7..=4.3).contains(&order), "order {order}");
    }

    #[test]
    fn runs_are_bitwise_repeatable() {
        let st = InitialData::HlReparametrized { q: 0.5 }.state(64).unwrap();
        let a = run(&st, 0.05, 1e-3);
        let b = run(&st, 0.05, 1e-3);
        assert_eq!(a.phi, b.phi);
        assert_eq!(a.psi, b.psi);
    }

    #[test]
    fn evolved_surface_is_sl() {
        let data = InitialData::ConeSlice {
            cone: ConeSpec::Hl,
            t0: 0.0,
            twist: 0.5,
        };
        let evo = evolve_to_surface(&data.state(64).unwrap(), 0.1, 2e-3, StepOptions::default()).unwrap();
        let grid = Grid3::new(
            Grid2::new(Axis::periodic(0.0, 4.0 * PI, 12), Axis::closed(-0.09, 0.09, 7)),
            Grid3::r_values(0.5, 3.0, 3, true),
        );
        let rep = sl_defect(&evo.surface, &grid, 0.0, 1e-6).unwrap();
        assert!(rep.pass, "{rep:?}");
        let (p, q) = data.exact(1.1, 0.033);
        let j = evo.surface.jet(1.1, 0.033);
        let e = ((j.phi - p).norm(), (j.psi - q).norm());
        assert!(e.0 < 1e-9 && e.1 < 1e-9, "{e:?}");
        assert_eq!(evo.diagnostics.first().unwrap().t, -0.1);
        assert!(evo.diagnostics.windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn zero_sweep_is_rejected() {
        assert!(matches!(
            evolve_to_surface(&HL.state(16).unwrap(), 0.0, 1e-3, StepOptions::default()),
            Err(Error::BadRange(_))
        ));
    }

    #[test]
    fn oversized_step_blows_up() {
        let st = HL.state(16).unwrap();
        let err = step(&st, 3.0, StepOptions::default()).unwrap_err();
        assert!(matches!(err, Error::BlowUp { deviation, .. } if deviation > BLOWUP_DEVIATION));
    }

    #[test]
    fn renormalization_keeps_unit_length() {
        let st = HL.state(16).unwrap();
        let next = step(&st, 0.05, StepOptions { renormalize: true }).unwrap();
        assert!(next.norm_drift() < 1e-15);
    }

    #[test]
    fn chebyshev_mode_short_run() {
        let disc = Discretization::Chebyshev { a: 0.0, b: 2.0 };
        let st = CurveState::sample(disc, 16, 0.0, |s| HL.exact(s, 0.0)).unwrap();
        assert!(validate_initial(&st).max() < 1e-10);
        let end = run(&st, 0.01, 1e-4);
        let (err, _) = error_against(&end, |s, t| HL.exact(s, t));
        assert!(err < 1e-6, "{err}");
        let evo = evolve_to_surface(&st, 0.005, 1e-4, StepOptions::default()).unwrap();
        let (p, _) = HL.exact(0.7, 0.002);
        assert!((evo.surface.phi(0.7, 0.002) - p).norm() < 1e-6);
    }
}
