//! Fourier and Chebyshev differentiation on uniform and extrema grids.
//!
//! The periodic machinery treats the Nyquist mode of an even-length grid as
//! `cos(n/2 · ωx)`, so odd derivatives of that mode vanish on grid nodes and
//! interpolants stay symmetric.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::complex3::CVec3;

fn wavenumber(p: usize, n: usize) -> f64 {
    if 2 * p < n {
        p as f64
    } else {
        p as f64 - n as f64
    }
}

fn is_nyquist(p: usize, n: usize) -> bool {
    n % 2 == 0 && 2 * p == n
}

/// First-derivative operator on a uniform periodic grid of `n` points.
pub struct PeriodicDiff {
    n: usize,
    period: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    multipliers: Vec<Complex64>,
}

impl std::fmt::Debug for PeriodicDiff {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicDiff")
            .field("n", &self.n)
            .field("period", &self.period)
            .finish()
    }
}

impl Clone for PeriodicDiff {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            period: self.period,
            forward: Arc::clone(&self.forward),
            inverse: Arc::clone(&self.inverse),
            multipliers: self.multipliers.clone(),
        }
    }
}

impl PeriodicDiff {
    pub fn new(n: usize, period: f64) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let omega = 2.0 * PI / period;
        let scale = 1.0 / n as f64;
        let multipliers = (0..n)
            .map(|p| {
                if is_nyquist(p, n) {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, omega * wavenumber(p, n) * scale)
                }
            })
            .collect();
        Self {
            n,
            period,
            forward,
            inverse,
            multipliers,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Differentiate a scalar sequence in place.
    pub fn apply(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.n);
        self.forward.process(data);
        for (d, m) in data.iter_mut().zip(&self.multipliers) {
            *d *= m;
        }
        self.inverse.process(data);
    }

    /// Differentiate each coordinate of a sequence of C³ samples.
    pub fn apply_vec(&self, samples: &[CVec3]) -> Vec<CVec3> {
        let mut out = vec![CVec3::ZERO; samples.len()];
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n];
        for j in 0..3 {
            for (b, s) in buf.iter_mut().zip(samples) {
                *b = s[j];
            }
            self.apply(&mut buf);
            for (o, b) in out.iter_mut().zip(&buf) {
                o[j] = *b;
            }
        }
        out
    }
}

/// Per-axis basis values `(B, B', B'')` at a point for each Fourier mode.
fn basis(n: usize, period: f64, x: f64) -> Vec<[Complex64; 3]> {
    let omega = 2.0 * PI / period;
    (0..n)
        .map(|p| {
            let k = wavenumber(p, n) * omega;
            if is_nyquist(p, n) {
                let k = k.abs();
                let (s, c) = (k * x).sin_cos();
                [
                    Complex64::new(c, 0.0),
                    Complex64::new(-k * s, 0.0),
                    Complex64::new(-k * k * c, 0.0),
                ]
            } else {
                let e = Complex64::from_polar(1.0, k * x);
                let ik = Complex64::new(0.0, k);
                [e, e * ik, e * ik * ik]
            }
        })
        .collect()
}

/// Values and derivatives up to second order of a trigonometric interpolant.
#[derive(Clone, Copy, Debug, Default)]
pub struct Jet2 {
    pub value: CVec3,
    pub ds: CVec3,
    pub dt: CVec3,
    pub dss: CVec3,
    pub dst: CVec3,
    pub dtt: CVec3,
}

/// Trigonometric interpolant of C³ samples on a doubly periodic grid.
#[derive(Clone, Debug)]
pub struct Fourier2 {
    ns: usize,
    nt: usize,
    period_s: f64,
    period_t: f64,
    origin: (f64, f64),
    // coeffs[j][p * nt + q]
    coeffs: [Vec<Complex64>; 3],
}

impl Fourier2 {
    /// `samples[i * nt + j]` is the value at `origin + (i L_s / ns, j L_t / nt)`.
    pub fn new(
        samples: &[CVec3],
        ns: usize,
        nt: usize,
        periods: (f64, f64),
        origin: (f64, f64),
    ) -> Self {
        assert_eq!(samples.len(), ns * nt);
        let mut planner = FftPlanner::new();
        let fs = planner.plan_fft_forward(ns);
        let ft = planner.plan_fft_forward(nt);
        let scale = 1.0 / (ns * nt) as f64;
        let coeffs = [0, 1, 2].map(|j| {
            let mut a: Vec<Complex64> = samples.iter().map(|v| v[j]).collect();
            for row in a.chunks_mut(nt) {
                ft.process(row);
            }
            let mut col = vec![Complex64::new(0.0, 0.0); ns];
            for q in 0..nt {
                for p in 0..ns {
                    col[p] = a[p * nt + q];
                }
                fs.process(&mut col);
                for p in 0..ns {
                    a[p * nt + q] = col[p] * scale;
                }
            }
            a
        });
        Self {
            ns,
            nt,
            period_s: periods.0,
            period_t: periods.1,
            origin,
            coeffs,
        }
    }

    pub fn periods(&self) -> (f64, f64) {
        (self.period_s, self.period_t)
    }

    pub fn jet(&self, s: f64, t: f64) -> Jet2 {
        let bs = basis(self.ns, self.period_s, s - self.origin.0);
        let bt = basis(self.nt, self.period_t, t - self.origin.1);
        let mut out = [CVec3::ZERO; 6];
        for j in 0..3 {
            let c = &self.coeffs[j];
            let mut acc = [Complex64::new(0.0, 0.0); 6];
            for (p, bsp) in bs.iter().enumerate() {
                let row = &c[p * self.nt..(p + 1) * self.nt];
                let mut inner = [Complex64::new(0.0, 0.0); 3];
                for (cq, btq) in row.iter().zip(&bt) {
                    inner[0] += cq * btq[0];
                    inner[1] += cq * btq[1];
                    inner[2] += cq * btq[2];
                }
                acc[0] += bsp[0] * inner[0];
                acc[1] += bsp[1] * inner[0];
                acc[2] += bsp[0] * inner[1];
                acc[3] += bsp[2] * inner[0];
                acc[4] += bsp[1] * inner[1];
                acc[5] += bsp[0] * inner[2];
            }
            for d in 0..6 {
                out[d][j] = acc[d];
            }
        }
        Jet2 {
            value: out[0],
            ds: out[1],
            dt: out[2],
            dss: out[3],
            dst: out[4],
            dtt: out[5],
        }
    }
}

/// Trigonometric interpolant of C³ samples on a periodic 1-D grid, with the
/// first derivative.
#[derive(Clone, Debug)]
pub struct Fourier1 {
    n: usize,
    period: f64,
    coeffs: [Vec<Complex64>; 3],
}

impl Fourier1 {
    pub fn new(samples: &[CVec3], period: f64) -> Self {
        let n = samples.len();
        let mut planner = FftPlanner::new();
        let f = planner.plan_fft_forward(n);
        let scale = 1.0 / n as f64;
        let coeffs = [0, 1, 2].map(|j| {
            let mut a: Vec<Complex64> = samples.iter().map(|v| v[j]).collect();
            f.process(&mut a);
            a.iter_mut().for_each(|x| *x *= scale);
            a
        });
        Self { n, period, coeffs }
    }

    /// Value and first derivative at `s`.
    pub fn eval(&self, s: f64) -> (CVec3, CVec3) {
        let b = basis(self.n, self.period, s);
        let mut v = CVec3::ZERO;
        let mut d = CVec3::ZERO;
        for j in 0..3 {
            for (c, bp) in self.coeffs[j].iter().zip(&b) {
                v[j] += c * bp[0];
                d[j] += c * bp[1];
            }
        }
        (v, d)
    }
}

/// Chebyshev–Gauss–Lobatto nodes on `[a, b]`, ascending, and the matching
/// first-derivative matrix (row-major).
pub fn chebyshev(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "Chebyshev grid needs at least two nodes");
    let m = n - 1;
    // standard nodes x_j = cos(πj/m) on [-1, 1], descending
    let x: Vec<f64> = (0..n).map(|j| (PI * j as f64 / m as f64).cos()).collect();
    let cw: Vec<f64> = (0..n)
        .map(|j| {
            let edge = if j == 0 || j == m { 2.0 } else { 1.0 };
            edge * if j % 2 == 0 { 1.0 } else { -1.0 }
        })
        .collect();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j {
                let v = cw[i] / cw[j] / (x[i] - x[j]);
                d[i * n + j] = v;
                row_sum += v;
            }
        }
        d[i * n + i] = -row_sum;
    }
    // reverse to ascending order and map to [a, b]
    let half = 0.5 * (b - a);
    let nodes: Vec<f64> = (0..n).map(|j| a + half * (1.0 + x[m - j])).collect();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = d[(m - i) * n + (m - j)] / half;
        }
    }
    (nodes, out)
}
