//! Linear algebra on C³ with its standard Calabi–Yau structure.
//!
//! With coordinates `z = (z1, z2, z3)` the metric, Kähler form and holomorphic
//! volume form are
//!
//! ```text
//! g = |dz1|² + |dz2|² + |dz3|²
//! ω = (i/2)(dz1∧dz̄1 + dz2∧dz̄2 + dz3∧dz̄3)
//! Ω = dz1∧dz2∧dz3
//! ```
//!
//! All forms are evaluated through closed coordinate expressions.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A point or tangent vector of C³.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CVec3 {
    pub z1: Complex64,
    pub z2: Complex64,
    pub z3: Complex64,
}

impl CVec3 {
    pub const ZERO: Self = Self::new(ZERO, ZERO, ZERO);

    pub const fn new(z1: Complex64, z2: Complex64, z3: Complex64) -> Self {
        Self { z1, z2, z3 }
    }

    /// Vector with purely real coordinates.
    pub const fn real(x1: f64, x2: f64, x3: f64) -> Self {
        Self::new(
            Complex64::new(x1, 0.0),
            Complex64::new(x2, 0.0),
            Complex64::new(x3, 0.0),
        )
    }

    /// Real coordinate unit vector `e_j`, `j ∈ {0, 1, 2}`.
    pub fn unit(j: usize) -> Self {
        let mut v = Self::ZERO;
        v[j] = ONE;
        v
    }

    pub fn from_array(a: [Complex64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [Complex64; 3] {
        [self.z1, self.z2, self.z3]
    }

    /// Coordinates in R⁶ ordered `(x1, x2, x3, y1, y2, y3)` with `z_j = x_j + i y_j`.
    pub fn to_real6(self) -> [f64; 6] {
        [
            self.z1.re, self.z2.re, self.z3.re, self.z1.im, self.z2.im, self.z3.im,
        ]
    }

    pub fn from_real6(x: [f64; 6]) -> Self {
        Self::new(
            Complex64::new(x[0], x[3]),
            Complex64::new(x[1], x[4]),
            Complex64::new(x[2], x[5]),
        )
    }

    pub fn scale(self, a: f64) -> Self {
        Self::new(self.z1 * a, self.z2 * a, self.z3 * a)
    }

    pub fn cscale(self, a: Complex64) -> Self {
        Self::new(self.z1 * a, self.z2 * a, self.z3 * a)
    }

    pub fn conj(self) -> Self {
        Self::new(self.z1.conj(), self.z2.conj(), self.z3.conj())
    }

    /// Hermitian pairing `Σ u_j v̄_j`.
    pub fn hermitian(self, other: Self) -> Complex64 {
        self.z1 * other.z1.conj() + self.z2 * other.z2.conj() + self.z3 * other.z3.conj()
    }

    pub fn norm_sqr(self) -> f64 {
        self.z1.norm_sqr() + self.z2.norm_sqr() + self.z3.norm_sqr()
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Largest coordinate modulus.
    pub fn sup_norm(self) -> f64 {
        self.z1.norm().max(self.z2.norm()).max(self.z3.norm())
    }

    pub fn is_finite(self) -> bool {
        self.to_array()
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl std::ops::Index<usize> for CVec3 {
    type Output = Complex64;
    fn index(&self, j: usize) -> &Complex64 {
        match j {
            0 => &self.z1,
            1 => &self.z2,
            2 => &self.z3,
            _ => panic!("CVec3 index {j} out of range"),
        }
    }
}

impl std::ops::IndexMut<usize> for CVec3 {
    fn index_mut(&mut self, j: usize) -> &mut Complex64 {
        match j {
            0 => &mut self.z1,
            1 => &mut self.z2,
            2 => &mut self.z3,
            _ => panic!("CVec3 index {j} out of range"),
        }
    }
}

impl Add for CVec3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.z1 + o.z1, self.z2 + o.z2, self.z3 + o.z3)
    }
}

impl Sub for CVec3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.z1 - o.z1, self.z2 - o.z2, self.z3 - o.z3)
    }
}

impl Neg for CVec3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.z1, -self.z2, -self.z3)
    }
}

impl AddAssign for CVec3 {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl SubAssign for CVec3 {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl Mul<f64> for CVec3 {
    type Output = Self;
    fn mul(self, a: f64) -> Self {
        self.scale(a)
    }
}

impl Mul<CVec3> for f64 {
    type Output = CVec3;
    fn mul(self, v: CVec3) -> CVec3 {
        v.scale(self)
    }
}

impl Mul<Complex64> for CVec3 {
    type Output = Self;
    fn mul(self, a: Complex64) -> Self {
        self.cscale(a)
    }
}

/// Ordered triple of tangent vectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame3 {
    pub v1: CVec3,
    pub v2: CVec3,
    pub v3: CVec3,
}

impl Frame3 {
    pub fn new(v1: CVec3, v2: CVec3, v3: CVec3) -> Self {
        Self { v1, v2, v3 }
    }

    pub fn vectors(&self) -> [CVec3; 3] {
        [self.v1, self.v2, self.v3]
    }

    pub fn map(&self, f: impl Fn(CVec3) -> CVec3) -> Self {
        Self::new(f(self.v1), f(self.v2), f(self.v3))
    }
}

/// Euclidean metric `g(u, v) = Re Σ u_j v̄_j`.
pub fn metric_g(u: CVec3, v: CVec3) -> f64 {
    u.hermitian(v).re
}

/// Kähler form `ω(u, v) = −Im Σ u_j v̄_j`.
pub fn omega(u: CVec3, v: CVec3) -> f64 {
    -u.hermitian(v).im
}

/// Holomorphic volume form: the complex determinant of the frame.
pub fn omega_complex(f: &Frame3) -> Complex64 {
    let (a, b, c) = (f.v1, f.v2, f.v3);
    a.z1 * (b.z2 * c.z3 - b.z3 * c.z2) - a.z2 * (b.z1 * c.z3 - b.z3 * c.z1)
        + a.z3 * (b.z1 * c.z2 - b.z2 * c.z1)
}

/// Anti-bilinear cross product
/// `u × v = (ū2 v̄3 − ū3 v̄2, ū3 v̄1 − ū1 v̄3, ū1 v̄2 − ū2 v̄1)`.
pub fn c3_cross(u: CVec3, v: CVec3) -> CVec3 {
    CVec3::new(
        (u.z2 * v.z3 - u.z3 * v.z2).conj(),
        (u.z3 * v.z1 - u.z1 * v.z3).conj(),
        (u.z1 * v.z2 - u.z2 * v.z1).conj(),
    )
}

/// Normalized defect of `span_R(v1, v2, v3)` from being a special Lagrangian
/// 3-plane of phase `e^{iθ}`.
///
/// Returns the larger of `|ω(v_i, v_j)| / (|v_i||v_j|)` over pairs and
/// `|sin θ ReΩ − cos θ ImΩ| / (|v1||v2||v3|)`.
pub fn sl_plane_defect(frame: &Frame3, phase_angle: f64) -> Result<f64> {
    let vs = frame.vectors();
    let norms = [vs[0].norm(), vs[1].norm(), vs[2].norm()];
    if let Some(j) = norms.iter().position(|&n| n == 0.0) {
        return Err(Error::ZeroVector(j));
    }
    Ok(plane_defect_with_norms(frame, &norms, phase_angle))
}

pub(crate) fn plane_defect_with_norms(frame: &Frame3, norms: &[f64; 3], theta: f64) -> f64 {
    let (kahler, special) = plane_defect_parts(frame, norms, theta);
    kahler.max(special)
}

/// The Kähler and phase parts of the plane defect, separately.
pub(crate) fn plane_defect_parts(frame: &Frame3, norms: &[f64; 3], theta: f64) -> (f64, f64) {
    let vs = frame.vectors();
    let mut kahler = 0.0_f64;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        kahler = kahler.max(omega(vs[i], vs[j]).abs() / (norms[i] * norms[j]));
    }
    let vol = omega_complex(frame);
    let (sin, cos) = theta.sin_cos();
    let special = (sin * vol.re - cos * vol.im).abs() / (norms[0] * norms[1] * norms[2]);
    (kahler, special)
}

/// 3×3 complex matrix acting on C³, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat3 {
    pub m: [[Complex64; 3]; 3],
}

impl CMat3 {
    pub const IDENTITY: Self = Self {
        m: [[ONE, ZERO, ZERO], [ZERO, ONE, ZERO], [ZERO, ZERO, ONE]],
    };

    pub fn apply(&self, v: CVec3) -> CVec3 {
        let mut out = CVec3::ZERO;
        for i in 0..3 {
            out[i] = self.m[i][0] * v.z1 + self.m[i][1] * v.z2 + self.m[i][2] * v.z3;
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut a = Self::IDENTITY;
        for i in 0..3 {
            for j in 0..3 {
                a.m[i][j] = self.m[j][i].conj();
            }
        }
        a
    }

    pub fn matmul(&self, o: &Self) -> Self {
        let mut r = Self::IDENTITY;
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] = (0..3).map(|k| self.m[i][k] * o.m[k][j]).sum();
            }
        }
        r
    }

    pub fn det(&self) -> Complex64 {
        let col = |j: usize| CVec3::new(self.m[0][j], self.m[1][j], self.m[2][j]);
        omega_complex(&Frame3::new(col(0), col(1), col(2)))
    }

    /// Max-entry distance from the identity.
    pub fn distance_from_identity(&self) -> f64 {
        let mut d = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { ONE } else { ZERO };
                d = d.max((self.m[i][j] - e).norm());
            }
        }
        d
    }
}

/// Deterministic pseudo-random element of SU(3).
///
/// A seeded Gaussian complex matrix is orthonormalized column by column and
/// the last column is rotated to make the determinant exactly one.
pub fn random_su3(seed: u64) -> CMat3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut cols = [CVec3::ZERO; 3];
        for col in cols.iter_mut() {
            for j in 0..3 {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                col[j] = Complex64::new(re, im);
            }
        }
        let mut ok = true;
        for k in 0..3 {
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for p in 0..k {
                    let proj = cols[k].hermitian(cols[p]);
                    cols[k] -= cols[p].cscale(proj);
                }
            }
            let n = cols[k].norm();
            if n < 1e-8 {
                ok = false;
                break;
            }
            cols[k] = cols[k].scale(1.0 / n);
        }
        if !ok {
            continue;
        }
        let mut a = CMat3::IDENTITY;
        for i in 0..3 {
            for j in 0..3 {
                a.m[i][j] = cols[j][i];
            }
        }
        let d = a.det();
        let fix = (d / d.norm()).conj();
        for i in 0..3 {
            a.m[i][2] *= fix;
        }
        return a;
    }
}
