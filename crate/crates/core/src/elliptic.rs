//! Jacobi elliptic functions `sn`, `cn`, `dn` for real argument.
//!
//! **Convention:** `k` is the *modulus*, not the parameter `m = k²`. With this
//! convention `sn(t, 0) = sin t` and `sn(t, 1) = tanh t`, and
//!
//! ```text
//! sn' = cn dn,   cn' = −sn dn,   dn' = −k² sn cn.
//! ```
//!
//! Evaluation uses the descending Landen (arithmetic-geometric mean) scheme.
//! The argument is first folded into `[0, 2K]` using the parity and
//! half-period symmetries, which keeps the error flat for large `|t|`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(sn, cn, dn)` at argument `t` and modulus `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
    pub t: f64,
    pub k: f64,
}

const MAX_AGM_STEPS: usize = 64;

fn check_modulus(k: f64) -> Result<()> {
    if (0.0..=1.0).contains(&k) {
        Ok(())
    } else {
        Err(Error::ModulusOutOfRange(k))
    }
}

/// Arithmetic-geometric mean of two positive numbers.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..MAX_AGM_STEPS {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind `K(k)` for modulus `k ∈ [0, 1)`.
pub fn complete_k(k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::ModulusOutOfRange(k));
    }
    let kp = ((1.0 - k) * (1.0 + k)).sqrt();
    Ok(PI / (2.0 * agm(1.0, kp)))
}

/// Common real period `4K(k)` of `sn`, `cn` and `dn` (the period of `dn` alone is `2K`).
pub fn jacobi_period(k: f64) -> Result<f64> {
    Ok(4.0 * complete_k(k)?)
}

/// Evaluate `(sn, cn, dn)(t, k)`.
pub fn jacobi(t: f64, k: f64) -> Result<EllipticTriple> {
    check_modulus(k)?;
    let (sn, cn, dn) = if k == 0.0 {
        let (s, c) = t.sin_cos();
        (s, c, 1.0)
    } else if k == 1.0 {
        let sech = 1.0 / t.cosh();
        (t.tanh(), sech, sech)
    } else {
        landen(t, k)
    };
    Ok(EllipticTriple { sn, cn, dn, t, k })
}

/// Right-hand sides of the defining o.d.e. system at a triple.
pub fn jacobi_derivatives(trip: &EllipticTriple) -> (f64, f64, f64) {
    let EllipticTriple { sn, cn, dn, k, .. } = *trip;
    (cn * dn, -sn * dn, -k * k * sn * cn)
}

fn landen(t: f64, k: f64) -> (f64, f64, f64) {
    let kp2 = (1.0 - k) * (1.0 + k);
    let kp = kp2.sqrt();
    let quarter = PI / (2.0 * agm(1.0, kp));

    // sn is odd, cn and dn are even; sn(u + 2K) = −sn(u), cn(u + 2K) = −cn(u).
    let sign_t = if t < 0.0 { -1.0 } else { 1.0 };
    let mut u = t.abs();
    let half = 2.0 * quarter;
    let turns = (u / half).floor();
    u -= turns * half;
    let flip = if (turns as i64) % 2 == 0 { 1.0 } else { -1.0 };

    let mut a = [0.0_f64; MAX_AGM_STEPS + 1];
    let mut c = [0.0_f64; MAX_AGM_STEPS + 1];
    a[0] = 1.0;
    let mut b = kp;
    c[0] = k;
    let mut n = 0;
    while n < MAX_AGM_STEPS && c[n].abs() > f64::EPSILON * a[n] {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
    }
    let mut phi = 2f64.powi(n as i32) * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (s, cpart) = phi.sin_cos();
    let sn = sign_t * flip * s;
    let cn = flip * cpart;
    let dn = (kp2 + k * k * cpart * cpart).sqrt();
    (sn, cn, dn)
}
