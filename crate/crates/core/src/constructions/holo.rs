use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Holomorphic vector field `w = u ∂/∂s + v ∂/∂t` with `u + iv = p(s + it)`
/// for a complex polynomial `p`, stored by ascending coefficients.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HoloField {
    coeffs: Vec<Complex64>,
}

impl HoloField {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut coeffs = coeffs;
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(u: f64, v: f64) -> Self {
        Self::new(vec![Complex64::new(u, v)])
    }

    /// `p(z) = z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); k + 1];
        c[k] = Complex64::new(1.0, 0.0);
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Degree of `p`; the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `(p(z), p'(z))` at `z = s + it`.
    pub fn eval_z(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `(u, v)` at `(s, t)`.
    pub fn eval(&self, s: f64, t: f64) -> (f64, f64) {
        let (p, _) = self.eval_z(Complex64::new(s, t));
        (p.re, p.im)
    }

    /// `(u, v, u_s, v_s, u_t, v_t)` at `(s, t)`.
    pub fn eval_with_derivatives(&self, s: f64, t: f64) -> [f64; 6] {
        let (p, dp) = self.eval_z(Complex64::new(s, t));
        [p.re, p.im, dp.re, dp.im, -dp.im, dp.re]
    }

    /// Parse a comma-separated list of complex literals such as
    /// `"0, 0, 1"`, `"1+2i, -0.5i"`.
    pub fn parse(text: &str) -> Result<Self> {
        let coeffs = text
            .split(',')
            .map(|tok| parse_complex(tok.trim()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(coeffs))
    }
}

fn parse_complex(tok: &str) -> Result<Complex64> {
    let bad = || Error::BadParams(format!("cannot parse complex coefficient {tok:?}"));
    if tok.is_empty() {
        return Err(bad());
    }
    let Some(body) = tok.strip_suffix('i') else {
        return tok.parse::<f64>().map(|x| Complex64::new(x, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not the leading one or part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |s: &str| match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => s.parse::<f64>().map_err(|_| bad()),
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(Complex64::new(re, imag(&body[k..])?))
        }
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}
