//! Twisted normal bundles of minimal surfaces in R³.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{richardson_jet, DerivativeSource, HoloField, Provenance, RuledMap, RuledSurface, RulingJet};
use crate::complex3::CVec3;
use crate::error::{Error, Result};
use crate::grid::Grid2;

type R3 = [f64; 3];

/// Euclidean cross product on R³.
pub fn r3_cross(a: R3, b: R3) -> R3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: R3, b: R3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: R3) -> f64 {
    dot(a, a).sqrt()
}

fn lin(a: f64, x: R3, b: f64, y: R3) -> R3 {
    [0, 1, 2].map(|k| a * x[k] + b * y[k])
}

/// Catalog of minimal surfaces in isothermal coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimalSurface {
    /// `(s, t, 0)`
    Plane,
    /// `(cosh t cos s, cosh t sin s, t)`
    Catenoid,
    /// `(sinh t cos s, sinh t sin s, s)`
    Helicoid,
    /// `(s − s³/3 + s t², −t + t³/3 − s² t, s² − t²)`
    Enneper,
}

/// Position and first derivatives of a surface in R³.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SurfaceJet {
    pub x: R3,
    pub x_s: R3,
    pub x_t: R3,
}

impl MinimalSurface {
    pub fn jet(self, s: f64, t: f64) -> SurfaceJet {
        match self {
            MinimalSurface::Plane => SurfaceJet {
                x: [s, t, 0.0],
                x_s: [1.0, 0.0, 0.0],
                x_t: [0.0, 1.0, 0.0],
            },
            MinimalSurface::Catenoid => {
                let (sn, cs) = s.sin_cos();
                let (ch, sh) = (t.cosh(), t.sinh());
                SurfaceJet {
                    x: [ch * cs, ch * sn, t],
                    x_s: [-ch * sn, ch * cs, 0.0],
                    x_t: [sh * cs, sh * sn, 1.0],
                }
            }
            MinimalSurface::Helicoid => {
                let (sn, cs) = s.sin_cos();
                let (ch, sh) = (t.cosh(), t.sinh());
                SurfaceJet {
                    x: [sh * cs, sh * sn, s],
                    x_s: [-sh * sn, sh * cs, 1.0],
                    x_t: [ch * cs, ch * sn, 0.0],
                }
            }
            MinimalSurface::Enneper => {
                let (u, v) = (s, t);
                SurfaceJet {
                    x: [
                        u - u * u * u / 3.0 + u * v * v,
                        -v + v * v * v / 3.0 - u * u * v,
                        u * u - v * v,
                    ],
                    x_s: [1.0 - u * u + v * v, -2.0 * u * v, 2.0 * u],
                    x_t: [2.0 * u * v, -1.0 + v * v - u * u, -2.0 * v],
                }
            }
        }
    }
}

/// Harmonic functions on the `(s, t)` plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HarmonicRho {
    Const { c: f64 },
    S,
    T,
    /// `Re q(s + it)`
    RealPart { q: HoloField },
}

impl HarmonicRho {
    /// `(ρ, ρ_s, ρ_t)`.
    pub fn jet(&self, s: f64, t: f64) -> [f64; 3] {
        match self {
            HarmonicRho::Const { c } => [*c, 0.0, 0.0],
            HarmonicRho::S => [s, 1.0, 0.0],
            HarmonicRho::T => [t, 0.0, 1.0],
            HarmonicRho::RealPart { q } => {
                let (v, d) = q.eval_z(Complex64::new(s, t));
                [v.re, d.re, -d.im]
            }
        }
    }
}

/// A catalog minimal surface, optionally dilated and with its coordinates
/// exchanged, together with a harmonic function on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimalSurfaceData {
    pub surface: MinimalSurface,
    pub rho: HarmonicRho,
    /// Homothety factor applied to the surface.
    #[serde(default = "one")]
    pub scale: f64,
    /// Use `(t, s)` in place of `(s, t)`, reversing the orientation.
    #[serde(default)]
    pub swapped: bool,
}

fn one() -> f64 {
    1.0
}

impl MinimalSurfaceData {
    pub fn new(surface: MinimalSurface, rho: HarmonicRho) -> Self {
        Self {
            surface,
            rho,
            scale: 1.0,
            swapped: false,
        }
    }

    pub fn swapped(&self) -> Self {
        Self {
            swapped: !self.swapped,
            ..self.clone()
        }
    }

    pub fn x_jet(&self, s: f64, t: f64) -> SurfaceJet {
        let c = self.scale;
        let j = if self.swapped {
            let j = self.surface.jet(t, s);
            SurfaceJet {
                x: j.x,
                x_s: j.x_t,
                x_t: j.x_s,
            }
        } else {
            self.surface.jet(s, t)
        };
        SurfaceJet {
            x: j.x.map(|v| c * v),
            x_s: j.x_s.map(|v| c * v),
            x_t: j.x_t.map(|v| c * v),
        }
    }

    /// `(ρ, ρ_s, ρ_t)`.
    pub fn rho_jet(&self, s: f64, t: f64) -> [f64; 3] {
        if self.swapped {
            let [r, r_s, r_t] = self.rho.jet(t, s);
            [r, r_t, r_s]
        } else {
            self.rho.jet(s, t)
        }
    }

    /// Check regularity, isothermality, minimality and harmonicity of `ρ`
    /// on the probe grid.
    pub fn validate(&self, probe: &Grid2) -> Result<()> {
        if probe.is_empty() {
            return Err(Error::EmptyGrid);
        }
        const H: f64 = 1e-4;
        for i in 0..probe.s.n {
            for (s, t) in probe.row(i) {
                let j = self.x_jet(s, t);
                let area = norm(r3_cross(j.x_s, j.x_t));
                if area < 1e-12 {
                    return Err(Error::DegenerateParametrization { s, t, area });
                }
                let (ls, lt) = (norm(j.x_s), norm(j.x_t));
                let scale = ls.max(1.0);
                if (ls - lt).abs() / scale > 1e-9 || dot(j.x_s, j.x_t).abs() / (ls * lt) > 1e-9 {
                    return Err(Error::BadParams(format!(
                        "coordinates are not isothermal at ({s}, {t})"
                    )));
                }
                let p = self.x_jet(s + H, t);
                let m = self.x_jet(s - H, t);
                let q = self.x_jet(s, t + H);
                let n = self.x_jet(s, t - H);
                let lap: R3 =
                    [0, 1, 2].map(|k| (p.x_s[k] - m.x_s[k] + q.x_t[k] - n.x_t[k]) / (2.0 * H));
                if norm(lap) / scale > 1e-6 {
                    return Err(Error::BadParams(format!(
                        "surface is not minimal at ({s}, {t}): |x_ss + x_tt| = {:e}",
                        norm(lap)
                    )));
                }
                let rp = self.rho_jet(s + H, t);
                let rm = self.rho_jet(s - H, t);
                let rq = self.rho_jet(s, t + H);
                let rn = self.rho_jet(s, t - H);
                let rho_lap = (rp[1] - rm[1] + rq[2] - rn[2]) / (2.0 * H);
                if rho_lap.abs() > 1e-6 {
                    return Err(Error::BadParams(format!(
                        "rho is not harmonic at ({s}, {t}): laplacian {rho_lap:e}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Unit normal `n` and gradient `p` of `ρ` at `(s, t)`, with the position.
    pub fn normal_and_gradient(&self, s: f64, t: f64) -> (R3, R3, R3) {
        let j = self.x_jet(s, t);
        let [_, r_s, r_t] = self.rho_jet(s, t);
        let c = r3_cross(j.x_s, j.x_t);
        let area = norm(c);
        let n = c.map(|v| v / area);
        let grad = lin(r_s / area, j.x_t, -r_t / area, j.x_s);
        (j.x, n, r3_cross(grad, n))
    }
}

#[derive(Debug)]
struct BorisenkoMap {
    data: MinimalSurfaceData,
}

impl BorisenkoMap {
    fn values(&self, s: f64, t: f64) -> (CVec3, CVec3) {
        let (x, n, p) = self.data.normal_and_gradient(s, t);
        let phi = CVec3::from_array(n.map(|v| Complex64::new(0.0, v)));
        let psi = CVec3::from_array([0, 1, 2].map(|k| Complex64::new(x[k], p[k])));
        (phi, psi)
    }
}

impl RuledMap for BorisenkoMap {
    fn jet(&self, s: f64, t: f64) -> RulingJet {
        richardson_jet(|s, t| BorisenkoMap::values(self, s, t), s, t)
    }

    fn values(&self, s: f64, t: f64) -> (CVec3, CVec3) {
        BorisenkoMap::values(self, s, t)
    }
}

/// Twisted normal bundle `{x + i(p + r n)}`, SL with phase `i`.
///
/// The input is validated on `probe` first.
pub fn borisenko(data: &MinimalSurfaceData, probe: &Grid2) -> Result<RuledSurface> {
    data.validate(probe)?;
    Ok(RuledSurface::new(
        Arc::new(BorisenkoMap { data: data.clone() }),
        Provenance::Borisenko {
            surface: data.surface,
            rho: data.rho.clone(),
            swapped: data.swapped,
        },
        DerivativeSource::FiniteDifference,
    ))
}
