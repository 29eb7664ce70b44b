//! Ruled 3-folds `N = {r φ(s, t) + ψ(s, t)}` built from SL cones and
//! auxiliary data.

mod borisenko;
mod bryant;
mod holo;
mod twist;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::complex3::{metric_g, CMat3, CVec3, Frame3};
use crate::cone::{ConeKind, JoyceParams};
use crate::error::{Error, Result};

pub use borisenko::{
    borisenko, r3_cross, HarmonicRho, MinimalSurface, MinimalSurfaceData, SurfaceJet,
};
pub use bryant::{bryant_potential, bryant_twist, combined_twist, BryantRho, PathOrder, CLOSEDNESS_TOL};
pub use holo::HoloField;
pub use twist::{hl_inverse_twist, hl_twist, joyce_twist, lie_twist};

/// `φ`, `ψ` and their first partial derivatives at one `(s, t)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RulingJet {
    pub phi: CVec3,
    pub phi_s: CVec3,
    pub phi_t: CVec3,
    pub psi: CVec3,
    pub psi_s: CVec3,
    pub psi_t: CVec3,
}

impl RulingJet {
    pub fn point(&self, r: f64) -> CVec3 {
        self.phi.scale(r) + self.psi
    }

    /// Tangent frame `(φ, r φ_s + ψ_s, r φ_t + ψ_t)` of `N` at `r φ + ψ`.
    pub fn frame(&self, r: f64) -> Frame3 {
        Frame3::new(
            self.phi,
            self.phi_s.scale(r) + self.psi_s,
            self.phi_t.scale(r) + self.psi_t,
        )
    }

    fn map(&self, f: impl Fn(CVec3) -> CVec3) -> Self {
        Self {
            phi: f(self.phi),
            phi_s: f(self.phi_s),
            phi_t: f(self.phi_t),
            psi: f(self.psi),
            psi_s: f(self.psi_s),
            psi_t: f(self.psi_t),
        }
    }
}

/// Pointwise evaluator of a ruled 3-fold.
pub trait RuledMap: Send + Sync + fmt::Debug {
    fn jet(&self, s: f64, t: f64) -> RulingJet;

    fn values(&self, s: f64, t: f64) -> (CVec3, CVec3) {
        let j = self.jet(s, t);
        (j.phi, j.psi)
    }
}

/// How a surface obtains its derivative oracles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeSource {
    Analytic,
    Spectral,
    FiniteDifference,
}

/// Record of the construction that produced a surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Provenance {
    Cone {
        cone: ConeKind,
    },
    LieTwist {
        cone: ConeKind,
        holo: HoloField,
    },
    HlTwist {
        p: HoloField,
    },
    HlInverseTwist {
        p: HoloField,
    },
    JoyceTwist {
        b: JoyceParams,
        u: f64,
        v: f64,
    },
    Borisenko {
        surface: MinimalSurface,
        rho: HarmonicRho,
        swapped: bool,
    },
    Bryant {
        cone: ConeKind,
        rho: BryantRho,
        basepoint: (f64, f64),
    },
    Combined {
        cone: ConeKind,
        holo: HoloField,
        rho: BryantRho,
        basepoint: (f64, f64),
    },
    GaugeFixed {
        inner: Box<Provenance>,
    },
    Superposed {
        a: f64,
        b: f64,
        first: Box<Provenance>,
        second: Box<Provenance>,
    },
    Rotated {
        inner: Box<Provenance>,
    },
    Evolved {
        n: usize,
        period: f64,
        dt: f64,
        t_max: f64,
    },
    Custom {
        label: String,
    },
}

impl Provenance {
    /// Cone and constant holomorphic field `(u, v)` if the surface is a
    /// constant-field twist of a catalog cone.
    pub fn constant_twist(&self) -> Option<(ConeKind, f64, f64)> {
        let constant = |h: &HoloField| {
            (h.degree() == 0).then(|| {
                let c = h.coeff(0);
                (c.re, c.im)
            })
        };
        match self {
            Provenance::Cone { cone } => Some((*cone, 0.0, 0.0)),
            Provenance::LieTwist { cone, holo } => constant(holo).map(|(u, v)| (*cone, u, v)),
            Provenance::HlTwist { p } => constant(p).map(|(u, v)| (ConeKind::HarveyLawson, u, v)),
            Provenance::JoyceTwist { b, u, v } => Some((ConeKind::Joyce { b: *b }, *u, *v)),
            _ => None,
        }
    }
}

/// A ruled 3-fold with its provenance and ruling-parameter range.
#[derive(Clone, Debug)]
pub struct RuledSurface {
    map: Arc<dyn RuledMap>,
    r_range: (f64, f64),
    provenance: Provenance,
    derivatives: DerivativeSource,
}

/// Default ruling-parameter range.
pub const DEFAULT_R_RANGE: (f64, f64) = (-5.0, 5.0);

impl RuledSurface {
    pub fn new(
        map: Arc<dyn RuledMap>,
        provenance: Provenance,
        derivatives: DerivativeSource,
    ) -> Self {
        Self {
            map,
            r_range: DEFAULT_R_RANGE,
            provenance,
            derivatives,
        }
    }

    pub fn with_r_range(mut self, r_min: f64, r_max: f64) -> Self {
        self.r_range = (r_min, r_max);
        self
    }

    pub fn r_range(&self) -> (f64, f64) {
        self.r_range
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn derivatives(&self) -> DerivativeSource {
        self.derivatives
    }

    pub fn jet(&self, s: f64, t: f64) -> RulingJet {
        self.map.jet(s, t)
    }

    pub fn phi(&self, s: f64, t: f64) -> CVec3 {
        self.map.values(s, t).0
    }

    pub fn psi(&self, s: f64, t: f64) -> CVec3 {
        self.map.values(s, t).1
    }

    /// The point `r φ(s, t) + ψ(s, t)`.
    pub fn point(&self, s: f64, t: f64, r: f64) -> CVec3 {
        let (phi, psi) = self.map.values(s, t);
        phi.scale(r) + psi
    }

    /// Image under a global unitary map of C³.
    pub fn rotated(&self, a: CMat3) -> RuledSurface {
        RuledSurface {
            map: Arc::new(Rotated {
                inner: Arc::clone(&self.map),
                a,
            }),
            r_range: self.r_range,
            provenance: Provenance::Rotated {
                inner: Box::new(self.provenance.clone()),
            },
            derivatives: self.derivatives,
        }
    }
}

#[derive(Debug)]
struct Rotated {
    inner: Arc<dyn RuledMap>,
    a: CMat3,
}

impl RuledMap for Rotated {
    fn jet(&self, s: f64, t: f64) -> RulingJet {
        self.inner.jet(s, t).map(|v| self.a.apply(v))
    }
}

/// Central differences with one Richardson extrapolation step.
pub(crate) fn richardson_jet(f: impl Fn(f64, f64) -> (CVec3, CVec3), s: f64, t: f64) -> RulingJet {
    const H: f64 = 1e-3;
    let diff = |g: &dyn Fn(f64) -> (CVec3, CVec3)| {
        let d = |h: f64| {
            let (a, b) = g(h);
            let (c, e) = g(-h);
            ((a - c).scale(0.5 / h), (b - e).scale(0.5 / h))
        };
        let (p1, q1) = d(H);
        let (p2, q2) = d(0.5 * H);
        (
            (p2.scale(4.0) - p1).scale(1.0 / 3.0),
            (q2.scale(4.0) - q1).scale(1.0 / 3.0),
        )
    };
    let (phi, psi) = f(s, t);
    let (phi_s, psi_s) = diff(&|h| f(s + h, t));
    let (phi_t, psi_t) = diff(&|h| f(s, t + h));
    RulingJet {
        phi,
        phi_s,
        phi_t,
        psi,
        psi_s,
        psi_t,
    }
}

#[derive(Debug)]
struct GaugeFixed {
    inner: Arc<dyn RuledMap>,
}

impl RuledMap for GaugeFixed {
    fn jet(&self, s: f64, t: f64) -> RulingJet {
        let j = self.inner.jet(s, t);
        let c = metric_g(j.phi, j.psi);
        let c_s = metric_g(j.phi_s, j.psi) + metric_g(j.phi, j.psi_s);
        let c_t = metric_g(j.phi_t, j.psi) + metric_g(j.phi, j.psi_t);
        RulingJet {
            psi: j.psi - j.phi.scale(c),
            psi_s: j.psi_s - j.phi.scale(c_s) - j.phi_s.scale(c),
            psi_t: j.psi_t - j.phi.scale(c_t) - j.phi_t.scale(c),
            ..j
        }
    }
}

/// Replace `ψ` by its component orthogonal to `φ`; the point set is unchanged.
pub fn gauge_fix(surf: &RuledSurface) -> RuledSurface {
    RuledSurface {
        map: Arc::new(GaugeFixed {
            inner: Arc::clone(&surf.map),
        }),
        r_range: surf.r_range,
        provenance: Provenance::GaugeFixed {
            inner: Box::new(surf.provenance.clone()),
        },
        derivatives: surf.derivatives,
    }
}

#[derive(Debug)]
struct Superposed {
    first: Arc<dyn RuledMap>,
    second: Arc<dyn RuledMap>,
    a: f64,
    b: f64,
}

impl RuledMap for Superposed {
    fn jet(&self, s: f64, t: f64) -> RulingJet {
        let p = self.first.jet(s, t);
        let q = self.second.jet(s, t);
        RulingJet {
            psi: p.psi.scale(self.a) + q.psi.scale(self.b),
            psi_s: p.psi_s.scale(self.a) + q.psi_s.scale(self.b),
            psi_t: p.psi_t.scale(self.a) + q.psi_t.scale(self.b),
            ..p
        }
    }
}

/// `ψ = a ψ₁ + b ψ₂` over the shared `φ` of two surfaces.
///
/// Fails with `BadParams` if the two `φ` disagree at a probe point.
pub fn superpose(a: f64, first: &RuledSurface, b: f64, second: &RuledSurface) -> Result<RuledSurface> {
    for &(s, t) in &[(0.0, 0.0), (0.31, -0.47), (-1.13, 0.71)] {
        let d = (first.phi(s, t) - second.phi(s, t)).norm();
        if d > 1e-9 {
            return Err(Error::BadParams(format!(
                "surfaces have different directions at ({s}, {t}): {d:e}"
            )));
        }
    }
    let derivatives = if first.derivatives == second.derivatives {
        first.derivatives
    } else {
        DerivativeSource::FiniteDifference
    };
    Ok(RuledSurface {
        map: Arc::new(Superposed {
            first: Arc::clone(&first.map),
            second: Arc::clone(&second.map),
            a,
            b,
        }),
        r_range: first.r_range,
        provenance: Provenance::Superposed {
            a,
            b,
            first: Box::new(first.provenance.clone()),
            second: Box::new(second.provenance.clone()),
        },
        derivatives,
    })
}

/// Surface given by closures for `(φ, ψ)`; derivatives by Richardson
/// central differences.
pub fn from_fn<F>(label: &str, f: F) -> RuledSurface
where
    F: Fn(f64, f64) -> (CVec3, CVec3) + Send + Sync + 'static,
{
    RuledSurface::new(
        Arc::new(FnMap(f)),
        Provenance::Custom {
            label: label.to_string(),
        },
        DerivativeSource::FiniteDifference,
    )
}

struct FnMap<F>(F);

impl<F> fmt::Debug for FnMap<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnMap")
    }
}

impl<F> RuledMap for FnMap<F>
where
    F: Fn(f64, f64) -> (CVec3, CVec3) + Send + Sync,
{
    fn jet(&self, s: f64, t: f64) -> RulingJet {
        richardson_jet(&self.0, s, t)
    }

    fn values(&self, s: f64, t: f64) -> (CVec3, CVec3) {
        (self.0)(s, t)
    }
}

/// Surface given by a closure returning the full jet.
pub fn from_jet_fn<F>(label: &str, f: F) -> RuledSurface
where
    F: Fn(f64, f64) -> RulingJet + Send + Sync + 'static,
{
    RuledSurface::new(
        Arc::new(JetFnMap(f)),
        Provenance::Custom {
            label: label.to_string(),
        },
        DerivativeSource::Analytic,
    )
}

struct JetFnMap<F>(F);

impl<F> fmt::Debug for JetFnMap<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("JetFnMap")
    }
}

impl<F> RuledMap for JetFnMap<F>
where
    F: Fn(f64, f64) -> RulingJet + Send + Sync,
{
    fn jet(&self, s: f64, t: f64) -> RulingJet {
        (self.0)(s, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::hl_cone;
    use num_complex::Complex64;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gauge_fix_removes_pure_gauge() {
        let cone = hl_cone();
        let surf = from_jet_fn("three phi", move |s, t| {
            let j = cone.jet(s, t);
            RulingJet {
                phi: j.phi,
                phi_s: j.phi_s,
                phi_t: j.phi_t,
                psi: j.phi.scale(3.0),
                psi_s: j.phi_s.scale(3.0),
                psi_t: j.phi_t.scale(3.0),
            }
        });
        let fixed = gauge_fix(&surf);
        let j = fixed.jet(0.4, 0.9);
        assert!(j.psi.norm() < 1e-15);
        assert!(j.psi_s.norm() < 1e-14 && j.psi_t.norm() < 1e-14);
    }

    #[test]
    fn gauge_fix_derivatives_match_differences() {
        let cone = hl_cone();
        let twisted = lie_twist(&cone, &HoloField::new(vec![cx(0.3, 0.1), cx(0.5, -0.2)]));
        let shifted = from_jet_fn("shifted", move |s, t| {
            let j = twisted.jet(s, t);
            let w = s * t + 1.0;
            RulingJet {
                psi: j.psi + j.phi.scale(w),
                psi_s: j.psi_s + j.phi_s.scale(w) + j.phi.scale(t),
                psi_t: j.psi_t + j.phi_t.scale(w) + j.phi.scale(s),
                ..j
            }
        });
        let fixed = gauge_fix(&shifted);
        let (s, t) = (0.3, -0.6);
        let exact = fixed.jet(s, t);
        let f2 = fixed.clone();
        let fd = richardson_jet(move |s, t| (f2.phi(s, t), f2.psi(s, t)), s, t);
        assert!((exact.psi_s - fd.psi_s).norm() < 1e-9);
        assert!((exact.psi_t - fd.psi_t).norm() < 1e-9);
        assert!(metric_g(exact.phi, exact.psi).abs() < 1e-14);
    }

    #[test]
    fn constant_twist_detection() {
        let p = Provenance::HlTwist {
            p: HoloField::constant(1.0, 0.0),
        };
        assert_eq!(p.constant_twist(), Some((ConeKind::HarveyLawson, 1.0, 0.0)));
        let q = Provenance::HlTwist {
            p: HoloField::monomial(2),
        };
        assert_eq!(q.constant_twist(), None);
    }
}
