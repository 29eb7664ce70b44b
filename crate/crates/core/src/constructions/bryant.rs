//! Twisted cones `{r φ + b}` with `db = φ *dρ − ρ *dφ` for eigenfunctions
//! `ρ` of the link Laplacian.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{DerivativeSource, HoloField, Provenance, RuledMap, RuledSurface, RulingJet, Superposed};
use crate::complex3::CVec3;
use crate::cone::{ConeJet, ConePatch};
use crate::error::{Error, Result};
use crate::grid::Grid2;

/// Candidate eigenfunction `ρ` on a rectangle of the `(s, t)` plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BryantRho {
    Zero,
    /// `amp · cos(ks s + kt t + phase)`
    Wave {
        amp: f64,
        ks: f64,
        kt: f64,
        phase: f64,
    },
}

impl BryantRho {
    pub fn wave(amp: f64, ks: f64, kt: f64, phase: f64) -> Self {
        BryantRho::Wave { amp, ks, kt, phase }
    }

    /// Named builtins: `zero`, `cos_s`, `sin_s`, `cos_t`, `cos_2s`.
    pub fn builtin(name: &str) -> Result<Self> {
        use std::f64::consts::FRAC_PI_2;
        Ok(match name {
            "zero" => BryantRho::Zero,
            "cos_s" => Self::wave(1.0, 1.0, 0.0, 0.0),
            "sin_s" => Self::wave(1.0, 1.0, 0.0, -FRAC_PI_2),
            "cos_t" => Self::wave(1.0, 0.0, 1.0, 0.0),
            "cos_2s" => Self::wave(1.0, 2.0, 0.0, 0.0),
            other => {
                return Err(Error::BadParams(format!("unknown rho builtin {other:?}")));
            }
        })
    }

    /// `(ρ, ρ_s, ρ_t, ρ_ss + ρ_tt)`.
    pub fn jet(&self, s: f64, t: f64) -> [f64; 4] {
        match *self {
            BryantRho::Zero => [0.0; 4],
            BryantRho::Wave { amp, ks, kt, phase } => {
                let (sn, cs) = (ks * s + kt * t + phase).sin_cos();
                [
                    amp * cs,
                    -amp * ks * sn,
                    -amp * kt * sn,
                    -amp * (ks * ks + kt * kt) * cs,
                ]
            }
        }
    }
}

/// Order of the two legs of an L-shaped integration path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathOrder {
    /// Along `s` at the base `t`, then along `t`.
    SThenT,
    /// Along `t` at the base `s`, then along `s`.
    TThenS,
}

fn b_s(c: &ConeJet, r: [f64; 4]) -> CVec3 {
    c.phi_t.scale(r[0]) - c.phi.scale(r[2])
}

fn b_t(c: &ConeJet, r: [f64; 4]) -> CVec3 {
    c.phi.scale(r[1]) - c.phi_s.scale(r[0])
}

const MAX_STEP: f64 = 0.05;

/// `∫_a^b f` by composite Simpson with one Richardson step.
fn integrate(f: impl Fn(f64) -> CVec3, a: f64, b: f64) -> CVec3 {
    if a == b {
        return CVec3::ZERO;
    }
    let n = 2 * (((b - a).abs() / (2.0 * MAX_STEP)).ceil() as usize).max(1);
    let simpson = |n: usize| {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += f(a + k as f64 * h).scale(w);
        }
        acc.scale(h / 3.0)
    };
    let coarse = simpson(n);
    let fine = simpson(2 * n);
    (fine.scale(16.0) - coarse).scale(1.0 / 15.0)
}

#[derive(Debug, Clone)]
struct Potential {
    cone: ConePatch,
    rho: BryantRho,
    base: (f64, f64),
}

impl Potential {
    fn ds(&self, s: f64, t: f64) -> CVec3 {
        b_s(&self.cone.jet(s, t), self.rho.jet(s, t))
    }

    fn dt(&self, s: f64, t: f64) -> CVec3 {
        b_t(&self.cone.jet(s, t), self.rho.jet(s, t))
    }

    fn along_s(&self, t: f64, s0: f64, s1: f64) -> CVec3 {
        integrate(|s| self.ds(s, t), s0, s1)
    }

    fn along_t(&self, s: f64, t0: f64, t1: f64) -> CVec3 {
        integrate(|t| self.dt(s, t), t0, t1)
    }

    fn path(&self, s: f64, t: f64, order: PathOrder) -> CVec3 {
        let (sb, tb) = self.base;
        match order {
            PathOrder::SThenT => self.along_s(tb, sb, s) + self.along_t(s, tb, t),
            PathOrder::TThenS => self.along_t(sb, tb, t) + self.along_s(t, sb, s),
        }
    }
}

#[derive(Debug)]
struct BryantMap {
    pot: Potential,
    // b at nodes (s_i, t_base) along the base row
    nodes: Vec<(f64, CVec3)>,
}

impl BryantMap {
    fn build(pot: Potential, grid: &Grid2) -> Self {
        let (sb, tb) = pot.base;
        let mut s_nodes = grid.s.points();
        s_nodes.push(sb);
        s_nodes.sort_by(f64::total_cmp);
        s_nodes.dedup();
        let k0 = s_nodes.iter().position(|&s| s == sb).expect("base inserted");
        let mut vals = vec![CVec3::ZERO; s_nodes.len()];
        for k in k0 + 1..s_nodes.len() {
            vals[k] = vals[k - 1] + pot.along_s(tb, s_nodes[k - 1], s_nodes[k]);
        }
        for k in (0..k0).rev() {
            vals[k] = vals[k + 1] + pot.along_s(tb, s_nodes[k + 1], s_nodes[k]);
        }
        Self {
            pot,
            nodes: s_nodes.into_iter().zip(vals).collect(),
        }
    }

    fn potential(&self, s: f64, t: f64) -> CVec3 {
        let k = self
            .nodes
            .partition_point(|&(x, _)| x <= s)
            .saturating_sub(1)
            .min(self.nodes.len() - 1);
        let (sk, bk) = self.nodes[k];
        let tb = self.pot.base.1;
        bk + self.pot.along_s(tb, sk, s) + self.pot.along_t(s, tb, t)
    }
}

impl RuledMap for BryantMap {
    fn jet(&self, s: f64, t: f64) -> RulingJet {
        let c = self.pot.cone.jet(s, t);
        let r = self.pot.rho.jet(s, t);
        RulingJet {
            phi: c.phi,
            phi_s: c.phi_s,
            phi_t: c.phi_t,
            psi: self.potential(s, t),
            psi_s: b_s(&c, r),
            psi_t: b_t(&c, r),
        }
    }
}

/// Closedness threshold for the eigenfunction, mixed-partial and loop checks.
pub const CLOSEDNESS_TOL: f64 = 1e-8;

fn check_closed(pot: &Potential, grid: &Grid2) -> Result<()> {
    let mut eig: f64 = 0.0;
    let mut curl: f64 = 0.0;
    for i in 0..grid.s.n {
        for (s, t) in grid.row(i) {
            let c = pot.cone.jet(s, t);
            let r = pot.rho.jet(s, t);
            eig = eig.max((r[3] + 2.0 * c.lambda() * r[0]).abs());
            let mixed = c.phi.scale(r[3]) - (c.phi_ss + c.phi_tt).scale(r[0]);
            curl = curl.max(mixed.norm());
        }
    }
    for (what, defect) in [("eigenfunction", eig), ("mixed-partial", curl)] {
        if !(defect < CLOSEDNESS_TOL) {
            return Err(Error::NotClosed {
                what,
                defect,
                tolerance: CLOSEDNESS_TOL,
            });
        }
    }
    let mut loop_max: f64 = 0.0;
    for i in 0..grid.s.n.saturating_sub(1) {
        let (s0, s1) = (grid.s.point(i), grid.s.point(i + 1));
        for j in 0..grid.t.n.saturating_sub(1) {
            let (t0, t1) = (grid.t.point(j), grid.t.point(j + 1));
            let circ = pot.along_s(t0, s0, s1) + pot.along_t(s1, t0, t1)
                - pot.along_s(t1, s0, s1)
                - pot.along_t(s0, t0, t1);
            loop_max = loop_max.max(circ.norm());
        }
    }
    if !(loop_max < CLOSEDNESS_TOL) {
        return Err(Error::NotClosed {
            what: "loop-integral",
            defect: loop_max,
            tolerance: CLOSEDNESS_TOL,
        });
    }
    Ok(())
}

/// Bryant twist of `cone` by `rho` on the rectangle spanned by `grid`, with
/// `b(basepoint) = 0`.
pub fn bryant_twist(
    cone: &ConePatch,
    rho: &BryantRho,
    basepoint: (f64, f64),
    grid: &Grid2,
) -> Result<RuledSurface> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let pot = Potential {
        cone: cone.clone(),
        rho: rho.clone(),
        base: basepoint,
    };
    check_closed(&pot, grid)?;
    Ok(RuledSurface::new(
        Arc::new(BryantMap::build(pot, grid)),
        Provenance::Bryant {
            cone: cone.kind(),
            rho: rho.clone(),
            basepoint,
        },
        DerivativeSource::Analytic,
    ))
}

/// `b(s, t)` integrated along a single L-shaped path from `basepoint`.
pub fn bryant_potential(
    cone: &ConePatch,
    rho: &BryantRho,
    basepoint: (f64, f64),
    at: (f64, f64),
    order: PathOrder,
) -> CVec3 {
    Potential {
        cone: cone.clone(),
        rho: rho.clone(),
        base: basepoint,
    }
    .path(at.0, at.1, order)
}

/// Sum of the Lie-derivative twist by `w` and the Bryant twist by `rho`.
pub fn combined_twist(
    cone: &ConePatch,
    w: &HoloField,
    rho: &BryantRho,
    basepoint: (f64, f64),
    grid: &Grid2,
) -> Result<RuledSurface> {
    let bryant = bryant_twist(cone, rho, basepoint, grid)?;
    let lie = super::lie_twist(cone, w);
    Ok(RuledSurface::new(
        Arc::new(Superposed {
            first: Arc::clone(&lie.map),
            second: Arc::clone(&bryant.map),
            a: 1.0,
            b: 1.0,
        }),
        Provenance::Combined {
            cone: cone.kind(),
            holo: w.clone(),
            rho: rho.clone(),
            basepoint,
        },
        lie.derivatives(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::hl_cone;

    fn grid() -> Grid2 {
        Grid2::rect((-1.0, 1.0), (-1.0, 1.0), 9, 9)
    }

    #[test]
    fn zero_rho_gives_the_cone() {
        let s = bryant_twist(&hl_cone(), &BryantRho::Zero, (0.0, 0.0), &grid()).unwrap();
        assert_eq!(s.psi(0.3, -0.7), CVec3::ZERO);
    }

    #[test]
    fn cos_s_is_closed_and_cos_2s_is_not() {
        let cone = hl_cone();
        let ok = BryantRho::builtin("cos_s").unwrap();
        assert!(bryant_twist(&cone, &ok, (0.0, 0.0), &grid()).is_ok());
        let bad = BryantRho::builtin("cos_2s").unwrap();
        assert!(matches!(
            bryant_twist(&cone, &bad, (0.0, 0.0), &grid()),
            Err(Error::NotClosed { .. })
        ));
    }

    #[test]
    fn path_independence() {
        let cone = hl_cone();
        let rho = BryantRho::wave(0.7, 0.6, 0.8, 0.3);
        for &at in &[(0.9, -0.4), (-1.3, 1.1), (2.0, 2.0)] {
            let a = bryant_potential(&cone, &rho, (0.1, 0.2), at, PathOrder::SThenT);
            let b = bryant_potential(&cone, &rho, (0.1, 0.2), at, PathOrder::TThenS);
            assert!((a - b).norm() < 1e-8, "{}", (a - b).norm());
        }
    }

    #[test]
    fn tabulated_potential_matches_direct_path() {
        let cone = hl_cone();
        let rho = BryantRho::builtin("cos_s").unwrap();
        let s = bryant_twist(&cone, &rho, (0.0, 0.0), &grid()).unwrap();
        for &at in &[(0.55, 0.3), (-0.8, -0.9)] {
            let direct = bryant_potential(&cone, &rho, (0.0, 0.0), at, PathOrder::TThenS);
            assert!((s.psi(at.0, at.1) - direct).norm() < 1e-10);
        }
        assert!(s.psi(0.0, 0.0).norm() < 1e-15);
    }

    #[test]
    fn psi_derivatives_match_differences() {
        let cone = hl_cone();
        let rho = BryantRho::builtin("sin_s").unwrap();
        let s = bryant_twist(&cone, &rho, (0.0, 0.0), &grid()).unwrap();
        let (x, y) = (0.2, 0.4);
        let fd = crate::constructions::richardson_jet(|a, b| (s.phi(a, b), s.psi(a, b)), x, y);
        let j = s.jet(x, y);
        assert!((fd.psi_s - j.psi_s).norm() < 1e-8);
        assert!((fd.psi_t - j.psi_t).norm() < 1e-8);
    }
}
