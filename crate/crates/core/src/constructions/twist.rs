//! Lie-derivative twists `ψ = u φ_s + v φ_t` and their closed forms on the
//! Harvey–Lawson and Joyce cones.

use std::sync::Arc;

use num_complex::Complex64;

use super::{DerivativeSource, HoloField, Provenance, RuledMap, RuledSurface, RulingJet};
use crate::complex3::I;
use crate::cone::{hl_phase_slopes, hl_phases, ConePatch, JoyceParams};
use crate::elliptic::jacobi;

#[derive(Debug)]
struct LieMap {
    cone: ConePatch,
    w: HoloField,
}

impl RuledMap for LieMap {
    fn jet(&self, s: f64, t: f64) -> RulingJet {
        let c = self.cone.jet(s, t);
        let [u, v, u_s, v_s, u_t, v_t] = self.w.eval_with_derivatives(s, t);
        RulingJet {
            phi: c.phi,
            phi_s: c.phi_s,
            phi_t: c.phi_t,
            psi: c.phi_s.scale(u) + c.phi_t.scale(v),
            psi_s: c.phi_ss.scale(u) + c.phi_s.scale(u_s) + c.phi_st.scale(v) + c.phi_t.scale(v_s),
            psi_t: c.phi_st.scale(u) + c.phi_s.scale(u_t) + c.phi_tt.scale(v) + c.phi_t.scale(v_t),
        }
    }
}

/// `ψ = L_w φ` for a holomorphic field `w` on the link of `cone`.
pub fn lie_twist(cone: &ConePatch, w: &HoloField) -> RuledSurface {
    let derivatives = match cone.kind() {
        crate::cone::ConeKind::NumericGrid => DerivativeSource::Spectral,
        _ => DerivativeSource::Analytic,
    };
    RuledSurface::new(
        Arc::new(LieMap {
            cone: cone.clone(),
            w: w.clone(),
        }),
        if w.is_zero() {
            Provenance::Cone { cone: cone.kind() }
        } else {
            Provenance::LieTwist {
                cone: cone.kind(),
                holo: w.clone(),
            }
        },
        derivatives,
    )
}

const INV_SQRT3: f64 = 0.577_350_269_189_625_8;

/// Unit-modulus phase factors `e^{iα_j}/√3` of the Harvey–Lawson link.
fn hl_factors(s: f64, t: f64) -> [Complex64; 3] {
    hl_phases(s, t).map(|a| Complex64::from_polar(INV_SQRT3, a))
}

/// `L_j(u, v) = A_j u + B_j v`, the phase slopes applied to `(u, v)`.
fn hl_linear(u: f64, v: f64) -> [f64; 3] {
    let (a, b) = hl_phase_slopes();
    [0, 1, 2].map(|j| a[j] * u + b[j] * v)
}

#[derive(Debug)]
struct HlTwistMap {
    p: HoloField,
}

impl RuledMap for HlTwistMap {
    fn jet(&self, s: f64, t: f64) -> RulingJet {
        let e = hl_factors(s, t);
        let (a, b) = hl_phase_slopes();
        let [u, v, u_s, v_s, u_t, v_t] = self.p.eval_with_derivatives(s, t);
        let l = hl_linear(u, v);
        let l_s = hl_linear(u_s, v_s);
        let l_t = hl_linear(u_t, v_t);
        let mut j = RulingJet::default();
        for k in 0..3 {
            j.phi[k] = e[k];
            j.phi_s[k] = I * a[k] * e[k];
            j.phi_t[k] = I * b[k] * e[k];
            j.psi[k] = I * l[k] * e[k];
            j.psi_s[k] = I * a[k] * j.psi[k] + I * l_s[k] * e[k];
            j.psi_t[k] = I * b[k] * j.psi[k] + I * l_t[k] * e[k];
        }
        j
    }
}

/// Closed-form twist of the Harvey–Lawson cone by `u + iv = p(s + it)`.
pub fn hl_twist(p: &HoloField) -> RuledSurface {
    RuledSurface::new(
        Arc::new(HlTwistMap { p: p.clone() }),
        Provenance::HlTwist { p: p.clone() },
        DerivativeSource::Analytic,
    )
}

#[derive(Debug)]
struct HlInverseMap {
    p: HoloField,
}

impl RuledMap for HlInverseMap {
    // Surface coordinates are (u, v); the link coordinates are s + it = p(u + iv).
    fn jet(&self, u: f64, v: f64) -> RulingJet {
        let [s, t, s_u, t_u, s_v, t_v] = self.p.eval_with_derivatives(u, v);
        let e = hl_factors(s, t);
        let (a, b) = hl_phase_slopes();
        let l = hl_linear(u, v);
        let l_u = hl_linear(1.0, 0.0);
        let l_v = hl_linear(0.0, 1.0);
        let mut j = RulingJet::default();
        for k in 0..3 {
            let rot_u = I * (a[k] * s_u + b[k] * t_u);
            let rot_v = I * (a[k] * s_v + b[k] * t_v);
            j.phi[k] = e[k];
            j.phi_s[k] = rot_u * e[k];
            j.phi_t[k] = rot_v * e[k];
            j.psi[k] = I * l[k] * e[k];
            j.psi_s[k] = rot_u * j.psi[k] + I * l_u[k] * e[k];
            j.psi_t[k] = rot_v * j.psi[k] + I * l_v[k] * e[k];
        }
        j
    }
}

/// Harvey–Lawson family with the roles of `(s, t)` and `(u, v)` exchanged:
/// `(u, v)` are the surface coordinates and `s + it = p(u + iv)`.
pub fn hl_inverse_twist(p: &HoloField) -> RuledSurface {
    RuledSurface::new(
        Arc::new(HlInverseMap { p: p.clone() }),
        Provenance::HlInverseTwist { p: p.clone() },
        DerivativeSource::Analytic,
    )
}

#[derive(Debug)]
struct JoyceTwistMap {
    a: f64,
    k: f64,
    amp: [f64; 3],
    freq: [f64; 3],
    u: f64,
    v: f64,
}

impl RuledMap for JoyceTwistMap {
    fn jet(&self, s: f64, t: f64) -> RulingJet {
        let Self {
            a,
            k,
            amp,
            freq,
            u,
            v,
        } = *self;
        let e = jacobi(a * t, k).expect("modulus validated at construction");
        let (sn, cn, dn) = (e.sn, e.cn, e.dn);
        let k2 = k * k;
        let f = [dn, cn, sn];
        let f_1 = [-k2 * sn * cn, -sn * dn, cn * dn];
        let g = [k2 * sn * cn, sn * dn, -cn * dn];
        let g_1 = [
            k2 * dn * (cn * cn - sn * sn),
            cn * dn * dn - k2 * sn * sn * cn,
            sn * dn * dn + k2 * sn * cn * cn,
        ];
        let mut j = RulingJet::default();
        for m in 0..3 {
            let base = Complex64::from_polar(amp[m], freq[m] * s);
            let ib = I * freq[m];
            j.phi[m] = I * base * f[m];
            j.phi_s[m] = ib * j.phi[m];
            j.phi_t[m] = I * base * (a * f_1[m]);
            j.psi[m] = base * (-u * freq[m] * f[m] - I * (v * a * g[m]));
            j.psi_s[m] = ib * j.psi[m];
            j.psi_t[m] = base * (-u * freq[m] * a * f_1[m] - I * (v * a * a * g_1[m]));
        }
        j
    }
}

/// Closed-form constant twist `(u, v)` of the Joyce cone.
pub fn joyce_twist(params: JoyceParams, u: f64, v: f64) -> RuledSurface {
    RuledSurface::new(
        Arc::new(JoyceTwistMap {
            a: params.a(),
            k: params.modulus(),
            amp: params.amplitudes(),
            freq: params.b().map(|x| x as f64),
            u,
            v,
        }),
        Provenance::JoyceTwist { b: params, u, v },
        DerivativeSource::Analytic,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex3::CVec3;
    use crate::constructions::richardson_jet;
    use crate::cone::{hl_cone, joyce_cone};

    fn close(a: &RulingJet, b: &RulingJet, tol: f64) -> bool {
        [
            (a.phi, b.phi),
            (a.phi_s, b.phi_s),
            (a.phi_t, b.phi_t),
            (a.psi, b.psi),
            (a.psi_s, b.psi_s),
            (a.psi_t, b.psi_t),
        ]
        .iter()
        .all(|(x, y)| (*x - *y).norm() < tol)
    }

    #[test]
    fn zero_field_gives_the_cone() {
        let s = lie_twist(&hl_cone(), &HoloField::zero());
        assert_eq!(s.psi(0.4, 1.0), CVec3::ZERO);
        assert!(matches!(s.provenance(), Provenance::Cone { .. }));
    }

    #[test]
    fn hl_closed_form_matches_lie_twist() {
        let cone = hl_cone();
        for p in [HoloField::monomial(1), HoloField::monomial(2), HoloField::parse("0.2-1i, 0, 0.5+0.5i, 0.1").unwrap()] {
            let a = hl_twist(&p);
            let b = lie_twist(&cone, &p);
            for &(s, t) in &[(0.0, 0.0), (0.7, -0.3), (-1.9, 2.4)] {
                assert!(close(&a.jet(s, t), &b.jet(s, t), 1e-12));
            }
        }
    }

    #[test]
    fn hl_twist_at_origin() {
        let e = 1.0 / 3f64.sqrt();
        let p = hl_twist(&HoloField::monomial(2)).point(0.0, 0.0, 1.0);
        assert!((p - CVec3::real(e, e, e)).norm() < 1e-15);
    }

    #[test]
    fn joyce_closed_form_matches_lie_twist() {
        for b in [(-2, 1, 1), (-3, 2, 1), (-5, 3, 2)] {
            let params = JoyceParams::new(b.0, b.1, b.2).unwrap();
            let cone = joyce_cone(params);
            for &(u, v) in &[(1.0, 0.0), (0.0, 1.0), (0.3, -0.8)] {
                let a = joyce_twist(params, u, v);
                let l = lie_twist(&cone, &HoloField::constant(u, v));
                for &(s, t) in &[(0.1, 0.2), (1.3, -0.9), (-2.2, 3.1)] {
                    assert!(close(&a.jet(s, t), &l.jet(s, t), 1e-10));
                }
            }
        }
    }

    #[test]
    fn analytic_jets_match_differences() {
        let surfaces = [
            hl_twist(&HoloField::monomial(3)),
            hl_inverse_twist(&HoloField::monomial(2)),
            joyce_twist(JoyceParams::new(-3, 2, 1).unwrap(), 0.4, 0.7),
            lie_twist(&joyce_cone(JoyceParams::new(-3, 2, 1).unwrap()), &HoloField::monomial(2)),
        ];
        for surf in &surfaces {
            for &(s, t) in &[(0.3, 0.4), (-0.8, 0.1)] {
                let exact = surf.jet(s, t);
                let fd = richardson_jet(|s, t| (surf.phi(s, t), surf.psi(s, t)), s, t);
                assert!(close(&exact, &fd, 1e-8), "{:?}", surf.provenance());
            }
        }
    }

    #[test]
    fn inverse_twist_identity_matches_forward() {
        let id = HoloField::monomial(1);
        let a = hl_inverse_twist(&id);
        let b = hl_twist(&id);
        for &(s, t, r) in &[(0.2, 0.3, 1.0), (-1.0, 0.5, -2.0)] {
            assert!((a.point(s, t, r) - b.point(s, t, r)).norm() < 1e-14);
        }
    }

    #[test]
    fn nonconstant_field_gives_nonconstant_psi() {
        let s = lie_twist(&hl_cone(), &HoloField::monomial(1));
        assert!((s.psi(0.0, 0.0) - s.psi(0.5, 0.5)).norm() > 1e-3);
    }
}
