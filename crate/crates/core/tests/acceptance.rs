//! Acceptance suite: ten criteria, one status line each.
//!
//! Runs without the libtest harness so the status lines are always printed;
//! the process exits non-zero when any criterion fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ruled_sl::complex3::{c3_cross, metric_g, omega_complex, random_su3, CVec3, Frame3};
use ruled_sl::cone::{
    cone_condition_defect, hl_cone, joyce_cone, numeric_cone_from_grid, ConePatch, JoyceParams,
    PeriodicSamples,
};
use ruled_sl::constructions::{
    borisenko, bryant_twist, combined_twist, from_fn, gauge_fix, hl_inverse_twist, hl_twist,
    joyce_twist, lie_twist, BryantRho, HarmonicRho, HoloField, MinimalSurface, MinimalSurfaceData,
    RuledSurface,
};
use ruled_sl::elliptic::{jacobi, jacobi_derivatives};
use ruled_sl::evolve::{error_against, step, CurveState, InitialData, StepOptions};
use ruled_sl::grid::{Axis, Grid2, Grid3};
use ruled_sl::manifest::Manifest;
use ruled_sl::pipeline::{run_manifest, PipelineOptions};
use ruled_sl::verify::{asymptotic_order, classify_ruling, geometric_samples, sl_defect, Verdict};
use ruled_sl::Error;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rand_c(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn rand_v(rng: &mut ChaCha8Rng) -> CVec3 {
    CVec3::new(rand_c(rng), rand_c(rng), rand_c(rng))
}

fn joyce(b: (i64, i64, i64)) -> JoyceParams {
    JoyceParams::new(b.0, b.1, b.2).expect("admissible triple")
}

/// Rectangular period cell of a doubly periodic cone.
fn cell(c: &ConePatch) -> (f64, f64) {
    let [p, q] = c.periods().expect("catalog cone");
    if p.1 == 0.0 {
        (p.0, q.1)
    } else {
        // HL lattice: 2p − q lies on the s axis.
        (2.0 * p.0 - q.0, q.1)
    }
}

fn cell_grid(c: &ConePatch, n: usize) -> Grid2 {
    let (ls, lt) = cell(c);
    Grid2::new(Axis::periodic(0.0, ls, n), Axis::periodic(0.0, lt, n))
}

fn patch3(n: usize) -> Grid3 {
    Grid3::new(
        Grid2::rect((-1.0, 1.0), (-1.0, 1.0), n, n),
        Grid3::r_values(0.5, 5.0, 4, true),
    )
}

fn cross_product_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut anti, mut lin, mut equi, mut tensor) = (0f64, 0f64, 0f64, 0f64);
    for n in 0..1000u64 {
        let (u, v, w) = (rand_v(&mut rng), rand_v(&mut rng), rand_v(&mut rng));
        let (a, b) = (rand_c(&mut rng), rand_c(&mut rng));
        anti = anti.max((c3_cross(u, v) + c3_cross(v, u)).norm());
        let lhs = c3_cross(u.cscale(a) + w.cscale(b), v);
        let rhs = c3_cross(u, v).cscale(a.conj()) + c3_cross(w, v).cscale(b.conj());
        lin = lin.max((lhs - rhs).norm());
        let m = random_su3(1000 + n);
        equi = equi.max((c3_cross(m.apply(u), m.apply(v)) - m.apply(c3_cross(u, v))).norm());
        // g(u × v, x) = Re Ω(u, v, x) read off on the real basis e_k, i e_k
        let x = c3_cross(u, v);
        for k in 0..3 {
            let e = CVec3::unit(k);
            let re = omega_complex(&Frame3::new(u, v, e)).re;
            let im = omega_complex(&Frame3::new(u, v, e.cscale(Complex64::i()))).re;
            tensor = tensor.max((x[k] - Complex64::new(re, im)).norm());
            tensor = tensor.max((metric_g(x, e) - re).abs());
        }
    }
    ensure(anti < 1e-10 && lin < 1e-10 && equi < 1e-10, || {
        format!("algebra defects {anti:e} {lin:e} {equi:e}")
    })?;
    ensure(tensor < 1e-12, || format!("coordinate formula off by {tensor:e}"))?;
    Ok(format!(
        "antisymmetry {anti:.1e}, anti-bilinearity {lin:.1e}, SU(3) {equi:.1e}, tensor {tensor:.1e}"
    ))
}

fn cone_certification() -> Outcome {
    let hl = hl_cone();
    let rep = cone_condition_defect(&hl, &cell_grid(&hl, 64), 1e-12).map_err(|e| e.to_string())?;
    ensure(rep.pass, || format!("HL cone defect {:e}", rep.max()))?;
    let mut line = format!("HL {:.1e}", rep.max());
    for b in [(-2, 1, 1), (-3, 2, 1)] {
        let c = joyce_cone(joyce(b));
        let rep = cone_condition_defect(&c, &cell_grid(&c, 64), 1e-9).map_err(|e| e.to_string())?;
        ensure(rep.pass, || format!("Joyce {b:?} defect {:e}", rep.max()))?;
        line += &format!(", Joyce {b:?} {:.1e}", rep.max());
    }

    let (ls, lt) = cell(&hl);
    let bumped = PeriodicSamples::sample(
        |s, t| {
            let bump = 0.1 * (s / 2.0).cos() * (2.0 * PI * t / lt).sin();
            let v = hl.phi(s, t) + CVec3::real(bump, 0.0, 0.0);
            v.scale(1.0 / v.norm())
        },
        64,
        64,
        (0.0, 0.0),
        (ls, lt),
    );
    let bad = numeric_cone_from_grid(&bumped).map_err(|e| e.to_string())?;
    let rep = cone_condition_defect(&bad, &cell_grid(&hl, 64), 1e-12).map_err(|e| e.to_string())?;
    ensure(!rep.pass && rep.max() > 1e-3, || format!("perturbed cone defect only {:e}", rep.max()))?;
    Ok(line + &format!("; perturbed {:.1e}", rep.max()))
}

fn elliptic_engine() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut ident, mut ode) = (0f64, 0f64);
    let h = 1e-5;
    for _ in 0..1000 {
        let k = rng.random_range(0.0..0.99);
        let t = rng.random_range(-12.0..12.0);
        let e = jacobi(t, k).map_err(|e| e.to_string())?;
        ident = ident.max((e.sn * e.sn + e.cn * e.cn - 1.0).abs());
        ident = ident.max((k * k * e.sn * e.sn + e.dn * e.dn - 1.0).abs());
        let (p, m) = (jacobi(t + h, k).unwrap(), jacobi(t - h, k).unwrap());
        let (dsn, dcn, ddn) = jacobi_derivatives(&e);
        ode = ode.max(((p.sn - m.sn) / (2.0 * h) - dsn).abs());
        ode = ode.max(((p.cn - m.cn) / (2.0 * h) - dcn).abs());
        ode = ode.max(((p.dn - m.dn) / (2.0 * h) - ddn).abs());
    }
    ensure(ident < 1e-10, || format!("identity defect {ident:e}"))?;
    ensure(ode < 1e-6, || format!("derivative defect {ode:e}"))?;

    let mut limit = 0f64;
    for i in 0..=200 {
        let t = -10.0 + 0.1 * i as f64;
        let z = jacobi(t, 0.0).unwrap();
        limit = limit.max((z.sn - t.sin()).abs().max((z.cn - t.cos()).abs()).max((z.dn - 1.0).abs()));
        let o = jacobi(t, 1.0).unwrap();
        let sech = 1.0 / t.cosh();
        limit = limit.max((o.sn - t.tanh()).abs().max((o.cn - sech).abs()).max((o.dn - sech).abs()));
        let near = jacobi(t, 1e-9).unwrap();
        limit = limit.max((near.sn - t.sin()).abs().max((near.cn - t.cos()).abs()));
    }
    ensure(limit < 1e-12, || format!("trig/hyperbolic reductions off by {limit:e}"))?;
    Ok(format!("identities {ident:.1e}, o.d.e. {ode:.1e}, reductions {limit:.1e}"))
}

fn sl_max(surf: &RuledSurface, phase: f64, tol: f64) -> Result<(bool, f64), String> {
    let rep = sl_defect(surf, &patch3(10), phase, tol).map_err(|e| e.to_string())?;
    Ok((rep.pass, rep.max()))
}

fn construction_residuals() -> Outcome {
    let z2 = HoloField::monomial(2);
    let mut analytic: Vec<(String, RuledSurface)> = Vec::new();
    for k in 1..=3 {
        analytic.push((format!("hl_twist z^{k}"), hl_twist(&HoloField::monomial(k))));
    }
    analytic.push(("hl_inverse_twist z^2".into(), hl_inverse_twist(&z2)));
    for b in [(-2, 1, 1), (-3, 2, 1)] {
        for (u, v) in [(1.0, 0.0), (0.0, 1.0)] {
            analytic.push((format!("joyce_twist {b:?} ({u},{v})"), joyce_twist(joyce(b), u, v)));
        }
        analytic.push((format!("lie_twist {b:?} z^2"), lie_twist(&joyce_cone(joyce(b)), &z2)));
    }
    analytic.push(("lie_twist HL z^2".into(), lie_twist(&hl_cone(), &z2)));
    let rect = Grid2::rect((-1.0, 1.0), (-1.0, 1.0), 10, 10);
    let cos_s = BryantRho::builtin("cos_s").unwrap();
    let combined = combined_twist(&hl_cone(), &z2, &cos_s, (0.0, 0.0), &rect).map_err(|e| e.to_string())?;
    analytic.push(("combined_twist HL cos s".into(), combined));

    let mut worst_a = 0f64;
    for (name, surf) in &analytic {
        let (pass, max) = sl_max(surf, 0.0, 1e-9)?;
        ensure(pass, || format!("{name}: defect {max:e}"))?;
        worst_a = worst_a.max(max);
    }

    let probe = Grid2::rect((-1.0, 1.0), (-1.0, 1.0), 6, 6);
    let mut worst_fd = 0f64;
    for surface in [MinimalSurface::Plane, MinimalSurface::Catenoid, MinimalSurface::Helicoid] {
        for rho in [HarmonicRho::Const { c: 0.7 }, HarmonicRho::S] {
            let data = MinimalSurfaceData::new(surface, rho.clone());
            let surf = borisenko(&data, &probe).map_err(|e| e.to_string())?;
            let (pass, max) = sl_max(&surf, PI / 2.0, 1e-6)?;
            ensure(pass, || format!("borisenko {surface:?} {rho:?}: defect {max:e}"))?;
            worst_fd = worst_fd.max(max);
        }
    }

    let cone = hl_cone();
    let anti = from_fn("anti-holomorphic field", move |s, t| {
        let j = cone.jet(s, t);
        (j.phi, j.phi_s.scale(s) - j.phi_t.scale(t))
    });
    let (pass, bad) = sl_max(&anti, 0.0, 1e-9)?;
    ensure(!pass && bad > 1e-3, || format!("anti-holomorphic twist passed with {bad:e}"))?;
    let cos_2s = BryantRho::builtin("cos_2s").unwrap();
    let refused = bryant_twist(&hl_cone(), &cos_2s, (0.0, 0.0), &rect);
    ensure(matches!(refused, Err(Error::NotClosed { .. })), || {
        "cos 2s input was accepted".into()
    })?;
    Ok(format!(
        "{} analytic <= {worst_a:.1e}, 6 borisenko <= {worst_fd:.1e}; controls: anti-holomorphic {bad:.1e}, cos 2s not closed",
        analytic.len()
    ))
}

fn cross_path_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = HoloField::parse("0.2-1i, 0.3, 0.5+0.5i, 0.1").unwrap();
    let pairs = [
        (hl_twist(&p), lie_twist(&hl_cone(), &p)),
        (joyce_twist(joyce((-2, 1, 1)), 0.6, -0.8), lie_twist(&joyce_cone(joyce((-2, 1, 1))), &HoloField::constant(0.6, -0.8))),
        (joyce_twist(joyce((-3, 2, 1)), -0.4, 1.1), lie_twist(&joyce_cone(joyce((-3, 2, 1))), &HoloField::constant(-0.4, 1.1))),
    ];
    let mut worst = 0f64;
    for _ in 0..10_000 {
        let r = rng.random_range(-5.0..5.0);
        let s = rng.random_range(-2.0..2.0);
        let t = rng.random_range(-2.0..2.0);
        for (a, b) in &pairs {
            worst = worst.max((a.point(s, t, r) - b.point(s, t, r)).norm());
        }
    }
    ensure(worst <= 1e-10, || format!("closed forms differ by {worst:e}"))?;
    Ok(format!("max pointwise gap {worst:.1e} over 10^4 samples"))
}

fn advance(state: &CurveState, t_end: f64, dt: f64) -> Result<CurveState, String> {
    let steps = (t_end / dt).round() as usize;
    let mut cur = state.clone();
    for _ in 0..steps {
        cur = step(&cur, dt, StepOptions::default()).map_err(|e| e.to_string())?;
    }
    Ok(cur)
}

fn evolution_solver() -> Outcome {
    let hl = InitialData::ConeSlice {
        cone: ruled_sl::cone::ConeSpec::Hl,
        t0: 0.0,
        twist: 0.0,
    };
    let end = advance(&hl.state(128).map_err(|e| e.to_string())?, 0.25, 1e-3)?;
    let (err, _) = error_against(&end, |s, t| hl.exact(s, t));
    let drift = end.norm_drift();
    let (ca, cb) = end.constraint_residuals();
    ensure(err < 1e-6, || format!("reconstruction error {err:e}"))?;
    ensure(drift < 1e-8, || format!("norm drift {drift:e}"))?;
    ensure(ca < 1e-7 && cb < 1e-7, || format!("constraints {ca:e} {cb:e}"))?;

    let rep = InitialData::HlReparametrized { q: 0.5 };
    let space = |n: usize| -> Result<f64, String> {
        let end = advance(&rep.state(n).map_err(|e| e.to_string())?, 0.25, 1e-3)?;
        Ok(error_against(&end, |s, t| rep.exact(s, t)).0)
    };
    let (e32, e64) = (space(32)?, space(64)?);
    ensure(e64 <= 0.1 * e32, || format!("n 32 -> 64: {e32:e} -> {e64:e}"))?;

    let coarse = hl.state(32).map_err(|e| e.to_string())?;
    let time = |dt: f64| -> Result<f64, String> {
        Ok(error_against(&advance(&coarse, 0.25, dt)?, |s, t| hl.exact(s, t)).0)
    };
    let ratio = time(0.025)? / time(0.0125)?;
    ensure((ratio.log2() - 4.0).abs() < 0.3, || format!("dt halving ratio {ratio}"))?;
    Ok(format!(
        "error {err:.1e}, drift {drift:.1e}, constraints {:.1e}; n 32->64 x{:.1e}; dt/2 x1/{ratio:.1}",
        ca.max(cb),
        e64 / e32
    ))
}

fn asymptotic_order_check() -> Outcome {
    let grid = Grid2::rect((0.0, 2.0), (0.0, 2.0), 8, 8);
    let cases = [
        ("HL", hl_cone(), hl_twist(&HoloField::constant(1.0, 0.0))),
        ("Joyce (-2,1,1)", joyce_cone(joyce((-2, 1, 1))), joyce_twist(joyce((-2, 1, 1)), 0.0, 1.0)),
    ];
    let mut line = Vec::new();
    for (name, cone, surf) in &cases {
        let slope = |r_max: f64| -> Result<f64, String> {
            let fit = asymptotic_order(cone, surf, &geometric_samples(1e2, r_max, 4), &grid)
                .map_err(|e| e.to_string())?;
            fit.slope.ok_or_else(|| format!("{name}: twist coincides with the cone"))
        };
        let (a, b) = (slope(1e6)?, slope(2e6)?);
        ensure((a + 1.0).abs() <= 0.05, || format!("{name}: slope {a}"))?;
        ensure((a - b).abs() <= 0.02, || format!("{name}: slope moved {a} -> {b}"))?;
        line.push(format!("{name} {a:.4} ({b:.4} on doubled range)"));
    }
    Ok(line.join(", "))
}

fn classification() -> Outcome {
    let grid = Grid2::rect((-1.0, 1.0), (-1.0, 1.0), 9, 9);
    let twists = [
        lie_twist(&hl_cone(), &HoloField::monomial(2)),
        lie_twist(&hl_cone(), &HoloField::parse("1, 0.5i, -0.25").unwrap()),
        lie_twist(&joyce_cone(joyce((-2, 1, 1))), &HoloField::monomial(1)),
        lie_twist(&joyce_cone(joyce((-3, 2, 1))), &HoloField::constant(0.3, -0.7)),
    ];
    let mut worst = 0f64;
    for surf in &twists {
        let cls = classify_ruling(surf, &grid, 1e-9);
        ensure(cls.verdict == Verdict::CaseI && cls.f_residual < 1e-9, || format!("{cls:?}"))?;
        worst = worst.max(cls.f_residual);
    }
    let real = from_fn("real ruling", |s, t| {
        let phi = CVec3::real(s.cos() / t.cosh(), s.sin() / t.cosh(), t.tanh());
        (phi, CVec3::real(0.3 * t, s * t, 0.2 * s * s - t))
    });
    let cls = classify_ruling(&real, &Grid2::rect((-1.0, 1.0), (-1.0, 1.0), 7, 7), 1e-7);
    let planar = cls.planarity_defect.unwrap_or(f64::INFINITY);
    ensure(cls.verdict == Verdict::CaseII && planar < 1e-7, || format!("real ruling: {cls:?}"))?;
    Ok(format!("4 twists case i, f-residual <= {worst:.1e}; real ruling case ii, planarity {planar:.1e}"))
}

fn invariance() -> Outcome {
    let g = patch3(6);
    let max = |s: &RuledSurface, phase: f64| sl_defect(s, &g, phase, 1.0).map(|r| r.max()).map_err(|e| e.to_string());
    let sl_surfaces = [
        hl_twist(&HoloField::monomial(2)),
        lie_twist(
            &joyce_cone(joyce((-3, 2, 1))),
            &HoloField::new(vec![Complex64::new(0.2, 0.1), Complex64::new(0.0, 0.4)]),
        ),
    ];
    let mut gauge = 0f64;
    for s in &sl_surfaces {
        gauge = gauge.max((max(s, 0.0)? - max(&gauge_fix(s), 0.0)?).abs());
    }
    ensure(gauge < 1e-10, || format!("gauge changed the defect by {gauge:e}"))?;

    let base = sl_surfaces[1].clone();
    let pert = from_fn("perturbed", move |s, t| {
        (base.phi(s, t), base.psi(s, t) + CVec3::real(0.1 * s, 0.0, 0.05 * t * t))
    });
    let mut rot = 0f64;
    for seed in 0..8 {
        for (surf, phase) in [(&sl_surfaces[0], 0.0), (&pert, 0.3)] {
            rot = rot.max((max(surf, phase)? - max(&surf.rotated(random_su3(seed)), phase)?).abs());
        }
    }
    ensure(rot < 1e-10, || format!("rotation changed the defect by {rot:e}"))?;
    Ok(format!("gauge {gauge:.1e}, SU(3) {rot:.1e} over 8 rotations"))
}

fn manifests_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../manifests")
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn end_to_end() -> Outcome {
    let mut line = Vec::new();
    for name in ["hl_z2", "joyce_m2_1_1", "borisenko_catenoid", "evolve_hl"] {
        let m = Manifest::read(&manifests_dir().join(format!("{name}.json"))).map_err(|e| e.to_string())?;
        let mut outputs = Vec::new();
        for _ in 0..2 {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let rep = run_manifest(&m, dir.path(), PipelineOptions::default()).map_err(|e| e.to_string())?;
            ensure(rep.exit_code() == 0, || format!("{name}: exit {}", rep.exit_code()))?;
            outputs.push(snapshot(dir.path()));
        }
        ensure(outputs[0] == outputs[1], || format!("{name}: outputs differ between runs"))?;
        line.push(format!("{name} ({} files)", outputs[0].len()));
    }
    Ok(format!("exit 0, byte-identical: {}", line.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("cross-product algebra", cross_product_algebra),
        ("cone certification", cone_certification),
        ("elliptic engine", elliptic_engine),
        ("construction residuals", construction_residuals),
        ("cross-path agreement", cross_path_agreement),
        ("evolution solver", evolution_solver),
        ("asymptotic order", asymptotic_order_check),
        ("classification", classification),
        ("gauge and symmetry invariance", invariance),
        ("end-to-end pipeline", end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name} [{secs:.1}s] {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name} [{secs:.1}s] {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} of 10 criteria pass", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
