//! Construct → verify → export, driven by a [`Manifest`].

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::complex3::random_su3;
use crate::cone::{cone_condition_defect, ConeSpec};
use crate::constructions::{DerivativeSource, RuledSurface};
use crate::error::{Error, Result};
use crate::evolve::diagnostics_csv;
use crate::manifest::{Check, ExportSpec, Manifest, SurfaceSamples};
use crate::mesh::{export_mesh, MeshOptions};
use crate::report::ResidualReport;
use crate::verify::{
    asymptotic_order, bounded_distance_check, classify_ruling, estimate_phase, geometric_samples,
    sl_defect, sl_defect_samples, Verdict,
};

/// Default SL tolerance for analytic derivative oracles.
pub const SL_TOL_ANALYTIC: f64 = 1e-9;
/// Default SL tolerance for spectral or finite-difference oracles.
pub const SL_TOL_NUMERIC: f64 = 1e-6;
pub const PHASE_TOL: f64 = 1e-6;
pub const CLASSIFY_TOL: f64 = 1e-9;
pub const SLOPE_TOL: f64 = 0.05;
pub const BOUNDED_TOL: f64 = 1e-9;
pub const SU3_TOL: f64 = 1e-10;
pub const CONE_TOL_HL: f64 = 1e-12;
pub const CONE_TOL_JOYCE: f64 = 1e-9;

/// Header line of per-sample defect CSV files.
pub const DEFECT_CSV_HEADER: &str = "# ruledsl sl-defect samples v1";

/// Settings that override the manifest.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PipelineOptions {
    /// Tolerance used by every check in place of its own.
    pub tolerance: Option<f64>,
    /// Seed for randomized checks in place of the manifest seed.
    pub seed: Option<u64>,
}

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub check: String,
    pub pass: bool,
    pub tolerance: f64,
    pub summary: String,
    pub detail: serde_json::Value,
}

/// Everything a pipeline run produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub name: String,
    pub pass: bool,
    pub checks: Vec<CheckOutcome>,
    /// Written files, relative to the output directory.
    pub artifacts: Vec<String>,
}

impl PipelineReport {
    /// Process exit code: 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

fn sl_default(surf: &RuledSurface) -> f64 {
    match surf.derivatives() {
        DerivativeSource::Analytic => SL_TOL_ANALYTIC,
        _ => SL_TOL_NUMERIC,
    }
}

fn describe(report: &ResidualReport) -> String {
    let failing = report.failing();
    if report.samples == 0 {
        return format!("no usable samples ({} excluded)", report.excluded);
    }
    let worst = report
        .conditions
        .iter()
        .map(|c| format!("{} max {:e}", c.name, c.max))
        .collect::<Vec<_>>()
        .join(", ");
    if failing.is_empty() {
        format!("{worst}; below tolerance {:e}", report.tolerance)
    } else {
        format!(
            "{worst}; failing {} at tolerance {:e}",
            failing.join(", "),
            report.tolerance
        )
    }
}

fn json<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(v)?)
}

fn residual_outcome(name: &str, report: ResidualReport) -> Result<CheckOutcome> {
    Ok(CheckOutcome {
        check: name.into(),
        pass: report.pass,
        tolerance: report.tolerance,
        summary: describe(&report),
        detail: json(&report)?,
    })
}

/// Run one check on `surf`.
pub fn run_check(
    check: &Check,
    surf: &RuledSurface,
    opts: PipelineOptions,
    manifest_seed: Option<u64>,
) -> Result<CheckOutcome> {
    let tol = |own: Option<f64>, default: f64| opts.tolerance.or(own).unwrap_or(default);
    match check {
        Check::Sl {
            grid,
            phase_deg,
            tolerance,
        } => {
            let tol = tol(*tolerance, sl_default(surf));
            residual_outcome("sl", sl_defect(surf, grid, phase_deg.to_radians(), tol)?)
        }
        Check::Phase {
            grid,
            expected_deg,
            tolerance,
        } => {
            let tol = tol(*tolerance, PHASE_TOL);
            let est = estimate_phase(surf, grid)?;
            let off = (est.angle - expected_deg.to_radians()).rem_euclid(PI);
            let off = off.min(PI - off);
            Ok(CheckOutcome {
                check: "phase".into(),
                pass: off < tol && est.dispersion < tol,
                tolerance: tol,
                summary: format!(
                    "phase {:.12} rad, offset {off:e}, dispersion {:e}",
                    est.angle, est.dispersion
                ),
                detail: json(&est)?,
            })
        }
        Check::Classify {
            grid,
            expect,
            tolerance,
        } => {
            let tol = tol(*tolerance, CLASSIFY_TOL);
            let cls = classify_ruling(surf, grid, tol);
            let pass = match expect {
                Some(v) => cls.verdict == *v,
                None => cls.verdict != Verdict::Neither,
            } && cls.planarity_defect.is_none_or(|p| p < tol.max(1e-7));
            Ok(CheckOutcome {
                check: "classify".into(),
                pass,
                tolerance: tol,
                summary: format!(
                    "verdict {:?}; case i {:e}, case ii {:e}",
                    cls.verdict, cls.case_i_defect, cls.case_ii_defect
                ),
                detail: json(&cls)?,
            })
        }
        Check::Asymptotic {
            cone,
            grid,
            r_min,
            r_max,
            per_decade,
            expected_slope,
            tolerance,
        } => {
            let tol = tol(*tolerance, SLOPE_TOL);
            let r = geometric_samples(*r_min, *r_max, *per_decade);
            let fit = asymptotic_order(&cone.build(), surf, &r, grid)?;
            let (pass, summary) = match fit.slope {
                None => (true, "surface coincides with the cone".to_string()),
                Some(s) => (
                    (s - expected_slope).abs() < tol,
                    format!("slope {s:.6}, expected {expected_slope}"),
                ),
            };
            Ok(CheckOutcome {
                check: "asymptotic".into(),
                pass,
                tolerance: tol,
                summary,
                detail: json(&fit)?,
            })
        }
        Check::Bounded { grid, r, tolerance } => {
            let tol = tol(*tolerance, BOUNDED_TOL);
            residual_outcome("bounded", bounded_distance_check(surf, grid, r, tol)?)
        }
        Check::Su3Invariance {
            grid,
            phase_deg,
            tolerance,
        } => {
            let tol = tol(*tolerance, SU3_TOL);
            let seed = opts.seed.or(manifest_seed).unwrap_or(0);
            let theta = phase_deg.to_radians();
            let a = sl_defect(surf, grid, theta, f64::INFINITY)?.max();
            let b = sl_defect(&surf.rotated(random_su3(seed)), grid, theta, f64::INFINITY)?.max();
            let diff = (a - b).abs();
            Ok(CheckOutcome {
                check: "su3_invariance".into(),
                pass: diff < tol,
                tolerance: tol,
                summary: format!("defect {a:e} before, {b:e} after rotation (seed {seed})"),
                detail: serde_json::json!({ "before": a, "after": b, "seed": seed }),
            })
        }
        Check::ConeCondition {
            cone,
            grid,
            tolerance,
        } => {
            let default = match cone {
                ConeSpec::Hl => CONE_TOL_HL,
                ConeSpec::Joyce { .. } => CONE_TOL_JOYCE,
            };
            let tol = tol(*tolerance, default);
            residual_outcome("cone_condition", cone_condition_defect(&cone.build(), grid, tol)?)
        }
    }
}

/// Per-sample SL defects as CSV with a versioned header.
pub fn defect_csv(samples: &[crate::verify::SampleDefect]) -> String {
    let mut out = format!("{DEFECT_CSV_HEADER}\ns,t,r,kahler,phase,degenerate\n");
    for d in samples {
        out.push_str(&format!(
            "{:?},{:?},{:?},{:e},{:e},{}\n",
            d.s, d.t, d.r, d.kahler, d.phase, d.degenerate as u8
        ));
    }
    out
}

/// Build, check and export everything declared in `manifest`, writing into
/// `out_dir`. The report is also written as `<name>.report.json`.
pub fn run_manifest(manifest: &Manifest, out_dir: &Path, opts: PipelineOptions) -> Result<PipelineReport> {
    let built = manifest.construction.build()?;
    let surf = &built.surface;
    let checks = manifest
        .checks
        .iter()
        .map(|c| run_check(c, surf, opts, manifest.metadata.seed))
        .collect::<Result<Vec<_>>>()?;

    std::fs::create_dir_all(out_dir)?;
    let mut artifacts = Vec::new();
    for export in &manifest.exports {
        match export {
            ExportSpec::Obj {
                file,
                grid,
                r_slices,
                projection,
                rulings,
            } => {
                export_mesh(
                    surf,
                    grid,
                    r_slices,
                    projection,
                    MeshOptions { rulings: *rulings },
                    &out_dir.join(file),
                )?;
                artifacts.push(file.clone());
            }
            ExportSpec::DefectCsv {
                file,
                grid,
                phase_deg,
            } => {
                let samples = sl_defect_samples(surf, grid, phase_deg.to_radians())?;
                std::fs::write(out_dir.join(file), defect_csv(&samples))?;
                artifacts.push(file.clone());
            }
            ExportSpec::Diagnostics { file } => {
                let Some(diag) = &built.diagnostics else {
                    return Err(Error::BadParams(
                        "diagnostics export needs an evolved construction".into(),
                    ));
                };
                std::fs::write(out_dir.join(file), diagnostics_csv(diag))?;
                artifacts.push(file.clone());
            }
            ExportSpec::SurfaceManifest { file, grid } => {
                let mut m = Manifest::new(&manifest.name, manifest.construction.clone());
                m.metadata.seed = opts.seed.or(manifest.metadata.seed);
                m.samples = Some(SurfaceSamples::tabulate(surf, grid));
                m.write(&out_dir.join(file))?;
                artifacts.push(file.clone());
            }
        }
    }
    let report_file = format!("{}.report.json", manifest.name);
    artifacts.push(report_file.clone());
    let report = PipelineReport {
        name: manifest.name.clone(),
        pass: checks.iter().all(|c| c.pass),
        checks,
        artifacts,
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    std::fs::write(out_dir.join(report_file), text)?;
    Ok(report)
}

/// Read the manifest at `config` and run it.
pub fn run_pipeline(config: &Path, out_dir: &Path, opts: PipelineOptions) -> Result<PipelineReport> {
    run_manifest(&Manifest::read(config)?, out_dir, opts)
}
