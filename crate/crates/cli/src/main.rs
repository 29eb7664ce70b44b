use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ruled_sl::cone::{cone_condition_defect, ConeSpec, JoyceParams};
use ruled_sl::constructions::{HarmonicRho, HoloField, MinimalSurface, MinimalSurfaceData};
use ruled_sl::elliptic::{jacobi, jacobi_period};
use ruled_sl::evolve::{diagnostics_csv, InitialData};
use ruled_sl::grid::{Axis, Grid2, Grid3};
use ruled_sl::manifest::{ConstructionSpec, Manifest, SurfaceSamples};
use ruled_sl::mesh::{export_mesh, MeshOptions, ProjectionSpec};
use ruled_sl::pipeline::{
    defect_csv, run_pipeline, PipelineOptions, CONE_TOL_HL, CONE_TOL_JOYCE, SLOPE_TOL,
    SL_TOL_ANALYTIC, SL_TOL_NUMERIC,
};
use ruled_sl::verify::{asymptotic_order, geometric_samples, report_from_samples, sl_defect_samples};

#[derive(Parser)]
#[command(name = "ruledsl", version, about = "Build and certify ruled special Lagrangian 3-folds")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// Tolerance used by every check in place of its default.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads for grid evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for written artifacts.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Catalog cones.
    #[command(subcommand)]
    Cone(ConeCmd),
    /// Lie-derivative twists of catalog cones.
    #[command(subcommand)]
    Twist(TwistCmd),
    /// Twisted normal bundle of a catalog minimal surface.
    Borisenko(BorisenkoArgs),
    /// Curve evolution.
    #[command(subcommand)]
    Evolve(EvolveCmd),
    /// Residual checks.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Jacobi elliptic functions.
    #[command(subcommand)]
    Elliptic(EllipticCmd),
    /// Manifest-driven runs.
    #[command(subcommand)]
    Pipeline(PipelineCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum ConeName {
    Hl,
    Joyce,
}

#[derive(Args, Clone)]
struct ConeArgs {
    #[arg(long, value_enum, default_value = "hl")]
    cone: ConeName,
    /// Joyce integers `b1,b2,b3`.
    #[arg(long, allow_hyphen_values = true, default_value = "-2,1,1")]
    b: String,
}

impl ConeArgs {
    fn spec(&self) -> Result<ConeSpec> {
        Ok(match self.cone {
            ConeName::Hl => ConeSpec::Hl,
            ConeName::Joyce => {
                let v = parse_list::<i64>(&self.b, 3, "--b")?;
                ConeSpec::Joyce {
                    b: JoyceParams::new(v[0], v[1], v[2])?,
                }
            }
        })
    }
}

/// One period cell of the cone, `n × n`, wrapping in both directions.
fn period_grid(spec: &ConeSpec, n: usize) -> Grid2 {
    let (ls, lt) = match spec {
        ConeSpec::Hl => (4.0 * PI, 4.0 * PI / 3f64.sqrt()),
        ConeSpec::Joyce { .. } => {
            let p = spec.build().periods().expect("catalog cones are doubly periodic");
            (p[0].0, p[1].1)
        }
    };
    Grid2::new(Axis::periodic(0.0, ls, n), Axis::periodic(0.0, lt, n))
}

#[derive(Subcommand)]
enum ConeCmd {
    /// Cone conditions on one period cell.
    Check {
        #[command(flatten)]
        cone: ConeArgs,
        #[arg(long, default_value_t = 64)]
        n: usize,
    },
    /// OBJ mesh of the `r = 1` link over one period cell.
    Mesh {
        #[command(flatten)]
        cone: ConeArgs,
        #[arg(long, default_value_t = 48)]
        n: usize,
        #[arg(long, default_value = "im")]
        projection: String,
        #[arg(long, default_value = "cone.obj")]
        out: String,
    },
}

#[derive(Subcommand)]
enum TwistCmd {
    /// Write a surface manifest for the twist by `u + iv = p(s + it)`.
    Build {
        #[command(flatten)]
        cone: ConeArgs,
        /// Coefficients of `p`, ascending, e.g. `0,0,1` or `1+2i,-0.5i`.
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        /// Use the closed-form family (Harvey–Lawson, or Joyce with constant `p`).
        #[arg(long)]
        closed_form: bool,
        /// Tabulate `φ, ψ` on an `n × n` grid over `[-1, 1]²` into the manifest.
        #[arg(long)]
        embed: Option<usize>,
        #[arg(long, default_value = "surface.json")]
        out: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SurfaceName {
    Plane,
    Catenoid,
    Helicoid,
    Enneper,
}

#[derive(Args)]
struct BorisenkoArgs {
    #[arg(long, value_enum)]
    surface: SurfaceName,
    /// `s`, `t` or `const:<c>`.
    #[arg(long, default_value = "s")]
    rho: String,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Exchange the surface coordinates.
    #[arg(long)]
    swap: bool,
    #[arg(long, default_value = "surface.json")]
    out: String,
}

#[derive(Subcommand)]
enum EvolveCmd {
    /// Evolve initial curve data and write the swept surface.
    Run {
        /// JSON initial data, e.g. `{"kind": "cone_slice", "cone": {"kind": "hl"}}`.
        #[arg(long)]
        init: PathBuf,
        #[arg(long)]
        tmax: f64,
        #[arg(long)]
        dt: f64,
        #[arg(long, default_value_t = 128)]
        n: usize,
        /// Rescale `φ` to unit length after every step.
        #[arg(long)]
        renorm: bool,
        /// Output stem for `<stem>.json` and `<stem>_diagnostics.csv`.
        #[arg(long, default_value = "evolved")]
        stem: String,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// SL defect of a surface manifest.
    Sl {
        #[arg(long)]
        surface: PathBuf,
        /// `s0,s1,ns,t0,t1,nt`.
        #[arg(long, allow_hyphen_values = true, default_value = "-1,1,16,-1,1,16")]
        grid: String,
        /// `r0,r1,n`; mirrored to negative `r`.
        #[arg(long, allow_hyphen_values = true, default_value = "0.5,5,4")]
        r: String,
        /// Phase angle in degrees.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        phase: f64,
        /// Write per-sample defects to this CSV file.
        #[arg(long)]
        dump: Option<String>,
    },
    /// Decay rate of a constant twist towards its cone.
    Asymptotics {
        #[command(flatten)]
        cone: ConeArgs,
        /// `u,v`.
        #[arg(long, allow_hyphen_values = true, default_value = "1,0")]
        uv: String,
        #[arg(long, default_value_t = 1e2)]
        rmin: f64,
        #[arg(long, default_value_t = 1e6)]
        rmax: f64,
        /// Samples per decade of `r`.
        #[arg(long, default_value_t = 4)]
        decades: usize,
    },
}

#[derive(Subcommand)]
enum EllipticCmd {
    /// `sn, cn, dn` at `u` with modulus `k`, and the period `4K`.
    Eval {
        #[arg(long, allow_hyphen_values = true)]
        u: f64,
        #[arg(long)]
        k: f64,
    },
}

#[derive(Subcommand)]
enum PipelineCmd {
    /// Run a manifest; exit status 0 iff every check passes.
    Run { manifest: PathBuf },
}

fn parse_list<T: std::str::FromStr>(text: &str, n: usize, flag: &str) -> Result<Vec<T>> {
    let v: Vec<T> = text
        .split(',')
        .map(|x| x.trim().parse::<T>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| anyhow::anyhow!("{flag}: cannot parse {text:?}"))?;
    if v.len() != n {
        bail!("{flag}: expected {n} comma-separated values, got {}", v.len());
    }
    Ok(v)
}

fn parse_grid(text: &str) -> Result<Grid2> {
    let v = parse_list::<f64>(text, 6, "--grid")?;
    Ok(Grid2::rect((v[0], v[1]), (v[3], v[4]), v[2] as usize, v[5] as usize))
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    std::fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

fn status(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let g = cli.global;
    if let Some(n) = g.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }
    let out = |name: &str| g.out_dir.join(name);
    std::fs::create_dir_all(&g.out_dir).with_context(|| format!("creating {}", g.out_dir.display()))?;
    match cli.command {
        Command::Cone(ConeCmd::Check { cone, n }) => {
            let spec = cone.spec()?;
            let default = match spec {
                ConeSpec::Hl => CONE_TOL_HL,
                ConeSpec::Joyce { .. } => CONE_TOL_JOYCE,
            };
            let rep = cone_condition_defect(&spec.build(), &period_grid(&spec, n), g.tol.unwrap_or(default))?;
            print_json(&rep)?;
            Ok(status(rep.pass))
        }
        Command::Cone(ConeCmd::Mesh {
            cone,
            n,
            projection,
            out: file,
        }) => {
            let spec = cone.spec()?;
            let surf = ConstructionSpec::Cone { cone: spec }.build()?.surface;
            let proj: ProjectionSpec = serde_json::from_value(serde_json::Value::String(projection.clone()))
                .or_else(|_| serde_json::from_str(&projection))
                .with_context(|| format!("--projection: expected re, im, pca or a 3x6 JSON matrix, got {projection}"))?;
            let stats = export_mesh(&surf, &period_grid(&spec, n), &[1.0], &proj, MeshOptions::default(), &out(&file))?;
            print_json(&stats)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Twist(TwistCmd::Build {
            cone,
            p,
            closed_form,
            embed,
            out: file,
        }) => {
            let spec = cone.spec()?;
            let holo = HoloField::parse(&p)?;
            let construction = match (closed_form, spec) {
                (false, cone) => ConstructionSpec::LieTwist { cone, holo },
                (true, ConeSpec::Hl) => ConstructionSpec::HlTwist { p: holo },
                (true, ConeSpec::Joyce { b }) => {
                    if holo.degree() > 0 {
                        bail!("the closed-form Joyce family needs a constant field");
                    }
                    let c = holo.coeff(0);
                    ConstructionSpec::JoyceTwist { b, u: c.re, v: c.im }
                }
            };
            let mut m = Manifest::new("twist", construction);
            m.metadata.seed = g.seed;
            if let Some(n) = embed {
                let surf = m.construction.build()?.surface;
                m.samples = Some(SurfaceSamples::tabulate(&surf, &Grid2::rect((-1.0, 1.0), (-1.0, 1.0), n, n)));
            }
            m.write(&out(&file))?;
            println!("{}", out(&file).display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Borisenko(a) => {
            let surface = match a.surface {
                SurfaceName::Plane => MinimalSurface::Plane,
                SurfaceName::Catenoid => MinimalSurface::Catenoid,
                SurfaceName::Helicoid => MinimalSurface::Helicoid,
                SurfaceName::Enneper => MinimalSurface::Enneper,
            };
            let rho = match a.rho.as_str() {
                "s" => HarmonicRho::S,
                "t" => HarmonicRho::T,
                other => match other.strip_prefix("const:") {
                    Some(c) => HarmonicRho::Const {
                        c: c.parse().with_context(|| format!("--rho: bad constant {c:?}"))?,
                    },
                    None => bail!("--rho: expected s, t or const:<c>, got {other:?}"),
                },
            };
            let mut data = MinimalSurfaceData::new(surface, rho);
            data.scale = a.scale;
            data.swapped = a.swap;
            let construction = ConstructionSpec::Borisenko {
                data,
                probe: Grid2::rect((-1.0, 1.0), (-1.0, 1.0), 8, 8),
            };
            construction.build()?;
            let mut m = Manifest::new("borisenko", construction);
            m.metadata.seed = g.seed;
            m.write(&out(&a.out))?;
            println!("{}", out(&a.out).display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Evolve(EvolveCmd::Run {
            init,
            tmax,
            dt,
            n,
            renorm,
            stem,
        }) => {
            let text = std::fs::read_to_string(&init).with_context(|| format!("reading {}", init.display()))?;
            let init: InitialData = serde_json::from_str(&text).with_context(|| format!("parsing {}", init.display()))?;
            let construction = ConstructionSpec::Evolve {
                init,
                n,
                t_max: tmax,
                dt,
                renormalize: renorm,
            };
            let built = construction.build()?;
            let mut m = Manifest::new(&stem, construction);
            m.metadata.seed = g.seed;
            m.write(&out(&format!("{stem}.json")))?;
            let diag = built.diagnostics.unwrap_or_default();
            std::fs::write(out(&format!("{stem}_diagnostics.csv")), diagnostics_csv(&diag))?;
            if let Some(last) = diag.last() {
                println!(
                    "reached t = {}; norm drift {:e}; constraints {:e}, {:e}",
                    last.t, last.norm_drift, last.omega_phi, last.omega_psi
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(VerifyCmd::Sl {
            surface,
            grid,
            r,
            phase,
            dump,
        }) => {
            let m = Manifest::read(&surface)?;
            let surf = m.construction.build()?.surface;
            let rv = parse_list::<f64>(&r, 3, "--r")?;
            let grid3 = Grid3::new(parse_grid(&grid)?, Grid3::r_values(rv[0], rv[1], rv[2] as usize, true));
            let samples = sl_defect_samples(&surf, &grid3, phase.to_radians())?;
            let default = match surf.derivatives() {
                ruled_sl::constructions::DerivativeSource::Analytic => SL_TOL_ANALYTIC,
                _ => SL_TOL_NUMERIC,
            };
            let rep = report_from_samples(&samples, g.tol.unwrap_or(default));
            if let Some(file) = dump {
                std::fs::write(out(&file), defect_csv(&samples))?;
            }
            write_json(&out("sl_report.json"), &rep)?;
            print_json(&rep)?;
            Ok(status(rep.pass))
        }
        Command::Verify(VerifyCmd::Asymptotics {
            cone,
            uv,
            rmin,
            rmax,
            decades,
        }) => {
            let spec = cone.spec()?;
            let w = parse_list::<f64>(&uv, 2, "--uv")?;
            let surf = ConstructionSpec::LieTwist {
                cone: spec,
                holo: HoloField::constant(w[0], w[1]),
            }
            .build()?
            .surface;
            let grid = Grid2::rect((0.0, 2.0), (0.0, 2.0), 8, 8);
            let fit = asymptotic_order(&spec.build(), &surf, &geometric_samples(rmin, rmax, decades), &grid)?;
            write_json(&out("asymptotics.json"), &fit)?;
            print_json(&fit)?;
            let tol = g.tol.unwrap_or(SLOPE_TOL);
            Ok(status(fit.slope.is_none_or(|s| (s + 1.0).abs() < tol)))
        }
        Command::Elliptic(EllipticCmd::Eval { u, k }) => {
            let e = jacobi(u, k)?;
            print_json(&serde_json::json!({
                "u": u,
                "k": k,
                "sn": e.sn,
                "cn": e.cn,
                "dn": e.dn,
                "period": jacobi_period(k)?,
            }))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Pipeline(PipelineCmd::Run { manifest }) => {
            let rep = run_pipeline(
                &manifest,
                &g.out_dir,
                PipelineOptions {
                    tolerance: g.tol,
                    seed: g.seed,
                },
            )
            .with_context(|| format!("running {}", manifest.display()))?;
            for c in &rep.checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.check, c.summary);
            }
            for a in &rep.artifacts {
                println!("wrote {}", g.out_dir.join(a).display());
            }
            Ok(ExitCode::from(rep.exit_code() as u8))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
