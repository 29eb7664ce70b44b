//! JSON manifests: a construction recipe, the checks to run on it and the
//! artifacts to write.
//!
//! Floats are written as shortest round-trip decimals, so reading a written
//! manifest reproduces every value bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::complex3::{random_su3, CVec3};
use crate::cone::{ConeSpec, JoyceParams};
use crate::constructions::{
    borisenko, bryant_twist, combined_twist, gauge_fix, hl_inverse_twist, hl_twist, joyce_twist,
    lie_twist, superpose, BryantRho, HoloField, MinimalSurfaceData, RuledSurface,
};
use crate::error::{Error, Result};
use crate::evolve::{evolve_to_surface, Diagnostic, InitialData, StepOptions};
use crate::grid::{Grid2, Grid3};
use crate::mesh::ProjectionSpec;

/// Current manifest layout version.
pub const MANIFEST_VERSION: u32 = 1;

/// Recipe for a ruled 3-fold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ConstructionSpec {
    Cone {
        cone: ConeSpec,
    },
    LieTwist {
        cone: ConeSpec,
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
        data: MinimalSurfaceData,
        /// Grid on which the surface data is validated.
        probe: Grid2,
    },
    Bryant {
        cone: ConeSpec,
        rho: BryantRho,
        basepoint: (f64, f64),
        /// Rectangle on which closedness is checked and `b` is tabulated.
        grid: Grid2,
    },
    Combined {
        cone: ConeSpec,
        holo: HoloField,
        rho: BryantRho,
        basepoint: (f64, f64),
        grid: Grid2,
    },
    Evolve {
        init: InitialData,
        n: usize,
        t_max: f64,
        dt: f64,
        #[serde(default)]
        renormalize: bool,
    },
    GaugeFixed {
        inner: Box<ConstructionSpec>,
    },
    /// Image under the pseudo-random SU(3) element drawn from `seed`.
    Rotated {
        inner: Box<ConstructionSpec>,
        seed: u64,
    },
    Superposed {
        a: f64,
        first: Box<ConstructionSpec>,
        b: f64,
        second: Box<ConstructionSpec>,
    },
}

/// A built surface and, for evolved surfaces, the solver diagnostics.
#[derive(Clone, Debug)]
pub struct Built {
    pub surface: RuledSurface,
    pub diagnostics: Option<Vec<Diagnostic>>,
}

impl ConstructionSpec {
    pub fn build(&self) -> Result<Built> {
        let plain = |surface| {
            Ok(Built {
                surface,
                diagnostics: None,
            })
        };
        match self {
            ConstructionSpec::Cone { cone } => plain(lie_twist(&cone.build(), &HoloField::zero())),
            ConstructionSpec::LieTwist { cone, holo } => plain(lie_twist(&cone.build(), holo)),
            ConstructionSpec::HlTwist { p } => plain(hl_twist(p)),
            ConstructionSpec::HlInverseTwist { p } => plain(hl_inverse_twist(p)),
            ConstructionSpec::JoyceTwist { b, u, v } => plain(joyce_twist(*b, *u, *v)),
            ConstructionSpec::Borisenko { data, probe } => plain(borisenko(data, probe)?),
            ConstructionSpec::Bryant {
                cone,
                rho,
                basepoint,
                grid,
            } => plain(bryant_twist(&cone.build(), rho, *basepoint, grid)?),
            ConstructionSpec::Combined {
                cone,
                holo,
                rho,
                basepoint,
                grid,
            } => plain(combined_twist(&cone.build(), holo, rho, *basepoint, grid)?),
            ConstructionSpec::Evolve {
                init,
                n,
                t_max,
                dt,
                renormalize,
            } => {
                let evo = evolve_to_surface(
                    &init.state(*n)?,
                    *t_max,
                    *dt,
                    StepOptions {
                        renormalize: *renormalize,
                    },
                )?;
                Ok(Built {
                    surface: evo.surface,
                    diagnostics: Some(evo.diagnostics),
                })
            }
            ConstructionSpec::GaugeFixed { inner } => {
                let b = inner.build()?;
                Ok(Built {
                    surface: gauge_fix(&b.surface),
                    ..b
                })
            }
            ConstructionSpec::Rotated { inner, seed } => {
                let b = inner.build()?;
                Ok(Built {
                    surface: b.surface.rotated(random_su3(*seed)),
                    ..b
                })
            }
            ConstructionSpec::Superposed {
                a,
                first,
                b,
                second,
            } => plain(superpose(*a, &first.build()?.surface, *b, &second.build()?.surface)?),
        }
    }
}

/// Information about the tool that wrote a manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for Metadata {
    fn default() -> Self {
        Self {
            tool: "ruledsl".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: None,
        }
    }
}

/// `φ` and `ψ` tabulated on a grid, row-major in `s`, each as
/// `(x1, x2, x3, y1, y2, y3)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSamples {
    pub grid: Grid2,
    pub phi: Vec<[f64; 6]>,
    pub psi: Vec<[f64; 6]>,
}

impl SurfaceSamples {
    pub fn tabulate(surf: &RuledSurface, grid: &Grid2) -> Self {
        let mut phi = Vec::with_capacity(grid.len());
        let mut psi = Vec::with_capacity(grid.len());
        for i in 0..grid.s.n {
            for (s, t) in grid.row(i) {
                let (p, q): (CVec3, CVec3) = (surf.phi(s, t), surf.psi(s, t));
                phi.push(p.to_real6());
                psi.push(q.to_real6());
            }
        }
        Self {
            grid: *grid,
            phi,
            psi,
        }
    }
}

/// A residual check run by the pipeline. Omitted tolerances take the
/// defaults listed on each variant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Check {
    /// SL defect at phase `phase_deg`; default tolerance `1e-9` for analytic
    /// derivatives and `1e-6` otherwise.
    Sl {
        grid: Grid3,
        #[serde(default)]
        phase_deg: f64,
        #[serde(default)]
        tolerance: Option<f64>,
    },
    /// Estimated phase agrees with `expected_deg` modulo 180°; default
    /// tolerance `1e-6` rad on both the offset and the dispersion.
    Phase {
        grid: Grid3,
        expected_deg: f64,
        #[serde(default)]
        tolerance: Option<f64>,
    },
    /// Ruling classification; default tolerance `1e-9`. Passes when the
    /// verdict equals `expect`, or is not `neither` if `expect` is absent.
    Classify {
        grid: Grid2,
        #[serde(default)]
        expect: Option<crate::verify::Verdict>,
        #[serde(default)]
        tolerance: Option<f64>,
    },
    /// Log-log decay rate of the displacement from `cone`; default
    /// tolerance `0.05` around `expected_slope = -1`.
    Asymptotic {
        cone: ConeSpec,
        grid: Grid2,
        #[serde(default = "default_r_min")]
        r_min: f64,
        #[serde(default = "default_r_max")]
        r_max: f64,
        #[serde(default = "default_per_decade")]
        per_decade: usize,
        #[serde(default = "default_slope")]
        expected_slope: f64,
        #[serde(default)]
        tolerance: Option<f64>,
    },
    /// Distance from the rulings to the cone lines; default tolerance `1e-9`.
    Bounded {
        grid: Grid2,
        r: Vec<f64>,
        #[serde(default)]
        tolerance: Option<f64>,
    },
    /// SL defect unchanged by a random SU(3) rotation drawn from the seed;
    /// default tolerance `1e-10`.
    Su3Invariance {
        grid: Grid3,
        #[serde(default)]
        phase_deg: f64,
        #[serde(default)]
        tolerance: Option<f64>,
    },
    /// Cone conditions on `φ`; default tolerance `1e-12` for the
    /// Harvey–Lawson cone and `1e-9` otherwise.
    ConeCondition {
        cone: ConeSpec,
        grid: Grid2,
        #[serde(default)]
        tolerance: Option<f64>,
    },
}

fn default_r_min() -> f64 {
    1e2
}

fn default_r_max() -> f64 {
    1e6
}

fn default_per_decade() -> usize {
    4
}

fn default_slope() -> f64 {
    -1.0
}

/// An artifact written by the pipeline, relative to the output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "snake_case")]
pub enum ExportSpec {
    /// Triangulated `r`-slices, optionally with ruling line segments.
    Obj {
        file: String,
        grid: Grid2,
        r_slices: Vec<f64>,
        projection: ProjectionSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rulings: Option<(f64, f64)>,
    },
    /// Per-sample SL defects as CSV.
    DefectCsv {
        file: String,
        grid: Grid3,
        #[serde(default)]
        phase_deg: f64,
    },
    /// Evolution diagnostics as CSV.
    Diagnostics { file: String },
    /// The manifest itself with `φ`, `ψ` tabulated on `grid`.
    SurfaceManifest { file: String, grid: Grid2 },
}

/// A construction with the checks to run on it and the artifacts to write.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub name: String,
    pub construction: ConstructionSpec,
    #[serde(default)]
    pub metadata: Metadata,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exports: Vec<ExportSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<SurfaceSamples>,
}

impl Manifest {
    pub fn new(name: &str, construction: ConstructionSpec) -> Self {
        Self {
            version: MANIFEST_VERSION,
            name: name.into(),
            construction,
            metadata: Metadata::default(),
            checks: Vec::new(),
            exports: Vec::new(),
            samples: None,
        }
    }

    /// Parse JSON text, reporting the field path, line and column of any
    /// error.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let m: Manifest = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Config {
                path,
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            }
        })?;
        if m.version != MANIFEST_VERSION {
            return Err(Error::Config {
                path: "version".into(),
                line: 0,
                column: 0,
                message: format!(
                    "unsupported manifest version {}, expected {MANIFEST_VERSION}",
                    m.version
                ),
            });
        }
        Ok(m)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}
