//! Wavefront OBJ export of `r`-slices of a ruled 3-fold, projected from
//! C³ ≅ R⁶ to R³.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use nalgebra::{Matrix3x6, Matrix6, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::complex3::CVec3;
use crate::constructions::RuledSurface;
use crate::error::{Error, Result};
use crate::grid::Grid2;

/// Named projection presets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// `(Re z1, Re z2, Re z3)`
    Re,
    /// `(Im z1, Im z2, Im z3)`
    Im,
    /// Top three principal axes of the sampled points.
    Pca,
}

/// Linear map R⁶ → R³, either a preset or explicit rows over
/// `(x1, x2, x3, y1, y2, y3)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProjectionSpec {
    Preset(Preset),
    Matrix([[f64; 6]; 3]),
}

/// Relative singular-value floor below which a projection is rank deficient.
const RANK_TOL: f64 = 1e-12;

fn rank_of(rows: &[[f64; 6]; 3]) -> usize {
    let m = Matrix3x6::from_fn(|i, j| rows[i][j]);
    let sv = m.singular_values();
    let max = sv.max();
    if !(max > 0.0) {
        return 0;
    }
    sv.iter().filter(|&&x| x > RANK_TOL * max).count()
}

fn pca(points: &[CVec3]) -> [[f64; 6]; 3] {
    let n = points.len().max(1) as f64;
    let xs: Vec<[f64; 6]> = points.iter().map(|p| p.to_real6()).collect();
    let mut mean = [0.0; 6];
    for x in &xs {
        for k in 0..6 {
            mean[k] += x[k] / n;
        }
    }
    let mut cov = Matrix6::<f64>::zeros();
    for x in &xs {
        for i in 0..6 {
            for j in 0..6 {
                cov[(i, j)] += (x[i] - mean[i]) * (x[j] - mean[j]) / n;
            }
        }
    }
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..6).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut rows = [[0.0; 6]; 3];
    for (r, &k) in order.iter().take(3).enumerate() {
        let col = eig.eigenvectors.column(k);
        // fix the sign: largest-magnitude entry positive
        let (mut best, mut at) = (0.0_f64, 0);
        for j in 0..6 {
            if col[j].abs() > best + 1e-12 {
                best = col[j].abs();
                at = j;
            }
        }
        let sign = if col[at] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..6 {
            rows[r][j] = sign * col[j];
        }
    }
    rows
}

impl ProjectionSpec {
    /// The 3×6 matrix, computed from `points` for the `pca` preset.
    ///
    /// Fails with `RankDeficient` unless the rows are linearly independent.
    pub fn resolve(&self, points: &[CVec3]) -> Result<[[f64; 6]; 3]> {
        let mut rows = [[0.0; 6]; 3];
        match self {
            ProjectionSpec::Preset(Preset::Re) => {
                for (i, row) in rows.iter_mut().enumerate() {
                    row[i] = 1.0;
                }
            }
            ProjectionSpec::Preset(Preset::Im) => {
                for (i, row) in rows.iter_mut().enumerate() {
                    row[i + 3] = 1.0;
                }
            }
            ProjectionSpec::Preset(Preset::Pca) => rows = pca(points),
            ProjectionSpec::Matrix(m) => rows = *m,
        }
        match rank_of(&rows) {
            3 => Ok(rows),
            r => Err(Error::RankDeficient(r)),
        }
    }
}

fn project(rows: &[[f64; 6]; 3], p: CVec3) -> [f64; 3] {
    let x = p.to_real6();
    rows.map(|r| r.iter().zip(&x).map(|(a, b)| a * b).sum())
}

/// Combinatorial summary of a written mesh.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshStats {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub lines: usize,
}

impl MeshStats {
    /// `V − E + F` of the triangulated slices.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices as i64 - self.edges as i64 + self.faces as i64
    }
}

/// Options for [`export_mesh`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MeshOptions {
    /// Emit the ruling segment `r ∈ [r0, r1]` through every grid node as an
    /// OBJ line element.
    pub rulings: Option<(f64, f64)>,
}

/// Build the OBJ text for the slices `r ∈ r_slices` of `surf` over `grid`.
///
/// Periodic axes wrap around, so a doubly periodic grid gives closed tori.
pub fn mesh_obj(
    surf: &RuledSurface,
    grid: &Grid2,
    r_slices: &[f64],
    proj: &ProjectionSpec,
    opts: MeshOptions,
) -> Result<(String, MeshStats)> {
    if grid.is_empty() || r_slices.is_empty() {
        return Err(Error::Io(io::Error::new(
            io::ErrorKind::InvalidInput,
            "mesh grid or r-slice list is empty; nothing written",
        )));
    }
    let (ns, nt) = (grid.s.n, grid.t.n);
    let jets: Vec<(CVec3, CVec3)> = (0..ns)
        .flat_map(|i| grid.row(i).collect::<Vec<_>>())
        .map(|(s, t)| (surf.phi(s, t), surf.psi(s, t)))
        .collect();
    let points: Vec<CVec3> = r_slices
        .iter()
        .flat_map(|&r| jets.iter().map(move |(p, q)| p.scale(r) + *q))
        .collect();
    let rows = proj.resolve(&points)?;

    let mut out = String::new();
    writeln!(out, "# ruledsl mesh v1").unwrap();
    writeln!(out, "# projection {:?}", rows).unwrap();
    for p in &points {
        let [x, y, z] = project(&rows, *p);
        writeln!(out, "v {x:?} {y:?} {z:?}").unwrap();
    }

    let next = |k: usize, n: usize, periodic: bool| -> Option<usize> {
        if k + 1 < n {
            Some(k + 1)
        } else if periodic && n > 2 {
            Some(0)
        } else {
            None
        }
    };
    let mut edges = BTreeSet::new();
    let mut faces = 0;
    let per_slice = ns * nt;
    for (k, r) in r_slices.iter().enumerate() {
        writeln!(out, "g slice_{k}").unwrap();
        writeln!(out, "# r = {r:?}").unwrap();
        let base = k * per_slice;
        let idx = |i: usize, j: usize| base + i * nt + j;
        for i in 0..ns {
            let Some(i1) = next(i, ns, grid.s.periodic) else {
                continue;
            };
            for j in 0..nt {
                let Some(j1) = next(j, nt, grid.t.periodic) else {
                    continue;
                };
                let (a, b, c, d) = (idx(i, j), idx(i1, j), idx(i1, j1), idx(i, j1));
                for tri in [[a, b, c], [a, c, d]] {
                    writeln!(out, "f {} {} {}", tri[0] + 1, tri[1] + 1, tri[2] + 1).unwrap();
                    for e in 0..3 {
                        let (u, v) = (tri[e], tri[(e + 1) % 3]);
                        edges.insert((u.min(v), u.max(v)));
                    }
                    faces += 1;
                }
            }
        }
    }

    let mut lines = 0;
    if let Some((r0, r1)) = opts.rulings {
        writeln!(out, "g rulings").unwrap();
        let first = points.len();
        for (p, q) in &jets {
            for r in [r0, r1] {
                let [x, y, z] = project(&rows, p.scale(r) + *q);
                writeln!(out, "v {x:?} {y:?} {z:?}").unwrap();
            }
        }
        for k in 0..jets.len() {
            writeln!(out, "l {} {}", first + 2 * k + 1, first + 2 * k + 2).unwrap();
            lines += 1;
        }
    }
    let stats = MeshStats {
        vertices: points.len(),
        edges: edges.len(),
        faces,
        lines,
    };
    Ok((out, stats))
}

/// Write [`mesh_obj`] output to `path`. Nothing is written on error.
pub fn export_mesh(
    surf: &RuledSurface,
    grid: &Grid2,
    r_slices: &[f64],
    proj: &ProjectionSpec,
    opts: MeshOptions,
    path: &Path,
) -> Result<MeshStats> {
    let (text, stats) = mesh_obj(surf, grid, r_slices, proj, opts)?;
    std::fs::write(path, text)?;
    Ok(stats)
}
