//! Triangle meshes of the unit square.
//!
//! Text format: first non-comment line `N M`, then `N` lines `x y`, then `M` lines
//! `i j k` with 0-based node indices. `#` starts a comment.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};

const COORD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
}

pub fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

impl TriMesh {
    /// Builds a mesh, validating indices and orientation. Clockwise triangles are
    /// flipped with a warning; degenerate ones are rejected.
    pub fn new(nodes: Vec<[f64; 2]>, mut triangles: Vec<[usize; 3]>) -> Result<Self> {
        for (t, tri) in triangles.iter_mut().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&v| v >= nodes.len()) {
                return Err(Error::InvalidArgument(format!(
                    "triangle {t} references node {bad} but the mesh has {} nodes",
                    nodes.len()
                )));
            }
            let area = signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
            if area == 0.0 || !area.is_finite() {
                return Err(Error::DegenerateTriangle { triangle: t, area });
            }
            if area < 0.0 {
                warn!("triangle {t} is clockwise; reordering its vertices");
                tri.swap(1, 2);
            }
        }
        for (i, p) in nodes.iter().enumerate() {
            if p.iter().any(|c| !(*c >= -COORD_TOL && *c <= 1.0 + COORD_TOL)) {
                return Err(Error::InvalidArgument(format!(
                    "node {i} at ({}, {}) lies outside the unit square",
                    p[0], p[1]
                )));
            }
        }
        let boundary = boundary_flags(nodes.len(), &triangles);
        Ok(TriMesh {
            nodes,
            triangles,
            boundary,
        })
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// `true` for nodes on the domain boundary.
    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        self.boundary
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub fn vertices(&self, t: usize) -> [[f64; 2]; 3] {
        let tri = self.triangles[t];
        [self.nodes[tri[0]], self.nodes[tri[1]], self.nodes[tri[2]]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.vertices(t);
        signed_area(a, b, c)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.area(t)).sum()
    }

    /// Unique undirected edges, each as `(low, high)`.
    pub fn edges(&self) -> BTreeSet<(usize, usize)> {
        self.triangles
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect()
    }

    /// Index of the node closest to `p`.
    pub fn nearest_node(&self, p: [f64; 2]) -> usize {
        self.nodes
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                let da = (a[0] - p[0]).powi(2) + (a[1] - p[1]).powi(2);
                let db = (b[0] - p[0]).powi(2) + (b[1] - p[1]).powi(2);
                da.total_cmp(&db)
            })
            .map(|(i, _)| i)
            .expect("mesh has nodes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.nodes.len(), self.triangles.len());
        for p in &self.nodes {
            // shortest round-trip representation
            let _ = writeln!(out, "{} {}", p[0], p[1]);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parses the text format; `origin` is only used in error messages.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let perr = |line: usize, msg: String| Error::parse(origin, line, msg);
        let (line_no, header) = lines
            .next()
            .ok_or_else(|| perr(0, "empty mesh file".into()))?;
        let counts: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| perr(line_no, format!("bad header `{header}`: {e}")))?;
        let [n_nodes, n_tris] = counts[..] else {
            return Err(perr(line_no, format!("header must be `N M`, got `{header}`")));
        };

        let mut nodes = Vec::with_capacity(n_nodes);
        for i in 0..n_nodes {
            let (line_no, l) = lines
                .next()
                .ok_or_else(|| perr(0, format!("expected {n_nodes} nodes, found {i}")))?;
            let v: Vec<f64> = l
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| perr(line_no, format!("bad node `{l}`: {e}")))?;
            let [x, y] = v[..] else {
                return Err(perr(line_no, format!("node line needs two coordinates, got `{l}`")));
            };
            nodes.push([x, y]);
        }

        let mut triangles = Vec::with_capacity(n_tris);
        let mut tri_lines = Vec::with_capacity(n_tris);
        for t in 0..n_tris {
            let (line_no, l) = lines
                .next()
                .ok_or_else(|| perr(0, format!("expected {n_tris} triangles, found {t}")))?;
            let v: Vec<usize> = l
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| perr(line_no, format!("bad triangle `{l}`: {e}")))?;
            let [i, j, k] = v[..] else {
                return Err(perr(line_no, format!("triangle line needs three indices, got `{l}`")));
            };
            if let Some(&bad) = [i, j, k].iter().find(|&&v| v >= n_nodes) {
                return Err(perr(
                    line_no,
                    format!("triangle {t} references node {bad} but only {n_nodes} nodes exist"),
                ));
            }
            triangles.push([i, j, k]);
            tri_lines.push(line_no);
        }
        if let Some((line_no, l)) = lines.next() {
            return Err(perr(line_no, format!("unexpected trailing content `{l}`")));
        }

        TriMesh::new(nodes, triangles).map_err(|e| match e {
            Error::DegenerateTriangle { triangle, area } => perr(
                tri_lines[triangle],
                format!("triangle {triangle} is degenerate (signed area {area:e})"),
            ),
            other => other,
        })
    }
}

fn boundary_flags(n_nodes: usize, triangles: &[[usize; 3]]) -> Vec<bool> {
    let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
    for t in triangles {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            *edge_count.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut boundary = vec![false; n_nodes];
    for ((a, b), count) in edge_count {
        if count == 1 {
            boundary[a] = true;
            boundary[b] = true;
        }
    }
    boundary
}

/// `nx` by `ny` cells on the unit square, each split along its lower-left to
/// upper-right diagonal. Node `(i, j)` has index `j * (nx + 1) + i`.
pub fn structured_mesh(nx: usize, ny: usize) -> Result<TriMesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument(format!(
            "structured mesh needs at least one cell per direction (nx={nx}, ny={ny})"
        )));
    }
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([i as f64 / nx as f64, j as f64 / ny as f64]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (p00, p10, p11, p01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([p00, p10, p11]);
            triangles.push([p00, p11, p01]);
        }
    }
    TriMesh::new(nodes, triangles)
}
