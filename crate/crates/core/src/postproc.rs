//! Solution statistics, intrusive/non-intrusive comparison and legacy VTK export.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::StochasticField;
use crate::linalg::norm2;
use crate::mesh::TriMesh;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Nodal mean (coefficient 0) and standard deviation
/// `sqrt(sum_{j>=1} u_j^2 <Psi_j^2>)`.
pub fn field_stats(field: &StochasticField) -> FieldStats {
    let mut var = vec![0.0; field.num_nodes()];
    for (row, &psi2) in field.coeffs().iter().zip(field.basis().variances()).skip(1) {
        for (v, c) in var.iter_mut().zip(row) {
            *v += c * c * psi2;
        }
    }
    FieldStats {
        mean: field.coeff(0).to_vec(),
        std: var.into_iter().map(f64::sqrt).collect(),
    }
}

/// `||a - b|| / ||a||` in the discrete L2 norm; zero when both vanish.
pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let d = norm2(&diff);
    if d == 0.0 {
        return 0.0;
    }
    let scale = norm2(a);
    if scale == 0.0 {
        f64::INFINITY
    } else {
        d / scale
    }
}

/// Differences of `b` relative to the reference `a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub num_nodes: usize,
    pub num_terms: usize,
    /// Relative L2 difference of every coefficient field.
    pub coefficients: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// Relative L2 difference of all coefficients stacked together.
    pub total: f64,
}

pub fn compare_fields(a: &StochasticField, b: &StochasticField) -> Result<ComparisonReport> {
    if a.basis().dim() != b.basis().dim() || a.basis().terms() != b.basis().terms() {
        return Err(Error::InvalidArgument(format!(
            "fields use different chaos bases (L={}, p={} vs L={}, p={})",
            a.basis().dim(),
            a.basis().order(),
            b.basis().dim(),
            b.basis().order()
        )));
    }
    if a.num_nodes() != b.num_nodes() {
        return Err(Error::DimensionMismatch {
            what: "field nodes",
            expected: a.num_nodes(),
            actual: b.num_nodes(),
        });
    }
    let coefficients = a
        .coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| relative_l2(x, y))
        .collect();
    let (sa, sb) = (field_stats(a), field_stats(b));
    let flat = |f: &StochasticField| f.coeffs().concat();
    Ok(ComparisonReport {
        num_nodes: a.num_nodes(),
        num_terms: a.num_terms(),
        coefficients,
        mean: relative_l2(&sa.mean, &sb.mean),
        std: relative_l2(&sa.std, &sb.std),
        total: relative_l2(&flat(a), &flat(b)),
    })
}

/// Legacy ASCII VTK unstructured grid with one `SCALARS` block per field, in
/// the given order.
pub fn write_vtk<W: Write>(mesh: &TriMesh, fields: &[(&str, &[f64])], mut out: W) -> Result<()> {
    for (name, values) in fields {
        if values.len() != mesh.num_nodes() {
            return Err(Error::DimensionMismatch {
                what: "VTK point field",
                expected: mesh.num_nodes(),
                actual: values.len(),
            });
        }
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!("VTK field name `{name}` must be a single word")));
        }
    }
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\nssfem field export\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    s.push_str(&format!("POINTS {} double\n", mesh.num_nodes()));
    for p in mesh.nodes() {
        s.push_str(&format!("{:e} {:e} 0\n", p[0], p[1]));
    }
    let m = mesh.num_triangles();
    s.push_str(&format!("CELLS {m} {}\n", 4 * m));
    for t in mesh.triangles() {
        s.push_str(&format!("3 {} {} {}\n", t[0], t[1], t[2]));
    }
    s.push_str(&format!("CELL_TYPES {m}\n"));
    for _ in 0..m {
        s.push_str("5\n");
    }
    if !fields.is_empty() {
        s.push_str(&format!("POINT_DATA {}\n", mesh.num_nodes()));
    }
    for (name, values) in fields {
        s.push_str(&format!("SCALARS {name} double 1\nLOOKUP_TABLE default\n"));
        for v in values.iter() {
            s.push_str(&format!("{v:e}\n"));
        }
    }
    out.write_all(s.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io("<vtk>", e))
}

pub fn export_vtk(mesh: &TriMesh, fields: &[(&str, &[f64])], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_vtk(mesh, fields, std::io::BufWriter::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Contents of a file written by [`write_vtk`].
#[derive(Debug, Clone, PartialEq)]
pub struct VtkData {
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<Vec<usize>>,
    pub cell_types: Vec<u8>,
    pub fields: Vec<(String, Vec<f64>)>,
}

/// Minimal reader for the subset of legacy VTK this crate writes.
pub fn parse_vtk(text: &str) -> Result<VtkData> {
    let origin = Path::new("<vtk>");
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if !header.starts_with("# vtk DataFile") {
        return Err(Error::parse(origin, 1, "missing `# vtk DataFile` header"));
    }
    lines.next();
    let rest: Vec<&str> = lines.flat_map(str::split_whitespace).collect();
    let mut pos = 0;
    let mut next = |what: &str| -> Result<&str> {
        let tok = rest.get(pos).copied().ok_or_else(|| Error::parse(origin, 0, format!("unexpected end, wanted {what}")))?;
        pos += 1;
        Ok(tok)
    };
    fn num<T: std::str::FromStr>(tok: &str) -> Result<T> {
        tok.parse().map_err(|_| Error::parse(Path::new("<vtk>"), 0, format!("bad number `{tok}`")))
    }
    fn expect(tok: &str, want: &str) -> Result<()> {
        if tok != want {
            return Err(Error::parse(Path::new("<vtk>"), 0, format!("expected `{want}`, found `{tok}`")));
        }
        Ok(())
    }

    expect(next("ASCII")?, "ASCII")?;
    expect(next("DATASET")?, "DATASET")?;
    expect(next("UNSTRUCTURED_GRID")?, "UNSTRUCTURED_GRID")?;
    expect(next("POINTS")?, "POINTS")?;
    let n: usize = num(next("point count")?)?;
    next("point type")?;
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        points.push([num(next("x")?)?, num(next("y")?)?, num(next("z")?)?]);
    }
    expect(next("CELLS")?, "CELLS")?;
    let m: usize = num(next("cell count")?)?;
    next("cell list size")?;
    let mut cells = Vec::with_capacity(m);
    for _ in 0..m {
        let k: usize = num(next("cell size")?)?;
        cells.push((0..k).map(|_| num(next("cell index")?)).collect::<Result<Vec<usize>>>()?);
    }
    expect(next("CELL_TYPES")?, "CELL_TYPES")?;
    next("cell type count")?;
    let cell_types = (0..m).map(|_| num(next("cell type")?)).collect::<Result<Vec<u8>>>()?;
    let mut fields = Vec::new();
    if let Ok(tok) = next("POINT_DATA") {
        expect(tok, "POINT_DATA")?;
        next("point data count")?;
        while let Ok(tok) = next("SCALARS") {
            expect(tok, "SCALARS")?;
            let name = next("field name")?.to_string();
            next("field type")?;
            next("components")?;
            expect(next("LOOKUP_TABLE")?, "LOOKUP_TABLE")?;
            next("table name")?;
            let values = (0..n).map(|_| num(next("value")?)).collect::<Result<Vec<f64>>>()?;
            fields.push((name, values));
        }
    }
    Ok(VtkData {
        points,
        cells,
        cell_types,
        fields,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldRole;
    use crate::mesh::structured_mesh;
    use crate::pce::build_basis;

    #[test]
    fn stats_use_basis_variances() {
        let basis = build_basis(3, 2).unwrap();
        let mut coeffs = vec![vec![0.0; 2]; basis.len()];
        coeffs[0] = vec![1.0, 2.0];
        coeffs[4] = vec![0.5, -3.0];
        let f = StochasticField::new(basis.clone(), coeffs, FieldRole::Solution).unwrap();
        let s = field_stats(&f);
        assert_eq!(s.mean, vec![1.0, 2.0]);
        assert!((s.std[0] - 0.5 * 2f64.sqrt()).abs() < 1e-15);
        assert!((s.std[1] - 3.0 * 2f64.sqrt()).abs() < 1e-15);

        let single = StochasticField::new(build_basis(3, 0).unwrap(), vec![vec![4.0; 3]], FieldRole::Solution).unwrap();
        assert_eq!(field_stats(&single).std, vec![0.0; 3]);
    }

    #[test]
    fn compare_identical_and_mismatched() {
        let basis = build_basis(2, 1).unwrap();
        let coeffs = vec![vec![1.0, 2.0], vec![0.1, 0.2], vec![0.0, -0.3]];
        let f = StochasticField::new(basis, coeffs.clone(), FieldRole::Solution).unwrap();
        let r = compare_fields(&f, &f).unwrap();
        assert!(r.coefficients.iter().all(|&d| d == 0.0));
        assert_eq!((r.mean, r.std, r.total), (0.0, 0.0, 0.0));

        // same number of terms, different term order
        let other = StochasticField::new(build_basis(1, 2).unwrap(), coeffs, FieldRole::Solution).unwrap();
        assert!(compare_fields(&f, &other).is_err());
        let short = StochasticField::new(build_basis(2, 1).unwrap(), vec![vec![1.0]; 3], FieldRole::Solution).unwrap();
        assert!(compare_fields(&f, &short).is_err());
    }

    #[test]
    fn vtk_round_trip() {
        let mesh = structured_mesh(1, 1).unwrap();
        let a = [0.1, 1.0 / 3.0, -2.5e-17, 7.0];
        let b = [1.0, 2.0, 3.0, 4.0];
        let mut buf = Vec::new();
        write_vtk(&mesh, &[("mean", &a), ("std", &b)], &mut buf).unwrap();
        let data = parse_vtk(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(data.points.len(), 4);
        assert_eq!(data.cells, vec![vec![0, 1, 3], vec![0, 3, 2]]);
        assert_eq!(data.cell_types, vec![5, 5]);
        assert_eq!(data.fields[0].0, "mean");
        assert_eq!(data.fields[1].0, "std");
        assert_eq!(data.fields[0].1, a.to_vec());
        assert!(write_vtk(&mesh, &[("x", &a[..3])], Vec::new()).is_err());
        assert!(write_vtk(&mesh, &[("two words", &a)], Vec::new()).is_err());
    }
}
