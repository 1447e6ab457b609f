//! Node-indexed polynomial chaos coefficient fields and their CSV form.
//!
//! CSV schema: header `node,x,y,c0,c1,...,cP`, one row per mesh node, reals with
//! 15 significant digits.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::pce::PceBasis;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldRole {
    /// PCE coefficients of an input (diffusion) coefficient; the mean must be positive.
    InputCoefficient,
    Solution,
}

/// `coeffs[j][node]` is the coefficient of `Psi_j` at `node`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticField {
    basis: PceBasis,
    coeffs: Vec<Vec<f64>>,
    role: FieldRole,
}

impl StochasticField {
    pub fn new(basis: PceBasis, coeffs: Vec<Vec<f64>>, role: FieldRole) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                what: "coefficient rows",
                expected: basis.len(),
                actual: coeffs.len(),
            });
        }
        let n = coeffs[0].len();
        if let Some(row) = coeffs.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                what: "coefficient row length",
                expected: n,
                actual: row.len(),
            });
        }
        if coeffs.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("stochastic field has non-finite coefficients".into()));
        }
        if role == FieldRole::InputCoefficient {
            if let Some(i) = coeffs[0].iter().position(|&m| m <= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "input coefficient mean must be positive, node {i} has {}",
                    coeffs[0][i]
                )));
            }
        }
        Ok(StochasticField { basis, coeffs, role })
    }

    pub fn basis(&self) -> &PceBasis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> &[f64] {
        &self.coeffs[j]
    }

    pub fn role(&self) -> FieldRole {
        self.role
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.coeffs[0].len()
    }

    /// Realisation `sum_j c_j(x) Psi_j(xi)` at every node.
    pub fn evaluate(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let psi = self.basis.eval_all(xi)?;
        let mut out = vec![0.0; self.num_nodes()];
        for (row, p) in self.coeffs.iter().zip(&psi) {
            for (o, c) in out.iter_mut().zip(row) {
                *o += c * p;
            }
        }
        Ok(out)
    }

    /// Writes the CSV form; `nodes` supplies the coordinates.
    pub fn write_csv<W: Write>(&self, nodes: &[[f64; 2]], out: W) -> Result<()> {
        write_table(nodes, &self.coeffs, out)
    }

    pub fn save_csv(&self, nodes: &[[f64; 2]], path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(nodes, std::io::BufWriter::new(file)).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }

    /// Rebuilds a field from a parsed table and the basis it was written with.
    pub fn from_table(basis: PceBasis, table: FieldTable, role: FieldRole) -> Result<Self> {
        StochasticField::new(basis, table.coeffs, role)
    }
}

/// Raw contents of a field CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTable {
    pub nodes: Vec<[f64; 2]>,
    pub coeffs: Vec<Vec<f64>>,
}

/// Writes `node,x,y,c0..` rows for an arbitrary set of coefficient columns.
pub fn write_table<W: Write>(nodes: &[[f64; 2]], columns: &[Vec<f64>], mut out: W) -> Result<()> {
    if let Some(col) = columns.iter().find(|c| c.len() != nodes.len()) {
        return Err(Error::DimensionMismatch {
            what: "field column length",
            expected: nodes.len(),
            actual: col.len(),
        });
    }
    let io = |e| Error::io("<csv>", e);
    let mut header = String::from("node,x,y");
    for j in 0..columns.len() {
        header.push_str(&format!(",c{j}"));
    }
    writeln!(out, "{header}").map_err(io)?;
    for (i, p) in nodes.iter().enumerate() {
        let mut line = format!("{i},{:.14e},{:.14e}", p[0], p[1]);
        for col in columns {
            line.push_str(&format!(",{:.14e}", col[i]));
        }
        writeln!(out, "{line}").map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_table<R: BufRead>(input: R, origin: &Path) -> Result<FieldTable> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(origin, 1, "empty field file"))?;
    let header = header.map_err(|e| Error::io(origin, e))?;
    let names: Vec<&str> = header.trim().split(',').collect();
    if names.len() < 4 || names[..3] != ["node", "x", "y"] {
        return Err(Error::parse(origin, 1, format!("expected `node,x,y,c0,...` header, got `{header}`")));
    }
    for (j, name) in names[3..].iter().enumerate() {
        if *name != format!("c{j}") {
            return Err(Error::parse(origin, 1, format!("column {} should be `c{j}`, got `{name}`", j + 3)));
        }
    }
    let n_cols = names.len() - 3;
    let mut nodes = Vec::new();
    let mut coeffs = vec![Vec::new(); n_cols];
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != names.len() {
            return Err(Error::parse(
                origin,
                line_no,
                format!("expected {} columns, found {}", names.len(), fields.len()),
            ));
        }
        let node: usize = fields[0]
            .parse()
            .map_err(|e| Error::parse(origin, line_no, format!("bad node index `{}`: {e}", fields[0])))?;
        if node != nodes.len() {
            return Err(Error::parse(origin, line_no, format!("expected node {}, found {node}", nodes.len())));
        }
        let values: Vec<f64> = fields[1..]
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::parse(origin, line_no, format!("bad number: {e}")))?;
        nodes.push([values[0], values[1]]);
        for (col, v) in coeffs.iter_mut().zip(&values[2..]) {
            col.push(*v);
        }
    }
    Ok(FieldTable { nodes, coeffs })
}

pub fn load_table(path: &Path) -> Result<FieldTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_table(BufReader::new(file), path)
}
