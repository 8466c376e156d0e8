use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContingencyTable {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub counts: Vec<Vec<f64>>,
}

impl ContingencyTable {
    pub fn new(rows: Vec<String>, cols: Vec<String>, counts: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() < 2 || cols.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "contingency table is {}x{}, need at least 2x2",
                rows.len(),
                cols.len()
            )));
        }
        if counts.len() != rows.len() {
            return Err(Error::LengthMismatch { left: counts.len(), right: rows.len() });
        }
        for row in &counts {
            if row.len() != cols.len() {
                return Err(Error::LengthMismatch { left: row.len(), right: cols.len() });
            }
            if row.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(Error::Invariant("contingency counts must be finite and non-negative".into()));
            }
        }
        Ok(ContingencyTable { rows, cols, counts })
    }

    /// Drops all-zero columns, returning the labels removed.
    pub fn drop_empty_columns(&mut self) -> Vec<String> {
        let keep: Vec<bool> = (0..self.cols.len())
            .map(|j| self.counts.iter().any(|r| r[j] > 0.0))
            .collect();
        let dropped = self
            .cols
            .iter()
            .zip(&keep)
            .filter(|(_, k)| !**k)
            .map(|(c, _)| c.clone())
            .collect();
        let filter = |v: &Vec<f64>| v.iter().zip(&keep).filter(|(_, k)| **k).map(|(x, _)| *x).collect();
        self.counts = self.counts.iter().map(filter).collect();
        self.cols = self.cols.iter().zip(&keep).filter(|(_, k)| **k).map(|(c, _)| c.clone()).collect();
        dropped
    }
}

/// Two-dimensional principal-coordinate CA solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaSolution {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub row_coords: Vec<[f64; 2]>,
    pub col_coords: Vec<[f64; 2]>,
    /// All singular values of the standardized residual matrix, descending.
    pub singular_values: Vec<f64>,
    pub inertia_shares: Vec<f64>,
    pub total_inertia: f64,
    pub warning: Option<String>,
}

const ZERO_INERTIA: f64 = 1e-24;

/// Correspondence analysis in principal coordinates.
///
/// Each axis is signed so that its largest-magnitude row coordinate is positive.
pub fn correspondence_analysis(table: &ContingencyTable) -> Result<CaSolution> {
    let (nr, nc) = (table.rows.len(), table.cols.len());
    let grand: f64 = table.counts.iter().flatten().sum();
    let p = DMatrix::from_fn(nr, nc, |i, j| table.counts[i][j] / grand);
    let r: Vec<f64> = (0..nr).map(|i| p.row(i).sum()).collect();
    let c: Vec<f64> = (0..nc).map(|j| p.column(j).sum()).collect();
    if let Some(i) = r.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::Invariant(format!("row {:?} is all zero", table.rows[i])));
    }
    if let Some(j) = c.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::Invariant(format!("column {:?} is all zero", table.cols[j])));
    }
    let s = DMatrix::from_fn(nr, nc, |i, j| (p[(i, j)] - r[i] * c[j]) / (r[i] * c[j]).sqrt());
    let total: f64 = s.iter().map(|v| v * v).sum();
    let k = nr.min(nc);
    if total < ZERO_INERTIA {
        log::warn!("correspondence table has zero inertia; coordinates set to the origin");
        return Ok(CaSolution {
            row_labels: table.rows.clone(),
            col_labels: table.cols.clone(),
            row_coords: vec![[0.0; 2]; nr],
            col_coords: vec![[0.0; 2]; nc],
            singular_values: vec![0.0; k],
            inertia_shares: vec![0.0; k],
            total_inertia: 0.0,
            warning: Some("zero total inertia: rows and columns are independent".into()),
        });
    }
    let (sv, u, v) = thin_svd(&s);
    let mut row_coords = vec![[0.0; 2]; nr];
    let mut col_coords = vec![[0.0; 2]; nc];
    for axis in 0..2.min(sv.len()) {
        let sigma = sv[axis];
        let mut rows: Vec<f64> = (0..nr).map(|i| u[(i, axis)] * sigma / r[i].sqrt()).collect();
        let mut cols: Vec<f64> = (0..nc).map(|j| v[(j, axis)] * sigma / c[j].sqrt()).collect();
        let pivot = rows
            .iter()
            .copied()
            .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if pivot < 0.0 {
            rows.iter_mut().for_each(|x| *x = -*x);
            cols.iter_mut().for_each(|x| *x = -*x);
        }
        for i in 0..nr {
            row_coords[i][axis] = rows[i];
        }
        for j in 0..nc {
            col_coords[j][axis] = cols[j];
        }
    }
    let sum_sq: f64 = sv.iter().map(|x| x * x).sum();
    Ok(CaSolution {
        row_labels: table.rows.clone(),
        col_labels: table.cols.clone(),
        row_coords,
        col_coords,
        inertia_shares: sv.iter().map(|x| x * x / sum_sq).collect(),
        singular_values: sv,
        total_inertia: total,
        warning: None,
    })
}

/// Singular values (descending) with left and right singular vectors as columns.
///
/// Built from the symmetric eigen-decomposition of the smaller Gram matrix:
/// nalgebra's bidiagonal SVD loses about six digits on the rank-deficient
/// residual matrices CA always produces.
fn thin_svd(s: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>, DMatrix<f64>) {
    let tall = s.nrows() > s.ncols();
    let gram = if tall { s.transpose() * s } else { s * s.transpose() };
    let eig = gram.symmetric_eigen();
    let k = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let sv: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0).sqrt()).collect();
    let small = DMatrix::from_fn(k, k, |row, col| eig.eigenvectors[(row, order[col])]);
    // the other side's vectors: S v / sigma (or S^T u / sigma), zero for null directions
    let cutoff = sv.first().copied().unwrap_or(0.0) * 1e-10;
    let mut other = if tall { s * &small } else { s.transpose() * &small };
    for (col, &sigma) in sv.iter().enumerate() {
        let scale = if sigma > cutoff { 1.0 / sigma } else { 0.0 };
        other.column_mut(col).scale_mut(scale);
    }
    if tall {
        (sv, other, small)
    } else {
        (sv, small, other)
    }
}
