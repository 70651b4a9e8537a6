//! Split of the global system into internal unknowns `μ` (all wrenches and
//! every deflection except the end node's) and the end deflection `Δt_e`:
//!
//! ```text
//! [A B] [μ   ]   [b    ]
//! [C D] [Δt_e] = [W_ext]
//! ```

use nalgebra::{DMatrix, DVector};

use super::GlobalSystem;
use crate::error::{MsaError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedSystem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    /// Right-hand side of the internal rows.
    pub rhs: DVector<f64>,
    /// External wrench currently bound to the end node.
    pub end_load: DVector<f64>,
    /// Global row of each partitioned row (internal rows first).
    pub row_order: Vec<usize>,
    /// Global column of each partitioned column (`μ` first).
    pub col_order: Vec<usize>,
    pub end: usize,
}

/// Row and column orders placing the end node's load rows and deflection
/// columns last.
pub(crate) fn orders(system: &GlobalSystem, end: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let load = system
        .load_rows(end)
        .ok_or_else(|| MsaError::MissingLoadRows(end.to_string()))?;
    let end_rows: Vec<usize> = (load..load + 6).collect();
    let end_cols: Vec<usize> = system.deflection_columns(end).collect();
    let mut rows: Vec<usize> = (0..system.rows()).filter(|r| !end_rows.contains(r)).collect();
    rows.extend(&end_rows);
    let mut cols: Vec<usize> = (0..system.columns()).filter(|c| !end_cols.contains(c)).collect();
    cols.extend(&end_cols);
    Ok((rows, cols))
}

impl PartitionedSystem {
    pub(crate) fn split(
        m: &DMatrix<f64>,
        rhs: &DVector<f64>,
        row_order: Vec<usize>,
        col_order: Vec<usize>,
        end: usize,
    ) -> Self {
        let permuted = m.select_rows(&row_order).select_columns(&col_order);
        let (nr, nc) = permuted.shape();
        let (ir, ic) = (nr - 6, nc - 6);
        let r = rhs.select_rows(&row_order);
        PartitionedSystem {
            a: permuted.view((0, 0), (ir, ic)).into_owned(),
            b: permuted.view((0, ic), (ir, 6)).into_owned(),
            c: permuted.view((ir, 0), (6, ic)).into_owned(),
            d: permuted.view((ir, ic), (6, 6)).into_owned(),
            rhs: r.rows(0, ir).into_owned(),
            end_load: r.rows(ir, 6).into_owned(),
            row_order,
            col_order,
            end,
        }
    }

    /// Reassembles the global coefficient matrix.
    pub fn departition(&self) -> DMatrix<f64> {
        let ir = self.b.nrows();
        let ic = self.a.ncols();
        let nr = ir + 6;
        let mut permuted = DMatrix::zeros(nr, ic + 6);
        permuted.view_mut((0, 0), (ir, ic)).copy_from(&self.a);
        permuted.view_mut((0, ic), (ir, 6)).copy_from(&self.b);
        permuted.view_mut((ir, 0), (6, ic)).copy_from(&self.c);
        permuted.view_mut((ir, ic), (6, 6)).copy_from(&self.d);
        let mut m = DMatrix::zeros(nr, self.col_order.len());
        for (pi, &gi) in self.row_order.iter().enumerate() {
            for (pj, &gj) in self.col_order.iter().enumerate() {
                m[(gi, gj)] = permuted[(pi, pj)];
            }
        }
        m
    }
}

pub fn partition(system: &GlobalSystem, end: usize) -> Result<PartitionedSystem> {
    let (rows, cols) = orders(system, end)?;
    Ok(PartitionedSystem::split(
        &system.to_dense(),
        system.rhs(),
        rows,
        cols,
        end,
    ))
}
