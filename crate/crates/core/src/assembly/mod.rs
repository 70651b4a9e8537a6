//! Aggregation of all equation blocks into one square system over the stacked
//! unknowns `[W_0 .. W_{N-1}; Δt_0 .. Δt_{N-1}]`, and its condensation to the
//! end-effector stiffness.

mod check;
pub mod linalg;
mod partition;
mod stiffness;

pub use check::{check_model, CheckReport, NodeConnectivity, SourceRows};
pub use partition::{partition, PartitionedSystem};
pub use stiffness::{cartesian_stiffness, solve_loaded, Analysis, CartesianStiffness, Diagnostics, LoadedState};

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector, Vector6};

use crate::equations::{EquationBlock, RowClass};
use crate::error::{MsaError, Result};
use crate::model::Model;

/// Which model item emitted a group of rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowSource {
    Element(usize),
    Joint(usize),
    Support(usize),
    Load(usize),
}

impl fmt::Display for RowSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowSource::Element(k) => write!(f, "element[{k}]"),
            RowSource::Joint(k) => write!(f, "joint[{k}]"),
            RowSource::Support(k) => write!(f, "support[{k}]"),
            RowSource::Load(k) => write!(f, "load[{k}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourcedBlock {
    pub source: RowSource,
    pub first_row: usize,
    pub block: EquationBlock,
}

/// Assembled sparse block system.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSystem {
    node_count: usize,
    rows: usize,
    blocks: Vec<SourcedBlock>,
    rhs: DVector<f64>,
    /// First row of the `Σ W = W_ext` rows of each loaded node.
    load_rows: BTreeMap<usize, usize>,
}

impl GlobalSystem {
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn columns(&self) -> usize {
        12 * self.node_count
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.columns()
    }

    pub fn blocks(&self) -> &[SourcedBlock] {
        &self.blocks
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    pub fn wrench_columns(&self, node: usize) -> std::ops::Range<usize> {
        6 * node..6 * node + 6
    }

    pub fn deflection_columns(&self, node: usize) -> std::ops::Range<usize> {
        let base = 6 * self.node_count + 6 * node;
        base..base + 6
    }

    /// First of the six external-load rows of `node`, if it is loaded.
    pub fn load_rows(&self, node: usize) -> Option<usize> {
        self.load_rows.get(&node).copied()
    }

    /// Triplets `(row, column, value)` of the nonzero coefficients.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut t = Vec::new();
        for sb in &self.blocks {
            for e in sb.block.entries() {
                let col = e.var.column(self.node_count);
                for (r, row) in e.coeff.row_iter().enumerate() {
                    for (c, &v) in row.iter().enumerate() {
                        if v != 0.0 {
                            t.push((sb.first_row + e.row + r, col + c, v));
                        }
                    }
                }
            }
        }
        t
    }

    pub fn nnz(&self) -> usize {
        self.triplets().len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.columns());
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    /// Row classes in global row order.
    pub fn classes(&self) -> Vec<RowClass> {
        self.blocks
            .iter()
            .flat_map(|sb| sb.block.classes().iter().copied())
            .collect()
    }

    pub fn class_counts(&self) -> BTreeMap<RowClass, usize> {
        let mut counts: BTreeMap<RowClass, usize> = RowClass::ALL.iter().map(|&c| (c, 0)).collect();
        for c in self.classes() {
            *counts.entry(c).or_default() += 1;
        }
        counts
    }

    /// Rows contributed by each source.
    pub fn source_rows(&self) -> Vec<(RowSource, usize)> {
        self.blocks.iter().map(|sb| (sb.source, sb.block.rows())).collect()
    }

    fn breakdown(&self, model: &Model) -> String {
        let mut parts: BTreeMap<&str, usize> = BTreeMap::new();
        for sb in &self.blocks {
            let key = match sb.source {
                RowSource::Element(k) => model.elements[k].kind_name(),
                RowSource::Joint(_) => "joints",
                RowSource::Support(_) => "supports",
                RowSource::Load(_) => "loads",
            };
            *parts.entry(key).or_default() += sb.block.rows();
        }
        parts
            .iter()
            .map(|(k, v)| format!("{k}: {v}"))
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// Replaces the external wrench of a loaded node.
    pub fn with_load(&self, node: usize, wrench: &Vector6<f64>) -> Result<GlobalSystem> {
        let row = self
            .load_rows(node)
            .ok_or_else(|| MsaError::MissingLoadRows(node.to_string()))?;
        let mut out = self.clone();
        out.rhs.rows_mut(row, 6).copy_from(wrench);
        Ok(out)
    }

    /// `‖M x − rhs‖ / max(‖rhs‖, ‖M‖·‖x‖)` with Frobenius/2-norms.
    pub fn relative_residual(&self, x: &DVector<f64>) -> f64 {
        let m = self.to_dense();
        let r = &m * x - &self.rhs;
        let scale = self.rhs.norm().max(m.norm() * x.norm());
        if scale == 0.0 {
            0.0
        } else {
            r.norm() / scale
        }
    }
}

/// Emits every block without checking that the system is square.
pub fn assemble_unchecked(model: &Model) -> Result<GlobalSystem> {
    model.validate()?;
    let mut blocks: Vec<(RowSource, EquationBlock)> = Vec::new();
    for (k, e) in model.elements.iter().enumerate() {
        blocks.push((RowSource::Element(k), model.element_equations(e)?));
    }
    for (k, j) in model.joints.iter().enumerate() {
        blocks.push((RowSource::Joint(k), model.joint_equations(j)?));
    }
    for (k, s) in model.supports.iter().enumerate() {
        blocks.push((RowSource::Support(k), model.support_equations(s)?));
    }
    for (k, l) in model.loads.iter().enumerate() {
        blocks.push((
            RowSource::Load(k),
            crate::boundary::external_load_equations(&l.incident, l.node)?,
        ));
    }

    let n = model.node_count();
    let mut touched = vec![false; n];
    for (_, b) in &blocks {
        for node in b.nodes() {
            touched[node] = true;
        }
    }
    if let Some(k) = touched.iter().position(|t| !t) {
        return Err(MsaError::DanglingNode(model.node_name(k).to_string()));
    }

    let mut rows = 0;
    let mut sourced = Vec::with_capacity(blocks.len());
    let mut load_rows = BTreeMap::new();
    for (source, block) in blocks {
        if let RowSource::Load(k) = source {
            let load = &model.loads[k];
            load_rows.insert(load.node, rows + block.rows() - 6);
        }
        sourced.push(SourcedBlock {
            source,
            first_row: rows,
            block,
        });
        rows += sourced.last().map(|b: &SourcedBlock| b.block.rows()).unwrap_or(0);
    }
    let mut rhs = DVector::zeros(rows);
    for sb in &sourced {
        rhs.rows_mut(sb.first_row, sb.block.rows()).copy_from(sb.block.rhs());
    }
    for load in &model.loads {
        let row = load_rows[&load.node];
        rhs.rows_mut(row, 6).copy_from(&load.wrench);
    }
    Ok(GlobalSystem {
        node_count: n,
        rows,
        blocks: sourced,
        rhs,
        load_rows,
    })
}

/// Assembles the model and requires as many equations as unknowns.
pub fn assemble(model: &Model) -> Result<GlobalSystem> {
    let system = assemble_unchecked(model)?;
    if !system.is_square() {
        return Err(MsaError::CountMismatch {
            rows: system.rows(),
            columns: system.columns(),
            breakdown: system.breakdown(model),
        });
    }
    Ok(system)
}
