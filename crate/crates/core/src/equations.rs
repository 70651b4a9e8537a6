//! Sparse block equations shared by every emitter and the assembler.

use nalgebra::{DMatrix, DVector, Vector6};

/// Unknown 6-vector attached to a node (by model index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Wrench(usize),
    Deflection(usize),
}

impl Var {
    pub fn node(&self) -> usize {
        match *self {
            Var::Wrench(n) | Var::Deflection(n) => n,
        }
    }

    /// First global column of this variable with `node_count` nodes, using the
    /// layout `[all wrenches; all deflections]`.
    pub fn column(&self, node_count: usize) -> usize {
        match *self {
            Var::Wrench(n) => 6 * n,
            Var::Deflection(n) => 6 * node_count + 6 * n,
        }
    }
}

/// Physical role of a row, used for block accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowClass {
    /// Element stiffness rows `W = K Δt`.
    Link,
    /// Deflection-only constraints.
    Compatibility,
    /// Wrench-only constraints.
    Equilibrium,
    /// Spring rows mixing wrench and deflection of one connection.
    Hooke,
    /// Rows that bind incident wrenches to an external load.
    Load,
}

impl RowClass {
    pub const ALL: [RowClass; 5] = [
        RowClass::Link,
        RowClass::Compatibility,
        RowClass::Equilibrium,
        RowClass::Hooke,
        RowClass::Load,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            RowClass::Link => "link",
            RowClass::Compatibility => "compatibility",
            RowClass::Equilibrium => "equilibrium",
            RowClass::Hooke => "hooke",
            RowClass::Load => "load",
        }
    }
}

/// A `k × 6` coefficient block placed at rows `row..row + k` and the columns
/// of `var`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockEntry {
    pub row: usize,
    pub var: Var,
    pub coeff: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquationBlock {
    rows: usize,
    entries: Vec<BlockEntry>,
    rhs: DVector<f64>,
    classes: Vec<RowClass>,
}

impl EquationBlock {
    pub fn new(rows: usize, class: RowClass) -> Self {
        EquationBlock {
            rows,
            entries: Vec::new(),
            rhs: DVector::zeros(rows),
            classes: vec![class; rows],
        }
    }

    pub fn empty() -> Self {
        Self::new(0, RowClass::Link)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn entries(&self) -> &[BlockEntry] {
        &self.entries
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    pub fn classes(&self) -> &[RowClass] {
        &self.classes
    }

    pub fn push(&mut self, row: usize, var: Var, coeff: DMatrix<f64>) {
        assert_eq!(coeff.ncols(), 6, "coefficient blocks act on 6-vectors");
        assert!(row + coeff.nrows() <= self.rows, "block exceeds row count");
        if coeff.nrows() > 0 {
            self.entries.push(BlockEntry { row, var, coeff });
        }
    }

    pub fn set_rhs(&mut self, row: usize, values: &DVector<f64>) {
        self.rhs.rows_mut(row, values.len()).copy_from(values);
    }

    pub fn set_class(&mut self, row: usize, count: usize, class: RowClass) {
        self.classes[row..row + count].fill(class);
    }

    /// Appends the rows of `other` below the rows of `self`.
    pub fn append(&mut self, other: EquationBlock) {
        let offset = self.rows;
        self.entries.extend(other.entries.into_iter().map(|mut e| {
            e.row += offset;
            e
        }));
        let mut rhs = DVector::zeros(offset + other.rows);
        rhs.rows_mut(0, offset).copy_from(&self.rhs);
        rhs.rows_mut(offset, other.rows).copy_from(&other.rhs);
        self.rhs = rhs;
        self.classes.extend(other.classes);
        self.rows += other.rows;
    }

    /// Nodes referenced by any coefficient block.
    pub fn nodes(&self) -> Vec<usize> {
        let mut nodes: Vec<usize> = self.entries.iter().map(|e| e.var.node()).collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    /// Dense coefficient matrix over the `12 * node_count` global columns.
    pub fn dense(&self, node_count: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, 12 * node_count);
        for e in &self.entries {
            let col = e.var.column(node_count);
            let mut view = m.view_mut((e.row, col), (e.coeff.nrows(), 6));
            view += &e.coeff;
        }
        m
    }

    /// `M x − rhs` for per-node wrenches and deflections.
    pub fn residual(&self, wrenches: &[Vector6<f64>], deflections: &[Vector6<f64>]) -> DVector<f64> {
        let mut r = -self.rhs.clone();
        for e in &self.entries {
            let x = match e.var {
                Var::Wrench(n) => wrenches[n],
                Var::Deflection(n) => deflections[n],
            };
            let mut rows = r.rows_mut(e.row, e.coeff.nrows());
            rows += &e.coeff * x;
        }
        r
    }
}

/// `k × 6` block from a fixed-size 6x6 matrix.
pub(crate) fn block6(m: &nalgebra::Matrix6<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(6, 6, |i, j| m[(i, j)])
}

pub(crate) fn identity6() -> DMatrix<f64> {
    DMatrix::identity(6, 6)
}
