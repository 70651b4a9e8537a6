//! Equations of rigid, passive, elastic and actuated connections between links.
//!
//! Joint nodes are coincident, so no transport appears in any joint row.
//! Sign convention for springs: with `δ = Δt_i − Δt_j`, the elastic part of the
//! wrench applied to the `i` side is `−Ke·Λe·δ + Λe·W⁰`.

use nalgebra::{DMatrix, DVector};

use crate::basis::{JointBasis, JointStiffness};
use crate::equations::{identity6, EquationBlock, RowClass, Var};
use crate::error::{MsaError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Actuation {
    AsRigid,
    AsElastic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointKind {
    Rigid,
    Passive,
    Elastic,
    Actuated(Actuation),
}

impl JointKind {
    pub fn name(&self) -> &'static str {
        match self {
            JointKind::Rigid => "rigid",
            JointKind::Passive => "passive",
            JointKind::Elastic => "elastic",
            JointKind::Actuated(Actuation::AsRigid) => "actuated (rigid)",
            JointKind::Actuated(Actuation::AsElastic) => "actuated (elastic)",
        }
    }
}

/// Connection between link nodes.
///
/// Passive and elastic joints connect exactly two nodes `i, j`; additional
/// nodes welded to the `i` side (a rigid and a passive connection sharing one
/// location) go in `rigid_with`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpec {
    pub kind: JointKind,
    pub nodes: Vec<usize>,
    pub rigid_with: Vec<usize>,
    pub basis: Option<JointBasis>,
    pub stiffness: Option<JointStiffness>,
}

impl JointSpec {
    pub fn rigid(nodes: Vec<usize>) -> Self {
        JointSpec {
            kind: JointKind::Rigid,
            nodes,
            rigid_with: Vec::new(),
            basis: None,
            stiffness: None,
        }
    }

    pub fn passive(basis: JointBasis, i: usize, j: usize) -> Self {
        JointSpec {
            kind: JointKind::Passive,
            nodes: vec![i, j],
            rigid_with: Vec::new(),
            basis: Some(basis),
            stiffness: None,
        }
    }

    pub fn elastic(basis: JointBasis, stiffness: JointStiffness, i: usize, j: usize) -> Self {
        JointSpec {
            kind: JointKind::Elastic,
            nodes: vec![i, j],
            rigid_with: Vec::new(),
            basis: Some(basis),
            stiffness: Some(stiffness),
        }
    }

    pub fn with_rigid(mut self, nodes: Vec<usize>) -> Self {
        self.rigid_with = nodes;
        self
    }

    /// Every node touched by the joint.
    pub fn all_nodes(&self) -> Vec<usize> {
        self.nodes.iter().chain(&self.rigid_with).copied().collect()
    }
}

fn check_distinct(nodes: &[usize], what: &str) -> Result<()> {
    let mut sorted = nodes.to_vec();
    sorted.sort_unstable();
    match sorted.windows(2).find(|w| w[0] == w[1]) {
        Some(w) => Err(MsaError::DuplicateNode(w[0], what.into())),
        None => Ok(()),
    }
}

/// `Δt_k = Δt_last` for every other node and `Σ W = 0`.
pub fn rigid_joint_equations(nodes: &[usize]) -> Result<EquationBlock> {
    if nodes.len() < 2 {
        return Err(MsaError::InvalidInput("rigid joint needs at least two nodes".into()));
    }
    check_distinct(nodes, "rigid joint")?;
    let n = nodes.len();
    let last = nodes[n - 1];
    let mut b = EquationBlock::new(6 * n, RowClass::Compatibility);
    for (k, &node) in nodes[..n - 1].iter().enumerate() {
        b.push(6 * k, Var::Deflection(node), identity6());
        b.push(6 * k, Var::Deflection(last), -identity6());
    }
    let eq = 6 * (n - 1);
    b.set_class(eq, 6, RowClass::Equilibrium);
    for &node in nodes {
        b.push(eq, Var::Wrench(node), identity6());
    }
    Ok(b)
}

/// Rows shared by passive and elastic joints: relative compatibility along the
/// rigid directions and welding of `rigid_with` nodes to `i`.
fn compatibility_rows(b: &mut EquationBlock, basis: &JointBasis, i: usize, j: usize, welded: &[usize]) -> usize {
    let r = basis.rigid_count();
    let lr = basis.rigid_rows().clone();
    b.push(0, Var::Deflection(i), lr.clone());
    b.push(0, Var::Deflection(j), -lr);
    for (k, &node) in welded.iter().enumerate() {
        b.push(r + 6 * k, Var::Deflection(i), identity6());
        b.push(r + 6 * k, Var::Deflection(node), -identity6());
    }
    r + 6 * welded.len()
}

fn check_pair(i: usize, j: usize, welded: &[usize], what: &str) -> Result<()> {
    let mut all = vec![i, j];
    all.extend_from_slice(welded);
    check_distinct(&all, what)
}

pub fn passive_joint_equations(basis: &JointBasis, i: usize, j: usize) -> Result<EquationBlock> {
    compound_passive_joint_equations(basis, i, j, &[])
}

/// Passive joint between `i` and `j` with extra nodes welded to `i`.
pub fn compound_passive_joint_equations(
    basis: &JointBasis,
    i: usize,
    j: usize,
    welded: &[usize],
) -> Result<EquationBlock> {
    check_pair(i, j, welded, "passive joint")?;
    let (r, p) = (basis.rigid_count(), basis.free_count());
    if p == 0 {
        return Err(MsaError::InvalidInput(
            "passive joint without free directions; use a rigid joint".into(),
        ));
    }
    let mut b = EquationBlock::new(12 + 6 * welded.len(), RowClass::Compatibility);
    let mut row = compatibility_rows(&mut b, basis, i, j, welded);
    b.set_class(row, r + 2 * p, RowClass::Equilibrium);
    let side_i: Vec<usize> = std::iter::once(i).chain(welded.iter().copied()).collect();
    for &node in side_i.iter().chain([&j]) {
        b.push(row, Var::Wrench(node), basis.rigid_rows().clone());
    }
    row += r;
    for &node in &side_i {
        b.push(row, Var::Wrench(node), basis.free_rows().clone());
    }
    row += p;
    b.push(row, Var::Wrench(j), basis.free_rows().clone());
    Ok(b)
}

pub fn elastic_joint_equations(
    basis: &JointBasis,
    stiffness: &JointStiffness,
    i: usize,
    j: usize,
) -> Result<EquationBlock> {
    compound_elastic_joint_equations(basis, stiffness, i, j, &[])
}

/// Elastic joint between `i` and `j` with extra nodes welded to `i`.
pub fn compound_elastic_joint_equations(
    basis: &JointBasis,
    stiffness: &JointStiffness,
    i: usize,
    j: usize,
    welded: &[usize],
) -> Result<EquationBlock> {
    check_pair(i, j, welded, "elastic joint")?;
    stiffness.check_against(basis)?;
    let e = basis.free_count();
    let mut b = EquationBlock::new(12 + 6 * welded.len(), RowClass::Compatibility);
    let mut row = compatibility_rows(&mut b, basis, i, j, welded);
    b.set_class(row, 6, RowClass::Equilibrium);
    let side_i: Vec<usize> = std::iter::once(i).chain(welded.iter().copied()).collect();
    for &node in side_i.iter().chain([&j]) {
        b.push(row, Var::Wrench(node), identity6());
    }
    row += 6;
    b.set_class(row, e, RowClass::Hooke);
    let ke_le: DMatrix<f64> = stiffness.ke() * basis.free_rows();
    b.push(row, Var::Deflection(i), ke_le.clone());
    b.push(row, Var::Deflection(j), -ke_le);
    for &node in &side_i {
        b.push(row, Var::Wrench(node), basis.free_rows().clone());
    }
    let preload: DVector<f64> = stiffness.projected_preload(basis);
    b.set_rhs(row, &preload);
    Ok(b)
}

/// Actuated joint rows: identical to the rigid or elastic idealization.
pub fn actuated_joint_equations(spec: &JointSpec) -> Result<EquationBlock> {
    let JointKind::Actuated(mode) = spec.kind else {
        return Err(MsaError::InvalidInput("not an actuated joint".into()));
    };
    let delegate = JointSpec {
        kind: match mode {
            Actuation::AsRigid => JointKind::Rigid,
            Actuation::AsElastic => JointKind::Elastic,
        },
        ..spec.clone()
    };
    if mode == Actuation::AsElastic && spec.stiffness.is_none() {
        return Err(MsaError::InvalidInput(
            "actuated joint idealized as elastic needs a transmission stiffness".into(),
        ));
    }
    joint_equations(&delegate)
}

fn pair(spec: &JointSpec, what: &str) -> Result<(usize, usize)> {
    match spec.nodes.as_slice() {
        [i, j] => Ok((*i, *j)),
        _ => Err(MsaError::InvalidInput(format!(
            "{what} joints connect exactly two nodes (got {}); chain pairwise joints or use rigid_with",
            spec.nodes.len()
        ))),
    }
}

pub fn joint_equations(spec: &JointSpec) -> Result<EquationBlock> {
    match spec.kind {
        JointKind::Rigid => rigid_joint_equations(&spec.all_nodes()),
        JointKind::Passive => {
            let (i, j) = pair(spec, "passive")?;
            let basis = spec
                .basis
                .as_ref()
                .ok_or_else(|| MsaError::InvalidInput("passive joint needs a basis".into()))?;
            compound_passive_joint_equations(basis, i, j, &spec.rigid_with)
        }
        JointKind::Elastic => {
            let (i, j) = pair(spec, "elastic")?;
            let basis = spec
                .basis
                .as_ref()
                .ok_or_else(|| MsaError::InvalidInput("elastic joint needs a basis".into()))?;
            let stiffness = spec
                .stiffness
                .as_ref()
                .ok_or_else(|| MsaError::InvalidInput("elastic joint needs a stiffness".into()))?;
            compound_elastic_joint_equations(basis, stiffness, i, j, &spec.rigid_with)
        }
        JointKind::Actuated(_) => actuated_joint_equations(spec),
    }
}
