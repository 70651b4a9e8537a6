//! Supports, external loads and reaction recovery.
//!
//! A support wrench `W_j` is the wrench the ground applies to the structure at
//! node `j`; it is read directly from the solved wrench vector.

use nalgebra::{Vector3, Vector6};

use crate::basis::{JointBasis, JointStiffness};
use crate::equations::{identity6, EquationBlock, RowClass, Var};
use crate::error::{MsaError, Result};
use crate::screw::Wrench;

#[derive(Debug, Clone, PartialEq)]
pub enum SupportKind {
    Rigid,
    Passive(JointBasis),
    Elastic(JointBasis, JointStiffness),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportSpec {
    pub node: usize,
    pub kind: SupportKind,
}

/// `Δt_j = 0`.
pub fn rigid_support_equations(node: usize) -> EquationBlock {
    let mut b = EquationBlock::new(6, RowClass::Compatibility);
    b.push(0, Var::Deflection(node), identity6());
    b
}

/// `Λr Δt_j = 0` and `Λp W_j = 0`.
pub fn passive_support_equations(node: usize, basis: &JointBasis) -> Result<EquationBlock> {
    let (r, p) = (basis.rigid_count(), basis.free_count());
    if p == 0 {
        return Err(MsaError::InvalidInput(
            "passive support without free directions; use a rigid support".into(),
        ));
    }
    if r == 0 {
        return Err(MsaError::InvalidInput(
            "passive support without rigid directions constrains nothing; use a load node".into(),
        ));
    }
    let mut b = EquationBlock::new(6, RowClass::Compatibility);
    b.push(0, Var::Deflection(node), basis.rigid_rows().clone());
    b.set_class(r, p, RowClass::Equilibrium);
    b.push(r, Var::Wrench(node), basis.free_rows().clone());
    Ok(b)
}

/// `Λr Δt_j = 0` and `Ke Λe Δt_j + Λe W_j = Λe W⁰`.
pub fn elastic_support_equations(node: usize, basis: &JointBasis, stiffness: &JointStiffness) -> Result<EquationBlock> {
    stiffness.check_against(basis)?;
    let (r, e) = (basis.rigid_count(), basis.free_count());
    let mut b = EquationBlock::new(6, RowClass::Compatibility);
    b.push(0, Var::Deflection(node), basis.rigid_rows().clone());
    b.set_class(r, e, RowClass::Hooke);
    b.push(r, Var::Deflection(node), stiffness.ke() * basis.free_rows());
    b.push(r, Var::Wrench(node), basis.free_rows().clone());
    b.set_rhs(r, &stiffness.projected_preload(basis));
    Ok(b)
}

pub fn support_equations(spec: &SupportSpec) -> Result<EquationBlock> {
    match &spec.kind {
        SupportKind::Rigid => Ok(rigid_support_equations(spec.node)),
        SupportKind::Passive(basis) => passive_support_equations(spec.node, basis),
        SupportKind::Elastic(basis, k) => elastic_support_equations(spec.node, basis, k),
    }
}

/// Load rows for link nodes meeting at one loaded point. Incident nodes other
/// than `end` move with it (`Δt_k = Δt_end`), and the last 6 rows state
/// `Σ W_k = W_ext`; their right-hand side is filled in at assembly.
pub fn external_load_equations(incident: &[usize], end: usize) -> Result<EquationBlock> {
    if incident.is_empty() {
        return Err(MsaError::InvalidInput("load needs at least one incident node".into()));
    }
    if !incident.contains(&end) {
        return Err(MsaError::InvalidInput(format!(
            "loaded node {end} must be one of its incident nodes"
        )));
    }
    let mut sorted = incident.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(MsaError::DuplicateNode(w[0], "load".into()));
    }
    let others: Vec<usize> = incident.iter().copied().filter(|&k| k != end).collect();
    let rows = 6 * others.len();
    let mut b = EquationBlock::new(rows + 6, RowClass::Compatibility);
    for (k, &node) in others.iter().enumerate() {
        b.push(6 * k, Var::Deflection(node), identity6());
        b.push(6 * k, Var::Deflection(end), -identity6());
    }
    b.set_class(rows, 6, RowClass::Load);
    for &node in incident {
        b.push(rows, Var::Wrench(node), identity6());
    }
    Ok(b)
}

/// Reaction at a supported node, read from the solved wrench vector.
pub fn support_reaction(supports: &[SupportSpec], wrenches: &[Vector6<f64>], node: usize) -> Result<Wrench> {
    if !supports.iter().any(|s| s.node == node) {
        return Err(MsaError::NotASupport(node.to_string()));
    }
    wrenches
        .get(node)
        .map(Wrench::from_vector)
        .ok_or(MsaError::UnknownNode(node))
}

/// Sum of wrenches applied at given positions, taken about the origin.
pub fn resultant_about_origin<'a>(applied: impl IntoIterator<Item = (&'a Vector3<f64>, Wrench)>) -> Wrench {
    applied.into_iter().fold(Wrench::default(), |acc, (r, w)| {
        let moved = w.about_origin(r);
        Wrench::new(acc.f + moved.f, acc.m + moved.m)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_support_emits_six_rows() {
        let k = JointStiffness::scalar(5.0).unwrap();
        let specs = [
            SupportKind::Rigid,
            SupportKind::Passive(JointBasis::revolute(2)),
            SupportKind::Passive(JointBasis::spherical()),
            SupportKind::Elastic(JointBasis::revolute(0), k),
        ];
        for kind in specs {
            let b = support_equations(&SupportSpec { node: 0, kind }).unwrap();
            assert_eq!(b.rows(), 6);
        }
    }

    #[test]
    fn degenerate_passive_supports_rejected() {
        assert!(passive_support_equations(0, &JointBasis::rigid()).is_err());
        assert!(passive_support_equations(0, &JointBasis::free()).is_err());
    }

    #[test]
    fn revolute_support_rows() {
        let b = passive_support_equations(0, &JointBasis::revolute(2)).unwrap();
        let spin = Vector6::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.4);
        let w = Vector6::new(1.0, 2.0, 3.0, 4.0, 5.0, 0.0);
        assert_eq!(b.residual(&[w], &[spin]).amax(), 0.0);
        let moment_z = Vector6::new(0.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert_eq!(b.residual(&[moment_z], &[spin]).amax(), 1.0);
    }

    #[test]
    fn elastic_support_hooke_law_and_preload() {
        let k = 300.0;
        let w0 = Vector6::new(0.0, 0.0, 0.0, 0.0, 0.0, 2.0);
        let stiffness = JointStiffness::scalar(k).unwrap().with_preload(w0).unwrap();
        let b = elastic_support_equations(0, &JointBasis::revolute(2), &stiffness).unwrap();
        assert_eq!(b.classes()[5], RowClass::Hooke);
        assert!(b.residual(&[w0], &[Vector6::zeros()]).amax() < 1e-15);
        let theta = 0.01;
        let dt = Vector6::new(0.0, 0.0, 0.0, 0.0, 0.0, theta);
        let w = Vector6::new(0.0, 0.0, 0.0, 0.0, 0.0, 2.0 - k * theta);
        assert!(b.residual(&[w], &[dt]).amax() < 1e-15);
    }

    #[test]
    fn load_rows() {
        let single = external_load_equations(&[3], 3).unwrap();
        assert_eq!(single.rows(), 6);
        let w = Vector6::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        let mut ws = vec![Vector6::zeros(); 4];
        ws[3] = w;
        // the external wrench enters the right-hand side only at assembly
        assert_eq!(single.residual(&ws, &[Vector6::zeros(); 4]).as_slice(), w.as_slice());
        let triple = external_load_equations(&[0, 1, 2], 2).unwrap();
        assert_eq!(triple.rows(), 18);
        assert_eq!(triple.classes().iter().filter(|&&c| c == RowClass::Load).count(), 6);
        let ws = [w, -w * 0.5, -w * 0.5];
        assert_eq!(triple.residual(&ws, &[Vector6::repeat(1.0); 3]).amax(), 0.0);
        assert!(external_load_equations(&[0, 1], 2).is_err());
        assert!(external_load_equations(&[], 2).is_err());
    }

    #[test]
    fn reaction_lookup() {
        let supports = [SupportSpec {
            node: 1,
            kind: SupportKind::Rigid,
        }];
        let ws = [Vector6::zeros(), Vector6::repeat(2.0)];
        assert_eq!(support_reaction(&supports, &ws, 1).unwrap().f, Vector3::repeat(2.0));
        assert!(matches!(
            support_reaction(&supports, &ws, 0),
            Err(MsaError::NotASupport(_))
        ));
    }

    #[test]
    fn cantilever_statics_balance() {
        let tip = Vector3::new(0.8, 0.0, 0.0);
        let base = Vector3::zeros();
        let f = Vector3::new(0.0, -10.0, 0.0);
        let reaction = Wrench::new(-f, -tip.cross(&f));
        let total = resultant_about_origin([(&base, reaction), (&tip, Wrench::new(f, Vector3::zeros()))]);
        assert!(total.to_vector().amax() < 1e-15);
    }
}
