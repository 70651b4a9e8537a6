//! Independent stiffness computations used to cross-check the assembled
//! system. Both accept only flexible links, rigid joints, rigid supports and
//! a single load at the end node.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, Matrix6};

use crate::boundary::SupportKind;
use crate::error::{MsaError, Result};
use crate::joints::JointKind;
use crate::model::{Element, Model};
use crate::screw::transport_matrix;

fn check_scope(model: &Model) -> Result<()> {
    model.validate()?;
    if let Some(e) = model.elements.iter().find(|e| !matches!(e, Element::Flexible(_))) {
        return Err(MsaError::Unsupported(format!("{} in a reference model", e.kind_name())));
    }
    if let Some(j) = model
        .joints
        .iter()
        .find(|j| j.kind != JointKind::Rigid || !j.rigid_with.is_empty())
    {
        return Err(MsaError::Unsupported(format!(
            "{} joint in a reference model",
            j.kind.name()
        )));
    }
    if model.supports.iter().any(|s| s.kind != SupportKind::Rigid) {
        return Err(MsaError::Unsupported("non-rigid support in a reference model".into()));
    }
    if model
        .loads
        .iter()
        .any(|l| l.node != model.end_effector || l.wrench.amax() != 0.0)
    {
        return Err(MsaError::Unsupported(
            "loads other than the end node in a reference model".into(),
        ));
    }
    Ok(())
}

fn find(parent: &mut [usize], mut k: usize) -> usize {
    while parent[k] != k {
        parent[k] = parent[parent[k]];
        k = parent[k];
    }
    k
}

/// Classical direct stiffness method: nodes joined by rigid joints (or
/// meeting at the load) are merged, link matrices are summed into one global
/// matrix, grounded nodes are removed and the rest is condensed onto the end
/// node.
pub fn oracle_merged_msa(model: &Model) -> Result<Matrix6<f64>> {
    check_scope(model)?;
    let n = model.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    let groups_of = model
        .joints
        .iter()
        .map(|j| j.nodes.clone())
        .chain(model.loads.iter().map(|l| l.incident.clone()));
    for nodes in groups_of {
        for w in nodes.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a] = b;
        }
    }
    let grounded: Vec<usize> = model.supports.iter().map(|s| find(&mut parent, s.node)).collect();
    let end = find(&mut parent, model.end_effector);
    if grounded.contains(&end) {
        return Err(MsaError::LoadedSupport(model.node_name(model.end_effector).into()));
    }
    // free groups numbered with the end group last
    let mut index = BTreeMap::new();
    for k in 0..n {
        let root = find(&mut parent, k);
        if root != end && !grounded.contains(&root) && !index.contains_key(&root) {
            index.insert(root, index.len());
        }
    }
    let internal = index.len();
    index.insert(end, internal);
    let size = 6 * (internal + 1);
    let mut k = DMatrix::zeros(size, size);
    for e in &model.elements {
        let Element::Flexible(link) = e else { unreachable!() };
        let (i, j) = link.nodes();
        let slots = [find(&mut parent, i), find(&mut parent, j)].map(|r| index.get(&r).copied());
        let blocks = [[link.k11(), link.k12()], [link.k21(), link.k22()]];
        for (a, sa) in slots.iter().enumerate() {
            for (b, sb) in slots.iter().enumerate() {
                if let (Some(sa), Some(sb)) = (sa, sb) {
                    let mut view = k.view_mut((6 * sa, 6 * sb), (6, 6));
                    view += blocks[a][b];
                }
            }
        }
    }
    let m = 6 * internal;
    let kee = k.view((m, m), (6, 6)).clone_owned();
    let kc = if internal == 0 {
        kee
    } else {
        let kii = k.view((0, 0), (m, m)).clone_owned();
        let kie = k.view((0, m), (m, 6)).clone_owned();
        let kei = k.view((m, 0), (6, m)).clone_owned();
        let x = kii.lu().solve(&kie).ok_or(MsaError::Singular)?;
        kee - kei * x
    };
    let kc = Matrix6::from_fn(|r, c| kc[(r, c)]);
    Ok((kc + kc.transpose()) * 0.5)
}

/// Virtual-joint style series sum for a serial chain from a single rigid
/// support to the end node: `C = Σ T C_k Tᵀ`, where `C_k` is the compliance of
/// link `k` seen from its far node with the near node clamped and `T`
/// transports a deflection from the far node to the end node.
pub fn oracle_serial_vjm(model: &Model) -> Result<Matrix6<f64>> {
    check_scope(model)?;
    if model.supports.len() != 1 {
        return Err(MsaError::Unsupported("serial chains need exactly one support".into()));
    }
    if model.joints.iter().any(|j| j.nodes.len() != 2) || model.loads.iter().any(|l| l.incident.len() != 1) {
        return Err(MsaError::Unsupported("branching connection in a serial chain".into()));
    }
    let n = model.node_count();
    let mut link_of = vec![None; n];
    for (k, e) in model.elements.iter().enumerate() {
        for node in e.nodes() {
            link_of[node] = Some(k);
        }
    }
    let mut partner = vec![None; n];
    for j in &model.joints {
        partner[j.nodes[0]] = Some(j.nodes[1]);
        partner[j.nodes[1]] = Some(j.nodes[0]);
    }
    let end_pos = *model.position(model.end_effector);
    let mut compliance = Matrix6::zeros();
    let mut near = model.supports[0].node;
    let mut visited = 0;
    loop {
        let k = link_of[near].ok_or_else(|| MsaError::DanglingNode(model.node_name(near).into()))?;
        let Element::Flexible(link) = &model.elements[k] else {
            unreachable!()
        };
        let (i, j) = link.nodes();
        let (far, block) = if near == i { (j, link.k22()) } else { (i, link.k11()) };
        let c_k = block.try_inverse().ok_or(MsaError::Singular)?;
        let t = transport_matrix(&(end_pos - model.position(far)));
        compliance += t.matrix() * c_k * t.transpose();
        visited += 1;
        if far == model.end_effector {
            break;
        }
        near = partner[far].ok_or_else(|| MsaError::DanglingNode(model.node_name(far).into()))?;
        if visited > model.elements.len() {
            return Err(MsaError::Unsupported("closed loop in a serial chain".into()));
        }
    }
    if visited != model.elements.len() {
        return Err(MsaError::Unsupported("links outside the serial path".into()));
    }
    let kc = compliance.try_inverse().ok_or(MsaError::Singular)?;
    Ok((kc + kc.transpose()) * 0.5)
}
