//! Structural audit of a model: equation accounting, rank, connectivity.

use serde::Serialize;

use super::linalg::{equilibrate, rank_with_tol, RANK_TOL};
use super::partition::{orders, PartitionedSystem};
use super::{assemble_unchecked, RowSource};
use crate::model::Model;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceRows {
    pub source: String,
    pub kind: String,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeConnectivity {
    pub node: String,
    /// Elements (links, platforms) attached to the node.
    pub elements: usize,
    /// Joints, supports and loads attached to the node.
    pub connections: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub equations: usize,
    pub unknowns: usize,
    pub rank: usize,
    /// Rows that repeat information of other rows.
    pub redundant: usize,
    /// Independent motions left undetermined by the full system.
    pub mechanisms: usize,
    /// Nullity of the internal block (motions not reaching the end node).
    pub internal_mechanisms: Option<usize>,
    pub well_posed: bool,
    pub row_classes: std::collections::BTreeMap<String, usize>,
    pub sources: Vec<SourceRows>,
    pub nodes: Vec<NodeConnectivity>,
    pub issues: Vec<String>,
}

impl CheckReport {
    pub fn summary(&self) -> String {
        let plural = |n: usize, word: &str| format!("{n} {word}{}", if n == 1 { "" } else { "s" });
        format!(
            "{} equations / {} unknowns, {}, {} redundant",
            self.equations,
            self.unknowns,
            plural(self.mechanisms, "mechanism"),
            plural(self.redundant, "row")
        )
    }

    fn failed(issue: String) -> Self {
        CheckReport {
            equations: 0,
            unknowns: 0,
            rank: 0,
            redundant: 0,
            mechanisms: 0,
            internal_mechanisms: None,
            well_posed: false,
            row_classes: Default::default(),
            sources: Vec::new(),
            nodes: Vec::new(),
            issues: vec![issue],
        }
    }
}

fn connectivity(model: &Model) -> Vec<NodeConnectivity> {
    let n = model.node_count();
    let mut elements = vec![0; n];
    let mut connections = vec![0; n];
    for e in &model.elements {
        for k in e.nodes() {
            elements[k] += 1;
        }
    }
    for j in &model.joints {
        for k in j.all_nodes() {
            connections[k] += 1;
        }
    }
    for s in &model.supports {
        connections[s.node] += 1;
    }
    for l in &model.loads {
        for &k in &l.incident {
            connections[k] += 1;
        }
    }
    (0..n)
        .map(|k| NodeConnectivity {
            node: model.node_name(k).to_string(),
            elements: elements[k],
            connections: connections[k],
        })
        .collect()
}

/// Always returns a report; problems are listed in `issues`.
pub fn check_model(model: &Model) -> CheckReport {
    let system = match assemble_unchecked(model) {
        Ok(s) => s,
        Err(e) => return CheckReport::failed(e.to_string()),
    };
    let mut issues = Vec::new();
    let nodes = connectivity(model);
    for c in &nodes {
        if c.elements != 1 {
            issues.push(format!(
                "node '{}' belongs to {} elements (expected 1)",
                c.node, c.elements
            ));
        }
        if c.connections != 1 {
            issues.push(format!(
                "node '{}' has {} joints/supports/loads (expected 1)",
                c.node, c.connections
            ));
        }
    }

    let m = system.to_dense();
    let eq = equilibrate(&m);
    let scaled = eq.apply(&m);
    let rank = rank_with_tol(&scaled, RANK_TOL);
    let (rows, cols) = (system.rows(), system.columns());
    let redundant = rows - rank;
    let mechanisms = cols - rank;
    if rows != cols {
        issues.push(format!("{rows} equations for {cols} unknowns"));
    }
    if redundant > 0 {
        issues.push(format!("{redundant} redundant constraint rows"));
    }
    if mechanisms > 0 {
        issues.push(format!("{mechanisms} unresisted motions (mechanisms)"));
    }

    let internal_mechanisms = if rows == cols {
        match orders(&system, model.end_effector) {
            Ok((r, c)) => {
                let rhs = system.rhs().component_mul(&eq.rows);
                let parts = PartitionedSystem::split(&scaled, &rhs, r, c, model.end_effector);
                Some(parts.a.ncols() - rank_with_tol(&parts.a, RANK_TOL))
            }
            Err(e) => {
                issues.push(e.to_string());
                None
            }
        }
    } else {
        None
    };

    let sources = system
        .blocks()
        .iter()
        .map(|sb| {
            let kind = match sb.source {
                RowSource::Element(k) => model.elements[k].kind_name().to_string(),
                RowSource::Joint(k) => format!("{} joint", model.joints[k].kind.name()),
                RowSource::Support(_) => "support".to_string(),
                RowSource::Load(_) => "load".to_string(),
            };
            SourceRows {
                source: sb.source.to_string(),
                kind,
                rows: sb.block.rows(),
            }
        })
        .collect();
    let row_classes = system
        .class_counts()
        .into_iter()
        .map(|(c, n)| (c.name().to_string(), n))
        .collect();

    CheckReport {
        equations: rows,
        unknowns: cols,
        rank,
        redundant,
        mechanisms,
        internal_mechanisms,
        well_posed: rows == cols && rank == cols,
        row_classes,
        sources,
        nodes,
        issues,
    }
}
