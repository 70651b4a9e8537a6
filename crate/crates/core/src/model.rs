//! Resolved structural model: nodes, elements, connections, loads.

use nalgebra::{Matrix3, Vector3, Vector6};

use crate::basis::JointStiffness;
use crate::boundary::{support_equations, SupportKind, SupportSpec};
use crate::elements::{
    flexible_link_equations, flexible_platform_equations, rigid_link_equations, rigid_platform_equations, LinkStiffness,
};
use crate::equations::EquationBlock;
use crate::error::{MsaError, Result};
use crate::joints::{joint_equations, JointSpec};
use crate::screw::{check_rotation, rotation6};

/// Joint nodes farther apart than this (relative to the model size) are
/// rejected, since joint rows assume coincident nodes.
pub const COINCIDENCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub name: String,
    pub position: Vector3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Element {
    Flexible(LinkStiffness),
    Rigid {
        i: usize,
        j: usize,
    },
    RigidPlatform {
        clamps: Vec<usize>,
        end: usize,
    },
    /// Virtual links, each from a clamp node to `end`.
    FlexiblePlatform {
        links: Vec<LinkStiffness>,
        end: usize,
    },
}

impl Element {
    pub fn nodes(&self) -> Vec<usize> {
        match self {
            Element::Flexible(l) => vec![l.nodes().0, l.nodes().1],
            Element::Rigid { i, j } => vec![*i, *j],
            Element::RigidPlatform { clamps, end } => clamps.iter().chain([end]).copied().collect(),
            Element::FlexiblePlatform { links, end } => links.iter().map(|l| l.nodes().0).chain([*end]).collect(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Element::Flexible(_) => "flexible link",
            Element::Rigid { .. } => "rigid link",
            Element::RigidPlatform { .. } => "rigid platform",
            Element::FlexiblePlatform { .. } => "flexible platform",
        }
    }
}

/// External wrench at `node`; `incident` lists the link nodes meeting there
/// (`node` itself included).
#[derive(Debug, Clone, PartialEq)]
pub struct Load {
    pub node: usize,
    pub incident: Vec<usize>,
    pub wrench: Vector6<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub nodes: Vec<Node>,
    pub elements: Vec<Element>,
    pub joints: Vec<JointSpec>,
    pub supports: Vec<SupportSpec>,
    pub loads: Vec<Load>,
    pub end_effector: usize,
}

impl Model {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn position(&self, node: usize) -> &Vector3<f64> {
        &self.nodes[node].position
    }

    pub fn node_name(&self, node: usize) -> &str {
        &self.nodes[node].name
    }

    /// Length scale used for coincidence checks.
    fn extent(&self) -> f64 {
        self.nodes.iter().fold(1.0f64, |m, n| m.max(n.position.amax()))
    }

    fn check_node(&self, node: usize) -> Result<()> {
        if node < self.nodes.len() {
            Ok(())
        } else {
            Err(MsaError::UnknownNode(node))
        }
    }

    /// Structural validation independent of solvability.
    pub fn validate(&self) -> Result<()> {
        let mut names: Vec<&str> = self.nodes.iter().map(|n| n.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(MsaError::InvalidInput(format!("node id '{}' declared twice", w[0])));
        }
        for node in &self.nodes {
            if node.position.iter().any(|x| !x.is_finite()) {
                return Err(MsaError::InvalidInput(format!(
                    "node '{}' has a non-finite position",
                    node.name
                )));
            }
        }
        for e in &self.elements {
            e.nodes().into_iter().try_for_each(|n| self.check_node(n))?;
        }
        let tol = COINCIDENCE_TOL * self.extent();
        for j in &self.joints {
            let all = j.all_nodes();
            all.iter().try_for_each(|&n| self.check_node(n))?;
            for &n in &all[1..] {
                if (self.position(n) - self.position(all[0])).norm() > tol {
                    return Err(MsaError::InvalidInput(format!(
                        "joint nodes '{}' and '{}' are not coincident",
                        self.node_name(all[0]),
                        self.node_name(n)
                    )));
                }
            }
        }
        let mut supported = Vec::new();
        for s in &self.supports {
            self.check_node(s.node)?;
            if supported.contains(&s.node) {
                return Err(MsaError::DoubleSupport(self.node_name(s.node).to_string()));
            }
            supported.push(s.node);
        }
        self.check_node(self.end_effector)?;
        for load in &self.loads {
            self.check_node(load.node)?;
            for &n in &load.incident {
                self.check_node(n)?;
                if (self.position(n) - self.position(load.node)).norm() > tol {
                    return Err(MsaError::InvalidInput(format!(
                        "load incident node '{}' is not at loaded node '{}'",
                        self.node_name(n),
                        self.node_name(load.node)
                    )));
                }
                if supported.contains(&n) {
                    return Err(MsaError::LoadedSupport(self.node_name(n).to_string()));
                }
            }
            if load.wrench.iter().any(|x| !x.is_finite()) {
                return Err(MsaError::InvalidInput("non-finite load".into()));
            }
        }
        let mut loaded: Vec<usize> = self.loads.iter().map(|l| l.node).collect();
        loaded.sort_unstable();
        if let Some(w) = loaded.windows(2).find(|w| w[0] == w[1]) {
            return Err(MsaError::InvalidInput(format!(
                "node '{}' carries two loads",
                self.node_name(w[0])
            )));
        }
        if supported.contains(&self.end_effector) {
            return Err(MsaError::LoadedSupport(self.node_name(self.end_effector).to_string()));
        }
        Ok(())
    }

    pub fn element_equations(&self, element: &Element) -> Result<EquationBlock> {
        match element {
            Element::Flexible(link) => Ok(flexible_link_equations(link)),
            Element::Rigid { i, j } => rigid_link_equations(&(self.position(*j) - self.position(*i)), *i, *j),
            Element::RigidPlatform { clamps, end } => {
                let c: Vec<_> = clamps
                    .iter()
                    .map(|&k| (k, self.position(*end) - self.position(k)))
                    .collect();
                rigid_platform_equations(&c, *end)
            }
            Element::FlexiblePlatform { links, end } => flexible_platform_equations(links, *end),
        }
    }

    pub fn joint_equations(&self, joint: &JointSpec) -> Result<EquationBlock> {
        joint_equations(joint)
    }

    pub fn support_equations(&self, support: &SupportSpec) -> Result<EquationBlock> {
        support_equations(support)
    }

    pub fn load_for(&self, node: usize) -> Option<&Load> {
        self.loads.iter().find(|l| l.node == node)
    }

    /// The whole model seen in a frame rotated by `r`.
    pub fn rotated(&self, r: &Matrix3<f64>) -> Result<Model> {
        check_rotation(r)?;
        let q = rotation6(r);
        let rotate_stiffness = |k: &JointStiffness| JointStiffness::new(k.ke().clone(), k.preload().map(|w| q * w));
        let nodes = self
            .nodes
            .iter()
            .map(|n| Node {
                name: n.name.clone(),
                position: r * n.position,
            })
            .collect();
        let elements = self
            .elements
            .iter()
            .map(|e| {
                Ok(match e {
                    Element::Flexible(l) => Element::Flexible(l.rotated(r)?),
                    Element::FlexiblePlatform { links, end } => Element::FlexiblePlatform {
                        links: links.iter().map(|l| l.rotated(r)).collect::<Result<_>>()?,
                        end: *end,
                    },
                    other => other.clone(),
                })
            })
            .collect::<Result<_>>()?;
        let joints = self
            .joints
            .iter()
            .map(|j| {
                Ok(JointSpec {
                    basis: j.basis.as_ref().map(|b| b.rotated(r)).transpose()?,
                    stiffness: j.stiffness.as_ref().map(rotate_stiffness).transpose()?,
                    ..j.clone()
                })
            })
            .collect::<Result<_>>()?;
        let supports = self
            .supports
            .iter()
            .map(|s| {
                let kind = match &s.kind {
                    SupportKind::Rigid => SupportKind::Rigid,
                    SupportKind::Passive(b) => SupportKind::Passive(b.rotated(r)?),
                    SupportKind::Elastic(b, k) => SupportKind::Elastic(b.rotated(r)?, rotate_stiffness(k)?),
                };
                Ok(SupportSpec { node: s.node, kind })
            })
            .collect::<Result<_>>()?;
        let loads = self
            .loads
            .iter()
            .map(|l| Load {
                wrench: q * l.wrench,
                ..l.clone()
            })
            .collect();
        Ok(Model {
            nodes,
            elements,
            joints,
            supports,
            loads,
            end_effector: self.end_effector,
        })
    }
}
