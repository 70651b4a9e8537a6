//! Declarative JSON model files.
//!
//! Node ids are strings; positions are in metres and all other quantities in
//! SI units. Beam length and axis, and rigid-link and platform offsets, are
//! taken from node coordinates.

use nalgebra::{DMatrix, Matrix3, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::basis::{make_joint_basis, JointBasis, JointStiffness};
use crate::boundary::{SupportKind, SupportSpec};
use crate::elements::{beam_stiffness, BeamSection, LinkStiffness};
use crate::error::{MsaError, Result};
use crate::joints::{Actuation, JointKind, JointSpec};
use crate::model::{Element, Load, Model, Node};
use crate::screw::Matrix12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: String,
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionDoc {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "A")]
    pub area: f64,
    #[serde(rename = "Iy")]
    pub iy: f64,
    #[serde(rename = "Iz")]
    pub iz: f64,
    #[serde(rename = "J")]
    pub j: f64,
    /// Hint for the local z axis; global z when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub up: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElementDoc {
    Beam {
        nodes: [String; 2],
        section: SectionDoc,
    },
    /// Explicit 12x12 matrix, optionally given in a local frame whose axes are
    /// the columns of `rotation`.
    Matrix {
        nodes: [String; 2],
        stiffness: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rotation: Option<Vec<Vec<f64>>>,
    },
    Rigid {
        nodes: [String; 2],
    },
    RigidPlatform {
        clamps: Vec<String>,
        end: String,
    },
    /// Virtual flexible links from each clamp to `end`.
    FlexiblePlatform {
        clamps: Vec<ClampDoc>,
        end: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClampDoc {
    pub node: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section: Option<SectionDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stiffness: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BasisDoc {
    Preset(String),
    Explicit { rigid: Vec<[f64; 6]>, free: Vec<[f64; 6]> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointKindDoc {
    Rigid,
    Passive,
    Elastic,
    Actuated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActuationDoc {
    Rigid,
    Elastic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDoc {
    pub kind: JointKindDoc,
    pub nodes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rigid_with: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stiffness: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preload: Option<[f64; 6]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actuation: Option<ActuationDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportKindDoc {
    Rigid,
    Passive,
    Elastic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportDoc {
    pub node: String,
    pub kind: SupportKindDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stiffness: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preload: Option<[f64; 6]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadDoc {
    pub node: String,
    /// Link nodes meeting at the loaded point; just `node` when absent.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub incident: Vec<String>,
    #[serde(default)]
    pub wrench: [f64; 6],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub nodes: Vec<NodeDoc>,
    #[serde(default)]
    pub elements: Vec<ElementDoc>,
    #[serde(default)]
    pub joints: Vec<JointDoc>,
    #[serde(default)]
    pub supports: Vec<SupportDoc>,
    #[serde(default)]
    pub loads: Vec<LoadDoc>,
    pub end_effector: String,
}

/// Parses and validates a model document.
pub fn parse_model(text: &str) -> Result<ModelDocument> {
    let doc: ModelDocument = serde_json::from_str(text).map_err(|e| MsaError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    doc.to_model()?;
    Ok(doc)
}

/// Parses a document and resolves it into a model.
pub fn load_model(text: &str) -> Result<Model> {
    parse_model(text)?.to_model()
}

fn at<T>(path: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        MsaError::Field { .. } => e,
        other => MsaError::field(path, other.to_string()),
    })
}

fn matrix(path: &str, rows: &[Vec<f64>], nr: usize, nc: usize) -> Result<DMatrix<f64>> {
    if rows.len() != nr || rows.iter().any(|r| r.len() != nc) {
        let shape = rows.iter().map(|r| r.len().to_string()).collect::<Vec<_>>().join(",");
        return Err(MsaError::field(
            path,
            format!(
                "expected a {nr}x{nc} matrix, got {} rows with lengths [{shape}]",
                rows.len()
            ),
        ));
    }
    let m = DMatrix::from_fn(nr, nc, |i, j| rows[i][j]);
    if m.iter().any(|x| !x.is_finite()) {
        return Err(MsaError::field(path, "non-finite entry"));
    }
    Ok(m)
}

fn square_matrix(path: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    matrix(path, rows, rows.len(), rows.len())
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix12_rows(m: &Matrix12) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

struct Resolver<'a> {
    ids: std::collections::HashMap<&'a str, usize>,
    positions: Vec<Vector3<f64>>,
}

impl Resolver<'_> {
    fn node(&self, path: &str, id: &str) -> Result<usize> {
        self.ids
            .get(id)
            .copied()
            .ok_or_else(|| MsaError::field(path, format!("unknown node id '{id}'")))
    }

    fn nodes(&self, path: &str, ids: &[String]) -> Result<Vec<usize>> {
        ids.iter()
            .enumerate()
            .map(|(k, id)| self.node(&format!("{path}[{k}]"), id))
            .collect()
    }

    fn beam(&self, path: &str, s: &SectionDoc, i: usize, j: usize) -> Result<LinkStiffness> {
        let d = self.positions[j] - self.positions[i];
        let length = d.norm();
        if length <= 0.0 {
            return Err(MsaError::field(path, "beam nodes coincide (zero length)"));
        }
        let section = BeamSection {
            e: s.e,
            g: s.g,
            area: s.area,
            iy: s.iy,
            iz: s.iz,
            j: s.j,
            length,
            axis: d / length,
            up: s.up.map(Vector3::from),
        };
        at(path, beam_stiffness(&section, i, j))
    }

    fn explicit_link(
        &self,
        path: &str,
        k: &[Vec<f64>],
        rotation: Option<&Vec<Vec<f64>>>,
        i: usize,
        j: usize,
    ) -> Result<LinkStiffness> {
        let m = matrix(&format!("{path}.stiffness"), k, 12, 12)?;
        let k = Matrix12::from_fn(|r, c| m[(r, c)]);
        let link = at(&format!("{path}.stiffness"), LinkStiffness::new(k, i, j))?;
        match rotation {
            None => Ok(link),
            Some(rows) => {
                let rp = format!("{path}.rotation");
                let r = matrix(&rp, rows, 3, 3)?;
                let r = Matrix3::from_fn(|a, b| r[(a, b)]);
                at(&rp, link.rotated(&r))
            }
        }
    }
}

fn basis(path: &str, doc: Option<&BasisDoc>) -> Result<JointBasis> {
    match doc {
        None => Err(MsaError::field(path, "basis is required")),
        Some(BasisDoc::Preset(name)) => at(path, JointBasis::preset(name)),
        Some(BasisDoc::Explicit { rigid, free }) => at(
            path,
            make_joint_basis(
                rigid.iter().map(|v| Vector6::from(*v)).collect(),
                free.iter().map(|v| Vector6::from(*v)).collect(),
            ),
        ),
    }
}

fn stiffness(path: &str, k: Option<&Vec<Vec<f64>>>, preload: Option<&[f64; 6]>) -> Result<JointStiffness> {
    let sp = format!("{path}.stiffness");
    let k = k.ok_or_else(|| MsaError::field(&sp, "stiffness is required"))?;
    let m = square_matrix(&sp, k)?;
    let s = at(&sp, JointStiffness::new(m, None))?;
    match preload {
        None => Ok(s),
        Some(w) => at(&format!("{path}.preload"), s.with_preload(Vector6::from(*w))),
    }
}

fn basis_doc(b: &JointBasis) -> BasisDoc {
    BasisDoc::Explicit {
        rigid: b.u_rigid().iter().map(|v| (*v).into()).collect(),
        free: b.u_free().iter().map(|v| (*v).into()).collect(),
    }
}

impl ModelDocument {
    /// Resolves ids, builds element matrices and validates the model.
    pub fn to_model(&self) -> Result<Model> {
        let mut ids = std::collections::HashMap::new();
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (k, n) in self.nodes.iter().enumerate() {
            if ids.insert(n.id.as_str(), k).is_some() {
                return Err(MsaError::field(
                    format!("nodes[{k}].id"),
                    format!("duplicate node id '{}'", n.id),
                ));
            }
            if n.position.iter().any(|x| !x.is_finite()) {
                return Err(MsaError::field(format!("nodes[{k}].position"), "non-finite coordinate"));
            }
            nodes.push(Node {
                name: n.id.clone(),
                position: Vector3::from(n.position),
            });
        }
        let res = Resolver {
            ids,
            positions: nodes.iter().map(|n| n.position).collect(),
        };

        let mut elements = Vec::new();
        for (k, el) in self.elements.iter().enumerate() {
            let path = format!("elements[{k}]");
            let pair = |ids: &[String; 2]| -> Result<(usize, usize)> {
                let v = res.nodes(&format!("{path}.nodes"), ids)?;
                if v[0] == v[1] {
                    return Err(MsaError::field(
                        format!("{path}.nodes"),
                        "link connects a node to itself",
                    ));
                }
                Ok((v[0], v[1]))
            };
            elements.push(match el {
                ElementDoc::Beam { nodes, section } => {
                    let (i, j) = pair(nodes)?;
                    Element::Flexible(res.beam(&format!("{path}.section"), section, i, j)?)
                }
                ElementDoc::Matrix {
                    nodes,
                    stiffness,
                    rotation,
                } => {
                    let (i, j) = pair(nodes)?;
                    Element::Flexible(res.explicit_link(&path, stiffness, rotation.as_ref(), i, j)?)
                }
                ElementDoc::Rigid { nodes } => {
                    let (i, j) = pair(nodes)?;
                    Element::Rigid { i, j }
                }
                ElementDoc::RigidPlatform { clamps, end } => Element::RigidPlatform {
                    clamps: res.nodes(&format!("{path}.clamps"), clamps)?,
                    end: res.node(&format!("{path}.end"), end)?,
                },
                ElementDoc::FlexiblePlatform { clamps, end } => {
                    let end = res.node(&format!("{path}.end"), end)?;
                    let mut links = Vec::new();
                    for (c, clamp) in clamps.iter().enumerate() {
                        let cp = format!("{path}.clamps[{c}]");
                        let node = res.node(&format!("{cp}.node"), &clamp.node)?;
                        links.push(match (&clamp.section, &clamp.stiffness) {
                            (Some(s), None) => res.beam(&format!("{cp}.section"), s, node, end)?,
                            (None, Some(k)) => res.explicit_link(&cp, k, None, node, end)?,
                            _ => return Err(MsaError::field(cp, "give exactly one of 'section' or 'stiffness'")),
                        });
                    }
                    Element::FlexiblePlatform { links, end }
                }
            });
        }

        let mut joints = Vec::new();
        for (k, j) in self.joints.iter().enumerate() {
            let path = format!("joints[{k}]");
            let nodes = res.nodes(&format!("{path}.nodes"), &j.nodes)?;
            let rigid_with = res.nodes(&format!("{path}.rigid_with"), &j.rigid_with)?;
            let kind = match (j.kind, j.actuation) {
                (JointKindDoc::Rigid, None) => JointKind::Rigid,
                (JointKindDoc::Passive, None) => JointKind::Passive,
                (JointKindDoc::Elastic, None) => JointKind::Elastic,
                (JointKindDoc::Actuated, Some(ActuationDoc::Rigid)) => JointKind::Actuated(Actuation::AsRigid),
                (JointKindDoc::Actuated, Some(ActuationDoc::Elastic)) => JointKind::Actuated(Actuation::AsElastic),
                (JointKindDoc::Actuated, None) => {
                    return Err(MsaError::field(
                        format!("{path}.actuation"),
                        "actuated joints need 'rigid' or 'elastic'",
                    ))
                }
                (_, Some(_)) => {
                    return Err(MsaError::field(
                        format!("{path}.actuation"),
                        "only actuated joints take an actuation",
                    ))
                }
            };
            let needs_basis = !matches!(kind, JointKind::Rigid | JointKind::Actuated(Actuation::AsRigid));
            let needs_stiffness = matches!(kind, JointKind::Elastic | JointKind::Actuated(Actuation::AsElastic));
            let spec = JointSpec {
                kind,
                nodes,
                rigid_with,
                basis: if needs_basis {
                    Some(basis(&format!("{path}.basis"), j.basis.as_ref())?)
                } else {
                    None
                },
                stiffness: if needs_stiffness {
                    Some(stiffness(&path, j.stiffness.as_ref(), j.preload.as_ref())?)
                } else {
                    None
                },
            };
            // surface emitter errors (pair count, dimensions) with the field path
            at(&path, crate::joints::joint_equations(&spec))?;
            joints.push(spec);
        }

        let mut supports = Vec::new();
        for (k, s) in self.supports.iter().enumerate() {
            let path = format!("supports[{k}]");
            let node = res.node(&format!("{path}.node"), &s.node)?;
            let kind = match s.kind {
                SupportKindDoc::Rigid => SupportKind::Rigid,
                SupportKindDoc::Passive => SupportKind::Passive(basis(&format!("{path}.basis"), s.basis.as_ref())?),
                SupportKindDoc::Elastic => SupportKind::Elastic(
                    basis(&format!("{path}.basis"), s.basis.as_ref())?,
                    stiffness(&path, s.stiffness.as_ref(), s.preload.as_ref())?,
                ),
            };
            let spec = SupportSpec { node, kind };
            at(&path, crate::boundary::support_equations(&spec))?;
            supports.push(spec);
        }

        let mut loads = Vec::new();
        for (k, l) in self.loads.iter().enumerate() {
            let path = format!("loads[{k}]");
            let node = res.node(&format!("{path}.node"), &l.node)?;
            let incident = if l.incident.is_empty() {
                vec![node]
            } else {
                res.nodes(&format!("{path}.incident"), &l.incident)?
            };
            at(&path, crate::boundary::external_load_equations(&incident, node))?;
            loads.push(Load {
                node,
                incident,
                wrench: Vector6::from(l.wrench),
            });
        }

        let end_effector = res.node("end_effector", &self.end_effector)?;
        let model = Model {
            nodes,
            elements,
            joints,
            supports,
            loads,
            end_effector,
        };
        model.validate().map_err(|e| MsaError::field("model", e.to_string()))?;
        Ok(model)
    }

    /// Document describing `model` with explicit matrices and bases.
    pub fn from_model(model: &Model) -> ModelDocument {
        let id = |k: usize| model.node_name(k).to_string();
        let ids = |v: &[usize]| v.iter().map(|&k| id(k)).collect::<Vec<_>>();
        let stiffness_rows = |k: &JointStiffness| Some(to_rows(k.ke()));
        let preload = |k: &JointStiffness| k.preload().map(|w| (*w).into());
        let elements = model
            .elements
            .iter()
            .map(|e| match e {
                Element::Flexible(l) => ElementDoc::Matrix {
                    nodes: [id(l.nodes().0), id(l.nodes().1)],
                    stiffness: matrix12_rows(l.matrix()),
                    rotation: None,
                },
                Element::Rigid { i, j } => ElementDoc::Rigid {
                    nodes: [id(*i), id(*j)],
                },
                Element::RigidPlatform { clamps, end } => ElementDoc::RigidPlatform {
                    clamps: ids(clamps),
                    end: id(*end),
                },
                Element::FlexiblePlatform { links: l, end } => ElementDoc::FlexiblePlatform {
                    clamps: l
                        .iter()
                        .map(|l| ClampDoc {
                            node: id(l.nodes().0),
                            section: None,
                            stiffness: Some(matrix12_rows(l.matrix())),
                        })
                        .collect(),
                    end: id(*end),
                },
            })
            .collect();
        let joints = model
            .joints
            .iter()
            .map(|j| {
                let (kind, actuation) = match j.kind {
                    JointKind::Rigid => (JointKindDoc::Rigid, None),
                    JointKind::Passive => (JointKindDoc::Passive, None),
                    JointKind::Elastic => (JointKindDoc::Elastic, None),
                    JointKind::Actuated(Actuation::AsRigid) => (JointKindDoc::Actuated, Some(ActuationDoc::Rigid)),
                    JointKind::Actuated(Actuation::AsElastic) => (JointKindDoc::Actuated, Some(ActuationDoc::Elastic)),
                };
                JointDoc {
                    kind,
                    nodes: ids(&j.nodes),
                    rigid_with: ids(&j.rigid_with),
                    basis: j.basis.as_ref().map(basis_doc),
                    stiffness: j.stiffness.as_ref().and_then(stiffness_rows),
                    preload: j.stiffness.as_ref().and_then(preload),
                    actuation,
                }
            })
            .collect();
        let supports = model
            .supports
            .iter()
            .map(|s| {
                let (kind, b, k) = match &s.kind {
                    SupportKind::Rigid => (SupportKindDoc::Rigid, None, None),
                    SupportKind::Passive(b) => (SupportKindDoc::Passive, Some(b), None),
                    SupportKind::Elastic(b, k) => (SupportKindDoc::Elastic, Some(b), Some(k)),
                };
                SupportDoc {
                    node: id(s.node),
                    kind,
                    basis: b.map(basis_doc),
                    stiffness: k.and_then(stiffness_rows),
                    preload: k.and_then(preload),
                }
            })
            .collect();
        let loads = model
            .loads
            .iter()
            .map(|l| LoadDoc {
                node: id(l.node),
                incident: if l.incident == [l.node] {
                    Vec::new()
                } else {
                    ids(&l.incident)
                },
                wrench: l.wrench.into(),
            })
            .collect();
        ModelDocument {
            nodes: model
                .nodes
                .iter()
                .map(|n| NodeDoc {
                    id: n.name.clone(),
                    position: n.position.into(),
                })
                .collect(),
            elements,
            joints,
            supports,
            loads,
            end_effector: id(model.end_effector),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }
}
