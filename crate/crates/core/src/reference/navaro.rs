//! The NaVaRo planar parallel robot: three parallelogram legs carrying a
//! platform through passive revolute joints.
//!
//! Leg nodes: links (1,2), (3,4), (5,6), (7,8) form the parallelogram
//! O-A-B-C; link (9,e) extends side B-C beyond C and is welded to it. Joints
//! <2,3> at A and <4,5> at B are passive revolutes; at C the joint <6,7> is a
//! passive revolute with node 9 rigidly attached to node 6. Node 8 is pinned
//! to the base at O and node 1 is driven by the motor at O, modelled as an
//! elastic revolute support.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::elements::BeamSection;
use crate::error::{MsaError, Result};
use crate::io::document::{
    BasisDoc, ClampDoc, ElementDoc, JointDoc, JointKindDoc, LoadDoc, ModelDocument, NodeDoc, SectionDoc, SupportDoc,
    SupportKindDoc,
};
use crate::model::Model;

/// Geometry and material of the robot. The defaults describe a generic steel
/// tube layout, not a particular prototype.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NavaroParams {
    /// |OA| = |BC|, the motor-driven side.
    pub first_link_length: f64,
    /// |OC| = |AB|.
    pub second_link_length: f64,
    /// Extension of side BC beyond C to the leg end.
    pub extension_length: f64,
    /// Direction of OA in the leg frame.
    pub first_link_angle_deg: f64,
    /// Direction of OC in the leg frame.
    pub second_link_angle_deg: f64,
    pub youngs_modulus: f64,
    pub shear_modulus: f64,
    pub tube_outer_diameter: f64,
    pub tube_wall: f64,
    /// Motor stiffness about the joint axis [N·m/rad].
    pub motor_stiffness: f64,
    /// Distance from the platform centre to each leg attachment.
    pub platform_radius: f64,
    /// Number of legs attached to the platform (1 to 3).
    pub legs: usize,
    /// When set, the platform is made of virtual tube links whose Young's and
    /// shear moduli are scaled by this factor; otherwise it is rigid.
    pub platform_stiffness_scale: Option<f64>,
}

impl Default for NavaroParams {
    fn default() -> Self {
        NavaroParams {
            first_link_length: 0.4,
            second_link_length: 0.4,
            extension_length: 0.2,
            first_link_angle_deg: 100.0,
            second_link_angle_deg: 20.0,
            youngs_modulus: 210e9,
            shear_modulus: 210e9 / 2.6,
            tube_outer_diameter: 0.04,
            tube_wall: 0.004,
            motor_stiffness: 1e4,
            platform_radius: 0.1,
            legs: 3,
            platform_stiffness_scale: None,
        }
    }
}

impl NavaroParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("first_link_length", self.first_link_length),
            ("second_link_length", self.second_link_length),
            ("extension_length", self.extension_length),
            ("youngs_modulus", self.youngs_modulus),
            ("shear_modulus", self.shear_modulus),
            ("tube_outer_diameter", self.tube_outer_diameter),
            ("tube_wall", self.tube_wall),
            ("motor_stiffness", self.motor_stiffness),
            ("platform_radius", self.platform_radius),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(MsaError::field(name, format!("must be positive and finite, got {v}")));
            }
        }
        if 2.0 * self.tube_wall > self.tube_outer_diameter {
            return Err(MsaError::field("tube_wall", "wall thicker than the tube radius"));
        }
        if !(self.first_link_angle_deg.is_finite() && self.second_link_angle_deg.is_finite()) {
            return Err(MsaError::field("first_link_angle_deg", "angles must be finite"));
        }
        let spread = (self.first_link_angle_deg - self.second_link_angle_deg)
            .to_radians()
            .sin();
        if spread.abs() < 1e-6 {
            return Err(MsaError::field(
                "second_link_angle_deg",
                "parallelogram sides are collinear (singular leg configuration)",
            ));
        }
        if !(1..=3).contains(&self.legs) {
            return Err(MsaError::field("legs", format!("must be 1, 2 or 3, got {}", self.legs)));
        }
        if let Some(s) = self.platform_stiffness_scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(MsaError::field(
                    "platform_stiffness_scale",
                    "must be positive and finite",
                ));
            }
        }
        Ok(())
    }

    fn section(&self, scale: f64) -> SectionDoc {
        let s = BeamSection::circular_tube(
            self.youngs_modulus * scale,
            self.shear_modulus * scale,
            self.tube_outer_diameter,
            self.tube_wall,
            1.0,
            Vector3::x(),
        );
        SectionDoc {
            e: s.e,
            g: s.g,
            area: s.area,
            iy: s.iy,
            iz: s.iz,
            j: s.j,
            up: None,
        }
    }

    /// Leg node positions in the leg frame (base pivot O at the origin).
    pub fn leg_points(&self) -> LegPoints {
        let dir = |deg: f64| {
            let a = deg.to_radians();
            Vector3::new(a.cos(), a.sin(), 0.0)
        };
        let u1 = dir(self.first_link_angle_deg);
        let u2 = dir(self.second_link_angle_deg);
        let o = Vector3::zeros();
        let a = o + self.first_link_length * u1;
        let c = o + self.second_link_length * u2;
        let b = a + c - o;
        let end = c - self.extension_length * u1;
        LegPoints { o, a, b, c, end }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegPoints {
    pub o: Vector3<f64>,
    pub a: Vector3<f64>,
    pub b: Vector3<f64>,
    pub c: Vector3<f64>,
    pub end: Vector3<f64>,
}

/// Leg node labels in build order.
pub const LEG_NODES: [&str; 10] = ["1", "2", "3", "4", "5", "6", "7", "8", "9", "e"];

fn revolute_z() -> Option<BasisDoc> {
    Some(BasisDoc::Preset("revolute_z".into()))
}

fn passive(nodes: [String; 2], rigid_with: Vec<String>) -> JointDoc {
    JointDoc {
        kind: JointKindDoc::Passive,
        nodes: nodes.to_vec(),
        rigid_with,
        basis: revolute_z(),
        stiffness: None,
        preload: None,
        actuation: None,
    }
}

struct Parts {
    nodes: Vec<NodeDoc>,
    elements: Vec<ElementDoc>,
    joints: Vec<JointDoc>,
    supports: Vec<SupportDoc>,
}

/// One leg; `place` maps leg-frame points to global coordinates and `name`
/// maps leg labels to node ids.
fn leg_parts(p: &NavaroParams, place: impl Fn(&Vector3<f64>) -> Vector3<f64>, name: impl Fn(&str) -> String) -> Parts {
    let pts = p.leg_points();
    let at = [pts.o, pts.a, pts.a, pts.b, pts.b, pts.c, pts.c, pts.o, pts.c, pts.end];
    let nodes = LEG_NODES
        .iter()
        .zip(at.iter())
        .map(|(n, x)| NodeDoc {
            id: name(n),
            position: place(x).into(),
        })
        .collect();
    let section = p.section(1.0);
    let beam = |i: &str, j: &str| ElementDoc::Beam {
        nodes: [name(i), name(j)],
        section: section.clone(),
    };
    let elements = vec![
        beam("1", "2"),
        beam("3", "4"),
        beam("5", "6"),
        beam("7", "8"),
        beam("9", "e"),
    ];
    let joint = |i: &str, j: &str, welded: Vec<String>| passive([name(i), name(j)], welded);
    let joints = vec![
        joint("2", "3", vec![]),
        joint("4", "5", vec![]),
        joint("6", "7", vec![name("9")]),
    ];
    let supports = vec![
        SupportDoc {
            node: name("8"),
            kind: SupportKindDoc::Passive,
            basis: revolute_z(),
            stiffness: None,
            preload: None,
        },
        SupportDoc {
            node: name("1"),
            kind: SupportKindDoc::Elastic,
            basis: revolute_z(),
            stiffness: Some(vec![vec![p.motor_stiffness]]),
            preload: None,
        },
    ];
    Parts {
        nodes,
        elements,
        joints,
        supports,
    }
}

/// A single leg loaded at its end node `e`, in the leg frame.
pub fn navaro_leg_document(p: &NavaroParams) -> Result<ModelDocument> {
    p.validate()?;
    let parts = leg_parts(p, |x| *x, |n| n.to_string());
    Ok(ModelDocument {
        nodes: parts.nodes,
        elements: parts.elements,
        joints: parts.joints,
        supports: parts.supports,
        loads: vec![LoadDoc {
            node: "e".into(),
            incident: Vec::new(),
            wrench: [0.0; 6],
        }],
        end_effector: "e".into(),
    })
}

/// Orientation of leg `k` about the platform centre.
pub fn leg_rotation(k: usize) -> Matrix3<f64> {
    let angle = PI / 2.0 + 2.0 * PI * k as f64 / 3.0;
    *Rotation3::from_axis_angle(&Vector3::z_axis(), angle).matrix()
}

/// The robot with `p.legs` legs, platform centre `C` at the origin. Leg `k`
/// nodes are named `L{k}.{label}` (k from 1) and attach at platform node `P{k}`.
pub fn navaro_document(p: &NavaroParams) -> Result<ModelDocument> {
    p.validate()?;
    let pts = p.leg_points();
    // the leg end lies between the platform centre and the base pivot
    let outward = (pts.o - pts.end).normalize();
    let mut doc = ModelDocument {
        nodes: Vec::new(),
        elements: Vec::new(),
        joints: Vec::new(),
        supports: Vec::new(),
        loads: Vec::new(),
        end_effector: "C".into(),
    };
    let mut clamps = Vec::new();
    for k in 0..p.legs {
        let r = leg_rotation(k);
        let shift = p.platform_radius * outward - pts.end;
        let prefix = format!("L{}", k + 1);
        let parts = leg_parts(p, |x| r * (x + shift), |n| format!("{prefix}.{n}"));
        doc.nodes.extend(parts.nodes);
        doc.elements.extend(parts.elements);
        doc.joints.extend(parts.joints);
        doc.supports.extend(parts.supports);
        let clamp = format!("P{}", k + 1);
        doc.nodes.push(NodeDoc {
            id: clamp.clone(),
            position: (r * (p.platform_radius * outward)).into(),
        });
        doc.joints
            .push(passive([format!("{prefix}.e"), clamp.clone()], Vec::new()));
        clamps.push(clamp);
    }
    doc.nodes.push(NodeDoc {
        id: "C".into(),
        position: [0.0; 3],
    });
    doc.elements.push(match p.platform_stiffness_scale {
        None => ElementDoc::RigidPlatform {
            clamps,
            end: "C".into(),
        },
        Some(scale) => ElementDoc::FlexiblePlatform {
            clamps: clamps
                .into_iter()
                .map(|node| ClampDoc {
                    node,
                    section: Some(p.section(scale)),
                    stiffness: None,
                })
                .collect(),
            end: "C".into(),
        },
    });
    doc.loads.push(LoadDoc {
        node: "C".into(),
        incident: Vec::new(),
        wrench: [0.0; 6],
    });
    Ok(doc)
}

pub fn build_navaro_leg(p: &NavaroParams) -> Result<Model> {
    navaro_leg_document(p)?.to_model()
}

pub fn build_navaro(p: &NavaroParams) -> Result<Model> {
    navaro_document(p)?.to_model()
}
