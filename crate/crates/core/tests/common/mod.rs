//! Model builders shared by the integration and acceptance tests.
#![allow(dead_code)]

use nalgebra::{Matrix3, Matrix6, Rotation3, Unit, Vector3, Vector6};
use rand::rngs::StdRng;
use rand::Rng;

use msa_stiffness::basis::{JointBasis, JointStiffness};
use msa_stiffness::boundary::{SupportKind, SupportSpec};
use msa_stiffness::elements::{beam_stiffness, BeamSection};
use msa_stiffness::joints::JointSpec;
use msa_stiffness::model::{Element, Load, Model, Node};

pub const STEEL_E: f64 = 210e9;
pub const STEEL_G: f64 = 80e9;

/// Incremental model construction.
pub struct Builder {
    pub model: Model,
}

impl Builder {
    pub fn new() -> Self {
        Builder {
            model: Model {
                nodes: Vec::new(),
                elements: Vec::new(),
                joints: Vec::new(),
                supports: Vec::new(),
                loads: Vec::new(),
                end_effector: 0,
            },
        }
    }

    pub fn node(&mut self, name: &str, position: Vector3<f64>) -> usize {
        self.model.nodes.push(Node {
            name: name.to_string(),
            position,
        });
        self.model.nodes.len() - 1
    }

    pub fn pos(&self, k: usize) -> Vector3<f64> {
        self.model.nodes[k].position
    }

    pub fn beam_section(&mut self, i: usize, j: usize, mut section: BeamSection) -> &mut Self {
        let d = self.pos(j) - self.pos(i);
        section.length = d.norm();
        section.axis = d / d.norm();
        self.model
            .elements
            .push(Element::Flexible(beam_stiffness(&section, i, j).unwrap()));
        self
    }

    /// Steel tube, 30 mm outer diameter, 3 mm wall.
    pub fn tube(&mut self, i: usize, j: usize) -> &mut Self {
        self.beam_section(i, j, tube(1.0))
    }

    pub fn rigid_link(&mut self, i: usize, j: usize) -> &mut Self {
        self.model.elements.push(Element::Rigid { i, j });
        self
    }

    pub fn element(&mut self, e: Element) -> &mut Self {
        self.model.elements.push(e);
        self
    }

    pub fn joint(&mut self, j: JointSpec) -> &mut Self {
        self.model.joints.push(j);
        self
    }

    pub fn support(&mut self, node: usize, kind: SupportKind) -> &mut Self {
        self.model.supports.push(SupportSpec { node, kind });
        self
    }

    pub fn clamp(&mut self, node: usize) -> &mut Self {
        self.support(node, SupportKind::Rigid)
    }

    /// Declares `node` as the loaded end effector.
    pub fn end(&mut self, node: usize) -> &mut Self {
        self.model.loads.push(Load {
            node,
            incident: vec![node],
            wrench: Vector6::zeros(),
        });
        self.model.end_effector = node;
        self
    }

    pub fn build(&self) -> Model {
        self.model.clone()
    }
}

pub fn tube(scale: f64) -> BeamSection {
    BeamSection::circular_tube(STEEL_E * scale, STEEL_G * scale, 0.03, 0.003, 1.0, Vector3::x())
}

/// Beam from the origin along +x, clamped at the base, loaded at the tip.
pub fn cantilever(length: f64, section: BeamSection) -> Model {
    let mut b = Builder::new();
    let base = b.node("base", Vector3::zeros());
    let tip = b.node("tip", Vector3::new(length, 0.0, 0.0));
    b.beam_section(base, tip, section).clamp(base).end(tip);
    b.build()
}

pub fn random_rotation(rng: &mut StdRng) -> Matrix3<f64> {
    let axis = Unit::new_normalize(Vector3::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0) + 1e-3,
    ));
    *Rotation3::from_axis_angle(&axis, rng.gen_range(-3.1..3.1)).matrix()
}

/// Serial chain of `links` random beams joined by rigid joints, clamped at
/// node "0" and loaded at the last node, then rotated by a random rotation.
pub fn random_chain(rng: &mut StdRng, links: usize) -> Model {
    let mut b = Builder::new();
    let mut at = Vector3::zeros();
    let mut prev: Option<usize> = None;
    for k in 0..links {
        let dir = Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let next = at + dir.normalize() * rng.gen_range(0.2..1.0);
        let i = b.node(&format!("{}", 2 * k), at);
        let j = b.node(&format!("{}", 2 * k + 1), next);
        let outer = rng.gen_range(0.01..0.05);
        let section = BeamSection::circular_tube(
            rng.gen_range(70e9..210e9),
            rng.gen_range(26e9..80e9),
            outer,
            outer * rng.gen_range(0.05..0.5),
            1.0,
            Vector3::x(),
        );
        b.beam_section(i, j, section);
        if let Some(p) = prev {
            b.joint(JointSpec::rigid(vec![p, i]));
        }
        prev = Some(j);
        at = next;
    }
    b.clamp(0).end(2 * links - 1);
    let r = random_rotation(rng);
    b.build().rotated(&r).unwrap()
}

/// Two beams meeting at a corner joint of the given kind; clamped base, end
/// at the far tip.
pub fn two_beam_chain(joint: impl FnOnce(usize, usize) -> JointSpec) -> Model {
    let mut b = Builder::new();
    let n0 = b.node("0", Vector3::zeros());
    let n1 = b.node("1", Vector3::new(0.5, 0.0, 0.0));
    let n2 = b.node("2", Vector3::new(0.5, 0.0, 0.0));
    let n3 = b.node("3", Vector3::new(0.5, 0.4, 0.1));
    b.tube(n0, n1).tube(n2, n3).joint(joint(n1, n2)).clamp(n0).end(n3);
    b.build()
}

/// Beam from a base support of the given kind to a loaded tip.
pub fn supported_beam(kind: SupportKind) -> Model {
    let mut b = Builder::new();
    let base = b.node("base", Vector3::zeros());
    let tip = b.node("tip", Vector3::new(0.6, 0.2, 0.0));
    b.tube(base, tip).support(base, kind).end(tip);
    b.build()
}

/// Rigid platform fixed to ground, a preloaded fully elastic joint to a
/// grounded rigid link, and a beam carried by the platform. Preload `w0` is
/// balanced by the two grounds, so the beam tip does not move.
pub fn preloaded_frame(w0: Vector6<f64>) -> Model {
    let mut b = Builder::new();
    let p1 = b.node("p1", Vector3::new(0.0, 0.0, 0.0));
    let p2 = b.node("p2", Vector3::new(0.3, 0.0, 0.0));
    let pc = b.node("pc", Vector3::new(0.15, 0.1, 0.0));
    let a = b.node("a", Vector3::new(0.3, 0.0, 0.0));
    let g = b.node("g", Vector3::new(0.3, -0.2, 0.0));
    let s = b.node("s", Vector3::new(0.15, 0.1, 0.0));
    let tip = b.node("tip", Vector3::new(0.15, 0.6, 0.0));
    let ke = Matrix6::from_diagonal(&Vector6::new(1e7, 2e7, 3e7, 1e4, 2e4, 3e4));
    let stiffness = JointStiffness::new(nalgebra::DMatrix::from_fn(6, 6, |r, c| ke[(r, c)]), None)
        .unwrap()
        .with_preload(w0)
        .unwrap();
    b.element(Element::RigidPlatform {
        clamps: vec![p1, p2],
        end: pc,
    })
    .clamp(p1)
    .joint(JointSpec::elastic(JointBasis::free(), stiffness, p2, a))
    .rigid_link(a, g)
    .clamp(g)
    .joint(JointSpec::rigid(vec![pc, s]))
    .tube(s, tip)
    .end(tip);
    b.build()
}

pub fn rel_diff(a: &Matrix6<f64>, b: &Matrix6<f64>) -> f64 {
    (a - b).norm() / a.norm().max(b.norm())
}

pub fn asymmetry(k: &Matrix6<f64>) -> f64 {
    (k - k.transpose()).norm() / k.norm()
}

/// blockdiag(R, R).
pub fn q6(r: &Matrix3<f64>) -> Matrix6<f64> {
    msa_stiffness::screw::rotation6(r)
}
