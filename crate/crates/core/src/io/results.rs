//! Result files. Every number is written with 17 significant digits; values
//! that are not finite (the infinite-stiffness sentinel) are written as `null`.

use nalgebra::{Matrix6, Vector6};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::assembly::{CartesianStiffness, CheckReport, LoadedState};
use crate::model::Model;

/// A float serialized as `d.dddddddddddddddde±x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(format_number(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

/// 17 significant digits in scientific notation.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn vector(v: &Vector6<f64>) -> Vec<Num> {
    v.iter().map(|&x| Num(x)).collect()
}

pub fn matrix(m: &Matrix6<f64>) -> Vec<Vec<Num>> {
    m.row_iter().map(|r| r.iter().map(|&x| Num(x)).collect()).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsDoc {
    pub a_size: usize,
    pub a_rank: usize,
    pub pseudo_inverse: bool,
    pub condition_estimate: Num,
    pub kc_rank: usize,
    pub mechanism_directions: Vec<Vec<Num>>,
    pub rigid_directions: Vec<Vec<Num>>,
    pub infinite_stiffness: bool,
    pub asymmetry: Num,
    pub load_offset: Vec<Num>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StiffnessDoc {
    pub kc: Vec<Vec<Num>>,
    pub compliance: Vec<Vec<Num>>,
    pub diagnostics: DiagnosticsDoc,
}

impl From<&CartesianStiffness> for StiffnessDoc {
    fn from(s: &CartesianStiffness) -> Self {
        let d = &s.diagnostics;
        StiffnessDoc {
            kc: matrix(&s.kc),
            compliance: matrix(&s.compliance),
            diagnostics: DiagnosticsDoc {
                a_size: d.a_size,
                a_rank: d.a_rank,
                pseudo_inverse: d.pseudo_inverse,
                condition_estimate: Num(d.condition_estimate),
                kc_rank: d.kc_rank,
                mechanism_directions: d.mechanism_directions.iter().map(vector).collect(),
                rigid_directions: d.rigid_directions.iter().map(vector).collect(),
                infinite_stiffness: d.infinite_stiffness,
                asymmetry: Num(d.asymmetry),
                load_offset: vector(&d.load_offset),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeStateDoc {
    pub id: String,
    pub wrench: Vec<Num>,
    pub deflection: Vec<Num>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReactionDoc {
    pub node: String,
    pub wrench: Vec<Num>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LoadedDoc {
    pub load: Vec<Num>,
    pub end_deflection: Vec<Num>,
    pub residual: Num,
    /// Norm of the resultant of reactions and loads about the origin.
    pub equilibrium_error: Num,
    pub reactions: Vec<ReactionDoc>,
    pub nodes: Vec<NodeStateDoc>,
}

impl LoadedDoc {
    pub fn new(model: &Model, load: &Vector6<f64>, state: &LoadedState) -> Self {
        let name = |k: usize| model.node_name(k).to_string();
        LoadedDoc {
            load: vector(load),
            end_deflection: vector(&state.end_deflection),
            residual: Num(state.residual),
            equilibrium_error: Num(state.equilibrium_error(model).0),
            reactions: state
                .reactions(model)
                .into_iter()
                .map(|(n, w)| ReactionDoc {
                    node: name(n),
                    wrench: vector(&w.to_vector()),
                })
                .collect(),
            nodes: (0..model.node_count())
                .map(|k| NodeStateDoc {
                    id: name(k),
                    wrench: vector(&state.wrenches[k]),
                    deflection: vector(&state.deflections[k]),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisDoc {
    pub end_effector: String,
    pub summary: String,
    pub stiffness: StiffnessDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loaded: Option<LoadedDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckReport>,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("result documents always serialize")
}
