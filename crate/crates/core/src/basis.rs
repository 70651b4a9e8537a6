//! Joint direction bases and joint stiffness data.

use nalgebra::{DMatrix, Matrix3, Vector6};

use crate::error::{MsaError, Result};
use crate::screw::{check_rotation, rotation6};

/// Orthonormality tolerance for joint direction sets.
pub const ORTHONORMAL_TOL: f64 = 1e-12;
/// Symmetry tolerance for elastic stiffness matrices.
pub const KE_SYMMETRY_TOL: f64 = 1e-12;

/// Names accepted by [`JointBasis::preset`].
pub const PRESET_NAMES: [&str; 8] = [
    "revolute_x",
    "revolute_y",
    "revolute_z",
    "prismatic_x",
    "prismatic_y",
    "prismatic_z",
    "spherical",
    "universal",
];

/// Orthonormal split of the six relative-motion directions of a joint into
/// `r` rigid directions and `p = 6 - r` free (or elastic) directions.
#[derive(Debug, Clone, PartialEq)]
pub struct JointBasis {
    u_rigid: Vec<Vector6<f64>>,
    u_free: Vec<Vector6<f64>>,
    rigid_rows: DMatrix<f64>,
    free_rows: DMatrix<f64>,
}

fn rows_of(vectors: &[Vector6<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(vectors.len(), 6, |i, j| vectors[i][j])
}

fn unit(k: usize) -> Vector6<f64> {
    let mut v = Vector6::zeros();
    v[k] = 1.0;
    v
}

/// Validates and packs a joint basis.
pub fn make_joint_basis(u_rigid: Vec<Vector6<f64>>, u_free: Vec<Vector6<f64>>) -> Result<JointBasis> {
    let total = u_rigid.len() + u_free.len();
    if total != 6 {
        return Err(MsaError::NotOrthonormal(format!(
            "expected 6 direction vectors, got {total}"
        )));
    }
    let all: Vec<Vector6<f64>> = u_rigid.iter().chain(&u_free).copied().collect();
    if all.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
        return Err(MsaError::NotOrthonormal("non-finite entry".into()));
    }
    let stacked = rows_of(&all);
    let gram = &stacked * stacked.transpose();
    let error = (gram - DMatrix::<f64>::identity(6, 6)).amax();
    if error > ORTHONORMAL_TOL {
        return Err(MsaError::NotOrthonormal(format!(
            "Gram matrix deviates from identity by {error:.3e}"
        )));
    }
    Ok(JointBasis {
        rigid_rows: rows_of(&u_rigid),
        free_rows: rows_of(&u_free),
        u_rigid,
        u_free,
    })
}

impl JointBasis {
    /// Basis whose free directions are the listed canonical axes (0..6) and
    /// whose rigid directions are the remaining axes in ascending order.
    pub fn from_free_axes(free: &[usize]) -> Result<Self> {
        if free.iter().any(|&k| k >= 6) {
            return Err(MsaError::InvalidInput("canonical axis index must be < 6".into()));
        }
        let u_free: Vec<_> = free.iter().map(|&k| unit(k)).collect();
        let u_rigid: Vec<_> = (0..6).filter(|k| !free.contains(k)).map(unit).collect();
        make_joint_basis(u_rigid, u_free)
    }

    pub fn revolute(axis: usize) -> Self {
        Self::from_free_axes(&[3 + axis]).expect("canonical basis")
    }

    pub fn prismatic(axis: usize) -> Self {
        Self::from_free_axes(&[axis]).expect("canonical basis")
    }

    pub fn spherical() -> Self {
        Self::from_free_axes(&[3, 4, 5]).expect("canonical basis")
    }

    /// Two free rotations, about x and y.
    pub fn universal() -> Self {
        Self::from_free_axes(&[3, 4]).expect("canonical basis")
    }

    /// All six directions rigid.
    pub fn rigid() -> Self {
        Self::from_free_axes(&[]).expect("canonical basis")
    }

    /// All six directions free (only meaningful for fully elastic connections).
    pub fn free() -> Self {
        Self::from_free_axes(&[0, 1, 2, 3, 4, 5]).expect("canonical basis")
    }

    pub fn preset(name: &str) -> Result<Self> {
        Ok(match name {
            "revolute_x" => Self::revolute(0),
            "revolute_y" => Self::revolute(1),
            "revolute_z" => Self::revolute(2),
            "prismatic_x" => Self::prismatic(0),
            "prismatic_y" => Self::prismatic(1),
            "prismatic_z" => Self::prismatic(2),
            "spherical" => Self::spherical(),
            "universal" => Self::universal(),
            other => {
                return Err(MsaError::InvalidInput(format!(
                    "unknown joint preset '{other}' (expected one of {})",
                    PRESET_NAMES.join(", ")
                )))
            }
        })
    }

    pub fn u_rigid(&self) -> &[Vector6<f64>] {
        &self.u_rigid
    }

    pub fn u_free(&self) -> &[Vector6<f64>] {
        &self.u_free
    }

    /// `r × 6` matrix whose rows are the rigid directions.
    pub fn rigid_rows(&self) -> &DMatrix<f64> {
        &self.rigid_rows
    }

    /// `p × 6` matrix whose rows are the free directions.
    pub fn free_rows(&self) -> &DMatrix<f64> {
        &self.free_rows
    }

    pub fn rigid_count(&self) -> usize {
        self.u_rigid.len()
    }

    pub fn free_count(&self) -> usize {
        self.u_free.len()
    }

    /// Same joint seen in a frame rotated by `r` (both 3-subvectors rotated).
    pub fn rotated(&self, r: &Matrix3<f64>) -> Result<Self> {
        check_rotation(r)?;
        let q = rotation6(r);
        let rot = |vs: &[Vector6<f64>]| vs.iter().map(|v| q * v).collect::<Vec<_>>();
        let u_rigid = rot(&self.u_rigid);
        let u_free = rot(&self.u_free);
        // rotation keeps orthonormality only up to roundoff of R itself
        Ok(JointBasis {
            rigid_rows: rows_of(&u_rigid),
            free_rows: rows_of(&u_free),
            u_rigid,
            u_free,
        })
    }
}

/// Elastic properties of a joint or support: an `e × e` stiffness over the
/// elastic directions and an optional preload wrench.
#[derive(Debug, Clone, PartialEq)]
pub struct JointStiffness {
    ke: DMatrix<f64>,
    preload: Option<Vector6<f64>>,
}

impl JointStiffness {
    pub fn new(ke: DMatrix<f64>, preload: Option<Vector6<f64>>) -> Result<Self> {
        if !ke.is_square() || ke.nrows() == 0 {
            return Err(MsaError::NotSpd(format!(
                "stiffness must be a non-empty square matrix, got {}x{}",
                ke.nrows(),
                ke.ncols()
            )));
        }
        if ke.iter().any(|x| !x.is_finite()) {
            return Err(MsaError::NotSpd("non-finite entry".into()));
        }
        let scale = ke.amax();
        let asym = (&ke - ke.transpose()).amax();
        if asym > KE_SYMMETRY_TOL * scale {
            return Err(MsaError::NotSpd(format!("asymmetry {asym:.3e}")));
        }
        if ke.clone().cholesky().is_none() {
            return Err(MsaError::NotSpd("matrix has a non-positive eigenvalue".into()));
        }
        if let Some(w) = preload {
            if w.iter().any(|x| !x.is_finite()) {
                return Err(MsaError::InvalidInput("non-finite preload".into()));
            }
        }
        Ok(JointStiffness { ke, preload })
    }

    /// Scalar spring for a single elastic direction.
    pub fn scalar(k: f64) -> Result<Self> {
        Self::new(DMatrix::from_element(1, 1, k), None)
    }

    pub fn with_preload(mut self, preload: Vector6<f64>) -> Result<Self> {
        if preload.iter().any(|x| !x.is_finite()) {
            return Err(MsaError::InvalidInput("non-finite preload".into()));
        }
        self.preload = Some(preload);
        Ok(self)
    }

    pub fn ke(&self) -> &DMatrix<f64> {
        &self.ke
    }

    pub fn preload(&self) -> Option<&Vector6<f64>> {
        self.preload.as_ref()
    }

    pub fn size(&self) -> usize {
        self.ke.nrows()
    }

    pub(crate) fn check_against(&self, basis: &JointBasis) -> Result<()> {
        let e = basis.free_count();
        if e == 0 {
            return Err(MsaError::InvalidInput(
                "elastic connection needs at least one elastic direction".into(),
            ));
        }
        if self.size() != e {
            return Err(MsaError::InvalidInput(format!(
                "stiffness is {0}x{0} but the basis has {e} elastic directions",
                self.size()
            )));
        }
        Ok(())
    }

    /// Preload projected on the elastic directions (zero without preload).
    /// Components along rigid directions are dropped with a warning.
    pub(crate) fn projected_preload(&self, basis: &JointBasis) -> nalgebra::DVector<f64> {
        let Some(w) = self.preload else {
            return nalgebra::DVector::zeros(basis.free_count());
        };
        let rigid_part = basis.rigid_rows() * w;
        if rigid_part.amax() > 1e-12 * w.amax() {
            log::warn!(
                "preload has components {:?} along rigid directions; they are ignored",
                rigid_part.as_slice()
            );
        }
        basis.free_rows() * w
    }
}
