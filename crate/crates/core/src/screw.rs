//! Screw-algebra primitives.
//!
//! Six-vectors are always ordered (translation; rotation) for deflections and
//! (force; moment) for wrenches, and every quantity lives in the global frame.

use nalgebra::{Matrix3, Matrix6, SMatrix, Vector3, Vector6};

use crate::error::{MsaError, Result};

pub type Matrix12 = SMatrix<f64, 12, 12>;

/// Tolerance used when checking that a 3x3 matrix is a proper rotation.
pub const ROTATION_TOL: f64 = 1e-9;

/// Small deflection of a node: translation `p` (m) and rotation `phi` (rad).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Deflection {
    pub p: Vector3<f64>,
    pub phi: Vector3<f64>,
}

impl Deflection {
    pub fn new(p: Vector3<f64>, phi: Vector3<f64>) -> Self {
        Deflection { p, phi }
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Deflection {
            p: v.fixed_rows::<3>(0).into_owned(),
            phi: v.fixed_rows::<3>(3).into_owned(),
        }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        stack(&self.p, &self.phi)
    }
}

/// Wrench acting at a node: force `f` (N) and moment `m` (N·m).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wrench {
    pub f: Vector3<f64>,
    pub m: Vector3<f64>,
}

impl Wrench {
    pub fn new(f: Vector3<f64>, m: Vector3<f64>) -> Self {
        Wrench { f, m }
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Wrench {
            f: v.fixed_rows::<3>(0).into_owned(),
            m: v.fixed_rows::<3>(3).into_owned(),
        }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        stack(&self.f, &self.m)
    }

    /// The same wrench expressed about a point shifted by `-r`, i.e. a wrench
    /// applied at position `r` re-expressed about the origin.
    pub fn about_origin(&self, r: &Vector3<f64>) -> Wrench {
        Wrench {
            f: self.f,
            m: self.m + r.cross(&self.f),
        }
    }
}

fn stack(a: &Vector3<f64>, b: &Vector3<f64>) -> Vector6<f64> {
    Vector6::new(a.x, a.y, a.z, b.x, b.y, b.z)
}

/// Cross-product matrix: `skew(v) * w == v.cross(&w)`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Rigid-body transport operator between two points separated by `d`.
///
/// Applied to the deflection of the first point it yields the deflection of
/// the second; its transpose moves a wrench from the second point to the first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportMatrix {
    offset: Vector3<f64>,
    matrix: Matrix6<f64>,
}

impl TransportMatrix {
    pub fn offset(&self) -> &Vector3<f64> {
        &self.offset
    }

    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.matrix
    }

    pub fn transpose(&self) -> Matrix6<f64> {
        self.matrix.transpose()
    }

    pub fn inverse(&self) -> TransportMatrix {
        transport_matrix(&(-self.offset))
    }
}

/// Builds `[I, skew(d)ᵀ; 0, I]`.
pub fn transport_matrix(d: &Vector3<f64>) -> TransportMatrix {
    let mut matrix = Matrix6::identity();
    matrix.fixed_view_mut::<3, 3>(0, 3).copy_from(&skew(d).transpose());
    TransportMatrix { offset: *d, matrix }
}

pub fn check_rotation(r: &Matrix3<f64>) -> Result<()> {
    let ortho = (r.transpose() * r - Matrix3::identity()).abs().max();
    let det = r.determinant();
    let error = ortho.max((det - 1.0).abs());
    if error > ROTATION_TOL || !error.is_finite() {
        return Err(MsaError::NotARotation { error });
    }
    Ok(())
}

/// `blockdiag(R, R)` acting on a six-vector.
pub fn rotation6(r: &Matrix3<f64>) -> Matrix6<f64> {
    let mut q = Matrix6::zeros();
    q.fixed_view_mut::<3, 3>(0, 0).copy_from(r);
    q.fixed_view_mut::<3, 3>(3, 3).copy_from(r);
    q
}

/// Re-expresses a two-node stiffness matrix in a rotated frame: `Q·K·Qᵀ` with
/// `Q = blockdiag(R, R, R, R)`.
pub fn rotate_link_stiffness(k: &Matrix12, r: &Matrix3<f64>) -> Result<Matrix12> {
    check_rotation(r)?;
    let mut q = Matrix12::zeros();
    for b in 0..4 {
        q.fixed_view_mut::<3, 3>(3 * b, 3 * b).copy_from(r);
    }
    Ok(q * k * q.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Rotation3;
    use proptest::prelude::*;

    fn vec3() -> impl Strategy<Value = Vector3<f64>> {
        prop::array::uniform3(-10.0..10.0f64).prop_map(Vector3::from)
    }

    #[test]
    fn skew_of_zero_and_z_axis() {
        assert_eq!(skew(&Vector3::zeros()), Matrix3::zeros());
        let s = skew(&Vector3::z());
        let expected = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(s, expected);
    }

    proptest! {
        #[test]
        fn skew_matches_cross_product(v in vec3(), w in vec3()) {
            let s = skew(&v);
            prop_assert!((s + s.transpose()).norm() == 0.0);
            // componentwise cross product, written out independently
            let cross = Vector3::new(
                v.y * w.z - v.z * w.y,
                v.z * w.x - v.x * w.z,
                v.x * w.y - v.y * w.x,
            );
            prop_assert!((s * w - cross).amax() <= 1e-15 * (1.0 + cross.amax()));
        }

        #[test]
        fn transport_inverse_is_negated_offset(d in vec3()) {
            let t = transport_matrix(&d);
            let prod = transport_matrix(&(-d)).matrix() * t.matrix();
            prop_assert!((prod - Matrix6::identity()).amax() <= 1e-14);
            prop_assert!((t.matrix().determinant() - 1.0).abs() < 1e-12);
            prop_assert!(t.matrix().fixed_view::<3, 3>(3, 0).amax() == 0.0);
            prop_assert_eq!(t.inverse(), transport_matrix(&(-d)));
        }

        #[test]
        fn transports_compose_by_adding_offsets(a in vec3(), b in vec3()) {
            let prod = transport_matrix(&a).matrix() * transport_matrix(&b).matrix();
            let sum = transport_matrix(&(a + b));
            prop_assert!((prod - sum.matrix()).amax() <= 1e-13);
        }

        #[test]
        fn rotation_preserves_link_eigenvalues(
            axis in vec3(), angle in -3.0..3.0f64, seed in prop::array::uniform12(-1.0..1.0f64)
        ) {
            prop_assume!(axis.norm() > 1e-3);
            let r = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle);
            let g = Matrix12::from_fn(|i, j| seed[(i * 7 + j * 3) % 12] * ((i + 2 * j) as f64).cos());
            let k = g * g.transpose();
            let rotated = rotate_link_stiffness(&k, r.matrix()).unwrap();
            let mut e0: Vec<f64> = k.symmetric_eigenvalues().iter().copied().collect();
            let mut e1: Vec<f64> = rotated.symmetric_eigenvalues().iter().copied().collect();
            e0.sort_by(f64::total_cmp);
            e1.sort_by(f64::total_cmp);
            let scale = e0.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for (x, y) in e0.iter().zip(&e1) {
                prop_assert!((x - y).abs() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn transport_of_zero_offset_is_identity() {
        assert_eq!(*transport_matrix(&Vector3::zeros()).matrix(), Matrix6::identity());
    }

    #[test]
    fn transport_reproduces_rigid_body_kinematics() {
        let (l, theta) = (0.7, 1e-3);
        let t = transport_matrix(&Vector3::new(l, 0.0, 0.0));
        let dt_i = Deflection::new(Vector3::zeros(), Vector3::new(0.0, 0.0, theta));
        let dt_j = Deflection::from_vector(&(t.matrix() * dt_i.to_vector()));
        assert!((dt_j.p - Vector3::new(0.0, theta * l, 0.0)).norm() < 1e-18);
        assert_eq!(dt_j.phi, dt_i.phi);
    }

    #[test]
    fn transport_transpose_moves_wrench() {
        // force at j, moment balance about i picks up d × F
        let d = Vector3::new(0.3, -0.2, 0.5);
        let f = Vector3::new(1.0, 2.0, -3.0);
        let w = Wrench::new(f, Vector3::zeros());
        let moved = Wrench::from_vector(&(transport_matrix(&d).transpose() * w.to_vector()));
        assert_eq!(moved.f, f);
        assert!((moved.m - d.cross(&f)).norm() < 1e-15);
    }

    #[test]
    fn identity_and_inverse_rotation() {
        let g = Matrix12::from_fn(|i, j| ((i * 12 + j) as f64).sin());
        let k = g * g.transpose();
        assert_eq!(rotate_link_stiffness(&k, &Matrix3::identity()).unwrap(), k);
        let r = Rotation3::from_euler_angles(0.3, -1.1, 2.0);
        let there = rotate_link_stiffness(&k, r.matrix()).unwrap();
        let back = rotate_link_stiffness(&there, &r.matrix().transpose()).unwrap();
        assert!((back - k).norm() <= 1e-12 * k.norm());
    }

    #[test]
    fn non_rotation_rejected() {
        let k = Matrix12::identity();
        let scaled = Matrix3::identity() * 1.01;
        assert!(matches!(
            rotate_link_stiffness(&k, &scaled),
            Err(MsaError::NotARotation { .. })
        ));
        let reflection = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(rotate_link_stiffness(&k, &reflection).is_err());
    }
}
