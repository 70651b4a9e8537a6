//! Equations of flexible links, rigid links and platforms.

use nalgebra::{Matrix3, Matrix6, Vector3};

use crate::equations::{block6, identity6, EquationBlock, RowClass, Var};
use crate::error::{MsaError, Result};
use crate::screw::{rotate_link_stiffness, transport_matrix, Matrix12};

/// Relative symmetry tolerance for user-supplied link matrices.
pub const LINK_SYMMETRY_TOL: f64 = 1e-6;

/// Two-node link stiffness `[W_i; W_j] = K [Δt_i; Δt_j]` in the global frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkStiffness {
    k: Matrix12,
    nodes: (usize, usize),
}

impl LinkStiffness {
    /// Accepts a user matrix after a relative symmetry check; the stored matrix
    /// is the symmetric part.
    pub fn new(k: Matrix12, i: usize, j: usize) -> Result<Self> {
        if i == j {
            return Err(MsaError::DuplicateNode(i, "link".into()));
        }
        if k.iter().any(|x| !x.is_finite()) {
            return Err(MsaError::InvalidInput("link matrix has non-finite entries".into()));
        }
        let norm = k.norm();
        let asym = (k - k.transpose()).norm();
        if asym > LINK_SYMMETRY_TOL * norm {
            return Err(MsaError::Asymmetric {
                asymmetry: asym / norm,
                tolerance: LINK_SYMMETRY_TOL,
            });
        }
        let k = (k + k.transpose()) * 0.5;
        let min_eig = k.symmetric_eigenvalues().min();
        if min_eig < -1e-9 * norm {
            return Err(MsaError::InvalidInput(format!(
                "link matrix is not positive semidefinite (eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(LinkStiffness { k, nodes: (i, j) })
    }

    pub fn matrix(&self) -> &Matrix12 {
        &self.k
    }

    pub fn nodes(&self) -> (usize, usize) {
        self.nodes
    }

    fn block(&self, r: usize, c: usize) -> Matrix6<f64> {
        self.k.fixed_view::<6, 6>(6 * r, 6 * c).into_owned()
    }

    pub fn k11(&self) -> Matrix6<f64> {
        self.block(0, 0)
    }

    pub fn k12(&self) -> Matrix6<f64> {
        self.block(0, 1)
    }

    pub fn k21(&self) -> Matrix6<f64> {
        self.block(1, 0)
    }

    pub fn k22(&self) -> Matrix6<f64> {
        self.block(1, 1)
    }

    /// Same link attached to other node indices.
    pub fn renumbered(&self, i: usize, j: usize) -> LinkStiffness {
        LinkStiffness {
            k: self.k,
            nodes: (i, j),
        }
    }

    /// Same link in a frame rotated by `r`.
    pub fn rotated(&self, r: &Matrix3<f64>) -> Result<LinkStiffness> {
        LinkStiffness::new(rotate_link_stiffness(&self.k, r)?, self.nodes.0, self.nodes.1)
    }
}

/// Prismatic Euler–Bernoulli beam. `iy`/`iz` are second moments about the local
/// y/z axes; the local x axis runs along `axis`, and the local z axis is the
/// component of `up` (global z by default) orthogonal to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSection {
    pub e: f64,
    pub g: f64,
    pub area: f64,
    pub iy: f64,
    pub iz: f64,
    pub j: f64,
    pub length: f64,
    pub axis: Vector3<f64>,
    pub up: Option<Vector3<f64>>,
}

impl BeamSection {
    /// Thin-walled or solid circular tube with outer diameter `outer` and wall
    /// thickness `wall` (solid when `wall >= outer / 2`).
    pub fn circular_tube(e: f64, g: f64, outer: f64, wall: f64, length: f64, axis: Vector3<f64>) -> Self {
        let ro = outer / 2.0;
        let ri = (ro - wall).max(0.0);
        let area = std::f64::consts::PI * (ro * ro - ri * ri);
        let i = std::f64::consts::PI / 4.0 * (ro.powi(4) - ri.powi(4));
        BeamSection {
            e,
            g,
            area,
            iy: i,
            iz: i,
            j: 2.0 * i,
            length,
            axis,
            up: None,
        }
    }

    fn validate(&self) -> Result<()> {
        let scalars = [
            ("E", self.e),
            ("G", self.g),
            ("A", self.area),
            ("Iy", self.iy),
            ("Iz", self.iz),
            ("J", self.j),
            ("length", self.length),
        ];
        for (name, v) in scalars {
            if !(v > 0.0 && v.is_finite()) {
                return Err(MsaError::InvalidInput(format!(
                    "beam section {name} must be positive and finite, got {v}"
                )));
            }
        }
        let n = self.axis.norm();
        if !n.is_finite() || (n - 1.0).abs() > 1e-9 {
            return Err(MsaError::InvalidInput(format!(
                "beam axis must be a unit vector (norm {n})"
            )));
        }
        Ok(())
    }

    /// Columns are the local x, y, z axes in global coordinates.
    pub fn local_frame(&self) -> Result<Matrix3<f64>> {
        let x = self.axis.normalize();
        let mut up = self.up.unwrap_or_else(Vector3::z);
        if x.cross(&up).norm() < 1e-6 * up.norm().max(1.0) {
            if self.up.is_some() {
                return Err(MsaError::InvalidInput("beam up vector is parallel to its axis".into()));
            }
            up = Vector3::y();
        }
        let z = (up - x * x.dot(&up)).normalize();
        let y = z.cross(&x);
        Ok(Matrix3::from_columns(&[x, y, z]))
    }
}

/// Classical 12x12 space-frame element in local axes.
pub fn beam_local_stiffness(s: &BeamSection) -> Matrix12 {
    let (l, e) = (s.length, s.e);
    let (l2, l3) = (l * l, l * l * l);
    let mut k = Matrix12::zeros();
    let mut set = |i: usize, j: usize, v: f64| {
        k[(i, j)] = v;
        k[(j, i)] = v;
    };
    let ea = e * s.area / l;
    set(0, 0, ea);
    set(0, 6, -ea);
    set(6, 6, ea);
    let gj = s.g * s.j / l;
    set(3, 3, gj);
    set(3, 9, -gj);
    set(9, 9, gj);
    // bending in the local xy plane (deflection v, rotation θz)
    let ez = e * s.iz;
    set(1, 1, 12.0 * ez / l3);
    set(1, 5, 6.0 * ez / l2);
    set(1, 7, -12.0 * ez / l3);
    set(1, 11, 6.0 * ez / l2);
    set(5, 5, 4.0 * ez / l);
    set(5, 7, -6.0 * ez / l2);
    set(5, 11, 2.0 * ez / l);
    set(7, 7, 12.0 * ez / l3);
    set(7, 11, -6.0 * ez / l2);
    set(11, 11, 4.0 * ez / l);
    // bending in the local xz plane (deflection w, rotation θy = -w')
    let ey = e * s.iy;
    set(2, 2, 12.0 * ey / l3);
    set(2, 4, -6.0 * ey / l2);
    set(2, 8, -12.0 * ey / l3);
    set(2, 10, -6.0 * ey / l2);
    set(4, 4, 4.0 * ey / l);
    set(4, 8, 6.0 * ey / l2);
    set(4, 10, 2.0 * ey / l);
    set(8, 8, 12.0 * ey / l3);
    set(8, 10, 6.0 * ey / l2);
    set(10, 10, 4.0 * ey / l);
    k
}

/// Beam link between nodes `i` and `j`, expressed in the global frame.
pub fn beam_stiffness(section: &BeamSection, i: usize, j: usize) -> Result<LinkStiffness> {
    section.validate()?;
    if i == j {
        return Err(MsaError::DuplicateNode(i, "beam".into()));
    }
    let frame = section.local_frame()?;
    let k = rotate_link_stiffness(&beam_local_stiffness(section), &frame)?;
    Ok(LinkStiffness {
        k: (k + k.transpose()) * 0.5,
        nodes: (i, j),
    })
}

/// `−W + K Δt = 0` for both link ends (12 rows).
pub fn flexible_link_equations(link: &LinkStiffness) -> EquationBlock {
    let (i, j) = link.nodes();
    let mut b = EquationBlock::new(12, RowClass::Link);
    b.push(0, Var::Wrench(i), -identity6());
    b.push(0, Var::Deflection(i), block6(&link.k11()));
    b.push(0, Var::Deflection(j), block6(&link.k12()));
    b.push(6, Var::Wrench(j), -identity6());
    b.push(6, Var::Deflection(i), block6(&link.k21()));
    b.push(6, Var::Deflection(j), block6(&link.k22()));
    b
}

/// Rigid link from `i` to `j` with `d = r_j − r_i`: 6 compatibility rows
/// `D Δt_i − Δt_j = 0` and 6 equilibrium rows `W_i + Dᵀ W_j = 0`.
pub fn rigid_link_equations(d: &Vector3<f64>, i: usize, j: usize) -> Result<EquationBlock> {
    if i == j {
        return Err(MsaError::DuplicateNode(i, "rigid link".into()));
    }
    let t = transport_matrix(d);
    let mut b = EquationBlock::new(12, RowClass::Compatibility);
    b.push(0, Var::Deflection(i), block6(t.matrix()));
    b.push(0, Var::Deflection(j), -identity6());
    b.set_class(6, 6, RowClass::Equilibrium);
    b.push(6, Var::Wrench(i), identity6());
    b.push(6, Var::Wrench(j), block6(&t.transpose()));
    Ok(b)
}

fn check_distinct(nodes: &[usize], what: &str) -> Result<()> {
    let mut sorted = nodes.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(MsaError::DuplicateNode(w[0], what.into()));
        }
    }
    Ok(())
}

/// Rigid platform. Each clamp is `(node, d)` with `d = r_end − r_clamp`.
pub fn rigid_platform_equations(clamps: &[(usize, Vector3<f64>)], end: usize) -> Result<EquationBlock> {
    if clamps.is_empty() {
        return Err(MsaError::InvalidInput("rigid platform needs at least one clamp".into()));
    }
    let mut ids: Vec<usize> = clamps.iter().map(|c| c.0).collect();
    ids.push(end);
    check_distinct(&ids, "rigid platform")?;
    if let [(node, d)] = clamps {
        return rigid_link_equations(d, *node, end);
    }
    let n = clamps.len();
    let mut b = EquationBlock::new(6 * n + 6, RowClass::Compatibility);
    for (k, (node, d)) in clamps.iter().enumerate() {
        b.push(6 * k, Var::Deflection(*node), block6(transport_matrix(d).matrix()));
        b.push(6 * k, Var::Deflection(end), -identity6());
        b.push(6 * n, Var::Wrench(*node), block6(&transport_matrix(&(-d)).transpose()));
    }
    b.set_class(6 * n, 6, RowClass::Equilibrium);
    b.push(6 * n, Var::Wrench(end), identity6());
    Ok(b)
}

/// Flexible platform built from virtual links, each running from a clamp node
/// to the common end node.
pub fn flexible_platform_equations(links: &[LinkStiffness], end: usize) -> Result<EquationBlock> {
    if links.is_empty() {
        return Err(MsaError::InvalidInput(
            "flexible platform needs at least one clamp".into(),
        ));
    }
    if let Some(bad) = links.iter().find(|l| l.nodes().1 != end) {
        return Err(MsaError::InvalidInput(format!(
            "virtual platform link ends at node {} instead of the platform node {end}",
            bad.nodes().1
        )));
    }
    let mut ids: Vec<usize> = links.iter().map(|l| l.nodes().0).collect();
    ids.push(end);
    check_distinct(&ids, "flexible platform")?;
    let n = links.len();
    let mut b = EquationBlock::new(6 * n + 6, RowClass::Link);
    let mut k22 = Matrix6::zeros();
    for (k, link) in links.iter().enumerate() {
        let clamp = link.nodes().0;
        b.push(6 * k, Var::Wrench(clamp), -identity6());
        b.push(6 * k, Var::Deflection(clamp), block6(&link.k11()));
        b.push(6 * k, Var::Deflection(end), block6(&link.k12()));
        b.push(6 * n, Var::Deflection(clamp), block6(&link.k21()));
        k22 += link.k22();
    }
    b.push(6 * n, Var::Wrench(end), -identity6());
    b.push(6 * n, Var::Deflection(end), block6(&k22));
    Ok(b)
}
