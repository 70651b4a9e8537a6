//! Cartesian stiffness by Schur complement, and loaded solutions.
//!
//! All factorizations act on the equilibrated system `Dr·M·Dc`; results are
//! mapped back to physical units afterwards.

use nalgebra::{DMatrix, DVector, Matrix6, SymmetricEigen, Vector3, Vector6};

use super::linalg::{equilibrate, Equilibration, Solver};
use super::partition::{orders, PartitionedSystem};
use super::{assemble, GlobalSystem};
use crate::boundary::resultant_about_origin;
use crate::error::{MsaError, Result};
use crate::model::Model;
use crate::screw::Wrench;

/// Kc asymmetry (relative Frobenius) accepted and removed by symmetrization.
pub const SYMMETRY_GATE: f64 = 1e-8;
/// Relative eigenvalue threshold for null directions of 6x6 matrices.
pub const NULL_TOL: f64 = 1e-10;
/// Relative threshold deciding whether an end direction is held rigidly.
pub const RIGID_DIRECTION_TOL: f64 = 1e-8;
/// Largest accepted relative residual of a loaded solution.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// Order of the internal block `A`.
    pub a_size: usize,
    pub a_rank: usize,
    /// A pseudo-inverse replaced an inverse: `A` was singular, or Kc is
    /// singular and `compliance` is its generalized inverse.
    pub pseudo_inverse: bool,
    pub condition_estimate: f64,
    pub kc_rank: usize,
    /// End deflections resisted by no stiffness (unit vectors).
    pub mechanism_directions: Vec<Vector6<f64>>,
    /// End deflections prevented entirely by rigid connections to ground.
    pub rigid_directions: Vec<Vector6<f64>>,
    /// Every end direction is rigid; `kc` holds infinities.
    pub infinite_stiffness: bool,
    /// Relative asymmetry of Kc before symmetrization.
    pub asymmetry: f64,
    /// Part of the end wrench balanced internally by preloads and internal loads.
    pub load_offset: Vector6<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartesianStiffness {
    pub kc: Matrix6<f64>,
    /// `Kc⁻¹`, or a generalized inverse when Kc is singular or has rigid
    /// directions.
    pub compliance: Matrix6<f64>,
    pub diagnostics: Diagnostics,
}

impl CartesianStiffness {
    /// Whether the end effector has unresisted or rigid directions.
    pub fn is_degenerate(&self) -> bool {
        let d = &self.diagnostics;
        !d.mechanism_directions.is_empty() || !d.rigid_directions.is_empty() || d.infinite_stiffness
    }

    /// Stiffness felt along unit direction `d` when the wrench is applied
    /// along the same direction: `1 / (dᵀ C d)`. Zero along mechanisms,
    /// infinite along rigid directions.
    pub fn directional_stiffness(&self, d: &Vector6<f64>) -> f64 {
        let d = d.normalize();
        if self.diagnostics.infinite_stiffness {
            return f64::INFINITY;
        }
        if self
            .diagnostics
            .mechanism_directions
            .iter()
            .any(|n| n.dot(&d).abs() > RIGID_DIRECTION_TOL)
        {
            return 0.0;
        }
        let c = d.dot(&(self.compliance * d));
        let scale = self.compliance.amax();
        if c <= NULL_TOL * scale {
            f64::INFINITY
        } else {
            1.0 / c
        }
    }
}

/// Full solution of a loaded model.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedState {
    pub wrenches: Vec<Vector6<f64>>,
    pub deflections: Vec<Vector6<f64>>,
    pub end_deflection: Vector6<f64>,
    /// External wrench of every loaded node.
    pub loads: Vec<(usize, Vector6<f64>)>,
    pub residual: f64,
}

impl LoadedState {
    /// Support reactions (wrench applied by the ground to the structure).
    pub fn reactions(&self, model: &Model) -> Vec<(usize, Wrench)> {
        model
            .supports
            .iter()
            .map(|s| (s.node, Wrench::from_vector(&self.wrenches[s.node])))
            .collect()
    }

    /// Resultant of reactions and external loads about the origin, together
    /// with the magnitude of the loads taken about the origin.
    pub fn equilibrium_error(&self, model: &Model) -> (f64, f64) {
        let reactions = self.reactions(model);
        let loads: Vec<(&Vector3<f64>, Wrench)> = self
            .loads
            .iter()
            .map(|(n, w)| (model.position(*n), Wrench::from_vector(w)))
            .collect();
        let magnitude = loads
            .iter()
            .map(|(r, w)| w.about_origin(r).to_vector().norm())
            .sum::<f64>();
        let total = resultant_about_origin(
            reactions
                .iter()
                .map(|(n, w)| (model.position(*n), *w))
                .chain(loads.iter().cloned()),
        );
        (total.to_vector().norm(), magnitude)
    }
}

fn relative_asymmetry(k: &Matrix6<f64>) -> f64 {
    let n = k.norm();
    if n == 0.0 {
        0.0
    } else {
        (k - k.transpose()).norm() / n
    }
}

fn symmetrize_gated(k: &Matrix6<f64>) -> Result<(Matrix6<f64>, f64)> {
    let asym = relative_asymmetry(k);
    if asym > SYMMETRY_GATE {
        return Err(MsaError::Asymmetric {
            asymmetry: asym,
            tolerance: SYMMETRY_GATE,
        });
    }
    Ok(((k + k.transpose()) * 0.5, asym))
}

/// Eigen-decomposition of a symmetric 6x6 matrix after diagonal scaling to
/// unit diagonal, which makes thresholds independent of mixed units.
struct ScaledEigen {
    scale: Vector6<f64>,
    eigen: SymmetricEigen<f64, nalgebra::U6>,
    tol: f64,
}

impl ScaledEigen {
    fn new(k: &Matrix6<f64>) -> Self {
        let dmax = k.diagonal().amax();
        let scale = k.diagonal().map(|d| {
            let d = if d.abs() > 1e-14 * dmax { d.abs() } else { dmax };
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                1.0
            }
        });
        let s = Matrix6::from_diagonal(&scale);
        let eigen = SymmetricEigen::new(s * k * s);
        let tol = NULL_TOL * eigen.eigenvalues.amax();
        ScaledEigen { scale, eigen, tol }
    }

    fn null_directions(&self) -> Vec<Vector6<f64>> {
        let mut out: Vec<Vector6<f64>> = Vec::new();
        for i in 0..6 {
            if self.eigen.eigenvalues[i].abs() <= self.tol {
                let v: Vector6<f64> = self.eigen.eigenvectors.column(i).component_mul(&self.scale);
                out.push(v);
            }
        }
        orthonormalize(out)
    }

    fn pseudo_inverse(&self) -> Matrix6<f64> {
        let mut inv = Matrix6::zeros();
        for i in 0..6 {
            let l = self.eigen.eigenvalues[i];
            if l.abs() > self.tol {
                let v = self.eigen.eigenvectors.column(i);
                inv += v * v.transpose() / l;
            }
        }
        let s = Matrix6::from_diagonal(&self.scale);
        s * inv * s
    }
}

fn orthonormalize(vectors: Vec<Vector6<f64>>) -> Vec<Vector6<f64>> {
    let mut out: Vec<Vector6<f64>> = Vec::new();
    for mut v in vectors {
        for u in &out {
            v -= *u * u.dot(&v);
        }
        let n = v.norm();
        if n > 1e-8 {
            let mut v = v / n;
            // deterministic sign: largest component positive
            if v[v.iamax()] < 0.0 {
                v = -v;
            }
            out.push(v);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Route {
    /// Δt_e from Kc, internal unknowns from A.
    Schur,
    /// Rigid end directions: the full system is solved directly.
    Full,
}

/// Factorized model ready for stiffness queries and loaded solves.
pub struct Analysis {
    system: GlobalSystem,
    end: usize,
    eq: Equilibration,
    parts: PartitionedSystem,
    a_solver: Solver,
    full_solver: Option<Solver>,
    route: Route,
    stiffness: CartesianStiffness,
}

impl Analysis {
    pub fn from_model(model: &Model) -> Result<Self> {
        Self::new(assemble(model)?, model.end_effector)
    }

    pub fn new(system: GlobalSystem, end: usize) -> Result<Self> {
        if !system.is_square() {
            return Err(MsaError::CountMismatch {
                rows: system.rows(),
                columns: system.columns(),
                breakdown: system
                    .class_counts()
                    .iter()
                    .map(|(c, n)| format!("{}: {n}", c.name()))
                    .collect::<Vec<_>>()
                    .join(", "),
            });
        }
        let (rows, cols) = orders(&system, end)?;
        let m = system.to_dense();
        let eq = equilibrate(&m);
        let scaled = eq.apply(&m);
        let rhs = system.rhs().component_mul(&eq.rows);
        let parts = PartitionedSystem::split(&scaled, &rhs, rows, cols, end);
        let a_solver = Solver::new(&parts.a);

        let mut analysis = Analysis {
            end,
            eq,
            a_solver,
            full_solver: None,
            route: Route::Schur,
            stiffness: CartesianStiffness {
                kc: Matrix6::zeros(),
                compliance: Matrix6::zeros(),
                diagnostics: Diagnostics {
                    a_size: parts.a.nrows(),
                    a_rank: 0,
                    pseudo_inverse: false,
                    condition_estimate: 0.0,
                    kc_rank: 0,
                    mechanism_directions: Vec::new(),
                    rigid_directions: Vec::new(),
                    infinite_stiffness: false,
                    asymmetry: 0.0,
                    load_offset: Vector6::zeros(),
                },
            },
            parts,
            system,
        };
        analysis.condense(&scaled)?;
        Ok(analysis)
    }

    fn end_row_scale(&self) -> Vector6<f64> {
        let n = self.parts.row_order.len();
        Vector6::from_iterator(self.parts.row_order[n - 6..].iter().map(|&r| self.eq.rows[r]))
    }

    fn end_col_scale(&self) -> Vector6<f64> {
        let n = self.parts.col_order.len();
        Vector6::from_iterator(self.parts.col_order[n - 6..].iter().map(|&c| self.eq.cols[c]))
    }

    /// Physical Kc from the scaled Schur complement.
    fn unscale_stiffness(&self, kc_scaled: &DMatrix<f64>) -> Matrix6<f64> {
        let (dr, dc) = (self.end_row_scale(), self.end_col_scale());
        Matrix6::from_fn(|i, j| kc_scaled[(i, j)] / (dr[i] * dc[j]))
    }

    /// `C·A⁻¹·b` in physical units for the given internal right-hand side.
    fn load_offset(&self, rhs_scaled: &DVector<f64>) -> Vector6<f64> {
        let y = self.a_solver.solve_vector(rhs_scaled);
        let off = &self.parts.c * y;
        let dr = self.end_row_scale();
        Vector6::from_fn(|i, _| off[i] / dr[i])
    }

    fn condense(&mut self, scaled: &DMatrix<f64>) -> Result<()> {
        let diag = &mut self.stiffness.diagnostics;
        diag.a_rank = self.a_solver.rank();
        diag.pseudo_inverse = self.a_solver.is_singular();
        diag.condition_estimate = self.a_solver.condition_estimate();

        let rigid = if self.a_solver.is_singular() {
            let left = self.a_solver.left_null_basis();
            let projected = left.transpose() * &self.parts.b;
            let bnorm = self.parts.b.norm().max(1.0);
            let sv = if projected.nrows() == 0 {
                DVector::zeros(0)
            } else {
                projected.svd(false, false).singular_values
            };
            sv.iter().filter(|&&s| s > RIGID_DIRECTION_TOL * bnorm).count()
        } else {
            0
        };

        if rigid == 0 {
            let x = self.a_solver.solve(&self.parts.b);
            let kc_scaled = &self.parts.d - &self.parts.c * x;
            let kc = self.unscale_stiffness(&kc_scaled);
            let (kc, asym) = symmetrize_gated(&kc)?;
            let se = ScaledEigen::new(&kc);
            let mechanisms = se.null_directions();
            let inverse = if mechanisms.is_empty() { kc.try_inverse() } else { None };
            let pinv = inverse.is_none();
            let compliance = inverse.unwrap_or_else(|| se.pseudo_inverse());
            let load_offset = self.load_offset(&self.parts.rhs);
            let s = &mut self.stiffness;
            s.diagnostics.kc_rank = 6 - mechanisms.len();
            s.diagnostics.mechanism_directions = mechanisms;
            s.diagnostics.asymmetry = asym;
            s.diagnostics.load_offset = load_offset;
            s.diagnostics.pseudo_inverse |= pinv;
            s.kc = kc;
            s.compliance = compliance;
            return Ok(());
        }

        self.route = Route::Full;
        if rigid == 6 {
            let s = &mut self.stiffness;
            s.kc = Matrix6::from_element(f64::INFINITY);
            s.compliance = Matrix6::zeros();
            s.diagnostics.infinite_stiffness = true;
            s.diagnostics.kc_rank = 6;
            s.diagnostics.rigid_directions = (0..6).map(|k| Vector6::ith(k, 1.0)).collect();
            return Ok(());
        }

        // Partially rigid end: compliance from unit end loads on the full system.
        let full = Solver::new(scaled);
        let n = self.system.rows();
        let load_row = self.system.load_rows(self.end).expect("checked by orders");
        let defl = self.system.deflection_columns(self.end).start;
        let mut rhs = DMatrix::zeros(n, 6);
        for k in 0..6 {
            rhs[(load_row + k, k)] = self.eq.rows[load_row + k];
        }
        let x = full.solve(&rhs);
        let compliance = Matrix6::from_fn(|i, j| x[(defl + i, j)] * self.eq.cols[defl + i]);
        let (compliance, asym) = symmetrize_gated(&compliance)?;
        let se = ScaledEigen::new(&compliance);
        let rigid_dirs = se.null_directions();
        let mechanisms = if full.is_singular() {
            let null = full.null_basis();
            let dirs = (0..null.ncols())
                .map(|c| Vector6::from_fn(|i, _| null[(defl + i, c)] * self.eq.cols[defl + i]))
                .collect();
            orthonormalize(dirs)
        } else {
            Vec::new()
        };
        let s = &mut self.stiffness;
        s.kc = se.pseudo_inverse();
        s.compliance = compliance;
        s.diagnostics.pseudo_inverse = true;
        s.diagnostics.kc_rank = 6 - rigid_dirs.len();
        s.diagnostics.rigid_directions = rigid_dirs;
        s.diagnostics.mechanism_directions = mechanisms;
        s.diagnostics.asymmetry = asym;
        self.full_solver = Some(full);
        Ok(())
    }

    pub fn system(&self) -> &GlobalSystem {
        &self.system
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn stiffness(&self) -> &CartesianStiffness {
        &self.stiffness
    }

    /// Scaled partition blocks `Dr·[A B; C D]·Dc`.
    pub fn scaled_partition(&self) -> &PartitionedSystem {
        &self.parts
    }

    /// Solves the model with `wrench` applied at the end node (other loads as
    /// declared in the model).
    pub fn solve_loaded(&self, wrench: &Vector6<f64>) -> Result<LoadedState> {
        let system = self.system.with_load(self.end, wrench)?;
        let rhs_scaled = system.rhs().component_mul(&self.eq.rows);
        let n = system.columns();
        let x = match self.route {
            Route::Schur => self.solve_schur(wrench, &rhs_scaled)?,
            Route::Full => {
                let full = self.full_solver.as_ref();
                match full {
                    Some(f) => f.solve_vector(&rhs_scaled).component_mul(&self.eq.cols),
                    None => Solver::new(&self.eq.apply(&system.to_dense()))
                        .solve_vector(&rhs_scaled)
                        .component_mul(&self.eq.cols),
                }
            }
        };
        debug_assert_eq!(x.len(), n);
        let residual = system.relative_residual(&x);
        if residual > RESIDUAL_TOL {
            let direction = self
                .stiffness
                .diagnostics
                .mechanism_directions
                .first()
                .map(|d| (*d).into())
                .unwrap_or([0.0; 6]);
            return Err(MsaError::UnresistedLoad { direction });
        }
        let nodes = system.node_count();
        let wrenches = (0..nodes)
            .map(|k| Vector6::from_column_slice(&x.as_slice()[6 * k..6 * k + 6]))
            .collect();
        let deflections: Vec<Vector6<f64>> = (0..nodes)
            .map(|k| {
                let c = system.deflection_columns(k).start;
                Vector6::from_column_slice(&x.as_slice()[c..c + 6])
            })
            .collect();
        let loads = system
            .load_rows
            .iter()
            .map(|(&node, &row)| (node, Vector6::from_column_slice(&system.rhs().as_slice()[row..row + 6])))
            .collect();
        Ok(LoadedState {
            end_deflection: deflections[self.end],
            wrenches,
            deflections,
            loads,
            residual,
        })
    }

    fn solve_schur(&self, wrench: &Vector6<f64>, rhs_scaled: &DVector<f64>) -> Result<DVector<f64>> {
        let internal = rhs_scaled.select_rows(&self.parts.row_order[..self.parts.a.nrows()]);
        let resid = wrench - self.load_offset(&internal);
        let mechanisms = &self.stiffness.diagnostics.mechanism_directions;
        let rnorm = resid.norm();
        for dir in mechanisms {
            if dir.dot(&resid).abs() > RIGID_DIRECTION_TOL * rnorm {
                return Err(MsaError::UnresistedLoad {
                    direction: (*dir).into(),
                });
            }
        }
        let dt_e = self.stiffness.compliance * resid;
        let dc = self.end_col_scale();
        let y = DVector::from_iterator(6, dt_e.iter().zip(dc.iter()).map(|(d, s)| d / s));
        let mu_scaled = self.a_solver.solve_vector(&(internal - &self.parts.b * &y));
        let mut x = DVector::zeros(self.system.columns());
        let ic = self.parts.a.ncols();
        for (p, &g) in self.parts.col_order.iter().enumerate() {
            x[g] = if p < ic {
                mu_scaled[p] * self.eq.cols[g]
            } else {
                dt_e[p - ic]
            };
        }
        Ok(x)
    }
}

/// Kc at `end` for an assembled system.
pub fn cartesian_stiffness(system: &GlobalSystem, end: usize) -> Result<CartesianStiffness> {
    Ok(Analysis::new(system.clone(), end)?.stiffness)
}

/// Loaded solution with `wrench` at `end`.
pub fn solve_loaded(system: &GlobalSystem, end: usize, wrench: &Vector6<f64>) -> Result<LoadedState> {
    Analysis::new(system.clone(), end)?.solve_loaded(wrench)
}
