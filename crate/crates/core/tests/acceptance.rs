//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, Matrix6, SymmetricEigen, Vector3, Vector6};
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::*;
use msa_stiffness::assembly::linalg::rank_with_tol;
use msa_stiffness::assembly::{assemble, Analysis};
use msa_stiffness::basis::{JointBasis, JointStiffness};
use msa_stiffness::boundary::SupportKind;
use msa_stiffness::elements::{rigid_link_equations, rigid_platform_equations};
use msa_stiffness::equations::RowClass;
use msa_stiffness::joints::JointSpec;
use msa_stiffness::model::Model;
use msa_stiffness::reference::navaro::leg_rotation;
use msa_stiffness::reference::{build_navaro, build_navaro_leg, oracle_merged_msa, oracle_serial_vjm, NavaroParams};
use msa_stiffness::screw::transport_matrix;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn analyze(model: &Model) -> Result<Analysis, String> {
    Analysis::from_model(model).map_err(|e| e.to_string())
}

fn kc(model: &Model) -> Result<Matrix6<f64>, String> {
    Ok(analyze(model)?.stiffness().kc)
}

fn min_eigenvalue(m: &Matrix6<f64>) -> f64 {
    SymmetricEigen::new((m + m.transpose()) * 0.5).eigenvalues.min()
}

fn leg_dimensions() -> Outcome {
    let system = assemble(&build_navaro_leg(&NavaroParams::default()).unwrap()).map_err(|e| e.to_string())?;
    let dense = system.to_dense();
    let classes = system.classes();
    let n = system.node_count();
    let half = 6 * n;
    let rows_of = |c: RowClass| (0..classes.len()).filter(|&r| classes[r] == c).collect::<Vec<_>>();
    let touches = |r: usize, cols: std::ops::Range<usize>| cols.into_iter().any(|c| dense[(r, c)] != 0.0);
    let hooke = rows_of(RowClass::Hooke);
    let load = rows_of(RowClass::Load);
    let c_rows = hooke.iter().filter(|&&r| touches(r, 0..half)).count();
    let d_rows = hooke.iter().filter(|&&r| touches(r, half..2 * half)).count();
    let e_rows = load.iter().filter(|&&r| touches(r, 0..half)).count();
    // the deflection part of the load rows is an all-zero block
    let f_zero = load.iter().all(|&r| !touches(r, half..2 * half));
    let got = (
        system.rows(),
        system.columns(),
        rows_of(RowClass::Link).len(),
        rows_of(RowClass::Compatibility).len(),
        rows_of(RowClass::Equilibrium).len(),
        c_rows,
        d_rows,
        e_rows,
        load.len(),
    );
    ensure(got == (120, 120, 60, 31, 22, 1, 1, 6, 6) && f_zero, || {
        format!("got {got:?}, zero F block {f_zero}")
    })?;
    Ok(format!(
        "{}x{}, link {}, blocks {}/{}/{}/{}/{}/{}",
        got.0, got.1, got.2, got.3, got.4, got.5, got.6, got.7, got.8
    ))
}

fn cantilever_oracle() -> Outcome {
    let mut worst_bend: f64 = 0.0;
    let mut worst_axial: f64 = 0.0;
    for (l, scale) in [(0.3, 1.0), (0.8, 1.0), (1.7, 0.4)] {
        let s = tube(scale);
        let a = analyze(&cantilever(l, s))?;
        let f = 250.0;
        for (component, rot, inertia) in [(1, 5, s.iz), (2, 4, s.iy)] {
            let mut w = Vector6::zeros();
            w[component] = f;
            let state = a.solve_loaded(&w).map_err(|e| e.to_string())?;
            let ei = s.e * inertia;
            let deflection = f * l.powi(3) / (3.0 * ei);
            let rotation = f * l * l / (2.0 * ei);
            worst_bend = worst_bend
                .max((state.end_deflection[component] - deflection).abs() / deflection)
                .max((state.end_deflection[rot].abs() - rotation).abs() / rotation);
        }
        let axial = s.e * s.area / l;
        worst_axial = worst_axial.max((a.stiffness().kc[(0, 0)] - axial).abs() / axial);
    }
    ensure(worst_bend <= 1e-10 && worst_axial <= 1e-12, || {
        format!("bending {worst_bend:.2e}, axial {worst_axial:.2e}")
    })?;
    Ok(format!("bending {worst_bend:.2e}, axial {worst_axial:.2e}"))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let links = 2 + case % 5;
        let model = random_chain(&mut rng, links);
        let constraint = kc(&model)?;
        let merged = oracle_merged_msa(&model).map_err(|e| e.to_string())?;
        let serial = oracle_serial_vjm(&model).map_err(|e| e.to_string())?;
        worst = worst
            .max(rel_diff(&constraint, &merged))
            .max(rel_diff(&constraint, &serial))
            .max(rel_diff(&merged, &serial));
    }
    ensure(worst <= 1e-8, || format!("worst pairwise difference {worst:.2e}"))?;
    Ok(format!("50 chains, worst pairwise difference {worst:.2e}"))
}

fn rank_claims() -> Outcome {
    let link = rigid_link_equations(&Vector3::new(0.4, -0.1, 0.25), 0, 1)
        .map_err(|e| e.to_string())?
        .dense(2);
    let clamps = [
        (0, Vector3::new(0.1, 0.0, 0.0)),
        (1, Vector3::new(-0.05, 0.0866, 0.0)),
        (2, Vector3::new(-0.05, -0.0866, 0.0)),
    ];
    let platform = rigid_platform_equations(&clamps, 3)
        .map_err(|e| e.to_string())?
        .dense(4);
    let got = (
        rank_with_tol(&link, 1e-10),
        link.ncols(),
        rank_with_tol(&platform, 1e-10),
        platform.ncols(),
    );
    ensure(got == (12, 24, 24, 48), || format!("got {got:?}"))?;
    Ok(format!("link {}/{}, platform {}/{}", got.0, got.1, got.2, got.3))
}

fn joint_limits() -> Outcome {
    let stiff = JointStiffness::new(DMatrix::identity(6, 6) * 1e12, None).unwrap();
    let rigid_joint = kc(&two_beam_chain(|i, j| JointSpec::rigid(vec![i, j])))?;
    let elastic_joint = kc(&two_beam_chain(|i, j| {
        JointSpec::elastic(JointBasis::free(), stiff.clone(), i, j)
    }))?;
    let clamped = kc(&supported_beam(SupportKind::Rigid))?;
    let spring = kc(&supported_beam(SupportKind::Elastic(JointBasis::free(), stiff)))?;
    let joint_gap = rel_diff(&rigid_joint, &elastic_joint);
    let support_gap = rel_diff(&clamped, &spring);
    ensure(joint_gap <= 1e-3 && support_gap <= 1e-3, || {
        format!("joint {joint_gap:.2e}, support {support_gap:.2e}")
    })?;

    let basis = JointBasis::revolute(2);
    let model = supported_beam(SupportKind::Passive(basis.clone()));
    let s = analyze(&model)?;
    let s = s.stiffness();
    let dirs = &s.diagnostics.mechanism_directions;
    ensure(s.diagnostics.pseudo_inverse && dirs.len() == 1, || {
        format!("flag {}, {} null directions", s.diagnostics.pseudo_inverse, dirs.len())
    })?;
    let d = model.position(model.end_effector) - model.position(model.supports[0].node);
    let expected = (transport_matrix(&d).matrix() * basis.u_free()[0]).normalize();
    let got = dirs[0].normalize();
    let axis_gap = (got - expected).norm().min((got + expected).norm());
    ensure(axis_gap <= 1e-8, || format!("null direction off by {axis_gap:.2e}"))?;
    Ok(format!(
        "joint {joint_gap:.2e}, support {support_gap:.2e}, null direction {axis_gap:.2e}"
    ))
}

fn preload() -> Outcome {
    let zero = Vector6::zeros();
    let mut plain = preloaded_frame(zero);
    plain.joints[0].stiffness =
        Some(JointStiffness::new(plain.joints[0].stiffness.as_ref().unwrap().ke().clone(), None).unwrap());
    let a = assemble(&plain).map_err(|e| e.to_string())?;
    let b = assemble(&preloaded_frame(zero)).map_err(|e| e.to_string())?;
    let k = JointStiffness::new(DMatrix::from_diagonal_element(2, 2, 40.0), None).unwrap();
    let support = |k: JointStiffness| supported_beam(SupportKind::Elastic(JointBasis::universal(), k));
    let sa = assemble(&support(k.clone())).map_err(|e| e.to_string())?;
    let sb = assemble(&support(k.with_preload(zero).unwrap())).map_err(|e| e.to_string())?;
    let identical =
        a.to_dense() == b.to_dense() && a.rhs() == b.rhs() && sa.to_dense() == sb.to_dense() && sa.rhs() == sb.rhs();
    ensure(identical, || "zero preload changed the rows".into())?;

    let w0 = Vector6::new(120.0, -40.0, 10.0, 3.0, -2.0, 5.0);
    let model = preloaded_frame(w0);
    let state = analyze(&model)?.solve_loaded(&zero).map_err(|e| e.to_string())?;
    let p2 = model.node_index("p2").unwrap();
    let rest = state.end_deflection.amax();
    let projection_gap = (state.wrenches[p2] - w0).norm() / w0.norm();
    ensure(rest <= 1e-10 && projection_gap <= 1e-9, || {
        format!("end deflection {rest:.2e}, preload wrench gap {projection_gap:.2e}")
    })?;
    Ok(format!(
        "rows identical, end deflection {rest:.2e}, preload wrench gap {projection_gap:.2e}"
    ))
}

/// Preload-free models covering every element, joint and support kind.
fn suite(rng: &mut StdRng) -> Vec<(String, Model)> {
    let k = JointStiffness::scalar(2e3).unwrap();
    let mut models = vec![
        ("cantilever".to_string(), cantilever(0.8, tube(1.0))),
        (
            "passive joint".into(),
            two_beam_chain(|i, j| JointSpec::passive(JointBasis::spherical(), i, j)),
        ),
        (
            "elastic joint".into(),
            two_beam_chain(|i, j| JointSpec::elastic(JointBasis::revolute(1), k.clone(), i, j)),
        ),
        (
            "passive support".into(),
            supported_beam(SupportKind::Passive(JointBasis::revolute(2))),
        ),
        (
            "elastic support".into(),
            supported_beam(SupportKind::Elastic(JointBasis::revolute(2), k.clone())),
        ),
        ("navaro leg".into(), build_navaro_leg(&NavaroParams::default()).unwrap()),
        ("navaro".into(), build_navaro(&NavaroParams::default()).unwrap()),
        (
            "navaro flexible platform".into(),
            build_navaro(&NavaroParams {
                platform_stiffness_scale: Some(1e3),
                ..Default::default()
            })
            .unwrap(),
        ),
    ];
    for n in 0..10 {
        models.push((format!("chain {n}"), random_chain(rng, 2 + n % 5)));
    }
    models
}

fn equivariance_and_symmetry() -> Outcome {
    let mut rng = StdRng::seed_from_u64(77);
    let (mut worst_rot, mut worst_sym): (f64, f64) = (0.0, 0.0);
    for (name, model) in suite(&mut rng) {
        let a = analyze(&model).map_err(|e| format!("{name}: {e}"))?;
        let s = a.stiffness();
        worst_sym = worst_sym.max(s.diagnostics.asymmetry);
        let r = random_rotation(&mut rng);
        let q = q6(&r);
        let turned = kc(&model.rotated(&r).unwrap()).map_err(|e| format!("{name}: {e}"))?;
        let gap = rel_diff(&turned, &(q * s.kc * q.transpose()));
        ensure(gap <= 1e-8, || format!("{name}: rotation gap {gap:.2e}"))?;
        worst_rot = worst_rot.max(gap);
    }
    ensure(worst_sym <= 1e-8, || format!("asymmetry {worst_sym:.2e}"))?;
    Ok(format!("rotation gap {worst_rot:.2e}, asymmetry {worst_sym:.2e}"))
}

fn global_equilibrium() -> Outcome {
    let mut rng = StdRng::seed_from_u64(91);
    let mut models = suite(&mut rng);
    models.push((
        "preloaded frame".into(),
        preloaded_frame(Vector6::new(50.0, 20.0, -5.0, 1.0, 2.0, -0.5)),
    ));
    let mut worst: f64 = 0.0;
    let mut solved = 0;
    for (name, model) in models {
        let a = analyze(&model).map_err(|e| format!("{name}: {e}"))?;
        // a wrench in the range of Kc is always resisted
        let s = a.stiffness();
        let deflection = Vector6::new(1e-4, -2e-4, 3e-4, 1e-3, 2e-3, -1e-3);
        let mut w = s.kc * deflection;
        for d in &s.diagnostics.mechanism_directions {
            w -= d * d.dot(&w);
        }
        let state = a.solve_loaded(&w).map_err(|e| format!("{name}: {e}"))?;
        let (resultant, magnitude) = state.equilibrium_error(&model);
        let err = resultant / magnitude;
        ensure(err <= 1e-9, || format!("{name}: imbalance {err:.2e}"))?;
        worst = worst.max(err);
        solved += 1;
    }
    Ok(format!("{solved} models, worst imbalance {worst:.2e}"))
}

fn navaro_sanity() -> Outcome {
    let three = kc(&build_navaro(&NavaroParams::default()).unwrap())?;
    let two = kc(&build_navaro(&NavaroParams {
        legs: 2,
        ..Default::default()
    })
    .unwrap())?;
    let scale = three.norm();
    let sym = asymmetry(&three);
    let min3 = min_eigenvalue(&three) / scale;
    let min_diff = min_eigenvalue(&(three - two)) / scale;
    let q = q6(&leg_rotation(1));
    let turn = rel_diff(&(q * three * q.transpose()), &three);
    ensure(
        sym <= 1e-8 && min3 >= -1e-8 && min_diff >= -1e-8 && turn <= 1e-8,
        || format!("asymmetry {sym:.2e}, min eig {min3:.2e}, min eig of gain {min_diff:.2e}, 120 deg gap {turn:.2e}"),
    )?;
    Ok(format!(
        "min eig {min3:.2e}, min eig of gain {min_diff:.2e}, 120 deg gap {turn:.2e}"
    ))
}

struct Criterion {
    name: &'static str,
    run: fn() -> Outcome,
    budget: Option<Duration>,
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion {
            name: "navaro leg dimensions",
            run: leg_dimensions,
            budget: Some(secs(1)),
        },
        Criterion {
            name: "cantilever closed forms",
            run: cantilever_oracle,
            budget: Some(secs(1)),
        },
        Criterion {
            name: "oracle equivalence",
            run: oracle_equivalence,
            budget: Some(secs(10)),
        },
        Criterion {
            name: "rigid element rank",
            run: rank_claims,
            budget: None,
        },
        Criterion {
            name: "joint limits",
            run: joint_limits,
            budget: None,
        },
        Criterion {
            name: "preload",
            run: preload,
            budget: None,
        },
        Criterion {
            name: "equivariance and symmetry",
            run: equivariance_and_symmetry,
            budget: None,
        },
        Criterion {
            name: "global equilibrium",
            run: global_equilibrium,
            budget: None,
        },
        Criterion {
            name: "navaro robot",
            run: navaro_sanity,
            budget: Some(secs(5)),
        },
    ];
    let mut failed = 0;
    for (k, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!(
                "took {:.2} s, budget {:.0} s",
                elapsed.as_secs_f64(),
                b.as_secs_f64()
            )),
            (o, _) => o,
        };
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {}. {} ({detail}; {:.3} s)", k + 1, c.name, elapsed.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
