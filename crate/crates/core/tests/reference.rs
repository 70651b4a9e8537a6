mod common;

use nalgebra::{Matrix6, SymmetricEigen};

use common::*;
use msa_stiffness::assembly::{assemble, Analysis, RowSource};
use msa_stiffness::equations::RowClass;
use msa_stiffness::reference::navaro::{leg_rotation, LEG_NODES};
use msa_stiffness::reference::{build_navaro, build_navaro_leg, NavaroParams};

fn kc(p: &NavaroParams) -> Matrix6<f64> {
    Analysis::from_model(&build_navaro(p).unwrap()).unwrap().stiffness().kc
}

fn min_eigenvalue(m: &Matrix6<f64>) -> f64 {
    SymmetricEigen::new((m + m.transpose()) * 0.5).eigenvalues.min()
}

#[test]
fn leg_joint_rows_follow_the_connection_list() {
    let model = build_navaro_leg(&NavaroParams::default()).unwrap();
    assert_eq!(model.node_count(), LEG_NODES.len());
    let system = assemble(&model).unwrap();
    let rows = |src: RowSource| system.blocks().iter().find(|b| b.source == src).unwrap().block.clone();
    // revolute <2,3>: 5 compatibility, 5 equilibrium, 1 + 1 free-effort rows
    let j23 = rows(RowSource::Joint(0));
    let count =
        |b: &msa_stiffness::equations::EquationBlock, c: RowClass| b.classes().iter().filter(|&&x| x == c).count();
    assert_eq!(j23.rows(), 12);
    assert_eq!(count(&j23, RowClass::Compatibility), 5);
    assert_eq!(count(&j23, RowClass::Equilibrium), 7);
    // compound <6,7> with 9 welded to 6: 5 + 6 compatibility, 5 + 1 + 1 wrench rows
    let j679 = rows(RowSource::Joint(2));
    assert_eq!(j679.rows(), 18);
    assert_eq!(count(&j679, RowClass::Compatibility), 11);
    assert_eq!(count(&j679, RowClass::Equilibrium), 7);
    // motor: 5 compatibility rows and one Hooke row
    let motor = rows(RowSource::Support(1));
    assert_eq!(count(&motor, RowClass::Compatibility), 5);
    assert_eq!(count(&motor, RowClass::Hooke), 1);
}

#[test]
fn robot_stiffness_is_symmetric_positive_and_rotation_invariant() {
    let k = kc(&NavaroParams::default());
    assert!(asymmetry(&k) <= 1e-8);
    assert!(min_eigenvalue(&k) > 0.0);
    let q = q6(&leg_rotation(1));
    assert!(rel_diff(&(q * k * q.transpose()), &k) <= 1e-8);
}

#[test]
fn a_third_leg_only_adds_stiffness() {
    let three = kc(&NavaroParams::default());
    let two = Analysis::from_model(
        &build_navaro(&NavaroParams {
            legs: 2,
            ..Default::default()
        })
        .unwrap(),
    )
    .unwrap();
    let two = two.stiffness();
    let diff = three - two.kc;
    assert!(min_eigenvalue(&diff) >= -1e-8 * three.norm());
}

#[test]
fn stiff_virtual_platform_matches_rigid_platform() {
    let rigid = kc(&NavaroParams::default());
    let gap = |scale: f64| {
        rel_diff(
            &rigid,
            &kc(&NavaroParams {
                platform_stiffness_scale: Some(scale),
                ..Default::default()
            }),
        )
    };
    // the gap closes in proportion to the virtual link stiffness
    let (near, nearer, stiff) = (gap(1e3), gap(1e4), gap(1e6));
    assert!(nearer < 0.2 * near);
    assert!(stiff < 0.2 * nearer);
    assert!(stiff < 1e-3);
    let soft = kc(&NavaroParams {
        platform_stiffness_scale: Some(1e-2),
        ..Default::default()
    });
    assert!(rel_diff(&rigid, &soft) > 1e-3);
}

#[test]
fn motor_stiffness_raises_platform_rotation_stiffness() {
    let values: Vec<f64> = [1e3, 1e4, 1e5]
        .iter()
        .map(|&k| {
            kc(&NavaroParams {
                motor_stiffness: k,
                ..Default::default()
            })[(5, 5)]
        })
        .collect();
    assert!(values[0] < values[1] && values[1] < values[2], "{values:?}");
}

#[test]
fn robot_rotates_with_its_frame() {
    let model = build_navaro(&NavaroParams::default()).unwrap();
    let mut rng = <rand::rngs::StdRng as rand::SeedableRng>::seed_from_u64(3);
    let r = random_rotation(&mut rng);
    let q = q6(&r);
    let k = Analysis::from_model(&model).unwrap().stiffness().kc;
    let kr = Analysis::from_model(&model.rotated(&r).unwrap())
        .unwrap()
        .stiffness()
        .kc;
    assert!(rel_diff(&kr, &(q * k * q.transpose())) <= 1e-8);
}
