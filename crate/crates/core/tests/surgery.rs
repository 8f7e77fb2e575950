use bose2d::scattering::{scattering_length, RadialPotential, Segment, SegmentKind};
use bose2d::surgery::{cap_integral, cutoff_range, ConstructionCase, DeltaChoice};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn zoo() -> Vec<(&'static str, RadialPotential)> {
    let seg = |lo: f64, hi: f64, kind: SegmentKind| Segment { r_lo: lo, r_hi: hi, kind };
    let shell = RadialPotential::new(vec![
        seg(0.0, 1.0, SegmentKind::Hardcore),
        seg(1.0, 2.0, SegmentKind::Const { value: 1.0 }),
    ])
    .unwrap();
    let const_shell = RadialPotential::new(vec![
        seg(0.0, 0.1, SegmentKind::Const { value: 0.0 }),
        seg(0.1, 1.0, SegmentKind::Const { value: 100.0 }),
    ])
    .unwrap();
    let inverse_r = RadialPotential::tabulated(|r| 8.0 / r, 0.5, 1.0, 50).unwrap();
    let mut yukawa = RadialPotential::tabulated(|r| 5.0 * (-2.0 * r).exp() / r, 0.2, 3.0, 60).unwrap();
    yukawa.segments[0].kind = SegmentKind::Hardcore;
    let yukawa = RadialPotential::new(yukawa.segments).unwrap();
    vec![
        ("hard disk", RadialPotential::hard_disk(1.0).unwrap()),
        ("soft disk", RadialPotential::soft_disk(4.0, 1.0).unwrap()),
        ("core + shell", shell),
        ("constant shell", const_shell),
        ("8/r table", inverse_r),
        ("cored yukawa", yukawa),
    ]
}

#[test]
fn cutoff_beyond_support_is_equality() {
    let v = RadialPotential::soft_disk(4.0, 1.0).unwrap();
    let (cut, rep) = cutoff_range(&v, 2.0, 50.0).unwrap();
    assert_eq!(cut, v);
    assert_eq!(rep.bound_lhs, rep.bound_rhs);
    assert!(rep.certified);
}

#[test]
fn core_shell_cutoff_has_positive_slack() {
    let (_, v) = zoo().into_iter().nth(2).unwrap();
    let (_, rep) = cutoff_range(&v, 1.5, 100.0).unwrap();
    assert!(rep.certified);
    assert!(rep.bound_lhs > rep.bound_rhs);
    assert!(rep.modified_a < rep.original_a);
}

#[test]
fn nested_cuts_are_ordered() {
    let (_, v) = zoo().into_iter().nth(2).unwrap();
    let a12 = cutoff_range(&v, 1.2, 100.0).unwrap().1.modified_a;
    let a18 = cutoff_range(&v, 1.8, 100.0).unwrap().1.modified_a;
    let a = scattering_length(&v, 100.0).unwrap().a;
    assert!(a12 <= a18 && a18 <= a);
}

#[test]
fn cutting_to_nothing_is_degenerate() {
    let (_, v) = zoo().into_iter().nth(3).unwrap();
    assert!(cutoff_range(&v, 0.05, 10.0).is_err());
}

#[test]
fn cap_exact_budget_keeps_potential() {
    let v = RadialPotential::soft_disk(4.0, 1.0).unwrap();
    let (w, rep) = cap_integral(&v, 1.0, DeltaChoice::default(), 50.0).unwrap();
    assert_eq!(w, v);
    assert!((rep.modified_integral - 4.0 * PI).abs() < 1e-12);
    assert!(rep.certified);
}

#[test]
fn cap_integrable_within_budget_is_identity() {
    let (_, v) = zoo().into_iter().nth(4).unwrap();
    let (w, rep) = cap_integral(&v, 3.0, DeltaChoice::default(), 10.0).unwrap();
    assert_eq!(w, v);
    assert_eq!(rep.construction_case, ConstructionCase::CapCase2Shave);
    assert!(rep.parameters.tau.is_none());
    assert!(rep.certified);
}

#[test]
fn cap_constant_shell_takes_the_tail() {
    let (_, v) = zoo().into_iter().nth(3).unwrap();
    let (w, rep) = cap_integral(&v, 2.0, DeltaChoice::default(), 30.0).unwrap();
    assert_eq!(rep.construction_case, ConstructionCase::CapCase1Tail);
    assert!((rep.modified_integral - 8.0 * PI).abs() < 1e-9);
    assert!(rep.certified, "{rep:?}");
    let (phi_s, bound) = rep.profile_check.unwrap();
    assert!(phi_s <= bound);
    assert!(w.eval(rep.parameters.s_or_t * 0.99) == 0.0);
}

#[test]
fn cap_hard_disk_shaves_the_core() {
    let v = RadialPotential::hard_disk(1.0).unwrap();
    let (w, rep) = cap_integral(&v, 0.7, DeltaChoice::Value(0.4), 20.0).unwrap();
    assert_eq!(rep.construction_case, ConstructionCase::CapCase2Shave);
    let tau = rep.parameters.tau.unwrap();
    // ∫_{0.6}^{1} r τ dr = 2φ
    assert!((tau * (1.0 - 0.36) / 2.0 - 1.4).abs() < 1e-10);
    assert_eq!(w.eval(0.5), 0.0);
    assert!((w.eval(0.8) - tau).abs() < 1e-12);
    assert!(rep.certified);
}

fn check_dominated(v: &RadialPotential, w: &RadialPotential) {
    let r0 = v.range();
    for i in 0..=2000 {
        let r = r0 * 1.1 * i as f64 / 2000.0;
        let (a, b) = (w.eval(r), v.eval(r));
        assert!(a >= 0.0 && a <= b * (1.0 + 1e-13), "r = {r}: {a} > {b}");
    }
}

#[test]
fn randomized_zoo_certifies_both_lemmas() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for (name, v) in zoo() {
        let r0 = v.range();
        for _ in 0..20 {
            let phi = 10f64.powf(rng.gen_range(-1.3..1.7));
            let delta = rng.gen_range(0.05..0.95);
            let r = r0 * 10f64.powf(rng.gen_range(0.2..3.0));
            let (w, rep) = cap_integral(&v, phi, DeltaChoice::Value(delta), r).unwrap();
            assert!(rep.certified, "{name}: {rep:?}");
            assert!(rep.modified_integral <= 4.0 * PI * phi * (1.0 + 1e-10));
            check_dominated(&v, &w);

            let cut = rng.gen_range(0.05 * r0..r0);
            if v.truncate(cut).unwrap().is_zero() {
                continue;
            }
            let (c, rep) = cutoff_range(&v, cut, r).unwrap();
            assert!(rep.certified, "{name}: {rep:?}");
            check_dominated(&v, &c);
        }
    }
}
