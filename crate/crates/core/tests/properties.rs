use proptest::prelude::*;
use woldkit::fixtures::{build_fixture, random_unitary, FixtureSpec};
use woldkit::{
    defect_report, intersect, max_principal_angle, orth_complement, projector, subspace_minus, CMatrix, Subspace,
    ToleranceConfig, C64,
};

fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

/// A `dim`-dimensional subspace of `C^n` spanned by the first columns of a seeded unitary.
fn random_subspace(n: usize, dim: usize, seed: u64) -> Subspace {
    let q = random_unitary(n, seed);
    Subspace::from_orthonormal_frame(q.matrix().columns(0, dim).into_owned()).unwrap()
}

fn arb_subspace() -> impl Strategy<Value = Subspace> {
    (1usize..9, any::<u64>()).prop_flat_map(|(n, seed)| (0..=n).prop_map(move |d| random_subspace(n, d, seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn complement_has_complementary_dimension(s in arb_subspace()) {
        let c = orth_complement(&s);
        prop_assert_eq!(c.dim() + s.dim(), s.ambient_dim());
        let cross = s.frame().adjoint() * c.frame();
        prop_assert!(cross.norm() < 1e-12);
        let back = orth_complement(&c);
        prop_assert!(max_principal_angle(&back, &s) < 1e-10);
    }

    #[test]
    fn projector_is_a_self_adjoint_idempotent(s in arb_subspace()) {
        let p = projector(&s);
        let m = p.matrix();
        prop_assert!((m * m - m).norm() < 1e-12);
        prop_assert!((m.adjoint() - m).norm() < 1e-14);
        let trace: C64 = m.trace();
        prop_assert!((trace.re - s.dim() as f64).abs() < 1e-12);
    }

    #[test]
    fn intersection_is_idempotent_and_contained(s in arb_subspace(), seed in any::<u64>()) {
        let n = s.ambient_dim();
        let other = random_subspace(n, n.div_ceil(2), seed);
        let me = intersect(&[s.clone(), s.clone()], &cfg()).unwrap();
        prop_assert!(max_principal_angle(&me, &s) < 1e-10);
        let both = intersect(&[s.clone(), other.clone()], &cfg()).unwrap();
        prop_assert_eq!(both.dim(), (s.dim() + other.dim()).saturating_sub(n));
    }

    #[test]
    fn subtracting_a_subspace_leaves_its_complement_inside(s in arb_subspace(), k in 0usize..9) {
        let k = k.min(s.dim());
        let inner = Subspace::from_orthonormal_frame(s.frame().columns(0, k).into_owned()).unwrap();
        let rest = subspace_minus(&s, &inner, &cfg()).unwrap();
        prop_assert_eq!(rest.dim(), s.dim() - k);
        prop_assert!((rest.frame().adjoint() * inner.frame()).norm() < 1e-12);
    }

    #[test]
    fn defects_are_invariant_under_unitary_conjugation(seed in 0u64..1000, scramble in any::<u64>()) {
        let masks = [0u32, 1, 2, 3];
        let spec = FixtureSpec::random_with_labels(2, &masks[..1 + (seed as usize % 4)], seed);
        let (t, _) = build_fixture(&spec).unwrap();
        let q = random_unitary(t.dim(), scramble);
        let moved = t.conjugated_by(&q).unwrap();
        let a = defect_report(t.operators(), t.interior());
        let b = defect_report(moved.operators(), moved.interior());
        for (x, y) in a.isometry_defect.iter().zip(&b.isometry_defect) {
            prop_assert!((x - y).abs() < 1e-10);
        }
        prop_assert!((a.double_commutation_defect - b.double_commutation_defect).abs() < 1e-10);
        prop_assert!(b.double_commutation_defect < 1e-12);
    }
}

#[test]
fn coordinate_frames_are_exact() {
    let s = Subspace::coordinate(4, &[1, 3]);
    let expected = CMatrix::from_fn(4, 2, |i, j| C64::new(f64::from(u8::from(i == 2 * j + 1)), 0.0));
    assert_eq!(s.frame(), &expected);
}
