use woldkit::fixtures::{build_fixture, FixtureSpec};
use woldkit::wold::Classification;
use woldkit::{
    block_agreement, decompose_direct, decompose_recursive, max_principal_angle, Method, Status, SubsetLabel,
};

fn all_masks(n: usize) -> Vec<u32> {
    (0..1u32 << n).collect()
}

#[test]
fn direct_matches_oracle_on_full_three_coordinate_fixture() {
    let spec = FixtureSpec::random_with_labels(3, &all_masks(3), 11).scrambled(12);
    let (t, oracle) = build_fixture(&spec).unwrap();
    let cfg = spec.tolerances();
    let d = decompose_direct(&t, 3, &cfg).unwrap();
    assert_eq!(d.status, Status::Accepted);
    assert_eq!(d.dims(), oracle.block_dims);
    for (label, block) in &d.blocks {
        assert!(
            max_principal_angle(&block.space, &oracle.blocks[label]) < 1e-8,
            "{label}"
        );
        for c in &block.coordinates {
            let expected = if label.contains(c.coordinate) {
                Classification::Shift
            } else {
                Classification::Unitary
            };
            if block.dim() > 0 {
                assert_eq!(c.classification, expected, "{label} coordinate {}", c.coordinate);
            }
        }
    }
    assert!(d.residuals.orthogonality < 1e-8);
}

#[test]
fn recursive_agrees_with_direct() {
    for seed in 0..4 {
        let spec = FixtureSpec::random_with_labels(3, &all_masks(3), 100 + seed).scrambled(200 + seed);
        let (t, _) = build_fixture(&spec).unwrap();
        let cfg = spec.tolerances();
        let a = decompose_direct(&t, 3, &cfg).unwrap();
        let b = decompose_recursive(&t, 3, &cfg).unwrap();
        assert_eq!(b.method, Method::Recursive);
        assert_eq!(a.dims(), b.dims());
        for (label, angle) in block_agreement(&a, &b) {
            assert!(angle < 1e-8, "seed {seed} block {label}: {angle:e}");
        }
    }
}

#[test]
fn partial_depth_merges_blocks() {
    let spec = FixtureSpec::random_with_labels(3, &all_masks(3), 31).scrambled(32);
    let (t, oracle) = build_fixture(&spec).unwrap();
    let cfg = spec.tolerances();
    let shallow = decompose_direct(&t, 2, &cfg).unwrap();
    assert_eq!(shallow.dims(), oracle.block_dims_at_depth(2));
    let deep = decompose_direct(&t, 3, &cfg).unwrap();
    for (label, block) in &shallow.blocks {
        let mut members = label.members();
        let without = deep.block(&members).unwrap().space.clone();
        members.push(3);
        let with = deep.block(&members).unwrap().space.clone();
        let merged =
            woldkit::subspace::Subspace::orthonormalize(&side_by_side(without.frame(), with.frame()), &cfg).unwrap();
        assert_eq!(merged.dim(), block.dim());
        assert!(max_principal_angle(&merged, &block.space) < 1e-8, "{label}");
    }
}

fn side_by_side(a: &woldkit::CMatrix, b: &woldkit::CMatrix) -> woldkit::CMatrix {
    woldkit::CMatrix::from_fn(a.nrows(), a.ncols() + b.ncols(), |i, j| {
        if j < a.ncols() {
            a[(i, j)]
        } else {
            b[(i, j - a.ncols())]
        }
    })
}

#[test]
fn empty_label_on_all_unitary_tuple_is_everything() {
    let spec = FixtureSpec::random_with_labels(2, &[0], 5);
    let (t, _) = build_fixture(&spec).unwrap();
    for d in [
        decompose_direct(&t, 2, &spec.tolerances()).unwrap(),
        decompose_recursive(&t, 2, &spec.tolerances()).unwrap(),
    ] {
        assert_eq!(d.dims()[&SubsetLabel::empty(2)], t.dim());
    }
}

#[test]
fn singular_values_of_large_scrambled_coisometry_are_zero_or_one() {
    let spec = FixtureSpec::random_with_labels(3, &all_masks(3), 11).scrambled(12);
    let (t, oracle) = build_fixture(&spec).unwrap();
    let v = t.coordinate(1).matrix();
    let s = woldkit::linalg::singular_values(&v.adjoint());
    assert!(s.iter().all(|&x| x < 1e-12 || (x - 1.0).abs() < 1e-12), "{s:?}");
    assert_eq!(s.iter().filter(|&&x| x < 1e-12).count(), oracle.multiplicities[0]);
}
