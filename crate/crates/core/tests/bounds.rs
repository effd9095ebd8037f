mod common;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eigenclose::bounds::{
    discrete_eigenpairs, enclosure, expansion_residual, find_inversion, interpolation_error_b,
    interpolation_orthogonality, lower_bounds, pair_bounds, rayleigh_identity_residual, rayleigh_quotient,
    rayleigh_quotient_fn, square_modes, upper_bound_higher, upper_bound_lowest, ExactSolution, SmoothFn,
};
use eigenclose::elements::interpolate;
use eigenclose::solve::EigOptions;
use eigenclose::{build_mesh, CellKind, DomainKind, ElementKind, Error, FieldVector, Mesh};

fn square(cell: CellKind, n: usize) -> Mesh {
    build_mesh(DomainKind::UnitSquare, cell, n).unwrap()
}

#[test]
fn known_spectrum() {
    let got: Vec<f64> = square_modes(10).iter().map(|e| e.eigenvalue).collect();
    for (g, w) in got.iter().zip(common::square_spectrum(10)) {
        assert!((g - w).abs() < 1e-12);
    }
}

#[test]
fn analytic_rayleigh_quotient() {
    let m = square(CellKind::Rectangle, 8);
    let u = SmoothFn(
        |p: [f64; 2]| 2.0 * (PI * p[0]).sin() * (PI * p[1]).sin(),
        |p: [f64; 2]| {
            [
                2.0 * PI * (PI * p[0]).cos() * (PI * p[1]).sin(),
                2.0 * PI * (PI * p[0]).sin() * (PI * p[1]).cos(),
            ]
        },
    );
    let r = rayleigh_quotient_fn(&u, &m).unwrap();
    assert!((r - 2.0 * PI * PI).abs() < 1e-10);
}

#[test]
fn conforming_eigenvector_quotient_and_scaling() {
    let m = square(CellKind::Triangle, 8);
    let res = discrete_eigenpairs(&m, ElementKind::P1, 3, &EigOptions::default()).unwrap();
    for j in 0..3 {
        let f = res.field(j).unwrap();
        let r = rayleigh_quotient(&f, &m).unwrap();
        assert!(common::rel(r, res.eigenvalues[j]) < 1e-10);
        let r2 = rayleigh_quotient(&f.scaled(-3.5), &m).unwrap();
        assert!(common::rel(r2, r) < 1e-13);
    }
    let zero = FieldVector::new(ElementKind::P1, vec![0.0; res.eigenvectors[0].len()]);
    assert!(matches!(rayleigh_quotient(&zero, &m), Err(Error::ZeroField)));
}

#[test]
fn conforming_pair_reproduces_itself() {
    let m = square(CellKind::Rectangle, 8);
    let res = discrete_eigenpairs(&m, ElementKind::Q1, 4, &EigOptions::default()).unwrap();
    let up = upper_bound_lowest(&res, ElementKind::Q1, &m).unwrap();
    for (u, l) in up.values.iter().zip(&res.eigenvalues) {
        assert!(common::rel(*u, *l) < 1e-9);
    }
}

#[test]
fn single_source_higher_equals_lowest() {
    let m = square(CellKind::Rectangle, 8);
    let nc = lower_bounds(&m, ElementKind::Eq1Rot, 1, &EigOptions::default()).unwrap();
    let low = upper_bound_lowest(&nc, ElementKind::Q2, &m).unwrap();
    let high = upper_bound_higher(&nc, ElementKind::Q2, &m, 1).unwrap();
    assert!(common::rel(low.values[0], high.values[0]) < 1e-12);
}

#[test]
fn conforming_kind_rejected_for_lower_bounds() {
    let m = square(CellKind::Rectangle, 4);
    assert!(lower_bounds(&m, ElementKind::Q1, 1, &EigOptions::default()).is_err());
}

#[test]
fn expansion_identity_three_choices() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for kind in [ElementKind::Eq1Rot, ElementKind::Ecr] {
        let m = square(kind.cell_kind(), 8);
        let nc = lower_bounds(&m, kind, 6, &EigOptions::default()).unwrap();
        for j in 0..6 {
            let exact = ExactSolution::nth(DomainKind::UnitSquare, j).unwrap();
            let uh = nc.field(j).unwrap();
            let pi = interpolate(&m, kind, |p| eigenclose::bounds::ScalarField::value(&exact, p)).unwrap();
            let rnd = FieldVector::new(kind, (0..uh.len()).map(|_| rng.random_range(-1.0..1.0)).collect());
            for (name, v) in [("u_h", uh), ("interpolant", pi), ("random", rnd)] {
                let r = expansion_residual(&exact, &nc, j, &v, &m).unwrap();
                assert!(r <= 1e-6, "{kind} j={j} {name}: {r}");
            }
        }
    }
}

#[test]
fn rayleigh_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for (cell, kind) in [(CellKind::Rectangle, ElementKind::Q1), (CellKind::Triangle, ElementKind::P2)] {
        let m = square(cell, 8);
        let res = discrete_eigenpairs(&m, kind, 6, &EigOptions::default()).unwrap();
        for j in 0..6 {
            let exact = ExactSolution::nth(DomainKind::UnitSquare, j).unwrap();
            let w = interpolate(&m, kind, |p| eigenclose::bounds::ScalarField::value(&exact, p)).unwrap();
            assert!(rayleigh_identity_residual(&w, &exact, &m).unwrap() <= 1e-6);
            let eps = 1e-3;
            let bumped = FieldVector::new(
                kind,
                w.coeffs.iter().map(|c| c + eps * rng.random_range(-1.0..1.0)).collect(),
            );
            assert!(rayleigh_identity_residual(&bumped, &exact, &m).unwrap() <= 1e-6);
            let eig = res.field(j).unwrap();
            assert!(rayleigh_identity_residual(&eig, &exact, &m).unwrap() <= 1e-6);
        }
    }
}

#[test]
fn interpolation_orthogonality_sine() {
    let u = ExactSolution::square(1, 1);
    for kind in [ElementKind::Eq1Rot, ElementKind::Ecr] {
        let m = square(kind.cell_kind(), 8);
        let r = interpolation_orthogonality(&m, kind, &u).unwrap();
        assert!(r.abs() <= 1e-8, "{kind}: {r}");
    }
}

#[test]
fn interpolation_orthogonality_random() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..5 {
        let u = common::RandomSmooth::new(&mut rng);
        for kind in [ElementKind::Eq1Rot, ElementKind::Ecr] {
            let m = build_mesh(DomainKind::LShape, kind.cell_kind(), 4).unwrap();
            let r = interpolation_orthogonality(&m, kind, &u).unwrap();
            assert!(r.abs() <= 1e-8, "{kind}: {r}");
        }
    }
}

#[test]
fn interpolation_error_rate() {
    let u = ExactSolution::square(1, 1);
    let hs = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0];
    let errs: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&n| interpolation_error_b(&square(CellKind::Rectangle, n), ElementKind::Eq1Rot, &u).unwrap())
        .collect();
    let r = common::slope(&hs, &errs);
    assert!((r - 2.0).abs() <= 0.2, "{r}");
}

#[test]
fn bound_directions_coarse_square() {
    let exact = common::square_spectrum(6);
    for kind in [ElementKind::Eq1Rot, ElementKind::Ecr] {
        for n in [8, 16] {
            let m = square(kind.cell_kind(), n);
            let nc = lower_bounds(&m, kind, 6, &EigOptions::default()).unwrap();
            let low = upper_bound_lowest(&nc, kind.lowest_conforming(), &m).unwrap();
            let high = upper_bound_higher(&nc, kind.higher_conforming(), &m, 6).unwrap();
            for (j, l) in exact.iter().enumerate() {
                assert!(nc.eigenvalues[j] <= *l, "{kind} n={n} j={j}");
                assert!(low.values[j] >= *l, "{kind} n={n} j={j}");
                assert!(high.values[j] >= *l, "{kind} n={n} j={j}");
            }
            assert!(enclosure(&nc, Some(&low.values), Some(&high.values)).is_ok());
        }
    }
}

#[test]
fn enclosure_pairs_and_widths() {
    let rows = pair_bounds(&[19.530807], Some(&[20.506335]), Some(&[19.743647]));
    let r = &rows[0];
    let l = 2.0 * PI * PI;
    assert!(r.lower <= l && l <= r.upper_lowest.unwrap() && l <= r.upper_higher.unwrap());
    assert!((r.width.unwrap() - 0.21284).abs() < 1e-5);
    let same = pair_bounds(&[5.0, 7.0], Some(&[5.0, 7.0]), None);
    assert!(same.iter().all(|r| r.width == Some(0.0)));
    let lower_only = pair_bounds(&[5.0], None, None);
    assert_eq!(lower_only[0].width, None);
}

#[test]
fn inversion_is_flagged() {
    let rows = pair_bounds(&[5.0, 7.0], Some(&[5.5, 6.0]), None);
    match find_inversion(&rows) {
        Some(Error::BoundInversion { j, .. }) => assert_eq!(j, 2),
        other => panic!("{other:?}"),
    }
    // within the slack it is not an inversion
    let rows = pair_bounds(&[5.0], Some(&[5.0 - 1e-12]), None);
    assert!(find_inversion(&rows).is_none());
}

#[test]
fn higher_scheme_needs_enough_pairs() {
    let m = square(CellKind::Rectangle, 4);
    let nc = lower_bounds(&m, ElementKind::Eq1Rot, 2, &EigOptions::default()).unwrap();
    assert!(matches!(
        upper_bound_higher(&nc, ElementKind::Q2, &m, 3),
        Err(Error::TooManyEigenpairs { .. })
    ));
}
