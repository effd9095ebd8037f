mod common;

use eigenclose::bounds::DiscreteField;
use eigenclose::elements::{
    dof_map, interpolate_global, interpolate_nc, local_matrices, CellBasis, DofLayout, ALL_KINDS,
};
use eigenclose::{build_mesh, CellKind, DomainKind, ElementKind};

fn ref_cell(kind: CellKind) -> Vec<[f64; 2]> {
    match kind {
        CellKind::Triangle => vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        CellKind::Rectangle => vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
    }
}

fn skewed_cell(kind: CellKind) -> Vec<[f64; 2]> {
    match kind {
        CellKind::Triangle => vec![[0.2, -0.1], [1.3, 0.25], [0.4, 0.8]],
        CellKind::Rectangle => vec![[0.5, 0.25], [0.75, 0.25], [0.75, 0.625], [0.5, 0.625]],
    }
}

#[test]
fn p1_lagrange_at_origin() {
    let b = CellBasis::new(ElementKind::P1, &ref_cell(CellKind::Triangle)).unwrap();
    let mut v = vec![0.0; 3];
    b.values([0.0, 0.0], &mut v);
    for (got, want) in v.iter().zip([1.0, 0.0, 0.0]) {
        assert!((got - want).abs() < 1e-14);
    }
}

#[test]
fn partition_of_unity() {
    for kind in ALL_KINDS {
        let verts = skewed_cell(kind.cell_kind());
        let b = CellBasis::new(kind, &verts).unwrap();
        let mut v = vec![0.0; b.dim()];
        for p in [[0.5, 0.3], [0.6, 0.5], [0.7, 0.6]] {
            b.values(p, &mut v);
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12, "{kind}");
        }
    }
}

#[test]
fn unisolvence_all_kinds() {
    for kind in ALL_KINDS {
        for verts in [ref_cell(kind.cell_kind()), skewed_cell(kind.cell_kind())] {
            let b = CellBasis::new(kind, &verts).unwrap();
            assert!(b.unisolvence_error(&verts) < 1e-12, "{kind}");
        }
    }
}

// Hand solve on the reference triangle: with q = (x-1/3)² + (y-1/3)² every
// edge mean of q is 2/9 and the cell mean is 1/9, so the function dual to the
// cell mean is 2 - 9q.
#[test]
fn ecr_cell_function_golden() {
    let verts = ref_cell(CellKind::Triangle);
    let b = CellBasis::new(ElementKind::Ecr, &verts).unwrap();
    let mut v = vec![0.0; 4];
    let cell_fn = |x: f64, y: f64| {
        let mut v = vec![0.0; 4];
        b.values([x, y], &mut v);
        v[3]
    };
    for p in [[1.0 / 3.0, 1.0 / 3.0], [0.1, 0.2], [0.5, 0.5], [0.0, 0.0]] {
        b.values(p, &mut v);
        let q = (p[0] - 1.0 / 3.0).powi(2) + (p[1] - 1.0 / 3.0).powi(2);
        assert!((v[3] - (2.0 - 9.0 * q)).abs() < 1e-12);
    }
    for k in 0..3 {
        let m = common::edge_mean(verts[k], verts[(k + 1) % 3], 4, cell_fn);
        assert!(m.abs() < 1e-13, "edge {k}: {m}");
    }
    let mean = common::triangle_integral([verts[0], verts[1], verts[2]], 4, cell_fn) / 0.5;
    assert!((mean - 1.0).abs() < 1e-13);
}

#[test]
fn q1_square_entries() {
    let h = 0.25;
    let verts = [[0.0, 0.0], [h, 0.0], [h, h], [0.0, h]];
    let lm = local_matrices(ElementKind::Q1, &verts).unwrap();
    for i in 0..4 {
        assert!((lm.mass[i * 4 + i] - h * h / 9.0).abs() < 1e-15);
        assert!((lm.stiffness[i * 4 + i] - 2.0 / 3.0).abs() < 1e-13);
    }
}

#[test]
fn p1_reference_stiffness() {
    let lm = local_matrices(ElementKind::P1, &ref_cell(CellKind::Triangle)).unwrap();
    let want = [1.0, -0.5, -0.5, -0.5, 0.5, 0.0, -0.5, 0.0, 0.5];
    for (g, w) in lm.stiffness.iter().zip(want) {
        assert!((g - w).abs() < 1e-13);
    }
}

#[test]
fn local_matrix_structure() {
    for kind in ALL_KINDS {
        let lm = local_matrices(kind, &skewed_cell(kind.cell_kind())).unwrap();
        let n = lm.dim;
        for i in 0..n {
            let row: f64 = (0..n).map(|j| lm.stiffness[i * n + j]).sum();
            assert!(row.abs() < 1e-11, "{kind} row {i}: {row}");
            for j in 0..n {
                assert!((lm.stiffness[i * n + j] - lm.stiffness[j * n + i]).abs() < 1e-13);
                assert!((lm.mass[i * n + j] - lm.mass[j * n + i]).abs() < 1e-15);
            }
        }
        let ks = common::jacobi_eigenvalues(n, &lm.stiffness);
        let scale = ks[n - 1];
        assert!(ks[0].abs() < 1e-10 * scale, "{kind}: kernel {}", ks[0]);
        assert!(ks[1] > 1e-6 * scale, "{kind}: kernel dimension above one");
        let ms = common::jacobi_eigenvalues(n, &lm.mass);
        assert!(ms[0] > 0.0, "{kind}: mass not SPD");
    }
}

#[test]
fn degenerate_cell_rejected() {
    let flat = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
    assert!(local_matrices(ElementKind::P1, &flat).is_err());
}

#[test]
fn global_dof_totals() {
    let m = build_mesh(DomainKind::UnitSquare, CellKind::Rectangle, 8).unwrap();
    assert_eq!(DofLayout::new(&m, ElementKind::Eq1Rot).unwrap().total(), 208);
    let m = build_mesh(DomainKind::UnitSquare, CellKind::Triangle, 2).unwrap();
    assert_eq!(DofLayout::new(&m, ElementKind::P2).unwrap().total(), 25);
}

#[test]
fn shared_edges_share_dofs() {
    for (cell, kind) in [(CellKind::Rectangle, ElementKind::Eq1Rot), (CellKind::Triangle, ElementKind::Ecr)] {
        let m = build_mesh(DomainKind::LShape, cell, 4).unwrap();
        let ne = m.edges().len();
        for e in 0..ne {
            let owners: Vec<usize> = (0..m.num_cells())
                .filter(|&c| m.cell_edge_ids(c).contains(&e))
                .collect();
            let ids: Vec<usize> = owners
                .iter()
                .map(|&c| {
                    let k = m.cell_edge_ids(c).iter().position(|&x| x == e).unwrap();
                    dof_map(kind, &m, c).unwrap()[k]
                })
                .collect();
            assert!(ids.windows(2).all(|w| w[0] == w[1]));
        }
    }
}

#[test]
fn kind_mismatch_rejected() {
    let m = build_mesh(DomainKind::UnitSquare, CellKind::Triangle, 2).unwrap();
    assert!(DofLayout::new(&m, ElementKind::Q1).is_err());
}

#[test]
fn interpolation_reproduces_local_space() {
    type F = fn(f64, f64) -> f64;
    let common: F = |x, y| 1.0 + x - 2.0 * y;
    let cases: Vec<(ElementKind, F)> = vec![
        (ElementKind::P1, common),
        (ElementKind::Q1, |x, y| 0.5 + x * y),
        (ElementKind::P2, |x, y| x * y - y * y),
        (ElementKind::Q2, |x, y| x * x * y * y + x),
        (ElementKind::Ecr, |x, y| x * x + y * y - x),
        (ElementKind::EcrMidpoint, |x, y| x * x + y * y + y),
        (ElementKind::Eq1Rot, |x, y| x * x - 2.0 * y * y),
        (ElementKind::Eq1RotMidpoint, |x, y| 3.0 * x * x + y),
    ];
    for (kind, u) in cases {
        for domain in [DomainKind::UnitSquare, DomainKind::LShape] {
            let m = build_mesh(domain, kind.cell_kind(), 4).unwrap();
            let g = interpolate_global(&m, kind, |p| u(p[0], p[1])).unwrap();
            let f = DiscreteField::from_global(&m, kind, g).unwrap();
            for c in (0..m.num_cells()).step_by(5) {
                let p = m.cell_center(c);
                let q = m.cell_vertices(c)[0];
                for x in [p, [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]] {
                    let (v, _) = f.eval(c, x);
                    assert!((v - u(x[0], x[1])).abs() < 1e-11, "{kind}");
                }
            }
        }
    }
}

#[test]
fn nc_interpolant_matches_means() {
    let m = build_mesh(DomainKind::UnitSquare, CellKind::Rectangle, 4).unwrap();
    let u = |x: f64, y: f64| (3.0 * x).sin() * (2.0 * y).cos();
    let g = interpolate_global(&m, ElementKind::Eq1Rot, |p| u(p[0], p[1])).unwrap();
    let f = DiscreteField::from_global(&m, ElementKind::Eq1Rot, g).unwrap();
    for c in 0..m.num_cells() {
        let v = m.cell_vertices(c);
        let fv = |x: f64, y: f64| f.eval(c, [x, y]).0;
        for k in 0..4 {
            let (p, q) = (v[k], v[(k + 1) % 4]);
            let a = common::edge_mean(p, q, 6, fv);
            let b = common::edge_mean(p, q, 6, u);
            assert!((a - b).abs() < 1e-12);
        }
        let (x0, x1, y0, y1) = (v[0][0], v[2][0], v[0][1], v[2][1]);
        let a = common::box_integral(x0, x1, y0, y1, 6, fv);
        let b = common::box_integral(x0, x1, y0, y1, 6, u);
        assert!((a - b).abs() < 1e-13);
    }
    assert!(interpolate_nc(ElementKind::Q1, &m, |_| 0.0).is_err());
}
