//! Quadrature on the reference triangle `{(0,0),(1,0),(0,1)}` and the
//! reference square `[0,1]²`.

use crate::error::{Error, Result};
use crate::mesh::{CellKind, Mesh};

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub cell_kind: CellKind,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Gauss-Legendre nodes and weights on `[0,1]`.
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(k >= 1);
    let mut xs = vec![0.0; k];
    let mut ws = vec![0.0; k];
    for i in 0..k.div_ceil(2) {
        // Newton on P_k from the Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(k, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(k, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[i] = 0.5 * (1.0 - x);
        xs[k - 1 - i] = 0.5 * (1.0 + x);
        ws[i] = 0.5 * w;
        ws[k - 1 - i] = 0.5 * w;
    }
    (xs, ws)
}

// (P_k(x), P_k'(x)) by the three-term recurrence
fn legendre(k: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if k == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=k {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = k as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fixed rules of degree up to 8; the returned rule has `exact_degree >= degree`.
pub fn rule_for(cell_kind: CellKind, degree: usize) -> Result<QuadratureRule> {
    if degree > 8 {
        return Err(Error::UnsupportedDegree(degree, cell_kind));
    }
    Ok(match cell_kind {
        CellKind::Rectangle => tensor_gauss((degree + 2) / 2),
        CellKind::Triangle => match degree {
            0 | 1 => QuadratureRule {
                cell_kind,
                points: vec![[1.0 / 3.0, 1.0 / 3.0]],
                weights: vec![0.5],
                exact_degree: 1,
            },
            2 => QuadratureRule {
                cell_kind,
                points: vec![[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]],
                weights: vec![1.0 / 6.0; 3],
                exact_degree: 2,
            },
            3 | 4 => strang_fix_six(),
            5 => radon_seven(),
            _ => collapsed_gauss((degree + 3) / 2),
        },
    })
}

/// Positive-weight rule of arbitrary degree, for integrands that are not
/// polynomials (diagnostics against analytic eigenfunctions).
pub fn high_order_rule(cell_kind: CellKind, degree: usize) -> QuadratureRule {
    match cell_kind {
        CellKind::Rectangle => tensor_gauss((degree + 2) / 2),
        CellKind::Triangle => collapsed_gauss((degree + 3) / 2),
    }
}

fn tensor_gauss(k: usize) -> QuadratureRule {
    let (xs, ws) = gauss_legendre(k.max(1));
    let mut points = Vec::with_capacity(xs.len() * xs.len());
    let mut weights = Vec::with_capacity(xs.len() * xs.len());
    for (&y, &wy) in xs.iter().zip(&ws) {
        for (&x, &wx) in xs.iter().zip(&ws) {
            points.push([x, y]);
            weights.push(wx * wy);
        }
    }
    QuadratureRule {
        cell_kind: CellKind::Rectangle,
        points,
        weights,
        exact_degree: 2 * xs.len() - 1,
    }
}

// Duffy collapse of the square onto the triangle; the (1 - v) Jacobian costs
// one degree in v.
fn collapsed_gauss(k: usize) -> QuadratureRule {
    let (xs, ws) = gauss_legendre(k);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (&v, &wv) in xs.iter().zip(&ws) {
        for (&u, &wu) in xs.iter().zip(&ws) {
            points.push([u * (1.0 - v), v]);
            weights.push(wu * wv * (1.0 - v));
        }
    }
    QuadratureRule {
        cell_kind: CellKind::Triangle,
        points,
        weights,
        exact_degree: 2 * k - 2,
    }
}

fn symmetric_orbit(a: f64) -> [[f64; 2]; 3] {
    [[a, a], [1.0 - 2.0 * a, a], [a, 1.0 - 2.0 * a]]
}

fn strang_fix_six() -> QuadratureRule {
    let (a, wa) = (0.445_948_490_915_964_9, 0.223_381_589_678_011_5);
    let (b, wb) = (0.091_576_213_509_770_74, 0.109_951_743_655_321_9);
    let mut points = symmetric_orbit(a).to_vec();
    points.extend(symmetric_orbit(b));
    let mut weights = vec![0.5 * wa; 3];
    weights.extend([0.5 * wb; 3]);
    QuadratureRule {
        cell_kind: CellKind::Triangle,
        points,
        weights,
        exact_degree: 4,
    }
}

fn radon_seven() -> QuadratureRule {
    let s15 = 15f64.sqrt();
    let (a1, w1) = ((6.0 - s15) / 21.0, (155.0 - s15) / 1200.0);
    let (a2, w2) = ((6.0 + s15) / 21.0, (155.0 + s15) / 1200.0);
    let mut points = vec![[1.0 / 3.0, 1.0 / 3.0]];
    points.extend(symmetric_orbit(a1));
    points.extend(symmetric_orbit(a2));
    let mut weights = vec![0.5 * 9.0 / 40.0];
    weights.extend([0.5 * w1; 3]);
    weights.extend([0.5 * w2; 3]);
    QuadratureRule {
        cell_kind: CellKind::Triangle,
        points,
        weights,
        exact_degree: 5,
    }
}

/// Affine map of the reference triangle, or the axis-aligned scaling of the
/// reference square, onto a mesh cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellGeometry {
    pub kind: CellKind,
    pub origin: [f64; 2],
    /// Columns are the images of the reference unit vectors.
    pub jacobian: [[f64; 2]; 2],
    pub det: f64,
}

impl CellGeometry {
    pub fn new(kind: CellKind, vertices: &[[f64; 2]]) -> Result<CellGeometry> {
        let v0 = vertices[0];
        let jacobian = match kind {
            CellKind::Triangle => {
                let (v1, v2) = (vertices[1], vertices[2]);
                [[v1[0] - v0[0], v2[0] - v0[0]], [v1[1] - v0[1], v2[1] - v0[1]]]
            }
            CellKind::Rectangle => {
                let (v1, v3) = (vertices[1], vertices[3]);
                [[v1[0] - v0[0], 0.0], [0.0, v3[1] - v0[1]]]
            }
        };
        let det = jacobian[0][0] * jacobian[1][1] - jacobian[0][1] * jacobian[1][0];
        if det <= 0.0 || !det.is_finite() {
            return Err(Error::DegenerateCell(0));
        }
        Ok(CellGeometry {
            kind,
            origin: v0,
            jacobian,
            det,
        })
    }

    pub fn of_cell(mesh: &Mesh, c: usize) -> Result<CellGeometry> {
        CellGeometry::new(mesh.cell_kind(), &mesh.cell_vertices(c))
            .map_err(|_| Error::DegenerateCell(c))
    }

    pub fn map(&self, xi: [f64; 2]) -> [f64; 2] {
        let j = &self.jacobian;
        [
            self.origin[0] + j[0][0] * xi[0] + j[0][1] * xi[1],
            self.origin[1] + j[1][0] * xi[0] + j[1][1] * xi[1],
        ]
    }

    pub fn inverse_map(&self, x: [f64; 2]) -> [f64; 2] {
        let (dx, dy) = (x[0] - self.origin[0], x[1] - self.origin[1]);
        let j = &self.jacobian;
        [
            (j[1][1] * dx - j[0][1] * dy) / self.det,
            (-j[1][0] * dx + j[0][0] * dy) / self.det,
        ]
    }

    /// Maps a reference gradient to a physical one (`J^{-T} g`).
    pub fn push_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let j = &self.jacobian;
        [
            (j[1][1] * g[0] - j[1][0] * g[1]) / self.det,
            (-j[0][1] * g[0] + j[0][0] * g[1]) / self.det,
        ]
    }

    pub fn measure(&self) -> f64 {
        match self.kind {
            CellKind::Triangle => 0.5 * self.det,
            CellKind::Rectangle => self.det,
        }
    }
}

/// `Σ w_q f(x_q) |J|` over one cell.
pub fn integrate<F: Fn([f64; 2]) -> f64>(rule: &QuadratureRule, cell: &CellGeometry, f: F) -> f64 {
    rule.iter().map(|(xi, w)| w * f(cell.map(xi))).sum::<f64>() * cell.det
}

/// Composite integral over the whole mesh with a per-cell rule of the given degree.
pub fn integrate_mesh<F: Fn([f64; 2]) -> f64>(mesh: &Mesh, degree: usize, f: F) -> Result<f64> {
    let rule = high_order_rule(mesh.cell_kind(), degree);
    let mut total = 0.0;
    for c in 0..mesh.num_cells() {
        total += integrate(&rule, &CellGeometry::of_cell(mesh, c)?, &f);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, DomainKind};
    use proptest::prelude::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    // ∫_T x^a y^b = a! b! / (a+b+2)!
    fn triangle_monomial(a: u32, b: u32) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    fn square_monomial(a: u32, b: u32) -> f64 {
        1.0 / ((a + 1) as f64 * (b + 1) as f64)
    }

    fn apply(rule: &QuadratureRule, a: u32, b: u32) -> f64 {
        rule.iter()
            .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
            .sum()
    }

    #[test]
    fn centroid_rule() {
        let r = rule_for(CellKind::Triangle, 1).unwrap();
        assert_eq!(r.points, vec![[1.0 / 3.0, 1.0 / 3.0]]);
        assert_eq!(r.weights, vec![0.5]);
    }

    #[test]
    fn rectangle_degree_three_is_two_by_two() {
        let r = rule_for(CellKind::Rectangle, 3).unwrap();
        assert_eq!(r.len(), 4);
        assert_eq!(r.exact_degree, 3);
    }

    #[test]
    fn six_point_rule_integrates_x2y2() {
        let r = rule_for(CellKind::Triangle, 4).unwrap();
        assert_eq!(r.len(), 6);
        // 2! 2! / 6! = 1/180
        assert!((apply(&r, 2, 2) - 1.0 / 180.0).abs() < 1e-16);
    }

    #[test]
    fn unsupported_degree() {
        assert!(rule_for(CellKind::Triangle, 9).is_err());
    }

    #[test]
    fn gauss_nodes_known_values() {
        let (x, w) = gauss_legendre(2);
        let d = 0.5 / 3f64.sqrt();
        assert!((x[0] - (0.5 - d)).abs() < 1e-15 && (x[1] - (0.5 + d)).abs() < 1e-15);
        assert!((w[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn weights_positive_and_sum_to_measure() {
        for kind in [CellKind::Triangle, CellKind::Rectangle] {
            let measure = if kind == CellKind::Triangle { 0.5 } else { 1.0 };
            for d in 0..=8 {
                let r = rule_for(kind, d).unwrap();
                assert!(r.exact_degree >= d);
                assert!(r.weights.iter().all(|&w| w > 0.0));
                assert!((r.weights.iter().sum::<f64>() - measure).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn integrate_constant_and_linear() {
        let r = rule_for(CellKind::Rectangle, 1).unwrap();
        let g = CellGeometry::new(CellKind::Rectangle, &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
            .unwrap();
        assert!((integrate(&r, &g, |_| 1.0) - 1.0).abs() < 1e-15);
        assert!((integrate(&r, &g, |x| x[0]) - 0.5).abs() < 1e-15);
        let t = CellGeometry::new(CellKind::Triangle, &[[1.0, 1.0], [3.0, 1.0], [1.0, 4.0]]).unwrap();
        assert!((integrate(&rule_for(CellKind::Triangle, 1).unwrap(), &t, |_| 1.0) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_cell_rejected() {
        assert!(CellGeometry::new(CellKind::Triangle, &[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).is_err());
    }

    #[test]
    fn composite_sine_integral() {
        let mesh = build_mesh(DomainKind::UnitSquare, CellKind::Rectangle, 8).unwrap();
        let pi = std::f64::consts::PI;
        let v = integrate_mesh(&mesh, 5, |p| (pi * p[0]).sin() * (pi * p[1]).sin()).unwrap();
        assert!((v - 4.0 / (pi * pi)).abs() < 1e-6);
    }

    #[test]
    fn inverse_map_round_trip() {
        let t = CellGeometry::new(CellKind::Triangle, &[[0.2, 0.1], [1.0, 0.3], [0.4, 0.9]]).unwrap();
        let x = t.map([0.25, 0.5]);
        let xi = t.inverse_map(x);
        assert!((xi[0] - 0.25).abs() < 1e-14 && (xi[1] - 0.5).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn monomial_exactness(deg in 0usize..=8, a in 0u32..=8, b in 0u32..=8) {
            prop_assume!((a + b) as usize <= deg);
            let t = rule_for(CellKind::Triangle, deg).unwrap();
            let exact = triangle_monomial(a, b);
            prop_assert!((apply(&t, a, b) - exact).abs() <= 1e-14 * exact.max(1e-3));
            let s = rule_for(CellKind::Rectangle, deg).unwrap();
            let exact = square_monomial(a, b);
            prop_assert!((apply(&s, a, b) - exact).abs() <= 1e-14 * exact);
        }
    }
}
