//! Oracles written independently of the library: dense eigensolvers,
//! Gauss rules and closed-form integrals.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Cyclic Jacobi on a dense symmetric row-major matrix; ascending eigenvalues.
pub fn jacobi_eigenvalues(n: usize, a: &[f64]) -> Vec<f64> {
    let mut m = a.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum();
        let scale: f64 = m.iter().map(|v| v * v).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues of `A x = λ B x` through `L⁻¹ A L⁻ᵀ` with `B = L Lᵀ`.
pub fn dense_generalized(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = b[i * n + j] - (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum::<f64>();
            if i == j {
                assert!(s > 0.0, "B not SPD");
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    // X = L⁻¹ A, then C = X L⁻ᵀ = (L⁻¹ Xᵀ)ᵀ
    let fwd = |col: &[f64]| {
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = (col[i] - (0..i).map(|k| l[i * n + k] * y[k]).sum::<f64>()) / l[i * n + i];
        }
        y
    };
    let mut x = vec![0.0; n * n];
    for j in 0..n {
        let col: Vec<f64> = (0..n).map(|i| a[i * n + j]).collect();
        let y = fwd(&col);
        for i in 0..n {
            x[i * n + j] = y[i];
        }
    }
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        let row: Vec<f64> = (0..n).map(|j| x[i * n + j]).collect();
        let y = fwd(&row);
        for j in 0..n {
            c[j * n + i] = y[j];
        }
    }
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (c[i * n + j] + c[j * n + i]);
            c[i * n + j] = s;
            c[j * n + i] = s;
        }
    }
    jacobi_eigenvalues(n, &c)
}

/// Gauss–Legendre on [0,1] by Newton on the Legendre recurrence.
pub fn gauss01(k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(k);
    let mut w = Vec::with_capacity(k);
    for i in 0..k {
        let mut t = (PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for n in 2..=k {
                let p2 = ((2 * n - 1) as f64 * t * p1 - (n - 1) as f64 * p0) / n as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if k == 0 { 1.0 } else { p1 };
            dp = k as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x.push(0.5 * (1.0 - t));
        w.push(1.0 / ((1.0 - t * t) * dp * dp));
    }
    (x, w)
}

/// Tensor Gauss over the axis-aligned box `[x0,x1]×[y0,y1]`.
pub fn box_integral<F: Fn(f64, f64) -> f64>(x0: f64, x1: f64, y0: f64, y1: f64, k: usize, f: F) -> f64 {
    let (g, w) = gauss01(k);
    let (hx, hy) = (x1 - x0, y1 - y0);
    let mut s = 0.0;
    for (a, wa) in g.iter().zip(&w) {
        for (b, wb) in g.iter().zip(&w) {
            s += wa * wb * f(x0 + a * hx, y0 + b * hy);
        }
    }
    s * hx * hy
}

/// Collapsed Gauss over the triangle with vertices `v`.
pub fn triangle_integral<F: Fn(f64, f64) -> f64>(v: [[f64; 2]; 3], k: usize, f: F) -> f64 {
    let (g, w) = gauss01(k);
    let det = ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1])).abs();
    let mut s = 0.0;
    for (a, wa) in g.iter().zip(&w) {
        for (b, wb) in g.iter().zip(&w) {
            let (xi, eta) = (a * (1.0 - b), *b);
            let x = v[0][0] + xi * (v[1][0] - v[0][0]) + eta * (v[2][0] - v[0][0]);
            let y = v[0][1] + xi * (v[1][1] - v[0][1]) + eta * (v[2][1] - v[0][1]);
            s += wa * wb * (1.0 - b) * f(x, y);
        }
    }
    s * det
}

/// Mean over the segment `p → q`.
pub fn edge_mean<F: Fn(f64, f64) -> f64>(p: [f64; 2], q: [f64; 2], k: usize, f: F) -> f64 {
    let (g, w) = gauss01(k);
    g.iter()
        .zip(&w)
        .map(|(t, wt)| wt * f(p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
        .sum()
}

/// `∫ x^a y^b` over the reference triangle: `a! b! / (a+b+2)!`.
pub fn reference_triangle_monomial(a: u32, b: u32) -> f64 {
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    fact(a) * fact(b) / fact(a + b + 2)
}

/// `{2,5,5,8,10,10,13,13,17,17}·π²`, the unit-square spectrum.
pub fn square_spectrum(m: usize) -> Vec<f64> {
    let mut v: Vec<u32> = (1..8u32).flat_map(|p| (1..8u32).map(move |q| p * p + q * q)).collect();
    v.sort();
    v.into_iter().take(m).map(|s| f64::from(s) * PI * PI).collect()
}

/// Least-squares slope of `ln e` against `ln h`.
pub fn slope(hs: &[f64], es: &[f64]) -> f64 {
    let n = hs.len() as f64;
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = es.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// `Σ_k c_k sin(a_k x + b_k y + φ_k)` plus a quadratic, with its gradient.
#[derive(Clone, Debug)]
pub struct RandomSmooth {
    waves: Vec<[f64; 4]>,
    quad: [f64; 6],
}

impl RandomSmooth {
    pub fn new(rng: &mut impl rand::Rng) -> RandomSmooth {
        let waves = (0..3)
            .map(|_| {
                [
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-4.0..4.0),
                    rng.random_range(-4.0..4.0),
                    rng.random_range(0.0..2.0 * PI),
                ]
            })
            .collect();
        let mut quad = [0.0; 6];
        quad.iter_mut().for_each(|q| *q = rng.random_range(-1.0..1.0));
        RandomSmooth { waves, quad }
    }
}

impl eigenclose::bounds::ScalarField for RandomSmooth {
    fn value(&self, p: [f64; 2]) -> f64 {
        let [x, y] = p;
        let q = &self.quad;
        self.waves.iter().map(|w| w[0] * (w[1] * x + w[2] * y + w[3]).sin()).sum::<f64>()
            + q[0]
            + q[1] * x
            + q[2] * y
            + q[3] * x * x
            + q[4] * x * y
            + q[5] * y * y
    }

    fn gradient(&self, p: [f64; 2]) -> [f64; 2] {
        let [x, y] = p;
        let q = &self.quad;
        let mut g = [q[1] + 2.0 * q[3] * x + q[4] * y, q[2] + q[4] * x + 2.0 * q[5] * y];
        for w in &self.waves {
            let c = w[0] * (w[1] * x + w[2] * y + w[3]).cos();
            g[0] += c * w[1];
            g[1] += c * w[2];
        }
        g
    }
}
