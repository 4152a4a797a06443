//! Quadrature on the reference triangle `(0,0), (1,0), (0,1)` and on `[0, 1]`.

use alloc::vec::Vec;

use crate::math::cos;

/// Points in barycentric coordinates with weights summing to the reference
/// area `1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
    degree: usize,
}

impl QuadratureRule {
    /// 12-point symmetric rule exact for polynomials of degree 6.
    ///
    /// Integrates every product appearing in the EMAC and skew-symmetric
    /// trilinear forms on quadratic velocities exactly (degree 5).
    pub fn symmetric_degree6() -> Self {
        let mut points = Vec::with_capacity(12);
        let mut weights = Vec::with_capacity(12);
        let mut orbit3 = |a: f64, b: f64, w: f64| {
            for p in [[a, b, b], [b, a, b], [b, b, a]] {
                points.push(p);
                weights.push(0.5 * w);
            }
        };
        orbit3(0.501426509658179, 0.249286745170910, 0.116786275726379);
        orbit3(0.873821971016996, 0.063089014491502, 0.050844906370207);
        let (a, b, c, w) = (
            0.053145049844817,
            0.310352451033784,
            0.636502499121399,
            0.082851075618374,
        );
        for p in [
            [a, b, c],
            [b, c, a],
            [c, a, b],
            [a, c, b],
            [c, b, a],
            [b, a, c],
        ] {
            points.push(p);
            weights.push(0.5 * w);
        }
        Self {
            points,
            weights,
            degree: 6,
        }
    }

    /// Collapsed (Duffy) tensor Gauss-Legendre rule exact to `degree`.
    ///
    /// Used for non-polynomial integrands such as errors against analytic
    /// fields.
    pub fn collapsed_gauss(degree: usize) -> Self {
        let n = (degree + 3) / 2;
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let (u, v) = (x[i], x[j]);
                let xi = u;
                let eta = v * (1.0 - u);
                points.push([1.0 - xi - eta, xi, eta]);
                weights.push(w[i] * w[j] * (1.0 - u));
            }
        }
        Self {
            points,
            weights,
            degree,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 3], f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::symmetric_degree6()
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one Gauss point");
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-like initial guess, then Newton on P_n
        let mut x = cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes.push(0.5 * (1.0 - x));
        weights.push(0.5 * w);
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Exact reference-triangle integral of `x^a y^b`: `a! b! / (a + b + 2)!`.
pub fn reference_monomial_integral(a: u32, b: u32) -> f64 {
    let fact = |k: u32| (1..=k).fold(1.0f64, |acc, i| acc * i as f64);
    fact(a) * fact(b) / fact(a + b + 2)
}
