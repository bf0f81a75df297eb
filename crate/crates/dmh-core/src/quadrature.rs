//! Quadrature rules on tetrahedra.
//!
//! Two families are provided:
//!
//! - the classical interior 4-point rule, exact for polynomials of total
//!   degree 2, used by the element assembly and the L2 error norms;
//! - collapsed-coordinate Gauss rules of arbitrary strength, built from
//!   one-dimensional Gauss-Legendre nodes through the Duffy map. With `m`
//!   points per direction the rule is exact for total degree `2m - 3`
//!   (`m = 4` covers degree 5, used for element averages; larger `m`
//!   serves as an independent high-order reference in tests).
//!
//! Points are stored in barycentric coordinates and weights are normalized
//! so that an integral is approximated by `|K| * sum_q w_q f(x_q)`.

/// A quadrature rule on the reference tetrahedron.
#[derive(Debug, Clone)]
pub struct QuadRule {
    /// Barycentric coordinates of the sample points.
    pub points: Vec<[f64; 4]>,
    /// Weights, summing to one.
    pub weights: Vec<f64>,
}

impl QuadRule {
    /// Maps the barycentric points to a physical tetrahedron and evaluates
    /// `|K| * sum_q w_q f(x_q)`.
    pub fn integrate<F: FnMut([f64; 3]) -> f64>(
        &self,
        vertices: &[[f64; 3]; 4],
        volume: f64,
        mut f: F,
    ) -> f64 {
        let mut acc = 0.0;
        for (bary, w) in self.points.iter().zip(&self.weights) {
            let x = bary_to_physical(vertices, *bary);
            acc += w * f(x);
        }
        volume * acc
    }
}

/// Physical coordinates of a barycentric point.
pub fn bary_to_physical(vertices: &[[f64; 3]; 4], bary: [f64; 4]) -> [f64; 3] {
    let mut x = [0.0; 3];
    for (v, l) in vertices.iter().zip(bary) {
        x[0] += l * v[0];
        x[1] += l * v[1];
        x[2] += l * v[2];
    }
    x
}

/// Interior 4-point rule, exact for total degree 2. The barycentric
/// coordinates are (a, b, b, b) and permutations with a = (5 + 3*sqrt 5)/20,
/// b = (5 - sqrt 5)/20, all weights 1/4.
pub fn degree2() -> QuadRule {
    let s5 = 5.0f64.sqrt();
    let a = (5.0 + 3.0 * s5) / 20.0;
    let b = (5.0 - s5) / 20.0;
    let mut points = Vec::with_capacity(4);
    for i in 0..4 {
        let mut p = [b; 4];
        p[i] = a;
        points.push(p);
    }
    QuadRule {
        points,
        weights: vec![0.25; 4],
    }
}

/// Gauss-Legendre nodes and weights on [0, 1].
///
/// Nodes are found by Newton iteration on the Legendre polynomial with the
/// usual Chebyshev-based initial guesses; weights follow from the
/// derivative. Accurate to machine precision for the moderate counts used
/// here.
pub fn gauss_legendre_unit(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for k in 0..m {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(m, x);
        // Map [-1, 1] -> [0, 1]; the node order comes out descending.
        nodes[m - 1 - k] = 0.5 * (x + 1.0);
        weights[m - 1 - k] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=m {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Collapsed (Duffy) Gauss rule with `m^3` points, exact for total degree
/// `2m - 3`. The unit tetrahedron {x,y,z >= 0, x+y+z <= 1} is the image of
/// the unit cube under x = u, y = v(1-u), z = w(1-u)(1-v) with Jacobian
/// (1-u)^2 (1-v).
pub fn collapsed_gauss(m: usize) -> QuadRule {
    assert!(m >= 2);
    let (nodes, gl_weights) = gauss_legendre_unit(m);
    let mut points = Vec::with_capacity(m * m * m);
    let mut weights = Vec::with_capacity(m * m * m);
    for (iu, &u) in nodes.iter().enumerate() {
        for (iv, &v) in nodes.iter().enumerate() {
            for (iw, &w) in nodes.iter().enumerate() {
                let x = u;
                let y = v * (1.0 - u);
                let z = w * (1.0 - u) * (1.0 - v);
                let jac = (1.0 - u) * (1.0 - u) * (1.0 - v);
                points.push([1.0 - x - y - z, x, y, z]);
                // The cube integral equals 1/6 of the normalized tet rule,
                // so scale by 6 to make the weights sum to one.
                weights.push(6.0 * jac * gl_weights[iu] * gl_weights[iv] * gl_weights[iw]);
            }
        }
    }
    QuadRule { points, weights }
}
