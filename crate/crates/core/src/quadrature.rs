//! Reference-interval rules on `[-1, 1]`: Gauss–Legendre quadrature,
//! Gauss–Lobatto–Legendre interpolation nodes and Lagrange basis evaluation.

use std::f64::consts::PI;

/// Value and derivative of the Legendre polynomial `P_n` at `x`.
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
    // P'_n = n (x P_n - P_{n-1}) / (x^2 - 1), valid away from the endpoints.
    let nf = n as f64;
    let dp = if (x * x - 1.0).abs() < 1e-300 {
        0.5 * nf * (nf + 1.0) * x.powi(n as i32 + 1)
    } else {
        nf * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// Gauss–Legendre rule with `n` points, exact for polynomials of degree `2n - 1`.
///
/// Points are returned in ascending order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_legendre needs at least one point");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss–Lobatto–Legendre nodes for polynomial degree `q` (`q + 1` points,
/// including both endpoints), ascending.
pub fn gll_nodes(q: usize) -> Vec<f64> {
    assert!(q >= 1, "gll_nodes needs degree >= 1");
    let n = q + 1;
    let mut x = vec![0.0; n];
    x[0] = -1.0;
    x[q] = 1.0;
    // Interior nodes are the roots of P'_q; Newton on P'_q starting from
    // Chebyshev–Gauss–Lobatto points.
    for i in 1..q {
        let mut z = -(PI * i as f64 / q as f64).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(q, z);
            // P''_q from the Legendre ODE: (1 - z^2) P'' = 2 z P' - q(q+1) P
            let qf = q as f64;
            let d2p = (2.0 * z * dp - qf * (qf + 1.0) * p) / (1.0 - z * z);
            let dz = dp / d2p;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
    }
    if q % 2 == 0 {
        x[q / 2] = 0.0;
    }
    x
}

/// Lagrange basis on a fixed set of distinct nodes.
#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    nodes: Vec<f64>,
    bary: Vec<f64>,
}

impl LagrangeBasis {
    pub fn new(nodes: Vec<f64>) -> Self {
        let n = nodes.len();
        let bary = (0..n)
            .map(|j| {
                let prod: f64 = (0..n)
                    .filter(|&k| k != j)
                    .map(|k| nodes[j] - nodes[k])
                    .product();
                1.0 / prod
            })
            .collect();
        Self { nodes, bary }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Values of all basis functions at `x`, barycentric form (second kind).
    pub fn values_into(&self, x: f64, out: &mut [f64]) {
        if let Some(k) = self.nodes.iter().position(|&xk| xk == x) {
            out.iter_mut().for_each(|o| *o = 0.0);
            out[k] = 1.0;
            return;
        }
        let mut denom = 0.0;
        for (j, o) in out.iter_mut().enumerate() {
            let t = self.bary[j] / (x - self.nodes[j]);
            *o = t;
            denom += t;
        }
        out.iter_mut().for_each(|o| *o /= denom);
    }

    /// Values and first derivatives via the product form. Valid at any `x`,
    /// including coincidence with a node.
    pub fn values_and_derivs(&self, x: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.nodes.len();
        let mut val = vec![0.0; n];
        let mut der = vec![0.0; n];
        for j in 0..n {
            let mut v = self.bary[j];
            for k in (0..n).filter(|&k| k != j) {
                v *= x - self.nodes[k];
            }
            val[j] = v;
            let mut d = 0.0;
            for m in (0..n).filter(|&m| m != j) {
                let mut p = self.bary[j];
                for k in (0..n).filter(|&k| k != j && k != m) {
                    p *= x - self.nodes[k];
                }
                d += p;
            }
            der[j] = d;
        }
        (val, der)
    }
}
