//! Magnetic quadratic forms `∫ |D_y u|² + |(c D_x + W(x, y)) u|²` with a
//! polynomial `W`, stored as a sum of monomials so every term of the weak
//! form factors into 1D matrices.

use serde::{Deserialize, Serialize};

/// `coef · x^px · y^py`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub px: u32,
    pub py: u32,
}

impl Monomial {
    pub const fn new(coef: f64, px: u32, py: u32) -> Self {
        Self { coef, px, py }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.coef * x.powi(self.px as i32) * y.powi(self.py as i32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagneticForm {
    /// Coefficient of `D_x` inside the magnetic gradient.
    pub c: f64,
    pub w: Vec<Monomial>,
}

impl MagneticForm {
    pub fn new(c: f64, w: Vec<Monomial>) -> Self {
        Self { c, w: collect(w) }
    }

    /// Plain Neumann Laplacian.
    pub fn free() -> Self {
        Self { c: 1.0, w: Vec::new() }
    }

    pub fn eval_w(&self, x: f64, y: f64) -> f64 {
        self.w.iter().map(|m| m.eval(x, y)).sum()
    }

    /// Monomials of `W²`, like powers merged.
    pub fn w_squared(&self) -> Vec<Monomial> {
        let mut out = Vec::new();
        for a in &self.w {
            for b in &self.w {
                out.push(Monomial::new(a.coef * b.coef, a.px + b.px, a.py + b.py));
            }
        }
        collect(out)
    }

    /// `∂_y W`, the field of the potential `(W, 0)`.
    pub fn field(&self, x: f64, y: f64) -> f64 {
        self.w
            .iter()
            .filter(|m| m.py > 0)
            .map(|m| m.coef * m.py as f64 * x.powi(m.px as i32) * y.powi(m.py as i32 - 1))
            .sum()
    }

    pub fn max_degrees(&self) -> (u32, u32) {
        self.w_squared().iter().fold((0, 0), |(a, b), m| (a.max(m.px), b.max(m.py)))
    }
}

fn collect(mut terms: Vec<Monomial>) -> Vec<Monomial> {
    terms.sort_by_key(|m| (m.px, m.py));
    let mut out: Vec<Monomial> = Vec::with_capacity(terms.len());
    for m in terms {
        match out.last_mut() {
            Some(last) if last.px == m.px && last.py == m.py => last.coef += m.coef,
            _ => out.push(m),
        }
    }
    out.retain(|m| m.coef != 0.0);
    out
}
