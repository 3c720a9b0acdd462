//! Seeded random trigonometric polynomials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::field::TorusField;
use crate::grid::TorusGrid;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub k: i32,
    pub l: i32,
    pub a: f64,
    pub b: f64,
}

/// `Σ a cos 2π(kp + lq) + b sin 2π(kp + lq)` over `|k|, |l| ≤ degree`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrigPolynomial {
    pub degree: u32,
    pub terms: Vec<Term>,
}

impl TrigPolynomial {
    /// Coefficients uniform in `[-1, 1]`, drawn `a` then `b` for each `(k, l)`
    /// with `k` outer and `l` inner, both ascending. `zero_mean` drops the
    /// constant term.
    pub fn random(seed: u64, degree: u32, zero_mean: bool) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = degree as i32;
        let mut terms = Vec::new();
        for k in -d..=d {
            for l in -d..=d {
                let a = rng.gen_range(-1.0..=1.0);
                let b = rng.gen_range(-1.0..=1.0);
                if zero_mean && k == 0 && l == 0 {
                    continue;
                }
                terms.push(Term { k, l, a, b });
            }
        }
        Self { degree, terms }
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        for t in &mut self.terms {
            t.a *= factor;
            t.b *= factor;
        }
        self
    }

    pub fn eval(&self, p: f64, q: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let arg = std::f64::consts::TAU * (t.k as f64 * p + t.l as f64 * q);
                t.a * arg.cos() + t.b * arg.sin()
            })
            .sum()
    }

    pub fn field(&self, n: usize) -> Result<TorusField> {
        let grid = TorusGrid::new(n)?;
        TorusField::from_fn(grid, |p, q| self.eval(p, q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = TrigPolynomial::random(7, 2, false);
        assert_eq!(a, TrigPolynomial::random(7, 2, false));
        assert_ne!(a, TrigPolynomial::random(8, 2, false));
        assert_eq!(a.terms.len(), 25);
        assert!(a.terms.iter().all(|t| t.a.abs() <= 1.0 && t.b.abs() <= 1.0));
    }

    #[test]
    fn zero_mean_drops_constant() {
        let p = TrigPolynomial::random(3, 1, true);
        assert_eq!(p.terms.len(), 8);
        let f = p.field(32).unwrap();
        assert!(f.integral().abs() < 1e-12);
        let full = TrigPolynomial::random(3, 1, false);
        assert_eq!(full.terms[0], p.terms[0]);
    }
}
