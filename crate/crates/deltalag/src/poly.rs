//! Sparse real polynomials in several variables, with symbolic partial
//! derivatives and jet evaluation. Used by the gradient-graph chart
//! generators and the harmonic-surface plugins.

use crate::jet::Jet;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub powers: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub nvars: usize,
    pub terms: Vec<Term>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: Vec::new(),
        }
    }

    pub fn new(nvars: usize, terms: Vec<Term>) -> Self {
        let mut p = Polynomial { nvars, terms };
        p.normalize();
        p
    }

    /// Merges duplicate monomials and drops zero coefficients; term order is
    /// canonical (graded lexicographic) so serialization is deterministic.
    pub fn normalize(&mut self) {
        for t in &self.terms {
            assert_eq!(t.powers.len(), self.nvars);
        }
        self.terms.sort_by(|a, b| {
            let da: u32 = a.powers.iter().map(|&p| p as u32).sum();
            let db: u32 = b.powers.iter().map(|&p| p as u32).sum();
            da.cmp(&db).then_with(|| a.powers.cmp(&b.powers))
        });
        let mut merged: Vec<Term> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            if let Some(last) = merged.last_mut() {
                if last.powers == t.powers {
                    last.coeff += t.coeff;
                    continue;
                }
            }
            merged.push(t);
        }
        merged.retain(|t| t.coeff != 0.0);
        self.terms = merged;
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).fold(0.0, f64::max)
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.powers.iter().map(|&p| p as u32).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        let mut acc = 0.0;
        for t in &self.terms {
            let mut m = t.coeff;
            for (x, &p) in u.iter().zip(&t.powers) {
                m *= x.powi(p as i32);
            }
            acc += m;
        }
        acc
    }

    pub fn eval_jet(&self, vars: &[Jet]) -> Jet {
        assert_eq!(vars.len(), self.nvars);
        let (n, ord) = (vars[0].nvars(), vars[0].order());
        let mut acc = Jet::constant(n, ord, 0.0);
        for t in &self.terms {
            let mut m = Jet::constant(n, ord, t.coeff);
            for (v, &p) in vars.iter().zip(&t.powers) {
                if p > 0 {
                    m = m.mul(&v.powi(p as u32));
                }
            }
            acc = acc.add(&m);
        }
        acc
    }

    /// ∂/∂x_i, computed on the coefficient table.
    pub fn partial(&self, i: usize) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.powers[i] > 0)
            .map(|t| {
                let mut powers = t.powers.clone();
                let p = powers[i];
                powers[i] = p - 1;
                Term {
                    coeff: t.coeff * p as f64,
                    powers,
                }
            })
            .collect();
        Polynomial::new(self.nvars, terms)
    }

    /// Σ_i ∂²/∂x_i², symbolically.
    pub fn laplacian(&self) -> Polynomial {
        let mut acc = Polynomial::zero(self.nvars);
        for i in 0..self.nvars {
            let second = self.partial(i).partial(i);
            acc.terms.extend(second.terms);
        }
        acc.normalize();
        acc
    }

    pub fn hessian_is_zero(&self) -> bool {
        (0..self.nvars).all(|i| (i..self.nvars).all(|j| self.partial(i).partial(j).is_zero()))
    }

    /// Random polynomial with every monomial of total degree 2..=degree,
    /// coefficients uniform in ±scale.
    pub fn random(rng: &mut impl Rng, nvars: usize, degree: u32, scale: f64) -> Polynomial {
        let mut terms = Vec::new();
        let mut stack = vec![(vec![0u8; nvars], 0u32, 0usize)];
        while let Some((powers, total, axis)) = stack.pop() {
            if axis == nvars {
                if total >= 2 {
                    terms.push(powers);
                }
                continue;
            }
            for p in 0..=(degree - total) {
                let mut next = powers.clone();
                next[axis] = p as u8;
                stack.push((next, total + p, axis + 1));
            }
        }
        terms.sort();
        let terms = terms
            .into_iter()
            .map(|powers| Term {
                coeff: rng.random_range(-scale..scale),
                powers,
            })
            .collect();
        Polynomial::new(nvars, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn xy_poly() -> Polynomial {
        // x²y + 3y³
        Polynomial::new(
            2,
            vec![
                Term {
                    coeff: 1.0,
                    powers: vec![2, 1],
                },
                Term {
                    coeff: 3.0,
                    powers: vec![0, 3],
                },
            ],
        )
    }

    #[test]
    fn partial_derivatives_are_symbolic() {
        let p = xy_poly();
        let px = p.partial(0);
        let py = p.partial(1);
        assert_relative_eq!(px.eval(&[2.0, -1.0]), -4.0); // 2xy
        assert_relative_eq!(py.eval(&[2.0, -1.0]), 13.0); // x² + 9y²
    }

    #[test]
    fn laplacian_of_harmonic_is_zero() {
        // x² − y² and xy are harmonic.
        let h1 = Polynomial::new(
            2,
            vec![
                Term {
                    coeff: 1.0,
                    powers: vec![2, 0],
                },
                Term {
                    coeff: -1.0,
                    powers: vec![0, 2],
                },
            ],
        );
        let h2 = Polynomial::new(
            2,
            vec![Term {
                coeff: 1.0,
                powers: vec![1, 1],
            }],
        );
        assert!(h1.laplacian().is_zero());
        assert!(h2.laplacian().is_zero());
        assert!(!xy_poly().laplacian().is_zero());
    }

    #[test]
    fn jet_evaluation_matches_point_evaluation_and_partials() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = Polynomial::random(&mut rng, 3, 3, 0.5);
        let u = [0.3, -0.2, 0.1];
        let vars: Vec<Jet> = (0..3).map(|i| Jet::variable(3, 2, i, u[i])).collect();
        let j = p.eval_jet(&vars);
        assert_relative_eq!(j.val, p.eval(&u), epsilon = 1e-14);
        for i in 0..3 {
            assert_relative_eq!(j.d(i), p.partial(i).eval(&u), epsilon = 1e-13);
            for k in i..3 {
                assert_relative_eq!(j.d2(i, k), p.partial(i).partial(k).eval(&u), epsilon = 1e-13);
            }
        }
    }
}
