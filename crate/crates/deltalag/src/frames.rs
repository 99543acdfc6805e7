//! Derivative-free optimization over orthonormal frames.
//!
//! Frames are columns of orthogonal matrices; the search moves through
//! Givens rotations of column pairs, minimizing each angle by a coarse
//! periodic grid followed by golden-section refinement. The domain is
//! compact, so multi-start coordinate descent of this kind is reliable
//! without any curvature gradients.

use nalgebra::DMatrix;
use rand::Rng;

/// Standard normal via Box–Muller; keeps the dependency surface small.
pub(crate) fn gaussian(rng: &mut impl Rng) -> f64 {
    loop {
        let u: f64 = rng.random::<f64>();
        if u <= f64::MIN_POSITIVE {
            continue;
        }
        let v: f64 = rng.random::<f64>();
        return (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos();
    }
}

/// Haar-uniform random orthogonal matrix: QR of a Gaussian matrix with the
/// R-diagonal sign correction.
pub fn random_orthogonal(m: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    random_stiefel(m, m, rng)
}

/// Uniform random m×n frame with orthonormal columns.
pub fn random_stiefel(m: usize, n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(m, n, |_, _| gaussian(rng));
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..m {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// Rotates columns p and q of `m` by angle θ.
pub fn rotate_columns(m: &mut DMatrix<f64>, p: usize, q: usize, theta: f64) {
    let (c, s) = (theta.cos(), theta.sin());
    for i in 0..m.nrows() {
        let (a, b) = (m[(i, p)], m[(i, q)]);
        m[(i, p)] = c * a + s * b;
        m[(i, q)] = -s * a + c * b;
    }
}

/// An objective over frames that can expose the part depending on a given
/// column pair, so line searches skip the unaffected terms.
pub trait FrameObjective: Sync {
    fn full(&self, q: &DMatrix<f64>) -> f64;
    /// The summands touched by rotating columns (p, r); the default is the
    /// whole objective.
    fn partial(&self, q: &DMatrix<f64>, _p: usize, _r: usize) -> f64 {
        self.full(q)
    }
}

impl<F: Fn(&DMatrix<f64>) -> f64 + Sync> FrameObjective for F {
    fn full(&self, q: &DMatrix<f64>) -> f64 {
        self(q)
    }
}

/// Coordinate descent over Givens angles of the listed column pairs.
#[derive(Clone, Debug)]
pub struct GivensDescent {
    pub pairs: Vec<(usize, usize)>,
    pub angle_samples: usize,
    pub max_sweeps: usize,
    pub objective_tol: f64,
    pub angle_tol: f64,
}

impl GivensDescent {
    pub fn new(pairs: Vec<(usize, usize)>) -> Self {
        GivensDescent {
            pairs,
            angle_samples: 17,
            max_sweeps: 60,
            objective_tol: 1e-13,
            angle_tol: 1e-8,
        }
    }

    /// Minimizes `f` starting from `q0`. Returns the final frame, value and
    /// whether a sweep converged before `max_sweeps` ran out.
    ///
    /// Angles are probed by rotating the two columns in place and rotating
    /// back, so a probe allocates nothing; the accumulated rounding of the
    /// back-rotations stays far below the optimizer tolerances.
    pub fn run(
        &self,
        mut q: DMatrix<f64>,
        f: &(impl FrameObjective + ?Sized),
    ) -> (DMatrix<f64>, f64, bool) {
        let mut current = f.full(&q);
        let mut converged = false;
        for _ in 0..self.max_sweeps {
            let before = current;
            for &(p, r) in &self.pairs {
                let rest = current - f.partial(&q, p, r);
                let (theta, value) = {
                    let mut probe = |theta: f64| -> f64 {
                        rotate_columns(&mut q, p, r, theta);
                        let v = rest + f.partial(&q, p, r);
                        rotate_columns(&mut q, p, r, -theta);
                        v
                    };
                    // Subspaces are invariant under θ ↦ θ + π, so a grid
                    // over one period suffices to seed the refinement.
                    let period = std::f64::consts::PI;
                    let samples = self.angle_samples.max(5);
                    let mut best = (0.0, current);
                    for k in 0..samples {
                        let theta = -period / 2.0 + period * k as f64 / samples as f64;
                        if theta != 0.0 {
                            let v = probe(theta);
                            if v < best.1 {
                                best = (theta, v);
                            }
                        }
                    }
                    let half = period / samples as f64;
                    let (theta, value) =
                        golden_section(&mut probe, best.0 - half, best.0 + half, self.angle_tol);
                    if value < best.1 {
                        (theta, value)
                    } else {
                        best
                    }
                };
                if value < current {
                    rotate_columns(&mut q, p, r, theta);
                    current = value;
                }
            }
            if before - current < self.objective_tol {
                converged = true;
                break;
            }
        }
        (q, current, converged)
    }
}

/// Golden-section minimization on [a, b].
pub fn golden_section(f: &mut dyn FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_orthogonal_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q = random_orthogonal(5, &mut rng);
        let id = q.transpose() * &q;
        for i in 0..5 {
            for j in 0..5 {
                assert_relative_eq!(id[(i, j)], if i == j { 1.0 } else { 0.0 }, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn descent_finds_axis_aligned_minimum() {
        // minimize ⟨col₀, diag⟩ quadratic form: min is the smallest eigenvalue.
        let diag = [3.0, -1.0, 2.0, 5.0];
        let f = |q: &DMatrix<f64>| -> f64 {
            (0..4).map(|i| diag[i] * q[(i, 0)] * q[(i, 0)]).sum()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let descent = GivensDescent::new(vec![(0, 1), (0, 2), (0, 3)]);
        let (_, value, converged) = descent.run(random_orthogonal(4, &mut rng), &f);
        assert!(converged);
        assert_relative_eq!(value, -1.0, epsilon = 1e-9);
    }
}
