//! Ambient complex space forms and their (pseudo-)Hermitian geometry.
//!
//! The three ambient models are C^n (holomorphic sectional curvature 0),
//! CP^n(4) presented through its sphere model S^{2n+1}(1) ⊂ C^{n+1}, and
//! CH^n(−4) presented through the anti-de-Sitter model H₁^{2n+1}(−1) ⊂
//! C^{n+1}₁, whose pseudo-Euclidean metric puts the minus sign on the first
//! complex coordinate. All geometry downstream flows through the real inner
//! product `inner` (the real part of the signed Hermitian product) and the
//! complex structure `apply_j`; the symplectic form is fixed once as
//! ω(X, Y) = ⟨JX, Y⟩.

use crate::{Error, Result};
use num_complex::Complex64;

/// A complex space form together with the coordinate model used for it.
///
/// `n` is the complex dimension of the space form itself; for curved models
/// vectors live in the lift space of complex dimension `n + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AmbientSpace {
    n: usize,
    c: i8,
}

impl AmbientSpace {
    /// Complex Euclidean space C^n (c = 0).
    pub fn flat(n: usize) -> Self {
        AmbientSpace { n, c: 0 }
    }

    /// CP^n(4), modelled on the unit sphere S^{2n+1}(1) ⊂ C^{n+1}.
    pub fn projective(n: usize) -> Self {
        AmbientSpace { n, c: 1 }
    }

    /// CH^n(−4), modelled on H₁^{2n+1}(−1) ⊂ C^{n+1}₁.
    pub fn hyperbolic(n: usize) -> Self {
        AmbientSpace { n, c: -1 }
    }

    /// Complex dimension of the space form.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Holomorphic-curvature sign c ∈ {−1, 0, +1}.
    pub fn curvature_sign(&self) -> f64 {
        self.c as f64
    }

    pub fn is_flat(&self) -> bool {
        self.c == 0
    }

    /// Complex dimension of the model coordinates (n for C^n, n+1 otherwise).
    pub fn model_dim(&self) -> usize {
        if self.c == 0 {
            self.n
        } else {
            self.n + 1
        }
    }

    /// Number of negative squares in the real metric: 1 for the C^{n+1}₁
    /// model, 0 otherwise.
    pub fn signature_index(&self) -> usize {
        if self.c == -1 {
            1
        } else {
            0
        }
    }

    /// Metric sign carried by complex coordinate `j`.
    pub fn sign(&self, j: usize) -> f64 {
        if self.c == -1 && j == 0 {
            -1.0
        } else {
            1.0
        }
    }

    /// ε of the umbilical identity: ⟨z, z⟩ = ε on the model hypersurface.
    pub fn epsilon(&self) -> f64 {
        debug_assert!(self.c != 0);
        self.c as f64
    }
}

/// A vector (or point) of the ambient model, stored as interleaved real
/// pairs `[re₀, im₀, re₁, im₁, …]`.
#[derive(Clone, Debug)]
pub struct AmbientVector {
    space: AmbientSpace,
    data: Vec<f64>,
}

impl AmbientVector {
    pub fn zero(space: AmbientSpace) -> Self {
        AmbientVector {
            space,
            data: vec![0.0; 2 * space.model_dim()],
        }
    }

    pub fn from_complex(space: AmbientSpace, comps: &[Complex64]) -> Result<Self> {
        if comps.len() != space.model_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.model_dim(),
                got: comps.len(),
            });
        }
        let mut data = Vec::with_capacity(2 * comps.len());
        for z in comps {
            data.push(z.re);
            data.push(z.im);
        }
        Ok(AmbientVector { space, data })
    }

    pub fn space(&self) -> AmbientSpace {
        self.space
    }

    /// Number of complex components.
    pub fn len(&self) -> usize {
        self.data.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn comp(&self, j: usize) -> Complex64 {
        Complex64::new(self.data[2 * j], self.data[2 * j + 1])
    }

    pub fn complex_components(&self) -> Vec<Complex64> {
        (0..self.len()).map(|j| self.comp(j)).collect()
    }

    pub fn interleaved(&self) -> &[f64] {
        &self.data
    }

    pub fn add(&self, rhs: &AmbientVector) -> AmbientVector {
        debug_assert_eq!(self.data.len(), rhs.data.len());
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a + b)
            .collect();
        AmbientVector {
            space: self.space,
            data,
        }
    }

    pub fn sub(&self, rhs: &AmbientVector) -> AmbientVector {
        debug_assert_eq!(self.data.len(), rhs.data.len());
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        AmbientVector {
            space: self.space,
            data,
        }
    }

    pub fn scale(&self, s: f64) -> AmbientVector {
        AmbientVector {
            space: self.space,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// self += s · rhs, in place.
    pub fn axpy(&mut self, s: f64, rhs: &AmbientVector) {
        debug_assert_eq!(self.data.len(), rhs.data.len());
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += s * b;
        }
    }

    /// Signed squared norm ⟨v, v⟩.
    pub fn norm_sq(&self) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.len() {
            let s = self.space.sign(j);
            acc += s * (self.data[2 * j] * self.data[2 * j] + self.data[2 * j + 1] * self.data[2 * j + 1]);
        }
        acc
    }

    /// Euclidean (unsigned) norm of the coordinate vector; used only for
    /// scale estimates.
    pub fn euclidean_norm(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }
}

/// Real part of the signed Hermitian product, Re Σ ±u_j conj(v_j).
///
/// For `signature_index = 1` the first complex coordinate carries the minus
/// sign. Symmetric and bilinear over the reals.
pub fn inner(u: &AmbientVector, v: &AmbientVector, space: &AmbientSpace) -> Result<f64> {
    if u.space != *space || v.space != *space || u.len() != space.model_dim() {
        return Err(Error::DimensionMismatch {
            expected: space.model_dim(),
            got: if u.space != *space { u.len() } else { v.len() },
        });
    }
    Ok(inner_unchecked(u, v))
}

pub(crate) fn inner_unchecked(u: &AmbientVector, v: &AmbientVector) -> f64 {
    debug_assert_eq!(u.data.len(), v.data.len());
    let mut acc = 0.0;
    for j in 0..u.len() {
        let s = u.space.sign(j);
        acc += s * (u.data[2 * j] * v.data[2 * j] + u.data[2 * j + 1] * v.data[2 * j + 1]);
    }
    acc
}

/// The complex structure J: multiplication of every component by i.
///
/// Satisfies J² = −id and ⟨Ju, Jv⟩ = ⟨u, v⟩.
pub fn apply_j(u: &AmbientVector) -> AmbientVector {
    let mut data = Vec::with_capacity(u.data.len());
    for j in 0..u.len() {
        data.push(-u.data[2 * j + 1]);
        data.push(u.data[2 * j]);
    }
    AmbientVector {
        space: u.space,
        data,
    }
}

/// The signed Hermitian product itself, Σ ±u_j conj(v_j).
pub fn hermitian(u: &AmbientVector, v: &AmbientVector) -> Complex64 {
    debug_assert_eq!(u.len(), v.len());
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..u.len() {
        acc += u.space.sign(j) * u.comp(j) * v.comp(j).conj();
    }
    acc
}

/// |⟨z,z⟩ − 1| on the sphere model, |⟨z,z⟩ + 1| on the anti-de-Sitter model.
pub fn sphere_constraint_residual(z: &AmbientVector) -> Result<f64> {
    let space = z.space;
    if space.is_flat() {
        return Err(Error::NoConstraintSurface);
    }
    Ok((z.norm_sq() - space.epsilon()).abs())
}

/// |⟨dz, Jz⟩|: zero exactly when dz is horizontal for the Hopf fibration.
pub fn horizontality_residual(z: &AmbientVector, dz: &AmbientVector) -> f64 {
    inner_unchecked(dz, &apply_j(z))
        .abs()
}

/// Hopf projection of a point of S³(1) ⊂ C² or H³₁(−1) ⊂ C²₁ onto the base
/// curve space S²(½) resp. H²(−½) ⊂ E³₁.
///
/// Sphere: π(z₁, z₂) = (Re z₁z̄₂, Im z₁z̄₂, ½(|z₁|² − |z₂|²)), landing on
/// ⟨x, x⟩ = ¼. Hyperbolic: π(z₁, z₂) = (½(|z₁|² + |z₂|²), Re z₁z̄₂, Im z₁z̄₂),
/// landing on x₁² − x₂² − x₃² = ¼ with x₁ ≥ ½.
pub fn hopf_project_curve_point(z: &AmbientVector, tol: f64) -> Result<[f64; 3]> {
    let space = z.space;
    if space.is_flat() {
        return Err(Error::NoConstraintSurface);
    }
    if space.model_dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: space.model_dim(),
        });
    }
    let residual = sphere_constraint_residual(z)?;
    if residual > tol {
        return Err(Error::NotOnModel { residual });
    }
    let (z1, z2) = (z.comp(0), z.comp(1));
    let w = z1 * z2.conj();
    let n1 = z1.norm_sqr();
    let n2 = z2.norm_sqr();
    Ok(if space.curvature_sign() > 0.0 {
        [w.re, w.im, 0.5 * (n1 - n2)]
    } else {
        [0.5 * (n1 + n2), w.re, w.im]
    })
}

/// Signed geodesic curvature of a unit-speed curve on S²(½) or H²(−½),
/// from position, velocity and acceleration in the ambient E³ / E³₁.
///
/// Orientation is the one induced by the Hopf projection conventions above:
/// the curvature of the projection of a Legendre curve equals its λ.
pub fn projected_curve_curvature(x: [f64; 3], dx: [f64; 3], ddx: [f64; 3], hyperbolic: bool) -> f64 {
    // Unit in-surface normal n with ⟨n, n⟩ = 1, n ⊥ {x, dx}: n = dx × x
    // scaled by 1/r with r = ½; Lorentzian cross product for the H² model.
    let cross = [
        dx[1] * x[2] - dx[2] * x[1],
        dx[2] * x[0] - dx[0] * x[2],
        dx[0] * x[1] - dx[1] * x[0],
    ];
    let (metric, n): ([f64; 3], [f64; 3]) = if hyperbolic {
        ([-1.0, 1.0, 1.0], [-cross[0], cross[1], cross[2]])
    } else {
        ([1.0, 1.0, 1.0], cross)
    };
    let n = [n[0] * 2.0, n[1] * 2.0, n[2] * 2.0];
    let mut acc = 0.0;
    for k in 0..3 {
        acc += metric[k] * ddx[k] * n[k];
    }
    acc
}
