//! Extrinsic and intrinsic geometry at a chart point.
//!
//! For a Lagrangian chart the normal space is spanned by J applied to the
//! tangent frame (plus the position direction L and the vertical direction
//! JL for lifts into the sphere / anti-de-Sitter models). The second
//! fundamental form therefore reduces to the totally symmetric cubic form
//! h^i_{jk} = ⟨h(e_j, e_k), Je_i⟩, and the full curvature tensor follows
//! from the Gauss equation
//!
//! ```text
//! R_{ijkl} = Σ_m (h^m_{jk} h^m_{il} − h^m_{ik} h^m_{jl}) + c (δ_{il}δ_{jk} − δ_{ik}δ_{jl}).
//! ```
//!
//! An independent cross-check recomputes the curvature purely intrinsically
//! (Christoffel symbols of the induced metric, differentiated over the
//! chart) and compares after transporting to the orthonormal frame.

use crate::ambient::{apply_j, inner_unchecked, AmbientVector};
use crate::immersion::ChartImmersion;
use crate::{Error, Result, Tolerances};
use nalgebra::DMatrix;
use rand::Rng;

/// Totally symmetric cubic coefficients, stored as a full m×m×m array.
#[derive(Clone, Debug)]
pub struct CubicForm {
    m: usize,
    a: Vec<f64>,
}

impl CubicForm {
    pub fn zeros(m: usize) -> Self {
        CubicForm {
            m,
            a: vec![0.0; m * m * m],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.a[(i * self.m + j) * self.m + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.a[(i * self.m + j) * self.m + k] = v;
    }

    /// Sets a coefficient on all six index permutations.
    pub fn set_sym(&mut self, i: usize, j: usize, k: usize, v: f64) {
        for (a, b, c) in [
            (i, j, k),
            (i, k, j),
            (j, i, k),
            (j, k, i),
            (k, i, j),
            (k, j, i),
        ] {
            self.set(a, b, c, v);
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.a.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dot(&self, rhs: &CubicForm) -> f64 {
        self.a.iter().zip(&rhs.a).map(|(a, b)| a * b).sum()
    }

    pub fn sub(&self, rhs: &CubicForm) -> CubicForm {
        CubicForm {
            m: self.m,
            a: self.a.iter().zip(&rhs.a).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> CubicForm {
        CubicForm {
            m: self.m,
            a: self.a.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, rhs: &CubicForm) -> CubicForm {
        CubicForm {
            m: self.m,
            a: self.a.iter().zip(&rhs.a).map(|(a, b)| a + b).collect(),
        }
    }

    /// Frame change: h'(a,b,c) = Σ O_{ia} O_{jb} O_{kc} h(i,j,k), where the
    /// columns of O are the new frame vectors in the old frame.
    pub fn rotate(&self, o: &DMatrix<f64>) -> CubicForm {
        let m = self.m;
        // contract one index at a time
        let mut t1 = vec![0.0; m * m * m]; // (a, j, k)
        for a in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let mut s = 0.0;
                    for i in 0..m {
                        s += o[(i, a)] * self.get(i, j, k);
                    }
                    t1[(a * m + j) * m + k] = s;
                }
            }
        }
        let mut t2 = vec![0.0; m * m * m]; // (a, b, k)
        for a in 0..m {
            for b in 0..m {
                for k in 0..m {
                    let mut s = 0.0;
                    for j in 0..m {
                        s += o[(j, b)] * t1[(a * m + j) * m + k];
                    }
                    t2[(a * m + b) * m + k] = s;
                }
            }
        }
        let mut out = CubicForm::zeros(m);
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    let mut s = 0.0;
                    for k in 0..m {
                        s += o[(k, c)] * t2[(a * m + b) * m + k];
                    }
                    out.set(a, b, c, s);
                }
            }
        }
        out
    }

    /// Largest deviation from total symmetry.
    pub fn symmetry_residual(&self) -> f64 {
        let m = self.m;
        let mut res: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let v = self.get(i, j, k);
                    res = res.max((v - self.get(j, i, k)).abs());
                    res = res.max((v - self.get(k, j, i)).abs());
                    res = res.max((v - self.get(i, k, j)).abs());
                }
            }
        }
        res
    }

    /// Averages over the six permutations.
    pub fn symmetrized(&self) -> CubicForm {
        let m = self.m;
        let mut out = CubicForm::zeros(m);
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let v = (self.get(i, j, k)
                        + self.get(i, k, j)
                        + self.get(j, i, k)
                        + self.get(j, k, i)
                        + self.get(k, i, j)
                        + self.get(k, j, i))
                        / 6.0;
                    out.set(i, j, k, v);
                }
            }
        }
        out
    }

    /// Random totally symmetric cubic form with entries of size ~`scale`.
    pub fn random(m: usize, scale: f64, rng: &mut impl Rng) -> CubicForm {
        let mut h = CubicForm::zeros(m);
        for i in 0..m {
            for j in i..m {
                for k in j..m {
                    h.set_sym(i, j, k, rng.random_range(-scale..scale));
                }
            }
        }
        h
    }

    /// The H-umbilical pattern of ratio 4 with parameters (a, b, μ): two
    /// conformal 2-blocks plus the distinguished direction e₅.
    pub fn ideal_pattern(a: f64, b: f64, mu: f64) -> CubicForm {
        let mut h = CubicForm::zeros(5);
        h.set_sym(0, 0, 0, a);
        h.set_sym(0, 1, 1, -a);
        h.set_sym(2, 2, 2, b);
        h.set_sym(2, 3, 3, -b);
        for j in 0..4 {
            h.set_sym(4, j, j, mu);
        }
        h.set_sym(4, 4, 4, 4.0 * mu);
        h
    }
}

/// Geometry of a Lagrangian chart at one point: orthonormal tangent frame,
/// cubic form, mean curvature.
#[derive(Clone, Debug)]
pub struct PointGeometry {
    pub m: usize,
    /// Ambient holomorphic-curvature sign of the space form (ε for lifts).
    pub c: f64,
    /// Orthonormal tangent frame as ambient vectors.
    pub frame: Vec<AmbientVector>,
    /// Rows express the frame in chart partials: e_a = Σ_i B[(a,i)] ∂_i.
    pub chart_to_frame: DMatrix<f64>,
    /// Totally symmetric cubic coefficients h^i_{jk} (symmetrized).
    pub h: CubicForm,
    /// Mean curvature components in the {Je_i} basis.
    pub mean: Vec<f64>,
    /// Squared mean curvature H².
    pub mean_sq: f64,
    /// Raw deviation of h from total symmetry before symmetrization.
    pub symmetry_residual: f64,
    /// Largest normal component outside span{Je_i, L, JL}.
    pub normal_residual: f64,
}

/// Curvature tensor R_{ijkl} = ⟨R(e_i,e_j)e_k, e_l⟩ in an orthonormal frame.
#[derive(Clone, Debug)]
pub struct CurvatureTensor {
    m: usize,
    r: Vec<f64>,
}

impl CurvatureTensor {
    pub fn zeros(m: usize) -> Self {
        CurvatureTensor {
            m,
            r: vec![0.0; m * m * m * m],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.r[((i * self.m + j) * self.m + k) * self.m + l]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        self.r[((i * self.m + j) * self.m + k) * self.m + l] = v;
    }

    /// Constant sectional curvature c.
    pub fn constant_curvature(m: usize, c: f64) -> Self {
        gauss_curvature_tensor_from(&CubicForm::zeros(m), c)
    }

    /// Sectional curvature K(x∧y) = R(x,y,y,x) for an orthonormal pair.
    pub fn sectional(&self, x: &[f64], y: &[f64]) -> f64 {
        let m = self.m;
        debug_assert!(x.len() == m && y.len() == m);
        let r = &self.r;
        let mut acc = 0.0;
        for i in 0..m {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for j in 0..m {
                let w = xi * y[j];
                if w == 0.0 {
                    continue;
                }
                let base = (i * m + j) * m * m;
                for k in 0..m {
                    let row = base + k * m;
                    let mut s = 0.0;
                    for (l, &xl) in x.iter().enumerate() {
                        s += xl * r[row + l];
                    }
                    acc += w * y[k] * s;
                }
            }
        }
        acc
    }

    /// K of the coordinate plane span{e_i, e_j}.
    pub fn coord_sectional(&self, i: usize, j: usize) -> f64 {
        self.get(i, j, j, i)
    }

    /// Conjugates the tensor by an orthogonal matrix (columns = new frame).
    pub fn rotate(&self, o: &DMatrix<f64>) -> CurvatureTensor {
        let m = self.m;
        let mut cur = self.r.clone();
        // contract the four slots in turn
        for slot in 0..4 {
            let mut next = vec![0.0; m * m * m * m];
            for a in 0..m {
                for b in 0..m {
                    for c in 0..m {
                        for dd in 0..m {
                            let mut s = 0.0;
                            for t in 0..m {
                                let idx = match slot {
                                    0 => ((t * m + b) * m + c) * m + dd,
                                    1 => ((a * m + t) * m + c) * m + dd,
                                    2 => ((a * m + b) * m + t) * m + dd,
                                    _ => ((a * m + b) * m + c) * m + t,
                                };
                                let w = match slot {
                                    0 => o[(t, a)],
                                    1 => o[(t, b)],
                                    2 => o[(t, c)],
                                    _ => o[(t, dd)],
                                };
                                s += w * cur[idx];
                            }
                            next[((a * m + b) * m + c) * m + dd] = s;
                        }
                    }
                }
            }
            cur = next;
        }
        CurvatureTensor { m, r: cur }
    }

    /// Largest violation of the algebraic curvature symmetries
    /// (antisymmetries, pair symmetry, first Bianchi).
    pub fn symmetry_residual(&self) -> f64 {
        let m = self.m;
        let mut res: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let v = self.get(i, j, k, l);
                        res = res.max((v + self.get(j, i, k, l)).abs());
                        res = res.max((v + self.get(i, j, l, k)).abs());
                        res = res.max((v - self.get(k, l, i, j)).abs());
                        let bianchi =
                            v + self.get(j, k, i, l) + self.get(k, i, j, l);
                        res = res.max(bianchi.abs());
                    }
                }
            }
        }
        res
    }
}

/// Gauss equation: curvature from the cubic form and the ambient constant.
pub fn gauss_curvature_tensor_from(h: &CubicForm, c: f64) -> CurvatureTensor {
    let m = h.m();
    let mut r = CurvatureTensor::zeros(m);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let mut s = 0.0;
                    for t in 0..m {
                        s += h.get(t, j, k) * h.get(t, i, l) - h.get(t, i, k) * h.get(t, j, l);
                    }
                    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                    s += c * (delta(i, l) * delta(j, k) - delta(i, k) * delta(j, l));
                    r.set(i, j, k, l, s);
                }
            }
        }
    }
    r
}

/// Curvature tensor of a point geometry via the Gauss equation.
pub fn gauss_curvature_tensor(pg: &PointGeometry) -> CurvatureTensor {
    gauss_curvature_tensor_from(&pg.h, pg.c)
}

/// Scalar curvature τ = Σ_{i<j} K(e_i ∧ e_j).
pub fn scalar_curvature(r: &CurvatureTensor) -> f64 {
    let m = r.m();
    let mut tau = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            tau += r.coord_sectional(i, j);
        }
    }
    tau
}

/// Gram–Schmidt with column pivoting under the ambient signed product.
/// Returns the frame and the change of basis B (rows: e_a = Σ B_{ai} v_i).
fn gram_schmidt_pivoted(vectors: &[AmbientVector]) -> Result<(Vec<AmbientVector>, DMatrix<f64>)> {
    let m = vectors.len();
    let mut frame: Vec<AmbientVector> = Vec::with_capacity(m);
    let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut remaining: Vec<usize> = (0..m).collect();
    for _ in 0..m {
        // pivot: largest residual norm among remaining chart directions
        let mut best = (0usize, f64::NEG_INFINITY);
        for (pos, &idx) in remaining.iter().enumerate() {
            let mut v = vectors[idx].clone();
            let mut row = vec![0.0; m];
            row[idx] = 1.0;
            for (e, crow) in frame.iter().zip(&coeffs) {
                let p = inner_unchecked(&v, e);
                v.axpy(-p, e);
                for (r, c) in row.iter_mut().zip(crow) {
                    *r -= p * c;
                }
            }
            let n2 = v.norm_sq();
            if n2 > best.1 {
                best = (pos, n2);
            }
        }
        if best.1 <= 0.0 {
            return Err(Error::DegenerateImmersion { ratio: 0.0 });
        }
        let idx = remaining.remove(best.0);
        let mut v = vectors[idx].clone();
        let mut row = vec![0.0; m];
        row[idx] = 1.0;
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for (e, crow) in frame.iter().zip(&coeffs) {
                let p = inner_unchecked(&v, e);
                v.axpy(-p, e);
                for (r, c) in row.iter_mut().zip(crow) {
                    *r -= p * c;
                }
            }
        }
        let n = v.norm_sq().sqrt();
        frame.push(v.scale(1.0 / n));
        coeffs.push(row.iter().map(|r| r / n).collect());
    }
    let b = DMatrix::from_fn(m, m, |a, i| coeffs[a][i]);
    Ok((frame, b))
}

/// Second fundamental form of a Lagrangian chart at `u`, expressed as cubic
/// coefficients in a pivoted orthonormal frame.
///
/// For lifts the position component (totally umbilical direction) and the
/// vertical component JL are verified against their predicted values and
/// removed before reading off the Je-coefficients; whatever remains outside
/// span{Je_i, L, JL} is reported (and must be small, else the chart is not
/// Lagrangian/horizontal).
pub fn second_fundamental_form(
    f: &ChartImmersion,
    u: &[f64],
    tol: &Tolerances,
) -> Result<PointGeometry> {
    let m = f.dim();
    let jet = f.evaluate_jet(u, 2)?;
    let tangents = &jet.first;
    let g = crate::immersion::gram_matrix(tangents);
    {
        let eig = g.clone().symmetric_eigen();
        let mut smin = f64::INFINITY;
        let mut smax: f64 = 0.0;
        for &l in eig.eigenvalues.iter() {
            if l <= 0.0 {
                return Err(Error::DegenerateImmersion { ratio: 0.0 });
            }
            let s = l.sqrt();
            smin = smin.min(s);
            smax = smax.max(s);
        }
        if smin < tol.immersion_floor * smax {
            return Err(Error::DegenerateImmersion { ratio: smin / smax });
        }
    }

    let (frame, b) = gram_schmidt_pivoted(tangents)?;

    let c = f.space().curvature_sign();
    let (pos, vertical, eps) = if f.is_lift() {
        let value = jet.value.clone();
        let res = crate::ambient::sphere_constraint_residual(&value)?;
        if res > tol.constraint.max(1e-8) {
            return Err(Error::NotOnModel { residual: res });
        }
        let jl = apply_j(&value);
        let mut hres: f64 = 0.0;
        for t in tangents {
            hres = hres.max(inner_unchecked(t, &jl).abs());
        }
        if hres > tol.horizontality.max(1e-8) {
            return Err(Error::NotHorizontal { residual: hres });
        }
        (Some(value), Some(jl), f.space().epsilon())
    } else {
        (None, None, 0.0)
    };

    // normal parts of the chart second derivatives
    let mut h_chart: Vec<AmbientVector> = Vec::with_capacity(m * (m + 1) / 2);
    let mut normal_residual: f64 = 0.0;
    for j in 0..m {
        for i in 0..=j {
            let mut w = jet.d2(i, j).clone();
            let scale = w.euclidean_norm().max(1.0);
            for e in &frame {
                let p = inner_unchecked(&w, e);
                w.axpy(-p, e);
            }
            if let (Some(l), Some(jl)) = (&pos, &vertical) {
                // position component must match the umbilical prediction
                // −ε g_ij; the vertical one must vanish (horizontality).
                let coeff_l = eps * inner_unchecked(&w, l);
                let expected = -eps * g[(i, j)];
                normal_residual = normal_residual.max((coeff_l - expected).abs() / scale);
                w.axpy(-coeff_l, l);
                let coeff_v = eps * inner_unchecked(&w, jl);
                normal_residual = normal_residual.max(coeff_v.abs() / scale);
                w.axpy(-coeff_v, jl);
            }
            h_chart.push(w);
        }
    }

    // transform to the orthonormal frame and read off the Je-coefficients
    let packed = |i: usize, j: usize| -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        crate::jet::hidx(i, j)
    };
    let jframe: Vec<AmbientVector> = frame.iter().map(apply_j).collect();
    let mut h_raw = CubicForm::zeros(m);
    for a in 0..m {
        for bb in a..m {
            let mut hv = AmbientVector::zero(f.space());
            for i in 0..m {
                for j in 0..m {
                    let w = b[(a, i)] * b[(bb, j)];
                    if w != 0.0 {
                        hv.axpy(w, &h_chart[packed(i, j)]);
                    }
                }
            }
            let mut rem = hv.clone();
            for (k, je) in jframe.iter().enumerate() {
                let coeff = inner_unchecked(&hv, je);
                h_raw.set(k, a, bb, coeff);
                h_raw.set(k, bb, a, coeff);
                rem.axpy(-coeff, je);
            }
            let scale = hv.euclidean_norm().max(1.0);
            normal_residual = normal_residual.max(rem.euclidean_norm() / scale);
        }
    }
    if normal_residual > tol.normal_residual {
        return Err(Error::NotLagrangian {
            residual: normal_residual,
        });
    }

    let symmetry_residual = h_raw.symmetry_residual();
    let h = h_raw.symmetrized();

    let mut mean = vec![0.0; m];
    for k in 0..m {
        for a in 0..m {
            mean[k] += h.get(k, a, a);
        }
        mean[k] /= m as f64;
    }
    let mean_sq = mean.iter().map(|x| x * x).sum();

    Ok(PointGeometry {
        m,
        c,
        frame,
        chart_to_frame: b,
        h,
        mean,
        mean_sq,
        symmetry_residual,
        normal_residual,
    })
}

/// Purely intrinsic curvature of the induced metric: Christoffel symbols
/// from metric derivatives over the chart, then the coordinate curvature
/// tensor, transported to the same orthonormal frame as the Gauss-equation
/// tensor. Returns the largest componentwise deviation between the two.
pub fn intrinsic_curvature_crosscheck(
    f: &ChartImmersion,
    u: &[f64],
    tol: &Tolerances,
) -> Result<f64> {
    let m = f.dim();
    let jet = f.evaluate_jet(u, 3)?;
    let pg = second_fundamental_form(f, u, tol)?;
    let r_gauss = gauss_curvature_tensor(&pg);

    let d1 = &jet.first;
    let ip = inner_unchecked;
    let g = crate::immersion::gram_matrix(d1);
    // ∂_k g_ij and ∂_l ∂_k g_ij from chart derivatives
    let mut dg = vec![0.0; m * m * m]; // [k][i][j]
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                dg[(k * m + i) * m + j] = ip(jet.d2(i, k), &d1[j]) + ip(&d1[i], jet.d2(j, k));
            }
        }
    }
    let mut ddg = vec![0.0; m * m * m * m]; // [l][k][i][j]
    for l in 0..m {
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    ddg[((l * m + k) * m + i) * m + j] = ip(jet.d3(i, k, l), &d1[j])
                        + ip(jet.d2(i, k), jet.d2(j, l))
                        + ip(jet.d2(i, l), jet.d2(j, k))
                        + ip(&d1[i], jet.d3(j, k, l));
                }
            }
        }
    }

    let ginv = g
        .clone()
        .try_inverse()
        .ok_or(Error::DegenerateImmersion { ratio: 0.0 })?;
    // Christoffel symbols of the first kind and their derivatives
    let gamma1 = |i: usize, j: usize, l: usize| -> f64 {
        0.5 * (dg[(i * m + j) * m + l] + dg[(j * m + i) * m + l] - dg[(l * m + i) * m + j])
    };
    let dgamma1 = |p: usize, i: usize, j: usize, l: usize| -> f64 {
        0.5 * (ddg[((p * m + i) * m + j) * m + l] + ddg[((p * m + j) * m + i) * m + l]
            - ddg[((p * m + l) * m + i) * m + j])
    };
    let mut gamma = vec![0.0; m * m * m]; // Γ^k_ij as [k][i][j]
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                let mut s = 0.0;
                for l in 0..m {
                    s += ginv[(k, l)] * gamma1(i, j, l);
                }
                gamma[(k * m + i) * m + j] = s;
            }
        }
    }
    // ∂_p Γ^k_ij = Σ_l (∂_p g^{kl}) Γ_{ij,l} + g^{kl} ∂_p Γ_{ij,l},
    // with ∂_p g^{-1} = −g^{-1} (∂_p g) g^{-1}.
    let mut dginv = vec![0.0; m * m * m]; // [p][k][l]
    for p in 0..m {
        for k in 0..m {
            for l in 0..m {
                let mut s = 0.0;
                for a in 0..m {
                    for bb in 0..m {
                        s -= ginv[(k, a)] * dg[(p * m + a) * m + bb] * ginv[(bb, l)];
                    }
                }
                dginv[(p * m + k) * m + l] = s;
            }
        }
    }
    let dgamma = |p: usize, k: usize, i: usize, j: usize| -> f64 {
        let mut s = 0.0;
        for l in 0..m {
            s += dginv[(p * m + k) * m + l] * gamma1(i, j, l) + ginv[(k, l)] * dgamma1(p, i, j, l);
        }
        s
    };

    // R(∂_i,∂_j)∂_k = [∂_i Γ^s_jk − ∂_j Γ^s_ik + Γ^s_il Γ^l_jk − Γ^s_jl Γ^l_ik] ∂_s
    let mut r_coord = CurvatureTensor::zeros(m);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let mut rs = vec![0.0; m];
                for s in 0..m {
                    let mut v = dgamma(i, s, j, k) - dgamma(j, s, i, k);
                    for l in 0..m {
                        v += gamma[(s * m + i) * m + l] * gamma[(l * m + j) * m + k]
                            - gamma[(s * m + j) * m + l] * gamma[(l * m + i) * m + k];
                    }
                    rs[s] = v;
                }
                for l in 0..m {
                    let mut v = 0.0;
                    for s in 0..m {
                        v += g[(s, l)] * rs[s];
                    }
                    r_coord.set(i, j, k, l, v);
                }
            }
        }
    }

    // transport to the orthonormal frame: Rf(a,b,c,d) = Σ B.. R_coord(i,j,k,l)
    let b = &pg.chart_to_frame;
    let mut max_dev: f64 = 0.0;
    for a in 0..m {
        for bb in 0..m {
            for c in 0..m {
                for d in 0..m {
                    let mut v = 0.0;
                    for i in 0..m {
                        if b[(a, i)] == 0.0 {
                            continue;
                        }
                        for j in 0..m {
                            if b[(bb, j)] == 0.0 {
                                continue;
                            }
                            for k in 0..m {
                                for l in 0..m {
                                    v += b[(a, i)] * b[(bb, j)] * b[(c, k)] * b[(d, l)]
                                        * r_coord.get(i, j, k, l);
                                }
                            }
                        }
                    }
                    max_dev = max_dev.max((v - r_gauss.get(a, bb, c, d)).abs());
                }
            }
        }
    }
    Ok(max_dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersion::{circle_chart, gradient_graph_chart, random_gradient_graph, torus_chart};
    use crate::poly::Polynomial;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn flat_plane_has_vanishing_h() {
        let chart = gradient_graph_chart(Polynomial::zero(5), "flat");
        let pg = second_fundamental_form(&chart, &[0.1, 0.0, -0.2, 0.3, 0.0], &tol()).unwrap();
        assert!(pg.h.frobenius_norm() < 1e-13);
        assert!(pg.mean_sq < 1e-26);
    }

    #[test]
    fn circle_has_unit_cubic_coefficient() {
        let chart = circle_chart();
        let pg = second_fundamental_form(&chart, &[0.4], &tol()).unwrap();
        assert_relative_eq!(pg.h.get(0, 0, 0).abs(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(pg.mean_sq, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn quadratic_graph_has_constant_h() {
        // f quadratic → affine Lagrangian graph: h constant in u.
        let f = Polynomial::new(
            5,
            vec![
                crate::poly::Term {
                    coeff: 0.2,
                    powers: vec![2, 0, 0, 0, 0],
                },
                crate::poly::Term {
                    coeff: -0.1,
                    powers: vec![0, 1, 1, 0, 0],
                },
            ],
        );
        let chart = gradient_graph_chart(f, "quad");
        // an affine Lagrangian plane is totally geodesic: h constant (zero)
        let pg1 = second_fundamental_form(&chart, &[0.0; 5], &tol()).unwrap();
        let pg2 = second_fundamental_form(&chart, &[0.2, -0.1, 0.3, 0.0, 0.1], &tol()).unwrap();
        assert!(pg1.h.frobenius_norm() < 1e-12);
        assert_relative_eq!(
            pg1.h.frobenius_norm(),
            pg2.h.frobenius_norm(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn cubic_form_is_totally_symmetric_on_random_graphs() {
        for seed in 0..20 {
            let chart = random_gradient_graph(seed, 5, 3).unwrap();
            let pg = second_fundamental_form(&chart, &chart.center(), &tol()).unwrap();
            assert!(pg.symmetry_residual < 1e-8, "seed {seed}: {}", pg.symmetry_residual);
        }
    }

    #[test]
    fn mean_sq_recomputes_from_h() {
        let chart = random_gradient_graph(3, 5, 3).unwrap();
        let pg = second_fundamental_form(&chart, &[0.1, 0.2, -0.1, 0.0, 0.3], &tol()).unwrap();
        let mut mean = vec![0.0; 5];
        for k in 0..5 {
            for a in 0..5 {
                mean[k] += pg.h.get(k, a, a) / 5.0;
            }
        }
        let msq: f64 = mean.iter().map(|x| x * x).sum();
        assert_relative_eq!(pg.mean_sq, msq, epsilon = 1e-10);
    }

    #[test]
    fn gauss_tensor_of_totally_geodesic_in_cp5() {
        let r = gauss_curvature_tensor_from(&CubicForm::zeros(5), 1.0);
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert_relative_eq!(r.coord_sectional(i, j), 1.0);
                }
            }
        }
        assert!(r.symmetry_residual() < 1e-14);
    }

    #[test]
    fn gauss_tensor_of_ratio4_pattern() {
        for &(mu, c) in &[(0.5, 0.0), (0.3, 1.0), (0.7, -1.0)] {
            let h = CubicForm::ideal_pattern(0.0, 0.0, mu);
            let r = gauss_curvature_tensor_from(&h, c);
            for i in 0..4 {
                assert_relative_eq!(
                    r.coord_sectional(i, 4),
                    3.0 * mu * mu + c,
                    epsilon = 1e-13
                );
                for j in (i + 1)..4 {
                    assert_relative_eq!(
                        r.coord_sectional(i, j),
                        mu * mu + c,
                        epsilon = 1e-13
                    );
                }
            }
            assert_relative_eq!(
                scalar_curvature(&r),
                18.0 * mu * mu + 10.0 * c,
                epsilon = 1e-12
            );
            assert!(r.symmetry_residual() < 1e-13);
        }
    }

    #[test]
    fn scalar_curvature_examples() {
        let r = CurvatureTensor::constant_curvature(5, 1.0);
        assert_relative_eq!(scalar_curvature(&r), 10.0);
        let flat = CurvatureTensor::constant_curvature(5, 0.0);
        assert_relative_eq!(scalar_curvature(&flat), 0.0);
    }

    #[test]
    fn scalar_curvature_is_frame_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = CubicForm::random(5, 0.6, &mut rng);
        let r = gauss_curvature_tensor_from(&h, -1.0);
        let tau = scalar_curvature(&r);
        for _ in 0..5 {
            let q = crate::frames::random_orthogonal(5, &mut rng);
            let rr = r.rotate(&q);
            assert_relative_eq!(scalar_curvature(&rr), tau, epsilon = 1e-10);
        }
    }

    #[test]
    fn intrinsic_crosscheck_on_flat_and_torus() {
        let flat = gradient_graph_chart(Polynomial::zero(3), "flat");
        let dev = intrinsic_curvature_crosscheck(&flat, &[0.1, 0.0, 0.2], &tol()).unwrap();
        assert!(dev < 1e-12);

        let torus = torus_chart(3);
        let dev = intrinsic_curvature_crosscheck(&torus, &[0.3, -0.5, 1.0], &tol()).unwrap();
        assert!(dev < 1e-12, "torus should be flat both ways, dev = {dev}");
    }

    #[test]
    fn intrinsic_crosscheck_on_random_graphs() {
        for seed in 0..5 {
            let chart = random_gradient_graph(seed, 4, 3).unwrap();
            let dev = intrinsic_curvature_crosscheck(&chart, &chart.center(), &tol()).unwrap();
            assert!(dev < 1e-8, "seed {seed}: deviation {dev}");
        }
    }

    #[test]
    fn intrinsic_crosscheck_finite_difference_backend() {
        let chart = random_gradient_graph(2, 3, 3).unwrap().as_finite_difference();
        let dev = intrinsic_curvature_crosscheck(&chart, &[0.05, -0.1, 0.1], &tol()).unwrap();
        assert!(dev < 1e-5, "fd deviation {dev}");
    }
}
