//! Parametrized immersion charts with derivatives to third order.
//!
//! A [`ChartImmersion`] maps an axis-aligned box in R^m into an ambient
//! model and can be evaluated together with all partial derivatives up to a
//! requested order. Two backends exist: exact truncated-Taylor jets
//! (every built-in family) and central finite differences with one
//! Richardson level (black-box charts). The module also hosts the
//! Lagrangian/horizontality residuals, the induced metric, and the random
//! gradient-graph generator used as a property-test subject: the graph of
//! u ↦ u + i∇f(u) is Lagrangian in C^m for any potential f.

use crate::ambient::{apply_j, inner_unchecked, AmbientSpace, AmbientVector};
use crate::jet::{hess_len, hidx, third_len, tidx, CJet, Jet};
use crate::poly::Polynomial;
use crate::{Error, Result, Tolerances};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Derivatives of a chart at one point, as ambient vectors.
///
/// Second and third partials are stored packed-symmetric; mixed partials are
/// symmetric under index permutation by construction of both backends.
#[derive(Clone, Debug)]
pub struct Jet3 {
    pub order: usize,
    pub value: AmbientVector,
    pub first: Vec<AmbientVector>,
    second: Vec<AmbientVector>,
    third: Vec<AmbientVector>,
    m: usize,
}

impl Jet3 {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d2(&self, i: usize, j: usize) -> &AmbientVector {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        &self.second[hidx(i, j)]
    }

    pub fn d3(&self, i: usize, j: usize, k: usize) -> &AmbientVector {
        let mut v = [i, j, k];
        v.sort_unstable();
        &self.third[tidx(v[0], v[1], v[2])]
    }

    pub fn from_cjets(space: AmbientSpace, comps: &[CJet], m: usize, order: usize) -> Result<Jet3> {
        let d = space.model_dim();
        if comps.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: comps.len(),
            });
        }
        let take = |f: &dyn Fn(&CJet) -> Complex64| -> Result<AmbientVector> {
            let v: Vec<Complex64> = comps.iter().map(f).collect();
            AmbientVector::from_complex(space, &v)
        };
        let value = take(&|c| c.value())?;
        let mut first = Vec::new();
        if order >= 1 {
            for i in 0..m {
                first.push(take(&|c| Complex64::new(c.re.d(i), c.im.d(i)))?);
            }
        }
        let mut second = Vec::new();
        if order >= 2 {
            for j in 0..m {
                for i in 0..=j {
                    second.push(take(&|c| Complex64::new(c.re.d2(i, j), c.im.d2(i, j)))?);
                }
            }
        }
        let mut third = Vec::new();
        if order >= 3 {
            for k in 0..m {
                for j in 0..=k {
                    for i in 0..=j {
                        third.push(take(&|c| {
                            Complex64::new(c.re.d3(i, j, k), c.im.d3(i, j, k))
                        })?);
                    }
                }
            }
        }
        Ok(Jet3 {
            order,
            value,
            first,
            second,
            third,
            m,
        })
    }
}

/// Exact-jet evaluator: the chart knows how to produce truncated Taylor
/// expansions of each ambient component.
pub trait ExactMap: Send + Sync {
    fn dim(&self) -> usize;
    fn space(&self) -> AmbientSpace;
    fn eval(&self, u: &[f64], order: usize) -> Result<Vec<CJet>>;
    fn max_order(&self) -> usize {
        3
    }
}

/// Value-only evaluator for black-box charts (finite-difference backend).
pub trait PointMap: Send + Sync {
    fn dim(&self) -> usize;
    fn space(&self) -> AmbientSpace;
    fn eval(&self, u: &[f64]) -> Vec<Complex64>;
}

struct ExactAsPoint(Arc<dyn ExactMap>);

impl PointMap for ExactAsPoint {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn space(&self) -> AmbientSpace {
        self.0.space()
    }
    fn eval(&self, u: &[f64]) -> Vec<Complex64> {
        self.0
            .eval(u, 0)
            .expect("point evaluation inside domain")
            .iter()
            .map(|c| c.value())
            .collect()
    }
}

/// Finite-difference configuration. `step` drives first derivatives,
/// `step_high` (coarser, to limit cancellation) second and third ones.
#[derive(Clone, Copy, Debug)]
pub struct FdOptions {
    pub step: f64,
    pub step_high: f64,
}

impl FdOptions {
    pub fn for_scale(scale: f64) -> Self {
        FdOptions {
            step: 1e-4 * scale,
            step_high: 1e-3 * scale,
        }
    }
}

#[derive(Clone)]
enum Backend {
    Exact(Arc<dyn ExactMap>),
    Fd(Arc<dyn PointMap>, FdOptions),
}

/// A smooth map from a parameter box into an ambient model, evaluable with
/// derivatives to order ≤ 3.
#[derive(Clone)]
pub struct ChartImmersion {
    name: String,
    domain: Vec<(f64, f64)>,
    space: AmbientSpace,
    is_lift: bool,
    backend: Backend,
}

impl ChartImmersion {
    pub fn from_exact(
        name: impl Into<String>,
        domain: Vec<(f64, f64)>,
        is_lift: bool,
        map: Arc<dyn ExactMap>,
    ) -> Self {
        let space = map.space();
        assert_eq!(domain.len(), map.dim());
        ChartImmersion {
            name: name.into(),
            domain,
            space,
            is_lift,
            backend: Backend::Exact(map),
        }
    }

    pub fn from_points(
        name: impl Into<String>,
        domain: Vec<(f64, f64)>,
        is_lift: bool,
        map: Arc<dyn PointMap>,
        opts: FdOptions,
    ) -> Self {
        let space = map.space();
        assert_eq!(domain.len(), map.dim());
        ChartImmersion {
            name: name.into(),
            domain,
            space,
            is_lift,
            backend: Backend::Fd(map, opts),
        }
    }

    /// The same chart re-evaluated through the finite-difference backend;
    /// used to cross-validate the jet arithmetic.
    pub fn as_finite_difference(&self) -> ChartImmersion {
        let map: Arc<dyn PointMap> = match &self.backend {
            Backend::Exact(m) => Arc::new(ExactAsPoint(m.clone())),
            Backend::Fd(m, _) => m.clone(),
        };
        let scale = self
            .domain
            .iter()
            .map(|(lo, hi)| hi - lo)
            .fold(0.0_f64, f64::max)
            .max(1e-6);
        ChartImmersion {
            name: format!("{}(fd)", self.name),
            domain: self.domain.clone(),
            space: self.space,
            is_lift: self.is_lift,
            backend: Backend::Fd(map, FdOptions::for_scale(scale)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn space(&self) -> AmbientSpace {
        self.space
    }

    pub fn is_lift(&self) -> bool {
        self.is_lift
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.backend, Backend::Exact(_))
    }

    /// The exact-jet evaluator behind this chart, when it has one.
    pub fn exact_map(&self) -> Option<Arc<dyn ExactMap>> {
        match &self.backend {
            Backend::Exact(m) => Some(m.clone()),
            Backend::Fd(..) => None,
        }
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    fn check_inside(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: u.len(),
            });
        }
        for (axis, (&x, &(lo, hi))) in u.iter().zip(&self.domain).enumerate() {
            let slack = 1e-12 * (hi - lo).abs();
            if x < lo - slack || x > hi + slack {
                return Err(Error::OutsideDomain { axis, value: x });
            }
        }
        Ok(())
    }

    /// Evaluates the chart with all partial derivatives to `order`.
    pub fn evaluate_jet(&self, u: &[f64], order: usize) -> Result<Jet3> {
        self.check_inside(u)?;
        if order > 3 {
            return Err(Error::UnsupportedOrder {
                requested: order,
                max: 3,
            });
        }
        match &self.backend {
            Backend::Exact(map) => {
                if order > map.max_order() {
                    return Err(Error::UnsupportedOrder {
                        requested: order,
                        max: map.max_order(),
                    });
                }
                let cjets = map.eval(u, order)?;
                Jet3::from_cjets(self.space, &cjets, self.dim(), order)
            }
            Backend::Fd(map, opts) => fd_jet(map.as_ref(), u, order, *opts),
        }
    }

    /// max over i<j of |⟨J ∂_i L, ∂_j L⟩|; for lifts the horizontality
    /// residuals |⟨∂_i L, JL⟩| are folded in, which makes the value equal to
    /// the symplectic residual of the projected tangent plane.
    pub fn lagrangian_residual(&self, u: &[f64]) -> Result<f64> {
        let jet = self.evaluate_jet(u, 1)?;
        let mut res: f64 = 0.0;
        for i in 0..self.dim() {
            let ji = apply_j(&jet.first[i]);
            for j in (i + 1)..self.dim() {
                res = res.max(inner_unchecked(&ji, &jet.first[j]).abs());
            }
        }
        if self.is_lift {
            let jl = apply_j(&jet.value);
            for i in 0..self.dim() {
                res = res.max(inner_unchecked(&jet.first[i], &jl).abs());
            }
        }
        Ok(res)
    }

    /// Constraint-surface residual at a point (lifts only).
    pub fn constraint_residual(&self, u: &[f64]) -> Result<f64> {
        let jet = self.evaluate_jet(u, 0)?;
        crate::ambient::sphere_constraint_residual(&jet.value)
    }

    /// Horizontality residual max_i |⟨∂_i L, JL⟩| (lifts only).
    pub fn horizontality_residual(&self, u: &[f64]) -> Result<f64> {
        let jet = self.evaluate_jet(u, 1)?;
        let jl = apply_j(&jet.value);
        Ok((0..self.dim())
            .map(|i| inner_unchecked(&jet.first[i], &jl).abs())
            .fold(0.0, f64::max))
    }

    /// Induced metric g_ij = ⟨∂_i L, ∂_j L⟩. Errors when the immersion
    /// condition fails (singular-value ratio below `floor`).
    pub fn induced_metric_with_floor(&self, u: &[f64], floor: f64) -> Result<DMatrix<f64>> {
        let jet = self.evaluate_jet(u, 1)?;
        let g = gram_matrix(&jet.first);
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
        if smin < floor * smax {
            return Err(Error::DegenerateImmersion { ratio: smin / smax });
        }
        Ok(g)
    }

    pub fn induced_metric(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        self.induced_metric_with_floor(u, Tolerances::default().immersion_floor)
    }

    /// Smallest and largest singular values of the Jacobian at `u`.
    pub fn immersion_condition(&self, u: &[f64]) -> Result<(f64, f64)> {
        let jet = self.evaluate_jet(u, 1)?;
        let g = gram_matrix(&jet.first);
        let eig = g.symmetric_eigen();
        let mut smin = f64::INFINITY;
        let mut smax: f64 = 0.0;
        for &l in eig.eigenvalues.iter() {
            let s = l.max(0.0).sqrt();
            smin = smin.min(s);
            smax = smax.max(s);
        }
        Ok((smin, smax))
    }

    /// Interior tensor grid with `counts[i]` samples on axis i.
    pub fn grid(&self, counts: &[usize]) -> Vec<Vec<f64>> {
        assert_eq!(counts.len(), self.dim());
        let axes: Vec<Vec<f64>> = self
            .domain
            .iter()
            .zip(counts)
            .map(|(&(lo, hi), &g)| {
                (0..g.max(1))
                    .map(|k| lo + (hi - lo) * (k as f64 + 1.0) / (g.max(1) as f64 + 1.0))
                    .collect()
            })
            .collect();
        let mut points = vec![Vec::new()];
        for axis in &axes {
            let mut next = Vec::with_capacity(points.len() * axis.len());
            for p in &points {
                for &x in axis {
                    let mut q = p.clone();
                    q.push(x);
                    next.push(q);
                }
            }
            points = next;
        }
        points
    }

    /// Low-discrepancy (Halton) interior samples, kept 5% away from the
    /// boundary.
    pub fn halton(&self, count: usize) -> Vec<Vec<f64>> {
        const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
        (0..count)
            .map(|k| {
                self.domain
                    .iter()
                    .enumerate()
                    .map(|(axis, &(lo, hi))| {
                        let t = radical_inverse(k as u64 + 1, PRIMES[axis % PRIMES.len()]);
                        let margin = 0.05 * (hi - lo);
                        lo + margin + (hi - lo - 2.0 * margin) * t
                    })
                    .collect()
            })
            .collect()
    }

    /// Box center.
    pub fn center(&self) -> Vec<f64> {
        self.domain.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect()
    }
}

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let mut inv = 0.0;
    let mut f = 1.0 / base as f64;
    while k > 0 {
        inv += f * (k % base) as f64;
        k /= base;
        f /= base as f64;
    }
    inv
}

pub(crate) fn gram_matrix(vectors: &[AmbientVector]) -> DMatrix<f64> {
    let m = vectors.len();
    DMatrix::from_fn(m, m, |i, j| inner_unchecked(&vectors[i], &vectors[j]))
}

// ───────────────────────── finite differences ─────────────────────────

struct FdEval<'a> {
    map: &'a dyn PointMap,
    u: Vec<f64>,
    cache: BTreeMap<Vec<i64>, Vec<Complex64>>,
    half: Vec<f64>,
}

impl<'a> FdEval<'a> {
    /// Offsets are measured in half-steps per axis.
    fn at(&mut self, offsets: &[(usize, i64)]) -> Vec<Complex64> {
        let mut key = vec![0i64; self.u.len()];
        for &(axis, k) in offsets {
            key[axis] += k;
        }
        if let Some(v) = self.cache.get(&key) {
            return v.clone();
        }
        let mut point = self.u.clone();
        for (axis, &k) in key.iter().enumerate() {
            point[axis] += k as f64 * self.half[axis];
        }
        let v = self.map.eval(&point);
        self.cache.insert(key, v.clone());
        v
    }
}

fn cvec_axpy(acc: &mut [Complex64], s: f64, v: &[Complex64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += s * b;
    }
}

fn fd_jet(map: &dyn PointMap, u: &[f64], order: usize, opts: FdOptions) -> Result<Jet3> {
    let m = map.dim();
    let space = map.space();
    let d = space.model_dim();
    let to_av = |v: Vec<Complex64>| AmbientVector::from_complex(space, &v);

    let mut ev1 = FdEval {
        map,
        u: u.to_vec(),
        cache: BTreeMap::new(),
        half: vec![opts.step / 2.0; m],
    };
    let value = to_av(ev1.at(&[]))?;
    let mut first = Vec::new();
    if order >= 1 {
        for i in 0..m {
            // Richardson: (4 D(h/2) − D(h)) / 3 with central differences.
            let h = opts.step;
            let mut dh = vec![Complex64::default(); d];
            cvec_axpy(&mut dh, 0.5 / h, &ev1.at(&[(i, 2)]));
            cvec_axpy(&mut dh, -0.5 / h, &ev1.at(&[(i, -2)]));
            let mut dh2 = vec![Complex64::default(); d];
            cvec_axpy(&mut dh2, 1.0 / h, &ev1.at(&[(i, 1)]));
            cvec_axpy(&mut dh2, -1.0 / h, &ev1.at(&[(i, -1)]));
            let mut out = vec![Complex64::default(); d];
            for k in 0..d {
                out[k] = (4.0 * dh2[k] - dh[k]) / 3.0;
            }
            first.push(to_av(out)?);
        }
    }

    let mut ev2 = FdEval {
        map,
        u: u.to_vec(),
        cache: BTreeMap::new(),
        half: vec![opts.step_high / 2.0; m],
    };
    let h = opts.step_high;
    let mut second = Vec::new();
    if order >= 2 {
        for j in 0..m {
            for i in 0..=j {
                let one = |ev: &mut FdEval, s: i64| -> Vec<Complex64> {
                    // central second difference at scale s half-steps
                    let hh = h * s as f64 / 2.0;
                    let mut out = vec![Complex64::default(); d];
                    if i == j {
                        cvec_axpy(&mut out, 1.0 / (hh * hh), &ev.at(&[(i, s)]));
                        cvec_axpy(&mut out, -2.0 / (hh * hh), &ev.at(&[]));
                        cvec_axpy(&mut out, 1.0 / (hh * hh), &ev.at(&[(i, -s)]));
                    } else {
                        let q = 0.25 / (hh * hh);
                        cvec_axpy(&mut out, q, &ev.at(&[(i, s), (j, s)]));
                        cvec_axpy(&mut out, -q, &ev.at(&[(i, s), (j, -s)]));
                        cvec_axpy(&mut out, -q, &ev.at(&[(i, -s), (j, s)]));
                        cvec_axpy(&mut out, q, &ev.at(&[(i, -s), (j, -s)]));
                    }
                    out
                };
                let coarse = one(&mut ev2, 2);
                let fine = one(&mut ev2, 1);
                let mut out = vec![Complex64::default(); d];
                for k in 0..d {
                    out[k] = (4.0 * fine[k] - coarse[k]) / 3.0;
                }
                second.push(to_av(out)?);
            }
        }
    }

    let mut third = Vec::new();
    if order >= 3 {
        for k in 0..m {
            for j in 0..=k {
                for i in 0..=j {
                    let mut out = vec![Complex64::default(); d];
                    if i == j && j == k {
                        let q = 0.5 / (h * h * h);
                        cvec_axpy(&mut out, q, &ev2.at(&[(i, 4)]));
                        cvec_axpy(&mut out, -2.0 * q, &ev2.at(&[(i, 2)]));
                        cvec_axpy(&mut out, 2.0 * q, &ev2.at(&[(i, -2)]));
                        cvec_axpy(&mut out, -q, &ev2.at(&[(i, -4)]));
                    } else if i == j {
                        // ∂²_i ∂_k as central difference of the second stencil
                        let q = 0.5 / (h * h * h);
                        cvec_axpy(&mut out, q, &ev2.at(&[(i, 2), (k, 2)]));
                        cvec_axpy(&mut out, -2.0 * q, &ev2.at(&[(k, 2)]));
                        cvec_axpy(&mut out, q, &ev2.at(&[(i, -2), (k, 2)]));
                        cvec_axpy(&mut out, -q, &ev2.at(&[(i, 2), (k, -2)]));
                        cvec_axpy(&mut out, 2.0 * q, &ev2.at(&[(k, -2)]));
                        cvec_axpy(&mut out, -q, &ev2.at(&[(i, -2), (k, -2)]));
                    } else if j == k {
                        let q = 0.5 / (h * h * h);
                        cvec_axpy(&mut out, q, &ev2.at(&[(j, 2), (i, 2)]));
                        cvec_axpy(&mut out, -2.0 * q, &ev2.at(&[(i, 2)]));
                        cvec_axpy(&mut out, q, &ev2.at(&[(j, -2), (i, 2)]));
                        cvec_axpy(&mut out, -q, &ev2.at(&[(j, 2), (i, -2)]));
                        cvec_axpy(&mut out, 2.0 * q, &ev2.at(&[(i, -2)]));
                        cvec_axpy(&mut out, -q, &ev2.at(&[(j, -2), (i, -2)]));
                    } else {
                        let q = 0.125 / (h * h * h);
                        for si in [-1i64, 1] {
                            for sj in [-1i64, 1] {
                                for sk in [-1i64, 1] {
                                    let sign = (si * sj * sk) as f64;
                                    cvec_axpy(
                                        &mut out,
                                        sign * q,
                                        &ev2.at(&[(i, 2 * si), (j, 2 * sj), (k, 2 * sk)]),
                                    );
                                }
                            }
                        }
                    }
                    third.push(to_av(out)?);
                }
            }
        }
    }

    debug_assert!(order < 2 || second.len() == hess_len(m));
    debug_assert!(order < 3 || third.len() == third_len(m));
    Ok(Jet3 {
        order,
        value,
        first,
        second,
        third,
        m,
    })
}

// ───────────────────────── built-in simple charts ─────────────────────────

/// Graph of a gradient: u ↦ u + i ∇f(u) ⊂ C^m, Lagrangian for every
/// potential f.
pub struct GradientGraph {
    m: usize,
    potential: Polynomial,
    grads: Vec<Polynomial>,
}

impl GradientGraph {
    pub fn new(potential: Polynomial) -> Self {
        let m = potential.nvars;
        let grads = (0..m).map(|i| potential.partial(i)).collect();
        GradientGraph {
            m,
            potential,
            grads,
        }
    }

    pub fn potential(&self) -> &Polynomial {
        &self.potential
    }
}

impl ExactMap for GradientGraph {
    fn dim(&self) -> usize {
        self.m
    }
    fn space(&self) -> AmbientSpace {
        AmbientSpace::flat(self.m)
    }
    fn eval(&self, u: &[f64], order: usize) -> Result<Vec<CJet>> {
        let vars: Vec<Jet> = (0..self.m)
            .map(|i| Jet::variable(self.m, order, i, u[i]))
            .collect();
        Ok((0..self.m)
            .map(|k| CJet::new(vars[k].clone(), self.grads[k].eval_jet(&vars)))
            .collect())
    }
}

/// Product of unit circles (e^{iu₁}, …, e^{iu_n}) ⊂ C^n: flat, Lagrangian,
/// non-minimal.
pub struct TorusProduct {
    pub n: usize,
}

impl ExactMap for TorusProduct {
    fn dim(&self) -> usize {
        self.n
    }
    fn space(&self) -> AmbientSpace {
        AmbientSpace::flat(self.n)
    }
    fn eval(&self, u: &[f64], order: usize) -> Result<Vec<CJet>> {
        Ok((0..self.n)
            .map(|k| CJet::exp_i(&Jet::variable(self.n, order, k, u[k])))
            .collect())
    }
}

/// The plane (u₁ + iu₂, u₂) ⊂ C²: an immersion that is *not* Lagrangian
/// (symplectic residual exactly 1). Ships as a negative test subject.
pub struct ShearPlane;

impl ExactMap for ShearPlane {
    fn dim(&self) -> usize {
        2
    }
    fn space(&self) -> AmbientSpace {
        AmbientSpace::flat(2)
    }
    fn eval(&self, u: &[f64], order: usize) -> Result<Vec<CJet>> {
        let u1 = Jet::variable(2, order, 0, u[0]);
        let u2 = Jet::variable(2, order, 1, u[1]);
        Ok(vec![CJet::new(u1, u2.clone()), CJet::from_real(u2)])
    }
}

/// Unit circle t ↦ e^{it} ⊂ C¹.
pub struct CircleChart;

impl ExactMap for CircleChart {
    fn dim(&self) -> usize {
        1
    }
    fn space(&self) -> AmbientSpace {
        AmbientSpace::flat(1)
    }
    fn eval(&self, u: &[f64], order: usize) -> Result<Vec<CJet>> {
        Ok(vec![CJet::exp_i(&Jet::variable(1, order, 0, u[0]))])
    }
}

pub fn torus_chart(n: usize) -> ChartImmersion {
    ChartImmersion::from_exact(
        format!("torus-c{n}"),
        vec![(-3.0, 3.0); n],
        false,
        Arc::new(TorusProduct { n }),
    )
}

pub fn shear_chart() -> ChartImmersion {
    ChartImmersion::from_exact(
        "nonlagrangian-shear",
        vec![(-1.0, 1.0); 2],
        false,
        Arc::new(ShearPlane),
    )
}

pub fn circle_chart() -> ChartImmersion {
    ChartImmersion::from_exact("circle", vec![(-3.0, 3.0)], false, Arc::new(CircleChart))
}

pub fn gradient_graph_chart(potential: Polynomial, name: impl Into<String>) -> ChartImmersion {
    let m = potential.nvars;
    ChartImmersion::from_exact(
        name,
        vec![(-0.5, 0.5); m],
        false,
        Arc::new(GradientGraph::new(potential)),
    )
}

/// Deterministic random Lagrangian test subject: gradient graph of a random
/// polynomial potential of the given degree. The Jacobian Gram matrix of a
/// gradient graph is I + (Hess f)² ⪰ I, so the immersion condition can only
/// degrade through extreme coefficients; if that happens the coefficients
/// are shrunk and the attempt count reported.
pub fn random_gradient_graph_with_info(
    seed: u64,
    m: usize,
    degree: u32,
) -> Result<(ChartImmersion, usize)> {
    if m < 2 || degree < 2 {
        return Err(Error::InvalidParameter(
            "gradient graph needs m ≥ 2 and degree ≥ 2".into(),
        ));
    }
    let mut scale = 0.4;
    for attempt in 1..=8 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = Polynomial::random(&mut rng, m, degree, scale);
        let chart = gradient_graph_chart(f, format!("gradient-graph[seed={seed},m={m},deg={degree}]"));
        let floor = Tolerances::default().immersion_floor;
        let ok = chart.halton(16).iter().all(|u| {
            chart
                .immersion_condition(u)
                .map(|(smin, smax)| smin >= floor * smax)
                .unwrap_or(false)
        });
        if ok {
            return Ok((chart, attempt));
        }
        scale *= 0.5;
    }
    Err(Error::DegenerateImmersion { ratio: 0.0 })
}

pub fn random_gradient_graph(seed: u64, m: usize, degree: u32) -> Result<ChartImmersion> {
    random_gradient_graph_with_info(seed, m, degree).map(|(c, _)| c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    struct LinearMap;
    impl ExactMap for LinearMap {
        fn dim(&self) -> usize {
            2
        }
        fn space(&self) -> AmbientSpace {
            AmbientSpace::flat(2)
        }
        fn eval(&self, u: &[f64], order: usize) -> Result<Vec<CJet>> {
            let u1 = Jet::variable(2, order, 0, u[0]);
            let u2 = Jet::variable(2, order, 1, u[1]);
            Ok(vec![
                CJet::new(u1.clone(), u2.scale(2.0)),
                CJet::new(u1.add(&u2), u2.clone()),
            ])
        }
    }

    #[test]
    fn linear_map_has_zero_second_partials() {
        let chart = ChartImmersion::from_exact(
            "linear",
            vec![(-1.0, 1.0); 2],
            false,
            Arc::new(LinearMap),
        );
        let jet = chart.evaluate_jet(&[0.2, -0.3], 2).unwrap();
        for i in 0..2 {
            for j in i..2 {
                assert_relative_eq!(jet.d2(i, j).euclidean_norm(), 0.0);
            }
        }
    }

    #[test]
    fn circle_second_partial_is_minus_value() {
        let chart = circle_chart();
        let jet = chart.evaluate_jet(&[0.7], 2).unwrap();
        let z = jet.value.comp(0);
        let z2 = jet.d2(0, 0).comp(0);
        assert_relative_eq!(z2.re, -z.re, epsilon = 1e-14);
        assert_relative_eq!(z2.im, -z.im, epsilon = 1e-14);
    }

    #[test]
    fn finite_difference_jet_matches_analytic_jet() {
        let chart = random_gradient_graph(11, 3, 3).unwrap();
        let fd = chart.as_finite_difference();
        let u = [0.1, -0.2, 0.3];
        let a = chart.evaluate_jet(&u, 3).unwrap();
        let b = fd.evaluate_jet(&u, 3).unwrap();
        for i in 0..3 {
            assert!(a.first[i].sub(&b.first[i]).euclidean_norm() < 1e-8);
            for j in i..3 {
                assert!(a.d2(i, j).sub(b.d2(i, j)).euclidean_norm() < 1e-8);
                for k in j..3 {
                    assert!(a.d3(i, j, k).sub(b.d3(i, j, k)).euclidean_norm() < 1e-5);
                }
            }
        }
    }

    #[test]
    fn gradient_graphs_are_lagrangian() {
        let chart = random_gradient_graph(42, 5, 3).unwrap();
        for u in chart.halton(100) {
            assert!(chart.lagrangian_residual(&u).unwrap() < 1e-10);
        }
    }

    #[test]
    fn gradient_graph_is_deterministic_in_the_seed() {
        let a = random_gradient_graph(7, 4, 3).unwrap();
        let b = random_gradient_graph(7, 4, 3).unwrap();
        let u = [0.1, 0.2, -0.1, 0.05];
        let ja = a.evaluate_jet(&u, 1).unwrap();
        let jb = b.evaluate_jet(&u, 1).unwrap();
        assert_eq!(ja.value.interleaved(), jb.value.interleaved());
    }

    #[test]
    fn many_seeds_stay_lagrangian() {
        for seed in 0..100 {
            let chart = random_gradient_graph(seed, 3, 3).unwrap();
            for u in chart.halton(5) {
                assert!(chart.lagrangian_residual(&u).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn shear_plane_residual_is_one() {
        let chart = shear_chart();
        assert_relative_eq!(
            chart.lagrangian_residual(&[0.3, 0.4]).unwrap(),
            1.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn curves_are_trivially_lagrangian() {
        let chart = circle_chart();
        assert_relative_eq!(chart.lagrangian_residual(&[1.2]).unwrap(), 0.0);
    }

    #[test]
    fn flat_graph_metric_is_identity() {
        let chart = gradient_graph_chart(Polynomial::zero(3), "flat");
        let g = chart.induced_metric(&[0.1, 0.2, 0.3]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(g[(i, j)], if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn torus_metric_is_identity() {
        let chart = torus_chart(4);
        let g = chart.induced_metric(&[0.3, -0.2, 1.0, 0.4]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_relative_eq!(g[(i, j)], if i == j { 1.0 } else { 0.0 }, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn metric_matches_raw_finite_difference_gram_oracle() {
        // Independent oracle: plain two-point differences of the raw map,
        // no jets, no Richardson.
        let chart = random_gradient_graph(5, 3, 3).unwrap();
        let u = [0.15, -0.1, 0.2];
        let g = chart.induced_metric(&u).unwrap();
        let h = 1e-5;
        let eval = |u: &[f64]| {
            chart
                .evaluate_jet(u, 0)
                .unwrap()
                .value
                .complex_components()
        };
        let mut tangents = Vec::new();
        for i in 0..3 {
            let mut up = u.to_vec();
            let mut dn = u.to_vec();
            up[i] += h;
            dn[i] -= h;
            let (a, b) = (eval(&up), eval(&dn));
            let t: Vec<Complex64> = a
                .iter()
                .zip(&b)
                .map(|(x, y)| (x - y) / (2.0 * h))
                .collect();
            tangents.push(t);
        }
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = tangents[i]
                    .iter()
                    .zip(&tangents[j])
                    .map(|(a, b)| (a * b.conj()).re)
                    .sum();
                assert!((g[(i, j)] - dot).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn metric_invariant_under_orthogonal_reparametrization() {
        // Precomposing the chart with a rotation Q turns g into Qᵀ g Q; the
        // jets handle the chain rule on their own.
        struct RotatedGraph {
            grads: Vec<Polynomial>,
            q: [[f64; 2]; 2],
        }
        impl ExactMap for RotatedGraph {
            fn dim(&self) -> usize {
                2
            }
            fn space(&self) -> AmbientSpace {
                AmbientSpace::flat(2)
            }
            fn eval(&self, u: &[f64], order: usize) -> Result<Vec<CJet>> {
                let vars: Vec<Jet> = (0..2).map(|i| Jet::variable(2, order, i, u[i])).collect();
                let v = [
                    vars[0].scale(self.q[0][0]).add(&vars[1].scale(self.q[0][1])),
                    vars[0].scale(self.q[1][0]).add(&vars[1].scale(self.q[1][1])),
                ];
                Ok((0..2)
                    .map(|k| CJet::new(v[k].clone(), self.grads[k].eval_jet(&v)))
                    .collect())
            }
        }
        let theta: f64 = 0.6;
        let q = [[theta.cos(), -theta.sin()], [theta.sin(), theta.cos()]];
        let f = Polynomial::new(
            2,
            vec![
                crate::poly::Term {
                    coeff: 0.3,
                    powers: vec![2, 1],
                },
                crate::poly::Term {
                    coeff: -0.2,
                    powers: vec![0, 3],
                },
            ],
        );
        let grads: Vec<Polynomial> = (0..2).map(|i| f.partial(i)).collect();
        let plain = gradient_graph_chart(f, "g");
        let rotated = ChartImmersion::from_exact(
            "g∘Q",
            vec![(-1.0, 1.0); 2],
            false,
            Arc::new(RotatedGraph { grads, q }),
        );
        let u = [0.2, -0.1];
        let v = [
            q[0][0] * u[0] + q[0][1] * u[1],
            q[1][0] * u[0] + q[1][1] * u[1],
        ];
        let g_rot = rotated.induced_metric(&u).unwrap();
        let g_at_v = plain.induced_metric(&v).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let mut exp = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        exp += q[i][a] * g_at_v[(i, j)] * q[j][b];
                    }
                }
                assert_relative_eq!(g_rot[(a, b)], exp, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn outside_domain_is_rejected() {
        let chart = circle_chart();
        assert!(matches!(
            chart.evaluate_jet(&[5.0], 1),
            Err(Error::OutsideDomain { .. })
        ));
    }
}
