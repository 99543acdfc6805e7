//! Truncated Taylor arithmetic ("jets") in several real variables, exact to
//! third order.
//!
//! A [`Jet`] carries the value of a function together with its gradient,
//! Hessian and (optionally) third derivatives at a point, stored in packed
//! symmetric layout. Arithmetic propagates all coefficients exactly, so
//! charts built from closed-form expressions deliver machine-precision
//! derivatives to the curvature pipeline. [`CJet`] is a complex coordinate
//! whose real and imaginary parts are jets.

use num_complex::Complex64;

#[inline]
pub(crate) fn hess_len(n: usize) -> usize {
    n * (n + 1) / 2
}

#[inline]
pub(crate) fn third_len(n: usize) -> usize {
    n * (n + 1) * (n + 2) / 6
}

/// Packed index for the symmetric pair (i, j), i ≤ j.
#[inline]
pub(crate) fn hidx(i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    j * (j + 1) / 2 + i
}

/// Packed index for the sorted triple (i, j, k), i ≤ j ≤ k.
#[inline]
pub(crate) fn tidx(i: usize, j: usize, k: usize) -> usize {
    debug_assert!(i <= j && j <= k);
    k * (k + 1) * (k + 2) / 6 + j * (j + 1) / 2 + i
}

fn sort2(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn sort3(a: usize, b: usize, c: usize) -> (usize, usize, usize) {
    let (x, y) = sort2(a, b);
    if c >= y {
        (x, y, c)
    } else if c >= x {
        (x, c, y)
    } else {
        (c, x, y)
    }
}

/// Truncated Taylor expansion of a scalar function of `nvars` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    nvars: usize,
    order: usize,
    pub val: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
    third: Vec<f64>,
}

impl Jet {
    pub fn constant(nvars: usize, order: usize, val: f64) -> Self {
        assert!(order <= 3);
        Jet {
            nvars,
            order,
            val,
            grad: vec![0.0; if order >= 1 { nvars } else { 0 }],
            hess: vec![0.0; if order >= 2 { hess_len(nvars) } else { 0 }],
            third: vec![0.0; if order >= 3 { third_len(nvars) } else { 0 }],
        }
    }

    /// The coordinate function u_idx, expanded at value `val`.
    pub fn variable(nvars: usize, order: usize, idx: usize, val: f64) -> Self {
        let mut j = Self::constant(nvars, order, val);
        if order >= 1 {
            j.grad[idx] = 1.0;
        }
        j
    }

    /// Builds a jet from prescribed derivative values.
    pub fn from_parts(
        nvars: usize,
        order: usize,
        val: f64,
        grad: Vec<f64>,
        hess: Vec<f64>,
        third: Vec<f64>,
    ) -> Self {
        let mut j = Self::constant(nvars, order, val);
        if order >= 1 {
            assert_eq!(grad.len(), nvars);
            j.grad = grad;
        }
        if order >= 2 {
            assert_eq!(hess.len(), hess_len(nvars));
            j.hess = hess;
        }
        if order >= 3 {
            assert_eq!(third.len(), third_len(nvars));
            j.third = third;
        }
        j
    }

    /// A univariate Taylor series c₀ + c₁ δ + c₂ δ²/2! + c₃ δ³/3! planted on
    /// coordinate axis `axis` (cᵣ are derivative values, not monomial
    /// coefficients).
    pub fn from_axis_series(nvars: usize, order: usize, axis: usize, c: [f64; 4]) -> Self {
        let mut j = Self::constant(nvars, order, c[0]);
        if order >= 1 {
            j.grad[axis] = c[1];
        }
        if order >= 2 {
            j.hess[hidx(axis, axis)] = c[2];
        }
        if order >= 3 {
            j.third[tidx(axis, axis, axis)] = c[3];
        }
        j
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn d(&self, i: usize) -> f64 {
        if self.order >= 1 {
            self.grad[i]
        } else {
            0.0
        }
    }

    pub fn d2(&self, i: usize, j: usize) -> f64 {
        if self.order >= 2 {
            let (i, j) = sort2(i, j);
            self.hess[hidx(i, j)]
        } else {
            0.0
        }
    }

    pub fn d3(&self, i: usize, j: usize, k: usize) -> f64 {
        if self.order >= 3 {
            let (i, j, k) = sort3(i, j, k);
            self.third[tidx(i, j, k)]
        } else {
            0.0
        }
    }

    fn check(&self, rhs: &Jet) {
        debug_assert_eq!(self.nvars, rhs.nvars);
        debug_assert_eq!(self.order, rhs.order);
    }

    pub fn add(&self, rhs: &Jet) -> Jet {
        self.check(rhs);
        let mut out = self.clone();
        for (a, b) in out.grad.iter_mut().zip(&rhs.grad) {
            *a += b;
        }
        for (a, b) in out.hess.iter_mut().zip(&rhs.hess) {
            *a += b;
        }
        for (a, b) in out.third.iter_mut().zip(&rhs.third) {
            *a += b;
        }
        out.val += rhs.val;
        out
    }

    pub fn sub(&self, rhs: &Jet) -> Jet {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Jet {
        self.scale(-1.0)
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.val *= s;
        for a in &mut out.grad {
            *a *= s;
        }
        for a in &mut out.hess {
            *a *= s;
        }
        for a in &mut out.third {
            *a *= s;
        }
        out
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.val += s;
        out
    }

    /// Leibniz product, exact through the stored order.
    pub fn mul(&self, rhs: &Jet) -> Jet {
        self.check(rhs);
        let n = self.nvars;
        let mut out = Jet::constant(n, self.order, self.val * rhs.val);
        if self.order >= 1 {
            for i in 0..n {
                out.grad[i] = self.val * rhs.grad[i] + self.grad[i] * rhs.val;
            }
        }
        if self.order >= 2 {
            for j in 0..n {
                for i in 0..=j {
                    out.hess[hidx(i, j)] = self.val * rhs.hess[hidx(i, j)]
                        + self.hess[hidx(i, j)] * rhs.val
                        + self.grad[i] * rhs.grad[j]
                        + self.grad[j] * rhs.grad[i];
                }
            }
        }
        if self.order >= 3 {
            for k in 0..n {
                for j in 0..=k {
                    for i in 0..=j {
                        let t = self.val * rhs.third[tidx(i, j, k)]
                            + self.third[tidx(i, j, k)] * rhs.val
                            + self.grad[i] * rhs.hess[hidx(j, k)]
                            + self.grad[j] * rhs.hess[hidx(i, k)]
                            + self.grad[k] * rhs.hess[hidx(i, j)]
                            + rhs.grad[i] * self.hess[hidx(j, k)]
                            + rhs.grad[j] * self.hess[hidx(i, k)]
                            + rhs.grad[k] * self.hess[hidx(i, j)];
                        out.third[tidx(i, j, k)] = t;
                    }
                }
            }
        }
        out
    }

    /// Composition with a scalar function given by its derivative values
    /// (f, f′, f″, f‴) at `self.val` (Faà di Bruno to third order).
    pub fn compose(&self, f: [f64; 4]) -> Jet {
        let n = self.nvars;
        let mut out = Jet::constant(n, self.order, f[0]);
        if self.order >= 1 {
            for i in 0..n {
                out.grad[i] = f[1] * self.grad[i];
            }
        }
        if self.order >= 2 {
            for j in 0..n {
                for i in 0..=j {
                    out.hess[hidx(i, j)] =
                        f[1] * self.hess[hidx(i, j)] + f[2] * self.grad[i] * self.grad[j];
                }
            }
        }
        if self.order >= 3 {
            for k in 0..n {
                for j in 0..=k {
                    for i in 0..=j {
                        out.third[tidx(i, j, k)] = f[1] * self.third[tidx(i, j, k)]
                            + f[2]
                                * (self.grad[i] * self.hess[hidx(j, k)]
                                    + self.grad[j] * self.hess[hidx(i, k)]
                                    + self.grad[k] * self.hess[hidx(i, j)])
                            + f[3] * self.grad[i] * self.grad[j] * self.grad[k];
                    }
                }
            }
        }
        out
    }

    pub fn recip(&self) -> Jet {
        let v = self.val;
        self.compose([1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v), -6.0 / (v * v * v * v)])
    }

    pub fn div(&self, rhs: &Jet) -> Jet {
        self.mul(&rhs.recip())
    }

    pub fn sqrt(&self) -> Jet {
        let v = self.val;
        let s = v.sqrt();
        self.compose([s, 0.5 / s, -0.25 / (s * v), 0.375 / (s * v * v)])
    }

    pub fn exp(&self) -> Jet {
        let e = self.val.exp();
        self.compose([e, e, e, e])
    }

    pub fn ln(&self) -> Jet {
        let v = self.val;
        self.compose([v.ln(), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)])
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.val.sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.val.sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn sinh(&self) -> Jet {
        let (s, c) = (self.val.sinh(), self.val.cosh());
        self.compose([s, c, s, c])
    }

    pub fn cosh(&self) -> Jet {
        let (s, c) = (self.val.sinh(), self.val.cosh());
        self.compose([c, s, c, s])
    }

    pub fn tanh(&self) -> Jet {
        let t = self.val.tanh();
        let d = 1.0 - t * t;
        self.compose([t, d, -2.0 * t * d, d * (6.0 * t * t - 2.0)])
    }

    pub fn atan(&self) -> Jet {
        let v = self.val;
        let d = 1.0 + v * v;
        self.compose([
            v.atan(),
            1.0 / d,
            -2.0 * v / (d * d),
            (6.0 * v * v - 2.0) / (d * d * d),
        ])
    }

    pub fn powi(&self, p: u32) -> Jet {
        match p {
            0 => Jet::constant(self.nvars, self.order, 1.0),
            _ => {
                let mut acc = self.clone();
                for _ in 1..p {
                    acc = acc.mul(self);
                }
                acc
            }
        }
    }

    /// Drops derivative information above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        let mut out = Jet::constant(self.nvars, order, self.val);
        if order >= 1 {
            out.grad.copy_from_slice(&self.grad);
        }
        if order >= 2 {
            out.hess.copy_from_slice(&self.hess);
        }
        if order >= 3 {
            out.third.copy_from_slice(&self.third);
        }
        out
    }

    /// ∂/∂x_axis as a jet of one order less.
    pub fn differentiate(&self, axis: usize) -> Jet {
        assert!(self.order >= 1);
        let n = self.nvars;
        let order = self.order - 1;
        let mut out = Jet::constant(n, order, self.grad[axis]);
        if order >= 1 {
            for i in 0..n {
                out.grad[i] = self.d2(axis, i);
            }
        }
        if order >= 2 {
            for j in 0..n {
                for i in 0..=j {
                    out.hess[hidx(i, j)] = self.d3(axis, i, j);
                }
            }
        }
        out
    }

    /// Re-embeds a jet in `self.nvars` variables into a jet in `nvars_new`
    /// variables, shifting every variable index by `offset`.
    pub fn embed(&self, nvars_new: usize, offset: usize) -> Jet {
        assert!(self.nvars + offset <= nvars_new);
        let mut out = Jet::constant(nvars_new, self.order, self.val);
        if self.order >= 1 {
            for i in 0..self.nvars {
                out.grad[i + offset] = self.grad[i];
            }
        }
        if self.order >= 2 {
            for j in 0..self.nvars {
                for i in 0..=j {
                    out.hess[hidx(i + offset, j + offset)] = self.hess[hidx(i, j)];
                }
            }
        }
        if self.order >= 3 {
            for k in 0..self.nvars {
                for j in 0..=k {
                    for i in 0..=j {
                        out.third[tidx(i + offset, j + offset, k + offset)] =
                            self.third[tidx(i, j, k)];
                    }
                }
            }
        }
        out
    }
}

/// A complex quantity whose real and imaginary parts are jets.
#[derive(Clone, Debug)]
pub struct CJet {
    pub re: Jet,
    pub im: Jet,
}

impl CJet {
    pub fn new(re: Jet, im: Jet) -> Self {
        CJet { re, im }
    }

    pub fn constant(nvars: usize, order: usize, z: Complex64) -> Self {
        CJet {
            re: Jet::constant(nvars, order, z.re),
            im: Jet::constant(nvars, order, z.im),
        }
    }

    pub fn from_real(re: Jet) -> Self {
        let im = Jet::constant(re.nvars(), re.order(), 0.0);
        CJet { re, im }
    }

    /// Univariate complex Taylor series (derivative values) on one axis.
    pub fn from_axis_series(nvars: usize, order: usize, axis: usize, c: [Complex64; 4]) -> Self {
        CJet {
            re: Jet::from_axis_series(nvars, order, axis, [c[0].re, c[1].re, c[2].re, c[3].re]),
            im: Jet::from_axis_series(nvars, order, axis, [c[0].im, c[1].im, c[2].im, c[3].im]),
        }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.val, self.im.val)
    }

    pub fn add(&self, rhs: &CJet) -> CJet {
        CJet {
            re: self.re.add(&rhs.re),
            im: self.im.add(&rhs.im),
        }
    }

    pub fn sub(&self, rhs: &CJet) -> CJet {
        CJet {
            re: self.re.sub(&rhs.re),
            im: self.im.sub(&rhs.im),
        }
    }

    pub fn neg(&self) -> CJet {
        CJet {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    pub fn conj(&self) -> CJet {
        CJet {
            re: self.re.clone(),
            im: self.im.neg(),
        }
    }

    pub fn mul(&self, rhs: &CJet) -> CJet {
        CJet {
            re: self.re.mul(&rhs.re).sub(&self.im.mul(&rhs.im)),
            im: self.re.mul(&rhs.im).add(&self.im.mul(&rhs.re)),
        }
    }

    pub fn mul_real(&self, rhs: &Jet) -> CJet {
        CJet {
            re: self.re.mul(rhs),
            im: self.im.mul(rhs),
        }
    }

    pub fn scale(&self, s: f64) -> CJet {
        CJet {
            re: self.re.scale(s),
            im: self.im.scale(s),
        }
    }

    pub fn scale_complex(&self, z: Complex64) -> CJet {
        CJet {
            re: self.re.scale(z.re).sub(&self.im.scale(z.im)),
            im: self.re.scale(z.im).add(&self.im.scale(z.re)),
        }
    }

    /// Multiplication by i.
    pub fn mul_i(&self) -> CJet {
        CJet {
            re: self.im.neg(),
            im: self.re.clone(),
        }
    }

    pub fn norm_sqr(&self) -> Jet {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    pub fn recip(&self) -> CJet {
        let n = self.norm_sqr().recip();
        self.conj().mul_real(&n)
    }

    pub fn div(&self, rhs: &CJet) -> CJet {
        self.mul(&rhs.recip())
    }

    /// e^{iφ} for a real jet φ.
    pub fn exp_i(phi: &Jet) -> CJet {
        CJet {
            re: phi.cos(),
            im: phi.sin(),
        }
    }

    pub fn embed(&self, nvars_new: usize, offset: usize) -> CJet {
        CJet {
            re: self.re.embed(nvars_new, offset),
            im: self.im.embed(nvars_new, offset),
        }
    }

    pub fn truncate(&self, order: usize) -> CJet {
        CJet {
            re: self.re.truncate(order),
            im: self.im.truncate(order),
        }
    }

    pub fn differentiate(&self, axis: usize) -> CJet {
        CJet {
            re: self.re.differentiate(axis),
            im: self.im.differentiate(axis),
        }
    }
}
