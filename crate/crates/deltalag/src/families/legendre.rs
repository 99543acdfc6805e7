//! Legendre curves in S³(1) and H³₁(−1).
//!
//! A unit-speed curve z with ⟨z′, iz⟩ = 0 satisfies z″ = iλz′ − z in the
//! sphere (resp. z″ = iλz′ + z in H³₁) for its curvature function λ. The
//! integrator carries (z, z′) as a first-order system, co-integrating the
//! (μ, ν) ODE when λ = rμ so that the curvature stays exactly synchronized
//! with the family dynamics.

use super::ode::{mu_nu_rhs, FamilyKind};
use crate::ambient::{AmbientSpace, AmbientVector};
use crate::{Error, Result};
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveModel {
    /// S³(1) ⊂ C²: z″ = iλz′ − z.
    Sphere,
    /// H³₁(−1) ⊂ C²₁: z″ = iλz′ + z.
    Hyperbolic,
}

impl CurveModel {
    pub fn space(&self) -> AmbientSpace {
        match self {
            CurveModel::Sphere => AmbientSpace::projective(1),
            CurveModel::Hyperbolic => AmbientSpace::hyperbolic(1),
        }
    }

    /// Sign of the z-term in z″ = iλz′ ∓ z.
    fn position_sign(&self) -> f64 {
        match self {
            CurveModel::Sphere => -1.0,
            CurveModel::Hyperbolic => 1.0,
        }
    }

    fn hermitian(&self, u: [Complex64; 2], v: [Complex64; 2]) -> Complex64 {
        let s0 = if matches!(self, CurveModel::Hyperbolic) {
            -1.0
        } else {
            1.0
        };
        s0 * u[0] * v[0].conj() + u[1] * v[1].conj()
    }
}

/// Prescribed curvature: a constant, or λ = r·μ with μ from a co-integrated
/// family system.
#[derive(Clone, Copy, Debug)]
pub enum LambdaSpec {
    Constant(f64),
    RatioMu {
        r: f64,
        kind: FamilyKind,
        mu0: f64,
        nu0: f64,
    },
}

/// Discretized Legendre curve with velocity and curvature samples.
#[derive(Clone, Debug)]
pub struct LegendreCurve {
    pub model: CurveModel,
    pub ts: Vec<f64>,
    pub z: Vec<[Complex64; 2]>,
    pub dz: Vec<[Complex64; 2]>,
    pub lambda: Vec<f64>,
    /// (μ, ν) alongside each sample when co-integrated.
    pub mu_nu: Vec<(f64, f64)>,
    pub step: f64,
    /// Worst constraint / unit-speed / horizontality drift over the curve.
    pub max_drift: f64,
}

impl LegendreCurve {
    pub fn sample_count(&self) -> usize {
        self.ts.len()
    }

    pub fn position(&self, idx: usize) -> Result<AmbientVector> {
        AmbientVector::from_complex(self.model.space(), &self.z[idx])
    }

    pub fn velocity(&self, idx: usize) -> Result<AmbientVector> {
        AmbientVector::from_complex(self.model.space(), &self.dz[idx])
    }

    fn index_below(&self, t: f64) -> usize {
        let t0 = self.ts[0];
        let idx = ((t - t0) / self.step).floor() as isize;
        idx.clamp(0, self.ts.len() as isize - 1) as usize
    }

    /// State (z, z′, μ, ν) at arbitrary t, by a short RK4 substep from the
    /// nearest stored node.
    pub fn state_at(&self, t: f64, lambda: &LambdaSpec, model: CurveModel) -> LegendreState {
        let idx = self.index_below(t);
        let mut y = pack_state(self.z[idx], self.dz[idx], self.mu_nu[idx]);
        let mut tc = self.ts[idx];
        let f = |t: f64, y: &[f64]| legendre_rhs(t, y, lambda, model);
        while (t - tc).abs() > 1e-14 {
            let h = (t - tc).clamp(-self.step, self.step);
            y = super::rk4_step(&f, tc, &y, h);
            tc += h;
        }
        unpack_state(&y, lambda)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LegendreState {
    pub z: [Complex64; 2],
    pub dz: [Complex64; 2],
    pub mu: f64,
    pub nu: f64,
    pub lambda: f64,
    pub dlambda: f64,
}

fn pack_state(z: [Complex64; 2], dz: [Complex64; 2], mu_nu: (f64, f64)) -> Vec<f64> {
    vec![
        z[0].re, z[0].im, z[1].re, z[1].im, dz[0].re, dz[0].im, dz[1].re, dz[1].im, mu_nu.0,
        mu_nu.1,
    ]
}

fn unpack_state(y: &[f64], lambda: &LambdaSpec) -> LegendreState {
    let z = [Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3])];
    let dz = [Complex64::new(y[4], y[5]), Complex64::new(y[6], y[7])];
    let (mu, nu) = (y[8], y[9]);
    let (lambda, dlambda) = match lambda {
        LambdaSpec::Constant(l) => (*l, 0.0),
        LambdaSpec::RatioMu { r, .. } => (r * mu, r * 2.0 * mu * nu),
    };
    LegendreState {
        z,
        dz,
        mu,
        nu,
        lambda,
        dlambda,
    }
}

fn legendre_rhs(_t: f64, y: &[f64], lambda: &LambdaSpec, model: CurveModel) -> Vec<f64> {
    let st = unpack_state(y, lambda);
    let sign = model.position_sign();
    // z″ = iλ z′ + sign·z
    let i = Complex64::new(0.0, 1.0);
    let ddz = [
        i * st.lambda * st.dz[0] + sign * st.z[0],
        i * st.lambda * st.dz[1] + sign * st.z[1],
    ];
    let (dmu, dnu) = match lambda {
        LambdaSpec::Constant(_) => (0.0, 0.0),
        LambdaSpec::RatioMu { kind, .. } => mu_nu_rhs(*kind, st.mu, st.nu),
    };
    vec![
        st.dz[0].re,
        st.dz[0].im,
        st.dz[1].re,
        st.dz[1].im,
        ddz[0].re,
        ddz[0].im,
        ddz[1].re,
        ddz[1].im,
        dmu,
        dnu,
    ]
}

fn curve_invariant_drift(model: CurveModel, z: [Complex64; 2], dz: [Complex64; 2]) -> f64 {
    let eps = match model {
        CurveModel::Sphere => 1.0,
        CurveModel::Hyperbolic => -1.0,
    };
    let pos = (model.hermitian(z, z).re - eps).abs();
    let speed = (model.hermitian(dz, dz).re - 1.0).abs();
    // ⟨z′, iz⟩ = Im⟨⟨z′, z⟩⟩
    let horiz = model.hermitian(dz, z).im.abs();
    pos.max(speed).max(horiz)
}

/// Integrates a Legendre curve over `span` (which must contain the initial
/// parameter 0), validating the Legendre initial conditions and the
/// conservation of the curve invariants along the way.
pub fn integrate_legendre(
    lambda: &LambdaSpec,
    model: CurveModel,
    z0: [Complex64; 2],
    dz0: [Complex64; 2],
    span: (f64, f64),
    step: f64,
) -> Result<LegendreCurve> {
    if span.0 > 0.0 || span.1 < 0.0 || step <= 0.0 {
        return Err(Error::InvalidParameter(
            "span must contain 0 and step must be positive".into(),
        ));
    }
    let init_drift = curve_invariant_drift(model, z0, dz0);
    if init_drift > 1e-9 {
        return Err(Error::NotOnModel {
            residual: init_drift,
        });
    }
    let (mu0, nu0) = match lambda {
        LambdaSpec::Constant(_) => (0.0, 0.0),
        LambdaSpec::RatioMu { mu0, nu0, .. } => (*mu0, *nu0),
    };

    let f = |t: f64, y: &[f64]| legendre_rhs(t, y, lambda, model);
    let integrate_dir = |t_end: f64| -> Vec<(f64, Vec<f64>)> {
        let mut out = Vec::new();
        let mut t = 0.0;
        let mut y = pack_state(z0, dz0, (mu0, nu0));
        let dir = if t_end >= 0.0 { 1.0 } else { -1.0 };
        let steps = (t_end.abs() / step).ceil() as usize;
        for _ in 0..steps {
            let h = if (t_end - t).abs() < step {
                t_end - t
            } else {
                step * dir
            };
            if h == 0.0 {
                break;
            }
            y = super::rk4_step(&f, t, &y, h);
            t += h;
            out.push((t, y.clone()));
        }
        out
    };

    let backward = integrate_dir(span.0);
    let forward = integrate_dir(span.1);
    let mut samples: Vec<(f64, Vec<f64>)> = backward.into_iter().rev().collect();
    samples.push((0.0, pack_state(z0, dz0, (mu0, nu0))));
    samples.extend(forward);

    let mut curve = LegendreCurve {
        model,
        ts: Vec::with_capacity(samples.len()),
        z: Vec::with_capacity(samples.len()),
        dz: Vec::with_capacity(samples.len()),
        lambda: Vec::with_capacity(samples.len()),
        mu_nu: Vec::with_capacity(samples.len()),
        step,
        max_drift: 0.0,
    };
    for (t, y) in samples {
        let st = unpack_state(&y, lambda);
        curve.max_drift = curve
            .max_drift
            .max(curve_invariant_drift(model, st.z, st.dz));
        curve.ts.push(t);
        curve.z.push(st.z);
        curve.dz.push(st.dz);
        curve.lambda.push(st.lambda);
        curve.mu_nu.push((st.mu, st.nu));
    }
    if curve.max_drift > 1e-7 {
        return Err(Error::InvariantDrift {
            drift: curve.max_drift,
        });
    }
    Ok(curve)
}

/// Standard Legendre initial conditions z(0) = (1, 0), z′(0) = (0, 1),
/// valid in both models.
pub fn standard_init() -> ([Complex64; 2], [Complex64; 2]) {
    (
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    )
}
