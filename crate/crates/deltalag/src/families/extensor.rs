//! Generating curves in C* and complex extensors.
//!
//! The complex extensor of the unit hypersphere ι: S^{n−1} ⊂ E^n via a unit
//! speed curve γ is (γ ⊗ ι)(s, p) = γ(s)·ι(p) ⊂ C^n. With γ = r e^{iθ},
//! γ′ = e^{iζ}, the extensor is H-umbilical with φ = ζ′ = κ and μ = θ′, so
//! generating curves with κ = 4θ′ produce the flat-ambient ratio-4 family.

use crate::immersion::{ChartImmersion, ExactMap};
use crate::jet::{CJet, Jet};
use crate::{ambient::AmbientSpace, Error, Result};
use num_complex::Complex64;
use std::sync::Arc;

#[derive(Clone, Debug)]
enum CurveKind {
    /// γ(t) = e^{it}: unit circle (H-umbilical of ratio 1).
    Circle,
    /// γ(t) = (t₀ + t)·e^{iα}: a ray through the origin (totally geodesic
    /// extensor, the excluded case).
    Ray { phase: f64, offset: f64 },
    /// κ = 4θ′ with μ = θ′ solving the flat (μ, ν) system; dense table.
    Ratio4 {
        table: Vec<Ratio4Node>,
        step: f64,
        t_min: f64,
    },
}

#[derive(Clone, Copy, Debug)]
struct Ratio4Node {
    t: f64,
    gamma: Complex64,
    zeta: f64,
    theta: f64,
    mu: f64,
    nu: f64,
}

/// A unit-speed planar curve evaluable with derivatives, tracking the polar
/// angle data (r, θ, ζ) of its generating-curve role.
#[derive(Clone, Debug)]
pub struct PlanarCurve {
    kind: CurveKind,
    pub span: (f64, f64),
}

impl PlanarCurve {
    pub fn unit_circle(span: (f64, f64)) -> Self {
        PlanarCurve {
            kind: CurveKind::Circle,
            span,
        }
    }

    pub fn ray(phase: f64, offset: f64, span: (f64, f64)) -> Self {
        PlanarCurve {
            kind: CurveKind::Ray { phase, offset },
            span,
        }
    }

    /// (γ, γ′, γ″, γ‴) at t.
    pub fn gamma_series(&self, t: f64) -> [Complex64; 4] {
        match &self.kind {
            CurveKind::Circle => {
                let g = Complex64::new(0.0, t).exp();
                let i = Complex64::new(0.0, 1.0);
                [g, i * g, -g, -i * g]
            }
            CurveKind::Ray { phase, offset } => {
                let dir = Complex64::new(0.0, *phase).exp();
                [
                    (offset + t) * dir,
                    dir,
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                ]
            }
            CurveKind::Ratio4 { .. } => {
                let n = self.node_at(t);
                let dgamma = Complex64::new(0.0, n.zeta).exp();
                // γ″ = iζ′γ′ = 4iμ γ′, γ‴ = i(4μ)′γ′ + 4iμ γ″
                let i = Complex64::new(0.0, 1.0);
                let ddgamma = 4.0 * i * n.mu * dgamma;
                let dddgamma = 8.0 * i * n.mu * n.nu * dgamma + 4.0 * i * n.mu * ddgamma;
                [n.gamma, dgamma, ddgamma, dddgamma]
            }
        }
    }

    /// θ′ = μ at t (the polar-angle rate of the generating curve).
    pub fn theta_prime(&self, t: f64) -> f64 {
        match &self.kind {
            CurveKind::Circle => 1.0,
            CurveKind::Ray { .. } => 0.0,
            CurveKind::Ratio4 { .. } => self.node_at(t).mu,
        }
    }

    pub fn mu_at(&self, t: f64) -> f64 {
        self.theta_prime(t)
    }

    pub fn radius_at(&self, t: f64) -> f64 {
        self.gamma_series(t)[0].norm()
    }

    /// Curvature κ = ζ′ of the unit-speed curve.
    pub fn curvature_at(&self, t: f64) -> f64 {
        match &self.kind {
            CurveKind::Circle => 1.0,
            CurveKind::Ray { .. } => 0.0,
            CurveKind::Ratio4 { .. } => 4.0 * self.node_at(t).mu,
        }
    }

    fn node_at(&self, t: f64) -> Ratio4Node {
        let CurveKind::Ratio4 { table, step, t_min } = &self.kind else {
            unreachable!();
        };
        let idx = (((t - t_min) / step).floor() as isize).clamp(0, table.len() as isize - 1)
            as usize;
        let node = &table[idx];
        let mut y = vec![node.gamma.re, node.gamma.im, node.zeta, node.theta, node.mu, node.nu];
        let mut tc = node.t;
        while (t - tc).abs() > 1e-14 {
            let h = (t - tc).clamp(-*step, *step);
            y = super::rk4_step(&ratio4_rhs, tc, &y, h);
            tc += h;
        }
        Ratio4Node {
            t,
            gamma: Complex64::new(y[0], y[1]),
            zeta: y[2],
            theta: y[3],
            mu: y[4],
            nu: y[5],
        }
    }
}

fn ratio4_rhs(_t: f64, y: &[f64]) -> Vec<f64> {
    // state: (Re γ, Im γ, ζ, θ, μ, ν) with γ′ = e^{iζ}, ζ′ = 4μ, θ′ = μ
    let (zeta, mu, nu) = (y[2], y[4], y[5]);
    vec![
        zeta.cos(),
        zeta.sin(),
        4.0 * mu,
        mu,
        2.0 * mu * nu,
        -3.0 * mu * mu - nu * nu,
    ]
}

/// Builds the generating curve of the flat ratio-4 family: unit speed,
/// curvature 4θ′, polar rate θ′ = μ with μ solving the flat (μ, ν) system
/// from the apogee (μ, ν) = (μ₀, 0), where r₀ = 1/μ₀ and γ′ ⊥ γ.
pub fn ratio4_generating_curve(mu0: f64, span: (f64, f64)) -> Result<PlanarCurve> {
    if mu0 <= 0.0 {
        return Err(Error::InvalidParameter("μ₀ must be positive".into()));
    }
    if span.0 > 0.0 || span.1 < 0.0 {
        return Err(Error::InvalidParameter("span must contain 0".into()));
    }
    let step = 1e-3;
    // γ(0) = 1/μ₀ on the real axis, moving in the +i direction
    let init = vec![
        1.0 / mu0,
        0.0,
        std::f64::consts::FRAC_PI_2,
        0.0,
        mu0,
        0.0,
    ];
    let integrate = |t_end: f64| -> Result<Vec<(f64, Vec<f64>)>> {
        let mut out = Vec::new();
        let mut t = 0.0;
        let mut y = init.clone();
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
            y = super::rk4_step(&ratio4_rhs, t, &y, h);
            t += h;
            if y[4] < 1e-8 {
                return Err(Error::DomainExit {
                    reason: format!("μ reached the floor near t = {t:.4}"),
                });
            }
            out.push((t, y.clone()));
        }
        Ok(out)
    };
    let backward = integrate(span.0)?;
    let forward = integrate(span.1)?;
    let mut samples: Vec<(f64, Vec<f64>)> = backward.into_iter().rev().collect();
    samples.push((0.0, init));
    samples.extend(forward);
    let table: Vec<Ratio4Node> = samples
        .iter()
        .map(|(t, y)| Ratio4Node {
            t: *t,
            gamma: Complex64::new(y[0], y[1]),
            zeta: y[2],
            theta: y[3],
            mu: y[4],
            nu: y[5],
        })
        .collect();
    Ok(PlanarCurve {
        kind: CurveKind::Ratio4 {
            table,
            step,
            t_min: span.0,
        },
        span,
    })
}

struct ExtensorMap {
    curve: Arc<PlanarCurve>,
    n: usize,
}

impl ExactMap for ExtensorMap {
    fn dim(&self) -> usize {
        self.n
    }
    fn space(&self) -> AmbientSpace {
        AmbientSpace::flat(self.n)
    }
    fn eval(&self, u: &[f64], order: usize) -> Result<Vec<CJet>> {
        let m = self.n;
        let series = self.curve.gamma_series(u[0]);
        let gamma = CJet::from_axis_series(m, order, 0, series);
        // graph chart of the unit sphere: y₀ = √(1 − Σ p²), y_k = p_k
        let pvars: Vec<Jet> = (1..m).map(|i| Jet::variable(m, order, i, u[i])).collect();
        let mut sum = Jet::constant(m, order, 0.0);
        for p in &pvars {
            sum = sum.add(&p.mul(p));
        }
        let y0 = sum.neg().add_scalar(1.0).sqrt();
        let mut comps = vec![gamma.mul_real(&y0)];
        for p in &pvars {
            comps.push(gamma.mul_real(p));
        }
        Ok(comps)
    }
}

/// The complex extensor γ ⊗ ι of the unit hypersphere ι: S^{n−1} ⊂ E^n.
///
/// Validates that γ is unit speed and stays away from the origin on its
/// span before building the chart.
pub fn complex_extensor(curve: Arc<PlanarCurve>, n: usize) -> Result<ChartImmersion> {
    if n < 2 {
        return Err(Error::InvalidParameter("extensor needs n ≥ 2".into()));
    }
    let (lo, hi) = curve.span;
    for k in 0..=16 {
        let t = lo + (hi - lo) * k as f64 / 16.0;
        let s = curve.gamma_series(t);
        if (s[1].norm() - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidParameter(format!(
                "generating curve is not unit speed at t = {t:.3} (|γ′| = {})",
                s[1].norm()
            )));
        }
        if s[0].norm() < 1e-6 {
            return Err(Error::InvalidParameter(format!(
                "generating curve approaches the origin at t = {t:.3}"
            )));
        }
    }
    let mut domain = vec![(lo + 1e-3 * (hi - lo), hi - 1e-3 * (hi - lo))];
    domain.extend(vec![(-0.35, 0.35); n - 1]);
    Ok(ChartImmersion::from_exact(
        "complex-extensor",
        domain,
        false,
        Arc::new(ExtensorMap { curve, n }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ratio4_curve_is_unit_speed_with_ratio_4() {
        let curve = ratio4_generating_curve(0.5, (-0.8, 0.8)).unwrap();
        for &t in &[-0.7, -0.2, 0.0, 0.3, 0.75] {
            let s = curve.gamma_series(t);
            assert_relative_eq!(s[1].norm(), 1.0, epsilon = 1e-8);
            // independent check of κ and θ′ by finite differences of γ
            let h = 1e-4;
            let (gm, g0, gp) = (
                curve.gamma_series(t - h)[0],
                curve.gamma_series(t)[0],
                curve.gamma_series(t + h)[0],
            );
            let d1 = (gp - gm) / (2.0 * h);
            let d2 = (gp - 2.0 * g0 + gm) / (h * h);
            // κ = Im(γ̄′ γ″)/|γ′|³, θ′ = Im(γ̄ γ′)/|γ|²
            let kappa = (d1.conj() * d2).im / d1.norm().powi(3);
            let theta_p = (g0.conj() * d1).im / g0.norm_sqr();
            assert!((kappa / theta_p - 4.0).abs() < 1e-6, "ratio {}", kappa / theta_p);
            assert_relative_eq!(theta_p, curve.theta_prime(t), epsilon = 1e-6);
        }
    }

    #[test]
    fn apogee_radius_matches_mu() {
        // r(0) = 1/μ₀ and r² (μ² + ν²) = 1 along the curve
        let curve = ratio4_generating_curve(0.4, (-0.5, 0.5)).unwrap();
        assert_relative_eq!(curve.radius_at(0.0), 2.5, epsilon = 1e-12);
        for &t in &[-0.4, 0.2, 0.45] {
            let r = curve.radius_at(t);
            let n = curve.node_at(t);
            assert_relative_eq!(r * r * (n.mu * n.mu + n.nu * n.nu), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn circle_extensor_is_lagrangian() {
        let curve = Arc::new(PlanarCurve::unit_circle((-1.0, 1.0)));
        let chart = complex_extensor(curve, 5).unwrap();
        for u in chart.halton(20) {
            assert!(chart.lagrangian_residual(&u).unwrap() < 1e-9);
        }
    }

    #[test]
    fn ray_extensor_is_totally_geodesic() {
        let curve = Arc::new(PlanarCurve::ray(0.7, 2.0, (-1.0, 1.0)));
        let chart = complex_extensor(curve, 4).unwrap();
        let pg = crate::curvature::second_fundamental_form(
            &chart,
            &chart.center(),
            &crate::Tolerances::default(),
        )
        .unwrap();
        assert!(pg.h.frobenius_norm() < 1e-10);
    }

    #[test]
    fn curve_through_origin_is_rejected() {
        let curve = Arc::new(PlanarCurve::ray(0.0, 0.5, (-1.0, 1.0)));
        assert!(complex_extensor(curve, 3).is_err());
    }
}
