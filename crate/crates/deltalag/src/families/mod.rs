//! The classified families of improved δ(2,2)-ideal Lagrangian
//! submanifolds, together with the ODE and quadrature machinery that
//! constructs them.
//!
//! The (μ, ν) systems all share the shape dν/dt = −3μ² − ν² − c,
//! dμ/dt = 2μν, specialize per ambient space, and carry one first integral
//! each; Legendre curves in S³(1)/H³₁(−1) provide the ratio-4 families,
//! complex extensors the flat ones, and explicit prefactor formulas the
//! warped-product families with plugin factors.

pub mod builders;
pub mod extensor;
pub mod legendre;
pub mod ode;
pub mod plugins;
pub mod wfield;

pub use builders::{
    build_family_c5, build_family_ch5_iii, build_family_ch5_iv, build_family_ch5_v,
    build_family_ch5_vi, build_family_cp5, example_3_13_chart, ratio4_legendre_lift, ThetaForm,
};
pub use extensor::{complex_extensor, ratio4_generating_curve, PlanarCurve};
pub use legendre::{integrate_legendre, CurveModel, LambdaSpec, LegendreCurve};
pub use ode::{
    first_integral_residual, integrate_mu_nu, ratio_ode_expression, ratio_ode_residual,
    FamilyKind, OdeState, Trajectory,
};
pub use plugins::{
    harmonic_gradient_surface, phase_twisted_sphere, totally_real_hyperbolic_lift,
    totally_real_plane, totally_real_sphere_lift, verify_plugin, PluginReport,
    PluginRequirements, PropertyCheck,
};
pub use wfield::{integrate_w, WField};

/// One classical fourth-order Runge–Kutta step.
pub(crate) fn rk4_step(
    f: &dyn Fn(f64, &[f64]) -> Vec<f64>,
    t: f64,
    y: &[f64],
    h: f64,
) -> Vec<f64> {
    let k1 = f(t, y);
    let y2: Vec<f64> = y.iter().zip(&k1).map(|(a, k)| a + 0.5 * h * k).collect();
    let k2 = f(t + 0.5 * h, &y2);
    let y3: Vec<f64> = y.iter().zip(&k2).map(|(a, k)| a + 0.5 * h * k).collect();
    let k3 = f(t + 0.5 * h, &y3);
    let y4: Vec<f64> = y.iter().zip(&k3).map(|(a, k)| a + h * k).collect();
    let k4 = f(t + h, &y4);
    y.iter()
        .enumerate()
        .map(|(i, a)| a + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Adaptive composite Simpson quadrature with absolute tolerance.
pub(crate) fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, fa, m, fm, flm, left, tol / 2.0, depth - 1)
                + rec(f, m, fm, b, fb, frm, right, tol / 2.0, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = simpson(a, fa, b, fb, fm);
    rec(f, a, fa, b, fb, fm, whole, tol, 40)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn simpson_integrates_smooth_functions() {
        let v = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert_relative_eq!(v, 2.0, epsilon = 1e-11);
        let v = adaptive_simpson(&|x: f64| 1.0 / (1.0 + x * x), 0.0, 1.0, 1e-12);
        assert_relative_eq!(v, std::f64::consts::FRAC_PI_4, epsilon = 1e-11);
    }

    #[test]
    fn rk4_is_fourth_order_on_exponential() {
        let f = |_t: f64, y: &[f64]| vec![y[0]];
        let run = |h: f64| {
            let mut y = vec![1.0];
            let mut t = 0.0;
            while t < 1.0 - 1e-12 {
                y = rk4_step(&f, t, &y, h);
                t += h;
            }
            (y[0] - std::f64::consts::E).abs()
        };
        let e1 = run(0.01);
        let e2 = run(0.005);
        assert!(e1 / e2 > 14.0, "ratio {}", e1 / e2);
    }
}
