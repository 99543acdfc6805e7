//! Factor charts pluggable into the family builders, plus the numerical
//! verifier every builder runs on its input.
//!
//! The repo ships only totally geodesic smoke plugins (real points of the
//! model quadrics, the flat real plane) and the minimal-surface generator
//! from harmonic potentials: genuinely curved minimal δ(2)-ideal factors
//! come from external classifications and are supplied by the user as
//! charts, never fabricated here. Whatever is supplied gets verified.

use crate::ambient::AmbientSpace;
use crate::curvature::second_fundamental_form;
use crate::delta::{classical_rhs, delta_invariant, DeltaOptions, TupleSpec};
use crate::immersion::{ChartImmersion, ExactMap, GradientGraph};
use crate::jet::{CJet, Jet};
use crate::poly::Polynomial;
use crate::{Error, Result, Tolerances};
use std::sync::Arc;

struct TotallyRealQuadric {
    /// +1: sphere S⁹ ⊂ C⁵ (y₀ = √(1 − Σu²)); −1: H₁⁹ ⊂ C⁵₁ (y₀ = √(1 + Σu²)).
    epsilon: f64,
}

impl ExactMap for TotallyRealQuadric {
    fn dim(&self) -> usize {
        4
    }
    fn space(&self) -> AmbientSpace {
        if self.epsilon > 0.0 {
            AmbientSpace::projective(4)
        } else {
            AmbientSpace::hyperbolic(4)
        }
    }
    fn eval(&self, u: &[f64], order: usize) -> Result<Vec<CJet>> {
        let vars: Vec<Jet> = (0..4).map(|i| Jet::variable(4, order, i, u[i])).collect();
        let mut sum = Jet::constant(4, order, 0.0);
        for v in &vars {
            sum = sum.add(&v.mul(v));
        }
        let y0 = if self.epsilon > 0.0 {
            sum.neg().add_scalar(1.0).sqrt()
        } else {
            sum.add_scalar(1.0).sqrt()
        };
        let mut comps = vec![CJet::from_real(y0)];
        comps.extend(vars.iter().map(|v| CJet::from_real(v.clone())));
        Ok(comps)
    }
}

/// Real points of S⁹(1): the horizontal lift of the totally geodesic real
/// projective 4-space in CP⁴(4). Totally geodesic, hence minimal and
/// δ(2)-ideal, but not `non_totally_geodesic`.
pub fn totally_real_sphere_lift() -> ChartImmersion {
    ChartImmersion::from_exact(
        "totally-real-s4",
        vec![(-0.3, 0.3); 4],
        true,
        Arc::new(TotallyRealQuadric { epsilon: 1.0 }),
    )
}

/// Real points of H₁⁹(−1): the horizontal lift of the totally geodesic real
/// hyperbolic 4-space in CH⁴(−4).
pub fn totally_real_hyperbolic_lift() -> ChartImmersion {
    ChartImmersion::from_exact(
        "totally-real-h4",
        vec![(-0.3, 0.3); 4],
        true,
        Arc::new(TotallyRealQuadric { epsilon: -1.0 }),
    )
}

struct RealPlane;

impl ExactMap for RealPlane {
    fn dim(&self) -> usize {
        4
    }
    fn space(&self) -> AmbientSpace {
        AmbientSpace::flat(4)
    }
    fn eval(&self, u: &[f64], order: usize) -> Result<Vec<CJet>> {
        Ok((0..4)
            .map(|i| CJet::from_real(Jet::variable(4, order, i, u[i])))
            .collect())
    }
}

/// The flat totally real R⁴ ⊂ C⁴.
pub fn totally_real_plane() -> ChartImmersion {
    ChartImmersion::from_exact(
        "totally-real-plane",
        vec![(-0.5, 0.5); 4],
        false,
        Arc::new(RealPlane),
    )
}

struct PhaseTwisted;

impl ExactMap for PhaseTwisted {
    fn dim(&self) -> usize {
        4
    }
    fn space(&self) -> AmbientSpace {
        AmbientSpace::projective(4)
    }
    fn eval(&self, u: &[f64], order: usize) -> Result<Vec<CJet>> {
        let base = TotallyRealQuadric { epsilon: 1.0 }.eval(u, order)?;
        let phase = CJet::exp_i(&Jet::variable(4, order, 0, u[0]));
        Ok(base.iter().map(|c| phase.mul(c)).collect())
    }
}

/// e^{iu₁} times the real sphere: stays on S⁹ but moves along the fiber, so
/// it fails horizontality (residual 1 in the u₁ direction).
pub fn phase_twisted_sphere() -> ChartImmersion {
    ChartImmersion::from_exact(
        "phase-twisted-s4",
        vec![(-0.3, 0.3); 4],
        true,
        Arc::new(PhaseTwisted),
    )
}

/// Gradient graph u ↦ u + i∇f(u) ⊂ C² of a harmonic polynomial: a minimal
/// Lagrangian surface (verified numerically downstream, not assumed).
/// Requires Δf ≡ 0 symbolically and Hess f ≢ 0.
pub fn harmonic_gradient_surface(f: Polynomial) -> Result<ChartImmersion> {
    if f.nvars != 2 {
        return Err(Error::InvalidParameter(
            "harmonic potential must have 2 variables".into(),
        ));
    }
    // symbolic on the coefficient table, up to representation noise of the
    // input coefficients
    let lap = f.laplacian();
    if lap.max_abs_coeff() > 1e-12 * f.max_abs_coeff().max(1.0) {
        return Err(Error::NotHarmonic);
    }
    if f.hessian_is_zero() {
        return Err(Error::InvalidParameter(
            "Hess f ≡ 0 gives a totally geodesic plane".into(),
        ));
    }
    Ok(ChartImmersion::from_exact(
        "harmonic-gradient-surface",
        vec![(-0.5, 0.5); 2],
        false,
        Arc::new(GradientGraph::new(f)),
    ))
}

/// One verified property: whether it was required, whether it holds, and
/// the witnessing residual (for `non_totally_geodesic` the residual is the
/// largest ‖h‖, and passing means it exceeds the floor).
#[derive(Clone, Copy, Debug)]
pub struct PropertyCheck {
    pub required: bool,
    pub pass: bool,
    pub residual: f64,
}

/// Which properties a builder requires of its plugin.
#[derive(Clone, Copy, Debug, Default)]
pub struct PluginRequirements {
    pub constraint: bool,
    pub horizontal: bool,
    pub lagrangian: bool,
    pub minimal: bool,
    pub delta2_ideal: bool,
    /// Advisory in every built-in requirement set: the classified families
    /// ask for non-totally-geodesic factors, but totally geodesic smoke
    /// plugins still produce valid (H-umbilical) pipelines, so builders
    /// only report this check instead of gating on it.
    pub non_totally_geodesic: bool,
}

impl PluginRequirements {
    pub fn horizontal_minimal_ideal() -> Self {
        PluginRequirements {
            constraint: true,
            horizontal: true,
            lagrangian: true,
            minimal: true,
            delta2_ideal: true,
            non_totally_geodesic: false,
        }
    }

    pub fn lagrangian_minimal_ideal() -> Self {
        PluginRequirements {
            lagrangian: true,
            minimal: true,
            delta2_ideal: true,
            ..Default::default()
        }
    }

    pub fn lagrangian_minimal() -> Self {
        PluginRequirements {
            lagrangian: true,
            minimal: true,
            ..Default::default()
        }
    }
}

/// Verification report for a plugin chart; always produced in full, with
/// per-property pass/fail and max residuals.
#[derive(Clone, Debug)]
pub struct PluginReport {
    pub constraint: Option<PropertyCheck>,
    pub horizontality: Option<PropertyCheck>,
    pub lagrangian: PropertyCheck,
    pub minimal: PropertyCheck,
    pub delta2_ideal: Option<PropertyCheck>,
    pub non_totally_geodesic: PropertyCheck,
}

impl PluginReport {
    pub fn pass(&self) -> bool {
        let opt = |c: &Option<PropertyCheck>, required_anyway: bool| match c {
            Some(c) => !c.required || c.pass,
            None => !required_anyway,
        };
        opt(&self.constraint, false)
            && opt(&self.horizontality, false)
            && (!self.lagrangian.required || self.lagrangian.pass)
            && (!self.minimal.required || self.minimal.pass)
            && opt(&self.delta2_ideal, false)
            && (!self.non_totally_geodesic.required || self.non_totally_geodesic.pass)
    }

    pub fn failures(&self) -> String {
        let mut out = Vec::new();
        let mut push = |name: &str, c: Option<&PropertyCheck>| {
            if let Some(c) = c {
                if c.required && !c.pass {
                    out.push(format!("{name} (residual {:.3e})", c.residual));
                }
            }
        };
        push("constraint", self.constraint.as_ref());
        push("horizontality", self.horizontality.as_ref());
        push("lagrangian", Some(&self.lagrangian));
        push("minimal", Some(&self.minimal));
        push("delta2-ideal", self.delta2_ideal.as_ref());
        push("non-totally-geodesic", Some(&self.non_totally_geodesic));
        out.join(", ")
    }
}

/// Numerically checks a plugin chart against the requirement set: model
/// membership, horizontality, the Lagrangian condition, minimality |H|,
/// δ(2)-ideality (equality in the general inequality at the tuple (2)) and
/// non-total-geodesy ‖h‖ > 0.
pub fn verify_plugin(
    chart: &ChartImmersion,
    req: &PluginRequirements,
    tol: &Tolerances,
    opts: &DeltaOptions,
) -> Result<PluginReport> {
    let mut points = chart.halton(12);
    points.push(chart.center());

    let mut constraint_res: f64 = 0.0;
    let mut horiz_res: f64 = 0.0;
    let mut lagr_res: f64 = 0.0;
    let mut minimal_res: f64 = 0.0;
    let mut hnorm_max: f64 = 0.0;
    let mut delta2_res: f64 = 0.0;
    let delta2_applicable = chart.dim() == 4;
    let spec2 = if delta2_applicable {
        Some(TupleSpec::new(4, vec![2])?)
    } else {
        None
    };

    for (idx, u) in points.iter().enumerate() {
        if chart.is_lift() {
            constraint_res = constraint_res.max(chart.constraint_residual(u)?);
            horiz_res = horiz_res.max(chart.horizontality_residual(u)?);
        }
        lagr_res = lagr_res.max(chart.lagrangian_residual(u)?);
        // a chart that is not Lagrangian/horizontal has no well-defined
        // cubic form; the curvature-based checks then fail, they do not
        // abort the report
        match second_fundamental_form(chart, u, tol) {
            Ok(pg) => {
                minimal_res = minimal_res.max(pg.mean_sq.sqrt());
                hnorm_max = hnorm_max.max(pg.h.frobenius_norm());
                if let Some(spec) = &spec2 {
                    // δ(2) is the costly check; a handful of points suffices
                    if idx % 3 == 0 {
                        let r = crate::curvature::gauss_curvature_tensor(&pg);
                        let d = delta_invariant(&r, spec, opts)?;
                        let rhs = classical_rhs(spec, pg.mean_sq, pg.c);
                        delta2_res = delta2_res.max((d.value - rhs).abs());
                    }
                }
            }
            Err(_) => {
                minimal_res = f64::INFINITY;
                delta2_res = f64::INFINITY;
            }
        }
    }

    let check = |required: bool, pass: bool, residual: f64| PropertyCheck {
        required,
        pass,
        residual,
    };
    Ok(PluginReport {
        constraint: chart.is_lift().then(|| {
            check(
                req.constraint,
                constraint_res < tol.constraint.max(1e-8),
                constraint_res,
            )
        }),
        horizontality: chart.is_lift().then(|| {
            check(
                req.horizontal,
                horiz_res < tol.horizontality.max(1e-8),
                horiz_res,
            )
        }),
        lagrangian: check(req.lagrangian, lagr_res < tol.lagrangian.max(1e-8), lagr_res),
        minimal: check(req.minimal, minimal_res < 1e-7, minimal_res),
        delta2_ideal: delta2_applicable.then(|| check(req.delta2_ideal, delta2_res < 1e-5, delta2_res)),
        non_totally_geodesic: check(req.non_totally_geodesic, hnorm_max > 1e-6, hnorm_max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Term;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn opts() -> DeltaOptions {
        DeltaOptions::fast(12)
    }

    #[test]
    fn totally_real_sphere_passes_all_but_non_tg() {
        let chart = totally_real_sphere_lift();
        let report = verify_plugin(
            &chart,
            &PluginRequirements::horizontal_minimal_ideal(),
            &tol(),
            &opts(),
        )
        .unwrap();
        assert!(report.pass(), "failures: {}", report.failures());
        assert!(report.constraint.unwrap().pass);
        assert!(report.horizontality.unwrap().pass);
        assert!(report.minimal.pass);
        assert!(report.delta2_ideal.unwrap().pass);
        assert!(!report.non_totally_geodesic.pass);
    }

    #[test]
    fn hyperbolic_lift_passes() {
        let chart = totally_real_hyperbolic_lift();
        let report = verify_plugin(
            &chart,
            &PluginRequirements::horizontal_minimal_ideal(),
            &tol(),
            &opts(),
        )
        .unwrap();
        assert!(report.pass(), "failures: {}", report.failures());
    }

    #[test]
    fn phase_twisted_sphere_fails_horizontality() {
        let chart = phase_twisted_sphere();
        let report = verify_plugin(
            &chart,
            &PluginRequirements::horizontal_minimal_ideal(),
            &tol(),
            &opts(),
        )
        .unwrap();
        assert!(!report.pass());
        let h = report.horizontality.unwrap();
        assert!(!h.pass);
        assert!(h.residual > 0.5, "expected O(1) residual, got {}", h.residual);
    }

    #[test]
    fn harmonic_surfaces_are_minimal() {
        for f in [
            Polynomial::new(
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
            ),
            Polynomial::new(
                2,
                vec![Term {
                    coeff: 1.0,
                    powers: vec![1, 1],
                }],
            ),
            // a genuinely curved one: Re (x+iy)³ = x³ − 3xy²
            Polynomial::new(
                2,
                vec![
                    Term {
                        coeff: 0.25,
                        powers: vec![3, 0],
                    },
                    Term {
                        coeff: -0.75,
                        powers: vec![1, 2],
                    },
                ],
            ),
        ] {
            let chart = harmonic_gradient_surface(f).unwrap();
            for u in chart.halton(100) {
                let pg = second_fundamental_form(&chart, &u, &tol()).unwrap();
                assert!(pg.mean_sq.sqrt() < 1e-7, "|H| = {}", pg.mean_sq.sqrt());
                assert!(chart.lagrangian_residual(&u).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn cubic_harmonic_surface_is_not_totally_geodesic() {
        let f = Polynomial::new(
            2,
            vec![
                Term {
                    coeff: 0.25,
                    powers: vec![3, 0],
                },
                Term {
                    coeff: -0.75,
                    powers: vec![1, 2],
                },
            ],
        );
        let chart = harmonic_gradient_surface(f).unwrap();
        let report =
            verify_plugin(&chart, &PluginRequirements::lagrangian_minimal(), &tol(), &opts())
                .unwrap();
        assert!(report.pass());
        assert!(report.non_totally_geodesic.pass);
    }

    #[test]
    fn non_harmonic_and_flat_potentials_are_rejected() {
        let f = Polynomial::new(
            2,
            vec![Term {
                coeff: 1.0,
                powers: vec![2, 0],
            }],
        );
        assert!(matches!(
            harmonic_gradient_surface(f),
            Err(Error::NotHarmonic)
        ));
        assert!(harmonic_gradient_surface(Polynomial::zero(2)).is_err());
    }
}
