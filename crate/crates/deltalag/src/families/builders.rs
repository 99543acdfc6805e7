//! Constructors for the non-minimal improved-ideal families.
//!
//! Each builder assembles a Lagrangian chart (or horizontal lift) from a
//! verified plugin factor and explicit prefactors:
//!
//! * C⁵: L(μ, u) = e^{(4/3)i·arctan√(μ³/(c²−μ³))} / (√(c²μ⁻¹−μ²) + iμ) · φ(u)
//!   with φ a horizontal lift of a minimal Lagrangian factor in CP⁴(4);
//! * CP⁵(4): L = (1/c)(√μ e^{iθ} φ, e^{3iθ}(√(c²−μ³−μ) − iμ^{3/2})) lifted
//!   into S¹¹(1), dθ/dμ = 1/(2√(c²μ⁻¹−μ²−1));
//! * CH⁵(−4), k = ±c²: the analogous lifts into H₁¹¹(−1), with the second
//!   slot carrying e^{3iθ}√μ(ν − iμ) (the e^{3iθ} phase makes the lift
//!   horizontal; see the README note on sign conventions), and
//!   dθ/dμ = 1/(2√(1−μ²∓c²μ⁻¹));
//! * CH⁵(−4), k = 0 with both blocks active: the closed form
//!   L = (2t − w + i(cosh 2t + ⟨ψ,ψ⟩ ± ¼), ψ, …)/(cosh t − i sinh t)
//!   over a minimal Lagrangian ψ in C⁴ and the potential w of the closed
//!   1-form 2⟨dψ, iψ⟩.
//!
//! The ratio-4 H-umbilical lifts (Legendre-curve families) and the closed
//! sech-profile example live here as well.

use super::legendre::{integrate_legendre, CurveModel, LambdaSpec, LegendreCurve};
use super::ode::FamilyKind;
use super::plugins::{verify_plugin, PluginRequirements};
use super::wfield::{integrate_w, WField};
use crate::ambient::AmbientSpace;
use crate::delta::DeltaOptions;
use crate::immersion::{ChartImmersion, ExactMap};
use crate::jet::{hidx, tidx, CJet, Jet};
use crate::poly::Polynomial;
use crate::{Error, Result, Tolerances};
use num_complex::Complex64;
use std::sync::Arc;

// ───────────────────────── closed sech-profile example ─────────────────────────

struct Example313Map;

impl ExactMap for Example313Map {
    fn dim(&self) -> usize {
        5
    }
    fn space(&self) -> AmbientSpace {
        AmbientSpace::hyperbolic(5)
    }
    fn eval(&self, u: &[f64], order: usize) -> Result<Vec<CJet>> {
        let t = Jet::variable(5, order, 0, u[0]);
        let uvars: Vec<Jet> = (1..5).map(|i| Jet::variable(5, order, i, u[i])).collect();
        let mut usum = Jet::constant(5, order, 0.0);
        for v in &uvars {
            usum = usum.add(&v.mul(v));
        }
        let c2t = t.scale(2.0).cosh();
        // prefactor 1/(cosh t − i sinh t)
        let pref = CJet::new(t.cosh(), t.sinh().neg()).recip();
        let half_sum = usum.scale(0.5).add(&c2t.scale(0.5));
        let v1 = CJet::new(half_sum.add_scalar(0.5), t.neg());
        let v2 = CJet::new(t.clone(), half_sum.add_scalar(-0.5));
        let mut comps = vec![pref.mul(&v1), pref.mul(&v2)];
        for v in &uvars {
            comps.push(pref.mul_real(v));
        }
        Ok(comps)
    }
}

/// The closed-form ratio-4 lift into H₁¹¹(−1) with μ(t) = sech 2t.
pub fn example_3_13_chart() -> ChartImmersion {
    let mut domain = vec![(-0.8, 0.8)];
    domain.extend(vec![(-0.6, 0.6); 4]);
    ChartImmersion::from_exact("ch5-example-3-13", domain, true, Arc::new(Example313Map))
}

// ───────────────────────── ratio-4 Legendre lifts ─────────────────────────

struct LegendreLiftMap {
    curve: Arc<LegendreCurve>,
    lambda: LambdaSpec,
    model: CurveModel,
}

impl ExactMap for LegendreLiftMap {
    fn dim(&self) -> usize {
        5
    }
    fn space(&self) -> AmbientSpace {
        match self.model {
            CurveModel::Sphere => AmbientSpace::projective(5),
            CurveModel::Hyperbolic => AmbientSpace::hyperbolic(5),
        }
    }
    fn eval(&self, u: &[f64], order: usize) -> Result<Vec<CJet>> {
        let st = self.curve.state_at(u[0], &self.lambda, self.model);
        let i = Complex64::new(0.0, 1.0);
        let sign = match self.model {
            CurveModel::Sphere => -1.0,
            CurveModel::Hyperbolic => 1.0,
        };
        let series = |z: Complex64, dz: Complex64| -> [Complex64; 4] {
            let ddz = i * st.lambda * dz + sign * z;
            let dddz = i * st.dlambda * dz + i * st.lambda * ddz + sign * dz;
            [z, dz, ddz, dddz]
        };
        let z1 = CJet::from_axis_series(5, order, 0, series(st.z[0], st.dz[0]));
        let z2 = CJet::from_axis_series(5, order, 0, series(st.z[1], st.dz[1]));
        let pvars: Vec<Jet> = (1..5).map(|k| Jet::variable(5, order, k, u[k])).collect();
        let mut sum = Jet::constant(5, order, 0.0);
        for p in &pvars {
            sum = sum.add(&p.mul(p));
        }
        let y0 = sum.neg().add_scalar(1.0).sqrt();
        let mut comps = vec![z1, z2.mul_real(&y0)];
        for p in &pvars {
            comps.push(z2.mul_real(p));
        }
        Ok(comps)
    }
}

/// H-umbilical ratio-4 lift ψ(t, p) = (z₁(t), z₂(t)·y(p)) with z a Legendre
/// curve of curvature 4μ(t); into S¹¹(1) for CP⁵, into H₁¹¹(−1) for CH⁵
/// (the latter on the k < 0 branch, so it needs μ₀ > 1).
///
/// The curvature function alone does not pin the curve: the lift is
/// H-umbilical with the matching μ only when z sits correctly relative to
/// the coordinate splitting. The right position follows from matching the
/// warped-product prefactor form, which gives z = (e^{3iθ}√μ(ν − iμ),
/// √μ e^{iθ})/c; at the apogee (ν = 0, θ = 0) that is the initial value
/// used here.
pub fn ratio4_legendre_lift(model: CurveModel, mu0: f64) -> Result<ChartImmersion> {
    let (kind, c2, span, tmax) = match model {
        CurveModel::Sphere => {
            if mu0 <= 0.0 {
                return Err(Error::InvalidParameter("need μ₀ > 0".into()));
            }
            (FamilyKind::Cp5, mu0 * (1.0 + mu0 * mu0), (-0.9, 0.9), 0.85)
        }
        CurveModel::Hyperbolic => {
            if mu0 <= 1.0 {
                return Err(Error::InvalidParameter(
                    "the hyperbolic ratio-4 lift lives on the k < 0 branch: need μ₀ > 1".into(),
                ));
            }
            (FamilyKind::Ch5KNeg, mu0 * (mu0 * mu0 - 1.0), (-0.6, 0.6), 0.55)
        }
    };
    let lambda = LambdaSpec::RatioMu {
        r: 4.0,
        kind,
        mu0,
        nu0: 0.0,
    };
    let c = c2.sqrt();
    let sm = mu0.sqrt();
    let z0 = [
        Complex64::new(0.0, -mu0 * sm / c),
        Complex64::new(sm / c, 0.0),
    ];
    // z₁′(0) = ∓√μ₀/c: the sign of ν′ contribution differs between models
    let dz1 = match model {
        CurveModel::Sphere => -sm / c,
        CurveModel::Hyperbolic => sm / c,
    };
    let dz0 = [
        Complex64::new(dz1, 0.0),
        Complex64::new(0.0, mu0 * sm / c),
    ];
    let curve = integrate_legendre(&lambda, model, z0, dz0, span, 1e-3)?;
    let name = match model {
        CurveModel::Sphere => "ratio4-cp5",
        CurveModel::Hyperbolic => "ratio4-ch5",
    };
    let mut domain = vec![(-tmax, tmax)];
    domain.extend(vec![(-0.35, 0.35); 4]);
    Ok(ChartImmersion::from_exact(
        name,
        domain,
        true,
        Arc::new(LegendreLiftMap {
            curve: Arc::new(curve),
            lambda,
            model,
        }),
    ))
}

// ───────────────────────── μ-parametrized families ─────────────────────────

/// Which printed form of dθ/dμ to integrate for the CH⁵ k > 0 branch: the
/// reciprocal 1/(2ν) implied by the ODE system, or the product ½·ν as it
/// appears in one displayed statement (kept for comparison; it does not
/// produce a horizontal lift).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaForm {
    Reciprocal,
    PrintedProduct,
}

#[derive(Clone, Copy)]
enum NuVariant {
    /// ν² = c²/μ − μ² − 1 (CP⁵)
    Cp5 { c2: f64 },
    /// ν² = 1 − μ² − k/μ with k = ±c² (CH⁵)
    Ch5 { k: f64 },
}

impl NuVariant {
    fn nu_sq(&self, mu: f64) -> f64 {
        match self {
            NuVariant::Cp5 { c2 } => c2 / mu - mu * mu - 1.0,
            NuVariant::Ch5 { k } => 1.0 - mu * mu - k / mu,
        }
    }
    fn nu_sq_jet(&self, mu: &Jet) -> Jet {
        match self {
            NuVariant::Cp5 { c2 } => mu
                .recip()
                .scale(*c2)
                .sub(&mu.mul(mu))
                .add_scalar(-1.0),
            NuVariant::Ch5 { k } => mu.recip().scale(-*k).sub(&mu.mul(mu)).add_scalar(1.0),
        }
    }
}

#[derive(Clone)]
struct ThetaIntegral {
    variant: NuVariant,
    form: ThetaForm,
    anchor: f64,
    tol: f64,
}

impl ThetaIntegral {
    fn rate(&self, mu: f64) -> f64 {
        let nu = self.variant.nu_sq(mu).max(0.0).sqrt();
        match self.form {
            ThetaForm::Reciprocal => 1.0 / (2.0 * nu),
            ThetaForm::PrintedProduct => 0.5 * nu,
        }
    }

    fn value(&self, mu: f64) -> f64 {
        super::adaptive_simpson(&|s| self.rate(s), self.anchor, mu, self.tol)
    }

    /// θ as a jet along the μ axis: the value comes from quadrature, the
    /// derivatives from the closed form of dθ/dμ.
    fn jet(&self, nvars: usize, order: usize, mu: f64) -> Jet {
        let muj = Jet::variable(1, order.max(1) - 1, 0, mu);
        let nu = self.variant.nu_sq_jet(&muj).sqrt();
        let rate = match self.form {
            ThetaForm::Reciprocal => nu.scale(2.0).recip(),
            ThetaForm::PrintedProduct => nu.scale(0.5),
        };
        Jet::from_axis_series(
            nvars,
            order,
            0,
            [self.value(mu), rate.val, rate.d(0), rate.d2(0, 0)],
        )
    }
}

fn plugin_jets(
    plugin: &Arc<dyn ExactMap>,
    u: &[f64],
    nvars: usize,
    order: usize,
) -> Result<Vec<CJet>> {
    Ok(plugin
        .eval(&u[1..], order)?
        .into_iter()
        .map(|c| c.embed(nvars, 1))
        .collect())
}

struct C5Map {
    c2: f64,
    plugin: Arc<dyn ExactMap>,
}

impl ExactMap for C5Map {
    fn dim(&self) -> usize {
        5
    }
    fn space(&self) -> AmbientSpace {
        AmbientSpace::flat(5)
    }
    fn eval(&self, u: &[f64], order: usize) -> Result<Vec<CJet>> {
        let mu = Jet::variable(5, order, 0, u[0]);
        let mu3 = mu.powi(3);
        let nu = mu.recip().scale(self.c2).sub(&mu.mul(&mu)).sqrt();
        let x = mu3.div(&mu3.neg().add_scalar(self.c2));
        let phase = x.sqrt().atan().scale(4.0 / 3.0);
        let pref = CJet::exp_i(&phase).mul(&CJet::new(nu, mu).recip());
        Ok(plugin_jets(&self.plugin, u, 5, order)?
            .iter()
            .map(|p| pref.mul(p))
            .collect())
    }
}

struct Cp5Map {
    c: f64,
    theta: ThetaIntegral,
    plugin: Arc<dyn ExactMap>,
}

impl ExactMap for Cp5Map {
    fn dim(&self) -> usize {
        5
    }
    fn space(&self) -> AmbientSpace {
        AmbientSpace::projective(5)
    }
    fn eval(&self, u: &[f64], order: usize) -> Result<Vec<CJet>> {
        let c2 = self.c * self.c;
        let mu = Jet::variable(5, order, 0, u[0]);
        let theta = self.theta.jet(5, order, u[0]);
        let head = CJet::exp_i(&theta).mul_real(&mu.sqrt()).scale(1.0 / self.c);
        // √μ·(ν − iμ) = √(c² − μ³ − μ) − i μ^{3/2}
        let mu3 = mu.powi(3);
        let tail_re = mu3.neg().sub(&mu).add_scalar(c2).sqrt();
        let tail_im = mu3.sqrt().neg();
        let tail = CJet::exp_i(&theta.scale(3.0))
            .mul(&CJet::new(tail_re, tail_im))
            .scale(1.0 / self.c);
        let mut comps: Vec<CJet> = plugin_jets(&self.plugin, u, 5, order)?
            .iter()
            .map(|p| head.mul(p))
            .collect();
        comps.push(tail);
        Ok(comps)
    }
}

struct Ch5LiftMap {
    c: f64,
    /// k = +c² (branch with the plugin in CH⁴) or −c² (plugin in CP⁴).
    k_positive: bool,
    theta: ThetaIntegral,
    plugin: Arc<dyn ExactMap>,
}

impl ExactMap for Ch5LiftMap {
    fn dim(&self) -> usize {
        5
    }
    fn space(&self) -> AmbientSpace {
        AmbientSpace::hyperbolic(5)
    }
    fn eval(&self, u: &[f64], order: usize) -> Result<Vec<CJet>> {
        let c2 = self.c * self.c;
        let mu = Jet::variable(5, order, 0, u[0]);
        let theta = self.theta.jet(5, order, u[0]);
        let head = CJet::exp_i(&theta).mul_real(&mu.sqrt()).scale(1.0 / self.c);
        // √μ·(ν − iμ) = √(μ − μ³ ∓ c²) − i μ^{3/2}
        let mu3 = mu.powi(3);
        let rad = if self.k_positive {
            mu.sub(&mu3).add_scalar(-c2)
        } else {
            mu.sub(&mu3).add_scalar(c2)
        };
        let tail = CJet::exp_i(&theta.scale(3.0))
            .mul(&CJet::new(rad.sqrt(), mu3.sqrt().neg()))
            .scale(1.0 / self.c);
        let phi = plugin_jets(&self.plugin, u, 5, order)?;
        let mut comps = Vec::with_capacity(6);
        if self.k_positive {
            // plugin lives in C⁵₁ (its first slot carries the minus sign),
            // the spare positive slot goes last
            comps.extend(phi.iter().map(|p| head.mul(p)));
            comps.push(tail);
        } else {
            // plugin lives in C⁵ (all positive), the negative slot goes first
            comps.push(tail);
            comps.extend(phi.iter().map(|p| head.mul(p)));
        }
        Ok(comps)
    }
}

fn validate_plugin_space(
    plugin: &ChartImmersion,
    expected: AmbientSpace,
    lift: bool,
) -> Result<Arc<dyn ExactMap>> {
    if plugin.dim() != 4 || plugin.space() != expected || plugin.is_lift() != lift {
        return Err(Error::InvalidParameter(format!(
            "plugin must be a 4-dimensional {}chart of the expected model (got dim {}, lift {})",
            if lift { "horizontal " } else { "" },
            plugin.dim(),
            plugin.is_lift(),
        )));
    }
    plugin
        .exact_map()
        .ok_or_else(|| Error::InvalidParameter("plugin must provide exact jets".into()))
}

fn require_verified(
    plugin: &ChartImmersion,
    req: &PluginRequirements,
    tol: &Tolerances,
    opts: &DeltaOptions,
) -> Result<()> {
    let report = verify_plugin(plugin, req, tol, opts)?;
    if !report.pass() {
        return Err(Error::PluginRejected {
            failures: report.failures(),
        });
    }
    Ok(())
}

fn bisect_root(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn shrunk(lo: f64, hi: f64) -> (f64, f64) {
    let margin = (1e-3 * (hi - lo)).max(1e-3);
    (lo + margin, hi - margin)
}

/// Family in C⁵ over a horizontal lift φ of a minimal Lagrangian factor in
/// CP⁴(4); μ ranges inside (0, c^{2/3}).
pub fn build_family_c5(
    c_param: f64,
    plugin: &ChartImmersion,
    tol: &Tolerances,
    opts: &DeltaOptions,
) -> Result<ChartImmersion> {
    if c_param <= 0.0 {
        return Err(Error::InvalidParameter("c must be positive".into()));
    }
    let map = validate_plugin_space(plugin, AmbientSpace::projective(4), true)?;
    require_verified(plugin, &PluginRequirements::horizontal_minimal_ideal(), tol, opts)?;
    let c2 = c_param * c_param;
    let (lo, hi) = shrunk(0.0, c2.powf(1.0 / 3.0));
    let mut domain = vec![(lo, hi)];
    domain.extend_from_slice(&plugin.domain()[..]);
    Ok(ChartImmersion::from_exact(
        "c5-ideal",
        domain,
        false,
        Arc::new(C5Map { c2, plugin: map }),
    ))
}

/// Family in CP⁵(4), lifted into S¹¹(1), over a horizontal lift φ of a
/// minimal Lagrangian factor in CP⁴(4); μ ranges where c²μ⁻¹ − μ² − 1 > 0.
pub fn build_family_cp5(
    c_param: f64,
    plugin: &ChartImmersion,
    tol: &Tolerances,
    opts: &DeltaOptions,
) -> Result<ChartImmersion> {
    if c_param <= 0.0 {
        return Err(Error::InvalidParameter("c must be positive".into()));
    }
    let map = validate_plugin_space(plugin, AmbientSpace::projective(4), true)?;
    require_verified(plugin, &PluginRequirements::horizontal_minimal_ideal(), tol, opts)?;
    let c2 = c_param * c_param;
    // root of μ³ + μ = c²
    let mu_max = bisect_root(&|m| m * m * m + m - c2, 0.0, c2.max(1.0) + 1.0);
    let (lo, hi) = shrunk(0.0, mu_max);
    let theta = ThetaIntegral {
        variant: NuVariant::Cp5 { c2 },
        form: ThetaForm::Reciprocal,
        anchor: 0.5 * (lo + hi),
        tol: tol.quadrature,
    };
    let mut domain = vec![(lo, hi)];
    domain.extend_from_slice(&plugin.domain()[..]);
    Ok(ChartImmersion::from_exact(
        "cp5-ideal",
        domain,
        true,
        Arc::new(Cp5Map {
            c: c_param,
            theta,
            plugin: map,
        }),
    ))
}

/// CH⁵(−4) family with k = c² > 0, over a horizontal lift φ of a minimal
/// Lagrangian factor in CH⁴(−4); requires c² < 2/(3√3) so that
/// μ − μ³ − c² has two positive roots.
pub fn build_family_ch5_iii(
    c_param: f64,
    plugin: &ChartImmersion,
    theta_form: ThetaForm,
    tol: &Tolerances,
    opts: &DeltaOptions,
) -> Result<ChartImmersion> {
    if c_param <= 0.0 {
        return Err(Error::InvalidParameter("c must be positive".into()));
    }
    let c2 = c_param * c_param;
    let crit = 2.0 / (3.0 * 3.0f64.sqrt());
    if c2 >= crit {
        return Err(Error::InvalidParameter(format!(
            "c² = {c2:.4} leaves no admissible μ-interval (needs c² < {crit:.4})"
        )));
    }
    let map = validate_plugin_space(plugin, AmbientSpace::hyperbolic(4), true)?;
    require_verified(plugin, &PluginRequirements::horizontal_minimal_ideal(), tol, opts)?;
    let top = 1.0 / 3.0f64.sqrt();
    let p = |m: f64| m - m * m * m - c2;
    let mu_lo = bisect_root(&p, 1e-12, top);
    let mu_hi = bisect_root(&p, top, 1.0);
    let (lo, hi) = shrunk(mu_lo, mu_hi);
    let theta = ThetaIntegral {
        variant: NuVariant::Ch5 { k: c2 },
        form: theta_form,
        anchor: 0.5 * (lo + hi),
        tol: tol.quadrature,
    };
    let mut domain = vec![(lo, hi)];
    domain.extend_from_slice(&plugin.domain()[..]);
    Ok(ChartImmersion::from_exact(
        "ch5-branch-iii",
        domain,
        true,
        Arc::new(Ch5LiftMap {
            c: c_param,
            k_positive: true,
            theta,
            plugin: map,
        }),
    ))
}

/// CH⁵(−4) family with k = −c² < 0, over a horizontal lift φ of a minimal
/// Lagrangian factor in CP⁴(4); μ ranges where μ − μ³ + c² > 0.
pub fn build_family_ch5_iv(
    c_param: f64,
    plugin: &ChartImmersion,
    tol: &Tolerances,
    opts: &DeltaOptions,
) -> Result<ChartImmersion> {
    if c_param <= 0.0 {
        return Err(Error::InvalidParameter("c must be positive".into()));
    }
    let map = validate_plugin_space(plugin, AmbientSpace::projective(4), true)?;
    require_verified(plugin, &PluginRequirements::horizontal_minimal_ideal(), tol, opts)?;
    let c2 = c_param * c_param;
    // positive root of μ³ − μ = c² lies beyond 1
    let mu_max = bisect_root(&|m: f64| m - m * m * m + c2, 1.0, 2.0 + c2);
    let (lo, hi) = shrunk(0.0, mu_max);
    let theta = ThetaIntegral {
        variant: NuVariant::Ch5 { k: -c2 },
        form: ThetaForm::Reciprocal,
        anchor: 0.5 * (lo + hi),
        tol: tol.quadrature,
    };
    let mut domain = vec![(lo, hi)];
    domain.extend_from_slice(&plugin.domain()[..]);
    Ok(ChartImmersion::from_exact(
        "ch5-branch-iv",
        domain,
        true,
        Arc::new(Ch5LiftMap {
            c: c_param,
            k_positive: false,
            theta,
            plugin: map,
        }),
    ))
}

// ───────────────────────── CH⁵, k = 0: potential-based branches ─────────────────────────

struct Ch5PotentialMap {
    psi: Arc<dyn ExactMap>,
    w: Arc<WField>,
}

impl Ch5PotentialMap {
    /// The potential of the closed 1-form 2⟨dψ, iψ⟩ as a jet on the chart
    /// axes 1..4: the value comes from path quadrature, the derivatives
    /// from ψ's own jets.
    fn w_jet(&self, psi: &[CJet], u: &[f64], order: usize) -> Result<Jet> {
        let val = self.w.value(&u[1..])?;
        let mut grad = vec![0.0; 5];
        let mut hess = vec![0.0; crate::jet::hess_len(5)];
        let mut third = vec![0.0; crate::jet::third_len(5)];
        if order >= 1 {
            // g_j = 2 Im Σ ∂_jψ_a · conj(ψ_a)
            let g = |j: usize, trunc: usize| -> Jet {
                let mut acc = Jet::constant(5, trunc, 0.0);
                for a in psi {
                    let d = a.differentiate(j).truncate(trunc);
                    let prod = d.mul(&a.conj().truncate(trunc));
                    acc = acc.add(&prod.im);
                }
                acc.scale(2.0)
            };
            for j in 1..5 {
                let gj = g(j, order - 1);
                grad[j] = gj.val;
                if order >= 2 {
                    for k in j..5 {
                        hess[hidx(j, k)] = gj.d(k);
                    }
                }
                if order >= 3 {
                    for k in j..5 {
                        for l in k..5 {
                            third[tidx(j, k, l)] = gj.d2(k, l);
                        }
                    }
                }
            }
        }
        Ok(Jet::from_parts(
            5,
            order,
            val,
            if order >= 1 { grad } else { vec![] },
            if order >= 2 { hess } else { vec![] },
            if order >= 3 { third } else { vec![] },
        ))
    }
}

impl ExactMap for Ch5PotentialMap {
    fn dim(&self) -> usize {
        5
    }
    fn space(&self) -> AmbientSpace {
        AmbientSpace::hyperbolic(5)
    }
    fn eval(&self, u: &[f64], order: usize) -> Result<Vec<CJet>> {
        let t = Jet::variable(5, order, 0, u[0]);
        let psi = plugin_jets(&self.psi, u, 5, order)?;
        let w = self.w_jet(&psi, u, order)?;
        let mut s = Jet::constant(5, order, 0.0);
        for a in &psi {
            s = s.add(&a.norm_sqr());
        }
        let c2t = t.scale(2.0).cosh();
        let a_part = t.scale(2.0).sub(&w);
        let b_part = c2t.add(&s);
        let pref = CJet::new(t.cosh(), t.sinh().neg()).recip();
        let slot0 = CJet::new(a_part.clone(), b_part.add_scalar(0.25));
        let slot5 = CJet::new(a_part, b_part.add_scalar(-0.25));
        let mut comps = vec![pref.mul(&slot0)];
        comps.extend(psi.iter().map(|a| pref.mul(a)));
        comps.push(pref.mul(&slot5));
        Ok(comps)
    }
}

fn build_ch5_potential(
    name: &str,
    psi_chart: &ChartImmersion,
    tol: &Tolerances,
) -> Result<ChartImmersion> {
    let map = psi_chart
        .exact_map()
        .ok_or_else(|| Error::InvalidParameter("factor chart must provide exact jets".into()))?;
    let w = integrate_w(psi_chart, tol)?;
    let mut domain = vec![(-0.8, 0.8)];
    domain.extend_from_slice(psi_chart.domain());
    Ok(ChartImmersion::from_exact(
        name,
        domain,
        true,
        Arc::new(Ch5PotentialMap {
            psi: map,
            w: Arc::new(w),
        }),
    ))
}

/// CH⁵(−4) family over a single minimal Lagrangian factor ψ in C⁴.
pub fn build_family_ch5_v(
    psi: &ChartImmersion,
    tol: &Tolerances,
    opts: &DeltaOptions,
) -> Result<ChartImmersion> {
    if psi.dim() != 4 || psi.space() != AmbientSpace::flat(4) || psi.is_lift() {
        return Err(Error::InvalidParameter(
            "branch (v) needs a 4-dimensional Lagrangian chart in C⁴".into(),
        ));
    }
    require_verified(
        psi,
        &PluginRequirements::lagrangian_minimal_ideal(),
        tol,
        &opts_light(opts),
    )?;
    build_ch5_potential("ch5-branch-v", psi, tol)
}

/// CH⁵(−4) family over the direct product of two minimal Lagrangian
/// surfaces in C², supplied as harmonic potentials.
pub fn build_family_ch5_vi(
    f1: &Polynomial,
    f2: &Polynomial,
    tol: &Tolerances,
    opts: &DeltaOptions,
) -> Result<ChartImmersion> {
    let s1 = super::plugins::harmonic_gradient_surface(f1.clone())?;
    let s2 = super::plugins::harmonic_gradient_surface(f2.clone())?;
    for s in [&s1, &s2] {
        require_verified(
            s,
            &PluginRequirements::lagrangian_minimal(),
            tol,
            &opts_light(opts),
        )?;
    }
    struct ProductMap {
        a: Arc<dyn ExactMap>,
        b: Arc<dyn ExactMap>,
    }
    impl ExactMap for ProductMap {
        fn dim(&self) -> usize {
            4
        }
        fn space(&self) -> AmbientSpace {
            AmbientSpace::flat(4)
        }
        fn eval(&self, u: &[f64], order: usize) -> Result<Vec<CJet>> {
            let mut comps: Vec<CJet> = self
                .a
                .eval(&u[..2], order)?
                .into_iter()
                .map(|c| c.embed(4, 0))
                .collect();
            comps.extend(
                self.b
                    .eval(&u[2..], order)?
                    .into_iter()
                    .map(|c| c.embed(4, 2)),
            );
            Ok(comps)
        }
    }
    let product = ChartImmersion::from_exact(
        "minimal-surface-product",
        [s1.domain(), s2.domain()].concat(),
        false,
        Arc::new(ProductMap {
            a: s1.exact_map().unwrap(),
            b: s2.exact_map().unwrap(),
        }),
    );
    build_ch5_potential("ch5-branch-vi", &product, tol)
}

fn opts_light(opts: &DeltaOptions) -> DeltaOptions {
    DeltaOptions {
        restarts: opts.restarts.min(16),
        ..*opts
    }
}
