//! The (μ, ν) differential systems of the ideal families and their first
//! integrals.
//!
//! All three ambient cases share dμ/dt = 2μν, dν/dt = −3μ² − ν² − c with
//! c ∈ {0, +1, −1}; the conserved quantity is μ(ν² + μ² + c) (equal to c²
//! for the flat and projective families) resp. k = μ(1 − μ² − ν²) for the
//! hyperbolic one, whose sign splits the CH⁵ classification into three
//! branches. The accompanying angle integrates dθ/dt = μ except in C⁵,
//! where the natural phase obeys dφ/dt = −4μ.

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    /// C⁵: dν/dt = −3μ² − ν², conserved μ(μ² + ν²) = c².
    C5,
    /// CP⁵(4): dν/dt = −1 − ν² − 3μ², conserved μ(1 + μ² + ν²) = c².
    Cp5,
    /// CH⁵(−4) with k = μ(1 − μ² − ν²) > 0.
    Ch5KPos,
    /// CH⁵(−4) with k < 0.
    Ch5KNeg,
    /// CH⁵(−4) with k = 0, i.e. μ² + ν² = 1 (the sech/tanh trajectory).
    Ch5KZero,
}

impl FamilyKind {
    pub fn ambient_c(&self) -> f64 {
        match self {
            FamilyKind::C5 => 0.0,
            FamilyKind::Cp5 => 1.0,
            _ => -1.0,
        }
    }

    /// Conserved quantity from an initial state: c² for C⁵/CP⁵, k for CH⁵.
    pub fn conserved(&self, mu: f64, nu: f64) -> f64 {
        match self {
            FamilyKind::C5 => mu * (mu * mu + nu * nu),
            FamilyKind::Cp5 => mu * (1.0 + mu * mu + nu * nu),
            _ => mu * (1.0 - mu * mu - nu * nu),
        }
    }

    /// The radicand whose square root is ν on the positive branch.
    pub fn radicand(&self, mu: f64, konst: f64) -> f64 {
        match self {
            FamilyKind::C5 => konst / mu - mu * mu,
            FamilyKind::Cp5 => konst / mu - mu * mu - 1.0,
            _ => 1.0 - mu * mu - konst / mu,
        }
    }

    /// dθ/dt (or dφ/dt for C⁵) as a function of μ.
    pub fn angle_rate(&self, mu: f64) -> f64 {
        match self {
            FamilyKind::C5 => -4.0 * mu,
            _ => mu,
        }
    }

    fn validate_init(&self, mu: f64, nu: f64) -> Result<()> {
        if mu <= 0.0 {
            return Err(Error::InvalidParameter("μ must be positive".into()));
        }
        let k = self.conserved(mu, nu);
        let ok = match self {
            FamilyKind::C5 | FamilyKind::Cp5 => k > 0.0,
            FamilyKind::Ch5KPos => k > 1e-12,
            FamilyKind::Ch5KNeg => k < -1e-12,
            FamilyKind::Ch5KZero => k.abs() <= 1e-10,
        };
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "initial state (μ={mu}, ν={nu}) has conserved constant {k}, inconsistent with {self:?}"
            )));
        }
        Ok(())
    }
}

/// State of a (μ, ν, angle) trajectory at parameter t.
#[derive(Clone, Copy, Debug)]
pub struct OdeState {
    pub t: f64,
    pub mu: f64,
    pub nu: f64,
    /// θ for CP⁵/CH⁵ (dθ/dt = μ), φ for C⁵ (dφ/dt = −4μ).
    pub angle: f64,
}

impl OdeState {
    pub fn new(t: f64, mu: f64, nu: f64) -> Self {
        OdeState {
            t,
            mu,
            nu,
            angle: 0.0,
        }
    }
}

/// A discretized trajectory with its conserved constant.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub kind: FamilyKind,
    /// c² (C⁵/CP⁵) or k (CH⁵), inferred from the initial state.
    pub konst: f64,
    pub states: Vec<OdeState>,
    pub step: f64,
    /// Reason the trajectory stopped before the requested endpoint.
    pub truncated: Option<String>,
}

pub(crate) fn mu_nu_rhs(kind: FamilyKind, mu: f64, nu: f64) -> (f64, f64) {
    (2.0 * mu * nu, -3.0 * mu * mu - nu * nu - kind.ambient_c())
}

/// Integrates the (μ, ν, angle) system with classical RK4 at fixed `step`
/// from `init.t` to `t_end` (either direction). States outside the
/// admissible region truncate the trajectory with a reason instead of
/// erroring.
pub fn integrate_mu_nu(
    kind: FamilyKind,
    init: OdeState,
    t_end: f64,
    step: f64,
) -> Result<Trajectory> {
    kind.validate_init(init.mu, init.nu)?;
    if step <= 0.0 {
        return Err(Error::InvalidParameter("step must be positive".into()));
    }
    let konst = kind.conserved(init.mu, init.nu);
    let dir = if t_end >= init.t { 1.0 } else { -1.0 };
    let h = step * dir;
    let f = move |_t: f64, y: &[f64]| {
        let (dmu, dnu) = mu_nu_rhs(kind, y[0], y[1]);
        vec![dmu, dnu, kind.angle_rate(y[0])]
    };
    let mut states = vec![init];
    let mut truncated = None;
    let mut t = init.t;
    let mut y = vec![init.mu, init.nu, init.angle];
    let total = ((t_end - init.t) / h).ceil().max(0.0) as usize;
    for _ in 0..total {
        let hh = if (t_end - t).abs() < step {
            t_end - t
        } else {
            h
        };
        if hh == 0.0 {
            break;
        }
        let y_next = super::rk4_step(&f, t, &y, hh);
        let (mu, nu) = (y_next[0], y_next[1]);
        if !(mu.is_finite() && nu.is_finite()) || mu <= 1e-10 || nu.abs() > 1e6 {
            truncated = Some(format!(
                "left admissible μ-interval near t = {:.6} (μ = {:.3e}, ν = {:.3e})",
                t + hh,
                mu,
                nu
            ));
            break;
        }
        t += hh;
        y = y_next;
        states.push(OdeState {
            t,
            mu: y[0],
            nu: y[1],
            angle: y[2],
        });
    }
    Ok(Trajectory {
        kind,
        konst,
        states,
        step,
        truncated,
    })
}

/// max over samples of |ν² − radicand(μ)| for the family's first integral,
/// with the constant taken from the trajectory's initial state.
pub fn first_integral_residual(traj: &Trajectory) -> f64 {
    traj.states
        .iter()
        .map(|s| (s.nu * s.nu - traj.kind.radicand(s.mu, traj.konst)).abs())
        .fold(0.0, f64::max)
}

/// The H-umbilical ratio-r consistency expression
/// μμ″ − ((r−3)/(r−2)) μ′² + (r−2) μ² ((r−1) μ² + c),
/// which vanishes along the matching first-order systems.
pub fn ratio_ode_expression(mu: f64, dmu: f64, ddmu: f64, r: f64, c: f64) -> Result<f64> {
    if r == 2.0 {
        return Err(Error::RatioTwoUndefined);
    }
    Ok(mu * ddmu - (r - 3.0) / (r - 2.0) * dmu * dmu
        + (r - 2.0) * mu * mu * ((r - 1.0) * mu * mu + c))
}

/// max over trajectory samples of the ratio-r expression, with μ′ and μ″
/// reconstructed exactly from the trajectory's own dynamics.
pub fn ratio_ode_residual(traj: &Trajectory, r: f64, c: f64) -> Result<f64> {
    let mut res: f64 = 0.0;
    for s in &traj.states {
        let (dmu, dnu) = mu_nu_rhs(traj.kind, s.mu, s.nu);
        let ddmu = 2.0 * dmu * s.nu + 2.0 * s.mu * dnu;
        res = res.max(ratio_ode_expression(s.mu, dmu, ddmu, r, c)?.abs());
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ch5_k_zero_reproduces_sech_tanh() {
        // from (μ, ν) = (1, 0): μ = sech 2t, ν = −tanh 2t
        let traj = integrate_mu_nu(
            FamilyKind::Ch5KZero,
            OdeState::new(0.0, 1.0, 0.0),
            2.0,
            1e-3,
        )
        .unwrap();
        assert!(traj.truncated.is_none());
        for s in &traj.states {
            let mu = 1.0 / (2.0 * s.t).cosh();
            let nu = -(2.0 * s.t).tanh();
            assert!((s.mu - mu).abs() < 1e-7, "t={} μ err {}", s.t, (s.mu - mu).abs());
            assert!((s.nu - nu).abs() < 1e-7);
        }
    }

    #[test]
    fn first_integrals_are_conserved() {
        let cases = [
            (FamilyKind::C5, 0.5, 1.3228756555322954),        // ν₀ = √(c²/μ−μ²), c=1
            (FamilyKind::Cp5, 0.5, 1.1180339887498949),       // c² = μ(1+μ²+ν²) = 0.9
            (FamilyKind::Ch5KPos, 0.4, 0.5),
            (FamilyKind::Ch5KNeg, 1.2, 0.5),
            (FamilyKind::Ch5KZero, 0.6, 0.8),
        ];
        for (kind, mu0, nu0) in cases {
            let traj = integrate_mu_nu(kind, OdeState::new(0.0, mu0, nu0), 1.0, 1e-3).unwrap();
            let res = first_integral_residual(&traj);
            assert!(res < 1e-8, "{kind:?}: first-integral residual {res}");
        }
    }

    #[test]
    fn c5_conserves_mu_times_speed_squared() {
        // ν² + μ² − c²/μ ≡ 0 with c² = μ₀³ when ν₀ = 0
        let mu0 = 0.5;
        let traj = integrate_mu_nu(FamilyKind::C5, OdeState::new(0.0, mu0, 0.0), 1.0, 1e-3).unwrap();
        let c2 = mu0 * mu0 * mu0;
        for s in &traj.states {
            assert!((s.nu * s.nu + s.mu * s.mu - c2 / s.mu).abs() < 1e-8);
        }
    }

    #[test]
    fn step_halving_shows_fourth_order() {
        let run = |step: f64| {
            let traj = integrate_mu_nu(
                FamilyKind::Ch5KPos,
                OdeState::new(0.0, 0.4, 0.5),
                1.0,
                step,
            )
            .unwrap();
            first_integral_residual(&traj)
        };
        let coarse = run(0.02);
        let fine = run(0.01);
        assert!(
            coarse / fine >= 15.0,
            "expected ≥ 15× reduction, got {}",
            coarse / fine
        );
    }

    #[test]
    fn cp5_stationary_mu() {
        // μ³ + μ = c² with ν = 0 makes dμ/dt vanish
        let mu0 = 0.6;
        let (dmu, _) = mu_nu_rhs(FamilyKind::Cp5, mu0, 0.0);
        assert_relative_eq!(dmu, 0.0);
    }

    #[test]
    fn ratio_ode_residual_examples() {
        // r = 4, c = −1 along the sech 2t trajectory
        let traj = integrate_mu_nu(
            FamilyKind::Ch5KZero,
            OdeState::new(0.0, 1.0, 0.0),
            1.5,
            1e-3,
        )
        .unwrap();
        assert!(ratio_ode_residual(&traj, 4.0, -1.0).unwrap() < 1e-7);

        // r = 4, c = 1 along the CP⁵ system
        let traj = integrate_mu_nu(
            FamilyKind::Cp5,
            OdeState::new(0.0, 0.5, 0.0),
            1.0,
            1e-3,
        )
        .unwrap();
        assert!(ratio_ode_residual(&traj, 4.0, 1.0).unwrap() < 1e-7);

        // constants: μ′ = μ″ = 0, r = 4, c = 0 gives 6μ⁴
        let mu = 0.7;
        assert_relative_eq!(
            ratio_ode_expression(mu, 0.0, 0.0, 4.0, 0.0).unwrap(),
            6.0 * mu.powi(4),
            epsilon = 1e-14
        );
        assert!(matches!(
            ratio_ode_expression(1.0, 0.0, 0.0, 2.0, 0.0),
            Err(Error::RatioTwoUndefined)
        ));
    }

    #[test]
    fn inconsistent_kind_is_rejected() {
        assert!(integrate_mu_nu(
            FamilyKind::Ch5KZero,
            OdeState::new(0.0, 0.5, 0.0),
            1.0,
            1e-3
        )
        .is_err());
        assert!(integrate_mu_nu(
            FamilyKind::C5,
            OdeState::new(0.0, -0.5, 0.0),
            1.0,
            1e-3
        )
        .is_err());
    }

    #[test]
    fn blowup_truncates_with_reason() {
        // k < 0 trajectories reach μ → 0, ν → −∞ in finite time
        let traj = integrate_mu_nu(
            FamilyKind::Ch5KNeg,
            OdeState::new(0.0, 1.2, 0.5),
            20.0,
            1e-3,
        )
        .unwrap();
        assert!(traj.truncated.is_some());
    }
}
