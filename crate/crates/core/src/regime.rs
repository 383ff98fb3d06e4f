//! Dimensionless parameters of the two-layer system, regime membership and the
//! closed-form constants of the model.
//!
//! With `d1`, `d2` the layer depths, `a` (resp. `a_b`) the interface (resp.
//! bottom) amplitude, `lambda` the horizontal scale and `rho1`, `rho2` the
//! densities:
//!
//! ```text
//! mu = d1^2 / lambda^2   eps = a / d1   beta = a_b / d1
//! delta = d1 / d2        gamma = rho1 / rho2
//! ```
//!
//! The Bond-type number `bo` enters only through `1/bo`; `bo = infinity`
//! (no surface tension) is encoded as `bo_inv = 0`.

use crate::error::{Error, Result};

/// Box bounds of the shallow-water parameter set together with the slack
/// constants of the medium-amplitude regime.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RegimeBounds {
    pub mu_max: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub beta_max: f64,
    pub bo_inv_max: f64,
}

impl Default for RegimeBounds {
    fn default() -> Self {
        RegimeBounds {
            mu_max: 1.0,
            delta_min: 0.1,
            delta_max: 10.0,
            beta_max: 1.0,
            bo_inv_max: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RegimeParams {
    pub mu: f64,
    pub eps: f64,
    pub delta: f64,
    pub gamma: f64,
    pub beta: f64,
    /// `1/bo`; zero means no surface tension.
    pub bo_inv: f64,
    /// Slack constant `M` of `eps <= M sqrt(mu)`, `beta <= M sqrt(mu)`.
    pub m: f64,
    /// Lower bound required of `nu`.
    pub nu0: f64,
    pub bounds: RegimeBounds,
}

impl RegimeParams {
    /// Parameters without surface tension and with the default regime bounds.
    pub fn new(mu: f64, eps: f64, delta: f64, gamma: f64, beta: f64) -> Self {
        RegimeParams {
            mu,
            eps,
            delta,
            gamma,
            beta,
            bo_inv: 0.0,
            m: 1.0,
            nu0: 1e-3,
            bounds: RegimeBounds::default(),
        }
    }

    pub fn with_bo_inv(mut self, bo_inv: f64) -> Self {
        self.bo_inv = bo_inv;
        self
    }

    pub fn with_amplitudes(mut self, eps: f64, beta: f64) -> Self {
        self.eps = eps;
        self.beta = beta;
        self
    }

    /// `max(eps, beta)`, the rate appearing in the existence time and the
    /// energy growth bound.
    pub fn nonlinearity(&self) -> f64 {
        self.eps.max(self.beta)
    }

    pub fn lambda(&self) -> f64 {
        let (g, d) = (self.gamma, self.delta);
        (1.0 + g * d) / (3.0 * d * (g + d))
    }

    pub fn nu(&self) -> f64 {
        self.lambda() - self.bo_inv
    }
}

/// Constants of the model, all determined by `(delta, gamma, bo)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ModelCoefficients {
    pub lambda: f64,
    pub alpha: f64,
    pub theta: f64,
    pub alpha1: f64,
    pub theta1: f64,
    pub nu: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub varsigma: f64,
    pub kappa: f64,
    pub omega: f64,
}

impl ModelCoefficients {
    /// Name/value pairs in a fixed order, used for printing tables.
    pub fn table(&self) -> [(&'static str, f64); 13] {
        [
            ("lambda", self.lambda),
            ("alpha", self.alpha),
            ("theta", self.theta),
            ("alpha1", self.alpha1),
            ("theta1", self.theta1),
            ("nu", self.nu),
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("varsigma", self.varsigma),
            ("kappa", self.kappa),
            ("omega", self.omega),
        ]
    }
}

/// Evaluates every model constant.
///
/// Fails with [`Error::NonPositiveNu`] when `lambda - 1/bo < nu0`, i.e. when
/// surface tension is strong enough to destroy the ellipticity of the
/// dispersive operator.
pub fn compute_coefficients(params: &RegimeParams) -> Result<ModelCoefficients> {
    let g = params.gamma;
    let d = params.delta;
    let gd = g + d;

    let lambda = (1.0 + g * d) / (3.0 * d * gd);
    let alpha = (1.0 - g) / (gd * gd);
    let theta = (1.0 + g * d) * (d * d - g) / (d * gd * gd * gd);
    let alpha1 = 1.0 / (gd * gd);
    let theta1 = d * (1.0 + g * d) / (gd * gd * gd);

    let nu = lambda - params.bo_inv;
    if !(nu >= params.nu0) {
        return Err(Error::NonPositiveNu {
            nu,
            nu0: params.nu0,
        });
    }

    let kappa1 = gd / 3.0 * (2.0 * theta - alpha) / nu;
    let kappa2 = gd * theta / nu;
    let omega1 = -theta1 * gd / 3.0 / nu;
    let omega2 = -gd / 3.0 * (alpha1 + 2.0 * theta1) / nu;
    let varsigma = ((2.0 * alpha - theta) / 3.0 - params.bo_inv * (d * d - g) / (gd * gd)) / nu;
    let kappa = 2.0 * alpha / 3.0;
    let omega = gd * gd / 3.0 * (alpha1 / 2.0 + theta1);

    Ok(ModelCoefficients {
        lambda,
        alpha,
        theta,
        alpha1,
        theta1,
        nu,
        kappa1,
        kappa2,
        omega1,
        omega2,
        varsigma,
        kappa,
        omega,
    })
}

/// A clause of the regime definition that a parameter tuple fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Clause {
    MuPositive,
    MuMax,
    EpsRange,
    DeltaRange,
    GammaRange,
    BetaRange,
    BoInvRange,
    EpsMediumAmplitude,
    BetaMediumAmplitude,
    NuLowerBound,
}

impl Clause {
    pub fn describe(&self) -> &'static str {
        match self {
            Clause::MuPositive => "0 < mu",
            Clause::MuMax => "mu <= mu_max",
            Clause::EpsRange => "0 <= eps <= 1",
            Clause::DeltaRange => "delta_min < delta < delta_max",
            Clause::GammaRange => "0 <= gamma < 1",
            Clause::BetaRange => "0 <= beta <= beta_max",
            Clause::BoInvRange => "0 <= bo_inv <= bo_inv_max",
            Clause::EpsMediumAmplitude => "eps <= M sqrt(mu)",
            Clause::BetaMediumAmplitude => "beta <= M sqrt(mu)",
            Clause::NuLowerBound => "nu >= nu0",
        }
    }

    fn is_shallow_water(&self) -> bool {
        !matches!(
            self,
            Clause::EpsMediumAmplitude | Clause::BetaMediumAmplitude | Clause::NuLowerBound
        )
    }
}

impl std::fmt::Display for Clause {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.describe())
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RegimeReport {
    pub in_sw: bool,
    pub in_ch: bool,
    pub violations: Vec<Clause>,
}

/// Checks membership in the shallow-water set and in its medium-amplitude
/// (Camassa–Holm) subset, listing every violated clause.
pub fn validate_regime(params: &RegimeParams) -> RegimeReport {
    let p = params;
    let b = &p.bounds;
    let mut violations = Vec::new();
    let mut fails = |ok: bool, clause: Clause| {
        if !ok {
            violations.push(clause);
        }
    };

    fails(p.mu > 0.0, Clause::MuPositive);
    fails(p.mu <= b.mu_max, Clause::MuMax);
    fails((0.0..=1.0).contains(&p.eps), Clause::EpsRange);
    fails(
        p.delta > b.delta_min && p.delta < b.delta_max,
        Clause::DeltaRange,
    );
    fails(p.gamma >= 0.0 && p.gamma < 1.0, Clause::GammaRange);
    fails(p.beta >= 0.0 && p.beta <= b.beta_max, Clause::BetaRange);
    fails(
        p.bo_inv >= 0.0 && p.bo_inv <= b.bo_inv_max,
        Clause::BoInvRange,
    );

    let slack = p.m * p.mu.max(0.0).sqrt();
    fails(p.eps <= slack, Clause::EpsMediumAmplitude);
    fails(p.beta <= slack, Clause::BetaMediumAmplitude);
    fails(p.nu() >= p.nu0, Clause::NuLowerBound);

    let in_sw = violations.iter().all(|c| !c.is_shallow_water());
    let in_ch = violations.is_empty();
    RegimeReport {
        in_sw,
        in_ch,
        violations,
    }
}
