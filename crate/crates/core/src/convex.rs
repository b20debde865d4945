//! Convex-analysis primitives for one-dimensional yield criteria.
//!
//! A criterion `f(σ, β_i, β_k, T) ≤ 0` defines the convex admissible set of
//! generalized stresses. Plastic flow lives in the normal cone `λ∇f`, the
//! multiplier obeys the Kuhn–Tucker conditions `λ ≥ 0, f ≤ 0, λf = 0`, and
//! the return map is the closest-point projection of an elastic trial state
//! in the metric weighted by the inverse moduli.
//!
//! All criteria share the form
//!
//! ```text
//! f = |σ − β_k·[kin]| + β_i·[iso] − σ_Y(T),   σ_Y(T) = σ_Y0·(1 − ω·(T − T0))
//! ```
//!
//! where the bracketed flags switch the hardening terms on for the regime and
//! the temperature law only applies to thermal regimes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance (stress units) on admissibility and complementarity.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Rheological regime: which hardening terms and which temperature law enter
/// the yield criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Perfect,
    Isotropic,
    Kinematic,
    Combined,
    ThermoPerfect,
    ThermoIsotropic,
    ThermoKinematic,
    ThermoCombined,
}

impl Regime {
    pub const ALL: [Regime; 8] = [
        Regime::Perfect,
        Regime::Isotropic,
        Regime::Kinematic,
        Regime::Combined,
        Regime::ThermoPerfect,
        Regime::ThermoIsotropic,
        Regime::ThermoKinematic,
        Regime::ThermoCombined,
    ];

    pub fn is_thermo(self) -> bool {
        matches!(
            self,
            Regime::ThermoPerfect
                | Regime::ThermoIsotropic
                | Regime::ThermoKinematic
                | Regime::ThermoCombined
        )
    }

    pub fn has_isotropic(self) -> bool {
        matches!(
            self,
            Regime::Isotropic | Regime::Combined | Regime::ThermoIsotropic | Regime::ThermoCombined
        )
    }

    pub fn has_kinematic(self) -> bool {
        matches!(
            self,
            Regime::Kinematic | Regime::Combined | Regime::ThermoKinematic | Regime::ThermoCombined
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Perfect => "perfect",
            Regime::Isotropic => "isotropic",
            Regime::Kinematic => "kinematic",
            Regime::Combined => "combined",
            Regime::ThermoPerfect => "thermo_perfect",
            Regime::ThermoIsotropic => "thermo_isotropic",
            Regime::ThermoKinematic => "thermo_kinematic",
            Regime::ThermoCombined => "thermo_combined",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Regime::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter {
                name: "regime",
                reason: format!("unknown regime `{s}`"),
            })
    }
}

/// Generalized stress `(σ, β_i, β_k, T)` dual to `(ε_p, ξ_i, ξ_k, S_p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedStress {
    pub sigma: f64,
    /// Isotropic back-stress `β_i = −∂𝓗/∂ξ_i`.
    pub beta_i: f64,
    /// Kinematic back-stress `β_k = −∂𝓗/∂ξ_k`.
    pub beta_k: f64,
    /// Absolute temperature; required by thermal regimes only.
    pub temperature: Option<f64>,
}

impl GeneralizedStress {
    pub fn new(sigma: f64) -> Self {
        Self {
            sigma,
            beta_i: 0.0,
            beta_k: 0.0,
            temperature: None,
        }
    }

    pub fn with_beta_i(mut self, beta_i: f64) -> Self {
        self.beta_i = beta_i;
        self
    }

    pub fn with_beta_k(mut self, beta_k: f64) -> Self {
        self.beta_k = beta_k;
        self
    }

    pub fn at_temperature(mut self, temperature: f64) -> Self {
        self.temperature = Some(temperature);
        self
    }

    /// Componentwise average; the temperature of `self` is kept.
    pub fn midpoint(&self, other: &GeneralizedStress) -> GeneralizedStress {
        GeneralizedStress {
            sigma: 0.5 * (self.sigma + other.sigma),
            beta_i: 0.5 * (self.beta_i + other.beta_i),
            beta_k: 0.5 * (self.beta_k + other.beta_k),
            temperature: self.temperature,
        }
    }
}

/// `(∂f/∂σ, ∂f/∂β_i, ∂f/∂β_k, ∂f/∂T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YieldGradient {
    pub d_sigma: f64,
    pub d_beta_i: f64,
    pub d_beta_k: f64,
    pub d_temperature: f64,
}

/// Elastic and hardening moduli that weight the projection metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moduli {
    pub young: f64,
    pub isotropic: f64,
    pub kinematic: f64,
}

impl Moduli {
    pub fn new(young: f64, isotropic: f64, kinematic: f64) -> Result<Self> {
        if !(young > 0.0 && young.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "E",
                reason: format!("must be finite and > 0, got {young}"),
            });
        }
        for (name, value) in [("K", isotropic), ("H", kinematic)] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and >= 0, got {value}"),
                });
            }
        }
        Ok(Self {
            young,
            isotropic,
            kinematic,
        })
    }

    /// `⟨∇f, G∇f⟩` with `G = diag(E, K, H)`: the rate at which `f` falls per
    /// unit multiplier along the return direction.
    pub fn flow_stiffness(&self, g: &YieldGradient) -> f64 {
        self.young * g.d_sigma * g.d_sigma
            + self.isotropic * g.d_beta_i * g.d_beta_i
            + self.kinematic * g.d_beta_k * g.d_beta_k
    }
}

/// Plastic multiplier and the normal-cone direction it scales.
///
/// Jumps of the internal variables are `λ·dir`: `Δε_p = λ·dir_eps_p`,
/// `Δξ_i = λ·dir_xi_i`, `Δξ_k = λ·dir_xi_k`, `ΔS_p = λ·dir_s_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowResult {
    pub lambda: f64,
    pub dir_eps_p: f64,
    pub dir_xi_i: f64,
    pub dir_xi_k: f64,
    pub dir_s_p: f64,
}

impl FlowResult {
    /// No flow; directions are left at zero since the normal cone at an
    /// interior point is `{0}`.
    pub fn none() -> Self {
        Self {
            lambda: 0.0,
            dir_eps_p: 0.0,
            dir_xi_i: 0.0,
            dir_xi_k: 0.0,
            dir_s_p: 0.0,
        }
    }

    pub fn along(lambda: f64, g: &YieldGradient) -> Self {
        Self {
            lambda,
            dir_eps_p: g.d_sigma,
            dir_xi_i: g.d_beta_i,
            dir_xi_k: g.d_beta_k,
            dir_s_p: g.d_temperature,
        }
    }

    pub fn is_plastic(&self) -> bool {
        self.lambda > 0.0
    }

    pub fn d_eps_p(&self) -> f64 {
        self.lambda * self.dir_eps_p
    }

    pub fn d_xi_i(&self) -> f64 {
        self.lambda * self.dir_xi_i
    }

    pub fn d_xi_k(&self) -> f64 {
        self.lambda * self.dir_xi_k
    }

    pub fn d_s_p(&self) -> f64 {
        self.lambda * self.dir_s_p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YieldCriterion {
    pub regime: Regime,
    pub sigma_y0: f64,
    /// Thermal softening coefficient ω (1/temperature), thermal regimes only.
    pub omega: f64,
    /// Reference temperature T0 of the softening law.
    pub t0: f64,
}

impl YieldCriterion {
    pub fn new(regime: Regime, sigma_y0: f64) -> Result<Self> {
        if !(sigma_y0 > 0.0 && sigma_y0.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "sigma_Y0",
                reason: format!("must be finite and > 0, got {sigma_y0}"),
            });
        }
        Ok(Self {
            regime,
            sigma_y0,
            omega: 0.0,
            t0: 0.0,
        })
    }

    /// Linear softening law `σ_Y(T) = σ_Y0·(1 − ω(T − T0))`.
    pub fn with_temperature_law(mut self, omega: f64, t0: f64) -> Result<Self> {
        if !(omega >= 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "omega",
                reason: format!("must be finite and >= 0, got {omega}"),
            });
        }
        if !t0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "T0",
                reason: format!("must be finite, got {t0}"),
            });
        }
        self.omega = omega;
        self.t0 = t0;
        Ok(self)
    }

    fn temperature(&self, z: &GeneralizedStress) -> Result<f64> {
        match z.temperature {
            Some(t) if t > 0.0 && t.is_finite() => Ok(t),
            _ => Err(Error::MissingTemperature(self.regime)),
        }
    }

    /// Current yield stress; `σ_Y0` for isothermal regimes.
    pub fn yield_stress(&self, z: &GeneralizedStress) -> Result<f64> {
        if !self.regime.is_thermo() {
            return Ok(self.sigma_y0);
        }
        let temperature = self.temperature(z)?;
        let yield_stress = self.sigma_y0 * (1.0 - self.omega * (temperature - self.t0));
        if yield_stress <= 0.0 {
            return Err(Error::CollapsedYieldSurface {
                temperature,
                yield_stress,
            });
        }
        Ok(yield_stress)
    }

    /// `σ − β_k` for kinematic regimes, `σ` otherwise.
    pub fn relative_stress(&self, z: &GeneralizedStress) -> f64 {
        if self.regime.has_kinematic() {
            z.sigma - z.beta_k
        } else {
            z.sigma
        }
    }

    pub fn evaluate(&self, z: &GeneralizedStress) -> Result<f64> {
        let yield_stress = self.yield_stress(z)?;
        let iso = if self.regime.has_isotropic() {
            z.beta_i
        } else {
            0.0
        };
        Ok(self.relative_stress(z).abs() + iso - yield_stress)
    }

    /// Gradient of `f`; errors at the kink `σ − β_k = 0` where only a
    /// subdifferential exists.
    pub fn gradient(&self, z: &GeneralizedStress) -> Result<YieldGradient> {
        let s = self.relative_stress(z);
        if s == 0.0 {
            return Err(Error::NonDifferentiable {
                sigma: z.sigma,
                beta_k: z.beta_k,
            });
        }
        let sign = s.signum();
        let d_temperature = if self.regime.is_thermo() {
            // also validates T
            self.yield_stress(z)?;
            self.sigma_y0 * self.omega
        } else {
            0.0
        };
        Ok(YieldGradient {
            d_sigma: sign,
            d_beta_i: if self.regime.has_isotropic() {
                1.0
            } else {
                0.0
            },
            d_beta_k: if self.regime.has_kinematic() {
                -sign
            } else {
                0.0
            },
            d_temperature,
        })
    }
}

/// Stress after moving `z` by `−λ·G·∇f`; temperature is held fixed.
fn returned(
    z: &GeneralizedStress,
    lambda: f64,
    g: &YieldGradient,
    moduli: &Moduli,
) -> GeneralizedStress {
    GeneralizedStress {
        sigma: z.sigma - moduli.young * lambda * g.d_sigma,
        beta_i: z.beta_i - moduli.isotropic * lambda * g.d_beta_i,
        beta_k: z.beta_k - moduli.kinematic * lambda * g.d_beta_k,
        temperature: z.temperature,
    }
}

/// Gradient at an inadmissible trial state, mapping the kink to an apex return.
fn trial_gradient(crit: &YieldCriterion, z: &GeneralizedStress) -> Result<YieldGradient> {
    match crit.gradient(z) {
        Err(Error::NonDifferentiable { .. }) => Err(Error::ApexReturn),
        other => other,
    }
}

/// The flow must not carry the relative stress through the kink; otherwise
/// the projection lands on the apex and the face normal is the wrong one.
fn check_face(
    crit: &YieldCriterion,
    trial: &GeneralizedStress,
    corrected: &GeneralizedStress,
) -> Result<()> {
    let before = crit.relative_stress(trial);
    let after = crit.relative_stress(corrected);
    if after * before < 0.0 {
        return Err(Error::ApexReturn);
    }
    Ok(())
}

/// Closest-point projection of `z_trial` onto `{f ≤ 0}` in the metric
/// `diag(1/E, 1/K, 1/H)`.
///
/// For the piecewise-linear criteria handled here the multiplier has the
/// closed form `λ = f(z_trial) / (E + K·[iso] + H·[kin])` and the corrected
/// stress is `z_trial − λ·G·∇f`, which lands exactly on the yield surface.
pub fn project_return_map(
    crit: &YieldCriterion,
    z_trial: &GeneralizedStress,
    moduli: &Moduli,
    tol: f64,
) -> Result<(FlowResult, GeneralizedStress)> {
    let f_trial = crit.evaluate(z_trial)?;
    if f_trial <= tol {
        return Ok((FlowResult::none(), *z_trial));
    }
    let g = trial_gradient(crit, z_trial)?;
    let lambda = f_trial / moduli.flow_stiffness(&g);
    let corrected = returned(z_trial, lambda, &g, moduli);
    check_face(crit, z_trial, &corrected)?;
    Ok((FlowResult::along(lambda, &g), corrected))
}

/// Mechanical dissipation pairing `⟨z, λ∇f⟩ = λ(σ·dir_εp + β_i·dir_ξi + β_k·dir_ξk)`.
///
/// At a point of the yield surface this is the support function of the
/// admissible set evaluated on the flow; for the Tresca criterion it reduces
/// to `λ|σ|`. The temperature component is excluded (it is the thermal part
/// `T·ΔS_p`).
pub fn dissipation(z: &GeneralizedStress, flow: &FlowResult) -> f64 {
    flow.lambda * (z.sigma * flow.dir_eps_p + z.beta_i * flow.dir_xi_i + z.beta_k * flow.dir_xi_k)
}

/// Perzyna rate `λ̇ = max(0, f)/η` along `∇f`, the gradient flow of the
/// Moreau–Yosida envelope of the indicator function with penalty `1/η`.
pub fn viscoplastic_flow(
    crit: &YieldCriterion,
    z: &GeneralizedStress,
    eta: f64,
) -> Result<FlowResult> {
    if eta.is_nan() || eta <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "eta",
            reason: format!("viscosity must be > 0, got {eta}"),
        });
    }
    let f = crit.evaluate(z)?;
    if f <= 0.0 {
        return Ok(FlowResult::none());
    }
    let g = trial_gradient(crit, z)?;
    Ok(FlowResult::along(f / eta, &g))
}

/// One implicit (backward Euler) viscoplastic update over `dt`.
///
/// Solves `λ = dt·f(z_trial − λG∇f)/η`, i.e. `λ = dt·f_trial/(η + dt·c)` with
/// `c = ⟨∇f, G∇f⟩`. As `η → 0` this tends to [`project_return_map`] with
/// error `O(η)`.
pub fn viscoplastic_step(
    crit: &YieldCriterion,
    z_trial: &GeneralizedStress,
    moduli: &Moduli,
    eta: f64,
    dt: f64,
    tol: f64,
) -> Result<(FlowResult, GeneralizedStress)> {
    if eta.is_nan() || eta <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "eta",
            reason: format!("viscosity must be > 0, got {eta}"),
        });
    }
    let f_trial = crit.evaluate(z_trial)?;
    if f_trial <= tol {
        return Ok((FlowResult::none(), *z_trial));
    }
    let g = trial_gradient(crit, z_trial)?;
    let lambda = dt * f_trial / (eta + dt * moduli.flow_stiffness(&g));
    let corrected = returned(z_trial, lambda, &g, moduli);
    check_face(crit, z_trial, &corrected)?;
    Ok((FlowResult::along(lambda, &g), corrected))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KktClause {
    /// `λ ≥ 0`
    Multiplier,
    /// `f ≤ 0`
    Admissibility,
    /// `λ·f = 0`
    Complementarity,
}

impl fmt::Display for KktClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KktClause::Multiplier => "multiplier (lambda >= 0)",
            KktClause::Admissibility => "admissibility (f <= 0)",
            KktClause::Complementarity => "complementarity (lambda*f = 0)",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktViolation {
    pub clause: KktClause,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KktReport {
    pub violations: Vec<KktViolation>,
}

impl KktReport {
    pub fn satisfied(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn residual(&self, clause: KktClause) -> Option<f64> {
        self.violations
            .iter()
            .find(|v| v.clause == clause)
            .map(|v| v.residual)
    }
}

/// Checks the Kuhn–Tucker triplet at a post-correction state.
pub fn kkt_check(
    crit: &YieldCriterion,
    z_post: &GeneralizedStress,
    flow: &FlowResult,
    tol: f64,
) -> Result<KktReport> {
    let f = crit.evaluate(z_post)?;
    Ok(kkt_residuals(flow.lambda, f, tol))
}

/// Kuhn–Tucker triplet for a multiplier and a yield value.
pub fn kkt_residuals(lambda: f64, f: f64, tol: f64) -> KktReport {
    let mut violations = Vec::new();
    if lambda < -tol {
        violations.push(KktViolation {
            clause: KktClause::Multiplier,
            residual: -lambda,
        });
    }
    if f > tol {
        violations.push(KktViolation {
            clause: KktClause::Admissibility,
            residual: f,
        });
    }
    let product = (lambda * f).abs();
    if product > tol {
        violations.push(KktViolation {
            clause: KktClause::Complementarity,
            residual: product,
        });
    }
    KktReport { violations }
}
