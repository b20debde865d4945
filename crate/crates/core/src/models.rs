//! Constitutive content of the spring–pad rheological models: stresses,
//! energies, Lagrangians and entropy jumps.
//!
//! Stored energy is `½E(ε − ε_p)² + ½Kξ_i² + ½Hξ_k²`. Thermal regimes work
//! at a fixed temperature `T` with internal energy `𝒲 = ½Eε_e² + 𝓗(ξ) + T·S_e`,
//! so the Helmholtz free energy `Ψ = 𝒲 − T·S_e` reduces to the mechanical
//! potential and the total energy carries the extra heat term `T·S_e`.

use crate::convex::{FlowResult, GeneralizedStress, Moduli, Regime, YieldCriterion};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialModel {
    pub young: f64,
    pub mass: f64,
    pub isotropic_modulus: f64,
    pub kinematic_modulus: f64,
    pub criterion: YieldCriterion,
    /// Fixed ambient temperature of thermal regimes.
    pub temperature: Option<f64>,
}

/// State of the single material point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MaterialState {
    pub t: f64,
    /// Total strain ε.
    pub eps: f64,
    /// Strain rate ε̇.
    pub v: f64,
    pub eps_p: f64,
    pub xi_i: f64,
    pub xi_k: f64,
    /// Elastic entropy S_e.
    pub s_e: f64,
    /// Plastic entropy S_p.
    pub s_p: f64,
}

impl MaterialState {
    pub fn new(eps: f64, v: f64) -> Self {
        Self {
            eps,
            v,
            ..Self::default()
        }
    }

    pub fn elastic_strain(&self) -> f64 {
        self.eps - self.eps_p
    }

    pub fn entropy(&self) -> f64 {
        self.s_e + self.s_p
    }
}

impl MaterialModel {
    pub fn new(criterion: YieldCriterion, young: f64, mass: f64) -> Result<Self> {
        let model = Self {
            young,
            mass,
            isotropic_modulus: 0.0,
            kinematic_modulus: 0.0,
            criterion,
            temperature: None,
        };
        model.check_moduli()?;
        Ok(model)
    }

    pub fn with_isotropic_hardening(mut self, modulus: f64) -> Result<Self> {
        self.isotropic_modulus = modulus;
        self.check_moduli()?;
        Ok(self)
    }

    pub fn with_kinematic_hardening(mut self, modulus: f64) -> Result<Self> {
        self.kinematic_modulus = modulus;
        self.check_moduli()?;
        Ok(self)
    }

    pub fn at_temperature(mut self, temperature: f64) -> Result<Self> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "T",
                reason: format!("absolute temperature must be > 0, got {temperature}"),
            });
        }
        self.temperature = Some(temperature);
        Ok(self)
    }

    pub fn regime(&self) -> Regime {
        self.criterion.regime
    }

    fn check_moduli(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: format!("must be finite and > 0, got {}", self.mass),
            });
        }
        Moduli::new(self.young, self.isotropic_modulus, self.kinematic_modulus)?;
        let regime = self.regime();
        if self.isotropic_modulus > 0.0 && !regime.has_isotropic() {
            return Err(Error::InvalidParameter {
                name: "K",
                reason: format!("regime `{regime}` has no isotropic hardening, K must be 0"),
            });
        }
        if self.kinematic_modulus > 0.0 && !regime.has_kinematic() {
            return Err(Error::InvalidParameter {
                name: "H",
                reason: format!("regime `{regime}` has no kinematic hardening, H must be 0"),
            });
        }
        Ok(())
    }

    /// Full consistency check, including the temperature of thermal regimes.
    pub fn validate(&self) -> Result<()> {
        self.check_moduli()?;
        if self.regime().is_thermo() {
            let temperature = self
                .temperature
                .ok_or(Error::MissingTemperature(self.regime()))?;
            self.criterion
                .yield_stress(&GeneralizedStress::new(0.0).at_temperature(temperature))?;
        }
        Ok(())
    }

    pub fn moduli(&self) -> Moduli {
        Moduli {
            young: self.young,
            isotropic: self.isotropic_modulus,
            kinematic: self.kinematic_modulus,
        }
    }

    /// `σ = E(ε − ε_p)`, `β_i = −Kξ_i`, `β_k = −Hξ_k`.
    pub fn stress(&self, state: &MaterialState) -> GeneralizedStress {
        GeneralizedStress {
            sigma: self.young * state.elastic_strain(),
            // 0.0 − x keeps unused back-stresses at +0 instead of −0
            beta_i: 0.0 - self.isotropic_modulus * state.xi_i,
            beta_k: 0.0 - self.kinematic_modulus * state.xi_k,
            temperature: if self.regime().is_thermo() {
                self.temperature
            } else {
                None
            },
        }
    }

    pub fn kinetic_energy(&self, state: &MaterialState) -> f64 {
        0.5 * self.mass * state.v * state.v
    }

    /// `½Eε_e² + ½Kξ_i² + ½Hξ_k²`.
    pub fn stored_energy(&self, state: &MaterialState) -> f64 {
        let eps_e = state.elastic_strain();
        0.5 * self.young * eps_e * eps_e
            + 0.5 * self.isotropic_modulus * state.xi_i * state.xi_i
            + 0.5 * self.kinematic_modulus * state.xi_k * state.xi_k
    }

    /// Kinetic plus stored energy, without the heat term.
    pub fn mechanical_energy(&self, state: &MaterialState) -> f64 {
        self.kinetic_energy(state) + self.stored_energy(state)
    }

    /// Kinetic plus internal energy; thermal regimes add `T·S_e`.
    pub fn total_energy(&self, state: &MaterialState) -> f64 {
        let mechanical = self.mechanical_energy(state);
        match (self.regime().is_thermo(), self.temperature) {
            (true, Some(temperature)) => mechanical + temperature * state.s_e,
            _ => mechanical,
        }
    }

    /// Kinetic energy minus the Helmholtz free energy (the stored energy at
    /// fixed temperature).
    pub fn lagrangian(&self, state: &MaterialState) -> f64 {
        self.kinetic_energy(state) - self.stored_energy(state)
    }

    /// Elastic and plastic entropy jumps of a plastic event:
    /// `ΔS_e = (λ/T)(⟨σ, ∂_σf⟩ + ⟨β, ∂_βf⟩)` and `ΔS_p = λ·∂_Tf`.
    pub fn entropy_jumps(&self, z: &GeneralizedStress, flow: &FlowResult) -> Result<(f64, f64)> {
        if !self.regime().is_thermo() {
            return Err(Error::NonThermoRegime(self.regime()));
        }
        let temperature = z
            .temperature
            .or(self.temperature)
            .filter(|t| *t > 0.0)
            .ok_or(Error::MissingTemperature(self.regime()))?;
        if flow.lambda == 0.0 {
            return Ok((0.0, 0.0));
        }
        let pairing =
            z.sigma * flow.dir_eps_p + z.beta_i * flow.dir_xi_i + z.beta_k * flow.dir_xi_k;
        Ok((
            flow.lambda * pairing / temperature,
            flow.lambda * flow.dir_s_p,
        ))
    }
}

/// Entropy production `γ = ΔS_e + ΔS_p` of one event; negative values beyond
/// `tol` violate the Clausius–Duhem inequality.
pub fn entropy_production(d_s_e: f64, d_s_p: f64, tol: f64) -> Result<f64> {
    let gamma = d_s_e + d_s_p;
    if gamma < -tol {
        return Err(Error::SecondLawViolation { gamma });
    }
    Ok(gamma)
}
