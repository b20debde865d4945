//! Time stepping: position-Verlet elastic predictor, return-map corrector,
//! and event bookkeeping.
//!
//! The corrector is the plastic jump. It is applied instantaneously at the
//! end of a step, changes `(ε_p, ξ_i, ξ_k, S_e, S_p)` and leaves the total
//! strain and the momentum `m·ε̇` untouched.

use crate::analysis::Tolerances;
use crate::convex::{self, dissipation, project_return_map, viscoplastic_step};
use crate::error::{Error, Result};
use crate::models::{entropy_production, MaterialModel, MaterialState};

#[derive(Debug, Clone, PartialEq)]
pub enum LoadingProgram {
    /// Motion from the initial conditions only.
    Free,
    /// External force `amplitude·sin(angular_frequency·t)` added to the
    /// Euler–Lagrange equation.
    ExternalForce {
        amplitude: f64,
        angular_frequency: f64,
    },
    /// Piecewise-linear total strain `(t, ε)`, held constant outside the table.
    PrescribedStrain { knots: Vec<(f64, f64)> },
}

impl LoadingProgram {
    pub fn validate(&self) -> Result<()> {
        match self {
            LoadingProgram::Free => Ok(()),
            LoadingProgram::ExternalForce {
                amplitude,
                angular_frequency,
            } => {
                if !amplitude.is_finite() || !angular_frequency.is_finite() {
                    return Err(Error::config("loading", "force parameters must be finite"));
                }
                Ok(())
            }
            LoadingProgram::PrescribedStrain { knots } => {
                if knots.is_empty() {
                    return Err(Error::config(
                        "loading.knots",
                        "at least one knot is required",
                    ));
                }
                for (i, (t, eps)) in knots.iter().enumerate() {
                    if !t.is_finite() || !eps.is_finite() {
                        return Err(Error::config(
                            format!("loading.knots[{i}]"),
                            "knot must be finite",
                        ));
                    }
                }
                for (i, pair) in knots.windows(2).enumerate() {
                    if pair[1].0 <= pair[0].0 {
                        return Err(Error::config(
                            format!("loading.knots[{}]", i + 1),
                            "knot times must be strictly increasing",
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn force(&self, t: f64) -> f64 {
        match self {
            LoadingProgram::ExternalForce {
                amplitude,
                angular_frequency,
            } => amplitude * (angular_frequency * t).sin(),
            _ => 0.0,
        }
    }

    /// Prescribed total strain at `t`, if this program prescribes one.
    pub fn prescribed_strain(&self, t: f64) -> Option<f64> {
        let LoadingProgram::PrescribedStrain { knots } = self else {
            return None;
        };
        let first = knots.first()?;
        let last = knots.last()?;
        if t <= first.0 {
            return Some(first.1);
        }
        if t >= last.0 {
            return Some(last.1);
        }
        let i = knots.partition_point(|(tk, _)| *tk <= t);
        let (t_a, e_a) = knots[i - 1];
        let (t_b, e_b) = knots[i];
        Some(e_a + (e_b - e_a) * (t - t_a) / (t_b - t_a))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EventLocalization {
    /// Correct at the end of every step whose trial state is inadmissible.
    #[default]
    PerStep,
    /// Split the step at the first crossing of `f = 0` (located to `dt·1e-6`)
    /// before correcting.
    Bisection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub model: MaterialModel,
    pub dt: f64,
    pub t_end: f64,
    /// Initial state; its `t` is the start time.
    pub initial: MaterialState,
    pub loading: LoadingProgram,
    pub event_localization: EventLocalization,
    /// Keep every `stride`-th step (plus the final one).
    pub stride: usize,
    /// Perzyna viscosity η; `0` selects the rate-independent return map.
    pub viscosity: f64,
    pub tolerances: Tolerances,
}

impl SimConfig {
    pub fn new(model: MaterialModel, dt: f64, t_end: f64) -> Self {
        Self {
            model,
            dt,
            t_end,
            initial: MaterialState::default(),
            loading: LoadingProgram::Free,
            event_localization: EventLocalization::PerStep,
            stride: 1,
            viscosity: 0.0,
            tolerances: Tolerances::default(),
        }
    }

    pub fn with_initial(mut self, initial: MaterialState) -> Self {
        self.initial = initial;
        self
    }

    pub fn with_loading(mut self, loading: LoadingProgram) -> Self {
        self.loading = loading;
        self
    }

    pub fn with_viscosity(mut self, viscosity: f64) -> Self {
        self.viscosity = viscosity;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn with_localization(mut self, localization: EventLocalization) -> Self {
        self.event_localization = localization;
        self
    }

    /// `dt·sqrt(E/m)`; the explicit elastic stepper is stable below 2.
    pub fn stability_number(&self) -> f64 {
        self.dt * (self.model.young / self.model.mass).sqrt()
    }

    pub fn t0(&self) -> f64 {
        self.initial.t
    }

    pub fn n_steps(&self) -> usize {
        ((self.t_end - self.t0()) / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config(
                "dt",
                format!("must be finite and > 0, got {}", self.dt),
            ));
        }
        if !self.t_end.is_finite() || self.t_end <= self.t0() {
            return Err(Error::config(
                "t_end",
                format!(
                    "must be finite and greater than t0 = {}, got {}",
                    self.t0(),
                    self.t_end
                ),
            ));
        }
        let value = self.stability_number();
        if value.is_nan() || value >= 2.0 {
            return Err(Error::UnstableTimeStep { dt: self.dt, value });
        }
        if self.n_steps() == 0 {
            return Err(Error::config(
                "t_end",
                "simulation span is shorter than one step",
            ));
        }
        if self.stride == 0 {
            return Err(Error::config("stride", "must be a positive integer"));
        }
        if !(self.viscosity >= 0.0 && self.viscosity.is_finite()) {
            return Err(Error::config(
                "eta",
                format!("must be finite and >= 0, got {}", self.viscosity),
            ));
        }
        let s = &self.initial;
        for (name, value) in [
            ("initial.t", s.t),
            ("initial.eps", s.eps),
            ("initial.v", s.v),
            ("initial.eps_p", s.eps_p),
            ("initial.xi_i", s.xi_i),
            ("initial.xi_k", s.xi_k),
            ("initial.S_e", s.s_e),
            ("initial.S_p", s.s_p),
        ] {
            if !value.is_finite() {
                return Err(Error::config(name, "must be finite"));
            }
        }
        self.loading.validate()?;
        self.tolerances.validate()
    }
}

/// One plastic jump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlasticEvent {
    pub t: f64,
    pub lambda: f64,
    pub d_eps_p: f64,
    pub d_xi_i: f64,
    pub d_xi_k: f64,
    pub d_s_e: f64,
    pub d_s_p: f64,
    /// Energy released by the jump, `⟦−E_mech⟧`.
    pub dissipated: f64,
    /// Generalized stress right after the jump.
    pub sigma: f64,
    pub beta_i: f64,
    pub beta_k: f64,
    pub momentum_before: f64,
    pub momentum_after: f64,
}

impl PlasticEvent {
    pub fn gamma(&self) -> f64 {
        self.d_s_e + self.d_s_p
    }

    /// `⟨z̄, Δq⟩` at the post-jump stress: the support-function value of the
    /// jump. It falls short of [`dissipated`](Self::dissipated) by the
    /// second-order term `½(EΔε_p² + KΔξ_i² + HΔξ_k²)`.
    pub fn support_dissipation(&self) -> f64 {
        self.sigma * self.d_eps_p + self.beta_i * self.d_xi_i + self.beta_k * self.d_xi_k
    }
}

/// One recorded instant with its ledger columns.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sample {
    pub state: MaterialState,
    pub sigma: f64,
    pub beta_i: f64,
    pub beta_k: f64,
    pub e_tot: f64,
    /// Cumulative dissipated energy.
    pub d_cum: f64,
    /// Cumulative entropy production.
    pub gamma_cum: f64,
}

impl Sample {
    pub fn t(&self) -> f64 {
        self.state.t
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub events: Vec<PlasticEvent>,
}

impl Trajectory {
    pub fn total_dissipation(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.d_cum)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub state: MaterialState,
    pub event: Option<PlasticEvent>,
}

/// Predictor–corrector stepper for one configuration.
#[derive(Debug, Clone, Copy)]
pub struct Stepper<'a> {
    pub model: &'a MaterialModel,
    pub loading: &'a LoadingProgram,
    pub dt: f64,
    pub viscosity: f64,
    pub tol: f64,
    pub localization: EventLocalization,
}

impl<'a> Stepper<'a> {
    pub fn new(model: &'a MaterialModel, loading: &'a LoadingProgram, dt: f64) -> Self {
        Self {
            model,
            loading,
            dt,
            viscosity: 0.0,
            tol: convex::DEFAULT_TOL,
            localization: EventLocalization::PerStep,
        }
    }

    pub fn from_config(config: &'a SimConfig) -> Self {
        Self {
            model: &config.model,
            loading: &config.loading,
            dt: config.dt,
            viscosity: config.viscosity,
            tol: config.tolerances.yield_tol,
            localization: config.event_localization,
        }
    }

    /// Position-Verlet step of `mε̈ + E(ε − ε_p) = F(t)` over `h` with the
    /// internal variables frozen. Prescribed strain overrides `ε` and
    /// differences it for `ε̇`.
    pub fn elastic_trial_step(&self, state: &MaterialState, h: f64) -> MaterialState {
        let t_next = state.t + h;
        let mut next = *state;
        next.t = t_next;
        if let Some(eps) = self.loading.prescribed_strain(t_next) {
            next.v = (eps - state.eps) / h;
            next.eps = eps;
            return next;
        }
        let model = self.model;
        let eps_half = state.eps + 0.5 * h * state.v;
        let force = self.loading.force(state.t + 0.5 * h);
        let accel = (force - model.young * (eps_half - state.eps_p)) / model.mass;
        next.v = state.v + h * accel;
        next.eps = eps_half + 0.5 * h * next.v;
        next
    }

    fn yield_value(&self, state: &MaterialState) -> Result<f64> {
        self.model.criterion.evaluate(&self.model.stress(state))
    }

    /// Plastic corrector: returns the trial state unchanged if admissible,
    /// otherwise applies the jump and reports it.
    pub fn correct(&self, trial: MaterialState) -> Result<(MaterialState, Option<PlasticEvent>)> {
        let model = self.model;
        let crit = &model.criterion;
        let z_trial = model.stress(&trial);
        let (flow, _) = if self.viscosity > 0.0 {
            viscoplastic_step(
                crit,
                &z_trial,
                &model.moduli(),
                self.viscosity,
                self.dt,
                self.tol,
            )?
        } else {
            project_return_map(crit, &z_trial, &model.moduli(), self.tol)?
        };
        if !flow.is_plastic() {
            return Ok((trial, None));
        }

        let mut next = trial;
        next.eps_p += flow.d_eps_p();
        next.xi_i += flow.d_xi_i();
        next.xi_k += flow.d_xi_k();
        let z_post = model.stress(&next);

        // The stored energy is quadratic, so pairing the jump with the average
        // of trial and corrected stress gives the exact energy it releases.
        let z_jump = z_trial.midpoint(&z_post);
        let dissipated = dissipation(&z_jump, &flow);
        let (d_s_e, d_s_p) = if model.regime().is_thermo() {
            let (d_s_e, d_s_p) = model.entropy_jumps(&z_jump, &flow)?;
            entropy_production(d_s_e, d_s_p, self.tol)?;
            (d_s_e, d_s_p)
        } else {
            (0.0, 0.0)
        };
        next.s_e += d_s_e;
        next.s_p += d_s_p;

        let event = PlasticEvent {
            t: next.t,
            lambda: flow.lambda,
            d_eps_p: flow.d_eps_p(),
            d_xi_i: flow.d_xi_i(),
            d_xi_k: flow.d_xi_k(),
            d_s_e,
            d_s_p,
            dissipated,
            sigma: z_post.sigma,
            beta_i: z_post.beta_i,
            beta_k: z_post.beta_k,
            momentum_before: model.mass * trial.v,
            momentum_after: model.mass * next.v,
        };
        Ok((next, Some(event)))
    }

    pub fn step(&self, state: &MaterialState) -> Result<StepOutcome> {
        let full = self.elastic_trial_step(state, self.dt);
        let trial = match self.localization {
            EventLocalization::PerStep => full,
            EventLocalization::Bisection => self.localized_trial(state, full)?,
        };
        let (state, event) = self.correct(trial)?;
        Ok(StepOutcome { state, event })
    }

    /// Splits the step at the yield crossing when the step starts strictly
    /// inside the elastic range and ends outside it.
    fn localized_trial(&self, state: &MaterialState, full: MaterialState) -> Result<MaterialState> {
        if self.yield_value(&full)? <= self.tol || self.yield_value(state)? >= -self.tol {
            return Ok(full);
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        while hi - lo > 1e-6 {
            let mid = 0.5 * (lo + hi);
            if self.yield_value(&self.elastic_trial_step(state, mid * self.dt))? > self.tol {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let first = self.elastic_trial_step(state, lo * self.dt);
        Ok(self.elastic_trial_step(&first, (1.0 - lo) * self.dt))
    }
}

pub fn elastic_trial_step(
    model: &MaterialModel,
    state: &MaterialState,
    dt: f64,
    loading: &LoadingProgram,
) -> MaterialState {
    Stepper::new(model, loading, dt).elastic_trial_step(state, dt)
}

pub fn step(
    model: &MaterialModel,
    state: &MaterialState,
    dt: f64,
    loading: &LoadingProgram,
) -> Result<(MaterialState, Option<PlasticEvent>)> {
    let outcome = Stepper::new(model, loading, dt).step(state)?;
    Ok((outcome.state, outcome.event))
}

fn sample(model: &MaterialModel, state: &MaterialState, d_cum: f64, gamma_cum: f64) -> Sample {
    let z = model.stress(state);
    Sample {
        state: *state,
        sigma: z.sigma,
        beta_i: z.beta_i,
        beta_k: z.beta_k,
        e_tot: model.total_energy(state),
        d_cum,
        gamma_cum,
    }
}

/// Runs the configuration from `t0` to `t_end`.
///
/// An inadmissible initial state is projected at `t0` and recorded as an
/// event there, so every sample is admissible.
pub fn simulate(config: &SimConfig) -> Result<Trajectory> {
    config.validate()?;
    let stepper = Stepper::from_config(config);
    let model = &config.model;
    let t0 = config.t0();
    let n_steps = config.n_steps();

    let mut state = config.initial;
    if let Some(eps) = config.loading.prescribed_strain(t0) {
        state.eps = eps;
    }
    let mut traj = Trajectory {
        samples: Vec::with_capacity(n_steps / config.stride + 2),
        events: Vec::new(),
    };
    let mut d_cum = 0.0;
    let mut gamma_cum = 0.0;

    let (initial, event) = stepper.correct(state)?;
    state = initial;
    if let Some(event) = event {
        d_cum += event.dissipated;
        gamma_cum += event.gamma();
        traj.events.push(event);
    }
    traj.samples.push(sample(model, &state, d_cum, gamma_cum));

    for n in 1..=n_steps {
        let outcome = stepper.step(&state)?;
        state = outcome.state;
        state.t = t0 + n as f64 * config.dt;
        if let Some(mut event) = outcome.event {
            event.t = state.t;
            d_cum += event.dissipated;
            gamma_cum += event.gamma();
            traj.events.push(event);
        }
        if n % config.stride == 0 || n == n_steps {
            traj.samples.push(sample(model, &state, d_cum, gamma_cum));
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{Regime, YieldCriterion};

    fn model(regime: Regime, sigma_y0: f64) -> MaterialModel {
        MaterialModel::new(YieldCriterion::new(regime, sigma_y0).unwrap(), 30.0, 0.82).unwrap()
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let m = model(Regime::Perfect, 30.0);
        let state = MaterialState {
            eps: 0.2,
            eps_p: 0.2,
            ..Default::default()
        };
        let next = elastic_trial_step(&m, &state, 1e-3, &LoadingProgram::Free);
        assert_eq!((next.eps, next.v), (0.2, 0.0));
    }

    #[test]
    fn first_step_matches_taylor_expansion() {
        let m = model(Regime::Perfect, 30.0);
        let next = elastic_trial_step(
            &m,
            &MaterialState::new(1.0, 0.0),
            1e-3,
            &LoadingProgram::Free,
        );
        let expected = 1.0 - 0.5 * (30.0 / 0.82) * 1e-6;
        assert!((next.eps - expected).abs() < 1e-15);
        assert!((next.eps - 0.99998171).abs() < 1e-8);
    }

    #[test]
    fn half_period_reaches_minus_one() {
        let m = model(Regime::Perfect, 1e9);
        let omega = (30.0_f64 / 0.82).sqrt();
        let half_period = std::f64::consts::PI / omega;
        let mut errors = Vec::new();
        for dt in [1e-3, 5e-4] {
            let n = (half_period / dt).round() as usize;
            let dt = half_period / n as f64;
            let mut state = MaterialState::new(1.0, 0.0);
            let mut sup = 0.0_f64;
            for k in 1..=n {
                state = elastic_trial_step(&m, &state, dt, &LoadingProgram::Free);
                sup = sup.max((state.eps - (omega * k as f64 * dt).cos()).abs());
            }
            assert!((state.eps + 1.0).abs() < 1e-5);
            errors.push(sup);
        }
        let ratio = errors[0] / errors[1];
        assert!((3.6..4.4).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn admissible_trial_has_no_event() {
        let m = model(Regime::Perfect, 30.0);
        let state = MaterialState::new(0.5, 0.1);
        let (next, event) = step(&m, &state, 1e-3, &LoadingProgram::Free).unwrap();
        assert!(event.is_none());
        assert_eq!(
            next,
            elastic_trial_step(&m, &state, 1e-3, &LoadingProgram::Free)
        );
    }

    #[test]
    fn plastic_correction_perfect() {
        let m = model(Regime::Perfect, 30.0);
        let loading = LoadingProgram::Free;
        let stepper = Stepper::new(&m, &loading, 1e-3);
        let trial = MaterialState::new(40.0 / 30.0, 0.7);
        let (next, event) = stepper.correct(trial).unwrap();
        let event = event.unwrap();
        assert!((event.lambda - 1.0 / 3.0).abs() < 1e-15);
        assert!((event.d_eps_p - 1.0 / 3.0).abs() < 1e-15);
        assert!((event.sigma - 30.0).abs() < 1e-12);
        assert_eq!(next.v, trial.v);
        assert_eq!(event.momentum_before, event.momentum_after);
        // released energy = ⟨(σ_trial + σ̄)/2, Δε_p⟩ = 35/3
        assert!((event.dissipated - 35.0 / 3.0).abs() < 1e-12);
        assert!((event.support_dissipation() - 10.0).abs() < 1e-12);
        let released = m.total_energy(&trial) - m.total_energy(&next);
        assert!((released - event.dissipated).abs() < 1e-12);
    }

    #[test]
    fn plastic_correction_isotropic() {
        let m = model(Regime::Isotropic, 30.0)
            .with_isotropic_hardening(50.0)
            .unwrap();
        let loading = LoadingProgram::Free;
        let (next, event) = Stepper::new(&m, &loading, 1e-3)
            .correct(MaterialState::new(40.0 / 30.0, 0.0))
            .unwrap();
        let event = event.unwrap();
        assert!((event.lambda - 0.125).abs() < 1e-15);
        let f = m.criterion.evaluate(&m.stress(&next)).unwrap();
        assert!(f.abs() < 1e-12);
    }

    #[test]
    fn prescribed_strain_interpolates_and_holds() {
        let loading = LoadingProgram::PrescribedStrain {
            knots: vec![(0.0, 0.0), (1.0, 0.1), (3.0, -0.1)],
        };
        assert_eq!(loading.prescribed_strain(-1.0), Some(0.0));
        assert!((loading.prescribed_strain(0.5).unwrap() - 0.05).abs() < 1e-15);
        assert!((loading.prescribed_strain(2.0).unwrap()).abs() < 1e-15);
        assert_eq!(loading.prescribed_strain(10.0), Some(-0.1));
        assert_eq!(LoadingProgram::Free.prescribed_strain(0.0), None);

        let bad = LoadingProgram::PrescribedStrain {
            knots: vec![(0.0, 0.0), (0.0, 0.1)],
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn zero_energy_free_run_is_constant() {
        let config = SimConfig::new(model(Regime::Perfect, 1.0), 1e-3, 1.0);
        let traj = simulate(&config).unwrap();
        assert!(traj.events.is_empty());
        assert_eq!(traj.samples.len(), 1001);
        assert!(traj
            .samples
            .iter()
            .all(|s| s.state.eps == 0.0 && s.e_tot == 0.0));
    }

    #[test]
    fn inadmissible_start_is_projected_at_t0() {
        let config = SimConfig::new(model(Regime::Perfect, 1.0), 1e-4, 0.01)
            .with_initial(MaterialState::new(1.0, 0.0));
        let traj = simulate(&config).unwrap();
        let first = traj.events[0];
        assert_eq!(first.t, 0.0);
        assert!((first.lambda - 29.0 / 30.0).abs() < 1e-14);
        assert!((traj.samples[0].sigma - 1.0).abs() < 1e-12);
        assert!((traj.samples[0].e_tot + traj.samples[0].d_cum - 15.0).abs() < 1e-12);
    }

    #[test]
    fn stride_and_final_sample() {
        let config = SimConfig::new(model(Regime::Perfect, 30.0), 1e-3, 0.0105)
            .with_initial(MaterialState::new(0.1, 0.0))
            .with_stride(4);
        let traj = simulate(&config).unwrap();
        let times: Vec<f64> = traj.samples.iter().map(|s| s.t()).collect();
        assert_eq!(times.len(), 4);
        assert!((times[3] - 0.011).abs() < 1e-15);
    }

    #[test]
    fn unstable_step_is_rejected_before_running() {
        let config = SimConfig::new(model(Regime::Perfect, 1.0), 0.4, 1.0);
        assert!(matches!(
            simulate(&config),
            Err(Error::UnstableTimeStep { .. })
        ));
    }

    #[test]
    fn bisection_mode_splits_the_crossing_step() {
        let m = model(Regime::Perfect, 1.0);
        let loading = LoadingProgram::Free;
        let mut stepper = Stepper::new(&m, &loading, 1e-2);
        // starts inside, crosses σ_Y = 1 during the step
        let state = MaterialState::new(0.03, 1.0);
        let per_step = stepper.step(&state).unwrap();
        stepper.localization = EventLocalization::Bisection;
        let split = stepper.step(&state).unwrap();
        let (a, b) = (per_step.event.unwrap(), split.event.unwrap());
        assert!((split.state.t - per_step.state.t).abs() < 1e-15);
        assert!(a.lambda > 0.0 && b.lambda > 0.0);
        assert!((a.lambda - b.lambda).abs() < 1e-3);
        assert_eq!(b.momentum_before, b.momentum_after);
    }

    #[test]
    fn thermal_event_records_entropy() {
        let crit = YieldCriterion::new(Regime::ThermoPerfect, 30.0)
            .unwrap()
            .with_temperature_law(0.001, 300.0)
            .unwrap();
        let m = MaterialModel::new(crit, 30.0, 0.82)
            .unwrap()
            .at_temperature(300.0)
            .unwrap();
        let loading = LoadingProgram::Free;
        let (next, event) = Stepper::new(&m, &loading, 1e-3)
            .correct(MaterialState::new(40.0 / 30.0, 0.0))
            .unwrap();
        let event = event.unwrap();
        assert!((300.0 * event.d_s_e - event.dissipated).abs() < 1e-12);
        assert!((event.d_s_p - event.lambda * 0.03).abs() < 1e-15);
        assert_eq!(next.s_e, event.d_s_e);
        assert!(
            (m.total_energy(&next) - m.total_energy(&MaterialState::new(40.0 / 30.0, 0.0))).abs()
                < 1e-12
        );
    }
}
