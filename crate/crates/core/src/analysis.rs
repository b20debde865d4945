//! Ledger auditing, hysteresis extraction and viscous convergence studies.
//!
//! The auditor works from the raw `(t, state)` samples, the event list and
//! the configuration. Columns the integrator fills in (stress, `E_tot`,
//! `D_cum`, `gamma_cum`) are only compared against recomputed values, never
//! trusted.

use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convex::{kkt_residuals, GeneralizedStress};
use crate::error::{Error, Result};
use crate::integrator::{simulate, LoadingProgram, PlasticEvent, Sample, SimConfig, Trajectory};
use crate::models::{MaterialModel, MaterialState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Admissibility and complementarity, `f ≤ tol`, `|λf| ≤ tol`.
    #[serde(rename = "yield")]
    pub yield_tol: f64,
    /// Global energy balance, relative to the initial energy.
    pub energy_rel: f64,
    /// Momentum continuity across events, relative.
    pub momentum_rel: f64,
    /// Per-event identities (recorded vs recomputed dissipation, `T·ΔS_e`).
    pub ledger_abs: f64,
    /// Integrator-filled columns vs recomputation.
    pub column_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            yield_tol: 1e-9,
            energy_rel: 1e-6,
            momentum_rel: 1e-12,
            ledger_abs: 1e-9,
            column_rel: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("tolerances.yield", self.yield_tol),
            ("tolerances.energy_rel", self.energy_rel),
            ("tolerances.momentum_rel", self.momentum_rel),
            ("tolerances.ledger_abs", self.ledger_abs),
            ("tolerances.column_rel", self.column_rel),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::config(
                    name,
                    format!("must be finite and >= 0, got {value}"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClauseStatus {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for ClauseStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClauseStatus::Pass => "PASS",
            ClauseStatus::Fail => "FAIL",
            ClauseStatus::Skipped => "SKIP",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClauseResult {
    pub name: &'static str,
    pub status: ClauseStatus,
    /// Worst residual found, in the units of `tolerance`.
    pub residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct LedgerReport {
    pub n_samples: usize,
    pub n_events: usize,
    pub max_energy_residual: Option<f64>,
    pub max_kkt_residual: Option<f64>,
    pub max_admissibility_violation: Option<f64>,
    pub min_event_dissipation: Option<f64>,
    pub min_event_gamma: Option<f64>,
    pub max_momentum_residual: Option<f64>,
    pub clauses: Vec<ClauseResult>,
}

impl LedgerReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.status != ClauseStatus::Fail)
    }

    pub fn clause(&self, name: &str) -> Option<&ClauseResult> {
        self.clauses.iter().find(|c| c.name == name)
    }

    pub fn failed_clauses(&self) -> Vec<&'static str> {
        self.clauses
            .iter()
            .filter(|c| c.status == ClauseStatus::Fail)
            .map(|c| c.name)
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "ledger audit: {} samples, {} events",
            self.n_samples, self.n_events
        );
        for c in &self.clauses {
            let _ = write!(out, "  [{}] {:<20}", c.status, c.name);
            if c.status != ClauseStatus::Skipped {
                let _ = write!(
                    out,
                    " residual {:.3e} (tol {:.1e})",
                    c.residual, c.tolerance
                );
            }
            if !c.detail.is_empty() {
                let _ = write!(out, "  {}", c.detail);
            }
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "result: {}",
            if self.passed() { "PASS" } else { "FAIL" }
        );
        out
    }

    /// One `key=value` per line, stable order.
    pub fn to_kv(&self) -> String {
        fn opt(v: Option<f64>) -> String {
            v.map_or_else(|| "none".to_string(), |x| format!("{x:e}"))
        }
        let mut out = String::new();
        let _ = writeln!(out, "pass={}", self.passed());
        let _ = writeln!(out, "n_samples={}", self.n_samples);
        let _ = writeln!(out, "n_events={}", self.n_events);
        let _ = writeln!(out, "max_energy_residual={}", opt(self.max_energy_residual));
        let _ = writeln!(out, "max_kkt_residual={}", opt(self.max_kkt_residual));
        let _ = writeln!(
            out,
            "max_admissibility_violation={}",
            opt(self.max_admissibility_violation)
        );
        let _ = writeln!(
            out,
            "min_event_dissipation={}",
            opt(self.min_event_dissipation)
        );
        let _ = writeln!(out, "min_event_gamma={}", opt(self.min_event_gamma));
        let _ = writeln!(
            out,
            "max_momentum_residual={}",
            opt(self.max_momentum_residual)
        );
        for c in &self.clauses {
            let status = match c.status {
                ClauseStatus::Pass => "pass",
                ClauseStatus::Fail => "fail",
                ClauseStatus::Skipped => "skipped",
            };
            let _ = writeln!(out, "clause.{}={}", c.name, status);
            let _ = writeln!(out, "clause.{}.residual={:e}", c.name, c.residual);
        }
        out
    }
}

/// Running worst residual of one clause.
struct Clause {
    name: &'static str,
    tolerance: f64,
    worst: f64,
    detail: String,
}

impl Clause {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            worst: 0.0,
            detail: String::new(),
        }
    }

    /// Records `residual`; NaN counts as a violation.
    fn check(&mut self, residual: f64, what: impl FnOnce() -> String) {
        let bad = residual.is_nan() || residual > self.tolerance;
        if residual.is_nan() {
            self.worst = f64::NAN;
        } else if !self.worst.is_nan() && residual > self.worst {
            self.worst = residual;
        }
        if bad && self.detail.is_empty() {
            self.detail = what();
        }
    }

    fn finish(self) -> ClauseResult {
        let status = if self.worst.is_nan() || self.worst > self.tolerance {
            ClauseStatus::Fail
        } else {
            ClauseStatus::Pass
        };
        ClauseResult {
            name: self.name,
            status,
            residual: self.worst,
            tolerance: self.tolerance,
            detail: self.detail,
        }
    }
}

fn skipped(name: &'static str, tolerance: f64, why: &str) -> ClauseResult {
    ClauseResult {
        name,
        status: ClauseStatus::Skipped,
        residual: 0.0,
        tolerance,
        detail: why.to_string(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Released energy of a jump, `⟨z̄, Δq⟩ + ½(EΔε_p² + KΔξ_i² + HΔξ_k²)`, with
/// `z̄` the post-jump stress.
pub fn jump_energy(model: &MaterialModel, z_post: &GeneralizedStress, ev: &PlasticEvent) -> f64 {
    let pairing = z_post.sigma * ev.d_eps_p + z_post.beta_i * ev.d_xi_i + z_post.beta_k * ev.d_xi_k;
    let quadratic = model.young * ev.d_eps_p * ev.d_eps_p
        + model.isotropic_modulus * ev.d_xi_i * ev.d_xi_i
        + model.kinematic_modulus * ev.d_xi_k * ev.d_xi_k;
    pairing + 0.5 * quadratic
}

/// Cumulative work done by the loading at every sample, or `None` when it
/// cannot be recovered from the samples (strided output under forcing or
/// prescribed strain).
pub fn work_input(traj: &Trajectory, config: &SimConfig) -> Option<Vec<f64>> {
    let model = &config.model;
    let n = traj.samples.len();
    match &config.loading {
        LoadingProgram::Free => return Some(vec![0.0; n]),
        _ if config.stride != 1 => return None,
        _ => {}
    }
    let mut work = Vec::with_capacity(n);
    let mut acc = 0.0;
    work.extend(traj.samples.first().map(|_| 0.0));
    for pair in traj.samples.windows(2) {
        let (a, b) = (&pair[0].state, &pair[1].state);
        acc += match &config.loading {
            LoadingProgram::ExternalForce { .. } => {
                config.loading.force(0.5 * (a.t + b.t)) * (b.eps - a.eps)
            }
            // the strain is driven: whatever the trial gains is supplied
            _ => {
                let trial = MaterialState {
                    eps: b.eps,
                    v: b.v,
                    ..*a
                };
                model.mechanical_energy(&trial) - model.mechanical_energy(a)
            }
        };
        work.push(acc);
    }
    Some(work)
}

fn sample_at(samples: &[Sample], t: f64) -> Option<&Sample> {
    samples
        .binary_search_by(|s| s.t().total_cmp(&t))
        .ok()
        .map(|i| &samples[i])
}

/// Re-verifies every ledger clause of `traj` against `config`.
pub fn audit_trajectory(traj: &Trajectory, config: &SimConfig) -> LedgerReport {
    let model = &config.model;
    let tol = &config.tolerances;
    let crit = &model.criterion;
    let thermo = model.regime().is_thermo();
    let viscous = config.viscosity > 0.0;
    let samples = &traj.samples;
    let events = &traj.events;
    let mut report = LedgerReport {
        n_samples: samples.len(),
        n_events: events.len(),
        ..Default::default()
    };
    let Some(first) = samples.first() else {
        report.clauses.push(ClauseResult {
            name: "timestamps",
            status: ClauseStatus::Fail,
            residual: f64::NAN,
            tolerance: 0.0,
            detail: "trajectory has no samples".into(),
        });
        return report;
    };
    let t0 = first.t();

    // timestamps
    let mut c = Clause::new("timestamps", 0.0);
    for (i, pair) in samples.windows(2).enumerate() {
        c.check(if pair[1].t() > pair[0].t() { 0.0 } else { 1.0 }, || {
            format!("sample {} not after sample {i}", i + 1)
        });
        c.check((pair[0].d_cum - pair[1].d_cum).max(0.0), || {
            format!("D_cum decreases at sample {}", i + 1)
        });
    }
    let t_last = samples[samples.len() - 1].t();
    for (j, ev) in events.iter().enumerate() {
        let in_range = ev.t >= t0 && ev.t <= t_last && ev.t.is_finite();
        let ordered = j == 0 || ev.t >= events[j - 1].t;
        c.check(if in_range && ordered { 0.0 } else { 1.0 }, || {
            format!("event {j} at t = {} is out of order or range", ev.t)
        });
    }
    report.clauses.push(c.finish());

    // Post-jump stress of each event, from the sample at the event time when
    // it was kept, else from the record.
    let z_post: Vec<GeneralizedStress> = events
        .iter()
        .map(|ev| match sample_at(samples, ev.t) {
            Some(s) => model.stress(&s.state),
            None => {
                let mut z = model.stress(&MaterialState::default());
                z.sigma = ev.sigma;
                z.beta_i = ev.beta_i;
                z.beta_k = ev.beta_k;
                z
            }
        })
        .collect();
    let released: Vec<f64> = events
        .iter()
        .zip(&z_post)
        .map(|(ev, z)| jump_energy(model, z, ev))
        .collect();

    // ledger_columns
    let mut c = Clause::new("ledger_columns", tol.column_rel);
    let mut k = 0;
    let (mut d_acc, mut g_acc) = (0.0, 0.0);
    for (i, s) in samples.iter().enumerate() {
        while k < events.len() && events[k].t <= s.t() {
            d_acc += released[k];
            g_acc += events[k].gamma();
            k += 1;
        }
        let z = model.stress(&s.state);
        let scale = model.young.max(1.0);
        for (name, col, exact) in [
            ("sigma", s.sigma, z.sigma),
            ("beta_i", s.beta_i, z.beta_i),
            ("beta_k", s.beta_k, z.beta_k),
        ] {
            c.check((col - exact).abs() / exact.abs().max(scale), || {
                format!("{name} column wrong at sample {i}")
            });
        }
        let e_tot = model.total_energy(&s.state);
        c.check(rel(s.e_tot, e_tot), || {
            format!("E_tot column wrong at sample {i}")
        });
        c.check(rel(s.d_cum, d_acc), || {
            format!("D_cum column wrong at sample {i}")
        });
        c.check(rel(s.gamma_cum, g_acc), || {
            format!("gamma_cum column wrong at sample {i}")
        });
    }
    report.clauses.push(c.finish());

    // event_consistency
    let mut c = Clause::new("event_consistency", tol.ledger_abs);
    let has_iso = model.regime().has_isotropic();
    let has_kin = model.regime().has_kinematic();
    let dir_s_p = if thermo {
        crit.sigma_y0 * crit.omega
    } else {
        0.0
    };
    for (j, ev) in events.iter().enumerate() {
        let l = ev.lambda;
        let scale = l.abs().max(1.0);
        c.check((ev.d_eps_p.abs() - l).abs() / scale, || {
            format!("event {j}: |d_eps_p| != lambda")
        });
        let xi_i = if has_iso { l } else { 0.0 };
        c.check((ev.d_xi_i - xi_i).abs() / scale, || {
            format!("event {j}: d_xi_i inconsistent")
        });
        let xi_k = if has_kin { -ev.d_eps_p } else { 0.0 };
        c.check((ev.d_xi_k - xi_k).abs() / scale, || {
            format!("event {j}: d_xi_k inconsistent")
        });
        c.check((ev.d_s_p - l * dir_s_p).abs() / scale, || {
            format!("event {j}: d_S_p != lambda*dT f")
        });
        c.check(rel(ev.dissipated, released[j]), || {
            format!(
                "event {j}: recorded dissipation {} != recomputed {}",
                ev.dissipated, released[j]
            )
        });
        if thermo {
            let temperature = model.temperature.unwrap_or(f64::NAN);
            c.check(rel(temperature * ev.d_s_e, released[j]), || {
                format!("event {j}: T*d_S_e != dissipation")
            });
        } else {
            c.check(ev.d_s_e.abs(), || {
                format!("event {j}: entropy jump in a mechanical regime")
            });
        }
        let z = &z_post[j];
        c.check(
            (ev.sigma - z.sigma)
                .abs()
                .max((ev.beta_i - z.beta_i).abs())
                .max((ev.beta_k - z.beta_k).abs())
                / model.young.max(1.0),
            || format!("event {j}: recorded stress differs from the sample"),
        );
    }
    // internal variables only move by the recorded jumps
    let init = &config.initial;
    let mut prev = MaterialState {
        t: f64::NEG_INFINITY,
        ..*init
    };
    let mut k = 0;
    for (i, s) in samples.iter().enumerate() {
        let mut jump = [0.0; 5];
        while k < events.len() && events[k].t <= s.t() {
            let ev = &events[k];
            for (acc, d) in jump
                .iter_mut()
                .zip([ev.d_eps_p, ev.d_xi_i, ev.d_xi_k, ev.d_s_e, ev.d_s_p])
            {
                *acc += d;
            }
            k += 1;
        }
        let st = &s.state;
        let deltas = [
            st.eps_p - prev.eps_p,
            st.xi_i - prev.xi_i,
            st.xi_k - prev.xi_k,
            st.s_e - prev.s_e,
            st.s_p - prev.s_p,
        ];
        for (name, (d, j)) in ["eps_p", "xi_i", "xi_k", "S_e", "S_p"]
            .iter()
            .zip(deltas.iter().zip(jump))
        {
            c.check(rel(*d, j), || {
                format!("{name} change before sample {i} not matched by events")
            });
        }
        prev = *st;
    }
    report.clauses.push(c.finish());

    // momentum_jump
    let mut c = Clause::new("momentum_jump", tol.momentum_rel);
    for (j, ev) in events.iter().enumerate() {
        let r = (ev.momentum_after - ev.momentum_before).abs()
            / ev.momentum_before.abs().max(f64::MIN_POSITIVE);
        c.check(r, || {
            format!(
                "event {j}: momentum {} -> {}",
                ev.momentum_before, ev.momentum_after
            )
        });
        if let Some(s) = sample_at(samples, ev.t) {
            let p = model.mass * s.state.v;
            let r = (p - ev.momentum_after).abs() / p.abs().max(f64::MIN_POSITIVE);
            c.check(r, || {
                format!("event {j}: recorded momentum differs from m*v of the sample")
            });
        }
    }
    if !events.is_empty() {
        report.max_momentum_residual = Some(c.worst);
    }
    report.clauses.push(c.finish());

    // kkt and admissibility
    if viscous {
        report
            .clauses
            .push(skipped("kkt", tol.yield_tol, "viscous regularization"));
        report.clauses.push(skipped(
            "admissibility",
            tol.yield_tol,
            "viscous regularization",
        ));
    } else {
        let mut c = Clause::new("kkt", tol.yield_tol);
        for (j, (ev, z)) in events.iter().zip(&z_post).enumerate() {
            let f = crit.evaluate(z).unwrap_or(f64::NAN);
            let kkt = kkt_residuals(ev.lambda, f, 0.0);
            let worst = kkt
                .violations
                .iter()
                .map(|v| v.residual)
                .fold(if f.is_nan() { f64::NAN } else { f.abs() }, f64::max);
            c.check(worst, || {
                format!("event {j}: lambda = {}, f = {f}", ev.lambda)
            });
        }
        if !events.is_empty() {
            report.max_kkt_residual = Some(c.worst);
        }
        report.clauses.push(c.finish());

        let mut c = Clause::new("admissibility", tol.yield_tol);
        for (i, s) in samples.iter().enumerate() {
            let f = crit.evaluate(&model.stress(&s.state)).unwrap_or(f64::NAN);
            c.check(f.max(0.0), || {
                format!("sample {i} at t = {}: f = {f}", s.t())
            });
        }
        report.max_admissibility_violation = Some(c.worst);
        report.clauses.push(c.finish());
    }

    // dissipation_nonneg
    let mut c = Clause::new("dissipation_nonneg", tol.ledger_abs);
    for (j, ev) in events.iter().enumerate() {
        c.check((-ev.dissipated).max(-released[j]).max(0.0), || {
            format!("event {j}: negative dissipation {}", ev.dissipated)
        });
    }
    report.min_event_dissipation = events
        .iter()
        .zip(&released)
        .map(|(ev, r)| ev.dissipated.min(*r))
        .reduce(f64::min);
    report.clauses.push(c.finish());

    // entropy
    if thermo {
        let mut c = Clause::new("entropy", tol.ledger_abs);
        for (j, ev) in events.iter().enumerate() {
            c.check((-ev.gamma()).max(0.0), || {
                format!("event {j}: gamma = {}", ev.gamma())
            });
        }
        for (i, pair) in samples.windows(2).enumerate() {
            let drop = pair[0].state.entropy() - pair[1].state.entropy();
            c.check(drop.max(0.0), || {
                format!("S_e + S_p decreases at sample {}", i + 1)
            });
        }
        report.min_event_gamma = events.iter().map(PlasticEvent::gamma).reduce(f64::min);
        report.clauses.push(c.finish());
    }

    // energy_balance
    match work_input(traj, config) {
        None => report.clauses.push(skipped(
            "energy_balance",
            tol.energy_rel,
            "work input needs every step (stride = 1) under forcing or prescribed strain",
        )),
        Some(work) => {
            let mut c = Clause::new("energy_balance", tol.energy_rel);
            let mut k = 0;
            let mut d_acc = 0.0;
            let mut balance = Vec::with_capacity(samples.len());
            for s in samples {
                while k < events.len() && events[k].t <= s.t() {
                    d_acc += released[k];
                    k += 1;
                }
                // thermal regimes keep the released energy as heat T·S_e
                let d = if thermo { 0.0 } else { d_acc };
                balance.push(model.total_energy(&s.state) + d);
            }
            let variation: f64 = work.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
            let scale = balance[0].abs().max(variation);
            for (i, (b, w)) in balance.iter().zip(&work).enumerate() {
                let r = (b - w - balance[0]).abs();
                let r = if r == 0.0 { 0.0 } else { r / scale };
                c.check(r, || {
                    format!("balance off by {r:.3e} at t = {}", samples[i].t())
                });
            }
            report.max_energy_residual = Some(c.worst);
            report.clauses.push(c.finish());
        }
    }
    report
}

/// Least-squares line `y = slope·x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs[..n].iter().zip(&ys[..n]) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Slope of `log(error)` against `log(parameter)`; non-positive errors are dropped.
pub fn fit_order(params: &[f64], errors: &[f64]) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = params
        .iter()
        .zip(errors)
        .filter(|(p, e)| **p > 0.0 && **e > 0.0)
        .map(|(p, e)| (p.ln(), e.ln()))
        .unzip();
    linear_fit(&xs, &ys).map(|(slope, _)| slope)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchKind {
    Elastic,
    Plastic,
}

/// Maximal run of samples with one kind of response and one loading direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Branch {
    pub kind: BranchKind,
    /// Sample indices, inclusive. A plastic branch holds only post-yield samples.
    pub start: usize,
    pub end: usize,
    /// `+1` loading in tension, `-1` in compression.
    pub direction: i8,
    /// Chord `Δσ/Δε`; `None` for a single-point branch.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Excursion {
    /// Sample index of the strain reversal.
    pub reversal: usize,
    /// Last stress on the forward surface.
    pub sigma_forward: f64,
    /// First stress on the reverse surface.
    pub sigma_reverse: f64,
    /// `|sigma_forward − sigma_reverse|`.
    pub range: f64,
    /// `|Δε|` of the step that reached the reverse surface.
    pub strain_increment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HysteresisReport {
    /// `(ε, σ)` path.
    pub points: Vec<(f64, f64)>,
    pub branches: Vec<Branch>,
    pub reversals: Vec<usize>,
    pub excursions: Vec<Excursion>,
}

impl HysteresisReport {
    pub fn slopes(&self, kind: BranchKind) -> Vec<f64> {
        self.branches
            .iter()
            .filter(|b| b.kind == kind)
            .filter_map(|b| b.slope)
            .collect()
    }
}

/// Splits a cycled trajectory into elastic and plastic branches.
pub fn hysteresis(traj: &Trajectory) -> Result<HysteresisReport> {
    let samples = &traj.samples;
    let points: Vec<(f64, f64)> = samples.iter().map(|s| (s.state.eps, s.sigma)).collect();
    let mut branches: Vec<Branch> = Vec::new();
    let mut reversals = Vec::new();
    let mut last_dir = 0i8;
    let mut open: Option<Branch> = None;

    let close = |b: Branch, branches: &mut Vec<Branch>| {
        let (e0, s0) = points[b.start];
        let (e1, s1) = points[b.end];
        let slope = (b.end > b.start && e1 != e0).then(|| (s1 - s0) / (e1 - e0));
        branches.push(Branch { slope, ..b });
    };

    for k in 0..samples.len().saturating_sub(1) {
        let (a, b) = (&samples[k].state, &samples[k + 1].state);
        let d_eps = b.eps - a.eps;
        let dir: i8 = if d_eps > 0.0 {
            1
        } else if d_eps < 0.0 {
            -1
        } else {
            0
        };
        if dir != 0 && last_dir != 0 && dir != last_dir {
            reversals.push(k);
        }
        if dir != 0 {
            last_dir = dir;
        }
        let plastic = b.eps_p != a.eps_p || b.xi_i != a.xi_i || b.xi_k != a.xi_k;
        let kind = if plastic {
            BranchKind::Plastic
        } else {
            BranchKind::Elastic
        };

        let continues = matches!(open, Some(o) if o.kind == kind && o.direction == dir && dir != 0);
        if continues {
            if let Some(o) = open.as_mut() {
                o.end = k + 1;
            }
            continue;
        }
        if let Some(o) = open.take() {
            close(o, &mut branches);
        }
        if dir == 0 {
            continue;
        }
        open = Some(Branch {
            kind,
            start: if plastic { k + 1 } else { k },
            end: k + 1,
            direction: dir,
            slope: None,
        });
    }
    if let Some(o) = open.take() {
        close(o, &mut branches);
    }
    if reversals.is_empty() {
        return Err(Error::InsufficientCycling);
    }

    let mut excursions = Vec::new();
    for (n, &r) in reversals.iter().enumerate() {
        let next_reversal = reversals.get(n + 1).copied().unwrap_or(usize::MAX);
        let forward = branches
            .iter()
            .rev()
            .find(|b| b.kind == BranchKind::Plastic && b.end <= r);
        let reverse = branches
            .iter()
            .find(|b| b.kind == BranchKind::Plastic && b.start > r && b.start <= next_reversal);
        if let (Some(f), Some(rv)) = (forward, reverse) {
            let sigma_forward = points[f.end].1;
            let sigma_reverse = points[rv.start].1;
            excursions.push(Excursion {
                reversal: r,
                sigma_forward,
                sigma_reverse,
                range: (sigma_forward - sigma_reverse).abs(),
                strain_increment: (points[rv.start].0 - points[rv.start - 1].0).abs(),
            });
        }
    }
    Ok(HysteresisReport {
        points,
        branches,
        reversals,
        excursions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ViscousRow {
    pub eta: f64,
    /// `sup_t |ε_p^η(t) − ε_p^0(t)|` on the common sample grid.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViscousStudy {
    pub rows: Vec<ViscousRow>,
    /// Fitted exponent `p` in `deviation ≈ C·η^p`.
    pub order: Option<f64>,
}

impl ViscousStudy {
    /// Deviation strictly decreases down the table (rows in the given η order).
    pub fn is_monotone(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].deviation < w[0].deviation)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("eta,deviation\n");
        for row in &self.rows {
            let _ = writeln!(out, "{:.16e},{:.16e}", row.eta, row.deviation);
        }
        out
    }
}

/// Runs `config` once rate-independently and once per viscosity in `etas`,
/// in parallel, and tabulates the plastic-strain deviation.
pub fn viscous_convergence(config: &SimConfig, etas: &[f64]) -> Result<ViscousStudy> {
    for &eta in etas {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "eta",
                reason: format!("viscosities must be finite and > 0, got {eta}"),
            });
        }
    }
    let reference = simulate(&config.clone().with_viscosity(0.0))?;
    let rows = etas
        .par_iter()
        .map(|&eta| {
            let traj = simulate(&config.clone().with_viscosity(eta))?;
            let deviation = reference
                .samples
                .iter()
                .zip(&traj.samples)
                .map(|(a, b)| (a.state.eps_p - b.state.eps_p).abs())
                .fold(0.0, f64::max);
            Ok(ViscousRow { eta, deviation })
        })
        .collect::<Result<Vec<_>>>()?;
    let (params, errors): (Vec<f64>, Vec<f64>) = rows.iter().map(|r| (r.eta, r.deviation)).unzip();
    Ok(ViscousStudy {
        order: fit_order(&params, &errors),
        rows,
    })
}
