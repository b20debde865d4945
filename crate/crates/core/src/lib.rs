//! Nonsmooth elastoplastic and thermoplastic rheological systems.
//!
//! A single material point `mε̈ + E(ε − ε_p) = F(t)` with a spring–pad
//! plastic element, optionally hardening (isotropic, kinematic or both) and
//! optionally thermal. Plastic flow is treated as a jump: a closest-point
//! projection applied at the end of each position-Verlet step, which keeps the
//! momentum and releases exactly the energy recorded as dissipation.
//!
//! ```
//! use nonsmooth_plast::{simulate, audit_trajectory, MaterialModel, MaterialState, Regime, SimConfig, YieldCriterion};
//!
//! let crit = YieldCriterion::new(Regime::Perfect, 1.0).unwrap();
//! let model = MaterialModel::new(crit, 30.0, 0.82).unwrap();
//! let config = SimConfig::new(model, 1e-4, 1.0).with_initial(MaterialState::new(1.0, 0.0));
//! let traj = simulate(&config).unwrap();
//! assert!(!traj.events.is_empty());
//! assert!(audit_trajectory(&traj, &config).passed());
//! ```

pub mod analysis;
pub mod cli;
pub mod convex;
pub mod error;
pub mod integrator;
pub mod io;
pub mod models;

pub use analysis::{
    audit_trajectory, fit_order, hysteresis, linear_fit, viscous_convergence, BranchKind,
    HysteresisReport, LedgerReport, Tolerances, ViscousStudy,
};
pub use convex::{
    dissipation, kkt_check, project_return_map, viscoplastic_flow, viscoplastic_step, FlowResult,
    GeneralizedStress, KktReport, Moduli, Regime, YieldCriterion, YieldGradient,
};
pub use error::{Error, Result};
pub use integrator::{
    elastic_trial_step, simulate, step, EventLocalization, LoadingProgram, PlasticEvent, Sample,
    SimConfig, Stepper, Trajectory,
};
pub use models::{entropy_production, MaterialModel, MaterialState};
