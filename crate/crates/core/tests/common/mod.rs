#![allow(dead_code)]

pub mod oracle;

use nonsmooth_plast::{
    GeneralizedStress, LoadingProgram, MaterialModel, MaterialState, Moduli, Regime, SimConfig,
    YieldCriterion,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use self::oracle::Case;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random regime, moduli and trial stress. `β_i` stays below `σ_Y` so the
/// elastic range is never empty.
pub fn draw_case(rng: &mut impl Rng) -> (Regime, Case) {
    let regime = Regime::ALL[rng.gen_range(0..Regime::ALL.len())];
    let sigma_y0 = rng.gen_range(0.1..50.0);
    let thermo = regime.is_thermo();
    let (omega, t_ref, temperature) = if thermo {
        (
            rng.gen_range(0.0..1e-3),
            rng.gen_range(1.0..600.0),
            rng.gen_range(1.0..600.0),
        )
    } else {
        (0.0, 0.0, 0.0)
    };
    let mut c = Case {
        iso: regime.has_isotropic(),
        kin: regime.has_kinematic(),
        thermo,
        young: rng.gen_range(1.0..100.0),
        k: 0.0,
        h: 0.0,
        sigma_y0,
        omega,
        t_ref,
        temperature,
        sigma: rng.gen_range(-200.0..200.0),
        beta_i: 0.0,
        beta_k: 0.0,
    };
    if c.iso {
        c.k = rng.gen_range(1.0..100.0);
        c.beta_i = rng.gen_range(-50.0..0.999 * c.yield_stress());
    }
    if c.kin {
        c.h = rng.gen_range(1.0..100.0);
        c.beta_k = rng.gen_range(-50.0..50.0);
    }
    (regime, c)
}

pub fn criterion(regime: Regime, c: &Case) -> YieldCriterion {
    let crit = YieldCriterion::new(regime, c.sigma_y0).unwrap();
    if c.thermo {
        crit.with_temperature_law(c.omega, c.t_ref).unwrap()
    } else {
        crit
    }
}

pub fn moduli(c: &Case) -> Moduli {
    Moduli::new(c.young, c.k, c.h).unwrap()
}

pub fn trial(c: &Case) -> GeneralizedStress {
    let z = GeneralizedStress::new(c.sigma)
        .with_beta_i(c.beta_i)
        .with_beta_k(c.beta_k);
    if c.thermo {
        z.at_temperature(c.temperature)
    } else {
        z
    }
}

pub fn model(regime: Regime, sigma_y0: f64, mass: f64) -> MaterialModel {
    let crit = YieldCriterion::new(regime, sigma_y0).unwrap();
    let crit = if regime.is_thermo() {
        crit.with_temperature_law(0.001, 300.0).unwrap()
    } else {
        crit
    };
    let mut m = MaterialModel::new(crit, 30.0, mass).unwrap();
    if regime.is_thermo() {
        m = m.at_temperature(300.0).unwrap();
    }
    if regime.has_isotropic() {
        m = m.with_isotropic_hardening(50.0).unwrap();
    }
    if regime.has_kinematic() {
        m = m.with_kinematic_hardening(35.0).unwrap();
    }
    m
}

/// Free vibration from `ε = 1` at rest, `σ_Y0 = 1`, `dt = 1e-4`.
pub fn free_run(regime: Regime, mass: f64, t_end: f64) -> SimConfig {
    SimConfig::new(model(regime, 1.0, mass), 1e-4, t_end).with_initial(MaterialState::new(1.0, 0.0))
}

/// Same start as [`free_run`], `ε = 1` at rest, driven by `5·sin(0.8·sqrt(E/m)·t)`
/// so that the surface is reached again and again.
pub fn forced_run(regime: Regime, mass: f64, t_end: f64) -> SimConfig {
    let omega = (30.0 / mass).sqrt();
    free_run(regime, mass, t_end).with_loading(LoadingProgram::ExternalForce {
        amplitude: 5.0,
        angular_frequency: 0.8 * omega,
    })
}

pub fn cycling_knots() -> LoadingProgram {
    LoadingProgram::PrescribedStrain {
        knots: vec![(0.0, 0.0), (1.0, 0.1), (3.0, -0.1), (5.0, 0.1)],
    }
}

/// Prescribed-strain cycling between ±0.1, `σ_Y0 = 1`, `dt = 1e-3`.
pub fn cycling_run(regime: Regime) -> SimConfig {
    SimConfig::new(model(regime, 1.0, 0.82), 1e-3, 5.0).with_loading(cycling_knots())
}

pub fn config_json(regime: Regime, t_end: f64) -> String {
    let mut doc = serde_json::json!({
        "regime": regime.as_str(),
        "E": 30.0,
        "m": 0.82,
        "sigma_Y0": 1.0,
        "dt": 1e-4,
        "t_end": t_end,
        "initial": { "eps": 1.0 },
    });
    if regime.has_isotropic() {
        doc["K"] = 50.0.into();
    }
    if regime.has_kinematic() {
        doc["H"] = 35.0.into();
    }
    if regime.is_thermo() {
        doc["T"] = 300.0.into();
        doc["omega"] = 0.001.into();
    }
    doc.to_string()
}
