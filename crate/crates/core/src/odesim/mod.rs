//! Time integration and classification of long-run behavior.

mod attractor;
mod integrator;

pub use attractor::{
    bistability_probe, detect_attractor, recurrence_metrics, terminal_recurrence, AttractorVerdict,
    BistabilityReport, DetectionTolerances, Diagnostics, VerdictKind,
};
pub use integrator::StepStats;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::all_equilibria;
use crate::error::{Error, Result};
use crate::model::{Model, ModelId, StateVector};
use crate::spectral::stability_at;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub t_end: f64,
    /// Spacing of the dense output samples.
    pub sample_interval: f64,
    pub max_steps: usize,
    /// Lengthen `t_end` to ten times the slowest linear timescale at the
    /// model's equilibria (at most [`HORIZON_CAP`] times the base value).
    pub extend_horizon: bool,
}

pub const HORIZON_CAP: f64 = 20.0;

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            max_step: f64::INFINITY,
            t_end: 5000.0,
            sample_interval: 0.05,
            max_steps: 50_000_000,
            extend_horizon: true,
        }
    }
}

impl IntegratorConfig {
    /// Default horizon for the model: 5000 for planar systems, 2000 for the
    /// autoimmune ones.
    pub fn for_model(id: ModelId) -> Self {
        match id {
            ModelId::Autoimmune2d | ModelId::Autoimmune3d => Self {
                t_end: 2000.0,
                sample_interval: 0.02,
                ..Self::default()
            },
            _ => Self::default(),
        }
    }

    /// Same configuration with both tolerances divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            rtol: self.rtol / factor,
            atol: self.atol / factor,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &'static str, v: f64| {
            if v > 0.0 && !v.is_nan() {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, value: v })
            }
        };
        check("rtol", self.rtol)?;
        check("atol", self.atol)?;
        check("max_step", self.max_step)?;
        check("t_end", self.t_end)?;
        check("sample_interval", self.sample_interval)?;
        if !self.t_end.is_finite() {
            return Err(Error::InvalidParameter { name: "t_end", value: self.t_end });
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter { name: "max_steps", value: 0.0 });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub model: ModelId,
    pub param_value: f64,
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }

    /// Time series of the infected (or autoreactive) compartment.
    pub fn observed(&self) -> Vec<f64> {
        self.component(self.model.infected_index())
    }

    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("trajectory holds at least the initial state")
    }
}

/// Integrates `model` with its bifurcation parameter set to `p`.
pub fn integrate(model: &Model, p: f64, ic: &StateVector, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if ic.len() != model.dimension() || !ic.is_finite() {
        return Err(Error::ContractViolation {
            operation: "integrate",
            detail: format!("initial condition {:?} is not a finite {}-vector", ic.0, model.dimension()),
        });
    }
    let m = model.with_parameter(p)?;
    m.check_domain(ic.as_slice())?;
    let cap = (cfg.t_end / cfg.sample_interval).ceil() as usize + 2;
    let mut times = Vec::with_capacity(cap);
    let mut states = Vec::with_capacity(cap);
    let settings = integrator::Settings {
        rtol: cfg.rtol,
        atol: cfg.atol,
        max_step: cfg.max_step,
        max_steps: cfg.max_steps,
    };
    let stats = integrator::dopri5(
        |y, dy| m.rhs_into(y, dy),
        ic.as_slice(),
        cfg.t_end,
        cfg.sample_interval,
        &settings,
        |t, y| {
            times.push(t);
            states.push(StateVector::new(y.to_vec()));
        },
    )?;
    Ok(Trajectory {
        model: m.id(),
        param_value: p,
        times,
        states,
        stats,
    })
}

/// Ten times the slowest decay or growth time among the hyperbolic
/// equilibria at `p`, if any is finite.
pub fn slow_horizon(model: &Model, p: f64) -> Result<Option<f64>> {
    let m = model.with_parameter(p)?;
    let mut slowest: Option<f64> = None;
    for e in equilibrium_states(model, p)? {
        let Ok(rep) = stability_at(&m, &e) else { continue };
        for l in rep.eigenvalues {
            let r = l.re.abs();
            if r > 0.0 && r.is_finite() {
                slowest = Some(slowest.map_or(r, |s: f64| s.min(r)));
            }
        }
    }
    Ok(slowest.map(|r| 10.0 / r))
}

/// `cfg` with the horizon lengthened as requested by `extend_horizon`.
pub fn effective_config(model: &Model, p: f64, cfg: &IntegratorConfig) -> Result<IntegratorConfig> {
    let mut out = cfg.clone();
    if cfg.extend_horizon {
        if let Some(h) = slow_horizon(model, p)? {
            out.t_end = cfg.t_end.max(h.min(HORIZON_CAP * cfg.t_end));
        }
    }
    Ok(out)
}

/// Integrates and classifies against every equilibrium of the model at `p`.
pub fn simulate(
    model: &Model,
    p: f64,
    ic: &StateVector,
    cfg: &IntegratorConfig,
    tol: &DetectionTolerances,
) -> Result<(Trajectory, AttractorVerdict)> {
    let traj = integrate(model, p, ic, &effective_config(model, p, cfg)?)?;
    let eq = equilibrium_states(model, p)?;
    let verdict = detect_attractor(&traj, &eq, tol);
    Ok((traj, verdict))
}

pub(crate) fn equilibrium_states(model: &Model, p: f64) -> Result<Vec<StateVector>> {
    let m = model.with_parameter(p)?;
    Ok(all_equilibria(&m)?.into_iter().map(|e| e.state).collect())
}

/// Runs [`simulate`] for every ic in parallel; results keep the input order.
pub fn simulate_many(
    model: &Model,
    p: f64,
    ics: &[StateVector],
    cfg: &IntegratorConfig,
    tol: &DetectionTolerances,
) -> Result<Vec<AttractorVerdict>> {
    ics.par_iter()
        .map(|ic| simulate(model, p, ic, cfg, tol).map(|(_, v)| v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;

    #[test]
    fn uninfected_state_is_invariant_below_threshold() {
        // B < D and A small: uninfected equilibrium is stable
        let m = Model::new(presets::inhost(0.03, 0.03)).unwrap();
        let x0 = m.uninfected_state();
        let cfg = IntegratorConfig {
            extend_horizon: false,
            t_end: 200.0,
            sample_interval: 1.0,
            ..IntegratorConfig::default()
        };
        let tr = integrate(&m, 0.03, &x0, &cfg).unwrap();
        for s in &tr.states {
            assert!((s[0] - x0[0]).abs() < 1e-8 && s[1].abs() < 1e-8);
        }
        assert_eq!(tr.times.len(), 201);
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn bad_config_rejected() {
        let m = Model::new(presets::inhost(0.03, 0.03)).unwrap();
        let cfg = IntegratorConfig { rtol: 0.0, ..IntegratorConfig::default() };
        assert!(integrate(&m, 0.03, &m.uninfected_state(), &cfg).is_err());
        let cfg = IntegratorConfig::default();
        assert!(integrate(&m, 0.03, &StateVector::new(vec![1.0, f64::NAN]), &cfg).is_err());
    }
}
