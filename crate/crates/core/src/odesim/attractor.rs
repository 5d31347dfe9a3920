use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{effective_config, equilibrium_states, integrate, IntegratorConfig, Trajectory};
use crate::error::{Error, Result};
use crate::model::{Model, StateVector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectionTolerances {
    /// Share of samples at the end used for the equilibrium test.
    pub terminal_fraction: f64,
    /// Share of samples at the end used for the oscillation and recurrence tests.
    pub analysis_fraction: f64,
    /// Relative distance below which the tail counts as sitting on an equilibrium.
    pub equilibrium_tol: f64,
    pub period_jitter: f64,
    /// Allowed spread of successive maxima, relative to peak-to-trough height.
    pub amplitude_jitter: f64,
    pub theta_hi: f64,
    pub theta_lo: f64,
    /// Shortest low interval that counts as quiescent; `None` means twice the
    /// mean episode duration.
    pub min_quiescent_duration: Option<f64>,
    pub min_episodes: usize,
    pub min_quiescent_fraction: f64,
    /// Absolute level under which a series counts as flat.
    pub flat_floor: f64,
}

impl Default for DetectionTolerances {
    fn default() -> Self {
        Self {
            terminal_fraction: 0.1,
            analysis_fraction: 0.5,
            equilibrium_tol: 1e-5,
            period_jitter: 0.02,
            amplitude_jitter: 0.02,
            theta_hi: 0.5,
            theta_lo: 0.1,
            min_quiescent_duration: None,
            min_episodes: 3,
            min_quiescent_fraction: 0.5,
            flat_floor: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VerdictKind {
    Equilibrium { index: usize },
    LimitCycle { period: f64, mean_amplitude: f64 },
    Recurrent { episodes: usize, quiescent_fraction: f64 },
    Undecided,
}

impl VerdictKind {
    pub fn label(&self) -> &'static str {
        match self {
            VerdictKind::Equilibrium { .. } => "equilibrium",
            VerdictKind::LimitCycle { .. } => "limit_cycle",
            VerdictKind::Recurrent { .. } => "recurrent",
            VerdictKind::Undecided => "undecided",
        }
    }

    /// Same category, ignoring the attached measurements (except the
    /// equilibrium index).
    pub fn same_category(&self, other: &VerdictKind) -> bool {
        match (self, other) {
            (VerdictKind::Equilibrium { index: a }, VerdictKind::Equilibrium { index: b }) => a == b,
            _ => self.label() == other.label(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub nearest_equilibrium: Option<usize>,
    /// Largest relative tail distance to the nearest equilibrium.
    pub equilibrium_distance: f64,
    pub episodes: usize,
    pub quiescent_fraction: f64,
    pub maxima: usize,
    pub period: Option<f64>,
    pub period_jitter: Option<f64>,
    pub window_min: f64,
    pub window_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttractorVerdict {
    pub kind: VerdictKind,
    pub diagnostics: Diagnostics,
}

/// Episode count and quiescent fraction of `values` sampled at `times`.
///
/// Episodes are maximal runs above `theta_hi`. Quiescent time is the total
/// length of runs below `theta_lo` lasting at least `min_quiescent`.
pub fn recurrence_metrics(
    times: &[f64],
    values: &[f64],
    theta_hi: f64,
    theta_lo: f64,
    min_quiescent: f64,
) -> Result<(usize, f64)> {
    if !(theta_lo > 0.0 && theta_lo < theta_hi) {
        return Err(Error::ContractViolation {
            operation: "recurrence_metrics",
            detail: format!("need 0 < theta_lo < theta_hi, got {theta_lo}, {theta_hi}"),
        });
    }
    if times.len() < 2 || times.len() != values.len() {
        return Err(Error::ContractViolation {
            operation: "recurrence_metrics",
            detail: "need at least two samples with matching times".into(),
        });
    }
    let span = times[times.len() - 1] - times[0];
    let episodes = runs(times, values, |v| v > theta_hi).len();
    let quiet: f64 = runs(times, values, |v| v < theta_lo)
        .into_iter()
        .filter(|&d| d >= min_quiescent)
        .fold(0.0, |a, d| a + d);
    Ok((episodes, (quiet / span).min(1.0)))
}

/// Durations of maximal runs of samples satisfying `pred`. A run covers
/// the time between its first and last sample plus one sample spacing,
/// clipped to the series.
fn runs(times: &[f64], values: &[f64], pred: impl Fn(f64) -> bool) -> Vec<f64> {
    let n = times.len();
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for i in 0..=n {
        let inside = i < n && pred(values[i]);
        match (start, inside) {
            (None, true) => start = Some(i),
            (Some(s), false) => {
                let lo = if s == 0 { times[0] } else { 0.5 * (times[s - 1] + times[s]) };
                let hi = if i == n { times[n - 1] } else { 0.5 * (times[i - 1] + times[i]) };
                out.push(hi - lo);
                start = None;
            }
            _ => {}
        }
    }
    out
}

fn tail_start(len: usize, fraction: f64) -> usize {
    let k = ((len as f64) * fraction).ceil() as usize;
    len - k.clamp(2.min(len), len)
}

/// Recurrence metrics of the observed compartment over the analysis window,
/// with thresholds scaled by that window's maximum.
pub fn terminal_recurrence(traj: &Trajectory, tol: &DetectionTolerances) -> (usize, f64) {
    let y = traj.observed();
    let s = tail_start(y.len(), tol.analysis_fraction);
    let (t, y) = (&traj.times[s..], &y[s..]);
    let (lo, hi) = min_max(y);
    if hi < tol.flat_floor || hi - lo < tol.flat_floor {
        return (0, 1.0);
    }
    let theta_hi = tol.theta_hi * hi;
    let theta_lo = tol.theta_lo * hi;
    let min_q = tol.min_quiescent_duration.unwrap_or_else(|| {
        let ep = runs(t, y, |v| v > theta_hi);
        if ep.is_empty() {
            0.0
        } else {
            2.0 * ep.iter().sum::<f64>() / ep.len() as f64
        }
    });
    recurrence_metrics(t, y, theta_hi, theta_lo, min_q).unwrap_or((0, 0.0))
}

fn min_max(y: &[f64]) -> (f64, f64) {
    y.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
}

/// Local maxima above the window midline, with parabolic refinement of
/// their time and value.
fn significant_maxima(t: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    let (lo, hi) = min_max(y);
    let mid = 0.5 * (lo + hi);
    let mut out = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        if y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > mid {
            let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
            let den = a - 2.0 * b + c;
            let dt = t[i + 1] - t[i];
            let off = if den != 0.0 { 0.5 * (a - c) / den } else { 0.0 };
            out.push((t[i] + off * dt, b - 0.25 * (a - c) * off));
        }
    }
    out
}

/// Categorical long-run behavior of `traj`.
///
/// Checked in order: equilibrium (tail within tolerance of a listed
/// equilibrium), recurrence, regular oscillation of the observed
/// compartment; anything else is undecided.
pub fn detect_attractor(
    traj: &Trajectory,
    equilibria: &[StateVector],
    tol: &DetectionTolerances,
) -> AttractorVerdict {
    let mut diag = Diagnostics::default();
    let n = traj.len();

    let tail = &traj.states[tail_start(n, tol.terminal_fraction)..];
    let best = equilibria
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let scale = e.norm_inf().max(1.0);
            let dist = tail
                .iter()
                .map(|s| s.0.iter().zip(&e.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            (k, dist / scale)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1));
    if let Some((k, dist)) = best {
        diag.nearest_equilibrium = Some(k);
        diag.equilibrium_distance = dist;
    }

    let y = traj.observed();
    let s = tail_start(n, tol.analysis_fraction);
    let (wt, wy) = (&traj.times[s..], &y[s..]);
    let (lo, hi) = min_max(wy);
    diag.window_min = lo;
    diag.window_max = hi;
    let (episodes, qf) = terminal_recurrence(traj, tol);
    diag.episodes = episodes;
    diag.quiescent_fraction = qf;

    let maxima = significant_maxima(wt, wy);
    diag.maxima = maxima.len();
    let periodic = if maxima.len() >= 3 {
        let gaps: Vec<f64> = maxima.windows(2).map(|w| w[1].0 - w[0].0).collect();
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        let (gmin, gmax) = min_max(&gaps);
        let jitter = (gmax - gmin) / mean;
        diag.period = Some(mean);
        diag.period_jitter = Some(jitter);
        let peaks: Vec<f64> = maxima.iter().map(|m| m.1).collect();
        let (pmin, pmax) = min_max(&peaks);
        let height = hi - lo;
        (jitter < tol.period_jitter
            && pmax - pmin <= tol.amplitude_jitter * height
            && height > tol.flat_floor.max(1e-6 * hi.abs()))
        .then_some((mean, 0.5 * height))
    } else {
        None
    };

    let kind = match best {
        Some((index, dist)) if dist <= tol.equilibrium_tol => VerdictKind::Equilibrium { index },
        _ if episodes >= tol.min_episodes && qf >= tol.min_quiescent_fraction => {
            VerdictKind::Recurrent { episodes, quiescent_fraction: qf }
        }
        _ => match periodic {
            Some((period, mean_amplitude)) => VerdictKind::LimitCycle { period, mean_amplitude },
            None => VerdictKind::Undecided,
        },
    };
    AttractorVerdict { kind, diagnostics: diag }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BistabilityReport {
    pub verdicts: Vec<(StateVector, AttractorVerdict)>,
    /// `None` when some run was undecided.
    pub bistable: Option<bool>,
}

/// Integrates every ic at parameter `p` and reports whether at least two
/// of them settle on different attractors.
pub fn bistability_probe(
    model: &Model,
    p: f64,
    ics: &[StateVector],
    cfg: &IntegratorConfig,
    tol: &DetectionTolerances,
) -> Result<BistabilityReport> {
    let eq = equilibrium_states(model, p)?;
    let cfg = &effective_config(model, p, cfg)?;
    let verdicts: Vec<(StateVector, AttractorVerdict)> = ics
        .par_iter()
        .map(|ic| {
            let tr = integrate(model, p, ic, cfg)?;
            Ok((ic.clone(), detect_attractor(&tr, &eq, tol)))
        })
        .collect::<Result<_>>()?;
    let bistable = if verdicts.len() < 2 {
        Some(false)
    } else if verdicts.iter().any(|(_, v)| v.kind == VerdictKind::Undecided) {
        None
    } else {
        let first = &verdicts[0].1.kind;
        Some(verdicts.iter().any(|(_, v)| !v.kind.same_category(first)))
    };
    Ok(BistabilityReport { verdicts, bistable })
}
