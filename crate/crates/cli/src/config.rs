use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use epibif::odesim::DetectionTolerances;
use epibif::report::TableId;
use epibif::scan::Spacing;
use epibif::{IntegratorConfig, Model, ModelId, ParameterSet, StateVector};
use serde::Deserialize;

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Equilibria,
    Sweep,
    Hopf,
    Normalform,
    Simulate,
    Classify,
    Reproduce,
    Diagram,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Equilibria => "equilibria",
            Command::Sweep => "sweep",
            Command::Hopf => "hopf",
            Command::Normalform => "normalform",
            Command::Simulate => "simulate",
            Command::Classify => "classify",
            Command::Reproduce => "reproduce",
            Command::Diagram => "diagram",
        }
    }

    /// Option keys the command reads.
    fn accepts(self) -> &'static [&'static str] {
        match self {
            Command::Equilibria => &["out"],
            Command::Sweep | Command::Diagram => &["out", "range", "samples", "spacing"],
            Command::Hopf => &["out", "include_infeasible"],
            Command::Normalform => &[
                "out", "rtol", "atol", "t_end", "sample_interval", "max_step", "max_steps", "extend_horizon",
            ],
            Command::Simulate => &[
                "out", "ic", "downsample", "rtol", "atol", "t_end", "sample_interval", "max_step",
                "max_steps", "extend_horizon", "detection",
            ],
            Command::Classify => &[
                "out", "ics", "rtol", "atol", "t_end", "sample_interval", "max_step", "max_steps",
                "extend_horizon", "detection",
            ],
            Command::Reproduce => &["out", "table", "case", "golden"],
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    pub out: Option<PathBuf>,
    pub range: Option<[f64; 2]>,
    pub samples: Option<usize>,
    pub spacing: Option<Spacing>,
    pub include_infeasible: Option<bool>,
    pub ic: Option<Vec<f64>>,
    pub ics: Option<Vec<Vec<f64>>>,
    pub downsample: Option<usize>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub t_end: Option<f64>,
    pub sample_interval: Option<f64>,
    pub max_step: Option<f64>,
    pub max_steps: Option<usize>,
    pub extend_horizon: Option<bool>,
    pub detection: Option<DetectionTolerances>,
    pub table: Option<String>,
    pub case: Option<u32>,
    /// Alternative golden-table file for `reproduce`.
    pub golden: Option<PathBuf>,
}

impl Options {
    fn present(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        let mut add = |set: bool, name| {
            if set {
                v.push(name)
            }
        };
        add(self.out.is_some(), "out");
        add(self.range.is_some(), "range");
        add(self.samples.is_some(), "samples");
        add(self.spacing.is_some(), "spacing");
        add(self.include_infeasible.is_some(), "include_infeasible");
        add(self.ic.is_some(), "ic");
        add(self.ics.is_some(), "ics");
        add(self.downsample.is_some(), "downsample");
        add(self.rtol.is_some(), "rtol");
        add(self.atol.is_some(), "atol");
        add(self.t_end.is_some(), "t_end");
        add(self.sample_interval.is_some(), "sample_interval");
        add(self.max_step.is_some(), "max_step");
        add(self.max_steps.is_some(), "max_steps");
        add(self.extend_horizon.is_some(), "extend_horizon");
        add(self.detection.is_some(), "detection");
        add(self.table.is_some(), "table");
        add(self.case.is_some(), "case");
        add(self.golden.is_some(), "golden");
        v
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: Option<String>,
    params: Option<BTreeMap<String, f64>>,
    command: Option<Command>,
    #[serde(default)]
    options: Options,
}

#[derive(Debug)]
pub struct RunConfig {
    pub model: Option<Model>,
    pub command: Command,
    pub options: Options,
}

fn config_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path, command: Command) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, command)
    }

    /// Validates the whole file for `command` before anything runs.
    pub fn parse(text: &str, command: Command) -> Result<Self, Failure> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| config_err(e.message().to_string()))?;
        if let Some(c) = raw.command {
            if c != command {
                return Err(config_err(format!(
                    "key `command` is `{}` but `{}` was requested",
                    c.name(),
                    command.name()
                )));
            }
        }
        for key in raw.options.present() {
            if !command.accepts().contains(&key) {
                return Err(config_err(format!(
                    "key `options.{key}` does not apply to `{}`",
                    command.name()
                )));
            }
        }

        let model = match (raw.model, raw.params) {
            (Some(tag), Some(params)) => {
                let id = ModelId::parse(&tag)
                    .ok_or_else(|| config_err(format!("key `model`: unknown model `{tag}`")))?;
                let ps = ParameterSet::from_fields(id, params.iter().map(|(k, v)| (k.as_str(), *v)))
                    .map_err(|e| config_err(format!("key `params`: {e}")))?;
                Some(Model::new(ps).map_err(|e| config_err(format!("key `params`: {e}")))?)
            }
            (Some(_), None) => return Err(config_err("missing key `params`")),
            (None, Some(_)) => return Err(config_err("missing key `model`")),
            (None, None) if command == Command::Reproduce => None,
            (None, None) => return Err(config_err("missing key `model`")),
        };

        let cfg = RunConfig { model, command, options: raw.options };
        cfg.check_options()?;
        Ok(cfg)
    }

    fn check_options(&self) -> Result<(), Failure> {
        let o = &self.options;
        if let Some([lo, hi]) = o.range {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(config_err(format!("key `options.range`: need 0 < lo <= hi, got [{lo}, {hi}]")));
            }
        }
        if o.samples == Some(0) {
            return Err(config_err("key `options.samples`: must be at least 1"));
        }
        if o.downsample == Some(0) {
            return Err(config_err("key `options.downsample`: must be at least 1"));
        }
        if let Some(t) = &o.table {
            if TableId::parse(t).is_none() {
                return Err(config_err(format!("key `options.table`: unknown table `{t}`")));
            }
        }
        let dim = self.model.as_ref().map(Model::dimension);
        let check_ic = |key: &str, ic: &[f64]| -> Result<(), Failure> {
            if Some(ic.len()) != dim {
                return Err(config_err(format!(
                    "key `options.{key}`: expected {} components, got {}",
                    dim.unwrap_or(0),
                    ic.len()
                )));
            }
            if ic.iter().any(|v| !v.is_finite()) {
                return Err(config_err(format!("key `options.{key}`: components must be finite")));
            }
            Ok(())
        };
        match self.command {
            Command::Simulate => check_ic("ic", o.ic.as_deref().ok_or_else(|| config_err("missing key `options.ic`"))?)?,
            Command::Classify => {
                let ics = o.ics.as_ref().ok_or_else(|| config_err("missing key `options.ics`"))?;
                if ics.is_empty() {
                    return Err(config_err("key `options.ics`: need at least one initial condition"));
                }
                for ic in ics {
                    check_ic("ics", ic)?;
                }
            }
            Command::Sweep | Command::Diagram if o.range.is_none() => {
                return Err(config_err("missing key `options.range`"));
            }
            _ => {}
        }
        if let Some(m) = &self.model {
            self.integrator(m)
                .validate()
                .map_err(|e| config_err(format!("key `options`: {e}")))?;
        }
        Ok(())
    }

    pub fn model(&self) -> &Model {
        self.model.as_ref().expect("validated: command needs a model")
    }

    /// Model defaults overridden by the integrator keys of `options`.
    pub fn integrator(&self, model: &Model) -> IntegratorConfig {
        let o = &self.options;
        let mut c = IntegratorConfig::for_model(model.id());
        if let Some(v) = o.rtol {
            c.rtol = v;
        }
        if let Some(v) = o.atol {
            c.atol = v;
        }
        if let Some(v) = o.t_end {
            c.t_end = v;
        }
        if let Some(v) = o.sample_interval {
            c.sample_interval = v;
        }
        if let Some(v) = o.max_step {
            c.max_step = v;
        }
        if let Some(v) = o.max_steps {
            c.max_steps = v;
        }
        if let Some(v) = o.extend_horizon {
            c.extend_horizon = v;
        }
        c
    }

    pub fn detection(&self) -> DetectionTolerances {
        self.options.detection.clone().unwrap_or_default()
    }

    pub fn ic(&self) -> StateVector {
        StateVector::new(self.options.ic.clone().unwrap_or_default())
    }

    pub fn ics(&self) -> Vec<StateVector> {
        self.options
            .ics
            .iter()
            .flatten()
            .map(|v| StateVector::new(v.clone()))
            .collect()
    }
}
