//! Shared fixtures for the benchmarks.

use epibif::model::presets;
use epibif::{BifurcationPoint, Model};

/// In-host model with A = 0.6 and B = 0.06 (T2 case 3).
pub fn inhost_case4() -> Model {
    Model::new(presets::inhost(0.6, 0.06)).expect("preset is valid")
}

pub fn treatment_case3() -> Model {
    Model::new(presets::sir_treatment(0.02, 10.0)).expect("preset is valid")
}

/// First Hopf point of `model`.
pub fn first_hopf(model: &Model) -> BifurcationPoint {
    epibif::scan::find_hopf(model)
        .expect("hopf search succeeds")
        .into_iter()
        .next()
        .expect("fixture has a hopf point")
}
