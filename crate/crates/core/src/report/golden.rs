//! Published table values shipped with the crate (`data/golden_tables.toml`).

use serde::Deserialize;

use crate::error::{Error, Result};

const EMBEDDED: &str = include_str!("../../data/golden_tables.toml");

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Golden {
    pub t1: Table1,
    pub t2: Table2,
    pub t4: Table4,
    pub autoimmune: AutoimmunePoints,
}

/// Parameter value and initial conditions of a simulated run.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub param: f64,
    pub ics: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table1 {
    pub transcritical: [f64; 2],
    pub h_window: f64,
    pub tolerance: Table1Tolerance,
    pub cases: Vec<Table1Case>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table1Tolerance {
    pub transcritical: f64,
    pub turning: f64,
    pub h_endpoint: f64,
    pub hopf: f64,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table1Case {
    pub case: u32,
    pub k: f64,
    pub turning: Option<[f64; 2]>,
    pub h_negative: Vec<[f64; 2]>,
    pub hopf: Vec<[f64; 2]>,
    pub dynamics: String,
    pub scenario: Option<Scenario>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table2 {
    pub transcritical: [f64; 2],
    pub tolerance: Table2Tolerance,
    pub cases: Vec<Table2Case>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table2Tolerance {
    pub transcritical: f64,
    pub turning: f64,
    pub h_endpoint: f64,
    pub point_param: f64,
    pub point_state: f64,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkedPoint {
    pub at: [f64; 2],
    pub kind: String,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table2Case {
    pub case: u32,
    pub a: f64,
    pub turning: [f64; 2],
    pub h_negative: [f64; 2],
    pub points: Vec<MarkedPoint>,
    pub dynamics: String,
    pub scenario: Option<Scenario>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table4 {
    pub tolerance: Table4Tolerance,
    pub rows: Vec<Table4Row>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table4Tolerance {
    pub point_param: f64,
    pub point_state: f64,
    pub d_rel: f64,
    pub a_rel: f64,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table4Row {
    pub case: u32,
    pub a: f64,
    pub hopf: [f64; 2],
    pub d: f64,
    /// First Lyapunov coefficient `a` of the normal form.
    pub lyapunov: f64,
    pub stability: String,
    pub class: String,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutoimmunePoints {
    pub transcritical: f64,
    pub transcritical_tol: f64,
    pub fold: [f64; 2],
    pub fold_tol: f64,
    pub hopf: [f64; 2],
    pub hopf_rel: f64,
    pub recurrence_offset: f64,
    pub recurrence_ic: Vec<f64>,
}

impl Golden {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// The table data compiled into the crate.
    pub fn embedded() -> Self {
        Self::parse(EMBEDDED).expect("embedded golden data parses")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_tables_have_expected_shape() {
        let g = Golden::embedded();
        assert_eq!(g.t1.cases.len(), 5);
        assert_eq!(g.t2.cases.len(), 8);
        assert_eq!(g.t4.rows.len(), 10);
        assert!(g.t1.cases[0].h_negative[0][1].is_infinite());
        assert!(g.t1.cases[4].turning.is_none());
        let hopf_marks = g.t2.cases.iter().flat_map(|c| &c.points).filter(|p| p.kind == "hopf").count();
        assert_eq!(hopf_marks, g.t4.rows.len());
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = EMBEDDED.replacen("h_window", "h_windw", 1);
        assert!(matches!(Golden::parse(&text), Err(Error::Parse(_))));
    }
}
