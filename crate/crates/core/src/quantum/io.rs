//! JSON forms of states and instruments. Matrices are row-major lists of
//! rows, each entry a `[re, im]` pair.

use serde::{Deserialize, Serialize};

use super::instrument::{Instrument, Outcome};
use super::linalg::{CMat, C64};
use super::state::{DensityOperator, SystemLabel};
use crate::{Error, Result};

type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Serialize, Deserialize)]
struct StateJson {
    systems: Vec<SystemLabel>,
    matrix: JsonMatrix,
}

#[derive(Serialize, Deserialize)]
struct OutcomeJson {
    label: String,
    kraus: Vec<JsonMatrix>,
}

#[derive(Serialize, Deserialize)]
struct InstrumentJson {
    input_systems: Vec<SystemLabel>,
    outcomes: Vec<OutcomeJson>,
    output_systems: Vec<SystemLabel>,
    #[serde(default = "default_register", skip_serializing_if = "is_default_register")]
    register: String,
}

fn default_register() -> String {
    "X".into()
}

fn is_default_register(r: &str) -> bool {
    r == "X"
}

fn to_json_matrix(m: &CMat) -> JsonMatrix {
    m.row_iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect()
}

fn from_json_matrix(rows: &JsonMatrix) -> Result<CMat> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::InvalidParameter("ragged matrix rows".into()));
    }
    Ok(CMat::from_fn(nrows, ncols, |i, j| {
        let [re, im] = rows[i][j];
        C64::new(re, im)
    }))
}

pub fn state_to_json(rho: &DensityOperator) -> Result<String> {
    let json = StateJson {
        systems: rho.systems().to_vec(),
        matrix: to_json_matrix(rho.matrix()),
    };
    Ok(serde_json::to_string_pretty(&json)?)
}

pub fn state_from_json(text: &str) -> Result<DensityOperator> {
    let json: StateJson = serde_json::from_str(text)?;
    DensityOperator::new(json.systems, from_json_matrix(&json.matrix)?)
}

pub fn instrument_to_json(n: &Instrument) -> Result<String> {
    let json = InstrumentJson {
        input_systems: n.input().to_vec(),
        outcomes: n
            .outcomes()
            .iter()
            .map(|o| OutcomeJson {
                label: o.label.clone(),
                kraus: o.kraus.iter().map(to_json_matrix).collect(),
            })
            .collect(),
        output_systems: n.output().to_vec(),
        register: n.register().to_string(),
    };
    Ok(serde_json::to_string_pretty(&json)?)
}

pub fn instrument_from_json(text: &str) -> Result<Instrument> {
    let json: InstrumentJson = serde_json::from_str(text)?;
    let outcomes = json
        .outcomes
        .iter()
        .map(|o| {
            Ok(Outcome {
                label: o.label.clone(),
                kraus: o.kraus.iter().map(from_json_matrix).collect::<Result<_>>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Instrument::new(json.input_systems, json.output_systems, json.register, outcomes)
}
