//! Reference states and golden extractor streams, built from the library
//! generators.

use std::fs;
use std::path::Path;

use serde_json::json;
use twoproc::bitlinalg::BitVector;
use twoproc::extractor::ip_extract;
use twoproc::quantum::{state_to_json, CVec, DensityOperator, Instrument, SystemLabel, instrument_to_json};
use twoproc::verify::{build_eta_nu, gen_markov_counterexample};
use twoproc::Result;

/// Block length of the golden inner-product stream.
pub const GOLDEN_N: usize = 8;
pub const GOLDEN_BLOCKS: usize = 3;
const GOLDEN_X: [u8; GOLDEN_BLOCKS] = [0xa5, 0x3c, 0xff];
// block parities 1, 0, 1
const GOLDEN_Y: [u8; GOLDEN_BLOCKS] = [0x0e, 0x99, 0x83];

/// Writes every fixture into `dir` and returns the file names.
pub fn write_all(dir: &Path) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: Vec<u8>| -> Result<()> {
        crate::write_atomic(&dir.join(name), &bytes)?;
        written.push(name.to_string());
        Ok(())
    };

    let ce = gen_markov_counterexample()?;
    let (eta, nu) = build_eta_nu(&ce.distribution)?;
    put("counterexample_state.json", state_to_json(&ce.state)?.into_bytes())?;
    put("counterexample_eta.json", state_to_json(&eta.to_density()?)?.into_bytes())?;
    put("counterexample_nu.json", state_to_json(&nu.to_density()?)?.into_bytes())?;
    put("maximally_entangled.json", state_to_json(&maximally_entangled()?)?.into_bytes())?;
    put("product_uniform.json", state_to_json(&product_uniform()?)?.into_bytes())?;
    let measure = Instrument::measurement(SystemLabel::quantum("A", 2), "Y");
    put("qubit_measurement.json", instrument_to_json(&measure)?.into_bytes())?;

    put("ip_x.bin", GOLDEN_X.to_vec())?;
    put("ip_y.bin", GOLDEN_Y.to_vec())?;
    put("ip_z.bin", golden_ip_output()?)?;
    let manifest = json!({
        "ip_golden": {"n": GOLDEN_N, "blocks": GOLDEN_BLOCKS, "strong": false},
        "expected_hmin": {
            "counterexample_eta.json": {"a": ["X"], "b": ["B"], "value": twoproc::verify::COUNTEREXAMPLE_HMIN},
            "counterexample_nu.json": {"a": ["Y"], "b": ["A"], "value": twoproc::verify::COUNTEREXAMPLE_HMIN},
            "maximally_entangled.json": {"a": ["A"], "b": ["B"], "value": -1.0},
            "product_uniform.json": {"a": ["X"], "b": ["B"], "value": 2.0},
        },
    });
    put("manifest.json", serde_json::to_vec_pretty(&manifest)?)?;
    Ok(written)
}

/// `(|00> + |11>) / sqrt(2)` on two qubits `A`, `B`.
pub fn maximally_entangled() -> Result<DensityOperator> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = CVec::from_vec(vec![h.into(), 0.0.into(), 0.0.into(), h.into()]);
    DensityOperator::pure(
        vec![SystemLabel::quantum("A", 2), SystemLabel::quantum("B", 2)],
        &psi,
    )
}

/// Uniform classical `X` on two bits, independent of a qubit `B` in `|+>`.
pub fn product_uniform() -> Result<DensityOperator> {
    let x = DensityOperator::classical(SystemLabel::classical("X", 4), &[0.25; 4])?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let b = DensityOperator::pure(vec![SystemLabel::quantum("B", 2)], &CVec::from_vec(vec![h.into(), h.into()]))?;
    x.tensor(&b)
}

/// One inner-product bit per block from the scalar oracle, packed LSB-first.
pub fn golden_ip_output() -> Result<Vec<u8>> {
    let mut z = 0u8;
    for (i, (&x, &y)) in GOLDEN_X.iter().zip(&GOLDEN_Y).enumerate() {
        let bit = ip_extract(&BitVector::from_u64(x.into(), GOLDEN_N), &BitVector::from_u64(y.into(), GOLDEN_N))?;
        z |= u8::from(bit) << i;
    }
    Ok(vec![z])
}
