//! Small dense quantum states, instruments and distances.
//!
//! Operators on several systems use the Kronecker convention: the first
//! system is the most significant index. Dense operators are capped at total
//! dimension [`DIM_CAP`]; cq states keep one block per register value, so the
//! cap applies per block.

mod distance;
mod instrument;
mod io;
pub mod linalg;
pub mod random;
mod state;

pub use distance::{
    generalized_fidelity, hermitian_split, purified_distance, schatten_one, trace_norm, trace_norm_plus,
};
pub use instrument::{adjoint_apply, apply_instrument, CqState, Instrument, Outcome, CQ_TOL};
pub use io::{instrument_from_json, instrument_to_json, state_from_json, state_to_json};
pub use linalg::{CMat, CVec, C64};
pub use state::{partial_trace, purify, tensor, total_dim, DensityOperator, SystemLabel, DIM_CAP, STATE_TOL};
