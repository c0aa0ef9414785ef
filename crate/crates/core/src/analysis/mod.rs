//! Space-filling designs and emulator diagnostics.

mod design;
mod diagnostics;

pub use design::{maximin_lhc, maximin_score, Design, DEFAULT_RESTARTS};
pub use diagnostics::{
    diagnose_emulator, diagnostics, pairwise_sum, standardized_errors, DiagnosticsReport,
    ZERO_VARIANCE_REL, ZERO_RESIDUAL_ABS,
};
