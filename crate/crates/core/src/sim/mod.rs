//! Monte Carlo simulation of the block-fading multiple-access channel with
//! quantized, error-prone feedback and feedback-indexed power control.

mod channel;
mod engine;
mod feedback;
mod linalg;
mod outage;
mod schedule;
mod siso;
mod slope;
mod stream;

pub use channel::{mutual_info_subset, outage_indicator, rates_for, FadingDraw};
pub use feedback::{corrupt_index, feedback_index, index_from_outages, FeedbackChannel};
pub use linalg::hermitian_ln_det;
pub use outage::{
    decomposition_bound, estimate_outage, run_outage, verify_power_constraint, wilson_interval,
    LevelMarginal, OutageEstimate, OutageRun, PowerAudit, SimSettings, UserPowerAudit,
    DEFAULT_OUTAGE_FLOOR,
};
pub use schedule::{calibrate_schedule, next_level, PowerSchedule, StageEstimate};
pub use siso::{siso_outage, siso_reference_outage};
pub use slope::{fit_diversity_slope, SlopeFit, MIN_SLOPE_POINTS};
pub use stream::{StreamSeed, BLOCK_TRIALS};
