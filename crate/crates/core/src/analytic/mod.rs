//! Exact diversity exponents for the multiple-access channel with quantized,
//! error-prone feedback.

mod closed_form;
mod curve;
mod exponent;
mod recursion;

pub use closed_form::{
    c_at_zero_closed_form, cbar_at_zero_closed_form, check_power_gap, feasible_points,
    piecewise_discrepancy, verify_closed_forms, CheckStatus, GapCheck, IdentityCheck,
};
pub use curve::{sample_curve, CurveSample, DmtCurve, SweepAxis};
pub use exponent::{d_exponent, g_exponent};
pub use recursion::{
    c_recursion, cbar_recursion, cut_index, d_opt, d_opt_piecewise_ymn, d_opt_with_branch, Branch,
};
