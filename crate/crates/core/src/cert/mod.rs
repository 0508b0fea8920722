//! Design-condition constants and their empirical verification.

mod check;
mod constants;
mod width;

pub use check::{
    atp_slack, check_atp, check_ip, check_tp, ip_slack, tp_slack, CertDesign, CertReport, ConstantsUsed, Property, SamplerSpec,
    Witness,
};
pub use constants::{
    combine_atp, combine_atp_with, theorem1_bound, theorem1_condition, theorem2_constants, AtpConstants, CombineRule,
    GaussianDesignConstants, IpConstants, Theorem1Condition, TpConstants,
};
pub use width::{gaussian_width_b1, re_estimate, width_bound, WidthEstimate};
