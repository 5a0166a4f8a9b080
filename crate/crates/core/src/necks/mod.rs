//! Explicit neck metrics and their verifiers.

mod cap;
mod collar;
mod gluing;
mod isotopy;
mod schwarzschild;

pub use cap::{build_cap_neck, solve_c_mu, CapNeck, CapResiduals};
pub use collar::{collar_bend, CollarBend, CollarResult};
pub use gluing::{
    bending_profile, check_bmn_hypotheses, cylinder_laplacian, smoothstep_ramp, transition_function,
    BendingProfile, BmnReport,
};
pub use isotopy::{build_isotopy_neck, IsotopyNeck, LambdaAttempt};
pub use schwarzschild::{build_schwarzschild_neck, rescale_neck, rescale_neck_with, RescaledNeck, SchwarzschildNeck};
