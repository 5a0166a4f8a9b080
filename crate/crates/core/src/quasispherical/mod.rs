//! Quasi-spherical extensions: asymptotically flat base metrics built from paths, the lapse
//! flow making u^2 ds^2 + gbar_s scalar-flat, and the resulting mass bounds.

mod base;
mod flow;
mod mass;

pub use base::{build_base, BaseAF, DeviationSample, SliceData};
pub use flow::{run_flow, run_flow_to, scalar_flatness, FlowOptions, FlowSolution, MonotonicityCertificate};
pub use mass::{
    nnsc_fillin_test_with,
    adm_mass, default_s_max, h0_threshold, mass_upper_bound, nnsc_fillin_test, unit_ball_volume, AdmMass, BartnikData,
    MassReport, NnscReport, Verdict,
};
