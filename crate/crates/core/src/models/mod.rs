//! Ready-made moment models.

mod cube_root;
mod gaussian;
mod linear;
pub mod ma1;

pub use cube_root::CubeRootModel;
pub use gaussian::{GaussianModel, GaussianMode, SIGMA2_FLOOR};
pub use linear::{LinearModel, Rescaled};
pub use ma1::{
    fit_ar, ma1_binding, ma1_binding_derivatives, ma1_moment_model, simulate_ma1,
    simulate_ma1_with_innovations, ArFit, Ma1Instance, Ma1Model, Ma1Spec, Ma1Weighting,
};
