//! Benchmark-only crate; fixtures shared by the `hot_paths` bench target.

use slslab_core::analytics::MomentSpec;
use slslab_core::controller::ControllerParams;
use slslab_core::market::{GbmModel, ReturnModel};
use slslab_core::montecarlo::SimConfig;

pub fn reference_design() -> ControllerParams {
    ControllerParams::new(3.0, 2.58, 0.339, 0.234, 0.990).unwrap()
}

pub fn reference_moments() -> MomentSpec {
    MomentSpec::new(0.023374, 0.031014, 8.3333e-3, 16.333e-3, 0.0).unwrap()
}

pub fn reference_sim(paths: usize) -> SimConfig {
    SimConfig {
        n_stages: 30,
        n_paths: paths,
        seed: 11,
        v0: 1.0,
        leverage_cap: None,
        controller: reference_design(),
        model: ReturnModel::Gbm(GbmModel::new(0.019142, 0.08903, 0.022918, 0.12349).unwrap()),
    }
}
