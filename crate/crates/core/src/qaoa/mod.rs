//! QAOA for Max-Cut on the single-mode longitudinal model.

pub mod cost;
pub mod ideal;
pub mod noisy;
pub mod optimize;
pub mod sampling;
pub mod scaling;

pub use cost::{bits, bits_to_string, CostHamiltonian, ENUMERATION_LIMIT};
pub use ideal::{apply_cost_phase, apply_mixer, energy_of, prepare_state_ideal, prepare_vector, Angles, QaoaConfig};
pub use noisy::{displaced_thermal_tail, prepare_state_noisy, realize_layers, NoiseModel, NoisyOptions, NoisyRun};
pub use optimize::{gamma_period, optimize_angles, optimize_nested, wrap_angles, Evaluator, OptimizerParams, QaoaResult, TracePoint};
pub use sampling::{sample_strings, Histogram};
pub use scaling::{error_scaling_experiment, slope_through_origin, NoiseKind, ScalingParams, ScalingPoint, ScalingResult};
