//! Disruptor taxonomy (sources, modes, firing schedules) and the pipeline
//! that composes disruptors around a base environment.

pub mod noise;
pub mod params;
pub mod pipeline;
pub mod schedule;
pub mod spec;

pub use noise::{apply_noise, NoiseModel};
pub use params::{eval_param_schedule, DrawAt, ParamRule, ParamSchedule, SinIndex};
pub use pipeline::{pipeline_step, validate_specs, Observation, Pipeline, PipelineError};
pub use schedule::{schedule_fires, Counters, FiringRule, Phase, PhaseGate, Schedule};
pub use spec::{DisruptorSpec, Mode, ModeKind, Source};
