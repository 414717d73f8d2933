//! Multiplexed (f, t, s) storage, crosstalk, and real-time mode conversion.

mod crosstalk;
mod execute;
mod mode;
mod plan;
mod schedule;

pub use crosstalk::{
    crosstalk_min, path_payloads, row_ratios, run_multiplexed, ChannelPayload, CrosstalkMatrix,
    LeakModel, MuxCalibration, Ratio,
};
pub use execute::{
    channel_fidelity_report, execute_conversion, simulate_channel_tomography, ChannelTomography,
    Execution, FidelityRow, OutputPayload,
};
pub use mode::{mode_grid, GridDims, ModeId, Spatial};
pub use plan::{plan_conversion, ChannelEntry, OutputGate, PulseTimeline, TimingParams};
pub use schedule::{parse_schedule, ConversionOp, Schedule, ScheduledOp};
