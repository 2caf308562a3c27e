//! Stepsize rules: the locally-optimal schedulers, the oracle stepsizes they
//! approximate, and fixed baseline schedules.

mod baseline;
mod glyder;
mod oracle;

pub use baseline::BaselineSchedule;
pub use glyder::{
    ema_update, glyder_practical_step, glyder_theoretical_step, theoretical_update,
    DirectionAggregation, DirectionSource, EmaConvention, GlyderState, PracticalConfig,
    StepRecord,
};
pub use oracle::{oracle_expected_stepsize, oracle_inner_product_stepsize};
