//! Shared fixtures for the performance benches.

use shiftlab_core::{FrequencySchedule, WeightModel};

/// Contracting on the positive ray, expanding on the negative one — the
/// mixed case, which exercises both recursion branches of every sweep.
pub fn split_model() -> WeightModel {
    WeightModel::split(
        WeightModel::constant(0.5).unwrap(),
        WeightModel::constant(2.0).unwrap(),
        0,
    )
    .unwrap()
}

pub fn geometric_schedule() -> FrequencySchedule {
    FrequencySchedule::geometric(4).unwrap()
}
