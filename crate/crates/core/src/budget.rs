use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

/// Operation counters for one or more decodes.
///
/// `aggregations` counts individual votes folded into an estimate, so for
/// every decoder in this crate it equals `projections`.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub fht_calls: u64,
    pub projections: u64,
    pub aggregations: u64,
}

impl BudgetReport {
    pub fn new() -> Self {
        Self::default()
    }
}

impl AddAssign for BudgetReport {
    fn add_assign(&mut self, rhs: Self) {
        self.fht_calls += rhs.fht_calls;
        self.projections += rhs.projections;
        self.aggregations += rhs.aggregations;
    }
}

impl Add for BudgetReport {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}
