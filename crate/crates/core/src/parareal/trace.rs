use super::plan::Task;
use crate::integrators::State;

/// What happened in one Parareal iteration. Vectors are indexed by boundary
/// `0..=L`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Boundary values `U_0^i .. U_L^i`.
    pub states: Vec<State>,
    /// Relative error against the sequential fine solution, when an oracle
    /// was supplied.
    pub boundary_errors: Option<Vec<f64>>,
    /// `‖U_b^i − U_b^{i−1}‖ / ‖U_b^i‖`; all zeros for iteration 0.
    pub corrections: Vec<f64>,
    /// Weight used in the update of each boundary; `None` where no update
    /// happened in this iteration.
    pub thetas: Vec<Option<f64>>,
    /// Seconds from the start of the run until the last boundary of this
    /// iteration was published.
    pub elapsed_s: f64,
    /// Summed duration of this iteration's fine propagations.
    pub fine_s: f64,
    /// Summed duration of this iteration's coarse propagations and updates.
    pub coarse_s: f64,
}

impl IterationRecord {
    pub fn max_correction(&self) -> f64 {
        self.corrections.iter().cloned().fold(0.0, f64::max)
    }

    pub fn max_error(&self) -> Option<f64> {
        self.boundary_errors
            .as_ref()
            .map(|e| e.iter().cloned().fold(0.0, f64::max))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub intervals: usize,
    /// Records for iterations `0..=last`.
    pub iterations: Vec<IterationRecord>,
    /// True when the correction tolerance stopped the run before the
    /// iteration budget was used up.
    pub converged: bool,
    /// Completed tasks in completion order.
    pub events: Vec<Task>,
    pub fine_propagations: usize,
    /// Speculative fine propagations whose results were not used.
    pub discarded_fine: usize,
    pub wall_s: f64,
}

impl RunTrace {
    pub fn last_iteration(&self) -> usize {
        self.iterations.last().map_or(0, |r| r.iteration)
    }
}
