use std::time::Instant;

use super::plan::{SchedulePlan, Task, TaskKind};
use super::trace::{IterationRecord, RunTrace};
use super::weights::{parareal_update, theta_weight};
use super::{boundary_error, PararealConfig, Variant};
use crate::error::{Error, Result};
use crate::integrators::{Propagator, State};
use crate::linalg::{dist2, norm2};

/// Everything one boundary accumulates during a run, indexed by iteration.
#[derive(Debug, Clone, Default)]
pub(super) struct Slot {
    pub values: Vec<Option<State>>,
    pub coarse: Vec<Option<State>>,
    pub fine: Vec<Option<State>>,
    pub theta: Vec<Option<f64>>,
}

impl Slot {
    pub fn new(iterations: usize) -> Self {
        Self {
            values: vec![None; iterations + 1],
            coarse: vec![None; iterations + 1],
            fine: vec![None; iterations + 1],
            theta: vec![None; iterations + 1],
        }
    }
}

/// Which stored iterate `U_b^i` refers to: boundaries are frozen once exact.
pub(super) fn iterate_index(boundary: usize, iteration: usize) -> usize {
    if boundary == 0 {
        0
    } else {
        iteration.min(boundary)
    }
}

pub(super) enum Output {
    Fine(State),
    Correct {
        value: State,
        coarse: State,
        theta: Option<f64>,
    },
}

/// Inputs a task reads from the slots.
pub(super) struct Inputs {
    pub start: State,
    pub fine_old: Option<State>,
    pub coarse_old: Option<State>,
}

pub(super) struct Context<'a> {
    pub coarse: &'a dyn Propagator,
    pub fine: &'a dyn Propagator,
    pub grid: Vec<f64>,
    pub variant: Variant,
    pub clamp: (f64, f64),
}

impl<'a> Context<'a> {
    pub fn new(
        coarse: &'a dyn Propagator,
        fine: &'a dyn Propagator,
        grid: Vec<f64>,
        cfg: &PararealConfig,
    ) -> Self {
        Self {
            coarse,
            fine,
            grid,
            variant: cfg.variant,
            clamp: cfg.theta_clamp,
        }
    }

    pub fn execute(&self, task: &Task, inputs: Inputs) -> Result<Output> {
        let t_end = self.grid[task.boundary];
        let annotate = |e: Error| Error::Propagation {
            iteration: task.iteration,
            interval: task.interval(),
            source: Box::new(e),
        };
        match task.kind {
            TaskKind::Fine => self.fine.advance(&inputs.start, t_end).map(Output::Fine).map_err(annotate),
            TaskKind::Correct if task.iteration == 0 => {
                let c = self.coarse.advance(&inputs.start, t_end).map_err(annotate)?;
                Ok(Output::Correct {
                    value: c.clone(),
                    coarse: c,
                    theta: None,
                })
            }
            TaskKind::Correct => {
                let missing = || Error::InvalidSettings(format!("missing inputs for {task:?}"));
                let fine_old = inputs.fine_old.ok_or_else(missing)?;
                let coarse_old = inputs.coarse_old.ok_or_else(missing)?;
                let coarse_new = if task.is_exact_correction() {
                    // the start value is unchanged since the previous iteration
                    coarse_old.clone()
                } else {
                    self.coarse.advance(&inputs.start, t_end).map_err(annotate)?
                };
                let theta = theta_weight(&fine_old, &coarse_new, self.variant, self.clamp)?;
                let value = parareal_update(&coarse_new, &fine_old, &coarse_old, theta).map_err(annotate)?;
                Ok(Output::Correct {
                    value,
                    coarse: coarse_new,
                    theta: Some(theta),
                })
            }
        }
    }
}

/// Gathers a task's inputs from `slot(b)` lookups.
pub(super) fn gather<'s>(task: &Task, slot: impl Fn(usize) -> &'s Slot) -> Inputs {
    let (i, b) = (task.iteration, task.boundary);
    match task.kind {
        TaskKind::Fine => Inputs {
            start: iterate(slot(b - 1), b - 1, i - 1),
            fine_old: None,
            coarse_old: None,
        },
        TaskKind::Correct => Inputs {
            start: iterate(slot(b - 1), b - 1, i),
            fine_old: if i > 0 { slot(b).fine[i].clone() } else { None },
            coarse_old: if i > 0 { slot(b).coarse[i - 1].clone() } else { None },
        },
    }
}

pub(super) fn iterate(slot: &Slot, boundary: usize, iteration: usize) -> State {
    slot.values[iterate_index(boundary, iteration)]
        .clone()
        .expect("task scheduled before its input iterate was published")
}

pub(super) fn store(slot: &mut Slot, task: &Task, output: Output) {
    let i = task.iteration;
    match output {
        Output::Fine(s) => slot.fine[i] = Some(s),
        Output::Correct {
            value,
            coarse,
            theta,
        } => {
            slot.values[i] = Some(value);
            slot.coarse[i] = Some(coarse);
            slot.theta[i] = theta;
        }
    }
}

/// Relative successive corrections of iteration `i ≥ 1` at every boundary.
pub(super) fn corrections<'s>(
    intervals: usize,
    iteration: usize,
    slot: impl Fn(usize) -> &'s Slot,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; intervals + 1];
    if iteration == 0 {
        return Ok(out);
    }
    for (b, c) in out.iter_mut().enumerate().skip(1) {
        let s = slot(b);
        let new = iterate(s, b, iteration);
        let old = iterate(s, b, iteration - 1);
        let diff = dist2(new.values(), old.values())?;
        let scale = norm2(new.values());
        *c = if scale > 0.0 { diff / scale } else { diff };
    }
    Ok(out)
}

/// Per-iteration bookkeeping shared by both schedulers.
#[derive(Debug, Clone, Default)]
pub(super) struct IterationTiming {
    pub elapsed_s: f64,
    pub fine_s: f64,
    pub coarse_s: f64,
}

pub(super) struct Finished {
    pub last: usize,
    pub converged: bool,
    pub events: Vec<Task>,
    pub timings: Vec<IterationTiming>,
    pub discarded_fine: usize,
    pub wall_s: f64,
}

/// Final boundary values and the run trace.
pub(super) fn finish(
    slots: &[Slot],
    intervals: usize,
    oracle: Option<&[State]>,
    done: Finished,
) -> Result<(Vec<State>, RunTrace)> {
    let states: Vec<State> = (0..=intervals)
        .map(|b| iterate(&slots[b], b, done.last))
        .collect();
    let mut records = Vec::with_capacity(done.last + 1);
    for i in 0..=done.last {
        let values: Vec<State> = (0..=intervals).map(|b| iterate(&slots[b], b, i)).collect();
        let boundary_errors = match oracle {
            Some(seq) => Some(boundary_error(&values, seq)?.into_iter().map(|e| e.value).collect()),
            None => None,
        };
        let thetas = (0..=intervals)
            .map(|b| if b >= i && i > 0 { slots[b].theta[i] } else { None })
            .collect();
        let timing = done.timings.get(i).cloned().unwrap_or_default();
        records.push(IterationRecord {
            iteration: i,
            states: values,
            boundary_errors,
            corrections: corrections(intervals, i, |b| &slots[b])?,
            thetas,
            elapsed_s: timing.elapsed_s,
            fine_s: timing.fine_s,
            coarse_s: timing.coarse_s,
        });
    }
    let fine_propagations = done
        .events
        .iter()
        .filter(|t| t.kind == TaskKind::Fine && t.iteration <= done.last)
        .count();
    Ok((
        states,
        RunTrace {
            intervals,
            iterations: records,
            converged: done.converged,
            events: done.events,
            fine_propagations,
            discarded_fine: done.discarded_fine,
            wall_s: done.wall_s,
        },
    ))
}

/// Textbook order: coarse sweep, then per iteration every fine propagation
/// followed by the corrector sweep and the stopping test.
pub(super) fn run_serial(
    ctx: &Context<'_>,
    plan: &SchedulePlan,
    s0: &State,
    cfg: &PararealConfig,
    oracle: Option<&[State]>,
) -> Result<(Vec<State>, RunTrace)> {
    let l = cfg.intervals;
    let iters = plan.iterations();
    let mut slots: Vec<Slot> = (0..=l).map(|_| Slot::new(iters)).collect();
    slots[0].values[0] = Some(s0.clone());
    let clock = Instant::now();
    let mut timings = vec![IterationTiming::default(); iters + 1];
    let mut events = Vec::with_capacity(plan.tasks().len());
    let mut last = 0;
    let mut converged = false;

    let order = plan.serial_order();
    let mut pos = 0;
    for i in 0..=iters {
        while pos < order.len() && plan.tasks()[order[pos]].iteration == i {
            let task = plan.tasks()[order[pos]];
            let started = Instant::now();
            let inputs = gather(&task, |b| &slots[b]);
            let out = ctx.execute(&task, inputs)?;
            store(&mut slots[task.boundary], &task, out);
            let spent = started.elapsed().as_secs_f64();
            match task.kind {
                TaskKind::Fine => timings[i].fine_s += spent,
                TaskKind::Correct => timings[i].coarse_s += spent,
            }
            events.push(task);
            pos += 1;
        }
        timings[i].elapsed_s = clock.elapsed().as_secs_f64();
        last = i;
        if i > 0 && i < iters {
            let c = corrections(l, i, |b| &slots[b])?;
            if c.iter().cloned().fold(0.0, f64::max) <= cfg.tol {
                converged = true;
                break;
            }
        }
    }
    let done = Finished {
        last,
        converged,
        events,
        timings,
        discarded_fine: 0,
        wall_s: clock.elapsed().as_secs_f64(),
    };
    finish(&slots, l, oracle, done)
}
