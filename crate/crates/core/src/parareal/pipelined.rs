use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::{Condvar, Mutex, MutexGuard};
use std::thread;
use std::time::Instant;

use super::engine::{self, Context, Finished, Inputs, IterationTiming, Slot};
use super::plan::{SchedulePlan, Task, TaskKind};
use super::trace::RunTrace;
use super::PararealConfig;
use crate::error::{Error, Result};
use crate::integrators::State;

struct Sched {
    ready: BinaryHeap<Reverse<(Task, usize)>>,
    remaining: Vec<usize>,
    running: usize,
    /// Highest iteration whose tasks may still be started.
    limit: usize,
    next_check: usize,
    last: usize,
    converged: bool,
    /// Serial-order index and iteration of the first failing task.
    failure: Option<(usize, usize, Error)>,
    events: Vec<Task>,
    timings: Vec<IterationTiming>,
}

struct Shared<'p> {
    plan: &'p SchedulePlan,
    slots: Vec<Mutex<Slot>>,
    sched: Mutex<Sched>,
    wake: Condvar,
    tol: f64,
    clock: Instant,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    // a panicking worker already aborts the scope; the data is still usable
    m.lock().unwrap_or_else(|e| e.into_inner())
}

/// Runs the task graph on `workers` threads.
///
/// Every boundary owns one slot behind its own mutex. The scheduler state
/// lives behind a separate mutex; a worker may lock slots while holding it,
/// never the other way round.
pub(super) fn run(
    ctx: &Context<'_>,
    plan: &SchedulePlan,
    s0: &State,
    cfg: &PararealConfig,
    oracle: Option<&[State]>,
    workers: usize,
) -> Result<(Vec<State>, RunTrace)> {
    let l = cfg.intervals;
    let iters = plan.iterations();
    let mut slots: Vec<Slot> = (0..=l).map(|_| Slot::new(iters)).collect();
    slots[0].values[0] = Some(s0.clone());

    let remaining: Vec<usize> = (0..plan.tasks().len()).map(|n| plan.deps(n).len()).collect();
    let ready = remaining
        .iter()
        .enumerate()
        .filter(|(_, r)| **r == 0)
        .map(|(n, _)| Reverse((plan.tasks()[n], n)))
        .collect();
    let shared = Shared {
        plan,
        slots: slots.into_iter().map(Mutex::new).collect(),
        sched: Mutex::new(Sched {
            ready,
            remaining,
            running: 0,
            limit: iters,
            next_check: 0,
            last: 0,
            converged: false,
            failure: None,
            events: Vec::with_capacity(plan.tasks().len()),
            timings: vec![IterationTiming::default(); iters + 1],
        }),
        wake: Condvar::new(),
        tol: cfg.tol,
        clock: Instant::now(),
    };

    thread::scope(|scope| {
        for _ in 0..workers.min(plan.tasks().len().max(1)) {
            scope.spawn(|| worker(ctx, &shared));
        }
    });

    let wall_s = shared.clock.elapsed().as_secs_f64();
    let sched = shared.sched.into_inner().unwrap_or_else(|e| e.into_inner());
    if let Some((_, i, e)) = sched.failure {
        // speculative work past the converged iteration does not count
        if !(sched.converged && i > sched.last) {
            return Err(e);
        }
    }
    if !sched.converged && sched.next_check != iters + 1 {
        panic!(
            "pipelined scheduler stalled after iteration {} of {iters}",
            sched.last
        );
    }
    let slots: Vec<Slot> = shared
        .slots
        .into_iter()
        .map(|m| m.into_inner().unwrap_or_else(|e| e.into_inner()))
        .collect();
    let discarded_fine = sched
        .events
        .iter()
        .filter(|t| t.kind == TaskKind::Fine && t.iteration > sched.last)
        .count();
    let done = Finished {
        last: sched.last,
        converged: sched.converged,
        events: sched.events,
        timings: sched.timings,
        discarded_fine,
        wall_s,
    };
    engine::finish(&slots, l, oracle, done)
}

fn worker(ctx: &Context<'_>, sh: &Shared<'_>) {
    loop {
        let (task, n) = {
            let mut s = lock(&sh.sched);
            loop {
                match s.ready.pop() {
                    Some(Reverse((t, _))) if t.iteration > s.limit => continue,
                    Some(Reverse(picked)) => {
                        s.running += 1;
                        break picked;
                    }
                    None if s.running == 0 => {
                        sh.wake.notify_all();
                        return;
                    }
                    None => s = sh.wake.wait(s).unwrap_or_else(|e| e.into_inner()),
                }
            }
        };

        let started = Instant::now();
        let result = ctx.execute(&task, gather(sh, &task));
        let outcome = match result {
            Ok(out) => {
                engine::store(&mut lock(&sh.slots[task.boundary]), &task, out);
                Ok(())
            }
            Err(e) => Err(e),
        };
        let spent = started.elapsed().as_secs_f64();
        complete(sh, task, n, spent, outcome);
    }
}

/// Clones a task's inputs, holding at most one slot lock at a time.
fn gather(sh: &Shared<'_>, task: &Task) -> Inputs {
    let (i, b) = (task.iteration, task.boundary);
    let start_iter = match task.kind {
        TaskKind::Fine => i - 1,
        TaskKind::Correct => i,
    };
    let start = engine::iterate(&lock(&sh.slots[b - 1]), b - 1, start_iter);
    let (fine_old, coarse_old) = if task.kind == TaskKind::Correct && i > 0 {
        let slot = lock(&sh.slots[b]);
        (slot.fine[i].clone(), slot.coarse[i - 1].clone())
    } else {
        (None, None)
    };
    Inputs {
        start,
        fine_old,
        coarse_old,
    }
}

fn complete(sh: &Shared<'_>, task: Task, n: usize, spent: f64, outcome: Result<()>) {
    let mut s = lock(&sh.sched);
    s.running -= 1;
    match outcome {
        Err(e) => {
            // keep the failure the serial loop would have hit first
            let first = s.failure.as_ref().is_none_or(|(m, _, _)| n < *m);
            if first {
                s.limit = s.limit.min(task.iteration);
                s.failure = Some((n, task.iteration, e));
            }
        }
        Ok(()) => {
            let i = task.iteration;
            match task.kind {
                TaskKind::Fine => s.timings[i].fine_s += spent,
                TaskKind::Correct => s.timings[i].coarse_s += spent,
            }
            s.events.push(task);
            for &m in sh.plan.successors(n) {
                s.remaining[m] -= 1;
                if s.remaining[m] == 0 && sh.plan.tasks()[m].iteration <= s.limit {
                    let t = sh.plan.tasks()[m];
                    s.ready.push(Reverse((t, m)));
                }
            }
            if task.kind == TaskKind::Correct && task.boundary == sh.plan.intervals() {
                iteration_done(sh, &mut s, i);
            }
        }
    }
    sh.wake.notify_all();
}

/// Called once the last boundary of iteration `i` is published. Iterations
/// finish in order because each correction depends on the previous one.
fn iteration_done(sh: &Shared<'_>, s: &mut Sched, i: usize) {
    debug_assert_eq!(s.next_check, i);
    s.next_check = i + 1;
    s.last = i;
    s.timings[i].elapsed_s = sh.clock.elapsed().as_secs_f64();
    if i == 0 || i >= sh.plan.iterations() || s.converged {
        return;
    }
    let guards: Vec<MutexGuard<'_, Slot>> = sh.slots.iter().map(lock).collect();
    let c = engine::corrections(sh.plan.intervals(), i, |b| &*guards[b]);
    drop(guards);
    match c {
        Ok(c) if c.iter().cloned().fold(0.0, f64::max) <= sh.tol => {
            s.converged = true;
            s.limit = i;
        }
        Ok(_) => {}
        Err(e) => {
            s.limit = s.limit.min(i);
            s.failure.get_or_insert((usize::MAX, i, e));
        }
    }
}
