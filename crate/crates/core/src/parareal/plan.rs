use std::collections::{BinaryHeap, HashMap};
use std::cmp::Reverse;

/// Ordering doubles as scheduling priority: corrections before fine
/// propagations, then lower iteration, then lower boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TaskKind {
    /// Coarse propagation into a boundary plus the predictor-corrector
    /// update. In iteration 0 this is the plain coarse prediction.
    Correct,
    /// Fine propagation across the interval ending at `boundary`.
    Fine,
}

/// One unit of work in a Parareal run, identified by the boundary it produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Task {
    pub kind: TaskKind,
    pub iteration: usize,
    pub boundary: usize,
}

impl Task {
    pub fn fine(iteration: usize, boundary: usize) -> Self {
        Self {
            kind: TaskKind::Fine,
            iteration,
            boundary,
        }
    }

    pub fn correct(iteration: usize, boundary: usize) -> Self {
        Self {
            kind: TaskKind::Correct,
            iteration,
            boundary,
        }
    }

    /// Interval index `boundary - 1` the task propagates across.
    pub fn interval(&self) -> usize {
        self.boundary - 1
    }

    /// Corrections of boundary `i` in iteration `i` reuse the previous coarse
    /// value and need no propagation.
    pub fn is_exact_correction(&self) -> bool {
        self.kind == TaskKind::Correct && self.iteration > 0 && self.iteration == self.boundary
    }
}

/// Task graph of a Parareal run with `intervals` intervals and up to
/// `iterations` corrector iterations.
///
/// Boundaries `b < i` are exact after iteration `i - 1` and are not
/// recomputed, so iteration `i ≥ 1` holds `Fine(i, b)` and `Correct(i, b)`
/// for `b = i..=L`.
#[derive(Debug, Clone)]
pub struct SchedulePlan {
    intervals: usize,
    iterations: usize,
    tasks: Vec<Task>,
    deps: Vec<Vec<usize>>,
    successors: Vec<Vec<usize>>,
    index: HashMap<Task, usize>,
}

/// Builds the dependency graph the pipelined scheduler executes.
///
/// `Fine(i, b)` needs the iterate `U_{b-1}^{i-1}`; `Correct(i, b)` needs
/// `U_{b-1}^{i}`, `Fine(i, b)` and the previous coarse value at `b`. Fine
/// work of iteration `i + 1` therefore starts while the corrector sweep of
/// iteration `i` is still running.
pub fn pipelined_schedule(intervals: usize, iterations: usize) -> SchedulePlan {
    let l = intervals;
    let mut tasks = Vec::new();
    for b in 1..=l {
        tasks.push(Task::correct(0, b));
    }
    for i in 1..=iterations.min(l) {
        for b in i..=l {
            tasks.push(Task::fine(i, b));
        }
        for b in i..=l {
            tasks.push(Task::correct(i, b));
        }
    }
    let index: HashMap<Task, usize> = tasks.iter().enumerate().map(|(n, t)| (*t, n)).collect();

    // producer of the iterate U_b^i (None for the initial value)
    let producer = |b: usize, i: usize| -> Option<usize> {
        if b == 0 {
            None
        } else {
            Some(index[&Task::correct(i.min(b), b)])
        }
    };

    let mut deps = vec![Vec::new(); tasks.len()];
    for (n, t) in tasks.iter().enumerate() {
        let (i, b) = (t.iteration, t.boundary);
        match t.kind {
            TaskKind::Fine => deps[n].extend(producer(b - 1, i - 1)),
            TaskKind::Correct => {
                deps[n].extend(producer(b - 1, i));
                if i > 0 {
                    deps[n].push(index[&Task::fine(i, b)]);
                    deps[n].push(index[&Task::correct(i - 1, b)]);
                }
            }
        }
    }
    let mut successors = vec![Vec::new(); tasks.len()];
    for (n, ds) in deps.iter().enumerate() {
        for &d in ds {
            successors[d].push(n);
        }
    }
    SchedulePlan {
        intervals,
        iterations: iterations.min(l),
        tasks,
        deps,
        successors,
        index,
    }
}

impl SchedulePlan {
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn deps(&self, n: usize) -> &[usize] {
        &self.deps[n]
    }

    pub fn successors(&self, n: usize) -> &[usize] {
        &self.successors[n]
    }

    pub fn index_of(&self, task: &Task) -> Option<usize> {
        self.index.get(task).copied()
    }

    /// Task order of the plain serial algorithm: coarse sweep, then per
    /// iteration all fine propagations followed by the corrector sweep.
    pub fn serial_order(&self) -> Vec<usize> {
        (0..self.tasks.len()).collect()
    }

    pub fn fine_count(&self) -> usize {
        self.tasks.iter().filter(|t| t.kind == TaskKind::Fine).count()
    }

    fn cost(&self, t: &Task, coarse_cost: f64, fine_cost: f64) -> f64 {
        match t.kind {
            TaskKind::Fine => fine_cost,
            TaskKind::Correct if t.is_exact_correction() => 0.0,
            TaskKind::Correct => coarse_cost,
        }
    }

    /// Longest path through the graph with the given per-interval costs.
    pub fn critical_path(&self, coarse_cost: f64, fine_cost: f64) -> f64 {
        // tasks are stored in a topological order
        let mut finish = vec![0.0_f64; self.tasks.len()];
        for (n, t) in self.tasks.iter().enumerate() {
            let start = self.deps[n].iter().map(|&d| finish[d]).fold(0.0, f64::max);
            finish[n] = start + self.cost(t, coarse_cost, fine_cost);
        }
        finish.into_iter().fold(0.0, f64::max)
    }

    /// Makespan of greedy list scheduling on `workers` workers using the same
    /// priority order as the runtime scheduler.
    pub fn simulated_makespan(&self, workers: usize, coarse_cost: f64, fine_cost: f64) -> f64 {
        let workers = workers.max(1);
        let mut remaining: Vec<usize> = self.deps.iter().map(Vec::len).collect();
        let mut ready: BinaryHeap<Reverse<(Task, usize)>> = remaining
            .iter()
            .enumerate()
            .filter(|(_, r)| **r == 0)
            .map(|(n, _)| Reverse((self.tasks[n], n)))
            .collect();
        // (finish time, task) of running tasks
        let mut running: Vec<(f64, usize)> = Vec::new();
        let mut now = 0.0_f64;
        let mut done = 0;
        while done < self.tasks.len() {
            while running.len() < workers {
                match ready.pop() {
                    Some(Reverse((t, n))) => {
                        running.push((now + self.cost(&t, coarse_cost, fine_cost), n))
                    }
                    None => break,
                }
            }
            let (pos, &(t_fin, n)) = running
                .iter()
                .enumerate()
                .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(a.1 .1.cmp(&b.1 .1)))
                .expect("a task graph without cycles always has running work");
            running.swap_remove(pos);
            now = t_fin;
            done += 1;
            for &s in &self.successors[n] {
                remaining[s] -= 1;
                if remaining[s] == 0 {
                    ready.push(Reverse((self.tasks[s], s)));
                }
            }
        }
        now
    }
}
