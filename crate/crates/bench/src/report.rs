use std::fmt;

use crate::experiment::{ResultRow, DISCRETIZATION};

#[derive(Debug, Clone, PartialEq)]
pub struct ReportEntry {
    pub problem: String,
    pub coarse_step: f64,
    pub variant: String,
    pub iter: usize,
    pub measured: f64,
    pub theoretical: Option<f64>,
    /// measured / theoretical
    pub efficiency: Option<f64>,
    /// Whether the Parareal error reached the discretization error. True
    /// when either is missing.
    pub accurate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupReport {
    pub entries: Vec<ReportEntry>,
    /// Index into `entries` of the accurate run with the largest measured
    /// speedup.
    pub best: Option<usize>,
}

impl SpeedupReport {
    pub fn best(&self) -> Option<&ReportEntry> {
        self.best.map(|i| &self.entries[i])
    }
}

pub fn speedup_report(rows: &[ResultRow]) -> SpeedupReport {
    let disc = |r: &ResultRow| {
        rows.iter()
            .filter(|d| d.variant == DISCRETIZATION && d.problem == r.problem && d.coarse_step == r.coarse_step)
            .filter_map(|d| d.rel_err)
            .reduce(f64::max)
    };
    let entries: Vec<ReportEntry> = rows
        .iter()
        .filter(|r| r.is_summary())
        .filter_map(|r| {
            let measured = r.speedup_meas.or_else(|| Some(r.t_seq_s? / r.t_par_s?))?;
            let accurate = match (r.rel_err, disc(r)) {
                (Some(e), Some(d)) => e <= d,
                _ => true,
            };
            Some(ReportEntry {
                problem: r.problem.clone(),
                coarse_step: r.coarse_step,
                variant: r.variant.clone(),
                iter: r.iter,
                measured,
                theoretical: r.speedup_theory,
                efficiency: r.speedup_theory.map(|t| measured / t),
                accurate,
            })
        })
        .collect();
    let best = entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.accurate)
        .max_by(|a, b| a.1.measured.total_cmp(&b.1.measured))
        .map(|(i, _)| i);
    SpeedupReport { entries, best }
}

fn or_dash(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"))
}

impl fmt::Display for SpeedupReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<12} {:>10} {:<12} {:>5} {:>9} {:>9} {:>10}  accurate",
            "problem", "K", "variant", "iter", "measured", "model", "efficiency"
        )?;
        for e in &self.entries {
            writeln!(
                f,
                "{:<12} {:>10} {:<12} {:>5} {:>9.3} {:>9} {:>10}  {}",
                e.problem,
                e.coarse_step,
                e.variant,
                e.iter,
                e.measured,
                or_dash(e.theoretical),
                or_dash(e.efficiency),
                if e.accurate { "yes" } else { "no" }
            )?;
        }
        match self.best() {
            Some(b) => writeln!(
                f,
                "best K = {} ({}, speedup {:.3})",
                b.coarse_step, b.variant, b.measured
            ),
            None => writeln!(f, "best K: none reached the discretization error"),
        }
    }
}
