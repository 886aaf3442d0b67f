//! Experiment configuration: an INI file with an `[experiment]` section and
//! one optional section per problem, plus `--key=value` overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;
use pint_core::integrators::steps_in_window;
use pint_core::parareal::{time_grid, Variant};
use pint_core::problems::{
    AdvectionInit, Advection1DParams, AlePistonParams, DahlquistParams, Heat1DParams, HeatInit,
    ProblemKind, ProblemSpec,
};

use crate::BenchError;

const EXPERIMENT: &str = "experiment";

const EXPERIMENT_KEYS: &[&str] = &[
    "problem",
    "horizon",
    "intervals",
    "coarse_steps",
    "fine_step",
    "variants",
    "workers",
    "iterations",
    "tol",
    "theta0",
    "theta_clamp",
    "reference_fine_factor",
    "seed",
    "init_noise",
    "output",
    "format",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(BenchError::Config(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub horizon: f64,
    pub intervals: usize,
    pub coarse_steps: Vec<f64>,
    pub fine_step: f64,
    pub variants: Vec<Variant>,
    pub workers: usize,
    /// Parareal iteration budget.
    pub iterations: usize,
    pub tol: f64,
    pub theta0: f64,
    pub theta_clamp: (f64, f64),
    pub reference_fine_factor: usize,
    pub seed: u64,
    /// Amplitude of uniform noise added to the initial state.
    pub init_noise: f64,
    pub output: Option<PathBuf>,
    pub format: Format,
    /// Resolved key/value pairs, echoed into JSON metadata.
    pub echo: BTreeMap<String, BTreeMap<String, String>>,
}

/// Loads `path` and applies `overrides` of the form `key=value` (for the
/// `[experiment]` section) or `section.key=value`.
pub fn load(path: &Path, overrides: &[String]) -> Result<ExperimentConfig, BenchError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| BenchError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text, overrides)
}

pub fn parse(text: &str, overrides: &[String]) -> Result<ExperimentConfig, BenchError> {
    let mut ini = Ini::load_from_str(text).map_err(|e| BenchError::Config(format!("malformed config: {e}")))?;
    for o in overrides {
        let o = o.trim_start_matches("--");
        let (key, value) = o
            .split_once('=')
            .ok_or_else(|| BenchError::Config(format!("override {o:?} is not key=value")))?;
        let (section, key) = key.split_once('.').unwrap_or((EXPERIMENT, key));
        ini.with_section(Some(section)).set(key, value);
    }
    let mut echo = BTreeMap::new();
    for (section, props) in ini.iter() {
        let Some(section) = section else {
            if !props.is_empty() {
                return Err(BenchError::Config("keys outside a section".into()));
            }
            continue;
        };
        let entries = props.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        echo.insert(section.to_string(), entries);
    }
    let cfg = build(&echo)?;
    cfg.validate()?;
    Ok(cfg)
}

struct Section<'a> {
    name: &'a str,
    values: Option<&'a BTreeMap<String, String>>,
}

impl Section<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.values.and_then(|v| v.get(key)).map(String::as_str)
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, BenchError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .trim()
                .parse()
                .map_err(|_| BenchError::Config(format!("[{}] {key} = {v:?} is not valid", self.name))),
        }
    }

    fn required<T: FromStr>(&self, key: &str) -> Result<T, BenchError> {
        let v = self
            .raw(key)
            .ok_or_else(|| BenchError::Config(format!("[{}] {key} is required", self.name)))?;
        v.trim()
            .parse()
            .map_err(|_| BenchError::Config(format!("[{}] {key} = {v:?} is not valid", self.name)))
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, BenchError> {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|item| {
                item.trim()
                    .parse()
                    .map_err(|_| BenchError::Config(format!("[{}] {key}: {item:?} is not valid", self.name)))
            })
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
    }

    fn reject_unknown(&self, known: &[&str]) -> Result<(), BenchError> {
        if let Some(values) = self.values {
            if let Some(k) = values.keys().find(|k| !known.contains(&k.as_str())) {
                return Err(BenchError::Config(format!("[{}] unknown key {k:?}", self.name)));
            }
        }
        Ok(())
    }
}

fn build(echo: &BTreeMap<String, BTreeMap<String, String>>) -> Result<ExperimentConfig, BenchError> {
    let section = |name| Section {
        name,
        values: echo.get(name),
    };
    // sections of inactive problems are allowed but must still parse
    for name in echo.keys().filter(|n| *n != EXPERIMENT) {
        let kind = ProblemKind::from_str(name)
            .map_err(|_| BenchError::Config(format!("unknown section [{name}]")))?;
        problem_spec(kind, &section(kind.name()))?;
    }
    let ex = section(EXPERIMENT);
    ex.reject_unknown(EXPERIMENT_KEYS)?;

    let kind: ProblemKind = ex
        .required::<String>("problem")?
        .parse()
        .map_err(|e| BenchError::Config(format!("{e}")))?;
    let problem = problem_spec(kind, &section(kind.name()))?;
    let fine_step: f64 = ex.required("fine_step")?;
    let intervals: usize = ex.required("intervals")?;
    let variants = match ex.raw("variants") {
        None => vec![Variant::Classic],
        Some(v) => v
            .split(',')
            .map(|s| s.trim().parse().map_err(|e| BenchError::Config(format!("{e}"))))
            .collect::<Result<_, _>>()?,
    };
    let clamp = ex.list::<f64>("theta_clamp")?.unwrap_or_else(|| vec![0.0, 1.0]);
    if clamp.len() != 2 {
        return Err(BenchError::Config("theta_clamp needs two values".into()));
    }

    Ok(ExperimentConfig {
        problem,
        horizon: ex.required("horizon")?,
        intervals,
        coarse_steps: ex
            .list("coarse_steps")?
            .ok_or_else(|| BenchError::Config("[experiment] coarse_steps is required".into()))?,
        fine_step,
        variants,
        workers: ex.get("workers", 1)?,
        iterations: ex.get("iterations", intervals.min(5))?,
        tol: ex.get("tol", 1e-12)?,
        theta0: ex.get("theta0", 0.0)?,
        theta_clamp: (clamp[0], clamp[1]),
        reference_fine_factor: ex.get("reference_fine_factor", 4)?,
        seed: ex.get("seed", 0)?,
        init_noise: ex.get("init_noise", 0.0)?,
        output: ex.raw("output").map(PathBuf::from),
        format: ex.get("format", Format::Csv)?,
        echo: echo.clone(),
    })
}

fn problem_spec(kind: ProblemKind, s: &Section<'_>) -> Result<ProblemSpec, BenchError> {
    let problem = match kind {
        ProblemKind::Dahlquist => {
            s.reject_unknown(&["lambda", "y0"])?;
            let d = DahlquistParams::default();
            ProblemSpec::Dahlquist(DahlquistParams {
                lambda: s.get("lambda", d.lambda)?,
                y0: s.get("y0", d.y0)?,
            })
        }
        ProblemKind::Heat1D => {
            s.reject_unknown(&["nu", "length", "left_bc", "right_bc", "init", "mesh_n"])?;
            let d = Heat1DParams::default();
            let init = match s.raw("init").map(str::trim) {
                None => d.init,
                Some("zero") => HeatInit::Zero,
                Some(v) => HeatInit::SineMode(mode(s, v)?),
            };
            ProblemSpec::Heat1D(Heat1DParams {
                nu: s.get("nu", d.nu)?,
                length: s.get("length", d.length)?,
                left_bc: s.get("left_bc", d.left_bc)?,
                right_bc: s.get("right_bc", d.right_bc)?,
                init,
                mesh_n: s.get("mesh_n", d.mesh_n)?,
            })
        }
        ProblemKind::Advection1D => {
            s.reject_unknown(&["speed", "length", "init", "center", "width", "periodic", "mesh_n"])?;
            let d = Advection1DParams::default();
            let (dc, dw) = match d.init {
                AdvectionInit::GaussianBump { center, width } => (center, width),
                AdvectionInit::SineMode(_) => (0.5, 0.1),
            };
            let init = match s.raw("init").map(str::trim) {
                None | Some("gaussian") => AdvectionInit::GaussianBump {
                    center: s.get("center", dc)?,
                    width: s.get("width", dw)?,
                },
                Some(v) => AdvectionInit::SineMode(mode(s, v)?),
            };
            ProblemSpec::Advection1D(Advection1DParams {
                speed: s.get("speed", d.speed)?,
                length: s.get("length", d.length)?,
                init,
                periodic: s.get("periodic", d.periodic)?,
                mesh_n: s.get("mesh_n", d.mesh_n)?,
            })
        }
        ProblemKind::AlePiston => {
            s.reject_unknown(&["rho_f", "nu", "l0", "adv", "m_s", "kappa", "v_in", "period", "mesh_n"])?;
            let d = AlePistonParams::default();
            ProblemSpec::AlePiston(AlePistonParams {
                rho_f: s.get("rho_f", d.rho_f)?,
                nu: s.get("nu", d.nu)?,
                l0: s.get("l0", d.l0)?,
                adv: s.get("adv", d.adv)?,
                m_s: s.get("m_s", d.m_s)?,
                kappa: s.get("kappa", d.kappa)?,
                v_in: s.get("v_in", d.v_in)?,
                period: s.get("period", d.period)?,
                mesh_n: s.get("mesh_n", d.mesh_n)?,
            })
        }
    };
    Ok(problem)
}

/// `sine:<m>`
fn mode(s: &Section<'_>, v: &str) -> Result<u32, BenchError> {
    v.strip_prefix("sine:")
        .and_then(|m| m.trim().parse().ok())
        .ok_or_else(|| BenchError::Config(format!("[{}] init = {v:?} is not valid", s.name)))
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: String| Err(BenchError::Config(m));
        self.problem
            .validate()
            .map_err(|e| BenchError::Config(e.to_string()))?;
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon {} must be positive", self.horizon));
        }
        if self.intervals < 2 {
            return bad(format!("intervals = {} < 2", self.intervals));
        }
        if self.iterations > self.intervals {
            return bad(format!(
                "iterations = {} exceeds intervals = {}",
                self.iterations, self.intervals
            ));
        }
        if self.coarse_steps.is_empty() || self.variants.is_empty() {
            return bad("need at least one coarse step and one variant".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if self.reference_fine_factor < 2 {
            return bad("reference_fine_factor must be at least 2".into());
        }
        if !(self.tol > 0.0) || !(self.init_noise >= 0.0) {
            return bad("tol must be positive and init_noise non-negative".into());
        }
        if !(self.theta_clamp.0 <= self.theta_clamp.1) {
            return bad(format!("theta_clamp {:?} is empty", self.theta_clamp));
        }
        let grid = time_grid(0.0, self.horizon, self.intervals).map_err(|e| BenchError::Config(e.to_string()))?;
        let window = grid[1] - grid[0];
        for &k in self.coarse_steps.iter().chain([&self.fine_step]) {
            if !(k > 0.0) {
                return bad(format!("step {k} must be positive"));
            }
            steps_in_window(0.0, window, k)
                .map_err(|_| BenchError::Config(format!("step {k} does not divide the window {window}")))?;
            pint_core::integrators::ThetaSettings::new(self.theta0, k)
                .validate()
                .map_err(|e| BenchError::Config(e.to_string()))?;
        }
        let k_min = self.coarse_steps.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(self.fine_step < k_min) {
            return bad(format!("fine step {} must be below every coarse step", self.fine_step));
        }
        Ok(())
    }
}
