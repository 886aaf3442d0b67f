//! Model problems: scalar Dahlquist, 1D heat, 1D advection and a 1D ALE
//! fluid column coupled to a spring-mass piston.
//!
//! All PDE problems are semi-discretized with second-order finite
//! differences on uniform grids; the result is an [`OdeSystem`] the
//! θ-scheme can integrate.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::integrators::{make_propagator, Layout, OdeSystem, Propagator, State, ThetaSettings};
use crate::linalg::{CyclicTridiagonal, DenseMatrix, Jacobian, Tridiagonal};

/// Fraction of the rest length the piston may travel before the mesh is
/// considered degenerate.
pub const MAX_RELATIVE_DISPLACEMENT: f64 = 0.9;

/// Oscillating inflow factor `½(1 - cos(π t / period))`.
pub fn forcing_s(t: f64, period: f64) -> f64 {
    0.5 * (1.0 - (PI * t / period).cos())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DahlquistParams {
    pub lambda: f64,
    pub y0: f64,
}

impl Default for DahlquistParams {
    fn default() -> Self {
        Self {
            lambda: -1.0,
            y0: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HeatInit {
    SineMode(u32),
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Heat1DParams {
    pub nu: f64,
    pub length: f64,
    pub left_bc: f64,
    pub right_bc: f64,
    pub init: HeatInit,
    pub mesh_n: usize,
}

impl Default for Heat1DParams {
    fn default() -> Self {
        Self {
            nu: 2e-2,
            length: 1.0,
            left_bc: 0.0,
            right_bc: 0.0,
            init: HeatInit::SineMode(1),
            mesh_n: 63,
        }
    }
}

impl Heat1DParams {
    pub fn spacing(&self) -> f64 {
        self.length / (self.mesh_n + 1) as f64
    }

    /// Eigenvalue of the discrete Laplacian (times `nu`) for sine mode `m`.
    pub fn mode_eigenvalue(&self, m: u32) -> f64 {
        let h = self.spacing();
        -self.nu * (2.0 / (h * h)) * (1.0 - (m as f64 * PI * h / self.length).cos())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdvectionInit {
    GaussianBump { center: f64, width: f64 },
    SineMode(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Advection1DParams {
    pub speed: f64,
    pub length: f64,
    pub init: AdvectionInit,
    pub periodic: bool,
    pub mesh_n: usize,
}

impl Default for Advection1DParams {
    fn default() -> Self {
        Self {
            speed: 1.0,
            length: 1.0,
            init: AdvectionInit::GaussianBump {
                center: 0.5,
                width: 0.1,
            },
            periodic: true,
            mesh_n: 63,
        }
    }
}

impl Advection1DParams {
    pub fn spacing(&self) -> f64 {
        if self.periodic {
            self.length / self.mesh_n as f64
        } else {
            self.length / (self.mesh_n + 1) as f64
        }
    }

    pub fn node(&self, i: usize) -> f64 {
        let h = self.spacing();
        if self.periodic {
            i as f64 * h
        } else {
            (i + 1) as f64 * h
        }
    }
}

/// Fluid column on `[0, L0 + u]` pushed through an oscillating inflow,
/// closed by a spring-mounted piston at the right end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlePistonParams {
    /// fluid density (kg/m³)
    pub rho_f: f64,
    /// kinematic viscosity (m²/s)
    pub nu: f64,
    /// rest length of the fluid column (m)
    pub l0: f64,
    /// background transport velocity (m/s), any sign
    pub adv: f64,
    /// piston mass (kg)
    pub m_s: f64,
    /// spring stiffness (N/m)
    pub kappa: f64,
    /// inflow amplitude (m/s)
    pub v_in: f64,
    /// forcing period (s)
    pub period: f64,
    pub mesh_n: usize,
}

impl Default for AlePistonParams {
    fn default() -> Self {
        Self {
            rho_f: 1e3,
            nu: 2e-2,
            l0: 1.0,
            adv: 0.5,
            m_s: 10.0,
            kappa: 100.0,
            v_in: 1.2,
            period: 1.0,
            mesh_n: 63,
        }
    }
}

impl AlePistonParams {
    /// Reference grid spacing on `x̂ ∈ (0, 1)`.
    pub fn spacing(&self) -> f64 {
        1.0 / (self.mesh_n + 1) as f64
    }

    /// Viscous stress `ρ_f ν ∂v/∂x` at the piston, from a second-order
    /// one-sided difference. `v` holds the interior nodes only; the value at
    /// the piston is its velocity `w`.
    pub fn traction(&self, v: &[f64], u: f64, w: f64) -> f64 {
        let n = v.len();
        let h = self.spacing();
        let dv = (3.0 * w - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * h);
        self.rho_f * self.nu * dv / (self.l0 + u)
    }

    /// Kinetic plus spring energy of the coupled system.
    pub fn energy(&self, values: &[f64]) -> f64 {
        let n = self.mesh_n;
        let (v, u, w) = (&values[..n], values[n], values[n + 1]);
        let kinetic_fluid =
            0.5 * self.rho_f * (self.l0 + u) * self.spacing() * v.iter().map(|x| x * x).sum::<f64>();
        0.5 * self.m_s * w * w + 0.5 * self.kappa * u * u + kinetic_fluid
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Dahlquist,
    Heat1D,
    Advection1D,
    AlePiston,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] = [
        ProblemKind::Dahlquist,
        ProblemKind::Heat1D,
        ProblemKind::Advection1D,
        ProblemKind::AlePiston,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Dahlquist => "dahlquist",
            ProblemKind::Heat1D => "heat1d",
            ProblemKind::Advection1D => "advection1d",
            ProblemKind::AlePiston => "ale_piston",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidProblem(format!("unknown problem kind '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemSpec {
    Dahlquist(DahlquistParams),
    Heat1D(Heat1DParams),
    Advection1D(Advection1DParams),
    AlePiston(AlePistonParams),
}

impl ProblemSpec {
    pub fn kind(&self) -> ProblemKind {
        match self {
            ProblemSpec::Dahlquist(_) => ProblemKind::Dahlquist,
            ProblemSpec::Heat1D(_) => ProblemKind::Heat1D,
            ProblemSpec::Advection1D(_) => ProblemKind::Advection1D,
            ProblemSpec::AlePiston(_) => ProblemKind::AlePiston,
        }
    }

    pub fn default_for(kind: ProblemKind) -> Self {
        match kind {
            ProblemKind::Dahlquist => ProblemSpec::Dahlquist(Default::default()),
            ProblemKind::Heat1D => ProblemSpec::Heat1D(Default::default()),
            ProblemKind::Advection1D => ProblemSpec::Advection1D(Default::default()),
            ProblemKind::AlePiston => ProblemSpec::AlePiston(Default::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidProblem(msg));
        match self {
            ProblemSpec::Dahlquist(p) => {
                if !(p.lambda.is_finite() && p.y0.is_finite()) {
                    return fail(format!("non-finite Dahlquist parameters {p:?}"));
                }
            }
            ProblemSpec::Heat1D(p) => {
                if p.mesh_n < 3 {
                    return fail(format!("mesh_n = {} < 3", p.mesh_n));
                }
                if !(p.nu > 0.0 && p.length > 0.0) {
                    return fail(format!("heat1d needs nu > 0 and length > 0, got {p:?}"));
                }
                if !(p.left_bc.is_finite() && p.right_bc.is_finite()) {
                    return fail("non-finite boundary values".into());
                }
            }
            ProblemSpec::Advection1D(p) => {
                if p.mesh_n < 3 {
                    return fail(format!("mesh_n = {} < 3", p.mesh_n));
                }
                if !(p.speed.is_finite() && p.speed != 0.0 && p.length > 0.0) {
                    return fail(format!("advection1d needs |speed| > 0 and length > 0, got {p:?}"));
                }
                if let AdvectionInit::GaussianBump { width, .. } = p.init {
                    if !(width > 0.0) {
                        return fail(format!("bump width {width} must be > 0"));
                    }
                }
            }
            ProblemSpec::AlePiston(p) => {
                if p.mesh_n < 3 {
                    return fail(format!("mesh_n = {} < 3", p.mesh_n));
                }
                let positive = [p.rho_f, p.nu, p.l0, p.m_s, p.kappa, p.period];
                // v_in = 0 switches the forcing off
                if positive.iter().any(|v| !(*v > 0.0 && v.is_finite()))
                    || !(p.v_in >= 0.0 && p.v_in.is_finite())
                    || !p.adv.is_finite()
                {
                    return fail(format!("ale_piston parameters must be positive, got {p:?}"));
                }
            }
        }
        Ok(())
    }

    /// The state at `t = 0`. The ALE piston starts from rest.
    pub fn initial_state(&self) -> Result<State> {
        self.validate()?;
        let layout = self.layout()?;
        let values = match self {
            ProblemSpec::Dahlquist(p) => vec![p.y0],
            ProblemSpec::Heat1D(p) => match p.init {
                HeatInit::Zero => vec![0.0; p.mesh_n],
                HeatInit::SineMode(m) => {
                    let h = p.spacing();
                    (0..p.mesh_n)
                        .map(|i| (m as f64 * PI * (i + 1) as f64 * h / p.length).sin())
                        .collect()
                }
            },
            ProblemSpec::Advection1D(p) => (0..p.mesh_n)
                .map(|i| {
                    let x = p.node(i);
                    match p.init {
                        AdvectionInit::GaussianBump { center, width } => {
                            (-((x - center) / width).powi(2)).exp()
                        }
                        AdvectionInit::SineMode(m) => (2.0 * PI * m as f64 * x / p.length).sin(),
                    }
                })
                .collect(),
            ProblemSpec::AlePiston(p) => vec![0.0; p.mesh_n + 2],
        };
        State::new(values, 0.0, layout)
    }

    /// Reference solution at time `t`: closed form for Dahlquist, otherwise
    /// a θ-scheme run with the step of `settings` divided by `fine_factor`.
    pub fn reference_solution(
        &self,
        t: f64,
        fine_factor: usize,
        settings: &ThetaSettings,
    ) -> Result<State> {
        if fine_factor < 2 {
            return Err(Error::InvalidSettings(format!(
                "fine_factor = {fine_factor} must be >= 2"
            )));
        }
        let s0 = self.initial_state()?;
        if t == 0.0 {
            return Ok(s0);
        }
        if let ProblemSpec::Dahlquist(p) = self {
            return s0.with_values(vec![p.y0 * (p.lambda * t).exp()], t);
        }
        let refined = ThetaSettings {
            step: settings.step / fine_factor as f64,
            ..*settings
        };
        make_propagator(self, refined)?.advance(&s0, t)
    }

    fn check_len(&self, y: &[f64]) -> Result<()> {
        let expected = match self {
            ProblemSpec::Dahlquist(_) => 1,
            ProblemSpec::Heat1D(p) => p.mesh_n,
            ProblemSpec::Advection1D(p) => p.mesh_n,
            ProblemSpec::AlePiston(p) => p.mesh_n + 2,
        };
        if y.len() != expected {
            return Err(Error::LayoutMismatch(format!(
                "{} values for {} (expected {expected})",
                y.len(),
                self.kind()
            )));
        }
        Ok(())
    }
}

fn heat_rhs(p: &Heat1DParams, y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let c = p.nu / (p.spacing() * p.spacing());
    (0..n)
        .map(|i| {
            let left = if i == 0 { p.left_bc } else { y[i - 1] };
            let right = if i == n - 1 { p.right_bc } else { y[i + 1] };
            c * (left - 2.0 * y[i] + right)
        })
        .collect()
}

fn advection_rhs(p: &Advection1DParams, y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let c = -p.speed / (2.0 * p.spacing());
    (0..n)
        .map(|i| {
            let (left, right) = if p.periodic {
                (y[(i + n - 1) % n], y[(i + 1) % n])
            } else {
                // homogeneous Dirichlet data on both ends
                (
                    if i == 0 { 0.0 } else { y[i - 1] },
                    if i == n - 1 { 0.0 } else { y[i + 1] },
                )
            };
            c * (right - left)
        })
        .collect()
}

fn ale_rhs(p: &AlePistonParams, y: &[f64], t: f64) -> Result<Vec<f64>> {
    let n = p.mesh_n;
    let (v, u, w) = (&y[..n], y[n], y[n + 1]);
    let limit = MAX_RELATIVE_DISPLACEMENT * p.l0;
    if !(u.abs() < limit) {
        return Err(Error::MeshDegenerate {
            displacement: u.abs(),
            limit,
        });
    }
    let h = p.spacing();
    let ell = p.l0 + u;
    let inflow = p.v_in * forcing_s(t, p.period);
    let diffusion = p.nu / (ell * ell);

    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let left = if i == 0 { inflow } else { v[i - 1] };
        // kinematic condition: fluid moves with the piston
        let right = if i == n - 1 { w } else { v[i + 1] };
        let x_hat = (i + 1) as f64 * h;
        let transport = (p.adv - x_hat * w) / ell;
        let dx = (right - left) / (2.0 * h);
        let dxx = (left - 2.0 * v[i] + right) / (h * h);
        out.push(-transport * dx + diffusion * dxx);
    }
    // dynamic condition: the fluid stress acts on the piston face with the
    // opposite sign of the fluid-side normal
    let traction = p.traction(v, u, w);
    out.push(w);
    out.push(-(traction + p.kappa * u) / p.m_s);
    Ok(out)
}

impl OdeSystem for ProblemSpec {
    fn layout(&self) -> Result<Arc<Layout>> {
        match self {
            ProblemSpec::Dahlquist(_) => Layout::contiguous(&[("y", 1)]),
            ProblemSpec::Heat1D(p) => Layout::contiguous(&[("v", p.mesh_n)]),
            ProblemSpec::Advection1D(p) => Layout::contiguous(&[("v", p.mesh_n)]),
            ProblemSpec::AlePiston(p) => Layout::contiguous(&[("v", p.mesh_n), ("u", 1), ("w", 1)]),
        }
    }

    fn rhs(&self, y: &[f64], t: f64) -> Result<Vec<f64>> {
        self.check_len(y)?;
        Ok(match self {
            ProblemSpec::Dahlquist(p) => vec![p.lambda * y[0]],
            ProblemSpec::Heat1D(p) => heat_rhs(p, y),
            ProblemSpec::Advection1D(p) => advection_rhs(p, y),
            ProblemSpec::AlePiston(p) => ale_rhs(p, y, t)?,
        })
    }

    fn rhs_jacobian(&self, _y: &[f64], _t: f64) -> Option<Result<Jacobian>> {
        let jac = match self {
            ProblemSpec::Dahlquist(p) => DenseMatrix::from_rows(&[vec![p.lambda]]).map(Jacobian::Dense),
            ProblemSpec::Heat1D(p) => {
                let c = p.nu / (p.spacing() * p.spacing());
                Tridiagonal::constant(p.mesh_n, c, -2.0 * c, c).map(Jacobian::Tridiagonal)
            }
            ProblemSpec::Advection1D(p) => {
                let c = -p.speed / (2.0 * p.spacing());
                let band = Tridiagonal::constant(p.mesh_n, -c, 0.0, c);
                if p.periodic {
                    band.and_then(|b| CyclicTridiagonal::new(b, -c, c))
                        .map(Jacobian::CyclicTridiagonal)
                } else {
                    band.map(Jacobian::Tridiagonal)
                }
            }
            ProblemSpec::AlePiston(_) => return None,
        };
        Some(jac.map_err(Error::from))
    }

    fn exact_solution(&self, t: f64) -> Option<Result<Vec<f64>>> {
        match self {
            ProblemSpec::Dahlquist(p) => Some(Ok(vec![p.y0 * (p.lambda * t).exp()])),
            ProblemSpec::Heat1D(p) if p.left_bc == 0.0 && p.right_bc == 0.0 => {
                let decay = match p.init {
                    HeatInit::Zero => 0.0,
                    HeatInit::SineMode(m) => (p.mode_eigenvalue(m) * t).exp(),
                };
                Some(self.initial_state().map(|s| s.values().iter().map(|v| v * decay).collect()))
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heat(mesh_n: usize) -> Heat1DParams {
        Heat1DParams {
            nu: 1.0,
            length: 1.0,
            mesh_n,
            ..Default::default()
        }
    }

    #[test]
    fn forcing_values() {
        assert_eq!(forcing_s(0.0, 1.0), 0.0);
        assert!((forcing_s(1.0, 1.0) - 1.0).abs() < 1e-15);
        assert!(forcing_s(2.0, 1.0).abs() < 1e-15);
        assert!((forcing_s(0.5, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn heat_zero_state_is_steady() {
        let p = ProblemSpec::Heat1D(Heat1DParams {
            init: HeatInit::Zero,
            ..heat(9)
        });
        let s = p.initial_state().unwrap();
        assert!(s.values().iter().all(|v| *v == 0.0));
        assert!(p.rhs(s.values(), 0.0).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn heat_sine_mode_is_eigenvector() {
        let params = heat(15);
        let p = ProblemSpec::Heat1D(params);
        let s = p.initial_state().unwrap();
        let h = params.spacing();
        let mu = -(2.0 / (h * h)) * (1.0 - (PI * h).cos());
        assert_eq!(mu, params.mode_eigenvalue(1));
        // rhs via the explicit tridiagonal matrix as an independent route
        let jac = match p.rhs_jacobian(s.values(), 0.0).unwrap().unwrap() {
            Jacobian::Tridiagonal(t) => t,
            other => panic!("unexpected {other:?}"),
        };
        let via_matrix = jac.matvec(s.values()).unwrap();
        let rhs = p.rhs(s.values(), 0.0).unwrap();
        for ((r, m), v) in rhs.iter().zip(&via_matrix).zip(s.values()) {
            assert!((r - mu * v).abs() < 1e-10 * mu.abs());
            assert!((r - m).abs() < 1e-10 * mu.abs());
        }
    }

    #[test]
    fn gaussian_bump_nodes() {
        let p = ProblemSpec::Advection1D(Advection1DParams {
            mesh_n: 9,
            periodic: false,
            ..Default::default()
        });
        let s = p.initial_state().unwrap();
        for (i, v) in s.values().iter().enumerate() {
            let x = (i + 1) as f64 * 0.1;
            assert!((v - (-((x - 0.5) / 0.1f64).powi(2)).exp()).abs() < 1e-15);
        }
        assert!((s.values()[4] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn periodic_central_advection_conserves_energy() {
        let p = ProblemSpec::Advection1D(Advection1DParams::default());
        let s = p.initial_state().unwrap();
        let f = p.rhs(s.values(), 0.0).unwrap();
        let d_energy: f64 = 2.0 * s.values().iter().zip(&f).map(|(a, b)| a * b).sum::<f64>();
        assert!(d_energy.abs() <= 1e-12);
    }

    #[test]
    fn dahlquist_initial_and_reference() {
        let p = ProblemSpec::Dahlquist(DahlquistParams::default());
        let s = p.initial_state().unwrap();
        assert_eq!(s.values(), &[1.0]);
        assert_eq!(s.time(), 0.0);
        let r = p
            .reference_solution(1.0, 4, &ThetaSettings::crank_nicolson(0.1))
            .unwrap();
        assert!((r.values()[0] - 0.36787944117144233).abs() < 1e-15);
        let r0 = p
            .reference_solution(0.0, 4, &ThetaSettings::crank_nicolson(0.1))
            .unwrap();
        assert_eq!(r0, s);
        assert!(p
            .reference_solution(1.0, 1, &ThetaSettings::crank_nicolson(0.1))
            .is_err());
    }

    #[test]
    fn ale_rest_state_is_fixed_point() {
        let p = ProblemSpec::AlePiston(AlePistonParams {
            v_in: 1.0,
            ..Default::default()
        });
        let s = p.initial_state().unwrap();
        // s(0) = 0, so the inflow is off at t = 0
        assert!(p.rhs(s.values(), 0.0).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn ale_traction_exact_for_linear_profile() {
        let params = AlePistonParams {
            mesh_n: 7,
            ..Default::default()
        };
        let h = params.spacing();
        let w = 0.3;
        let v: Vec<f64> = (0..7).map(|i| (i + 1) as f64 * h * w).collect();
        let t = params.traction(&v, 0.0, w);
        let expected = params.rho_f * params.nu * w / params.l0;
        assert!((t - expected).abs() < 1e-12 * expected.abs());
    }

    #[test]
    fn ale_mesh_degeneracy() {
        let params = AlePistonParams {
            mesh_n: 5,
            ..Default::default()
        };
        let p = ProblemSpec::AlePiston(params);
        let mut y = vec![0.0; 7];
        y[5] = 0.9 * params.l0;
        assert!(matches!(p.rhs(&y, 0.0), Err(Error::MeshDegenerate { .. })));
        y[5] = -0.95 * params.l0;
        assert!(matches!(p.rhs(&y, 0.0), Err(Error::MeshDegenerate { .. })));
        y[5] = 0.5 * params.l0;
        assert!(p.rhs(&y, 0.0).is_ok());
    }

    #[test]
    fn validation() {
        let bad = [
            ProblemSpec::Heat1D(Heat1DParams {
                mesh_n: 2,
                ..Default::default()
            }),
            ProblemSpec::Heat1D(Heat1DParams {
                nu: 0.0,
                ..Default::default()
            }),
            ProblemSpec::Advection1D(Advection1DParams {
                speed: 0.0,
                ..Default::default()
            }),
            ProblemSpec::AlePiston(AlePistonParams {
                kappa: -1.0,
                ..Default::default()
            }),
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
        for k in ProblemKind::ALL {
            assert!(ProblemSpec::default_for(k).validate().is_ok());
            assert_eq!(k.name().parse::<ProblemKind>().unwrap(), k);
        }
    }

    #[test]
    fn wrong_length_rejected() {
        let p = ProblemSpec::Heat1D(heat(5));
        assert!(matches!(p.rhs(&[0.0; 4], 0.0), Err(Error::LayoutMismatch(_))));
    }
}
