use super::{check_finite, check_len, norm_inf, LinalgError, Result};

/// Pivots smaller than this fraction of `‖diag‖∞` count as zero.
const PIVOT_RTOL: f64 = 1e-14;

/// Tridiagonal matrix in band storage.
///
/// `lower[i]` sits at `(i + 1, i)`, `upper[i]` at `(i, i + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(LinalgError::Empty);
        }
        let n = diag.len();
        check_len(n - 1, lower.len())?;
        check_len(n - 1, upper.len())?;
        Ok(Self { lower, diag, upper })
    }

    /// Constant-coefficient band `(sub, main, sup)` of size `n`.
    pub fn constant(n: usize, sub: f64, main: f64, sup: f64) -> Result<Self> {
        if n == 0 {
            return Err(LinalgError::Empty);
        }
        Self::new(vec![sub; n - 1], vec![main; n], vec![sup; n - 1])
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::constant(n, 0.0, 1.0, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        check_len(n, x.len())?;
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for i in 0..n - 1 {
            y[i] += self.upper[i] * x[i + 1];
            y[i + 1] += self.lower[i] * x[i];
        }
        Ok(y)
    }

    pub fn identity_minus(&self, alpha: f64) -> Self {
        Self {
            lower: self.lower.iter().map(|v| -alpha * v).collect(),
            diag: self.diag.iter().map(|v| 1.0 - alpha * v).collect(),
            upper: self.upper.iter().map(|v| -alpha * v).collect(),
        }
    }

    /// Thomas algorithm (no pivoting).
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        check_len(n, b.len())?;
        check_finite(b, "rhs")?;
        let threshold = PIVOT_RTOL * norm_inf(&self.diag);

        let mut c_prime = vec![0.0; n];
        let mut x = vec![0.0; n];
        let mut pivot = self.diag[0];
        if pivot.abs() <= threshold {
            return Err(LinalgError::ZeroPivot { row: 0 });
        }
        if n > 1 {
            c_prime[0] = self.upper[0] / pivot;
        }
        x[0] = b[0] / pivot;
        for i in 1..n {
            pivot = self.diag[i] - self.lower[i - 1] * c_prime[i - 1];
            if pivot.abs() <= threshold {
                return Err(LinalgError::ZeroPivot { row: i });
            }
            if i < n - 1 {
                c_prime[i] = self.upper[i] / pivot;
            }
            x[i] = (b[i] - self.lower[i - 1] * x[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            x[i] -= c_prime[i] * x[i + 1];
        }
        check_finite(&x, "solution")?;
        Ok(x)
    }
}

/// Tridiagonal band plus the two periodic corner entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicTridiagonal {
    band: Tridiagonal,
    /// entry `(0, n - 1)`
    top_right: f64,
    /// entry `(n - 1, 0)`
    bottom_left: f64,
}

impl CyclicTridiagonal {
    pub fn new(band: Tridiagonal, top_right: f64, bottom_left: f64) -> Result<Self> {
        if band.dim() < 3 {
            return Err(LinalgError::InvalidSettings(
                "cyclic tridiagonal systems need n >= 3".into(),
            ));
        }
        Ok(Self {
            band,
            top_right,
            bottom_left,
        })
    }

    pub fn dim(&self) -> usize {
        self.band.dim()
    }

    pub fn band(&self) -> &Tridiagonal {
        &self.band
    }

    pub fn corners(&self) -> (f64, f64) {
        (self.top_right, self.bottom_left)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = self.band.matvec(x)?;
        let n = self.dim();
        y[0] += self.top_right * x[n - 1];
        y[n - 1] += self.bottom_left * x[0];
        Ok(y)
    }

    pub fn identity_minus(&self, alpha: f64) -> Self {
        Self {
            band: self.band.identity_minus(alpha),
            top_right: -alpha * self.top_right,
            bottom_left: -alpha * self.bottom_left,
        }
    }

    /// Sherman-Morrison correction around two Thomas solves.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        check_len(n, b.len())?;
        let gamma = -self.band.diag[0];
        if gamma == 0.0 {
            return Err(LinalgError::ZeroPivot { row: 0 });
        }
        let mut modified = self.band.clone();
        modified.diag[0] -= gamma;
        modified.diag[n - 1] -= self.bottom_left * self.top_right / gamma;

        let mut x = modified.solve(b)?;
        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = self.bottom_left;
        let z = modified.solve(&u)?;

        let denom = 1.0 + z[0] + self.top_right * z[n - 1] / gamma;
        if denom.abs() <= f64::EPSILON {
            return Err(LinalgError::NumericBreakdown(
                "singular cyclic system".into(),
            ));
        }
        let fact = (x[0] + self.top_right * x[n - 1] / gamma) / denom;
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi -= fact * zi;
        }
        check_finite(&x, "solution")?;
        Ok(x)
    }
}
