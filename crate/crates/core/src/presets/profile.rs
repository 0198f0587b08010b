//! Radial profile functions `A(ρ)`, `B(ρ)` for acoustic metrics.

use std::fmt;
use std::sync::Arc;

use crate::metric::MetricError;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A scalar function of the radius with a first derivative.
#[derive(Clone)]
pub enum ProfileFn {
    Constant(f64),
    /// `Σ coeffs[k] (ρ − center)^k`.
    Polynomial { center: f64, coeffs: Vec<f64> },
    /// Natural cubic spline through knots.
    Spline(CubicSpline),
    /// Monotone piecewise-cubic (Fritsch–Carlson) interpolation of samples.
    Tabulated(MonotoneCubic),
    /// Arbitrary closure; the derivative falls back to central differences.
    Custom { value: ScalarFn, derivative: Option<ScalarFn> },
}

impl fmt::Debug for ProfileFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileFn::Constant(c) => write!(f, "Constant({c})"),
            ProfileFn::Polynomial { center, coeffs } => {
                write!(f, "Polynomial {{ center: {center}, coeffs: {coeffs:?} }}")
            }
            ProfileFn::Spline(s) => write!(f, "Spline({} knots)", s.knots.len()),
            ProfileFn::Tabulated(s) => write!(f, "Tabulated({} samples)", s.knots.len()),
            ProfileFn::Custom { .. } => f.write_str("Custom"),
        }
    }
}

impl ProfileFn {
    pub fn affine(c0: f64, c1: f64) -> Self {
        ProfileFn::Polynomial { center: 0.0, coeffs: vec![c0, c1] }
    }

    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        ProfileFn::Custom { value: Arc::new(f), derivative: None }
    }

    pub fn value(&self, rho: f64) -> f64 {
        match self {
            ProfileFn::Constant(c) => *c,
            ProfileFn::Polynomial { center, coeffs } => {
                let x = rho - center;
                coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
            }
            ProfileFn::Spline(s) => s.value(rho),
            ProfileFn::Tabulated(s) => s.value(rho),
            ProfileFn::Custom { value, .. } => value(rho),
        }
    }

    pub fn derivative(&self, rho: f64) -> f64 {
        match self {
            ProfileFn::Constant(_) => 0.0,
            ProfileFn::Polynomial { center, coeffs } => {
                let x = rho - center;
                coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .rev()
                    .fold(0.0, |acc, (k, c)| acc * x + k as f64 * c)
            }
            ProfileFn::Spline(s) => s.derivative(rho),
            ProfileFn::Tabulated(s) => s.derivative(rho),
            ProfileFn::Custom { value, derivative } => match derivative {
                Some(d) => d(rho),
                None => {
                    let h = 1e-6 * rho.abs().max(1.0);
                    (value(rho + h) - value(rho - h)) / (2.0 * h)
                }
            },
        }
    }
}

fn check_knots(knots: &[f64], values: &[f64]) -> Result<(), MetricError> {
    if knots.len() < 2 || knots.len() != values.len() {
        return Err(MetricError::InvalidParameter(format!(
            "interpolation needs >= 2 knots with matching values (got {} knots, {} values)",
            knots.len(),
            values.len()
        )));
    }
    if knots.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(MetricError::InvalidParameter("knots must be strictly increasing".into()));
    }
    if knots.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(MetricError::InvalidParameter("knots and values must be finite".into()));
    }
    Ok(())
}

fn locate(knots: &[f64], x: f64) -> usize {
    match knots.partition_point(|k| *k <= x) {
        0 => 0,
        i if i >= knots.len() => knots.len() - 2,
        i => i - 1,
    }
}

/// Cubic Hermite segment on `[x0, x1]` with end slopes.
fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, m0: f64, m1: f64, x: f64) -> (f64, f64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let value = h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1;
    let d00 = 6.0 * t2 - 6.0 * t;
    let d10 = 3.0 * t2 - 4.0 * t + 1.0;
    let d01 = -6.0 * t2 + 6.0 * t;
    let d11 = 3.0 * t2 - 2.0 * t;
    let deriv = (d00 * y0 + d01 * y1) / h + d10 * m0 + d11 * m1;
    (value, deriv)
}

#[derive(Debug, Clone)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl CubicSpline {
    /// Natural spline (zero second derivative at both ends).
    pub fn natural(knots: Vec<f64>, values: Vec<f64>) -> Result<Self, MetricError> {
        check_knots(&knots, &values)?;
        let n = knots.len();
        // second derivatives via the tridiagonal system
        let mut m = vec![0.0; n];
        if n > 2 {
            let mut diag = vec![0.0; n];
            let mut rhs = vec![0.0; n];
            let mut upper = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = knots[i] - knots[i - 1];
                let h1 = knots[i + 1] - knots[i];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0 * ((values[i + 1] - values[i]) / h1 - (values[i] - values[i - 1]) / h0);
            }
            for i in 2..n - 1 {
                let h0 = knots[i] - knots[i - 1];
                let w = h0 / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            for i in (1..n - 1).rev() {
                m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
            }
        }
        let slopes = (0..n)
            .map(|i| {
                let j = if i + 1 < n { i } else { i - 1 };
                let h = knots[j + 1] - knots[j];
                let s = (values[j + 1] - values[j]) / h;
                if i == j {
                    s - h * (2.0 * m[j] + m[j + 1]) / 6.0
                } else {
                    s + h * (m[j] + 2.0 * m[j + 1]) / 6.0
                }
            })
            .collect();
        Ok(Self { knots, values, slopes })
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.eval(x).1
    }

    fn eval(&self, x: f64) -> (f64, f64) {
        let i = locate(&self.knots, x);
        hermite(
            self.knots[i],
            self.knots[i + 1],
            self.values[i],
            self.values[i + 1],
            self.slopes[i],
            self.slopes[i + 1],
            x,
        )
    }
}

#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self, MetricError> {
        check_knots(&knots, &values)?;
        let n = knots.len();
        let secants: Vec<f64> = (0..n - 1)
            .map(|i| (values[i + 1] - values[i]) / (knots[i + 1] - knots[i]))
            .collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            slopes[i] = if secants[i - 1] * secants[i] <= 0.0 {
                0.0
            } else {
                0.5 * (secants[i - 1] + secants[i])
            };
        }
        for i in 0..n - 1 {
            if secants[i] == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            let a = slopes[i] / secants[i];
            let b = slopes[i + 1] / secants[i];
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                slopes[i] = tau * a * secants[i];
                slopes[i + 1] = tau * b * secants[i];
            }
        }
        Ok(Self { knots, values, slopes })
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.eval(x).1
    }

    fn eval(&self, x: f64) -> (f64, f64) {
        let i = locate(&self.knots, x);
        hermite(
            self.knots[i],
            self.knots[i + 1],
            self.values[i],
            self.values[i + 1],
            self.slopes[i],
            self.slopes[i + 1],
            x,
        )
    }
}

/// Radial data `A(ρ)`, `B(ρ)` on `(rho_lo, rho_hi)`.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub a: ProfileFn,
    pub b: ProfileFn,
    pub rho_lo: f64,
    pub rho_hi: f64,
}

impl RadialProfile {
    pub fn new(a: ProfileFn, b: ProfileFn, rho_lo: f64, rho_hi: f64) -> Result<Self, MetricError> {
        if !(rho_lo > 0.0 && rho_hi > rho_lo && rho_hi.is_finite()) {
            return Err(MetricError::InvalidParameter(format!(
                "profile window must satisfy 0 < rho_lo < rho_hi (got {rho_lo}, {rho_hi})"
            )));
        }
        Ok(Self { a, b, rho_lo, rho_hi })
    }

    /// `A = −1 + κ((ρ − c)² − gap)` paired with `B = b0 + b1 (ρ − c)`.
    ///
    /// `A = −1` has the roots `c ± √gap` when `gap > 0`, a double root at
    /// `c` when `gap = 0`, and none when `gap < 0`. The window is the set
    /// where `κ((ρ − c)² − gap) <= reach`, keeping `A < 0` when `reach < 1`.
    pub fn quadratic_family(
        center: f64,
        kappa: f64,
        gap: f64,
        b0: f64,
        b1: f64,
        reach: f64,
    ) -> Result<Self, MetricError> {
        if !(kappa > 0.0) || !(reach > 0.0) {
            return Err(MetricError::InvalidParameter(
                "quadratic profile needs kappa > 0 and reach > 0".into(),
            ));
        }
        let half = (reach / kappa + gap).max(0.0).sqrt();
        let a = ProfileFn::Polynomial { center, coeffs: vec![-1.0 - kappa * gap, 0.0, kappa] };
        let b = ProfileFn::Polynomial { center, coeffs: vec![b0, b1] };
        Self::new(a, b, (center - half).max(1e-3), center + half)
    }

    pub fn a(&self, rho: f64) -> f64 {
        self.a.value(rho)
    }

    pub fn b(&self, rho: f64) -> f64 {
        self.b.value(rho)
    }

    pub fn derivative_a(&self, rho: f64) -> f64 {
        self.a.derivative(rho)
    }

    pub fn negated_a(&self) -> Self {
        let a = self.a.clone();
        let neg = match a {
            ProfileFn::Constant(c) => ProfileFn::Constant(-c),
            ProfileFn::Polynomial { center, coeffs } => {
                ProfileFn::Polynomial { center, coeffs: coeffs.iter().map(|c| -c).collect() }
            }
            other => {
                let f = other.clone();
                let g = other;
                ProfileFn::Custom {
                    value: Arc::new(move |r| -f.value(r)),
                    derivative: Some(Arc::new(move |r| -g.derivative(r))),
                }
            }
        };
        Self { a: neg, b: self.b.clone(), rho_lo: self.rho_lo, rho_hi: self.rho_hi }
    }
}
