//! Adaptive Simpson quadrature and the antiderivative `Psi`.

use super::alpha::AlphaTable;
use super::TransformError;

/// Subdivision budget for a single integral.
pub const MAX_SUBDIVISIONS: usize = 1 << 20;
pub const DEFAULT_TOL: f64 = 1e-10;

/// `∫_a^b f` to within `tol` by adaptive Simpson with Richardson correction.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64, TransformError> {
    if a == b {
        return Ok(0.0);
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut budget = MAX_SUBDIVISIONS;
    let v = step(&f, a, b, fa, fm, fb, whole, tol, 0, &mut budget)?;
    if !v.is_finite() {
        return Err(TransformError::QuadratureFailure { a, b });
    }
    Ok(v)
}

const MAX_DEPTH: usize = 200;

#[allow(clippy::too_many_arguments)]
fn step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    budget: &mut usize,
) -> Result<f64, TransformError> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if *budget == 0 || depth >= MAX_DEPTH || !(lm > a && rm < b) || !delta.is_finite() {
        return Err(TransformError::QuadratureFailure { a, b });
    }
    *budget -= 1;
    Ok(step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, budget)?
        + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, budget)?)
}

/// `Psi(x) = lambda * ∫_{x_ref}^x dt / alpha(t) + mu`.
#[derive(Clone, Debug)]
pub struct Psi {
    alpha: AlphaTable,
    /// Unscaled `Psi` at each knot.
    cumulative: Vec<f64>,
    tol: f64,
    lambda: f64,
    mu: f64,
}

impl Psi {
    pub fn alpha(&self) -> &AlphaTable {
        &self.alpha
    }

    pub fn domain(&self) -> [f64; 2] {
        self.alpha.domain()
    }

    pub fn gauge(&self) -> (f64, f64) {
        (self.lambda, self.mu)
    }

    /// The same transform composed with `y -> lambda y + mu`.
    pub fn with_gauge(&self, lambda: f64, mu: f64) -> Psi {
        Psi {
            lambda: self.lambda * lambda,
            mu: lambda * self.mu + mu,
            ..self.clone()
        }
    }

    /// `Psi` at every knot.
    pub fn knot_values(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.alpha
            .knots()
            .iter()
            .zip(&self.cumulative)
            .map(|(x, c)| (*x, self.lambda * c + self.mu))
    }

    fn integral(&self, k: usize, a: f64, b: f64) -> Result<f64, TransformError> {
        let rough = (b - a) * self.alpha.inverse_on(k, 0.5 * (a + b));
        let tol = self.tol * rough.abs().max(1.0);
        adaptive_simpson(|t| self.alpha.inverse_on(k, t), a, b, tol)
    }

    pub fn eval(&self, x: f64) -> Result<f64, TransformError> {
        let k = self.alpha.interval(x).ok_or(TransformError::OutOfDomain { x })?;
        let x_k = self.alpha.knots()[k];
        let base = self.cumulative[k] + self.integral(k, x_k, x)?;
        Ok(self.lambda * base + self.mu)
    }

    /// `Psi'(x) = lambda / alpha(x)`.
    pub fn derivative(&self, x: f64) -> Result<f64, TransformError> {
        let a = self.alpha.alpha(x).ok_or(TransformError::OutOfDomain { x })?;
        Ok(self.lambda / a)
    }

    /// Strictly monotone over the knot table.
    pub fn monotone(&self) -> bool {
        let v: Vec<f64> = self.knot_values().map(|(_, y)| y).collect();
        v.windows(2).all(|w| w[0] < w[1]) || v.windows(2).all(|w| w[0] > w[1])
    }
}

/// Integrate `1 / alpha` from `x_ref`, giving `Psi(x_ref) = 0`, `Psi'(x_ref) = 1`.
pub fn build_psi(alpha: &AlphaTable) -> Result<Psi, TransformError> {
    build_psi_with_tol(alpha, DEFAULT_TOL)
}

pub fn build_psi_with_tol(alpha: &AlphaTable, tol: f64) -> Result<Psi, TransformError> {
    let xs = alpha.knots();
    let mut psi = Psi {
        alpha: alpha.clone(),
        cumulative: vec![0.0; xs.len()],
        tol,
        lambda: 1.0,
        mu: 0.0,
    };
    let r = xs
        .binary_search_by(|v| v.total_cmp(&alpha.x_ref()))
        .expect("x_ref is a knot");
    for k in r..xs.len() - 1 {
        psi.cumulative[k + 1] = psi.cumulative[k] + psi.integral(k, xs[k], xs[k + 1])?;
    }
    for k in (0..r).rev() {
        psi.cumulative[k] = psi.cumulative[k + 1] - psi.integral(k, xs[k], xs[k + 1])?;
    }
    Ok(psi)
}
