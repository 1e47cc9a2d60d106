//! Tabulated `alpha(x)` recovered from the partials of `F`.

use crate::equation::QuadEquation;
use crate::linearize::LinearizabilityReport;

use super::TransformError;

/// Largest number of knots adaptive refinement may create.
pub const MAX_KNOTS: usize = 1 << 17;
/// Target accuracy of the interpolated `ln alpha` at interval midpoints.
const LOG_TOL: f64 = 1e-10;

/// `alpha` on a sorted knot table, stored as `ln alpha` with `alpha(x_ref) = 1`.
///
/// Between knots `ln alpha` is interpolated by the cubic through the four
/// nearest knots.
#[derive(Clone, Debug)]
pub struct AlphaTable {
    x_ref: f64,
    frozen: (f64, f64),
    xs: Vec<f64>,
    log_alpha: Vec<f64>,
    /// Normalization: `ln |F,u10 / F,u00|` at `x_ref`.
    log_scale: f64,
    sign: f64,
    max_interp_error: f64,
}

/// `alpha` at `x`, unnormalized and with the sign of the raw ratio.
fn raw_alpha(eq: &QuadEquation, x: f64, frozen: (f64, f64)) -> Result<f64, TransformError> {
    let (_, g) = eq
        .rhs()
        .gradient([x, frozen.0, frozen.1], 0.0)
        .map_err(|source| TransformError::Domain { x, source })?;
    let ratio = g[1] / g[0];
    if g[0] == 0.0 || !ratio.is_finite() || ratio == 0.0 {
        return Err(TransformError::DegenerateDerivative { x });
    }
    Ok(ratio)
}

impl AlphaTable {
    /// Recover `alpha` on `domain`, starting from `knots` uniform knots and
    /// refining where the interpolant misses the direct value.
    ///
    /// `frozen` holds the values of `(u10, u01)`; `x_ref` must lie in `domain`.
    pub fn build(
        eq: &QuadEquation,
        domain: [f64; 2],
        knots: usize,
        x_ref: f64,
        frozen: (f64, f64),
    ) -> Result<Self, TransformError> {
        let [lo, hi] = domain;
        if knots < 4 {
            return Err(TransformError::InvalidKnots(knots));
        }
        if !(lo < hi && (lo..=hi).contains(&x_ref)) {
            return Err(TransformError::InvalidDomain { lo, hi, x_ref });
        }
        let reference = raw_alpha(eq, x_ref, frozen)?;
        let sign = reference.signum();
        let log_scale = reference.abs().ln();
        let log_alpha_at = |x: f64| -> Result<f64, TransformError> {
            let a = raw_alpha(eq, x, frozen)?;
            if a.signum() != sign {
                return Err(TransformError::SignChange { x });
            }
            Ok(a.abs().ln() - log_scale)
        };

        let mut xs: Vec<f64> = (0..knots)
            .map(|k| if k + 1 == knots { hi } else { lo + (hi - lo) * k as f64 / (knots - 1) as f64 })
            .collect();
        if let Err(pos) = xs.binary_search_by(|v| v.total_cmp(&x_ref)) {
            xs.insert(pos, x_ref);
        }
        let mut table = AlphaTable {
            x_ref,
            frozen,
            log_alpha: xs.iter().map(|&x| log_alpha_at(x)).collect::<Result<_, _>>()?,
            xs,
            log_scale,
            sign,
            max_interp_error: 0.0,
        };

        // Intervals whose midpoint still has to be checked.
        let mut dirty = vec![true; table.xs.len() - 1];
        loop {
            let mut splits = Vec::new();
            let mut worst = 0.0f64;
            for k in 0..table.xs.len() - 1 {
                if !dirty[k] {
                    continue;
                }
                let (a, b) = (table.xs[k], table.xs[k + 1]);
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    continue;
                }
                let direct = log_alpha_at(mid)?;
                let err = (table.interpolate(k, mid) - direct).abs();
                if err > LOG_TOL {
                    splits.push((k, mid, direct));
                    worst = worst.max(err);
                }
            }
            if splits.is_empty() {
                break;
            }
            if table.xs.len() + splits.len() > MAX_KNOTS {
                table.max_interp_error = worst;
                break;
            }
            let mut xs = Vec::with_capacity(table.xs.len() + splits.len());
            let mut values = Vec::with_capacity(xs.capacity());
            let mut fresh = Vec::with_capacity(xs.capacity());
            let mut next = splits.iter().peekable();
            for k in 0..table.xs.len() {
                xs.push(table.xs[k]);
                values.push(table.log_alpha[k]);
                fresh.push(false);
                if let Some(&&(j, mid, v)) = next.peek() {
                    if j == k {
                        xs.push(mid);
                        values.push(v);
                        fresh.push(true);
                        next.next();
                    }
                }
            }
            // recheck every interval whose four-point stencil touches a new knot
            dirty = vec![false; xs.len() - 1];
            for (i, _) in fresh.iter().enumerate().filter(|(_, f)| **f) {
                for k in i.saturating_sub(3)..(i + 3).min(dirty.len()) {
                    dirty[k] = true;
                }
            }
            table.xs = xs;
            table.log_alpha = values;
        }
        Ok(table)
    }

    pub fn x_ref(&self) -> f64 {
        self.x_ref
    }

    pub fn frozen(&self) -> (f64, f64) {
        self.frozen
    }

    pub fn domain(&self) -> [f64; 2] {
        [self.xs[0], self.xs[self.xs.len() - 1]]
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    /// Normalized `alpha` at every knot.
    pub fn values(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().zip(&self.log_alpha).map(|(x, l)| (*x, l.exp()))
    }

    /// Residual interpolation error if refinement hit [`MAX_KNOTS`], else 0.
    pub fn max_interp_error(&self) -> f64 {
        self.max_interp_error
    }

    /// Sign of the unnormalized ratio `F,u10 / F,u00`.
    pub fn sign(&self) -> f64 {
        self.sign
    }

    /// Offset that turns normalized `ln alpha` back into `ln |F,u10 / F,u00|`.
    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// Index `k` of the interval `[x_k, x_{k+1}]` holding `x`.
    pub fn interval(&self, x: f64) -> Option<usize> {
        let [lo, hi] = self.domain();
        if !(lo..=hi).contains(&x) {
            return None;
        }
        let k = self.xs.partition_point(|v| *v <= x);
        Some(k.saturating_sub(1).min(self.xs.len() - 2))
    }

    fn interpolate(&self, k: usize, x: f64) -> f64 {
        let n = self.xs.len();
        let start = if n < 4 { 0 } else { k.saturating_sub(1).min(n - 4) };
        let end = (start + 4).min(n);
        let mut sum = 0.0;
        for i in start..end {
            let mut w = 1.0;
            for j in start..end {
                if i != j {
                    w *= (x - self.xs[j]) / (self.xs[i] - self.xs[j]);
                }
            }
            sum += w * self.log_alpha[i];
        }
        sum
    }

    /// Interpolated normalized `alpha(x)`; `None` outside the table.
    pub fn alpha(&self, x: f64) -> Option<f64> {
        self.interval(x).map(|k| self.interpolate(k, x).exp())
    }

    /// `1 / alpha(x)` on interval `k`, no bounds check.
    pub(super) fn inverse_on(&self, k: usize, x: f64) -> f64 {
        (-self.interpolate(k, x)).exp()
    }
}

/// `alpha` for an equation that passed the necessary conditions, with
/// `(u10, u01)` frozen at the box midpoint and `x_ref` the box midpoint.
pub fn recover_alpha(
    eq: &QuadEquation,
    report: &LinearizabilityReport,
    knots: usize,
    domain: [f64; 2],
) -> Result<AlphaTable, TransformError> {
    if !report.passed {
        return Err(TransformError::NotLinearizable);
    }
    let mid = eq.midpoint();
    AlphaTable::build(eq, domain, knots, mid, (mid, mid))
}
