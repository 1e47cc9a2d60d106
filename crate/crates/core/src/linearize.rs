//! Sampled necessary conditions for linearizability and affine detection.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::equation::QuadEquation;
use crate::expr::EvalError;
use crate::report::{float_value, Report};

pub const DEFAULT_SAMPLES: usize = 200;
pub const MIN_SAMPLES: usize = 50;
pub const DEFAULT_TOL: f64 = 1e-7;
pub const AFFINE_TOL: f64 = 1e-9;

/// Partials at or below this magnitude count as vanishing.
const VANISHING: f64 = 1e-8;
const MAX_VANISHING_FRACTION: f64 = 0.1;
const SPREAD_POINTS: usize = 5;
const AFFINE_SAMPLES: usize = 200;
const AFFINE_STEP: f64 = 1e-3;
const AFFINE_SEED: u64 = 0xaff1_7e00;

#[derive(Debug, Error, PartialEq)]
pub enum LinearizeError {
    #[error("at least {MIN_SAMPLES} samples are required, got {0}")]
    TooFewSamples(usize),
    #[error("a first partial of F vanishes on {vanishing} of {samples} samples")]
    DegenerateDerivative { vanishing: usize, samples: usize },
    #[error("evaluation failed at ({}, {}, {}): {source}", point[0], point[1], point[2])]
    Domain { point: [f64; 3], source: EvalError },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearizabilityReport {
    pub passed: bool,
    /// `F,u00 / F,u10` on `u00 = u10`.
    pub a: f64,
    /// `F,u00 / F,u01` on `u00 = u01`.
    pub b: f64,
    /// `F,u01 / F,u10` on `u10 = u01`.
    pub c: f64,
    pub residuals: [f64; 6],
    /// `|A - B C|`.
    pub consistency: f64,
    /// 1 to 6 for the six conditions, 7 for the consistency check.
    pub failing_condition: Option<usize>,
    pub samples_used: usize,
    pub tol: f64,
}

impl Report for LinearizabilityReport {
    fn to_json(&self) -> Value {
        json!({
            "passed": self.passed,
            "mode": "necessary-conditions",
            "A": float_value(self.a),
            "B": float_value(self.b),
            "C": float_value(self.c),
            "residuals": self.residuals.iter().map(|r| float_value(*r)).collect::<Vec<_>>(),
            "consistency": float_value(self.consistency),
            "failing_condition": self.failing_condition,
            "samples_used": self.samples_used,
        })
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn max_deviation_from_median(values: &[f64]) -> f64 {
    let med = median(values);
    let scale = if med == 0.0 { 1.0 } else { med.abs() };
    values.iter().map(|v| (v - med).abs() / scale).fold(0.0, f64::max)
}

fn max_pairwise_spread(values: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            worst = worst.max(relative(*a, *b));
        }
    }
    worst
}

/// Which pair of arguments is set equal and which partials form the ratio.
#[derive(Clone, Copy)]
enum Ratio {
    /// `F,u00 / F,u10` at `(x, x, y)`.
    A,
    /// `F,u00 / F,u01` at `(x, y, x)`.
    B,
    /// `F,u01 / F,u10` at `(y, x, x)`.
    C,
}

impl Ratio {
    fn point(self, x: f64, y: f64) -> [f64; 3] {
        match self {
            Ratio::A => [x, x, y],
            Ratio::B => [x, y, x],
            Ratio::C => [y, x, x],
        }
    }

    fn parts(self) -> (usize, usize) {
        match self {
            Ratio::A => (0, 1),
            Ratio::B => (0, 2),
            Ratio::C => (2, 1),
        }
    }

    /// `None` when a partial in the ratio vanishes.
    fn eval(self, eq: &QuadEquation, x: f64, y: f64) -> Result<Option<f64>, LinearizeError> {
        let point = self.point(x, y);
        let (_, g) = eq.gradient(point).map_err(|source| LinearizeError::Domain { point, source })?;
        let (num, den) = self.parts();
        if g[num].abs() <= VANISHING || g[den].abs() <= VANISHING {
            return Ok(None);
        }
        Ok(Some(g[num] / g[den]))
    }
}

const RATIOS: [Ratio; 3] = [Ratio::A, Ratio::B, Ratio::C];

pub fn check_conditions(
    eq: &QuadEquation,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<LinearizabilityReport, LinearizeError> {
    if n_samples < MIN_SAMPLES {
        return Err(LinearizeError::TooFewSamples(n_samples));
    }
    let [lo, hi] = eq.sample_box();
    let spread_values: Vec<f64> = (0..SPREAD_POINTS)
        .map(|k| lo + (hi - lo) * k as f64 / (SPREAD_POINTS - 1) as f64)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratios: [Vec<f64>; 3] = Default::default();
    let mut spreads = [0.0f64; 3];
    let mut vanishing = 0;

    'samples: for _ in 0..n_samples {
        let [x, y, _] = eq.sample_point(&mut rng);
        let mut here = [0.0; 3];
        let mut local_spread = [0.0; 3];
        for (k, ratio) in RATIOS.into_iter().enumerate() {
            let Some(value) = ratio.eval(eq, x, y)? else {
                vanishing += 1;
                continue 'samples;
            };
            here[k] = value;
            let mut along = Vec::with_capacity(SPREAD_POINTS);
            for &t in &spread_values {
                match ratio.eval(eq, x, t)? {
                    Some(v) => along.push(v),
                    None => {
                        vanishing += 1;
                        continue 'samples;
                    }
                }
            }
            local_spread[k] = max_pairwise_spread(&along);
        }
        for k in 0..3 {
            ratios[k].push(here[k]);
            spreads[k] = spreads[k].max(local_spread[k]);
        }
    }

    if vanishing as f64 > MAX_VANISHING_FRACTION * n_samples as f64 {
        return Err(LinearizeError::DegenerateDerivative { vanishing, samples: n_samples });
    }

    let [a, b, c] = [median(&ratios[0]), median(&ratios[1]), median(&ratios[2])];
    let residuals = [
        max_deviation_from_median(&ratios[0]),
        max_deviation_from_median(&ratios[1]),
        max_deviation_from_median(&ratios[2]),
        spreads[0],
        spreads[1],
        spreads[2],
    ];
    let consistency = (a - b * c).abs();
    let failing_condition = residuals
        .iter()
        .position(|r| !(*r <= tol))
        .map(|i| i + 1)
        .or_else(|| (!(consistency <= tol * (1.0 + a.abs()))).then_some(7));
    Ok(LinearizabilityReport {
        passed: failing_condition.is_none(),
        a,
        b,
        c,
        residuals,
        consistency,
        failing_condition,
        samples_used: ratios[0].len(),
        tol,
    })
}

/// `F = coef_u00 u00 + coef_u10 u10 + coef_u01 u01 + intercept`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineCoefficients {
    pub coef_u00: f64,
    pub coef_u10: f64,
    pub coef_u01: f64,
    pub intercept: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Affinity {
    Affine(AffineCoefficients),
    NonAffine,
}

impl Report for Affinity {
    fn to_json(&self) -> Value {
        match self {
            Affinity::Affine(c) => json!({
                "affine": true,
                "coef_u00": float_value(c.coef_u00),
                "coef_u10": float_value(c.coef_u10),
                "coef_u01": float_value(c.coef_u01),
                "intercept": float_value(c.intercept),
            }),
            Affinity::NonAffine => json!({"affine": false}),
        }
    }
}

/// Affine iff all pure and mixed second differences (step 1e-3) at 200 sampled
/// points stay within `tol * (1 + |F|)`.
pub fn detect_affine_linear(eq: &QuadEquation, tol: f64) -> Result<Affinity, LinearizeError> {
    let f = |p: [f64; 3]| eq.eval_guarded(p).map_err(|source| LinearizeError::Domain { point: p, source });
    let shifted = |p: [f64; 3], moves: &[(usize, f64)]| {
        let mut q = p;
        for &(i, d) in moves {
            q[i] += d;
        }
        q
    };
    let h = AFFINE_STEP;
    let mut rng = ChaCha8Rng::seed_from_u64(AFFINE_SEED);
    for _ in 0..AFFINE_SAMPLES {
        let p = eq.sample_point(&mut rng);
        let f0 = f(p)?;
        let bound = tol * (1.0 + f0.abs());
        for i in 0..3 {
            let second = f(shifted(p, &[(i, h)]))? - 2.0 * f0 + f(shifted(p, &[(i, -h)]))?;
            if second.abs() > bound {
                return Ok(Affinity::NonAffine);
            }
            for j in i + 1..3 {
                let mixed = f(shifted(p, &[(i, h), (j, h)]))? - f(shifted(p, &[(i, h), (j, -h)]))?
                    - f(shifted(p, &[(i, -h), (j, h)]))?
                    + f(shifted(p, &[(i, -h), (j, -h)]))?;
                if mixed.abs() > bound {
                    return Ok(Affinity::NonAffine);
                }
            }
        }
    }
    let x0 = eq.midpoint();
    let base = [x0; 3];
    let mut coef = [0.0; 3];
    for (i, c) in coef.iter_mut().enumerate() {
        *c = 0.5 * (f(shifted(base, &[(i, 1.0)]))? - f(shifted(base, &[(i, -1.0)]))?);
    }
    let intercept = f(base)? - coef.iter().map(|c| c * x0).sum::<f64>();
    Ok(Affinity::Affine(AffineCoefficients {
        coef_u00: coef[0],
        coef_u10: coef[1],
        coef_u01: coef[2],
        intercept,
    }))
}
