//! Least-squares fit of the linear model `Psi(F) = p Psi00 + q Psi10 + r Psi01 + s`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::equation::QuadEquation;
use crate::report::{float_value, Report};

use super::quadrature::Psi;
use super::TransformError;

pub const CERTIFY_TOL: f64 = 1e-6;
/// Attempts allowed per requested sample.
const OVERSAMPLING: usize = 10;
/// Diagonal entries of R below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearModel {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
    /// Max abs residual over `1 + max |Psi|` on the samples.
    pub residual: f64,
    pub tol: f64,
    pub certified: bool,
    pub samples: usize,
}

impl LinearModel {
    pub fn require_certified(&self) -> Result<&Self, TransformError> {
        if self.certified {
            Ok(self)
        } else {
            Err(TransformError::CertificationFailure { residual: self.residual, tol: self.tol })
        }
    }

    /// `p w00 + q w10 + r w01 + s`.
    pub fn apply(&self, w00: f64, w10: f64, w01: f64) -> f64 {
        self.p * w00 + self.q * w10 + self.r * w01 + self.s
    }
}

impl Report for LinearModel {
    fn to_json(&self) -> Value {
        json!({
            "p": float_value(self.p),
            "q": float_value(self.q),
            "r": float_value(self.r),
            "s": float_value(self.s),
            "residual": float_value(self.residual),
            "certified": self.certified,
        })
    }
}

/// Least squares via Householder QR on `n_samples` seeded points of the box.
///
/// Points whose image under `F` leaves the domain of `psi` (or where `F`
/// fails) are redrawn, up to ten attempts per sample.
pub fn fit_linear_model(
    eq: &QuadEquation,
    psi: &Psi,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<LinearModel, TransformError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<[f64; 4]> = Vec::with_capacity(n_samples);
    let mut target = Vec::with_capacity(n_samples);
    let mut attempts = 0;
    while rows.len() < n_samples {
        if attempts == OVERSAMPLING * n_samples {
            return Err(TransformError::InsufficientSamples { got: rows.len(), wanted: n_samples });
        }
        attempts += 1;
        let p = eq.sample_point(&mut rng);
        let Ok(f) = eq.eval_guarded(p) else { continue };
        let Ok(y) = psi.eval(f) else { continue };
        let row = [psi.eval(p[0])?, psi.eval(p[1])?, psi.eval(p[2])?, 1.0];
        rows.push(row);
        target.push(y);
    }

    let a = DMatrix::from_fn(rows.len(), 4, |i, j| rows[i][j]);
    let b = DVector::from_vec(target.clone());
    let qr = a.clone().qr();
    let r = qr.r();
    let diag_max = (0..4).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..4).any(|i| !(r[(i, i)].abs() > RANK_TOL * diag_max)) {
        return Err(TransformError::RankDeficient);
    }
    let qtb = qr.q().transpose() * &b;
    let coef = r.solve_upper_triangular(&qtb).ok_or(TransformError::RankDeficient)?;

    let fitted = &a * &coef;
    let max_resid = fitted.iter().zip(&target).map(|(f, y)| (f - y).abs()).fold(0.0, f64::max);
    let scale = rows
        .iter()
        .flat_map(|row| row[..3].iter())
        .chain(&target)
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let residual = max_resid / (1.0 + scale);
    Ok(LinearModel {
        p: coef[0],
        q: coef[1],
        r: coef[2],
        s: coef[3],
        residual,
        tol,
        certified: residual <= tol,
        samples: rows.len(),
    })
}
