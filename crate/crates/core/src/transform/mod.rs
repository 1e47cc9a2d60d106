//! Numerical point transformation `Psi` and its certification.

mod alpha;
mod fit;
mod quadrature;

pub use alpha::{recover_alpha, AlphaTable, MAX_KNOTS};
pub use fit::{fit_linear_model, LinearModel, CERTIFY_TOL};
pub use quadrature::{adaptive_simpson, build_psi, build_psi_with_tol, Psi, DEFAULT_TOL as QUADRATURE_TOL, MAX_SUBDIVISIONS};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::equation::QuadEquation;
use crate::expr::EvalError;
use crate::lattice::{evolve_quad, Grid, InitialData, LatticeError};
use crate::linearize::{check_conditions, LinearizabilityReport, LinearizeError};
use crate::report::{float_value, Report};

#[derive(Debug, Error, PartialEq)]
pub enum TransformError {
    #[error("equation did not pass the necessary conditions")]
    NotLinearizable,
    #[error("alpha changes sign near x = {x}")]
    SignChange { x: f64 },
    #[error("F,u00 vanishes at x = {x}")]
    DegenerateDerivative { x: f64 },
    #[error("evaluation failed at x = {x}: {source}")]
    Domain { x: f64, source: EvalError },
    #[error("quadrature tolerance not reached on [{a}, {b}]")]
    QuadratureFailure { a: f64, b: f64 },
    #[error("x = {x} lies outside the transform domain")]
    OutOfDomain { x: f64 },
    #[error("at least 4 knots are required, got {0}")]
    InvalidKnots(usize),
    #[error("invalid domain [{lo}, {hi}] for reference point {x_ref}")]
    InvalidDomain { lo: f64, hi: f64, x_ref: f64 },
    #[error("design matrix is numerically rank deficient")]
    RankDeficient,
    #[error("only {got} of {wanted} samples map into the transform domain")]
    InsufficientSamples { got: usize, wanted: usize },
    #[error("fit residual {residual:e} exceeds certification tolerance {tol:e}")]
    CertificationFailure { residual: f64, tol: f64 },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Linearize(#[from] LinearizeError),
}

/// Staircase data used by the round trip: uniform in the sample box.
pub fn roundtrip_staircase(eq: &QuadEquation, n: usize, m: usize, seed: u64) -> Result<Grid, LatticeError> {
    let [lo, hi] = eq.sample_box();
    Grid::random_staircase(n, m, seed, InitialData::Uniform { lo, hi })
}

/// Evolve `eq` and the fitted affine equation from the same staircase and
/// compare in `Psi` coordinates.
///
/// The discrepancy at a cell is `|w1 - w2| / (1 + max(|w1|, |w2|))`; the
/// maximum over the grid is returned.
pub fn roundtrip_verify(
    eq: &QuadEquation,
    psi: &Psi,
    model: &LinearModel,
    n: usize,
    m: usize,
    seed: u64,
) -> Result<f64, TransformError> {
    let init = roundtrip_staircase(eq, n, m, seed)?;
    let u = evolve_quad(eq, &init)?;
    let mapped = u.map(|_, _, x| psi.eval(*x))?;
    let w_init = init.map(|_, _, x| psi.eval(*x))?;
    let linear = w_init
        .evolve(|a, b, c| Ok::<_, ()>(model.apply(*a, *b, *c)))
        .expect("affine evolution cannot fail");
    let mut worst = 0.0f64;
    for (i, j, w1) in mapped.cells() {
        let (w1, w2) = (*w1.unwrap(), *linear.get(i, j).unwrap());
        let d = (w1 - w2).abs() / (1.0 + w1.abs().max(w2.abs()));
        worst = if d.is_nan() { f64::NAN } else { worst.max(d) };
    }
    Ok(worst)
}

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    pub conditions_samples: usize,
    pub conditions_tol: f64,
    pub knots: usize,
    pub fit_samples: usize,
    pub certify_tol: f64,
    pub quadrature_tol: f64,
    /// Grid used by the round trip; its range is included in the transform domain.
    pub roundtrip: Option<(usize, usize)>,
    /// Build and fit even if the necessary conditions fail.
    pub force: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            conditions_samples: crate::linearize::DEFAULT_SAMPLES,
            conditions_tol: crate::linearize::DEFAULT_TOL,
            knots: 64,
            fit_samples: 400,
            certify_tol: CERTIFY_TOL,
            quadrature_tol: QUADRATURE_TOL,
            roundtrip: None,
            force: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Certification {
    pub report: LinearizabilityReport,
    /// `None` when the conditions failed and the run was not forced.
    pub transform: Option<(Psi, LinearModel)>,
    pub roundtrip: Option<f64>,
}

impl Certification {
    pub fn certified(&self) -> bool {
        self.transform.as_ref().is_some_and(|(_, model)| model.certified)
    }
}

impl Report for Certification {
    fn to_json(&self) -> Value {
        let mut out = json!({"conditions": self.report.to_json()});
        if let Some((psi, model)) = &self.transform {
            out["x_ref"] = float_value(psi.alpha().x_ref());
            out["knots"] = psi
                .alpha()
                .values()
                .map(|(x, a)| json!([float_value(x), float_value(a)]))
                .collect();
            out["model"] = model.to_json();
        }
        if let Some(d) = self.roundtrip {
            out["roundtrip"] = float_value(d);
        }
        out["certified"] = json!(self.certified());
        out
    }
}

/// Domain covering the box, `F` on box samples and, when a round trip is
/// planned, every value of the evolved grid.
pub fn transform_domain(
    eq: &QuadEquation,
    seed: u64,
    samples: usize,
    roundtrip: Option<(usize, usize)>,
) -> Result<[f64; 2], TransformError> {
    let [mut lo, mut hi] = eq.sample_box();
    let mut include = |x: f64| {
        if x.is_finite() {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        if let Ok(f) = eq.eval_guarded(eq.sample_point(&mut rng)) {
            include(f);
        }
    }
    if let Some((n, m)) = roundtrip {
        let grid = evolve_quad(eq, &roundtrip_staircase(eq, n, m, seed)?)?;
        for (_, _, v) in grid.cells() {
            include(*v.unwrap());
        }
    }
    Ok([lo, hi])
}

/// Necessary conditions, transform, fit and optional round trip.
pub fn certify(eq: &QuadEquation, seed: u64, options: &CertifyOptions) -> Result<Certification, TransformError> {
    let report = check_conditions(eq, options.conditions_samples, seed, options.conditions_tol)?;
    if !report.passed && !options.force {
        return Ok(Certification { report, transform: None, roundtrip: None });
    }
    let domain = transform_domain(eq, seed, 4 * options.fit_samples, options.roundtrip)?;
    let mid = eq.midpoint();
    let alpha = AlphaTable::build(eq, domain, options.knots, mid, (mid, mid))?;
    let psi = build_psi_with_tol(&alpha, options.quadrature_tol)?;
    let model = fit_linear_model(eq, &psi, options.fit_samples, seed, options.certify_tol)?;
    let roundtrip = match options.roundtrip {
        Some((n, m)) if model.certified => Some(roundtrip_verify(eq, &psi, &model, n, m, seed)?),
        _ => None,
    };
    Ok(Certification { report, transform: Some((psi, model)), roundtrip })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(text: &str, roundtrip: Option<(usize, usize)>) -> Certification {
        let eq = QuadEquation::parse(text).unwrap();
        certify(&eq, 7, &CertifyOptions { roundtrip, ..Default::default() }).unwrap()
    }

    #[test]
    fn linear_equation_fit() {
        let c = run("u00 + u10 + u01", Some((10, 10)));
        let (_, m) = c.transform.unwrap();
        assert!(m.certified && m.residual <= 1e-12);
        for (got, want) in [(m.p, 1.0), (m.q, 1.0), (m.r, 1.0), (m.s, 2.0 * 0.95)] {
            assert!((got - want).abs() < 1e-10, "{m:?}");
        }
        assert!(c.roundtrip.unwrap() <= 1e-12);
    }

    #[test]
    fn exp_family_fit() {
        let c = run("log(2*exp(u00) + exp(u10) + 3*exp(u01))", Some((30, 30)));
        let (psi, m) = c.transform.as_ref().unwrap();
        assert!(m.residual <= 1e-8, "{m:?}");
        assert!((m.p / m.q - 2.0).abs() < 1e-6 && (m.r / m.q - 3.0).abs() < 1e-6);
        assert!((m.s - 5.0).abs() < 1e-6);
        assert!(c.roundtrip.unwrap() <= 1e-6);
        assert!(psi.monotone());
    }

    #[test]
    fn harmonic_roundtrip() {
        let c = run("1/(1/u00 + 1/u10 + 1/u01)", Some((20, 20)));
        assert!(c.certified());
        assert!(c.roundtrip.unwrap() <= 1e-6, "{:?}", c.roundtrip);
    }

    #[test]
    fn non_linearizable_is_not_certified() {
        let c = run("u00 + u10*u01", None);
        assert!(c.transform.is_none());
        let eq = QuadEquation::parse("u00 + u10*u01").unwrap();
        let forced = certify(&eq, 7, &CertifyOptions { force: true, ..Default::default() }).unwrap();
        let (_, m) = forced.transform.unwrap();
        assert!(m.residual > 1e-2, "{m:?}");
        assert!(matches!(m.require_certified(), Err(TransformError::CertificationFailure { .. })));
    }
}
