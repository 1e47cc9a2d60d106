//! Discrete Burgers family, its Cole–Hopf linearization and the Möbius map to
//! the Hietarinta equation.
//!
//! Indices are `(n, m)` with `n` along T1. The linear equation reads
//! `psi11 = psi00 - p psi10`, the Cole–Hopf map is `u(n, m) = psi(n, m+1) / psi(n, m)`
//! and the classical Burgers equation `u10 (p + u11) - u00 (p + u10) = 0` is the
//! member `kappa0 = -p, kappa1 = 1, kappa2 = 0` of
//! `(k0 - u10)(k2 u01 + k1) u00 - (k0 - u11)(k2 u00 + k1) u10 = 0`.

use num_traits::{Float, Num};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::lattice::{Grid, InitialData, LatticeError, PlaquetteError, Provenance};
use crate::report::{float_value, Report};

/// Smallest `|psi|` allowed in a ratio.
pub const PSI_GUARD: f64 = 1e-12;
/// Smallest denominator allowed in the Möbius map and the potential.
pub const POLE_GUARD: f64 = 1e-12;

/// Initial data for generated solutions.
pub const SOLUTION_DATA: InitialData = InitialData::LogUniform { lo: 0.5, hi: 2.0 };

#[derive(Debug, Error, PartialEq)]
pub enum ColeHopfError {
    #[error("division by (near) zero at cell ({n}, {m})")]
    ZeroDivision { n: usize, m: usize },
    #[error("pole of the Möbius map at cell ({n}, {m})")]
    Pole { n: usize, m: usize },
    #[error("degenerate parameters: {0}")]
    DegenerateParams(&'static str),
    #[error("invalid family: {0}")]
    InvalidFamily(&'static str),
    #[error("cell ({0}, {1}) has no value")]
    MissingCell(usize, usize),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

fn lift(e: PlaquetteError<ColeHopfError>) -> ColeHopfError {
    match e {
        PlaquetteError::Missing(n, m) => ColeHopfError::MissingCell(n, m),
        PlaquetteError::Eval(_, _, e) => e,
    }
}

fn cst<T: Float>(x: f64) -> T {
    T::from(x).expect("constant representable")
}

/// `|sum(lhs) - sum(rhs)| / sum of all |terms|`, or 0 when every term vanishes.
fn balance<T: Float>(lhs: &[T], rhs: &[T]) -> T {
    let sum = |v: &[T]| v.iter().fold(T::zero(), |a, t| a + *t);
    let scale = lhs.iter().chain(rhs).fold(T::zero(), |a, t| a + t.abs());
    if scale == T::zero() {
        T::zero()
    } else {
        (sum(lhs) - sum(rhs)).abs() / scale
    }
}

/// `(kappa0, kappa1, kappa2)` of the generalized Burgers family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BurgersFamily<T = f64> {
    pub kappa0: T,
    pub kappa1: T,
    pub kappa2: T,
}

impl<T: Num + Clone> BurgersFamily<T> {
    /// `kappa1` must be 0 or 1 and the three constants must not all vanish.
    pub fn new(kappa0: T, kappa1: T, kappa2: T) -> Result<Self, ColeHopfError> {
        if !(kappa1.is_zero() || kappa1.is_one()) {
            return Err(ColeHopfError::InvalidFamily("kappa1 must be 0 or 1"));
        }
        if kappa0.is_zero() && kappa1.is_zero() && kappa2.is_zero() {
            return Err(ColeHopfError::InvalidFamily("all kappas vanish"));
        }
        Ok(BurgersFamily { kappa0, kappa1, kappa2 })
    }

    /// The classical equation with parameter `p`: `kappa0 = -p, kappa1 = 1, kappa2 = 0`.
    pub fn classical(p: T) -> Self {
        BurgersFamily {
            kappa0: T::zero() - p,
            kappa1: T::one(),
            kappa2: T::zero(),
        }
    }
}

/// `psi11 = psi00 - p psi10` from staircase data.
pub fn evolve_linear_burgers<T: Float>(p: T, init: &Grid<T>) -> Grid<T> {
    init.evolve(|a, b, _| Ok::<_, ()>(*a - p * *b)).expect("linear evolution cannot fail")
}

/// `u(n, m) = psi(n, m+1) / psi(n, m)`; the result has one row fewer.
pub fn cole_hopf_map<T: Float>(psi: &Grid<T>) -> Result<Grid<T>, ColeHopfError> {
    if psi.m() == 0 {
        return Err(LatticeError::Dimension(psi.n(), 0).into());
    }
    let guard = cst::<T>(PSI_GUARD);
    let mut u = Grid::empty(psi.n(), psi.m() - 1);
    for m in 0..psi.m() {
        for n in 0..=psi.n() {
            let below = *psi.get(n, m).ok_or(ColeHopfError::MissingCell(n, m))?;
            let above = *psi.get(n, m + 1).ok_or(ColeHopfError::MissingCell(n, m + 1))?;
            if below.abs() <= guard {
                return Err(ColeHopfError::ZeroDivision { n, m });
            }
            u.set(n, m, above / below, Provenance::Computed);
        }
    }
    Ok(u)
}

/// Max over plaquettes of the normalized residual of `u10 (p + u11) - u00 (p + u10)`.
pub fn verify_g8<T: Float>(u: &Grid<T>, p: T) -> Result<T, ColeHopfError> {
    max_residual(u, |[u00, u10, _, u11]| {
        balance(&[p * u10, u10 * u11], &[p * u00, u00 * u10])
    })
}

/// Max over plaquettes of the normalized residual of the generalized family.
pub fn verify_burgers<T: Float>(u: &Grid<T>, family: &BurgersFamily<T>) -> Result<T, ColeHopfError> {
    let BurgersFamily { kappa0: k0, kappa1: k1, kappa2: k2 } = *family;
    max_residual(u, |[u00, u10, u01, u11]| {
        balance(
            &[k0 * k2 * u01 * u00, k0 * k1 * u00, -(k2 * u10 * u01 * u00), -(k1 * u10 * u00)],
            &[k0 * k2 * u00 * u10, k0 * k1 * u10, -(k2 * u11 * u00 * u10), -(k1 * u11 * u10)],
        )
    })
}

/// Max normalized residual of `(1 + u00) u10 - (1 + u01) u00`.
pub fn verify_canonical_form<T: Float>(u: &Grid<T>) -> Result<T, ColeHopfError> {
    max_residual(u, |[u00, u10, u01, _]| balance(&[u10, u00 * u10], &[u00, u01 * u00]))
}

fn max_residual<T: Float>(u: &Grid<T>, f: impl Fn([T; 4]) -> T) -> Result<T, ColeHopfError> {
    let worst = u
        .max_over_plaquettes(|q| Ok(f(q.map(|v| *v)).to_f64().unwrap_or(f64::NAN)))
        .map_err(lift)?;
    Ok(cst(worst))
}

/// Max mismatch of the potential `v` built around each plaquette from
/// `v(n, m) = v0` by `v10 = E1 v00`, `v01 = u v00`, `E1 = (k2 u00 + k1) / (k0 - u10)`.
///
/// The relative difference of the two path products is divided by their
/// summed rounding condition numbers, so a factor `k0 - u` close to
/// cancellation does not inflate the mismatch of an exact solution.
pub fn verify_potential_compatibility<T: Float>(
    u: &Grid<T>,
    family: &BurgersFamily<T>,
    v0: T,
) -> Result<T, ColeHopfError> {
    if v0 == T::zero() {
        return Err(ColeHopfError::DegenerateParams("v0 must be nonzero"));
    }
    let BurgersFamily { kappa0: k0, kappa1: k1, kappa2: k2 } = *family;
    let guard = cst::<T>(POLE_GUARD);
    let mut worst = T::zero();
    for m in 0..u.m() {
        for n in 0..u.n() {
            let cell = |a: usize, b: usize| u.get(a, b).copied().ok_or(ColeHopfError::MissingCell(a, b));
            let (u00, u10, u01, u11) = (cell(n, m)?, cell(n + 1, m)?, cell(n, m + 1)?, cell(n + 1, m + 1)?);
            if (k0 - u10).abs() <= guard {
                return Err(ColeHopfError::ZeroDivision { n: n + 1, m });
            }
            if (k0 - u11).abs() <= guard {
                return Err(ColeHopfError::ZeroDivision { n: n + 1, m: m + 1 });
            }
            let e1_00 = (k2 * u00 + k1) / (k0 - u10);
            let e1_01 = (k2 * u01 + k1) / (k0 - u11);
            let via_t2 = v0 * u00 * e1_01;
            let via_t1 = v0 * e1_00 * u10;
            let scale = via_t1.abs().max(via_t2.abs());
            if scale > T::zero() {
                let cond = |x: T, y: T| {
                    let num = k2 * x + k1;
                    let num_cond = if num == T::zero() { T::one() } else { ((k2 * x).abs() + k1.abs()) / num.abs() };
                    T::one() + num_cond + (k0.abs() + y.abs()) / (k0 - y).abs()
                };
                let mismatch = (via_t1 - via_t2).abs() / scale / (cond(u01, u11) + cond(u00, u10));
                worst = worst.max(mismatch);
            }
        }
    }
    Ok(worst)
}

/// Seeded solution of the linear equation (log-uniform staircase in `[0.5, 2]`)
/// and its Cole–Hopf image on an `n x m` grid.
pub fn burgers_solution(p: f64, n: usize, m: usize, seed: u64) -> Result<(Grid, Grid), ColeHopfError> {
    let init = Grid::random_staircase(n, m + 1, seed, SOLUTION_DATA)?;
    let psi = evolve_linear_burgers(p, &init);
    let u = cole_hopf_map(&psi)?;
    Ok((psi, u))
}

/// Seeded solution of the canonical relation: `u(n, m) = w(n, m+1) / w(n, m)`
/// with `w(n+1, m) = w(n, m) + w(n, m+1)` generated from a column of length `n + m + 2`.
pub fn canonical_solution(n: usize, m: usize, seed: u64) -> Result<Grid, ColeHopfError> {
    if n == 0 || m == 0 {
        return Err(LatticeError::Dimension(n, m).into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let height = m + 1 + n;
    let mut column: Vec<f64> = (0..=height).map(|_| SOLUTION_DATA.sample(&mut rng)).collect();
    let mut w = Grid::empty(n, m + 1);
    for i in 0..=n {
        for j in 0..=m + 1 {
            w.set(i, j, column[j], Provenance::Computed);
        }
        column = column.windows(2).map(|p| p[0] + p[1]).collect();
    }
    cole_hopf_map(&w)
}

/// Seeded solution of the generalized family, evolved from a log-uniform
/// staircase by `u11 = k0 - (k0 - u10)(k2 u01 + k1) u00 / ((k2 u00 + k1) u10)`.
pub fn family_solution(family: &BurgersFamily, n: usize, m: usize, seed: u64) -> Result<Grid, ColeHopfError> {
    let BurgersFamily { kappa0: k0, kappa1: k1, kappa2: k2 } = *family;
    let init = Grid::random_staircase(n, m, seed, SOLUTION_DATA)?;
    init.evolve(|u00, u10, u01| {
        let den = (k2 * u00 + k1) * u10;
        let v = k0 - (k0 - u10) * (k2 * u01 + k1) * u00 / den;
        if den.abs() <= POLE_GUARD || !v.is_finite() {
            Err(())
        } else {
            Ok(v)
        }
    })
    .map_err(|(n, m, _)| ColeHopfError::ZeroDivision { n, m })
}

/// Seeded grid of independent log-uniform values; a negative control.
pub fn random_grid(n: usize, m: usize, seed: u64) -> Grid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Grid::from_fn(n, m, |_, _| SOLUTION_DATA.sample(&mut rng))
}

/// Parameters `(e1, e2, o1, o2)` of the Hietarinta equation
/// `(u00+e2)/(u00+e1) (u11+o2)/(u11+o1) = (u10+e2)/(u10+o1) (u01+o2)/(u01+e1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HietarintaParams<T = f64> {
    pub e1: T,
    pub e2: T,
    pub o1: T,
    pub o2: T,
}

impl<T: Num + Clone> HietarintaParams<T> {
    pub fn new(e1: T, e2: T, o1: T, o2: T) -> Result<Self, ColeHopfError> {
        if e1 == e2 {
            return Err(ColeHopfError::DegenerateParams("e1 = e2"));
        }
        if o1 == o2 {
            return Err(ColeHopfError::DegenerateParams("o1 = o2"));
        }
        if o1 == e2 {
            return Err(ColeHopfError::DegenerateParams("o1 = e2"));
        }
        Ok(HietarintaParams { e1, e2, o1, o2 })
    }

    /// `(o1 - e2)(e1 - o2) / ((e1 - e2)(o1 - o2))`.
    pub fn cross_ratio(&self) -> T {
        let HietarintaParams { e1, e2, o1, o2 } = self.clone();
        (o1.clone() - e2.clone()) * (e1.clone() - o2.clone()) / ((e1 - e2) * (o1 - o2))
    }

    /// `kappa1 = 1` and `kappa2 = -cross_ratio / kappa0`.
    pub fn family(&self, kappa0: T) -> Result<BurgersFamily<T>, ColeHopfError> {
        if kappa0.is_zero() {
            return Err(ColeHopfError::DegenerateParams("kappa0 must be nonzero"));
        }
        let kappa2 = T::zero() - self.cross_ratio() / kappa0.clone();
        BurgersFamily::new(kappa0, T::one(), kappa2)
    }

    /// Prefactor `kappa0 (o1 - o2) / (o1 - e2)` of the Möbius map.
    pub fn prefactor(&self, kappa0: T) -> T {
        kappa0 * (self.o1.clone() - self.o2.clone()) / (self.o1.clone() - self.e2.clone())
    }

    /// `u = K (ut + e2) / (ut + o2)`.
    pub fn to_burgers(&self, kappa0: T, ut: T) -> Option<T> {
        let den = ut.clone() + self.o2.clone();
        if den.is_zero() {
            return None;
        }
        Some(self.prefactor(kappa0) * (ut + self.e2.clone()) / den)
    }

    /// `ut = (o2 u - K e2) / (K - u)`.
    pub fn from_burgers(&self, kappa0: T, u: T) -> Option<T> {
        let k = self.prefactor(kappa0);
        let den = k.clone() - u.clone();
        if den.is_zero() {
            return None;
        }
        Some((self.o2.clone() * u - k * self.e2.clone()) / den)
    }
}

impl<T: Float> HietarintaParams<T> {
    /// Solve the Hietarinta equation for `u11`.
    pub fn solve_u11(&self, u00: T, u10: T, u01: T) -> Option<T> {
        let HietarintaParams { e1, e2, o1, o2 } = *self;
        let ratio = (u10 + e2) / (u10 + o1) * (u01 + o2) / (u01 + e1) * (u00 + e1) / (u00 + e2);
        let v = (ratio * o1 - o2) / (T::one() - ratio);
        v.is_finite().then_some(v)
    }

    /// Max over plaquettes of `|L - R| / (|L| + |R|)`.
    pub fn residual(&self, ut: &Grid<T>) -> Result<T, ColeHopfError> {
        let HietarintaParams { e1, e2, o1, o2 } = *self;
        max_residual(ut, |[u00, u10, u01, u11]| {
            let lhs = (u00 + e2) * (u11 + o2) / ((u00 + e1) * (u11 + o1));
            let rhs = (u10 + e2) * (u01 + o2) / ((u10 + o1) * (u01 + e1));
            let scale = lhs.abs() + rhs.abs();
            if scale == T::zero() {
                T::zero()
            } else {
                (lhs - rhs).abs() / scale
            }
        })
    }

    /// Evolve the Hietarinta equation cell by cell from staircase data.
    pub fn evolve(&self, init: &Grid<T>) -> Result<Grid<T>, ColeHopfError> {
        init.evolve(|a, b, c| self.solve_u11(*a, *b, *c).ok_or(()))
            .map_err(|(n, m, _)| ColeHopfError::Pole { n, m })
    }
}

fn mobius_grid<T: Float>(
    grid: &Grid<T>,
    pole: impl Fn(T) -> T,
    f: impl Fn(T) -> Option<T>,
) -> Result<Grid<T>, ColeHopfError> {
    let guard = cst::<T>(POLE_GUARD);
    grid.map(|n, m, v| {
        if pole(*v).abs() <= guard {
            return Err(ColeHopfError::Pole { n, m });
        }
        f(*v).filter(|x| x.is_finite()).ok_or(ColeHopfError::Pole { n, m })
    })
}

/// Map a Hietarinta grid to the Burgers family with `kappa1 = 1`,
/// `kappa2 = -cross_ratio / kappa0`.
pub fn hietarinta_transform<T: Float>(
    params: &HietarintaParams<T>,
    kappa0: T,
    ut: &Grid<T>,
) -> Result<(Grid<T>, BurgersFamily<T>), ColeHopfError> {
    let family = params.family(kappa0)?;
    let guard = cst::<T>(POLE_GUARD);
    let e2 = params.e2;
    let u = mobius_grid(ut, |v| v + params.o2, |v| params.to_burgers(kappa0, v))?;
    if let Some((n, m, _)) = ut.cells().find(|(_, _, v)| v.is_some_and(|v| (*v + e2).abs() <= guard)) {
        return Err(ColeHopfError::Pole { n, m });
    }
    Ok((u, family))
}

/// Inverse of [`hietarinta_transform`].
pub fn inverse_hietarinta_transform<T: Float>(
    params: &HietarintaParams<T>,
    kappa0: T,
    u: &Grid<T>,
) -> Result<Grid<T>, ColeHopfError> {
    let k = params.prefactor(kappa0);
    mobius_grid(u, |v| k - v, |v| params.from_burgers(kappa0, v))
}

/// Outcome of a relation check, as printed by the CLI.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub family: &'static str,
    pub max_residual: f64,
    pub tol: f64,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.tol
    }
}

impl Report for Verdict {
    fn to_json(&self) -> Value {
        json!({
            "family": self.family,
            "max_residual": float_value(self.max_residual),
            "passed": self.passed(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn ones(n: usize, m: usize) -> Grid {
        Grid::staircase(vec![1.0; n + 1], vec![1.0; m + 1]).unwrap()
    }

    #[test]
    fn linear_recurrence() {
        let g = evolve_linear_burgers(1.0, &ones(1, 1));
        assert_eq!(g.at(1, 1), 0.0);
        let init = Grid::random_staircase(5, 5, 2, SOLUTION_DATA).unwrap();
        let g = evolve_linear_burgers(0.0, &init);
        for m in 1..=5 {
            for n in 1..=5 {
                assert_eq!(g.at(n, m), g.at(n - 1, m - 1));
            }
        }
    }

    #[test]
    fn ratio_map() {
        let psi = Grid::from_fn(4, 4, |_, m| 2f64.powi(m as i32));
        let u = cole_hopf_map(&psi).unwrap();
        assert_eq!((u.n(), u.m()), (4, 3));
        assert!(u.cells().all(|(_, _, v)| *v.unwrap() == 2.0));
        let psi = Grid::from_fn(2, 2, |n, m| if (n, m) == (1, 1) { 0.0 } else { 1.0 });
        assert_eq!(cole_hopf_map(&psi), Err(ColeHopfError::ZeroDivision { n: 1, m: 1 }));
    }

    #[test]
    fn cole_hopf_solves_burgers() {
        for p in [1.0, 0.5, -2.0] {
            let (_, u) = burgers_solution(p, 20, 20, 11).unwrap();
            assert!(verify_g8(&u, p).unwrap() <= 1e-10);
            assert!(verify_burgers(&u, &BurgersFamily::classical(p)).unwrap() <= 1e-10);
            assert!(verify_potential_compatibility(&u, &BurgersFamily::classical(p), 1.0).unwrap() <= 1e-10);
        }
        let noise = random_grid(20, 20, 11);
        assert!(verify_g8(&noise, 1.0).unwrap() > 1e-2);
    }

    #[test]
    fn constant_grids() {
        let c = Grid::from_fn(5, 5, |_, _| 0.7);
        let family = BurgersFamily::new(1.3, 1.0, -0.4).unwrap();
        assert_eq!(verify_burgers(&c, &family).unwrap(), 0.0);
        assert_eq!(verify_potential_compatibility(&c, &family, 2.0).unwrap(), 0.0);
        assert_eq!(verify_canonical_form(&Grid::from_fn(3, 3, |_, _| 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn canonical_form() {
        let u = canonical_solution(20, 20, 4).unwrap();
        assert!(verify_canonical_form(&u).unwrap() <= 1e-10);
        assert!(verify_canonical_form(&random_grid(20, 20, 4)).unwrap() > 1e-2);
    }

    #[test]
    fn family_validation() {
        assert!(BurgersFamily::new(1.0, 0.5, 0.0).is_err());
        assert!(BurgersFamily::new(0.0, 0.0, 0.0).is_err());
        assert_eq!(
            HietarintaParams::new(1.0, 1.0, 2.0, 3.0),
            Err(ColeHopfError::DegenerateParams("e1 = e2"))
        );
    }

    #[test]
    fn exact_cross_ratio() {
        let q = |x: i64| BigRational::from_integer(BigInt::from(x));
        let params = HietarintaParams::new(q(2), q(0), q(3), q(1)).unwrap();
        assert_eq!(params.cross_ratio(), BigRational::new(3.into(), 4.into()));
        for k0 in [q(1), q(-3), BigRational::new(2.into(), 7.into())] {
            let family = params.family(k0.clone()).unwrap();
            assert_eq!(family.kappa2 * k0, -params.cross_ratio());
        }
    }

    #[test]
    fn exact_mobius_round_trip() {
        let q = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        let params = HietarintaParams::new(q(2, 1), q(0, 1), q(3, 1), q(1, 1)).unwrap();
        let k0 = q(5, 3);
        for ut in [q(1, 2), q(7, 1), q(-9, 4)] {
            let u = params.to_burgers(k0.clone(), ut.clone()).unwrap();
            assert_eq!(params.from_burgers(k0.clone(), u).unwrap(), ut);
        }
    }

    #[test]
    fn hietarinta_maps_to_burgers() {
        let params = HietarintaParams::new(2.0, 0.0, 3.0, 1.0).unwrap();
        let init = Grid::random_staircase(10, 10, 5, SOLUTION_DATA).unwrap();
        let ut = params.evolve(&init).unwrap();
        assert!(params.residual(&ut).unwrap() <= 1e-12);
        let (u, family) = hietarinta_transform(&params, 1.5, &ut).unwrap();
        assert!((family.kappa2 * family.kappa0 + 0.75).abs() < 1e-15);
        assert!(verify_burgers(&u, &family).unwrap() <= 1e-8);
        let back = inverse_hietarinta_transform(&params, 1.5, &u).unwrap();
        assert!(back.max_abs_diff(&ut).unwrap() <= 1e-10 * ut.max_abs());

        let c = Grid::from_fn(4, 4, |_, _| 0.3);
        assert_eq!(params.residual(&c).unwrap(), 0.0);
        let (u, family) = hietarinta_transform(&params, 1.5, &c).unwrap();
        assert_eq!(verify_burgers(&u, &family).unwrap(), 0.0);
    }

    #[test]
    fn poles_are_reported() {
        let params = HietarintaParams::new(2.0, 0.0, 3.0, 1.0).unwrap();
        let g = Grid::from_fn(2, 2, |n, m| if (n, m) == (2, 1) { -1.0 } else { 0.5 });
        assert_eq!(hietarinta_transform(&params, 1.0, &g).unwrap_err(), ColeHopfError::Pole { n: 2, m: 1 });
    }
}
