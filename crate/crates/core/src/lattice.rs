//! Rectangular lattice grids, staircase initial data and quad evolution.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

use crate::equation::QuadEquation;
use crate::expr::{EvalError, Expression};
use crate::report::format_float;

#[derive(Debug, Error, PartialEq)]
pub enum LatticeError {
    #[error("grid dimensions must be at least 1x1, got {0}x{1}")]
    Dimension(usize, usize),
    #[error("corner mismatch: row starts with {row}, column starts with {col}")]
    Conflict { row: String, col: String },
    #[error("evaluation failed at cell ({n}, {m}): {source}")]
    Domain { n: usize, m: usize, source: EvalError },
    #[error("cell ({0}, {1}) has no value")]
    MissingCell(usize, usize),
    #[error("grids have different shapes")]
    ShapeMismatch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Unset,
    Initial,
    Computed,
}

/// Values `u[n][m]` for `0 <= n <= N`, `0 <= m <= M`; `n` runs along T1.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T = f64> {
    n: usize,
    m: usize,
    values: Vec<Option<T>>,
    provenance: Vec<Provenance>,
}

/// Distribution of seeded staircase values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialData {
    Uniform { lo: f64, hi: f64 },
    LogUniform { lo: f64, hi: f64 },
}

impl InitialData {
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            InitialData::Uniform { lo, hi } => rng.gen_range(lo..hi),
            InitialData::LogUniform { lo, hi } => rng.gen_range(lo.ln()..hi.ln()).exp(),
        }
    }
}

impl<T> Grid<T> {
    /// Empty grid with `(n + 1) x (m + 1)` cells.
    pub fn empty(n: usize, m: usize) -> Self {
        let len = (n + 1) * (m + 1);
        Grid {
            n,
            m,
            values: (0..len).map(|_| None).collect(),
            provenance: vec![Provenance::Unset; len],
        }
    }

    /// Fully computed grid from a cell function.
    pub fn from_fn(n: usize, m: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut grid = Grid::empty(n, m);
        for j in 0..=m {
            for i in 0..=n {
                grid.set(i, j, f(i, j), Provenance::Computed);
            }
        }
        grid
    }

    /// Largest `n` index.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Largest `m` index.
    pub fn m(&self) -> usize {
        self.m
    }

    fn index(&self, n: usize, m: usize) -> usize {
        assert!(n <= self.n && m <= self.m, "cell ({n}, {m}) outside {}x{} grid", self.n, self.m);
        m * (self.n + 1) + n
    }

    pub fn get(&self, n: usize, m: usize) -> Option<&T> {
        self.values[self.index(n, m)].as_ref()
    }

    pub fn provenance(&self, n: usize, m: usize) -> Provenance {
        self.provenance[self.index(n, m)]
    }

    pub fn set(&mut self, n: usize, m: usize, value: T, provenance: Provenance) {
        let i = self.index(n, m);
        self.values[i] = Some(value);
        self.provenance[i] = provenance;
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, Option<&T>)> {
        let width = self.n + 1;
        self.values.iter().enumerate().map(move |(i, v)| (i % width, i / width, v.as_ref()))
    }

    /// Apply `f` to every set cell, keeping provenance.
    pub fn map<U, E>(&self, mut f: impl FnMut(usize, usize, &T) -> Result<U, E>) -> Result<Grid<U>, E> {
        let mut out = Grid::empty(self.n, self.m);
        for (i, j, v) in self.cells() {
            if let Some(v) = v {
                out.set(i, j, f(i, j, v)?, self.provenance(i, j));
            }
        }
        Ok(out)
    }

    /// Copy of the cells with `n0 <= n`, `m0 <= m`, re-indexed from the origin.
    pub fn subgrid(&self, n0: usize, m0: usize) -> Grid<T>
    where
        T: Clone,
    {
        let mut out = Grid::empty(self.n - n0, self.m - m0);
        for j in m0..=self.m {
            for i in n0..=self.n {
                if let Some(v) = self.get(i, j) {
                    out.set(i - n0, j - m0, v.clone(), self.provenance(i, j));
                }
            }
        }
        out
    }

    /// The staircase part of this grid (row 0 and column 0) as initial data.
    pub fn staircase_of(&self) -> Grid<T>
    where
        T: Clone,
    {
        let mut out = Grid::empty(self.n, self.m);
        for (i, j, v) in self.cells() {
            if (i == 0 || j == 0) && v.is_some() {
                out.set(i, j, v.unwrap().clone(), Provenance::Initial);
            }
        }
        out
    }

    /// Staircase from explicit lists: `row[n] = u(n, 0)`, `col[m] = u(0, m)`.
    pub fn staircase(row: Vec<T>, col: Vec<T>) -> Result<Self, LatticeError>
    where
        T: PartialEq + std::fmt::Debug,
    {
        if row.len() < 2 || col.len() < 2 {
            return Err(LatticeError::Dimension(row.len().saturating_sub(1), col.len().saturating_sub(1)));
        }
        if row[0] != col[0] {
            return Err(LatticeError::Conflict {
                row: format!("{:?}", row[0]),
                col: format!("{:?}", col[0]),
            });
        }
        let mut grid = Grid::empty(row.len() - 1, col.len() - 1);
        for (j, v) in col.into_iter().enumerate().skip(1) {
            grid.set(0, j, v, Provenance::Initial);
        }
        for (i, v) in row.into_iter().enumerate() {
            grid.set(i, 0, v, Provenance::Initial);
        }
        Ok(grid)
    }

    /// Fill every cell with `n, m >= 1` from its three lower-left neighbours,
    /// one anti-diagonal at a time.
    pub fn evolve<E>(&self, mut f: impl FnMut(&T, &T, &T) -> Result<T, E>) -> Result<Grid<T>, (usize, usize, E)>
    where
        T: Clone,
    {
        let mut grid = self.clone();
        for d in 2..=(self.n + self.m) {
            let lo = d.saturating_sub(self.m).max(1);
            let hi = (d - 1).min(self.n);
            for i in lo..=hi {
                let j = d - i;
                let v = {
                    let u00 = grid.get(i - 1, j - 1);
                    let u10 = grid.get(i, j - 1);
                    let u01 = grid.get(i - 1, j);
                    match (u00, u10, u01) {
                        (Some(a), Some(b), Some(c)) => f(a, b, c).map_err(|e| (i, j, e))?,
                        _ => panic!("evolve requires row 0 and column 0 to be set"),
                    }
                };
                grid.set(i, j, v, Provenance::Computed);
            }
        }
        Ok(grid)
    }

    /// Max of `f` over all plaquettes `(u00, u10, u01, u11)`.
    pub fn max_over_plaquettes<E>(&self, mut f: impl FnMut([&T; 4]) -> Result<f64, E>) -> Result<f64, PlaquetteError<E>> {
        let mut worst = 0.0f64;
        for j in 0..self.m {
            for i in 0..self.n {
                let cell = |a: usize, b: usize| self.get(a, b).ok_or(PlaquetteError::Missing(a, b));
                let quad = [cell(i, j)?, cell(i + 1, j)?, cell(i, j + 1)?, cell(i + 1, j + 1)?];
                let r = f(quad).map_err(|e| PlaquetteError::Eval(i, j, e))?;
                worst = if r.is_nan() { f64::NAN } else { worst.max(r) };
            }
        }
        Ok(worst)
    }
}

#[derive(Debug, PartialEq)]
pub enum PlaquetteError<E> {
    Missing(usize, usize),
    Eval(usize, usize, E),
}

impl Grid<f64> {
    /// Seeded staircase; the same seed always gives the same cells.
    pub fn random_staircase(n: usize, m: usize, seed: u64, data: InitialData) -> Result<Self, LatticeError> {
        if n == 0 || m == 0 {
            return Err(LatticeError::Dimension(n, m));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let row: Vec<f64> = (0..=n).map(|_| data.sample(&mut rng)).collect();
        let mut col: Vec<f64> = (0..=m).map(|_| data.sample(&mut rng)).collect();
        col[0] = row[0];
        Grid::staircase(row, col)
    }

    /// Dense value at a cell; panics if unset.
    pub fn at(&self, n: usize, m: usize) -> f64 {
        *self.get(n, m).unwrap_or_else(|| panic!("cell ({n}, {m}) unset"))
    }

    pub fn max_abs(&self) -> f64 {
        self.cells().filter_map(|(_, _, v)| v).fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Max of `|a - b|` over cells set in both grids.
    pub fn max_abs_diff(&self, other: &Grid<f64>) -> Result<f64, LatticeError> {
        if self.n != other.n || self.m != other.m {
            return Err(LatticeError::ShapeMismatch);
        }
        let mut worst = 0.0f64;
        for (i, j, v) in self.cells() {
            match (v, other.get(i, j)) {
                (Some(a), Some(b)) => worst = worst.max((a - b).abs()),
                (None, None) => {}
                _ => return Err(LatticeError::MissingCell(i, j)),
            }
        }
        Ok(worst)
    }

    /// Header `n,m,value`, rows in row-major order (m outer, n inner).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,m,value\n");
        for (i, j, v) in self.cells() {
            let v = v.map(|v| format_float(*v)).unwrap_or_default();
            let _ = writeln!(out, "{i},{j},{v}");
        }
        out
    }

    /// `{"n": N, "m": M, "values": [[u(0,0), u(1,0), ...], ...]}` with `null` for unset cells.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = (0..=self.m)
            .map(|j| {
                (0..=self.n)
                    .map(|i| match self.get(i, j) {
                        Some(v) => crate::report::float_value(*v),
                        None => serde_json::Value::Null,
                    })
                    .collect()
            })
            .collect();
        json!({"n": self.n, "m": self.m, "values": rows})
    }
}

/// Evolve `u11 = F(u00, u10, u01)` from staircase data.
pub fn evolve_quad(eq: &QuadEquation, init: &Grid<f64>) -> Result<Grid<f64>, LatticeError> {
    init.evolve(|a, b, c| eq.eval([*a, *b, *c]))
        .map_err(|(n, m, source)| LatticeError::Domain { n, m, source })
}

/// Max over plaquettes of `|relation(u00, u10, u01, u11)|`.
pub fn residual(relation: &Expression, grid: &Grid<f64>) -> Result<f64, LatticeError> {
    grid.max_over_plaquettes(|[a, b, c, d]| relation.eval(&[*a, *b, *c, *d], 0.0).map(f64::abs))
        .map_err(|e| match e {
            PlaquetteError::Missing(n, m) => LatticeError::MissingCell(n, m),
            PlaquetteError::Eval(n, m, source) => LatticeError::Domain { n, m, source },
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_relation, Params};

    fn ones(n: usize) -> Grid<f64> {
        Grid::staircase(vec![1.0; n + 1], vec![1.0; n + 1]).unwrap()
    }

    #[test]
    fn staircase_shapes() {
        let g = ones(2);
        let initial = g.cells().filter(|c| c.2.is_some()).count();
        assert_eq!(initial, 5);
        assert!(g.cells().flat_map(|c| c.2).all(|v| *v == 1.0));
        assert_eq!(g.provenance(1, 0), Provenance::Initial);
        assert_eq!(g.provenance(1, 1), Provenance::Unset);
        let err = Grid::staircase(vec![1.0, 2.0], vec![9.0, 3.0]).unwrap_err();
        assert!(matches!(err, LatticeError::Conflict { .. }));
        assert_eq!(Grid::random_staircase(0, 3, 1, InitialData::Uniform { lo: 0.0, hi: 1.0 }), Err(LatticeError::Dimension(0, 3)));
    }

    #[test]
    fn seeded_staircase_is_deterministic() {
        let d = InitialData::LogUniform { lo: 0.5, hi: 2.0 };
        let a = Grid::random_staircase(3, 3, 42, d).unwrap();
        assert_eq!(a, Grid::random_staircase(3, 3, 42, d).unwrap());
        assert_ne!(a, Grid::random_staircase(3, 3, 43, d).unwrap());
        assert!(a.cells().flat_map(|c| c.2).all(|v| (0.5..2.0).contains(v)));
    }

    #[test]
    fn evolve_examples() {
        let sum = QuadEquation::parse("u00 + u10 + u01").unwrap();
        assert_eq!(evolve_quad(&sum, &ones(1)).unwrap().at(1, 1), 3.0);

        let shift = QuadEquation::parse("u00").unwrap();
        let init = Grid::random_staircase(4, 3, 5, InitialData::Uniform { lo: 0.0, hi: 1.0 }).unwrap();
        let g = evolve_quad(&shift, &init).unwrap();
        for j in 1..=3 {
            for i in 1..=4 {
                assert_eq!(g.at(i, j), g.at(i - 1, j - 1));
                assert_eq!(g.provenance(i, j), Provenance::Computed);
            }
        }

        // hand iteration: 1/3 on the first diagonal, then 1/(3 + 3 + 1) etc.
        let harmonic = QuadEquation::parse("1/(1/u00 + 1/u10 + 1/u01)").unwrap();
        let g = evolve_quad(&harmonic, &ones(3)).unwrap();
        let w = |i, j| 1.0 / g.at(i, j);
        assert!((g.at(1, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((w(2, 1) - 5.0).abs() < 1e-12);
        assert!((w(2, 2) - 13.0).abs() < 1e-12);
        assert!((w(3, 3) - 63.0).abs() < 1e-12);
    }

    #[test]
    fn evolve_reports_failing_cell() {
        let eq = QuadEquation::parse("1/(u00 - u10)").unwrap();
        let err = evolve_quad(&eq, &ones(2)).unwrap_err();
        assert!(matches!(err, LatticeError::Domain { n: 1, m: 1, .. }));
    }

    #[test]
    fn residual_examples() {
        let eq = QuadEquation::parse("u00 + u10 + u01").unwrap();
        let init = Grid::random_staircase(6, 6, 1, InitialData::Uniform { lo: 0.0, hi: 1.0 }).unwrap();
        let g = evolve_quad(&eq, &init).unwrap();
        let rel = parse_relation("u11 - u00 - u10 - u01", &Params::new()).unwrap();
        assert!(residual(&rel, &g).unwrap() <= 1e-12 * g.max_abs());

        let plus_one = QuadEquation::parse("u00 + 1").unwrap();
        let g = evolve_quad(&plus_one, &ones(6)).unwrap();
        let rel = parse_relation("u11 - u00", &Params::new()).unwrap();
        assert_eq!(residual(&rel, &g).unwrap(), 1.0);
        assert_eq!(residual(&rel, &ones(2)), Err(LatticeError::MissingCell(1, 1)));
    }

    #[test]
    fn exports() {
        let eq = QuadEquation::parse("u00 + u10 + u01").unwrap();
        let g = evolve_quad(&eq, &ones(1)).unwrap();
        assert_eq!(
            g.to_csv(),
            "n,m,value\n0,0,1.0000000000000000e+0\n1,0,1.0000000000000000e+0\n0,1,1.0000000000000000e+0\n1,1,3.0000000000000000e+0\n"
        );
        assert_eq!(g.to_json()["values"][1][1].to_string(), "3.0000000000000000e+0");
    }
}
