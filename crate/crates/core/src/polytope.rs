//! Discrete pmfs with a fixed support grid and a fixed mean.
//!
//! The set `D(Y, mu)` of pmfs supported on an ordered grid `Y` with mean
//! `mu` is a convex polytope. Its vertices are two-point pmfs on pairs of
//! grid points straddling `mu`, plus the point mass at `mu` when `mu` is
//! itself a grid point. Everything here works on the ascending grid; the
//! lattice module adapts the descending amplitude convention.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on sums and means for pmfs built inside the library.
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Tolerance for membership tests on externally supplied pmfs.
pub const MEMBERSHIP_TOL: f64 = 1e-10;
/// Minimum admissible gap between consecutive grid points.
pub const MIN_GRID_GAP: f64 = 1e-12;

/// Strictly increasing support grid `y_1 < ... < y_d`, `d >= 2`.
#[derive(Debug, Clone)]
pub struct SupportGrid {
    points: Arc<[f64]>,
}

impl SupportGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(bad) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite point {bad}")));
        }
        for w in points.windows(2) {
            if w[1] - w[0] < MIN_GRID_GAP {
                return Err(Error::InvalidGrid(format!(
                    "points must be strictly increasing with gap >= {MIN_GRID_GAP}: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self {
            points: points.into(),
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.points[0]
    }

    pub fn last(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Index of the grid point equal to `x` (within a relative `1e-12`), if any.
    pub fn position_of(&self, x: f64) -> Option<usize> {
        let tol = CONSTRUCTION_TOL * x.abs().max(1.0);
        self.points.iter().position(|&y| (y - x).abs() <= tol)
    }
}

impl PartialEq for SupportGrid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.points, &other.points) || self.points[..] == other.points[..]
    }
}

/// A probability mass function on a [`SupportGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    grid: SupportGrid,
    probs: Vec<f64>,
}

impl Pmf {
    /// Builds a pmf; probabilities must be nonnegative and sum to one within `1e-12`.
    pub fn new(grid: SupportGrid, probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(grid, probs, CONSTRUCTION_TOL)
    }

    /// Like [`Pmf::new`] but with the looser tolerance used for external input.
    pub fn from_external(grid: SupportGrid, probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(grid, probs, MEMBERSHIP_TOL)
    }

    fn with_tolerance(grid: SupportGrid, probs: Vec<f64>, tol: f64) -> Result<Self> {
        if probs.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: probs.len(),
            });
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidPmf(format!(
                "probabilities must be finite and nonnegative, found {p}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidPmf(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { grid, probs })
    }

    /// Point mass at grid index `j`.
    pub fn point_mass(grid: SupportGrid, j: usize) -> Result<Self> {
        if j >= grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: j + 1,
            });
        }
        let mut probs = vec![0.0; grid.len()];
        probs[j] = 1.0;
        Ok(Self { grid, probs })
    }

    pub fn uniform(grid: SupportGrid) -> Self {
        let d = grid.len();
        Self {
            probs: vec![1.0 / d as f64; d],
            grid,
        }
    }

    pub fn grid(&self) -> &SupportGrid {
        &self.grid
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.expectation(self.grid.points())
    }

    /// `E[phi(Y)]` with `phi` tabulated on the grid points.
    pub fn expectation(&self, phi: &[f64]) -> f64 {
        debug_assert_eq!(phi.len(), self.probs.len());
        self.probs.iter().zip(phi).map(|(p, f)| p * f).sum()
    }

    /// Indices carrying positive probability.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(j, _)| j)
    }

    pub fn has_full_support(&self) -> bool {
        self.probs.iter().all(|&p| p > 0.0)
    }

    pub fn same_support(&self, other: &Pmf) -> bool {
        self.grid == other.grid
            && self
                .probs
                .iter()
                .zip(&other.probs)
                .all(|(a, b)| (*a > 0.0) == (*b > 0.0))
    }

    /// JSON object `{"support": [...], "probs": [...]}` with 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{\"support\": [");
        write_numbers(&mut out, self.grid.points());
        out.push_str("], \"probs\": [");
        write_numbers(&mut out, &self.probs);
        out.push_str("]}");
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: PmfRecord = serde_json::from_str(text)?;
        let grid = SupportGrid::new(raw.support)?;
        Pmf::from_external(grid, raw.probs)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct PmfRecord {
    support: Vec<f64>,
    probs: Vec<f64>,
}

/// Formats a double with 17 significant digits (round-trip exact).
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_numbers(out: &mut String, xs: &[f64]) {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{}", format_f64(*x));
    }
}

/// Validated mean constraint `y_1 <= mu <= y_d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanConstraint(f64);

impl MeanConstraint {
    pub fn new(grid: &SupportGrid, mu: f64) -> Result<Self> {
        if !mu.is_finite() || mu < grid.first() || mu > grid.last() {
            return Err(Error::EmptyPolytope {
                mu,
                low: grid.first(),
                high: grid.last(),
            });
        }
        Ok(Self(mu))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A vertex of `D(Y, mu)`.
///
/// `pair = (j1, j2)` with `j1 < j2` for a two-point generator; the degenerate
/// point mass at `mu` uses `j1 == j2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub pair: (usize, usize),
    pub pmf: Pmf,
}

impl Generator {
    pub fn is_point_mass(&self) -> bool {
        self.pair.0 == self.pair.1
    }
}

/// The vertices of `D(Y, mu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    grid: SupportGrid,
    mu: f64,
    /// Two-point generators in lexicographic `(j1, j2)` order.
    pub generators: Vec<Generator>,
    /// Point mass at `mu` when `mu` is a grid point.
    pub degenerate: Option<Generator>,
}

impl GeneratorSet {
    pub fn grid(&self) -> &SupportGrid {
        &self.grid
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// All vertices: two-point generators first, then the degenerate point mass.
    pub fn vertices(&self) -> impl Iterator<Item = &Generator> + '_ {
        self.generators.iter().chain(self.degenerate.iter())
    }

    /// Number of vertices `n_D`.
    pub fn count(&self) -> usize {
        self.generators.len() + usize::from(self.degenerate.is_some())
    }

    pub fn find_pair(&self, pair: (usize, usize)) -> Option<&Generator> {
        self.vertices().find(|g| g.pair == pair)
    }

    /// `sum_i lambda_i Q_i` over [`GeneratorSet::vertices`].
    pub fn combine(&self, weights: &ConvexCombination) -> Result<Pmf> {
        if weights.len() != self.count() {
            return Err(Error::DimensionMismatch {
                expected: self.count(),
                got: weights.len(),
            });
        }
        let mut probs = vec![0.0; self.grid.len()];
        for (w, g) in weights.weights().iter().zip(self.vertices()) {
            for (acc, p) in probs.iter_mut().zip(g.pmf.probs()) {
                *acc += w * p;
            }
        }
        Pmf::new(self.grid.clone(), probs)
    }
}

/// Convex combination weights `lambda_i >= 0`, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexCombination(Vec<f64>);

impl ConvexCombination {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter(
                "convex weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::InvalidParameter(format!(
                "convex weights sum to {total}, expected 1"
            )));
        }
        Ok(Self(weights))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Result of optimising `E[phi(Y)]` over the polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationBounds {
    pub lower: f64,
    pub upper: f64,
    pub argmin: Generator,
    pub argmax: Generator,
}

/// Convex-order minimal and maximal elements of the polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexOrderExtremes {
    pub q_low: Generator,
    pub q_up: Generator,
}

/// The polytope `D(Y, mu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanPolytope {
    grid: SupportGrid,
    mu: MeanConstraint,
}

impl MeanPolytope {
    pub fn new(grid: SupportGrid, mu: f64) -> Result<Self> {
        let mu = MeanConstraint::new(&grid, mu)?;
        Ok(Self { grid, mu })
    }

    pub fn grid(&self) -> &SupportGrid {
        &self.grid
    }

    pub fn mu(&self) -> f64 {
        self.mu.value()
    }

    /// Closed-form vertex enumeration.
    ///
    /// For every pair `y_j1 < mu < y_j2` the generator puts
    /// `(y_j2 - mu) / (y_j2 - y_j1)` on `y_j1` and the rest on `y_j2`.
    pub fn enumerate_generators(&self) -> GeneratorSet {
        let y = self.grid.points();
        let mu = self.mu();
        let on_grid = self.grid.position_of(mu);
        let below = |j: usize| y[j] < mu && on_grid != Some(j);
        let above = |j: usize| y[j] > mu && on_grid != Some(j);

        let mut generators = Vec::new();
        for j1 in (0..y.len()).filter(|&j| below(j)) {
            for j2 in (j1 + 1..y.len()).filter(|&j| above(j)) {
                generators.push(Generator {
                    pair: (j1, j2),
                    pmf: self.two_point(j1, j2),
                });
            }
        }
        let degenerate = on_grid.map(|j| Generator {
            pair: (j, j),
            pmf: Pmf::point_mass(self.grid.clone(), j).expect("index within grid"),
        });
        GeneratorSet {
            grid: self.grid.clone(),
            mu,
            generators,
            degenerate,
        }
    }

    fn two_point(&self, j1: usize, j2: usize) -> Pmf {
        let y = self.grid.points();
        let q1 = (y[j2] - self.mu()) / (y[j2] - y[j1]);
        let mut probs = vec![0.0; y.len()];
        probs[j1] = q1;
        probs[j2] = 1.0 - q1;
        Pmf {
            grid: self.grid.clone(),
            probs,
        }
    }

    /// Membership in `D(Y, mu)` for an externally supplied pmf (tolerance `1e-10`).
    pub fn contains(&self, candidate: &Pmf) -> bool {
        if candidate.grid() != &self.grid {
            return false;
        }
        let probs = candidate.probs();
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MEMBERSHIP_TOL || probs.iter().any(|&p| p < 0.0) {
            return false;
        }
        let mu = self.mu();
        let drift: f64 = self
            .grid
            .points()
            .iter()
            .zip(probs)
            .map(|(y, p)| (y - mu) * p)
            .sum();
        drift.abs() <= MEMBERSHIP_TOL
    }

    /// Minimum and maximum of `E[phi(Y)]`, both attained at vertices.
    ///
    /// `phi` is tabulated on the grid points. Ties keep the first vertex in
    /// [`GeneratorSet::vertices`] order.
    pub fn expectation_bounds(&self, phi: &[f64]) -> Result<ExpectationBounds> {
        if phi.len() != self.grid.len() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.len(),
                got: phi.len(),
            });
        }
        let gens = self.enumerate_generators();
        let mut vertices = gens.vertices();
        let first = vertices.next().ok_or_else(|| Error::EmptyPolytope {
            mu: self.mu(),
            low: self.grid.first(),
            high: self.grid.last(),
        })?;
        let v0 = first.pmf.expectation(phi);
        let (mut lower, mut upper) = (v0, v0);
        let (mut argmin, mut argmax) = (first, first);
        for g in vertices {
            let v = g.pmf.expectation(phi);
            if v < lower {
                lower = v;
                argmin = g;
            }
            if v > upper {
                upper = v;
                argmax = g;
            }
        }
        Ok(ExpectationBounds {
            lower,
            upper,
            argmin: argmin.clone(),
            argmax: argmax.clone(),
        })
    }

    /// `q_low` sits on the two grid points bracketing `mu` (or is the point
    /// mass at `mu`); `q_up` sits on the extreme grid points.
    pub fn convex_order_extremes(&self) -> ConvexOrderExtremes {
        let y = self.grid.points();
        let d = y.len();
        let mu = self.mu();
        let point = |j: usize| Generator {
            pair: (j, j),
            pmf: Pmf::point_mass(self.grid.clone(), j).expect("index within grid"),
        };
        let pair = |j1: usize, j2: usize| Generator {
            pair: (j1, j2),
            pmf: self.two_point(j1, j2),
        };

        let q_low = match self.grid.position_of(mu) {
            Some(j) => point(j),
            None => {
                let upper = y.partition_point(|&v| v < mu);
                pair(upper - 1, upper)
            }
        };
        let q_up = match self.grid.position_of(mu) {
            Some(j) if j == 0 || j == d - 1 => point(j),
            _ => pair(0, d - 1),
        };
        ConvexOrderExtremes { q_low, q_up }
    }

    /// Spread `rho_U - rho_L` of `E[phi(Y)]` over a class of pmfs.
    ///
    /// With no subclass (or an empty one) the class is the whole polytope.
    pub fn model_risk(&self, phi: &[f64], subclass: Option<&[Pmf]>) -> Result<f64> {
        match subclass {
            Some(class) if !class.is_empty() => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for q in class {
                    if q.grid() != &self.grid {
                        return Err(Error::GridMismatch);
                    }
                    let v = q.expectation(phi);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                Ok((hi - lo).max(0.0))
            }
            _ => {
                let b = self.expectation_bounds(phi)?;
                Ok((b.upper - b.lower).max(0.0))
            }
        }
    }
}
