//! Multinomial recombining lattices and their one-step risk-neutral polytope.
//!
//! From every node the price moves by one of `L` amplitudes
//! `a_l = u^(L-l) d^(l-1)`, `l = 1..L`, listed in descending order. The
//! polytope code works on ascending grids, so [`AmplitudeGrid`] is the single
//! place where lattice labels `l` are mapped to grid indices `j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::{GeneratorSet, MeanPolytope, Pmf, SupportGrid};
use crate::sampler::SampleBatch;

/// Parameters of an `L`-state recombining lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    /// Up factor `u`.
    pub u: f64,
    /// Down factor `d`, `0 < d < u`.
    pub d: f64,
    /// States per step.
    #[serde(rename = "L")]
    pub states: usize,
    /// Single-period risk-free rate.
    #[serde(rename = "R")]
    pub rate: f64,
    #[serde(rename = "S0")]
    pub spot: f64,
    /// Number of steps.
    #[serde(rename = "N")]
    pub steps: usize,
}

impl LatticeSpec {
    pub fn gross_rate(&self) -> f64 {
        1.0 + self.rate
    }

    /// Least-squares fit of `u`, `d` to descending log-amplitudes.
    ///
    /// Fails when the amplitudes are not geometric to within a relative `1e-3`.
    pub fn from_amplitudes(amplitudes: &[f64], rate: f64, spot: f64, steps: usize) -> Result<Self> {
        let l = amplitudes.len();
        if l < 2 {
            return Err(Error::InvalidFactors("need at least two amplitudes".into()));
        }
        if amplitudes.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::InvalidFactors("amplitudes must be positive".into()));
        }
        // ln a_l = (L-1) ln u - (l-1) (ln u - ln d)
        let xs: Vec<f64> = (0..l).map(|i| i as f64).collect();
        let ys: Vec<f64> = amplitudes.iter().map(|a| a.ln()).collect();
        let n = l as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        for (x, y) in xs.iter().zip(&ys) {
            let fit = intercept + slope * x;
            if (fit - y).abs() > 1e-3 {
                return Err(Error::InvalidFactors(format!(
                    "amplitudes are not geometric (log residual {:.2e})",
                    (fit - y).abs()
                )));
            }
        }
        let ln_u = intercept / (n - 1.0);
        let ln_d = ln_u + slope;
        Ok(Self {
            u: ln_u.exp(),
            d: ln_d.exp(),
            states: l,
            rate,
            spot,
            steps,
        })
    }

    fn validate(&self) -> Result<()> {
        if !(self.d > 0.0) || !(self.u > self.d) || !self.u.is_finite() {
            return Err(Error::InvalidFactors(format!(
                "need u > d > 0, got u = {}, d = {}",
                self.u, self.d
            )));
        }
        if self.states < 2 {
            return Err(Error::InvalidFactors(format!(
                "need at least 2 states, got {}",
                self.states
            )));
        }
        if self.steps < 1 {
            return Err(Error::InvalidParameter("need at least one step".into()));
        }
        if !(self.spot > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "initial price must be positive, got {}",
                self.spot
            )));
        }
        let exp = (self.states - 1) as i32;
        let (low, high) = (self.d.powi(exp), self.u.powi(exp));
        let g = self.gross_rate();
        if g < low || g > high {
            return Err(Error::ArbitrageViolation(format!(
                "d^(L-1) <= 1+R <= u^(L-1) fails: {low} <= {g} <= {high}"
            )));
        }
        if g == low || g == high {
            log::warn!("1+R = {g} sits on the no-arbitrage boundary; the risk-neutral polytope is a single point mass");
        }
        Ok(())
    }
}

/// Jump amplitudes in descending lattice order.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeGrid {
    descending: Vec<f64>,
    ascending: SupportGrid,
}

impl AmplitudeGrid {
    fn new(u: f64, d: f64, states: usize) -> Result<Self> {
        let descending: Vec<f64> = (0..states)
            .map(|i| u.powi((states - 1 - i) as i32) * d.powi(i as i32))
            .collect();
        let ascending = SupportGrid::new(descending.iter().rev().copied().collect())?;
        Ok(Self {
            descending,
            ascending,
        })
    }

    /// `a_1 > a_2 > ... > a_L`.
    pub fn descending(&self) -> &[f64] {
        &self.descending
    }

    /// The same amplitudes as an ascending support grid.
    pub fn ascending_grid(&self) -> &SupportGrid {
        &self.ascending
    }

    pub fn states(&self) -> usize {
        self.descending.len()
    }

    /// Lattice label `l` (1-based, descending) to grid index `j` (0-based, ascending).
    pub fn grid_index(&self, l: usize) -> usize {
        assert!((1..=self.states()).contains(&l), "lattice label out of range");
        self.states() - l
    }

    /// Grid index `j` (0-based, ascending) to lattice label `l` (1-based, descending).
    pub fn lattice_label(&self, j: usize) -> usize {
        assert!(j < self.states(), "grid index out of range");
        self.states() - j
    }

    /// Lattice pair `(l1, l2)`, `l1 < l2`, for a grid pair `(j1, j2)`, `j1 < j2`.
    pub fn lattice_pair(&self, pair: (usize, usize)) -> (usize, usize) {
        (self.lattice_label(pair.1), self.lattice_label(pair.0))
    }

    /// Grid pair `(j1, j2)` for a lattice pair `(l1, l2)`.
    pub fn grid_pair(&self, pair: (usize, usize)) -> (usize, usize) {
        (self.grid_index(pair.1), self.grid_index(pair.0))
    }

    /// Pmf on the ascending grid from probabilities listed in lattice order.
    pub fn pmf_from_descending(&self, probs: &[f64]) -> Result<Pmf> {
        if probs.len() != self.states() {
            return Err(Error::DimensionMismatch {
                expected: self.states(),
                got: probs.len(),
            });
        }
        Pmf::from_external(self.ascending.clone(), probs.iter().rev().copied().collect())
    }

    /// Probabilities of `pmf` listed in lattice order.
    pub fn descending_probs(&self, pmf: &Pmf) -> Vec<f64> {
        pmf.probs().iter().rev().copied().collect()
    }
}

/// Node prices `S_n^(k) = u^(n(L-1)-k) d^k S0`, `k = 0..n(L-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeGrid {
    prices: Vec<Vec<f64>>,
}

impl NodeGrid {
    fn new(spec: &LatticeSpec) -> Self {
        let spread = spec.states - 1;
        let prices = (0..=spec.steps)
            .map(|n| {
                let top = n * spread;
                (0..=top)
                    .map(|k| spec.u.powi((top - k) as i32) * spec.d.powi(k as i32) * spec.spot)
                    .collect()
            })
            .collect();
        Self { prices }
    }

    /// Prices at step `n`, strictly decreasing in `k`.
    pub fn step(&self, n: usize) -> &[f64] {
        &self.prices[n]
    }

    pub fn steps(&self) -> usize {
        self.prices.len() - 1
    }

    /// Child of node `(n, k)` reached with lattice label `l` (1-based).
    pub fn child(&self, k: usize, l: usize) -> usize {
        k + l - 1
    }
}

/// A built lattice: spec, amplitudes and node prices.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    spec: LatticeSpec,
    amplitudes: AmplitudeGrid,
    nodes: NodeGrid,
}

impl Lattice {
    pub fn build(spec: LatticeSpec) -> Result<Self> {
        spec.validate()?;
        let amplitudes = AmplitudeGrid::new(spec.u, spec.d, spec.states)?;
        let nodes = NodeGrid::new(&spec);
        Ok(Self {
            spec,
            amplitudes,
            nodes,
        })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn amplitudes(&self) -> &AmplitudeGrid {
        &self.amplitudes
    }

    pub fn nodes(&self) -> &NodeGrid {
        &self.nodes
    }

    pub fn gross_rate(&self) -> f64 {
        self.spec.gross_rate()
    }

    /// The one-step risk-neutral polytope `D(A, 1+R)`.
    pub fn risk_neutral_polytope(&self) -> Result<MeanPolytope> {
        MeanPolytope::new(self.amplitudes.ascending.clone(), self.gross_rate())
            .map_err(|e| Error::ArbitrageViolation(e.to_string()))
    }

    /// Vertices of the risk-neutral polytope: each is the martingale measure of
    /// the binomial sub-lattice on its two amplitudes.
    pub fn risk_neutral_generators(&self) -> Result<GeneratorSet> {
        Ok(self.risk_neutral_polytope()?.enumerate_generators())
    }

    /// Checks that `pmf` lives on this lattice's amplitude grid.
    pub fn check_measure(&self, pmf: &Pmf) -> Result<()> {
        if pmf.grid() != &self.amplitudes.ascending {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// JSON description with amplitudes and generators in lattice order.
    pub fn describe(&self) -> Result<LatticeDescription> {
        let gens = self.risk_neutral_generators()?;
        let generators = gens
            .vertices()
            .map(|g| {
                let (l1, l2) = if g.is_point_mass() {
                    let l = self.amplitudes.lattice_label(g.pair.0);
                    (l, l)
                } else {
                    self.amplitudes.lattice_pair(g.pair)
                };
                let mut probs = serde_json::Map::new();
                for l in [l1, l2] {
                    let j = self.amplitudes.grid_index(l);
                    probs.insert(l.to_string(), serde_json::json!(g.pmf.probs()[j]));
                }
                GeneratorDescription {
                    pair: [l1, l2],
                    probs,
                }
            })
            .collect();
        Ok(LatticeDescription {
            u: self.spec.u,
            d: self.spec.d,
            states: self.spec.states,
            rate: self.spec.rate,
            spot: self.spec.spot,
            steps: self.spec.steps,
            amplitudes: self.amplitudes.descending.clone(),
            generators,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorDescription {
    pub pair: [usize; 2],
    pub probs: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeDescription {
    pub u: f64,
    pub d: f64,
    #[serde(rename = "L")]
    pub states: usize,
    #[serde(rename = "R")]
    pub rate: f64,
    #[serde(rename = "S0")]
    pub spot: f64,
    #[serde(rename = "N")]
    pub steps: usize,
    pub amplitudes: Vec<f64>,
    pub generators: Vec<GeneratorDescription>,
}

/// Outcome of [`equivalent_filter`].
#[derive(Debug, Clone)]
pub struct FilteredBatch {
    pub batch: SampleBatch,
    pub removed: usize,
}

/// Keeps the sampled measures equivalent to `reference` (same support).
///
/// Uniform samples have full support almost surely, so removals are logged
/// as a warning.
pub fn equivalent_filter(batch: &SampleBatch, reference: &Pmf) -> Result<FilteredBatch> {
    if batch.iter().any(|q| q.grid() != reference.grid()) {
        return Err(Error::GridMismatch);
    }
    let keep: Vec<bool> = batch.iter().map(|q| q.same_support(reference)).collect();
    let kept = batch.retain_by(&keep);
    let removed = batch.count() - kept.count();
    if removed > 0 {
        log::warn!("{removed} sampled measures are not equivalent to the reference measure");
    }
    Ok(FilteredBatch {
        batch: kept,
        removed,
    })
}
