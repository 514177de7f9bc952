//! Relative entropy, the minimal entropy martingale measure and entropy balls.

use std::io::Write;

use crate::error::{Error, Result};
use crate::polytope::{format_f64, Pmf};
use crate::sampler::SampleBatch;

/// Relative entropy in nats, possibly `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EntropyValue(f64);

impl EntropyValue {
    pub const INFINITE: EntropyValue = EntropyValue(f64::INFINITY);

    pub fn finite(v: f64) -> Self {
        debug_assert!(v >= 0.0 && v.is_finite());
        Self(v)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

/// `I(q, p) = sum_i q_i ln(q_i / p_i)`, with `0 ln 0 = 0`.
///
/// Pmfs with different supports have infinite relative entropy, in either
/// direction (including `q_i = 0 < p_i`).
pub fn relative_entropy(q: &Pmf, p: &Pmf) -> Result<EntropyValue> {
    if q.grid() != p.grid() {
        return Err(Error::GridMismatch);
    }
    if !q.same_support(p) {
        return Ok(EntropyValue::INFINITE);
    }
    let total: f64 = q
        .probs()
        .iter()
        .zip(p.probs())
        .filter(|(&qi, _)| qi > 0.0)
        .map(|(&qi, &pi)| qi * (qi / pi).ln())
        .sum();
    Ok(EntropyValue::finite(total.max(0.0)))
}

/// Exponentially tilted measure closest to `P` in relative entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct MemmSolution {
    pub q_tilde: Pmf,
    /// Tilting parameter in `q_i ∝ p_i exp(-tau a_i)`.
    pub tau: f64,
    /// `|sum_i a_i q_i - (1 + R)|` at the returned `tau`.
    pub residual: f64,
}

const BISECTION_MAX_ITER: usize = 200;
const BISECTION_WIDTH: f64 = 1e-14;
const BRACKET_LIMIT: f64 = 1e12;

/// Tilted weights `p_i exp(-tau a_i)` normalised with a max shift.
fn tilt(log_p: &[f64], a: &[f64], tau: f64) -> Vec<f64> {
    let exps: Vec<f64> = log_p.iter().zip(a).map(|(lp, ai)| lp - tau * ai).collect();
    let shift = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = exps.iter().map(|e| (e - shift).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Tilted mean minus the gross rate; strictly decreasing in `tau`.
fn tilted_excess(log_p: &[f64], a: &[f64], gross_rate: f64, tau: f64) -> f64 {
    let q = tilt(log_p, a, tau);
    q.iter().zip(a).map(|(qi, ai)| qi * ai).sum::<f64>() - gross_rate
}

/// Minimal entropy martingale measure for `p` on the amplitude grid.
///
/// Solves `sum_j a_j p_j e^{-tau a_j} = (1+R) sum_j p_j e^{-tau a_j}` by
/// bisection after expanding the bracket `[-1, 1]` by doubling.
pub fn solve_memm(p: &Pmf, gross_rate: f64) -> Result<MemmSolution> {
    let a = p.grid().points();
    let (a_min, a_max) = (p.grid().first(), p.grid().last());
    if !(a_min < gross_rate && gross_rate < a_max) {
        return Err(Error::ArbitrageViolation(format!(
            "need min amplitude {a_min} < 1+R = {gross_rate} < max amplitude {a_max}"
        )));
    }
    if !p.has_full_support() {
        return Err(Error::InvalidPmf(
            "historical measure must have full support".into(),
        ));
    }
    let log_p: Vec<f64> = p.probs().iter().map(|x| x.ln()).collect();
    let g = |tau: f64| tilted_excess(&log_p, a, gross_rate, tau);

    let finish = |tau: f64| -> Result<MemmSolution> {
        let probs = tilt(&log_p, a, tau);
        let q_tilde = Pmf::new(p.grid().clone(), probs)?;
        let residual = (q_tilde.mean() - gross_rate).abs();
        Ok(MemmSolution {
            q_tilde,
            tau,
            residual,
        })
    };

    if g(0.0) == 0.0 {
        return finish(0.0);
    }

    let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
    while !(g(lo) > 0.0 && g(hi) < 0.0) {
        if g(lo) <= 0.0 {
            lo *= 2.0;
        }
        if g(hi) >= 0.0 {
            hi *= 2.0;
        }
        if lo.abs() > BRACKET_LIMIT || hi.abs() > BRACKET_LIMIT {
            return Err(Error::BracketNotFound { low: lo, high: hi });
        }
    }
    debug_assert!(g(lo) > 0.0 && g(hi) < 0.0);

    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= BISECTION_WIDTH || mid == lo || mid == hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if gm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // pick the endpoint with the smaller residual
    let tau = if g(lo).abs() <= g(hi).abs() { lo } else { hi };
    finish(tau)
}

/// Which argument the ball center takes in the relative entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ArgumentOrder {
    /// `I(center, sample)`
    #[default]
    CenterFirst,
    /// `I(sample, center)`
    SampleFirst,
}

/// The entropy ball `{Q : I(center, Q) <= epsilon}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyBall {
    center: Pmf,
    epsilon: f64,
    order: ArgumentOrder,
}

impl EntropyBall {
    pub fn new(center: Pmf, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ball radius must be positive, got {epsilon}"
            )));
        }
        if !center.has_full_support() {
            return Err(Error::InvalidPmf("ball center must have full support".into()));
        }
        Ok(Self {
            center,
            epsilon,
            order: ArgumentOrder::CenterFirst,
        })
    }

    pub fn with_order(mut self, order: ArgumentOrder) -> Self {
        self.order = order;
        self
    }

    pub fn center(&self) -> &Pmf {
        &self.center
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn order(&self) -> ArgumentOrder {
        self.order
    }

    pub fn distance(&self, q: &Pmf) -> Result<EntropyValue> {
        oriented_entropy(&self.center, q, self.order)
    }

    pub fn contains(&self, q: &Pmf) -> Result<bool> {
        Ok(self.distance(q)?.value() <= self.epsilon)
    }
}

fn oriented_entropy(reference: &Pmf, sample: &Pmf, order: ArgumentOrder) -> Result<EntropyValue> {
    match order {
        ArgumentOrder::CenterFirst => relative_entropy(reference, sample),
        ArgumentOrder::SampleFirst => relative_entropy(sample, reference),
    }
}

/// Per-sample relative entropy against `reference`.
pub fn entropy_distribution(
    batch: &SampleBatch,
    reference: &Pmf,
    order: ArgumentOrder,
) -> Result<Vec<EntropyValue>> {
    batch
        .iter()
        .map(|q| oriented_entropy(reference, q, order))
        .collect()
}

/// Equal-width histogram with a separate count for infinite values.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub infinite: usize,
}

impl Histogram {
    /// `bins` equal-width bins over the finite range of `values`.
    pub fn new(values: &[f64], bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidParameter("histogram needs at least one bin".into()));
        }
        let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        let infinite = values.len() - finite.len();
        if finite.is_empty() {
            return Ok(Self {
                edges: Vec::new(),
                counts: Vec::new(),
                infinite,
            });
        }
        let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
        let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0; bins];
        for v in finite {
            let idx = (((v - lo) / width) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        Ok(Self {
            edges,
            counts,
            infinite,
        })
    }

    /// CSV rows `bin_left,bin_right,count,inf`; infinite values go in a final
    /// row flagged `inf = 1`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_left", "bin_right", "count", "inf"])?;
        for (i, c) in self.counts.iter().enumerate() {
            w.write_record([
                format_f64(self.edges[i]),
                format_f64(self.edges[i + 1]),
                c.to_string(),
                "0".to_string(),
            ])?;
        }
        if self.infinite > 0 {
            w.write_record(["inf", "inf", &self.infinite.to_string(), "1"])?;
        }
        w.flush()?;
        Ok(())
    }
}
