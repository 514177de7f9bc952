//! Pricing on a multinomial lattice under an i.i.d. per-step risk-neutral
//! measure, with analytical bounds over the whole risk-neutral polytope.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::entropy::{EntropyBall, EntropyValue};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::polytope::{format_f64, Generator, Pmf};
use crate::sampler::SampleBatch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionKind {
    Call,
    Put,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExerciseStyle {
    European,
    American,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionSpec {
    pub kind: OptionKind,
    pub strike: f64,
    pub style: ExerciseStyle,
    pub maturity_steps: usize,
}

impl OptionSpec {
    pub fn european_call(strike: f64, maturity_steps: usize) -> Self {
        Self {
            kind: OptionKind::Call,
            strike,
            style: ExerciseStyle::European,
            maturity_steps,
        }
    }

    pub fn european_put(strike: f64, maturity_steps: usize) -> Self {
        Self {
            kind: OptionKind::Put,
            ..Self::european_call(strike, maturity_steps)
        }
    }

    pub fn american(self) -> Self {
        Self {
            style: ExerciseStyle::American,
            ..self
        }
    }

    pub fn payoff(&self, price: f64) -> f64 {
        match self.kind {
            OptionKind::Call => (price - self.strike).max(0.0),
            OptionKind::Put => (self.strike - price).max(0.0),
        }
    }

    fn check(&self, lattice: &Lattice) -> Result<()> {
        if !(self.strike >= 0.0) || !self.strike.is_finite() {
            return Err(Error::InvalidOption(format!(
                "strike must be finite and nonnegative, got {}",
                self.strike
            )));
        }
        if self.maturity_steps == 0 || self.maturity_steps > lattice.spec().steps {
            return Err(Error::InvalidOption(format!(
                "maturity {} must lie in 1..={}",
                self.maturity_steps,
                lattice.spec().steps
            )));
        }
        Ok(())
    }
}

/// A time-0 price together with the measure that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceQuote {
    pub price: f64,
    pub measure_label: String,
}

impl fmt::Display for PriceQuote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4} [{}]", self.price, self.measure_label)
    }
}

/// Distribution of the total number of down-jumps after `n` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminalDistribution {
    /// Probability of `k` down-jumps, `k = 0..n(L-1)`.
    pub down_count_pmf: Vec<f64>,
    /// Node price reached with `k` down-jumps.
    pub terminal_prices: Vec<f64>,
}

impl TerminalDistribution {
    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.down_count_pmf
            .iter()
            .zip(&self.terminal_prices)
            .map(|(p, s)| p * f(*s))
            .sum()
    }
}

/// n-fold convolution of the one-step down-count pmf.
pub fn terminal_distribution(
    step_measure: &Pmf,
    lattice: &Lattice,
    n: usize,
) -> Result<TerminalDistribution> {
    lattice.check_measure(step_measure)?;
    if n > lattice.spec().steps {
        return Err(Error::InvalidParameter(format!(
            "step {n} beyond lattice horizon {}",
            lattice.spec().steps
        )));
    }
    // k down-jumps in one step <=> lattice label l = k + 1
    let step = lattice.amplitudes().descending_probs(step_measure);
    let mut dist = vec![1.0];
    for _ in 0..n {
        let mut next = vec![0.0; dist.len() + step.len() - 1];
        for (k, &pk) in dist.iter().enumerate() {
            if pk == 0.0 {
                continue;
            }
            for (j, &qj) in step.iter().enumerate() {
                next[k + j] += pk * qj;
            }
        }
        dist = next;
    }
    Ok(TerminalDistribution {
        down_count_pmf: dist,
        terminal_prices: lattice.nodes().step(n).to_vec(),
    })
}

/// Discounted expected payoff at maturity.
pub fn price_european(step_measure: &Pmf, lattice: &Lattice, opt: &OptionSpec) -> Result<f64> {
    opt.check(lattice)?;
    let n = opt.maturity_steps;
    let dist = terminal_distribution(step_measure, lattice, n)?;
    let discount = lattice.gross_rate().powi(n as i32);
    Ok(dist.expectation(|s| opt.payoff(s)) / discount)
}

/// Backward induction with early exercise at every node.
///
/// `V_N = payoff`, `V_n(k) = max(payoff(S_n^k), E[V_{n+1} | k] / (1+R))`.
pub fn price_american(step_measure: &Pmf, lattice: &Lattice, opt: &OptionSpec) -> Result<f64> {
    opt.check(lattice)?;
    lattice.check_measure(step_measure)?;
    let q = lattice.amplitudes().descending_probs(step_measure);
    backward_induction(lattice, opt, |_, _| &q)
}

/// Backward induction where the continuation measure may vary by node.
pub(crate) fn backward_induction<'q>(
    lattice: &Lattice,
    opt: &OptionSpec,
    measure_at: impl Fn(usize, usize) -> &'q [f64],
) -> Result<f64> {
    let n_steps = opt.maturity_steps;
    let nodes = lattice.nodes();
    let discount = 1.0 / lattice.gross_rate();
    let mut values: Vec<f64> = nodes.step(n_steps).iter().map(|&s| opt.payoff(s)).collect();
    for n in (0..n_steps).rev() {
        values = nodes
            .step(n)
            .iter()
            .enumerate()
            .map(|(k, &s)| {
                let q = measure_at(n, k);
                let cont: f64 = q
                    .iter()
                    .enumerate()
                    .map(|(j, qj)| qj * values[k + j])
                    .sum::<f64>()
                    * discount;
                cont.max(opt.payoff(s))
            })
            .collect();
    }
    Ok(values[0])
}

/// Price under `step_measure` with the option's exercise style.
pub fn price(step_measure: &Pmf, lattice: &Lattice, opt: &OptionSpec) -> Result<f64> {
    match opt.style {
        ExerciseStyle::European => price_european(step_measure, lattice, opt),
        ExerciseStyle::American => price_american(step_measure, lattice, opt),
    }
}

/// Label `Q(l1,l2)` (or `Q(l)` for a point mass) in lattice numbering.
pub fn generator_label(lattice: &Lattice, g: &Generator) -> String {
    let amps = lattice.amplitudes();
    if g.is_point_mass() {
        format!("Q({})", amps.lattice_label(g.pair.0))
    } else {
        let (l1, l2) = amps.lattice_pair(g.pair);
        format!("Q({l1},{l2})")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticalBounds {
    pub lower: PriceQuote,
    pub upper: PriceQuote,
}

/// Price bounds for convex payoffs over the whole risk-neutral polytope.
///
/// The lower bound uses the generator on the amplitudes bracketing `1+R`
/// (the point mass if `1+R` is an amplitude), the upper bound the generator
/// on the largest and smallest amplitudes.
pub fn analytical_bounds(lattice: &Lattice, opt: &OptionSpec) -> Result<AnalyticalBounds> {
    let extremes = lattice.risk_neutral_polytope()?.convex_order_extremes();
    let quote = |g: &Generator| -> Result<PriceQuote> {
        Ok(PriceQuote {
            price: price(&g.pmf, lattice, opt)?,
            measure_label: generator_label(lattice, g),
        })
    };
    Ok(AnalyticalBounds {
        lower: quote(&extremes.q_low)?,
        upper: quote(&extremes.q_up)?,
    })
}

/// Model-free interval for a European call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub lower: f64,
    pub upper: f64,
}

/// `((S0 (1+R)^N - K)^+ / (1+R)^N, S0)`
pub fn no_arbitrage_envelope(spot: f64, gross_rate: f64, strike: f64, steps: usize) -> Envelope {
    let growth = gross_rate.powi(steps as i32);
    Envelope {
        lower: (spot * growth - strike).max(0.0) / growth,
        upper: spot,
    }
}

/// Type-7 (linear interpolation) sample quantile of sorted data.
pub fn quantile(sorted: &[f64], prob: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * prob.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSummary {
    pub count: usize,
    pub seed: u64,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
    pub analytical_lower: f64,
    pub analytical_upper: f64,
    pub envelope_lower: Option<f64>,
    pub envelope_upper: Option<f64>,
    pub within_analytical_bounds: bool,
}

/// Per-sample prices (and optionally entropies) over a batch of step measures.
#[derive(Debug, Clone)]
pub struct SampleReport {
    pub batch: SampleBatch,
    pub prices: Vec<f64>,
    pub entropy: Option<Vec<EntropyValue>>,
    pub in_ball: Option<Vec<bool>>,
    pub summary: PriceSummary,
}

impl SampleReport {
    /// Attaches ball distances and membership for every sample.
    pub fn with_ball(mut self, ball: &EntropyBall) -> Result<Self> {
        let entropy = self
            .batch
            .iter()
            .map(|q| ball.distance(q))
            .collect::<Result<Vec<_>>>()?;
        self.in_ball = Some(entropy.iter().map(|e| e.value() <= ball.epsilon()).collect());
        self.entropy = Some(entropy);
        Ok(self)
    }

    /// CSV rows `sample_id,price,entropy,in_ball`; missing columns are left empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["sample_id", "price", "entropy", "in_ball"])?;
        for (i, p) in self.prices.iter().enumerate() {
            let entropy = match &self.entropy {
                Some(e) if e[i].is_infinite() => "inf".to_string(),
                Some(e) => format_f64(e[i].value()),
                None => String::new(),
            };
            let in_ball = self
                .in_ball
                .as_ref()
                .map(|b| u8::from(b[i]).to_string())
                .unwrap_or_default();
            w.write_record([i.to_string(), format_f64(*p), entropy, in_ball])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.summary)?)
    }
}

/// Prices every measure in `batch` and summarises the spread.
pub fn price_distribution(
    batch: &SampleBatch,
    lattice: &Lattice,
    opt: &OptionSpec,
) -> Result<SampleReport> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let prices = batch
        .iter()
        .map(|q| price(q, lattice, opt))
        .collect::<Result<Vec<_>>>()?;
    let bounds = analytical_bounds(lattice, opt)?;
    let mut sorted = prices.clone();
    sorted.sort_by(f64::total_cmp);
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    let tol = 1e-9 * bounds.upper.price.abs().max(1.0);
    let envelope = (opt.kind == OptionKind::Call && opt.style == ExerciseStyle::European).then(|| {
        no_arbitrage_envelope(
            lattice.spec().spot,
            lattice.gross_rate(),
            opt.strike,
            opt.maturity_steps,
        )
    });
    let summary = PriceSummary {
        count: prices.len(),
        seed: batch.seed,
        min,
        max,
        mean: prices.iter().sum::<f64>() / prices.len() as f64,
        q05: quantile(&sorted, 0.05),
        q50: quantile(&sorted, 0.5),
        q95: quantile(&sorted, 0.95),
        analytical_lower: bounds.lower.price,
        analytical_upper: bounds.upper.price,
        envelope_lower: envelope.map(|e| e.lower),
        envelope_upper: envelope.map(|e| e.upper),
        within_analytical_bounds: min >= bounds.lower.price - tol
            && max <= bounds.upper.price + tol,
    };
    Ok(SampleReport {
        batch: batch.clone(),
        prices,
        entropy: None,
        in_ball: None,
        summary,
    })
}
