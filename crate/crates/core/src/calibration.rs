//! Moment estimation from log returns and moment-matched pentanomial lattices.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;

pub const MIN_OBSERVATIONS: usize = 5;

/// Per-period moments of log returns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnMoments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub periods_per_year: u32,
}

/// Sample moments: mean, variance with denominator `n - 1`, and the
/// uncorrected standardized skewness `m3 / m2^1.5` and excess kurtosis
/// `m4 / m2^2 - 3`. A constant series has zero variance, skewness and kurtosis.
pub fn estimate_moments(log_returns: &[f64], periods_per_year: u32) -> Result<ReturnMoments> {
    let n = log_returns.len();
    if n < MIN_OBSERVATIONS {
        return Err(Error::InsufficientData {
            needed: MIN_OBSERVATIONS,
            got: n,
        });
    }
    if log_returns.iter().any(|r| !r.is_finite()) {
        return Err(Error::InvalidParameter("log returns must be finite".into()));
    }
    let nf = n as f64;
    let mean = log_returns.iter().sum::<f64>() / nf;
    let central = |k: i32| log_returns.iter().map(|r| (r - mean).powi(k)).sum::<f64>() / nf;
    let (mut m2, m3, m4) = (central(2), central(3), central(4));
    // rounding in the mean leaves a residue of order eps^2 on constant input
    if m2 <= (f64::EPSILON * mean).powi(2) * 16.0 {
        m2 = 0.0;
    }
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    Ok(ReturnMoments {
        mean,
        variance: m2 * nf / (nf - 1.0),
        skewness,
        excess_kurtosis,
        periods_per_year,
    })
}

/// Aggregates i.i.d. per-period moments over `horizon_periods` periods.
pub fn annualize(m: &ReturnMoments, horizon_periods: u32) -> Result<ReturnMoments> {
    if horizon_periods == 0 {
        return Err(Error::InvalidParameter("horizon must be at least one period".into()));
    }
    let t = f64::from(horizon_periods);
    Ok(ReturnMoments {
        mean: m.mean * t,
        variance: m.variance * t,
        skewness: m.skewness / t.sqrt(),
        excess_kurtosis: m.excess_kurtosis / t,
        periods_per_year: (m.periods_per_year / horizon_periods).max(1),
    })
}

/// Five-state lattice whose log-jumps reproduce the target moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PentanomialCalibration {
    /// `a_1 > ... > a_5`.
    pub amplitudes: [f64; 5],
    /// Historical probabilities in the same order as `amplitudes`.
    pub probs: [f64; 5],
    pub horizon_moments: ReturnMoments,
}

impl PentanomialCalibration {
    /// Log step `h = sigma sqrt(1 + k/3)` between adjacent amplitudes.
    pub fn log_step(&self) -> f64 {
        (self.amplitudes[0].ln() - self.amplitudes[4].ln()) / 4.0
    }

    /// Recombining lattice with `u^4 = a_1` and `d^4 = a_5`.
    pub fn lattice_spec(&self, rate: f64, spot: f64, steps: usize) -> Result<LatticeSpec> {
        let gross = 1.0 + rate;
        if !(self.amplitudes[4] <= gross && gross <= self.amplitudes[0]) {
            return Err(Error::ArbitrageViolation(format!(
                "calibrated amplitudes need a_5 = {} <= 1+R = {gross} <= a_1 = {}",
                self.amplitudes[4], self.amplitudes[0]
            )));
        }
        Ok(LatticeSpec {
            u: self.amplitudes[0].powf(0.25),
            d: self.amplitudes[4].powf(0.25),
            states: 5,
            rate,
            spot,
            steps,
        })
    }

    /// Mean, variance, skewness and excess kurtosis of the log-jump under `probs`.
    pub fn log_jump_moments(&self) -> (f64, f64, f64, f64) {
        let x: Vec<f64> = self.amplitudes.iter().map(|a| a.ln()).collect();
        let mean: f64 = self.probs.iter().zip(&x).map(|(p, x)| p * x).sum();
        let central = |k: i32| -> f64 {
            self.probs
                .iter()
                .zip(&x)
                .map(|(p, x)| p * (x - mean).powi(k))
                .sum()
        };
        let var = central(2);
        (
            mean,
            var,
            central(3) / var.powf(1.5),
            central(4) / (var * var) - 3.0,
        )
    }
}

/// Symmetric log-amplitudes `ln a_i = mu + (3 - i) h`, `h = sigma sqrt(1 + k/3)`,
/// with probabilities solving the five moment equations of the centred jump:
///
/// ```text
/// p1 + p5 = 1 / (2 (3 + k))      p2 + p4 = 1 / (3 + k)
/// p1 - p5 = s c^3 / 6            p2 - p4 = -2 (p1 - p5)
/// p3 = 1 - 3 / (2 (3 + k))       c = sqrt(3 / (3 + k))
/// ```
pub fn calibrate_pentanomial(m: &ReturnMoments) -> Result<PentanomialCalibration> {
    if !(m.variance > 0.0) {
        return Err(Error::CalibrationDegenerate(format!(
            "variance must be positive, got {}",
            m.variance
        )));
    }
    let k = m.excess_kurtosis;
    if !(1.0 + k / 3.0 > 0.0) {
        return Err(Error::CalibrationDegenerate(format!(
            "excess kurtosis {k} gives a non-positive jump size"
        )));
    }
    let sigma = m.variance.sqrt();
    let h = sigma * (1.0 + k / 3.0).sqrt();
    let amplitudes = [2.0, 1.0, 0.0, -1.0, -2.0].map(|i| (m.mean + i * h).exp());

    let base = 3.0 + k;
    let c = (3.0 / base).sqrt();
    let outer = 1.0 / (2.0 * base);
    let inner = 1.0 / base;
    let outer_diff = m.skewness * c.powi(3) / 6.0;
    let inner_diff = -2.0 * outer_diff;
    let probs = [
        (outer + outer_diff) / 2.0,
        (inner + inner_diff) / 2.0,
        1.0 - 3.0 / (2.0 * base),
        (inner - inner_diff) / 2.0,
        (outer - outer_diff) / 2.0,
    ];
    if let Some((i, p)) = probs
        .iter()
        .enumerate()
        .find(|(_, p)| !(0.0..=1.0).contains(*p))
    {
        return Err(Error::ProbabilityOutOfRange(format!(
            "p{} = {p} for skewness {} and excess kurtosis {k}",
            i + 1,
            m.skewness
        )));
    }
    Ok(PentanomialCalibration {
        amplitudes,
        probs,
        horizon_moments: *m,
    })
}

/// Layout of a returns file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnsFormat {
    /// `date,adjusted_close` rows; log returns are taken between consecutive rows.
    Prices,
    /// One log return per row.
    LogReturns,
}

/// Reads log returns from a CSV file with a header row.
pub fn load_log_returns(path: &Path, format: ReturnsFormat) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)?;
    let column = match format {
        ReturnsFormat::Prices => 1,
        ReturnsFormat::LogReturns => 0,
    };
    let mut values = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let cell = record.get(column).ok_or_else(|| {
            Error::Parse(format!("row {}: missing column {}", line + 2, column + 1))
        })?;
        if cell.is_empty() {
            continue;
        }
        let v: f64 = cell
            .parse()
            .map_err(|_| Error::Parse(format!("row {}: not a number: {cell:?}", line + 2)))?;
        values.push(v);
    }
    match format {
        ReturnsFormat::LogReturns => Ok(values),
        ReturnsFormat::Prices => {
            if let Some(bad) = values.iter().find(|p| !(**p > 0.0)) {
                return Err(Error::Parse(format!("prices must be positive, found {bad}")));
            }
            Ok(values.windows(2).map(|w| (w[1] / w[0]).ln()).collect())
        }
    }
}
