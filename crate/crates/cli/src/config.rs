//! Run configuration: a JSON file merged with command-line overrides, then
//! resolved into library objects.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use distrisk::{
    annualize, calibrate_pentanomial, estimate_moments, load_log_returns, ArgumentOrder,
    ExerciseStyle, Lattice, LatticeSpec, OptionKind, OptionSpec, PentanomialCalibration, Pmf,
    ReturnMoments, ReturnsFormat,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_PERIODS_PER_YEAR: u32 = 252;
pub const DEFAULT_BINS: usize = 50;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    /// Descending jump amplitudes; alternative to `u`, `d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<f64>>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub states: Option<usize>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(rename = "S0", default, skip_serializing_if = "Option::is_none")]
    pub spot: Option<f64>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<OptionKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strike: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub style: Option<ExerciseStyle>,
    /// Defaults to the lattice horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maturity_steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BallOrder {
    /// `I(center, Q)`
    #[default]
    CenterFirst,
    /// `I(Q, center)`
    SampleFirst,
}

impl From<BallOrder> for ArgumentOrder {
    fn from(o: BallOrder) -> Self {
        match o {
            BallOrder::CenterFirst => ArgumentOrder::CenterFirst,
            BallOrder::SampleFirst => ArgumentOrder::SampleFirst,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Call,
    Put,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StyleArg {
    European,
    American,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Prices,
    LogReturns,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub option: OptionConfig,
    /// Historical one-step probabilities in lattice order (largest amplitude first).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub historical_probs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub returns_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub returns_format: Option<ReturnsFormat>,
    /// Per-period moments used instead of a returns file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moments: Option<ReturnMoments>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods_per_year: Option<u32>,
    /// Periods aggregated into one lattice step; defaults to `periods_per_year`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_periods: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ball_order: Option<BallOrder>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram_bins: Option<usize>,
}

/// Command-line overrides; every field replaces the config value when given.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Up factor u
    #[arg(long, global = true)]
    pub u: Option<f64>,
    /// Down factor d
    #[arg(long, global = true)]
    pub d: Option<f64>,
    /// Descending jump amplitudes, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    pub amplitudes: Option<Vec<f64>>,
    /// States per step L
    #[arg(long = "states", short = 'L', global = true)]
    pub states: Option<usize>,
    /// Single-period risk-free rate R
    #[arg(long, global = true)]
    pub rate: Option<f64>,
    /// Initial price S0
    #[arg(long, global = true)]
    pub spot: Option<f64>,
    /// Lattice steps N
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub kind: Option<KindArg>,
    #[arg(long, global = true, value_enum)]
    pub style: Option<StyleArg>,
    #[arg(long, short = 'K', global = true)]
    pub strike: Option<f64>,
    /// Option maturity in steps
    #[arg(long, global = true)]
    pub maturity: Option<usize>,
    /// Historical probabilities in lattice order, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    pub probs: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub returns_file: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub returns_format: Option<FormatArg>,
    #[arg(long, global = true)]
    pub periods_per_year: Option<u32>,
    #[arg(long, global = true)]
    pub horizon_periods: Option<u32>,
    #[arg(long = "samples", global = true)]
    pub sample_count: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub ball_order: Option<BallOrder>,
    #[arg(long = "bins", global = true)]
    pub histogram_bins: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Relative `returns_file` paths are taken relative to the config file.
    pub fn rebase(mut self, config_dir: &Path) -> Self {
        if let Some(p) = &self.returns_file {
            if p.is_relative() {
                self.returns_file = Some(config_dir.join(p));
            }
        }
        self
    }

    pub fn apply(mut self, o: &Overrides) -> Self {
        fn set<T: Clone>(slot: &mut Option<T>, v: &Option<T>) {
            if v.is_some() {
                slot.clone_from(v);
            }
        }
        set(&mut self.lattice.u, &o.u);
        set(&mut self.lattice.d, &o.d);
        set(&mut self.lattice.amplitudes, &o.amplitudes);
        set(&mut self.lattice.states, &o.states);
        set(&mut self.lattice.rate, &o.rate);
        set(&mut self.lattice.spot, &o.spot);
        set(&mut self.lattice.steps, &o.steps);
        set(
            &mut self.option.kind,
            &o.kind.map(|k| match k {
                KindArg::Call => OptionKind::Call,
                KindArg::Put => OptionKind::Put,
            }),
        );
        set(
            &mut self.option.style,
            &o.style.map(|s| match s {
                StyleArg::European => ExerciseStyle::European,
                StyleArg::American => ExerciseStyle::American,
            }),
        );
        set(&mut self.option.strike, &o.strike);
        set(&mut self.option.maturity_steps, &o.maturity);
        set(&mut self.historical_probs, &o.probs);
        set(&mut self.returns_file, &o.returns_file);
        set(
            &mut self.returns_format,
            &o.returns_format.map(|f| match f {
                FormatArg::Prices => ReturnsFormat::Prices,
                FormatArg::LogReturns => ReturnsFormat::LogReturns,
            }),
        );
        set(&mut self.periods_per_year, &o.periods_per_year);
        set(&mut self.horizon_periods, &o.horizon_periods);
        set(&mut self.sample_count, &o.sample_count);
        set(&mut self.seed, &o.seed);
        set(&mut self.epsilon, &o.epsilon);
        set(&mut self.ball_order, &o.ball_order);
        set(&mut self.histogram_bins, &o.histogram_bins);
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count.unwrap_or(0)
    }

    pub fn bins(&self) -> usize {
        self.histogram_bins.unwrap_or(DEFAULT_BINS)
    }

    pub fn ball_order(&self) -> BallOrder {
        self.ball_order.unwrap_or_default()
    }

    fn has_calibration_source(&self) -> bool {
        self.returns_file.is_some() || self.moments.is_some()
    }

    /// At most one source of historical information may be given.
    pub fn check_sources(&self) -> CliResult<()> {
        let given = [
            self.historical_probs.is_some(),
            self.returns_file.is_some(),
            self.moments.is_some(),
        ];
        if given.iter().filter(|&&b| b).count() > 1 {
            return Err(CliError::Config(
                "give only one of historical_probs, returns_file, moments".into(),
            ));
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0) {
                return Err(CliError::Config(format!("epsilon must be positive, got {eps}")));
            }
        }
        Ok(())
    }

    /// Per-period moments from the returns file or the `moments` entry.
    pub fn period_moments(&self) -> CliResult<ReturnMoments> {
        let ppy = self.periods_per_year.unwrap_or(DEFAULT_PERIODS_PER_YEAR);
        match (&self.returns_file, &self.moments) {
            (Some(path), None) => {
                let format = self.returns_format.unwrap_or(ReturnsFormat::Prices);
                let returns = load_log_returns(path, format)?;
                Ok(estimate_moments(&returns, ppy)?)
            }
            (None, Some(m)) => Ok(ReturnMoments {
                periods_per_year: self.periods_per_year.unwrap_or(m.periods_per_year),
                ..*m
            }),
            _ => Err(CliError::Config(
                "calibration needs exactly one of returns_file or moments".into(),
            )),
        }
    }

    pub fn calibration(&self) -> CliResult<PentanomialCalibration> {
        let m = self.period_moments()?;
        let horizon = self.horizon_periods.unwrap_or(m.periods_per_year);
        Ok(calibrate_pentanomial(&annualize(&m, horizon)?)?)
    }

    /// Resolves lattice, option and (when available) the historical measure.
    pub fn resolve(&self) -> CliResult<Resolved> {
        self.check_sources()?;
        let calibration = if self.has_calibration_source() {
            Some(self.calibration()?)
        } else {
            None
        };
        let lc = &self.lattice;
        let rate = lc
            .rate
            .ok_or_else(|| CliError::Config("lattice.R (--rate) is required".into()))?;
        let spot = lc
            .spot
            .ok_or_else(|| CliError::Config("lattice.S0 (--spot) is required".into()))?;
        let steps = lc.steps.or(self.option.maturity_steps).unwrap_or(1);
        let spec = match (lc.u, lc.d, &lc.amplitudes) {
            (Some(u), Some(d), None) => LatticeSpec {
                u,
                d,
                states: lc
                    .states
                    .ok_or_else(|| CliError::Config("lattice.L (--states) is required".into()))?,
                rate,
                spot,
                steps,
            },
            (None, None, Some(amps)) => {
                if let Some(l) = lc.states {
                    if l != amps.len() {
                        return Err(CliError::Config(format!(
                            "lattice.L = {l} but {} amplitudes given",
                            amps.len()
                        )));
                    }
                }
                LatticeSpec::from_amplitudes(amps, rate, spot, steps)?
            }
            (None, None, None) => match &calibration {
                Some(cal) => cal.lattice_spec(rate, spot, steps)?,
                None => {
                    return Err(CliError::Config(
                        "lattice needs u and d, amplitudes, or a calibration source".into(),
                    ))
                }
            },
            _ => {
                return Err(CliError::Config(
                    "give either both u and d or amplitudes for the lattice".into(),
                ))
            }
        };
        let lattice = Lattice::build(spec)?;
        let historical = match (&self.historical_probs, &calibration) {
            (Some(p), _) => Some(lattice.amplitudes().pmf_from_descending(p)?),
            (None, Some(cal)) => Some(lattice.amplitudes().pmf_from_descending(&cal.probs)?),
            (None, None) => None,
        };
        let oc = &self.option;
        let option = oc.strike.map(|strike| OptionSpec {
            kind: oc.kind.unwrap_or(OptionKind::Call),
            strike,
            style: oc.style.unwrap_or(ExerciseStyle::European),
            maturity_steps: oc.maturity_steps.unwrap_or(steps),
        });
        Ok(Resolved {
            lattice,
            option,
            historical,
        })
    }
}

pub struct Resolved {
    pub lattice: Lattice,
    pub option: Option<OptionSpec>,
    pub historical: Option<Pmf>,
}

impl Resolved {
    pub fn option(&self) -> CliResult<OptionSpec> {
        self.option
            .ok_or_else(|| CliError::Config("option.strike (--strike) is required".into()))
    }

    pub fn historical(&self) -> CliResult<&Pmf> {
        self.historical.as_ref().ok_or_else(|| {
            CliError::Config(
                "MEMM needs historical_probs, returns_file or moments in the config".into(),
            )
        })
    }
}
