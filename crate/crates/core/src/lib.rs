//! Model risk for discrete-state option pricing.
//!
//! The set of pmfs on a finite grid with a fixed mean is a polytope. This
//! crate enumerates its vertices, bounds linear functionals over it, samples
//! it uniformly, measures relative entropy against a reference model, and
//! prices European and American options on recombining multinomial lattices
//! under any member of the set.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod entropy;
pub mod error;
pub mod lattice;
mod linalg;
pub mod polytope;
pub mod pricing;
pub mod sampler;

pub use calibration::{
    annualize, calibrate_pentanomial, estimate_moments, load_log_returns, PentanomialCalibration,
    ReturnMoments, ReturnsFormat,
};
pub use entropy::{
    entropy_distribution, relative_entropy, solve_memm, ArgumentOrder, EntropyBall, EntropyValue,
    Histogram, MemmSolution,
};
pub use error::{Error, Result};
pub use lattice::{equivalent_filter, AmplitudeGrid, FilteredBatch, Lattice, LatticeSpec, NodeGrid};
pub use polytope::{
    ConvexCombination, ConvexOrderExtremes, ExpectationBounds, Generator, GeneratorSet,
    MeanConstraint, MeanPolytope, Pmf, SupportGrid,
};
pub use pricing::{
    analytical_bounds, no_arbitrage_envelope, price, price_american, price_distribution,
    price_european, terminal_distribution, AnalyticalBounds, Envelope, ExerciseStyle, OptionKind,
    OptionSpec, PriceSummary, SampleReport,
};
pub use sampler::{
    empirical_cdf, sample_uniform, sample_uniform_parallel, AffineChart, BatchTable, SampleBatch,
    SimplexPartition,
};
