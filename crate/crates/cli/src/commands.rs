use std::io::Write;

use distrisk::{
    analytical_bounds, empirical_cdf, entropy_distribution, equivalent_filter,
    no_arbitrage_envelope, polytope::format_f64, price, price_distribution,
    pricing::generator_label, relative_entropy, sample_uniform, solve_memm, BatchTable,
    EntropyBall, EntropyValue, Histogram, OptionSpec, PriceSummary, SimplexPartition,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::OutDir;

fn fmt_opt(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

pub fn generators(cfg: &RunConfig, out: &mut OutDir) -> CliResult<()> {
    let r = cfg.resolve()?;
    let opt = r.option()?;
    let lat = &r.lattice;
    let amps = lat.amplitudes();
    let gens = lat.risk_neutral_generators()?;
    let mut rows: Vec<_> = gens
        .vertices()
        .map(|g| (amps.lattice_pair(g.pair), g))
        .collect();
    rows.sort_by_key(|(pair, _)| *pair);

    let mut w = csv::Writer::from_writer(out.file("generators.csv")?);
    let states = lat.spec().states;
    let mut header = vec!["measure".to_string(), "l1".into(), "l2".into()];
    header.extend((1..=states).map(|l| format!("q{l}")));
    header.push("price".into());
    w.write_record(&header).map_err(distrisk::Error::from)?;
    println!("{:<10} {:>40}  {:>12}", "measure", "probabilities (q1..qL)", "price");
    for ((l1, l2), g) in &rows {
        let label = generator_label(lat, g);
        let q = amps.descending_probs(&g.pmf);
        let p = price(&g.pmf, lat, &opt)?;
        let mut rec = vec![label.clone(), l1.to_string(), l2.to_string()];
        rec.extend(q.iter().map(|x| format_f64(*x)));
        rec.push(format_f64(p));
        w.write_record(&rec).map_err(distrisk::Error::from)?;
        let shown: Vec<String> = q.iter().map(|x| format!("{x:.4}")).collect();
        println!("{label:<10} {:>40}  {p:>12.4}", shown.join(" "));
    }
    w.flush()?;
    out.json("lattice.json", &lat.describe()?)?;
    Ok(())
}

#[derive(Serialize)]
struct MemmReport {
    historical: Vec<f64>,
    q_tilde: Vec<f64>,
    tau: f64,
    residual: f64,
    relative_entropy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    option: Option<OptionSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    price: Option<f64>,
}

pub fn memm(cfg: &RunConfig, out: &mut OutDir) -> CliResult<()> {
    let r = cfg.resolve()?;
    let lat = &r.lattice;
    let p = r.historical()?;
    let sol = solve_memm(p, lat.gross_rate())?;
    let entropy = relative_entropy(&sol.q_tilde, p)?.value();
    let price = r.option.map(|o| price(&sol.q_tilde, lat, &o)).transpose()?;
    let report = MemmReport {
        historical: lat.amplitudes().descending_probs(p),
        q_tilde: lat.amplitudes().descending_probs(&sol.q_tilde),
        tau: sol.tau,
        residual: sol.residual,
        relative_entropy: entropy,
        option: r.option,
        price,
    };
    let shown: Vec<String> = report.q_tilde.iter().map(|x| format!("{x:.4}")).collect();
    println!("Q~ (q1..qL) = ({})", shown.join(", "));
    println!("I(Q~, P)    = {entropy:.6}");
    println!("tau         = {:.6}", sol.tau);
    if let Some(v) = price {
        println!("price       = {v:.4}");
    }
    out.json("memm.json", &report)?;
    Ok(())
}

pub fn bounds(cfg: &RunConfig, out: &mut OutDir) -> CliResult<()> {
    let r = cfg.resolve()?;
    let lat = &r.lattice;
    let opt = r.option()?;
    let memm = r
        .historical
        .as_ref()
        .map(|p| solve_memm(p, lat.gross_rate()))
        .transpose()?
        .map(|s| s.q_tilde);

    let mut w = csv::Writer::from_writer(out.file("bounds.csv")?);
    w.write_record([
        "n",
        "call_memm",
        "call_min",
        "call_min_measure",
        "call_max",
        "call_max_measure",
        "put_memm",
        "put_min",
        "put_max",
        "envelope_lower",
        "envelope_upper",
    ])
    .map_err(distrisk::Error::from)?;
    println!(
        "{:>3} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "n", "memm-call", "min-call", "max-call", "memm-put", "min-put", "max-put", "env-lower"
    );
    for n in 1..=opt.maturity_steps {
        let call = OptionSpec::european_call(opt.strike, n);
        let put = OptionSpec::european_put(opt.strike, n);
        let cb = analytical_bounds(lat, &call)?;
        let pb = analytical_bounds(lat, &put)?;
        let call_memm = memm.as_ref().map(|q| price(q, lat, &call)).transpose()?;
        let put_memm = memm.as_ref().map(|q| price(q, lat, &put)).transpose()?;
        let env = no_arbitrage_envelope(lat.spec().spot, lat.gross_rate(), opt.strike, n);
        w.write_record([
            n.to_string(),
            fmt_opt(call_memm),
            format_f64(cb.lower.price),
            cb.lower.measure_label.clone(),
            format_f64(cb.upper.price),
            cb.upper.measure_label.clone(),
            fmt_opt(put_memm),
            format_f64(pb.lower.price),
            format_f64(pb.upper.price),
            format_f64(env.lower),
            format_f64(env.upper),
        ])
        .map_err(distrisk::Error::from)?;
        let show = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        println!(
            "{n:>3} {:>10} {:>10.4} {:>10.4} {:>10} {:>10.4} {:>10.4} {:>10.4}",
            show(call_memm),
            cb.lower.price,
            cb.upper.price,
            show(put_memm),
            pb.lower.price,
            pb.upper.price,
            env.lower
        );
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct BallSummary {
    epsilon: f64,
    order: crate::config::BallOrder,
    count: usize,
    min: Option<f64>,
    max: Option<f64>,
}

#[derive(Serialize)]
struct SampleSummary {
    count: usize,
    seed: u64,
    option: Option<OptionSpec>,
    removed_non_equivalent: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    prices: Option<PriceSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ball: Option<BallSummary>,
}

fn write_histogram(out: &mut OutDir, name: &str, values: &[f64], bins: usize) -> CliResult<()> {
    let mut f = out.file(name)?;
    Histogram::new(values, bins)?.write_csv(&mut f)?;
    f.flush()?;
    Ok(())
}

pub fn sample(cfg: &RunConfig, out: &mut OutDir) -> CliResult<()> {
    let r = cfg.resolve()?;
    let lat = &r.lattice;
    let opt = r.option()?;
    let seed = cfg.seed();
    let count = cfg.sample_count();
    if count == 0 {
        log::warn!("sample_count is 0; writing an empty report");
        out.json(
            "summary.json",
            &SampleSummary {
                count: 0,
                seed,
                option: Some(opt),
                removed_non_equivalent: 0,
                prices: None,
                ball: None,
            },
        )?;
        println!("no samples requested");
        return Ok(());
    }

    let part = SimplexPartition::from_generators(&lat.risk_neutral_generators()?)?;
    let mut batch = sample_uniform(&part, count, seed)?;
    let center = r
        .historical
        .as_ref()
        .map(|p| solve_memm(p, lat.gross_rate()))
        .transpose()?
        .map(|s| s.q_tilde);
    let mut removed = 0;
    if let Some(c) = &center {
        let filtered = equivalent_filter(&batch, c)?;
        removed = filtered.removed;
        batch = filtered.batch;
    }
    if batch.is_empty() {
        return Err(distrisk::Error::EmptyBatch.into());
    }
    let mut report = price_distribution(&batch, lat, &opt)?;
    let order = cfg.ball_order();
    let mut ball_summary = None;
    match (&center, cfg.epsilon) {
        (Some(c), Some(eps)) => {
            let ball = EntropyBall::new(c.clone(), eps)?.with_order(order.into());
            report = report.with_ball(&ball)?;
        }
        (Some(c), None) => {
            report.entropy = Some(entropy_distribution(&batch, c, order.into())?);
        }
        (None, Some(_)) => log::warn!("epsilon ignored: no historical measure to center the ball"),
        (None, None) => {}
    }

    let mut table = BatchTable::new(&report.batch)
        .descending()
        .column_f64("price", &report.prices);
    let entropy: Option<Vec<f64>> = report
        .entropy
        .as_ref()
        .map(|e| e.iter().map(|v: &EntropyValue| v.value()).collect());
    if let Some(e) = &entropy {
        table = table.column_f64("entropy", e);
    }
    if let Some(b) = &report.in_ball {
        table = table.column_bool("in_ball", b);
    }
    let mut f = out.file("samples.csv")?;
    table.write(&mut f)?;
    f.flush()?;

    let bins = cfg.bins();
    write_histogram(out, "price_histogram.csv", &report.prices, bins)?;
    let cdf = empirical_cdf(&report.batch, &report.prices)?;
    let mut w = csv::Writer::from_writer(out.file("price_cdf.csv")?);
    w.write_record(["price", "probability"]).map_err(distrisk::Error::from)?;
    for (x, p) in cdf.steps() {
        w.write_record([format_f64(x), format_f64(p)])
            .map_err(distrisk::Error::from)?;
    }
    w.flush()?;
    if let Some(e) = &entropy {
        write_histogram(out, "entropy_histogram.csv", e, bins)?;
    }
    if let (Some(inside), Some(eps)) = (&report.in_ball, cfg.epsilon) {
        let ball_prices: Vec<f64> = report
            .prices
            .iter()
            .zip(inside)
            .filter(|(_, &b)| b)
            .map(|(p, _)| *p)
            .collect();
        if !ball_prices.is_empty() {
            write_histogram(out, "ball_price_histogram.csv", &ball_prices, bins)?;
        } else {
            log::warn!("no sample fell inside the entropy ball of radius {eps}");
        }
        ball_summary = Some(BallSummary {
            epsilon: eps,
            order,
            count: ball_prices.len(),
            min: ball_prices.iter().copied().reduce(f64::min),
            max: ball_prices.iter().copied().reduce(f64::max),
        });
    }

    let s = &report.summary;
    println!("samples     {} (seed {seed})", s.count);
    println!("price range [{:.4}, {:.4}]", s.min, s.max);
    println!(
        "analytical  [{:.4}, {:.4}]  within: {}",
        s.analytical_lower, s.analytical_upper, s.within_analytical_bounds
    );
    if let Some(b) = &ball_summary {
        match (b.min, b.max) {
            (Some(lo), Some(hi)) => println!(
                "ball eps={}  {} samples, price range [{lo:.4}, {hi:.4}]",
                b.epsilon, b.count
            ),
            _ => println!("ball eps={}  no samples inside", b.epsilon),
        }
    }
    out.json(
        "summary.json",
        &SampleSummary {
            count: report.batch.count(),
            seed,
            option: Some(opt),
            removed_non_equivalent: removed,
            prices: Some(report.summary.clone()),
            ball: ball_summary,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct CalibrationReport {
    period_moments: distrisk::ReturnMoments,
    horizon_periods: u32,
    horizon_moments: distrisk::ReturnMoments,
    amplitudes: [f64; 5],
    probs: [f64; 5],
    log_step: f64,
    u: f64,
    d: f64,
}

pub fn calibrate(cfg: &RunConfig, out: &mut OutDir) -> CliResult<()> {
    cfg.check_sources()?;
    let m = cfg.period_moments()?;
    let cal = cfg.calibration()?;
    let report = CalibrationReport {
        period_moments: m,
        horizon_periods: cfg.horizon_periods.unwrap_or(m.periods_per_year),
        horizon_moments: cal.horizon_moments,
        amplitudes: cal.amplitudes,
        probs: cal.probs,
        log_step: cal.log_step(),
        u: cal.amplitudes[0].powf(0.25),
        d: cal.amplitudes[4].powf(0.25),
    };
    println!(
        "moments     mean {:.6}  var {:.6}  skew {:.4}  ex.kurt {:.4}",
        m.mean, m.variance, m.skewness, m.excess_kurtosis
    );
    let a: Vec<String> = cal.amplitudes.iter().map(|x| format!("{x:.4}")).collect();
    let p: Vec<String> = cal.probs.iter().map(|x| format!("{x:.4}")).collect();
    println!("amplitudes  {}", a.join("  "));
    println!("probs       {}", p.join("  "));
    out.json("calibration.json", &report)?;
    Ok(())
}
