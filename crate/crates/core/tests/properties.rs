use distrisk::{
    entropy::{relative_entropy, solve_memm},
    lattice::{Lattice, LatticeSpec},
    polytope::{ConvexCombination, MeanPolytope, Pmf, SupportGrid},
    pricing::{price_american, price_european, terminal_distribution, OptionSpec},
};
use proptest::prelude::*;

/// Ascending grid of `d` points built from positive gaps, with a mean strictly inside.
fn polytope(max_d: usize) -> impl Strategy<Value = MeanPolytope> {
    (2..=max_d)
        .prop_flat_map(|d| {
            (
                0.1f64..2.0,
                prop::collection::vec(0.05f64..1.0, d - 1),
                0.02f64..0.98,
            )
        })
        .prop_map(|(start, gaps, t)| {
            let mut pts = vec![start];
            for g in gaps {
                pts.push(pts.last().unwrap() + g);
            }
            let mu = pts[0] + t * (pts[pts.len() - 1] - pts[0]);
            MeanPolytope::new(SupportGrid::new(pts).unwrap(), mu).unwrap()
        })
}

fn lattice_spec(max_states: usize, max_steps: usize) -> impl Strategy<Value = LatticeSpec> {
    (1.05f64..1.6, 0.4f64..0.95, 2..=max_states, 1..=max_steps, 0.0f64..1.0).prop_map(
        |(u, d, states, steps, t)| {
            let lo = d.powi(states as i32 - 1);
            let hi = u.powi(states as i32 - 1);
            // keep 1+R strictly between the extreme amplitudes
            let gross = lo + (0.05 + 0.9 * t) * (hi - lo);
            LatticeSpec {
                u,
                d,
                states,
                rate: gross - 1.0,
                spot: 100.0,
                steps,
            }
        },
    )
}

/// Uniform-on-the-simplex weights from positive raw draws.
fn weights(n: usize, raw: &[f64]) -> ConvexCombination {
    let w: Vec<f64> = raw.iter().take(n).copied().collect();
    let s: f64 = w.iter().sum();
    ConvexCombination::new(w.into_iter().map(|x| x / s).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn generators_are_feasible_two_point_pmfs(poly in polytope(7)) {
        let gens = poly.enumerate_generators();
        for g in gens.vertices() {
            prop_assert!(poly.contains(&g.pmf));
            prop_assert!(g.pmf.support().count() <= 2);
        }
    }

    #[test]
    fn generator_count_matches_straddling_pairs(poly in polytope(7)) {
        let y = poly.grid().points();
        let mu = poly.mu();
        let mut brute = 0;
        for j1 in 0..y.len() {
            for j2 in j1 + 1..y.len() {
                if y[j1] < mu && mu < y[j2] {
                    brute += 1;
                }
            }
        }
        if y.contains(&mu) {
            brute += 1;
        }
        prop_assert_eq!(poly.enumerate_generators().count(), brute);
    }

    #[test]
    fn combinations_stay_in_polytope(
        poly in polytope(7),
        raw in prop::collection::vec(0.01f64..1.0, 30),
    ) {
        let gens = poly.enumerate_generators();
        let n = gens.count();
        prop_assume!(n <= raw.len());
        let q = gens.combine(&weights(n, &raw)).unwrap();
        prop_assert!(poly.contains(&q));
    }

    #[test]
    fn convex_order_extremes_solve_strictly_convex_problems(
        poly in polytope(7),
        c in 0.0f64..3.0,
    ) {
        let phi: Vec<f64> = poly.grid().points().iter().map(|y| (y - c).powi(2) + y.exp()).collect();
        let b = poly.expectation_bounds(&phi).unwrap();
        let ext = poly.convex_order_extremes();
        prop_assert_eq!(b.argmin.pair, ext.q_low.pair);
        prop_assert_eq!(b.argmax.pair, ext.q_up.pair);
    }

    #[test]
    fn memm_is_a_martingale_measure(
        spec in lattice_spec(6, 1),
        raw in prop::collection::vec(0.05f64..1.0, 6),
    ) {
        let lat = Lattice::build(spec).unwrap();
        let amps = lat.amplitudes();
        let p = amps.pmf_from_descending(&normalise(&raw[..spec.states])).unwrap();
        let sol = solve_memm(&p, lat.gross_rate()).unwrap();
        prop_assert!((sol.q_tilde.mean() - lat.gross_rate()).abs() < 1e-10);
        prop_assert!(sol.q_tilde.has_full_support());
    }

    #[test]
    fn relative_entropy_is_nonnegative(
        raw_q in prop::collection::vec(0.01f64..1.0, 5),
        raw_p in prop::collection::vec(0.01f64..1.0, 5),
    ) {
        let grid = SupportGrid::new(vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let q = Pmf::new(grid.clone(), normalise(&raw_q)).unwrap();
        let p = Pmf::new(grid, normalise(&raw_p)).unwrap();
        prop_assert!(relative_entropy(&q, &p).unwrap().value() >= 0.0);
        prop_assert!(relative_entropy(&q, &q).unwrap().value().abs() < 1e-15);
    }

    #[test]
    fn convolution_matches_path_enumeration(
        spec in lattice_spec(4, 4),
        raw in prop::collection::vec(0.01f64..1.0, 8),
        strike in 0.0f64..200.0,
    ) {
        let lat = Lattice::build(spec).unwrap();
        let gens = lat.risk_neutral_generators().unwrap();
        let q = gens.combine(&weights(gens.count(), &raw)).unwrap();
        let probs = lat.amplitudes().descending_probs(&q);
        let amps = lat.amplitudes().descending().to_vec();
        let l = spec.states;
        let n = spec.steps;
        let mut expected = 0.0;
        for path in 0..l.pow(n as u32) {
            let (mut s, mut w, mut code) = (spec.spot, 1.0, path);
            for _ in 0..n {
                let k = code % l;
                code /= l;
                s *= amps[k];
                w *= probs[k];
            }
            expected += w * (s - strike).max(0.0);
        }
        expected /= lat.gross_rate().powi(n as i32);
        let got = price_european(&q, &lat, &OptionSpec::european_call(strike, n)).unwrap();
        prop_assert!((got - expected).abs() <= 1e-12 * expected.abs().max(1.0));

        let td = terminal_distribution(&q, &lat, n).unwrap();
        prop_assert_eq!(td.terminal_prices.len(), n * (l - 1) + 1);
        prop_assert!((td.down_count_pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn put_call_parity(
        spec in lattice_spec(5, 6),
        raw in prop::collection::vec(0.01f64..1.0, 12),
        strike in 10.0f64..200.0,
    ) {
        let lat = Lattice::build(spec).unwrap();
        let gens = lat.risk_neutral_generators().unwrap();
        let n = gens.count();
        prop_assume!(n <= raw.len());
        let q = gens.combine(&weights(n, &raw)).unwrap();
        let steps = spec.steps;
        let c = price_european(&q, &lat, &OptionSpec::european_call(strike, steps)).unwrap();
        let p = price_european(&q, &lat, &OptionSpec::european_put(strike, steps)).unwrap();
        let parity = spec.spot - strike / lat.gross_rate().powi(steps as i32);
        prop_assert!((c - p - parity).abs() < 1e-9);
    }

    #[test]
    fn american_call_equals_european_without_dividends(
        spec in lattice_spec(5, 8),
        raw in prop::collection::vec(0.01f64..1.0, 12),
        strike in 10.0f64..200.0,
    ) {
        prop_assume!(spec.rate >= 0.0);
        let lat = Lattice::build(spec).unwrap();
        let gens = lat.risk_neutral_generators().unwrap();
        let n = gens.count();
        prop_assume!(n <= raw.len());
        let q = gens.combine(&weights(n, &raw)).unwrap();
        let euro = OptionSpec::european_call(strike, spec.steps);
        let e = price_european(&q, &lat, &euro).unwrap();
        let a = price_american(&q, &lat, &euro.american()).unwrap();
        prop_assert!((a - e).abs() < 1e-10 * e.max(1.0));
    }

    #[test]
    fn american_put_dominates_european(
        spec in lattice_spec(4, 6),
        strike in 10.0f64..200.0,
    ) {
        let lat = Lattice::build(spec).unwrap();
        let q = lat.risk_neutral_polytope().unwrap().convex_order_extremes().q_up.pmf;
        let euro = OptionSpec::european_put(strike, spec.steps);
        let e = price_european(&q, &lat, &euro).unwrap();
        let a = price_american(&q, &lat, &euro.american()).unwrap();
        prop_assert!(a >= e - 1e-12 * e.max(1.0));
        prop_assert!(a >= (strike - spec.spot).max(0.0) - 1e-12);
    }

    #[test]
    fn recombining_node_counts(spec in lattice_spec(6, 8)) {
        let lat = Lattice::build(spec).unwrap();
        for n in 0..=spec.steps {
            prop_assert_eq!(lat.nodes().step(n).len(), n * (spec.states - 1) + 1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bounds_match_brute_force_grid(
        poly in polytope(5),
        phi_raw in prop::collection::vec(-2.0f64..2.0, 5),
    ) {
        // exhaustive search over the simplex with step 0.01, keeping points
        // whose mean is on the constraint up to the lattice spacing
        let y = poly.grid().points().to_vec();
        let d = y.len();
        let phi = &phi_raw[..d];
        let b = poly.expectation_bounds(phi).unwrap();
        let steps = 100usize;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut visit = |p: &[f64]| {
            lo = lo.min(p.iter().zip(phi).map(|(a, b)| a * b).sum());
            hi = hi.max(p.iter().zip(phi).map(|(a, b)| a * b).sum());
        };
        // the last two coordinates are fixed by total mass and mean
        let mut idx = vec![0usize; d.saturating_sub(2)];
        loop {
            let used: usize = idx.iter().sum();
            if used <= steps {
                let mut p: Vec<f64> = idx.iter().map(|k| *k as f64 / steps as f64).collect();
                let rest = 1.0 - p.iter().sum::<f64>();
                let partial: f64 = p.iter().zip(&y).map(|(a, b)| a * b).sum();
                let (ya, yb) = (y[d - 2], y[d - 1]);
                // pa + pb = rest, pa ya + pb yb = mu - partial
                let pb = (poly.mu() - partial - rest * ya) / (yb - ya);
                let pa = rest - pb;
                if pa >= -1e-12 && pb >= -1e-12 {
                    p.push(pa.max(0.0));
                    p.push(pb.max(0.0));
                    visit(&p);
                }
            }
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] <= steps {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
        // vertices are never missed by more than one grid step of phi-variation
        let slack = 0.01 * 4.0 * phi.iter().fold(0.0f64, |m, v| m.max(v.abs())) * d as f64;
        prop_assert!(b.lower <= lo + 1e-6);
        prop_assert!(b.upper >= hi - 1e-6);
        prop_assert!(lo - b.lower <= slack);
        prop_assert!(b.upper - hi <= slack);
    }
}

fn normalise(raw: &[f64]) -> Vec<f64> {
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}
