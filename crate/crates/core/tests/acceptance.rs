//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use mom_tournament::baselines::erm_least_squares;
use mom_tournament::datagen::{generate, sample_noise, true_l2_error, Design, Noise, ProblemSpec};
use mom_tournament::harness::{parse_csv, render_csv, run_experiment, ExperimentConfig, Method};
use mom_tournament::mom::deviation_radius;
use mom_tournament::oracle::{calibrate_oracle_constants_on_designs, OracleState};
use mom_tournament::pool::{greedy_packing, PoolStrategy};
use mom_tournament::theory::{
    mean_width_sparse_intersection, predicted_confidence, rate_full_space, rate_l1_ball, L1Branch, Regime,
};
use mom_tournament::tournament::{home_match, play_match, preliminary_round};
use mom_tournament::{
    make_block_partition, med_of_means, mom_mean_estimator, run_tournament, Candidate, CandidatePool, Outcome, Part,
    RngSpec, TournamentConfig,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn quantile(mut v: Vec<f64>, p: f64) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = ((v.len() as f64 * p).ceil() as usize).clamp(1, v.len());
    v[k - 1]
}

fn unit_direction(n_dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    let v: Vec<f64> = (0..n_dim).map(|_| StandardNormal.sample(rng)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

fn contract_problem(noise: Noise, n_per_part: usize) -> ProblemSpec {
    ProblemSpec {
        n_dim: 5,
        n_per_part,
        design: Design::GaussianIso,
        noise,
        t0: vec![1.0, 0.0, 0.0, 0.0, 0.0],
    }
}

fn contract_config(noise: Noise, n_per_part: usize, n_trials: usize, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(contract_problem(noise, n_per_part));
    cfg.n_trials = n_trials;
    cfg.base_seed = seed;
    cfg.pool.strategy = PoolStrategy::Shells { multiples: vec![0.5, 1.0, 2.0, 8.0], per_shell: 10 };
    cfg
}

fn mom_coverage() -> Verdict {
    let started = Instant::now();
    let (n, trials) = (1000, 10_000u64);
    let noise = Noise::SymmetrizedPareto { tail: 2.5, sigma: 1.0 };
    let mut ok = true;
    let mut detail = Vec::new();
    for delta in [0.1, 0.01] {
        let radius = deviation_radius(1.0, n, delta).unwrap();
        let mut failures = 0u64;
        for t in 0..trials {
            let w = sample_noise(noise, n, RngSpec::new(1, t)).unwrap();
            let est = mom_mean_estimator(&w, delta, Some(1.0)).unwrap();
            if est.value.abs() > radius {
                failures += 1;
            }
        }
        let frac = failures as f64 / trials as f64;
        ok &= frac <= delta;
        detail.push(format!("delta={delta}: {failures}/{trials} outside radius {radius:.4}"));
    }
    let secs = started.elapsed().as_secs_f64();
    ok &= secs < 30.0;
    detail.push(format!("{secs:.1}s single-threaded"));
    verdict(ok, detail.join("; "))
}

fn estimation_contract() -> Verdict {
    let mut cfg = contract_config(Noise::StudentT { dof: 5.0, sigma: 1.0 }, 1000, 500, 2);
    cfg.methods = vec![Method::Tournament];
    let r = cfg.base_r().unwrap();
    let bound = cfg.tournament.beta / cfg.tournament.alpha * r;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let started = Instant::now();
    let rows = pool.install(|| run_experiment(&cfg)).unwrap().rows;
    let secs = started.elapsed().as_secs_f64();
    let hits = rows.iter().filter(|x| x.error_l2 <= bound).count();
    let frac = hits as f64 / rows.len() as f64;
    verdict(
        frac >= 0.95 && secs < 120.0,
        format!("{hits}/{} within (beta/alpha) r = {bound:.4} (r = {r:.4}); {secs:.1}s on 4 threads", rows.len()),
    )
}

fn heavy_tail_separation() -> Verdict {
    let mut cfg = contract_config(Noise::SymmetrizedPareto { tail: 2.1, sigma: 1.0 }, 1000, 2000, 3);
    cfg.methods = vec![Method::Tournament, Method::ErmLs];
    let rows = run_experiment(&cfg).unwrap().rows;
    let errors = |m: Method| -> Vec<f64> { rows.iter().filter(|x| x.method == m).map(|x| x.error_l2).collect() };
    let t = quantile(errors(Method::Tournament), 0.99);
    let e = quantile(errors(Method::ErmLs), 0.99);
    verdict(t <= e, format!("p99 error: tournament {t:.4}, ERM {e:.4} over 2000 trials"))
}

fn confidence_trend() -> Verdict {
    let r = 0.03;
    let trials = 1000usize;
    let mut freqs = Vec::new();
    for n in [250usize, 500, 1000, 2000] {
        let mut cfg = contract_config(Noise::StudentT { dof: 5.0, sigma: 1.0 }, n, trials, 4);
        cfg.methods = vec![Method::Tournament];
        cfg.base_r = Some(r);
        let bound = cfg.tournament.beta / cfg.tournament.alpha * r;
        let rows = run_experiment(&cfg).unwrap().rows;
        let fails = rows.iter().filter(|x| !(x.error_l2 <= bound)).count();
        freqs.push((n, fails as f64 / trials as f64));
    }
    let se = |p: f64| (p * (1.0 - p) / trials as f64).sqrt();
    let ok = freqs.windows(2).all(|w| w[1].1 <= w[0].1 + 2.0 * (se(w[0].1).powi(2) + se(w[1].1).powi(2)).sqrt());
    let text: Vec<String> = freqs.iter().map(|(n, p)| format!("N={n}: {p:.3}")).collect();
    verdict(ok, format!("failure frequency at r/sigma = {r}: {}", text.join(", ")))
}

fn noiseless_exactness() -> Verdict {
    let n_dim = 5;
    let mut tournament_hits = 0;
    let mut worst_erm = 0.0f64;
    for t in 0..100u64 {
        let trial = RngSpec::new(5, t);
        let mut rng = trial.derive(9).rng();
        let t0: Vec<f64> = (0..n_dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let spec = ProblemSpec { t0: t0.clone(), noise: Noise::None, ..contract_problem(Noise::None, 500) };
        let data = generate(&spec, trial).unwrap();
        let r = 0.1;
        let mut vectors: Vec<Vec<f64>> = [0.5, 1.0, 2.0, 8.0]
            .iter()
            .flat_map(|m| (0..10).map(|_| unit_direction(n_dim, &mut rng).iter().zip(&t0).map(|(d, c)| c + d * m * r).collect::<Vec<_>>()).collect::<Vec<_>>())
            .collect();
        let at = rng.random_range(0..=vectors.len());
        vectors.insert(at, t0.clone());
        let pool = CandidatePool::new(vectors, "noiseless").unwrap();
        let out = run_tournament(&data, &pool, &TournamentConfig::with_r_sigma(r, 1.0)).unwrap();
        if out.champion.coeffs == t0 {
            tournament_hits += 1;
        }
        let erm = erm_least_squares(&data, &Part::ALL).unwrap();
        worst_erm = worst_erm.max(true_l2_error(&erm, &spec).unwrap());
    }
    verdict(
        tournament_hits == 100 && worst_erm <= 1e-8,
        format!("tournament returned t0 in {tournament_hits}/100; worst ERM error {worst_erm:.2e}"),
    )
}

fn oracle_isomorphy() -> Verdict {
    let (n_dim, rows) = (5, 1024);
    let design = |seed: u64, t: u64| -> Vec<f64> {
        let spec = ProblemSpec { n_per_part: rows, ..contract_problem(Noise::None, rows) };
        generate(&spec, RngSpec::new(seed, t)).unwrap().part(Part::First).xs.to_vec()
    };
    let cal_designs: Vec<Vec<f64>> = (0..1000).map(|t| design(60, t)).collect();
    let refs: Vec<&[f64]> = cal_designs.iter().map(Vec::as_slice).collect();
    let mut rng = RngSpec::new(61, 0).rng();
    let zero = Candidate::new(1, vec![0.0; n_dim]).unwrap();
    let pairs: Vec<(Candidate, Candidate)> = (0..refs.len())
        .map(|_| {
            let scale = rng.random_range(-3.0f64..3.0).exp();
            let f = unit_direction(n_dim, &mut rng).iter().map(|v| v * scale).collect();
            (Candidate::new(0, f).unwrap(), zero.clone())
        })
        .collect();
    let cal = calibrate_oracle_constants_on_designs(&refs, n_dim, &[1, 2, 4, 8, 16], &pairs, 0.99, None).unwrap();
    let r = 0.1;
    let trials = 1000u64;
    let mut violations = 0;
    for t in 0..trials {
        let xs = design(62, t);
        let oracle = OracleState::new(&xs, n_dim, cal.ell, cal.alpha, cal.beta, r).unwrap();
        let dist = [1.0, 2.0, 4.0][t as usize % 3] * r;
        let f = Candidate::new(0, unit_direction(n_dim, &mut rng).iter().map(|v| v * dist).collect()).unwrap();
        let phi = oracle.phi(&f, &zero).unwrap();
        if !(cal.alpha * dist <= phi && phi <= cal.beta * dist) {
            violations += 1;
        }
    }
    verdict(
        violations as f64 <= 0.02 * trials as f64,
        format!(
            "calibrated alpha {:.4}, beta {:.4}, ell {}; {violations}/{trials} fresh pairs outside the sandwich",
            cal.alpha, cal.beta, cal.ell
        ),
    )
}

fn formulas() -> Verdict {
    let tol = 1e-12;
    let mut checks = Vec::new();
    let full = rate_full_space(5, 1000, 2.0).unwrap();
    checks.push(("rate_full_space r*", (full.r_star - 2.0 * 0.005f64.sqrt()).abs() <= tol));
    checks.push(("rate_full_space exponent", (full.confidence_exponent - 5.0).abs() <= tol));

    let large = rate_l1_ball(2.0, 1.5, 400, 20, 1.0, 1.0).unwrap();
    checks.push(("l1 v_Q = 0 for N > c2 n", large.v_q == 0.0));
    checks.push(("l1 v_M^2 = sigma^2 n / N", (large.v_m * large.v_m - 2.25 * 20.0 / 400.0).abs() <= tol));
    checks.push((
        "l1 large-N regime",
        large.prediction.regime == Regime::L1Ball { multiplier: L1Branch::LargeN, quadratic: L1Branch::LargeN },
    ));
    let small = rate_l1_ball(2.0, 1.0, 50, 100, 1.0, 1.0).unwrap();
    let vq2 = 4.0 / 50.0 * (200.0f64 / 50.0).ln();
    let vm2 = 2.0 / 50f64.sqrt() * (200.0 / (50f64.sqrt() * 2.0)).ln().sqrt();
    checks.push(("l1 small-N v_Q", (small.v_q * small.v_q - vq2).abs() <= tol));
    checks.push(("l1 small-N v_M", (small.v_m * small.v_m - vm2).abs() <= tol));
    checks.push(("l1 r* = max", small.prediction.r_star == small.v_q.max(small.v_m)));

    for n in [1usize, 7, 64, 1000] {
        let w = mean_width_sparse_intersection(n as f64, n).unwrap();
        checks.push(("mean width s = n", (w - (n as f64).sqrt()).abs() <= tol));
    }
    for (n, r, s, c0) in [(1000usize, 0.1, 1.0, 0.5), (50, 3.0, 2.0, 0.01), (7, 0.3, 0.2, 2.0)] {
        let p = predicted_confidence(n, r, s, c0).unwrap();
        let expect = 1.0 - (-c0 * n as f64 * f64::min(1.0, (r / s) * (r / s))).exp();
        checks.push(("predicted_confidence", (p - expect).abs() <= tol));
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    verdict(
        failed.is_empty(),
        if failed.is_empty() { format!("{} formula checks within 1e-12", checks.len()) } else { format!("failed: {failed:?}") },
    )
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(Config { cases, failure_persistence: None, ..Config::default() }, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

#[derive(Debug, Clone)]
struct Instance {
    n_dim: usize,
    n: usize,
    seed: u64,
    pool: Vec<Vec<f64>>,
    r: f64,
    n_blocks: usize,
}

fn instance() -> impl Strategy<Value = Instance> {
    (1usize..4, 2usize..7, 20usize..80, any::<u64>(), 0.0f64..1.5, 1usize..8).prop_flat_map(|(n_dim, k, n, seed, r, b)| {
        prop::collection::vec(prop::collection::vec(-2.0f64..2.0, n_dim), k)
            .prop_map(move |pool| Instance { n_dim, n, seed, pool, r, n_blocks: b.min(n) })
    })
}

fn instance_data(inst: &Instance) -> mom_tournament::Dataset {
    let spec = ProblemSpec {
        n_dim: inst.n_dim,
        n_per_part: inst.n,
        design: Design::GaussianIso,
        noise: Noise::StudentT { dof: 3.0, sigma: 1.0 },
        t0: vec![0.5; inst.n_dim],
    };
    generate(&spec, RngSpec::new(inst.seed, 0)).unwrap()
}

fn structural() -> Verdict {
    let mut results: Vec<(&str, Result<(), String>)> = Vec::new();
    let mut run = |name: &'static str, outcome: Result<(), String>| results.push((name, outcome));

    run(
        "match antisymmetry",
        runner(48)
            .run(&instance(), |inst| {
                let data = instance_data(&inst);
                let p1 = data.part(Part::First);
                let oracle = OracleState::new(p1.xs, inst.n_dim, 2, 0.5, 2.0, inst.r).unwrap();
                let partition = make_block_partition(inst.n, inst.n_blocks).unwrap();
                let p2 = data.part(Part::Second);
                let pool = CandidatePool::new(inst.pool.clone(), "prop").unwrap();
                for f in pool.candidates() {
                    for h in pool.candidates() {
                        let fh = play_match(f, h, &partition, &p2, &oracle).unwrap();
                        let hf = play_match(h, f, &partition, &p2, &oracle).unwrap();
                        prop_assert_eq!(hf, fh.mirrored());
                    }
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    let round = |inst: &Instance| {
        let data = instance_data(inst);
        let p1 = data.part(Part::First);
        let oracle = OracleState::new(p1.xs, inst.n_dim, 2, 0.5, 2.0, inst.r).unwrap();
        let partition = make_block_partition(inst.n, inst.n_blocks).unwrap();
        let pool = CandidatePool::new(inst.pool.clone(), "prop").unwrap();
        preliminary_round(&pool, &partition, &data.part(Part::Second), &oracle).unwrap()
    };
    run(
        "abandoned-match neutrality",
        runner(48)
            .run(&instance(), |inst| {
                let q = round(&inst);
                for rec in q.round_log.iter().filter(|r| r.outcome == Outcome::Abandoned) {
                    prop_assert_eq!((rec.blocks_won_f, rec.blocks_won_h, rec.loser()), (0, 0, None));
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    run(
        "qualifier zero-loss soundness",
        runner(48)
            .run(&instance(), |inst| {
                let q = round(&inst);
                let losers: std::collections::BTreeSet<usize> = q.round_log.iter().filter_map(|r| r.loser()).collect();
                let expect: Vec<usize> = (0..inst.pool.len()).filter(|i| !losers.contains(i)).collect();
                prop_assert_eq!(q.ids, expect);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    run(
        "champion home-match replay",
        runner(48)
            .run(&instance(), |inst| {
                let data = instance_data(&inst);
                let pool = CandidatePool::new(inst.pool.clone(), "prop").unwrap();
                let out = run_tournament(&data, &pool, &TournamentConfig::with_r_sigma(inst.r.max(0.05), 1.0)).unwrap();
                let partition = make_block_partition(inst.n, out.n_blocks).unwrap();
                let p3 = data.part(Part::Third);
                if !out.champions.fallback_used {
                    for &q in out.qualifiers.ids.iter().filter(|&&q| q != out.champion.id) {
                        prop_assert!(home_match(&out.champion, pool.get(q).unwrap(), &partition, &p3, out.r1).unwrap());
                    }
                }
                for rec in &out.champions.home_match_log {
                    let held = home_match(pool.get(rec.f_id).unwrap(), pool.get(rec.h_id).unwrap(), &partition, &p3, out.r1)
                        .unwrap();
                    prop_assert_eq!(held, rec.outcome == Outcome::FWins);
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    run(
        "MoM sort-oracle equivalence",
        runner(256)
            .run(&(prop::collection::vec(-1e6f64..1e6, 1..300), 1usize..20), |(values, ell)| {
                prop_assume!(ell <= values.len());
                let k = values.len() / ell;
                let m = values.len() / k;
                let mut means: Vec<f64> = (0..k).map(|j| values[j * m..(j + 1) * m].iter().sum::<f64>() / m as f64).collect();
                means.sort_by(f64::total_cmp);
                prop_assert_eq!(med_of_means(&values, ell).unwrap().value, means[(k - 1) / 2]);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    run(
        "greedy-packing separation",
        runner(128)
            .run(&(prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 1..80), 0.05f64..1.0), |(points, eps)| {
                let kept = greedy_packing(&points, eps).unwrap();
                let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
                for (i, &a) in kept.iter().enumerate() {
                    for &b in &kept[i + 1..] {
                        prop_assert!(dist(&points[a], &points[b]) >= eps);
                    }
                }
                for p in &points {
                    prop_assert!(kept.iter().any(|&k| dist(p, &points[k]) < eps || dist(p, &points[k]) == 0.0));
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    let mut cfg = contract_config(Noise::StudentT { dof: 3.0, sigma: 1.0 }, 200, 20, 8);
    cfg.methods = vec![Method::Tournament, Method::ErmLs, Method::MomRiskMin];
    let rows = run_experiment(&cfg).unwrap().rows;
    let text = render_csv(&rows);
    run(
        "CSV round-trip",
        match parse_csv(&text) {
            Ok(parsed) if parsed == rows && render_csv(&parsed) == text => Ok(()),
            Ok(_) => Err("parsed rows differ".into()),
            Err(e) => Err(e.to_string()),
        },
    );
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let again = single.install(|| render_csv(&run_experiment(&cfg).unwrap().rows));
    run("full-pipeline determinism", if again == text { Ok(()) } else { Err("CSV bytes differ".into()) });

    let failed: Vec<String> = results.iter().filter_map(|(n, r)| r.as_ref().err().map(|e| format!("{n}: {e}"))).collect();
    verdict(
        failed.is_empty(),
        if failed.is_empty() {
            format!("{} properties hold: {}", results.len(), results.iter().map(|r| r.0).collect::<Vec<_>>().join(", "))
        } else {
            failed.join("; ")
        },
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("MoM deviation coverage", mom_coverage),
        ("tournament estimation contract", estimation_contract),
        ("heavy-tail separation", heavy_tail_separation),
        ("confidence-exponent trend", confidence_trend),
        ("noiseless exactness", noiseless_exactness),
        ("oracle isomorphy", oracle_isomorphy),
        ("formula values", formulas),
        ("structural properties", structural),
    ];
    let mut all = true;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        all &= v.pass;
        println!("criterion {} {name}: {} ({})", i + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
