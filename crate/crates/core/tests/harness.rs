use mom_tournament::datagen::{Design, Noise, ProblemSpec};
use mom_tournament::harness::{
    apply_sweep, calibrate_from_config, confidence_curve, emit_csv, emit_svg_curves, load_config, parse_csv,
    render_csv, render_svg, render_sweep_csv, run_experiment, run_sweep, run_trials, ConfidenceCurve,
    ExperimentConfig, Method, SweepParam, CSV_HEADER,
};
use mom_tournament::Error;

fn problem(noise: Noise, n_per_part: usize) -> ProblemSpec {
    ProblemSpec {
        n_dim: 5,
        n_per_part,
        design: Design::GaussianIso,
        noise,
        t0: vec![1.0, 0.0, 0.0, 0.0, 0.0],
    }
}

fn small_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(problem(Noise::StudentT { dof: 3.0, sigma: 1.0 }, 150));
    cfg.n_trials = 12;
    cfg.base_seed = 42;
    cfg.methods = vec![Method::Tournament, Method::ErmLs, Method::MomRiskMin];
    cfg
}

#[test]
fn noiseless_erm_single_trial() {
    let mut cfg = ExperimentConfig::new(problem(Noise::None, 50));
    cfg.n_trials = 1;
    cfg.methods = vec![Method::ErmLs];
    cfg.base_r = Some(0.1);
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.rows.len(), 1);
    assert!(report.rows[0].error_l2 <= 1e-8);
    assert!(report.failures.is_empty());
}

#[test]
fn noiseless_needs_explicit_r() {
    let cfg = ExperimentConfig::new(problem(Noise::None, 50));
    assert!(run_experiment(&cfg).is_err());
}

#[test]
fn identical_configs_give_identical_bytes() {
    let cfg = small_config();
    let a = render_csv(&run_experiment(&cfg).unwrap().rows);
    let b = render_csv(&run_experiment(&cfg).unwrap().rows);
    assert_eq!(a, b);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let c = pool.install(|| render_csv(&run_experiment(&cfg).unwrap().rows));
    assert_eq!(a, c);
    let mut other = cfg.clone();
    other.base_seed += 1;
    assert_ne!(a, render_csv(&run_experiment(&other).unwrap().rows));
}

#[test]
fn rows_are_ordered_and_trials_isolated() {
    let mut cfg = small_config();
    cfg.r_multipliers = vec![0.5, 1.0];
    let full = run_experiment(&cfg).unwrap().rows;
    assert_eq!(full.len(), 12 * 2 * 3);
    let keys: Vec<(u64, usize)> = full.iter().map(|r| (r.trial, r.stream_id as usize)).collect();
    assert!(keys.windows(2).all(|w| w[0].0 <= w[1].0));
    assert!(full.iter().all(|r| r.stream_id == r.trial && r.seed == 42));

    let subset = [7u64, 2, 11];
    let part = run_trials(&cfg, &subset).unwrap().rows;
    let expected: Vec<_> = subset
        .iter()
        .flat_map(|t| full.iter().filter(move |r| r.trial == *t).cloned())
        .collect();
    assert_eq!(render_csv(&part), render_csv(&expected));

    let mut shorter = cfg.clone();
    shorter.n_trials = 5;
    let prefix = run_experiment(&shorter).unwrap().rows;
    assert_eq!(render_csv(&prefix), render_csv(&full[..prefix.len()]));
}

#[test]
fn tournament_rows_carry_qualifier_counts() {
    let rows = run_experiment(&small_config()).unwrap().rows;
    for r in &rows {
        assert_eq!(r.qualifier_count.is_some(), r.method == Method::Tournament);
        assert!(r.error_l2.is_finite() && r.excess_risk >= 0.0);
        assert!((r.excess_risk - r.error_l2 * r.error_l2).abs() < 1e-12);
        assert_eq!(r.runtime_ms, 0.0);
    }
}

#[test]
fn failing_trials_become_rows() {
    let mut cfg = ExperimentConfig::new(ProblemSpec {
        n_dim: 8,
        n_per_part: 2,
        design: Design::Rademacher,
        noise: Noise::Gaussian { sigma: 1.0 },
        t0: vec![1.0; 8],
    });
    cfg.base_r = Some(0.5);
    cfg.n_trials = 3;
    cfg.methods = vec![Method::ErmLs];
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.rows.len(), 3);
    assert!(report.rows.iter().all(|r| r.error_l2.is_nan() && r.failed()));
    assert_eq!(report.failures.len(), 3);
    let parsed = parse_csv(&render_csv(&report.rows)).unwrap();
    assert!(parsed.iter().all(|r| r.error_l2.is_nan()));
}

#[test]
fn confidence_curve_examples() {
    let rows = run_experiment(&small_config()).unwrap().rows;
    let errors: Vec<f64> = rows.iter().filter(|r| r.method == Method::ErmLs).map(|r| r.error_l2).collect();
    let lo = errors.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = errors.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let thresholds: Vec<f64> = (0..=40).map(|i| lo * 0.5 + (hi * 1.5 - lo * 0.5) * i as f64 / 40.0).collect();
    let curve = confidence_curve(&rows, Method::ErmLs, &thresholds).unwrap();
    assert_eq!(curve[0].1, 0.0);
    assert_eq!(curve.last().unwrap().1, 1.0);
    assert!(curve.windows(2).all(|w| w[0].1 <= w[1].1));
    let erm_only: Vec<_> = rows.iter().filter(|r| r.method == Method::ErmLs).cloned().collect();
    assert!(confidence_curve(&erm_only, Method::Tournament, &thresholds).is_err());
}

#[test]
fn csv_and_svg_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("rows.csv");
    emit_csv(&[], &csv_path).unwrap();
    assert_eq!(std::fs::read_to_string(&csv_path).unwrap(), format!("{CSV_HEADER}\n"));

    let rows = run_experiment(&small_config()).unwrap().rows;
    emit_csv(&rows, &csv_path).unwrap();
    assert_eq!(parse_csv(&std::fs::read_to_string(&csv_path).unwrap()).unwrap(), rows);

    let missing = dir.path().join("no/such/dir/rows.csv");
    match emit_csv(&rows, &missing) {
        Err(Error::Io { path, .. }) => assert_eq!(path, missing),
        other => panic!("{other:?}"),
    }

    let thresholds = [0.05, 0.1, 0.2, 0.4];
    let curves: Vec<ConfidenceCurve> = [Method::Tournament, Method::ErmLs]
        .into_iter()
        .map(|m| ConfidenceCurve { label: m.to_string(), points: confidence_curve(&rows, m, &thresholds).unwrap() })
        .collect();
    let svg = render_svg(&curves);
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(svg.contains(">tournament<") && svg.contains(">erm_ls<"));
    let svg_path = dir.path().join("curves.svg");
    emit_svg_curves(&curves, &svg_path).unwrap();
    assert_eq!(std::fs::read_to_string(&svg_path).unwrap(), svg);
}

#[test]
fn sweeps() {
    let cfg = small_config();
    let bigger = apply_sweep(&cfg, SweepParam::N, 300.0).unwrap();
    assert_eq!(bigger.problem.n_per_part, 300);
    let wider = apply_sweep(&cfg, SweepParam::NDim, 3.0).unwrap();
    assert_eq!(wider.problem.t0.len(), 3);
    let tail = apply_sweep(&cfg, SweepParam::NoiseTail, 7.0).unwrap();
    assert_eq!(tail.problem.noise, Noise::StudentT { dof: 7.0, sigma: 1.0 });
    assert!(apply_sweep(&cfg, SweepParam::N, 2.5).is_err());
    assert!(apply_sweep(&cfg, SweepParam::NoiseTail, 1.5).is_err());
    let mut gauss = cfg.clone();
    gauss.problem.noise = Noise::Gaussian { sigma: 1.0 };
    assert!(apply_sweep(&gauss, SweepParam::NoiseTail, 3.0).is_err());

    let mut quick = cfg.clone();
    quick.n_trials = 3;
    let runs = run_sweep(&quick, SweepParam::RMult, &[0.5, 2.0]).unwrap();
    let table: Vec<_> = runs.iter().map(|(v, rep)| (*v, rep.rows.clone())).collect();
    let text = render_sweep_csv(SweepParam::RMult, &table);
    assert!(text.starts_with(&format!("sweep_param,sweep_value,{CSV_HEADER}\n")));
    assert!(text.lines().nth(1).unwrap().starts_with("r_mult,5.0000000000000000e-1,"));
    let parsed = parse_csv(&text).unwrap();
    let flat: Vec<_> = table.into_iter().flat_map(|(_, rows)| rows).collect();
    assert_eq!(parsed, flat);
}

#[test]
fn config_file_drives_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.conf");
    std::fs::write(
        &path,
        "n_dim = 3\nn_per_part = 90\nnoise = pareto:2.5\nt0 = 1, 2, 3\nn_trials = 4\nmethods = tournament, mom_risk_min\n\
         pool.strategy = random_ball\npool.count = 15\npool.radius = 3r\n",
    )
    .unwrap();
    let cfg = load_config(&path).unwrap();
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.rows.len(), 8);
    assert!(report.failures.is_empty());
    assert!(matches!(load_config(&dir.path().join("missing.conf")), Err(Error::Io { .. })));
}

#[test]
fn calibration_from_config_is_sane() {
    let mut cfg = ExperimentConfig::new(problem(Noise::Gaussian { sigma: 1.0 }, 512));
    cfg.calibration.pairs = 300;
    cfg.calibration.ell_grid = vec![2, 8];
    let a = calibrate_from_config(&cfg).unwrap();
    let target = (2.0 / std::f64::consts::PI).sqrt();
    assert!(a.alpha < target && target < a.beta, "{a:?}");
    assert!([2, 8].contains(&a.ell));
    assert_eq!(a, calibrate_from_config(&cfg).unwrap());
}

#[test]
fn estimation_contract_through_the_harness() {
    let mut cfg = ExperimentConfig::new(problem(Noise::StudentT { dof: 3.0, sigma: 1.0 }, 1000));
    cfg.n_trials = 500;
    cfg.methods = vec![Method::Tournament];
    let bound = cfg.tournament.qualifier_radius() / cfg.tournament.r * cfg.base_r().unwrap();
    let rows = run_experiment(&cfg).unwrap().rows;
    let hits = rows.iter().filter(|r| r.error_l2 <= bound).count();
    assert!(hits as f64 >= 0.95 * rows.len() as f64, "{hits}/{}", rows.len());
}
