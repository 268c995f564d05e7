//! Cross-module integration at small scale: engine plumbing, audit
//! invariants and report reproducibility.

use std::collections::HashSet;

use vascr_core::interpolator::load_network;
use vascr_core::nested::{
    build_inputs, compute_delta_at_knots, run_nested, EngineMode, NeuralEngine, PipelineConfig,
};
use vascr_core::valuation::Valuator;

fn mini_config() -> PipelineConfig {
    let mut cfg = PipelineConfig::desk();
    cfg.run.master_seed = 3;
    cfg.run.scenarios = 300;
    cfg.run.knots = 6;
    cfg.portfolio.input_size = 60;
    cfg.portfolio.representatives = 8;
    cfg.portfolio.training = 10;
    cfg.portfolio.validation = 10;
    cfg.valuation.paths = 50;
    cfg.training.max_iters = 1_500;
    cfg
}

#[test]
fn network_mode_never_runs_inner_simulation_on_the_input_portfolio() {
    let cfg = mini_config();
    let inputs = build_inputs(&cfg).unwrap();
    let valuator = Valuator::new(
        cfg.market_model(),
        inputs.mortality.clone(),
        cfg.valuation_config(),
    );
    let mut engine = NeuralEngine::new(
        &valuator,
        &inputs.representatives,
        &inputs.training,
        &inputs.validation,
        cfg.feature_ranges(),
        cfg.training_config(),
    );
    let knots = [0.7, 0.9, 1.1, 1.3];
    compute_delta_at_knots(&knots, &inputs.input, &mut engine, 0.03).unwrap();

    let allowed: HashSet<u64> = inputs
        .representatives
        .iter()
        .chain(&inputs.training)
        .chain(&inputs.validation)
        .map(|c| c.id)
        .collect();
    let touched = valuator.valued_contract_ids();
    assert!(!touched.is_empty());
    assert!(
        touched.is_subset(&allowed),
        "inner simulation touched input-portfolio contracts: {:?}",
        touched.difference(&allowed).take(5).collect::<Vec<_>>()
    );
}

#[test]
fn reports_are_identical_up_to_timings_for_a_fixed_master_seed() {
    let cfg = mini_config();
    let inputs = build_inputs(&cfg).unwrap();
    let a = run_nested(&inputs, EngineMode::Nn, &cfg).unwrap();
    let b = run_nested(&inputs, EngineMode::Nn, &cfg).unwrap();

    let mut ja = serde_json::to_value(&a.report).unwrap();
    let mut jb = serde_json::to_value(&b.report).unwrap();
    ja.as_object_mut().unwrap().remove("timings");
    jb.as_object_mut().unwrap().remove("timings");
    assert_eq!(
        serde_json::to_string(&ja).unwrap(),
        serde_json::to_string(&jb).unwrap()
    );
}

#[test]
fn both_engines_produce_comparable_reports_at_mini_scale() {
    let cfg = mini_config();
    let inputs = build_inputs(&cfg).unwrap();
    let mc = run_nested(&inputs, EngineMode::Mc, &cfg).unwrap().report;
    let nn = run_nested(&inputs, EngineMode::Nn, &cfg).unwrap().report;

    for report in [&mc, &nn] {
        assert_eq!(report.knots.len(), 6);
        assert_eq!(report.n_scenarios, 300);
        assert!(report.mvl0 > 0.0);
        assert!(report.scr.is_finite());
        // The loss quantile and the implied liability quantile agree.
        let implied = (report.scr + report.mvl0) * (1.0 + cfg.market.risk_free_rate);
        assert!((implied - report.mvl1_q995).abs() < 1e-6);
    }
    assert!(mc.fine_tune.is_none());
    let ft = nn.fine_tune.as_ref().unwrap();
    assert_eq!(ft.knots, 6);
    // Same sign and order of magnitude; accuracy bounds live in the
    // acceptance suite at desk scale.
    assert!(nn.scr > 0.0 && mc.scr > 0.0);
    assert!(nn.scr / mc.scr > 0.2 && nn.scr / mc.scr < 5.0);
}

#[test]
fn a_report_is_reproducible_from_its_config_echo() {
    let cfg = mini_config();
    let inputs = build_inputs(&cfg).unwrap();
    let original = run_nested(&inputs, EngineMode::Nn, &cfg).unwrap().report;

    // Round-trip the echo through JSON, rebuild everything from it alone.
    let echo_json = serde_json::to_string(&original.config).unwrap();
    let echo: PipelineConfig = serde_json::from_str(&echo_json).unwrap();
    assert_eq!(echo, cfg);
    let inputs_again = build_inputs(&echo).unwrap();
    let reproduced = run_nested(&inputs_again, echo.run.mode, &echo).unwrap().report;

    let strip = |r: &vascr_core::nested::ScrReport| {
        let mut v = serde_json::to_value(r).unwrap();
        v.as_object_mut().unwrap().remove("timings");
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(strip(&original), strip(&reproduced));
}

#[test]
fn network_artifacts_round_trip_from_the_run() {
    let cfg = mini_config();
    let inputs = build_inputs(&cfg).unwrap();
    let artifacts = run_nested(&inputs, EngineMode::Nn, &cfg).unwrap();
    let (network, normalizer) = artifacts.network.as_ref().unwrap();

    let mut buf = Vec::new();
    vascr_core::interpolator::save_network(&mut buf, network, *normalizer).unwrap();
    let (loaded, loaded_norm): (vascr_core::Network, f64) =
        load_network(&mut buf.as_slice()).unwrap();
    assert_eq!(&loaded, network);
    assert_eq!(loaded_norm, *normalizer);

    let trace = artifacts.trace.as_ref().unwrap();
    assert_eq!(trace.smoothed_validation.len(), trace.records.len());
    assert_eq!(trace.trend.len(), trace.records.len());
}
