use blowup_core::simulate::{
    run_scenario, BlowUpStatus, Comparison, ScaleChoice, ScenarioConfig, ScenarioRun,
};

fn t_hi(run: &ScenarioRun) -> f64 {
    run.report.blowup.t_interval.expect("blew up").1
}

fn fixed_scale(mut c: ScenarioConfig) -> ScenarioConfig {
    let a = blowup_core::simulate::assess(&c).unwrap();
    c.init.scale = ScaleChoice::Fixed(a.scale.unwrap());
    c
}

#[test]
fn theorem1_preset_confirms_bound() {
    let run = run_scenario(&ScenarioConfig::theorem1_preset()).unwrap();
    let r = &run.report;
    assert!(r.verdict.satisfied);
    assert_eq!(r.blowup.status, BlowUpStatus::BlewUp);
    assert_eq!(r.comparison, Comparison::Confirmed);
    assert!(t_hi(&run) <= r.verdict.t_bound().unwrap());
}

#[test]
fn theorem1_refinement_stability() {
    let base = fixed_scale(ScenarioConfig::theorem1_preset());
    let t0 = t_hi(&run_scenario(&base).unwrap());

    let mut half_dt = base.clone();
    half_dt.integration.dt /= 2.0;
    let t1 = t_hi(&run_scenario(&half_dt).unwrap());
    assert!((t1 - t0).abs() < 0.02 * t0, "dt halving: {t0} -> {t1}");

    let mut half_dx = base.clone();
    half_dx.domain = half_dx.domain.with_resolution(2 * base.domain.resolution[0]);
    let t2 = t_hi(&run_scenario(&half_dx).unwrap());
    assert!((t2 - t0).abs() < 0.05 * t0, "dx halving: {t0} -> {t2}");
}

#[test]
fn concavity_monitor_holds_on_presets() {
    for c in [ScenarioConfig::theorem1_preset(), ScenarioConfig::theorem2_preset()] {
        let run = run_scenario(&c).unwrap();
        let m = &run.report.monitors;
        assert!(m.concavity_checked > 50, "{}", m.concavity_checked);
        assert_eq!(m.concavity_violations, 0, "min {}", m.concavity_min);
        assert_eq!(m.schwarz_violations, 0);
    }
}

#[test]
fn theorem2_preset_confirms_bound_and_energy_growth() {
    let run = run_scenario(&ScenarioConfig::theorem2_preset()).unwrap();
    let r = &run.report;
    assert!(r.verdict.satisfied);
    assert_eq!(r.comparison, Comparison::Confirmed);
    assert!(r.m_residual.unwrap() <= 1e-10);
    assert!(r.monitors.e1_checked > 0);
    assert_eq!(r.monitors.e1_violations, 0);
}

#[test]
fn identical_config_gives_identical_series() {
    let c = ScenarioConfig::theorem2_preset();
    let a = run_scenario(&c).unwrap();
    let b = run_scenario(&c).unwrap();
    assert_eq!(a.series, b.series);
    assert_eq!(a.report, b.report);
}

#[test]
fn sub_threshold_scale_is_finding_or_no_prediction() {
    let mut c = ScenarioConfig::theorem1_preset();
    c.init.scale = ScaleChoice::Fixed(0.5);
    c.integration.t_max = 0.5;
    let run = run_scenario(&c).unwrap();
    assert!(!run.report.verdict.satisfied);
    assert_eq!(run.report.comparison, Comparison::NoPrediction);
}
