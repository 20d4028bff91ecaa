use blowup_core::functionals::{energy_residual, State};
use blowup_core::model::{ForcingSpec, GridField, NonlinearitySpec, ProblemSpec, SpatialDomain};
use blowup_core::simulate::{integrate, BlowUpStatus, IntegrationOptions};
use proptest::prelude::*;

/// Complete elliptic integral `K(1/√2)` (mpmath, 30 digits).
const K_HALF: f64 = 1.854_074_677_301_372;

fn spatially_constant(a: f64, b: f64) -> ProblemSpec {
    let d = SpatialDomain::interval(1.0, 16);
    ProblemSpec {
        b,
        gamma: 0.0,
        domain: d,
        nonlinearity: NonlinearitySpec::power(2.0),
        forcing: ForcingSpec::None,
        u0: GridField::constant(d, a),
        u1: GridField::zeros(d),
    }
}

#[test]
fn constant_data_reduces_to_scalar_ode() {
    // u'' = u³, u(0) = a, u'(0) = 0 blows up at K(1/√2)/a
    for a in [0.5, 1.0, 2.0] {
        let spec = spatially_constant(a, 0.0);
        let opts = IntegrationOptions {
            dt: 1e-4,
            t_max: 10.0,
            record_every: 100,
            ..Default::default()
        };
        let (series, report) = integrate(&spec, &opts);
        assert_eq!(report.status, BlowUpStatus::BlewUp);
        let (_, hi) = report.t_interval.unwrap();
        let exact = K_HALF / a;
        assert!((hi - exact).abs() <= 0.01 * exact, "a = {a}: t_hi = {hi}, exact {exact}");
        for r in &series.records {
            assert_eq!(r.grad_sq, 0.0);
        }
    }
}

#[test]
fn blow_up_interval_brackets_threshold() {
    let d = SpatialDomain::interval(2.0, 60);
    let spec = ProblemSpec {
        b: 0.2,
        gamma: 0.5,
        domain: d,
        nonlinearity: NonlinearitySpec::power(1.0),
        forcing: ForcingSpec::None,
        u0: GridField::from_fn(d, |x, _| 6.0 + (x - 1.0).powi(2)),
        u1: GridField::constant(d, 1.0),
    };
    for record_every in [1, 7, 50] {
        let opts = IntegrationOptions {
            dt: 5e-4,
            t_max: 5.0,
            record_every,
            ..Default::default()
        };
        let (series, report) = integrate(&spec, &opts);
        assert_eq!(report.status, BlowUpStatus::BlewUp);
        let (lo, hi) = report.t_interval.unwrap();
        let before = series.records.iter().rev().find(|r| r.t == lo).unwrap();
        assert!(before.norm_u_sq < report.threshold);
        assert!(report.final_record.norm_u_sq >= report.threshold);
        assert_eq!(report.final_record.t, hi);
        assert!(series.records.iter().all(|r| r.to_array().iter().all(|v| v.is_finite())));
    }
}

#[test]
fn forced_linear_energy_balance() {
    let d = SpatialDomain::interval(1.0, 80);
    let spec = ProblemSpec {
        b: 0.4,
        gamma: 1.5,
        domain: d,
        nonlinearity: NonlinearitySpec::zero(0.5),
        forcing: ForcingSpec::ExpDecay {
            amplitude: 2.0,
            lambda: 1.0,
            profile: GridField::from_fn(d, |x, _| (2.0 * x).cos()),
        },
        u0: GridField::from_fn(d, |x, _| (x * 1.3).cos()),
        u1: GridField::zeros(d),
    };
    let opts = IntegrationOptions {
        dt: 1e-3,
        t_max: 1.0,
        record_every: 1,
        ..Default::default()
    };
    let (series, report) = integrate(&spec, &opts);
    assert_eq!(report.status, BlowUpStatus::NoBlowupByTmax);
    assert!(series.records.last().unwrap().cum_forcing.abs() > 1e-3);
    assert!(energy_residual(&series, &spec) < 1e-5);
}

#[test]
fn cfl_guide_violation_is_a_warning() {
    let spec = spatially_constant(0.1, 0.0);
    let opts = IntegrationOptions {
        dt: 0.1,
        t_max: 0.3,
        record_every: 1,
        ..Default::default()
    };
    let (_, report) = integrate(&spec, &opts);
    assert!(report.warnings.iter().any(|w| w.contains("CFL")));
    assert_eq!(report.status, BlowUpStatus::NoBlowupByTmax);
}

#[test]
fn snapshots_carry_full_state() {
    let spec = spatially_constant(0.3, 0.1);
    let opts = IntegrationOptions {
        dt: 1e-2,
        t_max: 0.5,
        record_every: 5,
        snapshot_times: vec![0.25],
        ..Default::default()
    };
    let (series, _) = integrate(&spec, &opts);
    let snap: &State = &series.snapshots[0];
    let rec = series.records.iter().find(|r| (r.t - snap.t).abs() < 1e-12);
    if let Some(rec) = rec {
        let w = spec.domain.trapezoid_weights();
        let norm: f64 = w.iter().zip(snap.u.values()).map(|(w, u)| w * u * u).sum();
        assert!((norm - rec.norm_u_sq).abs() < 1e-14);
    }
    assert!(snap.t >= 0.25 - 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn series_times_strictly_increase(a in 0.1f64..3.0, b in -0.5f64..0.5, every in 1usize..20) {
        let spec = spatially_constant(a, b);
        let opts = IntegrationOptions { dt: 2e-3, t_max: 1.0, record_every: every, ..Default::default() };
        let (series, report) = integrate(&spec, &opts);
        prop_assert!(series.records.windows(2).all(|w| w[0].t < w[1].t));
        if report.status == BlowUpStatus::BlewUp {
            let (lo, hi) = report.t_interval.unwrap();
            prop_assert!(lo < hi);
        }
    }
}
