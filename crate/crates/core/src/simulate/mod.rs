//! Method-of-lines integration of the semidiscrete problem
//!
//! ```text
//! u' = u_t
//! u_t' = Δ_h u − b u_t + f(u) + h(·, t)
//! ```
//!
//! with classical RK4 at a fixed step. When the solution starts to run away
//! (‖u‖² grows more than tenfold in one step, or a node passes the escape
//! level) the step is rejected and halved, and from then on every accepted
//! step is recorded so the threshold crossing is bracketed tightly.

pub mod scenario;

pub use scenario::*;

use crate::error::{Error, Result};
use crate::functionals::{potential_integral, State};
use crate::grid::{boundary_dot, grad_dot, weighted_dot, DiscreteOperators};
use crate::model::{GridField, ProblemSpec};

/// Scalar diagnostics of one recorded state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub t: f64,
    pub norm_u_sq: f64,
    pub norm_ut_sq: f64,
    pub grad_sq: f64,
    pub boundary_sq: f64,
    /// (F(u), 1)
    pub potential: f64,
    pub u_dot_ut: f64,
    pub energy: f64,
    /// ∫₀ᵗ‖u_τ‖² dτ
    pub cum_damping: f64,
    /// ∫₀ᵗ(u_τ, h) dτ
    pub cum_forcing: f64,
}

impl Record {
    pub const COLUMNS: [&'static str; 10] = [
        "t",
        "norm_u_sq",
        "norm_ut_sq",
        "grad_sq",
        "boundary_sq",
        "potential",
        "u_dot_ut",
        "energy",
        "cum_damping",
        "cum_forcing",
    ];

    pub fn to_array(&self) -> [f64; 10] {
        [
            self.t,
            self.norm_u_sq,
            self.norm_ut_sq,
            self.grad_sq,
            self.boundary_sq,
            self.potential,
            self.u_dot_ut,
            self.energy,
            self.cum_damping,
            self.cum_forcing,
        ]
    }

    pub fn from_array(a: [f64; 10]) -> Self {
        Self {
            t: a[0],
            norm_u_sq: a[1],
            norm_ut_sq: a[2],
            grad_sq: a[3],
            boundary_sq: a[4],
            potential: a[5],
            u_dot_ut: a[6],
            energy: a[7],
            cum_damping: a[8],
            cum_forcing: a[9],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimSeries {
    pub records: Vec<Record>,
    pub snapshots: Vec<State>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlowUpStatus {
    BlewUp,
    NoBlowupByTmax,
    EscapedNumerically,
}

impl BlowUpStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            BlowUpStatus::BlewUp => "blew_up",
            BlowUpStatus::NoBlowupByTmax => "no_blowup_by_tmax",
            BlowUpStatus::EscapedNumerically => "escaped_numerically",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowUpReport {
    pub status: BlowUpStatus,
    /// `[t_lo, t_hi]` with `‖u(t_lo)‖² < threshold ≤ ‖u(t_hi)‖²`.
    pub t_interval: Option<(f64, f64)>,
    pub threshold: f64,
    pub final_record: Record,
    pub final_dt: f64,
    pub steps: usize,
    pub rejected_steps: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationOptions {
    pub dt: f64,
    pub t_max: f64,
    /// Record every this many accepted steps (every step once halving starts).
    pub record_every: usize,
    /// Blow-up is declared once ‖u‖² reaches this level.
    pub threshold: f64,
    /// Node magnitude that forces step halving while below the threshold.
    pub node_escape: f64,
    pub dt_min: f64,
    /// Times at which full field snapshots are kept (first step at or after each).
    pub snapshot_times: Vec<f64>,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            t_max: 1.0,
            record_every: 10,
            threshold: 1e8,
            node_escape: 1e6,
            dt_min: 1e-12,
            snapshot_times: Vec::new(),
        }
    }
}

/// Right-hand side `(u_t, Δ_h u − b u_t + f(u) + h(t))`.
pub fn rhs_eval(state: &State, spec: &ProblemSpec, ops: &DiscreteOperators) -> Result<(GridField, GridField)> {
    if state.u.domain() != &ops.domain || state.ut.domain() != &ops.domain {
        return Err(Error::DomainMismatch("state does not live on the operator grid".into()));
    }
    let n = ops.domain.node_count();
    let mut dut = vec![0.0; n];
    let mut h = vec![0.0; n];
    Semidiscrete::new(spec, *ops).acceleration(state.t, state.u.values(), state.ut.values(), &mut dut, &mut h);
    if let Some(node) = dut.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { field: "u_tt", node });
    }
    Ok((state.ut.clone(), GridField::new(ops.domain, dut)?))
}

struct Semidiscrete<'a> {
    spec: &'a ProblemSpec,
    ops: DiscreteOperators,
    weights: Vec<f64>,
}

impl<'a> Semidiscrete<'a> {
    fn new(spec: &'a ProblemSpec, ops: DiscreteOperators) -> Self {
        Self {
            spec,
            ops,
            weights: ops.domain.trapezoid_weights(),
        }
    }

    /// `out = Δ_h u − b u_t + f(u) + h(t)`; `h` receives the forcing.
    fn acceleration(&self, t: f64, u: &[f64], ut: &[f64], out: &mut [f64], h: &mut [f64]) {
        self.ops.apply_laplacian(u, out);
        self.spec.forcing.eval_into(t, h);
        let nl = &self.spec.nonlinearity;
        let b = self.spec.b;
        for k in 0..out.len() {
            out[k] += -b * ut[k] + nl.f(u[k]) + h[k];
        }
    }

    fn record(&self, t: f64, u: &[f64], ut: &[f64], cum_damping: f64, cum_forcing: f64) -> Record {
        let d = &self.ops.domain;
        let w = &self.weights;
        let norm_ut_sq = weighted_dot(w, ut, ut);
        let grad_sq = grad_dot(d, u, u);
        let boundary_sq = boundary_dot(d, u, u);
        let potential = potential_integral(&self.spec.nonlinearity, w, u);
        Record {
            t,
            norm_u_sq: weighted_dot(w, u, u),
            norm_ut_sq,
            grad_sq,
            boundary_sq,
            potential,
            u_dot_ut: weighted_dot(w, u, ut),
            energy: 0.5 * norm_ut_sq + 0.5 * grad_sq + 0.5 * self.spec.gamma * boundary_sq - potential,
            cum_damping,
            cum_forcing,
        }
    }
}

struct Rk4Buffers {
    k_u: [Vec<f64>; 4],
    k_ut: [Vec<f64>; 4],
    stage_u: Vec<f64>,
    stage_ut: Vec<f64>,
    h: Vec<f64>,
}

impl Rk4Buffers {
    fn new(n: usize) -> Self {
        let z = || vec![0.0; n];
        Self {
            k_u: [z(), z(), z(), z()],
            k_ut: [z(), z(), z(), z()],
            stage_u: z(),
            stage_ut: z(),
            h: z(),
        }
    }
}

fn rk4_step(sys: &Semidiscrete, t: f64, dt: f64, u: &[f64], ut: &[f64], out_u: &mut [f64], out_ut: &mut [f64], buf: &mut Rk4Buffers) {
    let n = u.len();
    let offsets = [0.0, 0.5, 0.5, 1.0];
    for s in 0..4 {
        if s == 0 {
            buf.stage_u.copy_from_slice(u);
            buf.stage_ut.copy_from_slice(ut);
        } else {
            let c = offsets[s] * dt;
            for k in 0..n {
                buf.stage_u[k] = u[k] + c * buf.k_u[s - 1][k];
                buf.stage_ut[k] = ut[k] + c * buf.k_ut[s - 1][k];
            }
        }
        buf.k_u[s].copy_from_slice(&buf.stage_ut);
        let (stage_u, stage_ut) = (&buf.stage_u, &buf.stage_ut);
        sys.acceleration(t + offsets[s] * dt, stage_u, stage_ut, &mut buf.k_ut[s], &mut buf.h);
    }
    for k in 0..n {
        out_u[k] = u[k] + dt / 6.0 * (buf.k_u[0][k] + 2.0 * buf.k_u[1][k] + 2.0 * buf.k_u[2][k] + buf.k_u[3][k]);
        out_ut[k] = ut[k] + dt / 6.0 * (buf.k_ut[0][k] + 2.0 * buf.k_ut[1][k] + 2.0 * buf.k_ut[2][k] + buf.k_ut[3][k]);
    }
}

/// Integrates from `(u0, u1)` until blow-up, `t_max`, or numerical escape.
pub fn integrate(spec: &ProblemSpec, opts: &IntegrationOptions) -> (SimSeries, BlowUpReport) {
    let domain = spec.domain;
    let ops = DiscreteOperators::new(domain, spec.gamma);
    let sys = Semidiscrete::new(spec, ops);
    let n = domain.node_count();
    let mut warnings = Vec::new();

    let min_dx = (0..domain.dims()).map(|a| domain.spacing(a)).fold(f64::INFINITY, f64::min);
    if opts.dt > 0.5 * min_dx {
        warnings.push(format!("dt = {} exceeds the CFL guide 0.5·dx = {}", opts.dt, 0.5 * min_dx));
    }

    let mut u = spec.u0.values().to_vec();
    let mut ut = spec.u1.values().to_vec();
    let mut new_u = vec![0.0; n];
    let mut new_ut = vec![0.0; n];
    let mut buf = Rk4Buffers::new(n);
    let mut hvec = vec![0.0; n];

    let mut t = 0.0;
    let mut dt = opts.dt;
    let mut halving = false;
    let mut steps = 0usize;
    let mut rejected = 0usize;
    let mut since_record = 0usize;
    let mut cum_damping = 0.0;
    let mut cum_forcing = 0.0;

    spec.forcing.eval_into(0.0, &mut hvec);
    let mut prev_ut_sq = weighted_dot(&sys.weights, &ut, &ut);
    let mut prev_ut_h = weighted_dot(&sys.weights, &ut, &hvec);

    let mut series = SimSeries::default();
    let mut snapshot_iter = {
        let mut s = opts.snapshot_times.clone();
        s.sort_by(f64::total_cmp);
        s.into_iter().peekable()
    };
    let mut take_snapshots = |t: f64, u: &[f64], ut: &[f64], series: &mut SimSeries| {
        while snapshot_iter.peek().is_some_and(|&s| s <= t) {
            snapshot_iter.next();
            series.snapshots.push(State {
                t,
                u: GridField::new(domain, u.to_vec()).expect("grid size"),
                ut: GridField::new(domain, ut.to_vec()).expect("grid size"),
            });
        }
    };

    let first = sys.record(0.0, &u, &ut, 0.0, 0.0);
    let finish = |status, interval, series: SimSeries, last: Record, dt, steps, rejected, warnings| {
        (
            series,
            BlowUpReport {
                status,
                t_interval: interval,
                threshold: opts.threshold,
                final_record: last,
                final_dt: dt,
                steps,
                rejected_steps: rejected,
                warnings,
            },
        )
    };
    if !first.to_array().iter().all(|v| v.is_finite()) {
        return finish(BlowUpStatus::EscapedNumerically, None, series, first, dt, 0, 0, warnings);
    }
    series.records.push(first);
    take_snapshots(0.0, &u, &ut, &mut series);
    if first.norm_u_sq >= opts.threshold {
        return finish(BlowUpStatus::BlewUp, Some((0.0, 0.0)), series, first, dt, 0, 0, warnings);
    }
    let mut norm_old = first.norm_u_sq;

    loop {
        let remaining = opts.t_max - t;
        if remaining <= 1e-9 * dt {
            let last = *series.records.last().expect("nonempty");
            if last.t < t {
                let rec = sys.record(t, &u, &ut, cum_damping, cum_forcing);
                series.records.push(rec);
            }
            let last = *series.records.last().expect("nonempty");
            return finish(BlowUpStatus::NoBlowupByTmax, None, series, last, dt, steps, rejected, warnings);
        }
        let h = dt.min(remaining);
        rk4_step(&sys, t, h, &u, &ut, &mut new_u, &mut new_ut, &mut buf);

        let finite = new_u.iter().chain(&new_ut).all(|v| v.is_finite());
        let norm_new = if finite { weighted_dot(&sys.weights, &new_u, &new_u) } else { f64::NAN };
        let runaway = finite
            && norm_new > 10.0 * norm_old
            && norm_new >= 1e-6 * opts.threshold;
        let node_max = if finite { new_u.iter().fold(0.0f64, |m, v| m.max(v.abs())) } else { f64::INFINITY };
        let escaping = finite && node_max > opts.node_escape && norm_new < opts.threshold;
        if !finite || runaway || escaping {
            rejected += 1;
            halving = true;
            dt *= 0.5;
            if dt < opts.dt_min {
                let last = *series.records.last().expect("nonempty");
                warnings.push(format!(
                    "step fell below dt_min = {} at t = {t} ({})",
                    opts.dt_min,
                    if !finite {
                        "non-finite state"
                    } else if escaping {
                        "node escape before threshold"
                    } else {
                        "runaway growth"
                    }
                ));
                return finish(BlowUpStatus::EscapedNumerically, None, series, last, dt, steps, rejected, warnings);
            }
            continue;
        }

        let t_new = t + h;
        spec.forcing.eval_into(t_new, &mut hvec);
        let ut_sq = weighted_dot(&sys.weights, &new_ut, &new_ut);
        let ut_h = weighted_dot(&sys.weights, &new_ut, &hvec);
        cum_damping += 0.5 * h * (prev_ut_sq + ut_sq);
        cum_forcing += 0.5 * h * (prev_ut_h + ut_h);
        prev_ut_sq = ut_sq;
        prev_ut_h = ut_h;

        std::mem::swap(&mut u, &mut new_u);
        std::mem::swap(&mut ut, &mut new_ut);
        t = t_new;
        steps += 1;
        since_record += 1;
        norm_old = norm_new;
        take_snapshots(t, &u, &ut, &mut series);

        if norm_new >= opts.threshold {
            let t_lo = series.records.last().expect("nonempty").t;
            let rec = sys.record(t, &u, &ut, cum_damping, cum_forcing);
            series.records.push(rec);
            return finish(BlowUpStatus::BlewUp, Some((t_lo, t)), series, rec, dt, steps, rejected, warnings);
        }
        if halving || since_record >= opts.record_every.max(1) {
            series.records.push(sys.record(t, &u, &ut, cum_damping, cum_forcing));
            since_record = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::energy_residual;
    use crate::model::{ForcingSpec, NonlinearitySpec, SpatialDomain};
    use approx::assert_relative_eq;

    fn spec(d: SpatialDomain, b: f64, gamma: f64, nl: NonlinearitySpec, u0: GridField, u1: GridField) -> ProblemSpec {
        ProblemSpec {
            b,
            gamma,
            domain: d,
            nonlinearity: nl,
            forcing: ForcingSpec::None,
            u0,
            u1,
        }
    }

    #[test]
    fn rhs_examples() {
        let d = SpatialDomain::interval(1.0, 10);
        let ops = DiscreteOperators::new(d, 0.0);
        let s = spec(d, 0.0, 0.0, NonlinearitySpec::zero(1.0), GridField::from_fn(d, |x, _| x * x), GridField::zeros(d));
        let (_, dut) = rhs_eval(&State::initial(&s), &s, &ops).unwrap();
        assert_relative_eq!(dut.values()[5], 2.0, epsilon = 1e-10);

        let s = spec(d, 1.0, 0.0, NonlinearitySpec::zero(1.0), GridField::zeros(d), GridField::constant(d, 3.0));
        let (du, dut) = rhs_eval(&State::initial(&s), &s, &ops).unwrap();
        assert!(dut.values().iter().all(|&v| v == -3.0));
        assert!(du.values().iter().all(|&v| v == 3.0));

        let s = spec(d, 0.0, 0.0, NonlinearitySpec::power(2.0), GridField::constant(d, 2.0), GridField::zeros(d));
        let (_, dut) = rhs_eval(&State::initial(&s), &s, &ops).unwrap();
        assert!(dut.values().iter().all(|&v| v == 8.0));
    }

    #[test]
    fn rhs_flags_non_finite_acceleration() {
        let d = SpatialDomain::interval(1.0, 10);
        let ops = DiscreteOperators::new(d, 0.0);
        let s = spec(d, 0.0, 0.0, NonlinearitySpec::power(2.0), GridField::constant(d, 1e200), GridField::zeros(d));
        assert!(matches!(
            rhs_eval(&State::initial(&s), &s, &ops),
            Err(Error::NonFinite { field: "u_tt", .. })
        ));
    }

    #[test]
    fn zero_data_stays_zero() {
        let d = SpatialDomain::interval(1.0, 20);
        let s = spec(d, 0.1, 1.0, NonlinearitySpec::power(2.0), GridField::zeros(d), GridField::zeros(d));
        let opts = IntegrationOptions {
            dt: 1e-3,
            t_max: 0.1,
            record_every: 5,
            ..Default::default()
        };
        let (series, report) = integrate(&s, &opts);
        assert_eq!(report.status, BlowUpStatus::NoBlowupByTmax);
        assert_eq!(series.records.len(), 21);
        for r in &series.records {
            assert!(r.to_array()[1..].iter().all(|&v| v == 0.0));
        }
        assert!((series.records.last().unwrap().t - 0.1).abs() < 1e-12);
    }

    #[test]
    fn records_are_strictly_increasing_and_deterministic() {
        let d = SpatialDomain::interval(1.0, 40);
        let s = spec(
            d,
            0.1,
            1.0,
            NonlinearitySpec::power(2.0),
            GridField::from_fn(d, |x, _| 8.0 * (std::f64::consts::PI * x).sin()),
            GridField::zeros(d),
        );
        let opts = IntegrationOptions {
            dt: 1e-3,
            t_max: 2.0,
            record_every: 3,
            ..Default::default()
        };
        let (a, ra) = integrate(&s, &opts);
        let (b, rb) = integrate(&s, &opts);
        assert_eq!(a, b);
        assert_eq!(ra, rb);
        assert!(a.records.windows(2).all(|w| w[0].t < w[1].t));
        assert_eq!(ra.status, BlowUpStatus::BlewUp);
        let (lo, hi) = ra.t_interval.unwrap();
        let before = a.records.iter().rev().nth(1).unwrap();
        assert_eq!(before.t, lo);
        assert!(before.norm_u_sq < opts.threshold);
        assert!(ra.final_record.norm_u_sq >= opts.threshold);
        assert_eq!(ra.final_record.t, hi);
    }

    #[test]
    fn cumulative_damping_is_trapezoid_of_records_when_recording_every_step() {
        let d = SpatialDomain::interval(1.0, 30);
        let s = spec(
            d,
            0.3,
            1.0,
            NonlinearitySpec::power(2.0),
            GridField::from_fn(d, |x, _| (3.0 * x).cos()),
            GridField::from_fn(d, |x, _| x),
        );
        let opts = IntegrationOptions {
            dt: 1e-3,
            t_max: 0.2,
            record_every: 1,
            ..Default::default()
        };
        let (series, _) = integrate(&s, &opts);
        let mut acc = 0.0;
        for w in series.records.windows(2) {
            acc += 0.5 * (w[1].t - w[0].t) * (w[0].norm_ut_sq + w[1].norm_ut_sq);
            assert_relative_eq!(acc, w[1].cum_damping, max_relative = 1e-12);
        }
    }

    #[test]
    fn linear_wave_energy_balance() {
        let d = SpatialDomain::interval(1.0, 100);
        let u0 = GridField::from_fn(d, |x, _| (std::f64::consts::PI * x).sin() + 0.3 * x);
        let s = spec(d, 0.0, 1.0, NonlinearitySpec::zero(1.0), u0, GridField::zeros(d));
        let opts = IntegrationOptions {
            dt: 1e-3,
            t_max: 1.0,
            record_every: 1,
            ..Default::default()
        };
        let (series, report) = integrate(&s, &opts);
        assert_eq!(report.status, BlowUpStatus::NoBlowupByTmax);
        let e0 = series.records[0].energy;
        assert!(energy_residual(&series, &s) <= 1e-4 * e0.abs().max(1.0));
    }

    #[test]
    fn snapshots_land_on_requested_times() {
        let d = SpatialDomain::interval(1.0, 10);
        let s = spec(d, 0.0, 1.0, NonlinearitySpec::zero(1.0), GridField::constant(d, 1.0), GridField::zeros(d));
        let opts = IntegrationOptions {
            dt: 0.01,
            t_max: 0.1,
            record_every: 100,
            snapshot_times: vec![0.05, 0.0],
            ..Default::default()
        };
        let (series, _) = integrate(&s, &opts);
        assert_eq!(series.snapshots.len(), 2);
        assert_eq!(series.snapshots[0].t, 0.0);
        assert!(series.snapshots[1].t >= 0.05 - 1e-12 && series.snapshots[1].t < 0.06);
    }

    #[test]
    fn node_escape_before_threshold_is_reported() {
        // a single spike of height 1e5 with threshold far above its norm
        let d = SpatialDomain::interval(1.0, 200);
        let mut vals = vec![0.0; 201];
        vals[100] = 1e5;
        let s = spec(d, 0.0, 1.0, NonlinearitySpec::power(2.0), GridField::new(d, vals).unwrap(), GridField::zeros(d));
        let opts = IntegrationOptions {
            dt: 1e-4,
            t_max: 1.0,
            threshold: 1e30,
            ..Default::default()
        };
        let (_, report) = integrate(&s, &opts);
        assert_eq!(report.status, BlowUpStatus::EscapedNumerically);
        assert!(report.rejected_steps > 0);
    }
}
