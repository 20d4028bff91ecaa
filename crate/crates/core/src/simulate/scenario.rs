//! End-to-end scenario: constants, initial data, verdict, integration, and
//! the comparison of the observed blow-up time against the predicted bound.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};

use super::{integrate, BlowUpReport, BlowUpStatus, IntegrationOptions, SimSeries};
use crate::criteria::{
    check_theorem2, classify_theorem1_with_d0, construct_remark_data, find_blowup_scale, find_theorem2_scale,
    m_residual, solve_m, theorem2_data, ScaleSearch, Theorem, Verdict,
};
use crate::error::{Error, Result};
use crate::functionals::{e1_from_record, energy_residual, psi2_series, PsiPoint};
use crate::grid::{InequalityConstants, MIN_CONSTANT_RESOLUTION};
use crate::model::{validate, DomainKind, ForcingSpec, GridField, NonlinearitySpec, ProblemSpec, SpatialDomain};

/// Relative tolerance of the discrete concavity monitor.
pub const CONCAVITY_MONITOR_TOL: f64 = 1e-2;
/// Relative round-off allowance in the Schwarz check `(Ψ')² ≤ 4‖u_t‖²‖u‖²`.
pub const SCHWARZ_REL_TOL: f64 = 1e-12;
/// Relative tolerance of the `E₁(t) ≥ e^{4mαt}E₁(0)` monitor.
pub const E1_MONITOR_TOL: f64 = 1e-6;
/// Largest record-to-record growth of `‖u‖²` still treated as resolved.
pub const RESOLVED_GROWTH: f64 = 1.25;

/// Length of the leading run of records whose `‖u‖²` grows by at most
/// [`RESOLVED_GROWTH`] per record. Past it the final approach to the
/// singularity is no longer resolved by the record spacing.
pub fn resolved_len(series: &SimSeries) -> usize {
    let r = &series.records;
    if r.is_empty() {
        return 0;
    }
    1 + r
        .windows(2)
        .take_while(|w| w[1].norm_u_sq <= RESOLVED_GROWTH * w[0].norm_u_sq || w[1].norm_u_sq == 0.0)
        .count()
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileShape {
    Constant,
    /// `sin(πx/L)`, times `sin(πy/L_y)` on rectangles.
    Sine,
    /// First Robin eigenfunction `cos(k(x − L/2))` with `k·tan(kL/2) = γ`
    /// (product over axes on rectangles); needs `γ > 0`.
    RobinMode,
    /// Node values in grid order.
    Values(Vec<f64>),
}

/// Root of `k·tan(kL/2) = γ` in `(0, π/L)`.
pub fn robin_wavenumber(length: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && length > 0.0) {
        return Err(Error::Invalid(format!(
            "Robin mode needs gamma > 0 and a positive length, got gamma = {gamma}, length = {length}"
        )));
    }
    let g = |k: f64| k * (0.5 * k * length).tan() - gamma;
    let (mut lo, mut hi) = (0.0, PI / length);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

impl ProfileShape {
    /// Profile on `domain`; `gamma` is only read by [`ProfileShape::RobinMode`].
    pub fn field_with_gamma(&self, domain: SpatialDomain, gamma: f64) -> Result<GridField> {
        if *self != ProfileShape::RobinMode {
            return self.field(domain);
        }
        let [lx, ly] = domain.lengths;
        let kx = robin_wavenumber(lx, gamma)?;
        let ky = match domain.kind {
            DomainKind::Interval => 0.0,
            DomainKind::Rectangle => robin_wavenumber(ly, gamma)?,
        };
        Ok(GridField::from_fn(domain, |x, y| {
            let cx = (kx * (x - 0.5 * lx)).cos();
            match domain.kind {
                DomainKind::Interval => cx,
                DomainKind::Rectangle => cx * (ky * (y - 0.5 * ly)).cos(),
            }
        }))
    }

    pub fn field(&self, domain: SpatialDomain) -> Result<GridField> {
        match self {
            ProfileShape::RobinMode => Err(Error::Invalid("Robin mode profile needs gamma".into())),
            ProfileShape::Constant => Ok(GridField::constant(domain, 1.0)),
            ProfileShape::Sine => {
                let [lx, ly] = domain.lengths;
                Ok(GridField::from_fn(domain, |x, y| {
                    let sx = (PI * x / lx).sin();
                    match domain.kind {
                        DomainKind::Interval => sx,
                        DomainKind::Rectangle => sx * (PI * y / ly).sin(),
                    }
                }))
            }
            ProfileShape::Values(v) => GridField::new(domain, v.clone()).map_err(|_| {
                Error::Invalid(format!(
                    "profile has {} values, grid has {} nodes",
                    v.len(),
                    domain.node_count()
                ))
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProfileShape::Constant => "constant",
            ProfileShape::Sine => "sine",
            ProfileShape::RobinMode => "robin",
            ProfileShape::Values(_) => "values",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ForcingConfig {
    None,
    ExpDecay {
        amplitude: f64,
        lambda: f64,
        profile: ProfileShape,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    /// Profile-based data (`profile` gives the shape).
    Profile,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScaleChoice {
    Fixed(f64),
    /// Smallest scale satisfying the theorem's condition.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocityKind {
    /// `½‖u₁‖² = (F(u₀),1)`.
    Remark,
    /// `u₁ = m·u₀`.
    Growth,
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitConfig {
    pub kind: InitKind,
    pub profile: ProfileShape,
    pub scale: ScaleChoice,
    /// `None` picks Remark for Theorem 1 and Growth for Theorem 2.
    pub velocity: Option<VelocityKind>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub theorem: Theorem,
    pub b: f64,
    pub gamma: f64,
    pub domain: SpatialDomain,
    pub nonlinearity: NonlinearitySpec,
    pub forcing: ForcingConfig,
    pub init: InitConfig,
    pub integration: IntegrationOptions,
    pub theorem2_c0: f64,
    /// One-sided reporting band on `t_hi ≤ bound·(1 + tolerance)`.
    pub tolerance_report: f64,
}

impl ScenarioConfig {
    /// Damped case: `b = 0.1`, `γ = 1`, `p = 2` on `(0,1)`, Remark data at
    /// the smallest satisfying scale.
    pub fn theorem1_preset() -> Self {
        Self {
            theorem: Theorem::One,
            b: 0.1,
            gamma: 1.0,
            domain: SpatialDomain::interval(1.0, 100),
            nonlinearity: NonlinearitySpec::power(2.0),
            forcing: ForcingConfig::None,
            init: InitConfig {
                kind: InitKind::Profile,
                profile: ProfileShape::Constant,
                scale: ScaleChoice::Auto,
                velocity: None,
            },
            integration: IntegrationOptions {
                dt: 1e-3,
                t_max: 5.0,
                record_every: 1,
                ..Default::default()
            },
            theorem2_c0: 1.0,
            tolerance_report: 0.0,
        }
    }

    /// Accelerating case: `b = −0.2`, `γ = 1`, `p = 2`, `u₁ = m·u₀`.
    pub fn theorem2_preset() -> Self {
        Self {
            theorem: Theorem::Two,
            b: -0.2,
            ..Self::theorem1_preset()
        }
    }

    pub fn zero_preset() -> Self {
        let mut c = Self::theorem1_preset();
        c.init.kind = InitKind::Zero;
        c.init.scale = ScaleChoice::Fixed(1.0);
        c.integration.t_max = 1.0;
        c.integration.record_every = 10;
        c
    }

    pub fn velocity(&self) -> VelocityKind {
        self.init.velocity.unwrap_or(match self.theorem {
            Theorem::One => VelocityKind::Remark,
            Theorem::Two => VelocityKind::Growth,
        })
    }

    fn forcing_spec(&self) -> Result<ForcingSpec> {
        Ok(match &self.forcing {
            ForcingConfig::None => ForcingSpec::None,
            ForcingConfig::ExpDecay {
                amplitude,
                lambda,
                profile,
            } => ForcingSpec::ExpDecay {
                amplitude: *amplitude,
                lambda: *lambda,
                profile: profile.field_with_gamma(self.domain, self.gamma)?,
            },
        })
    }
}

/// Everything decided before time stepping.
#[derive(Debug, Clone, PartialEq)]
pub struct Assessment {
    pub spec: ProblemSpec,
    pub constants: InequalityConstants,
    pub m: Option<f64>,
    pub m_residual: Option<f64>,
    pub scale: Option<f64>,
    pub search: Option<ScaleSearch>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

fn invalid(violations: Vec<String>) -> Error {
    Error::Invalid(violations.join("; "))
}

/// Constants, data, and verdict for `config` (no simulation).
pub fn assess(config: &ScenarioConfig) -> Result<Assessment> {
    let domain = config.domain;
    let mut notes = Vec::new();
    let forcing = config.forcing_spec()?;
    let template = ProblemSpec {
        b: config.b,
        gamma: config.gamma,
        domain,
        nonlinearity: config.nonlinearity,
        forcing,
        u0: GridField::zeros(domain),
        u1: GridField::zeros(domain),
    };
    let violations: Vec<String> = validate(&template).into_iter().map(|v| v.message).collect();
    if !violations.is_empty() {
        return Err(invalid(violations));
    }

    match config.theorem {
        Theorem::One => {
            if !(config.b > 0.0) {
                return Err(Error::Precondition(format!(
                    "Theorem 1 inapplicable: requires b > 0, got b = {}",
                    config.b
                )));
            }
            if !(config.gamma > 0.0) {
                return Err(Error::Precondition(format!(
                    "Theorem 1 inapplicable: requires gamma > 0, got gamma = {}",
                    config.gamma
                )));
            }
        }
        Theorem::Two => {
            if config.gamma == 0.0 {
                return Err(Error::Precondition(
                    "Theorem 2 inapplicable: C(1/|gamma|) needs gamma ≠ 0".into(),
                ));
            }
        }
    }

    let resolution = domain.resolution.iter().copied().max().unwrap_or(0).max(MIN_CONSTANT_RESOLUTION);
    if domain.kind == DomainKind::Rectangle && domain.resolution[0] != domain.resolution[1] {
        notes.push(format!("constants estimated on a {resolution}×{resolution} grid"));
    }
    let eps = match config.theorem {
        Theorem::One => 1.0,
        Theorem::Two => 1.0 / config.gamma.abs(),
    };
    let constants = InequalityConstants::estimate(&domain, resolution, &[eps])?;
    let c_eps = constants.c_eps[0].1;

    let (m, m_res) = match config.theorem {
        Theorem::One => (None, None),
        Theorem::Two => {
            let m = solve_m(config.b, config.gamma, c_eps)?;
            (Some(m), Some(m_residual(config.b, config.gamma, c_eps, m)))
        }
    };
    let c0 = config.theorem2_c0;

    let velocity = config.velocity();
    let mut spec = template.clone();
    let mut scale = None;
    let mut search = None;
    if config.init.kind == InitKind::Profile {
        let profile = config.init.profile.field_with_gamma(domain, config.gamma)?;
        if profile.is_zero() {
            return Err(Error::Invalid("init profile is identically zero".into()));
        }
        let s = match config.init.scale {
            ScaleChoice::Fixed(s) => {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(Error::Invalid(format!("init.scale must be positive, got {s}")));
                }
                s
            }
            ScaleChoice::Auto => {
                let found = match (config.theorem, velocity, m) {
                    (Theorem::One, VelocityKind::Remark, _) => {
                        let p = power_exponent(&config.nonlinearity)?;
                        find_blowup_scale(&profile, p, &template)?
                    }
                    (Theorem::Two, VelocityKind::Growth, Some(m)) => {
                        find_theorem2_scale(&profile, &template, m, c0)?
                    }
                    _ => {
                        return Err(Error::Invalid(
                            "init.scale = auto needs remark velocity for theorem 1 and growth velocity for theorem 2"
                                .into(),
                        ))
                    }
                };
                let s = match found.scale {
                    Some(s) => s,
                    None => {
                        notes.push("no satisfying scale in [1e-3, 1e6]; using 1e6".into());
                        1e6
                    }
                };
                search = Some(found);
                s
            }
        };
        scale = Some(s);
        let (u0, u1) = match velocity {
            VelocityKind::Remark => construct_remark_data(&profile, power_exponent(&config.nonlinearity)?, s)?,
            VelocityKind::Growth => {
                let Some(m) = m else {
                    return Err(Error::Invalid("growth velocity u1 = m·u0 needs theorem 2".into()));
                };
                theorem2_data(&profile, m, s)
            }
            VelocityKind::Zero => (profile.scaled(s), GridField::zeros(domain)),
        };
        spec.u0 = u0;
        spec.u1 = u1;
    }
    let violations: Vec<String> = validate(&spec).into_iter().map(|v| v.message).collect();
    if !violations.is_empty() {
        return Err(invalid(violations));
    }

    let mut verdict = match (config.theorem, m) {
        (Theorem::One, _) => classify_theorem1_with_d0(&spec, constants.d0)?,
        (Theorem::Two, Some(m)) => check_theorem2(&spec, m, c0)?,
        (Theorem::Two, None) => unreachable!("m is solved for theorem 2"),
    };
    verdict.constants.insert("C_eps", c_eps);
    Ok(Assessment {
        spec,
        constants,
        m,
        m_residual: m_res,
        scale,
        search,
        verdict,
        notes,
    })
}

fn power_exponent(nl: &NonlinearitySpec) -> Result<f64> {
    if nl.kind == crate::model::NonlinearityKind::Power {
        Ok(nl.p)
    } else {
        Err(Error::Invalid("Remark data needs a power nonlinearity".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// Satisfied, blew up, and `t_hi` is within the bound.
    Confirmed,
    /// Satisfied, blew up, but later than the bound.
    Violated,
    /// Satisfied but no blow-up observed.
    Finding,
    NoPrediction,
}

impl Comparison {
    pub fn as_str(&self) -> &'static str {
        match self {
            Comparison::Confirmed => "CONFIRMED",
            Comparison::Violated => "VIOLATED",
            Comparison::Finding => "FINDING",
            Comparison::NoPrediction => "NO_PREDICTION",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Monitors {
    /// Records in the resolved prefix; the monitors below except
    /// `energy_residual_full` and the Schwarz check only look at these.
    pub resolved: usize,
    pub energy_residual: f64,
    /// Over all records, including the unresolved tail.
    pub energy_residual_full: f64,
    /// Largest of 1, `|E(t)|`, `|b|∫‖u_τ‖²`, `|∫(u_τ,h)|` over the resolved records.
    pub energy_scale: f64,
    pub schwarz_checked: usize,
    pub schwarz_violations: usize,
    /// Interior records checked by the concavity monitor (0 when not applicable).
    pub concavity_checked: usize,
    pub concavity_violations: usize,
    /// Smallest normalized concavity value.
    pub concavity_min: f64,
    pub e1_checked: usize,
    pub e1_violations: usize,
}

impl Monitors {
    pub fn relative_energy_residual(&self) -> f64 {
        self.energy_residual / self.energy_scale
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub theorem: Theorem,
    pub b: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub p: f64,
    pub domain: SpatialDomain,
    pub dt: f64,
    pub t_max: f64,
    pub scale: Option<f64>,
    pub m: Option<f64>,
    pub m_residual: Option<f64>,
    pub constants: InequalityConstants,
    pub verdict: Verdict,
    pub blowup: BlowUpReport,
    pub comparison: Comparison,
    pub message: String,
    pub monitors: Monitors,
    pub records: usize,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub report: ScenarioReport,
    pub series: SimSeries,
    pub spec: ProblemSpec,
}

fn compare(verdict: &Verdict, blowup: &BlowUpReport, tolerance: f64, t_max: f64) -> (Comparison, String) {
    let Some(bound) = verdict.t_bound() else {
        return (Comparison::NoPrediction, "criterion not met; no prediction".into());
    };
    match (blowup.status, blowup.t_interval) {
        (BlowUpStatus::BlewUp, Some((lo, hi))) => {
            if hi <= bound * (1.0 + tolerance) {
                (
                    Comparison::Confirmed,
                    format!("observed blow-up in [{lo:.9}, {hi:.9}] within predicted bound {bound:.9}"),
                )
            } else {
                (
                    Comparison::Violated,
                    format!("observed t_hi = {hi:.9} exceeds predicted bound {bound:.9}"),
                )
            }
        }
        (status, _) => {
            let cause = if t_max < bound {
                format!("t_max = {t_max} is below the bound {bound:.9}")
            } else {
                "t_max too small or resolution artifact".to_string()
            };
            (
                Comparison::Finding,
                format!("criterion satisfied but status {}: {cause}", status.as_str()),
            )
        }
    }
}

fn concavity_monitor(points: &[PsiPoint], alpha: f64, b: f64, c2: f64) -> (usize, usize, f64) {
    let mut checked = 0;
    let mut violations = 0;
    let mut min = f64::INFINITY;
    for w in points.windows(3) {
        let (p0, p1, p2) = (w[0], w[1], w[2]);
        let (h1, h2) = (p1.t - p0.t, p2.t - p1.t);
        let ddpsi = 2.0 * ((p2.psi - p1.psi) / h2 - (p1.psi - p0.psi) / h1) / (h1 + h2);
        let (psi, dpsi) = (p1.psi, p1.dpsi);
        let terms = [ddpsi * psi, -(1.0 + alpha) * dpsi * dpsi, b * dpsi * psi, c2 * psi * psi];
        let value: f64 = terms.iter().sum();
        let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        if scale == 0.0 {
            continue;
        }
        checked += 1;
        let normalized = value / scale;
        min = min.min(normalized);
        if normalized < -CONCAVITY_MONITOR_TOL {
            violations += 1;
        }
    }
    (checked, violations, min)
}

fn monitors(full: &SimSeries, spec: &ProblemSpec, verdict: &Verdict, m: Option<f64>) -> Result<Monitors> {
    let resolved = resolved_len(full);
    let series = &SimSeries {
        records: full.records[..resolved].to_vec(),
        snapshots: Vec::new(),
    };
    let mut schwarz_violations = 0;
    for r in &full.records {
        let lhs = 4.0 * r.norm_ut_sq * r.norm_u_sq;
        let rhs = 4.0 * r.u_dot_ut * r.u_dot_ut;
        if rhs - lhs > SCHWARZ_REL_TOL * lhs {
            schwarz_violations += 1;
        }
    }

    let alpha = spec.nonlinearity.alpha;
    let (mut concavity_checked, mut concavity_violations, mut concavity_min) = (0, 0, f64::INFINITY);
    let (mut e1_checked, mut e1_violations) = (0, 0);
    if verdict.satisfied {
        let c = verdict.concavity;
        match (verdict.theorem, m) {
            (Theorem::One, _) => {
                let c0 = c.psi0 - verdict.constant("norm_u0_sq").unwrap_or(0.0);
                let points: Vec<PsiPoint> = series
                    .records
                    .iter()
                    .map(|r| PsiPoint {
                        t: r.t,
                        psi: r.norm_u_sq + c0,
                        dpsi: 2.0 * r.u_dot_ut,
                    })
                    .collect();
                (concavity_checked, concavity_violations, concavity_min) =
                    concavity_monitor(&points, alpha, 2.0 * c.c1, c.c2);
            }
            (Theorem::Two, Some(m)) => {
                let c0 = verdict.constant("c0").unwrap_or(1.0);
                let points = psi2_series(series, spec, m, c0)?;
                (concavity_checked, concavity_violations, concavity_min) = concavity_monitor(&points, alpha, 0.0, 0.0);
                if spec.forcing.is_none() {
                    let e1_0 = series.records.first().map_or(0.0, |r| e1_from_record(r, spec, m));
                    for r in &series.records {
                        let lower = (4.0 * m * alpha * r.t).exp() * e1_0;
                        let e1 = e1_from_record(r, spec, m);
                        e1_checked += 1;
                        if e1 < lower - E1_MONITOR_TOL * e1.abs().max(lower.abs()) {
                            e1_violations += 1;
                        }
                    }
                }
            }
            (Theorem::Two, None) => {}
        }
    }
    Ok(Monitors {
        resolved,
        energy_residual: energy_residual(series, spec),
        energy_residual_full: energy_residual(full, spec),
        energy_scale: series.records.iter().fold(1.0f64, |m, r| {
            m.max(r.energy.abs())
                .max(spec.b.abs() * r.cum_damping)
                .max(r.cum_forcing.abs())
        }),
        schwarz_checked: full.records.len(),
        schwarz_violations,
        concavity_checked,
        concavity_violations,
        concavity_min: if concavity_checked > 0 { concavity_min } else { f64::NAN },
        e1_checked,
        e1_violations,
    })
}

/// Full pipeline: assess, integrate, compare, and monitor.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioRun> {
    let a = assess(config)?;
    let (series, blowup) = integrate(&a.spec, &config.integration);
    let (comparison, message) = compare(&a.verdict, &blowup, config.tolerance_report, config.integration.t_max);
    let monitors = monitors(&series, &a.spec, &a.verdict, a.m)?;
    let report = ScenarioReport {
        theorem: config.theorem,
        b: config.b,
        gamma: config.gamma,
        alpha: config.nonlinearity.alpha,
        p: config.nonlinearity.p,
        domain: config.domain,
        dt: config.integration.dt,
        t_max: config.integration.t_max,
        scale: a.scale,
        m: a.m,
        m_residual: a.m_residual,
        constants: a.constants,
        verdict: a.verdict,
        blowup,
        comparison,
        message,
        monitors,
        records: series.records.len(),
        notes: a.notes,
    };
    Ok(ScenarioRun {
        report,
        series,
        spec: a.spec,
    })
}

/// `key = value` rendering of a verdict, shared by the check and simulate outputs.
pub fn render_verdict(v: &Verdict, out: &mut String) {
    let _ = writeln!(out, "theorem = {}", v.theorem);
    let _ = writeln!(out, "branch = {}", v.branch);
    let _ = writeln!(out, "satisfied = {}", v.satisfied);
    let _ = writeln!(out, "reason = {}", v.reason);
    for (k, val) in &v.constants {
        let _ = writeln!(out, "constant.{k} = {val:.16e}");
    }
    for (k, ok) in &v.premises {
        let _ = writeln!(out, "premise.{k} = {ok}");
    }
    let c = &v.concavity;
    let _ = writeln!(
        out,
        "concavity = alpha {:.16e}, c1 {:.16e}, c2 {:.16e}, psi0 {:.16e}, dpsi0 {:.16e}",
        c.alpha, c.c1, c.c2, c.psi0, c.dpsi0
    );
    match v.bound {
        Some(b) => {
            let _ = writeln!(out, "bound.lemma = {:?}", b.lemma);
            let _ = writeln!(out, "bound.gamma1 = {:.16e}", b.gamma1);
            let _ = writeln!(out, "bound.gamma2 = {:.16e}", b.gamma2);
            let _ = writeln!(out, "bound.t = {:.16e}", b.t_bound);
        }
        None => {
            let _ = writeln!(out, "bound.t = none");
        }
    }
    for n in &v.notes {
        let _ = writeln!(out, "note = {n}");
    }
}

impl fmt::Display for ScenarioReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        let _ = writeln!(s, "b = {}", self.b);
        let _ = writeln!(s, "gamma = {}", self.gamma);
        let _ = writeln!(s, "p = {}", self.p);
        let _ = writeln!(s, "alpha = {}", self.alpha);
        let _ = writeln!(
            s,
            "domain = {:?} lengths {:?} resolution {:?}",
            self.domain.kind, self.domain.lengths, self.domain.resolution
        );
        let _ = writeln!(s, "dt = {}", self.dt);
        let _ = writeln!(s, "t_max = {}", self.t_max);
        if let Some(x) = self.scale {
            let _ = writeln!(s, "scale = {x:.16e}");
        }
        if let Some(m) = self.m {
            let _ = writeln!(s, "m = {m:.16e}");
        }
        if let Some(r) = self.m_residual {
            let _ = writeln!(s, "m_residual = {r:.3e}");
        }
        let c = &self.constants;
        let _ = writeln!(s, "d0 = {:.16e} (coarse {:.16e}, resolution {})", c.d0, c.d0_coarse, c.resolution);
        for (eps, fine, coarse) in &c.c_eps {
            let _ = writeln!(s, "C({eps}) = {fine:.16e} (coarse {coarse:.16e})");
        }
        render_verdict(&self.verdict, &mut s);
        let b = &self.blowup;
        let _ = writeln!(s, "status = {}", b.status.as_str());
        match b.t_interval {
            Some((lo, hi)) => {
                let _ = writeln!(s, "t_interval = [{lo:.16e}, {hi:.16e}]");
            }
            None => {
                let _ = writeln!(s, "t_interval = none");
            }
        }
        let _ = writeln!(s, "threshold = {:e}", b.threshold);
        let _ = writeln!(s, "final_t = {:.16e}", b.final_record.t);
        let _ = writeln!(s, "final_norm_u_sq = {:.16e}", b.final_record.norm_u_sq);
        let _ = writeln!(s, "final_dt = {:e}", b.final_dt);
        let _ = writeln!(s, "steps = {}", b.steps);
        let _ = writeln!(s, "rejected_steps = {}", b.rejected_steps);
        let _ = writeln!(s, "records = {}", self.records);
        for w in &b.warnings {
            let _ = writeln!(s, "warning = {w}");
        }
        let _ = writeln!(s, "comparison = {}", self.comparison.as_str());
        let _ = writeln!(s, "message = {}", self.message);
        let m = &self.monitors;
        let _ = writeln!(s, "resolved_records = {}", m.resolved);
        let _ = writeln!(s, "energy_residual = {:.6e}", m.energy_residual);
        let _ = writeln!(s, "energy_residual_full = {:.6e}", m.energy_residual_full);
        let _ = writeln!(s, "energy_residual_relative = {:.6e}", m.relative_energy_residual());
        let _ = writeln!(s, "schwarz = {} violations of {}", m.schwarz_violations, m.schwarz_checked);
        let _ = writeln!(
            s,
            "concavity_monitor = {} violations of {}, min normalized {:.6e}",
            m.concavity_violations, m.concavity_checked, m.concavity_min
        );
        if m.e1_checked > 0 {
            let _ = writeln!(s, "e1_monitor = {} violations of {}", m.e1_violations, m.e1_checked);
        }
        for n in &self.notes {
            let _ = writeln!(s, "note = {n}");
        }
        f.write_str(&s)
    }
}
