//! Problem data: domain, grid fields, nonlinearity, forcing, and the full
//! problem instance together with its admissibility checks.

use std::fmt;

use crate::error::{Error, Result};

/// Minimum number of cells per axis.
pub const MIN_RESOLUTION: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Interval,
    Rectangle,
}

/// `(0, L)` or `(0, Lx) × (0, Ly)` with a uniform vertex-centered grid.
///
/// For intervals only the first entry of `lengths` and `resolution` is used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialDomain {
    pub kind: DomainKind,
    pub lengths: [f64; 2],
    pub resolution: [usize; 2],
}

impl SpatialDomain {
    pub fn interval(length: f64, cells: usize) -> Self {
        Self {
            kind: DomainKind::Interval,
            lengths: [length, 0.0],
            resolution: [cells, 0],
        }
    }

    pub fn rectangle(lx: f64, ly: f64, nx: usize, ny: usize) -> Self {
        Self {
            kind: DomainKind::Rectangle,
            lengths: [lx, ly],
            resolution: [nx, ny],
        }
    }

    /// Same geometry, `cells` cells on every axis.
    pub fn with_resolution(&self, cells: usize) -> Self {
        match self.kind {
            DomainKind::Interval => Self::interval(self.lengths[0], cells),
            DomainKind::Rectangle => Self::rectangle(self.lengths[0], self.lengths[1], cells, cells),
        }
    }

    pub fn dims(&self) -> usize {
        match self.kind {
            DomainKind::Interval => 1,
            DomainKind::Rectangle => 2,
        }
    }

    /// Grid spacing along `axis`.
    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.resolution[axis] as f64
    }

    /// Node counts `[nx + 1, ny + 1]`; the second entry is 1 for intervals.
    pub fn shape(&self) -> [usize; 2] {
        match self.kind {
            DomainKind::Interval => [self.resolution[0] + 1, 1],
            DomainKind::Rectangle => [self.resolution[0] + 1, self.resolution[1] + 1],
        }
    }

    pub fn node_count(&self) -> usize {
        let [nx, ny] = self.shape();
        nx * ny
    }

    /// Coordinates of node `idx` (row-major, x fastest).
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let [nx, _] = self.shape();
        let (i, j) = (idx % nx, idx / nx);
        match self.kind {
            DomainKind::Interval => [i as f64 * self.spacing(0), 0.0],
            DomainKind::Rectangle => [i as f64 * self.spacing(0), j as f64 * self.spacing(1)],
        }
    }

    /// Lebesgue measure of Ω.
    pub fn measure(&self) -> f64 {
        match self.kind {
            DomainKind::Interval => self.lengths[0],
            DomainKind::Rectangle => self.lengths[0] * self.lengths[1],
        }
    }

    /// Measure of ∂Ω (counting measure on the two endpoints in 1D).
    pub fn boundary_measure(&self) -> f64 {
        match self.kind {
            DomainKind::Interval => 2.0,
            DomainKind::Rectangle => 2.0 * (self.lengths[0] + self.lengths[1]),
        }
    }

    /// One-axis trapezoid weights: `Δx` inside, `Δx/2` at both ends.
    pub fn axis_weights(&self, axis: usize) -> Vec<f64> {
        let n = self.resolution[axis];
        let h = self.spacing(axis);
        (0..=n)
            .map(|i| if i == 0 || i == n { 0.5 * h } else { h })
            .collect()
    }

    /// Nodal trapezoid weights (the diagonal mass matrix).
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let wx = self.axis_weights(0);
        match self.kind {
            DomainKind::Interval => wx,
            DomainKind::Rectangle => {
                let wy = self.axis_weights(1);
                wy.iter()
                    .flat_map(|&b| wx.iter().map(move |&a| a * b))
                    .collect()
            }
        }
    }
}

/// Real values on every grid node, boundary nodes included.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    domain: SpatialDomain,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(domain: SpatialDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.node_count() {
            return Err(Error::DomainMismatch(format!(
                "expected {} node values, got {}",
                domain.node_count(),
                values.len()
            )));
        }
        Ok(Self { domain, values })
    }

    pub fn zeros(domain: SpatialDomain) -> Self {
        Self::constant(domain, 0.0)
    }

    pub fn constant(domain: SpatialDomain, c: f64) -> Self {
        Self {
            domain,
            values: vec![c; domain.node_count()],
        }
    }

    /// Samples `f(x, y)` at every node (`y = 0` on intervals).
    pub fn from_fn(domain: SpatialDomain, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..domain.node_count())
            .map(|k| {
                let [x, y] = domain.coords(k);
                f(x, y)
            })
            .collect();
        Self { domain, values }
    }

    pub fn domain(&self) -> &SpatialDomain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            domain: self.domain,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_finite())
    }

    pub fn ensure_same_domain(&self, other: &GridField) -> Result<()> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch(format!(
                "{:?} vs {:?}",
                self.domain, other.domain
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonlinearityKind {
    Zero,
    Power,
}

/// A source term `f` with primitive `F` and the exponent `alpha` for which
/// `f(s)s - 2(2α+1)F(s) ≥ 0` holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearitySpec {
    pub kind: NonlinearityKind,
    pub p: f64,
    pub alpha: f64,
}

impl NonlinearitySpec {
    /// `f(s) = |s|^p s` with the sharp exponent `α = p/4`.
    pub fn power(p: f64) -> Self {
        Self {
            kind: NonlinearityKind::Power,
            p,
            alpha: p / 4.0,
        }
    }

    /// `f ≡ 0`; any positive `alpha` is admissible.
    pub fn zero(alpha: f64) -> Self {
        Self {
            kind: NonlinearityKind::Zero,
            p: 0.0,
            alpha,
        }
    }

    pub fn f(&self, s: f64) -> f64 {
        match self.kind {
            NonlinearityKind::Zero => 0.0,
            NonlinearityKind::Power => {
                if self.p == 2.0 {
                    s * s * s
                } else {
                    s.abs().powf(self.p) * s
                }
            }
        }
    }

    /// Primitive `F(s) = ∫₀ˢ f`.
    pub fn primitive(&self, s: f64) -> f64 {
        match self.kind {
            NonlinearityKind::Zero => 0.0,
            NonlinearityKind::Power => {
                if self.p == 2.0 {
                    0.25 * (s * s) * (s * s)
                } else {
                    s.abs().powf(self.p + 2.0) / (self.p + 2.0)
                }
            }
        }
    }
}

/// `f(s)s − 2(2α+1)F(s)`.
pub fn slack_nnl1(nl: &NonlinearitySpec, s: f64) -> f64 {
    nl.f(s) * s - 2.0 * (2.0 * nl.alpha + 1.0) * nl.primitive(s)
}

/// Separable forcing `h(x, t) = amplitude · e^{−λt} · g(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ForcingSpec {
    None,
    ExpDecay {
        amplitude: f64,
        lambda: f64,
        profile: GridField,
    },
}

impl ForcingSpec {
    pub fn is_none(&self) -> bool {
        matches!(self, ForcingSpec::None)
    }

    fn profile_norm(profile: &GridField) -> f64 {
        let w = profile.domain().trapezoid_weights();
        w.iter()
            .zip(profile.values())
            .map(|(w, g)| w * g * g)
            .sum::<f64>()
            .sqrt()
    }

    /// `h₀ = ∫₀^∞ ‖h(t)‖² dt = A²‖g‖²/(2λ)`.
    pub fn h0(&self) -> f64 {
        match self {
            ForcingSpec::None => 0.0,
            ForcingSpec::ExpDecay {
                amplitude,
                lambda,
                profile,
            } => {
                let g = Self::profile_norm(profile);
                amplitude * amplitude * g * g / (2.0 * lambda)
            }
        }
    }

    /// `h₁ = sup_t ‖h(t)‖ = |A|·‖g‖`.
    pub fn h1(&self) -> f64 {
        match self {
            ForcingSpec::None => 0.0,
            ForcingSpec::ExpDecay {
                amplitude, profile, ..
            } => amplitude.abs() * Self::profile_norm(profile),
        }
    }

    /// Writes `h(·, t)` into `out`.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        match self {
            ForcingSpec::None => out.fill(0.0),
            ForcingSpec::ExpDecay {
                amplitude,
                lambda,
                profile,
            } => {
                let a = amplitude * (-lambda * t).exp();
                for (o, g) in out.iter_mut().zip(profile.values()) {
                    *o = a * g;
                }
            }
        }
    }

    pub fn at(&self, domain: SpatialDomain, t: f64) -> GridField {
        let mut v = vec![0.0; domain.node_count()];
        self.eval_into(t, &mut v);
        GridField { domain, values: v }
    }
}

/// Full problem instance `u_tt + b u_t = Δu + f(u) + h` with Robin coefficient
/// `gamma` and initial data `(u0, u1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub b: f64,
    pub gamma: f64,
    pub domain: SpatialDomain,
    pub nonlinearity: NonlinearitySpec,
    pub forcing: ForcingSpec,
    pub u0: GridField,
    pub u1: GridField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    fn new(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn check_field(out: &mut Vec<Violation>, name: &str, field: &GridField, domain: &SpatialDomain) {
    if field.domain() != domain {
        out.push(Violation::new(name, format!("{name} does not conform to the domain grid")));
    } else if let Some(k) = field.first_non_finite() {
        out.push(Violation::new(name, format!("{name} has a non-finite value at node {k}")));
    }
}

/// Lists every violated invariant; empty iff the instance is admissible.
pub fn validate(spec: &ProblemSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    let d = &spec.domain;

    for axis in 0..d.dims() {
        if !(d.lengths[axis] > 0.0 && d.lengths[axis].is_finite()) {
            out.push(Violation::new("domain.lengths", "domain.lengths > 0 violated"));
        }
        if d.resolution[axis] < MIN_RESOLUTION {
            out.push(Violation::new(
                "domain.resolution",
                format!("domain.resolution ≥ {MIN_RESOLUTION} violated"),
            ));
        }
    }
    if !spec.b.is_finite() {
        out.push(Violation::new("b", "b must be finite"));
    }
    if !spec.gamma.is_finite() {
        out.push(Violation::new("gamma", "gamma must be finite"));
    }

    let nl = &spec.nonlinearity;
    if !(nl.alpha > 0.0 && nl.alpha.is_finite()) {
        out.push(Violation::new("nonlinearity.alpha", "alpha > 0 violated"));
    }
    if nl.kind == NonlinearityKind::Power {
        if !(nl.p > 0.0 && nl.p.is_finite()) {
            out.push(Violation::new("nonlinearity.p", "p > 0 violated"));
        } else if (nl.alpha - nl.p / 4.0).abs() > 1e-12 * nl.alpha.abs().max(1.0) {
            out.push(Violation::new("nonlinearity.alpha", "alpha ≠ p/4"));
        }
    }

    if let ForcingSpec::ExpDecay {
        amplitude,
        lambda,
        profile,
    } = &spec.forcing
    {
        if !(*lambda > 0.0 && lambda.is_finite()) {
            out.push(Violation::new("forcing.lambda", "forcing.lambda > 0 violated"));
        }
        if !amplitude.is_finite() {
            out.push(Violation::new("forcing.amplitude", "forcing.amplitude must be finite"));
        }
        check_field(&mut out, "forcing.profile", profile, d);
    }

    if d.lengths.iter().all(|l| l.is_finite()) && d.resolution[0] > 0 {
        check_field(&mut out, "u0", &spec.u0, d);
        check_field(&mut out, "u1", &spec.u1, d);
    }
    out
}
