//! Theorem-level decisions: classify initial data against the blow-up
//! conditions, build Remark-style data, and solve for the exponential shift
//! `m` used in the accelerating case.

use std::collections::BTreeMap;
use std::fmt;

use crate::concavity::{lemma1_bound, lemma2_bound, BoundResult, ConcavitySetup};
use crate::error::{Error, Result};
use crate::functionals::{compute_a0, compute_k0, energy_e, energy_e1, State};
use crate::grid::{estimate_d0, l2_inner, l2_norm_sq, MIN_CONSTANT_RESOLUTION};
use crate::model::{GridField, ProblemSpec};

/// Relative margin applied to the strict inequalities.
pub const STRICT_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Theorem {
    One,
    Two,
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theorem::One => "1",
            Theorem::Two => "2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `K₀ ≤ 0`: `(u₀,u₁) > (b/α)‖u₀‖²`.
    Con1,
    /// `K₀ > 0`: `2(u₀,u₁) > α⁻¹(b/2 + √(b²/4+α))(‖u₀‖² + K₀)`.
    Con2,
    /// Accelerating case, tested on the shifted energy `E₁(0)`.
    CondV,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Con1 => "con1",
            Branch::Con2 => "con2",
            Branch::CondV => "condV",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub theorem: Theorem,
    pub branch: Branch,
    pub satisfied: bool,
    pub reason: String,
    pub constants: BTreeMap<&'static str, f64>,
    pub concavity: ConcavitySetup,
    /// Present iff `satisfied`.
    pub bound: Option<BoundResult>,
    /// Named premises evaluated along the way.
    pub premises: Vec<(&'static str, bool)>,
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn constant(&self, key: &str) -> Option<f64> {
        self.constants.get(key).copied()
    }

    pub fn t_bound(&self) -> Option<f64> {
        self.bound.map(|b| b.t_bound)
    }
}

fn strictly_greater(lhs: f64, rhs: f64) -> bool {
    lhs - rhs > STRICT_MARGIN * lhs.abs().max(rhs.abs())
}

/// Resolution used for `d₀` on the spec's own grid.
pub fn constant_resolution(spec: &ProblemSpec) -> usize {
    spec.domain.resolution.iter().copied().max().unwrap_or(0).max(MIN_CONSTANT_RESOLUTION)
}

/// Classifies `(u₀, u₁)` against the damped-case conditions.
pub fn classify_theorem1(spec: &ProblemSpec) -> Result<Verdict> {
    theorem1_preconditions(spec)?;
    let d0 = estimate_d0(&spec.domain, constant_resolution(spec))?;
    classify_theorem1_with_d0(spec, d0)
}

fn theorem1_preconditions(spec: &ProblemSpec) -> Result<()> {
    if !(spec.b > 0.0) {
        return Err(Error::Precondition(format!(
            "Theorem 1 inapplicable: requires b > 0, got b = {}",
            spec.b
        )));
    }
    if !(spec.gamma > 0.0) {
        return Err(Error::Precondition(format!(
            "Theorem 1 inapplicable: requires gamma > 0, got gamma = {}",
            spec.gamma
        )));
    }
    Ok(())
}

/// [`classify_theorem1`] with a precomputed `d₀`.
pub fn classify_theorem1_with_d0(spec: &ProblemSpec, d0: f64) -> Result<Verdict> {
    theorem1_preconditions(spec)?;
    let alpha = spec.nonlinearity.alpha;
    let b = spec.b;
    let (h0, h1) = (spec.forcing.h0(), spec.forcing.h1());
    let e0 = energy_e(&State::initial(spec), spec)?.total;
    let a0 = compute_a0(alpha, b, spec.gamma, d0, h0, h1)?;
    let k0 = compute_k0(e0, a0, alpha);
    let norm_sq = l2_norm_sq(&spec.u0);
    let inner = l2_inner(&spec.u0, &spec.u1)?;

    let (branch, lhs, rhs, setup) = if k0 <= 0.0 {
        (
            Branch::Con1,
            inner,
            b / alpha * norm_sq,
            ConcavitySetup {
                alpha,
                c1: b / 2.0,
                c2: 0.0,
                psi0: norm_sq,
                dpsi0: 2.0 * inner,
            },
        )
    } else {
        let psi0 = norm_sq + k0;
        (
            Branch::Con2,
            2.0 * inner,
            (b / 2.0 + (b * b / 4.0 + alpha).sqrt()) / alpha * psi0,
            ConcavitySetup {
                alpha,
                c1: b / 2.0,
                c2: 1.0,
                psi0,
                dpsi0: 2.0 * inner,
            },
        )
    };

    let constants = BTreeMap::from([
        ("E0", e0),
        ("A0", a0),
        ("K0", k0),
        ("d0", d0),
        ("h0", h0),
        ("h1", h1),
        ("norm_u0_sq", norm_sq),
        ("u0_dot_u1", inner),
        ("lhs", lhs),
        ("rhs", rhs),
    ]);
    let holds = strictly_greater(lhs, rhs);
    let mut premises = vec![("condition", holds)];
    let mut notes = Vec::new();
    let (satisfied, reason, bound) = if !holds {
        (false, format!("{branch} fails: {lhs:.6e} ≤ {rhs:.6e}"), None)
    } else {
        let bound = lemma2_bound(&setup)?;
        premises.push(("lemma2_premise", bound.premise_ok));
        if bound.premise_ok {
            (true, format!("{branch} holds: {lhs:.6e} > {rhs:.6e}"), Some(bound))
        } else {
            notes.push("condition holds but the Lemma 2 premise fails on round-off".into());
            (false, format!("{branch} holds but the concavity premise fails"), None)
        }
    };
    Ok(Verdict {
        theorem: Theorem::One,
        branch,
        satisfied,
        reason,
        constants,
        concavity: setup,
        bound,
        premises,
        notes,
    })
}

/// `u₀ = scale·profile`, `u₁ = (2/(p+2)·∫|u₀|^{p+2})^{1/2} u₀/‖u₀‖`, so that
/// `½‖u₁‖² = (F(u₀), 1)`.
pub fn construct_remark_data(profile: &GridField, p: f64, scale: f64) -> Result<(GridField, GridField)> {
    if !(p > 0.0) {
        return Err(Error::Invalid(format!("Remark data needs p > 0, got {p}")));
    }
    let u0 = profile.scaled(scale);
    let norm = l2_norm_sq(&u0).sqrt();
    if !(norm > 0.0) {
        return Err(Error::Invalid("Remark data: division by zero, ‖u0‖ = 0".into()));
    }
    let w = u0.domain().trapezoid_weights();
    let lp: f64 = w.iter().zip(u0.values()).map(|(w, s)| w * s.abs().powf(p + 2.0)).sum();
    let coef = (2.0 / (p + 2.0) * lp).sqrt() / norm;
    let u1 = u0.scaled(coef);
    Ok((u0, u1))
}

/// Result of a log-scale bisection for the smallest satisfying scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSearch {
    /// `None` when even the upper end of the range fails.
    pub scale: Option<f64>,
    pub verdict: Verdict,
    /// Largest scale known to fail (`None` if the lower end already passes).
    pub failing_below: Option<f64>,
    pub evaluations: usize,
}

pub const SCALE_RANGE: (f64, f64) = (1e-3, 1e6);
pub const SCALE_FACTOR: f64 = 1.05;

fn bisect_scale(mut classify: impl FnMut(f64) -> Result<Verdict>) -> Result<ScaleSearch> {
    let (mut lo, mut hi) = SCALE_RANGE;
    let mut evaluations = 2;
    let top = classify(hi)?;
    if !top.satisfied {
        return Ok(ScaleSearch {
            scale: None,
            verdict: top,
            failing_below: Some(hi),
            evaluations: 1,
        });
    }
    let bottom = classify(lo)?;
    if bottom.satisfied {
        return Ok(ScaleSearch {
            scale: Some(lo),
            verdict: bottom,
            failing_below: None,
            evaluations,
        });
    }
    let mut best = top;
    while hi / lo > SCALE_FACTOR {
        let mid = (lo * hi).sqrt();
        let v = classify(mid)?;
        evaluations += 1;
        if v.satisfied {
            hi = mid;
            best = v;
        } else {
            lo = mid;
        }
    }
    Ok(ScaleSearch {
        scale: Some(hi),
        verdict: best,
        failing_below: Some(lo),
        evaluations,
    })
}

/// Smallest scale `s*` (within [`SCALE_FACTOR`]) for which Remark data
/// `s·profile` satisfies the damped-case condition. `template` supplies
/// every other problem parameter.
pub fn find_blowup_scale(profile: &GridField, p: f64, template: &ProblemSpec) -> Result<ScaleSearch> {
    theorem1_preconditions(template)?;
    let d0 = estimate_d0(&template.domain, constant_resolution(template))?;
    let mut spec = template.clone();
    bisect_scale(|s| {
        let (u0, u1) = construct_remark_data(profile, p, s)?;
        spec.u0 = u0;
        spec.u1 = u1;
        classify_theorem1_with_d0(&spec, d0)
    })
}

/// Positive root of `m² + mb − |γ|C = 0`.
pub fn solve_m(b: f64, gamma: f64, c_gamma: f64) -> Result<f64> {
    let q = gamma.abs() * c_gamma;
    if !(c_gamma >= 0.0) || !q.is_finite() || !b.is_finite() {
        return Err(Error::Precondition(format!(
            "solve_m needs finite b and C ≥ 0, got b = {b}, C = {c_gamma}"
        )));
    }
    if q <= 0.0 {
        return Err(Error::Precondition(format!(
            "no positive root m with m² + mb = |γ|C > 0: |γ|C = {q}, b = {b}"
        )));
    }
    let disc = (b * b + 4.0 * q).sqrt();
    let m = if b > 0.0 { 2.0 * q / (b + disc) } else { (disc - b) / 2.0 };
    if !(m > 0.0 && m * b + m * m > 0.0 && b + 2.0 * m > 0.0) {
        return Err(Error::Precondition(format!("root m = {m} fails its certificate")));
    }
    Ok(m)
}

/// `|m² + mb − |γ|C|`.
pub fn m_residual(b: f64, gamma: f64, c_gamma: f64, m: f64) -> f64 {
    (m * m + m * b - gamma.abs() * c_gamma).abs()
}

/// Tests the accelerating-case condition on `E₁(0)` together with the
/// Lemma 1 premises on `Ψ₂ = ‖v‖² + (b+2m)∫‖v‖² + c₀`.
pub fn check_theorem2(spec: &ProblemSpec, m: f64, c0: f64) -> Result<Verdict> {
    if !(c0 > 0.0) {
        return Err(Error::Precondition(format!("Theorem 2 needs c0 > 0, got {c0}")));
    }
    let alpha = spec.nonlinearity.alpha;
    let b = spec.b;
    let shift = m * b + m * m;
    let (h0, h1) = (spec.forcing.h0(), spec.forcing.h1());
    let e1 = energy_e1(&State::initial(spec), spec, m)?;
    let norm_sq = l2_norm_sq(&spec.u0);
    let inner = l2_inner(&spec.u0, &spec.u1)?;

    let forcing_terms = if h0 == 0.0 && h1 == 0.0 {
        0.0
    } else {
        h0 / (2.0 * m * alpha) + h1 * h1 / (2.0 * shift * alpha)
    };
    let value = 4.0 * (alpha + 1.0) * e1 - forcing_terms - 4.0 * (alpha + 1.0) * (b + 2.0 * m) * norm_sq;
    let psi0 = norm_sq + c0;
    let dpsi0 = 2.0 * (inner - m * norm_sq) + (b + 2.0 * m) * norm_sq;

    let mut notes = Vec::new();
    if b >= 0.0 {
        notes.push(format!("b = {b} ≥ 0: Theorem 2 targets the accelerating case b < 0"));
    }
    let mut constants = BTreeMap::from([
        ("E1_0", e1),
        ("m", m),
        ("h0", h0),
        ("h1", h1),
        ("norm_u0_sq", norm_sq),
        ("u0_dot_u1", inner),
        ("condition_value", value),
        ("psi2_0", psi0),
        ("dpsi2_0", dpsi0),
        ("c0", c0),
    ]);
    if spec.gamma != 0.0 {
        constants.insert("C_eps", shift / spec.gamma.abs());
    }

    let cond = value >= 0.0;
    let psi_ok = psi0 > 0.0;
    let dpsi_ok = dpsi0 > 0.0;
    let setup = ConcavitySetup {
        alpha,
        c1: 0.0,
        c2: 0.0,
        psi0,
        dpsi0,
    };
    let premises = vec![("condition", cond), ("psi2_positive", psi_ok), ("dpsi2_positive", dpsi_ok)];
    let (satisfied, reason, bound) = if !cond {
        (false, format!("condition fails: {value:.6e} < 0"), None)
    } else if !(psi_ok && dpsi_ok) {
        (
            false,
            format!("premise fails: Ψ2(0) = {psi0:.6e}, Ψ2'(0) = {dpsi0:.6e}"),
            None,
        )
    } else {
        let bound = lemma1_bound(&setup)?;
        (true, format!("condition holds: {value:.6e} ≥ 0"), Some(bound))
    };
    Ok(Verdict {
        theorem: Theorem::Two,
        branch: Branch::CondV,
        satisfied,
        reason,
        constants,
        concavity: setup,
        bound,
        premises,
        notes,
    })
}

/// Data `u₀ = s·profile`, `u₁ = m·u₀`, so that `v_t(0) = 0`.
pub fn theorem2_data(profile: &GridField, m: f64, scale: f64) -> (GridField, GridField) {
    let u0 = profile.scaled(scale);
    let u1 = u0.scaled(m);
    (u0, u1)
}

/// Smallest scale for which [`theorem2_data`] satisfies [`check_theorem2`].
pub fn find_theorem2_scale(profile: &GridField, template: &ProblemSpec, m: f64, c0: f64) -> Result<ScaleSearch> {
    if profile.is_zero() {
        return Err(Error::Invalid("scale search needs a nonzero profile".into()));
    }
    let mut spec = template.clone();
    bisect_scale(|s| {
        let (u0, u1) = theorem2_data(profile, m, s);
        spec.u0 = u0;
        spec.u1 = u1;
        check_theorem2(&spec, m, c0)
    })
}
