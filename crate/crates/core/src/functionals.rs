//! Scalar functionals evaluated on states and on recorded series.

use crate::error::{Error, Result};
use crate::grid::{boundary_dot, grad_dot, weighted_dot};
use crate::model::{GridField, NonlinearitySpec, ProblemSpec, SpatialDomain};
use crate::simulate::{Record, SimSeries};

/// Displacement and velocity at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: GridField,
    pub ut: GridField,
}

impl State {
    pub fn initial(spec: &ProblemSpec) -> Self {
        Self {
            t: 0.0,
            u: spec.u0.clone(),
            ut: spec.u1.clone(),
        }
    }

    /// Errors with the first non-finite node ("escaped" state).
    pub fn check_finite(&self) -> Result<()> {
        if let Some(node) = self.u.first_non_finite() {
            return Err(Error::NonFinite { field: "u", node });
        }
        if let Some(node) = self.ut.first_non_finite() {
            return Err(Error::NonFinite { field: "ut", node });
        }
        Ok(())
    }

    fn conforms(&self, domain: &SpatialDomain) -> Result<()> {
        if self.u.domain() != domain || self.ut.domain() != domain {
            return Err(Error::DomainMismatch("state does not live on the problem grid".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    /// ½‖u_t‖²
    pub kinetic: f64,
    /// ½‖∇u‖²
    pub dirichlet: f64,
    /// (γ/2)∫_{∂Ω}u²
    pub robin: f64,
    /// (F(u), 1)
    pub potential: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn from_parts(norm_ut_sq: f64, grad_sq: f64, boundary_sq: f64, potential: f64, gamma: f64) -> Self {
        let kinetic = 0.5 * norm_ut_sq;
        let dirichlet = 0.5 * grad_sq;
        let robin = 0.5 * gamma * boundary_sq;
        Self {
            kinetic,
            dirichlet,
            robin,
            potential,
            total: kinetic + dirichlet + robin - potential,
        }
    }
}

/// `(F(u), 1)` by the trapezoid rule.
pub fn potential_integral(nl: &NonlinearitySpec, weights: &[f64], u: &[f64]) -> f64 {
    weights.iter().zip(u).map(|(w, &s)| w * nl.primitive(s)).sum()
}

/// `E = ½‖u_t‖² + ½‖∇u‖² + (γ/2)∫_{∂Ω}u² − (F(u), 1)`.
pub fn energy_e(state: &State, spec: &ProblemSpec) -> Result<EnergyBreakdown> {
    state.conforms(&spec.domain)?;
    state.check_finite()?;
    let d = &spec.domain;
    let w = d.trapezoid_weights();
    let (u, ut) = (state.u.values(), state.ut.values());
    Ok(EnergyBreakdown::from_parts(
        weighted_dot(&w, ut, ut),
        grad_dot(d, u, u),
        boundary_dot(d, u, u),
        potential_integral(&spec.nonlinearity, &w, u),
        spec.gamma,
    ))
}

/// `A₀ = (1+2α)h₀/b + d₀h₁²/(4α·min{1, γ})`.
pub fn compute_a0(alpha: f64, b: f64, gamma: f64, d0: f64, h0: f64, h1: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::Precondition("Theorem 1 requires positive damping".into()));
    }
    if !(gamma > 0.0) {
        return Err(Error::Precondition("Theorem 1 requires a positive Robin coefficient".into()));
    }
    if !(alpha > 0.0 && d0 > 0.0) {
        return Err(Error::Precondition(format!(
            "A0 needs alpha > 0 and d0 > 0, got alpha = {alpha}, d0 = {d0}"
        )));
    }
    Ok((1.0 + 2.0 * alpha) / b * h0 + d0 * h1 * h1 / (4.0 * alpha * gamma.min(1.0)))
}

/// `K₀ = 4(1+2α)E(0) + A₀`.
pub fn compute_k0(e0: f64, a0: f64, alpha: f64) -> f64 {
    4.0 * (1.0 + 2.0 * alpha) * e0 + a0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiPoint {
    pub t: f64,
    pub psi: f64,
    pub dpsi: f64,
}

/// `Ψ = ‖u‖² + c₀`, `Ψ' = 2(u, u_t)` per record.
pub fn psi_series(series: &SimSeries, c0: f64) -> Vec<PsiPoint> {
    series
        .records
        .iter()
        .map(|r| PsiPoint {
            t: r.t,
            psi: r.norm_u_sq + c0,
            dpsi: 2.0 * r.u_dot_ut,
        })
        .collect()
}

/// `max_t |E(t) − E(0) + b∫₀ᵗ‖u_τ‖² − ∫₀ᵗ(u_τ, h)|` using the recorded
/// cumulative integrals.
pub fn energy_residual(series: &SimSeries, spec: &ProblemSpec) -> f64 {
    let Some(first) = series.records.first() else {
        return 0.0;
    };
    series
        .records
        .iter()
        .map(|r| (r.energy - first.energy + spec.b * r.cum_damping - r.cum_forcing).abs())
        .fold(0.0, f64::max)
}

fn check_m(m: f64) -> Result<()> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Precondition(format!("E1 requires m > 0, got {m}")));
    }
    Ok(())
}

/// `E₁` evaluated directly on transformed fields `(v, v_t)` at time `t`.
pub fn energy_e1_transformed(t: f64, v: &GridField, vt: &GridField, spec: &ProblemSpec, m: f64) -> Result<f64> {
    check_m(m)?;
    let d = &spec.domain;
    let w = d.trapezoid_weights();
    let (v, vt) = (v.values(), vt.values());
    let growth = (m * t).exp();
    let potential: f64 = w
        .iter()
        .zip(v)
        .map(|(w, &s)| w * spec.nonlinearity.primitive(growth * s))
        .sum::<f64>()
        / (growth * growth);
    let e1 = -0.5 * (m * spec.b + m * m) * weighted_dot(&w, v, v)
        - 0.5 * weighted_dot(&w, vt, vt)
        - 0.5 * grad_dot(d, v, v)
        - 0.5 * spec.gamma * boundary_dot(d, v, v)
        + potential;
    if !e1.is_finite() {
        return Err(Error::NonFinite { field: "E1", node: 0 });
    }
    Ok(e1)
}

/// `E₁(t)` for `v = e^{−mt}u`, `v_t = e^{−mt}(u_t − m u)`.
pub fn energy_e1(state: &State, spec: &ProblemSpec, m: f64) -> Result<f64> {
    check_m(m)?;
    state.conforms(&spec.domain)?;
    state.check_finite()?;
    let decay = (-m * state.t).exp();
    let v = state.u.scaled(decay);
    let vt = GridField::new(
        spec.domain,
        state
            .ut
            .values()
            .iter()
            .zip(state.u.values())
            .map(|(ut, u)| decay * (ut - m * u))
            .collect(),
    )?;
    energy_e1_transformed(state.t, &v, &vt, spec, m)
}

/// `E₁(t)` from the scalar quantities of one record.
pub fn e1_from_record(r: &Record, spec: &ProblemSpec, m: f64) -> f64 {
    let vt_sq = r.norm_ut_sq - 2.0 * m * r.u_dot_ut + m * m * r.norm_u_sq;
    let inner = -0.5 * (m * spec.b + m * m) * r.norm_u_sq - 0.5 * vt_sq - 0.5 * r.grad_sq
        - 0.5 * spec.gamma * r.boundary_sq
        + r.potential;
    (-2.0 * m * r.t).exp() * inner
}

/// `Ψ = ‖v‖² + (b+2m)∫₀ᵗ‖v‖² + c₀` with `Ψ' = 2(v, v_t) + (b+2m)‖v‖²`.
pub fn psi2_series(series: &SimSeries, spec: &ProblemSpec, m: f64, c0: f64) -> Result<Vec<PsiPoint>> {
    check_m(m)?;
    if !(c0 > 0.0) {
        return Err(Error::Precondition(format!("Ψ₂ requires c0 > 0, got {c0}")));
    }
    let k = spec.b + 2.0 * m;
    let mut out = Vec::with_capacity(series.records.len());
    let mut integral = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for r in &series.records {
        let decay = (-2.0 * m * r.t).exp();
        let v_sq = decay * r.norm_u_sq;
        let v_dot_vt = decay * (r.u_dot_ut - m * r.norm_u_sq);
        if let Some((tp, vp)) = prev {
            integral += 0.5 * (r.t - tp) * (v_sq + vp);
        }
        prev = Some((r.t, v_sq));
        out.push(PsiPoint {
            t: r.t,
            psi: v_sq + k * integral + c0,
            dpsi: 2.0 * v_dot_vt + k * v_sq,
        });
    }
    Ok(out)
}
