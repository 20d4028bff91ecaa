//! Concavity-method blow-up bounds for scalar functions `Ψ(t)` obeying
//!
//! ```text
//! Ψ''Ψ − (1+α)(Ψ')² ≥ −2C₁ΨΨ' − C₂Ψ²
//! ```
//!
//! With `C₁ = C₂ = 0` the bound is `Ψ(0)/(αΨ'(0))`; otherwise it is
//!
//! ```text
//! T₁ = ln[(γ₁Ψ(0) + αΨ'(0)) / (γ₂Ψ(0) + αΨ'(0))] / (2√(C₁² + αC₂))
//! γ₁,₂ = −C₁ ± √(C₁² + αC₂)
//! ```
//!
//! The equality case is integrated numerically two ways to check that the
//! bounds are attained: directly in `Ψ` with error-controlled RK4, and through
//! `y = Ψ^{−α}`, which turns the equality into the linear ODE
//! `y'' + 2C₁y' − αC₂y = 0` whose first zero is the blow-up time.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcavitySetup {
    pub alpha: f64,
    pub c1: f64,
    pub c2: f64,
    pub psi0: f64,
    pub dpsi0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lemma {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    pub gamma1: f64,
    pub gamma2: f64,
    /// Upper bound on the blow-up time; `+∞` when the premise fails.
    pub t_bound: f64,
    pub lemma: Lemma,
    pub premise_ok: bool,
}

fn check_common(setup: &ConcavitySetup) -> Result<()> {
    if !(setup.psi0 > 0.0) {
        return Err(Error::Precondition(format!(
            "concavity bound requires Ψ(0) > 0, got {}",
            setup.psi0
        )));
    }
    if !(setup.alpha > 0.0) {
        return Err(Error::Precondition(format!(
            "concavity bound requires α > 0, got {}",
            setup.alpha
        )));
    }
    if !setup.dpsi0.is_finite() {
        return Err(Error::Precondition("Ψ'(0) must be finite".into()));
    }
    Ok(())
}

/// `t₀ ≤ Ψ(0)/(αΨ'(0))` when `Ψ'(0) > 0`.
pub fn lemma1_bound(setup: &ConcavitySetup) -> Result<BoundResult> {
    check_common(setup)?;
    if setup.c1 != 0.0 || setup.c2 != 0.0 {
        return Err(Error::Precondition(
            "Lemma 1 bound applies only with C1 = C2 = 0".into(),
        ));
    }
    let premise_ok = setup.dpsi0 > 0.0;
    let t_bound = if premise_ok {
        setup.psi0 / (setup.alpha * setup.dpsi0)
    } else {
        f64::INFINITY
    };
    Ok(BoundResult {
        gamma1: 0.0,
        gamma2: 0.0,
        t_bound,
        lemma: Lemma::One,
        premise_ok,
    })
}

/// `T₁` bound when `Ψ'(0) > −γ₂Ψ(0)/α`.
pub fn lemma2_bound(setup: &ConcavitySetup) -> Result<BoundResult> {
    check_common(setup)?;
    let ConcavitySetup {
        alpha,
        c1,
        c2,
        psi0,
        dpsi0,
    } = *setup;
    if !(c1 >= 0.0 && c2 >= 0.0 && c1 + c2 > 0.0) {
        return Err(Error::Precondition(format!(
            "Lemma 2 requires C1, C2 ≥ 0 and C1 + C2 > 0, got C1 = {c1}, C2 = {c2}"
        )));
    }
    let root = (c1 * c1 + alpha * c2).sqrt();
    let gamma1 = -c1 + root;
    let gamma2 = -c1 - root;
    let mut premise_ok = dpsi0 > -gamma2 * psi0 / alpha;
    let mut t_bound = f64::INFINITY;
    if premise_ok {
        let denom = gamma2 * psi0 + alpha * dpsi0;
        // ln(num/denom) with num − denom = 2·root·Ψ(0)
        let t = (2.0 * root * psi0 / denom).ln_1p() / (2.0 * root);
        if denom > 0.0 && t.is_finite() {
            t_bound = t;
        } else {
            premise_ok = false;
        }
    }
    Ok(BoundResult {
        gamma1,
        gamma2,
        t_bound,
        lemma: Lemma::Two,
        premise_ok,
    })
}

/// Lemma 1 when `C₁ = C₂ = 0`, Lemma 2 otherwise.
pub fn concavity_bound(setup: &ConcavitySetup) -> Result<BoundResult> {
    if setup.c1 == 0.0 && setup.c2 == 0.0 {
        lemma1_bound(setup)
    } else {
        lemma2_bound(setup)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Ψ level that must be exceeded before blow-up is declared.
    pub threshold: f64,
    pub dt0: f64,
    /// Integration horizon for setups that never blow up.
    pub t_max: f64,
    /// Step-doubling tolerance per RK4 step (relative).
    pub rel_tol: f64,
    /// Required relative width of the reported bracket.
    pub bracket_rel: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            threshold: 1e8,
            dt0: 1e-3,
            t_max: 1e3,
            rel_tol: 1e-11,
            bracket_rel: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoBlowUpReason {
    /// Ψ' ≤ 0 was reached, after which the equality case stays bounded.
    Decreasing,
    HorizonReached,
    /// Ψ grew past the floating range without a finite-time signature.
    UnboundedWithoutSingularity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleOutcome {
    /// The blow-up time lies in `[t_lo, t_hi]`.
    BlowUp { t_lo: f64, t_hi: f64, steps: usize },
    NoBlowUp {
        t: f64,
        psi: f64,
        dpsi: f64,
        reason: NoBlowUpReason,
    },
}

impl OracleOutcome {
    pub fn interval(&self) -> Option<(f64, f64)> {
        match *self {
            OracleOutcome::BlowUp { t_lo, t_hi, .. } => Some((t_lo, t_hi)),
            OracleOutcome::NoBlowUp { .. } => None,
        }
    }
}

fn equality_rhs(s: &ConcavitySetup, psi: f64, dpsi: f64) -> [f64; 2] {
    let acc = ((1.0 + s.alpha) * dpsi * dpsi - 2.0 * s.c1 * psi * dpsi - s.c2 * psi * psi) / psi;
    [dpsi, acc]
}

fn rk4_step(rhs: impl Fn([f64; 2]) -> [f64; 2], y: [f64; 2], h: f64) -> [f64; 2] {
    let add = |a: [f64; 2], k: [f64; 2], c: f64| [a[0] + c * k[0], a[1] + c * k[1]];
    let k1 = rhs(y);
    let k2 = rhs(add(y, k1, 0.5 * h));
    let k3 = rhs(add(y, k2, 0.5 * h));
    let k4 = rhs(add(y, k3, h));
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Upper bound on the remaining time before `y = Ψ^{−α}` reaches zero, from
/// `|y'(s)| ≥ a − c(s − t)` where `c` bounds `y''` while `y` and `|y'|`
/// decrease.
fn tail_upper_bound(s: &ConcavitySetup, psi: f64, dpsi: f64) -> Option<f64> {
    let y = psi.powf(-s.alpha);
    let a = s.alpha * y * dpsi / psi;
    let c = 2.0 * s.c1 * a + s.alpha * s.c2 * y;
    if c == 0.0 {
        return Some(y / a);
    }
    let disc = a * a - 2.0 * c * y;
    if disc < 0.0 {
        return None;
    }
    // smaller root of y − aτ + cτ²/2 = 0, written to avoid cancellation
    Some(2.0 * y / (a + disc.sqrt()))
}

/// Integrates the equality case `Ψ'' = ((1+α)Ψ'² − 2C₁ΨΨ' − C₂Ψ²)/Ψ` until it
/// blows up (bracketed) or provably stays bounded.
pub fn extremal_ode_blowup(setup: &ConcavitySetup, threshold: f64, dt0: f64) -> Result<OracleOutcome> {
    extremal_ode_blowup_with(
        setup,
        &OracleOptions {
            threshold,
            dt0,
            ..OracleOptions::default()
        },
    )
}

pub fn extremal_ode_blowup_with(setup: &ConcavitySetup, opts: &OracleOptions) -> Result<OracleOutcome> {
    check_common(setup)?;
    if !(opts.threshold >= 1e8) {
        return Err(Error::Precondition(format!(
            "oracle threshold must be ≥ 1e8, got {}",
            opts.threshold
        )));
    }
    if !(opts.dt0 > 0.0) {
        return Err(Error::Precondition("oracle dt0 must be positive".into()));
    }
    let rhs = |y: [f64; 2]| equality_rhs(setup, y[0], y[1]);
    let mut t = 0.0;
    // compensation term: steps near blow-up fall far below ulp(t)
    let mut t_comp = 0.0;
    let mut state = [setup.psi0, setup.dpsi0];
    let mut dt = opts.dt0;
    let mut steps = 0usize;
    loop {
        let [psi, dpsi] = state;
        if dpsi <= 0.0 {
            return Ok(OracleOutcome::NoBlowUp {
                t,
                psi,
                dpsi,
                reason: NoBlowUpReason::Decreasing,
            });
        }
        if psi >= opts.threshold {
            if let Some(tail) = tail_upper_bound(setup, psi, dpsi) {
                let t_hi = t + tail;
                if tail <= opts.bracket_rel * t_hi {
                    return Ok(OracleOutcome::BlowUp { t_lo: t, t_hi, steps });
                }
            }
        }
        if psi > 1e280 {
            return Ok(OracleOutcome::NoBlowUp {
                t,
                psi,
                dpsi,
                reason: NoBlowUpReason::UnboundedWithoutSingularity,
            });
        }
        if t >= opts.t_max {
            return Ok(OracleOutcome::NoBlowUp {
                t,
                psi,
                dpsi,
                reason: NoBlowUpReason::HorizonReached,
            });
        }

        let full = rk4_step(rhs, state, dt);
        let half = rk4_step(rhs, rk4_step(rhs, state, 0.5 * dt), 0.5 * dt);
        let err = (0..2)
            .map(|k| (full[k] - half[k]).abs() / half[k].abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        let ok = half.iter().all(|v| v.is_finite()) && half[0] > 0.0 && err <= opts.rel_tol;
        if !ok {
            dt *= 0.5;
            if dt < 1e-300 {
                return Err(Error::StiffFailure { t, psi, dpsi });
            }
            continue;
        }
        let y = dt - t_comp;
        let t_next = t + y;
        t_comp = (t_next - t) - y;
        t = t_next;
        state = half;
        steps += 1;
        if err < opts.rel_tol / 64.0 {
            dt *= 2.0;
        }
    }
}

/// First zero of `y = Ψ^{−α}` from the linear equality ODE
/// `y'' + 2C₁y' − αC₂y = 0`, located by bisection on RK4 sub-steps.
/// `None` when `y` stays positive through `t_max`.
pub fn linearized_blowup_time(setup: &ConcavitySetup, t_max: f64) -> Result<Option<f64>> {
    check_common(setup)?;
    // z = y / y(0): z(0) = 1, z'(0) = −αΨ'(0)/Ψ(0)
    let z0 = [1.0, -setup.alpha * setup.dpsi0 / setup.psi0];
    let rhs = |z: [f64; 2]| [z[1], -2.0 * setup.c1 * z[1] + setup.alpha * setup.c2 * z[0]];
    let rate = 1.0f64
        .max(z0[1].abs())
        .max(2.0 * setup.c1)
        .max((setup.alpha * setup.c2).sqrt());
    let h = 1e-3 / rate;
    let mut t = 0.0;
    let mut z = z0;
    while t < t_max {
        if z[1] >= 0.0 {
            // z > 0 and z' ≥ 0 stay so: at z' = 0, z'' = αC₂z ≥ 0
            return Ok(None);
        }
        let next = rk4_step(rhs, z, h);
        if next[0] <= 0.0 {
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if rk4_step(rhs, z, mid)[0] > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(Some(t + 0.5 * (lo + hi)));
        }
        z = next;
        t += h;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(alpha: f64, c1: f64, c2: f64, psi0: f64, dpsi0: f64) -> ConcavitySetup {
        ConcavitySetup {
            alpha,
            c1,
            c2,
            psi0,
            dpsi0,
        }
    }

    #[test]
    fn lemma1_examples() {
        let b = lemma1_bound(&setup(1.0, 0.0, 0.0, 1.0, 1.0)).unwrap();
        assert!(b.premise_ok);
        assert_eq!(b.t_bound, 1.0);
        assert_eq!(lemma1_bound(&setup(2.0, 0.0, 0.0, 4.0, 1.0)).unwrap().t_bound, 2.0);
        let b = lemma1_bound(&setup(1.0, 0.0, 0.0, 1.0, 0.0)).unwrap();
        assert!(!b.premise_ok);
        assert_eq!(b.t_bound, f64::INFINITY);
        assert!(lemma1_bound(&setup(1.0, 0.0, 0.0, 0.0, 1.0)).is_err());
        assert!(lemma1_bound(&setup(1.0, 0.5, 0.0, 1.0, 1.0)).is_err());
    }

    // 30-digit mpmath evaluation of the T₁ formula.
    const T1_HALF_ONE: f64 = 0.860_817_881_928_008_1;

    #[test]
    fn lemma2_examples() {
        let b = lemma2_bound(&setup(1.0, 0.5, 1.0, 1.0, 2.0)).unwrap();
        assert!(b.premise_ok);
        assert_relative_eq!(b.gamma1, 0.618_033_988_749_894_8, max_relative = 1e-14);
        assert_relative_eq!(b.gamma2, -1.618_033_988_749_895, max_relative = 1e-14);
        assert_relative_eq!(b.t_bound, T1_HALF_ONE, max_relative = 1e-13);

        let b = lemma2_bound(&setup(1.0, 1.0, 0.0, 1.0, 3.0)).unwrap();
        assert_eq!(b.gamma1, 0.0);
        assert_eq!(b.gamma2, -2.0);
        assert_relative_eq!(b.t_bound, 0.5 * 3f64.ln(), max_relative = 1e-14);

        let threshold = 0.5 + 1.25f64.sqrt();
        let b = lemma2_bound(&setup(1.0, 0.5, 1.0, 1.0, threshold)).unwrap();
        assert!(!b.premise_ok);
        assert_eq!(b.t_bound, f64::INFINITY);
    }

    #[test]
    fn lemma2_rejects_bad_setups() {
        assert!(lemma2_bound(&setup(1.0, 0.5, 1.0, -1.0, 2.0)).is_err());
        assert!(lemma2_bound(&setup(1.0, 0.0, 0.0, 1.0, 2.0)).is_err());
        assert!(lemma2_bound(&setup(0.0, 0.5, 1.0, 1.0, 2.0)).is_err());
    }

    #[test]
    fn lemma2_tends_to_lemma1() {
        let l1 = lemma1_bound(&setup(0.7, 0.0, 0.0, 2.0, 3.0)).unwrap().t_bound;
        let l2 = lemma2_bound(&setup(0.7, 1e-6, 1e-6, 2.0, 3.0)).unwrap().t_bound;
        assert!((l2 - l1).abs() <= 0.01 * l1);
    }

    #[test]
    fn t1_nonincreasing_in_initial_slope() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let alpha = rng.gen_range(0.1..3.0);
            let c1 = rng.gen_range(0.0..2.0);
            let c2 = rng.gen_range(0.01..2.0);
            let psi0 = rng.gen_range(0.1..10.0);
            let start = lemma2_bound(&setup(alpha, c1, c2, psi0, 0.0)).unwrap().gamma2 * -psi0 / alpha;
            let mut prev = f64::INFINITY;
            for k in 1..=30 {
                let d = start * (1.0 + 0.2 * k as f64);
                let t = lemma2_bound(&setup(alpha, c1, c2, psi0, d)).unwrap().t_bound;
                assert!(t <= prev);
                prev = t;
            }
        }
    }

    #[test]
    fn oracle_lemma1_closed_form() {
        // Ψ = 1/(1 − t)
        let out = extremal_ode_blowup(&setup(1.0, 0.0, 0.0, 1.0, 1.0), 1e8, 1e-3).unwrap();
        let (lo, hi) = out.interval().unwrap();
        assert!(lo <= 1.0 + 1e-9 && hi >= 1.0 - 1e-9, "[{lo}, {hi}]");
        assert!(hi - lo <= 1e-6 * hi);
    }

    #[test]
    fn oracle_attains_lemma2_bound() {
        let out = extremal_ode_blowup(&setup(1.0, 0.5, 1.0, 1.0, 2.0), 1e8, 1e-3).unwrap();
        let (lo, hi) = out.interval().unwrap();
        assert!((lo - T1_HALF_ONE).abs() <= 1e-3 * T1_HALF_ONE);
        assert!(hi <= T1_HALF_ONE * (1.0 + 1e-3));
        let lin = linearized_blowup_time(&setup(1.0, 0.5, 1.0, 1.0, 2.0), 100.0)
            .unwrap()
            .unwrap();
        assert!((lin - T1_HALF_ONE).abs() <= 1e-9);
    }

    #[test]
    fn oracle_sees_no_blowup_below_premise() {
        let s = setup(1.0, 0.5, 1.0, 1.0, 1.0);
        let out = extremal_ode_blowup(&s, 1e8, 1e-3).unwrap();
        assert!(matches!(
            out,
            OracleOutcome::NoBlowUp {
                reason: NoBlowUpReason::Decreasing,
                ..
            }
        ));
        assert_eq!(linearized_blowup_time(&s, 100.0).unwrap(), None);
        assert!(!lemma2_bound(&s).unwrap().premise_ok);
    }

    #[test]
    fn oracle_rejects_low_threshold() {
        assert!(extremal_ode_blowup(&setup(1.0, 0.0, 0.0, 1.0, 1.0), 1e3, 1e-3).is_err());
    }

    #[test]
    fn equality_case_saturates_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let alpha = rng.gen_range(0.25..3.0);
            let c1 = rng.gen_range(0.0..2.0);
            let c2 = rng.gen_range(0.0..2.0) + if c1 < 0.05 { 0.1 } else { 0.0 };
            let psi0 = rng.gen_range(0.1..10.0);
            let b0 = lemma2_bound(&setup(alpha, c1, c2, psi0, 0.0)).unwrap();
            let dpsi0 = -b0.gamma2 * psi0 / alpha * (1.0 + rng.gen_range(0.05..3.0));
            let s = setup(alpha, c1, c2, psi0, dpsi0);
            let t1 = lemma2_bound(&s).unwrap().t_bound;
            let (lo, hi) = extremal_ode_blowup(&s, 1e8, 1e-3).unwrap().interval().unwrap();
            assert!((lo - t1).abs() <= 1e-3 * t1, "{s:?}: [{lo}, {hi}] vs {t1}");
            assert!(hi <= t1 * (1.0 + 1e-3));
            let lin = linearized_blowup_time(&s, 1e3).unwrap().unwrap();
            assert!((lin - t1).abs() <= 1e-6 * t1, "{s:?}: {lin} vs {t1}");
        }
    }
}
