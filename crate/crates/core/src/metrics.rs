//! Closed-form performance metrics: average harvested energy, the gamma
//! moment-matching outage approximation, and exact outage for uncorrelated
//! and fully correlated surfaces.

use std::f64::consts::LN_2;

use crate::channel::SystemParams;
use crate::error::{Error, Result};
use crate::moments::MomentPair;
use crate::quad::{integrate, QuadOptions};
use crate::specfun::{bessel_k_scaled, ln_bessel_k, ln_gamma, reg_lower_inc_gamma};

/// Default absolute tolerance for the fully correlated random-phase integral.
pub const FULLCORR_RANDOM_TOLERANCE: f64 = 1e-9;

/// Average harvested energy from the first two gain moments.
pub fn average_harvested_energy(moments: &MomentPair, params: &SystemParams) -> f64 {
    let scale = (1.0 - params.zeta) * params.path_gain();
    scale * (moments.mu1 + scale * moments.mu2)
}

/// Gain threshold `ξ` below which the link is in outage:
/// `(2^τ − 1)(ζσ² + σ_c²) / (ζ P_t (d1 d2)^-α)`.
pub fn snr_threshold_xi(params: &SystemParams) -> f64 {
    (params.rate_threshold * LN_2).exp_m1() * params.effective_noise()
        / (params.zeta * params.path_gain())
}

/// Gamma distribution matched to `(μ1, μ2)`, and the outage threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaApprox {
    pub kappa: f64,
    pub theta: f64,
    pub xi: f64,
}

impl GammaApprox {
    pub fn from_moments(moments: &MomentPair, xi: f64) -> Result<Self> {
        let variance = moments.variance();
        if !(variance > 0.0) || !(moments.mu1 > 0.0) {
            return Err(Error::DegenerateDistribution {
                mu1_sq: moments.mu1 * moments.mu1,
                mu2: moments.mu2,
            });
        }
        Ok(Self {
            kappa: moments.mu1 * moments.mu1 / variance,
            theta: variance / moments.mu1,
            xi,
        })
    }

    /// `γ(κ, ξ/θ) / Γ(κ)`.
    pub fn outage(&self) -> Result<f64> {
        reg_lower_inc_gamma(self.kappa, self.xi / self.theta)
    }
}

/// Outage probability approximated by a moment-matched gamma gain.
pub fn outage_gamma_approx(moments: &MomentPair, params: &SystemParams) -> Result<f64> {
    GammaApprox::from_moments(moments, snr_threshold_xi(params))?.outage()
}

fn check_elements(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::Dimension(
            "the IRS needs at least one element".into(),
        ));
    }
    Ok(())
}

/// Exact outage with uncorrelated elements (either random or equal phases):
/// `1 − (2/Γ(M)) ξ^{M/2} K_M(2√ξ)`, evaluated in the log domain.
pub fn outage_uncorrelated_exact(m: usize, params: &SystemParams) -> Result<f64> {
    check_elements(m)?;
    let xi = snr_threshold_xi(params);
    if xi == 0.0 {
        return Ok(0.0);
    }
    let order =
        u32::try_from(m).map_err(|_| Error::Dimension(format!("{m} elements is too many")))?;
    let log_survival = LN_2 - ln_gamma(m as f64)?
        + 0.5 * m as f64 * xi.ln()
        + ln_bessel_k(order, 2.0 * xi.sqrt())?;
    Ok((-log_survival.exp_m1()).clamp(0.0, 1.0))
}

/// `z K_1(2z)`, continuous at `z = 0` where it equals 1/2.
fn z_k1_2z(z: f64) -> f64 {
    if z == 0.0 {
        return 0.5;
    }
    let arg = 2.0 * z;
    if arg > 1400.0 {
        return 0.0;
    }
    z * bessel_k_scaled(1, arg).expect("positive argument") * (-arg).exp()
}

/// Exact outage for a fully correlated surface with random phases, where
/// `ψ = |Σ e^{jφ_i}|²` is taken as exponential with mean `M`:
/// `1 − (2/M) ∫_0^∞ √(ξ/ψ) e^{−ψ/M} K_1(2√(ξ/ψ)) dψ`.
pub fn outage_fullcorr_random(m: usize, params: &SystemParams) -> Result<f64> {
    outage_fullcorr_random_with_tolerance(m, params, FULLCORR_RANDOM_TOLERANCE)
}

/// As [`outage_fullcorr_random`] with an explicit absolute tolerance on the result.
///
/// With `t = e^{−ψ/M}` the integral becomes `M ∫_0^1 z K_1(2z) dt`,
/// `z = √(ξ / (−M ln t))`, whose integrand is bounded on `(0, 1)` and tends
/// to 1/2 at `t → 0` and to 0 at `t → 1`.
pub fn outage_fullcorr_random_with_tolerance(
    m: usize,
    params: &SystemParams,
    abs_tol: f64,
) -> Result<f64> {
    check_elements(m)?;
    let xi = snr_threshold_xi(params);
    if xi == 0.0 {
        return Ok(0.0);
    }
    let mf = m as f64;
    let integrand = |t: f64| {
        let psi = -mf * t.ln();
        if psi <= 0.0 {
            return 0.0;
        }
        z_k1_2z((xi / psi).sqrt())
    };
    let opts = QuadOptions {
        abs_tol: 0.5 * abs_tol,
        ..Default::default()
    };
    let r = integrate(integrand, 0.0, 1.0, opts)?;
    Ok((1.0 - 2.0 * r.value).clamp(0.0, 1.0))
}

/// Exact outage for a fully correlated surface with equal (equivalently,
/// optimal) phases: `1 − (2/M) √ξ K_1(2√ξ / M)`.
pub fn outage_fullcorr_equal(m: usize, params: &SystemParams) -> Result<f64> {
    check_elements(m)?;
    let xi = snr_threshold_xi(params);
    if xi == 0.0 {
        return Ok(0.0);
    }
    let z = xi.sqrt() / m as f64;
    let log_survival = LN_2 + z.ln() + ln_bessel_k(1, 2.0 * z)?;
    Ok((-log_survival.exp_m1()).clamp(0.0, 1.0))
}
