//! Closed-form first and second raw moments of the end-to-end gain `H` for
//! random, equal and optimal phase configurations.
//!
//! General sums run over ordered tuples of mutually distinct element
//! indices. With uniform correlation this gives `2·C(M,2)` pairs,
//! `6·C(M,3)` triples and `24·C(M,4)` quadruples, which is what makes the
//! general sums collapse onto the uniform closed forms.

use std::f64::consts::PI;

use crate::channel::{PhaseConfig, PhaseMode};
use crate::correlation::{CorrelationKind, CorrelationMatrix};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::montecarlo::{McEstimate, Simulator};
use crate::sum::CompensatedSum;

/// `(E{H}, E{H²})` together with the configuration that produced them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentPair {
    pub mu1: f64,
    pub mu2: f64,
    pub mode: PhaseMode,
    pub correlation: CorrelationKind,
}

impl MomentPair {
    pub fn variance(&self) -> f64 {
        self.mu2 - self.mu1 * self.mu1
    }
}

/// Correlation extremes for which the optimal configuration has closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimalCorrelation {
    Uncorrelated,
    FullyCorrelated,
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Random phases: `μ1 = M`, `μ2 = 4M + 2 Σ_{i≠k} (ρ_ik² + 1)²`.
pub fn moments_random(r: &CorrelationMatrix) -> MomentPair {
    let m = r.dim();
    let mut pairs = CompensatedSum::new();
    for i in 0..m {
        for k in 0..m {
            if i != k {
                let s = r.get(i, k).powi(2) + 1.0;
                pairs.add(s * s);
            }
        }
    }
    MomentPair {
        mu1: m as f64,
        mu2: 4.0 * m as f64 + 2.0 * pairs.value(),
        mode: PhaseMode::Random,
        correlation: r.kind(),
    }
}

/// Equal phases, evaluated with the default execution policy.
pub fn moments_equal(r: &CorrelationMatrix) -> MomentPair {
    moments_equal_with(r, Execution::default())
}

/// Equal phases:
///
/// * `μ1 = M + Σ_{i≠k} ρ_ik²`
/// * `μ2 = 4M + Σ_{(i,k)} 2[(ρ_ik²+1)² + 2ρ_ik²(ρ_ik²+4)]
///   + Σ_{(i,k,l)} 4[(ρ_ik ρ_il + ρ_kl)² + 2ρ_ik²ρ_il²]
///   + Σ_{(i,k,l,m)} (ρ_ik ρ_lm + ρ_im ρ_kl)²`
///
/// The quadruple sum is `O(M⁴)`. Work is split by the first index and the
/// per-index partials are combined in index order, so the result is the same
/// for every execution policy.
pub fn moments_equal_with(r: &CorrelationMatrix, exec: Execution) -> MomentPair {
    let m = r.dim();
    let partials = exec.map_indexed(m, |i| equal_partial(r, i));
    let mut mu1 = CompensatedSum::new();
    let mut mu2 = CompensatedSum::new();
    mu1.add(m as f64);
    mu2.add(4.0 * m as f64);
    for (first, second) in &partials {
        mu1.merge(first);
        mu2.merge(second);
    }
    MomentPair {
        mu1: mu1.value(),
        mu2: mu2.value(),
        mode: PhaseMode::Equal,
        correlation: r.kind(),
    }
}

/// Contributions of every ordered tuple whose first index is `i`.
fn equal_partial(r: &CorrelationMatrix, i: usize) -> (CompensatedSum, CompensatedSum) {
    let m = r.dim();
    let mut first = CompensatedSum::new();
    let mut second = CompensatedSum::new();
    let ri = r.row(i);
    for k in (0..m).filter(|&k| k != i) {
        let rik = ri[k];
        let rik2 = rik * rik;
        first.add(rik2);
        second.add(2.0 * ((rik2 + 1.0).powi(2) + 2.0 * rik2 * (rik2 + 4.0)));
        let rk = r.row(k);
        for l in (0..m).filter(|&l| l != i && l != k) {
            let ril = ri[l];
            let rkl = rk[l];
            second.add(4.0 * ((rik * ril + rkl).powi(2) + 2.0 * rik2 * ril * ril));
            let rl = r.row(l);
            let mut quad = CompensatedSum::new();
            for q in (0..m).filter(|&q| q != i && q != k && q != l) {
                let t = rik * rl[q] + ri[q] * rkl;
                quad.add(t * t);
            }
            second.merge(&quad);
        }
    }
    (first, second)
}

/// Uniform correlation closed forms for the random and equal configurations.
pub fn moments_uniform(mode: PhaseMode, m: usize, rho: f64) -> Result<MomentPair> {
    if m == 0 {
        return Err(Error::Dimension(
            "the IRS needs at least one element".into(),
        ));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidParameter {
            name: "rho",
            value: rho,
            reason: "must lie in [0, 1]",
        });
    }
    let mf = m as f64;
    let correlation = if m == 1 || rho == 0.0 {
        CorrelationKind::Uncorrelated
    } else if rho == 1.0 {
        CorrelationKind::FullyCorrelated
    } else {
        CorrelationKind::Uniform(rho)
    };
    let (r2, r3, r4) = (rho * rho, rho.powi(3), rho.powi(4));
    match mode {
        PhaseMode::Random => Ok(MomentPair {
            mu1: mf,
            mu2: 2.0 * mf * ((mf - 1.0) * (r2 + 1.0).powi(2) + 2.0),
            mode,
            correlation,
        }),
        PhaseMode::Equal => Ok(MomentPair {
            mu1: mf * ((mf - 1.0) * r2 + 1.0),
            mu2: 4.0 * mf
                + 4.0 * binomial(m, 2) * (3.0 * r4 + 10.0 * r2 + 1.0)
                + 24.0 * binomial(m, 3) * (3.0 * r4 + 2.0 * r3 + r2)
                + 96.0 * binomial(m, 4) * r4,
            mode,
            correlation,
        }),
        PhaseMode::Optimal => Err(Error::NoClosedForm(
            "uniform correlation with optimal phases (use moments_optimal at rho = 0 or 1)".into(),
        )),
    }
}

/// Moments of `(Σ |h_i||g_i|)²`, the gain under optimal phases.
pub fn moments_optimal(m: usize, correlation: OptimalCorrelation) -> MomentPair {
    let mf = m as f64;
    match correlation {
        OptimalCorrelation::FullyCorrelated => MomentPair {
            mu1: mf * mf,
            mu2: 4.0 * mf.powi(4),
            mode: PhaseMode::Optimal,
            correlation: CorrelationKind::FullyCorrelated,
        },
        OptimalCorrelation::Uncorrelated => {
            let pi2 = PI * PI;
            MomentPair {
                mu1: mf + mf * (mf - 1.0) * pi2 / 16.0,
                mu2: 4.0 * mf
                    + 6.0 * binomial(m, 2) * (3.0 * pi2 / 16.0 + 1.0)
                    + 9.0 * binomial(m, 3) * pi2 / 4.0
                    + 3.0 * binomial(m, 4) * pi2 * pi2 / 32.0,
                mode: PhaseMode::Optimal,
                correlation: CorrelationKind::Uncorrelated,
            }
        }
    }
}

/// Dispatches to the closed form that applies to `mode` and `r`.
pub fn analytic_moments(mode: PhaseMode, r: &CorrelationMatrix) -> Result<MomentPair> {
    match mode {
        PhaseMode::Random => Ok(moments_random(r)),
        PhaseMode::Equal => Ok(moments_equal(r)),
        PhaseMode::Optimal => match r.kind() {
            CorrelationKind::Uncorrelated => {
                Ok(moments_optimal(r.dim(), OptimalCorrelation::Uncorrelated))
            }
            CorrelationKind::FullyCorrelated => Ok(moments_optimal(
                r.dim(),
                OptimalCorrelation::FullyCorrelated,
            )),
            _ => Err(Error::NoClosedForm(
                "optimal phases with partial correlation".into(),
            )),
        },
    }
}

/// Monte Carlo estimates of `(μ1, μ2)`, used to check the closed forms.
pub fn mc_moments_oracle(
    config: PhaseConfig,
    r: &CorrelationMatrix,
    trials: u64,
    seed: u64,
) -> Result<(McEstimate, McEstimate)> {
    let summary = Simulator::new(config, r)?.run(None, trials, seed)?;
    Ok((summary.mu1(), summary.mu2()))
}
