//! Trial-level Monte Carlo estimators of the gain moments, outage
//! probability and average harvested energy.
//!
//! Trials are grouped into fixed-size chunks. Each trial draws from its own
//! counter-indexed stream and chunk summaries are merged in chunk order, so
//! an estimate depends only on `(seed, trials)` and never on the thread count.

use crate::channel::{
    instantaneous_energy, instantaneous_snr, ChannelWorkspace, PhaseConfig, SystemParams,
    TrialStreams,
};
use crate::correlation::{
    build_matrix, sqrt_psd, CorrelationFactor, CorrelationMatrix, CorrelationModel,
};
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Trials per work unit. Fixed so the reduction tree never depends on the pool size.
pub const CHUNK_TRIALS: u64 = 4096;
/// Smallest trial count accepted by the `estimate_*` functions.
pub const MIN_TRIALS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
}

impl McEstimate {
    /// `|value - reference|` in units of the standard error.
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = (self.value - reference).abs();
        if self.stderr == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / self.stderr
        }
    }

    pub fn within(&self, reference: f64, sigmas: f64) -> bool {
        self.z_score(reference) <= sigmas
    }
}

/// Streaming mean/variance with a pairwise merge.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RunningStats) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let (na, nb) = (self.count as f64, other.count as f64);
        let delta = other.mean - self.mean;
        self.mean += delta * nb / n;
        self.m2 += other.m2 + delta * delta * na * nb / n;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Accumulated statistics of one simulation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSummary {
    pub seed: u64,
    pub gain: RunningStats,
    pub gain_sq: RunningStats,
    pub energy: RunningStats,
    pub outages: u64,
}

impl TrialSummary {
    fn empty(seed: u64) -> Self {
        Self {
            seed,
            gain: RunningStats::default(),
            gain_sq: RunningStats::default(),
            energy: RunningStats::default(),
            outages: 0,
        }
    }

    fn merge(&mut self, other: &TrialSummary) {
        self.gain.merge(&other.gain);
        self.gain_sq.merge(&other.gain_sq);
        self.energy.merge(&other.energy);
        self.outages += other.outages;
    }

    pub fn trials(&self) -> u64 {
        self.gain.count()
    }

    fn mean_estimate(&self, stats: &RunningStats) -> McEstimate {
        McEstimate {
            value: stats.mean(),
            stderr: stats.stderr(),
            trials: self.trials(),
            seed: self.seed,
        }
    }

    /// Estimate of `E{H}`.
    pub fn mu1(&self) -> McEstimate {
        self.mean_estimate(&self.gain)
    }

    /// Estimate of `E{H²}`.
    pub fn mu2(&self) -> McEstimate {
        self.mean_estimate(&self.gain_sq)
    }

    /// Mean harvested energy (meaningful only when the run had parameters).
    pub fn avg_energy(&self) -> McEstimate {
        self.mean_estimate(&self.energy)
    }

    /// Outage fraction with binomial standard error.
    pub fn outage(&self) -> McEstimate {
        let n = self.trials();
        let p = if n == 0 {
            0.0
        } else {
            self.outages as f64 / n as f64
        };
        McEstimate {
            value: p,
            stderr: if n == 0 {
                0.0
            } else {
                (p * (1.0 - p) / n as f64).sqrt()
            },
            trials: n,
            seed: self.seed,
        }
    }
}

/// Monte Carlo driver for one correlation factor and phase configuration.
#[derive(Debug, Clone)]
pub struct Simulator {
    factor: CorrelationFactor,
    config: PhaseConfig,
    exec: Execution,
}

impl Simulator {
    pub fn new(config: PhaseConfig, r: &CorrelationMatrix) -> Result<Self> {
        Ok(Self::from_factor(config, sqrt_psd(r)?))
    }

    pub fn from_model(config: PhaseConfig, model: &CorrelationModel, m: usize) -> Result<Self> {
        Self::new(config, &build_matrix(model, m)?)
    }

    pub fn from_factor(config: PhaseConfig, factor: CorrelationFactor) -> Self {
        Self {
            factor,
            config,
            exec: Execution::default(),
        }
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn factor(&self) -> &CorrelationFactor {
        &self.factor
    }

    /// Runs `trials` realizations. Energy and outage are accumulated only when
    /// `params` is given.
    pub fn run(
        &self,
        params: Option<&SystemParams>,
        trials: u64,
        seed: u64,
    ) -> Result<TrialSummary> {
        if trials == 0 {
            return Err(Error::InvalidParameter {
                name: "trials",
                value: 0.0,
                reason: "at least one trial is required",
            });
        }
        if let Some(p) = params {
            p.validate()?;
        }
        let streams = TrialStreams::new(seed);
        let chunks = trials.div_ceil(CHUNK_TRIALS);
        let partials = self.exec.map_indexed(chunks as usize, |c| {
            let start = c as u64 * CHUNK_TRIALS;
            let end = (start + CHUNK_TRIALS).min(trials);
            self.run_chunk(&streams, start..end, params, seed)
        });
        let mut total = TrialSummary::empty(seed);
        for partial in &partials {
            total.merge(partial);
        }
        Ok(total)
    }

    fn run_chunk(
        &self,
        streams: &TrialStreams,
        range: std::ops::Range<u64>,
        params: Option<&SystemParams>,
        seed: u64,
    ) -> TrialSummary {
        let mut summary = TrialSummary::empty(seed);
        let mut ws = ChannelWorkspace::new(self.factor.dim());
        for trial in range {
            let mut rng = streams.stream(trial);
            ws.draw(&self.factor, &mut rng);
            let gain = ws.gain(self.config, &mut rng);
            summary.gain.push(gain);
            summary.gain_sq.push(gain * gain);
            if let Some(p) = params {
                summary.energy.push(instantaneous_energy(gain, p));
                let rate = (1.0 + instantaneous_snr(gain, p)).log2();
                if rate < p.rate_threshold {
                    summary.outages += 1;
                }
            }
        }
        summary
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidParameter {
            name: "trials",
            value: trials as f64,
            reason: "Monte Carlo estimators need at least 100 trials",
        });
    }
    Ok(())
}

/// Fraction of realizations with `log2(1 + η) < τ`.
pub fn estimate_outage(
    config: PhaseConfig,
    model: &CorrelationModel,
    m: usize,
    params: &SystemParams,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_trials(trials)?;
    Ok(Simulator::from_model(config, model, m)?
        .run(Some(params), trials, seed)?
        .outage())
}

/// Sample mean of the harvested energy.
pub fn estimate_avg_energy(
    config: PhaseConfig,
    model: &CorrelationModel,
    m: usize,
    params: &SystemParams,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_trials(trials)?;
    Ok(Simulator::from_model(config, model, m)?
        .run(Some(params), trials, seed)?
        .avg_energy())
}

/// Sample first and second raw moments of the gain.
pub fn estimate_gain_moments(
    config: PhaseConfig,
    model: &CorrelationModel,
    m: usize,
    trials: u64,
    seed: u64,
) -> Result<(McEstimate, McEstimate)> {
    check_trials(trials)?;
    let summary = Simulator::from_model(config, model, m)?.run(None, trials, seed)?;
    Ok((summary.mu1(), summary.mu2()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn running_stats_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.3).collect();
        let mut whole = RunningStats::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut left = RunningStats::default();
        let mut right = RunningStats::default();
        xs[..313].iter().for_each(|&x| left.push(x));
        xs[313..].iter().for_each(|&x| right.push(x));
        left.merge(&right);
        assert_eq!(left.count(), whole.count());
        assert!((left.mean() - whole.mean()).abs() < 1e-12);
        assert!((left.variance() - whole.variance()).abs() < 1e-9);
    }

    #[test]
    fn zero_rate_threshold_never_in_outage() {
        let p = SystemParams {
            rate_threshold: 0.0,
            ..Default::default()
        };
        let est = estimate_outage(
            PhaseConfig::Random,
            &CorrelationModel::Identity,
            4,
            &p,
            1000,
            3,
        )
        .unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn all_power_to_decoder_harvests_nothing() {
        let p = SystemParams {
            zeta: 1.0,
            ..Default::default()
        };
        let est = estimate_avg_energy(
            PhaseConfig::Equal(0.0),
            &CorrelationModel::Identity,
            4,
            &p,
            1000,
            3,
        )
        .unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn rejects_too_few_trials() {
        let p = SystemParams::default();
        assert!(estimate_outage(
            PhaseConfig::Random,
            &CorrelationModel::Identity,
            2,
            &p,
            99,
            1
        )
        .is_err());
        let sim =
            Simulator::from_model(PhaseConfig::Random, &CorrelationModel::Identity, 2).unwrap();
        assert!(sim.run(None, 0, 1).is_err());
    }

    #[test]
    fn execution_policy_does_not_change_results() {
        let model = CorrelationModel::ExponentialLinear { rho: 0.5 };
        let sim = Simulator::from_model(PhaseConfig::Random, &model, 4).unwrap();
        let p = SystemParams::default();
        let trials = 3 * CHUNK_TRIALS + 17;
        let seq = sim
            .clone()
            .with_execution(Execution::Sequential)
            .run(Some(&p), trials, 9)
            .unwrap();
        let par = sim
            .with_execution(Execution::Parallel)
            .run(Some(&p), trials, 9)
            .unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq.trials(), trials);
    }
}
