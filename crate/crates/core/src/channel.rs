//! Correlated Rayleigh channel draws through the IRS, phase configurations
//! and the per-realization gain, SNR and harvested energy.
//!
//! Both hops are colored by the same correlation factor: `h = A u`,
//! `g = A v` with `u, v` i.i.d. `CN(0, I)`.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::correlation::CorrelationFactor;
use crate::error::{Error, Result};

/// Converts decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Link budget and receiver parameters, all linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub transmit_power: f64,
    pub d1: f64,
    pub d2: f64,
    pub pathloss_exponent: f64,
    /// Fraction of received power routed to the decoder, `0 < ζ ≤ 1`.
    pub zeta: f64,
    pub noise_var: f64,
    /// Baseband conversion noise variance.
    pub conv_noise_var: f64,
    /// Rate threshold in bits per channel use.
    pub rate_threshold: f64,
}

impl Default for SystemParams {
    /// 0 dB powers, unit distances, `α = 4`, `ζ = 0.5`, `τ = 1` bpcu.
    fn default() -> Self {
        Self {
            transmit_power: 1.0,
            d1: 1.0,
            d2: 1.0,
            pathloss_exponent: 4.0,
            zeta: 0.5,
            noise_var: 1.0,
            conv_noise_var: 1.0,
            rate_threshold: 1.0,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let invalid = |name, value, reason| {
            Err(Error::InvalidParameter {
                name,
                value,
                reason,
            })
        };
        if !(self.transmit_power > 0.0 && self.transmit_power.is_finite()) {
            return invalid("transmit_power", self.transmit_power, "must be positive");
        }
        if !(self.d1 > 0.0 && self.d1.is_finite()) {
            return invalid("d1", self.d1, "must be positive");
        }
        if !(self.d2 > 0.0 && self.d2.is_finite()) {
            return invalid("d2", self.d2, "must be positive");
        }
        if !(self.pathloss_exponent > 0.0 && self.pathloss_exponent.is_finite()) {
            return invalid(
                "pathloss_exponent",
                self.pathloss_exponent,
                "must be positive",
            );
        }
        if !(self.zeta > 0.0 && self.zeta <= 1.0) {
            return invalid("zeta", self.zeta, "must lie in (0, 1]");
        }
        if !(self.noise_var >= 0.0 && self.noise_var.is_finite()) {
            return invalid("noise_var", self.noise_var, "must be nonnegative");
        }
        if !(self.conv_noise_var >= 0.0 && self.conv_noise_var.is_finite()) {
            return invalid("conv_noise_var", self.conv_noise_var, "must be nonnegative");
        }
        if !(self.effective_noise() > 0.0) {
            return invalid(
                "conv_noise_var",
                self.conv_noise_var,
                "zeta * noise_var + conv_noise_var must be positive",
            );
        }
        if !(self.rate_threshold >= 0.0 && self.rate_threshold.is_finite()) {
            return invalid("rate_threshold", self.rate_threshold, "must be nonnegative");
        }
        Ok(())
    }

    /// `P_t (d1 d2)^-α`.
    pub fn path_gain(&self) -> f64 {
        self.transmit_power * (self.d1 * self.d2).powf(-self.pathloss_exponent)
    }

    /// `ζσ² + σ_c²`.
    pub fn effective_noise(&self) -> f64 {
        self.zeta * self.noise_var + self.conv_noise_var
    }
}

/// Phase configuration without parameters; used as a label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhaseMode {
    Random,
    Equal,
    Optimal,
}

impl PhaseMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseMode::Random => "random",
            PhaseMode::Equal => "equal",
            PhaseMode::Optimal => "optimal",
        }
    }
}

impl fmt::Display for PhaseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PhaseMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "random" => Ok(PhaseMode::Random),
            "equal" => Ok(PhaseMode::Equal),
            "optimal" => Ok(PhaseMode::Optimal),
            other => Err(format!(
                "unknown phase mode `{other}` (expected random, equal or optimal)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseConfig {
    /// i.i.d. uniform phases on `[0, 2π)`, redrawn every realization.
    Random,
    /// Common phase for every element. The gain does not depend on its value
    /// in this channel model; other array geometries would need it steered.
    Equal(f64),
    /// Cancels the phase of every cascaded coefficient `h_i g_i`.
    Optimal,
}

impl PhaseConfig {
    pub fn mode(self) -> PhaseMode {
        match self {
            PhaseConfig::Random => PhaseMode::Random,
            PhaseConfig::Equal(_) => PhaseMode::Equal,
            PhaseConfig::Optimal => PhaseMode::Optimal,
        }
    }
}

impl From<PhaseMode> for PhaseConfig {
    fn from(mode: PhaseMode) -> Self {
        match mode {
            PhaseMode::Random => PhaseConfig::Random,
            PhaseMode::Equal => PhaseConfig::Equal(0.0),
            PhaseMode::Optimal => PhaseConfig::Optimal,
        }
    }
}

/// One realization of both hops and the applied phases.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    pub h: Vec<Complex64>,
    pub g: Vec<Complex64>,
    pub phases: Vec<f64>,
}

/// Per-trial random streams: trial `i` of master seed `s` always sees the
/// ChaCha8 stream `i` keyed by `s`, independent of scheduling.
#[derive(Debug, Clone)]
pub struct TrialStreams {
    base: ChaCha8Rng,
}

impl TrialStreams {
    pub fn new(seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn stream(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(trial);
        rng
    }
}

/// Standard circularly symmetric complex Gaussian via Box–Muller:
/// `sqrt(-ln U1) · e^{j 2π U2}` has unit power and uniform phase.
#[inline]
pub fn standard_complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    Complex64::from_polar((-u1.ln()).sqrt(), TAU * u2)
}

/// Scratch buffers for repeated draws of `(h, g)` at a fixed dimension.
#[derive(Debug, Clone)]
pub struct ChannelWorkspace {
    white: Vec<Complex64>,
    pub h: Vec<Complex64>,
    pub g: Vec<Complex64>,
}

impl ChannelWorkspace {
    pub fn new(dim: usize) -> Self {
        Self {
            white: vec![Complex64::new(0.0, 0.0); dim],
            h: vec![Complex64::new(0.0, 0.0); dim],
            g: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    /// Draws `u` then `v` (in that order) and colors both.
    pub fn draw<R: Rng + ?Sized>(&mut self, factor: &CorrelationFactor, rng: &mut R) {
        for z in self.white.iter_mut() {
            *z = standard_complex_normal(rng);
        }
        factor.apply(&self.white, &mut self.h);
        for z in self.white.iter_mut() {
            *z = standard_complex_normal(rng);
        }
        factor.apply(&self.white, &mut self.g);
    }

    /// Gain of the current draw under `config`; random phases are drawn from `rng`.
    ///
    /// Equal phases use `|Σ h_i g_i|²` and optimal phases `(Σ |h_i||g_i|)²`,
    /// which is what [`channel_gain`] returns for the phases
    /// [`phase_shifts`] would produce.
    pub fn gain<R: Rng + ?Sized>(&self, config: PhaseConfig, rng: &mut R) -> f64 {
        match config {
            PhaseConfig::Random => self
                .h
                .iter()
                .zip(&self.g)
                .map(|(h, g)| h * g * Complex64::cis(TAU * rng.gen::<f64>()))
                .sum::<Complex64>()
                .norm_sqr(),
            PhaseConfig::Equal(_) => self
                .h
                .iter()
                .zip(&self.g)
                .map(|(h, g)| h * g)
                .sum::<Complex64>()
                .norm_sqr(),
            PhaseConfig::Optimal => {
                let s: f64 = self
                    .h
                    .iter()
                    .zip(&self.g)
                    .map(|(h, g)| h.norm() * g.norm())
                    .sum();
                s * s
            }
        }
    }
}

/// Draws `(h, g)` colored by `factor`.
pub fn sample_channels<R: Rng + ?Sized>(
    factor: &CorrelationFactor,
    rng: &mut R,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut ws = ChannelWorkspace::new(factor.dim());
    ws.draw(factor, rng);
    (ws.h, ws.g)
}

/// Phase vector for `config`, each entry in `[0, 2π)`.
pub fn phase_shifts<R: Rng + ?Sized>(
    config: PhaseConfig,
    h: &[Complex64],
    g: &[Complex64],
    rng: &mut R,
) -> Vec<f64> {
    assert_eq!(h.len(), g.len(), "h and g must have the same length");
    match config {
        PhaseConfig::Random => (0..h.len()).map(|_| TAU * rng.gen::<f64>()).collect(),
        PhaseConfig::Equal(phi) => vec![wrap_phase(phi); h.len()],
        PhaseConfig::Optimal => h
            .iter()
            .zip(g)
            .map(|(h, g)| wrap_phase(-(h.arg() + g.arg())))
            .collect(),
    }
}

fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// `H = |Σ h_i g_i e^{jφ_i}|²`.
pub fn channel_gain(sample: &ChannelSample) -> f64 {
    assert!(sample.h.len() == sample.g.len() && sample.g.len() == sample.phases.len());
    sample
        .h
        .iter()
        .zip(&sample.g)
        .zip(&sample.phases)
        .map(|((h, g), &phi)| h * g * Complex64::cis(phi))
        .sum::<Complex64>()
        .norm_sqr()
}

/// Instantaneous SNR at the decoder for gain `h`.
pub fn instantaneous_snr(gain: f64, params: &SystemParams) -> f64 {
    params.zeta * params.path_gain() * gain / params.effective_noise()
}

/// Energy harvested from gain `h` by the quadratic rectifier model.
pub fn instantaneous_energy(gain: f64, params: &SystemParams) -> f64 {
    let received = (1.0 - params.zeta) * params.path_gain() * gain;
    received + received * received
}
