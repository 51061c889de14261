//! One end-to-end trial: generate → sample → transmit → recover → align →
//! score.

use serde::{Deserialize, Serialize};

use crate::channel::{fold, transmit, ChannelConfig, NoiseModel};
use crate::diffcalc::Sequence;
use crate::harness::seeds::derive_seed;
use crate::metrics::{psnr, sinad_single_tone, snr_r, MetricsReport};
use crate::recovery::{
    align_2lambda, recover_fixed_order, recover_jitter_n2, RecoveryConfig, RecoveryResult,
};
use crate::signals::{gen_signal, make_jitter_grid, sample, SamplingGrid, SignalKind, SignalSpec};
use crate::{Error, Result};

/// Tolerance of the exact-residual success rule, as a fraction of `λ`.
pub const EXACT_RESIDUAL_TOL: f64 = 1e-9;

/// What counts as a successful trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SuccessRule {
    /// The recovered residual equals the true one: `γ̃ − γ − η` is one
    /// constant in `2λℤ` across the valid window, to `1e-9·λ`.
    ExactResidual,
    /// Post-alignment reconstruction SNR reaches the threshold.
    SnrThreshold { db: f64 },
}

/// Everything a single trial needs. The channel's `oversampling` and
/// `jitter_nu` steer grid construction; `input_snr_db`, when set, overrides
/// the channel noise with Gaussian noise scaled to the requested SNR
/// against the folded signal power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialConfig {
    pub signal: SignalSpec<f64>,
    pub channel: ChannelConfig<f64>,
    pub recovery: RecoveryConfig<f64>,
    #[serde(default)]
    pub input_snr_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub success: bool,
    pub snr_r_db: f64,
    pub psnr_db: f64,
    pub sinad_db: Option<f64>,
    pub enob_bits: Option<f64>,
    pub max_abs_err: f64,
    /// `max |γ̃ − γ − η − 2mλ|` over the valid window.
    pub contract_residual: f64,
    pub global_offset_m: Option<i64>,
    pub kappa_trace: Vec<i64>,
    pub max_round_residual: f64,
    pub samples_total: usize,
    pub valid_start: usize,
    pub valid_end: usize,
    /// Aligned recovered samples on the valid window.
    pub recovered_valid: Vec<f64>,
    /// Populated when the trial aborted instead of finishing; such trials
    /// count as failures, never as crashes.
    pub error: Option<String>,
}

impl TrialReport {
    fn failed(msg: String) -> Self {
        TrialReport {
            success: false,
            snr_r_db: f64::NAN,
            psnr_db: f64::NAN,
            sinad_db: None,
            enob_bits: None,
            max_abs_err: f64::NAN,
            contract_residual: f64::NAN,
            global_offset_m: None,
            kappa_trace: Vec::new(),
            max_round_residual: f64::NAN,
            samples_total: 0,
            valid_start: 0,
            valid_end: 0,
            recovered_valid: Vec::new(),
            error: Some(msg),
        }
    }
}

fn build_grid(
    band_hz: f64,
    duration: f64,
    oversampling: f64,
    nu: f64,
    seed: u64,
) -> Result<SamplingGrid<f64>> {
    let period = 1.0 / (oversampling * 2.0 * band_hz);
    let guard = nu * period;
    let mut count = ((duration - 2.0 * guard) / period).floor() as usize + 1;
    while count > 0 && guard + (count - 1) as f64 * period + guard > duration {
        count -= 1;
    }
    if count < 3 {
        return Err(Error::config(format!(
            "window of {duration} s holds only {count} samples at this rate"
        )));
    }
    Ok(if nu > 0.0 {
        make_jitter_grid(period, count, nu, seed)?.with_start(guard)
    } else {
        SamplingGrid::uniform(0.0, period, count)
    })
}

fn run_trial_inner(cfg: &TrialConfig, rule: &SuccessRule, seed: u64) -> Result<TrialReport> {
    let lambda = cfg.recovery.lambda;
    if (cfg.channel.lambda - lambda).abs() > 1e-12 * lambda.abs().max(1.0) {
        return Err(Error::config(format!(
            "channel lambda {} and recovery lambda {} disagree",
            cfg.channel.lambda, lambda
        )));
    }
    cfg.channel.validate()?;
    cfg.recovery.validate()?;

    let signal = gen_signal(&cfg.signal, derive_seed(seed, &[1]))?;
    let grid = build_grid(
        signal.band_hz(),
        signal.duration(),
        cfg.channel.oversampling,
        cfg.channel.jitter_nu,
        derive_seed(seed, &[2]),
    )?;
    let sampled = sample(&signal, &grid)?;

    let mut channel = cfg.channel.clone();
    channel.seed = derive_seed(seed, &[3]);
    if let Some(snr_db) = cfg.input_snr_db {
        let folded_power = sampled
            .values()
            .iter()
            .map(|&g| fold(g, lambda).powi(2))
            .sum::<f64>()
            / sampled.len() as f64;
        let sigma = folded_power.sqrt() * 10f64.powf(-snr_db / 20.0);
        channel.noise = NoiseModel::Gaussian { sigma };
    }
    let out = transmit(&sampled, &channel)?;

    let y = Sequence::new(out.y.clone());
    let result: RecoveryResult<f64> = if grid.is_uniform() {
        recover_fixed_order(&y, &cfg.recovery)?
    } else {
        recover_jitter_n2(&y, &grid, &cfg.recovery)?.result
    };

    let gamma_vw = result.window_of(sampled.values());
    let eta_vw = result.window_of(&out.eta);
    let est_vw = result.valid_samples();

    let (aligned, m) = align_2lambda(est_vw, gamma_vw, lambda)?;

    // The contract demands one *common* multiple of 2λ across the window,
    // not merely pointwise proximity to the lattice.
    let two_l = 2.0 * lambda;
    let mut residual_diffs: Vec<f64> = est_vw
        .iter()
        .zip(gamma_vw.iter().zip(eta_vw))
        .map(|(&v, (&g, &e))| v - g - e)
        .collect();
    let contract_residual = {
        let mut sorted = residual_diffs.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite residuals"));
        let common = two_l * (sorted[sorted.len() / 2] / two_l).round();
        residual_diffs.iter_mut().for_each(|d| *d = (*d - common).abs());
        residual_diffs.iter().copied().fold(0.0f64, f64::max)
    };

    let snr = snr_r(gamma_vw, &aligned)?;
    let psnr_db = psnr(gamma_vw, &aligned, signal.peak())?;
    let max_abs_err = gamma_vw
        .iter()
        .zip(&aligned)
        .map(|(&a, &b)| (a - b).abs())
        .fold(0.0f64, f64::max);

    let sinad_db = match (&cfg.signal.kind, grid.is_uniform()) {
        (SignalKind::Tone { freq_hz, .. }, true) => {
            sinad_single_tone(&aligned, *freq_hz, 1.0 / grid.period()).ok()
        }
        _ => None,
    };

    let contract_ok = contract_residual <= EXACT_RESIDUAL_TOL * lambda;
    let success = match rule {
        SuccessRule::ExactResidual => contract_ok && max_abs_err < lambda / 2.0,
        SuccessRule::SnrThreshold { db } => snr >= *db,
    };

    let metrics = MetricsReport::new(snr, psnr_db, sinad_db, max_abs_err, success);
    Ok(TrialReport {
        success,
        snr_r_db: metrics.snr_r_db,
        psnr_db: metrics.psnr_db,
        sinad_db: metrics.sinad_db,
        enob_bits: metrics.enob_bits,
        max_abs_err,
        contract_residual,
        global_offset_m: Some(m),
        kappa_trace: result.kappa_trace.clone(),
        max_round_residual: result.max_round_residual,
        samples_total: sampled.len(),
        valid_start: result.valid_window.start,
        valid_end: result.valid_window.end,
        recovered_valid: aligned,
        error: None,
    })
}

/// Run one seeded trial end to end. Errors are recorded on the report (the
/// trial counts as failed) rather than propagated, so sweeps never abort on
/// out-of-contract cells.
pub fn run_trial(cfg: &TrialConfig, rule: &SuccessRule, seed: u64) -> TrialReport {
    match run_trial_inner(cfg, rule, seed) {
        Ok(report) => report,
        Err(e) => TrialReport::failed(e.to_string()),
    }
}
