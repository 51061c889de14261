//! Monte-Carlo parameter sweeps with theory overlays.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{of_jitter, of_rsod, of_rsod_sinc};
use crate::channel::{ChannelConfig, NoiseModel};
use crate::harness::seeds::derive_seed;
use crate::harness::trial::{run_trial, SuccessRule, TrialConfig};
use crate::recovery::RecoveryConfig;
use crate::signals::{BernsteinVariant, SignalSpec};
use crate::{Error, Result};

/// Sweepable parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisParam {
    /// Amplitude scaling `ρ`; updates both the signal peak (`ρλ`) and the
    /// recovery amplitude prior.
    Rho,
    Of,
    RhoEta,
    Nu,
    Bits,
    InputSnrDb,
}

impl AxisParam {
    pub fn name(self) -> &'static str {
        match self {
            AxisParam::Rho => "rho",
            AxisParam::Of => "of",
            AxisParam::RhoEta => "rho_eta",
            AxisParam::Nu => "nu",
            AxisParam::Bits => "bits",
            AxisParam::InputSnrDb => "input_snr_db",
        }
    }
}

/// One sweep axis: either an inclusive `start..=stop` range with a step, or
/// an explicit value list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: AxisParam,
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub stop: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
}

impl Axis {
    pub fn range(param: AxisParam, start: f64, stop: f64, step: f64) -> Self {
        Axis { param, start: Some(start), stop: Some(stop), step: Some(step), values: None }
    }

    pub fn list(param: AxisParam, values: Vec<f64>) -> Self {
        Axis { param, start: None, stop: None, step: None, values: Some(values) }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        match (&self.values, self.start, self.stop, self.step) {
            (Some(v), None, None, None) => {
                if v.is_empty() {
                    return Err(Error::config("axis value list is empty"));
                }
                Ok(v.clone())
            }
            (None, Some(a), Some(b), Some(s)) => {
                if !(s > 0.0) || b < a {
                    return Err(Error::config("axis range needs stop >= start and step > 0"));
                }
                let mut out = Vec::new();
                let mut k = 0usize;
                loop {
                    let v = a + k as f64 * s;
                    if v > b + 1e-9 * s {
                        break;
                    }
                    out.push(v);
                    k += 1;
                }
                Ok(out)
            }
            _ => Err(Error::config(
                "axis must give either values or all of start/stop/step",
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis1: Axis,
    pub axis2: Axis,
    pub trials_per_cell: usize,
    pub signal: SignalSpec<f64>,
    pub channel: ChannelConfig<f64>,
    pub recovery: RecoveryConfig<f64>,
    pub success_rule: SuccessRule,
    pub base_seed: u64,
}

/// Aggregates for one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub axis1: f64,
    pub axis2: f64,
    pub mean_snr_r_db: f64,
    pub success_rate: f64,
    pub theory_of_eq19: f64,
    pub theory_of_eq20: f64,
    pub theory_of_eq24: f64,
    pub trials: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis1_name: String,
    pub axis2_name: String,
    pub rows: Vec<CellResult>,
}

impl SweepResult {
    /// Long-format CSV, one row per cell, in deterministic cell order.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "{},{},mean_snr_r_db,success_rate,theory_of_eq19,theory_of_eq20,theory_of_eq24,trials,failures\n",
            self.axis1_name, self.axis2_name
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.axis1,
                r.axis2,
                r.mean_snr_r_db,
                r.success_rate,
                r.theory_of_eq19,
                r.theory_of_eq20,
                r.theory_of_eq24,
                r.trials,
                r.failures
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep result serializes")
    }
}

fn apply_axis(cfg: &mut TrialConfig, param: AxisParam, value: f64) -> Result<()> {
    match param {
        AxisParam::Rho => {
            if !(value > 0.0) {
                return Err(Error::config("rho axis values must be positive"));
            }
            let peak = value * cfg.channel.lambda;
            cfg.signal.peak_scale = Some(peak);
            cfg.recovery.beta_g = peak;
        }
        AxisParam::Of => cfg.channel.oversampling = value,
        AxisParam::RhoEta => cfg.channel.noise = NoiseModel::UniformBounded { rho_eta: value },
        AxisParam::Nu => cfg.channel.jitter_nu = value,
        AxisParam::Bits => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(Error::config("bits axis values must be positive integers"));
            }
            cfg.channel.bits = Some(value as u32);
        }
        AxisParam::InputSnrDb => cfg.input_snr_db = Some(value),
    }
    Ok(())
}

/// Theory overlays for a cell, from its effective `(ρ, ρ_η, ν)`. Cells whose
/// parameters fall outside a bound's feasibility region (or are not
/// expressible, e.g. Gaussian noise has no sup-norm) carry NaN.
fn theory_columns(cfg: &TrialConfig) -> (f64, f64, f64) {
    let rho = match cfg.signal.peak_scale {
        Some(p) => p / cfg.channel.lambda,
        None => f64::NAN,
    };
    let rho_eta = if cfg.input_snr_db.is_some() {
        f64::NAN
    } else {
        match cfg.channel.noise {
            NoiseModel::None => 0.0,
            NoiseModel::UniformBounded { rho_eta } => rho_eta,
            NoiseModel::Gaussian { .. } => f64::NAN,
        }
    };
    let nu = cfg.channel.jitter_nu;
    if !rho.is_finite() || !rho_eta.is_finite() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let eq19 = of_rsod(rho, rho_eta).unwrap_or(f64::NAN);
    let eq20 = of_rsod_sinc(rho, rho_eta).unwrap_or(f64::NAN);
    let eq24 = of_jitter(rho, rho_eta, nu, BernsteinVariant::Generic).unwrap_or(f64::NAN);
    (eq19, eq20, eq24)
}

fn run_cell(spec: &SweepSpec, cell_index: usize, a1: f64, a2: f64) -> Result<CellResult> {
    let mut cfg = TrialConfig {
        signal: spec.signal.clone(),
        channel: spec.channel.clone(),
        recovery: spec.recovery.clone(),
        input_snr_db: None,
    };
    apply_axis(&mut cfg, spec.axis1.param, a1)?;
    apply_axis(&mut cfg, spec.axis2.param, a2)?;
    let (eq19, eq20, eq24) = theory_columns(&cfg);

    let mut successes = 0usize;
    let mut failures = 0usize;
    let mut snr_sum = 0.0f64;
    let mut snr_count = 0usize;
    for trial in 0..spec.trials_per_cell {
        let seed = derive_seed(spec.base_seed, &[cell_index as u64, trial as u64]);
        let report = run_trial(&cfg, &spec.success_rule, seed);
        if report.error.is_some() {
            failures += 1;
        } else {
            snr_sum += report.snr_r_db;
            snr_count += 1;
        }
        if report.success {
            successes += 1;
        }
    }
    let mean_snr = if snr_count > 0 { snr_sum / snr_count as f64 } else { f64::NAN };
    Ok(CellResult {
        axis1: a1,
        axis2: a2,
        mean_snr_r_db: mean_snr,
        success_rate: successes as f64 / spec.trials_per_cell as f64,
        theory_of_eq19: eq19,
        theory_of_eq20: eq20,
        theory_of_eq24: eq24,
        trials: spec.trials_per_cell,
        failures,
    })
}

/// Run the sweep. `parallelism` bounds the worker count (1 runs serially);
/// cell order, per-trial seeds and float formatting are all independent of
/// it, so outputs are byte-identical across settings.
pub fn run_sweep(spec: &SweepSpec, parallelism: usize) -> Result<SweepResult> {
    if spec.trials_per_cell == 0 {
        return Err(Error::config("trials_per_cell must be at least 1"));
    }
    spec.channel.validate()?;
    spec.recovery.validate()?;
    let p1 = spec.axis1.points()?;
    let p2 = spec.axis2.points()?;
    let cells: Vec<(usize, f64, f64)> = p1
        .iter()
        .flat_map(|&a| p2.iter().map(move |&b| (a, b)))
        .enumerate()
        .map(|(i, (a, b))| (i, a, b))
        .collect();

    let rows: Vec<Result<CellResult>> = if parallelism <= 1 {
        cells.iter().map(|&(i, a, b)| run_cell(spec, i, a, b)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| Error::config(format!("worker pool: {e}")))?;
        pool.install(|| {
            cells
                .par_iter()
                .map(|&(i, a, b)| run_cell(spec, i, a, b))
                .collect()
        })
    };
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axis1_name: spec.axis1.param.name().to_string(),
        axis2_name: spec.axis2.param.name().to_string(),
        rows,
    })
}
