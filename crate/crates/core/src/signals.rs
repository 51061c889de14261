//! Bandlimited test-signal synthesis and sample-grid construction.
//!
//! Signals come in three flavors: mixtures of shifted sinc kernels (the
//! standard randomized test family), single tones, and tabulated traces.
//! Evaluators are immutable after construction and safe to share across
//! trial workers.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

/// Normalized sinc: `sin(πx)/(πx)`, `sinc(0) = 1`, unit-spaced zero
/// crossings.
#[inline]
pub fn sinc<F: Scalar>(x: F) -> F {
    if x.abs() < F::cast(1e-15) {
        F::one()
    } else {
        let px = F::pi() * x;
        px.sin() / px
    }
}

/// Declarative signal description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalKind<F> {
    /// `g(t) = Σ_i c_i · sinc(2B(t − τ_i))`. When `coeffs` is omitted, one
    /// coefficient per shift is drawn uniformly from `[-1, 1]` using the
    /// seed passed to [`gen_signal`].
    SincMixture {
        #[serde(default)]
        coeffs: Option<Vec<F>>,
        shifts: Vec<F>,
        band_hz: F,
    },
    /// `g(t) = A · cos(2πft + φ)`.
    Tone { freq_hz: F, amplitude: F, phase: F },
    /// Sinc interpolation of a uniformly sampled trace file (`input_v`
    /// column required). `band_hz` is the caller's statement of the trace
    /// bandwidth.
    Tabulated { path: String, band_hz: F },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec<F> {
    pub kind: SignalKind<F>,
    pub duration_s: F,
    /// Target peak `‖g‖∞` in volts (i.e. `ρ·λ`); the raw signal is rescaled
    /// so the realized peak matches to within 1e-9 relative. `None` keeps
    /// the natural amplitude.
    #[serde(default)]
    pub peak_scale: Option<F>,
}

impl<F: Scalar> SignalSpec<F> {
    pub fn sinc_mixture(coeffs: Option<Vec<F>>, shifts: Vec<F>, band_hz: F, duration_s: F) -> Self {
        Self {
            kind: SignalKind::SincMixture { coeffs, shifts, band_hz },
            duration_s,
            peak_scale: None,
        }
    }

    pub fn tone(freq_hz: F, amplitude: F, phase: F, duration_s: F) -> Self {
        Self { kind: SignalKind::Tone { freq_hz, amplitude, phase }, duration_s, peak_scale: None }
    }

    pub fn with_peak(mut self, peak: F) -> Self {
        self.peak_scale = Some(peak);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s > F::zero()) {
            return Err(Error::config("signal duration must be positive"));
        }
        if let Some(p) = self.peak_scale {
            if !(p > F::zero()) {
                return Err(Error::config("peak_scale must be positive"));
            }
        }
        match &self.kind {
            SignalKind::SincMixture { coeffs, shifts, band_hz } => {
                if shifts.is_empty() {
                    return Err(Error::config("sinc mixture needs at least one term"));
                }
                if let Some(c) = coeffs {
                    if c.len() != shifts.len() {
                        return Err(Error::config(format!(
                            "sinc mixture has {} coefficients for {} shifts",
                            c.len(),
                            shifts.len()
                        )));
                    }
                    if c.iter().all(|v| *v == F::zero()) {
                        return Err(Error::config("sinc mixture coefficients are all zero"));
                    }
                }
                if !(*band_hz > F::zero()) {
                    return Err(Error::config("bandwidth must be positive"));
                }
            }
            SignalKind::Tone { freq_hz, amplitude, .. } => {
                if !(*freq_hz > F::zero()) {
                    return Err(Error::config("tone frequency must be positive"));
                }
                if !(*amplitude > F::zero()) {
                    return Err(Error::config("tone amplitude must be positive"));
                }
            }
            SignalKind::Tabulated { band_hz, .. } => {
                if !(*band_hz > F::zero()) {
                    return Err(Error::config("bandwidth must be positive"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum SignalForm<F> {
    SincMixture { coeffs: Vec<F>, shifts: Vec<F> },
    Tone { freq_hz: F, amplitude: F, phase: F },
    Tabulated { values: Vec<F>, t0: F, period: F },
}

/// A concrete bandlimited evaluator with a calibrated peak.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal<F> {
    form: SignalForm<F>,
    band_hz: F,
    duration: F,
    scale: F,
    peak: F,
}

impl<F: Scalar> Signal<F> {
    pub fn tone(freq_hz: F, amplitude: F, phase: F, duration_s: F) -> Self {
        Self {
            form: SignalForm::Tone { freq_hz, amplitude, phase },
            band_hz: freq_hz,
            duration: duration_s,
            scale: F::one(),
            peak: amplitude.abs(),
        }
    }

    fn raw_eval(&self, t: F) -> F {
        match &self.form {
            SignalForm::SincMixture { coeffs, shifts } => {
                let two_b = self.band_hz + self.band_hz;
                coeffs
                    .iter()
                    .zip(shifts)
                    .map(|(&c, &tau)| c * sinc(two_b * (t - tau)))
                    .sum()
            }
            SignalForm::Tone { freq_hz, amplitude, phase } => {
                let w = F::cast(2.0) * F::pi() * *freq_hz;
                *amplitude * (w * t + *phase).cos()
            }
            SignalForm::Tabulated { values, t0, period } => values
                .iter()
                .enumerate()
                .map(|(k, &v)| v * sinc((t - *t0 - F::cast(k as f64) * *period) / *period))
                .sum(),
        }
    }

    /// Evaluate `g(t)`. Defined for any `t`; sampling against a grid range
    /// checks separately.
    pub fn eval(&self, t: F) -> F {
        self.scale * self.raw_eval(t)
    }

    /// Realized `‖g‖∞` over the signal's support window.
    pub fn peak(&self) -> F {
        self.peak
    }

    pub fn band_hz(&self) -> F {
        self.band_hz
    }

    /// Angular bandwidth `Ω = 2πB`.
    pub fn omega(&self) -> F {
        F::cast(2.0) * F::pi() * self.band_hz
    }

    pub fn duration(&self) -> F {
        self.duration
    }
}

/// Golden-section refinement of a maximum bracketed in `[a, b]`.
fn golden_max<F: Scalar>(f: impl Fn(F) -> F, mut a: F, mut b: F) -> F {
    let r = F::cast(0.618_033_988_749_894_9);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..90 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        fc
    } else {
        fd
    }
}

const PEAK_GRID_OVERSAMPLING: f64 = 256.0;
const PEAK_GRID_MAX_POINTS: f64 = 8e6;

/// Dense grid search at 256x the Nyquist rate followed by golden-section
/// refinement around the best cell. Analytic peaks of sinc mixtures are not
/// available, so this is how `‖g‖∞` is calibrated.
fn search_peak<F: Scalar>(signal: &Signal<F>) -> Result<F> {
    let dur = signal.duration.to_f64().unwrap();
    let nyq = 2.0 * signal.band_hz.to_f64().unwrap();
    let step = 1.0 / (PEAK_GRID_OVERSAMPLING * nyq);
    let n_pts = (dur / step).ceil() + 1.0;
    if !(n_pts.is_finite() && n_pts <= PEAK_GRID_MAX_POINTS) {
        return Err(Error::config(format!(
            "peak search grid would need {n_pts} points; shorten the duration or bandwidth"
        )));
    }
    let n = n_pts as usize;
    let g = |t: F| signal.raw_eval(t).abs();
    let mut best_t = F::zero();
    let mut best = g(F::zero());
    for i in 1..=n {
        let t = F::cast((i as f64 * step).min(dur));
        let v = g(t);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    let lo = (best_t - F::cast(step)).max(F::zero());
    let hi = (best_t + F::cast(step)).min(F::cast(dur));
    let refined = golden_max(g, lo, hi);
    Ok(if refined > best { refined } else { best })
}

/// Build a deterministic evaluator from a spec. Identical `(spec, seed)`
/// pairs produce bit-identical evaluators; the seed is consumed only by
/// randomized coefficient draws (always generated as `f64` and narrowed, so
/// streams agree across scalar types).
pub fn gen_signal<F: Scalar>(spec: &SignalSpec<F>, seed: u64) -> Result<Signal<F>> {
    spec.validate()?;
    let mut signal = match &spec.kind {
        SignalKind::SincMixture { coeffs, shifts, band_hz } => {
            let coeffs = match coeffs {
                Some(c) => c.clone(),
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    (0..shifts.len())
                        .map(|_| F::cast(rng.random_range(-1.0..1.0)))
                        .collect()
                }
            };
            Signal {
                form: SignalForm::SincMixture { coeffs, shifts: shifts.clone() },
                band_hz: *band_hz,
                duration: spec.duration_s,
                scale: F::one(),
                peak: F::zero(),
            }
        }
        SignalKind::Tone { freq_hz, amplitude, phase } => {
            Signal::tone(*freq_hz, *amplitude, *phase, spec.duration_s)
        }
        SignalKind::Tabulated { path, band_hz } => {
            tabulated_signal(Path::new(path), *band_hz, spec.duration_s)?
        }
    };

    if matches!(signal.form, SignalForm::SincMixture { .. }) {
        signal.peak = search_peak(&signal)?;
        if !(signal.peak > F::zero()) {
            return Err(Error::config("signal is identically zero on its window"));
        }
    }
    if let Some(target) = spec.peak_scale {
        signal.scale = target / signal.peak;
        signal.peak = target;
    }
    Ok(signal)
}

fn tabulated_signal<F: Scalar>(path: &Path, band_hz: F, duration_s: F) -> Result<Signal<F>> {
    let data = crate::trace::read_trace(path)?;
    let input = data.input.as_ref().ok_or_else(|| {
        Error::config(format!("tabulated signal {} lacks an input_v column", path.display()))
    })?;
    if data.times.len() < 2 {
        return Err(Error::config("tabulated signal needs at least two samples"));
    }
    let t0 = data.times[0];
    let period = (data.times[data.times.len() - 1] - t0) / (data.times.len() - 1) as f64;
    if !(period > 0.0) {
        return Err(Error::config("tabulated signal times must increase"));
    }
    for (k, &t) in data.times.iter().enumerate() {
        let expected = t0 + k as f64 * period;
        if (t - expected).abs() > 1e-6 * period {
            return Err(Error::Trace {
                line: k + 2,
                msg: "tabulated signals require a uniform time grid".into(),
            });
        }
    }
    let span = period * (data.times.len() - 1) as f64;
    if duration_s.to_f64().unwrap() > span * (1.0 + 1e-9) {
        return Err(Error::config(format!(
            "requested duration {duration_s} exceeds trace span {span}"
        )));
    }
    // Evaluation is in window-relative time: t = 0 maps onto the first row.
    let values: Vec<F> = input.iter().map(|&v| F::cast(v)).collect();
    let peak = values.iter().fold(F::zero(), |m, &v| if v.abs() > m { v.abs() } else { m });
    Ok(Signal {
        form: SignalForm::Tabulated { values, t0: F::zero(), period: F::cast(period) },
        band_hz,
        duration: duration_s,
        scale: F::one(),
        peak,
    })
}

/// Grid flavor: uniform, or independently jittered instants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind<F> {
    Uniform,
    Jittered { nu: F },
}

/// Sampling instants `t_k = t0 + kT + μ_k`; uniform grids keep no offset
/// storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingGrid<F> {
    t0: F,
    period: F,
    count: usize,
    offsets: Vec<F>,
    kind: GridKind<F>,
}

impl<F: Scalar> SamplingGrid<F> {
    pub fn uniform(t0: F, period: F, count: usize) -> Self {
        assert!(period > F::zero(), "grid period must be positive");
        Self { t0, period, count, offsets: Vec::new(), kind: GridKind::Uniform }
    }

    /// Build a jittered grid from explicit offsets; every `|μ_k|` must stay
    /// below `ν·T` and `ν` below 1/2 (which keeps instants increasing).
    pub fn from_offsets(t0: F, period: F, offsets: Vec<F>, nu: F) -> Result<Self> {
        if !(period > F::zero()) {
            return Err(Error::config("grid period must be positive"));
        }
        if !(nu > F::zero() && nu < F::cast(0.5)) {
            return Err(Error::config("jitter level must lie in (0, 1/2)"));
        }
        let bound = nu * period;
        if let Some(bad) = offsets.iter().position(|o| o.abs() >= bound) {
            return Err(Error::config(format!(
                "offset {} at index {bad} is not below ν·T = {bound}",
                offsets[bad]
            )));
        }
        let count = offsets.len();
        Ok(Self { t0, period, count, offsets, kind: GridKind::Jittered { nu } })
    }

    pub fn with_start(mut self, t0: F) -> Self {
        self.t0 = t0;
        self
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn period(&self) -> F {
        self.period
    }

    pub fn start(&self) -> F {
        self.t0
    }

    pub fn kind(&self) -> GridKind<F> {
        self.kind
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, GridKind::Uniform)
    }

    pub fn offsets(&self) -> &[F] {
        &self.offsets
    }

    pub fn instant(&self, k: usize) -> F {
        debug_assert!(k < self.count);
        let base = self.t0 + F::cast(k as f64) * self.period;
        match self.kind {
            GridKind::Uniform => base,
            GridKind::Jittered { .. } => base + self.offsets[k],
        }
    }

    pub fn instants(&self) -> Vec<F> {
        (0..self.count).map(|k| self.instant(k)).collect()
    }
}

/// Draw a jittered grid with offsets i.i.d. uniform on `(−νT, νT)`,
/// reproducible from the seed. `ν = 0` falls back to a uniform grid.
pub fn make_jitter_grid<F: Scalar>(
    period: F,
    count: usize,
    nu: F,
    seed: u64,
) -> Result<SamplingGrid<F>> {
    if !(period > F::zero()) {
        return Err(Error::config("grid period must be positive"));
    }
    if nu < F::zero() || nu >= F::cast(0.5) {
        return Err(Error::config(
            "jitter level must lie in [0, 1/2); ordering is not guaranteed beyond",
        ));
    }
    if nu == F::zero() {
        return Ok(SamplingGrid::uniform(F::zero(), period, count));
    }
    let bound = nu.to_f64().unwrap() * period.to_f64().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offsets: Vec<F> =
        (0..count).map(|_| F::cast(rng.random_range(-bound..bound))).collect();
    SamplingGrid::from_offsets(F::zero(), period, offsets, nu)
}

/// Samples paired with their grid and whatever channel metadata is known.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal<F> {
    values: Vec<F>,
    grid: SamplingGrid<F>,
    band_hz: Option<F>,
    lambda: Option<F>,
}

impl<F: Scalar> SampledSignal<F> {
    pub fn new(
        values: Vec<F>,
        grid: SamplingGrid<F>,
        band_hz: Option<F>,
        lambda: Option<F>,
    ) -> Self {
        assert_eq!(values.len(), grid.len(), "values and grid length differ");
        Self { values, grid, band_hz, lambda }
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn grid(&self) -> &SamplingGrid<F> {
        &self.grid
    }

    pub fn band_hz(&self) -> Option<F> {
        self.band_hz
    }

    pub fn lambda(&self) -> Option<F> {
        self.lambda
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Point-sample an evaluator on a grid; every instant must lie inside the
/// signal window (no channel effects are applied here).
pub fn sample<F: Scalar>(signal: &Signal<F>, grid: &SamplingGrid<F>) -> Result<SampledSignal<F>> {
    let eps = F::cast(1e-9) * signal.duration.max(F::one());
    let mut values = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let t = grid.instant(k);
        if t < -eps || t > signal.duration + eps {
            return Err(Error::config(format!(
                "sampling instant {t} outside signal window [0, {}]",
                signal.duration
            )));
        }
        values.push(signal.eval(t));
    }
    Ok(SampledSignal {
        values,
        grid: grid.clone(),
        band_hz: Some(signal.band_hz),
        lambda: None,
    })
}

/// Which derivative bound to use for a bandlimited signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BernsteinVariant {
    /// `‖g^(N)‖∞ ≤ Ω^N ‖g‖∞` for any Ω-bandlimited signal.
    Generic,
    /// `‖g^(N)‖∞ ≤ Ω^N/(N+1) ‖g‖∞`, the sharper constant for sinc-type
    /// spectra.
    Sinc,
}

/// Upper bound on `‖g^(N)‖∞` from the signal's bandwidth and peak.
pub fn bernstein_bound<F: Scalar>(
    signal: &Signal<F>,
    order: u32,
    variant: BernsteinVariant,
) -> Result<F> {
    if order == 0 {
        return Err(Error::config("derivative order must be at least 1"));
    }
    let base = signal.omega().powi(order as i32) * signal.peak();
    Ok(match variant {
        BernsteinVariant::Generic => base,
        BernsteinVariant::Sinc => base / F::cast((order + 1) as f64),
    })
}
