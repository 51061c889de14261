//! Reconstruction and converter quality metrics.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

/// Serialized stand-in for an infinite (zero-error) dB figure so CSV and
/// JSON stay numeric.
pub const SENTINEL_DB: f64 = 400.0;

fn check_windows<F: Scalar>(reference: &[F], recovered: &[F]) -> Result<()> {
    if reference.len() != recovered.len() {
        return Err(Error::config(format!(
            "metric windows differ in length: {} vs {}",
            reference.len(),
            recovered.len()
        )));
    }
    if reference.is_empty() {
        return Err(Error::config("metric windows are empty"));
    }
    Ok(())
}

/// Reconstruction SNR `10·log10(Σ|γ|² / Σ|γ−γ̃|²)` in dB. Zero error energy
/// returns `+∞`; callers serializing the value cap it at [`SENTINEL_DB`].
pub fn snr_r<F: Scalar>(reference: &[F], recovered: &[F]) -> Result<F> {
    check_windows(reference, recovered)?;
    let sig: F = reference.iter().map(|&v| v * v).sum();
    if !(sig > F::zero()) {
        return Err(Error::config("reference window has zero energy"));
    }
    let err: F = reference
        .iter()
        .zip(recovered)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    if err == F::zero() {
        return Ok(F::infinity());
    }
    Ok(F::cast(10.0) * (sig / err).log10())
}

/// Peak SNR `10·log10(peak² / ((1/L)Σ(γ−γ̃)²))` in dB.
pub fn psnr<F: Scalar>(reference: &[F], recovered: &[F], peak: F) -> Result<F> {
    check_windows(reference, recovered)?;
    if !(peak > F::zero()) {
        return Err(Error::config("peak must be positive"));
    }
    let mse: F = reference
        .iter()
        .zip(recovered)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum::<F>()
        / F::cast(reference.len() as f64);
    if mse == F::zero() {
        return Ok(F::infinity());
    }
    Ok(F::cast(10.0) * (peak * peak / mse).log10())
}

/// Solve a small symmetric 3x3 system by Gaussian elimination with partial
/// pivoting.
fn solve3<F: Scalar>(mut a: [[F; 3]; 3], mut b: [F; 3]) -> Result<[F; 3]> {
    for col in 0..3 {
        let mut piv = col;
        for row in col + 1..3 {
            if a[row][col].abs() > a[piv][col].abs() {
                piv = row;
            }
        }
        if a[piv][col].abs() < F::cast(1e-300) {
            return Err(Error::RankDeficient("tone-fit normal equations".into()));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] = a[row][k] - f * a[col][k];
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = [F::zero(); 3];
    for col in (0..3).rev() {
        let mut acc = b[col];
        for k in col + 1..3 {
            acc = acc - a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Ok(x)
}

/// SINAD of a known single tone, estimated by removing the least-squares
/// fit of `{cos 2πf₀t, sin 2πf₀t, DC}` from the samples:
/// `10·log10(P_tone / P_residual)`. A time-domain fit at the known
/// frequency is leakage-free on short windows, unlike a windowed FFT.
/// Needs `f0 < fs/2` and at least ten tone periods of data.
pub fn sinad_single_tone<F: Scalar>(samples: &[F], f0: F, fs: F) -> Result<F> {
    if !(f0 > F::zero() && fs > F::zero()) {
        return Err(Error::config("tone and sample rates must be positive"));
    }
    if f0 >= fs / F::cast(2.0) {
        return Err(Error::config("tone frequency must be below Nyquist"));
    }
    let periods = F::cast(samples.len() as f64) / fs * f0;
    if periods < F::cast(10.0) {
        return Err(Error::config(format!(
            "window holds only {periods} tone periods; need at least 10"
        )));
    }
    let w = F::cast(2.0) * F::pi() * f0 / fs;
    let mut ata = [[F::zero(); 3]; 3];
    let mut atb = [F::zero(); 3];
    for (k, &x) in samples.iter().enumerate() {
        let ph = w * F::cast(k as f64);
        let row = [ph.cos(), ph.sin(), F::one()];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] = ata[i][j] + row[i] * row[j];
            }
            atb[i] = atb[i] + row[i] * x;
        }
    }
    let c = solve3(ata, atb)?;
    let tone_power = (c[0] * c[0] + c[1] * c[1]) / F::cast(2.0);
    if !(tone_power > F::zero()) {
        return Err(Error::config("no tone component found at f0"));
    }
    let mut residual = F::zero();
    for (k, &x) in samples.iter().enumerate() {
        let ph = w * F::cast(k as f64);
        let fit = c[0] * ph.cos() + c[1] * ph.sin() + c[2];
        residual = residual + (x - fit) * (x - fit);
    }
    let residual_power = residual / F::cast(samples.len() as f64);
    if residual_power == F::zero() {
        return Ok(F::infinity());
    }
    Ok(F::cast(10.0) * (tone_power / residual_power).log10())
}

/// Effective number of bits from a SINAD figure: `(SINAD − 1.76)/6.02`.
pub fn enob<F: Scalar>(sinad_db: F) -> F {
    (sinad_db - F::cast(1.76)) / F::cast(6.02)
}

/// Quality summary for one recovery, with dB figures already capped for
/// serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport<F> {
    pub snr_r_db: F,
    pub psnr_db: F,
    pub sinad_db: Option<F>,
    pub enob_bits: Option<F>,
    pub max_abs_err: F,
    pub success: bool,
}

impl<F: Scalar> MetricsReport<F> {
    fn cap(v: F) -> F {
        if v.is_finite() {
            v
        } else {
            F::cast(SENTINEL_DB)
        }
    }

    pub fn new(snr_r_db: F, psnr_db: F, sinad_db: Option<F>, max_abs_err: F, success: bool) -> Self {
        let sinad_db = sinad_db.map(Self::cap);
        Self {
            snr_r_db: Self::cap(snr_r_db),
            psnr_db: Self::cap(psnr_db),
            sinad_db,
            enob_bits: sinad_db.map(enob),
            max_abs_err,
            success,
        }
    }
}
