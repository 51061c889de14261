//! Closed-form sampling bounds for difference-based modulo recovery.
//!
//! Every function returns the open-threshold value of a *sufficient*
//! condition — recovery is guaranteed strictly above the returned
//! oversampling factor — so callers add their own margin. Infeasible
//! parameter combinations (where no sampling rate can help at the given
//! noise level) surface as [`Error::Infeasible`].

use serde::{Deserialize, Serialize};

use crate::signals::BernsteinVariant;
use crate::{Error, Result, Scalar};

fn check_rho<F: Scalar>(rho: F) -> Result<()> {
    if !(rho > F::zero()) {
        return Err(Error::config("amplitude scaling rho must be positive"));
    }
    Ok(())
}

fn check_rho_eta<F: Scalar>(rho_eta: F) -> Result<()> {
    if rho_eta < F::zero() {
        return Err(Error::config("normalized noise level must be nonnegative"));
    }
    Ok(())
}

/// Which minimum-order formula to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NminMode {
    /// Classical rule `⌈log ρ / log(OF/(πe))⌉`, valid for `OF > πe`.
    Baseline,
    /// Tightened rule `⌈log ρ / log(OF/π)⌉`, valid for `OF > π`.
    Revised,
}

/// Smallest difference order that recovers at amplitude scaling `rho` and
/// oversampling factor `of`. `rho ≤ 1` needs no unfolding and returns 1.
pub fn nmin<F: Scalar>(rho: F, of: F, mode: NminMode) -> Result<u32> {
    check_rho(rho)?;
    let base = match mode {
        NminMode::Baseline => F::pi() * F::cast(std::f64::consts::E),
        NminMode::Revised => F::pi(),
    };
    if !(of > base) {
        return Err(Error::Infeasible(format!(
            "oversampling {of} not above the mode's domain threshold {base}"
        )));
    }
    if rho <= F::one() {
        return Ok(1);
    }
    let n = (rho.ln() / (of / base).ln()).ceil();
    Ok((n.to_f64().unwrap() as u32).max(1))
}

/// Bound variant selector for [`of_required`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OfVariant<F> {
    /// Fixed order `N` with bounded noise: `π(ρ/(1 − 2^N ρ_η))^{1/N}`.
    NoisyFixedN { order: u32, rho_eta: F },
    /// Fixed order `N` with a `b`-bit mid-rise quantizer:
    /// `π(ρ/(1 − 2^{N−b}))^{1/N}`.
    Quantized { order: u32, bits: u32 },
    /// Second-order recovery: `π√(ρ/(1 − 4ρ_η))`.
    Rsod { rho_eta: F },
    /// Second-order recovery with the sinc-sharpened derivative constant:
    /// `π√(ρ/(3(1 − 4ρ_η)))`.
    RsodSinc { rho_eta: F },
}

/// Parameter bundle for table generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery<F> {
    pub rho: F,
    pub variant: OfVariant<F>,
}

/// Sufficient oversampling factor for the selected variant.
pub fn of_required<F: Scalar>(query: &BoundQuery<F>) -> Result<F> {
    match query.variant {
        OfVariant::NoisyFixedN { order, rho_eta } => {
            of_noisy_fixed_order(query.rho, rho_eta, order)
        }
        OfVariant::Quantized { order, bits } => of_quantized(query.rho, bits, order),
        OfVariant::Rsod { rho_eta } => of_rsod(query.rho, rho_eta),
        OfVariant::RsodSinc { rho_eta } => of_rsod_sinc(query.rho, rho_eta),
    }
}

/// `π (ρ / (1 − 2^N ρ_η))^{1/N}`; feasible only while `2^N ρ_η < 1`.
pub fn of_noisy_fixed_order<F: Scalar>(rho: F, rho_eta: F, order: u32) -> Result<F> {
    check_rho(rho)?;
    check_rho_eta(rho_eta)?;
    if order == 0 {
        return Err(Error::config("difference order must be at least 1"));
    }
    let gain = F::cast((1u64 << order.min(63)) as f64);
    let margin = F::one() - gain * rho_eta;
    if !(margin > F::zero()) {
        return Err(Error::Infeasible(format!(
            "noise amplification 2^{order}·ρ_η = {} reaches 1",
            gain * rho_eta
        )));
    }
    Ok(F::pi() * (rho / margin).powf(F::one() / F::cast(order as f64)))
}

/// Quantization-noise specialization with `ρ_η = 2^{-b}`; requires `b > N`.
pub fn of_quantized<F: Scalar>(rho: F, bits: u32, order: u32) -> Result<F> {
    if bits <= order {
        return Err(Error::Infeasible(format!(
            "quantized bound needs bits > order (got b = {bits}, N = {order})"
        )));
    }
    of_noisy_fixed_order(rho, F::cast(0.5f64.powi(bits as i32)), order)
}

/// Second-order bound `π √(ρ/(1 − 4ρ_η))`; feasible for `ρ_η < 1/4`.
pub fn of_rsod<F: Scalar>(rho: F, rho_eta: F) -> Result<F> {
    of_noisy_fixed_order(rho, rho_eta, 2)
}

/// Sinc-sharpened second-order bound `π √(ρ/(3(1 − 4ρ_η)))` — a `√3`
/// reduction over [`of_rsod`].
pub fn of_rsod_sinc<F: Scalar>(rho: F, rho_eta: F) -> Result<F> {
    Ok(of_rsod(rho / F::cast(3.0), rho_eta)?)
}

/// Cap on the power-of-two exponent search in [`of_baseline_noisy`].
pub const BASELINE_ALPHA_CAP: u32 = 64;

/// Classical noisy baseline: the smallest `α ∈ ℕ` admitting the noise level
/// through `ρ_η < (1/4)(2ρ)^{−1/α}`, paired with `OF = 2^α·πe` (or `2^α·π`
/// when `with_e` is false, i.e. with the extraneous Stirling constant
/// removed).
pub fn of_baseline_noisy<F: Scalar>(rho: F, rho_eta: F, with_e: bool) -> Result<(u32, F)> {
    check_rho(rho)?;
    check_rho_eta(rho_eta)?;
    let quarter = F::cast(0.25);
    let two_rho = rho + rho;
    for alpha in 1..=BASELINE_ALPHA_CAP {
        let admissible = quarter * two_rho.powf(-F::one() / F::cast(alpha as f64));
        if rho_eta < admissible {
            let base = if with_e {
                F::pi() * F::cast(std::f64::consts::E)
            } else {
                F::pi()
            };
            return Ok((alpha, F::cast((1u128 << alpha) as f64) * base));
        }
    }
    Err(Error::Infeasible(format!(
        "no admissible exponent below {BASELINE_ALPHA_CAP} for rho_eta = {rho_eta}"
    )))
}

/// Jitter-aware second-order oversampling bound.
///
/// Generic:  `π / (−2ν + √(4ν² + (1−4ρ_η)/ρ))`
/// Sinc:     `π / (−3ν + √3·√(3ν² + (1−4ρ_η)/ρ))`
///
/// At `ν = 0` both reduce exactly to their uniform-grid counterparts.
pub fn of_jitter<F: Scalar>(rho: F, rho_eta: F, nu: F, variant: BernsteinVariant) -> Result<F> {
    check_rho(rho)?;
    check_rho_eta(rho_eta)?;
    if nu < F::zero() {
        return Err(Error::config("jitter level must be nonnegative"));
    }
    let margin = F::one() - F::cast(4.0) * rho_eta;
    if !(margin > F::zero()) {
        return Err(Error::Infeasible(format!(
            "jitter bound needs rho_eta < 1/4, got {rho_eta}"
        )));
    }
    let c = margin / rho;
    let denom = match variant {
        BernsteinVariant::Generic => {
            let disc = F::cast(4.0) * nu * nu + c;
            -(nu + nu) + disc.sqrt()
        }
        BernsteinVariant::Sinc => {
            let disc = F::cast(3.0) * nu * nu + c;
            -F::cast(3.0) * nu + F::cast(3.0).sqrt() * disc.sqrt()
        }
    };
    Ok(F::pi() / denom)
}

/// Direct predicate form of the jitter condition:
/// `ρ((TΩ)² + 4νTΩ) + 4ρ_η < 1` (strict).
pub fn jitter_condition_holds<F: Scalar>(rho: F, rho_eta: F, nu: F, t_omega: F) -> bool {
    let four = F::cast(4.0);
    rho * (t_omega * t_omega + four * nu * t_omega) + four * rho_eta < F::one()
}

/// SINAD and ENOB gain of a modulo ADC over a conventional converter at
/// equal bit depth: `(20·log10 ρ, log2 ρ)`.
pub fn sinad_gain_theory<F: Scalar>(rho: F) -> Result<(F, F)> {
    if rho < F::one() {
        return Err(Error::config("gain is defined for rho >= 1"));
    }
    Ok((F::cast(20.0) * rho.log10(), rho.log2()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn nmin_at_the_benchmark_point() {
        assert_eq!(nmin(12.0, 18.0, NminMode::Revised).unwrap(), 2);
        assert_eq!(nmin(12.0, 18.0, NminMode::Baseline).unwrap(), 4);
        assert_eq!(nmin(1.0, 18.0, NminMode::Revised).unwrap(), 1);
        assert_eq!(nmin(0.4, 18.0, NminMode::Baseline).unwrap(), 1);
        assert!(nmin(5.0, 3.0, NminMode::Revised).is_err());
        // πe ≈ 8.54: just above it the order blows up but stays defined
        assert!(nmin(5.0, 9.0, NminMode::Baseline).unwrap() > 10);
        assert!(nmin(5.0, 8.0, NminMode::Baseline).is_err());
    }

    #[test]
    fn fixed_order_reference_cells() {
        // rho = 10 reference table
        let cells = [
            (0.10, 12.83),
            (0.12, 13.78),
            (0.14, 14.98),
            (0.16, 16.56),
            (0.18, 18.77),
            (0.20, 22.21),
        ];
        for (rho_eta, expect) in cells {
            let v: f64 = of_noisy_fixed_order(10.0, rho_eta, 2).unwrap();
            assert!((v - expect).abs() <= 0.01, "N=2 rho_eta={rho_eta}: {v}");
        }
        let v: f64 = of_noisy_fixed_order(10.0, 0.10, 3).unwrap();
        assert!((v - 11.57).abs() <= 0.01);
        assert!(matches!(
            of_noisy_fixed_order(10.0, 0.14, 3),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn baseline_reference_cells() {
        let (alpha, of) = of_baseline_noisy::<f64>(10.0, 0.10, true).unwrap();
        assert_eq!(alpha, 4);
        assert!((of - 136.64).abs() < 0.01);
        let (_, of) = of_baseline_noisy::<f64>(10.0, 0.10, false).unwrap();
        assert!((of - 50.27).abs() < 0.01);
        let (alpha, of) = of_baseline_noisy::<f64>(10.0, 0.20, true).unwrap();
        assert_eq!(alpha, 14);
        assert!((of - 139915.01).abs() < 0.1);
    }

    #[test]
    fn rsod_and_sinc_forms() {
        assert_relative_eq!(of_rsod(20.5, 0.0).unwrap(), 14.2241, epsilon = 1e-3);
        assert_relative_eq!(of_rsod_sinc(20.5, 0.0).unwrap(), 8.2123, epsilon = 1e-3);
        assert!(of_rsod(10.0, 0.25).is_err());
    }

    #[test]
    fn of_required_dispatch() {
        let q = BoundQuery { rho: 10.0, variant: OfVariant::Rsod { rho_eta: 0.1 } };
        assert_eq!(of_required(&q).unwrap(), of_rsod(10.0, 0.1).unwrap());
        let q = BoundQuery { rho: 10.0, variant: OfVariant::Quantized { order: 2, bits: 3 } };
        // b = 3 ⇒ ρ_η = 1/8
        assert_eq!(of_required(&q).unwrap(), of_noisy_fixed_order(10.0, 0.125, 2).unwrap());
        let q = BoundQuery { rho: 10.0, variant: OfVariant::Quantized { order: 3, bits: 3 } };
        assert!(of_required(&q).is_err());
    }

    #[test]
    fn jitter_bound_reduces_at_zero() {
        for rho in [5.92, 10.0, 20.5] {
            for rho_eta in [0.0, 0.1, 0.2] {
                let a = of_jitter(rho, rho_eta, 0.0, BernsteinVariant::Generic).unwrap();
                let b = of_rsod(rho, rho_eta).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-12);
                let a = of_jitter(rho, rho_eta, 0.0, BernsteinVariant::Sinc).unwrap();
                let b = of_rsod_sinc(rho, rho_eta).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn jitter_bound_reference_values() {
        // Independent numerical evaluation of the two closed forms.
        let v = of_jitter(5.92, 0.0, 0.09, BernsteinVariant::Sinc).unwrap();
        let expect = std::f64::consts::PI
            / (-0.27 + 3.0f64.sqrt() * (3.0 * 0.09f64.powi(2) + 1.0 / 5.92).sqrt());
        assert_relative_eq!(v, expect, max_relative = 1e-12);
        assert!((v - 6.39).abs() < 0.01);

        let v = of_jitter(10.0, 0.15, 0.05, BernsteinVariant::Generic).unwrap();
        let expect: f64 =
            std::f64::consts::PI / (-0.1 + (0.01f64 + (1.0 - 0.6) / 10.0).sqrt());
        assert_relative_eq!(v, expect, max_relative = 1e-12);
        assert!((v - 25.42).abs() < 0.01);
    }

    #[test]
    fn jitter_predicate_consistent_with_bound() {
        assert!(jitter_condition_holds(1.0, 0.0, 0.0, 0.99f64.sqrt()));
        // boundary equality is excluded
        let t = (1.0f64 / 1.0).sqrt();
        assert!(!jitter_condition_holds(1.0, 0.0, 0.0, t));
        // fuzz: predicate agrees with OF comparison
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..2000 {
            let rho = 1.0 + 29.0 * next();
            let rho_eta = 0.24 * next();
            let nu = 0.2 * next();
            let of = 3.0 + 40.0 * next();
            let t_omega = std::f64::consts::PI / of;
            let bound = of_jitter(rho, rho_eta, nu, BernsteinVariant::Generic).unwrap();
            assert_eq!(
                jitter_condition_holds(rho, rho_eta, nu, t_omega),
                of > bound,
                "rho={rho} rho_eta={rho_eta} nu={nu} of={of} bound={bound}"
            );
        }
    }

    #[test]
    fn jitter_penalty_is_monotone_and_linear_for_small_nu() {
        let c: f64 = (1.0 - 4.0 * 0.1) / 10.0;
        let mut last = 0.0;
        for i in 0..50 {
            let nu = i as f64 * 2e-3;
            let v = of_jitter(10.0, 0.1, nu, BernsteinVariant::Generic).unwrap();
            assert!(v >= last);
            last = v;
            // admissible TΩ shrinks as √c − 2ν + O(ν²)
            let t_omega = std::f64::consts::PI / v;
            let linear = c.sqrt() - 2.0 * nu;
            assert!(
                (t_omega - linear).abs() <= 4.0 * nu * nu / c.sqrt() + 1e-12,
                "nu={nu}: {t_omega} vs {linear}"
            );
        }
    }

    #[test]
    fn monotonicity_and_limits() {
        // increasing in rho and rho_eta
        let mut last = 0.0;
        for i in 1..=20 {
            let v = of_noisy_fixed_order(i as f64, 0.1, 2).unwrap();
            assert!(v > last);
            last = v;
        }
        let mut last = 0.0;
        for i in 0..=20 {
            let v = of_noisy_fixed_order(10.0, 0.01 * i as f64, 2).unwrap();
            assert!(v > last);
            last = v;
        }
        // noiseless: decreasing in N with limit π
        let mut prev = f64::INFINITY;
        for n in 1..=40 {
            let v = of_noisy_fixed_order(10.0, 0.0, n).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!((prev - std::f64::consts::PI).abs() < 0.2);
        // quantized bound converges to the noiseless one as b grows
        let v = of_quantized(10.0, 60, 3).unwrap();
        let noiseless = of_noisy_fixed_order(10.0, 0.0, 3).unwrap();
        assert_relative_eq!(v, noiseless, max_relative = 1e-9);
    }

    #[test]
    fn nmin_consistent_with_of_required() {
        for rho in [2.0, 5.0, 12.0, 25.0] {
            for of in [4.0, 6.0, 10.0, 18.0, 30.0] {
                let n = nmin(rho, of, NminMode::Revised).unwrap();
                assert!(of_noisy_fixed_order(rho, 0.0, n).unwrap() <= of + 1e-9);
                if n > 1 {
                    assert!(of_noisy_fixed_order(rho, 0.0, n - 1).unwrap() > of);
                }
            }
        }
    }

    #[test]
    fn sinad_gain_values() {
        let (db, bits) = sinad_gain_theory::<f64>(1.0).unwrap();
        assert_eq!((db, bits), (0.0, 0.0));
        let (db, bits) = sinad_gain_theory::<f64>(108.0).unwrap();
        assert!((db - 40.67).abs() < 0.01);
        assert!((bits - 6.75).abs() < 0.01);
        let (db, bits) = sinad_gain_theory::<f64>(10.0).unwrap();
        assert_relative_eq!(db, 20.0, max_relative = 1e-12);
        assert_relative_eq!(bits, 10.0f64.log2(), max_relative = 1e-12);
    }
}
