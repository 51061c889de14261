//! Discrete difference calculus.
//!
//! Forward differences `(Δx)[k] = x[k+1] − x[k]`, the anti-difference
//! (running sum) operator, and rounding onto the `2λ` lattice. Constant
//! sequences span the null space of `Δ`, so every anti-difference loses one
//! integer constant; the recovery module re-estimates those constants.

use crate::{Error, Result, Scalar};

/// A finite real sequence plus the index its first element carries in the
/// original sample numbering. The index is bookkeeping only: operators work
/// positionally, and window arithmetic downstream maps results back onto
/// original sample indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence<F> {
    values: Vec<F>,
    origin_index: i64,
}

impl<F: Scalar> Sequence<F> {
    pub fn new(values: Vec<F>) -> Self {
        Self { values, origin_index: 0 }
    }

    pub fn with_origin(values: Vec<F>, origin_index: i64) -> Self {
        Self { values, origin_index }
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn into_values(self) -> Vec<F> {
        self.values
    }

    pub fn origin_index(&self) -> i64 {
        self.origin_index
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest absolute value, zero for an empty sequence.
    pub fn max_abs(&self) -> F {
        self.values
            .iter()
            .fold(F::zero(), |m, &v| if v.abs() > m { v.abs() } else { m })
    }
}

/// N-fold forward difference. Output keeps the input's origin index and is
/// shorter by `n`.
pub fn diff_n<F: Scalar>(x: &Sequence<F>, n: usize) -> Result<Sequence<F>> {
    if n == 0 {
        return Err(Error::config("difference order must be at least 1"));
    }
    if x.len() <= n {
        return Err(Error::TooShort { need: n + 1, got: x.len() });
    }
    let mut v = x.values.clone();
    for _ in 0..n {
        for k in 0..v.len() - 1 {
            v[k] = v[k + 1] - v[k];
        }
        v.pop();
    }
    Ok(Sequence { values: v, origin_index: x.origin_index })
}

/// Anti-difference: the running sum `out[k] = Σ_{m ≤ k} x[m]`. Length and
/// origin are preserved; `out[0] = x[0]`.
pub fn antidiff<F: Scalar>(x: &Sequence<F>) -> Sequence<F> {
    let mut v = x.values.clone();
    cumsum_in_place(&mut v);
    Sequence { values: v, origin_index: x.origin_index }
}

pub(crate) fn cumsum_in_place<F: Scalar>(v: &mut [F]) {
    let mut acc = F::zero();
    for x in v.iter_mut() {
        acc = acc + *x;
        *x = acc;
    }
}

/// `⌊x⌉` with halves rounded up, i.e. `⌊x + 1/2⌋`.
#[inline]
pub(crate) fn round_half_up<F: Scalar>(x: F) -> F {
    (x + F::cast(0.5)).floor()
}

/// Snap every value to the nearest element of `2λℤ`; exact ties (odd
/// multiples of `λ`) round half-up.
pub fn round_to_lattice<F: Scalar>(s: &Sequence<F>, lambda: F) -> Sequence<F> {
    assert!(lambda > F::zero(), "lattice spacing requires lambda > 0");
    let two_l = lambda + lambda;
    let values = s
        .values
        .iter()
        .map(|&v| two_l * round_half_up(v / two_l))
        .collect();
    Sequence { values, origin_index: s.origin_index }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn seq(v: &[f64]) -> Sequence<f64> {
        Sequence::new(v.to_vec())
    }

    #[test]
    fn first_difference() {
        let d = diff_n(&seq(&[0.0, 1.0, 3.0, 6.0]), 1).unwrap();
        assert_eq!(d.values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn second_difference() {
        let d = diff_n(&seq(&[1.0, 2.0, 4.0, 7.0]), 2).unwrap();
        assert_eq!(d.values(), &[1.0, 1.0]);
    }

    #[test]
    fn constants_are_annihilated() {
        for n in 1..4 {
            let d = diff_n(&seq(&[5.5; 9]), n).unwrap();
            assert_eq!(d.len(), 9 - n);
            assert!(d.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn too_short_rejected() {
        assert!(matches!(
            diff_n(&seq(&[1.0, 2.0]), 2),
            Err(Error::TooShort { need: 3, got: 2 })
        ));
        assert!(diff_n(&seq(&[1.0, 2.0]), 0).is_err());
    }

    #[test]
    fn antidiff_is_running_sum() {
        assert_eq!(antidiff(&seq(&[1.0, 1.0, 1.0])).values(), &[1.0, 2.0, 3.0]);
        assert_eq!(antidiff(&seq(&[0.0, 0.0])).values(), &[0.0, 0.0]);
    }

    #[test]
    fn antidiff_inverts_diff_up_to_shift_and_constant() {
        // x = [2,5,7]: S(Δx) = [x[1]−x[0], x[2]−x[0]] = [3, 5]
        let x = seq(&[2.0, 5.0, 7.0]);
        let r = antidiff(&diff_n(&x, 1).unwrap());
        assert_eq!(r.values(), &[3.0, 5.0]);
    }

    #[test]
    fn lattice_rounding_examples() {
        let r = round_to_lattice(&seq(&[1.9, -0.9]), 1.0);
        assert_eq!(r.values(), &[2.0, 0.0]);
        let r = round_to_lattice(&seq(&[2.3]), 0.5);
        assert_eq!(r.values(), &[2.0]);
    }

    #[test]
    fn lattice_rounding_ties_go_up() {
        // Odd multiples of lambda sit exactly between lattice points.
        let r = round_to_lattice(&seq(&[1.0, -1.0, 3.0]), 1.0);
        assert_eq!(r.values(), &[2.0, 0.0, 4.0]);
    }

    #[test]
    fn lattice_rounding_idempotent_and_exact_on_lattice() {
        let s = seq(&[-4.0, -2.0, 0.0, 2.0, 4.0, 6.0]);
        let once = round_to_lattice(&s, 1.0);
        assert_eq!(once.values(), s.values());
        let twice = round_to_lattice(&once, 1.0);
        assert_eq!(twice.values(), once.values());
    }

    #[test]
    fn origin_bookkeeping() {
        let x = Sequence::with_origin(vec![1.0, 4.0, 9.0, 16.0], 3);
        assert_eq!(diff_n(&x, 2).unwrap().origin_index(), 3);
        assert_eq!(antidiff(&x).origin_index(), 3);
    }

    #[test]
    fn works_in_single_precision() {
        let x: Sequence<f32> = Sequence::new(vec![1.0, 2.0, 4.0, 7.0]);
        let d = diff_n(&x, 2).unwrap();
        assert_eq!(d.values(), &[1.0f32, 1.0]);
    }

    #[test]
    fn linearity_spot_check() {
        let x = seq(&[0.3, -1.2, 2.5, 0.4, -0.7]);
        let y = seq(&[1.1, 0.2, -0.9, 3.3, 2.2]);
        let (a, b) = (2.5, -1.75);
        let combined: Vec<f64> = x
            .values()
            .iter()
            .zip(y.values())
            .map(|(&xv, &yv)| a * xv + b * yv)
            .collect();
        let lhs = diff_n(&Sequence::new(combined), 2).unwrap();
        let dx = diff_n(&x, 2).unwrap();
        let dy = diff_n(&y, 2).unwrap();
        for k in 0..lhs.len() {
            assert_relative_eq!(
                lhs.values()[k],
                a * dx.values()[k] + b * dy.values()[k],
                max_relative = 1e-12,
                epsilon = 1e-12
            );
        }
    }
}
