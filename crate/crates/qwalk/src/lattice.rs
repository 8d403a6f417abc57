//! Amplitude fields on integer-line windows and exact light-cone evolution.
//!
//! The walk has speed one, so after `n` steps a site depends only on data
//! within distance `n`. Evolution therefore never needs a boundary
//! condition: [`evolve`] samples the initial state on a window padded by
//! `n` on each side and lets [`step`] shrink it back, which reproduces the
//! infinite-lattice evolution on the requested window *exactly* — the
//! returned values are bit-identical to what any larger padding would give.
//!
//! Infinite-support initial states are described by a [`StateGenerator`],
//! an analytic site → amplitude-pair rule, so padding costs nothing.

use std::fmt;
use std::io::{self, Write};
use std::ops::{Add, Mul};
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::coin::UnitaryCoin;

/// Errors from window handling and evolution.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum LatticeError {
    /// A step needs at least three sites to produce a nonempty interior.
    #[error("window [{lo}, {hi}] is too small: need hi - lo >= {need}")]
    WindowTooSmall { lo: i64, hi: i64, need: i64 },
    /// Window bounds are inverted.
    #[error("invalid window [{lo}, {hi}]: hi must be >= lo")]
    InvalidWindow { lo: i64, hi: i64 },
    /// A stored amplitude is NaN or infinite.
    #[error("non-finite amplitude at site {site}")]
    NonFinite { site: i64 },
}

/// The amplitude pair `(Ψ^L, Ψ^R)` at one site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiralPair {
    pub left: Complex64,
    pub right: Complex64,
}

impl ChiralPair {
    pub const ZERO: ChiralPair = ChiralPair {
        left: Complex64 { re: 0.0, im: 0.0 },
        right: Complex64 { re: 0.0, im: 0.0 },
    };

    pub fn new(left: Complex64, right: Complex64) -> Self {
        ChiralPair { left, right }
    }

    /// Per-site measure contribution `|Ψ^L|² + |Ψ^R|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.left.norm_sqr() + self.right.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        self.left.re.is_finite()
            && self.left.im.is_finite()
            && self.right.re.is_finite()
            && self.right.im.is_finite()
    }
}

impl Add for ChiralPair {
    type Output = ChiralPair;

    fn add(self, rhs: ChiralPair) -> ChiralPair {
        ChiralPair::new(self.left + rhs.left, self.right + rhs.right)
    }
}

impl Mul<ChiralPair> for Complex64 {
    type Output = ChiralPair;

    fn mul(self, rhs: ChiralPair) -> ChiralPair {
        ChiralPair::new(self * rhs.left, self * rhs.right)
    }
}

/// A finite window `[lo, hi]` of amplitude pairs, one per site.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeField {
    lo: i64,
    values: Vec<ChiralPair>,
}

impl AmplitudeField {
    /// Wrap per-site values starting at `lo`; every value must be finite.
    pub fn from_values(lo: i64, values: Vec<ChiralPair>) -> Result<Self, LatticeError> {
        if values.is_empty() {
            return Err(LatticeError::InvalidWindow { lo, hi: lo - 1 });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(LatticeError::NonFinite {
                    site: lo + i as i64,
                });
            }
        }
        Ok(AmplitudeField { lo, values })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one site
    }

    /// The pair at site `x`, if `x` lies in the window.
    pub fn get(&self, x: i64) -> Option<ChiralPair> {
        if x < self.lo || x > self.hi() {
            None
        } else {
            Some(self.values[(x - self.lo) as usize])
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, ChiralPair)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.lo + i as i64, v))
    }

    /// Restrict to the sub-window `[lo, hi]` (must be contained).
    pub fn restrict(&self, lo: i64, hi: i64) -> Result<AmplitudeField, LatticeError> {
        if lo > hi {
            return Err(LatticeError::InvalidWindow { lo, hi });
        }
        if lo < self.lo || hi > self.hi() {
            return Err(LatticeError::WindowTooSmall {
                lo: self.lo,
                hi: self.hi(),
                need: hi - lo,
            });
        }
        let start = (lo - self.lo) as usize;
        let end = (hi - self.lo) as usize + 1;
        Ok(AmplitudeField {
            lo,
            values: self.values[start..end].to_vec(),
        })
    }
}

/// Which stationary family produced a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorFamily {
    /// Quadratic family for coins with all entries nonzero.
    FullSupport,
    /// Alternating family for anti-diagonal coins.
    AZero,
    /// Position-independent state.
    Uniform,
    /// Caller-supplied rule.
    Custom,
}

/// An analytic rule `site → (Ψ^L, Ψ^R)` valid on the whole line.
///
/// Evaluation is pure: generators can be shared freely across threads and
/// resampling always reproduces identical values.
#[derive(Clone)]
pub struct StateGenerator {
    family: GeneratorFamily,
    rule: Arc<dyn Fn(i64) -> ChiralPair + Send + Sync>,
}

impl StateGenerator {
    pub fn new(
        family: GeneratorFamily,
        rule: impl Fn(i64) -> ChiralPair + Send + Sync + 'static,
    ) -> Self {
        StateGenerator {
            family,
            rule: Arc::new(rule),
        }
    }

    /// A caller-supplied rule with the `Custom` tag.
    pub fn custom(rule: impl Fn(i64) -> ChiralPair + Send + Sync + 'static) -> Self {
        Self::new(GeneratorFamily::Custom, rule)
    }

    /// The same pair at every site.
    pub fn uniform(pair: ChiralPair) -> Self {
        Self::new(GeneratorFamily::Uniform, move |_| pair)
    }

    pub fn family(&self) -> GeneratorFamily {
        self.family
    }

    pub fn eval(&self, x: i64) -> ChiralPair {
        (self.rule)(x)
    }
}

impl fmt::Debug for StateGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateGenerator")
            .field("family", &self.family)
            .finish_non_exhaustive()
    }
}

/// A finite window of nonnegative per-site weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    lo: i64,
    values: Vec<f64>,
}

impl Measure {
    pub fn from_values(lo: i64, values: Vec<f64>) -> Result<Self, LatticeError> {
        if values.is_empty() {
            return Err(LatticeError::InvalidWindow { lo, hi: lo - 1 });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(LatticeError::NonFinite {
                    site: lo + i as i64,
                });
            }
        }
        Ok(Measure { lo, values })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, x: i64) -> Option<f64> {
        if x < self.lo || x > self.hi() {
            None
        } else {
            Some(self.values[(x - self.lo) as usize])
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.lo + i as i64, v))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest pointwise difference against another measure on the
    /// intersection of the two windows.
    pub fn max_abs_diff(&self, other: &Measure) -> f64 {
        let lo = self.lo.max(other.lo);
        let hi = self.hi().min(other.hi());
        let mut worst: f64 = 0.0;
        for x in lo..=hi {
            let d = (self.get(x).unwrap() - other.get(x).unwrap()).abs();
            worst = worst.max(d);
        }
        worst
    }
}

/// An analytic rule `site → weight` for infinite-support measures.
#[derive(Clone)]
pub struct MeasureGenerator {
    rule: Arc<dyn Fn(i64) -> f64 + Send + Sync>,
}

impl MeasureGenerator {
    pub fn new(rule: impl Fn(i64) -> f64 + Send + Sync + 'static) -> Self {
        MeasureGenerator {
            rule: Arc::new(rule),
        }
    }

    pub fn eval(&self, x: i64) -> f64 {
        (self.rule)(x)
    }

    pub fn sample(&self, lo: i64, hi: i64) -> Result<Measure, LatticeError> {
        if hi < lo {
            return Err(LatticeError::InvalidWindow { lo, hi });
        }
        Measure::from_values(lo, (lo..=hi).map(|x| self.eval(x)).collect())
    }
}

impl fmt::Debug for MeasureGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeasureGenerator").finish_non_exhaustive()
    }
}

/// Evaluate a generator at every site of `[lo, hi]`.
pub fn sample_window(
    gen: &StateGenerator,
    lo: i64,
    hi: i64,
) -> Result<AmplitudeField, LatticeError> {
    if hi < lo {
        return Err(LatticeError::InvalidWindow { lo, hi });
    }
    AmplitudeField::from_values(lo, (lo..=hi).map(|x| gen.eval(x)).collect())
}

/// One step of the walk. The returned window shrinks by one site on each
/// side: those are exactly the sites whose update needs no data from
/// outside the input window, so every returned value is exact.
pub fn step(coin: &UnitaryCoin, field: &AmplitudeField) -> Result<AmplitudeField, LatticeError> {
    let (lo, hi) = (field.lo(), field.hi());
    if hi - lo < 2 {
        return Err(LatticeError::WindowTooSmall { lo, hi, need: 2 });
    }
    let (a, b, c, d) = (coin.a(), coin.b(), coin.c(), coin.d());
    let values = (lo + 1..=hi - 1)
        .map(|x| {
            let up = field.get(x + 1).unwrap();
            let down = field.get(x - 1).unwrap();
            ChiralPair::new(a * up.left + b * up.right, c * down.left + d * down.right)
        })
        .collect();
    AmplitudeField::from_values(lo + 1, values)
}

/// Evolve a generator-described state `n` steps and return the exact field
/// on `[lo, hi]`: the generator is sampled on `[lo − n, hi + n]` and the
/// window shrinks back as [`step`] is applied `n` times.
pub fn evolve(
    coin: &UnitaryCoin,
    gen: &StateGenerator,
    n: usize,
    lo: i64,
    hi: i64,
) -> Result<AmplitudeField, LatticeError> {
    let pad = n as i64;
    let mut field = sample_window(gen, lo - pad, hi + pad)?;
    for _ in 0..n {
        field = step(coin, &field)?;
    }
    Ok(field)
}

/// The measure map: `μ(x) = |Ψ^L(x)|² + |Ψ^R(x)|²` on the same window.
pub fn to_measure(field: &AmplitudeField) -> Measure {
    Measure {
        lo: field.lo(),
        values: field.iter().map(|(_, v)| v.norm_sqr()).collect(),
    }
}

/// Write a measure as CSV (`x,mu`), one row per site in ascending order.
/// Values use 17 significant digits so they round-trip through text.
pub fn write_measure_csv<W: Write>(w: &mut W, measure: &Measure) -> io::Result<()> {
    writeln!(w, "x,mu")?;
    for (x, mu) in measure.iter() {
        writeln!(w, "{x},{mu:.16e}")?;
    }
    Ok(())
}

/// Write an amplitude field as CSV
/// (`x,psiL_re,psiL_im,psiR_re,psiR_im`), ascending in `x`.
pub fn write_field_csv<W: Write>(w: &mut W, field: &AmplitudeField) -> io::Result<()> {
    writeln!(w, "x,psiL_re,psiL_im,psiR_re,psiR_im")?;
    for (x, v) in field.iter() {
        writeln!(
            w,
            "{x},{:.16e},{:.16e},{:.16e},{:.16e}",
            v.left.re, v.left.im, v.right.re, v.right.im
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn delta_state() -> StateGenerator {
        StateGenerator::custom(|x| {
            if x == 0 {
                ChiralPair::new(c(1.0, 0.0), c(0.0, 0.0))
            } else {
                ChiralPair::ZERO
            }
        })
    }

    #[test]
    fn step_of_zero_field_is_zero() {
        let coin = UnitaryCoin::hadamard();
        let field =
            AmplitudeField::from_values(-3, vec![ChiralPair::ZERO; 7]).unwrap();
        let next = step(&coin, &field).unwrap();
        assert_eq!(next.lo(), -2);
        assert_eq!(next.hi(), 2);
        assert!(next.iter().all(|(_, v)| v == ChiralPair::ZERO));
    }

    #[test]
    fn step_window_too_small() {
        let coin = UnitaryCoin::hadamard();
        let field = AmplitudeField::from_values(0, vec![ChiralPair::ZERO; 2]).unwrap();
        assert!(matches!(
            step(&coin, &field),
            Err(LatticeError::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn hadamard_delta_one_step() {
        // One application of the update rule by hand: the δ amplitude splits
        // into (1/√2, 0) at −1 and (0, 1/√2) at +1.
        let coin = UnitaryCoin::hadamard();
        let field = sample_window(&delta_state(), -2, 2).unwrap();
        let next = step(&coin, &field).unwrap();
        let s = FRAC_1_SQRT_2;
        assert_eq!(next.get(-1).unwrap(), ChiralPair::new(c(s, 0.0), c(0.0, 0.0)));
        assert_eq!(next.get(0).unwrap(), ChiralPair::ZERO);
        assert_eq!(next.get(1).unwrap(), ChiralPair::new(c(0.0, 0.0), c(s, 0.0)));
    }

    #[test]
    fn hadamard_delta_two_steps() {
        // Two hand applications of the update rule as the oracle.
        let coin = UnitaryCoin::hadamard();
        let field = evolve(&coin, &delta_state(), 2, -2, 2).unwrap();
        let half = 0.5;
        assert!((field.get(-2).unwrap().left - c(half, 0.0)).norm() < 1e-15);
        assert!((field.get(-2).unwrap().right).norm() < 1e-15);
        assert!((field.get(0).unwrap().left - c(half, 0.0)).norm() < 1e-15);
        assert!((field.get(0).unwrap().right - c(half, 0.0)).norm() < 1e-15);
        assert!((field.get(2).unwrap().right - c(-half, 0.0)).norm() < 1e-15);
        assert!((field.get(2).unwrap().left).norm() < 1e-15);
        assert!(field.get(-1).unwrap().norm_sqr() < 1e-30);
        assert!(field.get(1).unwrap().norm_sqr() < 1e-30);
    }

    #[test]
    fn constant_field_steps_to_coin_applied() {
        let coin = UnitaryCoin::hadamard_twisted(0.9);
        let phi = ChiralPair::new(c(0.3, -0.2), c(0.5, 0.1));
        let gen = StateGenerator::uniform(phi);
        let field = sample_window(&gen, -5, 5).unwrap();
        let next = step(&coin, &field).unwrap();
        let (l, r) = coin.apply(phi.left, phi.right);
        for (x, v) in next.iter() {
            assert!((v.left - l).norm() < 1e-15, "left at {x}");
            assert!((v.right - r).norm() < 1e-15, "right at {x}");
        }
    }

    #[test]
    fn evolve_zero_steps_samples_unchanged() {
        let coin = UnitaryCoin::hadamard();
        let gen = delta_state();
        let direct = sample_window(&gen, -4, 4).unwrap();
        let evolved = evolve(&coin, &gen, 0, -4, 4).unwrap();
        assert_eq!(direct, evolved);
    }

    #[test]
    fn light_cone_exactness_is_bitwise() {
        let coin = UnitaryCoin::rotation(0.7);
        let gen = StateGenerator::custom(|x| {
            ChiralPair::new(
                Complex64::from_polar(1.0 / (1.0 + x.abs() as f64), 0.3 * x as f64),
                Complex64::from_polar(0.5, -0.1 * x as f64),
            )
        });
        let base = evolve(&coin, &gen, 5, -6, 6).unwrap();
        for k in 1..4 {
            let padded = evolve(&coin, &gen, 5, -6 - k, 6 + k).unwrap();
            let restricted = padded.restrict(-6, 6).unwrap();
            assert_eq!(base, restricted, "padding k={k} changed values");
        }
    }

    #[test]
    fn norm_conservation_on_compact_support() {
        let coin = UnitaryCoin::hadamard_twisted(1.3);
        // supported on [-2, 2], zero on the border of [-4, 4]
        let gen = StateGenerator::custom(|x| {
            if x.abs() <= 2 {
                ChiralPair::new(c(0.3 * x as f64, 0.1), c(-0.2, 0.05 * x as f64))
            } else {
                ChiralPair::ZERO
            }
        });
        let field = sample_window(&gen, -4, 4).unwrap();
        let before = to_measure(&field).sum();
        let after = to_measure(&step(&coin, &field).unwrap()).sum();
        assert!(
            (before - after).abs() < 1e-12,
            "mass drifted: {before} -> {after}"
        );
    }

    #[test]
    fn to_measure_matches_modulus_sum() {
        let field = AmplitudeField::from_values(
            0,
            vec![ChiralPair::new(c(0.6, 0.0), c(0.0, 0.8)), ChiralPair::ZERO],
        )
        .unwrap();
        let m = to_measure(&field);
        assert!((m.get(0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(m.get(1).unwrap(), 0.0);
    }

    #[test]
    fn non_finite_values_rejected() {
        let err = AmplitudeField::from_values(
            3,
            vec![ChiralPair::new(c(f64::NAN, 0.0), c(0.0, 0.0))],
        )
        .unwrap_err();
        assert_eq!(err, LatticeError::NonFinite { site: 3 });
    }

    #[test]
    fn sample_window_is_deterministic() {
        let gen = StateGenerator::custom(|x| {
            ChiralPair::new(Complex64::from_polar(1.0, x as f64), c(0.25, 0.0))
        });
        let one = sample_window(&gen, -8, 8).unwrap();
        let two = sample_window(&gen, -8, 8).unwrap();
        assert_eq!(one, two);
    }

    #[test]
    fn measure_csv_format() {
        let m = Measure::from_values(-1, vec![1.0, 2.0, 6.0]).unwrap();
        let mut buf = Vec::new();
        write_measure_csv(&mut buf, &m).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,mu"));
        assert_eq!(lines.next(), Some("-1,1.0000000000000000e0"));
        assert_eq!(lines.next(), Some("0,2.0000000000000000e0"));
        assert_eq!(lines.next(), Some("1,6.0000000000000000e0"));
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn field_csv_format() {
        let f = AmplitudeField::from_values(
            2,
            vec![ChiralPair::new(c(1.0, -0.5), c(0.0, 0.25))],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_field_csv(&mut buf, &f).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "x,psiL_re,psiL_im,psiR_re,psiR_im\n2,1.0000000000000000e0,-5.0000000000000000e-1,0.0000000000000000e0,2.5000000000000000e-1\n"
        );
    }
}
