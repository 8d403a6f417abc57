//! The alternating stationary family for anti-diagonal coins.
//!
//! An anti-diagonal coin has the form `[0 e^{iη}; −△e^{−iη} 0]` with
//! `|△| = 1`. The eigen-equation collapses to `△ = −λ²`, so the only
//! eigenvalues are `λ_± = ±i√△` (principal branch). For either sign, every
//! choice of complex values `α_{2x}, β_{2x}` on the even sites — with
//! `α_{2x}β_{2x} ≠ 0` — extends to an eigenvector:
//!
//! ```text
//! Ψ^L(2x)   = α_{2x},             Ψ^R(2x)   = β_{2x},
//! Ψ^L(2x−1) = (e^{iη}/λ±) β_{2x},  Ψ^R(2x+1) = λ± e^{−iη} α_{2x}.
//! ```
//!
//! The resulting stationary measure is `μ(2x) = |α_{2x}|² + |β_{2x}|²` and
//! `μ(2x+1) = |α_{2x}|² + |β_{2x+2}|²` — completely free on the even
//! sites, hence generally neither uniform nor exponentially shaped.
//!
//! Even-site sequences are given as finite maps plus a default for sites
//! outside the maps; with the default disabled a whole-line generator
//! cannot be built and evaluation reports the missing site instead.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Deserialize;
use thiserror::Error;

use crate::coin::UnitaryCoin;
use crate::lattice::{
    AmplitudeField, ChiralPair, GeneratorFamily, LatticeError, MeasureGenerator, StateGenerator,
};

/// Moduli below this violate the nonzero-product constraint.
pub const ZERO_PRODUCT_EPS: f64 = 1e-12;
/// |△| must be unit within this tolerance.
pub const DELTA_UNIT_TOL: f64 = 1e-9;

/// Errors from the anti-diagonal family.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum AZeroError {
    /// A required even-site entry is absent and no default is declared.
    #[error("no value for even site {site} and no default declared")]
    MissingSequenceValue { site: i64 },
    /// An even-site entry (or the default) has modulus below
    /// [`ZERO_PRODUCT_EPS`], breaking `α_{2x}β_{2x} ≠ 0`.
    #[error("sequence value at even site {site} is zero (|{which}| < {ZERO_PRODUCT_EPS:.0e})")]
    ZeroProduct { site: i64, which: char },
    /// `|△| ≠ 1`.
    #[error("determinant modulus {modulus} is not 1 within {DELTA_UNIT_TOL:.0e}")]
    DeltaNotUnit { modulus: f64 },
    /// Sequence maps may only be keyed by even sites.
    #[error("sequence key {site} is odd; the free values live on even sites")]
    OddSiteKey { site: i64 },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Which of the two eigenvalues `λ_± = ±i√△` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchSign {
    Plus,
    Minus,
}

impl BranchSign {
    fn factor(self) -> f64 {
        match self {
            BranchSign::Plus => 1.0,
            BranchSign::Minus => -1.0,
        }
    }
}

/// Parameters of an alternating stationary state: coin phases, branch
/// sign, and the free even-site sequences.
#[derive(Debug, Clone)]
pub struct AZeroSpec {
    eta: f64,
    delta: Complex64,
    sign: BranchSign,
    alpha: BTreeMap<i64, Complex64>,
    beta: BTreeMap<i64, Complex64>,
    default: Option<Complex64>,
}

impl AZeroSpec {
    /// Validate a spec. Map keys must be even; every supplied value and
    /// the default (when present) must clear [`ZERO_PRODUCT_EPS`].
    pub fn new(
        eta: f64,
        delta: Complex64,
        sign: BranchSign,
        alpha: BTreeMap<i64, Complex64>,
        beta: BTreeMap<i64, Complex64>,
        default: Option<Complex64>,
    ) -> Result<Self, AZeroError> {
        if (delta.norm() - 1.0).abs() > DELTA_UNIT_TOL {
            return Err(AZeroError::DeltaNotUnit {
                modulus: delta.norm(),
            });
        }
        for (map, which) in [(&alpha, 'α'), (&beta, 'β')] {
            for (&site, value) in map {
                if site % 2 != 0 {
                    return Err(AZeroError::OddSiteKey { site });
                }
                if value.norm() < ZERO_PRODUCT_EPS {
                    return Err(AZeroError::ZeroProduct { site, which });
                }
            }
        }
        if let Some(value) = default {
            if value.norm() < ZERO_PRODUCT_EPS {
                return Err(AZeroError::ZeroProduct {
                    site: i64::MAX,
                    which: '*',
                });
            }
        }
        Ok(AZeroSpec {
            eta,
            delta,
            sign,
            alpha,
            beta,
            default,
        })
    }

    /// A spec with all-ones sequences: the default value covers every even
    /// site.
    pub fn constant(eta: f64, delta: Complex64, sign: BranchSign) -> Result<Self, AZeroError> {
        Self::new(
            eta,
            delta,
            sign,
            BTreeMap::new(),
            BTreeMap::new(),
            Some(Complex64::new(1.0, 0.0)),
        )
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn delta(&self) -> Complex64 {
        self.delta
    }

    pub fn sign(&self) -> BranchSign {
        self.sign
    }

    /// The anti-diagonal coin `[0 e^{iη}; −△e^{−iη} 0]` these parameters
    /// describe.
    pub fn coin(&self) -> UnitaryCoin {
        let zero = Complex64::new(0.0, 0.0);
        let b = Complex64::from_polar(1.0, self.eta);
        let c = -self.delta * Complex64::from_polar(1.0, -self.eta);
        UnitaryCoin::new(zero, b, c, zero).expect("anti-diagonal phases are unitary")
    }

    /// `α` at an even site, falling back to the default.
    pub fn alpha_at(&self, site: i64) -> Result<Complex64, AZeroError> {
        debug_assert!(site % 2 == 0);
        self.alpha
            .get(&site)
            .copied()
            .or(self.default)
            .ok_or(AZeroError::MissingSequenceValue { site })
    }

    /// `β` at an even site, falling back to the default.
    pub fn beta_at(&self, site: i64) -> Result<Complex64, AZeroError> {
        debug_assert!(site % 2 == 0);
        self.beta
            .get(&site)
            .copied()
            .or(self.default)
            .ok_or(AZeroError::MissingSequenceValue { site })
    }

    /// The amplitude pair at any site. Odd sites pull their left component
    /// from `β` one site up and their right component from `α` one site
    /// down.
    pub fn amplitude_at(&self, x: i64) -> Result<ChiralPair, AZeroError> {
        let lambda = azero_lambda(self);
        let eta_phase = Complex64::from_polar(1.0, self.eta);
        if x.rem_euclid(2) == 0 {
            Ok(ChiralPair::new(self.alpha_at(x)?, self.beta_at(x)?))
        } else {
            let left = eta_phase * lambda.conj() * self.beta_at(x + 1)?;
            let right = lambda * eta_phase.conj() * self.alpha_at(x - 1)?;
            Ok(ChiralPair::new(left, right))
        }
    }

    /// The measure at any site, straight from the sequence moduli.
    pub fn measure_at(&self, x: i64) -> Result<f64, AZeroError> {
        if x.rem_euclid(2) == 0 {
            Ok(self.alpha_at(x)?.norm_sqr() + self.beta_at(x)?.norm_sqr())
        } else {
            Ok(self.alpha_at(x - 1)?.norm_sqr() + self.beta_at(x + 1)?.norm_sqr())
        }
    }

    /// Sample the amplitudes on an explicit window, reporting the exact
    /// missing site when coverage runs out.
    pub fn sample(&self, lo: i64, hi: i64) -> Result<AmplitudeField, AZeroError> {
        if hi < lo {
            return Err(LatticeError::InvalidWindow { lo, hi }.into());
        }
        let values = (lo..=hi)
            .map(|x| self.amplitude_at(x))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(AmplitudeField::from_values(lo, values)?)
    }

    /// Largest modulus among the declared sequence values and default;
    /// squared moduli lose precision once this grows past about `1e6`.
    pub fn max_modulus(&self) -> f64 {
        self.alpha
            .values()
            .chain(self.beta.values())
            .chain(self.default.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }
}

/// The chosen eigenvalue `λ_± = ±i·e^{iξ/2}` with `ξ = arg △ ∈ [0, 2π)`
/// (principal square root); satisfies `λ² = −△`.
pub fn azero_lambda(spec: &AZeroSpec) -> Complex64 {
    let mut xi = spec.delta().arg();
    if xi < 0.0 {
        xi += std::f64::consts::TAU;
    }
    let i = Complex64::new(0.0, 1.0);
    spec.sign().factor() * i * Complex64::from_polar(1.0, xi / 2.0)
}

fn first_uncovered_site(spec: &AZeroSpec) -> i64 {
    spec.alpha
        .keys()
        .chain(spec.beta.keys())
        .max()
        .map_or(0, |&m| m + 2)
}

/// The alternating eigenvector as a whole-line generator. Requires a
/// declared default so the rule is total; with the default disabled this
/// reports the first even site past the maps as missing.
pub fn build_stationary_azero(spec: &AZeroSpec) -> Result<StateGenerator, AZeroError> {
    if spec.default.is_none() {
        return Err(AZeroError::MissingSequenceValue {
            site: first_uncovered_site(spec),
        });
    }
    let spec = spec.clone();
    Ok(StateGenerator::new(GeneratorFamily::AZero, move |x| {
        spec.amplitude_at(x)
            .expect("spec with a default is total on the line")
    }))
}

/// The analytic stationary measure of the alternating family.
pub fn azero_measure(spec: &AZeroSpec) -> Result<MeasureGenerator, AZeroError> {
    if spec.default.is_none() {
        return Err(AZeroError::MissingSequenceValue {
            site: first_uncovered_site(spec),
        });
    }
    let spec = spec.clone();
    Ok(MeasureGenerator::new(move |x| {
        spec.measure_at(x)
            .expect("spec with a default is total on the line")
    }))
}

/// JSON form of a spec. Sites are object keys (decimal strings); values
/// are `[re, im]` pairs. Omitting `"default"` means `[1, 0]`; an explicit
/// `null` disables the default.
#[derive(Debug, Clone, Deserialize)]
pub struct AZeroConfig {
    pub eta: f64,
    pub delta: [f64; 2],
    pub sign: String,
    #[serde(default)]
    pub alpha: BTreeMap<String, [f64; 2]>,
    #[serde(default)]
    pub beta: BTreeMap<String, [f64; 2]>,
    #[serde(default = "default_one")]
    pub default: Option<[f64; 2]>,
}

fn default_one() -> Option<[f64; 2]> {
    Some([1.0, 0.0])
}

/// Config-level errors for the JSON schema.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum AZeroConfigError {
    #[error("sequence key {0:?} is not an integer site")]
    BadSiteKey(String),
    #[error("sign must be \"+\" or \"-\", got {0:?}")]
    BadSign(String),
    #[error(transparent)]
    Spec(#[from] AZeroError),
}

impl AZeroConfig {
    pub fn into_spec(self) -> Result<AZeroSpec, AZeroConfigError> {
        let sign = match self.sign.as_str() {
            "+" => BranchSign::Plus,
            // accept the ASCII hyphen and the typographic minus sign
            "-" | "\u{2212}" => BranchSign::Minus,
            other => return Err(AZeroConfigError::BadSign(other.to_string())),
        };
        let parse_map = |map: BTreeMap<String, [f64; 2]>| {
            map.into_iter()
                .map(|(key, [re, im])| {
                    key.trim()
                        .parse::<i64>()
                        .map(|site| (site, Complex64::new(re, im)))
                        .map_err(|_| AZeroConfigError::BadSiteKey(key))
                })
                .collect::<Result<BTreeMap<_, _>, _>>()
        };
        let alpha = parse_map(self.alpha)?;
        let beta = parse_map(self.beta)?;
        let spec = AZeroSpec::new(
            self.eta,
            Complex64::new(self.delta[0], self.delta[1]),
            sign,
            alpha,
            beta,
            self.default.map(|[re, im]| Complex64::new(re, im)),
        )?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{evolve, to_measure};
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
    const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

    fn simple_spec(sign: BranchSign) -> AZeroSpec {
        AZeroSpec::constant(0.0, ONE, sign).unwrap()
    }

    #[test]
    fn lambda_of_unit_delta() {
        assert_eq!(azero_lambda(&simple_spec(BranchSign::Plus)), I);
        assert_eq!(azero_lambda(&simple_spec(BranchSign::Minus)), -I);
    }

    #[test]
    fn lambda_of_quarter_turn_delta() {
        // △ = e^{iπ/2}: λ₊ = i·e^{iπ/4} = e^{i3π/4}.
        let spec = AZeroSpec::constant(0.0, I, BranchSign::Plus).unwrap();
        let want = Complex64::from_polar(1.0, 3.0 * FRAC_PI_2 / 2.0);
        assert!((azero_lambda(&spec) - want).norm() < 1e-15);
    }

    #[test]
    fn lambda_squared_is_minus_delta() {
        for sign in [BranchSign::Plus, BranchSign::Minus] {
            for arg in [0.0, 0.7, 2.0, 4.5, 6.0] {
                let delta = Complex64::from_polar(1.0, arg);
                let spec = AZeroSpec::constant(0.3, delta, sign).unwrap();
                let lambda = azero_lambda(&spec);
                assert!(
                    (lambda * lambda + delta).norm() < 1e-12,
                    "sign {sign:?}, arg {arg}"
                );
            }
        }
    }

    #[test]
    fn constant_sequences_give_uniform_two() {
        let spec = simple_spec(BranchSign::Plus);
        let measure = azero_measure(&spec).unwrap();
        for x in -9..=9 {
            assert_eq!(measure.eval(x), 2.0);
        }
    }

    #[test]
    fn modified_origin_measure() {
        // α₀ = 1, β₀ = 2, everything else 1: μ(0) = 5, μ(−1) = 5, μ(1) = 2.
        let mut beta = BTreeMap::new();
        beta.insert(0, c(2.0, 0.0));
        let spec = AZeroSpec::new(
            0.0,
            ONE,
            BranchSign::Plus,
            BTreeMap::new(),
            beta,
            Some(ONE),
        )
        .unwrap();
        let measure = azero_measure(&spec).unwrap();
        assert_eq!(measure.eval(0), 5.0);
        assert_eq!(measure.eval(-1), 5.0);
        assert_eq!(measure.eval(1), 2.0);
        assert_eq!(measure.eval(2), 2.0);
        assert_eq!(measure.eval(-2), 2.0);
    }

    #[test]
    fn zero_entry_rejected() {
        let mut alpha = BTreeMap::new();
        alpha.insert(4, c(0.0, 0.0));
        let err = AZeroSpec::new(
            0.0,
            ONE,
            BranchSign::Plus,
            alpha,
            BTreeMap::new(),
            Some(ONE),
        )
        .unwrap_err();
        assert_eq!(
            err,
            AZeroError::ZeroProduct {
                site: 4,
                which: 'α'
            }
        );
    }

    #[test]
    fn odd_key_rejected() {
        let mut alpha = BTreeMap::new();
        alpha.insert(3, ONE);
        let err = AZeroSpec::new(
            0.0,
            ONE,
            BranchSign::Plus,
            alpha,
            BTreeMap::new(),
            Some(ONE),
        )
        .unwrap_err();
        assert_eq!(err, AZeroError::OddSiteKey { site: 3 });
    }

    #[test]
    fn non_unit_delta_rejected() {
        let err = AZeroSpec::constant(0.0, c(2.0, 0.0), BranchSign::Plus).unwrap_err();
        assert!(matches!(err, AZeroError::DeltaNotUnit { .. }));
    }

    #[test]
    fn missing_default_blocks_generator() {
        let mut map = BTreeMap::new();
        map.insert(0, ONE);
        let spec = AZeroSpec::new(0.0, ONE, BranchSign::Plus, map.clone(), map, None).unwrap();
        assert_eq!(
            build_stationary_azero(&spec).unwrap_err(),
            AZeroError::MissingSequenceValue { site: 2 }
        );
        assert_eq!(
            spec.sample(-4, 4).unwrap_err(),
            AZeroError::MissingSequenceValue { site: -4 }
        );
        // odd neighbors reach one even site further out, so only the
        // even site itself is fully covered
        assert_eq!(
            spec.sample(-1, 1).unwrap_err(),
            AZeroError::MissingSequenceValue { site: -2 }
        );
        assert!(spec.sample(0, 0).is_ok());
    }

    #[test]
    fn eigen_equation_holds() {
        for sign in [BranchSign::Plus, BranchSign::Minus] {
            let mut alpha = BTreeMap::new();
            let mut beta = BTreeMap::new();
            for x in -6..=6 {
                alpha.insert(2 * x, c(0.5 + 0.1 * x as f64, 0.3));
                beta.insert(2 * x, c(1.0, -0.2 * x as f64));
            }
            let spec = AZeroSpec::new(
                0.9,
                Complex64::from_polar(1.0, 1.7),
                sign,
                alpha,
                beta,
                Some(ONE),
            )
            .unwrap();
            let coin = spec.coin();
            let lambda = azero_lambda(&spec);
            for x in -8i64..=8 {
                let here = spec.amplitude_at(x).unwrap();
                let up = spec.amplitude_at(x + 1).unwrap();
                let down = spec.amplitude_at(x - 1).unwrap();
                let left = (lambda * here.left - coin.a() * up.left - coin.b() * up.right).norm();
                let right =
                    (lambda * here.right - coin.c() * down.left - coin.d() * down.right).norm();
                assert!(left < 1e-12, "sign {sign:?} x={x}: {left:.2e}");
                assert!(right < 1e-12, "sign {sign:?} x={x}: {right:.2e}");
            }
        }
    }

    #[test]
    fn analytic_measure_matches_sampled_bitwise() {
        // η = 0, △ = 1: every phase factor is exactly ±i, so the sampled
        // and analytic measures agree bit for bit.
        let mut alpha = BTreeMap::new();
        let mut beta = BTreeMap::new();
        for x in -10..=10 {
            alpha.insert(2 * x, c(0.3 * x as f64 + 1.5, 0.7));
            beta.insert(2 * x, c(-0.9, 0.11 * x as f64 + 2.0));
        }
        for sign in [BranchSign::Plus, BranchSign::Minus] {
            let spec =
                AZeroSpec::new(0.0, ONE, sign, alpha.clone(), beta.clone(), Some(ONE)).unwrap();
            let sampled = to_measure(&spec.sample(-15, 15).unwrap());
            let analytic = azero_measure(&spec).unwrap();
            for x in -15..=15 {
                assert_eq!(
                    sampled.get(x).unwrap(),
                    analytic.eval(x),
                    "sign {sign:?} site {x}"
                );
            }
        }
    }

    #[test]
    fn measure_is_time_invariant() {
        let mut alpha = BTreeMap::new();
        for x in -4i64..=4 {
            alpha.insert(2 * x, c(1.0 + x.abs() as f64, 0.0));
        }
        let spec = AZeroSpec::new(
            0.4,
            Complex64::from_polar(1.0, 2.2),
            BranchSign::Plus,
            alpha,
            BTreeMap::new(),
            Some(ONE),
        )
        .unwrap();
        let coin = spec.coin();
        let gen = build_stationary_azero(&spec).unwrap();
        let base = to_measure(&evolve(&coin, &gen, 0, -6, 6).unwrap());
        for n in [1, 2, 17, 100] {
            let later = to_measure(&evolve(&coin, &gen, n, -6, 6).unwrap());
            assert!(
                base.max_abs_diff(&later) < 1e-10,
                "n={n}: {:.2e}",
                base.max_abs_diff(&later)
            );
        }
    }

    #[test]
    fn measure_locality() {
        // Changing β at one even site moves μ only there and at the odd
        // site below it.
        let base = simple_spec(BranchSign::Plus);
        let mut beta = BTreeMap::new();
        beta.insert(6, c(3.0, 0.0));
        let bumped = AZeroSpec::new(
            0.0,
            ONE,
            BranchSign::Plus,
            BTreeMap::new(),
            beta,
            Some(ONE),
        )
        .unwrap();
        let m0 = azero_measure(&base).unwrap();
        let m1 = azero_measure(&bumped).unwrap();
        for x in -12..=12 {
            if x == 6 || x == 5 {
                assert!(m0.eval(x) != m1.eval(x), "site {x} should differ");
            } else {
                assert_eq!(m0.eval(x), m1.eval(x), "site {x} should not move");
            }
        }
    }

    #[test]
    fn config_parses_and_validates() {
        let json = r#"{
            "eta": 0.0,
            "delta": [1.0, 0.0],
            "sign": "+",
            "alpha": {"0": [1.0, 0.0], "-2": [2.0, 0.0]},
            "beta": {"0": [2.0, 0.0]}
        }"#;
        let config: AZeroConfig = serde_json::from_str(json).unwrap();
        let spec = config.into_spec().unwrap();
        assert_eq!(spec.alpha_at(-2).unwrap(), c(2.0, 0.0));
        assert_eq!(spec.alpha_at(10).unwrap(), ONE); // default kicks in

        let json_null_default = r#"{
            "eta": 0.0, "delta": [1.0, 0.0], "sign": "-",
            "alpha": {"0": [1.0, 0.0]}, "beta": {"0": [1.0, 0.0]},
            "default": null
        }"#;
        let spec = serde_json::from_str::<AZeroConfig>(json_null_default)
            .unwrap()
            .into_spec()
            .unwrap();
        assert!(matches!(
            spec.alpha_at(4),
            Err(AZeroError::MissingSequenceValue { site: 4 })
        ));

        let bad_sign = r#"{"eta": 0.0, "delta": [1.0, 0.0], "sign": "x"}"#;
        assert!(matches!(
            serde_json::from_str::<AZeroConfig>(bad_sign)
                .unwrap()
                .into_spec(),
            Err(AZeroConfigError::BadSign(_))
        ));

        let bad_key = r#"{"eta": 0.0, "delta": [1.0, 0.0], "sign": "+",
                          "alpha": {"two": [1.0, 0.0]}}"#;
        assert!(matches!(
            serde_json::from_str::<AZeroConfig>(bad_key)
                .unwrap()
                .into_spec(),
            Err(AZeroConfigError::BadSiteKey(_))
        ));
    }

    #[test]
    fn minus_sign_unicode_accepted() {
        let json = "{\"eta\": 0.0, \"delta\": [1.0, 0.0], \"sign\": \"\u{2212}\"}";
        let spec = serde_json::from_str::<AZeroConfig>(json)
            .unwrap()
            .into_spec()
            .unwrap();
        assert_eq!(spec.sign(), BranchSign::Minus);
    }

    #[test]
    fn max_modulus_reports_largest_entry() {
        let mut alpha = BTreeMap::new();
        alpha.insert(0, c(0.0, 2.5e6));
        let spec = AZeroSpec::new(
            0.0,
            ONE,
            BranchSign::Plus,
            alpha,
            BTreeMap::new(),
            Some(ONE),
        )
        .unwrap();
        assert!((spec.max_modulus() - 2.5e6).abs() < 1.0);
    }
}
