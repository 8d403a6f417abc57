//! Diagonal coins: shift evolution, the uniformity certificate, and two
//! measures that are reproduced once but not twice.
//!
//! A diagonal coin `[e^{iη} 0; 0 △e^{−iη}]` never mixes the chiralities:
//! the left component streams left and the right component streams right,
//! each picking up only a phase. Writing `a_x = |Ψ₀^L(x)|²` and
//! `b_x = |Ψ₀^R(x)|²`, the measure after `n` steps is simply
//!
//! ```text
//! μ_n(x) = a_{x+n} + b_{x−n},
//! ```
//!
//! so stationarity is a pure counting condition on the two nonnegative
//! sequences. For this walk *every* stationary measure is uniform, and
//! holding the measure for two steps already forces it: from `μ₁ = μ₀`
//! the combination `a_{x+2} − a_x = b_{x+1} − b_{x−1}` pins the offsets
//! `c₁ = a₀ − b₋₁`, `c₂ = a₁ − b₀`; adding the `n = 2` constraints makes
//! both parity subsequences of `a` arithmetic with a common drift
//! `A + B` (`A = a₁ − a₀`, `B = a₂ − a₁`); nonnegativity on the whole
//! line forces `A + B = 0`, which collapses everything to period two and
//! finally to the single constant `μ₀(0) = μ₀(1)`.
//!
//! [`uniformity_certificate`] replays exactly that chain on a finite
//! window and reports where it breaks. Holding the measure for *one* step
//! is genuinely weaker: [`counterexample_unbounded`] and
//! [`counterexample_bounded`] both satisfy `μ₀ = μ₁` exactly yet change
//! at `n = 2`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coin::UnitaryCoin;
use crate::lattice::{ChiralPair, Measure, StateGenerator};

/// Default tolerance for the measure constraints and chain identities.
/// The built-in integer and dyadic counterexamples satisfy them exactly.
pub const CERTIFICATE_TOL: f64 = 1e-10;

/// Errors from diagonal-walk states and the certificate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum BZeroError {
    /// The window cannot accommodate the requested check.
    #[error("window [{lo}, {hi}] too small: {why}")]
    WindowTooSmall { lo: i64, hi: i64, why: String },
    /// Squared moduli must be nonnegative and finite.
    #[error("weight at site {site} is {value}; weights must be finite and >= 0")]
    BadWeight { site: i64, value: f64 },
    /// `|△| ≠ 1`.
    #[error("determinant modulus {modulus} is not 1")]
    DeltaNotUnit { modulus: f64 },
    /// The two sequences must cover a common contiguous window.
    #[error("sequences do not cover a common window: {why}")]
    Coverage { why: String },
    /// maxN must be at least 2 for the certificate chain.
    #[error("maxN must be >= 2, got {0}")]
    MaxLevelTooSmall(usize),
}

/// A diagonal-coin walk described by its squared initial moduli
/// `a_x = |Ψ₀^L(x)|²`, `b_x = |Ψ₀^R(x)|²` on a window.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalWalkState {
    eta: f64,
    delta: Complex64,
    lo: i64,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl DiagonalWalkState {
    /// Build from dense per-site weights starting at `lo`; both sequences
    /// span the same window.
    pub fn new(
        eta: f64,
        delta: Complex64,
        lo: i64,
        a: Vec<f64>,
        b: Vec<f64>,
    ) -> Result<Self, BZeroError> {
        if (delta.norm() - 1.0).abs() > 1e-9 {
            return Err(BZeroError::DeltaNotUnit {
                modulus: delta.norm(),
            });
        }
        if a.is_empty() || a.len() != b.len() {
            return Err(BZeroError::Coverage {
                why: format!("a spans {} sites, b spans {}", a.len(), b.len()),
            });
        }
        for seq in [&a, &b] {
            for (i, &v) in seq.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(BZeroError::BadWeight {
                        site: lo + i as i64,
                        value: v,
                    });
                }
            }
        }
        Ok(DiagonalWalkState { eta, delta, lo, a, b })
    }

    /// Build from site-keyed maps; the state covers the intersection of
    /// the two key spans, which must be gap-free.
    pub fn from_maps(
        eta: f64,
        delta: Complex64,
        a: &BTreeMap<i64, f64>,
        b: &BTreeMap<i64, f64>,
    ) -> Result<Self, BZeroError> {
        let span = |m: &BTreeMap<i64, f64>| {
            let lo = *m.keys().next()?;
            let hi = *m.keys().next_back()?;
            Some((lo, hi))
        };
        let (alo, ahi) = span(a).ok_or_else(|| BZeroError::Coverage {
            why: "a is empty".into(),
        })?;
        let (blo, bhi) = span(b).ok_or_else(|| BZeroError::Coverage {
            why: "b is empty".into(),
        })?;
        let lo = alo.max(blo);
        let hi = ahi.min(bhi);
        if lo > hi {
            return Err(BZeroError::Coverage {
                why: format!("a spans [{alo}, {ahi}] but b spans [{blo}, {bhi}]"),
            });
        }
        let fetch = |m: &BTreeMap<i64, f64>, name: &str| {
            (lo..=hi)
                .map(|x| {
                    m.get(&x).copied().ok_or_else(|| BZeroError::Coverage {
                        why: format!("{name} has no value at site {x}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()
        };
        Self::new(eta, delta, lo, fetch(a, "a")?, fetch(b, "b")?)
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.a.len() as i64 - 1
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn delta(&self) -> Complex64 {
        self.delta
    }

    pub fn a_at(&self, x: i64) -> Option<f64> {
        if x < self.lo || x > self.hi() {
            None
        } else {
            Some(self.a[(x - self.lo) as usize])
        }
    }

    pub fn b_at(&self, x: i64) -> Option<f64> {
        if x < self.lo || x > self.hi() {
            None
        } else {
            Some(self.b[(x - self.lo) as usize])
        }
    }

    /// The diagonal coin `[e^{iη} 0; 0 △e^{−iη}]` these phases describe.
    pub fn coin(&self) -> UnitaryCoin {
        let zero = Complex64::new(0.0, 0.0);
        let a = Complex64::from_polar(1.0, self.eta);
        let d = self.delta * Complex64::from_polar(1.0, -self.eta);
        UnitaryCoin::new(a, zero, zero, d).expect("diagonal phases are unitary")
    }

    /// A real amplitude lift `Ψ^L = √a_x, Ψ^R = √b_x` on the window (zero
    /// outside); phases never enter the measure, so the real lift loses
    /// nothing.
    pub fn amplitude_lift(&self) -> StateGenerator {
        let state = self.clone();
        StateGenerator::custom(move |x| match (state.a_at(x), state.b_at(x)) {
            (Some(a), Some(b)) => ChiralPair::new(
                Complex64::new(a.sqrt(), 0.0),
                Complex64::new(b.sqrt(), 0.0),
            ),
            _ => ChiralPair::ZERO,
        })
    }
}

/// `μ_n(x) = a_{x+n} + b_{x−n}` on the shrunken window `[lo+n, hi−n]`.
/// The coin phases drop out of the measure entirely.
pub fn diag_evolve_measure(
    state: &DiagonalWalkState,
    n: usize,
) -> Result<Measure, BZeroError> {
    let (lo, hi) = (state.lo(), state.hi());
    let n = n as i64;
    if lo + n > hi - n {
        return Err(BZeroError::WindowTooSmall {
            lo,
            hi,
            why: format!("no interior left after shifting by n = {n}"),
        });
    }
    let values = (lo + n..=hi - n)
        .map(|x| state.a_at(x + n).unwrap() + state.b_at(x - n).unwrap())
        .collect();
    Ok(Measure::from_values(lo + n, values).expect("weights are finite"))
}

/// The constants of the derivation chain, anchored at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateConstants {
    pub c1: f64,
    pub c2: f64,
    #[serde(rename = "A")]
    pub cap_a: f64,
    #[serde(rename = "B")]
    pub cap_b: f64,
}

/// Outcome of the certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CertificateVerdict {
    /// Every measure constraint and every chain identity held: the window
    /// restriction of the measure is uniform.
    Uniform,
    /// `μ_level` differs from `μ₀` at `site` — the smallest failing level
    /// and its first witness in ascending site order.
    NonStationary { level: usize, site: i64 },
    /// The measure constraints held on the window but a chain identity
    /// failed, so no nonnegative whole-line extension can be stationary;
    /// the window alone cannot certify uniformity.
    Inconclusive { reason: String },
}

/// Certificate report: verdict, derived constants, and the residual of
/// each replayed identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub verdict: CertificateVerdict,
    pub constants: CertificateConstants,
    /// Identity name → max residual over the window (empty when the
    /// measure constraints already failed).
    pub identities: BTreeMap<String, f64>,
    pub tol: f64,
    pub window: [i64; 2],
    pub max_level: usize,
}

impl Certificate {
    pub fn is_uniform(&self) -> bool {
        self.verdict == CertificateVerdict::Uniform
    }
}

/// Check `μ_n = μ₀` for `n = 1..=max_level` and, when the constraints
/// hold, replay the derivation chain at tolerance [`CERTIFICATE_TOL`].
pub fn uniformity_certificate(
    state: &DiagonalWalkState,
    max_level: usize,
) -> Result<Certificate, BZeroError> {
    uniformity_certificate_with_tol(state, max_level, CERTIFICATE_TOL)
}

/// [`uniformity_certificate`] with an explicit tolerance (`0.0` demands
/// exact equality, which integer and dyadic inputs satisfy).
pub fn uniformity_certificate_with_tol(
    state: &DiagonalWalkState,
    max_level: usize,
    tol: f64,
) -> Result<Certificate, BZeroError> {
    if max_level < 2 {
        return Err(BZeroError::MaxLevelTooSmall(max_level));
    }
    let (lo, hi) = (state.lo(), state.hi());
    let len = hi - lo + 1;
    if len < 2 * max_level as i64 + 5 {
        return Err(BZeroError::WindowTooSmall {
            lo,
            hi,
            why: format!(
                "need at least {} sites for maxN = {max_level}",
                2 * max_level + 5
            ),
        });
    }
    // the chain constants are anchored at the origin
    if lo > -1 || hi < 2 {
        return Err(BZeroError::WindowTooSmall {
            lo,
            hi,
            why: "window must contain sites -1..=2 to derive the constants".into(),
        });
    }

    let a = |x: i64| state.a_at(x).unwrap();
    let b = |x: i64| state.b_at(x).unwrap();
    let constants = CertificateConstants {
        c1: a(0) - b(-1),
        c2: a(1) - b(0),
        cap_a: a(1) - a(0),
        cap_b: a(2) - a(1),
    };
    let window = [lo, hi];

    let mu0 = diag_evolve_measure(state, 0).expect("window is nonempty");
    for level in 1..=max_level {
        let mu_n = diag_evolve_measure(state, level)?;
        for (x, value) in mu_n.iter() {
            if (value - mu0.get(x).unwrap()).abs() > tol {
                return Ok(Certificate {
                    verdict: CertificateVerdict::NonStationary { level, site: x },
                    constants,
                    identities: BTreeMap::new(),
                    tol,
                    window,
                    max_level,
                });
            }
        }
    }

    // Replay the chain in derivation order, keeping the max residual of
    // each identity over the window.
    let mut chain: Vec<(&'static str, f64)> = Vec::new();

    let mut even_offset: f64 = 0.0;
    let mut odd_offset: f64 = 0.0;
    for x in lo + 1..=hi {
        if x.rem_euclid(2) == 0 {
            even_offset = even_offset.max((a(x) - b(x - 1) - constants.c1).abs());
        } else {
            odd_offset = odd_offset.max((a(x) - b(x - 1) - constants.c2).abs());
        }
    }
    chain.push(("ab_offset_even", even_offset));
    chain.push(("ab_offset_odd", odd_offset));

    let mut second_even: f64 = 0.0;
    let mut second_odd: f64 = 0.0;
    for x in lo + 1..=hi - 2 {
        let second = (a(x + 2) - a(x + 1)) - (a(x) - a(x - 1));
        if x.rem_euclid(2) == 0 {
            second_even = second_even.max(second.abs());
        } else {
            second_odd = second_odd.max(second.abs());
        }
    }
    chain.push(("second_difference_even", second_even));
    chain.push(("second_difference_odd", second_odd));

    let drift = constants.cap_a + constants.cap_b;
    let mut linear_even: f64 = 0.0;
    let mut linear_odd: f64 = 0.0;
    for x in lo..=hi {
        let k = x.div_euclid(2) as f64;
        if x.rem_euclid(2) == 0 {
            linear_even = linear_even.max((a(x) - (drift * k + a(0))).abs());
        } else {
            linear_odd = linear_odd.max((a(x) - (drift * k + constants.cap_a + a(0))).abs());
        }
    }
    chain.push(("linear_form_even", linear_even));
    chain.push(("linear_form_odd", linear_odd));

    // nonnegativity on the whole line forces zero drift
    chain.push(("drift_zero", drift.abs()));

    let mut period_a: f64 = 0.0;
    let mut period_b: f64 = 0.0;
    for x in lo..=hi {
        let (ra, rb) = if x.rem_euclid(2) == 0 {
            ((a(x) - a(0)).abs(), (b(x) - b(0)).abs())
        } else {
            ((a(x) - a(1)).abs(), (b(x) - b(1)).abs())
        };
        period_a = period_a.max(ra);
        period_b = period_b.max(rb);
    }
    chain.push(("period_two_a", period_a));
    chain.push(("period_two_b", period_b));

    let collapse = (a(0) + b(0) - (a(1) + b(-1)))
        .abs()
        .max((a(0) + b(0) - (a(1) + b(1))).abs());
    chain.push(("parity_collapse", collapse));

    let identities: BTreeMap<String, f64> =
        chain.iter().map(|&(k, v)| (k.to_string(), v)).collect();
    let verdict = match chain.iter().find(|&&(_, residual)| residual > tol) {
        None => CertificateVerdict::Uniform,
        Some(&(name, residual)) => CertificateVerdict::Inconclusive {
            reason: format!(
                "measure constraints hold on the window but identity {name} has residual {residual:.3e}"
            ),
        },
    };
    Ok(Certificate {
        verdict,
        constants,
        identities,
        tol,
        window,
        max_level,
    })
}

fn unbounded_a(x: i64) -> f64 {
    if x >= 1 {
        (2 * x) as f64
    } else if x == 0 {
        1.0
    } else {
        (-2 * x + 1) as f64
    }
}

fn unbounded_b(x: i64) -> f64 {
    if x >= 1 {
        (2 * x + 3) as f64
    } else if x == 0 {
        3.0
    } else {
        (-2 * x) as f64
    }
}

/// The unbounded one-step-stationary example: integer sequences with
/// `μ₀ = μ₁` exactly (`4x+3` for `x ≥ 1`, `4` at the origin, `−4x+1`
/// below) but `μ₂(0) = 8 ≠ 4`.
pub fn counterexample_unbounded(lo: i64, hi: i64) -> Result<DiagonalWalkState, BZeroError> {
    if hi < lo {
        return Err(BZeroError::WindowTooSmall {
            lo,
            hi,
            why: "empty window".into(),
        });
    }
    DiagonalWalkState::new(
        0.0,
        Complex64::new(1.0, 0.0),
        lo,
        (lo..=hi).map(unbounded_a).collect(),
        (lo..=hi).map(unbounded_b).collect(),
    )
}

/// The unbounded example as a whole-line amplitude generator (`√a_x`,
/// `√b_x` with the identity coin).
pub fn counterexample_unbounded_generator() -> StateGenerator {
    StateGenerator::custom(|x| {
        ChiralPair::new(
            Complex64::new(unbounded_a(x).sqrt(), 0.0),
            Complex64::new(unbounded_b(x).sqrt(), 0.0),
        )
    })
}

fn bounded_a(x: i64) -> f64 {
    if x >= 0 {
        // a_{2k} = a_{2k+1} = 1 − 2^{−(k+1)}
        1.0 - 0.5f64.powi((x.div_euclid(2) + 1) as i32)
    } else {
        // a_{−2k} = a_{−2k+1} = 2^{−(k+1)} for k ≥ 1
        let k = (-x + 1).div_euclid(2);
        0.5f64.powi((k + 1) as i32)
    }
}

fn bounded_b(x: i64) -> f64 {
    if x >= -1 {
        // b_{2k+1} = b_{2k+2} = 1 − 2^{−(k+2)} for k ≥ −1
        let k = (x - 1).div_euclid(2);
        1.0 - 0.5f64.powi((k + 2) as i32)
    } else {
        // b_{−2k−1} = b_{−2k} = 2^{−(k+1)} for k ≥ 1
        let k = (-x).div_euclid(2);
        0.5f64.powi((k + 1) as i32)
    }
}

/// The bounded one-step-stationary example: dyadic geometric partial sums
/// with `0 ≤ μ₀ ≤ 2`, strictly increasing, `μ₀ = μ₁` exactly, and
/// `μ₂ ≠ μ₁`.
pub fn counterexample_bounded(lo: i64, hi: i64) -> Result<DiagonalWalkState, BZeroError> {
    if hi < lo {
        return Err(BZeroError::WindowTooSmall {
            lo,
            hi,
            why: "empty window".into(),
        });
    }
    DiagonalWalkState::new(
        0.0,
        Complex64::new(1.0, 0.0),
        lo,
        (lo..=hi).map(bounded_a).collect(),
        (lo..=hi).map(bounded_b).collect(),
    )
}

/// The bounded example as a whole-line amplitude generator.
pub fn counterexample_bounded_generator() -> StateGenerator {
    StateGenerator::custom(|x| {
        ChiralPair::new(
            Complex64::new(bounded_a(x).sqrt(), 0.0),
            Complex64::new(bounded_b(x).sqrt(), 0.0),
        )
    })
}

/// JSON form of a diagonal-walk state: site-keyed weight maps.
#[derive(Debug, Clone, Deserialize)]
pub struct DiagonalStateConfig {
    pub eta: f64,
    pub delta: [f64; 2],
    pub a: BTreeMap<String, f64>,
    pub b: BTreeMap<String, f64>,
}

/// Config-level errors for the JSON schema.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum BZeroConfigError {
    #[error("sequence key {0:?} is not an integer site")]
    BadSiteKey(String),
    #[error(transparent)]
    State(#[from] BZeroError),
}

impl DiagonalStateConfig {
    pub fn into_state(self) -> Result<DiagonalWalkState, BZeroConfigError> {
        let parse = |m: BTreeMap<String, f64>| {
            m.into_iter()
                .map(|(key, value)| {
                    key.trim()
                        .parse::<i64>()
                        .map(|site| (site, value))
                        .map_err(|_| BZeroConfigError::BadSiteKey(key))
                })
                .collect::<Result<BTreeMap<_, _>, _>>()
        };
        let a = parse(self.a)?;
        let b = parse(self.b)?;
        Ok(DiagonalWalkState::from_maps(
            self.eta,
            Complex64::new(self.delta[0], self.delta[1]),
            &a,
            &b,
        )?)
    }
}
