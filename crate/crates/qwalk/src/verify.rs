//! Numerical verification: residuals, identity checks, stationarity
//! levels, and tail decay classes.
//!
//! Everything here is desk-scale evidence, not proof: residuals of the
//! sitewise eigen-equation, the algebraic identities of the full-support
//! spectrum evaluated at all four eigenvalues, the largest `n` for which
//! a measure is reproduced on a window, and a least-squares decay
//! classifier that tells uniform, polynomial, and exponential tails
//! apart.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::coin::{CoinCase, CoinError, UnitaryCoin};
use crate::lattice::{
    sample_window, step, to_measure, AmplitudeField, LatticeError, Measure, StateGenerator,
};

/// Pass threshold for the algebraic identity sweep.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Pass threshold for eigen-equation residuals of exact constructions.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-12;
/// Default tolerance for measure comparisons in [`membership_check`].
pub const MEMBERSHIP_TOL: f64 = 1e-10;
/// A measure is uniform when `max − min ≤ 1e−9 · max(1, mean)`.
pub const UNIFORM_REL_TOL: f64 = 1e-9;
/// Tail fits use sites with `|x| ≥ 3`.
pub const TAIL_MIN_SITE: i64 = 3;

/// Errors from the verification helpers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum VerifyError {
    #[error(transparent)]
    Coin(#[from] CoinError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("window [{lo}, {hi}] too small: need at least {need} sites")]
    WindowTooSmall { lo: i64, hi: i64, need: usize },
    #[error("decay classification needs a window symmetric about 0, got [{lo}, {hi}]")]
    AsymmetricWindow { lo: i64, hi: i64 },
    #[error("tail value {value} at site {site} is not positive; cannot fit logarithms")]
    NonPositive { site: i64, value: f64 },
}

/// Residuals of one check: the worst eigen-equation violation, its
/// per-site breakdown, and named algebraic identity residuals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub max_eigen_residual: f64,
    pub per_site: BTreeMap<i64, f64>,
    pub identities: BTreeMap<String, f64>,
}

impl ResidualReport {
    /// True when every recorded residual clears its threshold.
    pub fn passes(&self) -> bool {
        self.max_eigen_residual <= EIGEN_RESIDUAL_TOL
            && self.identities.values().all(|&r| r <= IDENTITY_TOL)
    }
}

/// Sitewise residual of the eigen-equation `U^{(s)}Ψ = λΨ` on the
/// interior of the field's window: at each site the larger of
/// `|λΨ^L(x) − aΨ^L(x+1) − bΨ^R(x+1)|` and
/// `|λΨ^R(x) − cΨ^L(x−1) − dΨ^R(x−1)|`.
pub fn eigen_residual(
    coin: &UnitaryCoin,
    lambda: Complex64,
    field: &AmplitudeField,
) -> Result<ResidualReport, VerifyError> {
    let (lo, hi) = (field.lo(), field.hi());
    if hi - lo + 1 < 3 {
        return Err(VerifyError::WindowTooSmall { lo, hi, need: 3 });
    }
    let mut per_site = BTreeMap::new();
    let mut worst: f64 = 0.0;
    for x in lo + 1..=hi - 1 {
        let here = field.get(x).unwrap();
        let up = field.get(x + 1).unwrap();
        let down = field.get(x - 1).unwrap();
        let left = (lambda * here.left - coin.a() * up.left - coin.b() * up.right).norm();
        let right = (lambda * here.right - coin.c() * down.left - coin.d() * down.right).norm();
        let residual = left.max(right);
        per_site.insert(x, residual);
        worst = worst.max(residual);
    }
    Ok(ResidualReport {
        max_eigen_residual: worst,
        per_site,
        identities: BTreeMap::new(),
    })
}

/// The six identity residuals of the full-support spectrum, evaluated at
/// one `λ`. At a true eigenvalue all six vanish; at anything else the
/// double-root discriminants stay far from zero.
pub fn algebraic_checks_at(
    coin: &UnitaryCoin,
    lambda: Complex64,
) -> Result<BTreeMap<String, f64>, VerifyError> {
    require_full_support(coin)?;
    let (a, b, d, det) = (coin.a(), coin.b(), coin.d(), coin.det());
    let sum = lambda + det * lambda.conj();
    let gamma = sum / (2.0 * a);
    let mut identities = BTreeMap::new();
    identities.insert("unit-gamma".to_string(), (gamma.norm() - 1.0).abs());
    identities.insert("gamma-squared".to_string(), (gamma * gamma - d / a).norm());
    // generating-function denominator z² − (1/d)(λ + △λ̄)z + a/d
    let disc_series = (sum / d) * (sum / d) - 4.0 * (a / d);
    identities.insert("double-root-series".to_string(), disc_series.norm());
    // recurrence characteristic polynomial z² − (1/a)(λ + △λ̄)z + d/a
    let disc_recurrence = (sum / a) * (sum / a) - 4.0 * (d / a);
    identities.insert("double-root-recurrence".to_string(), disc_recurrence.norm());
    let half_diff = lambda - det * lambda.conj();
    identities.insert(
        "half-diff-modulus".to_string(),
        (half_diff.norm_sqr() / (4.0 * b.norm_sqr()) - 1.0).abs(),
    );
    let cos_two_phi = 2.0 * a.norm_sqr() - 1.0;
    identities.insert(
        "cos2phi".to_string(),
        ((det * lambda.conj() * lambda.conj()).re - cos_two_phi).abs(),
    );
    Ok(identities)
}

/// The identity residuals maximized over the four eigenvalues.
pub fn algebraic_checks(coin: &UnitaryCoin) -> Result<ResidualReport, VerifyError> {
    require_full_support(coin)?;
    let lambdas = crate::spectral::eigen_lambdas(coin).expect("full support was just checked");
    let mut identities: BTreeMap<String, f64> = BTreeMap::new();
    for lambda in lambdas {
        for (name, residual) in algebraic_checks_at(coin, lambda)? {
            let entry = identities.entry(name).or_insert(0.0);
            *entry = entry.max(residual);
        }
    }
    Ok(ResidualReport {
        max_eigen_residual: 0.0,
        per_site: BTreeMap::new(),
        identities,
    })
}

fn require_full_support(coin: &UnitaryCoin) -> Result<(), VerifyError> {
    let case = coin.classify()?;
    if case != CoinCase::FullSupport {
        return Err(CoinError::WrongCase {
            required: CoinCase::FullSupport,
            actual: case,
        }
        .into());
    }
    Ok(())
}

/// The largest `n ≤ n_max` such that the measure of the evolved state
/// matches the initial measure within `tol` on `[lo, hi]` at *every*
/// time `k ≤ n`. The evolution runs once on a window padded by `n_max`,
/// which is exact at every intermediate time.
pub fn membership_check(
    coin: &UnitaryCoin,
    gen: &StateGenerator,
    n_max: usize,
    lo: i64,
    hi: i64,
    tol: f64,
) -> Result<usize, VerifyError> {
    let pad = n_max as i64;
    let mut field = sample_window(gen, lo - pad, hi + pad)?;
    let reference = to_measure(&field.restrict(lo, hi)?);
    for k in 1..=n_max {
        field = step(coin, &field)?;
        let now = to_measure(&field.restrict(lo, hi)?);
        if reference.max_abs_diff(&now) > tol {
            return Ok(k - 1);
        }
    }
    Ok(n_max)
}

/// Window-scale decay classification of a measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayClass {
    /// Constant over the window.
    Uniform,
    /// Tails fit `μ ~ |x|^degree` decisively better than an exponential.
    Polynomial { degree: f64 },
    /// Tails fit `log μ ~ rate·|x|` decisively better than a power law,
    /// with growing tails (`rate > 0`, matching the `γ^{−|x|}`,
    /// `γ ∈ (0,1)` shape).
    Exponential { rate: f64 },
    /// Neither fit dominates, or the exponential slope is negative.
    Other,
}

impl DecayClass {
    pub fn tag(&self) -> &'static str {
        match self {
            DecayClass::Uniform => "uniform",
            DecayClass::Polynomial { .. } => "polynomial",
            DecayClass::Exponential { .. } => "exponential",
            DecayClass::Other => "other",
        }
    }

    /// The degree or rate estimate, when the class carries one.
    pub fn estimate(&self) -> Option<f64> {
        match *self {
            DecayClass::Polynomial { degree } => Some(degree),
            DecayClass::Exponential { rate } => Some(rate),
            _ => None,
        }
    }
}

struct LineFit {
    slope: f64,
    sse: f64,
}

fn fit_line(points: &[(f64, f64)]) -> LineFit {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = mean_y - slope * mean_x;
    let sse = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    LineFit { slope, sse }
}

/// Classify a measure on a window symmetric about the origin (length
/// ≥ 9). The single site `x = 0` is ignored by the tail fits; each tail
/// uses `|x| ≥ 3` and fits `log μ` against both `log |x|` (power law)
/// and `|x|` (exponential). A class wins when its summed squared
/// residual is at most half of the other's.
pub fn decay_classify(measure: &Measure) -> Result<DecayClass, VerifyError> {
    let (lo, hi) = (measure.lo(), measure.hi());
    if hi - lo + 1 < 9 {
        return Err(VerifyError::WindowTooSmall { lo, hi, need: 9 });
    }
    if lo != -hi {
        return Err(VerifyError::AsymmetricWindow { lo, hi });
    }
    let mean = measure.sum() / measure.len() as f64;
    if measure.max() - measure.min() <= UNIFORM_REL_TOL * mean.abs().max(1.0) {
        return Ok(DecayClass::Uniform);
    }

    let mut sse_poly = 0.0;
    let mut sse_exp = 0.0;
    let mut degree = 0.0;
    let mut rate = 0.0;
    for tail in [1i64, -1] {
        let mut log_log: Vec<(f64, f64)> = Vec::new();
        let mut log_lin: Vec<(f64, f64)> = Vec::new();
        for x in TAIL_MIN_SITE..=hi {
            let site = tail * x;
            let value = measure.get(site).unwrap();
            if value <= 0.0 {
                return Err(VerifyError::NonPositive { site, value });
            }
            let dist = x as f64;
            log_log.push((dist.ln(), value.ln()));
            log_lin.push((dist, value.ln()));
        }
        let poly = fit_line(&log_log);
        let exp = fit_line(&log_lin);
        sse_poly += poly.sse;
        sse_exp += exp.sse;
        degree += 0.5 * poly.slope;
        rate += 0.5 * exp.slope;
    }

    if sse_poly <= 0.5 * sse_exp && degree >= 0.5 {
        Ok(DecayClass::Polynomial { degree })
    } else if sse_exp <= 0.5 * sse_poly && rate > 0.0 {
        Ok(DecayClass::Exponential { rate })
    } else {
        Ok(DecayClass::Other)
    }
}

/// The combined report the CLI emits for one verified family:
/// eigen-residual, identity residuals, stationarity level, decay class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub max_eigen_residual: f64,
    pub identities: BTreeMap<String, f64>,
    pub membership_level: usize,
    pub decay: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_estimate: Option<f64>,
}

impl VerifyReport {
    /// Pass = residuals under their thresholds and the membership level
    /// reached the requested maximum.
    pub fn passes(&self, requested_level: usize) -> bool {
        self.max_eigen_residual <= EIGEN_RESIDUAL_TOL
            && self.identities.values().all(|&r| r <= IDENTITY_TOL)
            && self.membership_level >= requested_level
    }
}
