//! Walks with N internal states: jump components and the uniform family.
//!
//! An N×N unitary coin splits by rows into `U = Σ_k U_k`, where `U_k`
//! keeps row `k` and zeroes the rest. Component `k` carries the walker a
//! fixed signed distance: for `N = 2M+1` the offsets are `−M..=M`
//! (the middle component is a self-loop), for `N = 2M` they are
//! `−M..=M` with `0` excluded. One step reads
//!
//! ```text
//! Ψ_{n+1}(x) = Σ_k U_k Ψ_n(x − offset_k),
//! ```
//!
//! which for `N = 2` is exactly the two-state walk.
//!
//! A position-independent initial state `Ψ₀(x) = φ` evolves as
//! `Ψ_n(x) = Uⁿφ` at every site, so its measure stays pinned at `‖φ‖²`
//! by unitarity alone: every uniform measure is stationary, for every
//! unitary coin of every size. [`uniform_stationary_check`] verifies this
//! numerically by brute-force windowed evolution.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Deserialize;
use thiserror::Error;

use crate::coin::UnitaryCoin;
use crate::lattice::Measure;

/// Unitarity tolerance for N×N coins.
pub const NSTATE_UNITARITY_TOL: f64 = 1e-9;
/// A uniform-measure deviation below this counts as stationary.
pub const UNIFORM_CHECK_TOL: f64 = 1e-12;

/// Errors from N-state coins and evolution.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum NStateError {
    #[error("matrix is not unitary: max residual {residual:.3e}")]
    NotUnitary { residual: f64 },
    #[error("coin must be at least 2x2, got {0}x{0}")]
    TooSmall(usize),
    #[error("entries have length {got}, expected {want}")]
    BadShape { got: usize, want: usize },
    #[error("field window [{lo}, {hi}] too small to shrink by {margin} per side")]
    WindowTooSmall { lo: i64, hi: i64, margin: i64 },
    #[error("initial chirality vector has zero norm")]
    ZeroState,
    #[error("chirality vector has {got} components, coin expects {want}")]
    BadVector { got: usize, want: usize },
}

/// An N×N unitary coin with the jump offset of each row component.
#[derive(Debug, Clone, PartialEq)]
pub struct NStateCoin {
    n: usize,
    entries: Vec<Complex64>, // row-major
    offsets: Vec<i64>,
}

/// Jump offsets for an N-state coin: `−M..=M` for odd `N = 2M+1`,
/// the same range without `0` for even `N = 2M`.
pub fn jump_offsets(n: usize) -> Vec<i64> {
    let m = (n / 2) as i64;
    if n % 2 == 1 {
        (-m..=m).collect()
    } else {
        (-m..=m).filter(|&o| o != 0).collect()
    }
}

impl NStateCoin {
    /// Validate row-major entries as an N×N unitary matrix.
    pub fn new(n: usize, entries: Vec<Complex64>) -> Result<Self, NStateError> {
        if n < 2 {
            return Err(NStateError::TooSmall(n));
        }
        if entries.len() != n * n {
            return Err(NStateError::BadShape {
                got: entries.len(),
                want: n * n,
            });
        }
        let coin = NStateCoin {
            n,
            entries,
            offsets: jump_offsets(n),
        };
        let residual = coin.unitarity_residual();
        if !residual.is_finite() || residual > NSTATE_UNITARITY_TOL {
            return Err(NStateError::NotUnitary { residual });
        }
        Ok(coin)
    }

    /// A Haar-style random unitary: fill with independent complex
    /// Gaussians, then orthonormalize the columns. Deterministic under a
    /// fixed seed.
    pub fn random(n: usize, seed: u64) -> Result<Self, NStateError> {
        if n < 2 {
            return Err(NStateError::TooSmall(n));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gauss = || -> f64 { StandardNormal.sample(&mut rng) };
        let mut columns: Vec<Vec<Complex64>> = (0..n)
            .map(|_| (0..n).map(|_| Complex64::new(gauss(), gauss())).collect())
            .collect();
        // modified Gram-Schmidt, two passes for orthogonality at eps scale
        for j in 0..n {
            for _ in 0..2 {
                for k in 0..j {
                    let proj: Complex64 = columns[k]
                        .iter()
                        .zip(&columns[j])
                        .map(|(p, v)| p.conj() * v)
                        .sum();
                    let prev = columns[k].clone();
                    for (value, p) in columns[j].iter_mut().zip(&prev) {
                        *value -= proj * p;
                    }
                }
            }
            let norm: f64 = columns[j].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            for value in &mut columns[j] {
                *value /= norm;
            }
        }
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for (j, column) in columns.iter().enumerate() {
            for i in 0..n {
                entries[i * n + j] = column[i];
            }
        }
        Self::new(n, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.n + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// The jump offset of each row component.
    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    /// Largest entry of `|U†U − I|`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut sum = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    sum += self.entry(k, i).conj() * self.entry(k, j);
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((sum - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// Apply the full coin to a chirality vector.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>, NStateError> {
        if v.len() != self.n {
            return Err(NStateError::BadVector {
                got: v.len(),
                want: self.n,
            });
        }
        Ok((0..self.n)
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &vj) in v.iter().enumerate() {
                    acc += self.entry(i, j) * vj;
                }
                acc
            })
            .collect())
    }

    /// View a 2×2 coin as a [`UnitaryCoin`].
    pub fn as_two_state(&self) -> Option<UnitaryCoin> {
        if self.n != 2 {
            return None;
        }
        UnitaryCoin::new(
            self.entries[0],
            self.entries[1],
            self.entries[2],
            self.entries[3],
        )
        .ok()
    }
}

/// Split a coin into its N row components `U_k` (full N×N matrices with
/// one nonzero row each); they sum back to `U` entry-for-entry.
pub fn split_nstate(coin: &NStateCoin) -> Vec<Vec<Complex64>> {
    let n = coin.n();
    (0..n)
        .map(|k| {
            let mut m = vec![Complex64::new(0.0, 0.0); n * n];
            for j in 0..n {
                m[k * n + j] = coin.entry(k, j);
            }
            m
        })
        .collect()
}

/// A window of N-component amplitudes, one vector per site.
#[derive(Debug, Clone, PartialEq)]
pub struct NStateField {
    lo: i64,
    comps: usize,
    values: Vec<Complex64>, // site-major
}

impl NStateField {
    /// The same chirality vector at every site of `[lo, hi]`.
    pub fn constant(phi: &[Complex64], lo: i64, hi: i64) -> Result<Self, NStateError> {
        if hi < lo {
            return Err(NStateError::WindowTooSmall { lo, hi, margin: 0 });
        }
        let sites = (hi - lo + 1) as usize;
        let mut values = Vec::with_capacity(sites * phi.len());
        for _ in 0..sites {
            values.extend_from_slice(phi);
        }
        Ok(NStateField {
            lo,
            comps: phi.len(),
            values,
        })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + (self.values.len() / self.comps) as i64 - 1
    }

    pub fn components(&self) -> usize {
        self.comps
    }

    /// The amplitude vector at site `x`.
    pub fn site(&self, x: i64) -> Option<&[Complex64]> {
        if x < self.lo || x > self.hi() {
            return None;
        }
        let start = (x - self.lo) as usize * self.comps;
        Some(&self.values[start..start + self.comps])
    }

    /// `μ(x) = Σ_i |Ψ_i(x)|²` on the same window.
    pub fn to_measure(&self) -> Measure {
        let values = (self.lo..=self.hi())
            .map(|x| self.site(x).unwrap().iter().map(|v| v.norm_sqr()).sum())
            .collect();
        Measure::from_values(self.lo, values).expect("field windows are nonempty")
    }
}

/// One step of the N-state walk: component `i` of the new vector at `x`
/// is row `i` of `U` applied to the vector at `x − offset_i`. The window
/// shrinks by the largest offset magnitude on each side, keeping every
/// returned value exact.
pub fn nstate_step(coin: &NStateCoin, field: &NStateField) -> Result<NStateField, NStateError> {
    if field.components() != coin.n() {
        return Err(NStateError::BadVector {
            got: field.components(),
            want: coin.n(),
        });
    }
    let margin = coin.offsets().iter().map(|o| o.abs()).max().unwrap();
    let (lo, hi) = (field.lo(), field.hi());
    if hi - lo < 2 * margin {
        return Err(NStateError::WindowTooSmall { lo, hi, margin });
    }
    let n = coin.n();
    let mut values = Vec::with_capacity(((hi - lo + 1 - 2 * margin) * n as i64) as usize);
    for x in lo + margin..=hi - margin {
        for i in 0..n {
            let source = field.site(x - coin.offsets()[i]).unwrap();
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &vj) in source.iter().enumerate() {
                acc += coin.entry(i, j) * vj;
            }
            values.push(acc);
        }
    }
    Ok(NStateField {
        lo: lo + margin,
        comps: n,
        values,
    })
}

/// Outcome of the uniform-measure stationarity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformCheck {
    /// `‖φ‖²`, the uniform measure value being tracked.
    pub norm_sq: f64,
    /// `max_{n ≤ steps, x ∈ window} |μ_n(x) − ‖φ‖²|`.
    pub max_deviation: f64,
    pub steps: usize,
    /// `max_deviation < 1e−12`.
    pub passed: bool,
}

/// Evolve the constant-`φ` state `n_max` steps and report the worst
/// deviation of the measure from `‖φ‖²` over the window `[lo, hi]`.
pub fn uniform_stationary_check(
    coin: &NStateCoin,
    phi: &[Complex64],
    n_max: usize,
    lo: i64,
    hi: i64,
) -> Result<UniformCheck, NStateError> {
    if phi.len() != coin.n() {
        return Err(NStateError::BadVector {
            got: phi.len(),
            want: coin.n(),
        });
    }
    let norm_sq: f64 = phi.iter().map(|v| v.norm_sqr()).sum();
    if norm_sq == 0.0 {
        return Err(NStateError::ZeroState);
    }
    if hi < lo {
        return Err(NStateError::WindowTooSmall { lo, hi, margin: 0 });
    }
    let margin = coin.offsets().iter().map(|o| o.abs()).max().unwrap();
    let pad = margin * n_max as i64;
    let mut field = NStateField::constant(phi, lo - pad, hi + pad)?;
    let mut worst: f64 = 0.0;
    let mut scan = |field: &NStateField| {
        for x in lo..=hi {
            let mu: f64 = field.site(x).unwrap().iter().map(|v| v.norm_sqr()).sum();
            let dev = (mu - norm_sq).abs();
            if dev > worst {
                worst = dev;
            }
        }
    };
    scan(&field);
    for _ in 0..n_max {
        field = nstate_step(coin, &field)?;
        scan(&field);
    }
    Ok(UniformCheck {
        norm_sq,
        max_deviation: worst,
        steps: n_max,
        passed: worst < UNIFORM_CHECK_TOL,
    })
}

/// JSON form of an N-state coin: `entries[i][j] = [re, im]`. Offsets are
/// derived from `n`, never supplied.
#[derive(Debug, Clone, Deserialize)]
pub struct NStateConfig {
    pub n: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl NStateConfig {
    pub fn into_coin(self) -> Result<NStateCoin, NStateError> {
        let n = self.n;
        if self.entries.len() != n || self.entries.iter().any(|row| row.len() != n) {
            return Err(NStateError::BadShape {
                got: self.entries.iter().map(|r| r.len()).sum(),
                want: n * n,
            });
        }
        let entries = self
            .entries
            .into_iter()
            .flatten()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        NStateCoin::new(n, entries)
    }
}

/// A seeded random 2×2 coin with all four entries away from zero, for
/// sweeps over the full-support family. Resamples (deterministically)
/// until the smallest entry modulus clears `1e−4`.
pub fn random_full_support_coin(seed: u64) -> UnitaryCoin {
    for attempt in 0..64 {
        let coin = NStateCoin::random(2, seed.wrapping_add(attempt * 0x9e37_79b9_7f4a_7c15))
            .expect("2x2 random unitary");
        let two_state = coin.as_two_state().expect("2x2 coin");
        let min_entry = [two_state.a(), two_state.b(), two_state.c(), two_state.d()]
            .iter()
            .map(|v| v.norm())
            .fold(f64::INFINITY, f64::min);
        if min_entry > 1e-4 {
            return two_state;
        }
    }
    unreachable!("vanishing entries 64 times in a row is not a thing random unitaries do")
}
