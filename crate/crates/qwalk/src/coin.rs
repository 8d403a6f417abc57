//! Validated 2×2 unitary coins.
//!
//! A coin `U = [a b; c d]` drives the two-state walk. Everything downstream
//! depends on which entries vanish: the stationary-measure constructions
//! split into three classes (all entries nonzero, `a = 0`, `b = 0`), so
//! classification lives here along with the `P + Q` decomposition and the
//! spectral angles `φ`, `ξ` used by the full-support family.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default validation tolerance for the unitarity residuals.
pub const UNITARITY_TOL: f64 = 1e-9;
/// Strict validation tolerance for coins built from closed forms.
pub const UNITARITY_TOL_STRICT: f64 = 1e-12;
/// An entry with modulus below this counts as zero for classification.
pub const CASE_EPS: f64 = 1e-9;
/// Upper edge of the borderline band that triggers [`CoinError::AmbiguousCase`].
const CASE_AMBIGUOUS_BAND: f64 = 1e-6;
/// Round-trip tolerance for [`CoinAngles`].
pub const ANGLE_TOL: f64 = 1e-12;

/// Errors from coin construction, classification, and angle extraction.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum CoinError {
    /// A unitarity residual exceeded the validation tolerance.
    #[error("matrix is not unitary: max residual {residual:.3e} exceeds {tol:.1e}")]
    NotUnitary { residual: f64, tol: f64 },
    /// Entry moduli sit in the borderline band where the three coin classes
    /// cannot be told apart reliably; the caller must perturb the coin.
    #[error("coin classification is ambiguous: |{entry}| = {modulus:.3e} is borderline")]
    AmbiguousCase { entry: char, modulus: f64 },
    /// The operation is only defined for a different coin class.
    #[error("operation requires a {required:?} coin, got {actual:?}")]
    WrongCase { required: CoinCase, actual: CoinCase },
    /// A preset string could not be parsed.
    #[error("unknown coin preset: {0}")]
    BadPreset(String),
}

/// A validated 2×2 unitary coin with its determinant cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryCoin {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
    det: Complex64,
}

/// Which of the three structural classes a coin belongs to.
///
/// Unitarity ties the entry moduli pairwise (`|a| = |d|`, `|b| = |c|`), so
/// the three tags are exhaustive and mutually exclusive for valid coins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoinCase {
    /// All four entries nonzero.
    FullSupport,
    /// Anti-diagonal coin (`a = d = 0`).
    AZero,
    /// Diagonal coin (`b = c = 0`).
    BZero,
}

/// The spectral angles of a full-support coin: `cos φ = |a|` with
/// `φ ∈ (0, π/2)`, and `△ = e^{iξ}` with `ξ ∈ [0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinAngles {
    pub phi: f64,
    pub xi: f64,
}

/// The move-left / move-right split `U = P + Q`.
///
/// `P` keeps the top row of `U` (amplitude arriving from the right), `Q`
/// keeps the bottom row (amplitude arriving from the left).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinHalves {
    pub p: [[Complex64; 2]; 2],
    pub q: [[Complex64; 2]; 2],
}

/// JSON form of a coin: each entry as a `[re, im]` pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoinConfig {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub c: [f64; 2],
    pub d: [f64; 2],
}

impl CoinConfig {
    /// Validate the configured entries into a coin at the given tolerance.
    pub fn into_coin(self, tol: f64) -> Result<UnitaryCoin, CoinError> {
        UnitaryCoin::with_tolerance(
            Complex64::new(self.a[0], self.a[1]),
            Complex64::new(self.b[0], self.b[1]),
            Complex64::new(self.c[0], self.c[1]),
            Complex64::new(self.d[0], self.d[1]),
            tol,
        )
    }
}

impl From<&UnitaryCoin> for CoinConfig {
    fn from(u: &UnitaryCoin) -> Self {
        CoinConfig {
            a: [u.a.re, u.a.im],
            b: [u.b.re, u.b.im],
            c: [u.c.re, u.c.im],
            d: [u.d.re, u.d.im],
        }
    }
}

impl UnitaryCoin {
    /// Validate the entries as a unitary matrix at the default tolerance.
    pub fn new(
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
    ) -> Result<Self, CoinError> {
        Self::with_tolerance(a, b, c, d, UNITARITY_TOL)
    }

    /// Validate at a caller-chosen tolerance (e.g. [`UNITARITY_TOL_STRICT`]).
    pub fn with_tolerance(
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
        tol: f64,
    ) -> Result<Self, CoinError> {
        let residual = unitarity_residual(a, b, c, d);
        if !residual.is_finite() || residual > tol {
            return Err(CoinError::NotUnitary { residual, tol });
        }
        Ok(UnitaryCoin {
            a,
            b,
            c,
            d,
            det: a * d - b * c,
        })
    }

    /// Project an almost-unitary matrix onto the nearest unitary (the
    /// unitary polar factor, in closed form for 2×2) and validate the
    /// result. Intended for sweep inputs with rounded decimal entries;
    /// rejects matrices that are singular or too far from unitary.
    pub fn repaired(
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
    ) -> Result<Self, CoinError> {
        // H = M†M is Hermitian positive semi-definite; with s = √det H and
        // t = tr H, √H = (H + sI)/√(t + 2s) and det √H = s, so
        // H^{-1/2} = adj(√H)/s. The polar factor is M·H^{-1/2}.
        let h11 = a.conj() * a + c.conj() * c;
        let h12 = a.conj() * b + c.conj() * d;
        let h21 = b.conj() * a + d.conj() * c;
        let h22 = b.conj() * b + d.conj() * d;
        let det_h = (h11 * h22 - h12 * h21).re;
        let tr_h = (h11 + h22).re;
        if det_h.is_nan() || det_h <= 0.0 || !tr_h.is_finite() {
            return Err(CoinError::NotUnitary {
                residual: f64::INFINITY,
                tol: UNITARITY_TOL,
            });
        }
        let s = det_h.sqrt();
        let scale = (tr_h + 2.0 * s).sqrt();
        let r11 = (h11 + s) / scale;
        let r12 = h12 / scale;
        let r21 = h21 / scale;
        let r22 = (h22 + s) / scale;
        // inverse of √H, scaled by 1/s = 1/det(√H)
        let i11 = r22 / s;
        let i12 = -r12 / s;
        let i21 = -r21 / s;
        let i22 = r11 / s;
        Self::new(
            a * i11 + b * i21,
            a * i12 + b * i22,
            c * i11 + d * i21,
            c * i12 + d * i22,
        )
    }

    /// The Hadamard coin `(1/√2)[1 1; 1 −1]`.
    pub fn hadamard() -> Self {
        let s = FRAC_1_SQRT_2;
        UnitaryCoin {
            a: Complex64::new(s, 0.0),
            b: Complex64::new(s, 0.0),
            c: Complex64::new(s, 0.0),
            d: Complex64::new(-s, 0.0),
            det: Complex64::new(-1.0, 0.0),
        }
    }

    /// The rotation family `[cos θ  sin θ; sin θ  −cos θ]`; `θ = π/4`
    /// recovers the Hadamard coin.
    pub fn rotation(theta: f64) -> Self {
        let (sin, cos) = theta.sin_cos();
        UnitaryCoin {
            a: Complex64::new(cos, 0.0),
            b: Complex64::new(sin, 0.0),
            c: Complex64::new(sin, 0.0),
            d: Complex64::new(-cos, 0.0),
            det: Complex64::new(-1.0, 0.0),
        }
    }

    /// The phase-twisted Hadamard family `(1/√2)[1 e^{iσ}; e^{−iσ} −1]`.
    pub fn hadamard_twisted(sigma: f64) -> Self {
        let s = FRAC_1_SQRT_2;
        let phase = Complex64::from_polar(s, sigma);
        UnitaryCoin {
            a: Complex64::new(s, 0.0),
            b: phase,
            c: phase.conj(),
            d: Complex64::new(-s, 0.0),
            det: Complex64::new(-1.0, 0.0),
        }
    }

    /// The general anti-diagonal coin `[0 e^{iη}; −△e^{−iη} 0]` with
    /// `△ = e^{iξ}`.
    pub fn anti_diagonal(eta: f64, xi: f64) -> Self {
        let b = Complex64::from_polar(1.0, eta);
        let c = -Complex64::from_polar(1.0, xi - eta);
        UnitaryCoin {
            a: Complex64::new(0.0, 0.0),
            b,
            c,
            d: Complex64::new(0.0, 0.0),
            det: -b * c,
        }
    }

    /// The general diagonal coin `[e^{iη} 0; 0 △e^{−iη}]` with `△ = e^{iξ}`.
    pub fn diagonal(eta: f64, xi: f64) -> Self {
        let a = Complex64::from_polar(1.0, eta);
        let d = Complex64::from_polar(1.0, xi - eta);
        UnitaryCoin {
            a,
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d,
            det: a * d,
        }
    }

    /// Parse a named preset: `hadamard`, `u-theta:<radians>`,
    /// `h-sigma:<radians>`, `azero:<eta>:<xi>`, or `bzero:<eta>:<xi>`.
    pub fn from_preset(name: &str) -> Result<Self, CoinError> {
        let bad = || CoinError::BadPreset(name.to_string());
        let mut parts = name.split(':');
        let head = parts.next().ok_or_else(bad)?;
        let angle = |p: Option<&str>| -> Result<f64, CoinError> {
            p.and_then(|s| s.trim().parse::<f64>().ok()).ok_or_else(bad)
        };
        let coin = match head {
            "hadamard" => Self::hadamard(),
            "u-theta" => Self::rotation(angle(parts.next())?),
            "h-sigma" => Self::hadamard_twisted(angle(parts.next())?),
            "azero" => {
                let eta = angle(parts.next())?;
                let xi = angle(parts.next())?;
                Self::anti_diagonal(eta, xi)
            }
            "bzero" => {
                let eta = angle(parts.next())?;
                let xi = angle(parts.next())?;
                Self::diagonal(eta, xi)
            }
            _ => return Err(bad()),
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(coin)
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    pub fn c(&self) -> Complex64 {
        self.c
    }

    pub fn d(&self) -> Complex64 {
        self.d
    }

    /// The cached determinant `△ = ad − bc` (unit modulus).
    pub fn det(&self) -> Complex64 {
        self.det
    }

    /// Largest of the four unitarity residuals (row norms, row
    /// orthogonality, determinant modulus).
    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(self.a, self.b, self.c, self.d)
    }

    /// Apply the coin to a chirality vector `(l, r)`.
    pub fn apply(&self, l: Complex64, r: Complex64) -> (Complex64, Complex64) {
        (self.a * l + self.b * r, self.c * l + self.d * r)
    }

    /// Classify the coin into one of the three structural cases.
    ///
    /// An entry counts as zero when its modulus is below [`CASE_EPS`]. If
    /// one entry of a tied pair (`a`/`d` or `b`/`c`) is below [`CASE_EPS`]
    /// while its partner sits in the borderline band just above, the coin
    /// is rejected as ambiguous rather than silently classified.
    pub fn classify(&self) -> Result<CoinCase, CoinError> {
        let (ma, mb, mc, md) = (
            self.a.norm(),
            self.b.norm(),
            self.c.norm(),
            self.d.norm(),
        );
        let borderline = |partner: f64| (CASE_EPS..CASE_AMBIGUOUS_BAND).contains(&partner);
        if ma < CASE_EPS && borderline(md) {
            return Err(CoinError::AmbiguousCase {
                entry: 'd',
                modulus: md,
            });
        }
        if md < CASE_EPS && borderline(ma) {
            return Err(CoinError::AmbiguousCase {
                entry: 'a',
                modulus: ma,
            });
        }
        if mb < CASE_EPS && borderline(mc) {
            return Err(CoinError::AmbiguousCase {
                entry: 'c',
                modulus: mc,
            });
        }
        if mc < CASE_EPS && borderline(mb) {
            return Err(CoinError::AmbiguousCase {
                entry: 'b',
                modulus: mb,
            });
        }
        if ma < CASE_EPS {
            Ok(CoinCase::AZero)
        } else if mb < CASE_EPS {
            Ok(CoinCase::BZero)
        } else {
            Ok(CoinCase::FullSupport)
        }
    }

    /// Split into the left-moving part `P = [a b; 0 0]` and the
    /// right-moving part `Q = [0 0; c d]`; `P + Q` reconstructs `U`
    /// entry-for-entry.
    pub fn decompose(&self) -> CoinHalves {
        let zero = Complex64::new(0.0, 0.0);
        CoinHalves {
            p: [[self.a, self.b], [zero, zero]],
            q: [[zero, zero], [self.c, self.d]],
        }
    }

    /// Extract the spectral angles of a full-support coin.
    pub fn angles(&self) -> Result<CoinAngles, CoinError> {
        let case = self.classify()?;
        if case != CoinCase::FullSupport {
            return Err(CoinError::WrongCase {
                required: CoinCase::FullSupport,
                actual: case,
            });
        }
        let phi = self.a.norm().min(1.0).acos();
        let mut xi = self.det.arg();
        if xi < 0.0 {
            xi += TAU;
        }
        // arg(−1) may land a hair above −π and wrap to just under 2π; fold
        // the seam back so ξ stays in [0, 2π).
        if xi >= TAU {
            xi = 0.0;
        }
        Ok(CoinAngles { phi, xi })
    }
}

impl fmt::Display for UnitaryCoin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{:+.6}{:+.6}i {:+.6}{:+.6}i; {:+.6}{:+.6}i {:+.6}{:+.6}i]",
            self.a.re, self.a.im, self.b.re, self.b.im, self.c.re, self.c.im, self.d.re, self.d.im
        )
    }
}

fn unitarity_residual(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> f64 {
    let row1 = (a.norm_sqr() + b.norm_sqr() - 1.0).abs();
    let row2 = (c.norm_sqr() + d.norm_sqr() - 1.0).abs();
    let ortho = (a * c.conj() + b * d.conj()).norm();
    let det = ((a * d - b * c).norm() - 1.0).abs();
    row1.max(row2).max(ortho).max(det)
}

/// `φ = π/4` and `ξ = π` for the Hadamard coin; handy in tests and docs.
pub const HADAMARD_PHI: f64 = PI / 4.0;
