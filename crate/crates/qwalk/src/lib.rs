//! Discrete-time quantum walks on the integer line and their stationary
//! measures.
//!
//! A two-state walk is driven by a 2×2 unitary coin `U = [a b; c d]` split
//! into a left-moving part `P` (top row) and a right-moving part `Q` (bottom
//! row); one step of the walk sends the amplitude pair at each site to
//!
//! ```text
//! Ψ'(x) = P Ψ(x+1) + Q Ψ(x−1).
//! ```
//!
//! The per-site measure is `μ(x) = |Ψ^L(x)|² + |Ψ^R(x)|²`, and a measure is
//! *stationary* when it is reproduced at every later time for some initial
//! state. This crate constructs the known stationary families for the three
//! coin classes (all entries nonzero, anti-diagonal, diagonal), evolves
//! amplitude fields exactly on finite windows via light-cone padding, and
//! verifies every construction numerically: eigen-equation residuals,
//! algebraic identities of the spectrum, window-scale stationarity levels,
//! and tail decay classification.
//!
//! Module map:
//!
//! - [`coin`] — validated 2×2 unitary coins, classification, `P + Q` split.
//! - [`lattice`] — amplitude fields on windows, exact evolution, measures.
//! - [`spectral`] — the quadratic stationary family for coins with all
//!   entries nonzero.
//! - [`azero`] — the alternating family for anti-diagonal coins.
//! - [`bzero`] — diagonal coins: shift evolution, the uniformity
//!   certificate, and two non-stationary counterexamples.
//! - [`nstate`] — N×N coins split into jump components; uniform measures
//!   are stationary for every unitary coin.
//! - [`verify`] — residual reports, membership levels, decay classes.

pub mod azero;
pub mod bzero;
pub mod coin;
pub mod lattice;
pub mod nstate;
pub mod spectral;
pub mod verify;

pub use coin::{CoinAngles, CoinCase, CoinHalves, UnitaryCoin};
pub use lattice::{AmplitudeField, ChiralPair, Measure, MeasureGenerator, StateGenerator};
pub use spectral::EigenSolution;

/// Book chapters double as doc-tests so the guide can never drift from the
/// library. `cargo test --doc` compiles and runs every Rust snippet below.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/coins.md")]
    mod coins {}
    #[doc = include_str!("../../../book/src/evolution.md")]
    mod evolution {}
    #[doc = include_str!("../../../book/src/full-support.md")]
    mod full_support {}
    #[doc = include_str!("../../../book/src/anti-diagonal.md")]
    mod anti_diagonal {}
    #[doc = include_str!("../../../book/src/diagonal.md")]
    mod diagonal {}
    #[doc = include_str!("../../../book/src/n-state.md")]
    mod n_state {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
