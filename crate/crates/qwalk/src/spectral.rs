//! The stationary family for coins with all entries nonzero.
//!
//! For a full-support coin the eigen-equation of the infinite evolution
//! operator turns, componentwise, into a three-term recurrence whose
//! characteristic polynomial `z² − (1/a)(λ + △λ̄)z + d/a` has a *double*
//! root exactly at four unit-modulus eigenvalues
//!
//! ```text
//! λ₁ = e^{i(φ + ξ/2)},  λ₂ = e^{i(−φ + ξ/2)},  λ₃ = −λ₁,  λ₄ = −λ₂,
//! ```
//!
//! where `cos φ = |a|` and `△ = e^{iξ}`. The double root is
//! `γ = (λ + △λ̄)/(2a)`, of unit modulus, and the double-root structure
//! admits the linear-in-`x` eigenvector
//!
//! ```text
//! Ψ^L(x) = (A + xB)γ^x,
//! Ψ^R(x) = {(A + xB)(λ − △λ̄)/2 − λB} γ^{x−1}/b,
//! ```
//!
//! whose measure is the quadratic
//!
//! ```text
//! μ(x) = 2|A + xB|² − 2x|B|² + (|B|² − Re(A B̄ (1 − △λ̄²)))/|b|².
//! ```
//!
//! With `B ≠ 0` this is a stationary measure that is neither uniform nor
//! of exponential-decay shape; with `B = 0` it collapses to the constant
//! `2|A|²`. [`closed_form_measure`] implements the printed quadratic;
//! [`EigenSolution::measure_generator_direct`] recomputes it as `|Ψ|²`
//! from the amplitudes so the two routes can be cross-checked — on any
//! disagreement the direct route is ground truth.

use num_complex::Complex64;
use thiserror::Error;

use crate::coin::{CoinCase, CoinError, UnitaryCoin};
use crate::lattice::{ChiralPair, GeneratorFamily, MeasureGenerator, StateGenerator};

/// A supplied λ must land within this distance of a computed eigenvalue.
pub const EIGENVALUE_TOL: f64 = 1e-9;
/// Unit-modulus check used by [`gamma_of`] to reject non-eigenvalues.
pub const GAMMA_UNIT_TOL: f64 = 1e-8;

/// Errors from the full-support family constructors.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpectralError {
    /// The coin is not in the all-entries-nonzero class.
    #[error(transparent)]
    Coin(#[from] CoinError),
    /// λ is not (close to) one of the four eigenvalues.
    #[error("{lambda} is not an eigenvalue of the evolution operator")]
    NotEigenvalue { lambda: Complex64 },
    /// Both free parameters vanish, which would give the zero state.
    #[error("free parameters A and B must not both be zero")]
    ZeroParameters,
}

fn require_full_support(coin: &UnitaryCoin) -> Result<(), SpectralError> {
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

/// The four eigenvalues admitting double roots, in the fixed order
/// `(λ₁, λ₂, λ₃, λ₄)`.
pub fn eigen_lambdas(coin: &UnitaryCoin) -> Result<[Complex64; 4], SpectralError> {
    require_full_support(coin)?;
    let angles = coin.angles()?;
    let half_xi = angles.xi / 2.0;
    let l1 = Complex64::from_polar(1.0, angles.phi + half_xi);
    let l2 = Complex64::from_polar(1.0, -angles.phi + half_xi);
    Ok([l1, l2, -l1, -l2])
}

/// The double root `γ = (λ + △λ̄)/(2a)` of the recurrence's characteristic
/// polynomial. Always evaluated from this closed form, never by
/// root-finding; rejects λ for which the result is not unit modulus.
pub fn gamma_of(coin: &UnitaryCoin, lambda: Complex64) -> Result<Complex64, SpectralError> {
    require_full_support(coin)?;
    let gamma = (lambda + coin.det() * lambda.conj()) / (2.0 * coin.a());
    if (gamma.norm() - 1.0).abs() > GAMMA_UNIT_TOL {
        return Err(SpectralError::NotEigenvalue { lambda });
    }
    Ok(gamma)
}

/// An eigenvalue with its double root and the free parameters of the
/// linear-in-`x` eigenvector family.
#[derive(Debug, Clone, Copy)]
pub struct EigenSolution {
    coin: UnitaryCoin,
    lambda: Complex64,
    gamma: Complex64,
    a_coef: Complex64,
    b_coef: Complex64,
}

impl EigenSolution {
    /// Validate `(coin, λ, A, B)` into a solution: the coin must be
    /// full-support, λ within [`EIGENVALUE_TOL`] of one of the four
    /// eigenvalues, and `(A, B) ≠ (0, 0)`.
    pub fn new(
        coin: UnitaryCoin,
        lambda: Complex64,
        a_coef: Complex64,
        b_coef: Complex64,
    ) -> Result<Self, SpectralError> {
        let lambdas = eigen_lambdas(&coin)?;
        if !lambdas.iter().any(|&l| (l - lambda).norm() <= EIGENVALUE_TOL) {
            return Err(SpectralError::NotEigenvalue { lambda });
        }
        if a_coef.norm() + b_coef.norm() == 0.0 {
            return Err(SpectralError::ZeroParameters);
        }
        let gamma = gamma_of(&coin, lambda)?;
        Ok(EigenSolution {
            coin,
            lambda,
            gamma,
            a_coef,
            b_coef,
        })
    }

    /// Like [`EigenSolution::new`] with λ picked by its index `k ∈ 1..=4`.
    pub fn from_index(
        coin: UnitaryCoin,
        k: usize,
        a_coef: Complex64,
        b_coef: Complex64,
    ) -> Result<Self, SpectralError> {
        let lambdas = eigen_lambdas(&coin)?;
        let lambda = *lambdas
            .get(k.wrapping_sub(1))
            .ok_or(SpectralError::NotEigenvalue {
                lambda: Complex64::new(0.0, 0.0),
            })?;
        Self::new(coin, lambda, a_coef, b_coef)
    }

    pub fn coin(&self) -> &UnitaryCoin {
        &self.coin
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn gamma(&self) -> Complex64 {
        self.gamma
    }

    pub fn a_coef(&self) -> Complex64 {
        self.a_coef
    }

    pub fn b_coef(&self) -> Complex64 {
        self.b_coef
    }

    /// The amplitude pair at one site.
    ///
    /// Powers of γ are taken as `e^{i x arg γ}` so their modulus is exactly
    /// one at every site; the eigen-equation residual then stays at
    /// rounding level on arbitrarily wide windows.
    pub fn amplitude_at(&self, x: i64) -> ChiralPair {
        let gamma_arg = self.gamma.arg();
        let gx = Complex64::from_polar(1.0, x as f64 * gamma_arg);
        let gx1 = Complex64::from_polar(1.0, (x - 1) as f64 * gamma_arg);
        let linear = self.a_coef + (x as f64) * self.b_coef;
        let half_diff = (self.lambda - self.coin.det() * self.lambda.conj()) / 2.0;
        let left = linear * gx;
        let right = (linear * half_diff - self.lambda * self.b_coef) * gx1 / self.coin.b();
        ChiralPair::new(left, right)
    }

    /// The eigenvector as a whole-line state generator.
    pub fn state_generator(&self) -> StateGenerator {
        let solution = *self;
        StateGenerator::new(GeneratorFamily::FullSupport, move |x| {
            solution.amplitude_at(x)
        })
    }

    /// The printed closed-form measure (quadratic in `x`).
    pub fn measure_generator(&self) -> MeasureGenerator {
        let two_b_sq = 2.0 * self.b_coef.norm_sqr();
        let delta_lambda_sq = self.coin.det() * self.lambda.conj() * self.lambda.conj();
        let one = Complex64::new(1.0, 0.0);
        let constant = (self.b_coef.norm_sqr()
            - (self.a_coef * self.b_coef.conj() * (one - delta_lambda_sq)).re)
            / self.coin.b().norm_sqr();
        let a_coef = self.a_coef;
        let b_coef = self.b_coef;
        MeasureGenerator::new(move |x| {
            let linear = a_coef + (x as f64) * b_coef;
            2.0 * linear.norm_sqr() - (x as f64) * two_b_sq + constant
        })
    }

    /// The measure recomputed directly as `|Ψ^L|² + |Ψ^R|²` from the
    /// amplitudes — the ground-truth side of the closed-form cross-check.
    pub fn measure_generator_direct(&self) -> MeasureGenerator {
        let solution = *self;
        MeasureGenerator::new(move |x| solution.amplitude_at(x).norm_sqr())
    }
}

/// The linear-in-`x` eigenvector for `(coin, λ, A, B)` as a state
/// generator.
pub fn build_stationary_full(
    coin: &UnitaryCoin,
    lambda: Complex64,
    a_coef: Complex64,
    b_coef: Complex64,
) -> Result<StateGenerator, SpectralError> {
    Ok(EigenSolution::new(*coin, lambda, a_coef, b_coef)?.state_generator())
}

/// The closed-form quadratic measure for `(coin, λ, A, B)`.
pub fn closed_form_measure(
    coin: &UnitaryCoin,
    lambda: Complex64,
    a_coef: Complex64,
    b_coef: Complex64,
) -> Result<MeasureGenerator, SpectralError> {
    Ok(EigenSolution::new(*coin, lambda, a_coef, b_coef)?.measure_generator())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{evolve, sample_window, to_measure};
    use std::f64::consts::{FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
    const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
    const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

    #[test]
    fn hadamard_eigenvalues() {
        // φ = π/4 and ξ = π substituted into the eigenvalue formulas.
        let lambdas = eigen_lambdas(&UnitaryCoin::hadamard()).unwrap();
        let expect = [
            Complex64::from_polar(1.0, 3.0 * FRAC_PI_4),
            Complex64::from_polar(1.0, FRAC_PI_4),
            Complex64::from_polar(1.0, -FRAC_PI_4),
            Complex64::from_polar(1.0, -3.0 * FRAC_PI_4),
        ];
        for (k, (got, want)) in lambdas.iter().zip(expect.iter()).enumerate() {
            assert!(
                (got - want).norm() < 1e-14,
                "λ_{}: got {got}, want {want}",
                k + 1
            );
            assert!((got.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rotation_second_eigenvalue() {
        // φ = π/3, ξ = π gives λ₂ = e^{iπ/6}.
        let lambdas = eigen_lambdas(&UnitaryCoin::rotation(PI / 3.0)).unwrap();
        assert!((lambdas[1] - Complex64::from_polar(1.0, PI / 6.0)).norm() < 1e-13);
    }

    #[test]
    fn eigen_lambdas_reject_wrong_case() {
        assert!(eigen_lambdas(&UnitaryCoin::anti_diagonal(0.0, 0.0)).is_err());
        assert!(eigen_lambdas(&UnitaryCoin::diagonal(0.0, 0.0)).is_err());
    }

    #[test]
    fn hadamard_gammas_are_plus_minus_i() {
        let coin = UnitaryCoin::hadamard();
        let lambdas = eigen_lambdas(&coin).unwrap();
        assert!((gamma_of(&coin, lambdas[0]).unwrap() - I).norm() < 1e-14);
        assert!((gamma_of(&coin, lambdas[1]).unwrap() - I).norm() < 1e-14);
        assert!((gamma_of(&coin, lambdas[2]).unwrap() + I).norm() < 1e-14);
        assert!((gamma_of(&coin, lambdas[3]).unwrap() + I).norm() < 1e-14);
    }

    #[test]
    fn rotation_gamma_is_i_for_lambda_two() {
        for theta in [0.2, 0.6, 1.0, 1.4] {
            let coin = UnitaryCoin::rotation(theta);
            let lambdas = eigen_lambdas(&coin).unwrap();
            let gamma = gamma_of(&coin, lambdas[1]).unwrap();
            assert!((gamma - I).norm() < 1e-13, "θ = {theta}: γ = {gamma}");
        }
    }

    #[test]
    fn gamma_rejects_non_eigenvalue() {
        let coin = UnitaryCoin::hadamard();
        assert!(matches!(
            gamma_of(&coin, ONE),
            Err(SpectralError::NotEigenvalue { .. })
        ));
    }

    #[test]
    fn zero_parameters_rejected() {
        let coin = UnitaryCoin::hadamard();
        let lambda = eigen_lambdas(&coin).unwrap()[0];
        assert!(matches!(
            EigenSolution::new(coin, lambda, ZERO, ZERO),
            Err(SpectralError::ZeroParameters)
        ));
    }

    #[test]
    fn near_eigenvalue_outside_band_rejected() {
        let coin = UnitaryCoin::hadamard();
        let lambda = eigen_lambdas(&coin).unwrap()[0] * Complex64::from_polar(1.0, 1e-6);
        assert!(matches!(
            EigenSolution::new(coin, lambda, ONE, ZERO),
            Err(SpectralError::NotEigenvalue { .. })
        ));
    }

    #[test]
    fn hadamard_b_zero_amplitudes_are_powers_of_i() {
        // With λ₂ and B = 0 the pair collapses to (A i^x, A i^{x−1}).
        let coin = UnitaryCoin::hadamard();
        let lambda = eigen_lambdas(&coin).unwrap()[1];
        let sol = EigenSolution::new(coin, lambda, ONE, ZERO).unwrap();
        for x in -6i64..=6 {
            let got = sol.amplitude_at(x);
            let want_left = I.powi(x as i32);
            let want_right = I.powi(x as i32 - 1);
            assert!((got.left - want_left).norm() < 1e-13, "x = {x}");
            assert!((got.right - want_right).norm() < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn hadamard_linear_term_site_zero() {
        // λ₂, A = 0, B = 1 at x = 0: Ψ^L = 0, Ψ^R = −1 + i, site measure 2.
        let coin = UnitaryCoin::hadamard();
        let lambda = eigen_lambdas(&coin).unwrap()[1];
        let sol = EigenSolution::new(coin, lambda, ZERO, ONE).unwrap();
        let pair = sol.amplitude_at(0);
        assert!(pair.left.norm() < 1e-15);
        assert!((pair.right - c(-1.0, 1.0)).norm() < 1e-14);
        assert!((pair.norm_sqr() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn eigen_equation_holds_sitewise() {
        let coin = UnitaryCoin::hadamard_twisted(0.777);
        for (k, lambda) in eigen_lambdas(&coin).unwrap().into_iter().enumerate() {
            let sol = EigenSolution::new(coin, lambda, c(0.4, -0.3), c(1.0, 0.2)).unwrap();
            for x in -20..=20 {
                let here = sol.amplitude_at(x);
                let up = sol.amplitude_at(x + 1);
                let down = sol.amplitude_at(x - 1);
                let left_residual =
                    (lambda * here.left - coin.a() * up.left - coin.b() * up.right).norm();
                let right_residual =
                    (lambda * here.right - coin.c() * down.left - coin.d() * down.right).norm();
                assert!(left_residual < 1e-12, "k={k} x={x}: {left_residual:.2e}");
                assert!(right_residual < 1e-12, "k={k} x={x}: {right_residual:.2e}");
            }
        }
    }

    #[test]
    fn components_satisfy_three_term_recurrence() {
        // both components solve
        // u_{x+2} − (1/a)(λ + △λ̄)u_{x+1} + (d/a)u_x = 0 sitewise
        let coin = UnitaryCoin::hadamard_twisted(1.234);
        for lambda in eigen_lambdas(&coin).unwrap() {
            let sol = EigenSolution::new(coin, lambda, c(0.7, 0.1), c(-0.4, 0.9)).unwrap();
            let mid = (lambda + coin.det() * lambda.conj()) / coin.a();
            let tail = coin.d() / coin.a();
            for x in -15i64..=15 {
                for pick in [|p: ChiralPair| p.left, |p: ChiralPair| p.right] {
                    let residual = (pick(sol.amplitude_at(x + 2))
                        - mid * pick(sol.amplitude_at(x + 1))
                        + tail * pick(sol.amplitude_at(x)))
                    .norm();
                    assert!(residual < 1e-10, "λ={lambda} x={x}: {residual:.3e}");
                }
            }
        }
    }

    #[test]
    fn evolve_multiplies_by_lambda_power() {
        let coin = UnitaryCoin::rotation(1.1);
        let lambda = eigen_lambdas(&coin).unwrap()[0];
        let gen = build_stationary_full(&coin, lambda, c(1.0, 0.0), c(0.0, 0.5)).unwrap();
        let n = 7;
        let evolved = evolve(&coin, &gen, n, -10, 10).unwrap();
        let base = sample_window(&gen, -10, 10).unwrap();
        let factor = lambda.powu(n as u32);
        for (x, v) in evolved.iter() {
            let want_left = factor * base.get(x).unwrap().left;
            let want_right = factor * base.get(x).unwrap().right;
            assert!((v.left - want_left).norm() < 1e-12, "x={x}");
            assert!((v.right - want_right).norm() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn hadamard_quadratic_measure() {
        // A = 0, B = 1: μ(x) = 2{(x − 1/2)² + 3/4}; in particular μ(2) = 6.
        let coin = UnitaryCoin::hadamard();
        let lambda = eigen_lambdas(&coin).unwrap()[1];
        let measure = closed_form_measure(&coin, lambda, ZERO, ONE).unwrap();
        for x in -40..=40 {
            let want = 2.0 * ((x as f64 - 0.5).powi(2) + 0.75);
            assert!(
                (measure.eval(x) - want).abs() < 1e-12,
                "x={x}: {} vs {want}",
                measure.eval(x)
            );
        }
        assert!((measure.eval(0) - 2.0).abs() < 1e-14);
        assert!((measure.eval(1) - 2.0).abs() < 1e-14);
        assert!((measure.eval(2) - 6.0).abs() < 1e-14);
    }

    #[test]
    fn hadamard_real_parameters_quadratic() {
        // Real A, B: μ(x) = 2{B²x² + B(2A−B)x + A² − AB + B²}, any of the
        // four eigenvalues.
        let coin = UnitaryCoin::hadamard();
        let (big_a, big_b) = (0.75, -1.25);
        for lambda in eigen_lambdas(&coin).unwrap() {
            let measure =
                closed_form_measure(&coin, lambda, c(big_a, 0.0), c(big_b, 0.0)).unwrap();
            for x in -20..=20 {
                let xf = x as f64;
                let want = 2.0
                    * (big_b * big_b * xf * xf
                        + big_b * (2.0 * big_a - big_b) * xf
                        + big_a * big_a
                        - big_a * big_b
                        + big_b * big_b);
                assert!(
                    (measure.eval(x) - want).abs() < 1e-12,
                    "λ={lambda} x={x}"
                );
            }
        }
    }

    #[test]
    fn b_zero_measure_is_constant() {
        let coin = UnitaryCoin::hadamard_twisted(2.1);
        let amp = c(0.3, 1.2);
        for lambda in eigen_lambdas(&coin).unwrap() {
            let measure = closed_form_measure(&coin, lambda, amp, ZERO).unwrap();
            let want = 2.0 * amp.norm_sqr();
            for x in -30..=30 {
                assert!((measure.eval(x) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn closed_form_agrees_with_direct() {
        let coin = UnitaryCoin::hadamard_twisted(0.4);
        for lambda in eigen_lambdas(&coin).unwrap() {
            let sol = EigenSolution::new(coin, lambda, c(0.2, -0.9), c(0.7, 0.3)).unwrap();
            let printed = sol.measure_generator();
            let direct = sol.measure_generator_direct();
            for x in -30..=30 {
                assert!(
                    (printed.eval(x) - direct.eval(x)).abs() < 1e-10,
                    "x={x}: printed {} vs direct {}",
                    printed.eval(x),
                    direct.eval(x)
                );
            }
        }
    }

    #[test]
    fn measure_is_time_invariant() {
        let coin = UnitaryCoin::rotation(0.9);
        let lambda = eigen_lambdas(&coin).unwrap()[2];
        let gen = build_stationary_full(&coin, lambda, c(1.0, 0.0), c(0.0, 1.0)).unwrap();
        let at_zero = to_measure(&evolve(&coin, &gen, 0, -15, 15).unwrap());
        for n in [1, 10, 50, 100] {
            let at_n = to_measure(&evolve(&coin, &gen, n, -15, 15).unwrap());
            assert!(
                at_zero.max_abs_diff(&at_n) < 1e-10,
                "n={n}: drift {:.2e}",
                at_zero.max_abs_diff(&at_n)
            );
        }
    }

    #[test]
    fn quadratic_growth_rate_is_two_b_squared() {
        let coin = UnitaryCoin::hadamard();
        let lambda = eigen_lambdas(&coin).unwrap()[0];
        let b_coef = c(0.8, 0.6);
        let measure = closed_form_measure(&coin, lambda, c(2.0, 0.0), b_coef).unwrap();
        let want = 2.0 * b_coef.norm_sqr();
        for x in [1000i64, -1000] {
            let ratio = measure.eval(x) / (x as f64 * x as f64);
            assert!(
                (ratio - want).abs() < 0.01,
                "x={x}: μ/x² = {ratio}, want {want}"
            );
        }
    }
}
