//! Receive-filter design.
//!
//! Every filter here acts block-wise: row `n` of the receive matrix is
//! `e_n ⊗ ã`, so a filter is fully described by its `N_s` taps `ã`. For a
//! delay bound `d`, `ã` splits into a leading part `ã[..d]` and a trailing
//! part `α = ã[d..]`.
//!
//! Filtering a pulse delayed by `d_k` samples gives two numbers: the gain on
//! the current symbol, `c_k = ãᵀ Ẽ^{d_k} g`, and the leakage from the
//! previous symbol, `r_k = ãᵀ (Ẽ^{N_s - d_k})ᵀ g`. The estimator is unbiased
//! for every delay up to `d` exactly when `c_k = 1` and `r_k = 0` for all of
//! them. With a zero leading part and `d_k <= d`, `r_k` vanishes and the
//! remaining conditions are the Hankel system `H(g) α = 1_{d+1}`.

use rand::Rng;

use crate::error::{invalid, mismatch, Error, Result};
use crate::linalg::{cholesky_solve, dot, Matrix, Svd};
use crate::signal::{
    advance, delay_truncated, hankel_lift, pulse_matrix, shift_matrix, PulseShape,
};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterDesign<T> {
    /// `ã = g`.
    Matched,
    /// Minimum-norm exact solution of the Hankel system.
    UnbiasedExact,
    /// Ridge solution trading residual bias against noise gain.
    Tikhonov { lambda: T },
    /// Taps supplied by the caller.
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceiveFilter<T> {
    taps: Vec<T>,
    delay_bound: usize,
    design: FilterDesign<T>,
}

impl<T: Real> ReceiveFilter<T> {
    /// Wraps arbitrary taps; `delay_bound` only fixes where the
    /// leading/trailing split falls.
    pub fn custom(taps: Vec<T>, delay_bound: usize) -> Result<Self> {
        if taps.is_empty() {
            return Err(invalid("filter needs at least one tap"));
        }
        if delay_bound >= taps.len() {
            return Err(invalid(format!(
                "delay bound {} needs fewer than {} taps",
                delay_bound,
                taps.len()
            )));
        }
        Ok(Self {
            taps,
            delay_bound,
            design: FilterDesign::Custom,
        })
    }

    pub fn taps(&self) -> &[T] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn delay_bound(&self) -> usize {
        self.delay_bound
    }

    pub fn design(&self) -> FilterDesign<T> {
        self.design
    }

    /// `ã[..d]`, forced to zero by the unbiased designs.
    pub fn leading(&self) -> &[T] {
        &self.taps[..self.delay_bound]
    }

    /// `α = ã[d..]`.
    pub fn trailing(&self) -> &[T] {
        &self.taps[self.delay_bound..]
    }

    /// `‖ã‖²`, the factor by which the filter scales the noise power.
    pub fn noise_gain(&self) -> T {
        dot(&self.taps, &self.taps)
    }
}

/// Current-symbol gain `c_k` and previous-symbol leakage `r_k` seen by a
/// filter for one delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolCoefficients<T> {
    pub current: T,
    pub previous: T,
}

pub fn matched_filter<T: Real>(g: &PulseShape<T>) -> ReceiveFilter<T> {
    ReceiveFilter {
        taps: g.taps().to_vec(),
        delay_bound: 0,
        design: FilterDesign::Matched,
    }
}

/// `(c_k, r_k)` of `filter` for a pulse delayed by `delay` samples.
///
/// Both coefficients use the whole tap vector, so the block identity
/// `a_nᵀ E^{d_k} G = c_k e_nᵀ + r_k e_{n-1}ᵀ` holds for any taps. For a
/// zero leading part and `delay <= d` they reduce to `c_k = αᵀ(Ẽ^{d_k} g)[d..]`
/// and `r_k = 0`; see [`split_coeffs`].
pub fn lemma1_coeffs<T: Real>(
    filter: &ReceiveFilter<T>,
    g: &PulseShape<T>,
    delay: usize,
) -> Result<SymbolCoefficients<T>> {
    let ns = check_pair(filter, g)?;
    if delay >= ns {
        return Err(invalid(format!("delay {} must be below N_s={}", delay, ns)));
    }
    let current = dot(filter.taps(), &delay_truncated(g.taps(), delay));
    let previous = if delay == 0 {
        T::zero()
    } else {
        dot(filter.taps(), &advance(g.taps(), ns - delay))
    };
    Ok(SymbolCoefficients { current, previous })
}

/// Coefficients in the split form: gain from the trailing part only and
/// leakage from the leading part only. Agrees with [`lemma1_coeffs`] when the
/// leading part is zero and `delay <= filter.delay_bound()`.
pub fn split_coeffs<T: Real>(
    filter: &ReceiveFilter<T>,
    g: &PulseShape<T>,
    delay: usize,
) -> Result<SymbolCoefficients<T>> {
    let ns = check_pair(filter, g)?;
    if delay >= ns {
        return Err(invalid(format!("delay {} must be below N_s={}", delay, ns)));
    }
    let d = filter.delay_bound();
    let mut trailing = filter.taps().to_vec();
    trailing[..d].iter_mut().for_each(|t| *t = T::zero());
    let mut leading = filter.taps().to_vec();
    leading[d..].iter_mut().for_each(|t| *t = T::zero());
    let current = dot(&trailing, &delay_truncated(g.taps(), delay));
    let previous = if delay == 0 {
        T::zero()
    } else {
        dot(&leading, &advance(g.taps(), ns - delay))
    };
    Ok(SymbolCoefficients { current, previous })
}

fn check_pair<T: Real>(filter: &ReceiveFilter<T>, g: &PulseShape<T>) -> Result<usize> {
    if filter.len() != g.len() {
        return Err(mismatch(format!(
            "filter has {} taps, pulse has {}",
            filter.len(),
            g.len()
        )));
    }
    Ok(g.len())
}

/// Worst deviation from `(c_k, r_k) = (1, 0)` over all delays `0..=d`.
pub fn unbiasedness_residual<T: Real>(
    filter: &ReceiveFilter<T>,
    g: &PulseShape<T>,
    d: usize,
) -> Result<T> {
    (0..=d).try_fold(T::zero(), |worst, dk| {
        let c = lemma1_coeffs(filter, g, dk)?;
        Ok(worst
            .max((c.current - T::one()).abs())
            .max(c.previous.abs()))
    })
}

/// Outcome of the solvability test for `H(g) α = 1_{d+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub n_s: usize,
    pub d: usize,
    /// Numerical rank of `H(g)`.
    pub rank: usize,
    /// Singular values at or below `rank_tolerance * sigma_max` count as zero.
    pub rank_tolerance: f64,
    /// Worst `|c_k - 1|` or `|r_k|` reached by the minimum-norm solution.
    pub residual: f64,
    pub residual_tolerance: f64,
    /// The system is consistent: the minimum-norm solution meets the
    /// residual tolerance.
    pub feasible: bool,
    /// `N_s >= d + rank`. Always true since the rank cannot exceed the
    /// `N_s - d` columns; reported for reference only.
    pub rank_condition: bool,
    /// `floor((N_s - 1) / 2)`: up to this delay `H(g)` has no more rows than
    /// columns, so a full-row-rank pulse is always compensable.
    pub delay_bound: usize,
    pub within_delay_bound: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeasibilityOptions {
    /// Relative singular-value cutoff; `None` means
    /// `max(d + 1, N_s - d) * epsilon`.
    pub rank_tolerance: Option<f64>,
    /// `None` means `max(1e-10, 1e4 * epsilon)`. A coefficient error `δ`
    /// moves the expected estimate by up to about `4 δ x_max`.
    pub residual_tolerance: Option<f64>,
}

pub fn check_feasibility<T: Real>(g: &PulseShape<T>, d: usize) -> Result<FeasibilityReport> {
    check_feasibility_with(g, d, &FeasibilityOptions::default())
}

pub fn check_feasibility_with<T: Real>(
    g: &PulseShape<T>,
    d: usize,
    opts: &FeasibilityOptions,
) -> Result<FeasibilityReport> {
    min_norm_design(g, d, opts).map(|(_, report)| report)
}

/// Minimum-norm unbiased filter; errors with the report when the Hankel
/// system has no solution within tolerance.
pub fn solve_unbiased<T: Real>(g: &PulseShape<T>, d: usize) -> Result<ReceiveFilter<T>> {
    solve_unbiased_with(g, d, &FeasibilityOptions::default())
}

pub fn solve_unbiased_with<T: Real>(
    g: &PulseShape<T>,
    d: usize,
    opts: &FeasibilityOptions,
) -> Result<ReceiveFilter<T>> {
    let (filter, report) = min_norm_design(g, d, opts)?;
    if report.feasible {
        Ok(filter)
    } else {
        Err(Error::Infeasible(Box::new(report)))
    }
}

fn min_norm_design<T: Real>(
    g: &PulseShape<T>,
    d: usize,
    opts: &FeasibilityOptions,
) -> Result<(ReceiveFilter<T>, FeasibilityReport)> {
    let ns = g.len();
    if d >= ns {
        return Err(invalid(format!(
            "delay bound d={} needs d <= N_s - 1 = {}",
            d,
            ns - 1
        )));
    }
    let h = hankel_lift(g.taps(), d)?;
    let svd = Svd::new(&h.to_dense());
    let rank_tolerance = opts
        .rank_tolerance
        .unwrap_or_else(|| (d + 1).max(ns - d) as f64 * T::eps_f64());
    let residual_tolerance = opts
        .residual_tolerance
        .unwrap_or_else(|| 1e-10f64.max(1e4 * T::eps_f64()));
    let threshold = svd.max_singular_value() * T::lit(rank_tolerance);
    let rank = svd.rank(threshold);
    let alpha = svd.solve_min_norm(&vec![T::one(); d + 1], threshold)?;

    let filter = ReceiveFilter {
        taps: zero_padded(d, &alpha),
        delay_bound: d,
        design: FilterDesign::UnbiasedExact,
    };
    let residual = unbiasedness_residual(&filter, g, d)?.as_f64();
    let delay_bound = (ns - 1) / 2;
    let report = FeasibilityReport {
        n_s: ns,
        d,
        rank,
        rank_tolerance,
        residual,
        residual_tolerance,
        feasible: residual.is_finite() && residual <= residual_tolerance,
        rank_condition: ns >= d + rank,
        delay_bound,
        within_delay_bound: d <= delay_bound,
    };
    Ok((filter, report))
}

/// Ridge filter `α = (HᵀH + λI)⁻¹ Hᵀ 1` via a Cholesky solve.
pub fn solve_tikhonov<T: Real>(g: &PulseShape<T>, d: usize, lambda: T) -> Result<ReceiveFilter<T>> {
    if !(lambda > T::zero() && lambda.is_finite()) {
        return Err(invalid(format!("lambda must be positive, got {}", lambda)));
    }
    let ns = g.len();
    if d >= ns {
        return Err(invalid(format!(
            "delay bound d={} needs d <= N_s - 1 = {}",
            d,
            ns - 1
        )));
    }
    let h = hankel_lift(g.taps(), d)?;
    let mut normal = h.to_dense().gram();
    for i in 0..normal.rows() {
        normal[(i, i)] += lambda;
    }
    let rhs = h.rmatvec(&vec![T::one(); d + 1])?;
    let alpha = cholesky_solve(&normal, &rhs)?;
    Ok(ReceiveFilter {
        taps: zero_padded(d, &alpha),
        delay_bound: d,
        design: FilterDesign::Tikhonov { lambda },
    })
}

/// `‖H α − 1‖² + λ‖α‖²`.
pub fn tikhonov_objective<T: Real>(
    g: &PulseShape<T>,
    d: usize,
    lambda: T,
    alpha: &[T],
) -> Result<T> {
    let r = hankel_residual(g, d, alpha)?;
    Ok(dot(&r, &r) + lambda * dot(alpha, alpha))
}

/// `H(g) α − 1_{d+1}`.
pub fn hankel_residual<T: Real>(g: &PulseShape<T>, d: usize, alpha: &[T]) -> Result<Vec<T>> {
    let h = hankel_lift(g.taps(), d)?;
    Ok(h.matvec(alpha)?.into_iter().map(|v| v - T::one()).collect())
}

fn zero_padded<T: Real>(d: usize, alpha: &[T]) -> Vec<T> {
    let mut taps = vec![T::zero(); d];
    taps.extend_from_slice(alpha);
    taps
}

/// Brute-force check of the block identity
/// `a_nᵀ E^{d_k} G = c_k e_nᵀ + r_k e_{n-1}ᵀ` with explicit matrices, for
/// `trials` random `(n, d_k)` pairs. For the first symbol the leakage term
/// has nowhere to land and is dropped. Returns the largest absolute
/// discrepancy. Meant for small `symbols * N_s`.
pub fn verify_lemma1<T: Real, R: Rng + ?Sized>(
    g: &PulseShape<T>,
    filter: &ReceiveFilter<T>,
    symbols: usize,
    trials: usize,
    rng: &mut R,
) -> Result<T> {
    let ns = check_pair(filter, g)?;
    if symbols == 0 {
        return Err(invalid("need at least one symbol"));
    }
    let nt = symbols * ns;
    let gmat = pulse_matrix(g, symbols);
    let mut worst = T::zero();
    for _ in 0..trials {
        let n = rng.random_range(0..symbols);
        let dk = rng.random_range(0..ns);
        let b: Matrix<T> = shift_matrix::<T>(nt, dk).matmul(&gmat)?;
        let mut a_n = vec![T::zero(); nt];
        a_n[n * ns..(n + 1) * ns].copy_from_slice(filter.taps());
        let direct = b.transpose().matvec(&a_n)?;

        let coeffs = lemma1_coeffs(filter, g, dk)?;
        let mut predicted = vec![T::zero(); symbols];
        predicted[n] = coeffs.current;
        if n > 0 {
            predicted[n - 1] = coeffs.previous;
        }
        for (x, y) in direct.iter().zip(&predicted) {
            worst = worst.max((*x - *y).abs());
        }
    }
    Ok(worst)
}

/// [`verify_lemma1`] over random problems: `N <= max_symbols`,
/// `N_s <= max_ns`, Gaussian pulse taps and filter taps, a random delay
/// bound, and one `(n, d_k)` draw per problem.
pub fn verify_lemma1_random<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    trials: usize,
    max_symbols: usize,
    max_ns: usize,
) -> Result<T> {
    if max_symbols == 0 || max_ns == 0 {
        return Err(invalid("sizes must be positive"));
    }
    let mut worst = T::zero();
    for _ in 0..trials {
        let symbols = rng.random_range(1..=max_symbols);
        let ns = rng.random_range(1..=max_ns);
        let g = PulseShape::custom((0..ns).map(|_| T::standard_normal(rng)).collect())?;
        let d = rng.random_range(0..ns);
        let filter = ReceiveFilter::custom((0..ns).map(|_| T::standard_normal(rng)).collect(), d)?;
        worst = worst.max(verify_lemma1(&g, &filter, symbols, 1, rng)?);
    }
    Ok(worst)
}
