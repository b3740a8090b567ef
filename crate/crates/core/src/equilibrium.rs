//! Symmetric-equilibrium solver and the curve/sweep generators built on it.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{self, GameParams};

/// Distance kept from each end of `(1/(k+1), 1)` when bracketing the root.
pub const BRACKET_MARGIN: f64 = 1e-9;
pub const DEFAULT_Q_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: u32 = 200;

/// Equilibrium trust together with solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumSolution {
    pub q_bar: f64,
    /// `|F(q_bar) - p|`.
    pub residual: f64,
    /// `|E(q_bar)|`.
    pub e_residual: f64,
    pub iterations: u32,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    /// `q_bar - p`, evaluated without cancellation (may underflow to 0).
    pub trust_excess: f64,
    /// `ln(q_bar - p)`, finite even where `trust_excess` underflows.
    pub ln_trust_excess: f64,
}

/// Solves for the unique symmetric equilibrium trust with default tolerances.
pub fn solve_equilibrium(params: &GameParams) -> Result<EquilibriumSolution> {
    solve_equilibrium_with(params, DEFAULT_Q_TOL, DEFAULT_MAX_ITER)
}

/// Bisection on `F_{n,k}(q) - p`.
///
/// `F` is strictly increasing, so the root is unique and bisection cannot be
/// attracted to the spurious zero of `E` at `q = 1`.
pub fn solve_equilibrium_with(params: &GameParams, q_tol: f64, max_iter: u32) -> Result<EquilibriumSolution> {
    if q_tol.is_nan() || q_tol <= 0.0 {
        return Err(Error::InvalidConfig(format!("q tolerance must be positive (got {q_tol})")));
    }
    let (n, k, p) = (params.n(), params.k(), params.p());
    let gap = |q: f64| model::reliability_unchecked(n, k, q) - p;

    let mut lo = params.signal_floor() + BRACKET_MARGIN;
    let mut hi = 1.0 - BRACKET_MARGIN;
    let (f_lo, f_hi) = (gap(lo), gap(hi));
    if f_lo > 0.0 || f_hi < 0.0 {
        return Err(Error::BracketFailure { lo, hi, f_lo, f_hi });
    }

    let mut iterations = 0;
    while hi - lo > q_tol {
        if iterations == max_iter {
            return Err(Error::NotConverged { iterations, lo, hi });
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // bracket is down to adjacent doubles
            break;
        }
        iterations += 1;
        let f_mid = gap(mid);
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if f_mid < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mid = 0.5 * (lo + hi);
    let trust_excess = model::trust_excess(n, k, mid)?;
    // Once the root is within tolerance of p, p + (q_bar - p) is a sharper
    // estimate than the bracket midpoint and never falls below p.
    let q_bar = if trust_excess <= q_tol { p + trust_excess } else { mid };
    Ok(EquilibriumSolution {
        q_bar,
        residual: gap(q_bar).abs(),
        e_residual: model::residual_unchecked(params, q_bar).abs(),
        iterations,
        bracket_lo: lo,
        bracket_hi: hi,
        trust_excess,
        ln_trust_excess: model::ln_trust_excess(n, k, q_bar)?,
    })
}

/// Ordered `(x, y)` samples of a curve, ready for CSV export.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSamples {
    pub abscissa_name: String,
    pub ordinate_name: String,
    pub points: Vec<(f64, f64)>,
}

impl CurveSamples {
    fn new(abscissa_name: &str, ordinate_name: &str, points: Vec<(f64, f64)>) -> Self {
        Self { abscissa_name: abscissa_name.to_owned(), ordinate_name: ordinate_name.to_owned(), points }
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|&(x, _)| x)
    }

    pub fn ys(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|&(_, y)| y)
    }

    /// Number of strict sign changes between consecutive ordinates. Exact
    /// zeros are skipped.
    pub fn sign_changes(&self) -> usize {
        let signs: Vec<bool> = self.ys().filter(|y| *y != 0.0).map(|y| y > 0.0).collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }
}

/// Uniform grid of `steps` points from `lo` to `hi`, endpoints included.
pub(crate) fn uniform_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let span = hi - lo;
    let last = (steps - 1) as f64;
    (0..steps).map(|i| if i + 1 == steps { hi } else { lo + span * i as f64 / last }).collect()
}

fn check_grid(lo: f64, hi: f64, steps: usize) -> Result<()> {
    if steps < 2 {
        return Err(Error::InvalidGrid(format!("steps must be at least 2 (got {steps})")));
    }
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::InvalidGrid(format!("q-min must be below q-max (got {lo} >= {hi})")));
    }
    Ok(())
}

/// `(q, E_{n,k,p}(q))` on a uniform grid over `[q_lo, q_hi] ⊆ [0, 1]`.
pub fn sample_e_curve(params: &GameParams, q_lo: f64, q_hi: f64, steps: usize) -> Result<CurveSamples> {
    check_grid(q_lo, q_hi, steps)?;
    if q_lo < 0.0 || q_hi > 1.0 {
        return Err(Error::InvalidGrid(format!("E is sampled inside [0, 1] (got [{q_lo}, {q_hi}])")));
    }
    let points =
        uniform_grid(q_lo, q_hi, steps).into_iter().map(|q| (q, model::residual_unchecked(params, q))).collect();
    Ok(CurveSamples::new("q", "E", points))
}

/// `(q, F_{n,k}(q))` on a uniform grid strictly inside `(1/(k+1), 1)`.
pub fn sample_f_curve(n: u64, k: u64, q_lo: f64, q_hi: f64, steps: usize) -> Result<CurveSamples> {
    check_grid(q_lo, q_hi, steps)?;
    let points = uniform_grid(q_lo, q_hi, steps)
        .into_iter()
        .map(|q| Ok((q, model::reliability_from_trust(n, k, q)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveSamples::new("q", "F", points))
}

fn check_increasing(values: &[u64], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidGrid(format!("{what} list is empty")));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(format!("{what} values must be strictly increasing")));
    }
    Ok(())
}

/// Equilibrium trust for each population size, `(n, q_bar)`.
pub fn sweep_in_n(k: u64, p: f64, n_values: &[u64]) -> Result<CurveSamples> {
    Ok(CurveSamples::new(
        "n",
        "q_bar",
        solve_each_n(k, p, n_values)?.into_iter().map(|(n, s)| (n as f64, s.q_bar)).collect(),
    ))
}

/// Full solutions for each population size, in input order.
pub fn solve_each_n(k: u64, p: f64, n_values: &[u64]) -> Result<Vec<(u64, EquilibriumSolution)>> {
    check_increasing(n_values, "n")?;
    n_values.par_iter().map(|&n| Ok((n, solve_equilibrium(&GameParams::new(n, k, p)?)?))).collect()
}

/// Equilibrium trust for each ray count, `(k, q_bar)`. Every `k` must admit
/// `p` as an informative signal.
pub fn sweep_in_k(n: u64, p: f64, k_values: &[u64]) -> Result<CurveSamples> {
    check_increasing(k_values, "k")?;
    let points = k_values
        .par_iter()
        .map(|&k| Ok((k as f64, solve_equilibrium(&GameParams::new(n, k, p)?)?.q_bar)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveSamples::new("k", "q_bar", points))
}
