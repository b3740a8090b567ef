//! Brute-force checks of the equilibrium: best-response scans, deviation
//! bounds and the probability-matching limit.

use crate::equilibrium::{self, uniform_grid, EquilibriumSolution};
use crate::error::Result;
use crate::model::{self, GameParams, TrustProfile};
use crate::simulator::{estimate_payoff, SimulationConfig, SimulationReport};

pub const DEFAULT_R_STEPS: usize = 2001;

/// Payoffs within this relative distance of the grid maximum are treated as
/// tied; ties resolve to the grid point closest to the population trust.
pub const TIE_RELATIVE_TOL: f64 = 1e-13;

/// Focal payoff over a uniform grid of deviations `r ∈ [0, 1]` against a
/// population trusting with `q_fixed`.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponseScan {
    pub q_fixed: f64,
    pub grid: Vec<(f64, f64)>,
    pub argmax_r: f64,
    pub max_payoff: f64,
}

impl BestResponseScan {
    pub fn grid_step(&self) -> f64 {
        1.0 / (self.grid.len() - 1) as f64
    }
}

pub fn best_response_scan(params: &GameParams, q: f64, r_steps: usize) -> Result<BestResponseScan> {
    if r_steps < 2 {
        return Err(crate::Error::InvalidGrid(format!("r steps must be at least 2 (got {r_steps})")));
    }
    let grid = uniform_grid(0.0, 1.0, r_steps)
        .into_iter()
        .map(|r| Ok((r, model::payoff_r(params, &TrustProfile::new(q, r)?)?)))
        .collect::<Result<Vec<_>>>()?;

    let max_payoff = grid.iter().map(|&(_, v)| v).fold(f64::NEG_INFINITY, f64::max);
    let floor = max_payoff - TIE_RELATIVE_TOL * max_payoff.abs();
    let argmax_r = grid
        .iter()
        .filter(|&&(_, v)| v >= floor)
        .map(|&(r, _)| r)
        .min_by(|a, b| (a - q).abs().total_cmp(&(b - q).abs()))
        .expect("grid is non-empty");

    Ok(BestResponseScan { q_fixed: q, grid, argmax_r, max_payoff })
}

/// Outcome of checking the solver's root against a brute-force scan.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumCheck {
    pub params: GameParams,
    pub solution: EquilibriumSolution,
    pub scan: BestResponseScan,
    /// `|argmax_r - q_bar|` is at most one grid step.
    pub argmax_near_root: bool,
    /// No grid deviation earns more than `1/n + payoff_tol`.
    pub no_profitable_deviation: bool,
    /// `|E(q_bar)| <= 1e-10`.
    pub residual_vanishes: bool,
}

impl EquilibriumCheck {
    pub fn passed(&self) -> bool {
        self.argmax_near_root && self.no_profitable_deviation && self.residual_vanishes
    }

    pub fn best_deviation_gain(&self) -> f64 {
        self.scan.max_payoff - 1.0 / self.params.n() as f64
    }
}

pub const RESIDUAL_TOL: f64 = 1e-10;

pub fn check_equilibrium(params: &GameParams, q_tol: f64, payoff_tol: f64) -> Result<EquilibriumCheck> {
    let solution = equilibrium::solve_equilibrium_with(params, q_tol, equilibrium::DEFAULT_MAX_ITER)?;
    let scan = best_response_scan(params, solution.q_bar, DEFAULT_R_STEPS)?;
    let step = scan.grid_step();
    let fair = 1.0 / params.n() as f64;
    Ok(EquilibriumCheck {
        params: *params,
        solution,
        argmax_near_root: (scan.argmax_r - solution.q_bar).abs() <= step,
        no_profitable_deviation: scan.grid.iter().all(|&(_, v)| v <= fair + payoff_tol),
        residual_vanishes: solution.e_residual <= RESIDUAL_TOL,
        scan,
    })
}

/// Simulated payoff of a focal player using `r` against a population at `q`.
pub fn simulate_deviation(params: &GameParams, q: f64, r: f64, rounds: u64, seed: u64) -> Result<SimulationReport> {
    let config = SimulationConfig::new(*params, TrustProfile::new(q, r)?, rounds, seed)?;
    Ok(estimate_payoff(&config))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchingEntry {
    pub n: u64,
    pub q_bar: f64,
    /// `q_bar - p`, may underflow to zero for very large `n`.
    pub gap: f64,
    pub ln_gap: f64,
    /// `n > n*(p, k)`, so the gap must shrink from here on.
    pub beyond_threshold: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchingReport {
    pub k: u64,
    pub p: f64,
    pub n_star: f64,
    pub entries: Vec<MatchingEntry>,
    /// Every gap is strictly positive (checked on `ln_gap`, which cannot underflow).
    pub gaps_positive: bool,
    /// Gaps strictly decrease along entries beyond the threshold.
    pub eventually_decreasing: bool,
    /// Final gap is below the caller's tolerance for the largest `n`.
    pub final_gap_within_tol: bool,
}

impl MatchingReport {
    pub fn passed(&self) -> bool {
        self.gaps_positive && self.eventually_decreasing && self.final_gap_within_tol
    }
}

/// Solves the game along an increasing list of population sizes and checks
/// that equilibrium trust stays above `p`, shrinks toward it past `n*`, and
/// ends within `tol_fn(n_max)` of it.
pub fn check_probability_matching<T>(k: u64, p: f64, n_list: &[u64], tol_fn: T) -> Result<MatchingReport>
where
    T: Fn(u64) -> f64,
{
    let n_star = model::monotonicity_threshold(p, k)?;
    let entries: Vec<MatchingEntry> = equilibrium::solve_each_n(k, p, n_list)?
        .into_iter()
        .map(|(n, s)| MatchingEntry {
            n,
            q_bar: s.q_bar,
            gap: s.q_bar - p,
            ln_gap: s.ln_trust_excess,
            beyond_threshold: n as f64 > n_star,
        })
        .collect();

    let gaps_positive = entries.iter().all(|e| e.ln_gap.is_finite() && e.q_bar >= p);
    let tail: Vec<&MatchingEntry> = entries.iter().filter(|e| e.beyond_threshold).collect();
    let eventually_decreasing = tail.windows(2).all(|w| w[1].ln_gap < w[0].ln_gap && w[1].q_bar <= w[0].q_bar);
    let last = entries.last().expect("n list validated non-empty");
    let final_gap_within_tol = last.gap < tol_fn(last.n);

    Ok(MatchingReport { k, p, n_star, entries, gaps_positive, eventually_decreasing, final_gap_within_tol })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn game(n: u64, k: u64, p: f64) -> GameParams {
        GameParams::new(n, k, p).unwrap()
    }

    #[test]
    fn scan_at_reference_equilibrium() {
        let g = game(5, 3, 0.5);
        let q_bar = equilibrium::solve_equilibrium(&g).unwrap().q_bar;
        let scan = best_response_scan(&g, q_bar, DEFAULT_R_STEPS).unwrap();
        assert!((scan.argmax_r - q_bar).abs() <= scan.grid_step());
        assert!((scan.max_payoff - 0.2).abs() < 1e-6);
        assert_eq!(scan.grid.len(), DEFAULT_R_STEPS);
        assert!(scan.grid.windows(2).all(|w| w[1].0 > w[0].0));
    }

    #[test]
    fn large_population_trichotomy() {
        let g = game(1000, 3, 0.5);
        assert_eq!(best_response_scan(&g, 0.6, DEFAULT_R_STEPS).unwrap().argmax_r, 0.0);
        assert_eq!(best_response_scan(&g, 0.4, DEFAULT_R_STEPS).unwrap().argmax_r, 1.0);
        let flat = best_response_scan(&g, 0.5, DEFAULT_R_STEPS).unwrap();
        assert!((flat.argmax_r - 0.5).abs() <= flat.grid_step());
    }

    #[test]
    fn scan_rejects_degenerate_population_trust() {
        assert!(best_response_scan(&game(5, 3, 0.5), 1.0, 11).is_err());
        assert!(best_response_scan(&game(5, 3, 0.5), 0.5, 1).is_err());
    }

    #[test]
    fn checks_pass_at_reference_games() {
        for &(n, k, p, expected) in &[(5u64, 3u64, 2.0 / 3.0, Some(0.70)), (2, 1, 2.0 / 3.0, None)] {
            let check = check_equilibrium(&game(n, k, p), 1e-12, 1e-9).unwrap();
            assert!(check.passed(), "{check:?}");
            assert!(check.best_deviation_gain() <= 1e-9);
            if let Some(q) = expected {
                assert!((check.solution.q_bar - q).abs() <= 0.005);
            }
        }
    }

    #[test]
    fn check_rejects_boundary_reliability() {
        assert!(GameParams::new(5, 2, 1.0 / 3.0).is_err());
    }

    #[test]
    fn matching_large_populations() {
        let ns = [10, 100, 1_000, 10_000, 100_000];
        let report = check_probability_matching(3, 0.5, &ns, |_| 1e-3).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(report.entries.iter().all(|e| e.beyond_threshold));
    }

    #[test]
    fn matching_threshold_three_for_single_decoy() {
        let ns: Vec<u64> = (4..=30).collect();
        let report = check_probability_matching(1, 0.9, &ns, |_| 1e-2).unwrap();
        assert_eq!(report.n_star, 3.0);
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn matching_flags_a_tolerance_miss() {
        let report = check_probability_matching(3, 0.5, &[10, 20], |_| 1e-9).unwrap();
        assert!(!report.final_gap_within_tol);
        assert!(!report.passed());
    }
}
