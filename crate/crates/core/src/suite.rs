//! Acceptance suite: one check per published claim, each at a pinned
//! tolerance. Run by `satnav verify` and by the `acceptance` test target.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::equilibrium::{self, solve_equilibrium};
use crate::error::Result;
use crate::model::{self, GameParams, TrustProfile};
use crate::output::{simulation_record, solution_record};
use crate::simulator::{self, estimate_payoff, SimulationConfig, DEFAULT_TAIL_TOL};
use crate::verifier::{self, best_response_scan, check_equilibrium, DEFAULT_R_STEPS};

/// Seeds for the suite's random parameter grids and simulations.
const GRID_SEED: u64 = 0x5eed_2024;
const SIM_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteOptions {
    /// Fewer Monte Carlo rounds and tuples; tolerances are unchanged.
    pub quick: bool,
}

impl SuiteOptions {
    fn mc_rounds(&self) -> u64 {
        if self.quick {
            100_000
        } else {
            1_000_000
        }
    }

    fn oracle_tuples(&self) -> usize {
        if self.quick {
            10
        } else {
            50
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2}. {} ({:.3} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

fn timed<F>(id: u8, title: &'static str, check: F) -> CriterionOutcome
where
    F: FnOnce() -> Result<(bool, String)>,
{
    let start = Instant::now();
    let (passed, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionOutcome { id, title, passed, detail, elapsed: start.elapsed() }
}

/// Uniform draw of a valid reliability for `k`, kept `margin` away from both ends.
fn draw_reliability(rng: &mut ChaCha8Rng, k: u64, margin: f64) -> f64 {
    let floor = 1.0 / (k as f64 + 1.0);
    rng.random_range(floor + margin..1.0 - margin)
}

pub const REFERENCE_ROOTS: [(f64, f64); 3] = [(0.5, 0.53), (2.0 / 3.0, 0.70), (0.75, 0.78)];

pub fn reference_roots() -> CriterionOutcome {
    timed(1, "reference roots at n=5, k=3", || {
        let mut ok = true;
        let mut parts = Vec::new();
        for &(p, expected) in &REFERENCE_ROOTS {
            let params = GameParams::new(5, 3, p)?;
            let start = Instant::now();
            let s = solve_equilibrium(&params)?;
            let took = start.elapsed();
            let hit = (s.q_bar - expected).abs() <= 0.005 && took < Duration::from_millis(1);
            ok &= hit;
            parts.push(format!("p={p:.4} q_bar={:.5} in {} us", s.q_bar, took.as_micros()));
        }
        Ok((ok, parts.join("; ")))
    })
}

pub fn symmetric_payoff_identity() -> CriterionOutcome {
    timed(2, "symmetric profile pays 1/n", || {
        let mut rng = ChaCha8Rng::seed_from_u64(GRID_SEED);
        let mut worst: f64 = 0.0;
        for _ in 0..500 {
            let n = rng.random_range(2..=100);
            let k = rng.random_range(1..=10);
            let p = draw_reliability(&mut rng, k, 0.0);
            let q = rng.random_range(f64::EPSILON..1.0);
            let v = model::payoff_r(&GameParams::new(n, k, p)?, &TrustProfile::symmetric(q)?)?;
            worst = worst.max((v - 1.0 / n as f64).abs());
        }
        Ok((worst <= 1e-12, format!("500 tuples, max |R(q,q) - 1/n| = {worst:.3e}")))
    })
}

pub fn trust_exceeds_reliability() -> CriterionOutcome {
    timed(3, "equilibrium trust exceeds reliability", || {
        let mut rng = ChaCha8Rng::seed_from_u64(GRID_SEED + 3);
        let mut violations = 0;
        let mut unresolvable = 0;
        const TRIPLES: usize = 300;
        for _ in 0..TRIPLES {
            let n = rng.random_range(2..=100);
            let k = rng.random_range(1..=10);
            let p = draw_reliability(&mut rng, k, 0.0);
            let s = solve_equilibrium(&GameParams::new(n, k, p)?)?;
            let floor = 1.0 / (k as f64 + 1.0);
            if !(s.ln_trust_excess.is_finite() && s.q_bar >= p && s.q_bar > floor) {
                violations += 1;
            }
            if s.q_bar - p <= 0.0 {
                unresolvable += 1;
            }
        }
        Ok((
            violations == 0,
            format!(
                "{TRIPLES} triples, {violations} violations ({unresolvable} gaps below double resolution at q_bar, checked via ln(q_bar - p))"
            ),
        ))
    })
}

pub const DECREASE_CASES: [(u64, f64); 3] = [(1, 0.9), (3, 0.5), (10, 0.75)];

pub fn eventually_decreasing_in_n() -> CriterionOutcome {
    timed(4, "trust eventually decreasing in n, converging to p", || {
        let start = Instant::now();
        let mut ok = true;
        let mut parts = Vec::new();
        for &(k, p) in &DECREASE_CASES {
            let n_star = model::monotonicity_threshold(p, k)?;
            let first = n_star.ceil() as u64 + 1;
            let ns: Vec<u64> = (first..=first + 49).collect();
            let q: Vec<f64> = equilibrium::sweep_in_n(k, p, &ns)?.ys().collect();
            let decreasing = q.windows(2).all(|w| w[1] < w[0]);
            let far = solve_equilibrium(&GameParams::new(100_000, k, p)?)?;
            let converged = (far.q_bar - p).abs() < 1e-3;
            ok &= decreasing && converged;
            parts.push(format!(
                "k={k} p={p}: n*={n_star:.4}, n={first}..{} decreasing={decreasing}, |q_bar(1e5)-p|={:.2e}",
                first + 49,
                (far.q_bar - p).abs()
            ));
        }
        let took = start.elapsed();
        ok &= took < Duration::from_secs(10);
        Ok((ok, parts.join("; ")))
    })
}

pub fn increasing_in_rays() -> CriterionOutcome {
    timed(5, "trust increasing in k", || {
        let ks: Vec<u64> = (1..=10).collect();
        let mut ok = true;
        let mut parts = Vec::new();
        for &(n, p) in &[(5u64, 0.6), (20, 0.51)] {
            let q: Vec<f64> = equilibrium::sweep_in_k(n, p, &ks)?.ys().collect();
            let inc = q.windows(2).all(|w| w[1] > w[0]);
            ok &= inc;
            parts.push(format!("n={n} p={p}: q_bar {:.4}..{:.4} increasing={inc}", q[0], q[9]));
        }
        Ok((ok, parts.join("; ")))
    })
}

pub fn oracle_triangle(options: SuiteOptions) -> CriterionOutcome {
    timed(6, "closed form vs series oracle vs Monte Carlo", || {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(GRID_SEED + 6);
        let tuples = options.oracle_tuples();
        let rounds = options.mc_rounds();
        let mut worst_series: f64 = 0.0;
        let mut worst_z: f64 = 0.0;
        for i in 0..tuples {
            let n = rng.random_range(2..=10);
            let k = rng.random_range(1..=5);
            let p = draw_reliability(&mut rng, k, 0.0);
            let q = rng.random_range(0.05..0.95);
            let r = rng.random_range(0.05..0.95);
            let params = GameParams::new(n, k, p)?;
            let profile = TrustProfile::new(q, r)?;
            let closed = model::payoff_r(&params, &profile)?;
            let series = simulator::series_payoff_oracle(&params, &profile, DEFAULT_TAIL_TOL)?;
            worst_series = worst_series.max((series - closed).abs());
            let config = SimulationConfig::new(params, profile, rounds, SIM_SEED + i as u64)?;
            let report = estimate_payoff(&config);
            worst_z = worst_z.max((report.focal_mean_payoff - closed).abs() / report.focal_std_error);
        }
        let took = start.elapsed();
        let ok = worst_series < 1e-10 && worst_z < 4.0 && took < Duration::from_secs(60);
        Ok((
            ok,
            format!(
                "{tuples} tuples x {rounds} rounds: max |series - R| = {worst_series:.2e}, max |MC - R|/SE = {worst_z:.2}"
            ),
        ))
    })
}

pub const REFERENCE_GAMES: [(u64, u64, f64); 4] = [(5, 3, 0.5), (5, 3, 2.0 / 3.0), (5, 3, 0.75), (2, 1, 2.0 / 3.0)];

pub fn equilibrium_verification(options: SuiteOptions) -> CriterionOutcome {
    timed(7, "no profitable deviation; simulated symmetric payoff is 1/n", || {
        let mut ok = true;
        let mut parts = Vec::new();
        for (i, &(n, k, p)) in REFERENCE_GAMES.iter().enumerate() {
            let params = GameParams::new(n, k, p)?;
            let check = check_equilibrium(&params, equilibrium::DEFAULT_Q_TOL, 1e-9)?;
            let q_bar = check.solution.q_bar;
            let sim =
                verifier::simulate_deviation(&params, q_bar, q_bar, options.mc_rounds(), SIM_SEED + 100 + i as u64)?;
            let z = (sim.focal_mean_payoff - 1.0 / n as f64).abs() / sim.focal_std_error;
            let pass = check.passed() && z <= 3.0;
            ok &= pass;
            parts.push(format!("({n},{k},{p:.4}) q_bar={q_bar:.4} gain={:.1e} z={z:.2}", check.best_deviation_gain()));
        }
        Ok((ok, parts.join("; ")))
    })
}

pub fn large_population_trichotomy() -> CriterionOutcome {
    timed(8, "best response trichotomy at n=1000", || {
        let params = GameParams::new(1000, 3, 0.5)?;
        let above = best_response_scan(&params, 0.6, DEFAULT_R_STEPS)?;
        let below = best_response_scan(&params, 0.4, DEFAULT_R_STEPS)?;
        let matched = best_response_scan(&params, 0.5, DEFAULT_R_STEPS)?;
        let ok =
            above.argmax_r == 0.0 && below.argmax_r == 1.0 && (matched.argmax_r - 0.5).abs() <= matched.grid_step();
        Ok((
            ok,
            format!(
                "argmax r: q=0.6 -> {}, q=0.4 -> {}, q=0.5 -> {}",
                above.argmax_r, below.argmax_r, matched.argmax_r
            ),
        ))
    })
}

pub fn unique_sign_change() -> CriterionOutcome {
    timed(9, "E has exactly one interior sign change", || {
        let mut rng = ChaCha8Rng::seed_from_u64(GRID_SEED + 9);
        let mut failures = Vec::new();
        const TRIPLES: usize = 200;
        const POINTS: usize = 2000;
        for _ in 0..TRIPLES {
            let n = rng.random_range(2..=50);
            let k = rng.random_range(1..=10);
            let p = draw_reliability(&mut rng, k, 1e-3);
            let params = GameParams::new(n, k, p)?;
            let lo = params.signal_floor() + 1e-6;
            let hi = 1.0 - 1e-6;
            let curve = equilibrium::sample_e_curve(&params, lo, hi, POINTS)?;
            let spacing = (hi - lo) / (POINTS - 1) as f64;
            let q_bar = solve_equilibrium(&params)?.q_bar;
            let located = curve
                .points
                .windows(2)
                .find(|w| (w[0].1 > 0.0) != (w[1].1 > 0.0))
                .is_some_and(|w| w[0].0 - spacing <= q_bar && q_bar <= w[1].0 + spacing);
            if curve.sign_changes() != 1 || !located {
                failures.push(format!("({n},{k},{p})"));
            }
        }
        Ok((failures.is_empty(), format!("{TRIPLES} triples, {} failures {}", failures.len(), failures.join(" "))))
    })
}

pub fn deterministic_output() -> CriterionOutcome {
    timed(10, "repeated solve and simulate render identical bytes", || {
        let params = GameParams::new(2, 1, 0.6667)?;
        let solve = || -> Result<String> { Ok(solution_record(&params, &solve_equilibrium(&params)?).to_json()) };
        let config = SimulationConfig::new(params, TrustProfile::symmetric(0.7)?, 100_000, 42)?;
        let simulate = || simulation_record(&config, &estimate_payoff(&config)).to_json();

        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("thread pool");
        let several = rayon::ThreadPoolBuilder::new().num_threads(4).build().expect("thread pool");
        let solve_same = solve()? == solve()?;
        let sim_a = simulate();
        let sim_same = sim_a == simulate() && sim_a == single.install(simulate) && sim_a == several.install(simulate);
        Ok((
            solve_same && sim_same,
            format!("solve identical={solve_same}, simulate identical across 1/4 threads={sim_same}"),
        ))
    })
}

/// Runs every criterion in order.
pub fn run_all(options: SuiteOptions) -> Vec<CriterionOutcome> {
    vec![
        reference_roots(),
        symmetric_payoff_identity(),
        trust_exceeds_reliability(),
        eventually_decreasing_in_n(),
        increasing_in_rays(),
        oracle_triangle(options),
        equilibrium_verification(options),
        large_population_trichotomy(),
        unique_sign_change(),
        deterministic_output(),
    ]
}
