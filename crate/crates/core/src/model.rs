//! Closed-form kernel of the star search game.
//!
//! A star has `k + 1` rays, exactly one of which leads to the treasure. A
//! shared pointer marks the correct ray with probability `p`, otherwise one of
//! the `k` wrong rays uniformly. Each turn a searcher follows the pointer with
//! its trust probability and otherwise picks one of the other `k` rays
//! uniformly. The first arrivers split a unit prize equally.
//!
//! Every function here is pure. Terms of the form `1 - (1 - x)^m` are computed
//! as `-expm1(m * ln(1 - x))` so that they keep full relative precision when
//! `m * x` is small and do not underflow when `m` is in the millions.

use crate::error::{Error, Result};

/// Above this exponent, `(1 - x)^m` is evaluated through `exp(m * ln1p(-x))`
/// instead of repeated squaring.
const LARGE_EXPONENT: u64 = 1024;

/// One instance of the game: `n` searchers on a star with `k + 1` rays and a
/// pointer of reliability `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameParams {
    n: u64,
    k: u64,
    p: f64,
}

impl GameParams {
    /// Validates `n >= 2`, `k >= 1` and `1/(k+1) < p < 1`.
    pub fn new(n: u64, k: u64, p: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewSearchers(n));
        }
        check_reliability(p, k)?;
        Ok(Self { n, k, p })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Probability that the pointer marks one particular wrong ray.
    pub fn p_star(&self) -> f64 {
        (1.0 - self.p) / self.k as f64
    }

    /// `1/(k+1)`, the reliability of a pointer that carries no information.
    pub fn signal_floor(&self) -> f64 {
        signal_floor(self.k)
    }

    /// Same game with a different number of searchers.
    pub fn with_n(&self, n: u64) -> Result<Self> {
        Self::new(n, self.k, self.p)
    }
}

pub(crate) fn signal_floor(k: u64) -> f64 {
    1.0 / (k as f64 + 1.0)
}

/// Checks `k >= 1` and `1/(k+1) < p < 1`.
pub(crate) fn check_reliability(p: f64, k: u64) -> Result<()> {
    if k < 1 {
        return Err(Error::NoDecoyRays(k));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ProbabilityOutOfRange { name: "p", value: p });
    }
    if p >= 1.0 {
        return Err(Error::PerfectSignal(p));
    }
    let bound = signal_floor(k);
    if p <= bound {
        return Err(Error::UninformativeSignal { p, k, bound });
    }
    Ok(())
}

/// Trust probabilities: `q` for the `n - 1` other searchers, `r` for the focal one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustProfile {
    q: f64,
    r: f64,
}

impl TrustProfile {
    pub fn new(q: f64, r: f64) -> Result<Self> {
        check_probability("q", q)?;
        check_probability("r", r)?;
        Ok(Self { q, r })
    }

    /// Everybody, focal player included, trusts with probability `q`.
    pub fn symmetric(q: f64) -> Result<Self> {
        Self::new(q, q)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange { name, value })
    }
}

/// Starred probability `(1 - x)/k`: the chance of picking one particular
/// non-pointed ray when the pointed one is taken with probability `x`.
pub fn derived(x: f64, k: u64) -> Result<f64> {
    check_probability("x", x)?;
    if k < 1 {
        return Err(Error::NoDecoyRays(k));
    }
    Ok(starred(x, k))
}

#[inline]
pub(crate) fn starred(x: f64, k: u64) -> f64 {
    (1.0 - x) / k as f64
}

/// `(1 - x)^m`.
pub(crate) fn complement_pow(x: f64, m: u64) -> f64 {
    if m > LARGE_EXPONENT {
        (m as f64 * (-x).ln_1p()).exp()
    } else {
        (1.0 - x).powi(m as i32)
    }
}

/// `1 - (1 - x)^m`: probability that at least one of `m` independent trials
/// with success probability `x` succeeds.
pub(crate) fn hit(x: f64, m: u64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    -(m as f64 * (-x).ln_1p()).exp_m1()
}

/// `1 - (1 - x)^m (1 - y)`.
fn hit_with_extra(x: f64, m: u64, y: f64) -> f64 {
    let log_miss = if m == 0 { 0.0 } else { m as f64 * (-x).ln_1p() };
    -(log_miss + (-y).ln_1p()).exp_m1()
}

fn require_interior_trust(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::DegenerateTrust(q))
    }
}

/// Expected share of one pointer branch for a focal searcher who finds the
/// treasure ray with per-turn probability `focal` while each of the `n - 1`
/// others finds it with probability `other`.
fn branch_share(n: u64, other: f64, focal: f64) -> f64 {
    let per_turn = focal * hit(other, n) / (n as f64 * other);
    per_turn / hit_with_extra(other, n - 1, focal)
}

/// Focal searcher's expected share of the prize when the other `n - 1`
/// searchers trust with `q` and the focal searcher with `r`.
///
/// Requires `0 < q < 1`; at the endpoints one of the two branches is `0/0`.
pub fn payoff_r(params: &GameParams, profile: &TrustProfile) -> Result<f64> {
    let (q, r) = (profile.q(), profile.r());
    require_interior_trust(q)?;
    let (n, k, p) = (params.n, params.k, params.p);
    let correct = branch_share(n, q, r);
    let wrong = branch_share(n, starred(q, k), starred(r, k));
    Ok(p * correct + (1.0 - p) * wrong)
}

/// Large-population approximation `(1/n)(p r/q + (1-p)(1-r)/(1-q))`, valid
/// when someone is all but certain to reach the treasure on the first turn.
pub fn payoff_large_n_approx(params: &GameParams, profile: &TrustProfile) -> Result<f64> {
    let (q, r) = (profile.q(), profile.r());
    require_interior_trust(q)?;
    let p = params.p;
    Ok((p * r / q + (1.0 - p) * (1.0 - r) / (1.0 - q)) / params.n as f64)
}

/// Equilibrium residual `E_{n,k,p}(q)`. Its unique root in `(1/(k+1), 1)` is
/// the symmetric equilibrium trust; it also vanishes at `q = 1`.
pub fn equilibrium_residual(params: &GameParams, q: f64) -> Result<f64> {
    check_probability("q", q)?;
    Ok(residual_unchecked(params, q))
}

pub(crate) fn residual_unchecked(params: &GameParams, q: f64) -> f64 {
    let (n, k, p) = (params.n, params.k, params.p);
    let q_star = starred(q, k);
    let p_star = params.p_star();
    p * q_star * hit(q_star, n) * hit(q, n - 1) - p_star * q * hit(q, n) * hit(q_star, n - 1)
}

fn check_trust_interval(n: u64, k: u64, q: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::TooFewSearchers(n));
    }
    if k < 1 {
        return Err(Error::NoDecoyRays(k));
    }
    if q > signal_floor(k) && q < 1.0 {
        Ok(())
    } else {
        Err(Error::TrustOutsideInterval { q, k })
    }
}

/// Reliability `p = F_{n,k}(q)` for which `q` is the symmetric equilibrium
/// trust. Strictly increasing on `(1/(k+1), 1)` with limits `1/(k+1)` and `1`.
pub fn reliability_from_trust(n: u64, k: u64, q: f64) -> Result<f64> {
    check_trust_interval(n, k, q)?;
    Ok(reliability_unchecked(n, k, q))
}

pub(crate) fn reliability_unchecked(n: u64, k: u64, q: f64) -> f64 {
    let q_star = starred(q, k);
    let own = q * hit(q, n) * hit(q_star, n - 1);
    let other = (1.0 - q) * hit(q_star, n) * hit(q, n - 1);
    own / (own + other)
}

/// `q - F_{n,k}(q)`, the amount by which trust `q` exceeds the reliability that
/// makes it an equilibrium.
///
/// Computed from the expanded difference of the two products inside `F`, so
/// the value keeps its relative precision long after `q - F(q)` has fallen
/// below the spacing of doubles near `q`. Underflows to zero for large `n`;
/// use [`ln_trust_excess`] there.
pub fn trust_excess(n: u64, k: u64, q: f64) -> Result<f64> {
    check_trust_interval(n, k, q)?;
    let parts = ExcessParts::new(n, k, q);
    Ok(parts.ln_scale.exp() * parts.bracket)
}

/// Natural logarithm of [`trust_excess`], finite for any `n`.
///
/// Returns `-inf` if the excess evaluates to zero and `NaN` if it evaluates
/// negative.
pub fn ln_trust_excess(n: u64, k: u64, q: f64) -> Result<f64> {
    check_trust_interval(n, k, q)?;
    let parts = ExcessParts::new(n, k, q);
    Ok(parts.ln_scale + parts.bracket.ln())
}

/// `q - F(q) = exp(ln_scale) * bracket` where, with `x = 1 - q` and
/// `y = 1 - q*`,
/// `ln_scale = ln(q (1-q) / D) + (n-1) ln y` and
/// `bracket = q* - (x/y)^(n-1) q + x^(n-1) (q - q*)`.
struct ExcessParts {
    ln_scale: f64,
    bracket: f64,
}

impl ExcessParts {
    fn new(n: u64, k: u64, q: f64) -> Self {
        let q_star = starred(q, k);
        let m = n - 1;
        let ln_x = (-q).ln_1p();
        let ln_y = (-q_star).ln_1p();
        let own = q * hit(q, n) * hit(q_star, m);
        let other = (1.0 - q) * hit(q_star, n) * hit(q, m);
        let ratio_pow = (m as f64 * (ln_x - ln_y)).exp();
        let bracket = q_star - ratio_pow * q + complement_pow(q, m) * (q - q_star);
        let ln_scale = q.ln() + ln_x - (own + other).ln() + m as f64 * ln_y;
        Self { ln_scale, bracket }
    }
}

/// Population size beyond which equilibrium trust is guaranteed to fall as
/// more searchers join: `3 + 2 ln k / ln((k - 1 + p) / (k (1 - p)))`.
///
/// Exactly 3 for `k = 1`; diverges as `p` approaches `1/(k+1)`.
pub fn monotonicity_threshold(p: f64, k: u64) -> Result<f64> {
    check_reliability(p, k)?;
    if k == 1 {
        return Ok(3.0);
    }
    let kf = k as f64;
    Ok(3.0 + 2.0 * kf.ln() / ((kf - 1.0 + p) / (kf * (1.0 - p))).ln())
}

/// Trust that minimises the expected arrival time of a lone searcher,
/// `(p - sqrt(k p (1-p))) / (1 - (k+1)(1-p))`. Used only as a comparison
/// baseline; it is decreasing in `k`, unlike the competitive equilibrium.
pub fn single_searcher_optimal_trust(p: f64, k: u64) -> Result<f64> {
    check_reliability(p, k)?;
    let kf = k as f64;
    let denominator = 1.0 - (kf + 1.0) * (1.0 - p);
    if denominator.abs() <= 4.0 * f64::EPSILON * (kf + 1.0) {
        return Err(Error::SingularSingleSearcher { p, k });
    }
    Ok((p - (kf * p * (1.0 - p)).sqrt()) / denominator)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn game(n: u64, k: u64, p: f64) -> GameParams {
        GameParams::new(n, k, p).unwrap()
    }

    fn profile(q: f64, r: f64) -> TrustProfile {
        TrustProfile::new(q, r).unwrap()
    }

    #[test]
    fn params_reject_invalid_values() {
        assert_eq!(GameParams::new(1, 3, 0.5), Err(Error::TooFewSearchers(1)));
        assert_eq!(GameParams::new(5, 0, 0.5), Err(Error::NoDecoyRays(0)));
        assert!(matches!(GameParams::new(5, 3, 0.25), Err(Error::UninformativeSignal { .. })));
        assert!(matches!(GameParams::new(5, 3, 0.2), Err(Error::UninformativeSignal { .. })));
        assert!(matches!(GameParams::new(5, 2, 1.0 / 3.0), Err(Error::UninformativeSignal { .. })));
        assert_eq!(GameParams::new(5, 3, 1.0), Err(Error::PerfectSignal(1.0)));
        assert!(GameParams::new(5, 3, f64::NAN).is_err());
        assert!(GameParams::new(5, 3, 1.0 / 3.0).is_ok());
        assert!(GameParams::new(2, 1, 0.5 + 1e-12).is_ok());
    }

    #[test]
    fn invalid_probability_message_names_bound() {
        let err = GameParams::new(5, 3, 0.2).unwrap_err();
        assert!(err.to_string().starts_with("p must exceed 1/(k+1)"));
    }

    #[test]
    fn derived_examples() {
        assert_eq!(derived(1.0, 3).unwrap(), 0.0);
        assert_eq!(derived(0.5, 1).unwrap(), 0.5);
        assert!((derived(0.7, 3).unwrap() - 0.1).abs() < 1e-15);
        assert!(derived(1.1, 3).is_err());
        assert!(derived(-0.1, 3).is_err());
        assert!(derived(0.5, 0).is_err());
    }

    #[test]
    fn derived_partitions_unit_mass() {
        for k in 1..=12u64 {
            for i in 0..=100 {
                let x = i as f64 / 100.0;
                let s = derived(x, k).unwrap();
                assert!((0.0..=1.0 / k as f64 + 1e-16).contains(&s));
                assert!((x + k as f64 * s - 1.0).abs() < 4.0 * f64::EPSILON);
            }
        }
    }

    #[test]
    fn power_helpers_agree_across_regimes() {
        for &x in &[1e-9_f64, 1e-4, 0.1, 0.5, 0.9] {
            for &m in &[1u64, 2, 17, 1024, 1025, 5000] {
                let direct = (1.0 - x).powf(m as f64);
                let pow = complement_pow(x, m);
                assert!((pow - direct).abs() <= 1e-12 * direct.max(1e-300), "{x} {m}");
                let h = hit(x, m);
                assert!((h - (1.0 - direct)).abs() < 1e-12, "{x} {m}");
            }
        }
        assert_eq!(hit(1.0, 3), 1.0);
        assert_eq!(hit(0.3, 0), 0.0);
        assert_eq!(hit(0.5, 1_000_000), 1.0);
        // tiny m*x keeps relative precision
        let h = hit(1e-12, 3);
        assert!((h / 3e-12 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn payoff_symmetric_two_players() {
        let v = payoff_r(&game(2, 1, 0.6), &profile(0.5, 0.5)).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn payoff_symmetric_reference_case() {
        let v = payoff_r(&game(5, 3, 0.5), &profile(0.53, 0.53)).unwrap();
        assert!((v - 0.2).abs() < 1e-15);
    }

    #[test]
    fn payoff_hand_computed_two_player_values() {
        // n=2, k=1, q=1/2: the other searcher hits the treasure ray with
        // probability 1/2 in either branch. Correct branch with r=0.8: share
        // per turn 0.8*(1/2 + 1/4) = 0.6, no-find 0.5*0.2 = 0.1, total 2/3.
        // Wrong branch r*=0.2: 0.2*0.75 = 0.15 over 1 - 0.5*0.8, total 1/4.
        let v = payoff_r(&game(2, 1, 0.6), &profile(0.5, 0.8)).unwrap();
        assert!((v - (0.6 * 2.0 / 3.0 + 0.4 * 0.25)).abs() < 1e-15);
        // p=2/3, r=1: correct branch 0.75, wrong branch never reaches H.
        let v = payoff_r(&game(2, 1, 2.0 / 3.0), &profile(0.5, 1.0)).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        // r=0: correct branch never reached. Wrong branch r*=1 with k=1:
        // per-turn share 1*(1/2 + 1/4) = 0.75, certain to finish turn one.
        let v = payoff_r(&game(2, 1, 0.6), &profile(0.5, 0.0)).unwrap();
        assert!((v - 0.4 * 0.75).abs() < 1e-15);
    }

    #[test]
    fn payoff_rejects_endpoint_trust() {
        let g = game(5, 3, 0.5);
        assert_eq!(payoff_r(&g, &profile(0.0, 0.5)), Err(Error::DegenerateTrust(0.0)));
        assert_eq!(payoff_r(&g, &profile(1.0, 0.5)), Err(Error::DegenerateTrust(1.0)));
        assert!(payoff_large_n_approx(&g, &profile(1.0, 0.5)).is_err());
    }

    #[test]
    fn payoff_stays_in_unit_interval_at_extreme_population() {
        let g = game(1_000_000, 3, 0.5);
        for &(q, r) in &[(0.3, 0.0), (0.3, 1.0), (0.9, 0.1), (1e-6, 1.0)] {
            let v = payoff_r(&g, &profile(q, r)).unwrap();
            assert!(v.is_finite() && (0.0..=1.0).contains(&v), "{q} {r} {v}");
        }
        let v = payoff_r(&g, &profile(0.42, 0.42)).unwrap();
        assert!((v * 1e6 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn large_n_approximation_examples() {
        for &(n, k, p, q) in &[(5u64, 3u64, 0.5, 0.4), (100, 1, 0.9, 0.2), (3, 7, 0.6, 0.99)] {
            let v = payoff_large_n_approx(&game(n, k, p), &profile(q, q)).unwrap();
            assert!((v - 1.0 / n as f64).abs() < 1e-15);
        }
        let v = payoff_large_n_approx(&game(1000, 3, 0.5), &profile(0.5, 0.6)).unwrap();
        assert!((v - 0.001).abs() < 1e-15);

        let g = game(10_000, 3, 0.5);
        let pr = profile(0.55, 0.55);
        let exact = payoff_r(&g, &pr).unwrap();
        let approx = payoff_large_n_approx(&g, &pr).unwrap();
        assert!(((approx - exact) / exact).abs() < 0.01);
    }

    #[test]
    fn residual_vanishes_at_full_trust() {
        for &(n, k, p) in &[(5u64, 3u64, 0.5), (2, 1, 0.9), (40, 10, 0.2)] {
            assert_eq!(equilibrium_residual(&game(n, k, p), 1.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn residual_near_reference_root() {
        let g = game(5, 3, 0.5);
        let scale = (0..=100)
            .map(|i| 1.0 / 3.0 + (0.8 - 1.0 / 3.0) * i as f64 / 100.0)
            .map(|q| equilibrium_residual(&g, q).unwrap().abs())
            .fold(0.0, f64::max);
        let at = equilibrium_residual(&g, 0.53).unwrap();
        assert!(at.abs() < 5e-3 * scale, "{at} vs scale {scale}");
        assert!(equilibrium_residual(&g, 1.2).is_err());
    }

    #[test]
    fn reliability_map_limits_and_reference_value() {
        for k in 1..=6u64 {
            let floor = 1.0 / (k as f64 + 1.0);
            let lo = reliability_from_trust(5, k, floor + 1e-9).unwrap();
            assert!((lo - floor).abs() < 1e-7, "{k} {lo}");
            let hi = reliability_from_trust(5, k, 1.0 - 1e-9).unwrap();
            assert!((hi - 1.0).abs() < 1e-7, "{k} {hi}");
        }
        let v = reliability_from_trust(5, 3, 0.70).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 5e-3, "{v}");
        assert!(reliability_from_trust(5, 3, 0.25).is_err());
        assert!(reliability_from_trust(5, 3, 1.0).is_err());
        assert!(reliability_from_trust(1, 3, 0.5).is_err());
    }

    #[test]
    fn excess_matches_direct_difference_where_resolvable() {
        for &(n, k) in &[(2u64, 1u64), (5, 3), (10, 10), (30, 2)] {
            for i in 1..50 {
                let floor = 1.0 / (k as f64 + 1.0);
                let q = floor + (1.0 - floor) * i as f64 / 50.0;
                let direct = q - reliability_from_trust(n, k, q).unwrap();
                let stable = trust_excess(n, k, q).unwrap();
                assert!((direct - stable).abs() < 1e-14, "{n} {k} {q}: {direct} {stable}");
                let ln = ln_trust_excess(n, k, q).unwrap();
                assert!((ln.exp() - stable).abs() <= 1e-12 * stable);
            }
        }
    }

    #[test]
    fn excess_survives_underflow() {
        // (5/6)^(n-1) underflows long before n = 10^5, the logarithm does not.
        let ln_small = ln_trust_excess(10_000, 3, 0.5).unwrap();
        let ln_large = ln_trust_excess(100_000, 3, 0.5).unwrap();
        assert!(ln_small.is_finite() && ln_large.is_finite());
        assert!(ln_large < ln_small);
        assert_eq!(trust_excess(100_000, 3, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(monotonicity_threshold(0.9, 1).unwrap(), 3.0);
        let expected = 3.0 + 2.0 * 3f64.ln() / (2.5f64 / 1.5).ln();
        let v = monotonicity_threshold(0.5, 3).unwrap();
        assert!((v - expected).abs() < 1e-14);
        assert!((v - 7.301_320_206_174_247).abs() < 1e-12);
        let near = monotonicity_threshold(0.25 + 1e-9, 3).unwrap();
        assert!(near > 1e6);
        assert!(monotonicity_threshold(0.25, 3).is_err());
        // p -> 1 approaches 3
        assert!((monotonicity_threshold(1.0 - 1e-12, 5).unwrap() - 3.0) < 0.2);
    }

    #[test]
    fn single_searcher_examples() {
        assert!((single_searcher_optimal_trust(0.9, 1).unwrap() - 0.75).abs() < 1e-14);
        let v = single_searcher_optimal_trust(0.9, 2).unwrap();
        assert!((v - (0.9 - 2f64.sqrt() * 0.3) / 0.7).abs() < 1e-14);
        assert!((v - 0.679_622_758_982_959_3).abs() < 1e-12);
        assert!(matches!(single_searcher_optimal_trust(0.5, 1), Err(Error::UninformativeSignal { .. })));
        assert!(matches!(single_searcher_optimal_trust(2.0 / 3.0, 2), Err(Error::SingularSingleSearcher { .. })));
        assert!(matches!(single_searcher_optimal_trust(0.75, 3), Err(Error::SingularSingleSearcher { .. })));
    }

    #[test]
    fn single_searcher_decreasing_in_rays() {
        let values: Vec<f64> = (1..=8).map(|k| single_searcher_optimal_trust(0.95, k).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
    }
}
