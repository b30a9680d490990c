//! One-tailed exact binomial tests, Holm's step-down correction and the
//! minimum sample size needed for a test to be able to reject.

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("successes {successes} exceed trials {trials}")]
    SuccessesExceedTrials { successes: u64, trials: u64 },
    #[error("success probability {0} must lie strictly between 0 and 1")]
    Probability(Rational64),
    #[error("significance level {0} must lie strictly between 0 and 1")]
    Alpha(f64),
    #[error("p-value {0} at index {1} is outside [0, 1]")]
    PValue(f64, usize),
    #[error("no p-values to adjust")]
    Empty,
}

/// Observed successes out of `trials` under success probability `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialTestInput {
    pub successes: u64,
    pub trials: u64,
    pub p: Rational64,
    pub alpha: f64,
}

impl BinomialTestInput {
    pub fn new(successes: u64, trials: u64, p: Rational64, alpha: f64) -> Result<Self, StatsError> {
        if successes > trials {
            return Err(StatsError::SuccessesExceedTrials { successes, trials });
        }
        check_probability(p)?;
        check_alpha(alpha)?;
        Ok(Self {
            successes,
            trials,
            p,
            alpha,
        })
    }
}

fn check_probability(p: Rational64) -> Result<(), StatsError> {
    if p <= Rational64::zero() || p >= Rational64::one() {
        return Err(StatsError::Probability(p));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<(), StatsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::Alpha(alpha));
    }
    Ok(())
}

/// `ln p` and `ln (1 - p)` taken from the exact fraction.
fn log_probabilities(p: Rational64) -> (f64, f64) {
    let num = *p.numer() as f64;
    let den = *p.denom() as f64;
    let rest = (*p.denom() - *p.numer()) as f64;
    (num.ln() - den.ln(), rest.ln() - den.ln())
}

/// Natural log of `P(X >= g)` for `X ~ Binomial(m, p)`.
pub fn ln_binomial_upper_tail(input: &BinomialTestInput) -> f64 {
    let (g, m) = (input.successes, input.trials);
    if g == 0 {
        return 0.0;
    }
    let (ln_p, ln_q) = log_probabilities(input.p);
    if (g as f64) <= m as f64 * ln_p.exp() {
        // Mostly mass: sum the short side and take the complement.
        return ln_one_minus_exp(ln_raw_tail(m - g + 1, m, ln_q, ln_p));
    }
    ln_raw_tail(g, m, ln_p, ln_q)
}

/// Natural log of `P(X <= g)` for `X ~ Binomial(m, p)`.
pub fn ln_binomial_lower_tail(input: &BinomialTestInput) -> f64 {
    let (g, m) = (input.successes, input.trials);
    if g == m {
        return 0.0;
    }
    // Lower tail of X is the upper tail of m - X, which has success probability 1 - p.
    let (ln_p, ln_q) = log_probabilities(input.p);
    if (g as f64) >= m as f64 * ln_p.exp() {
        return ln_one_minus_exp(ln_raw_tail(g + 1, m, ln_p, ln_q));
    }
    ln_raw_tail(m - g, m, ln_q, ln_p)
}

/// `ln P(X >= g)` summed term by term, `ln_p` being the success log-probability.
fn ln_raw_tail(g: u64, m: u64, ln_p: f64, ln_q: f64) -> f64 {
    let ln_choose_g = ln_binomial_coefficient(m, g);
    ln_sum_terms(g..=m, m, ln_choose_g, ln_p, ln_q).min(0.0)
}

fn ln_one_minus_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

pub fn binomial_upper_tail(input: &BinomialTestInput) -> f64 {
    ln_binomial_upper_tail(input).exp()
}

pub fn binomial_lower_tail(input: &BinomialTestInput) -> f64 {
    ln_binomial_lower_tail(input).exp()
}

fn ln_binomial_coefficient(m: u64, k: u64) -> f64 {
    let k = k.min(m - k);
    (1..=k).map(|i| ((m - k + i) as f64 / i as f64).ln()).sum()
}

/// Log-sum-exp of `C(m, f) p^f q^(m - f)` over `range`, where `ln_choose_start`
/// is `ln C(m, start)`. Stops once terms past the mode fall below double precision.
fn ln_sum_terms(
    range: std::ops::RangeInclusive<u64>,
    m: u64,
    ln_choose_start: f64,
    ln_p: f64,
    ln_q: f64,
) -> f64 {
    const NEGLIGIBLE: f64 = -50.0;
    let mut ln_choose = ln_choose_start;
    let mut terms = Vec::new();
    let mut peak = f64::NEG_INFINITY;
    for f in range {
        let term = ln_choose + f as f64 * ln_p + (m - f) as f64 * ln_q;
        if term < peak + NEGLIGIBLE {
            break;
        }
        peak = peak.max(term);
        terms.push(term);
        if f < m {
            ln_choose += ((m - f) as f64 / (f + 1) as f64).ln();
        }
    }
    // The terms are unimodal, so once one drops far below the running peak
    // every later one does too.
    let sum: f64 = terms.iter().map(|t| (t - peak).exp()).sum();
    peak + sum.ln()
}

/// Exact rational `P(X >= g)`; the reference the log-space path is checked
/// against. Cost grows quickly with `m`.
pub fn exact_binomial_upper_tail(successes: u64, trials: u64, p: Rational64) -> BigRational {
    let p = BigRational::new(BigInt::from(*p.numer()), BigInt::from(*p.denom()));
    let q = BigRational::one() - &p;
    let mut total = BigRational::zero();
    let mut choose = BigInt::one();
    for f in 0..=trials {
        if f >= successes {
            let term = BigRational::from_integer(choose.clone()) * pow(&p, f) * pow(&q, trials - f);
            total += term;
        }
        choose = choose * BigInt::from(trials - f) / BigInt::from(f + 1);
    }
    total
}

fn pow(base: &BigRational, exp: u64) -> BigRational {
    num_traits::pow(base.clone(), exp as usize)
}

/// Holm-adjusted p-values and the rejection decision at `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjustedPValues {
    pub raw: Vec<f64>,
    pub adjusted: Vec<f64>,
    pub rejected: Vec<bool>,
}

/// Holm's step-down adjustment. Output is in input order.
pub fn holm_adjust(raw: &[f64], alpha: f64) -> Result<AdjustedPValues, StatsError> {
    check_alpha(alpha)?;
    if raw.is_empty() {
        return Err(StatsError::Empty);
    }
    if let Some((i, &p)) = raw
        .iter()
        .enumerate()
        .find(|(_, p)| !(0.0..=1.0).contains(*p))
    {
        return Err(StatsError::PValue(p, i));
    }
    let adjusted = step_down(raw, |p, factor| (p * factor as f64).min(1.0));
    let rejected = adjusted.iter().map(|&p| p <= alpha).collect();
    Ok(AdjustedPValues {
        raw: raw.to_vec(),
        adjusted,
        rejected,
    })
}

/// Holm adjustment on natural-log p-values, for p-values too small for `f64`.
pub fn holm_adjust_ln(raw_ln: &[f64]) -> Vec<f64> {
    step_down(raw_ln, |ln_p, factor| {
        (ln_p + (factor as f64).ln()).min(0.0)
    })
}

/// `scale(value, factor)` applies the multiplier `lambda - rank` to a sorted value.
fn step_down(values: &[f64], scale: impl Fn(f64, usize) -> f64) -> Vec<f64> {
    let lambda = values.len();
    let mut order: Vec<usize> = (0..lambda).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut adjusted = vec![0.0; lambda];
    let mut running = f64::NEG_INFINITY;
    for (rank, &i) in order.iter().enumerate() {
        running = running.max(scale(values[i], lambda - rank));
        adjusted[i] = running;
    }
    adjusted
}

/// Smallest `m` with `p^m <= alpha`, i.e. `ceil(ln alpha / ln p)` with the
/// boundary settled by exact comparison.
pub fn min_sample_size(p: Rational64, alpha: f64) -> Result<u64, StatsError> {
    check_probability(p)?;
    check_alpha(alpha)?;
    let (ln_p, _) = log_probabilities(p);
    let estimate = (alpha.ln() / ln_p).ceil().max(1.0) as u64;

    let exact_p = BigRational::new(BigInt::from(*p.numer()), BigInt::from(*p.denom()));
    let exact_alpha = BigRational::from_float(alpha).expect("alpha is finite");
    let reaches = |m: u64| pow(&exact_p, m) <= exact_alpha;

    let mut m = estimate;
    while !reaches(m) {
        m += 1;
    }
    while m > 1 && reaches(m - 1) {
        m -= 1;
    }
    Ok(m)
}
