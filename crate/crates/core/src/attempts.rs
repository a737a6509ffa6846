//! Distribution of the number of simultaneous attempts in a backoff slot.

use statrs::function::factorial::{ln_binomial, ln_factorial};

/// Cumulative mass at which the Poisson tail is truncated.
pub const POISSON_MASS: f64 = 1.0 - 1e-12;

/// Number of attempts in a slot: binomial for a finite population, Poisson
/// for the large-population limit with `lambda = N p_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttemptModel {
    Binomial { n: usize, p_t: f64 },
    Poisson { lambda: f64 },
}

impl AttemptModel {
    /// `Pr{X = k}`. Out-of-support `k` gives 0.
    pub fn pmf(&self, k: usize) -> f64 {
        match *self {
            AttemptModel::Binomial { n, p_t } => binomial_pmf(n, p_t, k),
            AttemptModel::Poisson { lambda } => poisson_pmf(lambda, k),
        }
    }

    /// `Pr{X <= k}`.
    pub fn cdf(&self, k: usize) -> f64 {
        (0..=k).map(|j| self.pmf(j)).sum::<f64>().min(1.0)
    }

    /// Probabilities of idle, success (1..=m attempts) and collision (> m)
    /// slots.
    pub fn slot_probabilities(&self, m: usize) -> SlotProbabilities {
        let idle = self.pmf(0);
        let succ: f64 = (1..=m).map(|k| self.pmf(k)).sum();
        let coll = match *self {
            AttemptModel::Binomial { n, .. } => {
                if m >= n {
                    0.0
                } else {
                    (1.0 - idle - succ).max(0.0)
                }
            }
            AttemptModel::Poisson { lambda } => poisson_tail(lambda, m, idle + succ),
        };
        SlotProbabilities { idle, succ, coll }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotProbabilities {
    pub idle: f64,
    pub succ: f64,
    pub coll: f64,
}

pub fn binomial_pmf(n: usize, p: f64, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let ln = ln_binomial(n as u64, k as u64) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p();
    ln.exp()
}

pub fn poisson_pmf(lambda: f64, k: usize) -> f64 {
    if lambda <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * lambda.ln() - lambda - ln_factorial(k as u64)).exp()
}

/// `Pr{X > m}` summed term by term until the cumulative mass reaches
/// [`POISSON_MASS`]. `head` is `Pr{X <= m}`.
fn poisson_tail(lambda: f64, m: usize, head: f64) -> f64 {
    let mut total = head;
    let mut tail = 0.0;
    let mut k = m + 1;
    // Past the mode the terms decay geometrically; the cap only guards against
    // round-off keeping `total` just below the target.
    let cap = (lambda + 40.0 * lambda.sqrt() + 100.0) as usize + m;
    while total < POISSON_MASS && k <= cap {
        let t = poisson_pmf(lambda, k);
        tail += t;
        total += t;
        k += 1;
    }
    tail
}
