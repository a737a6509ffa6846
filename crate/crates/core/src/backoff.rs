//! Exponential-backoff steady state.
//!
//! A saturated station at backoff stage `i` draws its counter from
//! `[0, r^i W0 - 1]`. Treating the conditional collision probability `p_c` as
//! stage-independent gives a transmission probability `p_t(p_c)` that is
//! decreasing in `p_c`, while `p_c(p_t)` (at least `M` of the other `N - 1`
//! stations attempting) is increasing in `p_t`, so the pair has a unique
//! intersection. As `N` grows, `p_c -> 1/r` and the Poisson attempt rate
//! `lambda = N p_t` solves `Pr{X <= M-1} = 1 - 1/r`.

use crate::attempts::{binomial_pmf, AttemptModel};
use crate::error::{Error, Result};
use crate::params::SlotDurations;
use crate::search::{bisect, maximize};
use crate::success::SuccessModel;
use crate::throughput::throughput_asymptotic;

/// Default upper end of the backoff-factor search.
pub const DEFAULT_R_MAX: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackoffParams {
    /// Window multiplier applied after each failed attempt.
    pub r: f64,
    /// Minimum contention window.
    pub w0: u32,
}

impl BackoffParams {
    pub fn new(r: f64, w0: u32) -> Result<Self> {
        let b = BackoffParams { r, w0 };
        b.validate()?;
        Ok(b)
    }

    /// Binary exponential backoff with minimum window `w0`.
    pub fn beb(w0: u32) -> Self {
        BackoffParams { r: 2.0, w0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 1.0 && self.r.is_finite()) {
            return Err(Error::invalid("r", self.r, "r > 1"));
        }
        if self.w0 < 2 {
            return Err(Error::invalid("W0", self.w0, "W0 >= 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub p_t: f64,
    pub p_c: f64,
    pub residual: f64,
}

/// Transmission probability of a saturated station whose attempts collide
/// with probability `p_c`.
pub fn pt_from_pc(p_c: f64, b: &BackoffParams) -> Result<f64> {
    b.validate()?;
    if !(0.0..1.0).contains(&p_c) {
        return Err(Error::invalid("p_c", p_c, "0 <= p_c < 1"));
    }
    let product = b.r * p_c;
    if product >= 1.0 {
        return Err(Error::NoSteadyState { product });
    }
    let w0 = b.w0 as f64;
    let q = 1.0 - product;
    Ok(2.0 * q / (w0 * (1.0 - p_c) + q))
}

/// Probability that at least `m` of the other `n - 1` stations transmit.
pub fn pc_from_pt(p_t: f64, n: usize, m: usize) -> f64 {
    if m >= n || p_t <= 0.0 {
        return 0.0;
    }
    let others = n - 1;
    let below: f64 = (0..m).map(|k| binomial_pmf(others, p_t, k)).sum();
    (1.0 - below).clamp(0.0, 1.0)
}

/// Unique `(p_t, p_c)` satisfying both steady-state relations.
pub fn solve_fixed_point(n: usize, m: usize, b: &BackoffParams) -> Result<FixedPoint> {
    b.validate()?;
    if n < 1 {
        return Err(Error::invalid("N", n, "N >= 1"));
    }
    if m < 1 {
        return Err(Error::invalid("M", m, "M >= 1"));
    }
    // Where r p_c >= 1 the station would need a non-positive attempt
    // probability; treat that as a strongly negative gap.
    let gap = |p_t: f64| match pt_from_pc(pc_from_pt(p_t, n, m), b) {
        Ok(v) => v - p_t,
        Err(_) => -1.0 - p_t,
    };
    if gap(0.0) <= 0.0 {
        return Err(Error::NoSteadyState {
            product: b.r * pc_from_pt(0.0, n, m),
        });
    }
    let p_t = bisect(gap, 0.0, 1.0, 0.0).ok_or(Error::NoSteadyState {
        product: b.r * pc_from_pt(1.0, n, m),
    })?;
    let p_c = pc_from_pt(p_t, n, m);
    let residual = (pt_from_pc(p_c, b)? - p_t).abs();
    Ok(FixedPoint { p_t, p_c, residual })
}

/// Large-population attempt rate: root of `Pr{X <= M-1} = 1 - 1/r`.
pub fn asymptotic_attempt_rate(m: usize, r: f64) -> Result<f64> {
    if !(r > 1.0 && r.is_finite()) {
        return Err(Error::invalid("r", r, "r > 1"));
    }
    if m < 1 {
        return Err(Error::invalid("M", m, "M >= 1"));
    }
    let target = 1.0 - 1.0 / r;
    let f = |lambda: f64| AttemptModel::Poisson { lambda }.cdf(m - 1) - target;
    let mut hi = m as f64 + 10.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e7 {
            return Err(Error::invalid("r", r, "r small enough for a finite attempt rate"));
        }
    }
    Ok(bisect(f, 0.0, hi, 0.0).expect("bracket has a sign change"))
}

/// Asymptotic throughput when every station runs exponential backoff with
/// factor `r`.
pub fn asymptotic_throughput_of_r(
    m: usize,
    r: f64,
    dur: &SlotDurations,
    payload_bits: f64,
) -> Result<f64> {
    let lambda = asymptotic_attempt_rate(m, r)?;
    throughput_asymptotic(m, lambda, dur, payload_bits, &SuccessModel::Ideal)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackoffOptimum {
    pub r: f64,
    pub lambda: f64,
    pub throughput: f64,
    /// The maximizer sits at the upper end of the search range.
    pub at_bound: bool,
}

/// Backoff factor maximizing the asymptotic throughput over `(1, r_max]`.
pub fn optimal_backoff_factor(
    m: usize,
    dur: &SlotDurations,
    payload_bits: f64,
    r_max: f64,
) -> Result<BackoffOptimum> {
    if !(r_max > 1.0 && r_max.is_finite()) {
        return Err(Error::invalid("r_max", r_max, "r_max > 1"));
    }
    if m < 1 {
        return Err(Error::invalid("M", m, "M >= 1"));
    }
    let f = |r: f64| {
        if r <= 1.0 {
            0.0
        } else {
            asymptotic_throughput_of_r(m, r, dur, payload_bits).unwrap_or(0.0)
        }
    };
    let best = maximize(f, 1.0, r_max, 1e-9);
    let at_bound = r_max - best.x < 1e-6 * r_max;
    if at_bound {
        log::warn!("optimal backoff factor for M={m} sits at r_max={r_max}; widen the range");
    }
    Ok(BackoffOptimum {
        r: best.x,
        lambda: asymptotic_attempt_rate(m, best.x)?,
        throughput: best.value,
        at_bound,
    })
}

/// Throughput of binary exponential backoff relative to the best backoff
/// factor.
pub fn beb_efficiency(m: usize, dur: &SlotDurations, payload_bits: f64) -> Result<f64> {
    let beb = asymptotic_throughput_of_r(m, 2.0, dur, payload_bits)?;
    let best = optimal_backoff_factor(m, dur, payload_bits, DEFAULT_R_MAX)?;
    Ok(beb / best.throughput.max(beb))
}
