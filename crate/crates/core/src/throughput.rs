//! Saturation throughput of an MPR channel, its optimum over the attempt
//! probability, and the SIMO single-reception baseline.
//!
//! Throughput is the expected payload delivered per backoff slot divided by
//! the expected slot length. A finite population of `N` stations attempting
//! independently with probability `p_t` gives binomial attempts; the large-`N`
//! limit with `N p_t -> lambda` gives Poisson attempts.

use crate::attempts::AttemptModel;
use crate::error::{Error, Result};
use crate::params::{slot_durations, AccessMode, MacTimingParams, NetworkParams, SlotDurations};
use crate::search::maximize;
use crate::success::SuccessModel;

/// Target bracket width for the attempt-rate and attempt-probability searches.
pub const OPTIMUM_TOL: f64 = 1e-9;

fn throughput_of(
    model: AttemptModel,
    m: usize,
    dur: &SlotDurations,
    payload_bits: f64,
    success: &SuccessModel,
) -> f64 {
    let upper = match model {
        AttemptModel::Binomial { n, .. } => m.min(n),
        AttemptModel::Poisson { .. } => m,
    };
    let delivered: f64 = (1..=upper)
        .map(|k| k as f64 * model.pmf(k) * success.p_success(k, m))
        .sum();
    if delivered == 0.0 {
        return 0.0;
    }
    let sp = model.slot_probabilities(m);
    // Renormalize so a truncated Poisson tail does not shorten the mean slot.
    let mass = sp.idle + sp.succ + sp.coll;
    delivered * payload_bits * mass / dur.mean(sp.idle, sp.succ, sp.coll)
}

/// Finite-population throughput `S_N(M, p_t)` in bits/second.
pub fn throughput_finite(
    net: &NetworkParams,
    p_t: f64,
    dur: &SlotDurations,
    success: &SuccessModel,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_t) {
        return Err(Error::invalid("p_t", p_t, "0 <= p_t <= 1"));
    }
    Ok(throughput_of(
        AttemptModel::Binomial { n: net.n, p_t },
        net.m,
        dur,
        net.payload_bits,
        success,
    ))
}

/// Infinite-population throughput `S_inf(M, lambda)` in bits/second.
pub fn throughput_asymptotic(
    m: usize,
    lambda: f64,
    dur: &SlotDurations,
    payload_bits: f64,
    success: &SuccessModel,
) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda", lambda, "lambda >= 0"));
    }
    if m < 1 {
        return Err(Error::invalid("M", m, "M >= 1"));
    }
    Ok(throughput_of(
        AttemptModel::Poisson { lambda },
        m,
        dur,
        payload_bits,
        success,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttemptRateOptimum {
    pub lambda: f64,
    pub throughput: f64,
}

/// Attempt rate `lambda*` maximizing the asymptotic throughput, searched on
/// `[0, 2M]`.
pub fn optimal_attempt_rate(
    m: usize,
    dur: &SlotDurations,
    payload_bits: f64,
    success: &SuccessModel,
) -> Result<AttemptRateOptimum> {
    if m < 1 {
        return Err(Error::invalid("M", m, "M >= 1"));
    }
    let f = |lambda: f64| {
        throughput_of(AttemptModel::Poisson { lambda }, m, dur, payload_bits, success)
    };
    let best = maximize(f, 0.0, 2.0 * m as f64, OPTIMUM_TOL);
    Ok(AttemptRateOptimum {
        lambda: best.x,
        throughput: best.value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteOptimum {
    pub p_t: f64,
    pub throughput: f64,
    /// `M >= N`: collisions cannot happen and everyone should always transmit.
    pub degenerate: bool,
}

/// Attempt probability `p_t*` maximizing the finite-population throughput.
pub fn optimal_pt_finite(
    net: &NetworkParams,
    dur: &SlotDurations,
    success: &SuccessModel,
) -> Result<FiniteOptimum> {
    net.validate()?;
    if net.m >= net.n {
        return Ok(FiniteOptimum {
            p_t: 1.0,
            throughput: throughput_finite(net, 1.0, dur, success)?,
            degenerate: true,
        });
    }
    let f = |p_t: f64| {
        throughput_of(
            AttemptModel::Binomial { n: net.n, p_t },
            net.m,
            dur,
            net.payload_bits,
            success,
        )
    };
    let best = maximize(f, 0.0, 1.0, OPTIMUM_TOL);
    Ok(FiniteOptimum {
        p_t: best.x,
        throughput: best.value,
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub m: usize,
    /// Optimal attempt rate; `N p_t*` for a finite population.
    pub lambda_star: f64,
    pub s_star: f64,
    pub s_per_m: f64,
}

/// Optimal throughput for `M = 1..=m_max` with fixed slot durations.
pub fn scaling_curve(
    m_max: usize,
    dur: &SlotDurations,
    payload_bits: f64,
    finite_n: Option<usize>,
    success: &SuccessModel,
) -> Result<Vec<ScalingPoint>> {
    scaling_curve_with(m_max, |_| *dur, payload_bits, finite_n, success)
}

/// As [`scaling_curve`], with slot durations that may depend on `M` (e.g.
/// MPR-aware CTS/ACK frames).
pub fn scaling_curve_with<D: Fn(usize) -> SlotDurations>(
    m_max: usize,
    durations_for: D,
    payload_bits: f64,
    finite_n: Option<usize>,
    success: &SuccessModel,
) -> Result<Vec<ScalingPoint>> {
    if m_max < 2 {
        return Err(Error::invalid("M_max", m_max, "M_max >= 2"));
    }
    if let Some(n) = finite_n {
        if m_max > n {
            return Err(Error::invalid("M_max", m_max, "M_max <= N"));
        }
    }
    (1..=m_max)
        .map(|m| {
            let dur = durations_for(m);
            let (lambda_star, s_star) = match finite_n {
                None => {
                    let o = optimal_attempt_rate(m, &dur, payload_bits, success)?;
                    (o.lambda, o.throughput)
                }
                Some(n) => {
                    // Rate is irrelevant for the optimum once durations are fixed.
                    let net = NetworkParams {
                        n,
                        m,
                        rate: 1.0,
                        payload_bits,
                    };
                    let o = optimal_pt_finite(&net, &dur, success)?;
                    (o.p_t * n as f64, o.throughput)
                }
            };
            Ok(ScalingPoint {
                m,
                lambda_star,
                s_star,
                s_per_m: s_star / m as f64,
            })
        })
        .collect()
}

/// SIMO link model: the `M` receive antennas raise the per-link rate by
/// `rate_unit * log_base(M)` instead of resolving simultaneous packets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimoParams {
    pub log_base: f64,
    /// Bits/second per unit of the logarithmic gain.
    pub rate_unit: f64,
}

impl Default for SimoParams {
    fn default() -> Self {
        SimoParams {
            log_base: 2.0,
            rate_unit: 1.0,
        }
    }
}

impl SimoParams {
    fn validate(&self) -> Result<()> {
        if self.log_base.is_nan() || self.log_base <= 1.0 {
            return Err(Error::invalid("log_base", self.log_base, "log_base > 1"));
        }
        if self.rate_unit.is_nan() || self.rate_unit < 0.0 {
            return Err(Error::invalid("rate_unit", self.rate_unit, "rate_unit >= 0"));
        }
        Ok(())
    }

    /// `R + rate_unit * log_base(M)` for `M` antennas.
    pub fn link_rate(&self, rate: f64, antennas: usize) -> f64 {
        rate + self.rate_unit * (antennas as f64).ln() / self.log_base.ln()
    }
}

/// Single-reception network whose links run at the SIMO rate; `net.m` is
/// the antenna count.
fn simo_network(net: &NetworkParams, simo: &SimoParams) -> NetworkParams {
    NetworkParams {
        n: net.n,
        m: 1,
        rate: simo.link_rate(net.rate, net.m),
        payload_bits: net.payload_bits,
    }
}

/// Finite-population SIMO throughput at attempt probability `p_t`.
pub fn simo_throughput(
    net: &NetworkParams,
    p_t: f64,
    mode: AccessMode,
    timing: &MacTimingParams,
    simo: &SimoParams,
) -> Result<f64> {
    net.validate()?;
    simo.validate()?;
    let link = simo_network(net, simo);
    let dur = slot_durations(mode, &link, timing);
    throughput_finite(&link, p_t, &dur, &SuccessModel::Ideal)
}

/// Large-population optimum of the SIMO network, `(R_SIMO) e^-1` for
/// non-carrier-sensing slots.
pub fn simo_asymptotic_optimum(
    net: &NetworkParams,
    mode: AccessMode,
    timing: &MacTimingParams,
    simo: &SimoParams,
) -> Result<AttemptRateOptimum> {
    net.validate()?;
    simo.validate()?;
    let link = simo_network(net, simo);
    let dur = slot_durations(mode, &link, timing);
    optimal_attempt_rate(1, &dur, link.payload_bits, &SuccessModel::Ideal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const R: f64 = 1e6;
    const L: f64 = 1000.0;

    fn aloha() -> SlotDurations {
        SlotDurations::equal(L / R)
    }

    fn net(n: usize, m: usize) -> NetworkParams {
        NetworkParams::new(n, m, R, L).unwrap()
    }

    /// Expected successes per slot by enumerating all 2^N transmit patterns.
    fn enumerated_aloha(n: usize, m: usize, p: f64) -> f64 {
        let mut s = 0.0;
        for mask in 0u32..(1 << n) {
            let k = mask.count_ones() as usize;
            let prob = p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
            if k >= 1 && k <= m {
                s += k as f64 * prob;
            }
        }
        s * R
    }

    #[test]
    fn two_station_enumeration() {
        let s = throughput_finite(&net(2, 1), 0.5, &aloha(), &SuccessModel::Ideal).unwrap();
        assert_relative_eq!(s, 0.5 * R, max_relative = 1e-14);
        let s = throughput_finite(&net(2, 2), 0.5, &aloha(), &SuccessModel::Ideal).unwrap();
        assert_relative_eq!(s, 1.0 * R, max_relative = 1e-14);
    }

    #[test]
    fn matches_enumeration_oracle() {
        for (n, m, p) in [(5, 1, 0.2), (6, 2, 0.37), (8, 3, 0.6), (10, 4, 0.05)] {
            let s = throughput_finite(&net(n, m), p, &aloha(), &SuccessModel::Ideal).unwrap();
            assert_relative_eq!(s, enumerated_aloha(n, m, p), max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_attempts_zero_throughput() {
        for m in 1..5 {
            assert_eq!(
                throughput_finite(&net(10, m), 0.0, &aloha(), &SuccessModel::Ideal).unwrap(),
                0.0
            );
            assert_eq!(
                throughput_asymptotic(m, 0.0, &aloha(), L, &SuccessModel::Ideal).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn rejects_out_of_range_inputs() {
        assert!(throughput_finite(&net(3, 1), 1.5, &aloha(), &SuccessModel::Ideal).is_err());
        assert!(throughput_finite(&net(3, 1), -0.1, &aloha(), &SuccessModel::Ideal).is_err());
        assert!(throughput_asymptotic(1, -1.0, &aloha(), L, &SuccessModel::Ideal).is_err());
    }

    #[test]
    fn asymptotic_closed_forms() {
        let s = throughput_asymptotic(1, 1.0, &aloha(), L, &SuccessModel::Ideal).unwrap();
        assert_relative_eq!(s / R, (-1.0f64).exp(), max_relative = 1e-13);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let s = throughput_asymptotic(2, phi, &aloha(), L, &SuccessModel::Ideal).unwrap();
        let expected = phi * (-phi).exp() * (1.0 + phi);
        assert_relative_eq!(s / R, expected, max_relative = 1e-13);
        assert_relative_eq!(s / R, 0.8399, epsilon = 1e-4);
    }

    #[test]
    fn optimal_rate_small_m() {
        let o = optimal_attempt_rate(1, &aloha(), L, &SuccessModel::Ideal).unwrap();
        assert!((o.lambda - 1.0).abs() < 1e-8, "{}", o.lambda);
        let o2 = optimal_attempt_rate(2, &aloha(), L, &SuccessModel::Ideal).unwrap();
        assert!((o2.lambda - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-8, "{}", o2.lambda);
        // lambda*/M dips below its M = 2 value before climbing towards 1
        // (values from an independent bounded scalar minimizer).
        let o10 = optimal_attempt_rate(10, &aloha(), L, &SuccessModel::Ideal).unwrap();
        assert!((o10.lambda - 7.296_972_722_7).abs() < 1e-7, "{}", o10.lambda);
        assert!(o10.lambda < 10.0);
        let o30 = optimal_attempt_rate(30, &aloha(), L, &SuccessModel::Ideal).unwrap();
        assert!((o30.lambda - 23.285_091_693).abs() < 1e-6, "{}", o30.lambda);
        assert!(o30.lambda / 30.0 > o10.lambda / 10.0);
    }

    #[test]
    fn stationarity_condition_at_optimum() {
        for m in 1..=30 {
            let o = optimal_attempt_rate(m, &aloha(), L, &SuccessModel::Ideal).unwrap();
            let pois = AttemptModel::Poisson { lambda: o.lambda };
            let residual = pois.cdf(m - 1) - m as f64 * pois.pmf(m);
            assert!(residual.abs() < 1e-8, "M={m} residual={residual}");
        }
    }

    #[test]
    fn finite_optimum_single_reception_is_one_over_n() {
        let o = optimal_pt_finite(&net(10, 1), &aloha(), &SuccessModel::Ideal).unwrap();
        assert!((o.p_t - 0.1).abs() < 1e-8);
        assert!(!o.degenerate);
    }

    #[test]
    fn finite_optimum_degenerate() {
        let o = optimal_pt_finite(&net(2, 2), &aloha(), &SuccessModel::Ideal).unwrap();
        assert!(o.degenerate);
        assert_eq!(o.p_t, 1.0);
        assert_relative_eq!(o.throughput, 2.0 * R);
        let o = optimal_pt_finite(&net(2, 5), &aloha(), &SuccessModel::Ideal).unwrap();
        assert!(o.degenerate);
    }

    #[test]
    fn finite_optimum_satisfies_derivative_identity() {
        for (n, m) in [(10, 1), (20, 3), (50, 4), (50, 10)] {
            let o = optimal_pt_finite(&net(n, m), &aloha(), &SuccessModel::Ideal).unwrap();
            let b = AttemptModel::Binomial { n, p_t: o.p_t };
            let rhs = R * (m * (m + 1)) as f64 * b.pmf(m + 1);
            assert_relative_eq!(o.throughput, rhs, max_relative = 1e-6);
        }
    }

    #[test]
    fn finite_optimum_matches_grid() {
        let nw = net(50, 4);
        let o = optimal_pt_finite(&nw, &aloha(), &SuccessModel::Ideal).unwrap();
        let grid = (1..100_000)
            .map(|i| throughput_finite(&nw, i as f64 * 1e-5, &aloha(), &SuccessModel::Ideal).unwrap())
            .fold(0.0, f64::max);
        assert_relative_eq!(o.throughput, grid, max_relative = 1e-4);
        assert!(o.throughput >= grid);
    }

    #[test]
    fn scaling_curve_first_points() {
        let c = scaling_curve(2, &aloha(), L, None, &SuccessModel::Ideal).unwrap();
        assert_relative_eq!(c[0].s_per_m / R, 0.3679, epsilon = 1e-4);
        assert_relative_eq!(c[1].s_per_m / R, 0.4199, epsilon = 1e-4);
        assert!(scaling_curve(1, &aloha(), L, None, &SuccessModel::Ideal).is_err());
        assert!(scaling_curve(6, &aloha(), L, Some(5), &SuccessModel::Ideal).is_err());
    }

    #[test]
    fn finite_scaling_is_superlinear() {
        let c = scaling_curve(10, &aloha(), L, Some(20), &SuccessModel::Ideal).unwrap();
        for w in c.windows(2) {
            assert!(w[1].s_per_m >= w[0].s_per_m, "{:?}", w);
        }
    }

    #[test]
    fn finite_tends_to_asymptotic() {
        for m in [1usize, 2, 4, 8] {
            for lambda in [0.5, m as f64 * 0.7, m as f64] {
                let n = 10_000;
                let fin =
                    throughput_finite(&net(n, m), lambda / n as f64, &aloha(), &SuccessModel::Ideal)
                        .unwrap();
                let asy = throughput_asymptotic(m, lambda, &aloha(), L, &SuccessModel::Ideal).unwrap();
                assert!((fin - asy).abs() / asy < 0.01, "M={m} lambda={lambda}");
            }
        }
    }

    #[test]
    fn erasure_scales_delivered_payload() {
        let ideal = throughput_finite(&net(10, 2), 0.2, &aloha(), &SuccessModel::Ideal).unwrap();
        let lossy =
            throughput_finite(&net(10, 2), 0.2, &aloha(), &SuccessModel::Erasure { epsilon: 0.1 })
                .unwrap();
        assert_relative_eq!(lossy, 0.9 * ideal, max_relative = 1e-14);
    }

    #[test]
    fn simo_single_antenna_is_plain_network() {
        let t = MacTimingParams::table1();
        let nw = NetworkParams::table1(20, 1);
        for mode in AccessMode::ALL {
            let simo = simo_throughput(&nw, 0.05, mode, &t, &SimoParams::default()).unwrap();
            let dur = slot_durations(mode, &nw, &t);
            let plain = throughput_finite(&nw, 0.05, &dur, &SuccessModel::Ideal).unwrap();
            assert_relative_eq!(simo, plain, max_relative = 1e-14);
        }
    }

    #[test]
    fn simo_aloha_closed_form() {
        let t = MacTimingParams::table1();
        let params = SimoParams {
            log_base: 2.0,
            rate_unit: 1e6,
        };
        for m in 1..=8 {
            let nw = NetworkParams::table1(40, m);
            let p = 0.03;
            let s = simo_throughput(&nw, p, AccessMode::NonCarrierSensing, &t, &params).unwrap();
            let rate = 54e6 + 1e6 * (m as f64).log2();
            let expected = rate * 40.0 * p * (1.0 - p).powi(39);
            assert_relative_eq!(s, expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn simo_rejects_small_log_base() {
        let t = MacTimingParams::table1();
        let nw = NetworkParams::table1(5, 2);
        let bad = SimoParams {
            log_base: 1.0,
            rate_unit: 1.0,
        };
        assert!(simo_throughput(&nw, 0.1, AccessMode::NonCarrierSensing, &t, &bad).is_err());
    }
}
