//! WebAssembly bindings for the interactive page in `www/`.
//!
//! Every function returns a flat `Float64Array` of fixed-width rows so the
//! page can plot it without any glue. Timing and rates follow the
//! 802.11g reference parameters.

use mprlab::backoff::{asymptotic_attempt_rate, optimal_backoff_factor, solve_fixed_point, DEFAULT_R_MAX};
use mprlab::throughput::{optimal_attempt_rate, throughput_asymptotic, throughput_finite};
use mprlab::{slot_durations, AccessMode, BackoffParams, MacTimingParams, NetworkParams, SuccessModel};
use wasm_bindgen::prelude::*;

/// Largest M accepted from the page; keeps a single call well under a second.
pub const MAX_M: usize = 64;

fn mode(s: &str) -> Result<AccessMode, String> {
    s.parse().map_err(|e: mprlab::Error| e.to_string())
}

fn check_m(m: usize) -> Result<(), String> {
    if (1..=MAX_M).contains(&m) {
        Ok(())
    } else {
        Err(format!("M must be in 1..={MAX_M}, got {m}"))
    }
}

fn network(n: usize, m: usize) -> NetworkParams {
    NetworkParams::table1(n, m)
}

/// Optimal throughput for M = 1..=m_max.
/// Rows: `[M, lambda*, S* (bit/s), S*/(M R)]`.
#[wasm_bindgen]
pub fn scaling_curve(access: &str, m_max: usize) -> Result<Vec<f64>, String> {
    let access = mode(access)?;
    check_m(m_max)?;
    let timing = MacTimingParams::table1();
    let mut out = Vec::with_capacity(4 * m_max);
    for m in 1..=m_max {
        let net = network(1, m);
        let dur = slot_durations(access, &net, &timing);
        let o = optimal_attempt_rate(m, &dur, net.payload_bits, &SuccessModel::Ideal)
            .map_err(|e| e.to_string())?;
        out.extend([m as f64, o.lambda, o.throughput, o.throughput / (m as f64 * net.rate)]);
    }
    Ok(out)
}

/// Asymptotic throughput under exponential backoff with factor `r` on a
/// log-spaced grid over `[r_min, r_max]`, followed by one row for the
/// optimal factor. Rows: `[r, lambda, S (bit/s)]`.
#[wasm_bindgen]
pub fn throughput_vs_r(
    access: &str,
    m: usize,
    r_min: f64,
    r_max: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    let access = mode(access)?;
    check_m(m)?;
    if !(r_min > 1.0 && r_max > r_min && r_max.is_finite()) {
        return Err(format!("need 1 < r_min < r_max, got [{r_min}, {r_max}]"));
    }
    if !(2..=2000).contains(&points) {
        return Err(format!("points must be in 2..=2000, got {points}"));
    }
    let net = network(1, m);
    let dur = slot_durations(access, &net, &MacTimingParams::table1());
    let mut out = Vec::with_capacity(3 * (points + 1));
    let step = (r_max / r_min).ln() / (points - 1) as f64;
    for i in 0..points {
        let r = r_min * (step * i as f64).exp();
        let lambda = asymptotic_attempt_rate(m, r).map_err(|e| e.to_string())?;
        let s = throughput_asymptotic(m, lambda, &dur, net.payload_bits, &SuccessModel::Ideal)
            .map_err(|e| e.to_string())?;
        out.extend([r, lambda, s]);
    }
    let best = optimal_backoff_factor(m, &dur, net.payload_bits, DEFAULT_R_MAX).map_err(|e| e.to_string())?;
    out.extend([best.r, best.lambda, best.throughput]);
    Ok(out)
}

/// Finite-population fixed point for `N` saturated stations.
/// Returns `[p_t, p_c, S (bit/s)]`.
#[wasm_bindgen]
pub fn fixed_point(access: &str, n: usize, m: usize, r: f64, w0: u32) -> Result<Vec<f64>, String> {
    let access = mode(access)?;
    check_m(m)?;
    if !(1..=100_000).contains(&n) {
        return Err(format!("N must be in 1..=100000, got {n}"));
    }
    let backoff = BackoffParams::new(r, w0).map_err(|e| e.to_string())?;
    let fp = solve_fixed_point(n, m, &backoff).map_err(|e| e.to_string())?;
    let net = network(n, m);
    let dur = slot_durations(access, &net, &MacTimingParams::table1());
    let s = throughput_finite(&net, fp.p_t, &dur, &SuccessModel::Ideal).map_err(|e| e.to_string())?;
    Ok(vec![fp.p_t, fp.p_c, s])
}
