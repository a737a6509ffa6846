use mprlab::backoff::{
    asymptotic_attempt_rate, asymptotic_throughput_of_r, optimal_backoff_factor, solve_fixed_point,
};
use mprlab::phy::{
    align_ambiguity, blind_detect_exhaustive, blind_detect_ilsp, estimate_source_count,
    mmse_detect, synthesize, zf_detect, IlspOptions,
};
use mprlab::sim::{self, SimConfig};
use mprlab::throughput::{
    optimal_attempt_rate, scaling_curve_with, simo_asymptotic_optimum, throughput_finite, SimoParams,
};
use mprlab::{slot_durations, AccessMode, BackoffParams, SlotDurations};
use rayon::prelude::*;

use crate::config::{
    BackoffStudy, Config, Detector, FixedPointGrid, PhyDemo, RSweep, Scaling, SimoCompare, Simulate,
};
use crate::CliError;

/// A CSV table with a leading `#` comment line.
#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    pub comment: String,
    pub header: String,
    pub rows: Vec<String>,
}

impl Csv {
    fn new(comment: String, header: &str) -> Self {
        Csv {
            comment,
            header: header.to_string(),
            rows: Vec::new(),
        }
    }

    /// Header and data rows, without the comment line.
    pub fn body(&self) -> String {
        let mut out = self.header.clone();
        out.push('\n');
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out
    }

    pub fn render(&self) -> String {
        format!("# {}\n{}", self.comment, self.body())
    }
}

/// Throughput in bits/second, six significant digits.
pub fn fmt_bps(x: f64) -> String {
    format!("{x:.5e}")
}

/// Probabilities and other unit-interval quantities.
pub fn fmt_p(x: f64) -> String {
    format!("{x:.8}")
}

pub const SCALING_HEADER: &str = "M,lambda_star,S_star_bps,S_per_M_norm";
pub const FIXED_POINT_HEADER: &str =
    "N,M,r,W0,pt_analytic,pc_analytic,pt_sim,pc_sim,thr_analytic_bps,thr_sim_bps";
pub const OPTIMAL_R_HEADER: &str = "M,mode,r_star,S_star_bps,S_beb_bps,beb_ratio";
pub const BEB_HEADER: &str = "M,mode,S_beb_bps,S_opt_bps,r_star,beb_efficiency";
pub const R_SWEEP_HEADER: &str = "M,mode,r,lambda,S_bps";
pub const SIMULATE_HEADER: &str = "run,seed,N,M,r,W0,mode,idle_slots,success_slots,collision_slots,\
pt_hat,pc_hat,pt_se,thr_sim_bps,pt_analytic,thr_analytic_bps";
pub const SIMO_HEADER: &str = "M,S_mpr_bps,S_simo_bps,S_mpr_per_M_norm,S_simo_per_M_norm,simo_rate_bps";
pub const PHY_HEADER: &str = "detector,K,M_ant,snr_db,N_sym,trials,symbol_error_rate,recovery_rate";

fn durations(cfg: &Config, mode: AccessMode, n: usize, m: usize) -> SlotDurations {
    slot_durations(mode, &cfg.common.network(n, m), &cfg.common.timing)
}

pub fn scaling(cfg: &Config, params: &Scaling, seed: u64) -> Result<Csv, CliError> {
    let mut csv = Csv::new(cfg.comment("scaling", seed, &params_scaling(params)), SCALING_HEADER);
    let n_for_timing = params.n.unwrap_or(1);
    let curve = scaling_curve_with(
        params.m_max,
        |m| durations(cfg, params.mode, n_for_timing, m),
        cfg.common.payload_bits,
        params.n,
        &cfg.common.success,
    )?;
    for p in curve {
        csv.rows.push(format!(
            "{},{},{},{}",
            p.m,
            fmt_p(p.lambda_star),
            fmt_bps(p.s_star),
            fmt_p(p.s_per_m / cfg.common.rate)
        ));
    }
    Ok(csv)
}

pub fn fixed_point(cfg: &Config, grid: &FixedPointGrid, seed: u64) -> Result<Csv, CliError> {
    let mut csv = Csv::new(
        cfg.comment("fixed-point", seed, &params_fixed_point(grid)),
        FIXED_POINT_HEADER,
    );
    let mut cells = Vec::new();
    for &n in &grid.n {
        for &m in &grid.m {
            for &r in &grid.r {
                for &w0 in &grid.w0 {
                    let backoff = BackoffParams::new(r, w0)?;
                    let net = cfg.common.network(n, m);
                    let fp = solve_fixed_point(n, m, &backoff)?;
                    let mut sc = SimConfig::new(net, backoff);
                    sc.mode = grid.mode;
                    sc.timing = cfg.common.timing;
                    sc.success = cfg.common.success;
                    sc.warmup_slots = grid.warmup_slots;
                    sc.measure_slots = grid.measure_slots;
                    sc.seed = seed;
                    cells.push((fp, sc));
                }
            }
        }
    }
    let sims: Vec<Option<sim::SimStats>> = if grid.simulate {
        let configs: Vec<SimConfig> = cells.iter().map(|(_, c)| *c).collect();
        sim::sweep(&configs)
            .into_iter()
            .map(|r| r.map(Some))
            .collect::<Result<_, _>>()?
    } else {
        vec![None; cells.len()]
    };
    for ((fp, sc), s) in cells.iter().zip(sims) {
        let thr = throughput_finite(&sc.net, fp.p_t, &sc.durations(), &sc.success)?;
        let (pt, pc, ts) = match s {
            Some(s) => (fmt_p(s.pt_hat), fmt_p(s.pc_hat), fmt_bps(s.throughput)),
            None => ("NA".into(), "NA".into(), "NA".into()),
        };
        csv.rows.push(format!(
            "{},{},{},{},{},{},{pt},{pc},{},{ts}",
            sc.net.n,
            sc.net.m,
            sc.backoff.r,
            sc.backoff.w0,
            fmt_p(fp.p_t),
            fmt_p(fp.p_c),
            fmt_bps(thr)
        ));
    }
    Ok(csv)
}

struct BackoffRow {
    m: usize,
    mode: AccessMode,
    r_star: f64,
    s_star: f64,
    s_beb: f64,
}

fn backoff_rows(cfg: &Config, study: &BackoffStudy) -> Result<Vec<BackoffRow>, CliError> {
    let mut rows = Vec::new();
    for &mode in &study.modes {
        for &m in &study.m {
            let dur = durations(cfg, mode, 1, m);
            let l = cfg.common.payload_bits;
            let best = optimal_backoff_factor(m, &dur, l, study.r_max)?;
            let s_beb = asymptotic_throughput_of_r(m, 2.0, &dur, l)?;
            rows.push(BackoffRow {
                m,
                mode,
                r_star: best.r,
                s_star: best.throughput.max(s_beb),
                s_beb,
            });
        }
    }
    Ok(rows)
}

pub fn optimal_r(cfg: &Config, study: &BackoffStudy, seed: u64) -> Result<Csv, CliError> {
    let mut csv = Csv::new(cfg.comment("optimal-r", seed, &params_study(study)), OPTIMAL_R_HEADER);
    for r in backoff_rows(cfg, study)? {
        csv.rows.push(format!(
            "{},{},{:.6},{},{},{}",
            r.m,
            r.mode,
            r.r_star,
            fmt_bps(r.s_star),
            fmt_bps(r.s_beb),
            fmt_p(r.s_beb / r.s_star)
        ));
    }
    Ok(csv)
}

pub fn beb_efficiency(cfg: &Config, study: &BackoffStudy, seed: u64) -> Result<Csv, CliError> {
    let mut csv = Csv::new(cfg.comment("beb-efficiency", seed, &params_study(study)), BEB_HEADER);
    for r in backoff_rows(cfg, study)? {
        csv.rows.push(format!(
            "{},{},{},{},{:.6},{}",
            r.m,
            r.mode,
            fmt_bps(r.s_beb),
            fmt_bps(r.s_star),
            r.r_star,
            fmt_p(r.s_beb / r.s_star)
        ));
    }
    Ok(csv)
}

pub fn r_sweep(cfg: &Config, sweep: &RSweep, seed: u64) -> Result<Csv, CliError> {
    let mut csv = Csv::new(cfg.comment("r-sweep", seed, &params_r_sweep(sweep)), R_SWEEP_HEADER);
    for &m in &sweep.m {
        let dur = durations(cfg, sweep.mode, 1, m);
        for i in 0..sweep.points {
            let r = sweep.r_min + (sweep.r_max - sweep.r_min) * i as f64 / (sweep.points - 1) as f64;
            let lambda = asymptotic_attempt_rate(m, r)?;
            let s = asymptotic_throughput_of_r(m, r, &dur, cfg.common.payload_bits)?;
            csv.rows.push(format!(
                "{m},{},{:.6},{},{}",
                sweep.mode,
                r,
                fmt_p(lambda),
                fmt_bps(s)
            ));
        }
    }
    Ok(csv)
}

pub fn simulate(cfg: &Config, seed: u64) -> Result<Csv, CliError> {
    let p = &cfg.simulate;
    let mut csv = Csv::new(cfg.comment("simulate", seed, &params_simulate(p)), SIMULATE_HEADER);
    let net = cfg.common.network(p.n, p.m);
    let backoff = BackoffParams::new(p.r, p.w0)?;
    let mut base = SimConfig::new(net, backoff);
    base.mode = p.mode;
    base.timing = cfg.common.timing;
    base.success = cfg.common.success;
    base.warmup_slots = p.warmup_slots;
    base.measure_slots = p.measure_slots;
    base.seed = seed;
    let fp = solve_fixed_point(p.n, p.m, &backoff)?;
    let thr = throughput_finite(&net, fp.p_t, &base.durations(), &base.success)?;
    let configs = vec![base; p.runs];
    for (i, s) in sim::sweep(&configs).into_iter().enumerate() {
        let s = s?;
        let c = &s.slot_counts;
        csv.rows.push(format!(
            "{i},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            seed ^ i as u64,
            p.n,
            p.m,
            p.r,
            p.w0,
            p.mode,
            c.idle,
            c.success,
            c.collision,
            fmt_p(s.pt_hat),
            fmt_p(s.pc_hat),
            fmt_p(s.pt_standard_error()),
            fmt_bps(s.throughput),
            fmt_p(fp.p_t),
            fmt_bps(thr)
        ));
    }
    Ok(csv)
}

pub fn simo_compare(cfg: &Config, seed: u64) -> Result<Csv, CliError> {
    let p = &cfg.simo;
    let mut csv = Csv::new(cfg.comment("simo-compare", seed, &params_simo(p)), SIMO_HEADER);
    let simo = SimoParams {
        log_base: p.log_base,
        rate_unit: p.rate_unit_bps,
    };
    let r = cfg.common.rate;
    for m in 1..=p.m_max {
        let net = cfg.common.network(1, m);
        let dur = durations(cfg, p.mode, 1, m);
        let mpr = optimal_attempt_rate(m, &dur, cfg.common.payload_bits, &cfg.common.success)?;
        let s = simo_asymptotic_optimum(&net, p.mode, &cfg.common.timing, &simo)?;
        csv.rows.push(format!(
            "{m},{},{},{},{},{}",
            fmt_bps(mpr.throughput),
            fmt_bps(s.throughput),
            fmt_p(mpr.throughput / (m as f64 * r)),
            fmt_p(s.throughput / (m as f64 * r)),
            fmt_bps(simo.link_rate(r, m))
        ));
    }
    Ok(csv)
}

/// Per-trial outcome: symbol errors (or a miss for source counting) and
/// whether the trial was recovered exactly.
fn phy_trial(cfg: &Config, det: Detector, snr: f64, seed: u64) -> Result<(usize, bool), CliError> {
    let p = &cfg.phy;
    let block = synthesize(p.m_ant, p.k, p.n_sym, &p.alphabet, snr, seed)?;
    let all = p.k * p.n_sym;
    let errors = match det {
        Detector::Zf => zf_detect(&block, &p.alphabet).map_or(all, |r| r.symbol_errors.unwrap_or(all)),
        Detector::Mmse => {
            mmse_detect(&block, &p.alphabet).map_or(all, |r| r.symbol_errors.unwrap_or(all))
        }
        Detector::Count => {
            let k_hat = estimate_source_count(&block.y, p.threshold);
            return Ok((usize::from(k_hat != p.k), k_hat == p.k));
        }
        Detector::Exhaustive => blind_detect_exhaustive(&block.y, p.k, &p.alphabet)
            .map_or(all, |r| align_ambiguity(&r.x_hat, &block.x, &p.alphabet).1),
        Detector::Ilsp => {
            let opts = IlspOptions {
                max_iter: p.max_iter,
                restarts: p.restarts,
                seed,
                init_h: None,
            };
            blind_detect_ilsp(&block.y, p.k, &p.alphabet, &opts)
                .map_or(all, |o| align_ambiguity(&o.result.x_hat, &block.x, &p.alphabet).1)
        }
    };
    Ok((errors, errors == 0))
}

pub fn phy_demo(cfg: &Config, seed: u64) -> Result<Csv, CliError> {
    let p = &cfg.phy;
    let mut csv = Csv::new(cfg.comment("phy-demo", seed, &params_phy(p)), PHY_HEADER);
    for &det in &p.detectors {
        for &snr in &p.snr_db {
            // same blocks for every detector at a given SNR
            let outcomes: Vec<(usize, bool)> = (0..p.trials as u64)
                .into_par_iter()
                .map(|t| phy_trial(cfg, det, snr, seed.wrapping_add(t)))
                .collect::<Result<_, _>>()?;
            let errors: usize = outcomes.iter().map(|o| o.0).sum();
            let recovered = outcomes.iter().filter(|o| o.1).count();
            let ser = match det {
                Detector::Count => "NA".to_string(),
                _ => fmt_p(errors as f64 / (p.k * p.n_sym * p.trials) as f64),
            };
            csv.rows.push(format!(
                "{},{},{},{},{},{},{ser},{}",
                det.as_str(),
                p.k,
                p.m_ant,
                snr,
                p.n_sym,
                p.trials,
                fmt_p(recovered as f64 / p.trials as f64)
            ));
        }
    }
    Ok(csv)
}

/// Reference parameters as resolved from the config.
pub fn table1(cfg: &Config, seed: u64) -> Csv {
    let t = &cfg.common.timing;
    let mut csv = Csv::new(cfg.comment("table1", seed, ""), "parameter,value,unit");
    let rows: [(&str, f64, &str); 12] = [
        ("payload", cfg.common.payload_bits, "bits"),
        ("mac_header", t.mac_header_bits, "bits"),
        ("phy_overhead", t.phy_overhead * 1e6, "us"),
        ("ack", t.ack_bits, "bits"),
        ("rts", t.rts_bits, "bits"),
        ("cts", t.cts_bits, "bits"),
        ("basic_rate", t.basic_rate / 1e6, "Mbps"),
        ("data_rate", cfg.common.rate / 1e6, "Mbps"),
        ("slot_time", t.sigma * 1e6, "us"),
        ("sifs", t.sifs * 1e6, "us"),
        ("difs", t.difs * 1e6, "us"),
        ("propagation_delay", t.delta * 1e6, "us"),
    ];
    for (name, v, unit) in rows {
        csv.rows.push(format!("{name},{},{unit}", round12(v)));
    }
    csv
}

fn round12(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

fn params_scaling(p: &Scaling) -> String {
    format!(
        "mode={} m_max={} n={}",
        p.mode,
        p.m_max,
        p.n.map_or("inf".to_string(), |n| n.to_string())
    )
}

fn params_fixed_point(f: &FixedPointGrid) -> String {
    format!(
        "mode={} n={:?} m={:?} r={:?} w0={:?} simulate={} warmup_slots={} measure_slots={}",
        f.mode, f.n, f.m, f.r, f.w0, f.simulate, f.warmup_slots, f.measure_slots
    )
}

fn params_study(b: &BackoffStudy) -> String {
    let modes: Vec<&str> = b.modes.iter().map(|m| m.as_str()).collect();
    format!("modes={modes:?} m={:?} r_max={}", b.m, b.r_max)
}

fn params_simulate(s: &Simulate) -> String {
    format!(
        "mode={} n={} m={} r={} w0={} runs={} warmup_slots={} measure_slots={}",
        s.mode, s.n, s.m, s.r, s.w0, s.runs, s.warmup_slots, s.measure_slots
    )
}

fn params_simo(s: &SimoCompare) -> String {
    format!(
        "mode={} m_max={} log_base={} rate_unit_bps={}",
        s.mode, s.m_max, s.log_base, s.rate_unit_bps
    )
}

fn params_phy(p: &PhyDemo) -> String {
    let d: Vec<&str> = p.detectors.iter().map(|d| d.as_str()).collect();
    format!(
        "detectors={d:?} k={} m_ant={} snr_db={:?} n_sym={} trials={} alphabet={} threshold={} \
         restarts={} max_iter={}",
        p.k, p.m_ant, p.snr_db, p.n_sym, p.trials, p.alphabet.name, p.threshold, p.restarts,
        p.max_iter
    )
}

fn params_r_sweep(r: &RSweep) -> String {
    format!(
        "mode={} m={:?} r_min={} r_max={} points={}",
        r.mode, r.m, r.r_min, r.r_max, r.points
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats() {
        assert_eq!(fmt_bps(24657590.123), "2.46576e7");
        assert_eq!(fmt_p(0.5), "0.50000000");
    }

    #[test]
    fn aloha_scaling_first_row() {
        let cfg = Config::default();
        let csv = scaling(&cfg, &cfg.scaling, 0).unwrap();
        assert_eq!(csv.header, SCALING_HEADER);
        let first: Vec<&str> = csv.rows[0].split(',').collect();
        assert_eq!(first[0], "1");
        let norm: f64 = first[3].parse().unwrap();
        assert!((norm - (-1f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn table1_values() {
        let csv = table1(&Config::default(), 0);
        assert!(csv.rows.contains(&"payload,8184,bits".to_string()));
        assert!(csv.rows.contains(&"difs,28,us".to_string()));
        assert!(csv.rows.contains(&"slot_time,9,us".to_string()));
    }
}
