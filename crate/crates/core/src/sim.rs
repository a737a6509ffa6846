//! Slot-indexed Monte-Carlo simulation of `N` saturated stations running
//! exponential backoff over an MPR channel.
//!
//! Each slot, every station whose counter is zero transmits. With `k`
//! transmitters the slot is idle (`k = 0`), a success slot (`1 <= k <= M`,
//! each packet then survives with the configured success probability) or a
//! collision slot (`k > M`, nothing is decoded). A delivered packet sends its
//! station back to stage 0; a lost one moves it up a stage. Transmitters redraw
//! their counter uniformly from the window of their new stage, everybody else
//! counts down by one. Carrier sensing only changes what each slot type costs
//! in time, so the engine is the same for all access modes.
//!
//! Stations are kept in a min-heap keyed by the absolute slot of their next
//! attempt, so runs of idle slots are skipped in one step.
//!
//! Randomness comes from ChaCha8 ([`rand_chacha::ChaCha8Rng`]) seeded with
//! `seed_from_u64(config.seed)`; a run is bit-for-bit reproducible from its
//! config.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::backoff::BackoffParams;
use crate::error::{Error, Result};
use crate::params::{slot_durations, AccessMode, MacTimingParams, NetworkParams, SlotDurations};
use crate::success::SuccessModel;

/// Highest backoff stage tracked; windows stop growing beyond it.
pub const MAX_STAGE: u32 = 64;

/// Largest contention window the simulator will draw from.
const MAX_WINDOW: u64 = 1 << 62;

pub const DEFAULT_WARMUP_SLOTS: u64 = 100_000;
pub const DEFAULT_MEASURE_SLOTS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub net: NetworkParams,
    pub backoff: BackoffParams,
    pub mode: AccessMode,
    pub timing: MacTimingParams,
    pub warmup_slots: u64,
    pub measure_slots: u64,
    pub seed: u64,
    pub success: SuccessModel,
}

impl SimConfig {
    /// Non-carrier-sensing run with 802.11g timing, ideal reception and the
    /// default warm-up and measurement lengths.
    pub fn new(net: NetworkParams, backoff: BackoffParams) -> Self {
        SimConfig {
            net,
            backoff,
            mode: AccessMode::NonCarrierSensing,
            timing: MacTimingParams::table1(),
            warmup_slots: DEFAULT_WARMUP_SLOTS,
            measure_slots: DEFAULT_MEASURE_SLOTS,
            seed: 0,
            success: SuccessModel::Ideal,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.net.validate()?;
        self.backoff.validate()?;
        self.timing.validate()?;
        if self.measure_slots < 1 {
            return Err(Error::invalid("measure_slots", self.measure_slots, "measure_slots >= 1"));
        }
        Ok(())
    }

    pub fn durations(&self) -> SlotDurations {
        slot_durations(self.mode, &self.net, &self.timing)
    }
}

/// Backoff stage and remaining counter of one station.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StationState {
    pub stage: u32,
    pub counter: u64,
}

/// Contention window `round(r^stage W0)`, at least 1.
pub fn window(stage: u32, b: &BackoffParams) -> u64 {
    let w = (b.r.powi(stage.min(MAX_STAGE) as i32) * b.w0 as f64).round();
    if w >= MAX_WINDOW as f64 {
        MAX_WINDOW
    } else {
        (w as u64).max(1)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SlotCounts {
    pub idle: u64,
    pub success: u64,
    pub collision: u64,
}

impl SlotCounts {
    pub fn total(&self) -> u64 {
        self.idle + self.success + self.collision
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimStats {
    /// Attempts per station per slot.
    pub pt_hat: f64,
    /// Fraction of attempts made in collision slots.
    pub pc_hat: f64,
    /// Delivered payload bits per second.
    pub throughput: f64,
    pub slot_counts: SlotCounts,
    /// Entry `k` counts measured slots with exactly `k` transmitters.
    pub attempts_histogram: Vec<u64>,
    pub attempts: u64,
    pub collided_attempts: u64,
    pub delivered: u64,
    /// Times a station reached [`MAX_STAGE`].
    pub stage_cap_hits: u64,
}

impl SimStats {
    /// Re-prices the measured slot counts with other durations.
    pub fn throughput_with(&self, dur: &SlotDurations, payload_bits: f64) -> f64 {
        let c = &self.slot_counts;
        let time =
            c.idle as f64 * dur.t_idle + c.success as f64 * dur.t_succ + c.collision as f64 * dur.t_coll;
        self.delivered as f64 * payload_bits / time
    }

    /// Standard error of `pt_hat` treating slots as independent draws from
    /// the attempts histogram.
    pub fn pt_standard_error(&self) -> f64 {
        let slots: u64 = self.attempts_histogram.iter().sum();
        let n = (self.attempts_histogram.len() - 1) as f64;
        if slots < 2 || n == 0.0 {
            return 0.0;
        }
        let s = slots as f64;
        let mean = self
            .attempts_histogram
            .iter()
            .enumerate()
            .map(|(k, &c)| k as f64 * c as f64)
            .sum::<f64>()
            / s;
        let var = self
            .attempts_histogram
            .iter()
            .enumerate()
            .map(|(k, &c)| (k as f64 - mean).powi(2) * c as f64)
            .sum::<f64>()
            / (s - 1.0);
        (var / s).sqrt() / n
    }
}

/// Runs one simulation.
pub fn run(config: &SimConfig) -> Result<SimStats> {
    config.validate()?;
    let n = config.net.n;
    let m = config.net.m;
    let b = &config.backoff;
    let dur = config.durations();
    let windows: Vec<u64> = (0..=MAX_STAGE).map(|s| window(s, b)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut stages = vec![0u32; n];
    let mut queue: BinaryHeap<Reverse<(u64, u32)>> = (0..n as u32)
        .map(|id| Reverse((rng.random_range(0..windows[0]), id)))
        .collect();

    let warmup = config.warmup_slots;
    let total = warmup + config.measure_slots;
    let mut counts = SlotCounts::default();
    let mut histogram = vec![0u64; n + 1];
    let mut attempts = 0u64;
    let mut collided = 0u64;
    let mut delivered = 0u64;
    let mut cap_hits = 0u64;
    let mut transmitters: Vec<u32> = Vec::with_capacity(n);

    let mut cur = 0u64;
    loop {
        let next = queue.peek().map(|r| r.0 .0).unwrap_or(u64::MAX);
        let idle_end = next.min(total);
        if idle_end > cur {
            let measured_idle = idle_end.saturating_sub(cur.max(warmup));
            counts.idle += measured_idle;
            histogram[0] += measured_idle;
        }
        if next >= total {
            break;
        }
        transmitters.clear();
        while let Some(&Reverse((slot, id))) = queue.peek() {
            if slot != next {
                break;
            }
            queue.pop();
            transmitters.push(id);
        }
        let k = transmitters.len();
        let measured = next >= warmup;
        let collision = k > m;
        let p_ok = if collision { 0.0 } else { config.success.p_success(k, m) };
        if measured {
            histogram[k] += 1;
            attempts += k as u64;
            if collision {
                counts.collision += 1;
                collided += k as u64;
            } else {
                counts.success += 1;
            }
        }
        for &id in &transmitters {
            let ok = if collision {
                false
            } else if p_ok >= 1.0 {
                true
            } else {
                rng.random::<f64>() < p_ok
            };
            let stage = &mut stages[id as usize];
            if ok {
                *stage = 0;
                if measured {
                    delivered += 1;
                }
            } else if *stage < MAX_STAGE {
                *stage += 1;
                if *stage == MAX_STAGE {
                    cap_hits += 1;
                    log::debug!("station {id} reached backoff stage cap {MAX_STAGE}");
                }
            }
            let counter = rng.random_range(0..windows[*stage as usize]);
            queue.push(Reverse((next + 1 + counter, id)));
        }
        cur = next + 1;
    }

    let slots = config.measure_slots as f64;
    let time = counts.idle as f64 * dur.t_idle
        + counts.success as f64 * dur.t_succ
        + counts.collision as f64 * dur.t_coll;
    Ok(SimStats {
        pt_hat: attempts as f64 / (n as f64 * slots),
        pc_hat: if attempts == 0 {
            0.0
        } else {
            collided as f64 / attempts as f64
        },
        throughput: delivered as f64 * config.net.payload_bits / time,
        slot_counts: counts,
        attempts_histogram: histogram,
        attempts,
        collided_attempts: collided,
        delivered,
        stage_cap_hits: cap_hits,
    })
}

/// Runs every config independently, the `i`-th seeded with `seed ^ i`.
/// Results keep the input order; one failing run does not stop the others.
pub fn sweep(configs: &[SimConfig]) -> Vec<Result<SimStats>> {
    let job = |(i, c): (usize, &SimConfig)| {
        let mut c = *c;
        c.seed ^= i as u64;
        run(&c)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        configs.par_iter().enumerate().map(job).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        configs.iter().enumerate().map(job).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, m: usize, r: f64, w0: u32, slots: u64) -> SimConfig {
        let mut c = SimConfig::new(
            NetworkParams::table1(n, m),
            BackoffParams::new(r, w0).unwrap(),
        );
        c.warmup_slots = slots / 10;
        c.measure_slots = slots;
        c
    }

    #[test]
    fn window_sizes() {
        let b = BackoffParams::beb(16);
        assert_eq!(window(0, &b), 16);
        assert_eq!(window(3, &b), 128);
        assert_eq!(window(200, &b), MAX_WINDOW);
        let b = BackoffParams::new(1.5, 3).unwrap();
        assert_eq!(window(1, &b), 5); // 4.5 rounds away from zero
    }

    #[test]
    fn accounting_adds_up() {
        let s = run(&cfg(20, 2, 2.0, 16, 50_000)).unwrap();
        assert_eq!(s.slot_counts.total(), 50_000);
        assert_eq!(s.attempts_histogram.iter().sum::<u64>(), 50_000);
        let from_hist: u64 = s.attempts_histogram.iter().enumerate().map(|(k, &c)| k as u64 * c).sum();
        assert_eq!(from_hist, s.attempts);
        let coll_slots: u64 = s.attempts_histogram[3..].iter().sum();
        assert_eq!(coll_slots, s.slot_counts.collision);
        assert_eq!(s.slot_counts.idle, s.attempts_histogram[0]);
        assert!((0.0..=1.0).contains(&s.pt_hat) && (0.0..=1.0).contains(&s.pc_hat));
    }

    #[test]
    fn deterministic_per_seed() {
        let c = cfg(30, 1, 2.0, 16, 20_000);
        assert_eq!(run(&c).unwrap(), run(&c).unwrap());
        let mut d = c;
        d.seed = 99;
        assert_ne!(run(&c).unwrap().attempts, run(&d).unwrap().attempts);
    }

    #[test]
    fn lone_station_never_collides() {
        let c = cfg(1, 1, 2.0, 16, 100_000);
        let s = run(&c).unwrap();
        assert_eq!(s.pc_hat, 0.0);
        assert_eq!(s.slot_counts.collision, 0);
        assert_eq!(s.delivered, s.attempts);
        // One attempt per cycle of 1 + E[counter] = 1 + 7.5 slots.
        assert!((s.pt_hat - 2.0 / 17.0).abs() / (2.0 / 17.0) < 0.02);
        let dur = c.durations();
        let expected = c.net.payload_bits / (dur.t_succ + 7.5 * dur.t_idle);
        assert!((s.throughput - expected).abs() / expected < 0.02);
    }

    #[test]
    fn lossy_channel_delivers_less() {
        let mut c = cfg(10, 2, 2.0, 16, 50_000);
        let ideal = run(&c).unwrap();
        c.success = SuccessModel::Erasure { epsilon: 0.3 };
        let lossy = run(&c).unwrap();
        assert!(lossy.delivered < ideal.delivered);
        assert!(lossy.delivered < lossy.attempts);
    }

    #[test]
    fn sweep_keeps_order_and_reports_errors() {
        let good = cfg(5, 1, 2.0, 16, 5_000);
        let mut bad = good;
        bad.measure_slots = 0;
        let out = sweep(&[good, bad, good]);
        assert!(out[0].is_ok() && out[1].is_err() && out[2].is_ok());
        // Same config at different indices gets a different seed.
        assert_ne!(out[0].as_ref().unwrap(), out[2].as_ref().unwrap());
        let again = sweep(&[good, bad, good]);
        assert_eq!(out[0], again[0]);
        assert_eq!(out[2], again[2]);
    }

    #[test]
    fn throughput_reprices_counts() {
        let c = cfg(10, 1, 2.0, 16, 10_000);
        let s = run(&c).unwrap();
        assert_eq!(s.throughput_with(&c.durations(), c.net.payload_bits), s.throughput);
    }
}
