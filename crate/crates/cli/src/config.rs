//! Scenario configuration.
//!
//! A config file is TOML restricted to one level of `[section]` tables whose
//! entries are `key = value` with integer, float, boolean, string or array
//! values. See `docs/config.md` for every section and key.

use std::collections::BTreeSet;

use mprlab::phy::Alphabet;
use mprlab::{AccessMode, MacTimingParams, NetworkParams, SuccessModel};
use toml::{Table, Value};

use crate::CliError;

/// Parameters that every scenario shares.
#[derive(Debug, Clone)]
pub struct Common {
    pub rate: f64,
    pub payload_bits: f64,
    pub timing: MacTimingParams,
    pub success: SuccessModel,
    pub channel_label: String,
}

/// Reference defaults: 802.11g timing with an 8184-bit payload at 54 Mb/s.
pub fn default_table1() -> (MacTimingParams, NetworkParams) {
    (MacTimingParams::table1(), NetworkParams::table1(1, 1))
}

impl Default for Common {
    fn default() -> Self {
        let (timing, net) = default_table1();
        Common {
            rate: net.rate,
            payload_bits: net.payload_bits,
            timing,
            success: SuccessModel::Ideal,
            channel_label: "ideal".into(),
        }
    }
}

impl Common {
    pub fn network(&self, n: usize, m: usize) -> NetworkParams {
        NetworkParams {
            n,
            m,
            rate: self.rate,
            payload_bits: self.payload_bits,
        }
    }

    fn describe(&self) -> String {
        let t = &self.timing;
        format!(
            "rate_bps={} payload_bits={} sigma_us={} sifs_us={} difs_us={} delta_us={} \
             phy_overhead_us={} basic_rate_bps={} mac_header_bits={} ack_bits={} rts_bits={} \
             cts_bits={} mpr_frames={} channel={}",
            self.rate,
            self.payload_bits,
            us(t.sigma),
            us(t.sifs),
            us(t.difs),
            us(t.delta),
            us(t.phy_overhead),
            t.basic_rate,
            t.mac_header_bits,
            t.ack_bits,
            t.rts_bits,
            t.cts_bits,
            t.mpr_frames,
            self.channel_label
        )
    }
}

/// Seconds to microseconds, rounded to picoseconds so `10 + 2 * 9` prints as 28.
fn us(seconds: f64) -> f64 {
    (seconds * 1e12).round() / 1e6
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scaling {
    pub mode: AccessMode,
    pub m_max: usize,
    /// Finite population; `None` for the large-population limit.
    pub n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointGrid {
    pub mode: AccessMode,
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub r: Vec<f64>,
    pub w0: Vec<u32>,
    pub simulate: bool,
    pub warmup_slots: u64,
    pub measure_slots: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackoffStudy {
    pub modes: Vec<AccessMode>,
    pub m: Vec<usize>,
    pub r_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RSweep {
    pub mode: AccessMode,
    pub m: Vec<usize>,
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulate {
    pub mode: AccessMode,
    pub n: usize,
    pub m: usize,
    pub r: f64,
    pub w0: u32,
    pub runs: usize,
    pub warmup_slots: u64,
    pub measure_slots: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimoCompare {
    pub mode: AccessMode,
    pub m_max: usize,
    pub log_base: f64,
    pub rate_unit_bps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    Zf,
    Mmse,
    Count,
    Exhaustive,
    Ilsp,
}

impl Detector {
    pub fn as_str(&self) -> &'static str {
        match self {
            Detector::Zf => "zf",
            Detector::Mmse => "mmse",
            Detector::Count => "count",
            Detector::Exhaustive => "exhaustive",
            Detector::Ilsp => "ilsp",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "zf" => Detector::Zf,
            "mmse" => Detector::Mmse,
            "count" => Detector::Count,
            "exhaustive" => Detector::Exhaustive,
            "ilsp" => Detector::Ilsp,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhyDemo {
    pub detectors: Vec<Detector>,
    pub k: usize,
    pub m_ant: usize,
    pub snr_db: Vec<f64>,
    pub n_sym: usize,
    pub trials: usize,
    pub alphabet: Alphabet,
    pub threshold: f64,
    pub restarts: usize,
    pub max_iter: usize,
}

/// Parsed config file. Sections that are absent take their defaults.
#[derive(Debug, Clone)]
pub struct Config {
    pub common: Common,
    pub scaling: Scaling,
    pub fixed_point: FixedPointGrid,
    pub optimal_r: BackoffStudy,
    pub beb_efficiency: BackoffStudy,
    pub r_sweep: RSweep,
    pub simulate: Simulate,
    pub simo: SimoCompare,
    pub phy: PhyDemo,
}

impl Default for Config {
    fn default() -> Self {
        Config::parse("").expect("defaults are valid")
    }
}

const SECTIONS: &[&str] = &[
    "network",
    "timing",
    "channel",
    "scaling",
    "fixed-point",
    "optimal-r",
    "beb-efficiency",
    "r-sweep",
    "simulate",
    "simo-compare",
    "phy-demo",
];

/// Reads typed values from one section and remembers which keys were used,
/// so leftovers can be reported.
struct Section<'a> {
    name: &'static str,
    table: Option<&'a Table>,
    used: BTreeSet<&'static str>,
}

fn bad(section: &str, key: &str, want: &str) -> CliError {
    CliError::Config(format!("[{section}] {key}: expected {want}"))
}

impl<'a> Section<'a> {
    fn new(root: &'a Table, name: &'static str) -> Result<Self, CliError> {
        let table = match root.get(name) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => return Err(CliError::Config(format!("{name} must be a [section]"))),
        };
        Ok(Section {
            name,
            table,
            used: BTreeSet::new(),
        })
    }

    fn raw(&mut self, key: &'static str) -> Option<&'a Value> {
        self.used.insert(key);
        self.table.and_then(|t| t.get(key))
    }

    fn f64(&mut self, key: &'static str, default: f64) -> Result<f64, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => as_f64(v).ok_or_else(|| bad(self.name, key, "a number")),
        }
    }

    /// Microsecond-valued key, returned in seconds.
    fn micros(&mut self, key: &'static str, default_s: f64) -> Result<f64, CliError> {
        match self.raw(key) {
            None => Ok(default_s),
            Some(v) => as_f64(v)
                .map(|us| us / 1e6)
                .ok_or_else(|| bad(self.name, key, "a number of microseconds")),
        }
    }

    fn u64(&mut self, key: &'static str, default: u64) -> Result<u64, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some(Value::Integer(i)) if *i >= 0 => Ok(*i as u64),
            Some(_) => Err(bad(self.name, key, "a non-negative integer")),
        }
    }

    fn usize(&mut self, key: &'static str, default: usize) -> Result<usize, CliError> {
        self.u64(key, default as u64).map(|v| v as usize)
    }

    fn bool(&mut self, key: &'static str, default: bool) -> Result<bool, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some(Value::Boolean(b)) => Ok(*b),
            Some(_) => Err(bad(self.name, key, "true or false")),
        }
    }

    fn str(&mut self, key: &'static str, default: &str) -> Result<String, CliError> {
        match self.raw(key) {
            None => Ok(default.to_string()),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(bad(self.name, key, "a string")),
        }
    }

    fn mode(&mut self, key: &'static str, default: AccessMode) -> Result<AccessMode, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some(Value::String(s)) => s
                .parse()
                .map_err(|_| bad(self.name, key, "aloha, basic or rts-cts")),
            Some(_) => Err(bad(self.name, key, "aloha, basic or rts-cts")),
        }
    }

    /// Integer, array of integers, or an inclusive range string `"a..b"`.
    fn usize_list(&mut self, key: &'static str, default: &[usize]) -> Result<Vec<usize>, CliError> {
        let want = "an integer, an integer array or \"a..b\"";
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(Value::Integer(i)) if *i >= 0 => Ok(vec![*i as usize]),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    Value::Integer(i) if *i >= 0 => Ok(*i as usize),
                    _ => Err(bad(self.name, key, want)),
                })
                .collect(),
            Some(Value::String(s)) => {
                let (a, b) = s.split_once("..").ok_or_else(|| bad(self.name, key, want))?;
                let a: usize = a.trim().parse().map_err(|_| bad(self.name, key, want))?;
                let b: usize = b.trim().parse().map_err(|_| bad(self.name, key, want))?;
                if a > b {
                    return Err(bad(self.name, key, "a non-empty range"));
                }
                Ok((a..=b).collect())
            }
            Some(_) => Err(bad(self.name, key, want)),
        }
    }

    fn f64_list(&mut self, key: &'static str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| as_f64(v).ok_or_else(|| bad(self.name, key, "a number array")))
                .collect(),
            Some(v) => as_f64(v)
                .map(|x| vec![x])
                .ok_or_else(|| bad(self.name, key, "a number or number array")),
        }
    }

    fn str_list(&mut self, key: &'static str, default: &[&str]) -> Result<Vec<String>, CliError> {
        match self.raw(key) {
            None => Ok(default.iter().map(|s| s.to_string()).collect()),
            Some(Value::String(s)) => Ok(vec![s.clone()]),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    Value::String(s) => Ok(s.clone()),
                    _ => Err(bad(self.name, key, "a string array")),
                })
                .collect(),
            Some(_) => Err(bad(self.name, key, "a string or string array")),
        }
    }

    fn finish(self) -> Result<(), CliError> {
        if let Some(t) = self.table {
            if let Some(k) = t.keys().find(|k| !self.used.contains(k.as_str())) {
                return Err(CliError::Config(format!("[{}] unknown key {k}", self.name)));
            }
        }
        Ok(())
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        Value::String(s) if s == "inf" || s == "+inf" => Some(f64::INFINITY),
        _ => None,
    }
}

fn require(ok: bool, name: &str, value: impl std::fmt::Display, rule: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "invalid parameter {name} = {value}: requires {rule}"
        )))
    }
}

fn nonempty<T>(v: &[T], section: &str, key: &str) -> Result<(), CliError> {
    if v.is_empty() {
        return Err(bad(section, key, "at least one value"));
    }
    Ok(())
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let root: Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::Config(one_line(e.message())))?;
        if let Some(k) = root.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
            return Err(CliError::Config(format!("unknown section [{k}]")));
        }
        let defaults = Common::default();
        let dt = defaults.timing;

        let mut s = Section::new(&root, "network")?;
        let rate = s.f64("rate_bps", defaults.rate)?;
        let payload_bits = s.f64("payload_bits", defaults.payload_bits)?;
        s.finish()?;

        let mut s = Section::new(&root, "timing")?;
        let sigma = s.micros("sigma_us", dt.sigma)?;
        let sifs = s.micros("sifs_us", dt.sifs)?;
        let difs = s.micros("difs_us", sifs + 2.0 * sigma)?;
        let timing = MacTimingParams {
            sigma,
            sifs,
            difs,
            delta: s.micros("delta_us", dt.delta)?,
            phy_overhead: s.micros("phy_overhead_us", dt.phy_overhead)?,
            basic_rate: s.f64("basic_rate_bps", dt.basic_rate)?,
            mac_header_bits: s.f64("mac_header_bits", dt.mac_header_bits)?,
            ack_bits: s.f64("ack_bits", dt.ack_bits)?,
            rts_bits: s.f64("rts_bits", dt.rts_bits)?,
            cts_bits: s.f64("cts_bits", dt.cts_bits)?,
            mpr_frames: s.bool("mpr_frames", dt.mpr_frames)?,
        };
        s.finish()?;
        timing.validate()?;
        NetworkParams::new(1, 1, rate, payload_bits)?;

        let mut s = Section::new(&root, "channel")?;
        let model = s.str("model", "ideal")?;
        let epsilon = s.f64("epsilon", 0.0)?;
        s.finish()?;
        require((0.0..=1.0).contains(&epsilon), "epsilon", epsilon, "0 <= epsilon <= 1")?;
        let success = match model.as_str() {
            "ideal" => SuccessModel::Ideal,
            "erasure" => SuccessModel::Erasure { epsilon },
            "load" => SuccessModel::LoadDependent { epsilon },
            _ => return Err(bad("channel", "model", "ideal, erasure or load")),
        };
        let channel_label = match success {
            SuccessModel::Ideal => "ideal".to_string(),
            _ => format!("{model}:{epsilon}"),
        };
        let common = Common {
            rate,
            payload_bits,
            timing,
            success,
            channel_label,
        };

        let mut s = Section::new(&root, "scaling")?;
        let n = s.u64("n", 0)?;
        let scaling = Scaling {
            mode: s.mode("mode", AccessMode::NonCarrierSensing)?,
            m_max: s.usize("m_max", 10)?,
            n: (n > 0).then_some(n as usize),
        };
        s.finish()?;
        require(scaling.m_max >= 2, "m_max", scaling.m_max, "m_max >= 2")?;
        if let Some(n) = scaling.n {
            require(scaling.m_max <= n, "m_max", scaling.m_max, "m_max <= n")?;
        }

        let mut s = Section::new(&root, "fixed-point")?;
        let fixed_point = FixedPointGrid {
            mode: s.mode("mode", AccessMode::NonCarrierSensing)?,
            n: s.usize_list("n", &[50])?,
            m: s.usize_list("m", &[1, 2, 4])?,
            r: s.f64_list("r", &[2.0])?,
            w0: s
                .usize_list("w0", &[16, 32])?
                .into_iter()
                .map(|w| w as u32)
                .collect(),
            simulate: s.bool("simulate", true)?,
            warmup_slots: s.u64("warmup_slots", mprlab::sim::DEFAULT_WARMUP_SLOTS)?,
            measure_slots: s.u64("measure_slots", mprlab::sim::DEFAULT_MEASURE_SLOTS)?,
        };
        s.finish()?;
        for (key, len) in [
            ("n", fixed_point.n.len()),
            ("m", fixed_point.m.len()),
            ("r", fixed_point.r.len()),
            ("w0", fixed_point.w0.len()),
        ] {
            if len == 0 {
                return Err(bad("fixed-point", key, "at least one value"));
            }
        }
        for &n in &fixed_point.n {
            for &m in &fixed_point.m {
                common.network(n, m).validate()?;
            }
        }
        for &r in &fixed_point.r {
            for &w in &fixed_point.w0 {
                mprlab::BackoffParams::new(r, w)?;
            }
        }
        require(fixed_point.measure_slots >= 1, "measure_slots", 0, "measure_slots >= 1")?;

        let optimal_r = backoff_study(&root, "optimal-r", &(1..=15).collect::<Vec<_>>())?;
        let beb_efficiency = backoff_study(&root, "beb-efficiency", &(1..=15).collect::<Vec<_>>())?;

        let mut s = Section::new(&root, "r-sweep")?;
        let r_sweep = RSweep {
            mode: s.mode("mode", AccessMode::NonCarrierSensing)?,
            m: s.usize_list("m", &[1, 2, 5, 10])?,
            r_min: s.f64("r_min", 1.05)?,
            r_max: s.f64("r_max", 10.0)?,
            points: s.usize("points", 200)?,
        };
        s.finish()?;
        nonempty(&r_sweep.m, "r-sweep", "m")?;
        require(r_sweep.r_min > 1.0, "r", r_sweep.r_min, "r > 1")?;
        require(r_sweep.r_max > r_sweep.r_min, "r_max", r_sweep.r_max, "r_max > r_min")?;
        require(r_sweep.points >= 2, "points", r_sweep.points, "points >= 2")?;
        for &m in &r_sweep.m {
            require(m >= 1, "M", m, "M >= 1")?;
        }

        let mut s = Section::new(&root, "simulate")?;
        let simulate = Simulate {
            mode: s.mode("mode", AccessMode::NonCarrierSensing)?,
            n: s.usize("n", 50)?,
            m: s.usize("m", 1)?,
            r: s.f64("r", 2.0)?,
            w0: s.usize("w0", 16)? as u32,
            runs: s.usize("runs", 1)?,
            warmup_slots: s.u64("warmup_slots", mprlab::sim::DEFAULT_WARMUP_SLOTS)?,
            measure_slots: s.u64("measure_slots", mprlab::sim::DEFAULT_MEASURE_SLOTS)?,
        };
        s.finish()?;
        common.network(simulate.n, simulate.m).validate()?;
        mprlab::BackoffParams::new(simulate.r, simulate.w0)?;
        require(simulate.runs >= 1, "runs", simulate.runs, "runs >= 1")?;
        require(simulate.measure_slots >= 1, "measure_slots", 0, "measure_slots >= 1")?;

        let mut s = Section::new(&root, "simo-compare")?;
        let simo = SimoCompare {
            mode: s.mode("mode", AccessMode::NonCarrierSensing)?,
            m_max: s.usize("m_max", 10)?,
            log_base: s.f64("log_base", 2.0)?,
            rate_unit_bps: s.f64("rate_unit_bps", 20e6)?,
        };
        s.finish()?;
        require(simo.m_max >= 2, "m_max", simo.m_max, "m_max >= 2")?;
        require(simo.log_base > 1.0, "log_base", simo.log_base, "log_base > 1")?;
        require(simo.rate_unit_bps >= 0.0, "rate_unit_bps", simo.rate_unit_bps, "rate_unit_bps >= 0")?;

        let mut s = Section::new(&root, "phy-demo")?;
        let names = s.str_list("detectors", &["zf", "mmse", "count", "exhaustive", "ilsp"])?;
        let detectors = names
            .iter()
            .map(|d| Detector::parse(d).ok_or_else(|| bad("phy-demo", "detectors", "zf, mmse, count, exhaustive or ilsp")))
            .collect::<Result<Vec<_>, _>>()?;
        let alphabet_name = s.str("alphabet", "bpsk")?;
        let phy = PhyDemo {
            detectors,
            k: s.usize("k", 2)?,
            m_ant: s.usize("m_ant", 4)?,
            snr_db: s.f64_list("snr_db", &[0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0])?,
            n_sym: s.usize("n_sym", 8)?,
            trials: s.usize("trials", 100)?,
            alphabet: Alphabet::by_name(&alphabet_name)
                .ok_or_else(|| bad("phy-demo", "alphabet", "bpsk or qpsk"))?,
            threshold: s.f64("threshold", mprlab::phy::DEFAULT_COUNT_THRESHOLD)?,
            restarts: s.usize("restarts", 8)?,
            max_iter: s.usize("max_iter", 50)?,
        };
        s.finish()?;
        nonempty(&phy.detectors, "phy-demo", "detectors")?;
        nonempty(&phy.snr_db, "phy-demo", "snr_db")?;
        require(phy.k >= 1, "K", phy.k, "K >= 1")?;
        require(phy.k <= phy.m_ant, "K", phy.k, "K <= M_ant")?;
        require(phy.n_sym >= phy.k, "N_sym", phy.n_sym, "N_sym >= K")?;
        require(phy.trials >= 1, "trials", phy.trials, "trials >= 1")?;
        require(phy.max_iter >= 1, "max_iter", phy.max_iter, "max_iter >= 1")?;
        require(phy.threshold > 0.0 && phy.threshold < 1.0, "threshold", phy.threshold, "0 < threshold < 1")?;
        for &snr in &phy.snr_db {
            require(!snr.is_nan(), "snr_db", snr, "a number")?;
        }
        if phy.detectors.contains(&Detector::Exhaustive) {
            let space = (phy.alphabet.len() as f64).powf((phy.k * phy.n_sym) as f64);
            require(
                space <= mprlab::phy::EXHAUSTIVE_LIMIT as f64,
                "N_sym",
                phy.n_sym,
                "|alphabet|^(K N_sym) <= 2^24 for exhaustive detection",
            )?;
        }

        Ok(Config {
            common,
            scaling,
            fixed_point,
            optimal_r,
            beb_efficiency,
            r_sweep,
            simulate,
            simo,
            phy,
        })
    }

    /// Comment line recording the scenario, its parameters and the shared
    /// network/timing/channel settings.
    pub fn comment(&self, kind: &str, seed: u64, params: &str) -> String {
        let mut out = format!("kind={kind} seed={seed} ");
        if !params.is_empty() {
            out.push_str(params);
            out.push(' ');
        }
        out.push_str(&self.common.describe());
        out
    }
}

fn backoff_study(root: &Table, name: &'static str, default_m: &[usize]) -> Result<BackoffStudy, CliError> {
    let mut s = Section::new(root, name)?;
    let modes = s
        .str_list("modes", &["aloha", "basic", "rts-cts"])?
        .iter()
        .map(|m| m.parse().map_err(|_| bad(name, "modes", "aloha, basic or rts-cts")))
        .collect::<Result<Vec<AccessMode>, _>>()?;
    let study = BackoffStudy {
        modes,
        m: s.usize_list("m", default_m)?,
        r_max: s.f64("r_max", mprlab::backoff::DEFAULT_R_MAX)?,
    };
    s.finish()?;
    nonempty(&study.modes, name, "modes")?;
    nonempty(&study.m, name, "m")?;
    require(study.r_max > 1.0, "r_max", study.r_max, "r_max > 1")?;
    for &m in &study.m {
        require(m >= 1, "M", m, "M >= 1")?;
    }
    Ok(study)
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
