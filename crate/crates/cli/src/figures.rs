//! Fixed parameter grids that regenerate the data behind each figure.

use mprlab::AccessMode;

use crate::config::{BackoffStudy, Config, FixedPointGrid, RSweep, Scaling};
use crate::scenario::{self, Csv};
use crate::CliError;

pub const FIGURES: &[&str] = &[
    "fig1", "fig2", "fig3", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "table1",
];

fn scaling(cfg: &Config, mode: AccessMode, seed: u64) -> Result<Csv, CliError> {
    let p = Scaling {
        mode,
        m_max: 30,
        n: None,
    };
    scenario::scaling(cfg, &p, seed)
}

fn population(cfg: &Config, mode: AccessMode, seed: u64) -> Result<Csv, CliError> {
    let grid = FixedPointGrid {
        mode,
        n: vec![5, 10, 20, 50, 100, 200, 500, 1000],
        m: vec![1, 2, 4],
        r: vec![2.0],
        w0: vec![16, 32],
        simulate: true,
        warmup_slots: cfg.fixed_point.warmup_slots,
        measure_slots: cfg.fixed_point.measure_slots,
    };
    scenario::fixed_point(cfg, &grid, seed)
}

fn r_curves(cfg: &Config, mode: AccessMode, seed: u64) -> Result<Csv, CliError> {
    let sweep = RSweep {
        mode,
        m: vec![1, 2, 5, 10, 20],
        r_min: 1.05,
        r_max: 10.0,
        points: 200,
    };
    scenario::r_sweep(cfg, &sweep, seed)
}

fn study() -> BackoffStudy {
    BackoffStudy {
        modes: AccessMode::ALL.to_vec(),
        m: (1..=15).collect(),
        r_max: mprlab::backoff::DEFAULT_R_MAX,
    }
}

/// Datasets for `id` as `(file stem, table)` pairs. Network, timing and
/// channel settings come from `cfg`; the grids are fixed.
pub fn reproduce(id: &str, cfg: &Config, seed: u64) -> Result<Vec<(String, Csv)>, CliError> {
    let one = |csv: Csv| Ok(vec![(id.to_string(), csv)]);
    let per_mode = |f: fn(&Config, AccessMode, u64) -> Result<Csv, CliError>| {
        [AccessMode::BasicAccess, AccessMode::RtsCts]
            .iter()
            .map(|&m| Ok((format!("{id}_{m}"), f(cfg, m, seed)?)))
            .collect()
    };
    match id {
        "fig1" => one(scaling(cfg, AccessMode::NonCarrierSensing, seed)?),
        "fig2" | "fig3" => per_mode(scaling),
        "fig5" | "fig6" => one(population(cfg, AccessMode::NonCarrierSensing, seed)?),
        "fig7" => one(population(cfg, AccessMode::BasicAccess, seed)?),
        "fig8" => one(r_curves(cfg, AccessMode::NonCarrierSensing, seed)?),
        "fig9" => one(r_curves(cfg, AccessMode::BasicAccess, seed)?),
        "fig10" => one(scenario::beb_efficiency(cfg, &study(), seed)?),
        "fig11" => one(scenario::optimal_r(cfg, &study(), seed)?),
        "table1" => one(scenario::table1(cfg, seed)),
        _ => Err(CliError::UnknownFigure(id.to_string())),
    }
}
