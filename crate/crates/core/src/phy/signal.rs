use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Alphabet, CMatrix};
use crate::error::{Error, Result};

/// One received block `Y = H X + W`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalBlock {
    /// Channel, `M_ant x K`.
    pub h: CMatrix,
    /// Transmitted symbols, `K x N_sym`.
    pub x: CMatrix,
    /// Received samples, `M_ant x N_sym`.
    pub y: CMatrix,
    /// Noise variance per complex sample.
    pub noise_var: f64,
}

impl SignalBlock {
    /// Block from explicit parts, `Y = H X` plus the given noise.
    pub fn from_parts(h: CMatrix, x: CMatrix, noise: Option<CMatrix>, noise_var: f64) -> Self {
        let mut y = &h * &x;
        if let Some(w) = noise {
            y += w;
        }
        SignalBlock { h, x, y, noise_var }
    }

    pub fn antennas(&self) -> usize {
        self.h.nrows()
    }

    pub fn sources(&self) -> usize {
        self.h.ncols()
    }

    pub fn symbols(&self) -> usize {
        self.y.ncols()
    }
}

fn complex_gaussian(rng: &mut ChaCha8Rng, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// Rayleigh-faded block: unit-variance complex Gaussian channel, uniform
/// symbols, noise variance `10^(-snr_db/10)` (no noise for `+inf`).
/// Requires `K <= M_ant`.
pub fn synthesize(
    m_ant: usize,
    k: usize,
    n_sym: usize,
    alphabet: &Alphabet,
    snr_db: f64,
    seed: u64,
) -> Result<SignalBlock> {
    if k > m_ant {
        return Err(Error::invalid("K", k, "K <= M_ant"));
    }
    synthesize_overloaded(m_ant, k, n_sym, alphabet, snr_db, seed)
}

/// As [`synthesize`] but accepts more sources than antennas.
pub fn synthesize_overloaded(
    m_ant: usize,
    k: usize,
    n_sym: usize,
    alphabet: &Alphabet,
    snr_db: f64,
    seed: u64,
) -> Result<SignalBlock> {
    if m_ant < 1 {
        return Err(Error::invalid("M_ant", m_ant, "M_ant >= 1"));
    }
    if n_sym < 1 {
        return Err(Error::invalid("N_sym", n_sym, "N_sym >= 1"));
    }
    if snr_db.is_nan() {
        return Err(Error::invalid("snr_db", snr_db, "finite or +inf SNR"));
    }
    let noise_var = if snr_db == f64::INFINITY {
        0.0
    } else {
        10f64.powf(-snr_db / 10.0)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = DMatrix::from_fn(m_ant, k, |_, _| complex_gaussian(&mut rng, 1.0));
    let x = DMatrix::from_fn(k, n_sym, |_, _| {
        alphabet.symbols[rng.random_range(0..alphabet.len())]
    });
    let noise = (noise_var > 0.0)
        .then(|| DMatrix::from_fn(m_ant, n_sym, |_, _| complex_gaussian(&mut rng, noise_var)));
    Ok(SignalBlock::from_parts(h, x, noise, noise_var))
}
