//! PHY-layer multiuser detection for an MPR access point with `M_ant`
//! receive antennas.
//!
//! The block model is `Y = H X + W`: `K` stations send `N_sym` symbols from a
//! finite alphabet through a flat channel `H` (`M_ant x K`). With `H` known,
//! zero-forcing and MMSE detectors separate the streams. Without it (RTS
//! phase), the number of sources is read off the singular values of `Y`, and
//! `H` and `X` are recovered jointly by finite-alphabet least squares, either
//! exhaustively or with iterative least squares with projection (ILSP).

mod alphabet;
mod ambiguity;
mod blind;
mod linear;
mod signal;

pub use alphabet::Alphabet;
pub use ambiguity::{align_ambiguity, canonicalize};
pub use blind::{
    blind_detect_exhaustive, blind_detect_ilsp, blind_objective, fit_channel, fit_residual,
    projector_complement, IlspOptions, IlspOutcome, Termination, EXHAUSTIVE_LIMIT,
};
pub use linear::{
    estimate_source_count, mmse_detect, mmse_statistics, pinv_checked, zf_detect, zf_statistics,
    CONDITION_LIMIT, DEFAULT_COUNT_THRESHOLD,
};
pub use signal::{synthesize, synthesize_overloaded, SignalBlock};

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

/// Detector output.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    /// `K x N_sym`, entries from the alphabet.
    pub x_hat: CMatrix,
    pub h_hat: Option<CMatrix>,
    /// Squared Frobenius norm `||Y - H X_hat||^2` of the fitted model.
    pub residual: f64,
    /// Symbol errors against the transmitted block, when it is known and
    /// the detector output is not subject to blind ambiguity.
    pub symbol_errors: Option<usize>,
}

pub(crate) fn frobenius_sqr(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub(crate) fn quantize_matrix(m: &CMatrix, alphabet: &Alphabet) -> CMatrix {
    m.map(|z| alphabet.quantize(z))
}

/// Number of entries of `a` and `b` that map to different alphabet symbols.
pub fn count_symbol_errors(a: &CMatrix, b: &CMatrix, alphabet: &Alphabet) -> usize {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .filter(|(x, y)| alphabet.nearest(**x) != alphabet.nearest(**y))
        .count()
}
