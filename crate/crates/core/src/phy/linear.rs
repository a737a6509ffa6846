use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{count_symbol_errors, frobenius_sqr, quantize_matrix, Alphabet, CMatrix};
use super::{DetectionResult, SignalBlock};
use crate::error::{Error, Result};

/// Largest condition number accepted before a channel counts as singular.
pub const CONDITION_LIMIT: f64 = 1e8;

/// Relative singular-value threshold for source counting.
pub const DEFAULT_COUNT_THRESHOLD: f64 = 0.1;

/// Moore-Penrose pseudo-inverse of a tall matrix with full column rank.
/// Fails when the condition number exceeds [`CONDITION_LIMIT`].
pub fn pinv_checked(h: &CMatrix) -> Result<CMatrix> {
    let (rows, cols) = h.shape();
    if cols == 0 {
        return Ok(DMatrix::zeros(0, rows));
    }
    if cols > rows {
        return Err(Error::RankDeficient {
            condition: f64::INFINITY,
            limit: CONDITION_LIMIT,
        });
    }
    let svd = h.clone().svd(true, true);
    let s = &svd.singular_values;
    let s_max = s.max();
    let s_min = s.min();
    let condition = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };
    if condition.is_nan() || condition > CONDITION_LIMIT {
        return Err(Error::RankDeficient {
            condition,
            limit: CONDITION_LIMIT,
        });
    }
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let inv_s = DMatrix::from_diagonal(&s.map(|x| Complex64::new(1.0 / x, 0.0)));
    Ok(v_t.adjoint() * inv_s * u.adjoint())
}

fn decide(block: &SignalBlock, stats: CMatrix, alphabet: &Alphabet) -> DetectionResult {
    let x_hat = quantize_matrix(&stats, alphabet);
    let residual = frobenius_sqr(&(&block.y - &block.h * &x_hat));
    let symbol_errors = Some(count_symbol_errors(&x_hat, &block.x, alphabet));
    DetectionResult {
        x_hat,
        h_hat: Some(block.h.clone()),
        residual,
        symbol_errors,
    }
}

/// Unquantized zero-forcing output `H^+ Y`.
pub fn zf_statistics(block: &SignalBlock) -> Result<CMatrix> {
    Ok(pinv_checked(&block.h)? * &block.y)
}

/// Zero-forcing detection with a known channel.
pub fn zf_detect(block: &SignalBlock, alphabet: &Alphabet) -> Result<DetectionResult> {
    Ok(decide(block, zf_statistics(block)?, alphabet))
}

/// Unquantized MMSE output `(H^H H + eta I)^-1 H^H Y`.
///
/// Falls back to the pseudo-inverse when `eta == 0`, so the noiseless limit
/// coincides with zero forcing.
pub fn mmse_statistics(block: &SignalBlock) -> Result<CMatrix> {
    let eta = block.noise_var;
    if eta < 0.0 || !eta.is_finite() {
        return Err(Error::invalid("noise_var", eta, "noise_var >= 0"));
    }
    if eta == 0.0 {
        return zf_statistics(block);
    }
    let k = block.h.ncols();
    let hh = block.h.adjoint();
    let gram = &hh * &block.h + DMatrix::<Complex64>::identity(k, k) * Complex64::new(eta, 0.0);
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::Dimension("regularized Gram matrix is not positive definite".into()))?;
    Ok(chol.solve(&(hh * &block.y)))
}

/// Linear MMSE detection with a known channel and noise variance.
pub fn mmse_detect(block: &SignalBlock, alphabet: &Alphabet) -> Result<DetectionResult> {
    Ok(decide(block, mmse_statistics(block)?, alphabet))
}

/// Number of singular values of `y` above `threshold * sigma_max`.
pub fn estimate_source_count(y: &CMatrix, threshold: f64) -> usize {
    if y.is_empty() {
        return 0;
    }
    let s = y.clone().singular_values();
    let s_max = s.max();
    if s_max <= 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > threshold * s_max).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::synthesize;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_channel_zf_is_exact() {
        let b = synthesize(3, 3, 20, &Alphabet::bpsk(), f64::INFINITY, 4).unwrap();
        let block = SignalBlock::from_parts(DMatrix::identity(3, 3), b.x.clone(), None, 0.0);
        let r = zf_detect(&block, &Alphabet::bpsk()).unwrap();
        assert_eq!(r.x_hat, b.x);
        assert_eq!(r.symbol_errors, Some(0));
        assert!(r.residual < 1e-24);
    }

    #[test]
    fn pinv_is_left_inverse() {
        let b = synthesize(5, 3, 1, &Alphabet::bpsk(), f64::INFINITY, 11).unwrap();
        let p = pinv_checked(&b.h).unwrap();
        let e = &p * &b.h - DMatrix::<Complex64>::identity(3, 3);
        assert!(frobenius_sqr(&e).sqrt() < 1e-12);
    }

    #[test]
    fn repeated_column_is_rank_deficient() {
        let b = synthesize(4, 1, 10, &Alphabet::bpsk(), 30.0, 2).unwrap();
        let col = b.h.column(0).into_owned();
        let h = DMatrix::from_columns(&[col.clone(), col]);
        let x = DMatrix::from_element(2, 10, c(1.0));
        let block = SignalBlock::from_parts(h, x, None, 0.0);
        assert!(matches!(
            zf_detect(&block, &Alphabet::bpsk()),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn mmse_identity_halves_y() {
        let x = DMatrix::from_row_slice(2, 3, &[c(1.0), c(-1.0), c(1.0), c(-1.0), c(-1.0), c(1.0)]);
        let w = DMatrix::from_row_slice(2, 3, &[c(0.3), c(-0.2), c(-0.7), c(0.5), c(0.1), c(0.9)]);
        let block = SignalBlock::from_parts(DMatrix::identity(2, 2), x, Some(w), 1.0);
        let stats = mmse_statistics(&block).unwrap();
        let half = &block.y * c(0.5);
        assert!(frobenius_sqr(&(&stats - &half)) < 1e-28);
        let r = mmse_detect(&block, &Alphabet::bpsk()).unwrap();
        let signs = block.y.map(|z| c(if z.re >= 0.0 { 1.0 } else { -1.0 }));
        assert_eq!(r.x_hat, signs);
    }

    #[test]
    fn mmse_noiseless_limit_matches_zf() {
        let b = synthesize(4, 3, 40, &Alphabet::qpsk(), 15.0, 8).unwrap();
        let mut tiny = b.clone();
        tiny.noise_var = 1e-14;
        let zf = zf_detect(&b, &Alphabet::qpsk()).unwrap();
        let mm = mmse_detect(&tiny, &Alphabet::qpsk()).unwrap();
        assert_eq!(zf.x_hat, mm.x_hat);
    }

    #[test]
    fn counts_sources() {
        let b = synthesize(6, 3, 100, &Alphabet::bpsk(), f64::INFINITY, 21).unwrap();
        assert_eq!(estimate_source_count(&b.y, 1e-8), 3);
        assert_eq!(estimate_source_count(&DMatrix::zeros(4, 10), 0.1), 0);
    }
}
