use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{canonicalize, frobenius_sqr, pinv_checked, quantize_matrix, Alphabet, CMatrix};
use super::DetectionResult;
use crate::error::{Error, Result};

/// Upper bound on `|alphabet|^(K * N_sym)` for exhaustive search.
pub const EXHAUSTIVE_LIMIT: u64 = 1 << 24;

/// Cholesky pivots below this fraction of the Gram diagonal mark a candidate
/// as rank deficient.
const GRAM_PIVOT_TOL: f64 = 1e-10;

/// `X^+ = X^H (X X^H)^-1` for a wide matrix with full row rank.
fn right_pinv(x: &CMatrix) -> Result<CMatrix> {
    Ok(pinv_checked(&x.adjoint())?.adjoint())
}

/// `I - X^H (X X^H)^-1 X`: projector onto the orthogonal complement of the
/// row space of `X`.
pub fn projector_complement(x: &CMatrix) -> Result<CMatrix> {
    let n = x.ncols();
    let p = right_pinv(x)? * x;
    Ok(DMatrix::identity(n, n) - p)
}

/// `||Y P_perp||_F^2`, the residual after the channel has been optimized out.
pub fn blind_objective(y: &CMatrix, x: &CMatrix) -> Result<f64> {
    check_shapes(y, x)?;
    Ok(frobenius_sqr(&(y * projector_complement(x)?)))
}

/// Least-squares channel for fixed symbols: `H = Y X^+`.
pub fn fit_channel(y: &CMatrix, x: &CMatrix) -> Result<CMatrix> {
    check_shapes(y, x)?;
    Ok(y * right_pinv(x)?)
}

/// `||Y - fit_channel(Y, X) X||_F^2`.
pub fn fit_residual(y: &CMatrix, x: &CMatrix) -> Result<f64> {
    let h = fit_channel(y, x)?;
    Ok(frobenius_sqr(&(y - h * x)))
}

fn check_shapes(y: &CMatrix, x: &CMatrix) -> Result<()> {
    if y.ncols() != x.ncols() {
        return Err(Error::Dimension(format!(
            "Y has {} columns but X has {}",
            y.ncols(),
            x.ncols()
        )));
    }
    Ok(())
}

fn check_k(y: &CMatrix, k: usize) -> Result<()> {
    if k > y.nrows() {
        return Err(Error::invalid("K", k, "K <= M_ant"));
    }
    if k > y.ncols() {
        return Err(Error::invalid("K", k, "K <= N_sym"));
    }
    Ok(())
}

fn empty_result(y: &CMatrix) -> DetectionResult {
    DetectionResult {
        x_hat: DMatrix::zeros(0, y.ncols()),
        h_hat: Some(DMatrix::zeros(y.nrows(), 0)),
        residual: frobenius_sqr(y),
        symbol_errors: None,
    }
}

/// Finite-alphabet blind detection by enumeration.
///
/// Rows are only identifiable up to permutation and the alphabet's
/// symmetry scalars, so each candidate row starts with an orbit
/// representative and rows are taken as increasing combinations of the
/// distinct row patterns. The full space is still bounded by
/// [`EXHAUSTIVE_LIMIT`].
pub fn blind_detect_exhaustive(
    y: &CMatrix,
    k: usize,
    alphabet: &Alphabet,
) -> Result<DetectionResult> {
    check_k(y, k)?;
    let n = y.ncols();
    let space = (alphabet.len() as f64).powf((k * n) as f64);
    if space > EXHAUSTIVE_LIMIT as f64 {
        return Err(Error::SearchTooLarge {
            candidates: space,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    if k == 0 {
        return Ok(empty_result(y));
    }

    let patterns = row_patterns(n, alphabet);
    let total = frobenius_sqr(y);
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        let x = DMatrix::from_fn(k, n, |i, j| patterns[combo[i]][j]);
        if let Some(obj) = fast_objective(y, &x, total) {
            if best.as_ref().is_none_or(|(b, _)| obj < *b) {
                best = Some((obj, combo.clone()));
            }
        }
        if !next_combination(&mut combo, patterns.len()) {
            break;
        }
    }

    let (_, combo) = best.ok_or(Error::RankDeficient {
        condition: f64::INFINITY,
        limit: super::CONDITION_LIMIT,
    })?;
    let x_hat = DMatrix::from_fn(k, n, |i, j| patterns[combo[i]][j]);
    let h_hat = fit_channel(y, &x_hat)?;
    let residual = frobenius_sqr(&(y - &h_hat * &x_hat));
    Ok(canonicalize(
        &DetectionResult {
            x_hat,
            h_hat: Some(h_hat),
            residual,
            symbol_errors: None,
        },
        alphabet,
    ))
}

/// `||Y||^2 - tr(A G^-1 A^H)` with `A = Y X^H`, `G = X X^H`; `None` when `X`
/// lacks full row rank.
fn fast_objective(y: &CMatrix, x: &CMatrix, total: f64) -> Option<f64> {
    let g = x * x.adjoint();
    let scale = (0..g.nrows()).map(|i| g[(i, i)].re).fold(0.0, f64::max);
    let chol = g.cholesky()?;
    let l = chol.l_dirty();
    if (0..l.nrows()).any(|i| l[(i, i)].norm_sqr() < GRAM_PIVOT_TOL * scale) {
        return None;
    }
    let a = y * x.adjoint();
    let ga = chol.solve(&a.adjoint());
    let explained: f64 = (a * ga).trace().re;
    Some((total - explained).max(0.0))
}

/// All length-`n` rows whose first entry is an orbit representative, in
/// lexicographic order of symbol indices.
fn row_patterns(n: usize, alphabet: &Alphabet) -> Vec<Vec<Complex64>> {
    let reps = orbit_representatives(alphabet);
    let q = alphabet.len();
    let free = n.saturating_sub(1);
    let count = q.pow(free as u32);
    let mut out = Vec::with_capacity(reps.len() * count);
    for &r in &reps {
        for code in 0..count {
            let mut row = vec![alphabet.symbols[r]; n];
            let mut c = code;
            for j in (1..n).rev() {
                row[j] = alphabet.symbols[c % q];
                c /= q;
            }
            out.push(row);
        }
    }
    out
}

/// Lowest symbol index of each orbit under the alphabet symmetries.
pub(crate) fn orbit_representatives(alphabet: &Alphabet) -> Vec<usize> {
    let syms = alphabet.symmetries();
    let mut covered = vec![false; alphabet.len()];
    let mut reps = Vec::new();
    for i in 0..alphabet.len() {
        if covered[i] {
            continue;
        }
        reps.push(i);
        for g in &syms {
            covered[alphabet.nearest(g * alphabet.symbols[i])] = true;
        }
    }
    reps
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq)]
pub struct IlspOptions {
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Channel used for the first start instead of a random draw.
    pub init_h: Option<CMatrix>,
}

impl Default for IlspOptions {
    fn default() -> Self {
        IlspOptions {
            max_iter: 50,
            restarts: 8,
            seed: 0,
            init_h: None,
        }
    }
}

/// Why an ILSP start stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The symbol step reproduced the previous symbols.
    FixedPoint,
    /// The next symbol step would have increased the objective.
    Stalled,
    MaxIter,
    /// The channel or the symbol estimate lost rank.
    RankDeficient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IlspOutcome {
    pub result: DetectionResult,
    /// False when the best start ran out of iterations.
    pub converged: bool,
    /// Channel updates performed by the best start.
    pub iterations: usize,
    /// Objective after every channel update of the best start.
    pub trace: Vec<f64>,
    pub termination: Termination,
}

struct Start {
    x: CMatrix,
    h: CMatrix,
    residual: f64,
    iterations: usize,
    trace: Vec<f64>,
    termination: Termination,
}

/// Iterative least squares with projection: alternate a quantized
/// least-squares symbol step with a least-squares channel step, from
/// several random channel initializations, keeping the best fit.
pub fn blind_detect_ilsp(
    y: &CMatrix,
    k: usize,
    alphabet: &Alphabet,
    opts: &IlspOptions,
) -> Result<IlspOutcome> {
    check_k(y, k)?;
    if opts.max_iter == 0 {
        return Err(Error::invalid("max_iter", 0, "max_iter >= 1"));
    }
    if k == 0 {
        return Ok(IlspOutcome {
            result: empty_result(y),
            converged: true,
            iterations: 0,
            trace: vec![],
            termination: Termination::FixedPoint,
        });
    }
    let m = y.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<Start> = None;
    // Starts whose first symbol estimate loses rank are redrawn, up to four
    // draws per requested restart.
    let wanted = opts.restarts.max(1);
    let mut valid = 0;
    let mut start = 0;
    while valid < wanted && start < 4 * wanted {
        let h0 = match (&opts.init_h, start) {
            (Some(h), 0) => {
                if h.shape() != (m, k) {
                    return Err(Error::Dimension(format!(
                        "init_h is {}x{}, expected {m}x{k}",
                        h.nrows(),
                        h.ncols()
                    )));
                }
                h.clone()
            }
            _ => DMatrix::from_fn(m, k, |_, _| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            }),
        };
        start += 1;
        if let Some(s) = ilsp_start(y, h0, alphabet, opts.max_iter) {
            valid += 1;
            if best.as_ref().is_none_or(|b| s.residual < b.residual) {
                best = Some(s);
            }
        }
    }
    let best = best.ok_or(Error::RankDeficient {
        condition: f64::INFINITY,
        limit: super::CONDITION_LIMIT,
    })?;
    let result = canonicalize(
        &DetectionResult {
            x_hat: best.x,
            h_hat: Some(best.h),
            residual: best.residual,
            symbol_errors: None,
        },
        alphabet,
    );
    Ok(IlspOutcome {
        result,
        converged: best.termination != Termination::MaxIter,
        iterations: best.iterations,
        trace: best.trace,
        termination: best.termination,
    })
}

fn symbol_step(y: &CMatrix, h: &CMatrix, alphabet: &Alphabet) -> Option<CMatrix> {
    let p = pinv_checked(h).ok()?;
    Some(quantize_matrix(&(p * y), alphabet))
}

fn ilsp_start(y: &CMatrix, h0: CMatrix, alphabet: &Alphabet, max_iter: usize) -> Option<Start> {
    let mut x = symbol_step(y, &h0, alphabet)?;
    let mut h = fit_channel(y, &x).ok()?;
    let mut residual = frobenius_sqr(&(y - &h * &x));
    let mut trace = vec![residual];
    let mut termination = Termination::MaxIter;
    let mut iterations = 1;
    loop {
        let Some(next) = symbol_step(y, &h, alphabet) else {
            termination = Termination::RankDeficient;
            break;
        };
        if next == x {
            termination = Termination::FixedPoint;
            break;
        }
        if frobenius_sqr(&(y - &h * &next)) > residual {
            termination = Termination::Stalled;
            break;
        }
        if iterations == max_iter {
            break;
        }
        let Ok(next_h) = fit_channel(y, &next) else {
            termination = Termination::RankDeficient;
            break;
        };
        x = next;
        h = next_h;
        residual = frobenius_sqr(&(y - &h * &x));
        trace.push(residual);
        iterations += 1;
    }
    Some(Start {
        x,
        h,
        residual,
        iterations,
        trace,
        termination,
    })
}
