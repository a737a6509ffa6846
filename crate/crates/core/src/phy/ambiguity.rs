use nalgebra::DMatrix;
use num_complex::Complex64;

use super::blind::orbit_representatives;
use super::{Alphabet, CMatrix, DetectionResult};

fn hamming(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

fn row_indices(x: &CMatrix, i: usize, alphabet: &Alphabet, g: Complex64) -> Vec<usize> {
    x.row(i).iter().map(|z| alphabet.nearest(g * z)).collect()
}

/// Aligns a blind estimate with the transmitted symbols over row
/// permutations and per-row alphabet symmetries, minimizing the number of
/// mismatched symbols. Returns the aligned estimate and that count.
pub fn align_ambiguity(x_hat: &CMatrix, x_true: &CMatrix, alphabet: &Alphabet) -> (CMatrix, usize) {
    assert_eq!(x_hat.shape(), x_true.shape(), "shape mismatch");
    let k = x_hat.nrows();
    let syms = alphabet.symmetries();
    let truth: Vec<Vec<usize>> = (0..k)
        .map(|j| row_indices(x_true, j, alphabet, Complex64::new(1.0, 0.0)))
        .collect();
    // cost[i][j]: best symmetry for estimate row i placed at true row j
    let mut cost = vec![vec![(usize::MAX, Complex64::new(1.0, 0.0)); k]; k];
    for (i, row) in cost.iter_mut().enumerate() {
        for g in &syms {
            let est = row_indices(x_hat, i, alphabet, *g);
            for (j, cell) in row.iter_mut().enumerate() {
                let d = hamming(&est, &truth[j]);
                if d < cell.0 {
                    *cell = (d, *g);
                }
            }
        }
    }

    let mut best = (usize::MAX, (0..k).collect::<Vec<_>>());
    let mut perm = Vec::with_capacity(k);
    let mut used = vec![false; k];
    search(&cost, &mut perm, &mut used, 0, &mut best);

    let (errors, assign) = best;
    let mut aligned = DMatrix::zeros(k, x_hat.ncols());
    for (i, &j) in assign.iter().enumerate() {
        let g = cost[i][j].1;
        for c in 0..x_hat.ncols() {
            aligned[(j, c)] = alphabet.quantize(g * x_hat[(i, c)]);
        }
    }
    (aligned, if k == 0 { 0 } else { errors })
}

fn search(
    cost: &[Vec<(usize, Complex64)>],
    perm: &mut Vec<usize>,
    used: &mut [bool],
    acc: usize,
    best: &mut (usize, Vec<usize>),
) {
    if acc >= best.0 {
        return;
    }
    let i = perm.len();
    if i == cost.len() {
        *best = (acc, perm.clone());
        return;
    }
    for j in 0..cost.len() {
        if !used[j] {
            used[j] = true;
            perm.push(j);
            search(cost, perm, used, acc + cost[i][j].0, best);
            perm.pop();
            used[j] = false;
        }
    }
}

/// Canonical representative of a blind estimate: each row is scaled so its
/// first nonzero symbol is the lowest-index member of its orbit, then rows
/// are sorted by symbol indices. The channel estimate is transformed to
/// keep `H_hat * X_hat` unchanged.
pub fn canonicalize(result: &DetectionResult, alphabet: &Alphabet) -> DetectionResult {
    let x = &result.x_hat;
    let (k, n) = x.shape();
    let syms = alphabet.symmetries();
    let reps = orbit_representatives(alphabet);
    let mut scales = Vec::with_capacity(k);
    for i in 0..k {
        let first = (0..n).map(|c| x[(i, c)]).find(|z| z.norm() > 1e-12);
        let g = first
            .and_then(|s| {
                syms.iter()
                    .copied()
                    .find(|g| reps.contains(&alphabet.nearest(g * s)))
            })
            .unwrap_or(Complex64::new(1.0, 0.0));
        scales.push(g);
    }
    let keys: Vec<Vec<usize>> = (0..k)
        .map(|i| row_indices(x, i, alphabet, scales[i]))
        .collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|a, b| keys[*a].cmp(&keys[*b]));

    let x_hat = DMatrix::from_fn(k, n, |r, c| alphabet.symbols[keys[order[r]][c]]);
    let h_hat = result.h_hat.as_ref().map(|h| {
        DMatrix::from_fn(h.nrows(), k, |r, c| h[(r, order[c])] / scales[order[c]])
    });
    DetectionResult {
        x_hat,
        h_hat,
        residual: result.residual,
        symbol_errors: result.symbol_errors,
    }
}
