//! Scalar maximization and root bracketing.

/// Inverse golden ratio, `(sqrt(5) - 1) / 2`.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Number of grid points used to locate the bracket before refining.
pub const PRESCAN_POINTS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

/// Maximizes a unimodal `f` on `[lo, hi]`.
///
/// A uniform pre-scan picks the bracket around the best grid point, golden
/// section narrows it, and a final bisection on the sign of a central
/// difference pins the stationary point below the `sqrt(eps)` floor that a
/// comparison-only search cannot get past. `tol` bounds the final bracket
/// width.
pub fn maximize<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Maximum {
    assert!(hi > lo, "empty search interval");
    let n = PRESCAN_POINTS;
    let step = (hi - lo) / (n - 1) as f64;
    let mut best_i = 0;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..n {
        let v = f(lo + step * i as f64);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let grid_best = Maximum {
        x: lo + step * best_i as f64,
        value: best_v,
    };
    let a = lo + step * best_i.saturating_sub(1) as f64;
    let b = (lo + step * (best_i + 1) as f64).min(hi);

    let (a, b) = golden_section(&f, a, b, (tol * 1e3).max(1e-7 * (1.0 + b.abs())));
    let x = polish_stationary(&f, a, b, lo, hi, tol);
    let refined = Maximum { x, value: f(x) };
    if refined.value >= grid_best.value {
        refined
    } else {
        grid_best
    }
}

/// Golden-section narrowing of `[a, b]` until its width drops below `tol`.
fn golden_section<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..500 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    (a, b)
}

/// Bisects on the sign of the central-difference slope around `[a, b]`,
/// widened by a few difference steps and clipped to `[lo, hi]`. Falls back to
/// the best of the bracket ends and midpoint if the slope does not change
/// sign.
fn polish_stationary<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> f64 {
    let h = (1e-3 * 0.5 * (a + b).abs()).max(1e-10);
    let (mut a, mut b) = ((a - 8.0 * h).max(lo), (b + 8.0 * h).min(hi));
    // Five-point stencil: O(h^4) bias keeps the stationary point sharp.
    let at = |x: f64| f(x.clamp(lo, hi));
    let slope = |x: f64| 8.0 * (at(x + h) - at(x - h)) - (at(x + 2.0 * h) - at(x - 2.0 * h));
    let sa = slope(a);
    let sb = slope(b);
    if !(sa > 0.0 && sb < 0.0) {
        let fa = f(a);
        let fb = f(b);
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        return if fm >= fa && fm >= fb {
            mid
        } else if fa >= fb {
            a
        } else {
            b
        };
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if b - a <= tol.min(1e-12 * (1.0 + mid.abs())) || mid <= a || mid >= b {
            break;
        }
        if slope(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Root of a function that changes sign on `[lo, hi]`, by bisection until the
/// bracket stops shrinking or is narrower than `tol`.
///
/// Returns `None` when `f(lo)` and `f(hi)` have the same strict sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return None;
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximizes_parabola() {
        let m = maximize(|x| -(x - 0.3).powi(2) + 2.0, 0.0, 1.0, 1e-12);
        assert!((m.x - 0.3).abs() < 1e-9, "{}", m.x);
        assert!((m.value - 2.0).abs() < 1e-15);
    }

    #[test]
    fn maximizes_at_boundary() {
        let m = maximize(|x| x, 0.0, 1.0, 1e-12);
        assert!((m.x - 1.0).abs() < 1e-9);
    }

    #[test]
    fn locates_peak_near_edge_of_flat_tail() {
        // Sharp peak at 0.01 on [0, 10] with a flat tail.
        let f = |x: f64| x * (-100.0 * x).exp();
        let m = maximize(f, 0.0, 10.0, 1e-14);
        assert!((m.x - 0.01).abs() < 1e-9, "{:e}", m.x - 0.01);
    }

    #[test]
    fn bisects_cubic() {
        let r = bisect(|x| x * x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
    }
}
