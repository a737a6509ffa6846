//! Per-packet success probability `P_M(k)` given `k` simultaneous
//! transmitters and MPR capability `M`.

#[derive(Debug, Clone, Copy, Default)]
pub enum SuccessModel {
    /// Every packet survives when `k <= M`; none do otherwise.
    #[default]
    Ideal,
    /// Fixed packet error rate `epsilon` whenever `k <= M`.
    Erasure { epsilon: f64 },
    /// Error rate grows linearly with load: `1 - epsilon * k / M` for
    /// `k <= M`, so a fully loaded receiver always sees `1 - epsilon`.
    LoadDependent { epsilon: f64 },
    /// Caller-supplied `P_M(k)` as `f(k, M)`.
    Custom(fn(usize, usize) -> f64),
}

impl SuccessModel {
    pub fn p_success(&self, k: usize, m: usize) -> f64 {
        if k == 0 || k > m {
            return 0.0;
        }
        match *self {
            SuccessModel::Ideal => 1.0,
            SuccessModel::Erasure { epsilon } => 1.0 - epsilon,
            SuccessModel::LoadDependent { epsilon } => 1.0 - epsilon * k as f64 / m as f64,
            SuccessModel::Custom(f) => f(k, m).clamp(0.0, 1.0),
        }
    }

    pub fn is_ideal(&self) -> bool {
        matches!(self, SuccessModel::Ideal)
            || matches!(self, SuccessModel::Erasure { epsilon } if *epsilon == 0.0)
    }

    /// Checks the monotonicity contract (non-increasing in `k`,
    /// non-decreasing in `M`) for `1 <= k <= M <= m_max`.
    pub fn is_monotone(&self, m_max: usize) -> bool {
        for m in 1..=m_max {
            for k in 1..=m {
                let p = self.p_success(k, m);
                if !(0.0..=1.0).contains(&p) {
                    return false;
                }
                if k < m && self.p_success(k + 1, m) > p + 1e-15 {
                    return false;
                }
                if m < m_max && self.p_success(k, m + 1) + 1e-15 < p {
                    return false;
                }
            }
        }
        true
    }
}
