use num_complex::Complex64;

const SNAP_TOL: f64 = 1e-9;

/// Finite constellation the transmitted symbols are drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct Alphabet {
    pub name: String,
    pub symbols: Vec<Complex64>,
}

impl Alphabet {
    pub fn new(name: impl Into<String>, symbols: Vec<Complex64>) -> Self {
        assert!(!symbols.is_empty(), "alphabet must not be empty");
        Alphabet {
            name: name.into(),
            symbols,
        }
    }

    /// `{+1, -1}`.
    pub fn bpsk() -> Self {
        Alphabet::new("bpsk", vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)])
    }

    /// `(+-1 +- i) / sqrt(2)`, unit average energy.
    pub fn qpsk() -> Self {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        Alphabet::new(
            "qpsk",
            vec![
                Complex64::new(a, a),
                Complex64::new(-a, a),
                Complex64::new(-a, -a),
                Complex64::new(a, -a),
            ],
        )
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "bpsk" => Some(Self::bpsk()),
            "qpsk" => Some(Self::qpsk()),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn average_energy(&self) -> f64 {
        self.symbols.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.len() as f64
    }

    /// Index of the closest symbol (ties go to the lower index).
    pub fn nearest(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, s) in self.symbols.iter().enumerate() {
            let d = (z - s).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    pub fn quantize(&self, z: Complex64) -> Complex64 {
        self.symbols[self.nearest(z)]
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.symbols.iter().any(|s| (z - s).norm() < SNAP_TOL)
    }

    /// Unit-modulus scalars `g` with `g * alphabet == alphabet`, identity
    /// first. Blind detection cannot tell a row apart from its image under
    /// any of these.
    pub fn symmetries(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(1.0, 0.0)];
        let anchor = match self.symbols.iter().find(|s| s.norm() > SNAP_TOL) {
            Some(a) => *a,
            None => return out,
        };
        for s in &self.symbols {
            if (s.norm() - anchor.norm()).abs() > SNAP_TOL {
                continue;
            }
            let g = s / anchor;
            if (g - Complex64::new(1.0, 0.0)).norm() < SNAP_TOL {
                continue;
            }
            if self.symbols.iter().all(|t| self.contains(g * t)) {
                out.push(g);
            }
        }
        out
    }
}
