use serde::{Deserialize, Serialize};

/// Document counts for one (free term, controlled term) pair.
///
/// `k11` documents contain both, `k12` only the free term, `k21` only the
/// controlled term, and `k22` neither.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ContingencyCounts {
    pub k11: u64,
    pub k12: u64,
    pub k21: u64,
    pub k22: u64,
}

impl ContingencyCounts {
    pub fn new(k11: u64, k12: u64, k21: u64, k22: u64) -> Self {
        ContingencyCounts { k11, k12, k21, k22 }
    }

    pub fn total(&self) -> u64 {
        self.k11 + self.k12 + self.k21 + self.k22
    }

    /// Documents containing the free term.
    pub fn free_total(&self) -> u64 {
        self.k11 + self.k12
    }

    /// Documents indexed with the controlled term.
    pub fn controlled_total(&self) -> u64 {
        self.k11 + self.k21
    }

    pub fn transposed(&self) -> Self {
        ContingencyCounts::new(self.k11, self.k21, self.k12, self.k22)
    }
}

/// Log-likelihood ratio statistic G² of a 2×2 table against independence.
///
/// `G² = 2 Σ k ln(k / E)` where `E = row · col / N`; empty cells contribute
/// nothing. Returns 0 when the table is empty or either marginal of the
/// tested pair is zero. Rounding noise below zero is clamped.
pub fn llr(c: ContingencyCounts) -> f64 {
    let n = c.total();
    let (row1, col1) = (c.free_total(), c.controlled_total());
    if n == 0 || row1 == 0 || col1 == 0 {
        return 0.0;
    }
    let (row2, col2) = (c.k21 + c.k22, c.k12 + c.k22);
    let n = n as f64;
    let cells = [
        (c.k11, row1, col1),
        (c.k12, row1, col2),
        (c.k21, row2, col1),
        (c.k22, row2, col2),
    ];
    let sum: f64 = cells
        .iter()
        .filter(|(k, _, _)| *k > 0)
        .map(|&(k, row, col)| {
            let k = k as f64;
            let expected = row as f64 * col as f64 / n;
            k * (k / expected).ln()
        })
        .sum();
    (2.0 * sum).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Entropy formulation: G² = 2 (Σ k ln k − Σ r ln r − Σ c ln c + N ln N).
    fn entropy_oracle(c: ContingencyCounts) -> f64 {
        let xlx = |x: u64| if x == 0 { 0.0 } else { x as f64 * (x as f64).ln() };
        let (r1, r2) = (c.k11 + c.k12, c.k21 + c.k22);
        let (c1, c2) = (c.k11 + c.k21, c.k12 + c.k22);
        if r1 == 0 || c1 == 0 {
            return 0.0;
        }
        let cells = xlx(c.k11) + xlx(c.k12) + xlx(c.k21) + xlx(c.k22);
        (2.0 * (cells - xlx(r1) - xlx(r2) - xlx(c1) - xlx(c2) + xlx(c.total()))).max(0.0)
    }

    #[test]
    fn independence_scores_zero() {
        assert_eq!(llr(ContingencyCounts::new(2, 2, 2, 2)), 0.0);
        assert!(llr(ContingencyCounts::new(3, 6, 5, 10)) < 1e-9);
    }

    #[test]
    fn perfect_association() {
        // 2 · 20 · ln 2
        let g = llr(ContingencyCounts::new(10, 0, 0, 10));
        assert!((g - 27.725_887_222_397_81).abs() < 1e-9, "{g}");
        assert!((entropy_oracle(ContingencyCounts::new(10, 0, 0, 10)) - g).abs() < 1e-9);
    }

    #[test]
    fn degenerate_tables() {
        assert_eq!(llr(ContingencyCounts::default()), 0.0);
        assert_eq!(llr(ContingencyCounts::new(1, 0, 0, 0)), 0.0);
        assert_eq!(llr(ContingencyCounts::new(0, 0, 3, 4)), 0.0);
        assert_eq!(llr(ContingencyCounts::new(0, 3, 0, 4)), 0.0);
    }

    #[test]
    fn matches_oracle_on_small_tables() {
        for k11 in 0..=8 {
            for k12 in 0..=8 {
                for k21 in 0..=8 {
                    for k22 in 0..=8 {
                        let c = ContingencyCounts::new(k11, k12, k21, k22);
                        assert!((llr(c) - entropy_oracle(c)).abs() < 1e-9, "{c:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn moving_mass_onto_diagonal_never_lowers_positive_association() {
        for n in 1..=40u64 {
            for row1 in 1..n {
                for col1 in 1..n {
                    // walk k11 upward with fixed marginals, starting at independence or above
                    let lo = (row1 + col1).saturating_sub(n);
                    let hi = row1.min(col1);
                    let mut prev: Option<f64> = None;
                    for k11 in lo..=hi {
                        let c = ContingencyCounts::new(k11, row1 - k11, col1 - k11, n + k11 - row1 - col1);
                        if (c.k11 * c.k22) < (c.k12 * c.k21) {
                            continue;
                        }
                        let g = llr(c);
                        if let Some(p) = prev {
                            assert!(g >= p - 1e-9, "{c:?}: {g} < {p}");
                        }
                        prev = Some(g);
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn transpose_symmetry(k11 in 0u64..500, k12 in 0u64..500, k21 in 0u64..500, k22 in 0u64..500) {
            let c = ContingencyCounts::new(k11, k12, k21, k22);
            prop_assert!((llr(c) - llr(c.transposed())).abs() < 1e-9);
        }

        #[test]
        fn scaled_independent_tables_score_zero(a in 1u64..6, b in 1u64..6, c in 1u64..6, d in 1u64..6, s in 1u64..40) {
            // outer product of two marginal vectors is independent
            let t = ContingencyCounts::new(a * c * s, a * d * s, b * c * s, b * d * s);
            prop_assert!(llr(t) < 1e-9);
        }
    }
}
