use alloc::collections::VecDeque;
use alloc::vec::Vec;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    num_traits::Float::sqrt(dot(a, a))
}

/// Limited-memory inverse Hessian approximation.
#[derive(Debug, Clone)]
pub struct LbfgsMemory {
    capacity: usize,
    pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)>,
}

impl LbfgsMemory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "memory must hold at least one pair");
        Self {
            capacity,
            pairs: VecDeque::with_capacity(capacity),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn clear(&mut self) {
        self.pairs.clear();
    }

    /// Stores `(s, y)` unless `sᵀy ≤ 1e-10 ‖s‖‖y‖`. Returns whether it was kept.
    pub fn push(&mut self, s: Vec<f64>, y: Vec<f64>) -> bool {
        let sy = dot(&s, &y);
        if !(sy > 1e-10 * norm(&s) * norm(&y)) {
            return false;
        }
        if self.pairs.len() == self.capacity {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, 1.0 / sy));
        true
    }

    /// `H g` by the two-loop recursion, with `H⁰ = γI`,
    /// `γ = sᵀy / yᵀy` from the newest pair.
    pub fn apply(&self, g: &[f64]) -> Vec<f64> {
        let mut q = g.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        let gamma = self
            .pairs
            .back()
            .map_or(1.0, |(s, y, _)| dot(s, y) / dot(y, y));
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_bfgs(pairs: &[(Vec<f64>, Vec<f64>)], n: usize) -> Vec<Vec<f64>> {
        let (s_last, y_last) = pairs.last().unwrap();
        let gamma = dot(s_last, y_last) / dot(y_last, y_last);
        let mut h: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { gamma } else { 0.0 }).collect())
            .collect();
        for (s, y) in pairs {
            let rho = 1.0 / dot(s, y);
            // V = I − ρ y sᵀ ; H ← Vᵀ H V + ρ s sᵀ
            let v: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| (if i == j { 1.0 } else { 0.0 }) - rho * y[i] * s[j])
                        .collect()
                })
                .collect();
            let hv: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| (0..n).map(|k| h[i][k] * v[k][j]).sum())
                        .collect()
                })
                .collect();
            h = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            (0..n).map(|k| v[k][i] * hv[k][j]).sum::<f64>() + rho * s[i] * s[j]
                        })
                        .collect()
                })
                .collect();
        }
        h
    }

    proptest! {
        #[test]
        fn two_loop_matches_dense_update(
            n in 1usize..=5,
            seed in proptest::collection::vec(-1.0f64..1.0, 80),
        ) {
            let mut it = seed.into_iter();
            let mut next = || it.next().unwrap();
            // Pairs from a random SPD quadratic keep sᵀy > 0.
            let a: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| next()).collect()).collect();
            let hess: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| {
                    (0..n).map(|k| a[k][i] * a[k][j]).sum::<f64>() + if i == j { 1.0 } else { 0.0 }
                }).collect())
                .collect();
            let mut memory = LbfgsMemory::new(n + 2);
            let mut pairs = Vec::new();
            for _ in 0..n {
                let s: Vec<f64> = (0..n).map(|_| next()).collect();
                prop_assume!(norm(&s) > 1e-3);
                let y: Vec<f64> = (0..n).map(|i| dot(&hess[i], &s)).collect();
                prop_assert!(memory.push(s.clone(), y.clone()));
                pairs.push((s, y));
            }
            let g: Vec<f64> = (0..n).map(|_| next()).collect();
            let dense = dense_bfgs(&pairs, n);
            let expected: Vec<f64> = (0..n).map(|i| dot(&dense[i], &g)).collect();
            let got = memory.apply(&g);
            let err: f64 = expected.iter().zip(&got).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            prop_assert!(err <= 1e-10 * norm(&expected).max(1.0), "err {}", err);
        }
    }

    #[test]
    fn rejects_nonpositive_curvature() {
        let mut m = LbfgsMemory::new(3);
        assert!(!m.push(vec![1.0, 0.0], vec![-1.0, 0.0]));
        assert!(!m.push(vec![1.0, 0.0], vec![0.0, 1.0]));
        assert!(m.is_empty());
        assert_eq!(m.apply(&[2.0, 3.0]), vec![2.0, 3.0]);
    }

    #[test]
    fn evicts_oldest_pair() {
        let mut m = LbfgsMemory::new(1);
        assert!(m.push(vec![1.0, 0.0], vec![2.0, 0.0]));
        assert!(m.push(vec![0.0, 1.0], vec![0.0, 4.0]));
        assert_eq!(m.len(), 1);
        assert_eq!(m.apply(&[0.0, 4.0]), vec![0.0, 1.0]);
    }
}
