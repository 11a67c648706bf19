use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Multi-index layout shared by every jet with the same `(num_vars, order)`.
///
/// Multi-indices are stored in graded lexicographic order: all indices of total
/// degree 0, then degree 1, and so on, lexicographic (descending in the first
/// variable) within each degree. Index 0 is always the constant term and index
/// `1 + i` is the first-order coefficient of variable `i`.
#[derive(Debug)]
pub struct JetSpace {
    num_vars: usize,
    order: usize,
    exponents: Vec<Vec<u8>>,
    degrees: Vec<usize>,
    lookup: HashMap<u64, u32>,
    /// `(i, j, k)`: coefficient `i` times coefficient `j` contributes to `k`.
    products: Vec<(u32, u32, u32)>,
    /// For every non-constant index, an index one degree lower and the variable
    /// that was removed from it (the first variable with a positive exponent).
    parents: Vec<(u32, u32)>,
    /// `α!` for every multi-index.
    factorials: Vec<f64>,
}

pub(crate) fn key(exps: &[u8]) -> u64 {
    exps.iter().fold(0u64, |acc, &e| (acc << 4) | e as u64)
}

fn enumerate(num_vars: usize, degree: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if prefix.len() + 1 == num_vars {
        prefix.push(degree as u8);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=degree).rev() {
        prefix.push(first as u8);
        enumerate(num_vars, degree - first, prefix, out);
        prefix.pop();
    }
}

impl JetSpace {
    fn build(num_vars: usize, order: usize) -> Self {
        let mut exponents = Vec::new();
        if num_vars == 0 {
            exponents.push(Vec::new());
        } else {
            for d in 0..=order {
                enumerate(num_vars, d, &mut Vec::with_capacity(num_vars), &mut exponents);
            }
        }
        let degrees: Vec<usize> = exponents
            .iter()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .collect();
        let lookup: HashMap<u64, u32> = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (key(e), i as u32))
            .collect();

        let mut products = Vec::new();
        let mut sum = vec![0u8; num_vars];
        for (i, ei) in exponents.iter().enumerate() {
            for (j, ej) in exponents.iter().enumerate() {
                if degrees[i] + degrees[j] > order {
                    continue;
                }
                for v in 0..num_vars {
                    sum[v] = ei[v] + ej[v];
                }
                let k = lookup[&key(&sum)];
                products.push((i as u32, j as u32, k));
            }
        }

        let mut parents = vec![(0u32, 0u32); exponents.len()];
        for (idx, e) in exponents.iter().enumerate().skip(1) {
            let var = e.iter().position(|&x| x > 0).expect("non-constant index");
            let mut lower = e.clone();
            lower[var] -= 1;
            parents[idx] = (lookup[&key(&lower)], var as u32);
        }

        let factorials = exponents
            .iter()
            .map(|e| e.iter().map(|&x| factorial(x as usize)).product())
            .collect();

        JetSpace {
            num_vars,
            order,
            exponents,
            degrees,
            lookup,
            products,
            parents,
            factorials,
        }
    }

    /// Shared, cached space for `(num_vars, order)`.
    pub fn get(num_vars: usize, order: usize) -> Arc<JetSpace> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetSpace>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("jet space cache poisoned");
        guard
            .entry((num_vars, order))
            .or_insert_with(|| Arc::new(JetSpace::build(num_vars, order)))
            .clone()
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of stored coefficients: `C(num_vars + order, order)`.
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self, idx: usize) -> &[u8] {
        &self.exponents[idx]
    }

    pub fn degree(&self, idx: usize) -> usize {
        self.degrees[idx]
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        if exps.len() != self.num_vars {
            return None;
        }
        self.lookup.get(&key(exps)).map(|&i| i as usize)
    }

    pub(crate) fn products(&self) -> &[(u32, u32, u32)] {
        &self.products
    }

    pub(crate) fn parent(&self, idx: usize) -> (usize, usize) {
        let (p, v) = self.parents[idx];
        (p as usize, v as usize)
    }

    pub(crate) fn factorial(&self, idx: usize) -> f64 {
        self.factorials[idx]
    }

    /// Index range of all coefficients with total degree `<= degree`.
    pub(crate) fn upto(&self, degree: usize) -> usize {
        self.degrees.partition_point(|&d| d <= degree)
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: usize, k: usize) -> usize {
        (factorial(n) / (factorial(k) * factorial(n - k))).round() as usize
    }

    #[test]
    fn coefficient_count_matches_binomial() {
        for n in 1..=6 {
            for k in 0..=5 {
                assert_eq!(JetSpace::get(n, k).len(), binom(n + k, k), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn layout_is_graded() {
        let s = JetSpace::get(3, 3);
        assert_eq!(s.exponents(0), &[0, 0, 0]);
        assert_eq!(s.exponents(1), &[1, 0, 0]);
        assert_eq!(s.exponents(2), &[0, 1, 0]);
        assert_eq!(s.exponents(3), &[0, 0, 1]);
        for i in 1..s.len() {
            assert!(s.degree(i) >= s.degree(i - 1));
        }
        assert_eq!(s.upto(1), 4);
    }
}
