//! Schröder numbers, grid estimates of C^k norms for compositions of 1D
//! sine-basis layers, and empirical checks of the composition estimate
//! `||comp - id||_{C^k} <= M_k e^{k S} S` with `S = sum_l ||f_l||_{C^k}`.

mod ck;
mod experiment;
mod partitions;

pub use ck::{
    composition_sups, field_sups, lipschitz_product_check, scale_to_hypothesis, sum_bound_check, CkNormSpec,
    LipschitzCheck, SumBoundCheck, DEFAULT_GRID, GRID_SLACK, MAX_ORDER,
};
pub use experiment::{bound_ratio_experiment, BoundExperiment, BoundReport, BoundRow, CellMax, InitStrategy};
pub use partitions::{integer_partitions, set_partition_count, PartitionTable, PartitionType};

/// `M_0, ..., M_kmax` with `M_0 = M_1 = 1` and, for `k >= 2`,
/// `M_k = sum over partitions of {1..k} into at least two blocks of the
/// product of M_{|block|}`, grouped by block-size type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchroederTable {
    values: Vec<u128>,
}

impl SchroederTable {
    pub fn values(&self) -> &[u128] {
        &self.values
    }

    pub fn get(&self, k: usize) -> u128 {
        self.values[k]
    }

    pub fn max_order(&self) -> usize {
        self.values.len() - 1
    }
}

/// Exact Schröder numbers up to `kmax` (fits `u128` well beyond `kmax = 30`).
pub fn schroeder(kmax: usize) -> SchroederTable {
    schroeder_with(&PartitionTable::new(kmax))
}

pub(crate) fn schroeder_with(table: &PartitionTable) -> SchroederTable {
    let mut values = vec![1u128; table.max_order() + 1];
    for k in 2..values.len() {
        values[k] = table
            .of(k)
            .iter()
            .filter(|t| t.parts.len() >= 2)
            .map(|t| t.count * t.parts.iter().map(|&p| values[p]).product::<u128>())
            .sum();
    }
    SchroederTable { values }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Sum over set partitions of `{0..k}` with at least two blocks, each
    /// enumerated explicitly as a restricted growth string.
    fn brute_force(k: usize, m: &[u128]) -> u128 {
        fn rec(i: usize, k: usize, labels: &mut Vec<usize>, blocks: usize, m: &[u128], acc: &mut u128) {
            if i == k {
                if blocks >= 2 {
                    let mut sizes = vec![0usize; blocks];
                    for &l in labels.iter() {
                        sizes[l] += 1;
                    }
                    *acc += sizes.iter().map(|&s| m[s]).product::<u128>();
                }
                return;
            }
            for l in 0..=blocks {
                labels.push(l);
                rec(i + 1, k, labels, blocks.max(l + 1), m, acc);
                labels.pop();
            }
        }
        let mut acc = 0;
        rec(0, k, &mut Vec::new(), 0, m, &mut acc);
        acc
    }

    #[test]
    fn known_values() {
        let t = schroeder(10);
        let expected = [1u128, 1, 1, 4, 26, 236, 2752, 39208, 660032, 12818912, 282137824];
        assert_eq!(t.values(), &expected);
        assert_eq!(t.get(4), 26);
        assert_eq!(t.get(10), 282137824);
    }

    #[test]
    fn recursion_matches_explicit_enumeration() {
        let t = schroeder(8);
        for k in 2..=8 {
            assert_eq!(brute_force(k, t.values()), t.get(k), "k = {k}");
        }
        assert_eq!(brute_force(3, t.values()), 4);
    }

    #[test]
    fn growth_invariant() {
        let t = schroeder(25);
        for k in 3..=25 {
            assert!(t.get(k) >= k as u128 * t.get(k - 1));
        }
    }
}
