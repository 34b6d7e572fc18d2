/// An integer partition of `n` (parts in non-increasing order) together with
/// the number of set partitions of `{1..n}` whose block sizes are exactly
/// these parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionType {
    pub parts: Vec<usize>,
    pub count: u128,
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// `n! / (prod n_i! prod m_r!)` where `m_r` counts repeated part sizes.
pub fn set_partition_count(parts: &[usize]) -> u128 {
    let n: usize = parts.iter().sum();
    let mut denom: u128 = parts.iter().map(|&p| factorial(p)).product();
    let mut i = 0;
    while i < parts.len() {
        let j = parts[i..].iter().take_while(|&&p| p == parts[i]).count();
        denom *= factorial(j);
        i += j;
    }
    factorial(n) / denom
}

/// All integer partitions of `n` in reverse lexicographic order.
pub fn integer_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=rest.min(max)).rev() {
            cur.push(p);
            rec(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, n, &mut Vec::new(), &mut out);
    }
    out
}

/// Partition types of every `n` in `0..=nmax`; entry `n` is empty for `n = 0`.
#[derive(Debug, Clone)]
pub struct PartitionTable {
    types: Vec<Vec<PartitionType>>,
}

impl PartitionTable {
    pub fn new(nmax: usize) -> Self {
        let types = (0..=nmax)
            .map(|n| {
                integer_partitions(n)
                    .into_iter()
                    .map(|parts| PartitionType { count: set_partition_count(&parts), parts })
                    .collect()
            })
            .collect();
        Self { types }
    }

    pub fn max_order(&self) -> usize {
        self.types.len() - 1
    }

    pub fn of(&self, n: usize) -> &[PartitionType] {
        &self.types[n]
    }
}
