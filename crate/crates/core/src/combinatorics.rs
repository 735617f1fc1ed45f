//! Set partitions of `{1..n}`, the relabelling `x[π]`, block-size
//! signatures and the integer sequences used by the rate identities.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// Largest ground set [`enumerate_partitions`] will expand.
pub const MAX_ENUMERATION_N: usize = 10;

/// A set partition of `{1..n}` in canonical form: blocks sorted internally
/// and ordered by their least element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn from_blocks(n: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n + 1];
        for block in blocks.iter_mut() {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            block.sort_unstable();
            for &e in block.iter() {
                if e == 0 || e > n {
                    return Err(Error::InvalidPartition(format!("element {e} outside 1..={n}")));
                }
                if seen[e] {
                    return Err(Error::InvalidPartition(format!("element {e} appears twice")));
                }
                seen[e] = true;
            }
        }
        if let Some(missing) = (1..=n).find(|&e| !seen[e]) {
            return Err(Error::InvalidPartition(format!("element {missing} not covered")));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Self { n, blocks })
    }

    pub fn singletons(n: usize) -> Self {
        Self { n, blocks: (1..=n).map(|i| vec![i]).collect() }
    }

    pub fn single_block(n: usize) -> Self {
        Self { n, blocks: if n == 0 { Vec::new() } else { vec![(1..=n).collect()] } }
    }

    /// From a restricted growth string `a` with `a[0] = 0` (0-based labels).
    pub fn from_rgs(rgs: &[usize]) -> Result<Self> {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (i, &label) in rgs.iter().enumerate() {
            if label > blocks.len() {
                return Err(Error::InvalidPartition(format!("label {label} at position {i} skips a block")));
            }
            if label == blocks.len() {
                blocks.push(Vec::new());
            }
            blocks[label].push(i + 1);
        }
        Ok(Self { n: rgs.len(), blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_singletons(&self) -> bool {
        self.blocks.len() == self.n
    }

    /// Index (into [`Self::blocks`]) of the block holding `i`.
    pub fn block_index_of(&self, i: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.binary_search(&i).is_ok())
    }

    /// `labels[i-1]` is the block index of element `i`.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.n];
        for (k, block) in self.blocks.iter().enumerate() {
            for &e in block {
                labels[e - 1] = k;
            }
        }
        labels
    }

    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.block_index_of(i) == self.block_index_of(j)
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    pub fn signature(&self) -> BlockSizeSignature {
        BlockSizeSignature::new(self.block_sizes()).expect("blocks are nonempty")
    }

    /// True if every block of `self` lies inside a block of `finer`'s
    /// coarsening, i.e. `self` is obtained from `finer` by merging blocks.
    pub fn is_coarsening_of(&self, finer: &Partition) -> bool {
        if self.n != finer.n {
            return false;
        }
        let labels = self.labels();
        finer.blocks.iter().all(|b| b.iter().all(|&e| labels[e - 1] == labels[b[0] - 1]))
    }

    /// Merges blocks of `self` according to `grouping`, a partition of the
    /// block indices `{1..num_blocks}`.
    pub fn merge_by(&self, grouping: &Partition) -> Result<Partition> {
        if grouping.n != self.blocks.len() {
            return Err(Error::LengthMismatch { expected: self.blocks.len(), got: grouping.n });
        }
        let blocks = grouping
            .blocks
            .iter()
            .map(|g| {
                let mut merged: Vec<usize> = g.iter().flat_map(|&k| self.blocks[k - 1].iter().copied()).collect();
                merged.sort_unstable();
                merged
            })
            .collect::<Vec<_>>();
        let mut out = Partition { n: self.n, blocks };
        out.blocks.sort_unstable_by_key(|b| b[0]);
        Ok(out)
    }

    /// Restriction to `{1..m}`.
    pub fn restrict(&self, m: usize) -> Partition {
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.iter().copied().filter(|&e| e <= m).collect::<Vec<_>>())
            .filter(|b: &Vec<usize>| !b.is_empty())
            .collect();
        Partition { n: m.min(self.n), blocks }
    }

    /// Relabels the ground set by `perm` (`perm[i-1]` is the new name of
    /// `i`).
    pub fn permute(&self, perm: &[usize]) -> Result<Partition> {
        if perm.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: perm.len() });
        }
        let blocks = self.blocks.iter().map(|b| b.iter().map(|&e| perm[e - 1]).collect()).collect();
        Partition::from_blocks(self.n, blocks)
    }

    pub fn rgs(&self) -> Vec<usize> {
        self.labels()
    }
}

impl fmt::Display for Partition {
    /// Block lists, e.g. `{1,2}{3}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for block in &self.blocks {
            f.write_str("{")?;
            for (k, e) in block.iter().enumerate() {
                if k > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{e}")?;
            }
            f.write_str("}")?;
        }
        Ok(())
    }
}

/// All partitions of `{1..n}`, in lexicographic order of their restricted
/// growth strings.
pub fn enumerate_partitions(n: usize) -> Result<Vec<Partition>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if n > MAX_ENUMERATION_N {
        return Err(Error::TooLarge { what: "n", value: n, max: MAX_ENUMERATION_N });
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    fill_rgs(&mut rgs, 1, 0, &mut out);
    Ok(out)
}

fn fill_rgs(rgs: &mut [usize], pos: usize, max_label: usize, out: &mut Vec<Partition>) {
    if pos == rgs.len() {
        out.push(Partition::from_rgs(rgs).expect("generated strings are restricted growth"));
        return;
    }
    for label in 0..=max_label + 1 {
        rgs[pos] = label;
        fill_rgs(rgs, pos + 1, max_label.max(label), out);
    }
}

/// `(x[π])ᵢ = x_{min A}` for the block `A ∋ i`.
pub fn relabel<T: Copy>(x: &[T], pi: &Partition) -> Result<Vec<T>> {
    if x.len() != pi.n {
        return Err(Error::LengthMismatch { expected: pi.n, got: x.len() });
    }
    let mut out = x.to_vec();
    for block in &pi.blocks {
        let head = x[block[0] - 1];
        for &e in block {
            out[e - 1] = head;
        }
    }
    Ok(out)
}

/// Block sizes `k₁ ≥ k₂ ≥ … ≥ k_p ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockSizeSignature {
    sizes: Vec<usize>,
}

impl BlockSizeSignature {
    pub fn new(mut sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidQuery("empty signature".into()));
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidQuery("block sizes must be >= 1".into()));
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self { sizes })
    }

    /// `r` merging groups plus `s` singletons.
    pub fn from_groups(groups: &[usize], singletons: usize) -> Result<Self> {
        if groups.iter().any(|&k| k < 2) {
            return Err(Error::InvalidQuery("merging groups must have size >= 2".into()));
        }
        let mut sizes = groups.to_vec();
        sizes.resize(groups.len() + singletons, 1);
        Self::new(sizes)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Ground-set size `Σ kᵢ`.
    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Number of resulting blocks `p`.
    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    /// The merging groups `k₁ ≥ … ≥ k_r ≥ 2`.
    pub fn groups(&self) -> &[usize] {
        let r = self.sizes.iter().take_while(|&&k| k >= 2).count();
        &self.sizes[..r]
    }

    pub fn singletons(&self) -> usize {
        self.sizes.len() - self.groups().len()
    }

    /// All sizes equal to one: no collision.
    pub fn is_trivial(&self) -> bool {
        self.sizes.iter().all(|&k| k == 1)
    }

    /// A single pair with everything else untouched.
    pub fn is_binary(&self) -> bool {
        self.groups() == [2]
    }
}

impl fmt::Display for BlockSizeSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, k) in self.sizes.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}")?;
        }
        f.write_str(")")
    }
}

/// Integer partitions of `n` as signatures, in reverse lexicographic order.
pub fn integer_partitions(n: usize) -> Vec<BlockSizeSignature> {
    fn go(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<BlockSizeSignature>) {
        if rest == 0 {
            out.push(BlockSizeSignature { sizes: cur.clone() });
            return;
        }
        for k in (1..=rest.min(max)).rev() {
            cur.push(k);
            go(rest - k, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        go(n, n, &mut Vec::new(), &mut out);
    }
    out
}

/// Ordered compositions of `n` into `k` positive parts.
pub fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 0 {
            if rest == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if rest < parts {
            return;
        }
        for first in 1..=rest - (parts - 1) {
            cur.push(first);
            go(rest - first, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k > 0 {
        go(n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// Stirling numbers of the second kind `S(n, p)`.
///
/// Panics if the value overflows `u128` (n beyond roughly 90).
pub fn stirling2(n: usize, p: usize) -> u128 {
    if p > n {
        return 0;
    }
    // row[k] = S(m, k)
    let mut row = vec![0u128; p + 1];
    row[0] = 1;
    for m in 1..=n {
        for k in (1..=p.min(m)).rev() {
            row[k] = (k as u128)
                .checked_mul(row[k])
                .and_then(|v| v.checked_add(row[k - 1]))
                .expect("S(n, p) overflows u128");
        }
        row[0] = 0;
    }
    row[p]
}

/// Unsigned Stirling numbers of the first kind `s(n, k)`.
pub fn stirling1_abs(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut row = vec![0u128; k + 1];
    row[0] = 1;
    for m in 1..=n {
        for j in (1..=k.min(m)).rev() {
            row[j] = ((m - 1) as u128)
                .checked_mul(row[j])
                .and_then(|v| v.checked_add(row[j - 1]))
                .expect("s(n, k) overflows u128");
        }
        row[0] = 0;
    }
    row[k]
}

/// Falling factorial `(l)_p = l(l−1)⋯(l−p+1)`.
pub fn falling(l: u64, p: u64) -> u128 {
    if p > l {
        return 0;
    }
    (0..p).fold(1u128, |acc, i| acc.checked_mul((l - i) as u128).expect("(l)_p overflows u128"))
}

/// Rising factorial `[θ]_k = θ(θ+1)⋯(θ+k−1)`.
pub fn rising(theta: f64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (theta + i as f64))
}

/// Bell numbers, from the Bell triangle.
pub fn bell(n: usize) -> u128 {
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().expect("nonempty"));
        for &v in &row {
            let last = *next.last().expect("nonempty");
            next.push(last + v);
        }
        row = next;
    }
    row[0]
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Stable string form used in CSV output.
pub fn format_signature(sizes: &[usize]) -> String {
    let mut s = String::from("(");
    for (i, k) in sizes.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&format!("{k}"));
    }
    s.push(')');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    /// Independent count of restricted growth strings by brute force over
    /// all label vectors in `0..n`.
    fn brute_count_rgs(n: usize) -> usize {
        let total = n.pow(n as u32);
        (0..total)
            .filter(|&code| {
                let mut c = code;
                let mut max = None::<usize>;
                for _ in 0..n {
                    let d = c % n;
                    c /= n;
                    match max {
                        None if d != 0 => return false,
                        None => max = Some(0),
                        Some(m) if d > m + 1 => return false,
                        Some(m) => max = Some(m.max(d)),
                    }
                }
                true
            })
            .count()
    }

    #[test]
    fn partition_counts() {
        assert_eq!(enumerate_partitions(1).unwrap(), vec![Partition::singletons(1)]);
        assert_eq!(brute_count_rgs(3), 5);
        assert_eq!(brute_count_rgs(5), 52);
        assert_eq!(enumerate_partitions(3).unwrap().len(), 5);
        assert_eq!(enumerate_partitions(5).unwrap().len(), 52);
        let bells = [1u128, 2, 5, 15, 52, 203, 877, 4140];
        for (n, b) in (1..=8).zip(bells) {
            assert_eq!(bell(n), b);
            assert_eq!(enumerate_partitions(n).unwrap().len() as u128, b);
        }
        assert!(enumerate_partitions(11).is_err());
        assert!(enumerate_partitions(0).is_err());
    }

    #[test]
    fn enumeration_has_no_duplicates_and_is_canonical() {
        let parts = enumerate_partitions(6).unwrap();
        let mut sorted = parts.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), parts.len());
        for p in &parts {
            let again = Partition::from_blocks(6, p.blocks().to_vec()).unwrap();
            assert_eq!(&again, p);
        }
    }

    #[test]
    fn relabel_examples() {
        let x = ['a', 'b', 'c'];
        let pi = Partition::from_blocks(3, vec![vec![1, 2], vec![3]]).unwrap();
        assert_eq!(relabel(&x, &pi).unwrap(), vec!['a', 'a', 'c']);
        assert_eq!(relabel(&x, &Partition::singletons(3)).unwrap(), x.to_vec());
        let y = ['a', 'b', 'c', 'd'];
        let pi = Partition::from_blocks(4, vec![vec![1, 3], vec![2, 4]]).unwrap();
        assert_eq!(relabel(&y, &pi).unwrap(), vec!['a', 'b', 'a', 'b']);
        assert!(relabel(&y, &Partition::singletons(3)).is_err());
    }

    #[test]
    fn stirling_and_factorials() {
        assert_eq!(stirling2(3, 2), 3);
        assert_eq!(stirling1_abs(4, 2), 11);
        assert_eq!(falling(2, 3), 0);
        assert_eq!(rising(1.0, 3), 6.0);
        assert_eq!(stirling2(10, 4), 34105);
        assert_eq!(stirling1_abs(10, 1), 362_880);
    }

    #[test]
    fn stirling_identities() {
        for n in 1..=10usize {
            for l in 1..=6u64 {
                let lhs: u128 = (1..=n).map(|p| stirling2(n, p) * falling(l, p as u64)).sum();
                assert_eq!(lhs, (l as u128).pow(n as u32));
            }
            for theta in 1..=6u64 {
                let lhs: u128 = (1..=n).map(|k| stirling1_abs(n, k) * (theta as u128).pow(k as u32)).sum();
                let rhs: u128 = (0..n as u64).map(|i| (theta + i) as u128).product();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn display_uses_block_lists() {
        let pi = Partition::from_blocks(3, vec![vec![3], vec![2, 1]]).unwrap();
        assert_eq!(pi.to_string(), "{1,2}{3}");
        assert_eq!(BlockSizeSignature::new(vec![1, 3, 2]).unwrap().to_string(), "(3,2,1)");
    }

    #[test]
    fn invalid_partitions_are_rejected() {
        assert!(Partition::from_blocks(3, vec![vec![1, 2]]).is_err());
        assert!(Partition::from_blocks(3, vec![vec![1, 2], vec![2, 3]]).is_err());
        assert!(Partition::from_blocks(2, vec![vec![1, 2], vec![]]).is_err());
        assert!(Partition::from_rgs(&[0, 2]).is_err());
    }

    #[test]
    fn merge_and_restrict() {
        let p = Partition::from_blocks(5, vec![vec![1, 4], vec![2], vec![3, 5]]).unwrap();
        let grouping = Partition::from_blocks(3, vec![vec![1, 3], vec![2]]).unwrap();
        let q = p.merge_by(&grouping).unwrap();
        assert_eq!(q.to_string(), "{1,3,4,5}{2}");
        assert!(q.is_coarsening_of(&p));
        assert!(!p.is_coarsening_of(&q));
        assert_eq!(p.restrict(3).to_string(), "{1}{2}{3}");
    }

    #[test]
    fn integer_partitions_and_compositions() {
        let counts: Vec<usize> = (1..=8).map(|n| integer_partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 3, 5, 7, 11, 15, 22]);
        assert_eq!(compositions(5, 2).len(), 4);
        assert_eq!(compositions(6, 3).len() as u128, binomial(5, 2));
        assert!(compositions(2, 3).is_empty());
    }

    proptest::proptest! {
        #[test]
        fn relabel_is_idempotent(rgs_seed in proptest::collection::vec(0usize..6, 1..8), x in proptest::collection::vec(0u8..4, 8)) {
            // turn arbitrary labels into a restricted growth string
            let mut rgs = Vec::with_capacity(rgs_seed.len());
            let mut max = 0usize;
            for (i, &l) in rgs_seed.iter().enumerate() {
                let v = if i == 0 { 0 } else { l.min(max + 1) };
                max = max.max(v);
                rgs.push(v);
            }
            let pi = Partition::from_rgs(&rgs).unwrap();
            let x = &x[..rgs.len()];
            let once = relabel(x, &pi).unwrap();
            let twice = relabel(&once, &pi).unwrap();
            proptest::prop_assert_eq!(once, twice);
        }
    }
}
