//! The non-crossing partition lattice `NC(n)`: membership through the genus
//! identity, enumeration in restricted-growth order, Kreweras complement,
//! Möbius function against the top element, lattice join, interval blow-ups,
//! and the first-return restriction / separation predicates.

use crate::error::{Error, Result};
use crate::perm::{PermPoints, Permutation};
use num::BigInt;
use std::fmt;

pub fn catalan(n: usize) -> BigInt {
    // C_n = binom(2n, n) / (n + 1)
    let mut c = BigInt::from(1);
    for k in 0..n {
        c = c * BigInt::from(2 * (2 * k + 1)) / BigInt::from(k + 2);
    }
    c
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(size: usize) -> Self {
        UnionFind {
            parent: (0..size).collect(),
        }
    }
    pub fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }
    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
    pub fn component_count(&mut self) -> usize {
        let n = self.parent.len();
        (0..n).filter(|&x| self.find(x) == x).count()
    }
}

/// A set partition of `[n]`, canonical form: blocks sorted by their minimum,
/// elements ascending. Crossing partitions are allowed; the non-crossing
/// refinement lives in [`NcPartition`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn from_blocks(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &x in b {
                if x < 1 || x > n {
                    return Err(Error::InvalidPartition(format!(
                        "element {x} outside [{n}]"
                    )));
                }
                if seen[x - 1] {
                    return Err(Error::InvalidPartition(format!("element {x} repeated")));
                }
                seen[x - 1] = true;
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::InvalidPartition("blocks do not cover [n]".into()));
        }
        blocks.sort_by_key(|b| b[0]);
        Ok(Partition { n, blocks })
    }

    pub fn discrete(n: usize) -> Self {
        Partition {
            n,
            blocks: (1..=n).map(|k| vec![k]).collect(),
        }
    }

    pub fn full(n: usize) -> Self {
        Partition {
            n,
            blocks: vec![(1..=n).collect()],
        }
    }

    /// Blocks are the cycles of `p`.
    pub fn from_permutation_cycles(p: &Permutation) -> Self {
        let blocks = p
            .cycles()
            .into_iter()
            .map(|c| c.into_iter().map(|x| x as usize).collect())
            .collect();
        Partition::from_blocks(p.n(), blocks).expect("cycles partition the domain")
    }

    /// Parse `"{1,4}{2,3}"`.
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        let s = s.trim();
        if !s.starts_with('{') || !s.ends_with('}') {
            return Err(Error::Parse(format!("expected block notation, got {s:?}")));
        }
        let mut blocks = Vec::new();
        for part in s[1..s.len() - 1].split("}{") {
            let block: Vec<usize> = part
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad block entry {t:?}")))
                })
                .collect::<Result<_>>()?;
            blocks.push(block);
        }
        Partition::from_blocks(n, blocks)
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

    pub fn block_index_of(&self, x: usize) -> usize {
        self.blocks
            .iter()
            .position(|b| b.binary_search(&x).is_ok())
            .expect("element in range")
    }

    pub fn is_full(&self) -> bool {
        self.blocks.len() == 1
    }

    pub fn is_discrete(&self) -> bool {
        self.blocks.len() == self.n
    }

    /// Every block of `self` is contained in a block of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        if self.n != other.n {
            return false;
        }
        self.blocks.iter().all(|b| {
            let target = other.block_index_of(b[0]);
            b.iter().all(|&x| other.block_index_of(x) == target)
        })
    }

    /// Permutation form: one cycle per block, elements in increasing order.
    pub fn to_permutation(&self) -> Permutation {
        Permutation::from_cycles(self.n, &self.blocks).expect("blocks are disjoint")
    }

    /// Genus characterization: `|π| + |π⁻¹γ_n| = n − 1`.
    pub fn is_noncrossing(&self) -> bool {
        let p = self.to_permutation();
        let k = p.inverse().compose(&Permutation::gamma(self.n)).unwrap();
        p.length() + k.length() == self.n - 1
    }

    /// Lattice join in the full partition lattice (connected components).
    pub fn join(&self, other: &Partition) -> Result<Partition> {
        if self.n != other.n {
            return Err(Error::SizeMismatch(format!(
                "join on [{}] vs [{}]",
                self.n, other.n
            )));
        }
        let mut uf = UnionFind::new(self.n);
        for b in self.blocks.iter().chain(other.blocks.iter()) {
            for w in b.windows(2) {
                uf.union(w[0] - 1, w[1] - 1);
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for x in 1..=self.n {
            groups.entry(uf.find(x - 1)).or_default().push(x);
        }
        Partition::from_blocks(self.n, groups.into_values().collect())
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.blocks {
            write!(f, "{{")?;
            for (i, x) in b.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Partition[{}]{}", self.n, self)
    }
}

/// A validated non-crossing partition.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NcPartition(Partition);

impl NcPartition {
    pub fn new(p: Partition) -> Result<Self> {
        if !p.is_noncrossing() {
            return Err(Error::InvalidPartition(format!("{p} is crossing")));
        }
        Ok(NcPartition(p))
    }

    pub fn discrete(n: usize) -> Self {
        NcPartition(Partition::discrete(n))
    }

    pub fn full(n: usize) -> Self {
        NcPartition(Partition::full(n))
    }

    pub fn as_partition(&self) -> &Partition {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        self.0.blocks()
    }

    pub fn num_blocks(&self) -> usize {
        self.0.num_blocks()
    }

    pub fn to_permutation(&self) -> Permutation {
        self.0.to_permutation()
    }

    /// Kreweras complement `K(π) = π⁻¹ γ_n` in permutation form.
    pub fn kreweras(&self) -> NcPartition {
        let p = self.to_permutation();
        let k = p
            .inverse()
            .compose(&Permutation::gamma(self.n()))
            .unwrap();
        NcPartition::new(Partition::from_permutation_cycles(&k))
            .expect("Kreweras complement of a non-crossing partition is non-crossing")
    }

    /// Möbius function `μ(π, 1_n)`, a product of signed Catalan numbers over
    /// the blocks of the Kreweras complement.
    pub fn mobius_to_top(&self) -> BigInt {
        let mut m = BigInt::from(1);
        for block in self.kreweras().blocks() {
            let size = block.len();
            let c = catalan(size - 1);
            m *= if size % 2 == 1 { c } else { -c };
        }
        m
    }

    /// Blow-up `π_{m⃗}`: block `V` maps to the union of intervals `I_k`, `k ∈ V`.
    pub fn blow_up(&self, parts: &[usize]) -> Result<NcPartition> {
        if parts.len() != self.n() || parts.contains(&0) {
            return Err(Error::Invalid(format!(
                "blow-up of NC({}) needs {} positive parts",
                self.n(),
                self.n()
            )));
        }
        let mut offsets = vec![0usize; parts.len() + 1];
        for (i, &m) in parts.iter().enumerate() {
            offsets[i + 1] = offsets[i] + m;
        }
        let blocks = self
            .blocks()
            .iter()
            .map(|v| {
                v.iter()
                    .flat_map(|&k| offsets[k - 1] + 1..=offsets[k])
                    .collect()
            })
            .collect();
        let p = Partition::from_blocks(*offsets.last().unwrap(), blocks)?;
        NcPartition::new(p)
    }
}

impl fmt::Display for NcPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Debug for NcPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Nc{:?}", self.0)
    }
}

/// All of `NC(n)` in lexicographic restricted-growth order.
pub fn enumerate_nc(n: usize) -> Result<Vec<NcPartition>> {
    let cap = crate::effective_cap(crate::NC_CAP);
    if n == 0 || n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    let mut out = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    fn extend_noncrossing(blocks: &[Vec<usize>], target: usize) -> bool {
        // Adding the next element to `target` crosses iff some other block's
        // span strictly contains an element of `target`.
        blocks.iter().enumerate().all(|(i, c)| {
            i == target || {
                let (lo, hi) = (c[0], *c.last().unwrap());
                blocks[target].iter().all(|&p| p <= lo || p >= hi)
            }
        })
    }
    fn rec(n: usize, next: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<NcPartition>) {
        if next > n {
            let p = Partition::from_blocks(n, blocks.clone()).unwrap();
            out.push(NcPartition::new(p).unwrap());
            return;
        }
        for b in 0..=blocks.len() {
            if b < blocks.len() {
                if !extend_noncrossing(blocks, b) {
                    continue;
                }
                blocks[b].push(next);
                rec(n, next + 1, blocks, out);
                blocks[b].pop();
            } else {
                blocks.push(vec![next]);
                rec(n, next + 1, blocks, out);
                blocks.pop();
            }
        }
    }
    rec(n, 1, &mut blocks, &mut out);
    Ok(out)
}

/// Memoized [`enumerate_nc`].
pub fn enumerate_nc_cached(n: usize) -> Result<std::sync::Arc<Vec<NcPartition>>> {
    use std::sync::{Arc, Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<std::collections::HashMap<usize, Arc<Vec<NcPartition>>>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&n) {
        return Ok(v.clone());
    }
    let v = Arc::new(enumerate_nc(n)?);
    cache.lock().unwrap().insert(n, v.clone());
    Ok(v)
}

/// First-return map of `p` on the subset `m`: `a ↦ p^k(a)` for the least
/// `k ≥ 1` with `p^k(a)` back in `m`.
#[derive(Clone, PartialEq, Eq)]
pub struct FirstReturnMap {
    support: Vec<i64>,
    images: Vec<i64>,
}

fn support_key(x: i64) -> (i64, bool) {
    (x.abs(), x < 0)
}

pub fn restrict_first_return<P: PermPoints>(p: &P, m: &[i64]) -> FirstReturnMap {
    let mut support: Vec<i64> = m.to_vec();
    support.sort_by_key(|&x| support_key(x));
    support.dedup();
    let in_m = |x: i64| {
        support
            .binary_search_by_key(&support_key(x), |&y| support_key(y))
            .is_ok()
    };
    let images = support
        .iter()
        .map(|&a| {
            let mut x = p.apply_pt(a);
            while !in_m(x) {
                x = p.apply_pt(x);
            }
            x
        })
        .collect();
    FirstReturnMap { support, images }
}

impl FirstReturnMap {
    pub fn support(&self) -> &[i64] {
        &self.support
    }

    fn index_of(&self, x: i64) -> usize {
        self.support
            .binary_search_by_key(&support_key(x), |&y| support_key(y))
            .expect("point in support")
    }

    pub fn apply(&self, x: i64) -> i64 {
        self.images[self.index_of(x)]
    }

    pub fn is_identity(&self) -> bool {
        self.support == self.images
    }

    pub fn cycles(&self) -> Vec<Vec<i64>> {
        let mut seen = vec![false; self.support.len()];
        let mut cycles = Vec::new();
        for i in 0..self.support.len() {
            if seen[i] {
                continue;
            }
            let mut cyc = Vec::new();
            let mut x = self.support[i];
            loop {
                let j = self.index_of(x);
                if seen[j] {
                    break;
                }
                seen[j] = true;
                cyc.push(x);
                x = self.images[j];
            }
            cycles.push(cyc);
        }
        for cyc in cycles.iter_mut() {
            let lead = (0..cyc.len())
                .min_by_key(|&i| support_key(cyc[i]))
                .unwrap();
            cyc.rotate_left(lead);
        }
        cycles.sort_by_key(|c| support_key(c[0]));
        cycles
    }

    /// Whether some cycle of the restriction contains both signs.
    pub fn has_through_cycle(&self) -> bool {
        self.cycles()
            .iter()
            .any(|c| c.iter().any(|&x| x > 0) && c.iter().any(|&x| x < 0))
    }
}

impl fmt::Display for FirstReturnMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for cyc in self.cycles() {
            write!(f, "(")?;
            for (i, x) in cyc.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// `p` separates the points of `m`: no two of them share a cycle of `p`.
pub fn separates<P: PermPoints>(p: &P, m: &[i64]) -> bool {
    for (i, &a) in m.iter().enumerate() {
        let mut x = p.apply_pt(a);
        while x != a {
            if m[..i].contains(&x) || m[i + 1..].contains(&x) {
                return false;
            }
            x = p.apply_pt(x);
        }
    }
    true
}
