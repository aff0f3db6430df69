use crate::error::{Error, Result};
use crate::seed::derive;

const MODULUS: u64 = (1 << 61) - 1;
const MAX_RETRIES: usize = 3;

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % MODULUS as u128) as u64
}

fn powmod(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1u64;
    base %= MODULUS;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base);
        }
        base = mulmod(base, base);
        exp >>= 1;
    }
    acc
}

fn signed_mod(x: i64) -> u64 {
    x.rem_euclid(MODULUS as i64) as u64
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Bucket {
    count: i64,
    index_sum: i128,
    checksum: u64,
}

/// Linear l0 sketch over the index domain `[0, domain)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct L0Sketch {
    seed: u64,
    domain: u64,
    reps: usize,
    levels: usize,
    buckets: Vec<Bucket>,
}

impl L0Sketch {
    pub fn new(domain: u64, reps: usize, seed: u64) -> Self {
        let levels = 64 - domain.max(1).leading_zeros() as usize + 2;
        L0Sketch { seed, domain, reps, levels, buckets: vec![Bucket::default(); reps * levels] }
    }

    /// Repetitions needed for failure probability at most 1/n^2.
    pub fn reps_for(n: usize) -> usize {
        2 * (usize::BITS - n.max(2).leading_zeros()) as usize + 2
    }

    fn depth(&self, rep: usize, index: u64) -> usize {
        let h = derive(self.seed, &[rep as u64, index]);
        (h.trailing_zeros() as usize).min(self.levels - 1)
    }

    fn fingerprint_base(&self, rep: usize) -> u64 {
        derive(self.seed, &[rep as u64, u64::MAX]) % (MODULUS - 2) + 2
    }

    pub fn update(&mut self, index: u64, delta: i64) {
        assert!(index < self.domain, "index outside sketch domain");
        for rep in 0..self.reps {
            let z = powmod(self.fingerprint_base(rep), index);
            let fp = mulmod(signed_mod(delta), z);
            for level in 0..=self.depth(rep, index) {
                let b = &mut self.buckets[rep * self.levels + level];
                b.count += delta;
                b.index_sum += delta as i128 * index as i128;
                b.checksum = (b.checksum + fp) % MODULUS;
            }
        }
    }

    /// Entrywise sum; both sketches must share parameters.
    pub fn merge(&mut self, other: &L0Sketch) {
        assert!(
            self.seed == other.seed && self.domain == other.domain && self.reps == other.reps,
            "merging incompatible sketches"
        );
        for (a, b) in self.buckets.iter_mut().zip(&other.buckets) {
            a.count += b.count;
            a.index_sum += b.index_sum;
            a.checksum = (a.checksum + b.checksum) % MODULUS;
        }
    }

    fn one_sparse(&self, rep: usize, b: &Bucket) -> Option<u64> {
        if b.count == 0 || b.index_sum % b.count as i128 != 0 {
            return None;
        }
        let idx = b.index_sum / b.count as i128;
        if idx < 0 || idx >= self.domain as i128 {
            return None;
        }
        let idx = idx as u64;
        let expect = mulmod(signed_mod(b.count), powmod(self.fingerprint_base(rep), idx));
        (expect == b.checksum).then_some(idx)
    }

    pub fn is_zero(&self) -> bool {
        self.buckets.iter().all(|b| *b == Bucket::default())
    }

    /// An index with nonzero frequency, or `None` when every repetition fails.
    pub fn sample(&self) -> Option<u64> {
        for rep in 0..self.reps {
            for level in (0..self.levels).rev() {
                if let Some(idx) = self.one_sparse(rep, &self.buckets[rep * self.levels + level]) {
                    return Some(idx);
                }
            }
        }
        None
    }
}

/// Samples one edge of a multiset through an l0 sketch of the pair-index vector.
/// Returns `Ok(None)` on empty input.
pub fn l0_sample(edges: &[(usize, usize)], seed: u64) -> Result<Option<(usize, usize)>> {
    if edges.is_empty() {
        return Ok(None);
    }
    let n = edges.iter().map(|&(i, j)| i.max(j) + 1).max().unwrap_or(1);
    let domain = (n * n) as u64;
    for attempt in 0..=MAX_RETRIES {
        let mut sk = L0Sketch::new(domain, L0Sketch::reps_for(n), derive(seed, &[attempt as u64]));
        for &(i, j) in edges {
            let (a, c) = if i < j { (i, j) } else { (j, i) };
            sk.update((a * n + c) as u64, 1);
        }
        if let Some(idx) = sk.sample() {
            let idx = idx as usize;
            return Ok(Some((idx / n, idx % n)));
        }
    }
    Err(Error::SketchFailure(MAX_RETRIES + 1))
}
