//! Segmented divisor-count sieve.
//!
//! `d(n)` is counted as `2·#{e | n : e² < n} + [n is a square]`, so each block
//! only needs the divisors up to `√hi`. Blocks are independent and may be
//! sieved in parallel; the output never depends on the thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default block length (entries) of one sieve segment.
pub const DEFAULT_BLOCK: usize = 1 << 20;

/// Default cap on the number of entries a materialised table may hold.
pub const DEFAULT_BUDGET: u64 = 1 << 28;

/// Divisor counts `d(n)` for `n ∈ [start, start + len)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisorTable {
    start: u64,
    values: Vec<u32>,
}

impl DivisorTable {
    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// `d(n)` if `n` lies in the table.
    pub fn get(&self, n: u64) -> Option<u32> {
        n.checked_sub(self.start)
            .and_then(|i| self.values.get(i as usize).copied())
    }

    pub fn sum(&self) -> u64 {
        self.values.iter().map(|&v| v as u64).sum()
    }
}

/// Integer square root, `⌊√n⌋`.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.checked_mul(x).is_none_or(|sq| sq > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

#[derive(Debug, Clone, Copy)]
pub struct DivisorSieve {
    block: usize,
    budget: u64,
}

impl Default for DivisorSieve {
    fn default() -> Self {
        Self {
            block: DEFAULT_BLOCK,
            budget: DEFAULT_BUDGET,
        }
    }
}

impl DivisorSieve {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_block(mut self, block: usize) -> Self {
        self.block = block.max(1);
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    fn check(&self, lo: u64, hi: u64) -> Result<()> {
        if lo == 0 {
            return Err(Error::Zero("lo"));
        }
        if lo > hi {
            return Err(Error::InvalidRange { lo, hi });
        }
        if hi > crate::primes::MAX_INPUT {
            return Err(Error::TooLarge {
                value: hi,
                bound: crate::primes::MAX_INPUT,
            });
        }
        Ok(())
    }

    fn blocks(&self, lo: u64, hi: u64) -> Vec<(u64, u64)> {
        let step = self.block as u64;
        let mut out = Vec::new();
        let mut start = lo;
        loop {
            let end = start.saturating_add(step - 1).min(hi);
            out.push((start, end));
            if end == hi {
                break;
            }
            start = end + 1;
        }
        out
    }

    /// Materialise `d(n)` on `[lo, hi]`.
    pub fn table(&self, lo: u64, hi: u64) -> Result<DivisorTable> {
        self.check(lo, hi)?;
        let len = hi - lo + 1;
        if len > self.budget {
            return Err(Error::RangeTooLarge {
                len,
                budget: self.budget,
            });
        }
        let parts = self.map_blocks(lo, hi, |_, v| v.to_vec())?;
        let mut values = Vec::with_capacity(len as usize);
        for p in parts {
            values.extend_from_slice(&p);
        }
        Ok(DivisorTable { start: lo, values })
    }

    /// Sieve `[lo, hi]` block by block, in parallel, and return `f(start, block)`
    /// for every block in ascending order. Memory is bounded by the block size
    /// times the worker count.
    pub fn map_blocks<T, F>(&self, lo: u64, hi: u64, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64, &[u32]) -> T + Sync,
    {
        self.check(lo, hi)?;
        Ok(self
            .blocks(lo, hi)
            .into_par_iter()
            .map(|(a, b)| {
                let mut buf = vec![0u32; (b - a + 1) as usize];
                sieve_block(a, b, &mut buf);
                f(a, &buf)
            })
            .collect())
    }

    /// Sequential streaming over the blocks of `[lo, hi]`.
    pub fn for_each_block<F>(&self, lo: u64, hi: u64, mut f: F) -> Result<()>
    where
        F: FnMut(u64, &[u32]),
    {
        self.check(lo, hi)?;
        let mut buf = Vec::new();
        for (a, b) in self.blocks(lo, hi) {
            buf.clear();
            buf.resize((b - a + 1) as usize, 0);
            sieve_block(a, b, &mut buf);
            f(a, &buf);
        }
        Ok(())
    }
}

/// Divisor counts on `[lo, hi]` with the default block size and budget.
pub fn divisor_sieve(lo: u64, hi: u64) -> Result<DivisorTable> {
    DivisorSieve::default().table(lo, hi)
}

fn sieve_block(lo: u64, hi: u64, out: &mut [u32]) {
    let root = isqrt(hi);
    for e in 1..=root {
        let sq = e * e;
        let first = if lo <= sq { sq } else { lo.div_ceil(e) * e };
        let mut m = first;
        if m == sq && m <= hi {
            out[(m - lo) as usize] += 1;
            m += e;
        }
        while m <= hi {
            out[(m - lo) as usize] += 2;
            m += e;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count_divisors(n: u64) -> u32 {
        (1..=n).filter(|e| n % e == 0).count() as u32
    }

    #[test]
    fn examples() {
        assert_eq!(divisor_sieve(1, 10).unwrap().sum(), 27);
        let direct: u32 = (1..=10).map(count_divisors).sum();
        assert_eq!(direct, 27);
        assert_eq!(divisor_sieve(1, 1).unwrap().values(), &[1]);
        assert_eq!(divisor_sieve(13, 13).unwrap().values(), &[2]);
        assert_eq!(divisor_sieve(0, 5), Err(Error::Zero("lo")));
        assert!(matches!(
            DivisorSieve::new().with_budget(100).table(1, 1000),
            Err(Error::RangeTooLarge { len: 1000, budget: 100 })
        ));
    }

    #[test]
    fn matches_trial_division_below_10_4() {
        let t = DivisorSieve::new().with_block(977).table(1, 10_000).unwrap();
        for n in 1..=10_000u64 {
            assert_eq!(t.get(n).unwrap(), count_divisors(n), "n={n}");
        }
    }

    #[test]
    fn block_size_is_irrelevant() {
        let a = DivisorSieve::new().with_block(1).table(999_000, 1_000_500).unwrap();
        let b = DivisorSieve::new().with_block(64).table(999_000, 1_000_500).unwrap();
        let c = divisor_sieve(999_000, 1_000_500).unwrap();
        assert_eq!(a, c);
        assert_eq!(b, c);
        assert_eq!(c.get(1_000_000), Some(49));
    }

    #[test]
    fn high_window() {
        let lo = 999_999_990u64;
        let t = divisor_sieve(lo, lo + 20).unwrap();
        for (i, &v) in t.values().iter().enumerate() {
            let n = lo + i as u64;
            assert_eq!(v as u64, crate::arith::divisor_count(n));
        }
    }

    #[test]
    fn isqrt_edges() {
        for n in 0..10_000u64 {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n);
        }
        assert_eq!(isqrt(u64::MAX), 4_294_967_295);
    }
}
