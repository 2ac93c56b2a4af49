//! Dense per-vertex bit rows used by the all-sources reachability sweeps.

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct BitRows {
    words: usize,
    data: Vec<u64>,
}

impl BitRows {
    /// `rows` rows, each able to hold bits `0..=max_bit`.
    pub fn new(rows: usize, max_bit: usize) -> Self {
        let words = max_bit / 64 + 1;
        BitRows { words, data: vec![0; rows * words] }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.words..(r + 1) * self.words]
    }

    #[inline]
    pub fn set(&mut self, r: usize, bit: usize) {
        self.data[r * self.words + bit / 64] |= 1u64 << (bit % 64);
    }

    pub fn clear(&mut self) {
        self.data.fill(0);
    }

    /// `row(dst) |= row(src)` restricted to words from `from_bit / 64` on.
    /// Requires `dst < src`.
    #[inline]
    pub fn or_into_lower(&mut self, dst: usize, src: usize, from_bit: usize) {
        debug_assert!(dst < src);
        let w = self.words;
        let (head, tail) = self.data.split_at_mut(src * w);
        let d = &mut head[dst * w..(dst + 1) * w];
        let s = &tail[..w];
        let start = from_bit / 64;
        for (x, y) in d[start..].iter_mut().zip(&s[start..]) {
            *x |= *y;
        }
    }

    /// `self.row(dst) |= other.row(src)` from word `from_bit / 64` on.
    #[inline]
    pub fn or_from(&mut self, dst: usize, other: &BitRows, src: usize, from_bit: usize) {
        let start = from_bit / 64;
        let d = self.row_mut(dst);
        let s = other.row(src);
        for (x, y) in d[start..].iter_mut().zip(&s[start..]) {
            *x |= *y;
        }
    }

    /// Number of set bits of row `r` with index in `lo..=hi`.
    pub fn count_range(&self, r: usize, lo: usize, hi: usize) -> u64 {
        if lo > hi {
            return 0;
        }
        let row = self.row(r);
        let (lw, hw) = (lo / 64, hi / 64);
        let low_mask = !0u64 << (lo % 64);
        let high_mask = if hi % 64 == 63 { !0u64 } else { (1u64 << (hi % 64 + 1)) - 1 };
        if lw == hw {
            return u64::from((row[lw] & low_mask & high_mask).count_ones());
        }
        let mut total = u64::from((row[lw] & low_mask).count_ones());
        total += row[lw + 1..hw].iter().map(|w| u64::from(w.count_ones())).sum::<u64>();
        total + u64::from((row[hw] & high_mask).count_ones())
    }
}
