/// Triangular bit table over the edge slots of `K_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeTable {
    n: usize,
    bits: Vec<u64>,
    count: usize,
}

impl EdgeTable {
    pub fn new(n: usize) -> Self {
        let slots = n * n.saturating_sub(1) / 2;
        EdgeTable {
            n,
            bits: vec![0; slots.div_ceil(64)],
            count: 0,
        }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn slots(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }

    #[inline]
    fn index(&self, u: usize, v: usize) -> usize {
        debug_assert!(u != v && u < self.n && v < self.n);
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        a * (2 * self.n - a - 1) / 2 + (b - a - 1)
    }

    #[inline]
    pub fn contains(&self, u: usize, v: usize) -> bool {
        let i = self.index(u, v);
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    /// Marks `{u, v}` as used; returns false if it already was.
    #[inline]
    pub fn insert(&mut self, u: usize, v: usize) -> bool {
        let i = self.index(u, v);
        let word = &mut self.bits[i / 64];
        let mask = 1u64 << (i % 64);
        if *word & mask != 0 {
            return false;
        }
        *word |= mask;
        self.count += 1;
        true
    }

    pub fn remove(&mut self, u: usize, v: usize) -> bool {
        let i = self.index(u, v);
        let word = &mut self.bits[i / 64];
        let mask = 1u64 << (i % 64);
        if *word & mask == 0 {
            return false;
        }
        *word &= !mask;
        self.count -= 1;
        true
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Popcount over the raw words, independent of the running counter.
    pub fn recount(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n)
            .flat_map(move |u| (u + 1..self.n).map(move |v| (u, v)))
            .filter(|&(u, v)| self.contains(u, v))
    }
}
