/// Fixed-size bitset over `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bitset {
    n: usize,
    words: Vec<u64>,
}

impl Bitset {
    pub fn new(n: usize) -> Self {
        Bitset { n, words: vec![0; n.div_ceil(64)] }
    }

    pub fn from_indices(n: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut b = Bitset::new(n);
        for i in idx {
            b.set(i);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        assert!(i < self.n, "bit {i} out of range {}", self.n);
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn clear(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        i < self.n && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn first(&self) -> Option<usize> {
        self.words.iter().enumerate().find(|(_, &w)| w != 0).map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + t)
            })
        })
    }

    pub fn and(&self, o: &Bitset) -> Bitset {
        Bitset { n: self.n, words: self.words.iter().zip(&o.words).map(|(a, b)| a & b).collect() }
    }

    pub fn and_not_assign(&mut self, o: &Bitset) {
        for (a, b) in self.words.iter_mut().zip(&o.words) {
            *a &= !b;
        }
    }

    pub fn or_assign(&mut self, o: &Bitset) {
        for (a, b) in self.words.iter_mut().zip(&o.words) {
            *a |= b;
        }
    }

    /// `self |= self << s` restricted to `0..n`, done in place.
    pub fn or_shifted_from(&mut self, src: &Bitset, s: usize) {
        let (ws, bs) = (s / 64, s % 64);
        for i in (ws..self.words.len()).rev() {
            let mut v = src.words[i - ws] << bs;
            if bs > 0 && i > ws {
                v |= src.words[i - ws - 1] >> (64 - bs);
            }
            self.words[i] |= v;
        }
        self.trim();
    }

    fn trim(&mut self) {
        let r = self.n % 64;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }

    /// Smallest `a` with both `a` and `a + gap` set.
    pub fn first_pair_with_gap(&self, gap: usize) -> Option<usize> {
        if gap >= self.n {
            return None;
        }
        let (ws, bs) = (gap / 64, gap % 64);
        let nw = self.words.len();
        for i in 0..nw - ws {
            let mut shifted = self.words[i + ws] >> bs;
            if bs > 0 && i + ws + 1 < nw {
                shifted |= self.words[i + ws + 1] << (64 - bs);
            }
            let hit = self.words[i] & shifted;
            if hit != 0 {
                return Some(i * 64 + hit.trailing_zeros() as usize);
            }
        }
        None
    }
}
