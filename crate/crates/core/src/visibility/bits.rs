use std::fmt::Write as _;

/// Fixed-length bit vector over the surface patches of a run; bit `k` set means patch `k`
/// is seen.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoverageBits {
    words: Vec<u64>,
    len: usize,
}

impl CoverageBits {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut b = Self::zeros(len);
        for k in 0..len {
            b.set(k);
        }
        b
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut b = Self::zeros(len);
        for k in indices {
            b.set(k);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, k: usize) -> bool {
        assert!(k < self.len, "bit {k} out of range {}", self.len);
        self.words[k / 64] >> (k % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, k: usize) {
        assert!(k < self.len, "bit {k} out of range {}", self.len);
        self.words[k / 64] |= 1 << (k % 64);
    }

    pub fn clear(&mut self, k: usize) {
        assert!(k < self.len, "bit {k} out of range {}", self.len);
        self.words[k / 64] &= !(1 << (k % 64));
    }

    /// Clears every bit.
    pub fn reset(&mut self) {
        self.words.fill(0);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `self |= other`, returning how many bits became set.
    #[inline]
    pub fn or_assign_count(&mut self, other: &CoverageBits) -> usize {
        debug_assert_eq!(self.len, other.len);
        let mut gained = 0;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            gained += (b & !*a).count_ones() as usize;
            *a |= b;
        }
        gained
    }

    pub fn or_assign(&mut self, other: &CoverageBits) {
        self.or_assign_count(other);
    }

    pub fn and_assign(&mut self, other: &CoverageBits) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    /// Number of bits set in `other` but not in `self`.
    #[inline]
    pub fn count_new(&self, other: &CoverageBits) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (b & !a).count_ones() as usize)
            .sum()
    }

    pub fn complement(&self) -> CoverageBits {
        let mut out = Self::zeros(self.len);
        for k in 0..self.len {
            if !self.get(k) {
                out.set(k);
            }
        }
        out
    }

    pub fn is_superset_of(&self, other: &CoverageBits) -> bool {
        assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).all(|(a, b)| b & !a == 0)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&k| self.get(k))
    }

    /// Run-length form `v:r1,r2,...` where `v` is the value of the first run and runs
    /// alternate after it.
    pub fn to_rle(&self) -> String {
        let mut out = String::new();
        if self.len == 0 {
            return "0:".to_string();
        }
        let mut current = self.get(0);
        out.push(if current { '1' } else { '0' });
        out.push(':');
        let mut run = 0usize;
        let mut first = true;
        for k in 0..self.len {
            let b = self.get(k);
            if b == current {
                run += 1;
            } else {
                if !first {
                    out.push(',');
                }
                let _ = write!(out, "{run}");
                first = false;
                current = b;
                run = 1;
            }
        }
        if !first {
            out.push(',');
        }
        let _ = write!(out, "{run}");
        out
    }

    pub fn from_rle(text: &str, len: usize) -> Option<CoverageBits> {
        let (head, runs) = text.split_once(':')?;
        let mut value = match head {
            "0" => false,
            "1" => true,
            _ => return None,
        };
        let mut out = Self::zeros(len);
        let mut pos = 0usize;
        if !runs.is_empty() {
            for r in runs.split(',') {
                let n: usize = r.parse().ok()?;
                if pos + n > len {
                    return None;
                }
                if value {
                    for k in pos..pos + n {
                        out.set(k);
                    }
                }
                pos += n;
                value = !value;
            }
        }
        (pos == len).then_some(out)
    }
}

/// Fraction of set bits.
pub fn coverage_ratio(bits: &CoverageBits) -> f64 {
    assert!(bits.len() > 0, "coverage ratio needs at least one patch");
    bits.count_ones() as f64 / bits.len() as f64
}

/// Smallest number of covered patches whose ratio reaches `delta` (by the same floating
/// point comparison `coverage_ratio(..) >= delta` uses).
pub fn required_count(len: usize, delta: f64) -> usize {
    let m = len as f64;
    let mut c = (delta * m).ceil().clamp(0.0, m) as usize;
    while c > 0 && (c - 1) as f64 / m >= delta {
        c -= 1;
    }
    while c < len && (c as f64 / m) < delta {
        c += 1;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ratio_examples() {
        assert_eq!(coverage_ratio(&CoverageBits::zeros(50)), 0.0);
        assert_eq!(coverage_ratio(&CoverageBits::ones(50)), 1.0);
        let b = CoverageBits::from_indices(50, 0..49);
        assert_eq!(coverage_ratio(&b), 0.98);
    }

    #[test]
    fn required_count_agrees_with_ratio() {
        for m in 1..200 {
            for delta in [0.0, 0.5, 0.9, 0.98, 0.99, 1.0, 0.333] {
                let c = required_count(m, delta);
                assert!(c as f64 / m as f64 >= delta || c == m);
                if c > 0 {
                    assert!(((c - 1) as f64 / m as f64) < delta);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn rle_round_trip(bits in proptest::collection::vec(any::<bool>(), 0..300)) {
            let b = CoverageBits::from_indices(bits.len(), bits.iter().enumerate().filter(|(_, &x)| x).map(|(i, _)| i));
            prop_assert_eq!(CoverageBits::from_rle(&b.to_rle(), bits.len()), Some(b));
        }

        #[test]
        fn ratio_monotone_under_or(a in proptest::collection::vec(any::<bool>(), 1..130), seed in any::<u64>()) {
            let m = a.len();
            let x = CoverageBits::from_indices(m, a.iter().enumerate().filter(|(_, &v)| v).map(|(i, _)| i));
            let y = CoverageBits::from_indices(m, (0..m).filter(|i| (seed >> (i % 64)) & 1 == 1));
            let mut u = x.clone();
            let gained = u.or_assign_count(&y);
            prop_assert!(coverage_ratio(&u) >= coverage_ratio(&x));
            prop_assert_eq!(u.count_ones(), x.count_ones() + gained);
            prop_assert!(u.is_superset_of(&x) && u.is_superset_of(&y));
        }
    }
}
