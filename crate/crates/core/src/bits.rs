//! Fixed-width bit strings used as sparse-state keys.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

const WORD: usize = 64;

/// A bit string with one bit per allocated qubit. Bit `i` is qubit `i`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisKey {
    width: usize,
    words: Vec<u64>,
}

impl BasisKey {
    pub fn zeros(width: usize) -> Self {
        Self {
            width,
            words: vec![0; width.div_ceil(WORD)],
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, bit: usize) -> bool {
        debug_assert!(bit < self.width);
        (self.words[bit / WORD] >> (bit % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, bit: usize, value: bool) {
        debug_assert!(bit < self.width);
        let mask = 1u64 << (bit % WORD);
        if value {
            self.words[bit / WORD] |= mask;
        } else {
            self.words[bit / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, bit: usize) {
        debug_assert!(bit < self.width);
        self.words[bit / WORD] ^= 1u64 << (bit % WORD);
    }

    #[inline]
    pub fn swap(&mut self, a: usize, b: usize) {
        let (va, vb) = (self.get(a), self.get(b));
        if va != vb {
            self.flip(a);
            self.flip(b);
        }
    }

    /// True if `self & mask` has any bit set.
    pub fn intersects(&self, mask: &BasisKey) -> bool {
        self.words.iter().zip(&mask.words).any(|(a, b)| a & b != 0)
    }

    /// Reads `bits.len()` positions as a little-endian integer
    /// (`bits[0]` is the least significant bit). At most 64 positions.
    pub fn read(&self, bits: impl IntoIterator<Item = usize>) -> u64 {
        bits.into_iter()
            .enumerate()
            .fold(0, |acc, (i, b)| acc | (u64::from(self.get(b)) << i))
    }

    /// Inverse of [`BasisKey::read`].
    pub fn write(&mut self, bits: impl IntoIterator<Item = usize>, value: u64) {
        for (i, b) in bits.into_iter().enumerate() {
            self.set(b, (value >> i) & 1 == 1);
        }
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Character `i` is qubit `i`.
    pub fn to_bitstring(&self) -> String {
        (0..self.width)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }

    pub fn from_bitstring(s: &str) -> Option<Self> {
        let mut key = Self::zeros(s.chars().count());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => key.set(i, true),
                _ => return None,
            }
        }
        Some(key)
    }
}

impl fmt::Debug for BasisKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BasisKey({})", self.to_bitstring())
    }
}
