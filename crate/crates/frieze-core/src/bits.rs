//! Packed bit vectors for observer windows.
//!
//! 64-bit blocks, LSB-first inside each block. Bits past `len` in the last
//! block are kept at zero so block-wise boolean ops and popcounts need no
//! special casing.

/// Fixed-length packed bit vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitWindow {
    blocks: Vec<u64>,
    len: u64,
}

impl BitWindow {
    /// All-zero window with `len` bits.
    pub fn zeros(len: u64) -> Self {
        let blocks = vec![0u64; len.div_ceil(64) as usize];
        BitWindow { blocks, len }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: u64) -> Option<bool> {
        if i < self.len {
            Some(self.blocks[(i / 64) as usize] >> (i % 64) & 1 == 1)
        } else {
            None
        }
    }

    /// Bit `i`; panics when `i >= len`.
    #[inline]
    pub fn bit(&self, i: u64) -> bool {
        assert!(i < self.len, "bit index {i} out of window of length {}", self.len);
        self.blocks[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: u64, value: bool) {
        assert!(i < self.len, "bit index {i} out of window of length {}", self.len);
        let block = &mut self.blocks[(i / 64) as usize];
        let mask = 1u64 << (i % 64);
        if value {
            *block |= mask;
        } else {
            *block &= !mask;
        }
    }

    /// Number of ones among bits `[0, end)`; saturates at `len`.
    pub fn count_ones_below(&self, end: u64) -> u64 {
        let end = end.min(self.len);
        let full_blocks = (end / 64) as usize;
        let mut total: u64 = self.blocks[..full_blocks]
            .iter()
            .map(|b| u64::from(b.count_ones()))
            .sum();
        let rem = end % 64;
        if rem != 0 {
            total += u64::from((self.blocks[full_blocks] & ((1u64 << rem) - 1)).count_ones());
        }
        total
    }

    pub fn count_ones(&self) -> u64 {
        self.blocks.iter().map(|b| u64::from(b.count_ones())).sum()
    }

    /// Streams each bit in order, calling `f(i, bit)`.
    pub fn for_each(&self, mut f: impl FnMut(u64, bool)) {
        for i in 0..self.len {
            f(i, self.blocks[(i / 64) as usize] >> (i % 64) & 1 == 1);
        }
    }

    pub fn union_with(&mut self, other: &BitWindow) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &BitWindow) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a &= b;
        }
    }

    pub fn subtract(&mut self, other: &BitWindow) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a &= !b;
        }
    }

    /// Raw blocks, LSB-first bit order. Tail bits beyond `len` are zero.
    pub fn blocks(&self) -> &[u64] {
        &self.blocks
    }

    /// Builds a window from raw bytes (LSB-first within each byte).
    pub fn from_bytes(bytes: &[u8], len: u64) -> Self {
        assert!(len <= bytes.len() as u64 * 8);
        let mut w = BitWindow::zeros(len);
        for (byte_idx, &byte) in bytes.iter().enumerate() {
            if byte == 0 {
                continue;
            }
            let base = byte_idx as u64 * 8;
            for bit in 0..8 {
                if byte >> bit & 1 == 1 {
                    let i = base + bit;
                    if i < len {
                        w.set(i, true);
                    }
                }
            }
        }
        w
    }

    /// Serializes to bytes, LSB-first within each byte; pad bits are zero.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; (self.len.div_ceil(8)) as usize];
        for i in 0..self.len {
            if self.bit(i) {
                out[(i / 8) as usize] |= 1 << (i % 8);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_count() {
        let mut w = BitWindow::zeros(130);
        for i in [0u64, 1, 63, 64, 65, 128, 129] {
            w.set(i, true);
        }
        assert!(w.bit(0) && w.bit(129));
        assert!(!w.bit(2));
        assert_eq!(w.count_ones(), 7);
        assert_eq!(w.count_ones_below(64), 3);
        assert_eq!(w.count_ones_below(65), 4);
        assert_eq!(w.count_ones_below(1000), 7);
        assert_eq!(w.get(130), None);
    }

    #[test]
    fn boolean_block_ops() {
        let mut a = BitWindow::zeros(70);
        let mut b = BitWindow::zeros(70);
        for i in (0..70).step_by(2) {
            a.set(i, true);
        }
        for i in (0..70).step_by(3) {
            b.set(i, true);
        }
        let mut union = a.clone();
        union.union_with(&b);
        let mut inter = a.clone();
        inter.intersect_with(&b);
        let mut diff = a.clone();
        diff.subtract(&b);
        for i in 0..70 {
            assert_eq!(union.bit(i), i % 2 == 0 || i % 3 == 0);
            assert_eq!(inter.bit(i), i % 6 == 0);
            assert_eq!(diff.bit(i), i % 2 == 0 && i % 3 != 0);
        }
    }

    #[test]
    fn byte_round_trip_keeps_pad_bits_zero() {
        let mut w = BitWindow::zeros(11);
        for i in [0u64, 3, 10] {
            w.set(i, true);
        }
        let bytes = w.to_bytes();
        assert_eq!(bytes.len(), 2);
        assert_eq!(bytes[1] & 0b1111_1000, 0);
        let back = BitWindow::from_bytes(&bytes, 11);
        assert_eq!(back, w);
    }
}
