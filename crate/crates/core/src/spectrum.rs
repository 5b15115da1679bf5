//! Spectrum slot bitmaps.
//!
//! A [`SlotBitmap`] records the availability of every frequency slot on an
//! edge or along a path: bit `i` is `1` when slot `i` is free and `0` when it
//! is occupied or unusable. Index 0 is the lowest-frequency slot and is the
//! leftmost character of the text form, so `"00011001"` has slots 3, 4 and 7
//! free.
//!
//! Bits are packed into `u64` words. Bits beyond `len` in the last word are
//! always kept at zero so that word-level scans never see phantom free slots.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

const WORD_BITS: usize = 64;

/// Errors raised by bit-level spectrum operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectrumError {
    /// Two bitmaps of different length were combined; the network was not
    /// normalized.
    #[error("bitmap length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    /// A range does not fit inside the bitmap.
    #[error("slot range {start}+{length} exceeds bitmap length {len}")]
    OutOfBounds {
        start: usize,
        length: usize,
        len: usize,
    },
    /// Occupying a slot that is already occupied.
    #[error("double allocation of slot {slot}")]
    DoubleAllocation { slot: usize },
    /// Freeing a slot that is already free.
    #[error("double release of slot {slot}")]
    DoubleRelease { slot: usize },
    /// Padding shorter than the current length.
    #[error("cannot pad bitmap of length {len} to {target}")]
    PadTooShort { len: usize, target: usize },
    /// Text form contained something other than '0' or '1'.
    #[error("invalid bitmap character {0:?}")]
    InvalidChar(char),
}

/// A contiguous block of slots `start..start + length`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct SlotRange {
    pub start: usize,
    pub length: usize,
}

impl SlotRange {
    pub fn new(start: usize, length: usize) -> Self {
        Self { start, length }
    }

    /// One past the last slot.
    pub fn end(&self) -> usize {
        self.start + self.length
    }

    pub fn overlaps(&self, other: &SlotRange) -> bool {
        self.start < other.end() && other.start < self.end()
    }
}

impl fmt::Display for SlotRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end())
    }
}

/// Packed availability flags, one per slot.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SlotBitmap {
    words: Vec<u64>,
    len: usize,
}

impl SlotBitmap {
    /// All slots free.
    pub fn ones(len: usize) -> Self {
        let mut b = Self {
            words: vec![u64::MAX; len.div_ceil(WORD_BITS)],
            len,
        };
        b.clear_tail();
        b
    }

    /// All slots occupied.
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(WORD_BITS)],
            len,
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut b = Self::zeros(bits.len());
        for (i, &bit) in bits.iter().enumerate() {
            if bit {
                b.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
            }
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "slot {i} out of range for length {}",
            self.len
        );
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    pub fn set(&mut self, i: usize, free: bool) {
        assert!(
            i < self.len,
            "slot {i} out of range for length {}",
            self.len
        );
        let mask = 1u64 << (i % WORD_BITS);
        if free {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    /// Number of free slots (the `sum` of the bitmap).
    pub fn count_free(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    fn check_len(&self, other: &SlotBitmap) -> Result<(), SpectrumError> {
        if self.len != other.len {
            return Err(SpectrumError::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(())
    }

    fn check_range(&self, range: SlotRange) -> Result<(), SpectrumError> {
        if range.end() > self.len {
            return Err(SpectrumError::OutOfBounds {
                start: range.start,
                length: range.length,
                len: self.len,
            });
        }
        Ok(())
    }

    /// Bitwise AND of two equal-length bitmaps.
    pub fn intersect(&self, other: &SlotBitmap) -> Result<SlotBitmap, SpectrumError> {
        let mut out = self.clone();
        out.intersect_in_place(other)?;
        Ok(out)
    }

    pub fn intersect_in_place(&mut self, other: &SlotBitmap) -> Result<(), SpectrumError> {
        self.check_len(other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= *b;
        }
        Ok(())
    }

    /// Index of the first free slot at or after `from`.
    fn next_free(&self, from: usize) -> Option<usize> {
        if from >= self.len {
            return None;
        }
        let mut wi = from / WORD_BITS;
        let mut word = self.words[wi] & (u64::MAX << (from % WORD_BITS));
        loop {
            if word != 0 {
                return Some(wi * WORD_BITS + word.trailing_zeros() as usize);
            }
            wi += 1;
            if wi == self.words.len() {
                return None;
            }
            word = self.words[wi];
        }
    }

    /// Index of the first occupied slot at or after `from`, or `len` if the
    /// rest of the bitmap is free.
    fn next_occupied(&self, from: usize) -> usize {
        if from >= self.len {
            return self.len;
        }
        let mut wi = from / WORD_BITS;
        let mut word = !self.words[wi] & (u64::MAX << (from % WORD_BITS));
        loop {
            if word != 0 {
                return (wi * WORD_BITS + word.trailing_zeros() as usize).min(self.len);
            }
            wi += 1;
            if wi == self.words.len() {
                return self.len;
            }
            word = !self.words[wi];
        }
    }

    /// Maximal runs of free slots, in ascending start order.
    pub fn free_runs(&self) -> FreeRuns<'_> {
        FreeRuns {
            bitmap: self,
            pos: 0,
        }
    }

    /// Length of the longest run of free slots.
    pub fn max_contiguous(&self) -> usize {
        self.free_runs().map(|r| r.length).max().unwrap_or(0)
    }

    /// Whether some run of at least `required` free slots exists.
    pub fn is_feasible(&self, required: usize) -> bool {
        required == 0 || self.free_runs().any(|r| r.length >= required)
    }

    /// Lowest-start block of `required` free slots.
    pub fn first_fit(&self, required: usize) -> Option<SlotRange> {
        if required == 0 {
            return None;
        }
        self.free_runs()
            .find(|r| r.length >= required)
            .map(|r| SlotRange::new(r.start, required))
    }

    /// Marks every slot in `range` occupied. Fails without modifying the
    /// bitmap if any of them is already occupied.
    pub fn occupy(&mut self, range: SlotRange) -> Result<(), SpectrumError> {
        self.check_range(range)?;
        if let Some(slot) = (range.start..range.end()).find(|&i| !self.get(i)) {
            return Err(SpectrumError::DoubleAllocation { slot });
        }
        for i in range.start..range.end() {
            self.set(i, false);
        }
        Ok(())
    }

    /// Marks every slot in `range` free. Fails without modifying the bitmap
    /// if any of them is already free.
    pub fn free(&mut self, range: SlotRange) -> Result<(), SpectrumError> {
        self.check_range(range)?;
        if let Some(slot) = (range.start..range.end()).find(|&i| self.get(i)) {
            return Err(SpectrumError::DoubleRelease { slot });
        }
        for i in range.start..range.end() {
            self.set(i, true);
        }
        Ok(())
    }

    /// Whether every slot in `range` is free.
    pub fn is_range_free(&self, range: SlotRange) -> bool {
        range.end() <= self.len && (range.start..range.end()).all(|i| self.get(i))
    }

    /// Extends the bitmap with permanently unavailable slots at the
    /// high-index end.
    pub fn zero_pad(&self, target_len: usize) -> Result<SlotBitmap, SpectrumError> {
        if target_len < self.len {
            return Err(SpectrumError::PadTooShort {
                len: self.len,
                target: target_len,
            });
        }
        let mut out = self.clone();
        out.words.resize(target_len.div_ceil(WORD_BITS), 0);
        out.len = target_len;
        Ok(out)
    }
}

/// Iterator over maximal free runs of a [`SlotBitmap`].
pub struct FreeRuns<'a> {
    bitmap: &'a SlotBitmap,
    pos: usize,
}

impl Iterator for FreeRuns<'_> {
    type Item = SlotRange;

    fn next(&mut self) -> Option<SlotRange> {
        let start = self.bitmap.next_free(self.pos)?;
        let end = self.bitmap.next_occupied(start);
        self.pos = end;
        Some(SlotRange::new(start, end - start))
    }
}

impl fmt::Display for SlotBitmap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for SlotBitmap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SlotBitmap({self})")
    }
}

impl FromStr for SlotBitmap {
    type Err = SpectrumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(SpectrumError::InvalidChar(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_bools(&bits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bm(s: &str) -> SlotBitmap {
        s.parse().unwrap()
    }

    #[test]
    fn intersect_uniform_chain() {
        let p = bm("00111001")
            .intersect(&bm("11111001"))
            .unwrap()
            .intersect(&bm("10011001"))
            .unwrap();
        assert_eq!(p.to_string(), "00011001");
    }

    #[test]
    fn intersect_padded_chain() {
        let p = bm("001110000")
            .intersect(&bm("111110000"))
            .unwrap()
            .intersect(&bm("100110011"))
            .unwrap();
        assert_eq!(p.to_string(), "000110000");
    }

    #[test]
    fn intersect_identity_and_mismatch() {
        let x = bm("01101001");
        assert_eq!(SlotBitmap::ones(8).intersect(&x).unwrap(), x);
        assert_eq!(
            x.intersect(&SlotBitmap::ones(9)),
            Err(SpectrumError::LengthMismatch { left: 8, right: 9 })
        );
    }

    #[test]
    fn max_contiguous_examples() {
        assert_eq!(bm("00011001").max_contiguous(), 2);
        assert_eq!(bm("11111111").max_contiguous(), 8);
        assert_eq!(bm("00000000").max_contiguous(), 0);
        assert_eq!(SlotBitmap::zeros(0).max_contiguous(), 0);
    }

    #[test]
    fn feasibility_examples() {
        let b = bm("00011001");
        assert!(b.is_feasible(2));
        assert!(!b.is_feasible(3));
        assert!(b.is_feasible(0));
        assert!(SlotBitmap::zeros(8).is_feasible(0));
    }

    #[test]
    fn first_fit_examples() {
        assert_eq!(bm("00111001").first_fit(2), Some(SlotRange::new(2, 2)));
        assert_eq!(bm("11111111").first_fit(3), Some(SlotRange::new(0, 3)));
        assert_eq!(bm("00011001").first_fit(3), None);
    }

    #[test]
    fn occupy_and_free() {
        let mut b = bm("11111111");
        b.occupy(SlotRange::new(0, 3)).unwrap();
        assert_eq!(b.to_string(), "00011111");

        let mut p = bm("00011001");
        p.occupy(SlotRange::new(3, 2)).unwrap();
        assert_eq!(p.to_string(), "00000001");
        assert_eq!(
            p.occupy(SlotRange::new(6, 2)),
            Err(SpectrumError::DoubleAllocation { slot: 6 })
        );
        // failed occupy leaves bitmap untouched
        assert_eq!(p.to_string(), "00000001");
        assert_eq!(
            p.free(SlotRange::new(6, 2)),
            Err(SpectrumError::DoubleRelease { slot: 7 })
        );
        p.free(SlotRange::new(3, 2)).unwrap();
        assert_eq!(p.to_string(), "00011001");
        assert!(matches!(
            p.occupy(SlotRange::new(7, 2)),
            Err(SpectrumError::OutOfBounds { .. })
        ));
    }

    #[test]
    fn zero_pad_examples() {
        assert_eq!(bm("00111").zero_pad(9).unwrap().to_string(), "001110000");
        assert_eq!(bm("111110").zero_pad(9).unwrap().to_string(), "111110000");
        let b = bm("1011");
        assert_eq!(b.zero_pad(4).unwrap(), b);
        assert_eq!(
            b.zero_pad(3),
            Err(SpectrumError::PadTooShort { len: 4, target: 3 })
        );
    }

    #[test]
    fn runs_cross_word_boundaries() {
        let mut b = SlotBitmap::zeros(200);
        for i in 60..130 {
            b.set(i, true);
        }
        b.set(199, true);
        let runs: Vec<_> = b.free_runs().collect();
        assert_eq!(runs, vec![SlotRange::new(60, 70), SlotRange::new(199, 1)]);
        assert_eq!(SlotBitmap::ones(320).max_contiguous(), 320);
        assert_eq!(SlotBitmap::ones(320).count_free(), 320);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert_eq!(
            "0102".parse::<SlotBitmap>(),
            Err(SpectrumError::InvalidChar('2'))
        );
    }

    // Exhaustive-scan oracles, independent of the run iterator.
    fn oracle_max_run(bits: &[bool]) -> usize {
        let (mut best, mut cur) = (0, 0);
        for &b in bits {
            cur = if b { cur + 1 } else { 0 };
            best = best.max(cur);
        }
        best
    }

    fn oracle_first_fit(bits: &[bool], r: usize) -> Option<usize> {
        (0..=bits.len().saturating_sub(r))
            .find(|&s| s + r <= bits.len() && bits[s..s + r].iter().all(|&b| b))
    }

    fn bits_and_len() -> impl Strategy<Value = (Vec<bool>, Vec<bool>, Vec<bool>)> {
        (1usize..200).prop_flat_map(|n| {
            (
                prop::collection::vec(any::<bool>(), n),
                prop::collection::vec(any::<bool>(), n),
                prop::collection::vec(any::<bool>(), n),
            )
        })
    }

    proptest! {
        #[test]
        fn intersect_is_a_semilattice((a, b, c) in bits_and_len()) {
            let (a, b, c) = (
                SlotBitmap::from_bools(&a),
                SlotBitmap::from_bools(&b),
                SlotBitmap::from_bools(&c),
            );
            prop_assert_eq!(a.intersect(&b).unwrap(), b.intersect(&a).unwrap());
            prop_assert_eq!(
                a.intersect(&b).unwrap().intersect(&c).unwrap(),
                a.intersect(&b.intersect(&c).unwrap()).unwrap()
            );
            prop_assert_eq!(a.intersect(&a).unwrap(), a.clone());
            prop_assert_eq!(SlotBitmap::ones(a.len()).intersect(&a).unwrap(), a);
        }

        #[test]
        fn scans_match_oracle(bits in prop::collection::vec(any::<bool>(), 0..260), r in 0usize..20) {
            let b = SlotBitmap::from_bools(&bits);
            let max = oracle_max_run(&bits);
            prop_assert_eq!(b.max_contiguous(), max);
            prop_assert_eq!(b.is_feasible(r), max >= r);
            if r >= 1 {
                let ff = b.first_fit(r);
                prop_assert_eq!(ff.is_some(), b.is_feasible(r));
                prop_assert_eq!(ff.map(|x| x.start), oracle_first_fit(&bits, r));
                if let Some(range) = ff {
                    prop_assert!(b.is_range_free(range));
                }
            }
        }

        #[test]
        fn occupy_then_free_is_identity(
            bits in prop::collection::vec(any::<bool>(), 1..200),
            r in 1usize..12,
        ) {
            let b = SlotBitmap::from_bools(&bits);
            if let Some(range) = b.first_fit(r) {
                let mut x = b.clone();
                x.occupy(range).unwrap();
                prop_assert_eq!(x.count_free(), b.count_free() - r);
                x.free(range).unwrap();
                prop_assert_eq!(x.count_free(), b.count_free());
                prop_assert_eq!(x, b);
            }
        }

        #[test]
        fn text_form_round_trips(bits in prop::collection::vec(any::<bool>(), 0..150)) {
            let b = SlotBitmap::from_bools(&bits);
            prop_assert_eq!(b.to_string().parse::<SlotBitmap>().unwrap(), b);
        }
    }
}
