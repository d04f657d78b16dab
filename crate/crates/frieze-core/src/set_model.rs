//! Constructive models of integer sets and their observer windows.
//!
//! A [`SetSpec`] describes a subset of the integers with decidable, pure
//! membership. The *observer window* of a spec is the finite 0/1 prefix
//! `x_0 .. x_n` with `x_i = 1` iff `i` is a member; every density and
//! search operation in this crate works through these windows or through
//! direct membership queries, and the two are guaranteed to agree
//! bit-for-bit.

use std::io::{Read, Write};
use std::path::Path;

use num_rational::Ratio;

use crate::bits::BitWindow;
use crate::error::Error;

/// Hard cap on window sizes (bits). 2^31 bits = 256 MiB.
pub const MAX_WINDOW_BITS: u64 = 1 << 31;

/// Magic bytes of the bitmap set file format.
pub const BITMAP_MAGIC: &[u8; 4] = b"FRZB";
/// Current bitmap format version.
pub const BITMAP_VERSION: u32 = 1;

/// A decidable model of a set of integers.
///
/// Membership is a pure function of the spec and the queried integer, so
/// every operation built on top is deterministic and reproducible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetSpec {
    /// A finite set, strictly increasing.
    Explicit { elements: Vec<i64> },
    /// All integers congruent to one of `residues` modulo `modulus`.
    ResidueClasses { modulus: u64, residues: Vec<u64> },
    /// The full residue line `{ anchor + j*difference : j in Z }`.
    ArithmeticProgression { anchor: i64, difference: u64 },
    Union(Box<SetSpec>, Box<SetSpec>),
    Intersection(Box<SetSpec>, Box<SetSpec>),
    Difference(Box<SetSpec>, Box<SetSpec>),
    /// Pseudo-random set: `i` is a member iff a stateless hash of
    /// `(seed, i)` falls below `prob`. Bit-exact across platforms.
    Bernoulli { prob: Ratio<u64>, seed: u64 },
    /// The prime numbers.
    Primes,
    /// `{1, 2, 4, 8, ...}`.
    PowersOfTwo,
    /// Membership read from a bitmap file: defined (by the stored bits)
    /// on `[offset, offset + bit count)`, false outside.
    Bitmap {
        path: String,
        offset: i64,
        bits: BitWindow,
    },
}

impl SetSpec {
    pub fn explicit(elements: Vec<i64>) -> Result<Self, Error> {
        let spec = SetSpec::Explicit { elements };
        spec.validate()?;
        Ok(spec)
    }

    pub fn residues(modulus: u64, residues: Vec<u64>) -> Result<Self, Error> {
        let spec = SetSpec::ResidueClasses { modulus, residues };
        spec.validate()?;
        Ok(spec)
    }

    pub fn progression(anchor: i64, difference: u64) -> Result<Self, Error> {
        let spec = SetSpec::ArithmeticProgression { anchor, difference };
        spec.validate()?;
        Ok(spec)
    }

    pub fn bernoulli(prob: Ratio<u64>, seed: u64) -> Result<Self, Error> {
        let spec = SetSpec::Bernoulli { prob, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn union(a: SetSpec, b: SetSpec) -> Self {
        SetSpec::Union(Box::new(a), Box::new(b))
    }

    pub fn intersection(a: SetSpec, b: SetSpec) -> Self {
        SetSpec::Intersection(Box::new(a), Box::new(b))
    }

    pub fn difference(a: SetSpec, b: SetSpec) -> Self {
        SetSpec::Difference(Box::new(a), Box::new(b))
    }

    /// Loads a bitmap set from `path` (see [`write_bitmap_file`]).
    pub fn bitmap_from_file(path: &str) -> Result<Self, Error> {
        let (offset, bits) = read_bitmap_file(Path::new(path))?;
        Ok(SetSpec::Bitmap {
            path: path.to_string(),
            offset,
            bits,
        })
    }

    /// Checks the structural invariants of the spec tree.
    pub fn validate(&self) -> Result<(), Error> {
        match self {
            SetSpec::Explicit { elements } => {
                if !elements.windows(2).all(|w| w[0] < w[1]) {
                    return Err(Error::invalid(
                        "explicit elements must be strictly increasing",
                    ));
                }
                Ok(())
            }
            SetSpec::ResidueClasses { modulus, residues } => {
                if *modulus == 0 {
                    return Err(Error::invalid("modulus must be positive"));
                }
                if residues.is_empty() {
                    return Err(Error::invalid("residue set must be nonempty"));
                }
                if !residues.windows(2).all(|w| w[0] < w[1]) {
                    return Err(Error::invalid("residues must be strictly increasing"));
                }
                if residues.last().unwrap() >= modulus {
                    return Err(Error::invalid("residues must lie in 0..modulus"));
                }
                Ok(())
            }
            SetSpec::ArithmeticProgression { difference, .. } => {
                if *difference == 0 {
                    return Err(Error::invalid("difference must be positive"));
                }
                Ok(())
            }
            SetSpec::Union(a, b) | SetSpec::Intersection(a, b) | SetSpec::Difference(a, b) => {
                a.validate()?;
                b.validate()
            }
            SetSpec::Bernoulli { prob, .. } => {
                if prob > &Ratio::from_integer(1u64) {
                    return Err(Error::invalid("bernoulli probability must be in [0, 1]"));
                }
                Ok(())
            }
            SetSpec::Primes | SetSpec::PowersOfTwo => Ok(()),
            SetSpec::Bitmap { bits, offset, .. } => {
                if offset.checked_add_unsigned(bits.len()).is_none() {
                    return Err(Error::Bitmap("offset + bit count overflows".into()));
                }
                Ok(())
            }
        }
    }

    /// Pure membership test. Defined on all of `i64`, including negatives.
    pub fn contains(&self, i: i64) -> bool {
        match self {
            SetSpec::Explicit { elements } => elements.binary_search(&i).is_ok(),
            SetSpec::ResidueClasses { modulus, residues } => {
                let r = i.rem_euclid(*modulus as i64) as u64;
                residues.binary_search(&r).is_ok()
            }
            SetSpec::ArithmeticProgression { anchor, difference } => {
                // Bi-infinite line through `anchor` with step `difference`.
                (i.wrapping_sub(*anchor)).rem_euclid(*difference as i64) == 0
            }
            SetSpec::Union(a, b) => a.contains(i) || b.contains(i),
            SetSpec::Intersection(a, b) => a.contains(i) && b.contains(i),
            SetSpec::Difference(a, b) => a.contains(i) && !b.contains(i),
            SetSpec::Bernoulli { prob, seed } => {
                bernoulli_member(*seed, bernoulli_threshold(prob), i)
            }
            SetSpec::Primes => i >= 2 && is_prime_u64(i as u64),
            SetSpec::PowersOfTwo => i >= 1 && i & (i - 1) == 0,
            SetSpec::Bitmap { offset, bits, .. } => match i.checked_sub(*offset) {
                Some(j) if j >= 0 => bits.get(j as u64).unwrap_or(false),
                _ => false,
            },
        }
    }

    /// Observer window `x_0 .. x_n` of the set: bit `i` equals
    /// `contains(i)` for every `0 <= i <= n`.
    pub fn window(&self, n: u64) -> Result<ObserverWindow, Error> {
        let len = n
            .checked_add(1)
            .filter(|&len| len <= MAX_WINDOW_BITS)
            .ok_or(Error::Capacity {
                what: "observer window bits",
                requested: n,
                limit: MAX_WINDOW_BITS,
            })?;
        Ok(ObserverWindow {
            bits: fill_window(self, len),
        })
    }
}

/// Finite prefix of the sequence that observes a set.
///
/// Windows always start at index 0; bit `i` records whether `i` is a
/// member. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObserverWindow {
    bits: BitWindow,
}

impl ObserverWindow {
    /// First index covered. Always 0 in this crate.
    pub fn start(&self) -> i64 {
        0
    }

    /// Number of bits, i.e. `n + 1` for a window over `0..=n`.
    pub fn len(&self) -> u64 {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Bit `i`; panics when `i` is outside the window.
    #[inline]
    pub fn bit(&self, i: u64) -> bool {
        self.bits.bit(i)
    }

    /// Checked bit access.
    #[inline]
    pub fn get(&self, i: u64) -> Option<bool> {
        self.bits.get(i)
    }

    /// The cylinder indicator at shift `i`: 1 when bit `i` is set.
    /// Shifting the observer sequence by `i` lands in the cylinder
    /// `{y : y_0 = 1}` exactly when `i` is a member, so this is plain
    /// bit access. Panics when `i` is outside the window.
    #[inline]
    pub fn indicator(&self, i: u64) -> u8 {
        u8::from(self.bits.bit(i))
    }

    /// Number of set bits among `[0, end)`.
    pub fn count_ones_below(&self, end: u64) -> u64 {
        self.bits.count_ones_below(end)
    }

    pub fn count_ones(&self) -> u64 {
        self.bits.count_ones()
    }

    pub fn for_each(&self, f: impl FnMut(u64, bool)) {
        self.bits.for_each(f)
    }

    pub fn bits(&self) -> &BitWindow {
        &self.bits
    }

    /// Window built directly from raw bits (tests and tooling).
    pub fn from_bits(bits: BitWindow) -> Self {
        ObserverWindow { bits }
    }
}

fn fill_window(spec: &SetSpec, len: u64) -> BitWindow {
    let mut w = BitWindow::zeros(len);
    match spec {
        SetSpec::Explicit { elements } => {
            for &e in elements {
                if e >= 0 && (e as u64) < len {
                    w.set(e as u64, true);
                }
            }
        }
        SetSpec::ResidueClasses { modulus, residues } => {
            for &r in residues {
                let mut i = r;
                while i < len {
                    w.set(i, true);
                    i += modulus;
                }
            }
        }
        SetSpec::ArithmeticProgression { anchor, difference } => {
            let mut i = anchor.rem_euclid(*difference as i64) as u64;
            while i < len {
                w.set(i, true);
                i += difference;
            }
        }
        SetSpec::Union(a, b) => {
            w = fill_window(a, len);
            w.union_with(&fill_window(b, len));
        }
        SetSpec::Intersection(a, b) => {
            w = fill_window(a, len);
            w.intersect_with(&fill_window(b, len));
        }
        SetSpec::Difference(a, b) => {
            w = fill_window(a, len);
            w.subtract(&fill_window(b, len));
        }
        SetSpec::Bernoulli { prob, seed } => {
            let threshold = bernoulli_threshold(prob);
            for i in 0..len {
                if bernoulli_member(*seed, threshold, i as i64) {
                    w.set(i, true);
                }
            }
        }
        SetSpec::Primes => {
            w = prime_window(len);
        }
        SetSpec::PowersOfTwo => {
            let mut i: u64 = 1;
            while i < len {
                w.set(i, true);
                i <<= 1;
            }
        }
        SetSpec::Bitmap { offset, bits, .. } => {
            for i in 0..len {
                let j = (i as i64).checked_sub(*offset);
                if let Some(j) = j {
                    if j >= 0 && bits.get(j as u64).unwrap_or(false) {
                        w.set(i, true);
                    }
                }
            }
        }
    }
    w
}

// --- Bernoulli membership -------------------------------------------------

/// Membership holds iff the top 53 hash bits, read as a dyadic rational
/// in [0, 1), are strictly below `prob`. Comparing against
/// `ceil(prob * 2^53)` is exact: `m/2^53 < p  <=>  m < ceil(p * 2^53)`
/// (for `p * 2^53` integral the ceiling is itself and the strict
/// comparison is preserved).
fn bernoulli_threshold(prob: &Ratio<u64>) -> u64 {
    let num = *prob.numer() as u128;
    let den = *prob.denom() as u128;
    ((num << 53).div_ceil(den)) as u64
}

#[inline]
fn bernoulli_member(seed: u64, threshold: u64, i: i64) -> bool {
    let mut z = seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) < threshold
}

// --- Primality -------------------------------------------------------------

const SMALL_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic Miller-Rabin for u64 (the 12-base set is exact below
/// 3.3 * 10^24, far beyond u64).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for &a in &SMALL_PRIMES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc: u64 = 1;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Prime bits for `[0, len)` via a segmented sieve of Eratosthenes.
fn prime_window(len: u64) -> BitWindow {
    let mut w = BitWindow::zeros(len);
    if len > 2 {
        w.set(2, true);
    }
    if len <= 3 {
        return w;
    }
    let limit = len - 1; // largest index in the window
    let root = limit.integer_sqrt_();
    let base = simple_odd_sieve(root);

    // Odd candidates only; segment size chosen to fit in cache. Segment
    // bounds stay odd so slot j of a segment is exactly lo + 2j.
    const SEGMENT: u64 = 1 << 18;
    let max_odd = if limit.is_multiple_of(2) { limit - 1 } else { limit };
    let mut composite = vec![false; SEGMENT as usize];
    let mut lo = 3u64;
    while lo <= max_odd {
        let hi = (lo + 2 * (SEGMENT - 1)).min(max_odd); // [lo, hi] odds, inclusive
        let slots = (hi - lo) / 2 + 1;
        composite[..slots as usize].fill(false);
        for &p in &base {
            let p2 = p * p;
            if p2 > hi {
                break;
            }
            // First odd multiple of p in [lo, hi] that is >= p^2.
            let mut start = p2.max(lo.div_ceil(p) * p);
            if start % 2 == 0 {
                start += p;
            }
            let mut j = start;
            while j <= hi {
                composite[((j - lo) / 2) as usize] = true;
                j += 2 * p;
            }
        }
        for slot in 0..slots {
            if !composite[slot as usize] {
                let n = lo + 2 * slot;
                if n >= 3 {
                    w.set(n, true);
                }
            }
        }
        lo = hi + 2;
    }
    w
}

/// Odd primes up to and including `limit`.
fn simple_odd_sieve(limit: u64) -> Vec<u64> {
    if limit < 3 {
        return Vec::new();
    }
    let slots = ((limit - 3) / 2 + 1) as usize; // slot i is 2i + 3
    let mut composite = vec![false; slots];
    let mut primes = Vec::new();
    for i in 0..slots {
        if composite[i] {
            continue;
        }
        let p = 2 * i as u64 + 3;
        primes.push(p);
        let mut j = p * p;
        while j <= limit {
            composite[((j - 3) / 2) as usize] = true;
            j += 2 * p;
        }
    }
    primes
}

trait IntegerSqrt {
    fn integer_sqrt_(self) -> u64;
}

impl IntegerSqrt for u64 {
    fn integer_sqrt_(self) -> u64 {
        let mut r = (self as f64).sqrt() as u64;
        while r.checked_mul(r).is_none_or(|sq| sq > self) {
            r -= 1;
        }
        while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= self) {
            r += 1;
        }
        r
    }
}

// --- Bitmap file format -----------------------------------------------------
//
// 16-byte header: magic "FRZB", version u32 LE = 1, offset i64 LE; then the
// bit payload, LSB-first within each byte, bit j = membership(offset + j).
// Pad bits in the final byte must be zero.

/// Writes `bits` as a bitmap set file.
pub fn write_bitmap_file(path: &Path, offset: i64, bits: &BitWindow) -> Result<(), Error> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(BITMAP_MAGIC)?;
    f.write_all(&BITMAP_VERSION.to_le_bytes())?;
    f.write_all(&offset.to_le_bytes())?;
    f.write_all(&bits.to_bytes())?;
    Ok(())
}

/// Reads a bitmap set file, returning `(offset, bits)`.
pub fn read_bitmap_file(path: &Path) -> Result<(i64, BitWindow), Error> {
    let mut f = std::fs::File::open(path)?;
    let mut header = [0u8; 16];
    f.read_exact(&mut header)
        .map_err(|_| Error::Bitmap("file shorter than the 16-byte header".into()))?;
    if &header[0..4] != BITMAP_MAGIC {
        return Err(Error::Bitmap("bad magic".into()));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != BITMAP_VERSION {
        return Err(Error::Bitmap(format!("unsupported version {version}")));
    }
    let offset = i64::from_le_bytes(header[8..16].try_into().unwrap());
    let mut payload = Vec::new();
    f.read_to_end(&mut payload)?;
    let len = payload.len() as u64 * 8;
    if len > MAX_WINDOW_BITS {
        return Err(Error::Capacity {
            what: "bitmap payload bits",
            requested: len,
            limit: MAX_WINDOW_BITS,
        });
    }
    // There is no bit-count field: every payload bit is data, and a pad
    // bit that is zero is indistinguishable from a stored zero. Nonzero
    // tail bits would have to be pad, so the file is malformed.
    Ok((offset, BitWindow::from_bytes(&payload, len)))
}
