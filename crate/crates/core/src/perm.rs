//! Permutations of `{1..n}` in one-line notation, prefix reversals, and
//! reversal words.
//!
//! Points are 1-based in every public signature. Internally images are stored
//! 0-based in a `Vec<u8>`, which caps the degree at [`MAX_DEGREE`].
//!
//! Products follow the right-to-left convention: `a.compose(&b)` maps `x` to
//! `a(b(x))`, so a word `r_a r_b r_c` applies `r_c` first.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

/// Largest degree a [`Permutation`] can carry.
pub const MAX_DEGREE: usize = 255;

/// Largest degree for which `n!` fits in a `u64` (rank/unrank domain).
pub const MAX_RANK_DEGREE: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermError {
    #[error("reversal index {index} out of range 2..={degree}")]
    IndexOutOfRange { index: usize, degree: usize },
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },
    #[error("point {point} out of range 1..={degree}")]
    PointOutOfRange { point: usize, degree: usize },
    #[error("rank {rank} out of range for degree {degree}")]
    RankOutOfRange { rank: u64, degree: usize },
    #[error("degree {0} unsupported")]
    DegreeTooLarge(usize),
    #[error("images do not form a permutation of 1..={0}")]
    NotAPermutation(usize),
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    /// Parity of a product.
    pub fn combine(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Multiset of cycle lengths, fixed points included, sorted descending.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CycleType(Vec<usize>);

impl CycleType {
    pub fn lengths(&self) -> &[usize] {
        &self.0
    }

    /// Cycle lengths greater than one, descending.
    pub fn nontrivial(&self) -> Vec<usize> {
        self.0.iter().copied().filter(|&l| l > 1).collect()
    }
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

/// A bijection on `{1..n}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<u8>,
}

impl Permutation {
    pub fn identity(degree: usize) -> Permutation {
        assert!(degree <= MAX_DEGREE, "degree {degree} exceeds {MAX_DEGREE}");
        Permutation {
            images: (0..degree).map(|p| p as u8).collect(),
        }
    }

    /// Builds a permutation from 1-based one-line images.
    pub fn from_images(images: &[usize]) -> Result<Permutation, PermError> {
        let n = images.len();
        if n > MAX_DEGREE {
            return Err(PermError::DegreeTooLarge(n));
        }
        let mut seen = vec![false; n];
        let mut out = Vec::with_capacity(n);
        for &v in images {
            if v == 0 || v > n || seen[v - 1] {
                return Err(PermError::NotAPermutation(n));
            }
            seen[v - 1] = true;
            out.push((v - 1) as u8);
        }
        Ok(Permutation { images: out })
    }

    /// Builds a permutation of degree `n` from disjoint cycles given in
    /// 1-based points; `(a b c)` maps `a -> b -> c -> a`.
    pub fn from_cycles(degree: usize, cycles: &[Vec<usize>]) -> Result<Permutation, PermError> {
        if degree > MAX_DEGREE {
            return Err(PermError::DegreeTooLarge(degree));
        }
        let mut images: Vec<u8> = (0..degree).map(|p| p as u8).collect();
        let mut touched = vec![false; degree];
        for cycle in cycles {
            for (j, &x) in cycle.iter().enumerate() {
                if x == 0 || x > degree {
                    return Err(PermError::PointOutOfRange { point: x, degree });
                }
                if touched[x - 1] {
                    return Err(PermError::NotAPermutation(degree));
                }
                touched[x - 1] = true;
                let y = cycle[(j + 1) % cycle.len()];
                if y == 0 || y > degree {
                    return Err(PermError::PointOutOfRange { point: y, degree });
                }
                images[x - 1] = (y - 1) as u8;
            }
        }
        Ok(Permutation { images })
    }

    /// The prefix reversal `r_i` of degree `n`: reverses positions `1..=i`.
    pub fn reversal(degree: usize, index: usize) -> Result<Permutation, PermError> {
        if degree > MAX_DEGREE {
            return Err(PermError::DegreeTooLarge(degree));
        }
        if index < 2 || index > degree {
            return Err(PermError::IndexOutOfRange { index, degree });
        }
        let mut images: Vec<u8> = (0..degree).map(|p| p as u8).collect();
        images[..index].reverse();
        Ok(Permutation { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// 0-based images; `raw()[p] == self(p+1) - 1`.
    pub fn raw(&self) -> &[u8] {
        &self.images
    }

    /// 1-based one-line images.
    pub fn one_line(&self) -> Vec<usize> {
        self.images.iter().map(|&v| v as usize + 1).collect()
    }

    /// `self(x)` for a 1-based point.
    pub fn apply(&self, x: usize) -> Result<usize, PermError> {
        if x == 0 || x > self.degree() {
            return Err(PermError::PointOutOfRange {
                point: x,
                degree: self.degree(),
            });
        }
        Ok(self.images[x - 1] as usize + 1)
    }

    /// 0-based image, unchecked.
    #[inline]
    pub(crate) fn image0(&self, x: usize) -> usize {
        self.images[x] as usize
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(p, &v)| p == v as usize)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation, PermError> {
        if self.degree() != other.degree() {
            return Err(PermError::DegreeMismatch {
                left: self.degree(),
                right: other.degree(),
            });
        }
        Ok(self.compose_unchecked(other))
    }

    #[inline]
    pub(crate) fn compose_unchecked(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: other
                .images
                .iter()
                .map(|&v| self.images[v as usize])
                .collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u8; self.degree()];
        for (p, &v) in self.images.iter().enumerate() {
            inv[v as usize] = p as u8;
        }
        Permutation { images: inv }
    }

    /// `self^e` for `e >= 0`, by repeated squaring.
    pub fn pow(&self, mut e: u64) -> Permutation {
        let mut acc = Permutation::identity(self.degree());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose_unchecked(&base);
            }
            base = base.compose_unchecked(&base);
            e >>= 1;
        }
        acc
    }

    /// Disjoint cycles of length > 1, each starting at its smallest point,
    /// ordered by that point. Points are 1-based.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x + 1);
                x = self.images[x] as usize;
            }
            if cycle.len() > 1 {
                out.push(cycle);
            }
        }
        out
    }

    pub fn cycle_type(&self) -> CycleType {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut lens = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                len += 1;
                x = self.images[x] as usize;
            }
            lens.push(len);
        }
        lens.sort_unstable_by(|a, b| b.cmp(a));
        CycleType(lens)
    }

    pub fn parity(&self) -> Parity {
        let n = self.degree();
        let cycles = self.cycle_type().0.len();
        if (n - cycles) % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// True if the permutation is a single cycle through all points.
    pub fn is_full_cycle(&self) -> bool {
        self.cycle_type().0 == [self.degree()]
    }

    /// Cycle notation, e.g. `(1 5 3)(2 4)`; identity prints as `()`.
    pub fn cycle_string(&self) -> String {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return "()".to_string();
        }
        cycles
            .iter()
            .map(|c| {
                let inner: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                format!("({})", inner.join(" "))
            })
            .collect()
    }

    /// Lexicographic Lehmer rank in `0..n!`.
    pub fn rank(&self) -> Result<u64, PermError> {
        let n = self.degree();
        if n > MAX_RANK_DEGREE {
            return Err(PermError::DegreeTooLarge(n));
        }
        Ok(lehmer_rank(&self.images))
    }

    /// Inverse of [`Permutation::rank`].
    pub fn unrank(degree: usize, rank: u64) -> Result<Permutation, PermError> {
        if degree > MAX_RANK_DEGREE {
            return Err(PermError::DegreeTooLarge(degree));
        }
        if rank >= factorial(degree) {
            return Err(PermError::RankOutOfRange { rank, degree });
        }
        let mut images = vec![0u8; degree];
        lehmer_unrank(rank, &mut images);
        Ok(Permutation { images })
    }
}

/// `n!` as `u64`; panics above [`MAX_RANK_DEGREE`].
pub fn factorial(n: usize) -> u64 {
    assert!(n <= MAX_RANK_DEGREE, "{n}! overflows u64");
    (1..=n as u64).product()
}

/// Lehmer rank of 0-based images (`len <= 20`).
#[inline]
pub(crate) fn lehmer_rank(images: &[u8]) -> u64 {
    let n = images.len();
    let mut used: u32 = 0;
    let mut rank: u64 = 0;
    for (i, &v) in images.iter().enumerate() {
        let smaller_unused = (!used & ((1u32 << v) - 1)).count_ones() as u64;
        // Horner: digit i has radix (n - i).
        rank = rank * (n - i) as u64 + smaller_unused;
        used |= 1 << v;
    }
    rank
}

/// Writes the permutation of Lehmer rank `rank` into `out` (0-based images).
#[inline]
pub(crate) fn lehmer_unrank(mut rank: u64, out: &mut [u8]) {
    let n = out.len();
    let mut digits = [0u8; MAX_RANK_DEGREE];
    for i in (0..n).rev() {
        let radix = (n - i) as u64;
        digits[i] = (rank % radix) as u8;
        rank /= radix;
    }
    let mut free: u32 = (1u32 << n) - 1;
    for i in 0..n {
        let mut d = digits[i];
        let mut bits = free;
        while d > 0 {
            bits &= bits - 1;
            d -= 1;
        }
        let v = bits.trailing_zeros();
        out[i] = v as u8;
        free &= !(1 << v);
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.images.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", *v as usize + 1)?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Permutation {
    type Err = PermError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| PermError::Parse(format!("expected [..], got {s:?}")))?;
        let images = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|e| PermError::Parse(format!("{t:?}: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        Permutation::from_images(&images)
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.images.iter().map(|&v| v as usize + 1))
    }
}

/// `sigma ∘ pi`.
pub fn compose(sigma: &Permutation, pi: &Permutation) -> Result<Permutation, PermError> {
    sigma.compose(pi)
}

/// A word `r_{i_0} r_{i_1} ... r_{i_{l-1}}` over prefix reversals of degree `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReversalWord {
    degree: usize,
    indices: Vec<usize>,
}

impl ReversalWord {
    pub fn new(degree: usize, indices: Vec<usize>) -> Result<ReversalWord, PermError> {
        if degree > MAX_DEGREE {
            return Err(PermError::DegreeTooLarge(degree));
        }
        if let Some(&index) = indices.iter().find(|&&i| i < 2 || i > degree) {
            return Err(PermError::IndexOutOfRange { index, degree });
        }
        Ok(ReversalWord { degree, indices })
    }

    /// Parses the dotted form `7.6.5.6`.
    pub fn parse(degree: usize, s: &str) -> Result<ReversalWord, PermError> {
        let s = s.trim();
        let indices = if s.is_empty() {
            Vec::new()
        } else {
            s.split('.')
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|e| PermError::Parse(format!("{t:?}: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        ReversalWord::new(degree, indices)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// No equal neighbours, wrap-around pair included.
    pub fn is_cyclically_reduced(&self) -> bool {
        let w = &self.indices;
        let l = w.len();
        (0..l).all(|j| w[j] != w[(j + 1) % l]) || l == 0
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &ReversalWord) -> Result<ReversalWord, PermError> {
        if self.degree != other.degree {
            return Err(PermError::DegreeMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        let mut indices = self.indices.clone();
        indices.extend_from_slice(&other.indices);
        Ok(ReversalWord {
            degree: self.degree,
            indices,
        })
    }

    /// Product of the word, rightmost letter applied first.
    pub fn eval(&self) -> Permutation {
        let mut images: Vec<u8> = (0..self.degree).map(|p| p as u8).collect();
        // images holds P = r_{i_0} ... r_{i_j}; multiplying on the right by
        // r_i permutes the first i entries of the one-line form.
        for &i in &self.indices {
            images[..i].reverse();
        }
        Permutation { images }
    }
}

impl fmt::Display for ReversalWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, i) in self.indices.iter().enumerate() {
            if j > 0 {
                write!(f, ".")?;
            }
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

/// Evaluates a reversal word; the empty word is the identity.
pub fn word_eval(word: &ReversalWord) -> Permutation {
    word.eval()
}
