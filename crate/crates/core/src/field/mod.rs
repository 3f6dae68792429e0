//! Prime-field arithmetic, words over the field and the radix-q labeling
//! of message vectors.
//!
//! Vertex labels are big-endian: the first symbol of a word is the most
//! significant digit, so `13` over F_2 with four symbols is `(1,1,0,1)`.

mod matrix;

pub use matrix::Matrix;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Symbol = u32;

/// The prime field F_q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct PrimeField {
    q: u32,
}

impl TryFrom<u32> for PrimeField {
    type Error = Error;

    fn try_from(q: u32) -> Result<Self> {
        PrimeField::new(q)
    }
}

impl From<PrimeField> for u32 {
    fn from(f: PrimeField) -> u32 {
        f.q
    }
}

fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl PrimeField {
    pub fn new(q: u32) -> Result<Self> {
        // Symbols are multiplied in u64, so any u32 prime is safe.
        if is_prime(q) {
            Ok(PrimeField { q })
        } else {
            Err(Error::NotPrime(q))
        }
    }

    pub const fn binary() -> Self {
        PrimeField { q: 2 }
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn contains(&self, a: Symbol) -> bool {
        a < self.q
    }

    #[inline]
    pub fn reduce(&self, a: u64) -> Symbol {
        (a % self.q as u64) as Symbol
    }

    #[inline]
    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        debug_assert!(a < self.q && b < self.q);
        let s = a as u64 + b as u64;
        if s >= self.q as u64 {
            (s - self.q as u64) as Symbol
        } else {
            s as Symbol
        }
    }

    #[inline]
    pub fn neg(&self, a: Symbol) -> Symbol {
        debug_assert!(a < self.q);
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn sub(&self, a: Symbol, b: Symbol) -> Symbol {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        debug_assert!(a < self.q && b < self.q);
        ((a as u64 * b as u64) % self.q as u64) as Symbol
    }

    pub fn pow(&self, mut base: Symbol, mut exp: u64) -> Symbol {
        let mut acc = 1 % self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse as `a^(q-2)`.
    pub fn inv(&self, a: Symbol) -> Result<Symbol> {
        if a.is_multiple_of(self.q) {
            return Err(Error::ZeroInverse);
        }
        Ok(self.pow(a, self.q as u64 - 2))
    }

    /// Number of words of length `len`, i.e. `q^len`, if it fits in `u128`.
    pub fn word_count(&self, len: usize) -> Option<u128> {
        (self.q as u128).checked_pow(u32::try_from(len).ok()?)
    }

    /// Number of words of length `len` as a `usize`; errors if it does not fit.
    pub fn word_count_usize(&self, len: usize) -> Result<usize> {
        self.word_count(len)
            .and_then(|c| usize::try_from(c).ok())
            .ok_or(Error::SizeLimit {
                vertices: u128::MAX,
                budget: usize::MAX,
            })
    }

    /// Big-endian radix-q value of `symbols`.
    pub fn rank(&self, symbols: &[Symbol]) -> usize {
        symbols
            .iter()
            .fold(0usize, |acc, &s| acc * self.q as usize + s as usize)
    }

    /// Writes the big-endian digits of `label` into `out`; the caller
    /// guarantees `label < q^out.len()`.
    #[inline]
    pub fn unrank_into(&self, mut label: usize, out: &mut [Symbol]) {
        let q = self.q as usize;
        for slot in out.iter_mut().rev() {
            *slot = (label % q) as Symbol;
            label /= q;
        }
    }

    pub fn unrank(&self, label: usize, len: usize) -> Result<Word> {
        let bound = self.word_count(len).unwrap_or(u128::MAX);
        if label as u128 >= bound {
            return Err(Error::OutOfRange {
                value: label as u128,
                bound,
            });
        }
        let mut symbols = vec![0; len];
        self.unrank_into(label, &mut symbols);
        Ok(Word {
            field: *self,
            symbols,
        })
    }
}

/// A fixed-length word over F_q.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    field: PrimeField,
    symbols: Vec<Symbol>,
}

impl Word {
    pub fn new(field: PrimeField, symbols: Vec<Symbol>) -> Result<Self> {
        if let Some(&bad) = symbols.iter().find(|&&s| !field.contains(s)) {
            return Err(Error::SymbolOutOfRange {
                symbol: bad,
                q: field.q(),
            });
        }
        Ok(Word { field, symbols })
    }

    pub fn zero(field: PrimeField, len: usize) -> Self {
        Word {
            field,
            symbols: vec![0; len],
        }
    }

    /// Parses a word written as concatenated digits (`0121`) or, for
    /// `q > 10`, as whitespace-separated symbols.
    pub fn parse(field: PrimeField, text: &str) -> Result<Self> {
        let text = text.trim();
        let symbols: Vec<Symbol> = if text.contains(char::is_whitespace) || field.q() > 10 {
            text.split_whitespace()
                .map(|t| {
                    t.parse::<Symbol>()
                        .map_err(|_| Error::Format(format!("bad symbol {t:?}")))
                })
                .collect::<Result<_>>()?
        } else {
            text.chars()
                .map(|c| {
                    c.to_digit(10)
                        .ok_or_else(|| Error::Format(format!("bad symbol {c:?} in {text:?}")))
                })
                .collect::<Result<_>>()?
        };
        Word::new(field, symbols)
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.symbols
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.field.rank(&self.symbols)
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        weight(&self.symbols)
    }

    /// Hamming distance.
    pub fn distance(&self, other: &Word) -> Result<usize> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(distance(&self.symbols, &other.symbols))
    }

    pub fn add(&self, other: &Word) -> Result<Word> {
        self.zip_with(other, |f, a, b| f.add(a, b))
    }

    pub fn sub(&self, other: &Word) -> Result<Word> {
        self.zip_with(other, |f, a, b| f.sub(a, b))
    }

    fn zip_with(
        &self,
        other: &Word,
        op: impl Fn(&PrimeField, Symbol, Symbol) -> Symbol,
    ) -> Result<Word> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        let symbols = self
            .symbols
            .iter()
            .zip(&other.symbols)
            .map(|(&a, &b)| op(&self.field, a, b))
            .collect();
        Ok(Word {
            field: self.field,
            symbols,
        })
    }

    pub fn neg(&self) -> Word {
        Word {
            field: self.field,
            symbols: self.symbols.iter().map(|&a| self.field.neg(a)).collect(),
        }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut symbols = self.symbols.clone();
        symbols.extend_from_slice(&other.symbols);
        Word {
            field: self.field,
            symbols,
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.q() <= 10 {
            for s in &self.symbols {
                write!(f, "{s}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.symbols.iter().map(|s| s.to_string()).collect();
            f.write_str(&parts.join(" "))
        }
    }
}

/// Number of nonzero symbols.
#[inline]
pub fn weight(symbols: &[Symbol]) -> usize {
    symbols.iter().filter(|&&s| s != 0).count()
}

/// Number of positions where the slices differ; slices must be equal length.
#[inline]
pub fn distance(a: &[Symbol], b: &[Symbol]) -> usize {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}
