//! Reduced words in a finite-rank free group.
//!
//! Letters are nonzero machine integers `i` with `|i| <= alphabet`; a
//! negative letter is the inverse of the corresponding positive one. Words
//! are kept freely reduced at all times, and the alphabet size is a runtime
//! parameter so the same type serves the ambient group, basis coordinates,
//! and generator indices alike.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    alphabet: usize,
    letters: Vec<i32>,
}

impl std::fmt::Debug for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Word(")?;
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let strs: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", strs.join(" "))
    }
}

fn push_reduced(out: &mut Vec<i32>, l: i32) {
    if out.last() == Some(&-l) {
        out.pop();
    } else {
        out.push(l);
    }
}

impl Word {
    /// Builds a word, freely reducing the letter sequence.
    pub fn new(alphabet: usize, letters: impl IntoIterator<Item = i32>) -> Self {
        let mut out = Vec::new();
        for l in letters {
            assert!(
                l != 0 && l.unsigned_abs() as usize <= alphabet,
                "letter {l} outside alphabet of size {alphabet}"
            );
            push_reduced(&mut out, l);
        }
        Word {
            alphabet,
            letters: out,
        }
    }

    pub fn identity(alphabet: usize) -> Self {
        Word {
            alphabet,
            letters: Vec::new(),
        }
    }

    /// The `i`-th generator (1-based).
    pub fn generator(alphabet: usize, i: usize) -> Self {
        assert!(i >= 1 && i <= alphabet);
        Word {
            alphabet,
            letters: vec![i as i32],
        }
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn mul(&self, other: &Word) -> Word {
        assert_eq!(self.alphabet, other.alphabet, "alphabet mismatch");
        let mut out = self.letters.clone();
        for &l in &other.letters {
            push_reduced(&mut out, l);
        }
        Word {
            alphabet: self.alphabet,
            letters: out,
        }
    }

    pub fn inverse(&self) -> Word {
        Word {
            alphabet: self.alphabet,
            letters: self.letters.iter().rev().map(|l| -l).collect(),
        }
    }

    pub fn pow(&self, k: i64) -> Word {
        let (base, k) = if k < 0 {
            (self.inverse(), -k)
        } else {
            (self.clone(), k)
        };
        let mut out = Word::identity(self.alphabet);
        for _ in 0..k {
            out = out.mul(&base);
        }
        out
    }

    /// Exponent-sum vector in `Z^alphabet`.
    pub fn abelianize(&self) -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); self.alphabet];
        for &l in &self.letters {
            let i = l.unsigned_abs() as usize - 1;
            if l > 0 {
                v[i] += 1;
            } else {
                v[i] -= 1;
            }
        }
        v
    }

    /// Image under the homomorphism sending generator `i` to `images[i-1]`.
    pub fn substitute(&self, images: &[Word]) -> Word {
        assert_eq!(
            images.len(),
            self.alphabet,
            "one image per generator required"
        );
        let target = images.first().map_or(0, |w| w.alphabet);
        let mut out = Word::identity(target);
        for &l in &self.letters {
            let img = &images[l.unsigned_abs() as usize - 1];
            out = if l > 0 {
                out.mul(img)
            } else {
                out.mul(&img.inverse())
            };
        }
        out
    }

    /// Splits off the conjugating part: `w = p c p^{-1}` with `c` cyclically
    /// reduced. Returns `(p, c)`.
    pub fn cyclic_reduce(&self) -> (Word, Word) {
        let mut letters = self.letters.clone();
        let mut prefix = Vec::new();
        while letters.len() >= 2 && letters.first() == letters.last().map(|l| -l).as_ref() {
            prefix.push(letters.remove(0));
            letters.pop();
        }
        (
            Word {
                alphabet: self.alphabet,
                letters: prefix,
            },
            Word {
                alphabet: self.alphabet,
                letters,
            },
        )
    }

    /// Writes `w = root^exponent` with the root primitive (not a proper
    /// power) and `exponent >= 1`; the root carries the orientation.
    pub fn primitive_root(&self) -> Result<RootDecomposition> {
        if self.is_identity() {
            return Err(Error::IdentityWord);
        }
        let (p, c) = self.cyclic_reduce();
        let period = smallest_period(&c.letters);
        let (block, exponent) = if c.letters.len() % period == 0 {
            (
                c.letters[..period].to_vec(),
                (c.letters.len() / period) as i64,
            )
        } else {
            (c.letters.clone(), 1)
        };
        let core = Word {
            alphabet: self.alphabet,
            letters: block,
        };
        let root = p.mul(&core).mul(&p.inverse());
        debug_assert_eq!(root.pow(exponent), *self);
        Ok(RootDecomposition { root, exponent })
    }

    /// True when the word is not a proper power (and not the identity).
    pub fn is_primitive(&self) -> bool {
        self.primitive_root()
            .map(|r| r.exponent == 1)
            .unwrap_or(false)
    }

    /// Parses the text form: whitespace-separated signed letters, empty for
    /// the identity.
    pub fn parse(alphabet: usize, text: &str) -> std::result::Result<Word, String> {
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            let l: i32 = tok.parse().map_err(|_| format!("bad letter {tok:?}"))?;
            if l == 0 || l.unsigned_abs() as usize > alphabet {
                return Err(format!("letter {l} outside alphabet of size {alphabet}"));
            }
            letters.push(l);
        }
        Ok(Word::new(alphabet, letters))
    }
}

/// Smallest period of a letter sequence (border-array method).
fn smallest_period(s: &[i32]) -> usize {
    let n = s.len();
    if n == 0 {
        return 1;
    }
    // border[i] = length of the longest proper border of s[..i]
    let mut border = vec![0usize; n + 1];
    let mut k = 0usize;
    for i in 1..n {
        while k > 0 && s[i] != s[k] {
            k = border[k];
        }
        if s[i] == s[k] {
            k += 1;
        }
        border[i + 1] = k;
    }
    n - border[n]
}

/// A word written as a power of a primitive root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootDecomposition {
    pub root: Word,
    /// Always >= 1; the root absorbs the orientation.
    pub exponent: i64,
}
