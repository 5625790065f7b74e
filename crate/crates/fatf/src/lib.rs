//! Exact computation in free-abelian times free groups `G = Z^m x F_n`.
//!
//! The crate provides, over arbitrary-precision integers:
//!
//! * [`intlin`] — Smith/Hermite normal forms, integer kernels, Diophantine
//!   solving, and row-lattice arithmetic (saturation, complements, quotients);
//! * [`words`] — reduced words in a finite-rank free group, abelianization,
//!   and primitive-root extraction;
//! * [`stallings`] — subgroup calculus in `F_n` via folded labeled graphs:
//!   membership, free bases, pullback intersections, and abelianization
//!   preimages through coset automata;
//! * [`group`] — elements, endomorphisms, and subgroup bases of `Z^m x F_n`;
//! * [`fix`] — fixed subgroups of stable-letter endomorphisms and of families
//!   of (Q, P)-constraints over a given free part, with a finite-generation
//!   decision;
//! * [`closure`] — endo-fixed closures: the closed-form abelian case, the
//!   non-abelian reduction to finitely many constraint pairs, the endo-fixed
//!   decision, and a bounded brute-force stabilizer enumeration used as a
//!   testing oracle.

pub mod closure;
pub mod fix;
pub mod group;
pub mod intlin;
pub mod stallings;
pub mod words;

use thiserror::Error;

/// Errors reported by the library.
///
/// Contract violations that cannot arise from well-formed documents
/// (mismatched ambient dimensions between two elements, for instance)
/// panic instead; everything reachable from user input is an `Error`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("the identity word has no primitive root")]
    IdentityWord,
    #[error("all inputs to the gcd certificate are zero")]
    ZeroGcdInput,
    #[error("lattice is not a direct summand of its ambient group")]
    NotSaturated,
    #[error("lattice has infinite index in its ambient group")]
    InfiniteIndex,
    #[error("stable letter must be a nontrivial word that is not a proper power")]
    InvalidStableLetter,
    #[error("the exponent vector of a stable-letter endomorphism must be nonzero")]
    ZeroStableVector,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("operation requires an abelian subgroup")]
    NotAbelian,
    #[error("operation requires a non-abelian subgroup")]
    Abelian,
    #[error("a free-part oracle is required for non-abelian subgroups")]
    MissingOracle,
    #[error("oracle endomorphism {index} does not fix the projection basis")]
    OracleNotStabilizing { index: usize },
    #[error("oracle fixed-basis word {word_index} is not fixed by endomorphism {index}")]
    OracleFixMismatch { index: usize, word_index: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
