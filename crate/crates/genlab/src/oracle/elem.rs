//! Canonical element forms for the built-in oracles.
//!
//! Every built-in group has a canonical representation, so equality of
//! canonical forms decides equality of elements. Finitely presented oracles
//! reuse `FreeWord`: there the canonical form is only canonical for the free
//! group on the generators, which is exactly why their equality test is
//! three-valued.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

use crate::word::{Base, Letter, Word};

/// Reduced word over group generators, stored as (1-based index, inverted).
pub type FreeWord = Vec<(u32, bool)>;

/// Normal form in BS(1,n) = < a, t | t a t^-1 = a^n > for |n| >= 2:
/// the element t^-(tneg) a^(apow) t^(tpos), with n not dividing apow
/// whenever both t-exponents are positive.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BsNormal {
    pub tneg: u32,
    pub apow: i64,
    pub tpos: u32,
}

/// Lamplighter element: finitely supported lamp set and a shift.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LampElem {
    pub lamps: BTreeSet<i64>,
    pub shift: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Elem {
    /// The unique element of the trivial group.
    Unit,
    /// Integer under addition.
    Int(i64),
    /// Element of Z^d.
    Vector(Vec<i64>),
    /// Row index into a finite multiplication table.
    Index(u32),
    /// Reduced word in a free or finitely presented group.
    Word(FreeWord),
    /// Torsion-free Baumslag-Solitar normal form, |n| >= 2.
    Bs(BsNormal),
    /// Solvable Baumslag-Solitar normal form t^tpow a^apow, n = 1 or -1.
    BsAuto { tpow: i64, apow: i64 },
    /// Lamplighter normal form.
    Lamp(LampElem),
    /// Component tuple of a direct sum.
    Tuple(Vec<Elem>),
}

impl Elem {
    /// Size measure used for bounded element enumeration.
    pub fn size(&self) -> u64 {
        match self {
            Elem::Unit => 0,
            Elem::Int(n) => n.unsigned_abs(),
            Elem::Vector(v) => v.iter().map(|c| c.unsigned_abs()).sum(),
            Elem::Index(_) => 0,
            Elem::Word(w) => w.len() as u64,
            Elem::Bs(b) => u64::from(b.tneg) + u64::from(b.tpos) + b.apow.unsigned_abs(),
            Elem::BsAuto { tpow, apow } => tpow.unsigned_abs() + apow.unsigned_abs(),
            Elem::Lamp(l) => {
                l.shift.unsigned_abs() + l.lamps.iter().map(|p| p.unsigned_abs() + 1).sum::<u64>()
            }
            Elem::Tuple(es) => es.iter().map(Elem::size).sum(),
        }
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elem::Unit => write!(f, "1"),
            Elem::Int(n) => write!(f, "{n}"),
            Elem::Vector(v) => {
                write!(f, "(")?;
                for (i, c) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
            Elem::Index(i) => write!(f, "#{i}"),
            Elem::Word(w) => write!(f, "{}", free_word_to_word(w).render()),
            Elem::Bs(b) => {
                if b.tneg == 0 && b.apow == 0 && b.tpos == 0 {
                    return write!(f, "e");
                }
                let mut parts = Vec::new();
                if b.tneg > 0 {
                    parts.push(format!("t^-{}", b.tneg));
                }
                if b.apow != 0 {
                    parts.push(format!("a^{}", b.apow));
                }
                if b.tpos > 0 {
                    parts.push(format!("t^{}", b.tpos));
                }
                write!(f, "{}", parts.join("*"))
            }
            Elem::BsAuto { tpow, apow } => {
                if *tpow == 0 && *apow == 0 {
                    return write!(f, "e");
                }
                let mut parts = Vec::new();
                if *tpow != 0 {
                    parts.push(format!("t^{tpow}"));
                }
                if *apow != 0 {
                    parts.push(format!("a^{apow}"));
                }
                write!(f, "{}", parts.join("*"))
            }
            Elem::Lamp(l) => {
                write!(f, "{{")?;
                for (i, p) in l.lamps.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, "}};{:+}", l.shift)
            }
            Elem::Tuple(es) => {
                write!(f, "(")?;
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Freely reduces a generator-letter sequence.
pub fn reduce_free_word<I: IntoIterator<Item = (u32, bool)>>(letters: I) -> FreeWord {
    let mut stack: FreeWord = Vec::new();
    for (g, inv) in letters {
        match stack.last() {
            Some(&(top, top_inv)) if top == g && top_inv != inv => {
                stack.pop();
            }
            _ => stack.push((g, inv)),
        }
    }
    stack
}

pub fn free_word_inverse(w: &FreeWord) -> FreeWord {
    w.iter().rev().map(|&(g, inv)| (g, !inv)).collect()
}

pub fn free_word_concat(a: &FreeWord, b: &FreeWord) -> FreeWord {
    reduce_free_word(a.iter().chain(b.iter()).copied())
}

/// Converts a constant-free [`Word`] into a generator word.
pub fn word_to_free_word(w: &Word) -> Option<FreeWord> {
    let mut out = Vec::with_capacity(w.len());
    for l in w.letters() {
        match l.base {
            Base::Variable(i) => out.push((i, l.inverse)),
            Base::Constant(_) => return None,
        }
    }
    Some(out)
}

pub fn free_word_to_word(w: &FreeWord) -> Word {
    Word::from_letters(w.iter().map(|&(g, inv)| Letter { base: Base::Variable(g), inverse: inv }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(Elem::Int(-4).size(), 4);
        assert_eq!(Elem::Vector(vec![1, -2]).size(), 3);
        assert_eq!(Elem::Word(vec![(1, false), (2, true)]).size(), 2);
        assert_eq!(
            Elem::Lamp(LampElem { lamps: [0, 2].into_iter().collect(), shift: -1 }).size(),
            5
        );
    }

    #[test]
    fn free_word_reduction() {
        let w = reduce_free_word(vec![(1, false), (2, false), (2, true), (1, true)]);
        assert!(w.is_empty());
        let w = reduce_free_word(vec![(1, false), (2, false), (1, true)]);
        assert_eq!(w, vec![(1, false), (2, false), (1, true)]);
    }
}
