//! Finite group presentations and the constructions used by the density
//! arguments: free products, HNN extensions, and amalgams over cyclic words.
//!
//! These produce presentations only. No normal-form machinery for the
//! constructed groups is attempted; the bounded word-problem search in
//! [`super::fp`] is the only way to interrogate them.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

use crate::word::{Base, Letter, Word};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PresentationError {
    #[error("presentations need at least one generator")]
    NoGenerators,
    #[error("relator '{0}' contains constants")]
    RelatorHasConstants(String),
    #[error("relator '{word}' uses x{used} but only {generators} generators exist")]
    ArityOverflow { word: String, used: u32, generators: u32 },
}

/// `generators` many generators x1..xk and a finite set of cyclically
/// reduced, constant-free relator words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    generators: u32,
    relators: Vec<Word>,
}

impl Presentation {
    /// Relators are cyclically reduced and deduplicated; empty relators are
    /// dropped.
    pub fn new<I: IntoIterator<Item = Word>>(
        generators: u32,
        relators: I,
    ) -> Result<Presentation, PresentationError> {
        if generators == 0 {
            return Err(PresentationError::NoGenerators);
        }
        let mut set = BTreeSet::new();
        for r in relators {
            if r.has_constants() {
                return Err(PresentationError::RelatorHasConstants(r.render()));
            }
            if r.arity() > generators {
                return Err(PresentationError::ArityOverflow {
                    word: r.render(),
                    used: r.arity(),
                    generators,
                });
            }
            let r = r.cyclically_reduced();
            if !r.is_empty() {
                set.insert(r);
            }
        }
        Ok(Presentation { generators, relators: set.into_iter().collect() })
    }

    pub fn free(rank: u32) -> Presentation {
        Presentation::new(rank, Vec::new()).expect("free presentation")
    }

    pub fn generators(&self) -> u32 {
        self.generators
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    /// Re-indexes every variable by `+shift`.
    fn shift_word(w: &Word, shift: u32) -> Word {
        Word::from_letters(w.letters().iter().map(|l| match l.base {
            Base::Variable(i) => Letter { base: Base::Variable(i + shift), inverse: l.inverse },
            Base::Constant(_) => unreachable!("relators are constant-free"),
        }))
    }

    /// Disjoint-union generators; the second factor's generators are shifted
    /// past the first factor's.
    pub fn free_product(&self, other: &Presentation) -> Presentation {
        let relators = self
            .relators
            .iter()
            .cloned()
            .chain(other.relators.iter().map(|r| Self::shift_word(r, self.generators)));
        Presentation::new(self.generators + other.generators, relators)
            .expect("free product of valid presentations")
    }

    /// Adds a stable letter t = x_{k+1} with relator t^-1 g t h^-1.
    ///
    /// The construction is an honest HNN extension only when g and h have
    /// infinite order; that hypothesis is the caller's obligation and is not
    /// checkable here.
    pub fn hnn_extension(&self, g: &Word, h: &Word) -> Result<Presentation, PresentationError> {
        for w in [g, h] {
            if w.has_constants() {
                return Err(PresentationError::RelatorHasConstants(w.render()));
            }
            if w.arity() > self.generators {
                return Err(PresentationError::ArityOverflow {
                    word: w.render(),
                    used: w.arity(),
                    generators: self.generators,
                });
            }
        }
        let t = Word::generator(self.generators + 1);
        let relator = t.inverse().concat(g).concat(&t).concat(&h.inverse());
        let relators = self.relators.iter().cloned().chain(std::iter::once(relator));
        Presentation::new(self.generators + 1, relators)
    }

    /// Free product amalgamated over wA = wB: relator wA * shift(wB)^-1.
    pub fn amalgam(
        &self,
        word_a: &Word,
        other: &Presentation,
        word_b: &Word,
    ) -> Result<Presentation, PresentationError> {
        for (w, k) in [(word_a, self.generators), (word_b, other.generators)] {
            if w.has_constants() {
                return Err(PresentationError::RelatorHasConstants(w.render()));
            }
            if w.arity() > k {
                return Err(PresentationError::ArityOverflow {
                    word: w.render(),
                    used: w.arity(),
                    generators: k,
                });
            }
        }
        let product = self.free_product(other);
        let glue = word_a.concat(&Self::shift_word(word_b, self.generators).inverse());
        let relators = product.relators.iter().cloned().chain(std::iter::once(glue));
        Presentation::new(product.generators, relators)
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<x1..x{} | ", self.generators)?;
        for (i, r) in self.relators.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ">")
    }
}

/// On-disk form: `{"generators": k, "relators": ["x1^2", ...]}`.
#[derive(Serialize, Deserialize)]
pub struct PresentationFile {
    pub generators: u32,
    pub relators: Vec<Word>,
}

impl PresentationFile {
    pub fn validate(self) -> Result<Presentation, PresentationError> {
        Presentation::new(self.generators, self.relators)
    }
}

impl From<&Presentation> for PresentationFile {
    fn from(p: &Presentation) -> Self {
        PresentationFile { generators: p.generators, relators: p.relators.to_vec() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::parse_word;

    fn w(s: &str) -> Word {
        parse_word(s).unwrap()
    }

    #[test]
    fn free_product_shifts_second_factor() {
        let a = Presentation::new(1, vec![w("x1^2")]).unwrap();
        let b = Presentation::new(1, vec![w("x1^3")]).unwrap();
        let p = a.free_product(&b);
        assert_eq!(p.generators(), 2);
        assert_eq!(p.relators(), &[w("x1^2"), w("x2^3")]);

        let free = Presentation::free(2).free_product(&Presentation::free(3));
        assert_eq!(free.generators(), 5);
        assert!(free.relators().is_empty());
    }

    #[test]
    fn hnn_adds_stable_letter() {
        let p = Presentation::free(1);
        let bs = p.hnn_extension(&w("x1"), &w("x1^-1")).unwrap();
        assert_eq!(bs.generators(), 2);
        assert_eq!(bs.relators(), &[w("x2^-1*x1*x2*x1")]);

        let z2 = p.hnn_extension(&w("x1"), &w("x1")).unwrap();
        assert_eq!(z2.relators(), &[w("x2^-1*x1*x2*x1^-1")]);

        let q = Presentation::new(1, vec![w("x1^2")]).unwrap();
        let ext = q.hnn_extension(&w("x1"), &w("x1")).unwrap();
        assert!(ext.relators().contains(&w("x1^2")));
    }

    #[test]
    fn hnn_rejects_arity_overflow() {
        let p = Presentation::free(1);
        assert!(matches!(
            p.hnn_extension(&w("x2"), &w("x1")),
            Err(PresentationError::ArityOverflow { .. })
        ));
    }

    #[test]
    fn amalgam_glues_words() {
        let z = Presentation::free(1);
        let p = z.amalgam(&w("x1"), &z, &w("x1")).unwrap();
        assert_eq!(p.generators(), 2);
        assert_eq!(p.relators(), &[w("x1*x2^-1")]);

        let a = Presentation::new(1, vec![w("x1^2")]).unwrap();
        let b = Presentation::new(2, vec![w("x2^3")]).unwrap();
        let p = a.amalgam(&w("x1"), &b, &w("x1*x2")).unwrap();
        assert_eq!(p.generators(), 3);
        assert!(p.relators().contains(&w("x1^2")));
        assert!(p.relators().contains(&w("x3^3")));
        assert!(p.relators().contains(&w("x1*x3^-1*x2^-1")));
    }

    #[test]
    fn relators_are_cyclically_reduced() {
        let p = Presentation::new(2, vec![w("x2*x1^2*x2^-1")]).unwrap();
        assert_eq!(p.relators(), &[w("x1^2")]);
    }

    #[test]
    fn json_round_trip() {
        let p = Presentation::new(2, vec![w("x1^2"), w("x1*x2*x1^-1*x2^-1")]).unwrap();
        let file = PresentationFile::from(&p);
        let json = serde_json::to_string(&file).unwrap();
        let back: PresentationFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.validate().unwrap(), p);
    }
}
