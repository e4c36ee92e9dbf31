//! Words over variables and constants, free reduction, substitution, and
//! finite systems of equations/inequations.
//!
//! A word is a freely reduced sequence of signed letters. Letters are either
//! variables `x1, x2, ...` or natural-number constants `c1, c2, ...`; both
//! indices are 1-based. The arity of a word is the largest variable index
//! occurring in it. Systems collect equations `w = e` and inequations
//! `w != e` and may declare an arity larger than any index actually used.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Variable or constant base of a letter. Indices are always >= 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Base {
    Variable(u32),
    Constant(u32),
}

impl Base {
    pub fn index(self) -> u32 {
        match self {
            Base::Variable(i) | Base::Constant(i) => i,
        }
    }

    pub fn is_variable(self) -> bool {
        matches!(self, Base::Variable(_))
    }
}

/// One signed letter of a word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub base: Base,
    /// True for exponent sign -1.
    pub inverse: bool,
}

impl Letter {
    pub fn variable(index: u32) -> Letter {
        assert!(index >= 1, "variable index must be >= 1");
        Letter { base: Base::Variable(index), inverse: false }
    }

    pub fn constant(value: u32) -> Letter {
        assert!(value >= 1, "constant value must be >= 1");
        Letter { base: Base::Constant(value), inverse: false }
    }

    pub fn inv(self) -> Letter {
        Letter { base: self.base, inverse: !self.inverse }
    }

    fn cancels(self, other: Letter) -> bool {
        self.base == other.base && self.inverse != other.inverse
    }
}

/// A freely reduced word. The reduction invariant is maintained by every
/// constructor, so two words are equal in the free group iff they are equal
/// as values.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn empty() -> Word {
        Word { letters: Vec::new() }
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Word {
        let mut stack: Vec<Letter> = Vec::new();
        for l in letters {
            match stack.last() {
                Some(&top) if top.cancels(l) => {
                    stack.pop();
                }
                _ => stack.push(l),
            }
        }
        Word { letters: stack }
    }

    /// Single generator word `x_index`.
    pub fn generator(index: u32) -> Word {
        Word { letters: vec![Letter::variable(index)] }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Largest variable index occurring, 0 if none.
    pub fn arity(&self) -> u32 {
        self.letters
            .iter()
            .filter_map(|l| match l.base {
                Base::Variable(i) => Some(i),
                Base::Constant(_) => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Largest constant value occurring, 0 if none.
    pub fn max_constant(&self) -> u32 {
        self.letters
            .iter()
            .filter_map(|l| match l.base {
                Base::Constant(v) => Some(v),
                Base::Variable(_) => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn constants(&self) -> BTreeSet<u32> {
        self.letters
            .iter()
            .filter_map(|l| match l.base {
                Base::Constant(v) => Some(v),
                Base::Variable(_) => None,
            })
            .collect()
    }

    pub fn has_constants(&self) -> bool {
        self.letters.iter().any(|l| !l.base.is_variable())
    }

    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(|l| l.inv()).collect() }
    }

    /// Concatenation followed by free reduction.
    pub fn concat(&self, other: &Word) -> Word {
        Word::from_letters(self.letters.iter().chain(other.letters.iter()).copied())
    }

    /// Removes matching inverse prefix/suffix pairs: the cyclic reduction of
    /// `u w u^-1` is the cyclic reduction of `w`.
    pub fn cyclically_reduced(&self) -> Word {
        let mut letters = self.letters.clone();
        while letters.len() >= 2 {
            let first = letters[0];
            let last = *letters.last().unwrap();
            if first.cancels(last) {
                letters.remove(0);
                letters.pop();
            } else {
                break;
            }
        }
        Word { letters }
    }

    /// Decomposes the word as `root^k` with maximal `k >= 1`.
    /// The empty word returns (empty, 1).
    pub fn power_decomposition(&self) -> (Word, u32) {
        let n = self.letters.len();
        if n == 0 {
            return (Word::empty(), 1);
        }
        for period in 1..=n / 2 {
            if n % period != 0 {
                continue;
            }
            if (period..n).all(|i| self.letters[i] == self.letters[i - period]) {
                let root = Word { letters: self.letters[..period].to_vec() };
                // A power of a reduced word is reduced only if the root does
                // not cancel against itself; since self is reduced this holds.
                return (root, (n / period) as u32);
            }
        }
        (self.clone(), 1)
    }

    /// Substitutes constants for variables, preserving exponent signs.
    pub fn substitute(&self, assignment: &CoefficientAssignment) -> Result<Word, WordError> {
        let mut out = Vec::with_capacity(self.letters.len());
        for l in &self.letters {
            match l.base {
                Base::Variable(i) => {
                    let value = assignment
                        .get(i)
                        .ok_or(WordError::MissingAssignment { variable: i })?;
                    out.push(Letter { base: Base::Constant(value), inverse: l.inverse });
                }
                Base::Constant(_) => out.push(*l),
            }
        }
        Ok(Word::from_letters(out))
    }

    /// Renders in the grammar accepted by [`Word::from_str`]. Runs of equal
    /// letters are collapsed into exponents.
    pub fn render(&self) -> String {
        if self.letters.is_empty() {
            return "e".to_string();
        }
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        while i < self.letters.len() {
            let l = self.letters[i];
            let mut run = 1;
            while i + run < self.letters.len() && self.letters[i + run] == l {
                run += 1;
            }
            let sym = match l.base {
                Base::Variable(ix) => format!("x{ix}"),
                Base::Constant(v) => format!("c{v}"),
            };
            let exp = if l.inverse { -(run as i64) } else { run as i64 };
            if exp == 1 {
                parts.push(sym);
            } else {
                parts.push(format!("{sym}^{exp}"));
            }
            i += run;
        }
        parts.join("*")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Freely reduces a letter sequence. Idempotent; never lengthens.
pub fn free_reduce<I: IntoIterator<Item = Letter>>(letters: I) -> Word {
    Word::from_letters(letters)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("no assignment for variable x{variable}")]
    MissingAssignment { variable: u32 },
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { text, bytes: text.as_bytes(), pos: 0 }
    }

    fn error(&self, message: impl Into<String>) -> WordError {
        WordError::Syntax { position: self.pos, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn number(&mut self, what: &str) -> Result<u64, WordError> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error(format!("expected {what}")));
        }
        self.text[start..self.pos]
            .parse::<u64>()
            .map_err(|_| self.error(format!("{what} out of range")))
    }

    fn term(&mut self, out: &mut Vec<Letter>) -> Result<(), WordError> {
        let base = match self.peek() {
            Some(b'x') => {
                self.pos += 1;
                let i = self.number("variable index")?;
                if i == 0 {
                    self.pos -= 1;
                    return Err(self.error("variable index must be >= 1"));
                }
                Base::Variable(i as u32)
            }
            Some(b'c') => {
                self.pos += 1;
                let v = self.number("constant value")?;
                if v == 0 {
                    self.pos -= 1;
                    return Err(self.error("constant value must be >= 1"));
                }
                Base::Constant(v as u32)
            }
            _ => return Err(self.error("expected 'x<n>' or 'c<n>'")),
        };
        let mut exponent: i64 = 1;
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let negative = if self.peek() == Some(b'-') {
                self.pos += 1;
                true
            } else {
                false
            };
            let magnitude = self.number("exponent")?;
            if magnitude > 1 << 20 {
                return Err(self.error("exponent too large"));
            }
            exponent = if negative { -(magnitude as i64) } else { magnitude as i64 };
        }
        let letter = Letter { base, inverse: exponent < 0 };
        for _ in 0..exponent.unsigned_abs() {
            out.push(letter);
        }
        Ok(())
    }

    fn word(&mut self) -> Result<Word, WordError> {
        self.skip_ws();
        if self.peek() == Some(b'e') {
            self.pos += 1;
            self.skip_ws();
            if self.pos != self.bytes.len() {
                return Err(self.error("trailing input after 'e'"));
            }
            return Ok(Word::empty());
        }
        let mut letters = Vec::new();
        self.term(&mut letters)?;
        loop {
            self.skip_ws();
            match self.peek() {
                None => break,
                Some(b'*') => {
                    self.pos += 1;
                    self.skip_ws();
                    self.term(&mut letters)?;
                }
                Some(_) => return Err(self.error("expected '*' or end of input")),
            }
        }
        Ok(Word::from_letters(letters))
    }
}

/// Parses the word grammar
/// `term := atom ('^' integer)?; atom := 'x' posint | 'c' posint;
/// word := term ('*' term)* | 'e'` and freely reduces the result.
pub fn parse_word(text: &str) -> Result<Word, WordError> {
    Parser::new(text).word()
}

impl FromStr for Word {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_word(s)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_word(&s).map_err(D::Error::custom)
    }
}

/// Equation `w = e` or inequation `w != e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Equal,
    NotEqual,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Equation {
    pub word: Word,
    pub polarity: Polarity,
}

impl Serialize for Equation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ClauseJson { word: self.word.clone(), eq: self.polarity == Polarity::Equal }
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Equation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let c = ClauseJson::deserialize(deserializer)?;
        Ok(Equation {
            word: c.word,
            polarity: if c.eq { Polarity::Equal } else { Polarity::NotEqual },
        })
    }
}

impl Equation {
    pub fn equal(word: Word) -> Equation {
        Equation { word, polarity: Polarity::Equal }
    }

    pub fn not_equal(word: Word) -> Equation {
        Equation { word, polarity: Polarity::NotEqual }
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.polarity {
            Polarity::Equal => write!(f, "{} = e", self.word),
            Polarity::NotEqual => write!(f, "{} != e", self.word),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ClauseJson {
    word: Word,
    eq: bool,
}

/// A finite set of equations and inequations with a declared arity.
/// The declared arity may exceed the largest variable index used.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct System {
    arity: u32,
    clauses: BTreeSet<Equation>,
}

impl System {
    pub fn new<I: IntoIterator<Item = Equation>>(clauses: I) -> System {
        let clauses: BTreeSet<Equation> = clauses.into_iter().collect();
        let arity = clauses.iter().map(|c| c.word.arity()).max().unwrap_or(0);
        System { arity, clauses }
    }

    /// Declares an explicit arity, which must cover every variable used.
    pub fn with_arity<I: IntoIterator<Item = Equation>>(
        arity: u32,
        clauses: I,
    ) -> Result<System, SystemError> {
        let mut s = System::new(clauses);
        if arity < s.arity {
            return Err(SystemError::ArityTooSmall { declared: arity, used: s.arity });
        }
        s.arity = arity;
        Ok(s)
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn clauses(&self) -> impl Iterator<Item = &Equation> {
        self.clauses.iter()
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn contains(&self, clause: &Equation) -> bool {
        self.clauses.contains(clause)
    }

    /// True if every clause of `other` is a clause of `self`.
    pub fn extends(&self, other: &System) -> bool {
        other.clauses.is_subset(&self.clauses)
    }

    pub fn insert(&mut self, clause: Equation) {
        self.arity = self.arity.max(clause.word.arity());
        self.clauses.insert(clause);
    }

    pub fn union(&self, other: &System) -> System {
        let mut merged = self.clauses.clone();
        merged.extend(other.clauses.iter().cloned());
        let mut s = System::new(merged);
        s.arity = s.arity.max(self.arity).max(other.arity);
        s
    }

    /// All constant values mentioned in any clause.
    pub fn constants(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        for c in &self.clauses {
            out.extend(c.word.constants());
        }
        out
    }

    pub fn has_variables(&self) -> bool {
        self.clauses.iter().any(|c| c.word.arity() > 0)
    }

    /// Clause-wise substitution; polarity preserved. The assignment must be
    /// total on `1..=arity`.
    pub fn substitute(&self, assignment: &CoefficientAssignment) -> Result<System, WordError> {
        for i in 1..=self.arity {
            if assignment.get(i).is_none() {
                return Err(WordError::MissingAssignment { variable: i });
            }
        }
        let mut clauses = BTreeSet::new();
        for c in &self.clauses {
            clauses.insert(Equation { word: c.word.substitute(assignment)?, polarity: c.polarity });
        }
        Ok(System { arity: 0, clauses })
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SystemError {
    #[error("declared arity {declared} is smaller than largest used variable x{used}")]
    ArityTooSmall { declared: u32, used: u32 },
}

#[derive(Serialize, Deserialize)]
struct SystemJson {
    arity: u32,
    clauses: Vec<ClauseJson>,
}

impl Serialize for System {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let clauses = self
            .clauses
            .iter()
            .map(|c| ClauseJson { word: c.word.clone(), eq: c.polarity == Polarity::Equal })
            .collect();
        SystemJson { arity: self.arity, clauses }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for System {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let json = SystemJson::deserialize(deserializer)?;
        let clauses = json.clauses.into_iter().map(|c| Equation {
            word: c.word,
            polarity: if c.eq { Polarity::Equal } else { Polarity::NotEqual },
        });
        System::with_arity(json.arity, clauses).map_err(D::Error::custom)
    }
}

/// Total map from variable indices `1..=n` to positive constants.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoefficientAssignment {
    map: BTreeMap<u32, u32>,
}

impl CoefficientAssignment {
    pub fn new() -> CoefficientAssignment {
        CoefficientAssignment { map: BTreeMap::new() }
    }

    /// Assigns `x_i -> c_{values[i-1]}` in order.
    pub fn from_values(values: &[u32]) -> CoefficientAssignment {
        let map = values.iter().enumerate().map(|(i, &v)| (i as u32 + 1, v)).collect();
        CoefficientAssignment { map }
    }

    pub fn assign(&mut self, variable: u32, value: u32) {
        assert!(variable >= 1 && value >= 1);
        self.map.insert(variable, value);
    }

    pub fn get(&self, variable: u32) -> Option<u32> {
        self.map.get(&variable).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        parse_word(s).unwrap()
    }

    #[test]
    fn parse_identity_cases() {
        assert_eq!(w("x1*x1^-1"), Word::empty());
        assert_eq!(w("e"), Word::empty());
        assert_eq!(w("x1*x2*x2^-1*x1"), w("x1^2"));
    }

    #[test]
    fn arity_is_max_variable_index() {
        assert_eq!(w("x3*x1^-1").arity(), 3);
        assert_eq!(w("c5*c7").arity(), 0);
        assert_eq!(Word::empty().arity(), 0);
    }

    #[test]
    fn parse_rejects_index_zero() {
        assert!(matches!(parse_word("x0"), Err(WordError::Syntax { .. })));
        assert!(matches!(parse_word("c0*x1"), Err(WordError::Syntax { .. })));
    }

    #[test]
    fn parse_reports_position() {
        match parse_word("x1*y2") {
            Err(WordError::Syntax { position, .. }) => assert_eq!(position, 3),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn exponents_expand() {
        assert_eq!(w("x1^3"), Word::from_letters(vec![Letter::variable(1); 3]));
        assert_eq!(w("x2^-2").inverse(), w("x2^2"));
        assert_eq!(w("x1^0"), Word::empty());
    }

    #[test]
    fn free_reduce_examples() {
        let a = Letter::variable(1);
        let b = Letter::variable(2);
        assert_eq!(free_reduce(vec![a, a.inv()]), Word::empty());
        assert_eq!(free_reduce(vec![a, b, b.inv(), a.inv()]), Word::empty());
        assert_eq!(free_reduce(vec![a, b, a.inv()]), w("x1*x2*x1^-1"));
    }

    #[test]
    fn substitute_examples() {
        let assignment = CoefficientAssignment::from_values(&[3, 7]);
        assert_eq!(w("x1*x2*x1^-1").substitute(&assignment).unwrap(), w("c3*c7*c3^-1"));
        assert_eq!(Word::empty().substitute(&assignment).unwrap(), Word::empty());
        assert_eq!(w("c5").substitute(&assignment).unwrap(), w("c5"));
        assert_eq!(
            w("x1*x3").substitute(&assignment),
            Err(WordError::MissingAssignment { variable: 3 })
        );
    }

    #[test]
    fn system_substitute_examples() {
        let s = System::new(vec![Equation::equal(w("x1"))]);
        let out = s.substitute(&CoefficientAssignment::from_values(&[4])).unwrap();
        assert_eq!(out, System::new(vec![Equation::equal(w("c4"))]));

        let s = System::new(vec![Equation::not_equal(w("x1*x2"))]);
        let out = s.substitute(&CoefficientAssignment::from_values(&[1, 2])).unwrap();
        assert_eq!(out, System::new(vec![Equation::not_equal(w("c1*c2"))]));

        assert_eq!(
            System::default().substitute(&CoefficientAssignment::new()).unwrap(),
            System::default()
        );
    }

    #[test]
    fn system_declared_arity() {
        let s = System::with_arity(5, vec![Equation::equal(w("x2"))]).unwrap();
        assert_eq!(s.arity(), 5);
        assert!(System::with_arity(1, vec![Equation::equal(w("x2"))]).is_err());
    }

    #[test]
    fn system_json_round_trip() {
        let s = System::with_arity(
            3,
            vec![Equation::equal(w("x1*x2^-1")), Equation::not_equal(w("x3^2"))],
        )
        .unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<System>(&json).unwrap(), s);
    }

    #[test]
    fn cyclic_reduction() {
        assert_eq!(w("x1*x2*x1^-1").cyclically_reduced(), w("x2"));
        assert_eq!(w("x1*x2").cyclically_reduced(), w("x1*x2"));
        assert_eq!(Word::empty().cyclically_reduced(), Word::empty());
    }

    #[test]
    fn power_decomposition_finds_roots() {
        assert_eq!(w("x1^4").power_decomposition(), (w("x1"), 4));
        let (root, k) = w("x1*x2*x1*x2").power_decomposition();
        assert_eq!((root, k), (w("x1*x2"), 2));
        assert_eq!(w("x1*x2").power_decomposition(), (w("x1*x2"), 1));
    }

    fn arb_letter() -> impl Strategy<Value = Letter> {
        (0u32..3, 1u32..4, any::<bool>()).prop_map(|(kind, i, inverse)| Letter {
            base: if kind == 0 { Base::Constant(i) } else { Base::Variable(i) },
            inverse,
        })
    }

    proptest! {
        #[test]
        fn reduce_is_idempotent(letters in proptest::collection::vec(arb_letter(), 0..24)) {
            let once = free_reduce(letters.clone());
            let twice = free_reduce(once.letters().to_vec());
            prop_assert_eq!(&once, &twice);
            prop_assert!(once.len() <= letters.len());
            let reduced_input = once.len() == letters.len();
            prop_assert_eq!(reduced_input, once.letters() == letters.as_slice());
        }

        #[test]
        fn render_parse_round_trip(letters in proptest::collection::vec(arb_letter(), 0..24)) {
            let word = free_reduce(letters);
            prop_assert_eq!(parse_word(&word.render()).unwrap(), word);
        }

        #[test]
        fn substitution_commutes_with_concat(
            u in proptest::collection::vec(arb_letter(), 0..12),
            v in proptest::collection::vec(arb_letter(), 0..12),
        ) {
            let assignment = CoefficientAssignment::from_values(&[5, 6, 7]);
            let u = free_reduce(u);
            let v = free_reduce(v);
            let lhs = u.concat(&v).substitute(&assignment).unwrap();
            let rhs = u.substitute(&assignment).unwrap().concat(&v.substitute(&assignment).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }
}
