//! A uniform contract for countable groups with computable structure.
//!
//! Built-in oracles (integers, lattices, free groups, finite tables,
//! Baumslag-Solitar groups BS(1,n), the lamplighter) work on canonical forms
//! and decide equality outright. Finitely presented oracles only semi-decide
//! equality, so the shared `eq` is three-valued with certificates on every
//! definite answer.

pub mod elem;
pub mod fp;
pub mod presentation;
pub mod table;

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

use crate::verdict::Verdict;
use crate::word::{Base, Equation, Polarity, System, Word};
pub use elem::{BsNormal, Elem, FreeWord, LampElem};
pub use fp::{Derivation, FpOracle, SeparatingHom};
pub use presentation::{Presentation, PresentationError};
pub use table::{MulTable, TableError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("element {element} does not belong to oracle {oracle}")]
    ForeignElement { oracle: String, element: String },
    #[error("word uses {letter} but the environment does not map it")]
    UnmappedLetter { letter: String },
    #[error("integer overflow during oracle arithmetic")]
    Overflow,
    #[error("direct sums need at least one factor")]
    EmptySum,
    #[error("unknown builtin group '{0}'")]
    UnknownBuiltin(String),
    #[error("BS(1,n) requires n != 0")]
    BadBsParameter,
    #[error("oracle {oracle} has fewer than {requested} elements")]
    InsufficientElements { oracle: String, requested: u32 },
    #[error("operation requires an exact oracle, {0} is not")]
    NotExact(String),
    #[error("marking length {got} does not match, expected {expected}")]
    MarkingLength { got: usize, expected: usize },
}

/// Proof side of a definite equality answer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EqProof {
    /// Equal canonical forms in an exact oracle.
    Canonical,
    /// Relator derivation in a finitely presented oracle.
    Derivation(Derivation),
    /// Componentwise proofs in a direct sum.
    Components(Vec<EqProof>),
}

/// Refutation side of a definite inequality answer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EqRefutation {
    /// Distinct canonical forms in an exact oracle.
    Canonical,
    /// Finite quotient separating the two words.
    Quotient(SeparatingHom),
    /// Refutation in one component of a direct sum.
    Component { index: usize, refutation: Box<EqRefutation> },
}

pub type EqVerdict = Verdict<EqProof, EqRefutation>;

/// A countable group with canonical forms for its elements.
#[derive(Clone, Debug)]
pub enum GroupOracle {
    Trivial,
    /// The integers under addition.
    Integers,
    /// Z^d with componentwise addition.
    Lattice(u32),
    /// Free group of the given rank; elements are reduced words.
    Free(u32),
    /// Finite group from a validated multiplication table.
    Table(MulTable),
    /// BS(1,n) = < a, t | t a t^-1 = a^n >, n != 0.
    BaumslagSolitar(i64),
    /// Z/2 wr Z: finitely supported lamp sets with a shift.
    Lamplighter,
    /// Componentwise direct sum.
    DirectSum(Vec<GroupOracle>),
    /// Finitely presented group with bounded equality search.
    Fp(FpOracle),
}

fn checked_add(a: i64, b: i64) -> Result<i64, OracleError> {
    a.checked_add(b).ok_or(OracleError::Overflow)
}

/// n^j with overflow detection.
fn checked_pow(n: i64, j: u32) -> Result<i64, OracleError> {
    n.checked_pow(j).ok_or(OracleError::Overflow)
}

fn bs_normalize(n: i64, mut tneg: i64, mut apow: i64, mut tpos: i64) -> Result<Elem, OracleError> {
    while tneg > 0 && tpos > 0 && apow % n == 0 {
        apow /= n;
        tneg -= 1;
        tpos -= 1;
    }
    Ok(Elem::Bs(BsNormal {
        tneg: u32::try_from(tneg).map_err(|_| OracleError::Overflow)?,
        apow,
        tpos: u32::try_from(tpos).map_err(|_| OracleError::Overflow)?,
    }))
}

fn bs_mul(n: i64, x: &BsNormal, y: &BsNormal) -> Result<Elem, OracleError> {
    // t^-p1 a^m1 t^q1 * t^-p2 a^m2 t^q2 with the middle t-run merged.
    let middle = i64::from(x.tpos) - i64::from(y.tneg);
    if middle >= 0 {
        // t^j a^m2 = a^(m2 n^j) t^j
        let shifted = y.apow.checked_mul(checked_pow(n, middle as u32)?).ok_or(OracleError::Overflow)?;
        bs_normalize(
            n,
            i64::from(x.tneg),
            checked_add(x.apow, shifted)?,
            checked_add(middle, i64::from(y.tpos))?,
        )
    } else {
        // a^m1 t^-j = t^-j a^(m1 n^j)
        let j = (-middle) as u32;
        let shifted = x.apow.checked_mul(checked_pow(n, j)?).ok_or(OracleError::Overflow)?;
        bs_normalize(
            n,
            checked_add(i64::from(x.tneg), i64::from(j))?,
            checked_add(shifted, y.apow)?,
            i64::from(y.tpos),
        )
    }
}

fn bs_auto_mul(n: i64, t1: i64, a1: i64, t2: i64, a2: i64) -> Result<Elem, OracleError> {
    // (t^t1 a^a1)(t^t2 a^a2) = t^(t1+t2) a^(a1 n^t2 + a2) for n = +-1.
    let sign = if n == 1 || t2.rem_euclid(2) == 0 { 1 } else { -1 };
    let apow = checked_add(a1.checked_mul(sign).ok_or(OracleError::Overflow)?, a2)?;
    Ok(Elem::BsAuto { tpow: checked_add(t1, t2)?, apow })
}

impl GroupOracle {
    pub fn cyclic(n: u32) -> GroupOracle {
        GroupOracle::Table(MulTable::cyclic(n))
    }

    pub fn fp(presentation: Presentation, bound: u64) -> GroupOracle {
        GroupOracle::Fp(FpOracle::new(presentation, bound))
    }

    pub fn baumslag_solitar(n: i64) -> Result<GroupOracle, OracleError> {
        if n == 0 {
            return Err(OracleError::BadBsParameter);
        }
        Ok(GroupOracle::BaumslagSolitar(n))
    }

    pub fn direct_sum(factors: Vec<GroupOracle>) -> Result<GroupOracle, OracleError> {
        if factors.is_empty() {
            return Err(OracleError::EmptySum);
        }
        Ok(GroupOracle::DirectSum(factors))
    }

    /// Builtin names without file references: `trivial`, `Z`, `Z^d`, `Z/n`,
    /// `Fk`, `BS(1,n)`, `lamplighter`.
    pub fn parse_builtin(spec: &str) -> Result<GroupOracle, OracleError> {
        let s = spec.trim();
        if s == "trivial" {
            return Ok(GroupOracle::Trivial);
        }
        if s == "Z" {
            return Ok(GroupOracle::Integers);
        }
        if s == "lamplighter" {
            return Ok(GroupOracle::Lamplighter);
        }
        if let Some(d) = s.strip_prefix("Z^") {
            if let Ok(d) = d.parse::<u32>() {
                if d >= 1 {
                    return Ok(GroupOracle::Lattice(d));
                }
            }
        }
        if let Some(n) = s.strip_prefix("Z/") {
            if let Ok(n) = n.parse::<u32>() {
                if n >= 1 {
                    return Ok(GroupOracle::cyclic(n));
                }
            }
        }
        if let Some(k) = s.strip_prefix('F').or_else(|| s.strip_prefix("F_")) {
            if let Ok(k) = k.trim_start_matches('_').parse::<u32>() {
                if k >= 1 {
                    return Ok(GroupOracle::Free(k));
                }
            }
        }
        if let Some(rest) = s.strip_prefix("BS(1,") {
            if let Some(n) = rest.strip_suffix(')') {
                if let Ok(n) = n.trim().parse::<i64>() {
                    return GroupOracle::baumslag_solitar(n);
                }
            }
        }
        Err(OracleError::UnknownBuiltin(s.to_string()))
    }

    pub fn name(&self) -> String {
        match self {
            GroupOracle::Trivial => "trivial".into(),
            GroupOracle::Integers => "Z".into(),
            GroupOracle::Lattice(d) => format!("Z^{d}"),
            GroupOracle::Free(k) => format!("F{k}"),
            GroupOracle::Table(t) => t.name().to_string(),
            GroupOracle::BaumslagSolitar(n) => format!("BS(1,{n})"),
            GroupOracle::Lamplighter => "lamplighter".into(),
            GroupOracle::DirectSum(fs) => {
                let names: Vec<String> = fs.iter().map(|f| f.name()).collect();
                names.join(" + ")
            }
            GroupOracle::Fp(o) => format!("fp{}", o.presentation()),
        }
    }

    /// Exact oracles never answer Unknown.
    pub fn is_exact(&self) -> bool {
        match self {
            GroupOracle::Fp(_) => false,
            GroupOracle::DirectSum(fs) => fs.iter().all(GroupOracle::is_exact),
            _ => true,
        }
    }

    pub fn order(&self) -> Option<u64> {
        match self {
            GroupOracle::Trivial => Some(1),
            GroupOracle::Table(t) => Some(u64::from(t.order())),
            GroupOracle::DirectSum(fs) => {
                fs.iter().map(GroupOracle::order).try_fold(1u64, |acc, o| Some(acc * o?))
            }
            _ => None,
        }
    }

    pub fn identity(&self) -> Elem {
        match self {
            GroupOracle::Trivial => Elem::Unit,
            GroupOracle::Integers => Elem::Int(0),
            GroupOracle::Lattice(d) => Elem::Vector(vec![0; *d as usize]),
            GroupOracle::Free(_) | GroupOracle::Fp(_) => Elem::Word(Vec::new()),
            GroupOracle::Table(t) => Elem::Index(t.identity()),
            GroupOracle::BaumslagSolitar(n) => {
                if n.abs() == 1 {
                    Elem::BsAuto { tpow: 0, apow: 0 }
                } else {
                    Elem::Bs(BsNormal { tneg: 0, apow: 0, tpos: 0 })
                }
            }
            GroupOracle::Lamplighter => Elem::Lamp(LampElem::default()),
            GroupOracle::DirectSum(fs) => Elem::Tuple(fs.iter().map(|f| f.identity()).collect()),
        }
    }

    /// Default ordered generating tuple.
    pub fn marking(&self) -> Vec<Elem> {
        match self {
            GroupOracle::Trivial => Vec::new(),
            GroupOracle::Integers => vec![Elem::Int(1)],
            GroupOracle::Lattice(d) => (0..*d as usize)
                .map(|i| {
                    let mut v = vec![0; *d as usize];
                    v[i] = 1;
                    Elem::Vector(v)
                })
                .collect(),
            GroupOracle::Free(k) => (1..=*k).map(|g| Elem::Word(vec![(g, false)])).collect(),
            GroupOracle::Table(t) => t.marking().iter().map(|&g| Elem::Index(g)).collect(),
            GroupOracle::BaumslagSolitar(n) => {
                if n.abs() == 1 {
                    vec![Elem::BsAuto { tpow: 0, apow: 1 }, Elem::BsAuto { tpow: 1, apow: 0 }]
                } else {
                    vec![
                        Elem::Bs(BsNormal { tneg: 0, apow: 1, tpos: 0 }),
                        Elem::Bs(BsNormal { tneg: 0, apow: 0, tpos: 1 }),
                    ]
                }
            }
            GroupOracle::Lamplighter => vec![
                Elem::Lamp(LampElem { lamps: [0].into_iter().collect(), shift: 0 }),
                Elem::Lamp(LampElem { lamps: Default::default(), shift: 1 }),
            ],
            GroupOracle::DirectSum(fs) => {
                let mut out = Vec::new();
                for (i, f) in fs.iter().enumerate() {
                    for g in f.marking() {
                        let mut tuple: Vec<Elem> = fs.iter().map(|h| h.identity()).collect();
                        tuple[i] = g;
                        out.push(Elem::Tuple(tuple));
                    }
                }
                out
            }
            GroupOracle::Fp(o) => {
                (1..=o.generators()).map(|g| Elem::Word(vec![(g, false)])).collect()
            }
        }
    }

    /// Canonical-form membership check.
    pub fn contains(&self, e: &Elem) -> bool {
        match (self, e) {
            (GroupOracle::Trivial, Elem::Unit) => true,
            (GroupOracle::Integers, Elem::Int(_)) => true,
            (GroupOracle::Lattice(d), Elem::Vector(v)) => v.len() == *d as usize,
            (GroupOracle::Free(k), Elem::Word(w)) => {
                let reduced = elem::reduce_free_word(w.iter().copied()) == *w;
                reduced && w.iter().all(|&(g, _)| g >= 1 && g <= *k)
            }
            (GroupOracle::Fp(o), Elem::Word(w)) => {
                let reduced = elem::reduce_free_word(w.iter().copied()) == *w;
                reduced && w.iter().all(|&(g, _)| g >= 1 && g <= o.generators())
            }
            (GroupOracle::Table(t), Elem::Index(i)) => *i < t.order(),
            (GroupOracle::BaumslagSolitar(n), Elem::Bs(b)) => {
                n.abs() >= 2 && !(b.tneg > 0 && b.tpos > 0 && b.apow % *n == 0)
            }
            (GroupOracle::BaumslagSolitar(n), Elem::BsAuto { .. }) => n.abs() == 1,
            (GroupOracle::Lamplighter, Elem::Lamp(_)) => true,
            (GroupOracle::DirectSum(fs), Elem::Tuple(es)) => {
                fs.len() == es.len() && fs.iter().zip(es).all(|(f, e)| f.contains(e))
            }
            _ => false,
        }
    }

    fn foreign(&self, e: &Elem) -> OracleError {
        OracleError::ForeignElement { oracle: self.name(), element: e.to_string() }
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Result<Elem, OracleError> {
        match (self, a, b) {
            (GroupOracle::Trivial, Elem::Unit, Elem::Unit) => Ok(Elem::Unit),
            (GroupOracle::Integers, Elem::Int(x), Elem::Int(y)) => Ok(Elem::Int(checked_add(*x, *y)?)),
            (GroupOracle::Lattice(d), Elem::Vector(x), Elem::Vector(y))
                if x.len() == *d as usize && y.len() == *d as usize =>
            {
                let mut out = Vec::with_capacity(x.len());
                for (u, v) in x.iter().zip(y) {
                    out.push(checked_add(*u, *v)?);
                }
                Ok(Elem::Vector(out))
            }
            (GroupOracle::Free(_), Elem::Word(x), Elem::Word(y))
            | (GroupOracle::Fp(_), Elem::Word(x), Elem::Word(y)) => {
                Ok(Elem::Word(elem::free_word_concat(x, y)))
            }
            (GroupOracle::Table(t), Elem::Index(x), Elem::Index(y))
                if *x < t.order() && *y < t.order() =>
            {
                Ok(Elem::Index(t.mul(*x, *y)))
            }
            (GroupOracle::BaumslagSolitar(n), Elem::Bs(x), Elem::Bs(y)) if n.abs() >= 2 => {
                bs_mul(*n, x, y)
            }
            (
                GroupOracle::BaumslagSolitar(n),
                Elem::BsAuto { tpow: t1, apow: a1 },
                Elem::BsAuto { tpow: t2, apow: a2 },
            ) if n.abs() == 1 => bs_auto_mul(*n, *t1, *a1, *t2, *a2),
            (GroupOracle::Lamplighter, Elem::Lamp(x), Elem::Lamp(y)) => {
                let mut lamps = x.lamps.clone();
                for &p in &y.lamps {
                    let q = checked_add(p, x.shift)?;
                    if !lamps.remove(&q) {
                        lamps.insert(q);
                    }
                }
                Ok(Elem::Lamp(LampElem { lamps, shift: checked_add(x.shift, y.shift)? }))
            }
            (GroupOracle::DirectSum(fs), Elem::Tuple(xs), Elem::Tuple(ys))
                if fs.len() == xs.len() && fs.len() == ys.len() =>
            {
                let mut out = Vec::with_capacity(fs.len());
                for ((f, x), y) in fs.iter().zip(xs).zip(ys) {
                    out.push(f.mul(x, y)?);
                }
                Ok(Elem::Tuple(out))
            }
            _ => {
                let bad = if self.contains(a) { b } else { a };
                Err(self.foreign(bad))
            }
        }
    }

    pub fn inv(&self, a: &Elem) -> Result<Elem, OracleError> {
        match (self, a) {
            (GroupOracle::Trivial, Elem::Unit) => Ok(Elem::Unit),
            (GroupOracle::Integers, Elem::Int(x)) => {
                Ok(Elem::Int(x.checked_neg().ok_or(OracleError::Overflow)?))
            }
            (GroupOracle::Lattice(d), Elem::Vector(x)) if x.len() == *d as usize => {
                let mut out = Vec::with_capacity(x.len());
                for v in x {
                    out.push(v.checked_neg().ok_or(OracleError::Overflow)?);
                }
                Ok(Elem::Vector(out))
            }
            (GroupOracle::Free(_), Elem::Word(x)) | (GroupOracle::Fp(_), Elem::Word(x)) => {
                Ok(Elem::Word(elem::free_word_inverse(x)))
            }
            (GroupOracle::Table(t), Elem::Index(x)) if *x < t.order() => {
                Ok(Elem::Index(t.inv(*x)))
            }
            (GroupOracle::BaumslagSolitar(n), Elem::Bs(x)) if n.abs() >= 2 => {
                // (t^-p a^m t^q)^-1 = t^-q a^-m t^p
                bs_normalize(
                    *n,
                    i64::from(x.tpos),
                    x.apow.checked_neg().ok_or(OracleError::Overflow)?,
                    i64::from(x.tneg),
                )
            }
            (GroupOracle::BaumslagSolitar(n), Elem::BsAuto { tpow, apow }) if n.abs() == 1 => {
                // (t^s a^m)^-1 = a^-m t^-s = t^-s a^(-m n^s)
                let sign = if *n == 1 || tpow.rem_euclid(2) == 0 { 1 } else { -1 };
                Ok(Elem::BsAuto {
                    tpow: tpow.checked_neg().ok_or(OracleError::Overflow)?,
                    apow: apow
                        .checked_neg()
                        .and_then(|m| m.checked_mul(sign))
                        .ok_or(OracleError::Overflow)?,
                })
            }
            (GroupOracle::Lamplighter, Elem::Lamp(x)) => {
                let mut lamps = std::collections::BTreeSet::new();
                for &p in &x.lamps {
                    lamps.insert(p.checked_sub(x.shift).ok_or(OracleError::Overflow)?);
                }
                Ok(Elem::Lamp(LampElem {
                    lamps,
                    shift: x.shift.checked_neg().ok_or(OracleError::Overflow)?,
                }))
            }
            (GroupOracle::DirectSum(fs), Elem::Tuple(xs)) if fs.len() == xs.len() => {
                let mut out = Vec::with_capacity(fs.len());
                for (f, x) in fs.iter().zip(xs) {
                    out.push(f.inv(x)?);
                }
                Ok(Elem::Tuple(out))
            }
            _ => Err(self.foreign(a)),
        }
    }

    /// Three-valued equality. Exact oracles compare canonical forms and never
    /// answer Unknown; finitely presented oracles run the bounded search;
    /// direct sums take the Unknown-propagating conjunction.
    pub fn eq(&self, a: &Elem, b: &Elem) -> Result<EqVerdict, OracleError> {
        match self {
            GroupOracle::Fp(o) => match (a, b) {
                (Elem::Word(u), Elem::Word(v)) => Ok(match o.eq_words(u, v) {
                    Verdict::Yes { certificate, bound } => {
                        Verdict::Yes { certificate: EqProof::Derivation(certificate), bound }
                    }
                    Verdict::No { certificate, bound } => {
                        Verdict::No { certificate: EqRefutation::Quotient(certificate), bound }
                    }
                    Verdict::Unknown { bound } => Verdict::Unknown { bound },
                }),
                _ => Err(self.foreign(if matches!(a, Elem::Word(_)) { b } else { a })),
            },
            GroupOracle::DirectSum(fs) => match (a, b) {
                (Elem::Tuple(xs), Elem::Tuple(ys))
                    if fs.len() == xs.len() && fs.len() == ys.len() =>
                {
                    let mut proofs = Vec::with_capacity(fs.len());
                    let mut unknown_bound: Option<u64> = None;
                    for (i, ((f, x), y)) in fs.iter().zip(xs).zip(ys).enumerate() {
                        match f.eq(x, y)? {
                            Verdict::Yes { certificate, .. } => proofs.push(certificate),
                            Verdict::No { certificate, bound } => {
                                return Ok(Verdict::No {
                                    certificate: EqRefutation::Component {
                                        index: i,
                                        refutation: Box::new(certificate),
                                    },
                                    bound,
                                });
                            }
                            Verdict::Unknown { bound } => {
                                unknown_bound =
                                    Some(unknown_bound.map_or(bound, |b0| b0.max(bound)));
                            }
                        }
                    }
                    Ok(match unknown_bound {
                        Some(bound) => Verdict::Unknown { bound },
                        None => Verdict::Yes { certificate: EqProof::Components(proofs), bound: 0 },
                    })
                }
                _ => Err(self.foreign(if matches!(a, Elem::Tuple(_)) { b } else { a })),
            },
            _ => {
                if !self.contains(a) {
                    return Err(self.foreign(a));
                }
                if !self.contains(b) {
                    return Err(self.foreign(b));
                }
                Ok(if a == b {
                    Verdict::Yes { certificate: EqProof::Canonical, bound: 0 }
                } else {
                    Verdict::No { certificate: EqRefutation::Canonical, bound: 0 }
                })
            }
        }
    }

    /// Definite equality for exact oracles.
    pub fn eq_exact(&self, a: &Elem, b: &Elem) -> Result<bool, OracleError> {
        if !self.is_exact() {
            return Err(OracleError::NotExact(self.name()));
        }
        Ok(self.eq(a, b)?.is_yes())
    }

    /// All elements of a finite oracle in canonical order.
    pub fn elements(&self) -> Option<Vec<Elem>> {
        match self {
            GroupOracle::Trivial => Some(vec![Elem::Unit]),
            GroupOracle::Table(t) => Some((0..t.order()).map(Elem::Index).collect()),
            GroupOracle::DirectSum(fs) => {
                let factor_elems: Option<Vec<Vec<Elem>>> =
                    fs.iter().map(GroupOracle::elements).collect();
                let factor_elems = factor_elems?;
                let mut out: Vec<Vec<Elem>> = vec![Vec::new()];
                for pool in &factor_elems {
                    let mut next = Vec::with_capacity(out.len() * pool.len());
                    for prefix in &out {
                        for e in pool {
                            let mut t = prefix.clone();
                            t.push(e.clone());
                            next.push(t);
                        }
                    }
                    out = next;
                }
                Some(out.into_iter().map(Elem::Tuple).collect())
            }
            _ => None,
        }
    }

    /// All elements of canonical-form size at most `bound`, sorted by
    /// (size, canonical order).
    pub fn elements_up_to_size(&self, bound: u64) -> Vec<Elem> {
        let mut out = match self {
            GroupOracle::Trivial => vec![Elem::Unit],
            GroupOracle::Integers => {
                let b = bound as i64;
                (-b..=b).map(Elem::Int).collect()
            }
            GroupOracle::Lattice(d) => {
                let mut out = Vec::new();
                let mut current = vec![0i64; *d as usize];
                fn rec(
                    pos: usize,
                    left: i64,
                    current: &mut Vec<i64>,
                    out: &mut Vec<Elem>,
                ) {
                    if pos == current.len() {
                        out.push(Elem::Vector(current.clone()));
                        return;
                    }
                    for v in -left..=left {
                        current[pos] = v;
                        rec(pos + 1, left - v.abs(), current, out);
                    }
                    current[pos] = 0;
                }
                rec(0, bound as i64, &mut current, &mut out);
                out
            }
            GroupOracle::Free(k) => free_words_up_to(*k, bound as usize),
            GroupOracle::Fp(o) => free_words_up_to(o.generators(), bound as usize),
            GroupOracle::Table(t) => (0..t.order()).map(Elem::Index).collect(),
            GroupOracle::BaumslagSolitar(n) if n.abs() == 1 => {
                let b = bound as i64;
                let mut out = Vec::new();
                for t in -b..=b {
                    let left = b - t.abs();
                    for a in -left..=left {
                        out.push(Elem::BsAuto { tpow: t, apow: a });
                    }
                }
                out
            }
            GroupOracle::BaumslagSolitar(n) => {
                let b = bound as i64;
                let mut out = Vec::new();
                for p in 0..=b {
                    for q in 0..=(b - p) {
                        let left = b - p - q;
                        for m in -left..=left {
                            if p > 0 && q > 0 && m % n == 0 {
                                continue;
                            }
                            out.push(Elem::Bs(BsNormal {
                                tneg: p as u32,
                                apow: m,
                                tpos: q as u32,
                            }));
                        }
                    }
                }
                out
            }
            GroupOracle::Lamplighter => {
                let b = bound as i64;
                let mut out = Vec::new();
                let positions: Vec<i64> = (-b..=b).collect();
                fn rec(
                    positions: &[i64],
                    idx: usize,
                    left: i64,
                    lamps: &mut Vec<i64>,
                    out: &mut Vec<std::collections::BTreeSet<i64>>,
                ) {
                    out.push(lamps.iter().copied().collect());
                    for i in idx..positions.len() {
                        let cost = positions[i].abs() + 1;
                        if cost <= left {
                            lamps.push(positions[i]);
                            rec(positions, i + 1, left - cost, lamps, out);
                            lamps.pop();
                        }
                    }
                }
                let mut supports = Vec::new();
                rec(&positions, 0, b, &mut Vec::new(), &mut supports);
                for lamps in supports {
                    let weight: i64 = lamps.iter().map(|p| p.abs() + 1).sum();
                    for shift in -(b - weight)..=(b - weight) {
                        out.push(Elem::Lamp(LampElem { lamps: lamps.clone(), shift }));
                    }
                }
                out
            }
            GroupOracle::DirectSum(fs) => {
                let mut tuples: Vec<Vec<Elem>> = vec![Vec::new()];
                for f in fs {
                    let pool = f.elements_up_to_size(bound);
                    let mut next = Vec::new();
                    for prefix in &tuples {
                        let used: u64 = prefix.iter().map(Elem::size).sum();
                        for e in &pool {
                            if used + e.size() <= bound {
                                let mut t = prefix.clone();
                                t.push(e.clone());
                                next.push(t);
                            }
                        }
                    }
                    tuples = next;
                }
                tuples.into_iter().map(Elem::Tuple).collect()
            }
        };
        out.sort_by(|a, b| a.size().cmp(&b.size()).then_with(|| a.cmp(b)));
        out.dedup();
        out
    }

    /// The first `n` elements in the canonical enumeration (by size, then
    /// canonical order). Element 1 is always the identity.
    pub fn enumerate_first(&self, n: u32) -> Result<Vec<Elem>, OracleError> {
        if let Some(order) = self.order() {
            if u64::from(n) > order {
                return Err(OracleError::InsufficientElements {
                    oracle: self.name(),
                    requested: n,
                });
            }
        }
        let mut size = 0u64;
        loop {
            let pool = self.elements_up_to_size(size);
            if pool.len() >= n as usize {
                return Ok(pool.into_iter().take(n as usize).collect());
            }
            size += 1;
            if size > 10_000 {
                return Err(OracleError::InsufficientElements {
                    oracle: self.name(),
                    requested: n,
                });
            }
        }
    }
}

fn free_words_up_to(rank: u32, max_len: usize) -> Vec<Elem> {
    let mut out: Vec<FreeWord> = vec![Vec::new()];
    let mut frontier: Vec<FreeWord> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for g in 1..=rank {
                for inv in [false, true] {
                    if let Some(&(lg, linv)) = w.last() {
                        if lg == g && linv != inv {
                            continue;
                        }
                    }
                    let mut v = w.clone();
                    v.push((g, inv));
                    next.push(v);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out.into_iter().map(Elem::Word).collect()
}

impl fmt::Display for GroupOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Interpretation environment mapping variables and constants to elements.
#[derive(Clone, Debug, Default)]
pub struct Env {
    vars: BTreeMap<u32, Elem>,
    consts: BTreeMap<u32, Elem>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    /// Maps x1..xn to the marking elements in order.
    pub fn from_marking(marking: &[Elem]) -> Env {
        let vars = marking.iter().enumerate().map(|(i, e)| (i as u32 + 1, e.clone())).collect();
        Env { vars, consts: BTreeMap::new() }
    }

    pub fn bind_var(&mut self, index: u32, value: Elem) {
        self.vars.insert(index, value);
    }

    pub fn bind_const(&mut self, value: u32, elem: Elem) {
        self.consts.insert(value, elem);
    }

    pub fn lookup(&self, base: Base) -> Option<&Elem> {
        match base {
            Base::Variable(i) => self.vars.get(&i),
            Base::Constant(c) => self.consts.get(&c),
        }
    }
}

/// Evaluates a word in the oracle: the product of the mapped letters in
/// order, exponent signs applied. The empty word is the identity.
pub fn evaluate(oracle: &GroupOracle, word: &Word, env: &Env) -> Result<Elem, OracleError> {
    let mut acc = oracle.identity();
    for l in word.letters() {
        let value = env.lookup(l.base).ok_or_else(|| OracleError::UnmappedLetter {
            letter: match l.base {
                Base::Variable(i) => format!("x{i}"),
                Base::Constant(c) => format!("c{c}"),
            },
        })?;
        let value = if l.inverse { oracle.inv(value)? } else { value.clone() };
        acc = oracle.mul(&acc, &value)?;
    }
    Ok(acc)
}

pub type SatVerdict = Verdict<(), Equation>;

/// Clopen-basis membership: Yes iff every Equal clause evaluates to the
/// identity and every NotEqual clause does not. The first definitely violated
/// clause refutes; otherwise Unknowns from `eq` propagate.
pub fn satisfies(oracle: &GroupOracle, system: &System, env: &Env) -> Result<SatVerdict, OracleError> {
    let identity = oracle.identity();
    let mut unknown_bound: Option<u64> = None;
    for clause in system.clauses() {
        let value = evaluate(oracle, &clause.word, env)?;
        let eq = oracle.eq(&value, &identity)?;
        let violated = match (clause.polarity, &eq) {
            (Polarity::Equal, Verdict::No { .. }) => true,
            (Polarity::NotEqual, Verdict::Yes { .. }) => true,
            _ => false,
        };
        if violated {
            return Ok(Verdict::No { certificate: clause.clone(), bound: eq.bound() });
        }
        if eq.is_unknown() {
            unknown_bound = Some(unknown_bound.map_or(eq.bound(), |b| b.max(eq.bound())));
        }
    }
    Ok(match unknown_bound {
        Some(bound) => Verdict::Unknown { bound },
        None => Verdict::Yes { certificate: (), bound: 0 },
    })
}

/// A group with an ordered finite generating tuple. Whether the marking
/// actually generates is the caller's assertion; it is not checkable in
/// general.
#[derive(Clone, Debug)]
pub struct MarkedGroup {
    pub oracle: GroupOracle,
    pub marking: Vec<Elem>,
}

impl MarkedGroup {
    pub fn new(oracle: GroupOracle, marking: Vec<Elem>) -> Result<MarkedGroup, OracleError> {
        for e in &marking {
            if !oracle.contains(e) {
                let err = OracleError::ForeignElement {
                    oracle: oracle.name(),
                    element: e.to_string(),
                };
                return Err(err);
            }
        }
        Ok(MarkedGroup { oracle, marking })
    }

    /// Marks the oracle with its default generating tuple.
    pub fn with_default_marking(oracle: GroupOracle) -> MarkedGroup {
        let marking = oracle.marking();
        MarkedGroup { oracle, marking }
    }

    pub fn env(&self) -> Env {
        Env::from_marking(&self.marking)
    }
}

/// Certificate that the search space for an embedding test was exhausted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExhaustedSearch {
    pub pool: u64,
}

pub type EmbedVerdict = Verdict<Vec<Elem>, ExhaustedSearch>;

/// Checks whether the multiplication-table system of G's first `size`
/// elements (equations for the products that land among those elements,
/// inequations for pairwise distinctness) has a solution in H. The search
/// runs over tuples of H-elements of canonical-form size at most `bound`, in
/// lexicographic order, so the first solution found is the canonically least
/// one. Exhaustion refutes only when H is finite and was fully searched.
pub fn embeds_via_systems(
    g: &GroupOracle,
    h: &GroupOracle,
    size: u32,
    bound: u64,
) -> Result<EmbedVerdict, OracleError> {
    if !g.is_exact() {
        return Err(OracleError::NotExact(g.name()));
    }
    let elems = g.enumerate_first(size)?;
    let mut products: Vec<(usize, usize, usize)> = Vec::new();
    for i in 0..elems.len() {
        for j in 0..elems.len() {
            let p = g.mul(&elems[i], &elems[j])?;
            if let Some(k) = elems.iter().position(|e| *e == p) {
                products.push((i, j, k));
            }
        }
    }
    let pool = match h.elements() {
        Some(all) => all,
        None => h.elements_up_to_size(bound),
    };
    let exhaustive = h.order().is_some();

    // Depth-first over assignment prefixes, constraints checked as soon as
    // every index they mention is assigned.
    let n = elems.len();
    let mut assignment: Vec<usize> = Vec::with_capacity(n);
    loop {
        if assignment.len() == n {
            return Ok(Verdict::Yes {
                certificate: assignment.iter().map(|&i| pool[i].clone()).collect(),
                bound,
            });
        }
        let mut candidate = 0usize;
        'place: loop {
            if candidate >= pool.len() {
                // Backtrack.
                loop {
                    match assignment.pop() {
                        None => {
                            return Ok(if exhaustive {
                                Verdict::No {
                                    certificate: ExhaustedSearch { pool: pool.len() as u64 },
                                    bound,
                                }
                            } else {
                                Verdict::Unknown { bound }
                            });
                        }
                        Some(prev) => {
                            if prev + 1 < pool.len() {
                                candidate = prev + 1;
                                break;
                            }
                        }
                    }
                }
            }
            let pos = assignment.len();
            assignment.push(candidate);
            let ok = check_prefix(g, h, &elems, &products, &pool, &assignment, pos)?;
            if ok {
                break 'place;
            }
            assignment.pop();
            candidate += 1;
        }
    }
}

fn check_prefix(
    _g: &GroupOracle,
    h: &GroupOracle,
    elems: &[Elem],
    products: &[(usize, usize, usize)],
    pool: &[Elem],
    assignment: &[usize],
    newest: usize,
) -> Result<bool, OracleError> {
    let len = assignment.len();
    // Distinctness with everything before the newest slot.
    for other in 0..newest {
        if h.eq(&pool[assignment[other]], &pool[assignment[newest]])?.is_yes() {
            return Ok(false);
        }
    }
    let _ = elems;
    for &(i, j, k) in products {
        if i >= len || j >= len || k >= len {
            continue;
        }
        if i != newest && j != newest && k != newest {
            continue;
        }
        let prod = h.mul(&pool[assignment[i]], &pool[assignment[j]])?;
        if !h.eq(&prod, &pool[assignment[k]])?.is_yes() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::{parse_word, CoefficientAssignment};

    fn w(s: &str) -> Word {
        parse_word(s).unwrap()
    }

    #[test]
    fn abelian_commutator_is_identity() {
        let oracle = GroupOracle::Lattice(2);
        let mut env = Env::new();
        env.bind_var(1, Elem::Vector(vec![3, -1]));
        env.bind_var(2, Elem::Vector(vec![5, 7]));
        let value = evaluate(&oracle, &w("x1*x2*x1^-1*x2^-1"), &env).unwrap();
        assert_eq!(value, oracle.identity());
    }

    #[test]
    fn empty_word_evaluates_to_identity() {
        let oracle = GroupOracle::Integers;
        assert_eq!(evaluate(&oracle, &Word::empty(), &Env::new()).unwrap(), Elem::Int(0));
    }

    #[test]
    fn powers_in_the_integers() {
        let oracle = GroupOracle::Integers;
        let mut env = Env::new();
        env.bind_var(1, Elem::Int(5));
        assert_eq!(evaluate(&oracle, &w("x1^3"), &env).unwrap(), Elem::Int(15));
    }

    #[test]
    fn unmapped_letter_is_an_error() {
        let oracle = GroupOracle::Integers;
        assert!(matches!(
            evaluate(&oracle, &w("x1"), &Env::new()),
            Err(OracleError::UnmappedLetter { .. })
        ));
    }

    #[test]
    fn satisfies_in_the_integers() {
        let oracle = GroupOracle::Integers;
        let system = System::new(vec![Equation::equal(w("x1"))]);
        let mut env = Env::new();
        env.bind_var(1, Elem::Int(0));
        assert!(satisfies(&oracle, &system, &env).unwrap().is_yes());

        let mut env = Env::new();
        env.bind_var(1, Elem::Int(2));
        match satisfies(&oracle, &system, &env).unwrap() {
            Verdict::No { certificate, .. } => assert_eq!(certificate, Equation::equal(w("x1"))),
            other => panic!("expected No, got {other:?}"),
        }
    }

    #[test]
    fn satisfies_unknown_under_tiny_fp_bound() {
        let p = Presentation::new(1, vec![w("x1^60")]).unwrap();
        let oracle = GroupOracle::fp(p, 2);
        let system = System::new(vec![Equation::equal(w("x1"))]);
        let mut env = Env::new();
        env.bind_var(1, Elem::Word(vec![(1, false); 120]));
        assert!(satisfies(&oracle, &system, &env).unwrap().is_unknown());
    }

    #[test]
    fn bs_minus_one_conjugation_inverts() {
        let oracle = GroupOracle::baumslag_solitar(-1).unwrap();
        let marking = oracle.marking();
        let (a, b) = (&marking[0], &marking[1]);
        let conj = oracle.mul(&oracle.mul(b, a).unwrap(), &oracle.inv(b).unwrap()).unwrap();
        assert_eq!(conj, oracle.inv(a).unwrap());
    }

    #[test]
    fn bs_general_normal_form_round_trips() {
        let oracle = GroupOracle::baumslag_solitar(2).unwrap();
        let marking = oracle.marking();
        let (a, t) = (&marking[0], &marking[1]);
        // t a t^-1 = a^2
        let lhs = oracle
            .mul(&oracle.mul(t, a).unwrap(), &oracle.inv(t).unwrap())
            .unwrap();
        assert_eq!(lhs, oracle.mul(a, a).unwrap());
        // t^-1 a t is not a power of a: stays in normal form.
        let down = oracle.mul(&oracle.mul(&oracle.inv(t).unwrap(), a).unwrap(), t).unwrap();
        assert_eq!(down, Elem::Bs(BsNormal { tneg: 1, apow: 1, tpos: 1 }));
    }

    #[test]
    fn lattice_mul() {
        let oracle = GroupOracle::Lattice(2);
        let s = oracle.mul(&Elem::Vector(vec![1, 0]), &Elem::Vector(vec![0, 1])).unwrap();
        assert_eq!(s, Elem::Vector(vec![1, 1]));
    }

    #[test]
    fn direct_sum_componentwise() {
        let oracle =
            GroupOracle::direct_sum(vec![GroupOracle::Integers, GroupOracle::cyclic(2)]).unwrap();
        let a = Elem::Tuple(vec![Elem::Int(3), Elem::Index(1)]);
        let b = Elem::Tuple(vec![Elem::Int(4), Elem::Index(1)]);
        assert_eq!(
            oracle.mul(&a, &b).unwrap(),
            Elem::Tuple(vec![Elem::Int(7), Elem::Index(0)])
        );
    }

    #[test]
    fn direct_sum_eq_propagates_unknown() {
        let p = Presentation::new(1, vec![w("x1^60")]).unwrap();
        let sum =
            GroupOracle::direct_sum(vec![GroupOracle::Integers, GroupOracle::fp(p, 2)]).unwrap();
        let x = Elem::Tuple(vec![Elem::Int(0), Elem::Word(vec![(1, false); 120])]);
        let id = sum.identity();
        assert!(sum.eq(&x, &id).unwrap().is_unknown());
        // A definite mismatch in the exact component wins.
        let y = Elem::Tuple(vec![Elem::Int(1), Elem::Word(vec![(1, false); 120])]);
        assert!(sum.eq(&y, &id).unwrap().is_no());
    }

    #[test]
    fn lamplighter_relations() {
        let oracle = GroupOracle::Lamplighter;
        let marking = oracle.marking();
        let (a, t) = (&marking[0], &marking[1]);
        // a has order 2
        assert_eq!(oracle.mul(a, a).unwrap(), oracle.identity());
        // t a t^-1 flips the lamp at position 1
        let conj = oracle
            .mul(&oracle.mul(t, a).unwrap(), &oracle.inv(t).unwrap())
            .unwrap();
        assert_eq!(conj, Elem::Lamp(LampElem { lamps: [1].into_iter().collect(), shift: 0 }));
        // t a and a t differ
        assert_ne!(oracle.mul(t, a).unwrap(), oracle.mul(a, t).unwrap());
    }

    #[test]
    fn parse_builtin_specs() {
        assert!(matches!(GroupOracle::parse_builtin("Z"), Ok(GroupOracle::Integers)));
        assert!(matches!(GroupOracle::parse_builtin("Z^2"), Ok(GroupOracle::Lattice(2))));
        assert!(matches!(GroupOracle::parse_builtin("F2"), Ok(GroupOracle::Free(2))));
        assert!(matches!(
            GroupOracle::parse_builtin("BS(1,-1)"),
            Ok(GroupOracle::BaumslagSolitar(-1))
        ));
        assert!(matches!(GroupOracle::parse_builtin("lamplighter"), Ok(GroupOracle::Lamplighter)));
        assert!(GroupOracle::parse_builtin("Z/6").is_ok());
        assert!(GroupOracle::parse_builtin("nonsense").is_err());
    }

    #[test]
    fn enumerate_integers_zigzag() {
        let oracle = GroupOracle::Integers;
        let first = oracle.enumerate_first(5).unwrap();
        assert_eq!(
            first,
            vec![Elem::Int(0), Elem::Int(-1), Elem::Int(1), Elem::Int(-2), Elem::Int(2)]
        );
    }

    #[test]
    fn embeds_z2_in_z4() {
        let g = GroupOracle::cyclic(2);
        let h = GroupOracle::cyclic(4);
        match embeds_via_systems(&g, &h, 2, 8).unwrap() {
            Verdict::Yes { certificate, .. } => {
                assert_eq!(certificate, vec![Elem::Index(0), Elem::Index(2)]);
            }
            other => panic!("expected Yes, got {other:?}"),
        }
    }

    #[test]
    fn z3_does_not_embed_in_z4() {
        let g = GroupOracle::cyclic(3);
        let h = GroupOracle::cyclic(4);
        assert!(embeds_via_systems(&g, &h, 3, 8).unwrap().is_no());
    }

    #[test]
    fn nine_distinct_integers_do_not_fit_in_z4() {
        let g = GroupOracle::Integers;
        let h = GroupOracle::cyclic(4);
        assert!(embeds_via_systems(&g, &h, 9, 8).unwrap().is_no());
    }

    #[test]
    fn substitution_then_env_consts() {
        let oracle = GroupOracle::Integers;
        let system = System::new(vec![Equation::equal(w("x1*x2*x1^-1*x2^-1"))]);
        let instance = system.substitute(&CoefficientAssignment::from_values(&[1, 2])).unwrap();
        let mut env = Env::new();
        env.bind_const(1, Elem::Int(11));
        env.bind_const(2, Elem::Int(-4));
        assert!(satisfies(&oracle, &instance, &env).unwrap().is_yes());
    }
}
