//! Bounded semi-decision of the word problem for finitely presented groups.
//!
//! Equality u = v is attacked from both sides:
//!
//! * a breadth-first search of the normal closure of the relators, grown by
//!   inserting relators into already-derived words; reaching u*v^-1 yields a
//!   derivation certificate (a product of conjugated relators),
//! * a search for a homomorphism onto a symmetric group of small degree that
//!   kills every relator but separates u from v, which certifies u != v.
//!
//! Neither side is complete, so the verdict is three-valued. All search
//! orders are fixed, so verdicts and certificates are deterministic and
//! monotone in the bound: a definite answer at bound B is returned unchanged
//! at every larger bound.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Mutex;

use super::elem::{
    free_word_concat, free_word_inverse, free_word_to_word, reduce_free_word, word_to_free_word,
    FreeWord,
};
use super::presentation::Presentation;
use crate::verdict::Verdict;
use crate::word::Word;

/// One conjugated relator c * r^(+-1) * c^-1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjugateFactor {
    pub conjugator: Word,
    pub relator: usize,
    pub inverted: bool,
}

/// Certificate that a word lies in the normal closure of the relators:
/// the factors multiply out (left to right, then freely reduce) to the word.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivation {
    pub factors: Vec<ConjugateFactor>,
}

/// Certificate that a word survives in a finite quotient: generator images
/// are one-line permutations of 0..degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparatingHom {
    pub degree: u32,
    pub images: Vec<Vec<u8>>,
}

pub type EqVerdict = Verdict<Derivation, SeparatingHom>;

/// Multiplies a derivation out in the free group.
pub fn derivation_product(p: &Presentation, d: &Derivation) -> Option<Word> {
    let mut acc = Word::empty();
    for f in &d.factors {
        let r = p.relators().get(f.relator)?;
        let r = if f.inverted { r.inverse() } else { r.clone() };
        acc = acc.concat(&f.conjugator).concat(&r).concat(&f.conjugator.inverse());
    }
    Some(acc)
}

/// Re-verifies a Yes certificate for eq(u, v): the factors must multiply out
/// to u * v^-1.
pub fn verify_derivation(p: &Presentation, d: &Derivation, u: &Word, v: &Word) -> bool {
    match derivation_product(p, d) {
        Some(prod) => prod == u.concat(&v.inverse()),
        None => false,
    }
}

fn apply_perm(perm: &[u8], x: u8) -> u8 {
    perm[x as usize]
}

fn perm_identity(degree: u32) -> Vec<u8> {
    (0..degree as u8).collect()
}

fn perm_inverse(perm: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; perm.len()];
    for (i, &v) in perm.iter().enumerate() {
        out[v as usize] = i as u8;
    }
    out
}

fn hom_image(h: &SeparatingHom, w: &FreeWord) -> Option<Vec<u8>> {
    let mut acc = perm_identity(h.degree);
    for &(g, inv) in w {
        let img = h.images.get(g as usize - 1)?;
        let img = if inv { perm_inverse(img) } else { img.clone() };
        acc = acc.iter().map(|&x| apply_perm(&img, x)).collect();
    }
    Some(acc)
}

/// Re-verifies a No certificate for eq(u, v): the homomorphism must respect
/// every relator and send u, v to different permutations.
pub fn verify_separating_hom(p: &Presentation, h: &SeparatingHom, u: &Word, v: &Word) -> bool {
    if h.images.len() != p.generators() as usize {
        return false;
    }
    if h.images.iter().any(|img| img.len() != h.degree as usize) {
        return false;
    }
    let id = perm_identity(h.degree);
    for r in p.relators() {
        let r = match word_to_free_word(r) {
            Some(r) => r,
            None => return false,
        };
        if hom_image(h, &r) != Some(id.clone()) {
            return false;
        }
    }
    let (u, v) = match (word_to_free_word(u), word_to_free_word(v)) {
        (Some(u), Some(v)) => (u, v),
        _ => return false,
    };
    hom_image(h, &u) != hom_image(h, &v)
}

/// Breadth-first search for a derivation of `target` as a product of
/// conjugated relators. States are reduced words, starting from the target;
/// a move inserts one relator (or inverse relator) at some position and
/// freely reduces, which multiplies the state on the left by a conjugate of
/// the relator whose conjugator is a prefix of the state. Reaching the empty
/// word closes the derivation.
///
/// Discovery stops at `bound` states or after `64 * bound` insertion
/// attempts, whichever comes first, so the cost stays proportional to the
/// bound even for very large relator sets. Both caps and the length cap
/// nest as the bound grows, which keeps verdicts monotone: a derivation
/// found at bound B is found unchanged at every larger bound.
pub fn search_derivation(p: &Presentation, target: &FreeWord, bound: u64) -> Option<Derivation> {
    if target.is_empty() {
        return Some(Derivation::default());
    }
    let relators: Vec<FreeWord> =
        p.relators().iter().map(|r| word_to_free_word(r).expect("constant-free")).collect();
    if bound <= 1 || relators.is_empty() {
        return None;
    }
    let len_cap = target.len() + bound as usize;
    let mut work = bound.saturating_mul(64);
    let mut states: Vec<FreeWord> = vec![target.clone()];
    let mut index: HashMap<FreeWord, usize> = HashMap::from([(target.clone(), 0)]);
    // (parent state, conjugator prefix length, relator, inverted)
    let mut provenance: Vec<Option<(usize, usize, usize, bool)>> = vec![None];
    let mut cursor = 0usize;
    while cursor < states.len() {
        let state = states[cursor].clone();
        for pos in 0..=state.len() {
            for (ri, relator) in relators.iter().enumerate() {
                for inverted in [false, true] {
                    if work == 0 {
                        return None;
                    }
                    work -= 1;
                    let inserted: FreeWord =
                        if inverted { free_word_inverse(relator) } else { relator.clone() };
                    let next = reduce_free_word(
                        state[..pos]
                            .iter()
                            .copied()
                            .chain(inserted.into_iter())
                            .chain(state[pos..].iter().copied()),
                    );
                    if next.len() > len_cap || index.contains_key(&next) {
                        continue;
                    }
                    let id = states.len();
                    index.insert(next.clone(), id);
                    states.push(next.clone());
                    provenance.push(Some((cursor, pos, ri, inverted)));
                    if next.is_empty() {
                        // Walk back to the target. Each step multiplied the
                        // state by prefix * r^(e) * prefix^-1 on the left, so
                        // the target is the product of the inverted factors
                        // in path order.
                        let mut chain = Vec::new();
                        let mut at = id;
                        while let Some((parent, prefix_len, relator, inv)) = provenance[at] {
                            let conjugator =
                                free_word_to_word(&states[parent][..prefix_len].to_vec());
                            chain.push(ConjugateFactor {
                                conjugator,
                                relator,
                                inverted: !inv,
                            });
                            at = parent;
                        }
                        chain.reverse();
                        return Some(Derivation { factors: chain });
                    }
                    if states.len() as u64 >= bound {
                        return None;
                    }
                }
            }
        }
        cursor += 1;
    }
    None
}

/// Search configuration for finite-quotient separation.
#[derive(Clone, Copy, Debug)]
pub struct QuotientConfig {
    /// Largest symmetric-group degree tried.
    pub max_degree: u32,
    /// Skip brute-force degrees whose assignment count exceeds this.
    pub budget: u64,
}

impl Default for QuotientConfig {
    fn default() -> Self {
        QuotientConfig { max_degree: 5, budget: 200_000 }
    }
}

fn exponent_vector_mod2(w: &FreeWord, generators: u32) -> Vec<bool> {
    let mut v = vec![false; generators as usize];
    for &(g, _) in w {
        v[g as usize - 1] ^= true;
    }
    v
}

/// All homomorphisms to S_2 at once: a hom is a bit per generator, it kills
/// the relators iff the bit vector is orthogonal to every relator exponent
/// vector mod 2, and it separates the target iff their product is 1. Gaussian
/// elimination over F_2 finds the lexicographically first such vector.
fn sign_hom_separation(p: &Presentation, target: &FreeWord) -> Option<SeparatingHom> {
    let k = p.generators() as usize;
    let rows: Vec<Vec<bool>> = p
        .relators()
        .iter()
        .map(|r| exponent_vector_mod2(&word_to_free_word(r).expect("constant-free"), k as u32))
        .collect();
    let t = exponent_vector_mod2(target, k as u32);

    // Null-space basis of the relator matrix.
    let mut mat = rows;
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; k];
    let mut rank = 0;
    for col in 0..k {
        if let Some(row) = (rank..mat.len()).find(|&r| mat[r][col]) {
            mat.swap(rank, row);
            let pivot_row = mat[rank].clone();
            for (r, other) in mat.iter_mut().enumerate() {
                if r != rank && other[col] {
                    for c in 0..k {
                        other[c] ^= pivot_row[c];
                    }
                }
            }
            pivot_of_col[col] = Some(rank);
            rank += 1;
        }
    }
    let free_cols: Vec<usize> = (0..k).filter(|&c| pivot_of_col[c].is_none()).collect();
    for &fc in &free_cols {
        // Basis vector: free column 1, pivots back-substituted.
        let mut phi = vec![false; k];
        phi[fc] = true;
        for col in 0..k {
            if let Some(row) = pivot_of_col[col] {
                phi[col] = mat[row][fc];
            }
        }
        let dot = phi.iter().zip(&t).fold(false, |acc, (&a, &b)| acc ^ (a && b));
        if dot {
            let transposition = vec![1u8, 0u8];
            let images = phi
                .iter()
                .map(|&bit| if bit { transposition.clone() } else { vec![0u8, 1u8] })
                .collect();
            return Some(SeparatingHom { degree: 2, images });
        }
    }
    None
}

fn permutations(degree: u32) -> Vec<Vec<u8>> {
    fn rec(prefix: &mut Vec<u8>, rest: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            prefix.push(v);
            rec(prefix, rest, out);
            prefix.pop();
            rest.insert(i, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..degree as u8).collect(), &mut out);
    out
}

fn brute_hom_separation(
    p: &Presentation,
    target: &FreeWord,
    config: &QuotientConfig,
) -> Option<SeparatingHom> {
    let k = p.generators() as usize;
    let relators: Vec<FreeWord> =
        p.relators().iter().map(|r| word_to_free_word(r).expect("constant-free")).collect();
    for degree in 3..=config.max_degree {
        let perms = permutations(degree);
        let total = (perms.len() as u64).checked_pow(k as u32);
        match total {
            Some(t) if t <= config.budget => {}
            _ => continue,
        }
        let mut digits = vec![0usize; k];
        loop {
            let hom = SeparatingHom {
                degree,
                images: digits.iter().map(|&d| perms[d].clone()).collect(),
            };
            let id = perm_identity(degree);
            let respects = relators.iter().all(|r| hom_image(&hom, r) == Some(id.clone()));
            if respects && hom_image(&hom, target) != Some(id.clone()) {
                return Some(hom);
            }
            // Odometer, most significant digit first.
            let mut pos = k;
            loop {
                if pos == 0 {
                    return None;
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < perms.len() {
                    break;
                }
                digits[pos] = 0;
                if pos == 0 {
                    return None;
                }
            }
        }
    }
    None
}

/// Finds a finite quotient in which `target` survives, or None. Degree 2 is
/// handled algebraically (covering all S_2 homomorphisms), higher degrees by
/// budgeted brute force.
pub fn separate_from_identity(
    p: &Presentation,
    target: &FreeWord,
    config: &QuotientConfig,
) -> Option<SeparatingHom> {
    if target.is_empty() {
        return None;
    }
    sign_hom_separation(p, target).or_else(|| brute_hom_separation(p, target, config))
}

/// A finitely presented group behind the uniform oracle contract. Canonical
/// forms are reduced words in the generators; equality is semi-decided at the
/// stored bound. Queries are memoized, so repeated comparisons (ball
/// construction, satisfaction checks) pay for each search once.
pub struct FpOracle {
    presentation: Presentation,
    bound: u64,
    quotients: QuotientConfig,
    cache: Mutex<HashMap<FreeWord, EqVerdict>>,
}

impl FpOracle {
    pub fn new(presentation: Presentation, bound: u64) -> FpOracle {
        FpOracle {
            presentation,
            bound,
            quotients: QuotientConfig::default(),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn generators(&self) -> u32 {
        self.presentation.generators()
    }

    pub fn eq_words(&self, u: &FreeWord, v: &FreeWord) -> EqVerdict {
        let target = free_word_concat(u, &free_word_inverse(v));
        if target.is_empty() {
            return Verdict::Yes { certificate: Derivation::default(), bound: self.bound };
        }
        if let Some(hit) = self.cache.lock().unwrap().get(&target) {
            return hit.clone();
        }
        let verdict = match search_derivation(&self.presentation, &target, self.bound) {
            Some(certificate) => Verdict::Yes { certificate, bound: self.bound },
            None => match separate_from_identity(&self.presentation, &target, &self.quotients) {
                Some(hom) => Verdict::No { certificate: hom, bound: self.bound },
                None => Verdict::Unknown { bound: self.bound },
            },
        };
        self.cache.lock().unwrap().insert(target, verdict.clone());
        verdict
    }
}

impl Clone for FpOracle {
    fn clone(&self) -> Self {
        FpOracle {
            presentation: self.presentation.clone(),
            bound: self.bound,
            quotients: self.quotients,
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl std::fmt::Debug for FpOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FpOracle")
            .field("presentation", &self.presentation)
            .field("bound", &self.bound)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::parse_word;

    fn w(s: &str) -> Word {
        parse_word(s).unwrap()
    }

    fn fw(s: &str) -> FreeWord {
        word_to_free_word(&w(s)).unwrap()
    }

    #[test]
    fn single_relator_derivation() {
        let p = Presentation::new(1, vec![w("x1^2")]).unwrap();
        let oracle = FpOracle::new(p.clone(), 100);
        match oracle.eq_words(&fw("x1^2"), &fw("e")) {
            Verdict::Yes { certificate, .. } => {
                assert_eq!(certificate.factors.len(), 1);
                assert!(verify_derivation(&p, &certificate, &w("x1^2"), &w("e")));
            }
            other => panic!("expected Yes, got {other:?}"),
        }
    }

    #[test]
    fn free_group_separates_generators() {
        let p = Presentation::free(2);
        let oracle = FpOracle::new(p.clone(), 50);
        match oracle.eq_words(&fw("x1"), &fw("x2")) {
            Verdict::No { certificate, .. } => {
                assert_eq!(certificate.degree, 2);
                assert_eq!(certificate.images[0], vec![1, 0]);
                assert_eq!(certificate.images[1], vec![0, 1]);
                assert!(verify_separating_hom(&p, &certificate, &w("x1"), &w("x2")));
            }
            other => panic!("expected No, got {other:?}"),
        }
    }

    #[test]
    fn commutator_relator_proves_commuting() {
        let p = Presentation::new(2, vec![w("x1*x2*x1^-1*x2^-1")]).unwrap();
        let oracle = FpOracle::new(p.clone(), 200);
        match oracle.eq_words(&fw("x1*x2"), &fw("x2*x1")) {
            Verdict::Yes { certificate, .. } => {
                assert!(verify_derivation(&p, &certificate, &w("x1*x2"), &w("x2*x1")));
            }
            other => panic!("expected Yes, got {other:?}"),
        }
    }

    #[test]
    fn tiny_bound_gives_unknown() {
        // x1^120 is trivial in Z/60 but the derivation needs two relator
        // insertions, out of reach at bound 2; no symmetric-group quotient
        // of degree <= 5 separates it because every permutation order
        // divides 60.
        let p = Presentation::new(1, vec![w("x1^60")]).unwrap();
        let oracle = FpOracle::new(p, 2);
        let long = vec![(1u32, false); 120];
        match oracle.eq_words(&long, &fw("e")) {
            Verdict::Unknown { bound } => assert_eq!(bound, 2),
            other => panic!("expected Unknown, got {other:?}"),
        }
        // The same query resolves at a workable bound.
        let oracle = FpOracle::new(Presentation::new(1, vec![w("x1^60")]).unwrap(), 50);
        assert!(oracle.eq_words(&long, &fw("e")).is_yes());
    }

    #[test]
    fn identical_words_trivially_equal() {
        let p = Presentation::free(1);
        let oracle = FpOracle::new(p, 10);
        assert!(oracle.eq_words(&fw("x1"), &fw("x1")).is_yes());
    }

    #[test]
    fn odd_power_separated_by_sign() {
        let p = Presentation::new(1, vec![w("x1^2")]).unwrap();
        let oracle = FpOracle::new(p.clone(), 100);
        match oracle.eq_words(&fw("x1"), &fw("e")) {
            Verdict::No { certificate, .. } => {
                assert!(verify_separating_hom(&p, &certificate, &w("x1"), &w("e")));
            }
            other => panic!("expected No, got {other:?}"),
        }
    }

    #[test]
    fn monotone_in_bound() {
        let p = Presentation::new(2, vec![w("x1^2"), w("x2^3")]).unwrap();
        let queries = [("x1^2", "e"), ("x2^3", "e"), ("x1*x2", "x2*x1"), ("x2", "e")];
        for (u, v) in queries {
            let mut last: Option<crate::verdict::Outcome> = None;
            for bound in [5u64, 50, 500] {
                let oracle = FpOracle::new(p.clone(), bound);
                let verdict = oracle.eq_words(&fw(u), &fw(v));
                let outcome = verdict.outcome();
                if let Some(prev) = last {
                    if prev != crate::verdict::Outcome::Unknown {
                        assert_eq!(prev, outcome, "verdict regressed for {u} = {v}");
                    }
                }
                last = Some(outcome);
            }
        }
    }
}
