//! Partial enumerated groups, consistency semi-decision for constant
//! systems, the two-player forcing game with definitive scheduling and
//! enforcement strategies, and bounded existential-closure testing.
//!
//! A partial enumerated group is a finite fragment of a group structure on
//! the positive naturals: an optional identity, partial product and inverse
//! tables, and explicit inequality facts. Closing a fragment derives the
//! consequences of the finite-stage laws (associativity where defined,
//! identity and inverse coherence, no clash with an inequality) until
//! fixpoint or a contradiction.
//!
//! Game moves are systems with constants. Legality is provisional: a move is
//! rejected only when the bounded search refutes it, so a contradiction may
//! surface later; the engine records the earliest move that a later, larger
//! bound exposes as inconsistent.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

use crate::oracle::fp::{search_derivation, separate_from_identity, QuotientConfig};
use crate::oracle::{Derivation, Elem, Env, GroupOracle, OracleError, Presentation, SeparatingHom};
use crate::verdict::Verdict;
use crate::word::{Base, Equation, Letter, Polarity, System, Word};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ForcingError {
    #[error("systems in this role must use constants only, found variable x{0}")]
    VariablesInSystem(u32),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// A fact needed but absent from a partial table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MissingFact {
    Identity,
    Inverse(u32),
    Product(u32, u32),
}

/// Contradiction discovered while closing a partial table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contradiction {
    pub message: String,
    pub trace: Vec<String>,
}

impl std::fmt::Display for Contradiction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

/// Finite fragment of an enumerated group.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialEnumeratedGroup {
    identity: Option<u32>,
    products: BTreeMap<(u32, u32), u32>,
    inverses: BTreeMap<u32, u32>,
    /// Normalized pairs (i, j) with i < j asserted distinct.
    unequal: BTreeSet<(u32, u32)>,
    /// Constants asserted distinct from the identity, kept separately while
    /// the identity is undesignated.
    nonidentity: BTreeSet<u32>,
    /// Constants known to exist even when no fact mentions them yet; the
    /// identity laws close over these too.
    mentioned: BTreeSet<u32>,
    #[serde(skip)]
    trace: Vec<String>,
}

impl PartialEnumeratedGroup {
    pub fn new() -> PartialEnumeratedGroup {
        PartialEnumeratedGroup::default()
    }

    pub fn identity(&self) -> Option<u32> {
        self.identity
    }

    pub fn product(&self, i: u32, j: u32) -> Option<u32> {
        self.products.get(&(i, j)).copied()
    }

    pub fn inverse(&self, i: u32) -> Option<u32> {
        self.inverses.get(&i).copied()
    }

    pub fn products(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        self.products.iter().map(|(&(i, j), &k)| (i, j, k))
    }

    pub fn inverses_iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.inverses.iter().map(|(&i, &j)| (i, j))
    }

    pub fn unequal_pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.unequal.iter().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.identity.is_none()
            && self.products.is_empty()
            && self.inverses.is_empty()
            && self.unequal.is_empty()
            && self.nonidentity.is_empty()
    }

    pub fn mention(&mut self, c: u32) {
        self.mentioned.insert(c);
    }

    /// Every constant mentioned by any fact.
    pub fn universe(&self) -> BTreeSet<u32> {
        let mut out = self.mentioned.clone();
        out.extend(self.identity);
        for (&(i, j), &k) in &self.products {
            out.extend([i, j, k]);
        }
        for (&i, &j) in &self.inverses {
            out.extend([i, j]);
        }
        for &(i, j) in &self.unequal {
            out.extend([i, j]);
        }
        out.extend(self.nonidentity.iter().copied());
        out
    }

    fn contradiction(&self, message: String) -> Contradiction {
        Contradiction { message, trace: self.trace.clone() }
    }

    pub fn designate_identity(&mut self, e: u32) -> Result<bool, Contradiction> {
        match self.identity {
            Some(old) if old == e => Ok(false),
            Some(old) => Err(self.contradiction(format!(
                "two distinct identity designations: {old} and {e}"
            ))),
            None => {
                if self.nonidentity.contains(&e) {
                    return Err(self.contradiction(format!(
                        "identity designation {e} contradicts the fact {e} != e"
                    )));
                }
                self.identity = Some(e);
                self.trace.push(format!("identity := {e}"));
                Ok(true)
            }
        }
    }

    pub fn insert_product(&mut self, i: u32, j: u32, k: u32) -> Result<bool, Contradiction> {
        match self.products.get(&(i, j)) {
            Some(&old) if old == k => Ok(false),
            Some(&old) => Err(self.contradiction(format!(
                "conflicting products: {i}*{j} = {old} and {i}*{j} = {k}"
            ))),
            None => {
                self.products.insert((i, j), k);
                self.trace.push(format!("{i}*{j} = {k}"));
                Ok(true)
            }
        }
    }

    pub fn insert_inverse(&mut self, i: u32, j: u32) -> Result<bool, Contradiction> {
        match self.inverses.get(&i) {
            Some(&old) if old == j => Ok(false),
            Some(&old) => Err(self.contradiction(format!(
                "conflicting inverses: inv({i}) = {old} and inv({i}) = {j}"
            ))),
            None => {
                self.inverses.insert(i, j);
                self.trace.push(format!("inv({i}) = {j}"));
                Ok(true)
            }
        }
    }

    pub fn insert_unequal(&mut self, i: u32, j: u32) -> Result<bool, Contradiction> {
        if i == j {
            return Err(self.contradiction(format!("inequality {i} != {i} is absurd")));
        }
        let pair = (i.min(j), i.max(j));
        Ok(self.unequal.insert(pair))
    }

    pub fn insert_nonidentity(&mut self, i: u32) -> Result<bool, Contradiction> {
        if self.identity == Some(i) {
            return Err(self.contradiction(format!(
                "fact {i} != e contradicts the identity designation {i}"
            )));
        }
        Ok(self.nonidentity.insert(i))
    }

    /// Derives consequences of the four finite-stage laws until fixpoint.
    pub fn close(&mut self) -> Result<(), Contradiction> {
        loop {
            let mut changed = false;
            if let Some(e) = self.identity {
                changed |= self.insert_inverse(e, e)?;
                for c in self.universe() {
                    changed |= self.insert_product(c, e, c)?;
                    changed |= self.insert_product(e, c, c)?;
                }
                for i in self.nonidentity.clone() {
                    changed |= self.insert_unequal(i, e)?;
                }
            }
            for (i, j) in self.inverses.clone() {
                changed |= self.insert_inverse(j, i)?;
                if let Some(e) = self.identity {
                    changed |= self.insert_product(i, j, e)?;
                    changed |= self.insert_product(j, i, e)?;
                }
            }
            if let Some(e) = self.identity {
                for (i, j, k) in self.products.clone().into_iter().map(|((i, j), k)| (i, j, k)) {
                    if k == e {
                        changed |= self.insert_inverse(i, j)?;
                    }
                }
            }
            // Associativity where two of the three nested products exist.
            let by_first: BTreeMap<u32, Vec<(u32, u32)>> = {
                let mut m: BTreeMap<u32, Vec<(u32, u32)>> = BTreeMap::new();
                for (&(n, p), &q) in &self.products {
                    m.entry(n).or_default().push((p, q));
                }
                m
            };
            let snapshot: Vec<((u32, u32), u32)> =
                self.products.iter().map(|(&k, &v)| (k, v)).collect();
            for &((m, n), s) in &snapshot {
                if let Some(list) = by_first.get(&n) {
                    for &(p, q) in list {
                        // (m n) p = m (n p): s*p and m*q must agree.
                        match (self.product(s, p), self.product(m, q)) {
                            (Some(r1), Some(r2)) if r1 != r2 => {
                                return Err(self.contradiction(format!(
                                    "associativity clash on ({m},{n},{p}): \
                                     ({m}*{n})*{p} = {r1} but {m}*({n}*{p}) = {r2}"
                                )));
                            }
                            (Some(r), None) => {
                                changed |= self.insert_product(m, q, r)?;
                            }
                            (None, Some(r)) => {
                                changed |= self.insert_product(s, p, r)?;
                            }
                            _ => {}
                        }
                    }
                }
            }
            self.check_inequalities()?;
            if !changed {
                return Ok(());
            }
        }
    }

    fn check_inequalities(&self) -> Result<(), Contradiction> {
        for &(i, j) in &self.unequal {
            if i == j {
                return Err(self.contradiction(format!("inequality {i} != {i} is absurd")));
            }
        }
        if let Some(e) = self.identity {
            if self.nonidentity.contains(&e) {
                return Err(self.contradiction(format!(
                    "identity {e} is asserted distinct from the identity"
                )));
            }
        }
        Ok(())
    }

    /// Validates the four finite-stage laws on the closed table.
    pub fn verify_laws(&self) -> Result<(), String> {
        // Associativity on all triples where both groupings are defined.
        for (&(m, n), &s) in &self.products {
            for (&(n2, p), &q) in &self.products {
                if n2 != n {
                    continue;
                }
                if let (Some(r1), Some(r2)) = (self.product(s, p), self.product(m, q)) {
                    if r1 != r2 {
                        return Err(format!("associativity fails on ({m},{n},{p})"));
                    }
                }
            }
        }
        if let Some(e) = self.identity {
            for (&(i, j), &k) in &self.products {
                if i == e && k != j {
                    return Err(format!("identity law fails: {e}*{j} = {k}"));
                }
                if j == e && k != i {
                    return Err(format!("identity law fails: {i}*{e} = {k}"));
                }
            }
            for (&i, &j) in &self.inverses {
                if let Some(k) = self.product(i, j) {
                    if k != e {
                        return Err(format!("inverse law fails: {i}*inv({i}) = {k}"));
                    }
                }
                if let Some(k) = self.product(j, i) {
                    if k != e {
                        return Err(format!("inverse law fails: inv({i})*{i} = {k}"));
                    }
                }
            }
        }
        for &(i, j) in &self.unequal {
            if i == j {
                return Err(format!("inequality {i} != {i} recorded"));
            }
        }
        if let Some(e) = self.identity {
            if self.nonidentity.contains(&e) {
                return Err(format!("identity {e} recorded as nonidentity"));
            }
        }
        Ok(())
    }
}

/// Class restriction for move legality.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemClass {
    #[default]
    All,
    /// Additionally refuses systems that prove a torsion element: a relator
    /// that is a proper power w^k whose root is asserted nontrivial.
    TorsionFreeHeuristic,
}

/// Witness for an inconsistent constant system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InconsistencyWitness {
    /// An inequation's word was derived equal to the identity.
    ProvedEqual { clause: Equation, presentation: ConstantPresentation, derivation: Derivation },
    /// Torsion-free heuristic: relator word^k with the root asserted
    /// nontrivial.
    ProvenTorsion { power_clause: Equation, root: Word, exponent: u32, nontrivial_clause: Equation },
}

/// Presentation together with the constants it was built from (constant c_i
/// becomes generator x_(rank of c_i)).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantPresentation {
    pub constants: Vec<u32>,
    pub generators: u32,
    pub relators: Vec<Word>,
}

impl ConstantPresentation {
    pub fn presentation(&self) -> Result<Presentation, crate::oracle::PresentationError> {
        Presentation::new(self.generators, self.relators.clone())
    }
}

/// Per-inequation separation certificates for a consistent system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyProof {
    pub presentation: ConstantPresentation,
    pub separated: Vec<(Equation, SeparatingHom)>,
}

pub type ConsistencyVerdict = Verdict<ConsistencyProof, InconsistencyWitness>;

fn check_constants_only(s: &System) -> Result<(), ForcingError> {
    for c in s.clauses() {
        if let Some(l) = c.word.letters().iter().find(|l| l.base.is_variable()) {
            return Err(ForcingError::VariablesInSystem(l.base.index()));
        }
    }
    Ok(())
}

/// Translates the Equal clauses of a constant system into a presentation on
/// its constants.
fn system_presentation(s: &System) -> Result<(ConstantPresentation, Presentation), ForcingError> {
    check_constants_only(s)?;
    let constants: Vec<u32> = s.constants().into_iter().collect();
    let rank: BTreeMap<u32, u32> =
        constants.iter().enumerate().map(|(i, &c)| (c, i as u32 + 1)).collect();
    let translate = |w: &Word| -> Word {
        Word::from_letters(w.letters().iter().map(|l| Letter {
            base: Base::Variable(rank[&l.base.index()]),
            inverse: l.inverse,
        }))
    };
    let relators: Vec<Word> = s
        .clauses()
        .filter(|c| c.polarity == Polarity::Equal)
        .map(|c| translate(&c.word))
        .collect();
    let generators = (constants.len() as u32).max(1);
    let presentation =
        Presentation::new(generators, relators.clone()).expect("translated relators are valid");
    let meta = ConstantPresentation {
        constants,
        generators,
        relators: presentation.relators().to_vec(),
    };
    Ok((meta, presentation))
}

fn translate_constant_word(meta: &ConstantPresentation, w: &Word) -> Word {
    let rank: BTreeMap<u32, u32> =
        meta.constants.iter().enumerate().map(|(i, &c)| (c, i as u32 + 1)).collect();
    Word::from_letters(w.letters().iter().map(|l| Letter {
        base: Base::Variable(rank[&l.base.index()]),
        inverse: l.inverse,
    }))
}

/// Semi-decides satisfiability of a constant system. The Equal clauses
/// present the freest group the system can hold; an inequation refutes the
/// system exactly when its word lies in the normal closure of the relators.
/// Separating every inequation in a finite quotient certifies consistency;
/// otherwise the verdict is Unknown at the bound.
pub fn consistency_check(
    s: &System,
    class: SystemClass,
    bound: u64,
) -> Result<ConsistencyVerdict, ForcingError> {
    check_constants_only(s)?;
    // Empty-word clauses do not survive translation; handle them first.
    for clause in s.clauses() {
        if clause.word.is_empty() && clause.polarity == Polarity::NotEqual {
            let (meta, _) = system_presentation(s)?;
            return Ok(Verdict::No {
                certificate: InconsistencyWitness::ProvedEqual {
                    clause: clause.clone(),
                    presentation: meta,
                    derivation: Derivation::default(),
                },
                bound,
            });
        }
    }
    let (meta, presentation) = system_presentation(s)?;
    if let SystemClass::TorsionFreeHeuristic = class {
        if let Some(witness) = torsion_witness(s) {
            return Ok(Verdict::No { certificate: witness, bound });
        }
    }
    let mut separated = Vec::new();
    let mut all_separated = true;
    for clause in s.clauses().filter(|c| c.polarity == Polarity::NotEqual) {
        let target = translate_constant_word(&meta, &clause.word);
        let target_fw =
            crate::oracle::elem::word_to_free_word(&target).expect("translated to variables");
        if let Some(derivation) = search_derivation(&presentation, &target_fw, bound) {
            return Ok(Verdict::No {
                certificate: InconsistencyWitness::ProvedEqual {
                    clause: clause.clone(),
                    presentation: meta,
                    derivation,
                },
                bound,
            });
        }
        match separate_from_identity(&presentation, &target_fw, &QuotientConfig::default()) {
            Some(hom) => separated.push((clause.clone(), hom)),
            None => all_separated = false,
        }
    }
    if all_separated {
        Ok(Verdict::Yes {
            certificate: ConsistencyProof { presentation: meta, separated },
            bound,
        })
    } else {
        Ok(Verdict::Unknown { bound })
    }
}

/// The refutation half of `consistency_check`: identical No results, but
/// skips the separation work that only distinguishes Yes from Unknown.
/// Move legality needs exactly this.
pub fn consistency_refutation(
    s: &System,
    class: SystemClass,
    bound: u64,
) -> Result<Option<InconsistencyWitness>, ForcingError> {
    check_constants_only(s)?;
    for clause in s.clauses() {
        if clause.word.is_empty() && clause.polarity == Polarity::NotEqual {
            let (meta, _) = system_presentation(s)?;
            return Ok(Some(InconsistencyWitness::ProvedEqual {
                clause: clause.clone(),
                presentation: meta,
                derivation: Derivation::default(),
            }));
        }
    }
    let (meta, presentation) = system_presentation(s)?;
    if let SystemClass::TorsionFreeHeuristic = class {
        if let Some(witness) = torsion_witness(s) {
            return Ok(Some(witness));
        }
    }
    for clause in s.clauses().filter(|c| c.polarity == Polarity::NotEqual) {
        let target = translate_constant_word(&meta, &clause.word);
        let target_fw =
            crate::oracle::elem::word_to_free_word(&target).expect("translated to variables");
        if let Some(derivation) = search_derivation(&presentation, &target_fw, bound) {
            return Ok(Some(InconsistencyWitness::ProvedEqual {
                clause: clause.clone(),
                presentation: meta,
                derivation,
            }));
        }
    }
    Ok(None)
}

fn torsion_witness(s: &System) -> Option<InconsistencyWitness> {
    let inequations: Vec<&Equation> =
        s.clauses().filter(|c| c.polarity == Polarity::NotEqual).collect();
    for clause in s.clauses().filter(|c| c.polarity == Polarity::Equal) {
        let (root, exponent) = clause.word.cyclically_reduced().power_decomposition();
        if exponent < 2 || root.is_empty() {
            continue;
        }
        let root_inv = root.inverse();
        for ineq in &inequations {
            if ineq.word == root || ineq.word == root_inv {
                return Some(InconsistencyWitness::ProvenTorsion {
                    power_clause: clause.clone(),
                    root,
                    exponent,
                    nontrivial_clause: (*ineq).clone(),
                });
            }
        }
    }
    None
}

/// Extracts the syntactically present facts of a constant system and closes
/// them under the finite-stage laws.
pub fn compile_system(s: &System) -> Result<PartialEnumeratedGroup, Contradiction> {
    let mut t = PartialEnumeratedGroup::new();
    for c in s.constants() {
        t.mention(c);
    }
    for clause in s.clauses() {
        let word = clause.word.cyclically_reduced();
        let letters = word.letters();
        match clause.polarity {
            Polarity::Equal => {
                match letters.len() {
                    1 => {
                        // c = e, either sign.
                        t.designate_identity(letters[0].base.index())?;
                    }
                    2 => {
                        for view in [word.clone(), word.inverse()] {
                            let l = view.letters();
                            if !l[0].inverse && !l[1].inverse {
                                t.insert_inverse(l[0].base.index(), l[1].base.index())?;
                                break;
                            }
                        }
                    }
                    3 => {
                        'rot: for view in [word.clone(), word.inverse()] {
                            for r in 0..3 {
                                let l = view.letters();
                                let rotated =
                                    [l[r % 3], l[(r + 1) % 3], l[(r + 2) % 3]];
                                if !rotated[0].inverse && !rotated[1].inverse && rotated[2].inverse
                                {
                                    t.insert_product(
                                        rotated[0].base.index(),
                                        rotated[1].base.index(),
                                        rotated[2].base.index(),
                                    )?;
                                    break 'rot;
                                }
                            }
                        }
                    }
                    _ => {} // longer clauses carry no direct table fact
                }
            }
            Polarity::NotEqual => match letters.len() {
                0 => {
                    return Err(Contradiction {
                        message: "the empty word is asserted nontrivial".into(),
                        trace: Vec::new(),
                    })
                }
                1 => {
                    t.insert_nonidentity(letters[0].base.index())?;
                }
                2 => {
                    if letters[0].inverse != letters[1].inverse {
                        t.insert_unequal(letters[0].base.index(), letters[1].base.index())?;
                    }
                }
                _ => {}
            },
        }
    }
    t.close()?;
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Player {
    I,
    II,
}

impl Player {
    fn other(self) -> Player {
        match self {
            Player::I => Player::II,
            Player::II => Player::I,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub player: Player,
    pub added_clauses: Vec<Equation>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MoveError {
    #[error("move does not extend the current system")]
    NotAnExtension,
    #[error("move adds no new clause")]
    NotStrict,
    #[error("move rejected as inconsistent: {0:?}")]
    Inconsistent(Box<InconsistencyWitness>),
    #[error("move contradicts the compiled table: {0}")]
    TableContradiction(Contradiction),
    #[error(transparent)]
    Forcing(#[from] ForcingError),
    #[error("replay expected player {expected:?} but log says {got:?}")]
    WrongPlayer { expected: Player, got: Player },
}

/// Accumulated play of the forcing game.
#[derive(Clone, Debug)]
pub struct GameState {
    system: System,
    turn: Player,
    log: Vec<MoveRecord>,
    cursor: usize,
    bound: u64,
    class: SystemClass,
}

impl GameState {
    pub fn new(bound: u64, class: SystemClass) -> GameState {
        GameState {
            system: System::default(),
            turn: Player::I,
            log: Vec::new(),
            cursor: 0,
            bound,
            class,
        }
    }

    pub fn system(&self) -> &System {
        &self.system
    }

    pub fn turn(&self) -> Player {
        self.turn
    }

    pub fn log(&self) -> &[MoveRecord] {
        &self.log
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn class(&self) -> SystemClass {
        self.class
    }

    /// Least natural number mentioned nowhere in the current system.
    pub fn fresh_constant(&self) -> u32 {
        let used = self.system.constants();
        (1..).find(|c| !used.contains(c)).expect("naturals are unbounded")
    }

    pub fn fresh_constants(&self, n: u32) -> Vec<u32> {
        let used = self.system.constants();
        (1..).filter(|c| !used.contains(c)).take(n as usize).collect()
    }

    /// Plays one move: the extension must contain every current clause and
    /// at least one new one, and must survive the bounded refutation search.
    pub fn play(&mut self, extension: System) -> Result<(), MoveError> {
        check_constants_only(&extension)?;
        if !extension.extends(&self.system) {
            return Err(MoveError::NotAnExtension);
        }
        let added: Vec<Equation> = extension
            .clauses()
            .filter(|c| !self.system.contains(c))
            .cloned()
            .collect();
        if added.is_empty() {
            return Err(MoveError::NotStrict);
        }
        if let Err(contradiction) = compile_system(&extension) {
            return Err(MoveError::TableContradiction(contradiction));
        }
        if let Some(witness) = consistency_refutation(&extension, self.class, self.bound)? {
            return Err(MoveError::Inconsistent(Box::new(witness)));
        }
        self.log.push(MoveRecord { player: self.turn, added_clauses: added });
        self.system = extension;
        self.turn = self.turn.other();
        Ok(())
    }

    /// Replays a logged game from scratch; the final state is identical to
    /// the one that produced the log.
    pub fn replay(
        bound: u64,
        class: SystemClass,
        log: &[MoveRecord],
    ) -> Result<GameState, MoveError> {
        let mut state = GameState::new(bound, class);
        for record in log {
            if record.player != state.turn {
                return Err(MoveError::WrongPlayer { expected: state.turn, got: record.player });
            }
            let mut extension = state.system.clone();
            for clause in &record.added_clauses {
                extension.insert(clause.clone());
            }
            state.play(extension)?;
        }
        Ok(state)
    }
}

/// Pair (m, n) at position `idx` of the fixed diagonal order
/// (1,1), (1,2), (2,1), (1,3), (2,2), (3,1), ...
pub fn diagonal_pair(idx: usize) -> (u32, u32) {
    let mut s = 2u32;
    let mut skipped = 0usize;
    loop {
        let count = (s - 1) as usize;
        if idx < skipped + count {
            let m = (idx - skipped) as u32 + 1;
            return (m, s - m);
        }
        skipped += count;
        s += 1;
    }
}

/// Runs `rounds` steps of the definitive scheduler: each step takes the next
/// pair (m, n) in diagonal order and, unless the compiled table already
/// carries a product fact for it, plays the equation c_m * c_n = c_k. The
/// chosen k is the smallest existing constant provably equal to the product
/// at the current bound, otherwise the least unused natural.
pub fn definitive_schedule(state: &mut GameState, rounds: usize) -> Result<(), MoveError> {
    for _ in 0..rounds {
        let (m, n) = diagonal_pair(state.cursor);
        state.cursor += 1;
        let mut table = compile_system(&state.system).map_err(MoveError::TableContradiction)?;
        table.mention(m);
        table.mention(n);
        table.close().map_err(MoveError::TableContradiction)?;
        if table.product(m, n).is_some() {
            continue;
        }
            let k = provable_product(&state.system, m, n, state.bound)?
            .unwrap_or_else(|| fresh_beyond(&state.system, &[m, n]));
        let clause = Equation::equal(product_word(m, n, k));
        if state.system.contains(&clause) {
            // The fact collapsed into an existing clause under free
            // reduction (e.g. c1*c2 = c2 with c1 = e already played); the
            // pair is carried by derivation.
            continue;
        }
        let mut extension = state.system.clone();
        extension.insert(clause);
        state.play(extension)?;
    }
    Ok(())
}

fn product_word(m: u32, n: u32, k: u32) -> Word {
    Word::from_letters([
        Letter::constant(m),
        Letter::constant(n),
        Letter::constant(k).inv(),
    ])
}

fn fresh_beyond(system: &System, extra: &[u32]) -> u32 {
    let mut used = system.constants();
    used.extend(extra.iter().copied());
    (1..).find(|c| !used.contains(c)).expect("naturals are unbounded")
}

/// Smallest existing constant k with c_m * c_n = c_k derivable from the
/// system's equations at the bound. The per-candidate search is skipped for
/// large systems, where it would dominate the scheduler; the compiled-table
/// check in `definitive_schedule` still catches identity- and
/// inverse-forced products there.
fn provable_product(
    system: &System,
    m: u32,
    n: u32,
    bound: u64,
) -> Result<Option<u32>, ForcingError> {
    let mut candidates: BTreeSet<u32> = system.constants();
    if candidates.len() > 24 {
        return Ok(None);
    }
    candidates.extend([m, n]);
    // The translation table must know m and n even when the system does not
    // mention them yet. Registering them through inequations is safe: only
    // Equal clauses become relators, so derivability is unchanged.
    let mut extended = system.clone();
    for &c in &[m, n] {
        extended.insert(Equation::not_equal(mention_word(c)));
    }
    let (meta, presentation) = system_presentation(&extended)?;
    for k in candidates {
        let target = translate_constant_word(&meta, &product_word(m, n, k));
        let target_fw =
            crate::oracle::elem::word_to_free_word(&target).expect("constants translated");
        if search_derivation(&presentation, &target_fw, bound).is_some() {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

fn mention_word(c: u32) -> Word {
    Word::from_letters([Letter::constant(c)])
}

/// Named responder strategies for player II.
#[derive(Clone, Debug)]
pub enum Strategy {
    /// Plays the opponent's system plus the target instantiated on entirely
    /// fresh constants, forcing the compiled group to satisfy the target.
    OpenDense { target: System },
    /// Introduces a fresh witness commuting with every constant mentioned so
    /// far and distinct from the identity.
    Centralizer,
}

impl Strategy {
    /// Computes the extension this strategy plays from the given state.
    pub fn respond(&self, state: &GameState) -> System {
        match self {
            Strategy::OpenDense { target } => {
                let fresh = state.fresh_constants(target.arity());
                let assignment = crate::word::CoefficientAssignment::from_values(&fresh);
                let instance = target.substitute(&assignment).expect("total assignment");
                state.system().union(&instance)
            }
            Strategy::Centralizer => {
                let mentioned: Vec<u32> = state.system().constants().into_iter().collect();
                let y = state.fresh_constant();
                let mut extension = state.system().clone();
                for &a in &mentioned {
                    // y a y^-1 a^-1 = e
                    extension.insert(Equation::equal(Word::from_letters([
                        Letter::constant(y),
                        Letter::constant(a),
                        Letter::constant(y).inv(),
                        Letter::constant(a).inv(),
                    ])));
                }
                extension.insert(Equation::not_equal(Word::from_letters([Letter::constant(y)])));
                extension
            }
        }
    }
}

/// Deterministic random opponent: plays small product facts with fresh
/// results, or inequations between existing constants, retrying with a safe
/// product fact when a sampled move is rejected.
pub struct RandomPlayer {
    rng: ChaCha8Rng,
}

impl RandomPlayer {
    pub fn new(seed: u64) -> RandomPlayer {
        RandomPlayer { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn sample_clause(&mut self, state: &GameState) -> Equation {
        let max_const = state.system().constants().into_iter().max().unwrap_or(0).min(12).max(4);
        match self.rng.gen_range(0..3u32) {
            0 | 1 => {
                let m = self.rng.gen_range(1..=max_const);
                let n = self.rng.gen_range(1..=max_const);
                let k = fresh_beyond(state.system(), &[m, n]);
                Equation::equal(product_word(m, n, k))
            }
            _ => {
                let i = self.rng.gen_range(1..=max_const);
                let mut j = self.rng.gen_range(1..=max_const);
                if i == j {
                    j = j % max_const + 1;
                }
                if i == j {
                    let k = fresh_beyond(state.system(), &[i]);
                    return Equation::equal(product_word(i, i, k));
                }
                Equation::not_equal(Word::from_letters([
                    Letter::constant(i),
                    Letter::constant(j).inv(),
                ]))
            }
        }
    }

    /// Plays one legal move, falling back to a fresh product fact when a
    /// sampled clause is rejected or stale.
    pub fn play(&mut self, state: &mut GameState) -> Result<(), MoveError> {
        for _ in 0..4 {
            let clause = self.sample_clause(state);
            if state.system().contains(&clause) {
                continue;
            }
            let mut extension = state.system().clone();
            extension.insert(clause);
            match state.play(extension) {
                Ok(()) => return Ok(()),
                Err(MoveError::Inconsistent(_))
                | Err(MoveError::TableContradiction(_))
                | Err(MoveError::NotStrict) => continue,
                Err(e) => return Err(e),
            }
        }
        // A product fact with a fresh result constant is always consistent.
        let m = self.rng.gen_range(1..=4u32);
        let n = self.rng.gen_range(1..=4u32);
        let k = fresh_beyond(state.system(), &[m, n]);
        let mut extension = state.system().clone();
        extension.insert(Equation::equal(product_word(m, n, k)));
        state.play(extension)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AutoGameConfig {
    pub rounds: u32,
    pub seed: u64,
    pub bound: u64,
    pub class: SystemClass,
}

/// Runs a full auto game: each round is a random player-I move, the player-II
/// strategy response, and one definitive-scheduler step.
pub fn auto_game(config: &AutoGameConfig, strategy: &Strategy) -> Result<GameState, MoveError> {
    let mut state = GameState::new(config.bound, config.class);
    let mut opponent = RandomPlayer::new(config.seed);
    for _ in 0..config.rounds {
        opponent.play(&mut state)?;
        let response = strategy.respond(&state);
        state.play(response)?;
        definitive_schedule(&mut state, 1)?;
    }
    Ok(state)
}

#[derive(Debug, Error)]
pub enum EcError {
    #[error("existential closure testing requires finite exact oracles")]
    NotFiniteExact,
    #[error("embedding is not well formed: {0}")]
    BadEmbedding(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Witness that G is not existentially closed in H: a system with parameters
/// (constants c_i name the i-th element of G's enumeration) solvable in H by
/// `h_solution` but unsolvable in G.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EcWitness {
    pub system: System,
    pub h_solution: Vec<Elem>,
}

/// Attestation that all bounded systems were checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EcExhausted {
    pub max_vars: u32,
    pub max_len: usize,
}

pub type EcVerdict = Verdict<EcExhausted, EcWitness>;

/// Bounded existential closure of G in H along a verified embedding: every
/// system with parameters in G, at most `max_vars` existential variables and
/// words of length at most `max_len` that is solvable in H must already be
/// solvable in G.
///
/// Two tuples satisfy the same such systems iff they satisfy the same single
/// word-facts, so it suffices to compare bounded atomic types: G fails to be
/// e.c. at these bounds iff some H-tuple realizes a bounded type no G-tuple
/// realizes, and that type (pruned to a minimal refuting fragment) is the
/// witness system.
pub fn is_ec_in(
    g: &GroupOracle,
    h: &GroupOracle,
    embedding: &[Elem],
    max_vars: u32,
    max_len: usize,
) -> Result<EcVerdict, EcError> {
    let g_elems = g.elements().ok_or(EcError::NotFiniteExact)?;
    let h_elems = h.elements().ok_or(EcError::NotFiniteExact)?;
    if !g.is_exact() || !h.is_exact() {
        return Err(EcError::NotFiniteExact);
    }
    if embedding.len() != g_elems.len() {
        return Err(EcError::BadEmbedding(format!(
            "expected {} images, got {}",
            g_elems.len(),
            embedding.len()
        )));
    }
    for img in embedding {
        if !h.contains(img) {
            return Err(EcError::BadEmbedding(format!("image {img} is not in H")));
        }
    }
    for i in 0..embedding.len() {
        for j in i + 1..embedding.len() {
            if h.eq_exact(&embedding[i], &embedding[j])? {
                return Err(EcError::BadEmbedding("embedding is not injective".into()));
            }
        }
    }
    for (i, a) in g_elems.iter().enumerate() {
        for (j, b) in g_elems.iter().enumerate() {
            let p = g.mul(a, b)?;
            let pi = g_elems.iter().position(|e| *e == p).expect("closed");
            let image_product = h.mul(&embedding[i], &embedding[j])?;
            if !h.eq_exact(&image_product, &embedding[pi])? {
                return Err(EcError::BadEmbedding("embedding is not a homomorphism".into()));
            }
        }
    }

    let n_params = g_elems.len() as u32;
    for v in 1..=max_vars {
        let words = parameter_words(n_params, v, max_len);
        let g_tuples = all_tuples(g_elems.len(), v as usize);
        let g_types: Vec<Vec<bool>> = g_tuples
            .iter()
            .map(|t| type_vector(g, &g_elems, t, &g_elems, &words))
            .collect::<Result<_, _>>()?;
        for h_tuple in all_tuples(h_elems.len(), v as usize) {
            let h_type = type_vector(h, embedding, &h_tuple, &h_elems, &words)?;
            if g_types.iter().any(|t| *t == h_type) {
                continue;
            }
            // Unrealized type: build and prune the refuting fragment.
            let mut facts: Vec<usize> = Vec::new();
            let mut alive: Vec<bool> = vec![true; g_types.len()];
            for (wi, _) in words.iter().enumerate() {
                let mut killed = false;
                for (ti, alive_flag) in alive.iter_mut().enumerate() {
                    if *alive_flag && g_types[ti][wi] != h_type[wi] {
                        *alive_flag = false;
                        killed = true;
                    }
                }
                if killed {
                    facts.push(wi);
                }
                if alive.iter().all(|a| !a) {
                    break;
                }
            }
            // Backward prune: drop any fact the others already cover.
            let mut keep = facts.clone();
            let mut i = 0;
            while i < keep.len() {
                let candidate: Vec<usize> =
                    keep.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &w)| w).collect();
                let eliminates_all = g_types
                    .iter()
                    .all(|t| candidate.iter().any(|&w| t[w] != h_type[w]));
                if eliminates_all {
                    keep.remove(i);
                } else {
                    i += 1;
                }
            }
            let clauses = keep.iter().map(|&wi| Equation {
                word: words[wi].clone(),
                polarity: if h_type[wi] { Polarity::Equal } else { Polarity::NotEqual },
            });
            let system = System::new(clauses);
            let h_solution = h_tuple.iter().map(|&i| h_elems[i].clone()).collect();
            return Ok(Verdict::No {
                certificate: EcWitness { system, h_solution },
                bound: max_len as u64,
            });
        }
    }
    Ok(Verdict::Yes {
        certificate: EcExhausted { max_vars, max_len },
        bound: max_len as u64,
    })
}

/// Reduced words over variables x1..xv and constants c1..cn, nonempty, of
/// length at most max_len, in breadth-first order.
fn parameter_words(n_params: u32, vars: u32, max_len: usize) -> Vec<Word> {
    let mut letters = Vec::new();
    for i in 1..=vars {
        letters.push(Letter { base: Base::Variable(i), inverse: false });
        letters.push(Letter { base: Base::Variable(i), inverse: true });
    }
    for c in 1..=n_params {
        letters.push(Letter { base: Base::Constant(c), inverse: false });
        letters.push(Letter { base: Base::Constant(c), inverse: true });
    }
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for &l in &letters {
                if let Some(last) = w.last() {
                    if last.base == l.base && last.inverse != l.inverse {
                        continue;
                    }
                }
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out.into_iter().map(Word::from_letters).collect()
}

fn all_tuples(pool: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..arity {
        let mut next = Vec::with_capacity(out.len() * pool);
        for t in &out {
            for i in 0..pool {
                let mut u = t.clone();
                u.push(i);
                next.push(u);
            }
        }
        out = next;
    }
    out
}

/// Bit per word: does it evaluate to the identity on this tuple?
fn type_vector(
    oracle: &GroupOracle,
    params: &[Elem],
    tuple: &[usize],
    pool: &[Elem],
    words: &[Word],
) -> Result<Vec<bool>, OracleError> {
    let identity = oracle.identity();
    let mut inv_cache: BTreeMap<(bool, u32), Elem> = BTreeMap::new();
    let mut out = Vec::with_capacity(words.len());
    for w in words {
        let mut acc = identity.clone();
        for l in w.letters() {
            let base_elem = match l.base {
                Base::Variable(i) => &pool[tuple[i as usize - 1]],
                Base::Constant(c) => &params[c as usize - 1],
            };
            let value = if l.inverse {
                let key = (l.base.is_variable(), l.base.index());
                if !inv_cache.contains_key(&key) {
                    inv_cache.insert(key, oracle.inv(base_elem)?);
                }
                inv_cache[&key].clone()
            } else {
                base_elem.clone()
            };
            acc = oracle.mul(&acc, &value)?;
        }
        out.push(acc == identity);
    }
    Ok(out)
}

/// Brute-force solution search used to audit witnesses: all assignments of
/// pool elements to the system's variables satisfying it, with constants
/// interpreted by `const_env`.
pub fn system_solutions(
    oracle: &GroupOracle,
    system: &System,
    const_env: &Env,
    pool: &[Elem],
) -> Result<Vec<Vec<Elem>>, OracleError> {
    let arity = system.arity() as usize;
    let mut out = Vec::new();
    for tuple in all_tuples(pool.len(), arity) {
        let mut env = const_env.clone();
        for (i, &pi) in tuple.iter().enumerate() {
            env.bind_var(i as u32 + 1, pool[pi].clone());
        }
        if crate::oracle::satisfies(oracle, system, &env)?.is_yes() {
            out.push(tuple.iter().map(|&pi| pool[pi].clone()).collect());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::parse_word;

    fn w(s: &str) -> Word {
        parse_word(s).unwrap()
    }

    fn sys(clauses: &[(&str, bool)]) -> System {
        System::new(clauses.iter().map(|&(text, eq)| Equation {
            word: w(text),
            polarity: if eq { Polarity::Equal } else { Polarity::NotEqual },
        }))
    }

    #[test]
    fn contradictory_pair_is_inconsistent() {
        let s = sys(&[("c1", true), ("c1", false)]);
        assert!(consistency_check(&s, SystemClass::All, 100).unwrap().is_no());
    }

    #[test]
    fn separable_system_is_consistent() {
        let s = sys(&[("c1*c2*c3^-1", true), ("c1", false)]);
        match consistency_check(&s, SystemClass::All, 100).unwrap() {
            Verdict::Yes { certificate, .. } => {
                assert_eq!(certificate.separated.len(), 1);
                assert_eq!(certificate.separated[0].1.degree, 2);
            }
            other => panic!("expected Yes, got {other:?}"),
        }
    }

    #[test]
    fn torsion_heuristic_fires() {
        let s = sys(&[("c1^2", true), ("c1", false)]);
        assert!(consistency_check(&s, SystemClass::All, 100).unwrap().is_yes());
        match consistency_check(&s, SystemClass::TorsionFreeHeuristic, 100).unwrap() {
            Verdict::No { certificate: InconsistencyWitness::ProvenTorsion { exponent, .. }, .. } => {
                assert_eq!(exponent, 2);
            }
            other => panic!("expected torsion refutation, got {other:?}"),
        }
    }

    #[test]
    fn compile_z2_fragment() {
        let s = sys(&[("c1", true), ("c2*c2*c1^-1", true), ("c2*c1^-1", false)]);
        let t = compile_system(&s).unwrap();
        assert_eq!(t.identity(), Some(1));
        assert_eq!(t.product(2, 2), Some(1));
        assert_eq!(t.product(1, 2), Some(2));
        assert_eq!(t.inverse(2), Some(2));
        assert!(t.verify_laws().is_ok());
    }

    #[test]
    fn compile_empty_state() {
        assert!(compile_system(&System::default()).unwrap().is_empty());
    }

    #[test]
    fn closure_detects_conflicting_products() {
        let mut t = PartialEnumeratedGroup::new();
        t.insert_product(1, 2, 3).unwrap();
        assert!(t.insert_product(1, 2, 4).is_err());
    }

    #[test]
    fn closure_derives_identity_laws() {
        let mut t = PartialEnumeratedGroup::new();
        t.designate_identity(1).unwrap();
        t.insert_product(2, 3, 4).unwrap();
        t.close().unwrap();
        assert_eq!(t.product(1, 2), Some(2));
        assert_eq!(t.product(4, 1), Some(4));
        assert_eq!(t.inverse(1), Some(1));
    }

    #[test]
    fn game_accepts_and_rejects_moves() {
        let mut state = GameState::new(100, SystemClass::All);
        state.play(sys(&[("c1*c2*c3^-1", true), ("c1", false)])).unwrap();

        // Dropping a clause is not an extension.
        let mut bad = GameState::new(100, SystemClass::All);
        bad.play(sys(&[("c1*c2*c3^-1", true), ("c1", false)])).unwrap();
        assert_eq!(bad.play(sys(&[("c1", false)])), Err(MoveError::NotAnExtension));

        // Adding c3 = e to a state with c3 != e is rejected.
        let mut state = GameState::new(100, SystemClass::All);
        state.play(sys(&[("c3", false)])).unwrap();
        let extension = state.system().union(&sys(&[("c3", true)]));
        assert!(matches!(
            state.play(extension),
            Err(MoveError::TableContradiction(_)) | Err(MoveError::Inconsistent(_))
        ));
    }

    #[test]
    fn diagonal_order_is_exhaustive() {
        assert_eq!(diagonal_pair(0), (1, 1));
        assert_eq!(diagonal_pair(1), (1, 2));
        assert_eq!(diagonal_pair(2), (2, 1));
        assert_eq!(diagonal_pair(3), (1, 3));
        let mut seen = BTreeSet::new();
        for idx in 0..200 {
            seen.insert(diagonal_pair(idx));
        }
        for m in 1..=10 {
            for n in 1..=10 {
                if m + n <= 20 {
                    assert!(seen.contains(&(m, n)) || (m, n) == (10, 10));
                }
            }
        }
        assert!(seen.contains(&(10, 10)));
    }

    #[test]
    fn scheduler_uses_identity_forcing() {
        let mut state = GameState::new(200, SystemClass::All);
        state.play(sys(&[("c1", true)])).unwrap();
        // With c1 = e, the pairs (1,1), (1,2) and (2,1) are all carried by
        // the identity laws: their product facts are forced without playing
        // a clause or inventing a fresh constant.
        definitive_schedule(&mut state, 3).unwrap();
        assert_eq!(state.system(), &sys(&[("c1", true)]));
        let mut t = compile_system(state.system()).unwrap();
        t.mention(2);
        t.close().unwrap();
        assert_eq!(t.product(1, 2), Some(2));
        assert_eq!(t.product(2, 1), Some(2));
        assert_eq!(t.product(1, 1), Some(1));
    }

    #[test]
    fn scheduler_introduces_fresh_constants() {
        let mut state = GameState::new(100, SystemClass::All);
        definitive_schedule(&mut state, 1).unwrap();
        let t = compile_system(state.system()).unwrap();
        // Pair (1,1) gets a product fact with the least unused constant.
        assert_eq!(t.product(1, 1), Some(2));
    }

    #[test]
    fn open_dense_strategy_forces_target() {
        let target = System::new(vec![
            Equation::equal(w("x1^2")),
            Equation::not_equal(w("x1")),
        ]);
        let mut state = GameState::new(100, SystemClass::All);
        state.play(sys(&[("c1*c2*c4^-1", true)])).unwrap();
        let strategy = Strategy::OpenDense { target };
        let response = strategy.respond(&state);
        state.play(response).unwrap();
        // The fresh constant 3 is forced to be an involution.
        let t = compile_system(state.system()).unwrap();
        assert!(t.nonidentity.contains(&3));
        let has_involution = state.system().contains(&Equation::equal(w("c3^2")));
        assert!(has_involution);
    }

    #[test]
    fn centralizer_strategy_adds_commuting_witness() {
        let mut state = GameState::new(100, SystemClass::All);
        state.play(sys(&[("c1*c2*c3^-1", true)])).unwrap();
        let response = Strategy::Centralizer.respond(&state);
        state.play(response).unwrap();
        // Fresh constant 4 commutes with 1, 2, 3 and is nontrivial.
        assert!(state.system().contains(&Equation::not_equal(w("c4"))));
        assert!(state.system().contains(&Equation::equal(w("c4*c1*c4^-1*c1^-1"))));
        assert!(state.system().contains(&Equation::equal(w("c4*c3*c4^-1*c3^-1"))));
    }

    #[test]
    fn replay_reproduces_state() {
        let config = AutoGameConfig { rounds: 8, seed: 7, bound: 64, class: SystemClass::All };
        let state = auto_game(&config, &Strategy::Centralizer).unwrap();
        let replayed = GameState::replay(config.bound, config.class, state.log()).unwrap();
        assert_eq!(replayed.system(), state.system());
        let json1 = serde_json::to_string(state.log()).unwrap();
        let json2 = serde_json::to_string(replayed.log()).unwrap();
        assert_eq!(json1, json2);
    }

    #[test]
    fn ec_z2_in_z4_fails_on_square_root() {
        let g = GroupOracle::cyclic(2);
        let h = GroupOracle::cyclic(4);
        let embedding = vec![Elem::Index(0), Elem::Index(2)];
        match is_ec_in(&g, &h, &embedding, 2, 4).unwrap() {
            Verdict::No { certificate, .. } => {
                // The witness is solvable in H, unsolvable in G.
                let mut const_env_h = Env::new();
                const_env_h.bind_const(1, Elem::Index(0));
                const_env_h.bind_const(2, Elem::Index(2));
                let h_solutions = system_solutions(
                    &h,
                    &certificate.system,
                    &const_env_h,
                    &h.elements().unwrap(),
                )
                .unwrap();
                assert!(!h_solutions.is_empty());
                assert!(h_solutions.contains(&certificate.h_solution));

                let mut const_env_g = Env::new();
                const_env_g.bind_const(1, Elem::Index(0));
                const_env_g.bind_const(2, Elem::Index(1));
                let g_solutions = system_solutions(
                    &g,
                    &certificate.system,
                    &const_env_g,
                    &g.elements().unwrap(),
                )
                .unwrap();
                assert!(g_solutions.is_empty());
            }
            other => panic!("expected No, got {other:?}"),
        }
    }

    #[test]
    fn ec_identity_embedding_is_closed() {
        for oracle in [GroupOracle::cyclic(3), GroupOracle::Table(crate::oracle::MulTable::dihedral(2))] {
            let elems = oracle.elements().unwrap();
            let verdict = is_ec_in(&oracle, &oracle, &elems, 2, 3).unwrap();
            assert!(verdict.is_yes(), "{} should be e.c. in itself", oracle.name());
        }
    }

    #[test]
    fn ec_z2_in_klein_fails() {
        let g = GroupOracle::cyclic(2);
        let h = GroupOracle::direct_sum(vec![GroupOracle::cyclic(2), GroupOracle::cyclic(2)])
            .unwrap();
        let embedding = vec![
            Elem::Tuple(vec![Elem::Index(0), Elem::Index(0)]),
            Elem::Tuple(vec![Elem::Index(1), Elem::Index(0)]),
        ];
        assert!(is_ec_in(&g, &h, &embedding, 2, 4).unwrap().is_no());
    }

    #[test]
    fn ec_rejects_bad_embeddings() {
        let g = GroupOracle::cyclic(2);
        let h = GroupOracle::cyclic(4);
        // Not a homomorphism: sends the involution to a generator.
        let embedding = vec![Elem::Index(0), Elem::Index(1)];
        assert!(matches!(
            is_ec_in(&g, &h, &embedding, 1, 2),
            Err(EcError::BadEmbedding(_))
        ));
    }
}
