//! Cayley balls around the identity of a marked group, rooted labeled-graph
//! comparison, the marked-group metric, the ball-to-system device, and the
//! truncated reduction from partial enumerated data to marked relators.
//!
//! Balls are deterministic rooted graphs: per vertex there is at most one
//! out-edge and one in-edge per label, because group translations are
//! bijections. That determinism forces any root- and label-preserving
//! isomorphism to be unique, which keeps the comparison linear.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::collections::HashMap;
use thiserror::Error;

use crate::forcing::{MissingFact, PartialEnumeratedGroup};
use crate::oracle::{Elem, GroupOracle, MarkedGroup, OracleError};
use crate::word::{Base, Equation, Letter, System, Word};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MarkedError {
    #[error("marking lengths differ: {a} vs {b}")]
    MarkingLength { a: usize, b: usize },
    #[error("label alphabets differ: {a} vs {b}")]
    LabelCount { a: u32, b: u32 },
    #[error("radii differ: {a} vs {b}")]
    RadiusMismatch { a: u32, b: u32 },
    #[error("ball construction hit an undecided equality at bound {bound}")]
    Unknown { bound: u64 },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Rooted, edge-labeled, deterministic finite graph of radius `radius`.
/// Vertex 0 is the root; vertices are numbered in breadth-first discovery
/// order (labels 1..=k positively, then their inverses).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    radius: u32,
    labels: u32,
    out: Vec<Vec<Option<u32>>>,
    inn: Vec<Vec<Option<u32>>>,
    depth: Vec<u32>,
}

impl Ball {
    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn labels(&self) -> u32 {
        self.labels
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    pub fn depth(&self, v: u32) -> u32 {
        self.depth[v as usize]
    }

    pub fn out_edge(&self, v: u32, label: u32) -> Option<u32> {
        self.out[v as usize][label as usize - 1]
    }

    pub fn in_edge(&self, v: u32, label: u32) -> Option<u32> {
        self.inn[v as usize][label as usize - 1]
    }

    pub fn edges(&self) -> Vec<(u32, u32, u32)> {
        let mut out = Vec::new();
        for v in 0..self.out.len() as u32 {
            for label in 1..=self.labels {
                if let Some(w) = self.out_edge(v, label) {
                    out.push((v, label, w));
                }
            }
        }
        out
    }

    /// Builds a ball directly from an edge list. Rejects nondeterminism.
    pub fn from_edges(
        radius: u32,
        labels: u32,
        vertices: usize,
        edges: &[(u32, u32, u32)],
    ) -> Result<Ball, BallFormatError> {
        let mut out = vec![vec![None; labels as usize]; vertices];
        let mut inn = vec![vec![None; labels as usize]; vertices];
        for &(u, label, v) in edges {
            if label == 0 || label > labels {
                return Err(BallFormatError::BadLabel { label });
            }
            if u as usize >= vertices || v as usize >= vertices {
                return Err(BallFormatError::BadVertex { vertex: u.max(v) });
            }
            let slot = &mut out[u as usize][label as usize - 1];
            if slot.replace(v).is_some() {
                return Err(BallFormatError::OutEdgeClash { vertex: u, label });
            }
            let slot = &mut inn[v as usize][label as usize - 1];
            if slot.replace(u).is_some() {
                return Err(BallFormatError::InEdgeClash { vertex: v, label });
            }
        }
        // Depths via BFS over labels and formal inverses.
        let mut depth = vec![u32::MAX; vertices];
        let mut queue = std::collections::VecDeque::from([0u32]);
        if vertices > 0 {
            depth[0] = 0;
        }
        while let Some(v) = queue.pop_front() {
            for label in 1..=labels {
                for next in [out[v as usize][label as usize - 1], inn[v as usize][label as usize - 1]]
                    .into_iter()
                    .flatten()
                {
                    if depth[next as usize] == u32::MAX {
                        depth[next as usize] = depth[v as usize] + 1;
                        queue.push_back(next);
                    }
                }
            }
        }
        if depth.iter().any(|&d| d == u32::MAX || d > radius) {
            return Err(BallFormatError::Unreachable);
        }
        Ok(Ball { radius, labels, out, inn, depth })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BallFormatError {
    #[error("edge label {label} out of range")]
    BadLabel { label: u32 },
    #[error("vertex {vertex} out of range")]
    BadVertex { vertex: u32 },
    #[error("vertex {vertex} has two out-edges labeled {label}")]
    OutEdgeClash { vertex: u32, label: u32 },
    #[error("vertex {vertex} has two in-edges labeled {label}")]
    InEdgeClash { vertex: u32, label: u32 },
    #[error("some vertex is not reachable from the root within the radius")]
    Unreachable,
}

/// On-disk form: `{"radius": r, "labels": k, "root": 0, "edges": [[u,i,v]]}`.
#[derive(Serialize, Deserialize)]
pub struct BallFile {
    pub radius: u32,
    pub labels: u32,
    pub root: u32,
    pub edges: Vec<(u32, u32, u32)>,
}

impl BallFile {
    pub fn validate(self) -> Result<Ball, BallFormatError> {
        if self.root != 0 {
            return Err(BallFormatError::BadVertex { vertex: self.root });
        }
        let vertices = self
            .edges
            .iter()
            .map(|&(u, _, v)| u.max(v) as usize + 1)
            .max()
            .unwrap_or(1);
        Ball::from_edges(self.radius, self.labels, vertices, &self.edges)
    }
}

impl From<&Ball> for BallFile {
    fn from(b: &Ball) -> BallFile {
        BallFile { radius: b.radius, labels: b.labels, root: 0, edges: b.edges() }
    }
}

/// Result of a ball construction over a possibly inexact oracle.
#[derive(Clone, Debug)]
pub enum BallOutcome {
    Exact(Ball),
    Unknown { bound: u64 },
}

impl BallOutcome {
    pub fn exact(self) -> Option<Ball> {
        match self {
            BallOutcome::Exact(b) => Some(b),
            BallOutcome::Unknown { .. } => None,
        }
    }
}

/// Finds the id of `candidate` among `vertices`, or None if it is new.
/// Exact oracles compare canonical forms; inexact ones ask `eq` pairwise and
/// abort on the first Unknown.
fn find_vertex(
    oracle: &GroupOracle,
    vertices: &[Elem],
    index: &HashMap<Elem, u32>,
    candidate: &Elem,
) -> Result<Result<Option<u32>, u64>, OracleError> {
    if oracle.is_exact() {
        return Ok(Ok(index.get(candidate).copied()));
    }
    for (i, v) in vertices.iter().enumerate() {
        match oracle.eq(v, candidate)? {
            crate::verdict::Verdict::Yes { .. } => return Ok(Ok(Some(i as u32))),
            crate::verdict::Verdict::No { .. } => continue,
            crate::verdict::Verdict::Unknown { bound } => return Ok(Err(bound)),
        }
    }
    Ok(Ok(None))
}

/// Breadth-first exploration of the radius-`radius` ball around the identity,
/// multiplying marking generators on the right. Returns an exact induced
/// ball when every equality decision was definite.
pub fn ball(marked: &MarkedGroup, radius: u32) -> Result<BallOutcome, OracleError> {
    let oracle = &marked.oracle;
    let k = marked.marking.len() as u32;
    let mut vertices: Vec<Elem> = vec![oracle.identity()];
    let mut depth: Vec<u32> = vec![0];
    let mut index: HashMap<Elem, u32> = HashMap::from([(oracle.identity(), 0)]);

    let mut frontier: Vec<u32> = vec![0];
    for d in 1..=radius {
        let mut next = Vec::new();
        for &v in &frontier {
            let base = vertices[v as usize].clone();
            for (inverse, gi) in steps(k) {
                let gen = &marked.marking[gi as usize - 1];
                let step = if inverse { oracle.inv(gen)? } else { gen.clone() };
                let target = oracle.mul(&base, &step)?;
                match find_vertex(oracle, &vertices, &index, &target)? {
                    Err(bound) => return Ok(BallOutcome::Unknown { bound }),
                    Ok(Some(_)) => {}
                    Ok(None) => {
                        let id = vertices.len() as u32;
                        index.insert(target.clone(), id);
                        vertices.push(target);
                        depth.push(d);
                        next.push(id);
                    }
                }
            }
        }
        frontier = next;
    }

    // Induced edges: (u, i) -> v present whenever u and u*s_i are both inside.
    let n = vertices.len();
    let mut out = vec![vec![None; k as usize]; n];
    let mut inn = vec![vec![None; k as usize]; n];
    for u in 0..n as u32 {
        for gi in 1..=k {
            let target = oracle.mul(&vertices[u as usize], &marked.marking[gi as usize - 1])?;
            match find_vertex(oracle, &vertices, &index, &target)? {
                Err(bound) => return Ok(BallOutcome::Unknown { bound }),
                Ok(Some(v)) => {
                    out[u as usize][gi as usize - 1] = Some(v);
                    inn[v as usize][gi as usize - 1] = Some(u);
                }
                Ok(None) => {}
            }
        }
    }
    Ok(BallOutcome::Exact(Ball { radius, labels: k, out, inn, depth }))
}

/// Breadth-first step order: each positive generator first, then the formal
/// inverses, both by label index.
fn steps(k: u32) -> impl Iterator<Item = (bool, u32)> {
    (1..=k).map(|g| (false, g)).chain((1..=k).map(|g| (true, g)))
}

/// Decides rooted labeled isomorphism by growing the unique correspondence
/// forced by determinism: start at the roots, follow out- and in-edges per
/// label, and fail on any presence or consistency mismatch.
pub fn ball_isomorphic(b1: &Ball, b2: &Ball) -> Result<bool, MarkedError> {
    if b1.labels != b2.labels {
        return Err(MarkedError::LabelCount { a: b1.labels, b: b2.labels });
    }
    if b1.radius != b2.radius {
        return Err(MarkedError::RadiusMismatch { a: b1.radius, b: b2.radius });
    }
    if b1.vertex_count() != b2.vertex_count() {
        return Ok(false);
    }
    let n = b1.vertex_count();
    let mut map = vec![u32::MAX; n];
    let mut rev = vec![u32::MAX; n];
    map[0] = 0;
    rev[0] = 0;
    let mut queue = std::collections::VecDeque::from([(0u32, 0u32)]);
    let mut matched = 1usize;
    while let Some((u, v)) = queue.pop_front() {
        for label in 1..=b1.labels {
            for follow in [Ball::out_edge, Ball::in_edge] {
                let a = follow(b1, u, label);
                let b = follow(b2, v, label);
                match (a, b) {
                    (None, None) => {}
                    (Some(_), None) | (None, Some(_)) => return Ok(false),
                    (Some(a), Some(b)) => {
                        let ma = map[a as usize];
                        let mb = rev[b as usize];
                        if ma == u32::MAX && mb == u32::MAX {
                            map[a as usize] = b;
                            rev[b as usize] = a;
                            matched += 1;
                            queue.push_back((a, b));
                        } else if ma != b || mb != a {
                            return Ok(false);
                        }
                    }
                }
            }
        }
    }
    Ok(matched == n)
}

/// Distance in the marked-group metric, reported either exactly as e^-n or
/// as the upper bound e^-max_radius when no disagreement was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MarkedDistance {
    /// Balls agree up to radius `agree` and differ at `agree + 1`.
    Exact { agree: u32 },
    /// Balls agree up to radius `max_radius`; the distance is at most
    /// e^-max_radius.
    AtMost { max_radius: u32 },
}

impl MarkedDistance {
    pub fn value(self) -> f64 {
        match self {
            MarkedDistance::Exact { agree } => (-(f64::from(agree))).exp(),
            MarkedDistance::AtMost { max_radius } => (-(f64::from(max_radius))).exp(),
        }
    }
}

/// Largest n <= max_radius with isomorphic n-balls. Balls of radius 0 are
/// always isomorphic, so a disagreement at radius 1 already gives distance
/// e^0 = 1.
pub fn marked_distance(
    m1: &MarkedGroup,
    m2: &MarkedGroup,
    max_radius: u32,
) -> Result<MarkedDistance, MarkedError> {
    if m1.marking.len() != m2.marking.len() {
        return Err(MarkedError::MarkingLength { a: m1.marking.len(), b: m2.marking.len() });
    }
    for r in 1..=max_radius {
        let b1 = match ball(m1, r)? {
            BallOutcome::Exact(b) => b,
            BallOutcome::Unknown { bound } => return Err(MarkedError::Unknown { bound }),
        };
        let b2 = match ball(m2, r)? {
            BallOutcome::Exact(b) => b,
            BallOutcome::Unknown { bound } => return Err(MarkedError::Unknown { bound }),
        };
        if !ball_isomorphic(&b1, &b2)? {
            return Ok(MarkedDistance::Exact { agree: r - 1 });
        }
    }
    Ok(MarkedDistance::AtMost { max_radius })
}

/// Breadth-first geodesic words for every ball vertex: first-discovered,
/// ties broken by the fixed label order (positive labels before inverses).
pub fn geodesics(ball: &Ball) -> Vec<Word> {
    let n = ball.vertex_count();
    let mut words: Vec<Option<Word>> = vec![None; n];
    words[0] = Some(Word::empty());
    let mut queue = std::collections::VecDeque::from([0u32]);
    while let Some(v) = queue.pop_front() {
        let base = words[v as usize].clone().expect("visited");
        for (inverse, label) in steps(ball.labels) {
            let next = if inverse { ball.in_edge(v, label) } else { ball.out_edge(v, label) };
            if let Some(w) = next {
                if words[w as usize].is_none() {
                    let letter = Letter { base: Base::Variable(label), inverse };
                    words[w as usize] = Some(base.concat(&Word::from_letters([letter])));
                    queue.push_back(w);
                }
            }
        }
    }
    words.into_iter().map(|w| w.expect("ball is connected from the root")).collect()
}

/// The finite system determined by a ball: one variable per marking
/// generator, an equation per ball edge, and an inequation per vertex pair.
/// Any tuple satisfying the system carries an embedded copy of the ball,
/// checkable by re-evaluating the geodesics.
pub fn ball_to_system(ball: &Ball) -> System {
    let geo = geodesics(ball);
    let mut clauses = BTreeSet::new();
    for (u, label, v) in ball.edges() {
        let word = geo[u as usize]
            .concat(&Word::generator(label))
            .concat(&geo[v as usize].inverse());
        if !word.is_empty() {
            clauses.insert(Equation::equal(word));
        }
    }
    for u in 0..geo.len() {
        for v in u + 1..geo.len() {
            let word = geo[u].concat(&geo[v].inverse());
            let word = std::cmp::min(word.clone(), word.inverse());
            if !word.is_empty() {
                clauses.insert(Equation::not_equal(word));
            }
        }
    }
    System::with_arity(ball.labels, clauses).expect("ball labels cover the variables")
}

/// Re-extraction check for `ball_to_system`: maps every ball vertex into the
/// group along its geodesic and verifies injectivity and every ball edge.
/// Exact oracles only.
pub fn verify_ball_embedding(b: &Ball, marked: &MarkedGroup) -> Result<bool, OracleError> {
    let geo = geodesics(b);
    let env = marked.env();
    let mut images = Vec::with_capacity(geo.len());
    for w in &geo {
        images.push(crate::oracle::evaluate(&marked.oracle, w, &env)?);
    }
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            if marked.oracle.eq_exact(&images[i], &images[j])? {
                return Ok(false);
            }
        }
    }
    for (u, label, v) in b.edges() {
        let step = &marked.marking[label as usize - 1];
        let reached = marked.oracle.mul(&images[u as usize], step)?;
        if !marked.oracle.eq_exact(&reached, &images[v as usize])? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Truncation of the marked-relator reduction: all nonempty freely reduced
/// words of arity <= n and length <= length_bound whose evaluation on the
/// constants 1..n lands on the identity of the partial table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TauStage {
    Exact(BTreeSet<Word>),
    /// The table lacks facts needed to evaluate some word.
    Unknown { missing: BTreeSet<MissingFact> },
}

pub fn tau_stage(t: &PartialEnumeratedGroup, n: u32, length_bound: usize) -> TauStage {
    let identity = t.identity();
    let mut missing = BTreeSet::new();
    if identity.is_none() {
        missing.insert(MissingFact::Identity);
    }
    let mut relators = BTreeSet::new();
    for word in variable_words(n, length_bound) {
        match eval_in_partial(t, &word) {
            Ok(value) => {
                if Some(value) == identity {
                    relators.insert(word);
                }
            }
            Err(fact) => {
                missing.insert(fact);
            }
        }
    }
    if missing.is_empty() {
        TauStage::Exact(relators)
    } else {
        TauStage::Unknown { missing }
    }
}

fn eval_in_partial(t: &PartialEnumeratedGroup, w: &Word) -> Result<u32, MissingFact> {
    let mut acc: Option<u32> = None;
    for l in w.letters() {
        let i = match l.base {
            Base::Variable(i) => i,
            Base::Constant(c) => c,
        };
        let value = if l.inverse {
            t.inverse(i).ok_or(MissingFact::Inverse(i))?
        } else {
            i
        };
        acc = Some(match acc {
            None => value,
            Some(prev) => t.product(prev, value).ok_or(MissingFact::Product(prev, value))?,
        });
    }
    acc.ok_or(MissingFact::Identity)
}

/// Nonempty freely reduced words over x1..xn of length <= max_len.
pub fn variable_words(n: u32, max_len: usize) -> Vec<Word> {
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for i in 1..=n {
                for inverse in [false, true] {
                    let letter = Letter { base: Base::Variable(i), inverse };
                    if let Some(last) = w.last() {
                        if last.cancels_with(letter) {
                            continue;
                        }
                    }
                    let mut v = w.clone();
                    v.push(letter);
                    next.push(v);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out.into_iter().map(Word::from_letters).collect()
}

trait CancelsWith {
    fn cancels_with(&self, other: Letter) -> bool;
}

impl CancelsWith for Letter {
    fn cancels_with(&self, other: Letter) -> bool {
        self.base == other.base && self.inverse != other.inverse
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{evaluate, satisfies, GroupOracle};
    use crate::word::parse_word;

    fn marked(spec: &str) -> MarkedGroup {
        MarkedGroup::with_default_marking(GroupOracle::parse_builtin(spec).unwrap())
    }

    fn exact_ball(m: &MarkedGroup, r: u32) -> Ball {
        ball(m, r).unwrap().exact().expect("exact oracle")
    }

    #[test]
    fn integer_one_ball_is_a_path() {
        let b = exact_ball(&marked("Z"), 1);
        assert_eq!(b.vertex_count(), 3);
        // Discovery order: 0, +1, -1. Edges: 0 -> 1 and -1 -> 0.
        assert_eq!(b.out_edge(0, 1), Some(1));
        assert_eq!(b.out_edge(2, 1), Some(0));
        assert_eq!(b.out_edge(1, 1), None);
    }

    #[test]
    fn cyclic_two_one_ball() {
        let b = exact_ball(&marked("Z/2"), 1);
        assert_eq!(b.vertex_count(), 2);
        assert_eq!(b.out_edge(0, 1), Some(1));
        assert_eq!(b.out_edge(1, 1), Some(0));
    }

    #[test]
    fn radius_zero_is_a_single_root()  {
        let b = exact_ball(&marked("BS(1,-1)"), 0);
        assert_eq!(b.vertex_count(), 1);
        assert!(b.edges().is_empty());
    }

    #[test]
    fn one_balls_of_z_and_z5_agree_two_balls_differ() {
        let z = marked("Z");
        let z5 = marked("Z/5");
        let b1 = exact_ball(&z, 1);
        let c1 = exact_ball(&z5, 1);
        assert!(ball_isomorphic(&b1, &c1).unwrap());
        let b2 = exact_ball(&z, 2);
        let c2 = exact_ball(&z5, 2);
        assert!(!ball_isomorphic(&b2, &c2).unwrap());
        assert!(ball_isomorphic(&b2, &b2).unwrap());
    }

    #[test]
    fn marked_distance_examples() {
        assert_eq!(
            marked_distance(&marked("Z"), &marked("Z/5"), 5).unwrap(),
            MarkedDistance::Exact { agree: 1 }
        );
        assert_eq!(
            marked_distance(&marked("Z/2"), &marked("Z/3"), 5).unwrap(),
            MarkedDistance::Exact { agree: 0 }
        );
        assert_eq!(
            marked_distance(&marked("Z"), &marked("Z"), 8).unwrap(),
            MarkedDistance::AtMost { max_radius: 8 }
        );
        assert_eq!(MarkedDistance::Exact { agree: 0 }.value(), 1.0);
    }

    #[test]
    fn distance_requires_equal_marking_lengths() {
        assert!(matches!(
            marked_distance(&marked("Z"), &marked("Z^2"), 3),
            Err(MarkedError::MarkingLength { .. })
        ));
    }

    #[test]
    fn ball_system_of_z2_two_ball() {
        let system = ball_to_system(&exact_ball(&marked("Z/2"), 2));
        let expected = System::with_arity(
            1,
            vec![
                Equation::equal(parse_word("x1^2").unwrap()),
                Equation::not_equal(parse_word("x1").unwrap()),
            ],
        )
        .unwrap();
        assert_eq!(system, expected);
    }

    #[test]
    fn ball_system_of_z_one_ball() {
        let system = ball_to_system(&exact_ball(&marked("Z"), 1));
        let expected = System::with_arity(
            1,
            vec![
                Equation::not_equal(parse_word("x1").unwrap()),
                Equation::not_equal(parse_word("x1^2").unwrap()),
            ],
        )
        .unwrap();
        assert_eq!(system, expected);
    }

    #[test]
    fn radius_zero_system_is_empty() {
        let system = ball_to_system(&exact_ball(&marked("Z"), 0));
        assert!(system.is_empty());
        assert_eq!(system.arity(), 1);
    }

    #[test]
    fn round_trip_satisfaction() {
        for spec in ["Z", "Z^2", "Z/2", "Z/5", "F2", "BS(1,-1)", "lamplighter"] {
            let m = marked(spec);
            for r in 0..=2 {
                let system = ball_to_system(&exact_ball(&m, r));
                let verdict = satisfies(&m.oracle, &system, &m.env()).unwrap();
                assert!(verdict.is_yes(), "round trip failed for {spec} at radius {r}");
                assert!(verify_ball_embedding(&exact_ball(&m, r), &m).unwrap());
            }
        }
    }

    #[test]
    fn geodesics_evaluate_to_their_vertices() {
        let m = marked("F2");
        let b = exact_ball(&m, 2);
        let geo = geodesics(&b);
        let env = m.env();
        let mut seen = std::collections::HashSet::new();
        for w in &geo {
            let v = evaluate(&m.oracle, w, &env).unwrap();
            assert!(seen.insert(v), "geodesics must hit distinct elements");
        }
    }

    #[test]
    fn ball_monotone_refutation() {
        // Non-isomorphic at r stays non-isomorphic at every larger radius.
        let z = marked("Z");
        let z5 = marked("Z/5");
        for r in 2..=5 {
            assert!(!ball_isomorphic(&exact_ball(&z, r), &exact_ball(&z5, r)).unwrap());
        }
    }

    #[test]
    fn ball_of_fp_oracle_may_be_unknown() {
        use crate::oracle::{Elem, Presentation};
        // Marking by x1^120 (trivial in Z/60, but underivable at bound 2 and
        // unseparable in degree <= 5) stalls the very first merge decision.
        let p = Presentation::new(1, vec![parse_word("x1^60").unwrap()]).unwrap();
        let oracle = GroupOracle::fp(p, 2);
        let m = MarkedGroup::new(oracle, vec![Elem::Word(vec![(1, false); 120])]).unwrap();
        match ball(&m, 1).unwrap() {
            BallOutcome::Unknown { bound } => assert_eq!(bound, 2),
            BallOutcome::Exact(_) => panic!("tiny bound cannot decide the marking"),
        }
    }

    #[test]
    fn ball_json_round_trip() {
        let b = exact_ball(&marked("Z/5"), 2);
        let file = BallFile::from(&b);
        let json = serde_json::to_string(&file).unwrap();
        let back: BallFile = serde_json::from_str(&json).unwrap();
        let restored = back.validate().unwrap();
        assert!(ball_isomorphic(&b, &restored).unwrap());
    }

    #[test]
    fn tau_stage_of_z2_table() {
        // Partial table of Z/2 with the involution as element 1 and the
        // identity as element 2.
        let mut t = PartialEnumeratedGroup::new();
        t.designate_identity(2).unwrap();
        t.insert_product(1, 1, 2).unwrap();
        t.insert_product(1, 2, 1).unwrap();
        t.insert_product(2, 1, 1).unwrap();
        t.insert_product(2, 2, 2).unwrap();
        t.insert_inverse(1, 1).unwrap();
        t.insert_inverse(2, 2).unwrap();
        match tau_stage(&t, 1, 2) {
            TauStage::Exact(words) => {
                let expected: BTreeSet<Word> = ["x1^2", "x1^-2"]
                    .iter()
                    .map(|s| parse_word(s).unwrap())
                    .collect();
                assert_eq!(words, expected);
            }
            other => panic!("expected exact stage, got {other:?}"),
        }
    }

    #[test]
    fn tau_stage_reports_missing_facts() {
        let mut t = PartialEnumeratedGroup::new();
        t.designate_identity(3).unwrap();
        match tau_stage(&t, 1, 2) {
            TauStage::Unknown { missing } => {
                assert!(missing.contains(&MissingFact::Product(1, 1)));
                assert!(missing.contains(&MissingFact::Inverse(1)));
            }
            other => panic!("expected unknown, got {other:?}"),
        }
    }
}
