//! Finite groups given by explicit multiplication tables.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("table is empty")]
    Empty,
    #[error("row {row} has {got} entries, expected {expected}")]
    RaggedRow { row: u32, got: usize, expected: usize },
    #[error("entry ({a},{b}) = {value} is out of range")]
    EntryOutOfRange { a: u32, b: u32, value: u32 },
    #[error("no two-sided identity element")]
    NoIdentity,
    #[error("element {element} has no inverse")]
    NoInverse { element: u32 },
    #[error("associativity fails on ({a},{b},{c})")]
    NotAssociative { a: u32, b: u32, c: u32 },
    #[error("marking element {element} is out of range")]
    MarkingOutOfRange { element: u32 },
}

/// Validated multiplication table. Elements are `0..order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MulTable {
    name: String,
    order: u32,
    mul: Vec<u32>,
    inv: Vec<u32>,
    identity: u32,
    marking: Vec<u32>,
}

impl MulTable {
    /// Validates the four group axioms and derives identity and inverses.
    /// `marking` defaults to all non-identity elements when `None`.
    pub fn new(
        name: impl Into<String>,
        rows: Vec<Vec<u32>>,
        marking: Option<Vec<u32>>,
    ) -> Result<MulTable, TableError> {
        let order = rows.len() as u32;
        if order == 0 {
            return Err(TableError::Empty);
        }
        let mut mul = Vec::with_capacity((order * order) as usize);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != order as usize {
                return Err(TableError::RaggedRow {
                    row: i as u32,
                    got: row.len(),
                    expected: order as usize,
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v >= order {
                    return Err(TableError::EntryOutOfRange { a: i as u32, b: j as u32, value: v });
                }
                mul.push(v);
            }
        }
        let at = |a: u32, b: u32| mul[(a * order + b) as usize];
        let identity = (0..order)
            .find(|&e| (0..order).all(|a| at(e, a) == a && at(a, e) == a))
            .ok_or(TableError::NoIdentity)?;
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    if at(at(a, b), c) != at(a, at(b, c)) {
                        return Err(TableError::NotAssociative { a, b, c });
                    }
                }
            }
        }
        let mut inv = Vec::with_capacity(order as usize);
        for a in 0..order {
            let b = (0..order)
                .find(|&b| at(a, b) == identity && at(b, a) == identity)
                .ok_or(TableError::NoInverse { element: a })?;
            inv.push(b);
        }
        let marking = match marking {
            Some(m) => {
                for &g in &m {
                    if g >= order {
                        return Err(TableError::MarkingOutOfRange { element: g });
                    }
                }
                m
            }
            None => (0..order).filter(|&g| g != identity).collect(),
        };
        Ok(MulTable { name: name.into(), order, mul, inv, identity, marking })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn identity(&self) -> u32 {
        self.identity
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.mul[(a * self.order + b) as usize]
    }

    pub fn inv(&self, a: u32) -> u32 {
        self.inv[a as usize]
    }

    pub fn marking(&self) -> &[u32] {
        &self.marking
    }

    /// Cyclic group of order n, additive, identity 0.
    pub fn cyclic(n: u32) -> MulTable {
        assert!(n >= 1);
        let rows = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        let marking = if n > 1 { Some(vec![1]) } else { Some(vec![]) };
        MulTable::new(format!("Z/{n}"), rows, marking).expect("cyclic table is a group")
    }

    /// Dihedral group of order 2m: element i + m*j is r^i s^j.
    pub fn dihedral(m: u32) -> MulTable {
        assert!(m >= 1);
        let order = 2 * m;
        let idx = |i: u32, j: u32| i + m * j;
        let mut rows = vec![vec![0u32; order as usize]; order as usize];
        for i1 in 0..m {
            for j1 in 0..2 {
                for i2 in 0..m {
                    for j2 in 0..2 {
                        // r^i1 s^j1 r^i2 s^j2 = r^(i1 + (-1)^j1 i2) s^(j1+j2)
                        let i = if j1 == 0 { (i1 + i2) % m } else { (i1 + m - i2 % m) % m };
                        let j = (j1 + j2) % 2;
                        rows[idx(i1, j1) as usize][idx(i2, j2) as usize] = idx(i, j);
                    }
                }
            }
        }
        let marking = Some(vec![idx(1 % m, 0), idx(0, 1)]);
        MulTable::new(format!("D{m}"), rows, marking).expect("dihedral table is a group")
    }

    /// Quaternion group of order 8: 1, -1, i, -i, j, -j, k, -k.
    pub fn quaternion() -> MulTable {
        // Encode q = s * u with s in {+,-} and u in {1, i, j, k}.
        // Index: u * 2 + (s == -).
        let unit_mul = |a: u32, b: u32| -> (u32, bool) {
            match (a, b) {
                (0, u) => (u, false),
                (u, 0) => (u, false),
                (1, 1) | (2, 2) | (3, 3) => (0, true),
                (1, 2) => (3, false),
                (2, 1) => (3, true),
                (2, 3) => (1, false),
                (3, 2) => (1, true),
                (3, 1) => (2, false),
                (1, 3) => (2, true),
                _ => unreachable!(),
            }
        };
        let mut rows = vec![vec![0u32; 8]; 8];
        for a in 0..8u32 {
            for b in 0..8u32 {
                let (u, flip) = unit_mul(a / 2, b / 2);
                let sign = (a % 2 + b % 2 + u32::from(flip)) % 2;
                rows[a as usize][b as usize] = u * 2 + sign;
            }
        }
        MulTable::new("Q8", rows, Some(vec![2, 4])).expect("quaternion table is a group")
    }
}

/// On-disk form: `{"name": ..., "mul": [[...], ...], "marking": [...]}`.
#[derive(Serialize, Deserialize)]
pub struct TableFile {
    pub name: String,
    pub mul: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marking: Option<Vec<u32>>,
}

impl TableFile {
    pub fn validate(self) -> Result<MulTable, TableError> {
        MulTable::new(self.name, self.mul, self.marking)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_four_inverse() {
        let t = MulTable::cyclic(4);
        assert_eq!(t.inv(3), 1);
        assert_eq!(t.identity(), 0);
        assert_eq!(t.mul(3, 2), 1);
    }

    #[test]
    fn malformed_tables_rejected() {
        // A "subtraction table" is not associative.
        let rows = vec![vec![0, 2, 1], vec![1, 0, 2], vec![2, 1, 0]];
        match MulTable::new("bad", rows, None) {
            Err(TableError::NotAssociative { .. }) | Err(TableError::NoIdentity) => {}
            other => panic!("expected rejection, got {other:?}"),
        }
        let rows = vec![vec![0, 1], vec![1, 5]];
        assert_eq!(
            MulTable::new("bad", rows, None),
            Err(TableError::EntryOutOfRange { a: 1, b: 1, value: 5 })
        );
    }

    #[test]
    fn dihedral_three_is_nonabelian_of_order_six() {
        let t = MulTable::dihedral(3);
        assert_eq!(t.order(), 6);
        let r = 1;
        let s = 3;
        assert_ne!(t.mul(r, s), t.mul(s, r));
    }

    #[test]
    fn quaternion_relations() {
        let t = MulTable::quaternion();
        let minus_one = 1;
        let i = 2;
        let j = 4;
        let k = 6;
        assert_eq!(t.mul(i, i), minus_one);
        assert_eq!(t.mul(j, j), minus_one);
        assert_eq!(t.mul(i, j), k);
        assert_eq!(t.mul(j, i), t.mul(minus_one, k));
    }
}
