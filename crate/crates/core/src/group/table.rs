//! Finite groups given by a multiplication table.

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

/// A finite group: `product(a, b)` is the entry in row `a`, column `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteTable {
    name: String,
    names: Vec<String>,
    table: Vec<usize>,
    identity: usize,
    inverse: Vec<usize>,
    element_centralizers: Vec<FixedBitSet>,
}

impl FiniteTable {
    /// Builds a table and checks the group axioms exhaustively.
    pub fn new(name: impl Into<String>, names: Vec<String>, rows: Vec<Vec<usize>>) -> Result<Self> {
        let name = name.into();
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidTable(format!("{name}: empty table")));
        }
        if names.len() != n {
            return Err(Error::InvalidTable(format!(
                "{name}: {} element names for order {n}",
                names.len()
            )));
        }
        let mut table = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidTable(format!(
                    "{name}: row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some(&bad) = row.iter().find(|&&x| x >= n) {
                return Err(Error::InvalidTable(format!("{name}: row {i} entry {bad} out of range")));
            }
            table.extend_from_slice(row);
        }
        let at = |a: usize, b: usize| table[a * n + b];

        let identity = (0..n)
            .find(|&e| (0..n).all(|a| at(e, a) == a && at(a, e) == a))
            .ok_or_else(|| Error::InvalidTable(format!("{name}: no identity element")))?;
        let mut inverse = Vec::with_capacity(n);
        for a in 0..n {
            let inv = (0..n)
                .find(|&b| at(a, b) == identity && at(b, a) == identity)
                .ok_or_else(|| Error::InvalidTable(format!("{name}: element {a} has no inverse")))?;
            inverse.push(inv);
        }
        for a in 0..n {
            for b in 0..n {
                let ab = at(a, b);
                for c in 0..n {
                    if at(ab, c) != at(a, at(b, c)) {
                        return Err(Error::InvalidTable(format!(
                            "{name}: not associative at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }

        let mut element_centralizers = Vec::with_capacity(n);
        for g in 0..n {
            let mut mask = FixedBitSet::with_capacity(n);
            for h in 0..n {
                if at(g, h) == at(h, g) {
                    mask.insert(h);
                }
            }
            element_centralizers.push(mask);
        }

        Ok(FiniteTable {
            name,
            names,
            table,
            identity,
            inverse,
            element_centralizers,
        })
    }

    /// Parses the text format: a `group <name> <order>` header, an optional
    /// `names a b c ...` line, then one row of element indices per line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (lineno, header) = lines
            .next()
            .ok_or_else(|| Error::InvalidTable("empty table file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 || fields[0] != "group" {
            return Err(Error::InvalidTable(format!(
                "line {lineno}: expected `group <name> <order>`"
            )));
        }
        let name = fields[1].to_string();
        let order: usize = fields[2]
            .parse()
            .map_err(|_| Error::InvalidTable(format!("line {lineno}: bad order `{}`", fields[2])))?;

        let mut names: Vec<String> = (0..order).map(|i| i.to_string()).collect();
        let mut rows = Vec::with_capacity(order);
        for (lineno, line) in lines {
            if let Some(rest) = line.strip_prefix("names") {
                names = rest.split_whitespace().map(str::to_string).collect();
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| Error::InvalidTable(format!("line {lineno}: bad entry `{t}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        if rows.len() != order {
            return Err(Error::InvalidTable(format!(
                "{name}: header declares order {order} but {} rows given",
                rows.len()
            )));
        }
        FiniteTable::new(name, names, rows)
    }

    /// Cyclic group `Z_n` with elements named `0..n`.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTable("Z_0 is not a group".into()));
        }
        let rows = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        FiniteTable::new(format!("Z{n}"), (0..n).map(|i| i.to_string()).collect(), rows)
    }

    /// Symmetric group on three letters. Elements in index order:
    /// `e, (12), (13), (23), (123), (132)`, where `(123)` sends 1→2→3→1.
    /// The product applies the right factor first: `(σ·τ)(x) = σ(τ(x))`.
    pub fn symmetric3() -> Self {
        // images of (1, 2, 3), zero-based
        const PERMS: [[usize; 3]; 6] = [
            [0, 1, 2],
            [1, 0, 2],
            [2, 1, 0],
            [0, 2, 1],
            [1, 2, 0],
            [2, 0, 1],
        ];
        let names = ["e", "(12)", "(13)", "(23)", "(123)", "(132)"];
        let index = |p: [usize; 3]| PERMS.iter().position(|&q| q == p).unwrap();
        let rows = (0..6)
            .map(|a| {
                (0..6)
                    .map(|b| {
                        let (s, t) = (PERMS[a], PERMS[b]);
                        index([s[t[0]], s[t[1]], s[t[2]]])
                    })
                    .collect()
            })
            .collect();
        FiniteTable::new("S3", names.iter().map(|s| s.to_string()).collect(), rows)
            .expect("S3 table is a group")
    }

    /// Quaternion group `{±1, ±i, ±j, ±k}`.
    pub fn quaternion8() -> Self {
        // (sign, unit) with unit 0 = 1, 1 = i, 2 = j, 3 = k
        let elems: [(i8, usize); 8] = [(1, 0), (-1, 0), (1, 1), (-1, 1), (1, 2), (-1, 2), (1, 3), (-1, 3)];
        let names = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"];
        let unit_mul = |a: usize, b: usize| -> (i8, usize) {
            match (a, b) {
                (0, x) | (x, 0) => (1, x),
                (x, y) if x == y => (-1, 0),
                (1, 2) => (1, 3),
                (2, 3) => (1, 1),
                (3, 1) => (1, 2),
                (2, 1) => (-1, 3),
                (3, 2) => (-1, 1),
                (1, 3) => (-1, 2),
                _ => unreachable!(),
            }
        };
        let rows = (0..8)
            .map(|a| {
                (0..8)
                    .map(|b| {
                        let (sa, ua) = elems[a];
                        let (sb, ub) = elems[b];
                        let (s, u) = unit_mul(ua, ub);
                        let sign = sa * sb * s;
                        elems.iter().position(|&e| e == (sign, u)).unwrap()
                    })
                    .collect()
            })
            .collect();
        FiniteTable::new("Q8", names.iter().map(|s| s.to_string()).collect(), rows)
            .expect("Q8 table is a group")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn element_name(&self, a: usize) -> &str {
        &self.names[a]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn product(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order() + b]
    }

    #[inline]
    pub fn inverse(&self, a: usize) -> usize {
        self.inverse[a]
    }

    /// `h⁻¹ g h`.
    #[inline]
    pub fn conjugate(&self, g: usize, h: usize) -> usize {
        self.product(self.inverse(h), self.product(g, h))
    }

    pub fn element_centralizer(&self, g: usize) -> &FixedBitSet {
        &self.element_centralizers[g]
    }

    pub fn full_mask(&self) -> FixedBitSet {
        let mut m = FixedBitSet::with_capacity(self.order());
        m.insert_range(..);
        m
    }

    pub fn center_mask(&self) -> FixedBitSet {
        let mut m = self.full_mask();
        for c in &self.element_centralizers {
            m.intersect_with(c);
        }
        m
    }

    /// Image of a subset under `x ↦ h⁻¹ x h`.
    pub fn conjugate_mask(&self, mask: &FixedBitSet, h: usize) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.order());
        for x in mask.ones() {
            out.insert(self.conjugate(x, h));
        }
        out
    }

    /// Checks that a subset is a subgroup (identity, products, inverses).
    pub fn is_subgroup(&self, mask: &FixedBitSet) -> bool {
        mask.contains(self.identity)
            && mask.ones().all(|a| {
                mask.contains(self.inverse(a)) && mask.ones().all(|b| mask.contains(self.product(a, b)))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s3_product_and_conjugation_examples() {
        let s3 = FiniteTable::symmetric3();
        let idx = |n: &str| s3.index_of(n).unwrap();
        assert_eq!(s3.product(idx("(12)"), idx("(123)")), idx("(23)"));
        assert_eq!(s3.conjugate(idx("(123)"), idx("(12)")), idx("(132)"));
        assert_eq!(s3.identity(), idx("e"));
    }

    #[test]
    fn q8_relations() {
        let q = FiniteTable::quaternion8();
        let idx = |n: &str| q.index_of(n).unwrap();
        assert_eq!(q.product(idx("i"), idx("j")), idx("k"));
        assert_eq!(q.product(idx("j"), idx("i")), idx("-k"));
        assert_eq!(q.center_mask().ones().collect::<Vec<_>>(), vec![idx("1"), idx("-1")]);
    }

    #[test]
    fn rejects_non_associative_table() {
        // a Latin square with identity 0 that is not associative
        let rows = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        let names = (0..5).map(|i| i.to_string()).collect();
        assert!(matches!(FiniteTable::new("bad", names, rows), Err(Error::InvalidTable(_))));
    }

    #[test]
    fn parse_text_format() {
        let text = "group Z3 3\nnames a b c\n0 1 2\n1 2 0\n2 0 1\n";
        let t = FiniteTable::parse(text).unwrap();
        assert_eq!(t.name(), "Z3");
        assert_eq!(t.product(t.index_of("b").unwrap(), t.index_of("c").unwrap()), 0);
        assert!(FiniteTable::parse("group Z3 3\n0 1 2\n").is_err());
        assert!(FiniteTable::parse("grp Z3 3\n").is_err());
    }
}
