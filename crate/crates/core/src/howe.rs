//! Conjugacy classes of Howe subgroups (centralizers of subsets) and their
//! partial order, the poset of gauge orbit types.
//!
//! `t1 <= t2` iff some representative of `t1` contains some representative of
//! `t2`: larger types have smaller centralizers. The minimum is the class of
//! the whole group, the maximum the class of the center.

use std::collections::{HashMap, HashSet};

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Axis, GroupElement, GroupSpec, Subgroup, Su2Subgroup};

#[derive(Debug, Clone, PartialEq)]
pub struct HoweType {
    pub id: usize,
    pub representative: Subgroup,
    pub label: String,
}

#[derive(Debug, Clone)]
enum ClassIndex {
    Finite {
        conjugates: Vec<Vec<FixedBitSet>>,
        by_mask: HashMap<FixedBitSet, usize>,
    },
    Circle,
    Su2,
    Product {
        factors: Vec<TypePoset>,
        tuples: Vec<Vec<usize>>,
        by_tuple: HashMap<Vec<usize>, usize>,
    },
}

#[derive(Debug, Clone)]
pub struct TypePoset {
    spec: GroupSpec,
    classes: Vec<HoweType>,
    leq: Vec<Vec<bool>>,
    t_min: usize,
    t_max: usize,
    index: ClassIndex,
}

#[derive(Debug, Serialize)]
pub struct PosetSummary {
    pub group: String,
    pub classes: Vec<ClassSummary>,
    pub hasse_edges: Vec<(usize, usize)>,
    pub t_min: usize,
    pub t_max: usize,
}

#[derive(Debug, Serialize)]
pub struct ClassSummary {
    pub id: usize,
    pub label: String,
    pub representative: String,
    pub dimension: usize,
    pub components: usize,
}

fn members(m: &FixedBitSet) -> Vec<usize> {
    m.ones().collect()
}

impl TypePoset {
    /// Enumerates every conjugacy class of Howe subgroups of a cataloged group.
    pub fn enumerate(spec: &GroupSpec) -> TypePoset {
        match spec {
            GroupSpec::Finite(t) => Self::enumerate_finite(spec, t),
            GroupSpec::Circle => TypePoset {
                spec: spec.clone(),
                classes: vec![HoweType {
                    id: 0,
                    representative: Subgroup::Circle,
                    label: "U1".into(),
                }],
                leq: vec![vec![true]],
                t_min: 0,
                t_max: 0,
                index: ClassIndex::Circle,
            },
            GroupSpec::Su2 => {
                let torus = Su2Subgroup::Torus(Axis::new([0.0, 0.0, 1.0]).unwrap());
                let reps = [
                    (Su2Subgroup::Full, "Full"),
                    (torus, "Torus"),
                    (Su2Subgroup::Center, "Center"),
                ];
                TypePoset {
                    spec: spec.clone(),
                    classes: reps
                        .iter()
                        .enumerate()
                        .map(|(id, (s, label))| HoweType {
                            id,
                            representative: Subgroup::Su2(*s),
                            label: label.to_string(),
                        })
                        .collect(),
                    leq: (0..3).map(|a| (0..3).map(|b| a <= b).collect()).collect(),
                    t_min: 0,
                    t_max: 2,
                    index: ClassIndex::Su2,
                }
            }
            GroupSpec::Product(fs) => Self::enumerate_product(spec, fs),
        }
    }

    fn enumerate_finite(spec: &GroupSpec, table: &crate::group::FiniteTable) -> TypePoset {
        let n = table.order();
        let mut seen: HashSet<FixedBitSet> = HashSet::new();
        let mut masks: Vec<FixedBitSet> = Vec::new();
        for m in std::iter::once(table.full_mask()).chain((0..n).map(|g| table.element_centralizer(g).clone())) {
            if seen.insert(m.clone()) {
                masks.push(m);
            }
        }
        // Z(S) = ∩_{g ∈ S} Z(g): close the element centralizers under intersection.
        let mut frontier = 0;
        while frontier < masks.len() {
            let end = masks.len();
            for i in frontier..end {
                for j in 0..end {
                    let mut m = masks[i].clone();
                    m.intersect_with(&masks[j]);
                    if seen.insert(m.clone()) {
                        masks.push(m);
                    }
                }
            }
            frontier = end;
        }

        masks.sort_by(|a, b| b.count_ones(..).cmp(&a.count_ones(..)).then_with(|| members(a).cmp(&members(b))));

        let mut by_mask = HashMap::new();
        let mut conjugates = Vec::new();
        let mut classes = Vec::new();
        for m in &masks {
            if by_mask.contains_key(m) {
                continue;
            }
            let id = classes.len();
            let mut conj: Vec<FixedBitSet> = (0..n).map(|h| table.conjugate_mask(m, h)).collect();
            conj.sort_by_key(members);
            conj.dedup();
            for c in &conj {
                by_mask.insert(c.clone(), id);
            }
            conjugates.push(conj);
            let representative = Subgroup::Finite(m.clone());
            let label = if m.count_ones(..) == n {
                table.name().to_string()
            } else {
                spec.format_subgroup(&representative)
            };
            classes.push(HoweType {
                id,
                representative,
                label,
            });
        }

        let k = classes.len();
        let leq = (0..k)
            .map(|a| {
                let Subgroup::Finite(rep_a) = &classes[a].representative else { unreachable!() };
                (0..k).map(|b| conjugates[b].iter().any(|c| c.is_subset(rep_a))).collect()
            })
            .collect();
        let t_min = by_mask[&table.full_mask()];
        let t_max = by_mask[&table.center_mask()];
        TypePoset {
            spec: spec.clone(),
            classes,
            leq,
            t_min,
            t_max,
            index: ClassIndex::Finite { conjugates, by_mask },
        }
    }

    fn enumerate_product(spec: &GroupSpec, fs: &[GroupSpec]) -> TypePoset {
        let factors: Vec<TypePoset> = fs.iter().map(TypePoset::enumerate).collect();
        let mut tuples: Vec<Vec<usize>> = vec![Vec::new()];
        for f in &factors {
            tuples = tuples
                .into_iter()
                .flat_map(|p| {
                    (0..f.len()).map(move |i| {
                        let mut p = p.clone();
                        p.push(i);
                        p
                    })
                })
                .collect();
        }
        let rep = |tuple: &[usize]| {
            Subgroup::Product(
                factors
                    .iter()
                    .zip(tuple)
                    .map(|(f, &i)| f.classes[i].representative.clone())
                    .collect(),
            )
        };
        tuples.sort_by(|a, b| {
            let (ra, rb) = (rep(a), rep(b));
            rb.dimension()
                .cmp(&ra.dimension())
                .then(rb.components().cmp(&ra.components()))
                .then_with(|| a.cmp(b))
        });
        let classes: Vec<HoweType> = tuples
            .iter()
            .enumerate()
            .map(|(id, t)| {
                let labels: Vec<&str> = factors.iter().zip(t).map(|(f, &i)| f.classes[i].label.as_str()).collect();
                HoweType {
                    id,
                    representative: rep(t),
                    label: format!("({})", labels.join(", ")),
                }
            })
            .collect();
        let by_tuple: HashMap<Vec<usize>, usize> = tuples.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        let leq = tuples
            .iter()
            .map(|a| {
                tuples
                    .iter()
                    .map(|b| factors.iter().zip(a.iter().zip(b)).all(|(f, (&x, &y))| f.leq[x][y]))
                    .collect()
            })
            .collect();
        let t_min = by_tuple[&factors.iter().map(|f| f.t_min).collect::<Vec<_>>()];
        let t_max = by_tuple[&factors.iter().map(|f| f.t_max).collect::<Vec<_>>()];
        TypePoset {
            spec: spec.clone(),
            classes,
            leq,
            t_min,
            t_max,
            index: ClassIndex::Product {
                factors,
                tuples,
                by_tuple,
            },
        }
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn classes(&self) -> &[HoweType] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class(&self, id: usize) -> Result<&HoweType> {
        self.classes.get(id).ok_or_else(|| Error::UnknownClass(id.to_string()))
    }

    pub fn t_min(&self) -> &HoweType {
        &self.classes[self.t_min]
    }

    pub fn t_max(&self) -> &HoweType {
        &self.classes[self.t_max]
    }

    /// Resolves `t_min`, `t_max`, a numeric id, or a class label.
    pub fn find(&self, key: &str) -> Result<&HoweType> {
        match key {
            "t_min" => Ok(self.t_min()),
            "t_max" => Ok(self.t_max()),
            _ => {
                if let Ok(id) = key.parse::<usize>() {
                    return self.class(id);
                }
                self.classes
                    .iter()
                    .find(|c| c.label == key)
                    .ok_or_else(|| Error::UnknownClass(key.to_string()))
            }
        }
    }

    /// `t1 <= t2` by class id.
    pub fn leq(&self, t1: usize, t2: usize) -> bool {
        self.leq[t1][t2]
    }

    pub fn type_leq(&self, t1: &HoweType, t2: &HoweType) -> Result<bool> {
        for t in [t1, t2] {
            if self.classes.get(t.id) != Some(t) {
                return Err(Error::SpecMismatch(format!("type `{}` is not a class of {}", t.label, self.spec)));
            }
        }
        Ok(self.leq(t1.id, t2.id))
    }

    /// Class id of a centralizer subgroup, matched up to conjugacy.
    pub fn classify(&self, d: &Subgroup) -> Result<usize> {
        let not_found = || Error::TypeNotFound(self.spec.format_subgroup(d));
        match (&self.index, d) {
            (ClassIndex::Finite { by_mask, .. }, Subgroup::Finite(m)) => by_mask.get(m).copied().ok_or_else(not_found),
            (ClassIndex::Circle, Subgroup::Circle) => Ok(0),
            (ClassIndex::Su2, Subgroup::Su2(s)) => Ok(match s {
                Su2Subgroup::Full => 0,
                Su2Subgroup::Torus(_) => 1,
                Su2Subgroup::Center => 2,
            }),
            (ClassIndex::Product { factors, by_tuple, .. }, Subgroup::Product(ds)) if ds.len() == factors.len() => {
                let tuple = factors
                    .iter()
                    .zip(ds)
                    .map(|(f, d)| f.classify(d))
                    .collect::<Result<Vec<_>>>()?;
                by_tuple.get(&tuple).copied().ok_or_else(not_found)
            }
            _ => Err(not_found()),
        }
    }

    /// `typ(g_1..g_n) = [Z({g_1..g_n})]`.
    pub fn type_of(&self, gens: &[GroupElement]) -> Result<&HoweType> {
        let z = self.spec.centralizer(gens)?;
        Ok(&self.classes[self.classify(&z)?])
    }

    /// A member of class `t` contained in `within`, if one exists.
    pub fn member_within(&self, t: usize, within: &Subgroup) -> Result<Option<Subgroup>> {
        match (&self.index, within) {
            (ClassIndex::Finite { conjugates, .. }, Subgroup::Finite(w)) => Ok(conjugates
                .get(t)
                .ok_or_else(|| Error::UnknownClass(t.to_string()))?
                .iter()
                .find(|c| c.is_subset(w))
                .map(|c| Subgroup::Finite(c.clone()))),
            (ClassIndex::Circle, Subgroup::Circle) => Ok(Some(Subgroup::Circle)),
            (ClassIndex::Su2, Subgroup::Su2(w)) => Ok(match (t, w) {
                (0, Su2Subgroup::Full) => Some(Subgroup::Su2(Su2Subgroup::Full)),
                (1, Su2Subgroup::Full) => Some(self.classes[1].representative.clone()),
                (1, Su2Subgroup::Torus(n)) => Some(Subgroup::Su2(Su2Subgroup::Torus(*n))),
                (2, _) => Some(Subgroup::Su2(Su2Subgroup::Center)),
                (0..=2, _) => None,
                _ => return Err(Error::UnknownClass(t.to_string())),
            }),
            (ClassIndex::Product { factors, tuples, .. }, Subgroup::Product(ws)) if ws.len() == factors.len() => {
                let tuple = tuples.get(t).ok_or_else(|| Error::UnknownClass(t.to_string()))?;
                let mut parts = Vec::with_capacity(factors.len());
                for ((f, &ti), w) in factors.iter().zip(tuple).zip(ws) {
                    match f.member_within(ti, w)? {
                        Some(v) => parts.push(v),
                        None => return Ok(None),
                    }
                }
                Ok(Some(Subgroup::Product(parts)))
            }
            _ => Err(Error::SpecMismatch(format!(
                "{} is not a subgroup of {}",
                self.spec.format_subgroup(within),
                self.spec
            ))),
        }
    }

    /// Covering relations `(a, b)` with `a < b` and nothing strictly between.
    pub fn hasse_edges(&self) -> Vec<(usize, usize)> {
        let k = self.len();
        let lt = |a: usize, b: usize| a != b && self.leq[a][b];
        let mut edges = Vec::new();
        for a in 0..k {
            for b in 0..k {
                if lt(a, b) && !(0..k).any(|c| lt(a, c) && lt(c, b)) {
                    edges.push((a, b));
                }
            }
        }
        edges
    }

    pub fn summary(&self) -> PosetSummary {
        PosetSummary {
            group: self.spec.to_string(),
            classes: self
                .classes
                .iter()
                .map(|c| ClassSummary {
                    id: c.id,
                    label: c.label.clone(),
                    representative: self.spec.format_subgroup(&c.representative),
                    dimension: c.representative.dimension(),
                    components: c.representative.components(),
                })
                .collect(),
            hasse_edges: self.hasse_edges(),
            t_min: self.t_min,
            t_max: self.t_max,
        }
    }
}
