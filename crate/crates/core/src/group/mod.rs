//! Cataloged compact groups: finite tables, U(1), SU(2) and finite products.
//!
//! Every operation lives on [`GroupSpec`], which knows how to interpret the
//! element and subgroup representations for its catalog entry. Elements of a
//! product group are tuples of factor elements and everything distributes
//! factor-wise.

mod quat;
mod table;

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::Value;

pub use quat::Quat;
pub use table::FiniteTable;

use crate::error::{Error, Result};

/// Quaternion renormalization threshold.
pub const TAU_NORM: f64 = 1e-12;
/// Element equality tolerance for continuous groups.
pub const TAU_EQ: f64 = 1e-9;
/// Rotation-axis coincidence tolerance.
pub const TAU_AXIS: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub enum GroupSpec {
    Finite(Arc<FiniteTable>),
    Circle,
    Su2,
    Product(Vec<GroupSpec>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum GroupElement {
    /// Index into the multiplication table.
    Finite(usize),
    /// Angle in `[0, 2π)`.
    Circle(f64),
    Su2(Quat),
    Product(Vec<GroupElement>),
}

/// Unit rotation axis with the sign fixed so the first nonzero coordinate is positive.
#[derive(Debug, Clone, Copy)]
pub struct Axis([f64; 3]);

impl Axis {
    pub fn new(v: [f64; 3]) -> Option<Self> {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n <= TAU_EQ {
            return None;
        }
        let mut a = [v[0] / n, v[1] / n, v[2] / n];
        if let Some(&lead) = a.iter().find(|c| c.abs() > TAU_AXIS) {
            if lead < 0.0 {
                a.iter_mut().for_each(|c| *c = -*c);
            }
        }
        Some(Axis(a))
    }

    pub fn coords(&self) -> [f64; 3] {
        self.0
    }

    /// Equal up to sign within `TAU_AXIS`.
    pub fn coincides(&self, other: &Axis) -> bool {
        let diff = |s: f64| (0..3).map(|i| (self.0[i] - s * other.0[i]).abs()).fold(0.0, f64::max);
        diff(1.0) <= TAU_AXIS || diff(-1.0) <= TAU_AXIS
    }
}

impl PartialEq for Axis {
    fn eq(&self, other: &Self) -> bool {
        self.coincides(other)
    }
}

/// Closed subgroups of SU(2) that occur as centralizers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Su2Subgroup {
    Full,
    /// The maximal torus `{cos t + sin t·n}` about axis `n`.
    Torus(Axis),
    /// `{±1}`.
    Center,
}

/// Canonical form of a centralizer subgroup.
#[derive(Debug, Clone, PartialEq)]
pub enum Subgroup {
    Finite(FixedBitSet),
    /// U(1) is abelian, so its only centralizer is the whole group.
    Circle,
    Su2(Su2Subgroup),
    Product(Vec<Subgroup>),
}

impl Subgroup {
    /// Manifold dimension.
    pub fn dimension(&self) -> usize {
        match self {
            Subgroup::Finite(_) => 0,
            Subgroup::Circle => 1,
            Subgroup::Su2(Su2Subgroup::Full) => 3,
            Subgroup::Su2(Su2Subgroup::Torus(_)) => 1,
            Subgroup::Su2(Su2Subgroup::Center) => 0,
            Subgroup::Product(fs) => fs.iter().map(Subgroup::dimension).sum(),
        }
    }

    /// Number of connected components.
    pub fn components(&self) -> usize {
        match self {
            Subgroup::Finite(m) => m.count_ones(..),
            Subgroup::Circle => 1,
            Subgroup::Su2(Su2Subgroup::Center) => 2,
            Subgroup::Su2(_) => 1,
            Subgroup::Product(fs) => fs.iter().map(Subgroup::components).product(),
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Finite(t) => write!(f, "{}", t.name()),
            GroupSpec::Circle => write!(f, "U1"),
            GroupSpec::Su2 => write!(f, "SU2"),
            GroupSpec::Product(fs) => {
                let names: Vec<String> = fs.iter().map(|s| s.to_string()).collect();
                write!(f, "{}", names.join(" x "))
            }
        }
    }
}

fn mismatch(spec: &GroupSpec, what: &str) -> Error {
    Error::SpecMismatch(format!("{what} is not an element of {spec}"))
}

impl GroupSpec {
    pub fn s3() -> Self {
        GroupSpec::Finite(Arc::new(FiniteTable::symmetric3()))
    }

    pub fn q8() -> Self {
        GroupSpec::Finite(Arc::new(FiniteTable::quaternion8()))
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        Ok(GroupSpec::Finite(Arc::new(FiniteTable::cyclic(n)?)))
    }

    /// Resolves a catalog name such as `S3`, `Z4`, `Q8`, `U1`, `SU2`,
    /// `SU2 x Z2`, or a path to a table file.
    pub fn from_name(name: &str) -> Result<Self> {
        let trimmed = name.trim();
        if Path::new(trimmed).is_file() {
            let text = std::fs::read_to_string(trimmed)
                .map_err(|e| Error::InvalidTable(format!("{trimmed}: {e}")))?;
            return Ok(GroupSpec::Finite(Arc::new(FiniteTable::parse(&text)?)));
        }
        let factors: Vec<&str> = trimmed
            .split(['x', 'X', '×'])
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect();
        if factors.is_empty() {
            return Err(Error::UnknownGroup(name.to_string()));
        }
        let mut specs = factors
            .iter()
            .map(|f| Self::single_from_name(f).ok_or_else(|| Error::UnknownGroup(f.to_string())))
            .collect::<Result<Vec<_>>>()?;
        if specs.len() == 1 {
            Ok(specs.pop().unwrap())
        } else {
            Ok(GroupSpec::Product(specs))
        }
    }

    fn single_from_name(name: &str) -> Option<Self> {
        match name.to_ascii_uppercase().as_str() {
            "S3" => Some(Self::s3()),
            "Q8" => Some(Self::q8()),
            "U1" | "U(1)" => Some(GroupSpec::Circle),
            "SU2" | "SU(2)" => Some(GroupSpec::Su2),
            upper => {
                let digits = upper.strip_prefix('Z')?;
                let n: usize = digits.trim_start_matches('_').parse().ok()?;
                Self::cyclic(n).ok()
            }
        }
    }

    pub fn as_finite(&self) -> Option<&FiniteTable> {
        match self {
            GroupSpec::Finite(t) => Some(t),
            _ => None,
        }
    }

    /// Group order, for finite groups and products of finite groups.
    pub fn order(&self) -> Option<usize> {
        match self {
            GroupSpec::Finite(t) => Some(t.order()),
            GroupSpec::Circle | GroupSpec::Su2 => None,
            GroupSpec::Product(fs) => fs.iter().map(GroupSpec::order).product(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.order().is_some()
    }

    /// All elements in lexicographic (factor-major) order, if the group is finite.
    pub fn elements(&self) -> Option<Vec<GroupElement>> {
        match self {
            GroupSpec::Finite(t) => Some((0..t.order()).map(GroupElement::Finite).collect()),
            GroupSpec::Circle | GroupSpec::Su2 => None,
            GroupSpec::Product(fs) => {
                let mut acc: Vec<Vec<GroupElement>> = vec![Vec::new()];
                for f in fs {
                    let elems = f.elements()?;
                    acc = acc
                        .into_iter()
                        .flat_map(|prefix| {
                            elems.iter().map(move |e| {
                                let mut p = prefix.clone();
                                p.push(e.clone());
                                p
                            })
                        })
                        .collect();
                }
                Some(acc.into_iter().map(GroupElement::Product).collect())
            }
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            GroupSpec::Finite(t) => GroupElement::Finite(t.identity()),
            GroupSpec::Circle => GroupElement::Circle(0.0),
            GroupSpec::Su2 => GroupElement::Su2(Quat::ONE),
            GroupSpec::Product(fs) => GroupElement::Product(fs.iter().map(GroupSpec::identity).collect()),
        }
    }

    /// Validates that `g` is an element of this group.
    pub fn check(&self, g: &GroupElement) -> Result<()> {
        match (self, g) {
            (GroupSpec::Finite(t), GroupElement::Finite(i)) if *i < t.order() => Ok(()),
            (GroupSpec::Circle, GroupElement::Circle(a)) if a.is_finite() => Ok(()),
            (GroupSpec::Su2, GroupElement::Su2(q)) if (q.norm() - 1.0).abs() <= 1e-6 => Ok(()),
            (GroupSpec::Product(fs), GroupElement::Product(es)) if fs.len() == es.len() => {
                fs.iter().zip(es).try_for_each(|(f, e)| f.check(e))
            }
            _ => Err(mismatch(self, &format!("{g:?}"))),
        }
    }

    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        match (self, a, b) {
            (GroupSpec::Finite(t), GroupElement::Finite(x), GroupElement::Finite(y))
                if *x < t.order() && *y < t.order() =>
            {
                Ok(GroupElement::Finite(t.product(*x, *y)))
            }
            (GroupSpec::Circle, GroupElement::Circle(x), GroupElement::Circle(y)) => {
                Ok(GroupElement::Circle((x + y).rem_euclid(TAU)))
            }
            (GroupSpec::Su2, GroupElement::Su2(p), GroupElement::Su2(q)) => Ok(GroupElement::Su2(*p * *q)),
            (GroupSpec::Product(fs), GroupElement::Product(xs), GroupElement::Product(ys))
                if fs.len() == xs.len() && fs.len() == ys.len() =>
            {
                fs.iter()
                    .zip(xs.iter().zip(ys))
                    .map(|(f, (x, y))| f.multiply(x, y))
                    .collect::<Result<Vec<_>>>()
                    .map(GroupElement::Product)
            }
            _ => Err(Error::SpecMismatch(format!("cannot multiply {a:?} and {b:?} in {self}"))),
        }
    }

    pub fn inverse(&self, a: &GroupElement) -> Result<GroupElement> {
        match (self, a) {
            (GroupSpec::Finite(t), GroupElement::Finite(x)) if *x < t.order() => {
                Ok(GroupElement::Finite(t.inverse(*x)))
            }
            (GroupSpec::Circle, GroupElement::Circle(x)) => Ok(GroupElement::Circle((-x).rem_euclid(TAU))),
            (GroupSpec::Su2, GroupElement::Su2(q)) => Ok(GroupElement::Su2(q.conj())),
            (GroupSpec::Product(fs), GroupElement::Product(xs)) if fs.len() == xs.len() => fs
                .iter()
                .zip(xs)
                .map(|(f, x)| f.inverse(x))
                .collect::<Result<Vec<_>>>()
                .map(GroupElement::Product),
            _ => Err(mismatch(self, &format!("{a:?}"))),
        }
    }

    /// `h⁻¹ g h`.
    pub fn conjugate(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        let gh = self.multiply(g, h)?;
        self.multiply(&self.inverse(h)?, &gh)
    }

    pub fn haar_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        match self {
            GroupSpec::Finite(t) => GroupElement::Finite(rng.random_range(0..t.order())),
            GroupSpec::Circle => GroupElement::Circle(rng.random_range(0.0..TAU)),
            GroupSpec::Su2 => GroupElement::Su2(Quat::haar(rng)),
            GroupSpec::Product(fs) => GroupElement::Product(fs.iter().map(|f| f.haar_sample(rng)).collect()),
        }
    }

    /// `g · exp(δ·ξ)` with ξ a standard Gaussian tangent vector; finite factors are left unchanged.
    pub fn perturb<R: Rng + ?Sized>(&self, g: &GroupElement, delta: f64, rng: &mut R) -> Result<GroupElement> {
        match (self, g) {
            (GroupSpec::Finite(_), GroupElement::Finite(_)) => Ok(g.clone()),
            (GroupSpec::Circle, GroupElement::Circle(a)) => {
                let xi: f64 = rng.sample(StandardNormal);
                Ok(GroupElement::Circle((a + delta * xi).rem_euclid(TAU)))
            }
            (GroupSpec::Su2, GroupElement::Su2(q)) => {
                let xi: [f64; 3] = [
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                ];
                Ok(GroupElement::Su2(*q * Quat::exp([delta * xi[0], delta * xi[1], delta * xi[2]])))
            }
            (GroupSpec::Product(fs), GroupElement::Product(xs)) if fs.len() == xs.len() => fs
                .iter()
                .zip(xs)
                .map(|(f, x)| f.perturb(x, delta, rng))
                .collect::<Result<Vec<_>>>()
                .map(GroupElement::Product),
            _ => Err(mismatch(self, &format!("{g:?}"))),
        }
    }

    /// Equality: exact for finite groups, within `TAU_EQ` otherwise.
    pub fn approx_eq(&self, a: &GroupElement, b: &GroupElement) -> bool {
        match (self, a, b) {
            (GroupSpec::Finite(_), GroupElement::Finite(x), GroupElement::Finite(y)) => x == y,
            (GroupSpec::Circle, GroupElement::Circle(x), GroupElement::Circle(y)) => circle_distance(*x, *y) <= TAU_EQ,
            (GroupSpec::Su2, GroupElement::Su2(p), GroupElement::Su2(q)) => {
                p.to_array().iter().zip(q.to_array()).all(|(u, v)| (u - v).abs() <= TAU_EQ)
            }
            (GroupSpec::Product(fs), GroupElement::Product(xs), GroupElement::Product(ys)) => {
                fs.len() == xs.len()
                    && fs.len() == ys.len()
                    && fs.iter().zip(xs.iter().zip(ys)).all(|(f, (x, y))| f.approx_eq(x, y))
            }
            _ => false,
        }
    }

    /// Bi-invariant distance: discrete 0/1 on finite groups, geodesic angle on
    /// U(1) and SU(2), root-sum-of-squares on products.
    pub fn distance(&self, a: &GroupElement, b: &GroupElement) -> Result<f64> {
        match (self, a, b) {
            (GroupSpec::Finite(_), GroupElement::Finite(x), GroupElement::Finite(y)) => {
                Ok(if x == y { 0.0 } else { 1.0 })
            }
            (GroupSpec::Circle, GroupElement::Circle(x), GroupElement::Circle(y)) => Ok(circle_distance(*x, *y)),
            (GroupSpec::Su2, GroupElement::Su2(p), GroupElement::Su2(q)) => Ok(p.geodesic(*q)),
            (GroupSpec::Product(fs), GroupElement::Product(xs), GroupElement::Product(ys))
                if fs.len() == xs.len() && fs.len() == ys.len() =>
            {
                let mut sum = 0.0;
                for (f, (x, y)) in fs.iter().zip(xs.iter().zip(ys)) {
                    let d = f.distance(x, y)?;
                    sum += d * d;
                }
                Ok(sum.sqrt())
            }
            _ => Err(Error::SpecMismatch(format!("cannot compare {a:?} and {b:?} in {self}"))),
        }
    }

    pub fn is_central(&self, g: &GroupElement) -> bool {
        match (self, g) {
            (GroupSpec::Finite(t), GroupElement::Finite(x)) => t.element_centralizer(*x).count_ones(..) == t.order(),
            (GroupSpec::Circle, _) => true,
            (GroupSpec::Su2, GroupElement::Su2(q)) => q.vector_norm() <= TAU_EQ,
            (GroupSpec::Product(fs), GroupElement::Product(xs)) => {
                fs.iter().zip(xs).all(|(f, x)| f.is_central(x))
            }
            _ => false,
        }
    }

    pub fn full_subgroup(&self) -> Subgroup {
        match self {
            GroupSpec::Finite(t) => Subgroup::Finite(t.full_mask()),
            GroupSpec::Circle => Subgroup::Circle,
            GroupSpec::Su2 => Subgroup::Su2(Su2Subgroup::Full),
            GroupSpec::Product(fs) => Subgroup::Product(fs.iter().map(GroupSpec::full_subgroup).collect()),
        }
    }

    pub fn center(&self) -> Subgroup {
        match self {
            GroupSpec::Finite(t) => Subgroup::Finite(t.center_mask()),
            GroupSpec::Circle => Subgroup::Circle,
            GroupSpec::Su2 => Subgroup::Su2(Su2Subgroup::Center),
            GroupSpec::Product(fs) => Subgroup::Product(fs.iter().map(GroupSpec::center).collect()),
        }
    }

    /// `Z(gens)`: every element commuting with all of `gens`.
    pub fn centralizer(&self, gens: &[GroupElement]) -> Result<Subgroup> {
        match self {
            GroupSpec::Finite(t) => {
                let mut mask = t.full_mask();
                for g in gens {
                    match g {
                        GroupElement::Finite(x) if *x < t.order() => mask.intersect_with(t.element_centralizer(*x)),
                        _ => return Err(mismatch(self, &format!("{g:?}"))),
                    }
                }
                Ok(Subgroup::Finite(mask))
            }
            GroupSpec::Circle => {
                gens.iter().try_for_each(|g| self.check(g))?;
                Ok(Subgroup::Circle)
            }
            GroupSpec::Su2 => {
                let mut axis: Option<Axis> = None;
                for g in gens {
                    let GroupElement::Su2(q) = g else {
                        return Err(mismatch(self, &format!("{g:?}")));
                    };
                    let Some(a) = Axis::new(q.vector()) else { continue };
                    match axis {
                        None => axis = Some(a),
                        Some(b) if b.coincides(&a) => {}
                        Some(_) => return Ok(Subgroup::Su2(Su2Subgroup::Center)),
                    }
                }
                Ok(Subgroup::Su2(axis.map_or(Su2Subgroup::Full, Su2Subgroup::Torus)))
            }
            GroupSpec::Product(fs) => {
                let mut per_factor: Vec<Vec<GroupElement>> = vec![Vec::with_capacity(gens.len()); fs.len()];
                for g in gens {
                    match g {
                        GroupElement::Product(xs) if xs.len() == fs.len() => {
                            for (slot, x) in per_factor.iter_mut().zip(xs) {
                                slot.push(x.clone());
                            }
                        }
                        _ => return Err(mismatch(self, &format!("{g:?}"))),
                    }
                }
                fs.iter()
                    .zip(&per_factor)
                    .map(|(f, gs)| f.centralizer(gs))
                    .collect::<Result<Vec<_>>>()
                    .map(Subgroup::Product)
            }
        }
    }

    /// Whether `g` belongs to the subgroup `d`.
    pub fn subgroup_has(&self, d: &Subgroup, g: &GroupElement) -> Result<bool> {
        match (self, d, g) {
            (GroupSpec::Finite(t), Subgroup::Finite(m), GroupElement::Finite(x)) if *x < t.order() => Ok(m.contains(*x)),
            (GroupSpec::Circle, Subgroup::Circle, GroupElement::Circle(_)) => Ok(true),
            (GroupSpec::Su2, Subgroup::Su2(s), GroupElement::Su2(q)) => Ok(match s {
                Su2Subgroup::Full => true,
                Su2Subgroup::Center => q.vector_norm() <= TAU_EQ,
                Su2Subgroup::Torus(n) => Axis::new(q.vector()).is_none_or(|a| a.coincides(n)),
            }),
            (GroupSpec::Product(fs), Subgroup::Product(ds), GroupElement::Product(xs))
                if fs.len() == ds.len() && fs.len() == xs.len() =>
            {
                for (f, (d, x)) in fs.iter().zip(ds.iter().zip(xs)) {
                    if !f.subgroup_has(d, x)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            _ => Err(Error::SpecMismatch(format!("membership of {g:?} in {d:?} for {self}"))),
        }
    }

    /// `b ⊆ a`.
    pub fn subgroup_contains(&self, a: &Subgroup, b: &Subgroup) -> Result<bool> {
        match (self, a, b) {
            (GroupSpec::Finite(_), Subgroup::Finite(x), Subgroup::Finite(y)) => Ok(y.is_subset(x)),
            (GroupSpec::Circle, Subgroup::Circle, Subgroup::Circle) => Ok(true),
            (GroupSpec::Su2, Subgroup::Su2(x), Subgroup::Su2(y)) => Ok(match (x, y) {
                (Su2Subgroup::Full, _) => true,
                (_, Su2Subgroup::Center) => true,
                (Su2Subgroup::Torus(n1), Su2Subgroup::Torus(n2)) => n1.coincides(n2),
                _ => false,
            }),
            (GroupSpec::Product(fs), Subgroup::Product(xs), Subgroup::Product(ys))
                if fs.len() == xs.len() && fs.len() == ys.len() =>
            {
                for (f, (x, y)) in fs.iter().zip(xs.iter().zip(ys)) {
                    if !f.subgroup_contains(x, y)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            _ => Err(Error::SpecMismatch(format!("cannot compare {a:?} and {b:?} in {self}"))),
        }
    }

    /// Canonical form of `h⁻¹ d h`.
    pub fn conjugate_subgroup(&self, d: &Subgroup, h: &GroupElement) -> Result<Subgroup> {
        match (self, d, h) {
            (GroupSpec::Finite(t), Subgroup::Finite(m), GroupElement::Finite(x)) if *x < t.order() => {
                Ok(Subgroup::Finite(t.conjugate_mask(m, *x)))
            }
            (GroupSpec::Circle, Subgroup::Circle, GroupElement::Circle(_)) => Ok(Subgroup::Circle),
            (GroupSpec::Su2, Subgroup::Su2(s), GroupElement::Su2(q)) => Ok(Subgroup::Su2(match s {
                Su2Subgroup::Torus(n) => {
                    Su2Subgroup::Torus(Axis::new(q.conjugate_vector(n.coords())).expect("rotation preserves norm"))
                }
                other => *other,
            })),
            (GroupSpec::Product(fs), Subgroup::Product(ds), GroupElement::Product(xs))
                if fs.len() == ds.len() && fs.len() == xs.len() =>
            {
                fs.iter()
                    .zip(ds.iter().zip(xs))
                    .map(|(f, (d, x))| f.conjugate_subgroup(d, x))
                    .collect::<Result<Vec<_>>>()
                    .map(Subgroup::Product)
            }
            _ => Err(Error::SpecMismatch(format!("cannot conjugate {d:?} by {h:?} in {self}"))),
        }
    }

    /// Greedy subsequence `u_1..u_n` of `candidates` with `Z(u_1..u_n) = Z(candidates)`:
    /// scanning in order, an element is kept iff it strictly shrinks the
    /// current centralizer.
    pub fn reduce_generators(&self, candidates: &[GroupElement]) -> Result<Vec<GroupElement>> {
        Ok(self.reduce_generators_traced(candidates)?.0)
    }

    /// Like [`reduce_generators`](Self::reduce_generators), also returning the
    /// centralizer chain `Z(∅) ⊋ Z(u_1) ⊋ Z(u_1, u_2) ⊋ …`.
    pub fn reduce_generators_traced(&self, candidates: &[GroupElement]) -> Result<(Vec<GroupElement>, Vec<Subgroup>)> {
        let mut kept: Vec<GroupElement> = Vec::new();
        let mut chain = vec![self.full_subgroup()];
        for u in candidates {
            kept.push(u.clone());
            let next = self.centralizer(&kept)?;
            let current = chain.last().unwrap();
            if next != *current {
                chain.push(next);
            } else {
                kept.pop();
            }
        }
        Ok((kept, chain))
    }

    /// Explicit members of a subgroup of a finite group.
    pub fn subgroup_elements(&self, d: &Subgroup) -> Option<Vec<GroupElement>> {
        let all = self.elements()?;
        Some(
            all.into_iter()
                .filter(|g| self.subgroup_has(d, g).unwrap_or(false))
                .collect(),
        )
    }

    pub fn format_element(&self, g: &GroupElement) -> String {
        match (self, g) {
            (GroupSpec::Finite(t), GroupElement::Finite(x)) if *x < t.order() => t.element_name(*x).to_string(),
            (GroupSpec::Circle, GroupElement::Circle(a)) => format!("{a}"),
            (GroupSpec::Su2, GroupElement::Su2(q)) => format!("[{}, {}, {}, {}]", q.w, q.x, q.y, q.z),
            (GroupSpec::Product(fs), GroupElement::Product(xs)) => {
                let parts: Vec<String> = fs.iter().zip(xs).map(|(f, x)| f.format_element(x)).collect();
                format!("({})", parts.join(", "))
            }
            _ => format!("{g:?}"),
        }
    }

    pub fn format_subgroup(&self, d: &Subgroup) -> String {
        match (self, d) {
            (GroupSpec::Finite(t), Subgroup::Finite(m)) => {
                let names: Vec<&str> = m.ones().map(|i| t.element_name(i)).collect();
                format!("{{{}}}", names.join(","))
            }
            (_, Subgroup::Circle) => "U1".into(),
            (_, Subgroup::Su2(Su2Subgroup::Full)) => "Full".into(),
            (_, Subgroup::Su2(Su2Subgroup::Center)) => "Center".into(),
            (_, Subgroup::Su2(Su2Subgroup::Torus(n))) => {
                let c = n.coords();
                format!("Torus({:.6}, {:.6}, {:.6})", c[0], c[1], c[2])
            }
            (GroupSpec::Product(fs), Subgroup::Product(ds)) => {
                let parts: Vec<String> = fs.iter().zip(ds).map(|(f, d)| f.format_subgroup(d)).collect();
                format!("({})", parts.join(" x "))
            }
            _ => format!("{d:?}"),
        }
    }

    /// Parses an element literal: index or name (finite), angle (U(1)),
    /// `[w, x, y, z]` (SU(2)), array of factor literals (products).
    pub fn parse_element(&self, v: &Value) -> Result<GroupElement> {
        let bad = |msg: &str| Error::InvalidElement(format!("{msg} for {self}: {v}"));
        let g = match self {
            GroupSpec::Finite(t) => match v {
                Value::Number(n) => {
                    let i = n.as_u64().ok_or_else(|| bad("expected element index"))? as usize;
                    if i >= t.order() {
                        return Err(bad("index out of range"));
                    }
                    GroupElement::Finite(i)
                }
                Value::String(s) => GroupElement::Finite(t.index_of(s).ok_or_else(|| bad("unknown element name"))?),
                _ => return Err(bad("expected index or name")),
            },
            GroupSpec::Circle => {
                let a = v.as_f64().ok_or_else(|| bad("expected angle"))?;
                GroupElement::Circle(a.rem_euclid(TAU))
            }
            GroupSpec::Su2 => {
                let arr = v.as_array().filter(|a| a.len() == 4).ok_or_else(|| bad("expected [w, x, y, z]"))?;
                let mut c = [0.0; 4];
                for (slot, x) in c.iter_mut().zip(arr) {
                    *slot = x.as_f64().ok_or_else(|| bad("expected number"))?;
                }
                let q = Quat::from_array(c);
                if (q.norm() - 1.0).abs() > 1e-6 {
                    return Err(bad("quaternion is not unit"));
                }
                GroupElement::Su2(q.renormalized())
            }
            GroupSpec::Product(fs) => {
                let arr = v
                    .as_array()
                    .filter(|a| a.len() == fs.len())
                    .ok_or_else(|| bad("expected one literal per factor"))?;
                GroupElement::Product(fs.iter().zip(arr).map(|(f, x)| f.parse_element(x)).collect::<Result<_>>()?)
            }
        };
        Ok(g)
    }

    pub fn element_to_json(&self, g: &GroupElement) -> Value {
        match (self, g) {
            (GroupSpec::Finite(t), GroupElement::Finite(x)) => Value::String(t.element_name(*x).to_string()),
            (GroupSpec::Circle, GroupElement::Circle(a)) => serde_json::json!(a),
            (GroupSpec::Su2, GroupElement::Su2(q)) => serde_json::json!(q.to_array()),
            (GroupSpec::Product(fs), GroupElement::Product(xs)) => {
                Value::Array(fs.iter().zip(xs).map(|(f, x)| f.element_to_json(x)).collect())
            }
            _ => Value::Null,
        }
    }
}

fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Element of SU(2) rotating by a fixed irrational-looking half-angle about `axis`;
/// never central, so its centralizer is exactly the torus about `axis`.
pub fn generic_rotation(axis: [f64; 3]) -> Quat {
    Quat::from_axis_angle(axis, 1.0 / PI + 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s3_elem(spec: &GroupSpec, name: &str) -> GroupElement {
        GroupElement::Finite(spec.as_finite().unwrap().index_of(name).unwrap())
    }

    #[test]
    fn multiply_examples() {
        let s3 = GroupSpec::s3();
        assert_eq!(
            s3.multiply(&s3_elem(&s3, "(12)"), &s3_elem(&s3, "(123)")).unwrap(),
            s3_elem(&s3, "(23)")
        );
        let u1 = GroupSpec::Circle;
        let GroupElement::Circle(a) = u1.multiply(&GroupElement::Circle(1.0), &GroupElement::Circle(5.5)).unwrap() else {
            panic!()
        };
        assert!((a - (6.5 - TAU)).abs() < 1e-12);
        let g = GroupElement::Su2(generic_rotation([1.0, 2.0, 3.0]));
        assert!(GroupSpec::Su2.approx_eq(&GroupSpec::Su2.multiply(&g, &GroupSpec::Su2.identity()).unwrap(), &g));
    }

    #[test]
    fn spec_mismatch_is_an_error() {
        let err = GroupSpec::Su2.multiply(&GroupElement::Finite(0), &GroupElement::Su2(Quat::ONE));
        assert!(matches!(err, Err(Error::SpecMismatch(_))));
        assert!(GroupSpec::s3().multiply(&GroupElement::Finite(9), &GroupElement::Finite(0)).is_err());
    }

    #[test]
    fn conjugate_examples() {
        let s3 = GroupSpec::s3();
        assert_eq!(
            s3.conjugate(&s3_elem(&s3, "(123)"), &s3_elem(&s3, "(12)")).unwrap(),
            s3_elem(&s3, "(132)")
        );
        let g = GroupElement::Su2(generic_rotation([0.3, -1.0, 2.0]));
        let minus_one = GroupElement::Su2(-Quat::ONE);
        assert!(GroupSpec::Su2.approx_eq(&GroupSpec::Su2.conjugate(&g, &minus_one).unwrap(), &g));
    }

    #[test]
    fn centralizer_examples() {
        for spec in [GroupSpec::s3(), GroupSpec::Su2, GroupSpec::Circle, GroupSpec::from_name("SU2 x Z2").unwrap()] {
            assert_eq!(spec.centralizer(&[]).unwrap(), spec.full_subgroup());
        }
        let s3 = GroupSpec::s3();
        let z = s3.centralizer(&[s3_elem(&s3, "(12)")]).unwrap();
        let Subgroup::Finite(m) = &z else { panic!() };
        assert_eq!(m.ones().collect::<Vec<_>>(), vec![0, 1]);
        let su2 = GroupSpec::Su2;
        assert_eq!(
            su2.centralizer(&[GroupElement::Su2(Quat::I), GroupElement::Su2(Quat::J)]).unwrap(),
            Subgroup::Su2(Su2Subgroup::Center)
        );
    }

    #[test]
    fn reduce_generators_examples() {
        let s3 = GroupSpec::s3();
        let center_only = vec![s3.identity()];
        assert!(s3.reduce_generators(&center_only).unwrap().is_empty());

        let all = s3.elements().unwrap();
        let red = s3.reduce_generators(&all).unwrap();
        // greedy trace: e no-op, (12) shrinks to {e,(12)}, (13) shrinks to {e}, rest no-op
        assert_eq!(red, vec![s3_elem(&s3, "(12)"), s3_elem(&s3, "(13)")]);
        assert_eq!(s3.centralizer(&red).unwrap(), s3.center());

        let su2 = GroupSpec::Su2;
        let g = GroupElement::Su2(generic_rotation([1.0, 1.0, 0.0]));
        let g2 = su2.multiply(&g, &g).unwrap();
        let g3 = su2.multiply(&g2, &g).unwrap();
        assert_eq!(su2.reduce_generators(&[g.clone(), g2, g3]).unwrap(), vec![g]);
    }

    #[test]
    fn subgroup_contains_examples() {
        let su2 = GroupSpec::Su2;
        let torus = Subgroup::Su2(Su2Subgroup::Torus(Axis::new([1.0, 0.0, 0.0]).unwrap()));
        assert!(su2.subgroup_contains(&torus, &torus).unwrap());
        assert!(su2.subgroup_contains(&torus, &su2.center()).unwrap());
        assert!(!su2.subgroup_contains(&su2.center(), &torus).unwrap());

        let s3 = GroupSpec::s3();
        let order2 = s3.centralizer(&[s3_elem(&s3, "(12)")]).unwrap();
        let a3 = s3.centralizer(&[s3_elem(&s3, "(123)")]).unwrap();
        assert!(!s3.subgroup_contains(&order2, &a3).unwrap());
        assert!(s3.subgroup_contains(&s3.full_subgroup(), &a3).unwrap());
    }

    #[test]
    fn conjugate_subgroup_examples() {
        let su2 = GroupSpec::Su2;
        let tx = Subgroup::Su2(Su2Subgroup::Torus(Axis::new([1.0, 0.0, 0.0]).unwrap()));
        let quarter_z = GroupElement::Su2(Quat::from_axis_angle([0.0, 0.0, 1.0], std::f64::consts::FRAC_PI_4));
        let ty = Subgroup::Su2(Su2Subgroup::Torus(Axis::new([0.0, 1.0, 0.0]).unwrap()));
        assert_eq!(su2.conjugate_subgroup(&tx, &quarter_z).unwrap(), ty);
        assert_eq!(su2.conjugate_subgroup(&tx, &su2.identity()).unwrap(), tx);
        let s3 = GroupSpec::s3();
        assert_eq!(
            s3.conjugate_subgroup(&s3.full_subgroup(), &s3_elem(&s3, "(13)")).unwrap(),
            s3.full_subgroup()
        );
    }

    #[test]
    fn axis_sign_convention() {
        let a = Axis::new([-1.0, 2.0, 0.0]).unwrap();
        assert!(a.coords()[0] > 0.0);
        let b = Axis::new([0.0, -3.0, 1.0]).unwrap();
        assert!(b.coords()[1] > 0.0);
        assert_eq!(a, Axis::new([1.0, -2.0, 0.0]).unwrap());
    }

    #[test]
    fn names_resolve() {
        assert!(matches!(GroupSpec::from_name("Z4").unwrap(), GroupSpec::Finite(_)));
        assert_eq!(GroupSpec::from_name("Z_4").unwrap(), GroupSpec::from_name("Z4").unwrap());
        let p = GroupSpec::from_name("SU2 x Z2").unwrap();
        assert_eq!(p.to_string(), "SU2 x Z2");
        assert_eq!(GroupSpec::from_name("Z4xZ2").unwrap().order(), Some(8));
        assert!(matches!(GroupSpec::from_name("SO3"), Err(Error::UnknownGroup(_))));
    }

    #[test]
    fn element_literals_round_trip() {
        let spec = GroupSpec::from_name("SU2 x S3").unwrap();
        let v = serde_json::json!([[0.0, 1.0, 0.0, 0.0], "(12)"]);
        let g = spec.parse_element(&v).unwrap();
        assert_eq!(spec.element_to_json(&g), v);
        assert!(GroupSpec::Su2.parse_element(&serde_json::json!([1.0, 1.0, 0.0, 0.0])).is_err());
        assert_eq!(GroupSpec::s3().parse_element(&serde_json::json!(4)).unwrap(), GroupElement::Finite(4));
    }

    #[test]
    fn haar_finite_frequencies_within_three_sigma() {
        let z4 = GroupSpec::cyclic(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 40_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let GroupElement::Finite(i) = z4.haar_sample(&mut rng) else { unreachable!() };
            counts[i] += 1;
        }
        let sigma = (0.25f64 * 0.75 / n as f64).sqrt();
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() <= 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn haar_continuous_means_vanish() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 20_000;
        let mut sums = [0.0f64; 4];
        let mut sum_sq = [0.0f64; 4];
        for _ in 0..n {
            let GroupElement::Su2(q) = GroupSpec::Su2.haar_sample(&mut rng) else { unreachable!() };
            for (k, c) in q.to_array().into_iter().enumerate() {
                sums[k] += c;
                sum_sq[k] += c * c;
            }
        }
        for k in 0..4 {
            let mean = sums[k] / n as f64;
            let sigma = (sum_sq[k] / n as f64 - mean * mean).sqrt() / (n as f64).sqrt();
            assert!(mean.abs() <= 3.0 * sigma, "component {k}: {mean}");
        }

        let mut cos_sum = 0.0;
        for _ in 0..n {
            let GroupElement::Circle(a) = GroupSpec::Circle.haar_sample(&mut rng) else { unreachable!() };
            cos_sum += a.cos();
        }
        // Var(cos θ) = 1/2 under the uniform angle
        let sigma = (0.5 / n as f64).sqrt();
        assert!((cos_sum / n as f64).abs() <= 3.0 * sigma);
    }
}
