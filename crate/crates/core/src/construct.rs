//! Extending a connection by fresh loops to raise its orbit type.
//!
//! Each step glues a new vertex `m'` to the base by a tail edge `γ` carrying
//! the identity and adds a loop `e'` at `m'` carrying `u`. The composite loop
//! `γ e' γ⁻¹` then has holonomy exactly `u`, while every word on the old
//! graph keeps its holonomy because no old edge changes.

use std::sync::Arc;

use serde::Serialize;

use crate::connection::Connection;
use crate::error::{Error, Result};
use crate::group::{generic_rotation, GroupElement, GroupSpec, Quat, Su2Subgroup, Subgroup};
use crate::howe::{HoweType, TypePoset};
use crate::path::{Graph, Letter, PathWord};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionStep {
    pub vertex: String,
    pub tail_edge: String,
    pub loop_edge: String,
    pub element: String,
    /// `γ e' γ⁻¹`, formatted on the extended graph.
    pub loop_word: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct ExtensionPlan {
    pub steps: Vec<ExtensionStep>,
}

fn fresh_name(prefix: &str, graph: &Graph, protected: &[Graph]) -> String {
    let taken = |n: &str| graph.has_name(n) || protected.iter().any(|p| p.has_name(n));
    (0..)
        .map(|k| format!("{prefix}{k}"))
        .find(|n| !taken(n))
        .expect("unbounded name supply")
}

/// Adds one loop carrying `g`. Returns the extended connection, the new loop
/// word at the base, and a description of the step.
pub fn magnify_type_step(
    c: &Connection,
    protected: &[Graph],
    g: &GroupElement,
) -> Result<(Connection, PathWord, ExtensionStep)> {
    let spec = c.spec();
    spec.check(g)?;
    c.graph().tree_paths()?;
    let mut graph = (**c.graph()).clone();
    let base = graph.base();
    let vertex = fresh_name("m'", &graph, protected);
    let v = graph.add_vertex(vertex.clone())?;
    let tail_edge = fresh_name("gamma", &graph, protected);
    let tail = graph.add_edge(tail_edge.clone(), base, v)?;
    let loop_edge = fresh_name("e'", &graph, protected);
    let lp = graph.add_edge(loop_edge.clone(), v, v)?;

    let raw = [
        Letter { edge: tail, forward: true },
        Letter { edge: lp, forward: true },
        Letter { edge: tail, forward: false },
    ];
    let word = graph.reduce(base, &raw)?;
    let mut values = c.values().to_vec();
    values.push(spec.identity());
    values.push(g.clone());
    let step = ExtensionStep {
        vertex,
        tail_edge,
        loop_edge,
        element: spec.format_element(g),
        loop_word: graph.format_word(&word),
    };
    let extended = Connection::new(spec.clone(), Arc::new(graph), values)?;
    Ok((extended, word, step))
}

/// Adds one loop whose holonomy is `g`, so that `Z(H_{A'}) = Z({g} ∪ H_A)`.
pub fn magnify_type(c: &Connection, protected: &[Graph], g: &GroupElement) -> Result<(Connection, PathWord)> {
    let (c, w, _) = magnify_type_step(c, protected, g)?;
    Ok((c, w))
}

/// Elements `u_1..u_k` with `Z({u_i}) = v`, for a Howe subgroup `v`.
pub fn howe_generators(spec: &GroupSpec, v: &Subgroup) -> Result<Vec<GroupElement>> {
    match (spec, v) {
        (GroupSpec::Finite(_), Subgroup::Finite(_)) => {
            let members = spec.subgroup_elements(v).expect("finite subgroup");
            let zv = spec.centralizer(&members)?;
            let candidates = spec.subgroup_elements(&zv).expect("finite subgroup");
            let gens = spec.reduce_generators(&candidates)?;
            if spec.centralizer(&gens)? != *v {
                return Err(Error::InvalidArgument(format!(
                    "{} is not a centralizer",
                    spec.format_subgroup(v)
                )));
            }
            Ok(gens)
        }
        (GroupSpec::Circle, Subgroup::Circle) => Ok(Vec::new()),
        (GroupSpec::Su2, Subgroup::Su2(s)) => Ok(match s {
            Su2Subgroup::Full => Vec::new(),
            Su2Subgroup::Torus(n) => vec![GroupElement::Su2(generic_rotation(n.coords()))],
            Su2Subgroup::Center => vec![GroupElement::Su2(Quat::I), GroupElement::Su2(Quat::J)],
        }),
        (GroupSpec::Product(fs), Subgroup::Product(vs)) if fs.len() == vs.len() => {
            let per: Vec<Vec<GroupElement>> = fs
                .iter()
                .zip(vs)
                .map(|(f, v)| howe_generators(f, v))
                .collect::<Result<_>>()?;
            let k = per.iter().map(Vec::len).max().unwrap_or(0);
            Ok((0..k)
                .map(|i| {
                    GroupElement::Product(
                        fs.iter()
                            .zip(&per)
                            .map(|(f, gs)| gs.get(i).cloned().unwrap_or_else(|| f.identity()))
                            .collect(),
                    )
                })
                .collect())
        }
        _ => Err(Error::SpecMismatch(format!("{v:?} is not a subgroup of {spec}"))),
    }
}

/// Extends `c` so that its orbit type becomes `t`, leaving the restriction
/// to every protected graph untouched. Also returns the steps taken.
pub fn realize_type_with_plan(
    c: &Connection,
    protected: &[Graph],
    poset: &TypePoset,
    t: &HoweType,
) -> Result<(Connection, ExtensionPlan)> {
    let current = c.orbit_type(poset)?;
    if !poset.type_leq(current, t)? {
        return Err(Error::TargetBelowType {
            target: t.id,
            current: current.id,
        });
    }
    let z = c.centralizer()?;
    let v = poset.member_within(t.id, &z)?.ok_or(Error::TargetBelowType {
        target: t.id,
        current: current.id,
    })?;
    let mut protected = protected.to_vec();
    let mut out = c.clone();
    let mut plan = ExtensionPlan::default();
    for u in howe_generators(c.spec(), &v)? {
        let (next, _, step) = magnify_type_step(&out, &protected, &u)?;
        protected.push((**out.graph()).clone());
        out = next;
        plan.steps.push(step);
    }
    Ok((out, plan))
}

pub fn realize_type(c: &Connection, protected: &[Graph], poset: &TypePoset, t: &HoweType) -> Result<Connection> {
    Ok(realize_type_with_plan(c, protected, poset, t)?.0)
}

/// A connection of type `t` on a single-vertex graph.
pub fn nonempty_stratum_witness(poset: &TypePoset, t: &HoweType) -> Result<Connection> {
    let graph = Graph::new(vec!["m".to_string()], "m", Vec::new())?;
    let trivial = Connection::trivial(poset.spec().clone(), Arc::new(graph));
    realize_type(&trivial, &[], poset, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Axis;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(x: &str) -> String {
        x.to_string()
    }

    fn sample_graph() -> Graph {
        Graph::new(
            vec![s("m"), s("v")],
            "m",
            vec![(s("t"), s("m"), s("v")), (s("f"), s("v"), s("m")), (s("l"), s("m"), s("m"))],
        )
        .unwrap()
    }

    fn finite(spec: &GroupSpec, n: &str) -> GroupElement {
        GroupElement::Finite(spec.as_finite().unwrap().index_of(n).unwrap())
    }

    #[test]
    fn magnify_with_identity_changes_nothing_observable() {
        let spec = GroupSpec::s3();
        let poset = TypePoset::enumerate(&spec);
        let g = sample_graph();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = Connection::random(spec.clone(), Arc::new(g.clone()), &mut rng);
        let (ext, w) = magnify_type(&c, std::slice::from_ref(&g), &spec.identity()).unwrap();
        assert_eq!(ext.orbit_type(&poset).unwrap(), c.orbit_type(&poset).unwrap());
        assert_eq!(ext.restrict(&g).unwrap(), c);
        assert_eq!(ext.holonomy(&w).unwrap(), spec.identity());
        assert!(w.is_loop_at(ext.graph().base()));
    }

    #[test]
    fn magnify_examples() {
        let su2 = GroupSpec::Su2;
        let poset = TypePoset::enumerate(&su2);
        let c = Connection::trivial(su2.clone(), Arc::new(sample_graph()));
        let (ext, w) = magnify_type(&c, &[], &GroupElement::Su2(Quat::I)).unwrap();
        assert_eq!(ext.holonomy(&w).unwrap(), GroupElement::Su2(Quat::I));
        assert_eq!(
            ext.centralizer().unwrap(),
            Subgroup::Su2(Su2Subgroup::Torus(Axis::new([1.0, 0.0, 0.0]).unwrap()))
        );
        assert_eq!(ext.orbit_type(&poset).unwrap().id, 1);

        let s3 = GroupSpec::s3();
        let poset = TypePoset::enumerate(&s3);
        let c = Connection::bouquet(s3.clone(), vec![finite(&s3, "(123)")]).unwrap();
        let (ext, _) = magnify_type(&c, &[], &finite(&s3, "(12)")).unwrap();
        let z = ext.centralizer().unwrap();
        assert_eq!(s3.subgroup_elements(&z).unwrap(), vec![s3.identity()]);
        assert_eq!(ext.orbit_type(&poset).unwrap().id, poset.t_max().id);
    }

    #[test]
    fn fresh_names_avoid_protected_graphs() {
        let spec = GroupSpec::s3();
        let c = Connection::trivial(spec.clone(), Arc::new(Graph::bouquet(1)));
        let clash = Graph::new(
            vec![s("m'0"), s("m'1")],
            "m'0",
            vec![(s("gamma0"), s("m'0"), s("m'1")), (s("e'0"), s("m'1"), s("m'1"))],
        )
        .unwrap();
        let (ext, _, step) = magnify_type_step(&c, &[clash.clone()], &spec.identity()).unwrap();
        assert!(!clash.has_name(&step.vertex));
        assert!(!clash.has_name(&step.tail_edge));
        assert!(!clash.has_name(&step.loop_edge));
        assert_eq!(ext.graph().vertices().len(), 2);
    }

    #[test]
    fn realize_examples() {
        let su2 = GroupSpec::Su2;
        let poset = TypePoset::enumerate(&su2);
        let g = sample_graph();
        let c = Connection::trivial(su2.clone(), Arc::new(g.clone()));
        let (ext, plan) = realize_type_with_plan(&c, &[g.clone()], &poset, poset.t_max()).unwrap();
        assert_eq!(plan.steps.len(), 2);
        assert_eq!(plan.steps[0].element, su2.format_element(&GroupElement::Su2(Quat::I)));
        assert_eq!(plan.steps[1].element, su2.format_element(&GroupElement::Su2(Quat::J)));
        assert_eq!(ext.orbit_type(&poset).unwrap().id, poset.t_max().id);
        assert_eq!(ext.restrict(&g).unwrap(), c);

        let s3 = GroupSpec::s3();
        let poset = TypePoset::enumerate(&s3);
        let order_two = poset
            .classes()
            .iter()
            .find(|t| s3.subgroup_elements(&t.representative).unwrap().len() == 2)
            .unwrap();
        let c = Connection::trivial(s3.clone(), Arc::new(g.clone()));
        let (ext, plan) = realize_type_with_plan(&c, &[], &poset, order_two).unwrap();
        assert_eq!(plan.steps.len(), 1);
        let GroupElement::Finite(u) = ext.values().last().unwrap() else { unreachable!() };
        assert!(["(12)", "(13)", "(23)"].contains(&s3.as_finite().unwrap().element_name(*u)));
        assert_eq!(ext.orbit_type(&poset).unwrap().id, order_two.id);

        let same = c.orbit_type(&poset).unwrap();
        assert_eq!(realize_type(&c, &[g.clone()], &poset, same).unwrap().orbit_type(&poset).unwrap(), same);
    }

    #[test]
    fn realize_rejects_lower_targets() {
        let s3 = GroupSpec::s3();
        let poset = TypePoset::enumerate(&s3);
        let c = Connection::bouquet(s3.clone(), vec![finite(&s3, "(12)"), finite(&s3, "(123)")]).unwrap();
        assert_eq!(c.orbit_type(&poset).unwrap().id, poset.t_max().id);
        assert!(matches!(
            realize_type(&c, &[], &poset, poset.t_min()),
            Err(Error::TargetBelowType { .. })
        ));
        let a3 = Connection::bouquet(s3.clone(), vec![finite(&s3, "(123)")]).unwrap();
        let order_two = poset.classes().iter().find(|t| t.id != 0 && t.id != 1 && t.id != poset.t_max().id);
        assert!(matches!(
            realize_type(&a3, &[], &poset, order_two.unwrap()),
            Err(Error::TargetBelowType { .. })
        ));
    }

    #[test]
    fn witnesses_exist_for_every_type() {
        for spec in [
            GroupSpec::s3(),
            GroupSpec::q8(),
            GroupSpec::Su2,
            GroupSpec::Circle,
            GroupSpec::from_name("SU2xS3").unwrap(),
        ] {
            let poset = TypePoset::enumerate(&spec);
            for t in poset.classes() {
                let w = nonempty_stratum_witness(&poset, t).unwrap();
                assert_eq!(w.orbit_type(&poset).unwrap(), t, "{spec} {}", t.label);
            }
            let w = nonempty_stratum_witness(&poset, poset.t_min()).unwrap();
            assert!(w.values().is_empty());
        }
    }

    #[test]
    fn composition_law_holds_stepwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for spec in [GroupSpec::s3(), GroupSpec::q8(), GroupSpec::Su2] {
            let poset = TypePoset::enumerate(&spec);
            let g = Graph::bouquet(1);
            for _ in 0..30 {
                let c = Connection::random(spec.clone(), Arc::new(g.clone()), &mut rng);
                let mut known = c.holonomy_generators().unwrap();
                let mut cur = c.clone();
                for _ in 0..3 {
                    let u = if rng.random_bool(0.5) {
                        spec.identity()
                    } else {
                        spec.haar_sample(&mut rng)
                    };
                    let (next, w) = magnify_type(&cur, &[g.clone()], &u).unwrap();
                    assert!(spec.approx_eq(&next.holonomy(&w).unwrap(), &u));
                    known.push(u);
                    assert_eq!(next.centralizer().unwrap(), spec.centralizer(&known).unwrap());
                    assert_eq!(next.restrict(&g).unwrap(), c);
                    cur = next;
                }
                let t = cur.orbit_type(&poset).unwrap();
                assert!(poset.leq(c.orbit_type(&poset).unwrap().id, t.id));
            }
        }
    }

    #[test]
    fn realized_types_match_random_admissible_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for spec in [GroupSpec::s3(), GroupSpec::q8(), GroupSpec::Su2] {
            let poset = TypePoset::enumerate(&spec);
            let g = sample_graph();
            for _ in 0..40 {
                let c = if rng.random_bool(0.5) {
                    Connection::trivial(spec.clone(), Arc::new(g.clone()))
                } else {
                    let mut c = Connection::trivial(spec.clone(), Arc::new(g.clone()));
                    let k = rng.random_range(0..c.values().len());
                    let mut vals = c.values().to_vec();
                    vals[k] = spec.haar_sample(&mut rng);
                    c = Connection::new(spec.clone(), c.graph().clone(), vals).unwrap();
                    c
                };
                let cur = c.orbit_type(&poset).unwrap().id;
                let targets: Vec<_> = poset.classes().iter().filter(|t| poset.leq(cur, t.id)).collect();
                let t = targets[rng.random_range(0..targets.len())];
                let out = realize_type(&c, &[g.clone()], &poset, t).unwrap();
                assert_eq!(out.orbit_type(&poset).unwrap(), t);
                assert_eq!(out.restrict(&g).unwrap(), c);
                for w in g.fundamental_loops().unwrap() {
                    assert_eq!(out.holonomy(&w).unwrap(), c.holonomy(&w).unwrap());
                }
            }
        }
    }
}
