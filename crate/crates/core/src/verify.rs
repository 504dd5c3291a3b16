//! The whole-library self-check behind `orbit-types verify <group>`, plus
//! random generators for graphs, generator sets and centralizer elements.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::census::{chunk_rng, check_stratification, exact_census, mc_census, AxiomCheck, DEFAULT_BUDGET, DEFAULT_CHUNK};
use crate::connection::{Connection, GaugeTransform};
use crate::construct::{nonempty_stratum_witness, realize_type};
use crate::error::Result;
use crate::group::{GroupElement, GroupSpec, Quat, Su2Subgroup, Subgroup};
use crate::howe::TypePoset;
use crate::path::Graph;
use crate::slice::{verify_slice_properties, OrbitPoint};

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub version: String,
    pub group: String,
    pub seed: u64,
    pub checks: Vec<AxiomCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// A connected graph with `1..=max_vertices` vertices and `0..=max_extra`
/// edges beyond a random spanning tree.
pub fn random_graph<R: Rng + ?Sized>(rng: &mut R, max_vertices: usize, max_extra: usize) -> Graph {
    let nv = rng.random_range(1..=max_vertices.max(1));
    let vertices: Vec<String> = (0..nv).map(|i| if i == 0 { "m".into() } else { format!("v{i}") }).collect();
    let mut edges = Vec::new();
    for i in 1..nv {
        let parent = rng.random_range(0..i);
        let (a, b) = if rng.random_bool(0.5) { (parent, i) } else { (i, parent) };
        edges.push((format!("e{}", edges.len()), vertices[a].clone(), vertices[b].clone()));
    }
    for _ in 0..rng.random_range(0..=max_extra) {
        let a = rng.random_range(0..nv);
        let b = rng.random_range(0..nv);
        edges.push((format!("e{}", edges.len()), vertices[a].clone(), vertices[b].clone()));
    }
    Graph::new(vertices, "m", edges).expect("generated graph is valid")
}

/// Random generator set mixing Haar elements, identities and repeats.
pub fn random_generators<R: Rng + ?Sized>(spec: &GroupSpec, rng: &mut R, max_len: usize) -> Vec<GroupElement> {
    let len = rng.random_range(0..=max_len);
    let mut out: Vec<GroupElement> = Vec::with_capacity(len);
    for _ in 0..len {
        let g = match rng.random_range(0..5) {
            0 => spec.identity(),
            1 if !out.is_empty() => out[rng.random_range(0..out.len())].clone(),
            _ => spec.haar_sample(rng),
        };
        out.push(g);
    }
    out
}

/// A random element of a centralizer subgroup.
pub fn sample_in_subgroup<R: Rng + ?Sized>(spec: &GroupSpec, d: &Subgroup, rng: &mut R) -> GroupElement {
    match (spec, d) {
        (GroupSpec::Finite(_), Subgroup::Finite(m)) => {
            let members: Vec<usize> = m.ones().collect();
            GroupElement::Finite(members[rng.random_range(0..members.len())])
        }
        (GroupSpec::Su2, Subgroup::Su2(s)) => GroupElement::Su2(match s {
            Su2Subgroup::Full => Quat::haar(rng),
            Su2Subgroup::Torus(n) => Quat::from_axis_angle(n.coords(), rng.random_range(0.0..std::f64::consts::TAU)),
            Su2Subgroup::Center => {
                if rng.random_bool(0.5) {
                    Quat::ONE
                } else {
                    -Quat::ONE
                }
            }
        }),
        (GroupSpec::Product(fs), Subgroup::Product(ds)) => {
            GroupElement::Product(fs.iter().zip(ds).map(|(f, d)| sample_in_subgroup(f, d, rng)).collect())
        }
        _ => spec.haar_sample(rng),
    }
}

struct Recorder {
    checks: Vec<AxiomCheck>,
}

impl Recorder {
    fn run(&mut self, name: &str, f: impl FnOnce() -> Result<std::result::Result<String, String>>) {
        let (passed, detail) = match f() {
            Ok(Ok(d)) => (true, d),
            Ok(Err(d)) => (false, d),
            Err(e) => (false, format!("error: {e}")),
        };
        self.checks.push(AxiomCheck {
            name: name.into(),
            passed,
            detail,
        });
    }
}

fn fail_if(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Err(msg())
    } else {
        Ok(())
    }
}

/// Runs every module's invariant checks for `spec`.
pub fn run_suite(spec: &GroupSpec, seed: u64) -> Result<VerifyReport> {
    let poset = TypePoset::enumerate(spec);
    let mut rec = Recorder { checks: Vec::new() };
    let k = poset.len();

    rec.run("poset-order", || {
        for a in 0..k {
            if !poset.leq(a, a) || !poset.leq(poset.t_min().id, a) || !poset.leq(a, poset.t_max().id) {
                return Ok(Err(format!("class {a} breaks reflexivity or the bounds")));
            }
            for b in 0..k {
                if a != b && poset.leq(a, b) && poset.leq(b, a) {
                    return Ok(Err(format!("classes {a} and {b} are mutually <=")));
                }
                for c in 0..k {
                    if poset.leq(a, b) && poset.leq(b, c) && !poset.leq(a, c) {
                        return Ok(Err(format!("{a} <= {b} <= {c} but not {a} <= {c}")));
                    }
                }
            }
        }
        for t in poset.classes() {
            if poset.classify(&t.representative)? != t.id {
                return Ok(Err(format!("representative of `{}` misclassified", t.label)));
            }
        }
        Ok(Ok(format!("{k} classes, {} covering relations", poset.hasse_edges().len())))
    });

    rec.run("reduce-generators", || {
        let mut rng = chunk_rng(seed, 1);
        for _ in 0..200 {
            let u = random_generators(spec, &mut rng, 6);
            let (kept, chain) = spec.reduce_generators_traced(&u)?;
            let z = spec.centralizer(&u)?;
            if spec.centralizer(&kept)? != z {
                return Ok(Err("reduced set has a different centralizer".into()));
            }
            for w in chain.windows(2) {
                if w[0] == w[1] || !spec.subgroup_contains(&w[0], &w[1])? {
                    return Ok(Err("centralizer chain is not strictly decreasing".into()));
                }
            }
            let h = spec.haar_sample(&mut rng);
            let conj: Vec<GroupElement> = u.iter().map(|g| spec.conjugate(g, &h)).collect::<Result<_>>()?;
            if poset.type_of(&conj)?.id != poset.type_of(&u)?.id {
                return Ok(Err("type changes under conjugation".into()));
            }
        }
        Ok(Ok("200 random sets".into()))
    });

    rec.run("paths", || {
        let mut rng = chunk_rng(seed, 2);
        for _ in 0..100 {
            let g = random_graph(&mut rng, 4, 4);
            let loops = g.fundamental_loops()?;
            let expected = g.edges().len() + 1 - g.vertices().len();
            if loops.len() != expected {
                return Ok(Err(format!("{} fundamental loops, expected {expected}", loops.len())));
            }
            for w in &loops {
                let again = g.reduce(w.start(), w.letters())?;
                if again != *w || !w.is_loop_at(g.base()) {
                    return Ok(Err("fundamental loop is not a reduced loop at the base".into()));
                }
                let back = g.compose(w, &w.invert())?;
                if !back.is_empty() {
                    return Ok(Err("w·w⁻¹ does not reduce to the empty word".into()));
                }
            }
        }
        Ok(Ok("100 random graphs".into()))
    });

    rec.run("gauge-covariance", || {
        let mut rng = chunk_rng(seed, 3);
        for _ in 0..500 {
            let g = Arc::new(random_graph(&mut rng, 3, 3));
            let c = Connection::random(spec.clone(), g.clone(), &mut rng);
            let gauge = GaugeTransform::random(spec, g.clone(), &mut rng);
            let moved = c.act(&gauge)?;
            let t = c.orbit_type(&poset)?.id;
            if moved.orbit_type(&poset)?.id != t {
                return Ok(Err("orbit type changed under a gauge transform".into()));
            }
            let loops = g.fundamental_loops()?;
            let before = c.reduction_map(&loops)?;
            let after = moved.reduction_map(&loops)?;
            let gm = &gauge.values()[g.base()];
            for (b, a) in before.iter().zip(&after) {
                if !spec.approx_eq(a, &spec.conjugate(b, gm)?) {
                    return Ok(Err("reduction map is not equivariant".into()));
                }
            }
            let subset: Vec<_> = loops.iter().filter(|_| rng.random_bool(0.5)).cloned().collect();
            let s = poset.type_of(&c.reduction_map(&subset)?)?.id;
            if !poset.leq(s, t) {
                return Ok(Err("a reduction map raised the type".into()));
            }
        }
        Ok(Ok("500 random connections".into()))
    });

    rec.run("stabilizer", || {
        let mut rng = chunk_rng(seed, 4);
        for _ in 0..100 {
            let g = Arc::new(random_graph(&mut rng, 3, 3));
            let c = Connection::random(spec.clone(), g, &mut rng);
            let z = sample_in_subgroup(spec, &c.centralizer()?, &mut rng);
            let stab = c.stabilizer_transport(&z)?;
            if !c.act(&stab)?.approx_eq(&c) {
                return Ok(Err("transported stabilizer moves the connection".into()));
            }
        }
        Ok(Ok("100 random connections".into()))
    });

    rec.run("construction", || {
        let mut rng = chunk_rng(seed, 5);
        for t in poset.classes() {
            if nonempty_stratum_witness(&poset, t)?.orbit_type(&poset)?.id != t.id {
                return Ok(Err(format!("no witness of type `{}`", t.label)));
            }
        }
        for _ in 0..50 {
            let g = random_graph(&mut rng, 3, 2);
            let mut c = Connection::trivial(spec.clone(), Arc::new(g.clone()));
            if rng.random_bool(0.5) && !c.values().is_empty() {
                let mut vals = c.values().to_vec();
                let i = rng.random_range(0..vals.len());
                vals[i] = spec.haar_sample(&mut rng);
                c = Connection::new(spec.clone(), c.graph().clone(), vals)?;
            }
            let cur = c.orbit_type(&poset)?.id;
            let targets: Vec<usize> = (0..k).filter(|&t| poset.leq(cur, t)).collect();
            let t = &poset.classes()[targets[rng.random_range(0..targets.len())]];
            let out = realize_type(&c, std::slice::from_ref(&g), &poset, t)?;
            if out.orbit_type(&poset)?.id != t.id {
                return Ok(Err(format!("realized type differs from `{}`", t.label)));
            }
            if !out.restrict(&g)?.approx_eq(&c) {
                return Ok(Err("protected restriction changed".into()));
            }
        }
        Ok(Ok(format!("{k} witnesses, 50 realizations")))
    });

    rec.run("census", || {
        let n = 2;
        let report = if spec.is_finite() {
            match exact_census(&poset, n, DEFAULT_BUDGET / 100) {
                Ok(r) => r,
                Err(_) => mc_census(&poset, n, 20_000, seed, DEFAULT_CHUNK)?,
            }
        } else {
            mc_census(&poset, n, 20_000, seed, DEFAULT_CHUNK)?
        };
        let total: f64 = report.entries.iter().map(|e| e.fraction).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Ok(Err(format!("fractions sum to {total}")));
        }
        if report.mode == "exact" {
            let mc = mc_census(&poset, n, 20_000, seed, DEFAULT_CHUNK)?;
            for e in &report.entries {
                let sigma = (e.fraction * (1.0 - e.fraction) / mc.samples as f64).sqrt();
                let diff = (mc.fraction(e.id) - e.fraction).abs();
                if diff > 3.0 * sigma + 1e-12 {
                    return Ok(Err(format!("`{}`: Monte Carlo off by {diff:.4}", e.label)));
                }
            }
        }
        let strat = check_stratification(&poset, &report, seed)?;
        if let Err(e) = fail_if(!strat.passed(), || {
            let v: Vec<String> = strat.violations().iter().map(|c| format!("{}: {}", c.name, c.detail)).collect();
            v.join("; ")
        }) {
            return Ok(Err(e));
        }
        Ok(Ok(format!("{} census of {} configurations, axioms hold", report.mode, report.samples)))
    });

    rec.run("slice", || {
        let mut rng = chunk_rng(seed, 6);
        let base: Vec<GroupElement> = if spec.is_finite() {
            let mut w = Vec::new();
            for t in [poset.t_max(), &poset.classes()[k / 2]] {
                let gens = nonempty_stratum_witness(&poset, t)?.holonomy_generators()?;
                if gens.len() <= 2 {
                    w = gens;
                    w.resize(2, spec.identity());
                    break;
                }
            }
            if w.is_empty() {
                w = vec![spec.identity(); 2];
            }
            w
        } else {
            (0..2).map(|_| spec.haar_sample(&mut rng)).collect()
        };
        let point = OrbitPoint::new(spec.clone(), base)?;
        let noise = if point.trust_radius().is_finite() { point.trust_radius() * 1e-3 } else { 1e-3 };
        let rep = verify_slice_properties(&point, 20, noise, seed)?;
        if let Err(e) = fail_if(!rep.passed(), || {
            rep.checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| format!("{}: {}", c.name, c.detail))
                .collect::<Vec<_>>()
                .join("; ")
        }) {
            return Ok(Err(e));
        }
        Ok(Ok(format!("{} points, max residual {:.2e}", rep.trials, rep.max_residual)))
    });

    Ok(VerifyReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        group: spec.to_string(),
        seed,
        checks: rec.checks,
    })
}
