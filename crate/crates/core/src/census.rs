//! Stratum sizes under product Haar measure on `G^n`, the measure of
//! configurations avoiding a region, and finite checks of the
//! stratification axioms.

use std::f64::consts::TAU;

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construct::realize_type;
use crate::connection::Connection;
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupSpec, Subgroup};
use crate::howe::TypePoset;

pub const DEFAULT_BUDGET: u128 = 10_000_000;
pub const DEFAULT_CHUNK: u64 = 4096;
pub const THREADS_ENV: &str = "ORBIT_TYPES_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusEntry {
    pub id: usize,
    pub label: String,
    pub count: u64,
    /// Reduced fraction `p/q`, present for exact censuses.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exact: Option<String>,
    pub fraction: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub version: String,
    pub group: String,
    pub loops: usize,
    pub mode: String,
    pub samples: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub chunk_size: Option<u64>,
    pub entries: Vec<CensusEntry>,
}

impl CensusReport {
    pub fn entry(&self, id: usize) -> Option<&CensusEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn fraction(&self, id: usize) -> f64 {
        self.entry(id).map_or(0.0, |e| e.fraction)
    }

    pub fn exact_fraction(&self, id: usize) -> Option<Ratio<u64>> {
        match self.entry(id) {
            None if self.mode == "exact" => Some(Ratio::from_integer(0)),
            None => None,
            Some(e) => e.exact.as_deref().and_then(|s| s.parse().ok()),
        }
    }

    /// Comma-separated rows `id,label,count,exact,fraction,std_error`; `exact`
    /// is empty for sampled censuses.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,label,count,exact,fraction,std_error\n");
        for e in &self.entries {
            let label = if e.label.contains([',', '"']) {
                format!("\"{}\"", e.label.replace('"', "\"\""))
            } else {
                e.label.clone()
            };
            let exact = e.exact.as_deref().unwrap_or("");
            out.push_str(&format!("{},{},{},{exact},{},{}\n", e.id, label, e.count, e.fraction, e.std_error));
        }
        out
    }
}

fn version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

/// `|G|^n`, saturating.
fn configurations(order: usize, n: usize) -> u128 {
    (0..n).fold(1u128, |acc, _| acc.saturating_mul(order as u128))
}

fn check_budget(spec: &GroupSpec, n: usize, budget: u128) -> Result<Vec<GroupElement>> {
    let elements = spec
        .elements()
        .ok_or_else(|| Error::InvalidArgument(format!("exact enumeration needs a finite group, got {spec}")))?;
    let needed = configurations(elements.len(), n);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(elements)
}

fn intersect(a: &Subgroup, b: &Subgroup) -> Subgroup {
    match (a, b) {
        (Subgroup::Finite(x), Subgroup::Finite(y)) => {
            let mut m = x.clone();
            m.intersect_with(y);
            Subgroup::Finite(m)
        }
        (Subgroup::Product(xs), Subgroup::Product(ys)) => {
            Subgroup::Product(xs.iter().zip(ys).map(|(x, y)| intersect(x, y)).collect())
        }
        _ => unreachable!("intersection is only used for finite groups"),
    }
}

/// Exact fraction of `n`-tuples of each orbit type, for a finite group with
/// `|G|^n` within `budget`.
///
/// Counts propagate through the distinct partial centralizers, using
/// `Z(S ∪ {g}) = Z(S) ∩ Z(g)`.
pub fn exact_census(poset: &TypePoset, n: usize, budget: u128) -> Result<CensusReport> {
    let spec = poset.spec();
    let elements = check_budget(spec, n, budget)?;
    let single: Vec<Subgroup> = elements
        .iter()
        .map(|g| spec.centralizer(std::slice::from_ref(g)))
        .collect::<Result<_>>()?;
    let mut dist: Vec<(Subgroup, u64)> = vec![(spec.full_subgroup(), 1)];
    for _ in 0..n {
        let mut next: Vec<(Subgroup, u64)> = Vec::new();
        for (z, count) in &dist {
            for zg in &single {
                let w = intersect(z, zg);
                match next.iter_mut().find(|(s, _)| *s == w) {
                    Some((_, c)) => *c += count,
                    None => next.push((w, *count)),
                }
            }
        }
        dist = next;
    }
    let mut counts = vec![0u64; poset.len()];
    for (z, c) in &dist {
        counts[poset.classify(z)?] += c;
    }
    let total = configurations(elements.len(), n) as u64;
    let entries = poset
        .classes()
        .iter()
        .zip(&counts)
        .filter(|(_, &c)| c > 0)
        .map(|(t, &c)| CensusEntry {
            id: t.id,
            label: t.label.clone(),
            count: c,
            exact: Some(Ratio::new(c, total).to_string()),
            fraction: c as f64 / total as f64,
            std_error: 0.0,
        })
        .collect();
    Ok(CensusReport {
        version: version(),
        group: spec.to_string(),
        loops: n,
        mode: "exact".into(),
        samples: total,
        seed: None,
        chunk_size: None,
        entries,
    })
}

/// Thread pool sized by `ORBIT_TYPES_THREADS`, or rayon's default.
pub fn worker_pool() -> rayon::ThreadPool {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
}

/// Chunk `k` draws from stream `k` of the seed, so results are identical
/// for every worker count.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Sums per-chunk integer tallies computed in parallel, on the enclosing
/// rayon pool if there is one and on a [`worker_pool`] otherwise.
pub fn parallel_tally<F>(samples: u64, chunk_size: u64, seed: u64, width: usize, f: F) -> Result<Vec<u64>>
where
    F: Fn(&mut ChaCha8Rng, &mut [u64]) -> Result<()> + Sync,
{
    let chunk_size = chunk_size.max(1);
    let chunks = samples.div_ceil(chunk_size);
    let run = || {
        (0..chunks)
            .into_par_iter()
            .map(|k| {
                let mut rng = chunk_rng(seed, k);
                let mut tally = vec![0u64; width];
                let len = chunk_size.min(samples - k * chunk_size);
                for _ in 0..len {
                    f(&mut rng, &mut tally)?;
                }
                Ok(tally)
            })
            .try_reduce(
                || vec![0u64; width],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    Ok(a)
                },
            )
    };
    if rayon::current_thread_index().is_some() {
        run()
    } else {
        worker_pool().install(run)
    }
}

fn binomial_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Monte Carlo frequency of each orbit type among Haar-random `n`-tuples.
pub fn mc_census(poset: &TypePoset, n: usize, samples: u64, seed: u64, chunk_size: u64) -> Result<CensusReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let spec = poset.spec();
    let counts = parallel_tally(samples, chunk_size, seed, poset.len(), |rng, tally| {
        let tuple: Vec<GroupElement> = (0..n).map(|_| spec.haar_sample(rng)).collect();
        tally[poset.type_of(&tuple)?.id] += 1;
        Ok(())
    })?;
    let entries = poset
        .classes()
        .iter()
        .zip(&counts)
        .filter(|(_, &c)| c > 0)
        .map(|(t, &c)| {
            let p = c as f64 / samples as f64;
            CensusEntry {
                id: t.id,
                label: t.label.clone(),
                count: c,
                exact: None,
                fraction: p,
                std_error: binomial_se(p, samples),
            }
        })
        .collect();
    Ok(CensusReport {
        version: version(),
        group: spec.to_string(),
        loops: n,
        mode: "monte-carlo".into(),
        samples,
        seed: Some(seed),
        chunk_size: Some(chunk_size),
        entries,
    })
}

/// A measurable region `U ⊆ G` with known Haar mass.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// Finitely many elements of a finite group.
    Elements(Vec<GroupElement>),
    /// Angles in `[start, start + length)` on U(1).
    Arc { start: f64, length: f64 },
    Whole,
}

impl Region {
    pub fn mass(&self, spec: &GroupSpec) -> Result<f64> {
        match self {
            Region::Whole => Ok(1.0),
            Region::Elements(xs) => {
                let order = spec
                    .order()
                    .ok_or_else(|| Error::InvalidArgument("finite regions need a finite group".into()))?;
                let mut distinct: Vec<&GroupElement> = Vec::new();
                for x in xs {
                    spec.check(x)?;
                    if !distinct.contains(&x) {
                        distinct.push(x);
                    }
                }
                Ok(distinct.len() as f64 / order as f64)
            }
            Region::Arc { length, .. } => match spec {
                GroupSpec::Circle if (0.0..=TAU).contains(length) => Ok(length / TAU),
                GroupSpec::Circle => Err(Error::InvalidArgument(format!("arc length {length} outside [0, 2π]"))),
                _ => Err(Error::InvalidArgument("arcs are regions of U1".into())),
            },
        }
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        match (self, g) {
            (Region::Whole, _) => true,
            (Region::Elements(xs), _) => xs.contains(g),
            (Region::Arc { start, length }, GroupElement::Circle(a)) => (a - start).rem_euclid(TAU) < *length,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoncompleteMeasure {
    pub loops: usize,
    pub region_mass: f64,
    /// `(1 - μ(U))^k`.
    pub predicted: f64,
    pub measured: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    pub std_error: f64,
    pub samples: u64,
}

impl NoncompleteMeasure {
    pub fn exact_ratio(&self) -> Option<Ratio<u64>> {
        self.exact.as_deref().and_then(|s| s.parse().ok())
    }
}

/// Exact measure of the `k`-tuples with no entry in `region`, by enumeration.
pub fn noncomplete_measure_exact(spec: &GroupSpec, region: &Region, k: usize, budget: u128) -> Result<NoncompleteMeasure> {
    let elements = check_budget(spec, k, budget)?;
    let mass = region.mass(spec)?;
    let total = configurations(elements.len(), k) as u64;
    let outside: Vec<bool> = elements.iter().map(|g| !region.contains(g)).collect();
    let mut avoiding = 0u64;
    let mut idx = vec![0usize; k];
    loop {
        if idx.iter().all(|&i| outside[i]) {
            avoiding += 1;
        }
        let Some(p) = idx.iter().position(|&i| i + 1 < elements.len()) else { break };
        idx[p] += 1;
        idx[..p].iter_mut().for_each(|i| *i = 0);
    }
    let r = Ratio::new(avoiding, total);
    Ok(NoncompleteMeasure {
        loops: k,
        region_mass: mass,
        predicted: (1.0 - mass).powi(k as i32),
        measured: avoiding as f64 / total as f64,
        exact: Some(r.to_string()),
        std_error: 0.0,
        samples: total,
    })
}

/// Monte Carlo estimate of the same measure from Haar-random `k`-tuples.
pub fn noncomplete_measure_mc(
    spec: &GroupSpec,
    region: &Region,
    k: usize,
    samples: u64,
    seed: u64,
    chunk_size: u64,
) -> Result<NoncompleteMeasure> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let mass = region.mass(spec)?;
    let hits = parallel_tally(samples, chunk_size, seed, 1, |rng, tally| {
        let mut avoids = true;
        for _ in 0..k {
            avoids &= !region.contains(&spec.haar_sample(rng));
        }
        tally[0] += avoids as u64;
        Ok(())
    })?[0];
    let p = hits as f64 / samples as f64;
    Ok(NoncompleteMeasure {
        loops: k,
        region_mass: mass,
        predicted: (1.0 - mass).powi(k as i32),
        measured: p,
        exact: None,
        std_error: binomial_se(p, samples),
        samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratificationReport {
    pub group: String,
    pub loops: usize,
    pub checks: Vec<AxiomCheck>,
    /// `approximable[a][b]`: a point of type `b` is a limit of type-`a` points.
    pub approximable: Vec<Vec<bool>>,
}

impl StratificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn violations(&self) -> Vec<&AxiomCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

pub const PROBE_SCALES: [f64; 3] = [1e-2, 1e-4, 1e-6];
const PROBES_PER_POINT: usize = 32;
const RANDOM_PROBE_POINTS: u64 = 64;

fn check(name: &str, failures: Vec<String>, ok_detail: String) -> AxiomCheck {
    AxiomCheck {
        name: name.into(),
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            ok_detail
        } else {
            failures.into_iter().take(5).collect::<Vec<_>>().join("; ")
        },
    }
}

/// One point of `G^n` per stratum that has points, preferring the
/// canonical generators of each class.
fn stratum_witnesses(poset: &TypePoset, n: usize) -> Result<Vec<Vec<GroupElement>>> {
    let spec = poset.spec();
    let mut out = Vec::new();
    for t in poset.classes() {
        let w = crate::construct::nonempty_stratum_witness(poset, t)?;
        let gens = w.holonomy_generators()?;
        if gens.len() > n {
            continue;
        }
        let mut tuple = gens;
        tuple.resize(n, spec.identity());
        out.push(tuple);
    }
    Ok(out)
}

/// Verifies the stratification axioms for the orbit-type decomposition of
/// `G^n` recorded in `report`.
///
/// Closure is tested through the extension oracle: a tuple `x` of type `b`
/// lies in the closure of stratum `a` when `x`, read as a connection on a
/// bouquet, extends to a connection of type `a` with the bouquet untouched.
/// For finite groups every distinct centralizer contributes a witness; for
/// continuous groups one witness per stratum is used, and openness of the
/// upper sets is probed by perturbations at [`PROBE_SCALES`].
pub fn check_stratification(poset: &TypePoset, report: &CensusReport, seed: u64) -> Result<StratificationReport> {
    let spec = poset.spec();
    let n = report.loops;
    if report.group != spec.to_string() {
        return Err(Error::SpecMismatch(format!("census of {} checked against {}", report.group, spec)));
    }
    let k = poset.len();
    let mut checks = Vec::new();

    // covering and disjointness of the recorded cells
    let mut failures = Vec::new();
    let total: u64 = report.entries.iter().map(|e| e.count).sum();
    if total != report.samples {
        failures.push(format!("cells hold {total} of {} configurations", report.samples));
    }
    for (i, e) in report.entries.iter().enumerate() {
        if e.id >= k || poset.classes()[e.id].label != e.label {
            failures.push(format!("entry `{}` is not a class", e.label));
        }
        if report.entries[..i].iter().any(|f| f.id == e.id) {
            failures.push(format!("class `{}` listed twice", e.label));
        }
    }
    let fsum: f64 = report.entries.iter().map(|e| e.fraction).sum();
    if (fsum - 1.0).abs() > 1e-12 {
        failures.push(format!("fractions sum to {fsum}"));
    }
    if report.mode == "exact" {
        let sum = report
            .entries
            .iter()
            .map(|e| report.exact_fraction(e.id).unwrap_or_default())
            .fold(Ratio::from_integer(0u64), |a, b| a + b);
        if sum != Ratio::from_integer(1) {
            failures.push(format!("exact fractions sum to {sum}"));
        }
    }
    checks.push(check("cover", failures, format!("{} cells, {total} configurations", report.entries.len())));

    // each point belongs to exactly one class
    let mut failures = Vec::new();
    let points: Vec<Vec<GroupElement>> = if let Some(elements) = spec.elements() {
        let elements = if configurations(elements.len(), n) <= DEFAULT_BUDGET / 100 {
            elements
        } else {
            return Err(Error::BudgetExceeded {
                needed: configurations(elements.len(), n),
                budget: DEFAULT_BUDGET / 100,
            });
        };
        let mut pts = Vec::new();
        let mut idx = vec![0usize; n];
        loop {
            pts.push(idx.iter().map(|&i| elements[i].clone()).collect());
            let Some(p) = idx.iter().position(|&i| i + 1 < elements.len()) else { break };
            idx[p] += 1;
            idx[..p].iter_mut().for_each(|i| *i = 0);
        }
        pts
    } else {
        let mut rng = chunk_rng(seed, 0);
        let mut pts: Vec<Vec<GroupElement>> = (0..RANDOM_PROBE_POINTS)
            .map(|_| (0..n).map(|_| spec.haar_sample(&mut rng)).collect())
            .collect();
        pts.extend(stratum_witnesses(poset, n)?);
        pts
    };
    let mut witnesses: Vec<(Subgroup, Vec<GroupElement>)> = Vec::new();
    let mut tally = vec![0u64; k];
    for x in &points {
        let z = spec.centralizer(x)?;
        let matches: Vec<usize> = match spec.elements() {
            Some(elements) => (0..k)
                .filter(|&t| {
                    let rep = &poset.classes()[t].representative;
                    elements
                        .iter()
                        .any(|h| spec.conjugate_subgroup(rep, h).is_ok_and(|c| c == z))
                })
                .collect(),
            None => vec![poset.classify(&z)?],
        };
        if matches.len() != 1 {
            failures.push(format!("centralizer {} matches {} classes", spec.format_subgroup(&z), matches.len()));
        } else {
            tally[matches[0]] += 1;
        }
        if !witnesses.iter().any(|(w, _)| *w == z) {
            witnesses.push((z, x.clone()));
        }
    }
    if report.mode == "exact" && spec.is_finite() {
        for t in 0..k {
            let recorded = report.entry(t).map_or(0, |e| e.count);
            if recorded != tally[t] {
                failures.push(format!("class {t}: recorded {recorded}, recount {}", tally[t]));
            }
        }
    }
    checks.push(check("disjoint", failures, format!("{} points classified once each", points.len())));

    // closure law through the extension oracle
    let mut approximable = vec![vec![false; k]; k];
    for (z, x) in &witnesses {
        let b = poset.classify(z)?;
        let c = Connection::bouquet(spec.clone(), x.clone())?;
        let bouquet = (**c.graph()).clone();
        for a in 0..k {
            match realize_type(&c, std::slice::from_ref(&bouquet), poset, &poset.classes()[a]) {
                Ok(ext) => {
                    let ok = ext.orbit_type(poset)?.id == a && ext.restrict(&bouquet)?.approx_eq(&c);
                    approximable[a][b] |= ok;
                }
                Err(Error::TargetBelowType { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    let seen: Vec<usize> = {
        let mut s: Vec<usize> = witnesses.iter().map(|(z, _)| poset.classify(z)).collect::<Result<_>>()?;
        s.sort_unstable();
        s.dedup();
        s
    };
    let mut failures = Vec::new();
    for a in 0..k {
        for &b in &seen {
            if approximable[a][b] != poset.leq(b, a) {
                failures.push(format!(
                    "closure of `{}` {} `{}`",
                    poset.classes()[a].label,
                    if approximable[a][b] { "meets" } else { "misses" },
                    poset.classes()[b].label
                ));
            }
        }
    }
    checks.push(check("closure", failures, format!("{} witnesses against {k} strata", witnesses.len())));

    // regularity: the closure of U meets V  ⟹  the closure of V misses U
    let mut failures = Vec::new();
    for a in 0..k {
        for b in 0..k {
            if a != b && approximable[a][b] && approximable[b][a] {
                failures.push(format!(
                    "`{}` and `{}` lie in each other's closure",
                    poset.classes()[a].label,
                    poset.classes()[b].label
                ));
            }
        }
    }
    checks.push(check("regularity", failures, "antisymmetric".into()));

    // upper sets are open
    let mut failures = Vec::new();
    if spec.is_finite() {
        let elements = spec.elements().expect("finite");
        for (z, x) in &witnesses {
            let t = poset.classify(z)?;
            for g in &elements {
                let mut y = x.clone();
                y.push(g.clone());
                let s = poset.type_of(&y)?.id;
                if !poset.leq(t, s) {
                    failures.push(format!("extending a `{}` point by one loop lowers its type", poset.classes()[t].label));
                }
            }
        }
        checks.push(check("openness", failures, "one-loop extensions never lower the type".into()));
    } else {
        let mut rng = chunk_rng(seed, 1);
        let mut probes = 0usize;
        for (z, x) in &witnesses {
            let t = poset.classify(z)?;
            for &delta in &PROBE_SCALES {
                for _ in 0..PROBES_PER_POINT {
                    let y: Vec<GroupElement> = x
                        .iter()
                        .map(|g| spec.perturb(g, delta, &mut rng))
                        .collect::<Result<_>>()?;
                    let s = poset.type_of(&y)?.id;
                    probes += 1;
                    if !poset.leq(t, s) {
                        failures.push(format!(
                            "perturbing a `{}` point by {delta:e} lands in `{}`",
                            poset.classes()[t].label,
                            poset.classes()[s].label
                        ));
                    }
                }
            }
        }
        checks.push(check("openness", failures, format!("{probes} perturbation probes")));
    }

    Ok(StratificationReport {
        group: spec.to_string(),
        loops: n,
        checks,
        approximable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: u64, b: u64) -> Ratio<u64> {
        Ratio::new(a, b)
    }

    fn by_size(poset: &TypePoset, size: usize) -> usize {
        let spec = poset.spec();
        poset
            .classes()
            .iter()
            .find(|t| spec.subgroup_elements(&t.representative).unwrap().len() == size)
            .unwrap()
            .id
    }

    /// Independent count: centralizer of every tuple, matched to the class
    /// whose representative has the same order (valid for S3, where orders
    /// separate the classes).
    fn s3_oracle(n: usize) -> Vec<(usize, u64)> {
        let t = crate::group::FiniteTable::symmetric3();
        let mut counts = std::collections::BTreeMap::new();
        let total = 6usize.pow(n as u32);
        for code in 0..total {
            let tuple: Vec<usize> = (0..n).map(|i| code / 6usize.pow(i as u32) % 6).collect();
            let size = (0..6)
                .filter(|&h| tuple.iter().all(|&g| t.product(g, h) == t.product(h, g)))
                .count();
            *counts.entry(size).or_insert(0u64) += 1;
        }
        counts.into_iter().collect()
    }

    #[test]
    fn s3_single_loop_census() {
        let poset = TypePoset::enumerate(&GroupSpec::s3());
        let rep = exact_census(&poset, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(rep.exact_fraction(by_size(&poset, 6)), Some(r(1, 6)));
        assert_eq!(rep.exact_fraction(by_size(&poset, 3)), Some(r(2, 6)));
        assert_eq!(rep.exact_fraction(by_size(&poset, 2)), Some(r(3, 6)));
        assert_eq!(rep.exact_fraction(by_size(&poset, 1)), Some(r(0, 1)));
    }

    #[test]
    fn s3_census_matches_enumeration_oracle() {
        let poset = TypePoset::enumerate(&GroupSpec::s3());
        for n in 0..=3 {
            let rep = exact_census(&poset, n, DEFAULT_BUDGET).unwrap();
            let total = 6u64.pow(n as u32);
            for (size, count) in s3_oracle(n) {
                assert_eq!(rep.exact_fraction(by_size(&poset, size)), Some(r(count, total)), "n={n}");
            }
        }
    }

    #[test]
    fn trivial_census_cases() {
        for spec in [GroupSpec::s3(), GroupSpec::q8(), GroupSpec::cyclic(4).unwrap()] {
            let poset = TypePoset::enumerate(&spec);
            let rep = exact_census(&poset, 0, DEFAULT_BUDGET).unwrap();
            assert_eq!(rep.entries.len(), 1);
            assert_eq!(rep.exact_fraction(poset.t_min().id), Some(r(1, 1)));
        }
        let poset = TypePoset::enumerate(&GroupSpec::cyclic(4).unwrap());
        let rep = exact_census(&poset, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(rep.entries.len(), 1);
        assert_eq!(rep.entries[0].exact.as_deref(), Some("1"));
    }

    #[test]
    fn budget_is_enforced() {
        let poset = TypePoset::enumerate(&GroupSpec::s3());
        assert!(matches!(exact_census(&poset, 10, DEFAULT_BUDGET), Err(Error::BudgetExceeded { .. })));
        assert!(exact_census(&poset, 3, 216).is_ok());
        assert!(exact_census(&poset, 3, 215).is_err());
    }

    #[test]
    fn generic_fraction_strictly_increases_for_s3() {
        let poset = TypePoset::enumerate(&GroupSpec::s3());
        let lower: Vec<Ratio<u64>> = (1..=3)
            .map(|n| {
                let rep = exact_census(&poset, n, DEFAULT_BUDGET).unwrap();
                r(1, 1) - rep.exact_fraction(poset.t_max().id).unwrap()
            })
            .collect();
        assert!(lower[0] > lower[1] && lower[1] > lower[2]);
    }

    #[test]
    fn mc_census_examples() {
        let su2 = TypePoset::enumerate(&GroupSpec::Su2);
        let one = mc_census(&su2, 1, 10_000, 5, DEFAULT_CHUNK).unwrap();
        assert_eq!(one.fraction(1), 1.0);
        let two = mc_census(&su2, 2, 10_000, 5, DEFAULT_CHUNK).unwrap();
        assert_eq!(two.fraction(su2.t_max().id), 1.0);

        let s3 = TypePoset::enumerate(&GroupSpec::s3());
        let exact = exact_census(&s3, 1, DEFAULT_BUDGET).unwrap();
        let mc = mc_census(&s3, 1, 100_000, 11, DEFAULT_CHUNK).unwrap();
        for e in &exact.entries {
            let m = mc.entry(e.id).unwrap();
            let sigma = binomial_se(e.fraction, mc.samples);
            assert!((m.fraction - e.fraction).abs() <= 3.0 * sigma);
        }
        let total: f64 = mc.entries.iter().map(|e| e.fraction).sum();
        assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn mc_census_is_independent_of_worker_count() {
        let poset = TypePoset::enumerate(&GroupSpec::Su2);
        let a = mc_census(&poset, 1, 3000, 9, 256).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| mc_census(&poset, 1, 3000, 9, 256).unwrap());
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn noncomplete_examples() {
        let z4 = GroupSpec::cyclic(4).unwrap();
        let m = noncomplete_measure_exact(&z4, &Region::Elements(vec![GroupElement::Finite(1)]), 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(m.exact_ratio(), Some(r(9, 16)));
        assert_eq!(m.predicted, 0.5625);
        for k in 0..4 {
            let m = noncomplete_measure_exact(&z4, &Region::Whole, k, DEFAULT_BUDGET).unwrap();
            assert_eq!(m.measured, m.predicted);
        }
        let s3 = GroupSpec::s3();
        let u = Region::Elements(vec![GroupElement::Finite(1), GroupElement::Finite(4)]);
        for k in 1..=3 {
            let m = noncomplete_measure_exact(&s3, &u, k, DEFAULT_BUDGET).unwrap();
            assert_eq!(m.exact_ratio(), Some(r(4u64.pow(k as u32), 6u64.pow(k as u32))));
        }

        let arc = Region::Arc { start: 1.0, length: std::f64::consts::PI };
        let m = noncomplete_measure_mc(&GroupSpec::Circle, &arc, 3, 100_000, 3, DEFAULT_CHUNK).unwrap();
        let sigma = binomial_se(0.125, 100_000);
        assert!((m.measured - 0.125).abs() <= 3.0 * sigma);
        let whole = noncomplete_measure_mc(&GroupSpec::Su2, &Region::Whole, 2, 1000, 3, DEFAULT_CHUNK).unwrap();
        assert_eq!(whole.measured, 0.0);
    }

    #[test]
    fn stratification_axioms_hold() {
        for n in 1..=3 {
            let poset = TypePoset::enumerate(&GroupSpec::s3());
            let rep = exact_census(&poset, n, DEFAULT_BUDGET).unwrap();
            let s = check_stratification(&poset, &rep, 1).unwrap();
            assert!(s.passed(), "{:?}", s.violations());
        }
        let poset = TypePoset::enumerate(&GroupSpec::Su2);
        let rep = mc_census(&poset, 2, 2000, 4, DEFAULT_CHUNK).unwrap();
        let s = check_stratification(&poset, &rep, 4).unwrap();
        assert!(s.passed(), "{:?}", s.violations());
        assert!(s.approximable[2][0] && s.approximable[2][1] && !s.approximable[0][2]);

        let poset = TypePoset::enumerate(&GroupSpec::Circle);
        let rep = mc_census(&poset, 2, 100, 4, DEFAULT_CHUNK).unwrap();
        assert!(check_stratification(&poset, &rep, 4).unwrap().passed());
    }

    #[test]
    fn tampered_reports_are_flagged() {
        let poset = TypePoset::enumerate(&GroupSpec::s3());
        let mut rep = exact_census(&poset, 2, DEFAULT_BUDGET).unwrap();
        rep.entries[0].count += 1;
        let s = check_stratification(&poset, &rep, 1).unwrap();
        assert!(!s.passed());
    }
}
