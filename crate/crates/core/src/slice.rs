//! Nearest-point retraction onto a conjugation orbit in `G^n`.
//!
//! The orbit of `ĝ` is `{ĝ∘g = (g⁻¹ĝ_1 g, …, g⁻¹ĝ_n g)}`. Tuples are compared
//! with the root-sum-of-squares of the bi-invariant element distance, so the
//! nearest orbit point moves covariantly with simultaneous conjugation. The
//! slice through `ĝ` is the set of tuples whose nearest orbit point is `ĝ`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::census::{chunk_rng, AxiomCheck, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupSpec, Quat, Su2Subgroup, Subgroup};
use crate::howe::TypePoset;

/// Points closer than this are the same orbit point.
pub const POINT_TOL: f64 = 1e-8;
/// Equivariance residual bound for continuous groups.
pub const EQUIVARIANCE_TOL: f64 = 1e-6;
/// Pattern-search step at which refinement stops.
pub const STEP_TOL: f64 = 1e-10;
const MAX_EVALUATIONS: usize = 2_000_000;
const TRUST_SAMPLES: usize = 32;
const OPENNESS_PROBES: usize = 64;
const TRUST_SEED: u64 = 0x005e_ed0f_0b17;

#[derive(Debug, Clone)]
pub struct OrbitPoint {
    spec: GroupSpec,
    base: Vec<GroupElement>,
    stabilizer: Subgroup,
    trust_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub point: Vec<GroupElement>,
    pub conjugator: GroupElement,
    pub distance: f64,
}

pub fn conjugate_tuple(spec: &GroupSpec, x: &[GroupElement], h: &GroupElement) -> Result<Vec<GroupElement>> {
    x.iter().map(|g| spec.conjugate(g, h)).collect()
}

pub fn tuple_distance(spec: &GroupSpec, a: &[GroupElement], b: &[GroupElement]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!("tuples of length {} and {}", a.len(), b.len())));
    }
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = spec.distance(x, y)?;
        sum += d * d;
    }
    Ok(sum.sqrt())
}

fn split_factors(n_factors: usize, x: &[GroupElement]) -> Result<Vec<Vec<GroupElement>>> {
    let mut out = vec![Vec::with_capacity(x.len()); n_factors];
    for g in x {
        match g {
            GroupElement::Product(parts) if parts.len() == n_factors => {
                for (slot, p) in out.iter_mut().zip(parts) {
                    slot.push(p.clone());
                }
            }
            _ => return Err(Error::SpecMismatch(format!("{g:?} is not a product element"))),
        }
    }
    Ok(out)
}

fn join_factors(parts: Vec<Vec<GroupElement>>, n: usize) -> Vec<GroupElement> {
    (0..n)
        .map(|i| GroupElement::Product(parts.iter().map(|p| p[i].clone()).collect()))
        .collect()
}

fn quats(x: &[GroupElement]) -> Result<Vec<Quat>> {
    x.iter()
        .map(|g| match g {
            GroupElement::Su2(q) => Ok(*q),
            _ => Err(Error::SpecMismatch(format!("{g:?} is not in SU2"))),
        })
        .collect()
}

/// Minimum nonzero distance between the given orbit points, over four.
fn quarter_gap(spec: &GroupSpec, points: &[Vec<GroupElement>]) -> Result<f64> {
    let mut gap = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[..i] {
            let d = tuple_distance(spec, a, b)?;
            if d > POINT_TOL {
                gap = gap.min(d);
            }
        }
    }
    Ok(gap / 4.0)
}

fn trust_radius(spec: &GroupSpec, base: &[GroupElement]) -> Result<f64> {
    match spec {
        GroupSpec::Finite(_) => {
            let mut orbit: Vec<Vec<GroupElement>> = Vec::new();
            for h in spec.elements().expect("finite") {
                let p = conjugate_tuple(spec, base, &h)?;
                if !orbit.contains(&p) {
                    orbit.push(p);
                }
            }
            quarter_gap(spec, &orbit)
        }
        GroupSpec::Circle => Ok(f64::INFINITY),
        GroupSpec::Su2 => {
            let mut rng = ChaCha8Rng::seed_from_u64(TRUST_SEED);
            let mut orbit = vec![base.to_vec()];
            for _ in 1..TRUST_SAMPLES {
                let h = spec.haar_sample(&mut rng);
                orbit.push(conjugate_tuple(spec, base, &h)?);
            }
            quarter_gap(spec, &orbit)
        }
        GroupSpec::Product(fs) => {
            let parts = split_factors(fs.len(), base)?;
            let mut r = f64::INFINITY;
            for (f, p) in fs.iter().zip(&parts) {
                r = r.min(trust_radius(f, p)?);
            }
            Ok(r)
        }
    }
}

/// Result of the unchecked minimization in one factor.
struct FactorMin {
    point: Vec<GroupElement>,
    conjugator: GroupElement,
    value: f64,
    ambiguous: bool,
}

const SU2_STARTS: [[f64; 4]; 8] = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [0.5, 0.5, 0.5, 0.5],
    [0.5, 0.5, -0.5, -0.5],
    [0.5, -0.5, 0.5, -0.5],
    [0.5, -0.5, -0.5, 0.5],
];

fn su2_objective(base: &[Quat], x: &[Quat], g: Quat) -> f64 {
    let gi = g.conj();
    base.iter()
        .zip(x)
        .map(|(b, t)| {
            let d = (gi * *b * g).geodesic(*t);
            d * d
        })
        .sum()
}

/// Coordinate pattern search over right translations `g ← g·exp(±s e_k)`.
fn pattern_search(base: &[Quat], x: &[Quat], start: Quat) -> Result<(Quat, f64)> {
    let mut g = start;
    let mut best = su2_objective(base, x, g);
    let mut evals = 1usize;
    let mut step = 0.5;
    while step >= STEP_TOL {
        let mut improved = false;
        for k in 0..3 {
            for sign in [1.0, -1.0] {
                let mut v = [0.0; 3];
                v[k] = sign * step;
                let cand = g * Quat::exp(v);
                let val = su2_objective(base, x, cand);
                evals += 1;
                if val < best {
                    g = cand;
                    best = val;
                    improved = true;
                }
            }
        }
        if evals > MAX_EVALUATIONS {
            return Err(Error::NotConverged(evals));
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((g, best))
}

fn minimize(spec: &GroupSpec, base: &[GroupElement], x: &[GroupElement]) -> Result<FactorMin> {
    match spec {
        GroupSpec::Finite(_) => {
            let mut best: Option<FactorMin> = None;
            let mut rivals: Vec<Vec<GroupElement>> = Vec::new();
            for h in spec.elements().expect("finite") {
                let p = conjugate_tuple(spec, base, &h)?;
                let d = tuple_distance(spec, &p, x)?;
                let v = d * d;
                match &best {
                    Some(b) if v > b.value => {}
                    Some(b) if v == b.value => {
                        if p != b.point && !rivals.contains(&p) {
                            rivals.push(p);
                        }
                    }
                    _ => {
                        rivals.clear();
                        best = Some(FactorMin {
                            point: p,
                            conjugator: h,
                            value: v,
                            ambiguous: false,
                        });
                    }
                }
            }
            let mut b = best.expect("nonempty group");
            b.ambiguous = !rivals.is_empty();
            Ok(b)
        }
        GroupSpec::Circle => Ok(FactorMin {
            point: base.to_vec(),
            conjugator: spec.identity(),
            value: tuple_distance(spec, base, x)?.powi(2),
            ambiguous: false,
        }),
        GroupSpec::Su2 => {
            let b = quats(base)?;
            let t = quats(x)?;
            if b.iter().all(|q| q.vector_norm() <= crate::group::TAU_EQ) {
                return Ok(FactorMin {
                    point: base.to_vec(),
                    conjugator: spec.identity(),
                    value: tuple_distance(spec, base, x)?.powi(2),
                    ambiguous: false,
                });
            }
            let mut minima: Vec<(Quat, f64)> = Vec::with_capacity(SU2_STARTS.len());
            for s in SU2_STARTS {
                minima.push(pattern_search(&b, &t, Quat::from_array(s).renormalized())?);
            }
            let (g, value) = minima
                .iter()
                .copied()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("eight starts");
            let point: Vec<GroupElement> = conjugate_tuple(spec, base, &GroupElement::Su2(g))?;
            let tie = 1e-12 + 1e-9 * value;
            let mut ambiguous = false;
            for &(h, v) in &minima {
                if v - value <= tie {
                    let other = conjugate_tuple(spec, base, &GroupElement::Su2(h))?;
                    if tuple_distance(spec, &other, &point)? > 1e-6 {
                        ambiguous = true;
                    }
                }
            }
            Ok(FactorMin {
                point,
                conjugator: GroupElement::Su2(g),
                value,
                ambiguous,
            })
        }
        GroupSpec::Product(fs) => {
            let bs = split_factors(fs.len(), base)?;
            let xs = split_factors(fs.len(), x)?;
            let mut points = Vec::with_capacity(fs.len());
            let mut conj = Vec::with_capacity(fs.len());
            let mut value = 0.0;
            let mut ambiguous = false;
            for (f, (b, t)) in fs.iter().zip(bs.iter().zip(&xs)) {
                let m = minimize(f, b, t)?;
                points.push(m.point);
                conj.push(m.conjugator);
                value += m.value;
                ambiguous |= m.ambiguous;
            }
            Ok(FactorMin {
                point: join_factors(points, base.len()),
                conjugator: GroupElement::Product(conj),
                value,
                ambiguous,
            })
        }
    }
}

impl OrbitPoint {
    pub fn new(spec: GroupSpec, base: Vec<GroupElement>) -> Result<Self> {
        base.iter().try_for_each(|g| spec.check(g))?;
        let stabilizer = spec.centralizer(&base)?;
        let trust_radius = trust_radius(&spec, &base)?;
        Ok(OrbitPoint {
            spec,
            base,
            stabilizer,
            trust_radius,
        })
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn base(&self) -> &[GroupElement] {
        &self.base
    }

    /// `Z({ĝ_1..ĝ_n})`, the isotropy group of `ĝ`.
    pub fn stabilizer(&self) -> &Subgroup {
        &self.stabilizer
    }

    pub fn trust_radius(&self) -> f64 {
        self.trust_radius
    }

    pub fn orbit_point(&self, g: &GroupElement) -> Result<Vec<GroupElement>> {
        conjugate_tuple(&self.spec, &self.base, g)
    }

    /// Nearest orbit point to `x` and a conjugator reaching it.
    pub fn project(&self, x: &[GroupElement]) -> Result<Projection> {
        if x.len() != self.base.len() {
            return Err(Error::InvalidArgument(format!(
                "tuple of length {} for an orbit in G^{}",
                x.len(),
                self.base.len()
            )));
        }
        x.iter().try_for_each(|g| self.spec.check(g))?;
        let m = minimize(&self.spec, &self.base, x)?;
        let distance = m.value.sqrt();
        if distance > self.trust_radius {
            return Err(Error::TrustRegionExceeded {
                distance,
                radius: self.trust_radius,
            });
        }
        if m.ambiguous {
            return Err(Error::AmbiguousProjection);
        }
        Ok(Projection {
            point: m.point,
            conjugator: m.conjugator,
            distance,
        })
    }

    pub fn same_point(&self, a: &[GroupElement], b: &[GroupElement]) -> Result<bool> {
        if self.spec.is_finite() {
            Ok(a == b)
        } else {
            Ok(tuple_distance(&self.spec, a, b)? <= POINT_TOL)
        }
    }

    /// Whether `x` lies in the slice: its projection is `ĝ` itself.
    pub fn slice_membership(&self, x: &[GroupElement]) -> Result<bool> {
        let p = self.project(x)?;
        self.same_point(&p.point, &self.base)
    }
}

pub fn orbit_project(base: &OrbitPoint, x: &[GroupElement]) -> Result<Projection> {
    base.project(x)
}

pub fn slice_membership(base: &OrbitPoint, x: &[GroupElement]) -> Result<bool> {
    base.slice_membership(x)
}

#[derive(Debug, Clone, Serialize)]
pub struct SliceReport {
    pub version: String,
    pub group: String,
    pub base: Vec<Value>,
    pub mode: String,
    pub trials: u64,
    pub noise: f64,
    pub seed: u64,
    pub trust_radius: Option<f64>,
    /// Points tested that fell inside the trust region.
    pub in_domain: u64,
    pub in_slice: u64,
    pub max_residual: f64,
    pub openness_radius: Option<f64>,
    pub checks: Vec<AxiomCheck>,
}

impl SliceReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn finite_or_none(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Default)]
struct Tally {
    in_domain: u64,
    in_slice: u64,
    residual: f64,
    failures: [Vec<String>; 4],
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.in_domain += other.in_domain;
        self.in_slice += other.in_slice;
        self.residual = self.residual.max(other.residual);
        for (a, b) in self.failures.iter_mut().zip(other.failures) {
            a.extend(b);
        }
        self
    }
}

const RETRACTION: usize = 0;
const EQUIVARIANCE: usize = 1;
const MONOTONE: usize = 2;
const PREIMAGE: usize = 3;

/// Runs the four pointwise checks for one sample `x` and conjugator `h`.
fn check_point(base: &OrbitPoint, poset: &TypePoset, x: &[GroupElement], h: &GroupElement, tally: &mut Tally) -> Result<()> {
    let spec = &base.spec;
    let p = match base.project(x) {
        Ok(p) => p,
        Err(Error::TrustRegionExceeded { .. }) => {
            // the trust region is conjugation invariant
            let xh = conjugate_tuple(spec, x, h)?;
            if base.project(&xh).is_ok() {
                tally.failures[EQUIVARIANCE].push("trust region is not conjugation invariant".into());
            }
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    tally.in_domain += 1;
    let fx = &p.point;

    let ffx = base.project(fx)?;
    let r = tuple_distance(spec, &ffx.point, fx)?;
    tally.residual = tally.residual.max(r);
    if !base.same_point(&ffx.point, fx)? {
        tally.failures[RETRACTION].push(format!("f(f(x)) moved by {r:.3e}"));
    }

    let xh = conjugate_tuple(spec, x, h)?;
    let fxh = base.project(&xh)?.point;
    let fx_h = conjugate_tuple(spec, fx, h)?;
    let r = tuple_distance(spec, &fxh, &fx_h)?;
    tally.residual = tally.residual.max(r);
    let ok = if spec.is_finite() { fxh == fx_h } else { r < EQUIVARIANCE_TOL };
    if !ok {
        tally.failures[EQUIVARIANCE].push(format!("f(x∘h) and f(x)∘h differ by {r:.3e}"));
    }

    let zx = spec.centralizer(x)?;
    let zf = spec.centralizer(fx)?;
    let tx = poset.classify(&zx)?;
    let tf = poset.classify(&zf)?;
    if !spec.subgroup_contains(&zf, &zx)? || !poset.leq(tf, tx) {
        tally.failures[MONOTONE].push(format!(
            "Z(x) = {} is not inside Z(f(x)) = {}",
            spec.format_subgroup(&zx),
            spec.format_subgroup(&zf)
        ));
    }

    // x∘g*⁻¹ lies in the slice, and membership matches the projection
    let back = conjugate_tuple(spec, x, &spec.inverse(&p.conjugator)?)?;
    if !base.slice_membership(&back)? {
        tally.failures[PREIMAGE].push("x∘g*⁻¹ is not in the slice".into());
    }
    let member = base.same_point(fx, &base.base)?;
    if member {
        tally.in_slice += 1;
    }
    if base.slice_membership(x)? != member {
        tally.failures[PREIMAGE].push("slice membership disagrees with the projection".into());
    }
    Ok(())
}

/// Distance from `ĝ` to the nearest tuple whose type is not at least
/// `type(ĝ)`. Infinite when no such tuple exists.
fn openness_radius(base: &OrbitPoint) -> Result<f64> {
    lower_stratum_distance(&base.spec, &base.stabilizer, &base.base)
}

fn lower_stratum_distance(spec: &GroupSpec, stabilizer: &Subgroup, x: &[GroupElement]) -> Result<f64> {
    match (spec, stabilizer) {
        (GroupSpec::Finite(_), _) => finite_lower_distance(spec, stabilizer, x),
        (GroupSpec::Circle, _) | (GroupSpec::Su2, Subgroup::Su2(Su2Subgroup::Full)) => Ok(f64::INFINITY),
        (GroupSpec::Su2, Subgroup::Su2(Su2Subgroup::Torus(_))) => {
            let qs = su2_entries(x)?;
            Ok(qs
                .iter()
                .map(|q| q.geodesic(Quat::ONE).min(q.geodesic(-Quat::ONE)).powi(2))
                .sum::<f64>()
                .sqrt())
        }
        (GroupSpec::Su2, Subgroup::Su2(Su2Subgroup::Center)) => Ok(common_torus_distance(&su2_entries(x)?)),
        (GroupSpec::Product(fs), Subgroup::Product(ds)) if fs.len() == ds.len() => {
            let mut best = f64::INFINITY;
            for (i, (f, d)) in fs.iter().zip(ds).enumerate() {
                let part = x
                    .iter()
                    .map(|g| match g {
                        GroupElement::Product(gs) if gs.len() == fs.len() => Ok(gs[i].clone()),
                        _ => Err(Error::SpecMismatch(format!("{g:?} is not an element of {spec}"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                best = best.min(lower_stratum_distance(f, d, &part)?);
            }
            Ok(best)
        }
        _ => Err(Error::SpecMismatch(format!("stabilizer {stabilizer:?} does not belong to {spec}"))),
    }
}

/// Random tuples strictly inside the radius, checked to keep type at least
/// `type(ĝ)`. Returns how many were tested and how many failed.
fn probe_openness(base: &OrbitPoint, poset: &TypePoset, radius: f64, seed: u64) -> Result<(u64, u64)> {
    let spec = &base.spec;
    let t = poset.classify(&base.stabilizer)?;
    let reach = radius.min(std::f64::consts::PI) / (3.0 * base.base.len().max(1) as f64).sqrt();
    let mut rng = chunk_rng(seed, u64::MAX - 1);
    let (mut probed, mut escaped) = (0, 0);
    for scale in [0.9, 0.5, 0.1, 1e-3] {
        for _ in 0..OPENNESS_PROBES {
            let y = base
                .base
                .iter()
                .map(|g| spec.perturb(g, scale * reach, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            if tuple_distance(spec, &y, &base.base)? < radius {
                probed += 1;
                if !poset.leq(t, poset.type_of(&y)?.id) {
                    escaped += 1;
                }
            }
        }
    }
    Ok((probed, escaped))
}

fn finite_lower_distance(spec: &GroupSpec, stabilizer: &Subgroup, x: &[GroupElement]) -> Result<f64> {
    let poset = TypePoset::enumerate(spec);
    let t = poset.classify(stabilizer)?;
    let elements = spec.elements().unwrap_or_default();
    let n = x.len();
    let needed = (0..n).fold(1u128, |a, _| a.saturating_mul(elements.len() as u128));
    if needed > DEFAULT_BUDGET {
        return Err(Error::BudgetExceeded { needed, budget: DEFAULT_BUDGET });
    }
    let mut radius = f64::INFINITY;
    let mut idx = vec![0usize; n];
    loop {
        let y: Vec<GroupElement> = idx.iter().map(|&i| elements[i].clone()).collect();
        if !poset.leq(t, poset.type_of(&y)?.id) {
            radius = radius.min(tuple_distance(spec, &y, x)?);
        }
        let Some(p) = idx.iter().position(|&i| i + 1 < elements.len()) else { break };
        idx[p] += 1;
        idx[..p].iter_mut().for_each(|i| *i = 0);
    }
    Ok(radius)
}

fn su2_entries(x: &[GroupElement]) -> Result<Vec<Quat>> {
    x.iter()
        .map(|g| match g {
            GroupElement::Su2(q) => Ok(*q),
            _ => Err(Error::SpecMismatch(format!("{g:?} is not an element of SU2"))),
        })
        .collect()
}

/// Angle from `q` to the maximal torus through the unit axis `n`.
fn torus_gap(q: Quat, n: [f64; 3]) -> f64 {
    let v = q.vector();
    let along = v[0] * n[0] + v[1] * n[1] + v[2] * n[2];
    (q.w * q.w + along * along).sqrt().min(1.0).acos()
}

fn axis(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// Distance from a tuple to the set of tuples lying in one maximal torus:
/// a grid over the axis sphere followed by a pattern search in `(θ, φ)`.
fn common_torus_distance(qs: &[Quat]) -> f64 {
    let cost = |theta: f64, phi: f64| {
        let n = axis(theta, phi);
        qs.iter().map(|&q| torus_gap(q, n).powi(2)).sum::<f64>()
    };
    let pi = std::f64::consts::PI;
    let grid = 64;
    let mut starts: Vec<(f64, f64, f64)> = (0..=grid)
        .flat_map(|a| (0..2 * grid).map(move |b| (pi * a as f64 / grid as f64, pi * b as f64 / grid as f64)))
        .map(|(t, p)| (cost(t, p), t, p))
        .collect();
    starts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = f64::INFINITY;
    for &(mut c, mut t, mut p) in starts.iter().take(4) {
        let mut step = pi / grid as f64;
        while step > STEP_TOL {
            let mut moved = false;
            for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                let trial = cost(t + dt, p + dp);
                if trial < c {
                    (c, t, p, moved) = (trial, t + dt, p + dp, true);
                    break;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        best = best.min(c);
    }
    best.sqrt()
}

/// Checks retraction, equivariance, stabilizer monotonicity and the slice
/// preimage property, then estimates the openness radius at `ĝ`.
///
/// Finite groups are checked exhaustively over all of `G^n` and every
/// conjugator. Continuous groups use `trials` points `(ĝ∘g)` perturbed by
/// `noise`, each with its own random conjugator `h`.
pub fn verify_slice_properties(base: &OrbitPoint, trials: u64, noise: f64, seed: u64) -> Result<SliceReport> {
    let spec = &base.spec;
    let poset = TypePoset::enumerate(spec);
    let n = base.base.len();

    let mut tally = Tally::default();
    // orbit points are fixed
    let mut probe_rng = chunk_rng(seed, u64::MAX / 2);
    let conjugators: Vec<GroupElement> = match spec.elements() {
        Some(e) => e,
        None => (0..8).map(|_| spec.haar_sample(&mut probe_rng)).collect(),
    };
    for g in &conjugators {
        let y = base.orbit_point(g)?;
        let fy = base.project(&y)?;
        let r = tuple_distance(spec, &fy.point, &y)?;
        tally.residual = tally.residual.max(r);
        if !base.same_point(&fy.point, &y)? {
            tally.failures[RETRACTION].push(format!("orbit point moved by {r:.3e}"));
        }
    }

    let (mode, tested) = if let Some(elements) = spec.elements() {
        let needed = (0..n).fold(1u128, |a, _| a.saturating_mul(elements.len() as u128));
        if needed > DEFAULT_BUDGET / 100 {
            return Err(Error::BudgetExceeded {
                needed,
                budget: DEFAULT_BUDGET / 100,
            });
        }
        let mut points = Vec::new();
        let mut idx = vec![0usize; n];
        loop {
            points.push(idx.iter().map(|&i| elements[i].clone()).collect::<Vec<_>>());
            let Some(p) = idx.iter().position(|&i| i + 1 < elements.len()) else { break };
            idx[p] += 1;
            idx[..p].iter_mut().for_each(|i| *i = 0);
        }
        let count = points.len() as u64;
        let t = points
            .par_iter()
            .map(|x| {
                let mut t = Tally::default();
                for h in &elements {
                    check_point(base, &poset, x, h, &mut t)?;
                }
                // each point was counted once per conjugator
                t.in_domain /= elements.len() as u64;
                t.in_slice /= elements.len() as u64;
                Ok(t)
            })
            .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
        tally = tally.merge(t);
        ("exhaustive", count)
    } else {
        let t = (0..trials)
            .into_par_iter()
            .map(|k| {
                let mut rng = chunk_rng(seed, k);
                let g = spec.haar_sample(&mut rng);
                let x: Vec<GroupElement> = base
                    .orbit_point(&g)?
                    .iter()
                    .map(|y| spec.perturb(y, noise, &mut rng))
                    .collect::<Result<_>>()?;
                let h = spec.haar_sample(&mut rng);
                let mut t = Tally::default();
                check_point(base, &poset, &x, &h, &mut t)?;
                Ok(t)
            })
            .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
        tally = tally.merge(t);
        ("sampled", trials)
    };

    let radius = openness_radius(base)?;
    let (probed, escaped) = if spec.is_finite() { (0, 0) } else { probe_openness(base, &poset, radius, seed)? };
    let names = ["retraction", "equivariance", "stabilizer-monotone", "slice-preimage"];
    let mut checks: Vec<AxiomCheck> = names
        .iter()
        .zip(std::mem::take(&mut tally.failures))
        .map(|(name, f)| AxiomCheck {
            name: name.to_string(),
            passed: f.is_empty(),
            detail: if f.is_empty() {
                format!("{} points in the trust region", tally.in_domain)
            } else {
                format!("{} failures, first: {}", f.len(), f[0])
            },
        })
        .collect();
    checks.push(AxiomCheck {
        name: "openness".into(),
        passed: radius > 0.0 && escaped == 0,
        detail: format!("types stay >= type(ĝ) within radius {radius}; {escaped} of {probed} probes inside it fell lower"),
    });

    Ok(SliceReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        group: spec.to_string(),
        base: base.base.iter().map(|g| spec.element_to_json(g)).collect(),
        mode: mode.into(),
        trials: tested,
        noise,
        seed,
        trust_radius: finite_or_none(base.trust_radius),
        in_domain: tally.in_domain,
        in_slice: tally.in_slice,
        max_residual: tally.residual,
        openness_radius: finite_or_none(radius),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    use crate::connection::Connection;
    use crate::path::Graph;

    fn su2(q: Quat) -> GroupElement {
        GroupElement::Su2(q)
    }

    fn ij() -> OrbitPoint {
        OrbitPoint::new(GroupSpec::Su2, vec![su2(Quat::I), su2(Quat::J)]).unwrap()
    }

    fn s3(n: &str) -> GroupElement {
        GroupElement::Finite(crate::group::FiniteTable::symmetric3().index_of(n).unwrap())
    }

    #[test]
    fn orbit_points_are_fixed() {
        let base = ij();
        let p = base.project(base.base()).unwrap();
        assert!(base.same_point(&p.point, base.base()).unwrap());
        assert!(base.spec().subgroup_has(base.stabilizer(), &p.conjugator).unwrap());

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let g = base.spec().haar_sample(&mut rng);
            let y = base.orbit_point(&g).unwrap();
            let p = base.project(&y).unwrap();
            assert!(tuple_distance(base.spec(), &p.point, &y).unwrap() < POINT_TOL);
            let reached = base.orbit_point(&p.conjugator).unwrap();
            assert!(tuple_distance(base.spec(), &reached, &y).unwrap() < POINT_TOL);
        }

        let s = OrbitPoint::new(GroupSpec::s3(), vec![s3("(12)"), s3("(123)")]).unwrap();
        assert_eq!(s.trust_radius(), 0.25);
        let y = s.orbit_point(&s3("(13)")).unwrap();
        assert_eq!(s.project(&y).unwrap().point, y);
        assert!(!s.slice_membership(&y).unwrap());
        assert!(s.slice_membership(s.base()).unwrap());
        assert!(matches!(
            s.project(&[s3("e"), s3("e")]),
            Err(Error::TrustRegionExceeded { .. })
        ));
    }

    #[test]
    fn normal_perturbations_project_back() {
        let base = ij();
        let spec = GroupSpec::Su2;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for eps in [1e-3, 1e-2] {
            // both directions are orthogonal to the orbit at (i, j)
            let along_one = vec![su2(Quat::new(eps, 1.0, 0.0, 0.0).renormalized()), su2(Quat::J)];
            let swap = vec![
                su2(Quat::new(0.0, 1.0, eps, 0.0).renormalized()),
                su2(Quat::new(0.0, eps, 1.0, 0.0).renormalized()),
            ];
            for x in [along_one, swap] {
                assert!(base.slice_membership(&x).unwrap());
                let g = spec.haar_sample(&mut rng);
                let xg = conjugate_tuple(&spec, &x, &g).unwrap();
                let p = base.project(&xg).unwrap();
                let target = base.orbit_point(&g).unwrap();
                assert!(tuple_distance(&spec, &p.point, &target).unwrap() < 1e-8);
            }
        }
        let tangent_moved = base.orbit_point(&su2(Quat::exp([0.3, 0.0, 0.0]))).unwrap();
        assert!(!base.slice_membership(&tangent_moved).unwrap());
    }

    /// Independent minimizer: best of 20000 Haar conjugators, refined by a
    /// shrinking random-direction search.
    fn grid_oracle(base: &[Quat], x: &[Quat]) -> Vec<Quat> {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let f = |g: Quat| -> f64 {
            base.iter()
                .zip(x)
                .map(|(b, t)| {
                    let y = g.conj() * *b * g;
                    // chord length is monotone in the geodesic; square the angle for the objective
                    let d = 2.0 * ((y.to_array().iter().zip(t.to_array()).map(|(a, c)| (a - c).powi(2)).sum::<f64>()).sqrt() / 2.0).asin();
                    d * d
                })
                .sum()
        };
        let mut best = Quat::ONE;
        let mut bv = f(best);
        for _ in 0..20_000 {
            let g = Quat::haar(&mut rng);
            let v = f(g);
            if v < bv {
                best = g;
                bv = v;
            }
        }
        let mut r = 0.1;
        while r > 1e-12 {
            let mut improved = false;
            for _ in 0..40 {
                let v: [f64; 3] = [
                    rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng),
                    rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng),
                    rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng),
                ];
                let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                let cand = best * Quat::exp([r * v[0] / norm, r * v[1] / norm, r * v[2] / norm]);
                let cv = f(cand);
                if cv < bv {
                    best = cand;
                    bv = cv;
                    improved = true;
                }
            }
            if !improved {
                r *= 0.5;
            }
        }
        base.iter().map(|b| best.conj() * *b * best).collect()
    }

    #[test]
    fn projection_matches_grid_oracle() {
        let base = ij();
        let spec = GroupSpec::Su2;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..4 {
            let g = spec.haar_sample(&mut rng);
            let x: Vec<GroupElement> = base
                .orbit_point(&g)
                .unwrap()
                .iter()
                .map(|y| spec.perturb(y, 1e-3, &mut rng).unwrap())
                .collect();
            let p = base.project(&x).unwrap();
            let oracle: Vec<GroupElement> = grid_oracle(&[Quat::I, Quat::J], &quats(&x).unwrap())
                .into_iter()
                .map(su2)
                .collect();
            assert!(tuple_distance(&spec, &p.point, &oracle).unwrap() < 1e-8);
            let target = base.orbit_point(&g).unwrap();
            assert!(p.distance <= tuple_distance(&spec, &x, &target).unwrap() + 1e-12);
        }
    }

    #[test]
    fn su2_openness_radius_closed_forms() {
        let pi = std::f64::consts::PI;
        let r = openness_radius(&ij()).unwrap();
        assert!((r - pi * 2f64.sqrt() / 4.0).abs() < 1e-9, "{r}");
        let torus = OrbitPoint::new(GroupSpec::Su2, vec![su2(Quat::I), su2(Quat::I)]).unwrap();
        assert!((openness_radius(&torus).unwrap() - pi / 2f64.sqrt()).abs() < 1e-12);
        let full = OrbitPoint::new(GroupSpec::Su2, vec![su2(Quat::ONE), su2(-Quat::ONE)]).unwrap();
        assert_eq!(openness_radius(&full).unwrap(), f64::INFINITY);
    }

    #[test]
    fn common_torus_distance_matches_random_axes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let qs: Vec<Quat> = (0..3).map(|_| Quat::haar(&mut rng)).collect();
            let got = common_torus_distance(&qs);
            let oracle = (0..200_000)
                .map(|_| {
                    let v = Quat::haar(&mut rng).vector();
                    let l = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                    let n = [v[0] / l, v[1] / l, v[2] / l];
                    qs.iter().map(|&q| torus_gap(q, n).powi(2)).sum::<f64>().sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            assert!(got <= oracle + 1e-12, "{got} > {oracle}");
            assert!(oracle - got < 1e-2, "{got} vs {oracle}");
        }
    }

    #[test]
    fn product_openness_takes_the_nearest_factor() {
        let spec = GroupSpec::from_name("SU2xS3").unwrap();
        let pair = |q: Quat, name: &str| GroupElement::Product(vec![su2(q), s3(name)]);
        let base = OrbitPoint::new(spec, vec![pair(Quat::I, "(12)"), pair(Quat::J, "(123)")]).unwrap();
        let r = openness_radius(&base).unwrap();
        assert!((r - 1.0).abs() < 1e-12, "{r}");
    }

    #[test]
    fn far_points_are_rejected() {
        let base = ij();
        let far = vec![su2(Quat::I), su2(Quat::I)];
        assert!(matches!(base.project(&far), Err(Error::TrustRegionExceeded { .. })));
    }

    #[test]
    fn s3_pairs_pass_exhaustively() {
        let base = OrbitPoint::new(GroupSpec::s3(), vec![s3("(12)"), s3("(123)")]).unwrap();
        let rep = verify_slice_properties(&base, 0, 0.0, 1).unwrap();
        assert!(rep.passed(), "{:?}", rep.checks);
        assert_eq!(rep.trials, 36);
        // the orbit of a generic pair has |S3| / |center| = 6 points
        assert_eq!(rep.in_domain, 6);
        assert_eq!(rep.in_slice, 1);
        // ((12), e) is the nearest tuple of lower type
        assert_eq!(rep.openness_radius, Some(1.0));

        let low = OrbitPoint::new(GroupSpec::s3(), vec![s3("(12)"), s3("e")]).unwrap();
        let rep = verify_slice_properties(&low, 0, 0.0, 1).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.openness_radius, Some(1.0));
    }

    #[test]
    fn su2_pairs_pass_under_noise() {
        let rep = verify_slice_properties(&ij(), 100, 1e-3, 5).unwrap();
        assert!(rep.passed(), "{:?}", rep.checks);
        assert_eq!(rep.in_domain, 100);
        assert!(rep.max_residual < 1e-6);
        assert!(rep.openness_radius.unwrap() > 0.0);
    }

    #[test]
    fn identity_base_is_a_fixed_point() {
        for spec in [GroupSpec::Su2, GroupSpec::s3(), GroupSpec::Circle] {
            let base = OrbitPoint::new(spec.clone(), vec![spec.identity(); 2]).unwrap();
            assert_eq!(base.trust_radius(), f64::INFINITY);
            let rep = verify_slice_properties(&base, 20, 1e-2, 3).unwrap();
            assert!(rep.passed(), "{spec}: {:?}", rep.checks);
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let x: Vec<GroupElement> = (0..2).map(|_| spec.haar_sample(&mut rng)).collect();
            assert_eq!(base.project(&x).unwrap().point, base.base().to_vec());
        }
    }

    #[test]
    fn product_groups_project_factorwise() {
        let spec = GroupSpec::from_name("SU2xS3").unwrap();
        let base = OrbitPoint::new(
            spec.clone(),
            vec![
                GroupElement::Product(vec![su2(Quat::I), s3("(12)")]),
                GroupElement::Product(vec![su2(Quat::J), s3("(123)")]),
            ],
        )
        .unwrap();
        assert!(base.trust_radius() <= 0.25);
        let rep = verify_slice_properties(&base, 20, 1e-4, 8);
        // product of a finite and a continuous factor is sampled
        let rep = rep.unwrap();
        assert!(rep.passed(), "{:?}", rep.checks);
    }

    /// Connections on a two-vertex graph whose loop holonomies lie in the
    /// slice and whose tree edges agree with `c` never have a larger
    /// centralizer than `c`.
    #[test]
    fn lifted_invariant_by_brute_force() {
        let spec = GroupSpec::s3();
        let graph = Arc::new(
            Graph::new(
                vec!["m".into(), "v".into()],
                "m",
                vec![
                    ("t".into(), "m".into(), "v".into()),
                    ("a".into(), "m".into(), "v".into()),
                    ("b".into(), "v".into(), "v".into()),
                ],
            )
            .unwrap(),
        );
        let elements = spec.elements().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let c = Connection::random(spec.clone(), graph.clone(), &mut rng);
            let loops = graph.fundamental_loops().unwrap();
            let base = OrbitPoint::new(spec.clone(), c.reduction_map(&loops).unwrap()).unwrap();
            let zc = c.centralizer().unwrap();
            let mut found = 0;
            for a in &elements {
                for b in &elements {
                    let c2 = Connection::new(spec.clone(), graph.clone(), vec![c.values()[0].clone(), a.clone(), b.clone()])
                        .unwrap();
                    let hol = c2.reduction_map(&loops).unwrap();
                    if matches!(base.slice_membership(&hol), Ok(true)) {
                        found += 1;
                        assert!(spec.subgroup_contains(&zc, &c2.centralizer().unwrap()).unwrap());
                    }
                }
            }
            assert!(found >= 1);
        }
    }
}
