//! Named end-to-end verification suites.
//!
//! Each suite re-derives a family of exact identities through independent
//! routes (direct operator actions, boundary-operator brackets, closed-form
//! constants, counting formulas) and compares them with zero tolerance.
//! The `verify` CLI command and the acceptance tests both drive these
//! functions; every failed check carries a stable label and a description
//! of the instance that failed.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cache::CacheStore;
use crate::cup::ChernGen;
use crate::fock::{enumerate_monomials, graded_dimension, FockVector, HeisenbergMonomial};
use crate::hilbert::{verify_transport, ModelMap, PartitionKey, StructureRow};
use crate::ops::{boundary_apply, virasoro_apply, OperatorSum};
use crate::rational::{factorial, format_q, qq, qz, sign_pow, Q};
use crate::surface::{CohClass, SurfaceModel, TensorClass};
use crate::Engine;

/// Default seed for the deterministic sample generator (fixed so repeated
/// runs check the same instances).
pub const DEFAULT_SEED: u64 = 0x6869_6c62_6361_6c63;

/// All suite names, in report order.
pub const SUITE_NAMES: [&str; 13] = [
    "heisenberg",
    "virasoro",
    "chern-commutators",
    "pushforward",
    "leading-terms",
    "round-trips",
    "ring-axioms",
    "stability",
    "shape",
    "transition",
    "transport",
    "dimensions",
    "worked-constants",
];

/// One failed identity: a stable label plus the instance that failed.
#[derive(Debug, Clone)]
pub struct CheckFailure {
    pub check: String,
    pub detail: String,
}

/// Outcome of one suite run.
#[derive(Debug)]
pub struct SuiteReport {
    pub suite: String,
    /// Number of individual identity instances checked.
    pub checks: u64,
    pub failures: Vec<CheckFailure>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite,
            "checks": self.checks,
            "passed": self.passed(),
            "failures": self
                .failures
                .iter()
                .map(|f| json!({"check": f.check, "detail": f.detail}))
                .collect::<Vec<Value>>(),
        })
    }
}

const MAX_REPORTED_FAILURES: usize = 12;

struct Tally {
    checks: u64,
    failures: Vec<CheckFailure>,
    suppressed: u64,
}

impl Tally {
    fn new() -> Tally {
        Tally { checks: 0, failures: Vec::new(), suppressed: 0 }
    }

    /// Record one identity instance; the detail is only rendered on failure.
    fn check(&mut self, label: &str, ok: bool, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.fail(label, detail());
        }
    }

    fn fail(&mut self, label: &str, detail: String) {
        if self.failures.len() < MAX_REPORTED_FAILURES {
            self.failures.push(CheckFailure { check: label.to_string(), detail });
        } else {
            self.suppressed += 1;
        }
    }

    fn into_report(mut self, suite: &str) -> SuiteReport {
        if self.suppressed > 0 {
            self.failures.push(CheckFailure {
                check: format!("{suite}/more"),
                detail: format!("{} further failures suppressed", self.suppressed),
            });
        }
        SuiteReport { suite: suite.to_string(), checks: self.checks, failures: self.failures }
    }
}

/// Shared configuration for suite runs: the models to cover, an optional
/// persistent cache, and the RNG seed. Engines are built lazily and shared
/// across suites so memoized work is reused.
pub struct VerifyCtx {
    pub models: Vec<Arc<SurfaceModel>>,
    pub store: Option<CacheStore>,
    pub seed: u64,
    engines: Mutex<HashMap<String, Arc<Engine>>>,
}

impl VerifyCtx {
    pub fn new(models: Vec<Arc<SurfaceModel>>, store: Option<CacheStore>) -> VerifyCtx {
        assert!(!models.is_empty(), "verification needs at least one model");
        VerifyCtx { models, store, seed: DEFAULT_SEED, engines: Mutex::new(HashMap::new()) }
    }

    /// A context covering every builtin model.
    pub fn builtins(store: Option<CacheStore>) -> VerifyCtx {
        let models = SurfaceModel::BUILTIN_NAMES
            .iter()
            .map(|n| SurfaceModel::builtin(n).expect("builtin model"))
            .collect();
        VerifyCtx::new(models, store)
    }

    /// The shared engine for a model (not necessarily one of `self.models`).
    pub fn engine(&self, model: &Arc<SurfaceModel>) -> Arc<Engine> {
        let mut map = self.engines.lock().unwrap();
        map.entry(model.fingerprint.clone())
            .or_insert_with(|| {
                Arc::new(match &self.store {
                    Some(s) => Engine::with_store(model.clone(), s.clone()),
                    None => Engine::new(model.clone()),
                })
            })
            .clone()
    }

    /// The configured models whose names appear in `names`; falls back to
    /// the full configured list when none match, so explicitly supplied
    /// models are still covered by suites that default to a fixed subset.
    fn prefer(&self, names: &[&str]) -> Vec<Arc<SurfaceModel>> {
        let picked: Vec<Arc<SurfaceModel>> = self
            .models
            .iter()
            .filter(|m| names.contains(&m.name.as_str()))
            .cloned()
            .collect();
        if picked.is_empty() {
            self.models.clone()
        } else {
            picked
        }
    }

    fn seed_for(&self, salt: u64) -> u64 {
        self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17) ^ salt
    }
}

/// Run one suite by name.
pub fn run_suite(ctx: &VerifyCtx, name: &str) -> Result<SuiteReport, String> {
    match name {
        "heisenberg" => Ok(suite_heisenberg(ctx)),
        "virasoro" => Ok(suite_virasoro(ctx)),
        "chern-commutators" => Ok(suite_chern_commutators(ctx)),
        "pushforward" => Ok(suite_pushforward(ctx)),
        "leading-terms" => Ok(suite_leading_terms(ctx)),
        "round-trips" => Ok(suite_round_trips(ctx)),
        "ring-axioms" => Ok(suite_ring_axioms(ctx)),
        "stability" => Ok(suite_stability(ctx)),
        "shape" => Ok(suite_shape(ctx)),
        "transition" => Ok(suite_transition(ctx)),
        "transport" => Ok(suite_transport(ctx)),
        "dimensions" => Ok(suite_dimensions(ctx)),
        "worked-constants" => Ok(suite_worked_constants(ctx)),
        other => Err(format!(
            "unknown suite {other:?}; available: {} (or \"all\")",
            SUITE_NAMES.join(", ")
        )),
    }
}

/// Run every suite, in order.
pub fn run_all(ctx: &VerifyCtx) -> Vec<SuiteReport> {
    SUITE_NAMES
        .iter()
        .map(|name| run_suite(ctx, name).expect("registered suite"))
        .collect()
}

// ---------------------------------------------------------------------------
// Shared sample machinery
// ---------------------------------------------------------------------------

/// `a_n(class)·v`, reading `n < 0` as creation, `n > 0` as annihilation and
/// `n = 0` as the zero operator.
fn letter(model: &SurfaceModel, n: i64, class: &CohClass, v: &FockVector) -> FockVector {
    if n == 0 || class.is_zero() {
        return FockVector::zero();
    }
    if n < 0 {
        v.create(model, (-n) as u32, class)
    } else {
        v.annihilate(model, n as u32, class)
    }
}

fn bname(model: &SurfaceModel, i: usize) -> &str {
    &model.basis[i].name
}

fn random_coeff(rng: &mut StdRng) -> Q {
    let num = loop {
        let x: i64 = rng.random_range(-4..=4);
        if x != 0 {
            break x;
        }
    };
    qq(num, rng.random_range(1..=3))
}

/// Deterministic sample vectors: `count` nonzero combinations of up to three
/// canonical monomials of weight `1..=max_weight`.
fn sample_vectors(
    model: &SurfaceModel,
    rng: &mut StdRng,
    count: usize,
    max_weight: u32,
) -> Vec<FockVector> {
    let pools: Vec<Vec<HeisenbergMonomial>> =
        (0..=max_weight).map(|w| enumerate_monomials(model, w)).collect();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut v = FockVector::zero();
        for _ in 0..rng.random_range(1..=3) {
            let w = rng.random_range(1..=max_weight) as usize;
            let mono = pools[w][rng.random_range(0..pools[w].len())].clone();
            v.add_term(mono, &random_coeff(rng));
        }
        if !v.is_zero() {
            out.push(v);
        }
    }
    out
}

/// A nonzero vector supported on monomials of weight exactly `n`.
fn sample_weight_n(rng: &mut StdRng, pool: &[HeisenbergMonomial]) -> FockVector {
    loop {
        let mut v = FockVector::zero();
        for _ in 0..rng.random_range(1..=2) {
            let mono = pool[rng.random_range(0..pool.len())].clone();
            v.add_term(mono, &random_coeff(rng));
        }
        if !v.is_zero() {
            return v;
        }
    }
}

/// A nonzero vector of weight `n`, homogeneous in cohomological degree;
/// returns the degree.
fn sample_homogeneous(
    rng: &mut StdRng,
    by_degree: &BTreeMap<u32, Vec<HeisenbergMonomial>>,
) -> (FockVector, u32) {
    let degrees: Vec<u32> = by_degree.keys().copied().collect();
    loop {
        let d = degrees[rng.random_range(0..degrees.len())];
        let pool = &by_degree[&d];
        let mut v = FockVector::zero();
        for _ in 0..rng.random_range(1..=2) {
            let mono = pool[rng.random_range(0..pool.len())].clone();
            v.add_term(mono, &random_coeff(rng));
        }
        if !v.is_zero() {
            return (v, d);
        }
    }
}

fn binomial(k: u32, j: u32) -> Q {
    factorial(k as u64) / (factorial(j as u64) * factorial((k - j) as u64))
}

/// Representative basis classes for product sweeps: the unit, one middle
/// class, and the point class.
fn representative_classes(model: &SurfaceModel) -> Vec<usize> {
    let mut reps = vec![model.unit];
    if let Some(mid) = (0..model.dim()).find(|&c| c != model.unit && c != model.point) {
        reps.push(mid);
    }
    reps.push(model.point);
    reps
}

/// Multisets of generator letters `G_k(c)` with `k ≤ 2`, classes drawn from
/// the representatives, sizes `1..=max_size`, at most one odd class per
/// multiset (so product order cannot introduce signs).
fn gen_multisets(model: &SurfaceModel, max_size: usize) -> Vec<Vec<ChernGen>> {
    let cands: Vec<ChernGen> = representative_classes(model)
        .into_iter()
        .flat_map(|c| (0..=2u32).map(move |k| ChernGen { c, k }))
        .collect();
    fn go(
        model: &SurfaceModel,
        cands: &[ChernGen],
        start: usize,
        max: usize,
        cur: &mut Vec<ChernGen>,
        out: &mut Vec<Vec<ChernGen>>,
    ) {
        for i in start..cands.len() {
            cur.push(cands[i]);
            let odd = cur.iter().filter(|g| model.parity(g.c) == 1).count();
            if odd <= 1 {
                out.push(cur.clone());
                if cur.len() < max {
                    go(model, cands, i, max, cur, out);
                }
            }
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(model, &cands, 0, max_size, &mut Vec::new(), &mut out);
    out
}

fn gens_label(model: &SurfaceModel, gens: &[ChernGen]) -> String {
    gens.iter()
        .map(|g| format!("G_{}({})", g.k, bname(model, g.c)))
        .collect::<Vec<_>>()
        .join("·")
}

// ---------------------------------------------------------------------------
// Suite 1: Heisenberg commutation relations
// ---------------------------------------------------------------------------

/// `[a_n(α), a_m(β)] = −n·δ_{n+m,0}·∫(αβ)·Id` as an action identity, for all
/// `|n|,|m| ≤ 4`, all basis pairs, on 50 sampled vectors of weight ≤ 6 per
/// model.
fn suite_heisenberg(ctx: &VerifyCtx) -> SuiteReport {
    let mut t = Tally::new();
    let indices: Vec<i64> = (-4..=4).filter(|&n| n != 0).collect();
    for model in &ctx.models {
        let m = &**model;
        let mut rng = StdRng::seed_from_u64(ctx.seed_for(1));
        let vectors = sample_vectors(m, &mut rng, 50, 6);
        let classes: Vec<CohClass> = (0..m.dim()).map(CohClass::basis).collect();
        for (vi, v) in vectors.iter().enumerate() {
            // Single-letter actions a_n(b_i)·v, shared across all pairings.
            let acted: Vec<Vec<FockVector>> = indices
                .iter()
                .map(|&n| classes.iter().map(|c| letter(m, n, c, v)).collect())
                .collect();
            for (ni, &n) in indices.iter().enumerate() {
                for i in 0..m.dim() {
                    for (mi, &mm) in indices.iter().enumerate() {
                        for j in 0..m.dim() {
                            let lhs = letter(m, n, &classes[i], &acted[mi][j]);
                            let mut rhs = letter(m, mm, &classes[j], &acted[ni][i]);
                            if m.parity(i) == 1 && m.parity(j) == 1 {
                                rhs = rhs.scale(&qz(-1));
                            }
                            let expect = if n + mm == 0 {
                                let w = m.integrate_product(&classes[i], &classes[j]);
                                v.scale(&(w * qz(-n)))
                            } else {
                                FockVector::zero()
                            };
                            t.check("heisenberg/commutator", lhs.sub(&rhs) == expect, || {
                                format!(
                                    "model {}: [a_{n}({}), a_{mm}({})] misacts on sample #{vi}",
                                    m.name,
                                    bname(m, i),
                                    bname(m, j)
                                )
                            });
                        }
                    }
                }
            }
        }
    }
    t.into_report("heisenberg")
}

// ---------------------------------------------------------------------------
// Suite 2: Virasoro-type operators and operator derivatives
// ---------------------------------------------------------------------------

/// Checks, per model, on sampled vectors of weight ≤ 5:
/// - `[𝔏_n(α), a_m(β)] = −m·a_{n+m}(αβ)` for `|n|,|m| ≤ 3`;
/// - the operator derivative of a single letter agrees with the boundary
///   bracket `[𝔡, a_n(α)]` and with `n·𝔏_n(α) − (n(|n|−1)/2)·a_n(K·α)`;
/// - `[𝔡, 𝔊_k(α)] = 0` for `k ≤ 2`.
fn suite_virasoro(ctx: &VerifyCtx) -> SuiteReport {
    let mut t = Tally::new();
    let nz3: Vec<i64> = (-3..=3).filter(|&x| x != 0).collect();
    for model in &ctx.models {
        let m = &**model;
        let eng = ctx.engine(model);
        let mut rng = StdRng::seed_from_u64(ctx.seed_for(2));
        let mut vectors = sample_vectors(m, &mut rng, 6, 5);
        vectors.push(FockVector::vacuum());
        vectors.push(FockVector::unit_of(m, 3));
        let classes: Vec<CohClass> = (0..m.dim()).map(CohClass::basis).collect();
        for (vi, v) in vectors.iter().enumerate() {
            for &n in &nz3 {
                for i in 0..m.dim() {
                    let alpha = &classes[i];
                    let lv = virasoro_apply(m, n, alpha, v);
                    for &mm in &nz3 {
                        for j in 0..m.dim() {
                            let beta = &classes[j];
                            let lhs = virasoro_apply(m, n, alpha, &letter(m, mm, beta, v));
                            let mut swapped = letter(m, mm, beta, &lv);
                            if m.parity(i) == 1 && m.parity(j) == 1 {
                                swapped = swapped.scale(&qz(-1));
                            }
                            let rhs = letter(m, n + mm, &m.mul(alpha, beta), v).scale(&qz(-mm));
                            t.check(
                                "virasoro/creation-bracket",
                                lhs.sub(&swapped) == rhs,
                                || {
                                    format!(
                                        "model {}: [L_{n}({}), a_{mm}({})] misacts on sample #{vi}",
                                        m.name,
                                        bname(m, i),
                                        bname(m, j)
                                    )
                                },
                            );
                        }
                    }
                    // Operator derivative of the single letter a_n(α), three ways.
                    let budget = v.max_weight();
                    let via_op =
                        OperatorSum::single(m, n, alpha).derivative(m, budget).apply(m, v);
                    let via_bracket = boundary_apply(m, &letter(m, n, alpha, v))
                        .sub(&letter(m, n, alpha, &boundary_apply(m, v)));
                    let correction = letter(m, n, &m.mul(&m.canonical_class, alpha), v)
                        .scale(&qq(n * (n.abs() - 1), 2));
                    let closed_form = lv.scale(&qz(n)).sub(&correction);
                    t.check("virasoro/derivative-boundary", via_op == via_bracket, || {
                        format!(
                            "model {}: derivative of a_{n}({}) disagrees with the boundary bracket on sample #{vi}",
                            m.name,
                            bname(m, i)
                        )
                    });
                    t.check("virasoro/derivative-closed-form", via_op == closed_form, || {
                        format!(
                            "model {}: derivative of a_{n}({}) disagrees with its closed form on sample #{vi}",
                            m.name,
                            bname(m, i)
                        )
                    });
                }
            }
            // The boundary operator commutes with the Chern operators.
            for k in 0..=2u32 {
                for i in 0..m.dim() {
                    let a = boundary_apply(m, &eng.chern_apply(k, &classes[i], v));
                    let b = eng.chern_apply(k, &classes[i], &boundary_apply(m, v));
                    t.check("virasoro/boundary-chern", a == b, || {
                        format!(
                            "model {}: [boundary, Ch_{k}({})] ≠ 0 on sample #{vi}",
                            m.name,
                            bname(m, i)
                        )
                    });
                }
            }
        }
    }
    t.into_report("virasoro")
}

// ---------------------------------------------------------------------------
// Suite 3: Chern-operator commutators
// ---------------------------------------------------------------------------

/// `ad_𝔡^k(a_{−1}(class))·v`, expanded by the binomial theorem (the boundary
/// operator is even).
fn iterated_boundary_bracket(
    model: &SurfaceModel,
    k: u32,
    class: &CohClass,
    v: &FockVector,
) -> FockVector {
    let mut dj = v.clone();
    let mut total = FockVector::zero();
    for j in 0..=k {
        let mut u = dj.create(model, 1, class);
        for _ in 0..(k - j) {
            u = boundary_apply(model, &u);
        }
        total = total.add(&u.scale(&(binomial(k, j) * sign_pow(j as u64))));
        if j < k {
            dj = boundary_apply(model, &dj);
        }
    }
    total
}

/// Checks, per model:
/// - `[𝔊_k(α), a_{−1}(β)]` (k ≤ 3) three ways: direct super-commutator
///   action, the engine's operator expansion, and `(1/k!)·ad_𝔡^k(a_{−1}(αβ))`;
/// - iterated commutators `[…[𝔊_k(α), a_{n_1}(β_1)]…, a_{n_{k+1}}]` collapse
///   to `−(∏n_ℓ)·a_{Σn_ℓ}(α·∏β_ℓ)` for `k ≤ 2`, and one further bracket
///   vanishes.
fn suite_chern_commutators(ctx: &VerifyCtx) -> SuiteReport {
    let mut t = Tally::new();
    for model in &ctx.models {
        let m = &**model;
        let eng = ctx.engine(model);
        let mut rng = StdRng::seed_from_u64(ctx.seed_for(3));
        let mut vectors = sample_vectors(m, &mut rng, 4, 3);
        vectors.push(FockVector::vacuum());
        vectors.push(FockVector::unit_of(m, 2));
        let classes: Vec<CohClass> = (0..m.dim()).map(CohClass::basis).collect();

        for k in 0..=3u32 {
            let inv_kfact = Q::one() / factorial(k as u64);
            for i in 0..m.dim() {
                for j in 0..m.dim() {
                    let prod = m.mul(&classes[i], &classes[j]);
                    let odd_pair = m.parity(i) == 1 && m.parity(j) == 1;
                    for (vi, v) in vectors.iter().enumerate() {
                        let mut swapped =
                            eng.chern_apply(k, &classes[i], v).create(m, 1, &classes[j]);
                        if odd_pair {
                            swapped = swapped.scale(&qz(-1));
                        }
                        let direct = eng
                            .chern_apply(k, &classes[i], &v.create(m, 1, &classes[j]))
                            .sub(&swapped);
                        let via_op = eng
                            .chern_commutator(k, &classes[i], 1, &classes[j], v.max_weight())
                            .apply(m, v);
                        let via_boundary =
                            iterated_boundary_bracket(m, k, &prod, v).scale(&inv_kfact);
                        t.check("chern/creation-bracket-operator", direct == via_op, || {
                            format!(
                                "model {}: [Ch_{k}({}), a_-1({})] operator form misacts on sample #{vi}",
                                m.name,
                                bname(m, i),
                                bname(m, j)
                            )
                        });
                        t.check("chern/creation-bracket-boundary", direct == via_boundary, || {
                            format!(
                                "model {}: [Ch_{k}({}), a_-1({})] boundary form misacts on sample #{vi}",
                                m.name,
                                bname(m, i),
                                bname(m, j)
                            )
                        });
                    }
                }
            }
        }

        // Iterated brackets at the operator level. Each entry is
        // (k, r_1, subsequent letter indices). With `rest.len() == k` the
        // chain collapses to a single letter — an identity that requires the
        // index sum to be nonzero (at sum zero a central scalar survives
        // instead). With `rest.len() == k + 1` the chain must vanish; that
        // holds for creation letters (an annihilation letter can close a
        // contraction and leave a scalar).
        let chains: [(u32, u32, &[i64]); 20] = [
            (0, 1, &[]),
            (0, 2, &[]),
            (1, 1, &[-1]),
            (1, 1, &[-2]),
            (1, 1, &[2]),
            (1, 1, &[3]),
            (1, 2, &[-1]),
            (1, 2, &[3]),
            (2, 1, &[-1, -2]),
            (2, 1, &[2, -2]),
            (2, 1, &[3, -1]),
            (2, 1, &[2, 2]),
            (2, 2, &[-1, 1]),
            (2, 1, &[-1, 3]),
            (0, 1, &[-1]),
            (0, 1, &[-2]),
            (0, 2, &[-1]),
            (1, 1, &[-1, -1]),
            (1, 1, &[-2, -1]),
            (2, 1, &[-1, -2, -1]),
        ];
        let reps = representative_classes(m);
        const W_CAP: u32 = 4;
        for &(k, r1, rest) in &chains {
            for &a_idx in &reps {
                let alpha = &classes[a_idx];
                // Letter classes: a representative non-unit class first, then
                // units (keeping the expected product nonzero where possible).
                let letter_classes: Vec<&CohClass> = (0..=rest.len())
                    .map(|l| if l == 0 { &classes[reps[1]] } else { &classes[m.unit] })
                    .collect();
                let b0 = W_CAP + rest.iter().map(|x| x.unsigned_abs() as u32).sum::<u32>();
                let mut op = eng.chern_commutator(k, alpha, r1, letter_classes[0], b0);
                let mut budget = b0;
                for (l, &nl) in rest.iter().enumerate() {
                    let single = OperatorSum::single(m, nl, letter_classes[l + 1]);
                    budget -= nl.unsigned_abs() as u32;
                    op = OperatorSum::commutator(m, &op, &single).truncate(budget);
                }
                let expect = if rest.len() == (k + 1) as usize {
                    OperatorSum::zero()
                } else {
                    debug_assert_eq!(rest.len(), k as usize);
                    let mut prod_class = m.mul(alpha, letter_classes[0]);
                    for l in 0..rest.len() {
                        prod_class = m.mul(&prod_class, letter_classes[l + 1]);
                    }
                    let mut nprod: i64 = -(r1 as i64);
                    let mut nsum: i64 = -(r1 as i64);
                    for &nl in rest {
                        nprod *= nl;
                        nsum += nl;
                    }
                    debug_assert_ne!(nsum, 0, "collapse chains need a nonzero index sum");
                    if prod_class.is_zero() {
                        OperatorSum::zero()
                    } else {
                        OperatorSum::single(m, nsum, &prod_class).scale(&qz(-nprod))
                    }
                };
                let label = if rest.len() == (k + 1) as usize {
                    "chern/iterated-vanishing"
                } else {
                    "chern/iterated-collapse"
                };
                t.check(label, op == expect.truncate(budget), || {
                    format!(
                        "model {}: chain k={k}, first letter -{r1}, then {:?} on Ch_{k}({})",
                        m.name,
                        rest,
                        bname(m, a_idx)
                    )
                });
            }
        }
    }
    t.into_report("chern-commutators")
}

// ---------------------------------------------------------------------------
// Suite 4: diagonal pushforward identities
// ---------------------------------------------------------------------------

/// Per model, expanded over the full basis: slot absorption, absorption
/// followed by slot integration, slot refinement, the Euler contraction, the
/// arity-0 convention, and the pairing characterization of `τ_{k*}`.
fn suite_pushforward(ctx: &VerifyCtx) -> SuiteReport {
    let mut t = Tally::new();
    for model in &ctx.models {
        let m = &**model;
        let classes: Vec<CohClass> = (0..m.dim()).map(CohClass::basis).collect();
        for k in 1..=3usize {
            for (ai, a) in classes.iter().enumerate() {
                let ta = m.tau_push(k, a);
                for j in 0..k {
                    t.check(
                        "pushforward/refine",
                        m.tensor_refine(&ta, j) == m.tau_push(k + 1, a),
                        || format!("model {}: refining slot {j} of τ_{k}({})", m.name, bname(m, ai)),
                    );
                    for (bi, b) in classes.iter().enumerate() {
                        let absorbed = m.tensor_absorb(&ta, j, b);
                        let ab = m.mul(a, b);
                        t.check("pushforward/absorb", absorbed == m.tau_push(k, &ab), || {
                            format!(
                                "model {}: multiplying slot {j} of τ_{k}({}) by {}",
                                m.name,
                                bname(m, ai),
                                bname(m, bi)
                            )
                        });
                        t.check(
                            "pushforward/absorb-integrate",
                            m.tensor_integrate_slot(&absorbed, j) == m.tau_push(k - 1, &ab),
                            || {
                                format!(
                                    "model {}: integrating slot {j} of τ_{k}({})·{} in slot {j}",
                                    m.name,
                                    bname(m, ai),
                                    bname(m, bi)
                                )
                            },
                        );
                    }
                }
            }
        }
        for (bi, b) in classes.iter().enumerate() {
            let refined = m.tau_push(2, b);
            let eb = m.mul(&m.euler_class, b);
            t.check(
                "pushforward/euler",
                m.tensor_contract_refined(&refined, 0) == TensorClass::from_class(&eb),
                || format!("model {}: contracting the two slots of τ_2({})", m.name, bname(m, bi)),
            );
            t.check(
                "pushforward/arity-zero",
                m.tau_push(0, b) == TensorClass::scalar(m.integrate(b)),
                || format!("model {}: τ_0({})", m.name, bname(m, bi)),
            );
        }
        // Pairing characterization at arity 2: ⟨τ_2(a), b_i ⊗ b_j⟩ = ∫ a·b_i·b_j.
        for (ai, a) in classes.iter().enumerate() {
            let ta = m.tau_push(2, a);
            for i in 0..m.dim() {
                for j in 0..m.dim() {
                    let mut probe = TensorClass::zero(2);
                    probe.add_term(vec![i, j], &Q::one());
                    let expect = m.integrate(&m.mul(&m.mul(a, &classes[i]), &classes[j]));
                    t.check("pushforward/pairing", m.tensor_pairing(&ta, &probe) == expect, || {
                        format!(
                            "model {}: ⟨τ_2({}), {}⊗{}⟩",
                            m.name,
                            bname(m, ai),
                            bname(m, i),
                            bname(m, j)
                        )
                    });
                }
            }
        }
    }
    t.into_report("pushforward")
}

// ---------------------------------------------------------------------------
// Suite 5: leading-term constants of the two basis conversions
// ---------------------------------------------------------------------------

/// Forward: in `∏ G_{k_i}(α_i, n)` with `n = Σ(k_i+1)`, the coefficient of
/// the monomial `∏ a_{−(k_i+1)}(α_i)|0⟩` is `∏ (−1)^{k_i}/(k_i+1)!`.
/// Reverse: the expansion of `𝔞_ρ` over generator monomials carries its
/// unique top-weight monomial with coefficient `∏ (−1)^{r−1}·r!`.
fn suite_leading_terms(ctx: &VerifyCtx) -> SuiteReport {
    let mut t = Tally::new();
    for model in &ctx.models {
        let m = &**model;
        let eng = ctx.engine(model);
        for gens in gen_multisets(m, 3) {
            // The order-0 operator attached to the unit class is a scalar
            // (total weight times the identity); its would-be letter is the
            // padding letter itself, so the product has no isolated leading
            // monomial and the constant below does not apply.
            if gens.iter().any(|g| g.k == 0 && g.c == m.unit) {
                continue;
            }
            let n: u32 = gens.iter().map(|g| g.k + 1).sum();
            let v = eng.g_monomial_class(&gens, n);
            // The target monomial, built by creation (at most one odd letter,
            // so no reordering sign arises).
            let mut target = FockVector::vacuum();
            let mut expect = Q::one();
            for g in &gens {
                target = target.create(m, g.k + 1, &CohClass::basis(g.c));
                expect *= sign_pow(g.k as u64) / factorial((g.k + 1) as u64);
            }
            assert_eq!(target.terms.len(), 1, "target monomial must be canonical");
            let mono = target.terms.keys().next().unwrap();
            t.check("leading-terms/forward", v.coeff(mono) == expect, || {
                format!("model {}: leading coefficient of {}", m.name, gens_label(m, &gens))
            });
        }
        for w in 1..=4u32 {
            for rho in PartitionKey::enumerate(m, w) {
                let poly = eng.to_g_basis(&rho);
                let lead: Vec<ChernGen> = rho
                    .factor_sequence()
                    .into_iter()
                    .map(|(c, r)| ChernGen { c, k: r - 1 })
                    .collect();
                let mut expect = Q::one();
                for (_, r) in rho.factor_sequence() {
                    expect *= sign_pow((r - 1) as u64) * factorial(r as u64);
                }
                t.check(
                    "leading-terms/reverse",
                    poly.terms.get(&lead) == Some(&expect),
                    || format!("model {}: top coefficient of {}", m.name, rho.display(m)),
                );
                let lower = poly.terms.keys().all(|gens| {
                    gens == &lead || gens.iter().map(|g| g.k + 1).sum::<u32>() < w
                });
                t.check("leading-terms/reverse-support", lower, || {
                    format!(
                        "model {}: {} expands with an extra top-weight monomial",
                        m.name,
                        rho.display(m)
                    )
                });
            }
        }
    }
    t.into_report("leading-terms")
}

// ---------------------------------------------------------------------------
// Suite 6: basis-conversion round trips
// ---------------------------------------------------------------------------

/// `to_g_basis` evaluated at `n ∈ {∥ρ∥, ∥ρ∥+1, ∥ρ∥+2}` reproduces `𝔞_ρ(n)`
/// for every key of weight ≤ 4; `chern_in_b_basis` evaluated over
/// tautological classes reproduces `G_k(α, n)` for `k ≤ 3`.
fn suite_round_trips(ctx: &VerifyCtx) -> SuiteReport {
    let mut t = Tally::new();
    for model in &ctx.models {
        let m = &**model;
        let eng = ctx.engine(model);
        let mut keys = vec![PartitionKey::empty()];
        for w in 1..=4u32 {
            keys.extend(PartitionKey::enumerate(m, w));
        }
        for rho in &keys {
            let w = rho.weight();
            let poly = eng.to_g_basis(rho);
            for n in [w, w + 1, w + 2] {
                t.check(
                    "round-trips/generator-basis",
                    eng.g_eval(&poly, n) == eng.heisenberg_class(rho, n),
                    || format!("model {}: {} at n={n}", m.name, rho.display(m)),
                );
            }
        }
        for k in 0..=3u32 {
            for i in 0..m.dim() {
                let alpha = CohClass::basis(i);
                let poly = eng.chern_in_b_basis(k, &alpha);
                for n in [k + 1, k + 2, k + 3] {
                    let ok = match eng.b_poly_eval(&poly, n) {
                        Ok(v) => v == eng.chern_class(k, &alpha, n),
                        Err(_) => false,
                    };
                    t.check("round-trips/tautological-basis", ok, || {
                        format!("model {}: G_{k}({}) at n={n}", m.name, bname(m, i))
                    });
                }
            }
        }
    }
    t.into_report("round-trips")
}

// ---------------------------------------------------------------------------
// Suite 7: ring axioms on H*(X^[n])
// ---------------------------------------------------------------------------

/// Graded super-commutativity (n ≤ 4, 30 sampled homogeneous pairs per
/// model), associativity (n ≤ 3, 15 sampled triples per model), and the
/// n = 1 reduction of cup to the surface product, over all basis pairs.
fn suite_ring_axioms(ctx: &VerifyCtx) -> SuiteReport {
    let mut t = Tally::new();
    for model in &ctx.models {
        let m = &**model;
        let eng = ctx.engine(model);
        let mut rng = StdRng::seed_from_u64(ctx.seed_for(7));
        let by_degree: Vec<BTreeMap<u32, Vec<HeisenbergMonomial>>> = (0..=4u32)
            .map(|n| {
                let mut map: BTreeMap<u32, Vec<HeisenbergMonomial>> = BTreeMap::new();
                for mono in enumerate_monomials(m, n) {
                    map.entry(mono.degree(m)).or_default().push(mono);
                }
                map
            })
            .collect();
        for trial in 0..30u32 {
            let n = 1 + (trial % 4);
            let (a, da) = sample_homogeneous(&mut rng, &by_degree[n as usize]);
            let (b, db) = sample_homogeneous(&mut rng, &by_degree[n as usize]);
            let ok = match (eng.cup(&a, &b, n), eng.cup(&b, &a, n)) {
                (Ok(ab), Ok(ba)) => {
                    let sign = if da % 2 == 1 && db % 2 == 1 { qz(-1) } else { qz(1) };
                    ab == ba.scale(&sign)
                }
                _ => false,
            };
            t.check("ring-axioms/super-commutativity", ok, || {
                format!(
                    "model {}: degrees ({da},{db}) at n={n}, trial #{trial}",
                    m.name
                )
            });
        }
        let pools: Vec<Vec<HeisenbergMonomial>> =
            (0..=3u32).map(|n| enumerate_monomials(m, n)).collect();
        for trial in 0..15u32 {
            let n = 1 + (trial % 3);
            let a = sample_weight_n(&mut rng, &pools[n as usize]);
            let b = sample_weight_n(&mut rng, &pools[n as usize]);
            let c = sample_weight_n(&mut rng, &pools[n as usize]);
            let ok = (|| -> Result<bool, String> {
                let left = eng.cup(&eng.cup(&a, &b, n)?, &c, n)?;
                let right = eng.cup(&a, &eng.cup(&b, &c, n)?, n)?;
                Ok(left == right)
            })()
            .unwrap_or(false);
            t.check("ring-axioms/associativity", ok, || {
                format!("model {}: associativity at n={n}, trial #{trial}", m.name)
            });
        }
        for i in 0..m.dim() {
            for j in 0..m.dim() {
                let a = FockVector::vacuum().create(m, 1, &CohClass::basis(i));
                let b = FockVector::vacuum().create(m, 1, &CohClass::basis(j));
                let expect = FockVector::vacuum().create(m, 1, &m.mul_basis(i, j).clone());
                let ok = match eng.cup(&a, &b, 1) {
                    Ok(ab) => ab == expect,
                    Err(_) => false,
                };
                t.check("ring-axioms/surface-reduction", ok, || {
                    format!("model {}: {}·{} at n=1", m.name, bname(m, i), bname(m, j))
                });
            }
        }
    }
    t.into_report("ring-axioms")
}

// ---------------------------------------------------------------------------
// Suite 8: stability of structure constants
// ---------------------------------------------------------------------------

/// The sign incurred by merging the canonically ordered letters of two keys
/// into the canonical order of their union: one factor −1 per pair of
/// odd-class letters that must swap past each other.
fn union_sign(model: &SurfaceModel, rho: &PartitionKey, sigma: &PartitionKey) -> Q {
    let odd_letters = |key: &PartitionKey| -> Vec<(usize, u32)> {
        key.factor_sequence()
            .into_iter()
            .filter(|&(c, _)| model.parity(c) == 1)
            .collect()
    };
    let mut inversions = 0u64;
    for a in odd_letters(rho) {
        for b in odd_letters(sigma) {
            if b < a {
                inversions += 1;
            }
        }
    }
    sign_pow(inversions)
}

/// For every unordered key pair with `∥ρ∥+∥σ∥ ≤ 5` (by default on P2 and the
/// odd model): extract the structure constants, recompute the product
/// directly at `n*`, `n*+1`, `n*+2` and compare, and check the top
/// coefficient `d^{ρ∪σ}` is ±1 — the concatenation-to-canonical reordering
/// sign, hence exactly 1 whenever no odd letters swap — or that top-weight
/// terms are absent when the union key vanishes for parity reasons.
fn suite_stability(ctx: &VerifyCtx) -> SuiteReport {
    let mut t = Tally::new();
    for model in ctx.prefer(&["P2", "Abelianlike"]) {
        let m = &*model;
        let eng = ctx.engine(&model);
        let mut pairs: Vec<(PartitionKey, PartitionKey)> = Vec::new();
        for w1 in 1..=4u32 {
            for w2 in w1..=(5 - w1) {
                for rho in PartitionKey::enumerate(m, w1) {
                    for sigma in PartitionKey::enumerate(m, w2) {
                        if w1 < w2 || rho <= sigma {
                            pairs.push((rho.clone(), sigma));
                        }
                    }
                }
            }
        }
        let results: Vec<(String, Result<(), String>)> = pairs
            .par_iter()
            .map(|(rho, sigma)| {
                let label =
                    format!("model {}: {}·{}", m.name, rho.display(m), sigma.display(m));
                let w = rho.weight() + sigma.weight();
                let outcome = (|| -> Result<(), String> {
                    let row = eng.verify_stability(rho, sigma, &[w, w + 1, w + 2])?;
                    let union = rho.union(sigma);
                    if union.validate(m).is_ok() {
                        let expect = union_sign(m, rho, sigma);
                        match row.iter().find(|(nu, _)| *nu == union) {
                            Some((_, d)) if *d == expect => {}
                            Some((_, d)) => {
                                return Err(format!(
                                    "top coefficient {} ≠ {}",
                                    format_q(d),
                                    format_q(&expect)
                                ))
                            }
                            None => return Err("top-weight term missing".to_string()),
                        }
                    } else if let Some((nu, _)) =
                        row.iter().find(|(nu, _)| nu.weight() == w)
                    {
                        return Err(format!(
                            "vanishing union, yet top-weight term {} present",
                            nu.display(m)
                        ));
                    }
                    Ok(())
                })();
                (label, outcome)
            })
            .collect();
        for (label, outcome) in results {
            t.checks += 1;
            if let Err(e) = outcome {
                t.fail("stability/pair", format!("{label}: {e}"));
            }
        }
    }
    t.into_report("stability")
}

// ---------------------------------------------------------------------------
// Suite 9: universal shape of Chern-class products
// ---------------------------------------------------------------------------

/// Every monomial of every product `∏𝔊_{k_i}(α_i)` (s ≤ 3, k_i ≤ 2) obeys
/// the intrinsic weight bound `Σ(k_i+1)` and total-degree homogeneity, at
/// the minimal level and one padded level.
fn suite_shape(ctx: &VerifyCtx) -> SuiteReport {
    let mut t = Tally::new();
    for model in &ctx.models {
        let m = &**model;
        let eng = ctx.engine(model);
        for gens in gen_multisets(m, 3) {
            let weight: u32 = gens.iter().map(|g| g.k + 1).sum();
            let gv: Vec<(u32, CohClass)> =
                gens.iter().map(|g| (g.k, CohClass::basis(g.c))).collect();
            for n in [weight, weight + 1] {
                let res = eng.verify_universal_shape(&gv, n);
                t.check("shape/product", res.is_ok(), || {
                    format!(
                        "model {}: {} at n={n}: {}",
                        m.name,
                        gens_label(m, &gens),
                        res.as_ref().err().cloned().unwrap_or_default()
                    )
                });
            }
        }
    }
    t.into_report("shape")
}

// ---------------------------------------------------------------------------
// Suite 10: generator-monomial transition matrix
// ---------------------------------------------------------------------------

/// The transition matrix between generator monomials and the `𝔞_ν` basis up
/// to weight 5 is unitriangular for the weight filtration, and the returned
/// inverse really is one-sided inverse to it, on every configured model.
fn suite_transition(ctx: &VerifyCtx) -> SuiteReport {
    let mut t = Tally::new();
    for model in &ctx.models {
        let m = &**model;
        let eng = ctx.engine(model);
        // Warm the structure-constant cache in parallel: expand each
        // generator monomial (read off a key) left-to-right, exactly as the
        // transition build will.
        let mut keys: Vec<PartitionKey> = Vec::new();
        for w in 0..=5u32 {
            keys.extend(PartitionKey::enumerate(m, w));
        }
        keys.par_iter().for_each(|key| {
            let mut row: BTreeMap<PartitionKey, Q> = BTreeMap::new();
            row.insert(PartitionKey::empty(), Q::one());
            for (c, r) in key.factor_sequence() {
                let gen = PartitionKey::single(c, r);
                let mut next: BTreeMap<PartitionKey, Q> = BTreeMap::new();
                for (nu, coeff) in &row {
                    if let Ok(expansion) = eng.structure_constants(nu, &gen) {
                        for (mu, d) in expansion {
                            let entry = next.entry(mu).or_insert_with(Q::zero);
                            *entry += coeff * &d;
                        }
                    }
                }
                next.retain(|_, c| !c.is_zero());
                row = next;
            }
        });
        let tr = match eng.generator_transition(5) {
            Ok(tr) => tr,
            Err(e) => {
                t.checks += 1;
                t.fail("transition/build", format!("model {}: {e}", m.name));
                continue;
            }
        };
        let nkeys = tr.keys.len();
        for i in 0..nkeys {
            let wi = tr.keys[i].weight();
            let row = &tr.expansion.data[i];
            let ok = row[i].is_one()
                && (0..nkeys).all(|j| {
                    j == i || row[j].is_zero() || tr.keys[j].weight() < wi
                });
            t.check("transition/unitriangular", ok, || {
                format!("model {}: row of {}", m.name, tr.keys[i].display(m))
            });
        }
        for i in 0..nkeys {
            let mut acc: Vec<Q> = vec![Q::zero(); nkeys];
            for j in 0..nkeys {
                let c = &tr.expansion.data[i][j];
                if c.is_zero() {
                    continue;
                }
                for (k2, inv) in tr.inverse.data[j].iter().enumerate() {
                    if !inv.is_zero() {
                        acc[k2] += c * inv;
                    }
                }
            }
            let ok = (0..nkeys).all(|k2| {
                if k2 == i { acc[k2].is_one() } else { acc[k2].is_zero() }
            });
            t.check("transition/inverse", ok, || {
                format!("model {}: inverse row of {}", m.name, tr.keys[i].display(m))
            });
        }
    }
    t.into_report("transition")
}

// ---------------------------------------------------------------------------
// Suite 11: transport along model isomorphisms
// ---------------------------------------------------------------------------

/// Basis-permuted copies of each model produce the same structure tables
/// under the induced relabeling, and structurally mismatched maps are
/// rejected by the precondition check before any computation runs.
fn suite_transport(ctx: &VerifyCtx) -> SuiteReport {
    let mut t = Tally::new();

    // Rejection cases, always on the fixed builtin pair.
    let p2 = SurfaceModel::builtin("P2").expect("builtin");
    let quad = SurfaceModel::builtin("P1xP1").expect("builtin");
    t.check("transport/reject-names", ModelMap::by_names(&p2, &quad).is_err(), || {
        "name matching P2 → P1xP1 unexpectedly produced a map".to_string()
    });
    let index_map = ModelMap { images: (0..p2.dim()).map(CohClass::basis).collect() };
    t.check(
        "transport/reject-structure",
        index_map.validate(&p2, &quad).is_err(),
        || "index map P2 → P1xP1 unexpectedly passed the precondition".to_string(),
    );
    // Degree-preserving self-map of P1xP1 that rescales the integral.
    let f = quad.basis_index("f").expect("class f");
    let scaled = ModelMap {
        images: (0..quad.dim())
            .map(|c| {
                let img = CohClass::basis(c);
                if c == f || c == quad.point {
                    img.scale(&qz(2))
                } else {
                    img
                }
            })
            .collect(),
    };
    t.check(
        "transport/reject-integral",
        scaled.validate(&quad, &quad).is_err(),
        || "integral-rescaling self-map unexpectedly passed the precondition".to_string(),
    );

    for model in &ctx.models {
        let m = &**model;
        // A degree-preserving permutation: swap one same-degree pair when
        // the model has one, otherwise the identity.
        let mut perm: Vec<usize> = (0..m.dim()).collect();
        'outer: for i in 0..m.dim() {
            for j in (i + 1)..m.dim() {
                if m.degree(i) == m.degree(j) {
                    perm.swap(i, j);
                    break 'outer;
                }
            }
        }
        let permuted = match m.permute_basis(&perm) {
            Ok(p) => p,
            Err(e) => {
                t.checks += 1;
                t.fail("transport/permute", format!("model {}: {e:?}", m.name));
                continue;
            }
        };
        let map = match ModelMap::by_names(m, &permuted) {
            Ok(map) => map,
            Err(e) => {
                t.checks += 1;
                t.fail("transport/permute", format!("model {}: {e}", m.name));
                continue;
            }
        };
        let eng = ctx.engine(model);
        let eng2 = ctx.engine(&permuted);
        let res = verify_transport(&eng, &eng2, &map, 4);
        t.check("transport/products", res.is_ok(), || {
            format!("model {}: {}", m.name, res.as_ref().err().cloned().unwrap_or_default())
        });

        // Structure tables coincide after relabeling keys.
        let relabel: Vec<usize> = (0..m.dim())
            .map(|c| permuted.basis_index(&m.basis[c].name).expect("permuted class"))
            .collect();
        let relabel_key = |key: &PartitionKey| -> PartitionKey {
            let mut out = PartitionKey::empty();
            for (c, parts) in &key.parts {
                out.parts.insert(relabel[*c], parts.clone());
            }
            out
        };
        let mut keys: Vec<PartitionKey> = Vec::new();
        for w in 1..=2u32 {
            keys.extend(PartitionKey::enumerate(m, w));
        }
        for rho in &keys {
            for sigma in &keys {
                if rho.weight() + sigma.weight() > 3 || rho > sigma {
                    continue;
                }
                let ok = match (
                    eng.structure_constants(rho, sigma),
                    eng2.structure_constants(&relabel_key(rho), &relabel_key(sigma)),
                ) {
                    (Ok(row), Ok(row2)) => {
                        let mut expect: StructureRow =
                            row.iter().map(|(nu, d)| (relabel_key(nu), d.clone())).collect();
                        expect.sort_by(|a, b| a.0.cmp(&b.0));
                        row2 == expect
                    }
                    _ => false,
                };
                t.check("transport/tables", ok, || {
                    format!(
                        "model {}: table row {}·{} vs permuted copy",
                        m.name,
                        rho.display(m),
                        sigma.display(m)
                    )
                });
            }
        }
    }
    t.into_report("transport")
}

// ---------------------------------------------------------------------------
// Suite 12: graded dimensions against the product formula
// ---------------------------------------------------------------------------

/// Expand `∏_{m≥1} ∏_d (1 − (−1)^d q^m t^{2(m−1)+d})^{−(−1)^d b_d}` up to
/// `q^max_n` — the generating function for the graded dimensions — and
/// compare with monomial counts per weight and degree.
fn poincare_table(betti: &[u64; 5], max_n: usize) -> Vec<Vec<i64>> {
    let max_d = 4 * max_n;
    let mut poly = vec![vec![0i64; max_d + 1]; max_n + 1];
    poly[0][0] = 1;
    for r in 1..=max_n {
        for (deg, &b) in betti.iter().enumerate() {
            if b == 0 {
                continue;
            }
            let td = 2 * (r - 1) + deg;
            if deg % 2 == 1 {
                // (1 + q^r t^td)^b: b successive multiplications.
                for _ in 0..b {
                    for n in (r..=max_n).rev() {
                        for d in (td..=max_d).rev() {
                            let add = poly[n - r][d - td];
                            poly[n][d] += add;
                        }
                    }
                }
            } else {
                // (1 − q^r t^td)^{−b}: b successive geometric expansions.
                for _ in 0..b {
                    for n in r..=max_n {
                        for d in td..=max_d {
                            let add = poly[n - r][d - td];
                            poly[n][d] += add;
                        }
                    }
                }
            }
        }
    }
    poly
}

fn suite_dimensions(ctx: &VerifyCtx) -> SuiteReport {
    let mut t = Tally::new();
    const MAX_N: usize = 8;
    for model in &ctx.models {
        let m = &**model;
        let table = poincare_table(&m.betti(), MAX_N);
        for n in 0..=MAX_N {
            let mut hist = vec![0i64; 4 * n + 1];
            for mono in enumerate_monomials(m, n as u32) {
                hist[mono.degree(m) as usize] += 1;
            }
            let ok = (0..=4 * MAX_N).all(|d| {
                let counted = if d < hist.len() { hist[d] } else { 0 };
                counted == table[n][d]
            });
            t.check("dimensions/poincare", ok, || {
                let d = (0..=4 * MAX_N)
                    .find(|&d| {
                        (if d < hist.len() { hist[d] } else { 0 }) != table[n][d]
                    })
                    .unwrap();
                format!(
                    "model {}: H^{d}(X^[{n}]) has {} monomials, product formula gives {}",
                    m.name,
                    if d < hist.len() { hist[d] } else { 0 },
                    table[n][d]
                )
            });
        }
        // Tie in the public per-degree counter on small levels.
        for n in 0..=4u32 {
            for d in 0..=(4 * n) {
                t.check(
                    "dimensions/graded-counter",
                    graded_dimension(m, n, d) as i64 == table[n as usize][d as usize],
                    || format!("model {}: graded_dimension({n}, {d})", m.name),
                );
            }
        }
    }
    t.into_report("dimensions")
}

// ---------------------------------------------------------------------------
// Suite 13: worked constants
// ---------------------------------------------------------------------------

/// Two hand-expanded fixtures on P2: the table row
/// `𝔞_{h:(1)}·𝔞_{h:(1)} = 𝔞_{h:(1,1)} + 𝔞_{p:(1)}`, and the boundary image
/// of the unit at level two, `𝔡(1_{X^[2]}) = −(1/2)·a_{−2}(1_X)|0⟩`.
fn suite_worked_constants(ctx: &VerifyCtx) -> SuiteReport {
    let mut t = Tally::new();
    let model = SurfaceModel::builtin("P2").expect("builtin");
    let m = &*model;
    let eng = ctx.engine(&model);

    let h = m.basis_index("h").expect("class h");
    let p = m.basis_index("p").expect("class p");
    let key_h = PartitionKey::single(h, 1);
    let mut key_hh = PartitionKey::empty();
    key_hh.parts.insert(h, vec![1, 1]);
    let mut expect: StructureRow = vec![(PartitionKey::single(p, 1), qz(1)), (key_hh, qz(1))];
    expect.sort_by(|a, b| a.0.cmp(&b.0));
    let ok = match eng.structure_constants(&key_h, &key_h) {
        Ok(row) => row == expect,
        Err(_) => false,
    };
    t.check("worked-constants/degree-two-row", ok, || {
        "P2 table row {h:(1)}·{h:(1)} differs from its hand expansion".to_string()
    });

    let boundary = boundary_apply(m, &FockVector::unit_of(m, 2));
    let hand = FockVector::vacuum().create(m, 2, &m.unit_class()).scale(&qq(-1, 2));
    t.check("worked-constants/boundary-unit", boundary == hand, || {
        "boundary of the level-two unit differs from its hand expansion".to_string()
    });

    t.into_report("worked-constants")
}
