//! The stable ("Hilbert") ring: partition-valued basis keys, `n`-independent
//! structure constants, the generator transition, and transport along
//! isomorphisms of surface models.
//!
//! A key `ρ` assigns a partition to each basis class of `H*(X)`, strict on
//! odd-degree classes (a repeated odd factor vanishes). The class `𝔞_ρ(n)`
//! is the padded creation monomial with one factor `a_{-r}(c)` per part `r`
//! of `ρ(c)`. At a fixed `n` these classes span `H*(X^[n])` but are not
//! linearly independent: adding `j` parts of size 1 on the unit class
//! multiplies the class by the falling factorial
//! `(n−w̄)(n−w̄−1)⋯(n−w̄−j+1)`, where `w̄` is the weight of the key without
//! those parts. Keys free of such parts ("reduced" keys) of weight `≤ n`
//! form a basis of `H*(X^[n])`.
//!
//! Cup products `𝔞_ρ(n)·𝔞_σ(n)` expand over the `𝔞_ν(n)` with coefficients
//! independent of `n`, and the falling-factorial relations make those
//! coefficients unique. [`Engine::decompose_stable`] recovers them from a
//! window of sampled `n` values, solving the (triangular) falling-factorial
//! system per reduced key and checking the leftover samples exactly — every
//! extraction re-verifies its own `n`-independence. The resulting ring is
//! free super-commutative on the single-part keys;
//! [`Engine::generator_transition`] exhibits the unitriangular change of
//! basis between generator monomials and the `𝔞_ν`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::engine::Engine;
use crate::fock::{CreationFactor, FockVector};
use crate::linalg::Mat;
use crate::rational::{format_q, parse_q, Q};
use crate::surface::{CohClass, SurfaceModel};

/// A partition-valued function on the basis classes: `class index →
/// partition` (parts ascending, empty partitions not stored).
#[derive(Clone, Debug, PartialEq, Eq, Default, Hash)]
pub struct PartitionKey {
    pub parts: BTreeMap<usize, Vec<u32>>,
}

impl PartitionKey {
    pub fn empty() -> PartitionKey {
        PartitionKey { parts: BTreeMap::new() }
    }

    /// The key with the single part `r` on class `c`.
    pub fn single(c: usize, r: u32) -> PartitionKey {
        let mut parts = BTreeMap::new();
        parts.insert(c, vec![r]);
        PartitionKey { parts }
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Total weight `∥ρ∥ = Σ parts`.
    pub fn weight(&self) -> u32 {
        self.parts.values().flatten().sum()
    }

    /// The factor sequence `(c, r)` in canonical order: class-major, parts
    /// ascending.
    pub fn factor_sequence(&self) -> Vec<(usize, u32)> {
        let mut out = Vec::new();
        for (c, rs) in &self.parts {
            for r in rs {
                out.push((*c, *r));
            }
        }
        out
    }

    /// Build a key from creation factors.
    pub fn from_factors(factors: &[CreationFactor]) -> PartitionKey {
        let mut parts: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
        for f in factors {
            parts.entry(f.c).or_default().push(f.r);
        }
        for rs in parts.values_mut() {
            rs.sort_unstable();
        }
        PartitionKey { parts }
    }

    /// Classwise concatenation of the partitions (`𝔞_{ρ∪σ}` is the leading
    /// term of `𝔞_ρ·𝔞_σ`).
    pub fn union(&self, other: &PartitionKey) -> PartitionKey {
        let mut out = self.clone();
        for (c, rs) in &other.parts {
            let e = out.parts.entry(*c).or_default();
            e.extend(rs.iter().copied());
            e.sort_unstable();
        }
        out
    }

    /// `true` when the key has no part 1 on the unit class. Reduced keys of
    /// weight `≤ n` are a basis of `H*(X^[n])`; general keys only span.
    pub fn is_reduced(&self, model: &SurfaceModel) -> bool {
        self.parts
            .get(&model.unit)
            .is_none_or(|rs| !rs.contains(&1))
    }

    /// Split off the parts of size 1 on the unit class: the reduced key and
    /// the count of removed parts.
    pub fn reduced(&self, model: &SurfaceModel) -> (PartitionKey, u32) {
        let mut out = self.clone();
        let mut removed = 0;
        if let Some(rs) = out.parts.get_mut(&model.unit) {
            let before = rs.len();
            rs.retain(|&r| r != 1);
            removed = (before - rs.len()) as u32;
            if rs.is_empty() {
                out.parts.remove(&model.unit);
            }
        }
        (out, removed)
    }

    /// Add `j` parts of size 1 on the unit class.
    pub fn with_unit_parts(&self, model: &SurfaceModel, j: u32) -> PartitionKey {
        if j == 0 {
            return self.clone();
        }
        let mut out = self.clone();
        let rs = out.parts.entry(model.unit).or_default();
        for _ in 0..j {
            rs.push(1);
        }
        rs.sort_unstable();
        out
    }

    /// Cohomological degree of `𝔞_ρ(n)` (independent of `n`).
    pub fn degree(&self, model: &SurfaceModel) -> u32 {
        self.factor_sequence()
            .iter()
            .map(|(c, r)| 2 * (r - 1) + model.degree(*c) as u32)
            .sum()
    }

    pub fn parity(&self, model: &SurfaceModel) -> u8 {
        (self.degree(model) % 2) as u8
    }

    /// Structural validity: class indices in range, parts positive and
    /// ascending, odd classes strict.
    pub fn validate(&self, model: &SurfaceModel) -> Result<(), String> {
        for (c, rs) in &self.parts {
            if *c >= model.dim() {
                return Err(format!("key refers to basis index {c} out of range"));
            }
            if rs.is_empty() {
                return Err(format!("empty partition stored for class {}", model.basis[*c].name));
            }
            if rs.iter().any(|&r| r == 0) {
                return Err(format!("zero part on class {}", model.basis[*c].name));
            }
            if rs.windows(2).any(|w| w[0] > w[1]) {
                return Err(format!("parts not ascending on class {}", model.basis[*c].name));
            }
            if model.parity(*c) == 1 && rs.windows(2).any(|w| w[0] == w[1]) {
                return Err(format!(
                    "repeated part on odd class {} (the class would vanish)",
                    model.basis[*c].name
                ));
            }
        }
        Ok(())
    }

    /// All keys of the given weight.
    pub fn enumerate(model: &SurfaceModel, weight: u32) -> Vec<PartitionKey> {
        Self::enumerate_impl(model, weight, false)
    }

    /// All reduced keys of the given weight (no part 1 on the unit class).
    pub fn enumerate_reduced(model: &SurfaceModel, weight: u32) -> Vec<PartitionKey> {
        Self::enumerate_impl(model, weight, true)
    }

    fn enumerate_impl(model: &SurfaceModel, weight: u32, reduced: bool) -> Vec<PartitionKey> {
        fn partitions(total: u32, min: u32, strict: bool, out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>) {
            if total == 0 {
                out.push(cur.clone());
                return;
            }
            let start = min.max(1);
            for r in start..=total {
                cur.push(r);
                partitions(total - r, if strict { r + 1 } else { r }, strict, out, cur);
                cur.pop();
            }
        }
        fn go(
            model: &SurfaceModel,
            reduced: bool,
            class: usize,
            remaining: u32,
            cur: &mut PartitionKey,
            out: &mut Vec<PartitionKey>,
        ) {
            if class == model.dim() {
                if remaining == 0 {
                    out.push(cur.clone());
                }
                return;
            }
            for w in 0..=remaining {
                if w == 0 {
                    go(model, reduced, class + 1, remaining, cur, out);
                    continue;
                }
                let mut parts = Vec::new();
                let min = if reduced && class == model.unit { 2 } else { 1 };
                partitions(w, min, model.parity(class) == 1, &mut parts, &mut Vec::new());
                for p in parts {
                    cur.parts.insert(class, p);
                    go(model, reduced, class + 1, remaining - w, cur, out);
                    cur.parts.remove(&class);
                }
            }
        }
        let mut out = Vec::new();
        go(model, reduced, 0, weight, &mut PartitionKey::empty(), &mut out);
        out.sort();
        out
    }

    /// Stable textual form for cache keys.
    pub fn cache_tag(&self) -> String {
        let mut s = String::new();
        for (c, rs) in &self.parts {
            s.push_str(&format!("{c}:"));
            for r in rs {
                s.push_str(&format!("{r},"));
            }
            s.push(';');
        }
        s
    }

    /// Human-readable form `{name:(r,…); …}`.
    pub fn display(&self, model: &SurfaceModel) -> String {
        if self.parts.is_empty() {
            return "{}".to_string();
        }
        let inner: Vec<String> = self
            .parts
            .iter()
            .map(|(c, rs)| {
                let parts: Vec<String> = rs.iter().map(|r| r.to_string()).collect();
                format!("{}:({})", model.basis[*c].name, parts.join(","))
            })
            .collect();
        format!("{{{}}}", inner.join("; "))
    }

    /// JSON form: sorted array of `{"c": basis name, "parts": [..]}`.
    pub fn to_json(&self, model: &SurfaceModel) -> Value {
        let arr: Vec<Value> = self
            .parts
            .iter()
            .map(|(c, rs)| json!({"c": model.basis[*c].name, "parts": rs}))
            .collect();
        Value::Array(arr)
    }

    pub fn from_json(model: &SurfaceModel, value: &Value) -> Result<PartitionKey, String> {
        let arr = value.as_array().ok_or("key must be an array")?;
        let mut parts: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
        for e in arr {
            let name = e
                .get("c")
                .and_then(|v| v.as_str())
                .ok_or("key entry missing class name \"c\"")?;
            let c = model
                .basis_index(name)
                .ok_or(format!("unknown basis class {name:?}"))?;
            let rs: Vec<u32> = e
                .get("parts")
                .and_then(|v| v.as_array())
                .ok_or("key entry missing \"parts\"")?
                .iter()
                .map(|x| {
                    x.as_u64()
                        .filter(|&r| r >= 1)
                        .map(|r| r as u32)
                        .ok_or("parts must be positive integers".to_string())
                })
                .collect::<Result<_, _>>()?;
            if rs.is_empty() {
                continue;
            }
            if parts.contains_key(&c) {
                return Err(format!("class {name:?} listed twice"));
            }
            let mut rs = rs;
            rs.sort_unstable();
            parts.insert(c, rs);
        }
        Ok(PartitionKey { parts })
    }
}

/// Graded order: weight first, then the stored map lexicographically.
impl Ord for PartitionKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.weight(), &self.parts).cmp(&(other.weight(), &other.parts))
    }
}

impl PartialOrd for PartitionKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// The expansion of a product in the stable ring, sorted by key.
pub type StructureRow = Vec<(PartitionKey, Q)>;

/// JSON form of a structure row: array of `{"nu": key, "d": "p/q"}`.
pub fn row_to_json(model: &SurfaceModel, row: &StructureRow) -> Value {
    let arr: Vec<Value> = row
        .iter()
        .map(|(nu, d)| json!({"nu": nu.to_json(model), "d": format_q(d)}))
        .collect();
    Value::Array(arr)
}

pub fn row_from_json(model: &SurfaceModel, value: &Value) -> Result<StructureRow, String> {
    let arr = value.as_array().ok_or("row must be an array")?;
    let mut out = StructureRow::new();
    for e in arr {
        let nu = PartitionKey::from_json(model, e.get("nu").ok_or("row entry missing \"nu\"")?)?;
        let d = parse_q(e.get("d").and_then(|v| v.as_str()).ok_or("row entry missing \"d\"")?)?;
        out.push((nu, d));
    }
    Ok(out)
}

/// `x(x−1)⋯(x−j+1)` as a rational.
fn falling(x: i64, j: usize) -> Q {
    let mut out = Q::one();
    for t in 0..j as i64 {
        out *= Q::from_integer((x - t).into());
    }
    out
}

/// Result of the generator-transition computation at a weight bound.
pub struct Transition {
    /// All keys of weight `≤ W`, graded order.
    pub keys: Vec<PartitionKey>,
    /// `expansion[i][j]`: coefficient of `𝔞_{keys[j]}` in the generator
    /// monomial `∏ 𝔞_{r,c}` assembled from `keys[i]`.
    pub expansion: Mat,
    /// Inverse transition (`𝔞` classes in terms of generator monomials).
    pub inverse: Mat,
}

impl Engine {
    /// Expand a family `n ↦ v(n)` of weight-`n` vectors over the stable
    /// classes: find the unique `n`-independent coefficients `d_ν` with
    /// `v(n) = Σ_ν d_ν 𝔞_ν(n)` for every `n`, the keys `ν` running over
    /// weight `≤ max_weight`.
    ///
    /// Sampling: `v(n)` is decomposed over the reduced-key basis for
    /// `n = 0 ..= max_weight+1`. For a reduced key `ν̄` of weight `w̄` the
    /// fixed-`n` coefficient is `Σ_j d_{ν̄+j·(1,1_X)}·(n−w̄)_j`, so the rows
    /// `n = w̄ ..= max_weight` form a triangular system for the `d`; the
    /// remaining sample(s) overdetermine it and are checked exactly, making
    /// every extraction verify its own stability. Inputs whose expansion
    /// needs a key of weight `> max_weight` are reported as errors.
    pub fn decompose_stable(
        &self,
        f: &dyn Fn(u32) -> Result<FockVector, String>,
        max_weight: u32,
    ) -> Result<StructureRow, String> {
        let model = &*self.model;
        let top = max_weight + 1;
        let mut samples: Vec<BTreeMap<PartitionKey, Q>> = Vec::with_capacity(top as usize + 1);
        for n in 0..=top {
            samples.push(self.decompose_intrinsic(&f(n)?, n));
        }
        let mut reduced: BTreeSet<&PartitionKey> = BTreeSet::new();
        for s in &samples {
            reduced.extend(s.keys());
        }
        let mut acc: BTreeMap<PartitionKey, Q> = BTreeMap::new();
        for nu_bar in reduced {
            let w_bar = nu_bar.weight();
            if w_bar > max_weight {
                return Err(format!(
                    "stable expansion escapes its weight bound: key {} of weight {w_bar} > {max_weight}",
                    nu_bar.display(model)
                ));
            }
            let jmax = (max_weight - w_bar) as usize;
            let coeff_at = |n: u32| -> Q {
                samples[n as usize]
                    .get(nu_bar)
                    .cloned()
                    .unwrap_or_else(Q::zero)
            };
            // Rows n = w̄+x for x = 0..=jmax: the matrix ((x)_j) is lower
            // triangular with diagonal x!, hence nonsingular.
            let rows: Vec<Vec<Q>> = (0..=jmax)
                .map(|x| (0..=jmax).map(|j| falling(x as i64, j)).collect())
                .collect();
            let rhs: Vec<Q> = (0..=jmax).map(|x| coeff_at(w_bar + x as u32)).collect();
            let d = Mat::from_rows(rows)
                .solve(&rhs)
                .expect("falling-factorial sample matrix is triangular nonsingular");
            for n in (max_weight + 1)..=top {
                let x = (n - w_bar) as i64;
                let mut pred = Q::zero();
                for (j, dj) in d.iter().enumerate() {
                    pred += dj * falling(x, j);
                }
                if pred != coeff_at(n) {
                    return Err(format!(
                        "coefficients are not stable: key {} deviates at n = {n}",
                        nu_bar.display(model)
                    ));
                }
            }
            for (j, dj) in d.into_iter().enumerate() {
                if !dj.is_zero() {
                    acc.insert(nu_bar.with_unit_parts(model, j as u32), dj);
                }
            }
        }
        Ok(acc.into_iter().collect())
    }

    /// Structure constants `𝔞_ρ · 𝔞_σ = Σ_ν d^ν_{ρσ} 𝔞_ν` of the stable
    /// ring: the unique coefficients valid for every `n` at once.
    pub fn structure_constants(
        &self,
        rho: &PartitionKey,
        sigma: &PartitionKey,
    ) -> Result<StructureRow, String> {
        rho.validate(&self.model)?;
        sigma.validate(&self.model)?;
        let cache_key = (rho.clone(), sigma.clone());
        if let Some(row) = self.sc_cache.lock().unwrap().get(&cache_key) {
            return Ok(row.clone());
        }
        let store_key = format!(
            "sc-v2-{}-{}|{}",
            self.model.fingerprint,
            rho.cache_tag(),
            sigma.cache_tag()
        );
        if let Some(store) = &self.store {
            if let Some(v) = store.get(&store_key) {
                if let Ok(row) = row_from_json(&self.model, &v) {
                    self.sc_cache.lock().unwrap().insert(cache_key, row.clone());
                    return Ok(row);
                }
            }
        }
        let w = rho.weight() + sigma.weight();
        let row = self.decompose_stable(
            &|n| {
                let a = self.heisenberg_class(rho, n);
                let b = self.heisenberg_class(sigma, n);
                self.cup(&a, &b, n)
            },
            w,
        )?;
        self.sc_cache.lock().unwrap().insert(cache_key, row.clone());
        if let Some(store) = &self.store {
            store.put(&store_key, &row_to_json(&self.model, &row));
        }
        Ok(row)
    }

    /// Check the stable expansion against direct products: reconstruct
    /// `Σ d_ν 𝔞_ν(n)` at each given `n` and compare with `𝔞_ρ(n)·𝔞_σ(n)`
    /// exactly.
    pub fn verify_stability(
        &self,
        rho: &PartitionKey,
        sigma: &PartitionKey,
        ns: &[u32],
    ) -> Result<StructureRow, String> {
        let row = self.structure_constants(rho, sigma)?;
        for &n in ns {
            let direct = self.cup(
                &self.heisenberg_class(rho, n),
                &self.heisenberg_class(sigma, n),
                n,
            )?;
            let mut recon = FockVector::zero();
            for (nu, d) in &row {
                recon = recon.add(&self.heisenberg_class(nu, n).scale(d));
            }
            if recon != direct {
                return Err(format!(
                    "structure constants for {}·{} fail to reproduce the product at n = {n}",
                    rho.display(&self.model),
                    sigma.display(&self.model)
                ));
            }
        }
        Ok(row)
    }

    /// Multiply an expansion by a single generator key on the right.
    fn stable_mul_row(
        &self,
        row: &BTreeMap<PartitionKey, Q>,
        gen: &PartitionKey,
    ) -> Result<BTreeMap<PartitionKey, Q>, String> {
        let mut out: BTreeMap<PartitionKey, Q> = BTreeMap::new();
        for (nu, c) in row {
            for (mu, d) in self.structure_constants(nu, gen)? {
                let entry = out.entry(mu).or_insert_with(Q::zero);
                *entry += c * &d;
            }
        }
        out.retain(|_, c| !c.is_zero());
        Ok(out)
    }

    /// Expand every generator monomial of weight `≤ max_weight` over the
    /// `𝔞_ν` basis, assert the matrix is unitriangular for the weight
    /// filtration (diagonal 1, off-diagonal entries only at strictly smaller
    /// weight), and invert it.
    pub fn generator_transition(&self, max_weight: u32) -> Result<Transition, String> {
        let model = &*self.model;
        let mut keys: Vec<PartitionKey> = Vec::new();
        for w in 0..=max_weight {
            keys.extend(PartitionKey::enumerate(model, w));
        }
        let index: BTreeMap<&PartitionKey, usize> =
            keys.iter().enumerate().map(|(i, k)| (k, i)).collect();
        let dim = keys.len();
        let mut mat = Mat::new(dim, dim);
        for (i, key) in keys.iter().enumerate() {
            let mut row: BTreeMap<PartitionKey, Q> = BTreeMap::new();
            row.insert(PartitionKey::empty(), Q::one());
            for (c, r) in key.factor_sequence() {
                row = self.stable_mul_row(&row, &PartitionKey::single(c, r))?;
            }
            for (nu, q) in row {
                if nu == *key {
                    if q != Q::one() {
                        return Err(format!(
                            "diagonal entry for {} is {} ≠ 1",
                            key.display(model),
                            format_q(&q)
                        ));
                    }
                } else if nu.weight() >= key.weight() {
                    return Err(format!(
                        "non-triangular entry: monomial for {} contains {}",
                        key.display(model),
                        nu.display(model)
                    ));
                }
                let j = *index
                    .get(&nu)
                    .ok_or_else(|| format!("expansion leaves the weight range: {nu:?}"))?;
                mat.data[i][j] = q;
            }
        }
        let inverse = mat
            .inverse()
            .ok_or("transition matrix is singular (it cannot be)")?;
        Ok(Transition { keys, expansion: mat, inverse })
    }
}

/// A degree-preserving linear map of surface models given by images of the
/// domain's basis classes.
pub struct ModelMap {
    pub images: Vec<CohClass>,
}

impl ModelMap {
    /// The map sending each basis class of `from` to the same-named class of
    /// `to` (when the models are relabelings of each other).
    pub fn by_names(from: &SurfaceModel, to: &SurfaceModel) -> Result<ModelMap, String> {
        let images = from
            .basis
            .iter()
            .map(|b| {
                to.basis_index(&b.name)
                    .map(CohClass::basis)
                    .ok_or(format!("class {:?} missing in target model", b.name))
            })
            .collect::<Result<_, _>>()?;
        Ok(ModelMap { images })
    }

    pub fn apply(&self, a: &CohClass) -> CohClass {
        let mut out = CohClass::zero();
        for (i, c) in &a.0 {
            out = out.add(&self.images[*i].scale(c));
        }
        out
    }

    /// Transport a Fock vector along the map (multilinear in the factors).
    pub fn transport(&self, from: &SurfaceModel, to: &SurfaceModel, v: &FockVector) -> FockVector {
        let _ = from;
        let mut out = FockVector::zero();
        for (mono, coeff) in &v.terms {
            let mut w = FockVector::vacuum();
            for f in mono.factors.iter().rev() {
                w = w.create(to, f.r, &self.images[f.c]);
            }
            out = out.add(&w.scale(coeff));
        }
        out
    }

    /// Check the map is an isomorphism of the full surface data: bijective,
    /// degree-preserving, multiplicative, unital, integral-preserving, and
    /// matching canonical classes (the Euler classes then match
    /// automatically and are asserted).
    pub fn validate(&self, from: &SurfaceModel, to: &SurfaceModel) -> Result<(), String> {
        if from.dim() != to.dim() {
            return Err(format!(
                "dimension mismatch: {} vs {}",
                from.dim(),
                to.dim()
            ));
        }
        if self.images.len() != from.dim() {
            return Err("map must give one image per basis class".to_string());
        }
        for (i, img) in self.images.iter().enumerate() {
            if img.is_zero() {
                return Err(format!("basis class {} maps to zero", from.basis[i].name));
            }
            match to.homogeneous_degree(img) {
                Some(d) if d == from.degree(i) => {}
                _ => {
                    return Err(format!(
                        "map does not preserve the degree of {}",
                        from.basis[i].name
                    ))
                }
            }
        }
        let rows: Vec<Vec<Q>> = (0..from.dim())
            .map(|j| {
                (0..to.dim())
                    .map(|i| self.images[j].0.get(&i).cloned().unwrap_or_else(Q::zero))
                    .collect()
            })
            .collect();
        if Mat::from_rows(rows).rank() != from.dim() {
            return Err("map is not bijective".to_string());
        }
        for i in 0..from.dim() {
            for j in 0..from.dim() {
                let lhs = self.apply(from.mul_basis(i, j));
                let rhs = to.mul(&self.images[i], &self.images[j]);
                if lhs != rhs {
                    return Err(format!(
                        "map is not multiplicative on ({}, {})",
                        from.basis[i].name, from.basis[j].name
                    ));
                }
            }
        }
        if self.apply(&from.unit_class()) != to.unit_class() {
            return Err("map does not preserve the unit".to_string());
        }
        for i in 0..from.dim() {
            if to.integrate(&self.images[i]) != *from.integral_basis(i) {
                return Err(format!(
                    "map does not preserve the integral of {}",
                    from.basis[i].name
                ));
            }
        }
        if self.apply(&from.canonical_class) != to.canonical_class {
            return Err("map does not match the canonical classes".to_string());
        }
        // Euler classes are determined by the rest of the data.
        assert_eq!(
            self.apply(&from.euler_class),
            to.euler_class,
            "internal: euler classes should be forced to match"
        );
        Ok(())
    }
}

/// Verify that cup products correspond under a validated model isomorphism,
/// for all reduced key pairs with `∥ρ∥ + ∥σ∥ ≤ max_weight`.
pub fn verify_transport(
    eng_from: &Engine,
    eng_to: &Engine,
    map: &ModelMap,
    max_weight: u32,
) -> Result<(), String> {
    map.validate(&eng_from.model, &eng_to.model)?;
    let from = &*eng_from.model;
    let to = &*eng_to.model;
    for w1 in 1..=max_weight.saturating_sub(1) {
        for rho in PartitionKey::enumerate_reduced(from, w1) {
            for w2 in 1..=(max_weight - w1) {
                for sigma in PartitionKey::enumerate_reduced(from, w2) {
                    let n = w1 + w2;
                    let a = eng_from.heisenberg_class(&rho, n);
                    let b = eng_from.heisenberg_class(&sigma, n);
                    let product = eng_from.cup(&a, &b, n)?;
                    let lhs = map.transport(from, to, &product);
                    let rhs = eng_to.cup(
                        &map.transport(from, to, &a),
                        &map.transport(from, to, &b),
                        n,
                    )?;
                    if lhs != rhs {
                        return Err(format!(
                            "transported product differs for {}·{}",
                            rho.display(from),
                            sigma.display(from)
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{qq, qz};
    use crate::surface::SurfaceModel;

    fn engine(name: &str) -> Engine {
        Engine::new(crate::surface::SurfaceModel::builtin(name).unwrap())
    }

    #[test]
    fn key_enumeration_counts() {
        let eng = engine("P2");
        let m = &*eng.model;
        // Weight 1: one single part per class.
        assert_eq!(PartitionKey::enumerate(m, 1).len(), 3);
        assert_eq!(PartitionKey::enumerate_reduced(m, 1).len(), 2);
        // Weight 2: per class (2) and (1,1), plus mixed (1)(1) per class pair.
        assert_eq!(PartitionKey::enumerate(m, 2).len(), 9);
        assert_eq!(PartitionKey::enumerate_reduced(m, 2).len(), 6);
        // Keys of weight exactly w biject with creation monomials of weight w.
        for name in SurfaceModel::BUILTIN_NAMES {
            let eng = engine(name);
            let m = &*eng.model;
            for w in 0..=5u32 {
                assert_eq!(
                    PartitionKey::enumerate(m, w).len(),
                    crate::fock::enumerate_monomials(m, w).len(),
                    "{name} at weight {w}"
                );
            }
        }
        // Odd model: odd classes strict.
        let engo = engine("Abelianlike");
        let mo = &*engo.model;
        for key in PartitionKey::enumerate(mo, 3) {
            key.validate(mo).unwrap();
        }
    }

    #[test]
    fn reduced_keys_biject_with_monomials() {
        // Reduced keys of weight ≤ n ↔ canonical monomials of weight n.
        for name in SurfaceModel::BUILTIN_NAMES {
            let eng = engine(name);
            let m = &*eng.model;
            for n in 1..=4u32 {
                let monos = crate::fock::enumerate_monomials(m, n);
                let keys: usize = (0..=n)
                    .map(|w| PartitionKey::enumerate_reduced(m, w).len())
                    .sum();
                assert_eq!(monos.len(), keys, "{name} at n={n}");
            }
        }
    }

    #[test]
    fn reduction_helpers() {
        let eng = engine("P2");
        let m = &*eng.model;
        let h = m.basis_index("h").unwrap();
        let key = PartitionKey::single(h, 2).with_unit_parts(m, 2);
        assert_eq!(key.weight(), 4);
        assert!(!key.is_reduced(m));
        let (red, j) = key.reduced(m);
        assert_eq!(j, 2);
        assert!(red.is_reduced(m));
        assert_eq!(red, PartitionKey::single(h, 2));
        // A part of size ≥ 2 on the unit class is not padding.
        let big = PartitionKey::single(m.unit, 2);
        assert!(big.is_reduced(m));
    }

    #[test]
    fn worked_product_constants() {
        // On P2: 𝔞_{(1,h)}·𝔞_{(1,h)} = 𝔞_{h:(1,1)} + 𝔞_{p:(1)}.
        let eng = engine("P2");
        let m = &*eng.model;
        let h = m.basis_index("h").unwrap();
        let p = m.basis_index("p").unwrap();
        let key_h = PartitionKey::single(h, 1);
        let row = eng.structure_constants(&key_h, &key_h).unwrap();
        let mut expect_hh = PartitionKey::empty();
        expect_hh.parts.insert(h, vec![1, 1]);
        let expect = vec![
            (PartitionKey::single(p, 1), qz(1)),
            (expect_hh, qz(1)),
        ];
        let sorted_expect: StructureRow = {
            let mut e = expect;
            e.sort_by(|a, b| a.0.cmp(&b.0));
            e
        };
        assert_eq!(row, sorted_expect);
    }

    #[test]
    fn unit_part_multiplication_rule() {
        // 𝔞_η·𝔞_ν = 𝔞_{ν∪η} + ∥ν∥·𝔞_ν where η = {1_X:(1)}, for every ν.
        for name in ["P2", "Abelianlike"] {
            let eng = engine(name);
            let m = &*eng.model;
            let eta = PartitionKey::single(m.unit, 1);
            let mut nus = vec![eta.clone()];
            nus.extend(PartitionKey::enumerate(m, 2));
            for nu in nus {
                let row = eng.structure_constants(&eta, &nu).unwrap();
                let mut expect: StructureRow = vec![
                    (nu.union(&eta), Q::one()),
                    (nu.clone(), qz(nu.weight() as i64)),
                ];
                expect.sort_by(|a, b| a.0.cmp(&b.0));
                assert_eq!(row, expect, "{name}: η·{}", nu.display(m));
            }
        }
    }

    #[test]
    fn invalid_keys_rejected() {
        let engo = engine("Abelianlike");
        let mo = &*engo.model;
        let x = mo.basis_index("x").unwrap();
        let mut bad_odd = PartitionKey::empty();
        bad_odd.parts.insert(x, vec![1, 1]);
        assert!(bad_odd.validate(mo).is_err());
        assert!(engo.structure_constants(&bad_odd, &bad_odd).is_err());
        let oob = PartitionKey::single(mo.dim(), 1);
        assert!(oob.validate(mo).is_err());
    }

    #[test]
    fn stability_small() {
        let eng = engine("P2");
        let m = &*eng.model;
        let h = m.basis_index("h").unwrap();
        let key = PartitionKey::single(h, 1);
        eng.verify_stability(&key, &key, &[3, 4]).unwrap();
        let key2 = PartitionKey::single(h, 2);
        eng.verify_stability(&key, &key2, &[4, 5]).unwrap();
    }

    #[test]
    fn structure_row_weight_five() {
        // 𝔞_{(3,1)}·𝔞_{(2,1)} on P2 — a row whose extraction exercises the
        // deep commutator recursion (it used to fail the built-in stability
        // check through a truncation defect in the operator derivative).
        let eng = engine("P2");
        let m = &*eng.model;
        let h = m.basis_index("h").unwrap();
        let p = m.basis_index("p").unwrap();
        let k3 = PartitionKey::single(m.unit, 3);
        let k2 = PartitionKey::single(m.unit, 2);
        let row = eng.structure_constants(&k3, &k2).unwrap();
        let mut expect: StructureRow = vec![
            (
                {
                    let mut k = PartitionKey::single(m.unit, 1);
                    k.parts.insert(p, vec![2]);
                    k
                },
                qz(-6),
            ),
            (
                {
                    let mut k = PartitionKey::single(m.unit, 2);
                    k.parts.insert(p, vec![1]);
                    k
                },
                qz(-6),
            ),
            (
                {
                    let mut k = PartitionKey::empty();
                    k.parts.insert(h, vec![1, 2]);
                    k
                },
                qz(-6),
            ),
            (PartitionKey::single(h, 3), qz(18)),
            (PartitionKey::single(m.unit, 4), qz(6)),
            (k3.union(&k2), qz(1)),
        ];
        expect.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(row, expect);
    }

    #[test]
    fn transition_unitriangular_small() {
        for name in ["P2", "Abelianlike"] {
            let eng = engine(name);
            let t = eng.generator_transition(3).unwrap();
            let dim = t.keys.len();
            // Diagonal ones.
            for i in 0..dim {
                assert_eq!(t.expansion.data[i][i], qz(1));
            }
            // Inverse really inverts.
            let prod = t.expansion.mul(&t.inverse);
            assert_eq!(prod, crate::linalg::Mat::identity(dim));
        }
    }

    #[test]
    fn transport_identity_and_permutation() {
        let eng = engine("P1xP1");
        let m = eng.model.clone();
        // Identity transport.
        let id = ModelMap {
            images: (0..m.dim()).map(CohClass::basis).collect(),
        };
        verify_transport(&eng, &eng, &id, 3).unwrap();
        // Permuted copy via name matching.
        let pm = m.permute_basis(&[0, 2, 1, 3]).unwrap();
        let eng2 = Engine::new(pm.clone());
        let map = ModelMap::by_names(&m, &pm).unwrap();
        verify_transport(&eng, &eng2, &map, 3).unwrap();
    }

    #[test]
    fn transport_rejects_non_isomorphisms() {
        let p2 = engine("P2");
        let quad = engine("P1xP1");
        // Dimension mismatch.
        let map = ModelMap {
            images: (0..p2.model.dim()).map(CohClass::basis).collect(),
        };
        assert!(map.validate(&p2.model, &quad.model).is_err());
        // Degree-preserving ring map P1xP1 → P1xP1 that scales the integral.
        let m = &*quad.model;
        let f = m.basis_index("f").unwrap();
        let g = m.basis_index("g").unwrap();
        let p = m.basis_index("p").unwrap();
        let bad = ModelMap {
            images: vec![
                CohClass::basis(0),
                CohClass::basis(f).scale(&qz(2)),
                CohClass::basis(g),
                CohClass::basis(p).scale(&qz(2)),
            ],
        };
        // Multiplicative and bijective, but ∫ not preserved.
        assert!(bad.validate(m, m).is_err());
        // Swapping f and g preserves everything (K is symmetric in f, g).
        let swap = ModelMap {
            images: vec![
                CohClass::basis(0),
                CohClass::basis(g),
                CohClass::basis(f),
                CohClass::basis(p),
            ],
        };
        swap.validate(m, m).unwrap();
    }

    #[test]
    fn key_json_roundtrip() {
        let eng = engine("Abelianlike");
        let m = &*eng.model;
        let x = m.basis_index("x").unwrap();
        let y = m.basis_index("y").unwrap();
        let mut key = PartitionKey::empty();
        key.parts.insert(x, vec![1, 3]);
        key.parts.insert(y, vec![2]);
        let j = key.to_json(m);
        let back = PartitionKey::from_json(m, &j).unwrap();
        assert_eq!(back, key);
        assert_eq!(key.weight(), 6);
        let row: StructureRow = vec![(key, qq(1, 2))];
        let rj = row_to_json(m, &row);
        assert_eq!(row_from_json(m, &rj).unwrap(), row);
    }
}
