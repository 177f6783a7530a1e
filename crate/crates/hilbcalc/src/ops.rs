//! Operator calculus on the Fock space.
//!
//! A [`MonomialOperator`] is a product of indexed operators
//! `a_{i_1} ··· a_{i_k}` attached to a class on `X^k` (its slots feed the
//! letters in order). An [`OperatorSum`] stores such terms in normal order:
//! indices ascending, so creation letters (negative index) stand left of
//! annihilation letters. Reordering letters uses the super-commutation rule
//!
//! `a_n(γ) a_m(δ) = (−1)^{|γ||δ|} a_m(δ) a_n(γ) − n·δ_{n+m}·∫(γδ)`
//!
//! so every term of a sum is reduced to normal order exactly, spawning
//! contraction corrections along the way.
//!
//! On top of this the module implements:
//! - the derivative of an operator (its commutator with the boundary
//!   operator), one letter at a time;
//! - the Virasoro-type operators realizing that derivative on single
//!   letters, and the boundary operator itself on Fock vectors;
//! - commutators `[𝔊_k(α), a_{-r}(β)]` of Chern-character components with
//!   creation operators, by a recursion that lowers `r`;
//! - the action of `𝔊_k(α)` on arbitrary Fock vectors via a finite
//!   commutator expansion (the operators vanish on the vacuum and have
//!   vanishing `(k+2)`-fold commutators with creation operators).
//!
//! Truncation: every expansion carries a budget `P` bounding the retained
//! annihilation weight `Σ max(0, i_j)` per term. A normal-ordered term with
//! annihilation weight `q` kills all vectors of weight `< q`, so a sum
//! truncated at `P` acts exactly on vectors of weight `≤ P`.

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::engine::Engine;
use crate::fock::{FockVector, HeisenbergMonomial};
use crate::rational::{factorial, format_q, parse_q, Q};
use crate::surface::{CohClass, SurfaceModel, TensorClass};

use std::collections::BTreeMap;

/// Sum of annihilation indices: the weight below which a normal-ordered term
/// acts as zero.
pub fn annihilation_weight(indices: &[i64]) -> i64 {
    indices.iter().filter(|&&i| i > 0).sum()
}

/// A finite sum of indexed operator monomials in normal order.
///
/// Keys are index vectors (ascending); the attached tensor holds every slot
/// tuple with its rational coefficient. The empty index vector is a scalar
/// multiple of the identity.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct OperatorSum {
    pub terms: BTreeMap<Vec<i64>, TensorClass>,
}

impl OperatorSum {
    pub fn zero() -> OperatorSum {
        OperatorSum { terms: BTreeMap::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The single letter `a_{index}(class)`.
    pub fn single(model: &SurfaceModel, index: i64, class: &CohClass) -> OperatorSum {
        assert!(index != 0, "operator index must be nonzero");
        let mut out = OperatorSum::zero();
        for (c, q) in &class.0 {
            out.push_term(model, vec![index], vec![*c], q.clone());
        }
        out
    }

    /// A product of letters `a_{i_1}(α_1) ··· a_{i_k}(α_k)` in the written
    /// order (the attached tensor is `α_1 ⊗ ··· ⊗ α_k`).
    pub fn from_letters(model: &SurfaceModel, letters: &[(i64, CohClass)]) -> OperatorSum {
        let mut tuples: Vec<(Vec<usize>, Q)> = vec![(Vec::new(), Q::one())];
        for (_, class) in letters {
            let mut next = Vec::new();
            for (slots, q) in &tuples {
                for (c, qc) in &class.0 {
                    let mut s = slots.clone();
                    s.push(*c);
                    next.push((s, q * qc));
                }
            }
            tuples = next;
        }
        let indices: Vec<i64> = letters.iter().map(|(i, _)| *i).collect();
        assert!(indices.iter().all(|&i| i != 0), "operator index must be nonzero");
        let mut out = OperatorSum::zero();
        for (slots, q) in tuples {
            out.push_term(model, indices.clone(), slots, q);
        }
        out
    }

    /// A term with an explicit tensor attached to the index vector (written
    /// order; will be normal-ordered).
    pub fn from_tensor_term(model: &SurfaceModel, indices: &[i64], tensor: &TensorClass) -> OperatorSum {
        assert_eq!(indices.len(), tensor.arity);
        let mut out = OperatorSum::zero();
        for (slots, q) in &tensor.terms {
            out.push_term(model, indices.to_vec(), slots.clone(), q.clone());
        }
        out
    }

    /// The scalar multiple `q·Id`.
    pub fn identity(q: &Q) -> OperatorSum {
        let mut out = OperatorSum::zero();
        if !q.is_zero() {
            out.terms.insert(Vec::new(), TensorClass::scalar(q.clone()));
        }
        out
    }

    pub fn add(&self, other: &OperatorSum) -> OperatorSum {
        let mut out = self.clone();
        for (idx, t) in &other.terms {
            for (slots, q) in &t.terms {
                out.insert_canonical(idx.clone(), slots.clone(), q.clone());
            }
        }
        out
    }

    pub fn scale(&self, k: &Q) -> OperatorSum {
        if k.is_zero() {
            return OperatorSum::zero();
        }
        OperatorSum {
            terms: self
                .terms
                .iter()
                .map(|(i, t)| (i.clone(), t.scale(k)))
                .collect(),
        }
    }

    /// Drop terms whose annihilation weight exceeds `budget`.
    pub fn truncate(&self, budget: u32) -> OperatorSum {
        OperatorSum {
            terms: self
                .terms
                .iter()
                .filter(|(i, _)| annihilation_weight(i) <= budget as i64)
                .map(|(i, t)| (i.clone(), t.clone()))
                .collect(),
        }
    }

    /// Insert one term assumed already canonical (indices ascending, slots
    /// within equal-index runs ascending).
    fn insert_canonical(&mut self, indices: Vec<i64>, slots: Vec<usize>, coeff: Q) {
        if coeff.is_zero() {
            return;
        }
        let arity = indices.len();
        let entry = self
            .terms
            .entry(indices)
            .or_insert_with(|| TensorClass::zero(arity));
        entry.add_term(slots, &coeff);
        if entry.is_zero() {
            self.terms.retain(|_, t| !t.is_zero());
        }
    }

    /// Push one term in arbitrary letter order, reducing it to normal order:
    /// adjacent out-of-order letters are swapped with the Koszul sign, and a
    /// swap of letters with opposite indices `(x, −x)` additionally spawns
    /// the contraction `−x·∫(slot·slot')` on the remaining letters.
    /// Within runs of equal indices, slots are sorted with Koszul signs
    /// (a repeated odd slot at the same index kills the term).
    pub fn push_term(&mut self, model: &SurfaceModel, mut indices: Vec<i64>, mut slots: Vec<usize>, mut coeff: Q) {
        if coeff.is_zero() {
            return;
        }
        debug_assert_eq!(indices.len(), slots.len());
        // Bubble toward ascending indices.
        let mut j = 0;
        while j + 1 < indices.len() {
            if indices[j] > indices[j + 1] {
                if indices[j] + indices[j + 1] == 0 {
                    let w = model.integrate_product(
                        &CohClass::basis(slots[j]),
                        &CohClass::basis(slots[j + 1]),
                    );
                    if !w.is_zero() {
                        let mut idx2 = indices.clone();
                        let mut sl2 = slots.clone();
                        idx2.drain(j..=j + 1);
                        sl2.drain(j..=j + 1);
                        let c2 = &coeff * w * Q::from_integer((-indices[j]).into());
                        self.push_term(model, idx2, sl2, c2);
                    }
                }
                if model.parity(slots[j]) == 1 && model.parity(slots[j + 1]) == 1 {
                    coeff = -coeff;
                }
                indices.swap(j, j + 1);
                slots.swap(j, j + 1);
                // A swap can break order to the left; step back.
                j = j.saturating_sub(1);
            } else {
                j += 1;
            }
        }
        // Sort slots within equal-index runs.
        let mut u = 0;
        while u + 1 < indices.len() {
            if indices[u] == indices[u + 1] && slots[u] > slots[u + 1] {
                if model.parity(slots[u]) == 1 && model.parity(slots[u + 1]) == 1 {
                    coeff = -coeff;
                }
                slots.swap(u, u + 1);
                u = u.saturating_sub(1);
            } else {
                if indices[u] == indices[u + 1]
                    && slots[u] == slots[u + 1]
                    && model.parity(slots[u]) == 1
                {
                    return; // repeated odd letter: the term vanishes
                }
                u += 1;
            }
        }
        // Final repeated-odd check on the last pair.
        for u in 0..indices.len().saturating_sub(1) {
            if indices[u] == indices[u + 1]
                && slots[u] == slots[u + 1]
                && model.parity(slots[u]) == 1
            {
                return;
            }
        }
        self.insert_canonical(indices, slots, coeff);
    }

    /// Apply the sum to a Fock vector: per term, letters act right-to-left
    /// (negative index creates, positive annihilates).
    pub fn apply(&self, model: &SurfaceModel, v: &FockVector) -> FockVector {
        let mut out = FockVector::zero();
        for (indices, tensor) in &self.terms {
            for (slots, coeff) in &tensor.terms {
                let mut u = v.scale(coeff);
                for (i, s) in indices.iter().zip(slots.iter()).rev() {
                    if u.is_zero() {
                        break;
                    }
                    let class = CohClass::basis(*s);
                    u = if *i < 0 {
                        u.create(model, (-i) as u32, &class)
                    } else {
                        u.annihilate(model, *i as u32, &class)
                    };
                }
                out = out.add(&u);
            }
        }
        out
    }

    /// Super-commutator `[A, B] = AB − (−1)^{|A||B|}BA`, computed letter by
    /// letter: only single contractions between a letter of `A` and a letter
    /// of `B` with opposite indices survive.
    pub fn commutator(model: &SurfaceModel, a: &OperatorSum, b: &OperatorSum) -> OperatorSum {
        let mut out = OperatorSum::zero();
        for (n_idx, a_tensor) in &a.terms {
            for (gamma, ca) in &a_tensor.terms {
                let s_a: u8 = gamma.iter().map(|&g| model.parity(g)).sum::<u8>() % 2;
                for (m_idx, b_tensor) in &b.terms {
                    for (delta, cb) in &b_tensor.terms {
                        for (t, &nt) in n_idx.iter().enumerate() {
                            for (j, &mj) in m_idx.iter().enumerate() {
                                if nt + mj != 0 {
                                    continue;
                                }
                                let w = model.integrate_product(
                                    &CohClass::basis(gamma[t]),
                                    &CohClass::basis(delta[j]),
                                );
                                if w.is_zero() {
                                    continue;
                                }
                                let mut exp = 0u8;
                                if s_a == 1 {
                                    exp += delta[..j].iter().map(|&d| model.parity(d)).sum::<u8>();
                                }
                                if model.parity(delta[j]) == 1 {
                                    exp += gamma[t + 1..].iter().map(|&g| model.parity(g)).sum::<u8>();
                                }
                                let mut q = ca * cb * w * Q::from_integer((-nt).into());
                                if exp % 2 == 1 {
                                    q = -q;
                                }
                                let mut indices = Vec::with_capacity(n_idx.len() + m_idx.len() - 2);
                                indices.extend_from_slice(&m_idx[..j]);
                                indices.extend(n_idx.iter().enumerate().filter(|(u, _)| *u != t).map(|(_, &x)| x));
                                indices.extend_from_slice(&m_idx[j + 1..]);
                                let mut slots = Vec::with_capacity(indices.len());
                                slots.extend_from_slice(&delta[..j]);
                                slots.extend(gamma.iter().enumerate().filter(|(u, _)| *u != t).map(|(_, &x)| x));
                                slots.extend_from_slice(&delta[j + 1..]);
                                out.push_term(model, indices, slots, q);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// The derivative (commutator with the boundary operator), term by term:
    /// each letter `a_{n}(γ)` contributes every splitting
    /// `−(n/2)·a_{m}a_{n−m}` on the slot refined by the diagonal, plus the
    /// twist `−n(|n|−1)/2 · a_n(K·γ)`. Splittings are enumerated inside the
    /// budget window; the result is truncated to `budget`.
    pub fn derivative(&self, model: &SurfaceModel, budget: u32) -> OperatorSum {
        let mut out = OperatorSum::zero();
        for (indices, tensor) in &self.terms {
            let total_pos = annihilation_weight(indices);
            // Normal-ordering a derived term never lowers its annihilation
            // weight below the source term's, so overweight sources cannot
            // contribute within budget.
            if total_pos > budget as i64 {
                continue;
            }
            for (slots, coeff) in &tensor.terms {
                for (j, &nj) in indices.iter().enumerate() {
                    // An inserted positive letter can contract away against an
                    // existing creation letter while normal-ordering (and the
                    // inserted negative against an existing annihilation
                    // letter), lowering the final weight back inside budget.
                    // Widen the enumeration window by the absorbable weight so
                    // those splittings are not missed.
                    let neg_sum: i64 = indices
                        .iter()
                        .enumerate()
                        .filter(|&(u, &x)| u != j && x < 0)
                        .map(|(_, &x)| -x)
                        .sum();
                    let bp = budget as i64 + neg_sum;
                    // Splitting terms: ordered pairs (m1, m2), m1 + m2 = nj.
                    {
                        let half = -Q::from_integer(nj.into()) / Q::from_integer(2.into());
                        for m1 in (nj - bp)..=bp {
                            let m2 = nj - m1;
                            if m1 == 0 || m2 == 0 {
                                continue;
                            }
                            let (lo, hi) = (m1.min(m2), m1.max(m2));
                            for (pair, pc) in &model.tau2_basis(slots[j]).terms {
                                let mut idx2 = Vec::with_capacity(indices.len() + 1);
                                idx2.extend_from_slice(&indices[..j]);
                                idx2.push(lo);
                                idx2.push(hi);
                                idx2.extend_from_slice(&indices[j + 1..]);
                                let mut sl2 = Vec::with_capacity(idx2.len());
                                sl2.extend_from_slice(&slots[..j]);
                                sl2.push(pair[0]);
                                sl2.push(pair[1]);
                                sl2.extend_from_slice(&slots[j + 1..]);
                                out.push_term(model, idx2, sl2, coeff * pc * &half);
                            }
                        }
                    }
                    // Canonical-class twist.
                    let f = nj * (nj.abs() - 1);
                    if f != 0 {
                        let kq = -Q::from_integer(f.into()) / Q::from_integer(2.into());
                        let kc = model.mul(&CohClass::basis(slots[j]), &model.canonical_class);
                        for (ci, cc) in &kc.0 {
                            let mut sl2 = slots.clone();
                            sl2[j] = *ci;
                            out.push_term(model, indices.clone(), sl2, coeff * cc * &kq);
                        }
                    }
                }
            }
        }
        out.truncate(budget)
    }

    /// `[a_{-1}′(1), ·]` on a normal-ordered sum: each letter `a_m(γ)`
    /// becomes `m·a_{m−1}(γ)`; letters reaching index 0 drop their summand.
    pub fn lowering_shift(&self, model: &SurfaceModel) -> OperatorSum {
        let mut out = OperatorSum::zero();
        for (indices, tensor) in &self.terms {
            for (slots, coeff) in &tensor.terms {
                for (j, &mj) in indices.iter().enumerate() {
                    if mj == 1 {
                        continue;
                    }
                    let mut idx2 = indices.clone();
                    idx2[j] -= 1;
                    out.push_term(
                        model,
                        idx2,
                        slots.clone(),
                        coeff * Q::from_integer(mj.into()),
                    );
                }
            }
        }
        out
    }

    /// Debug serialization: one record per slot tuple, mirroring the Fock
    /// vector format with a signed index array.
    pub fn to_json(&self, model: &SurfaceModel) -> Value {
        let mut arr = Vec::new();
        for (indices, tensor) in &self.terms {
            for (slots, coeff) in &tensor.terms {
                arr.push(json!({
                    "indices": indices,
                    "factors": slots
                        .iter()
                        .map(|&s| json!({"c": model.basis[s].name}))
                        .collect::<Vec<_>>(),
                    "coeff": format_q(coeff),
                }));
            }
        }
        Value::Array(arr)
    }

    /// Cache serialization (basis indices, budget-free).
    pub fn to_cache_json(&self) -> Value {
        let mut arr = Vec::new();
        for (indices, tensor) in &self.terms {
            let slots: Vec<Value> = tensor
                .terms
                .iter()
                .map(|(s, q)| json!({"slots": s, "coeff": format_q(q)}))
                .collect();
            arr.push(json!({"indices": indices, "tensor": slots}));
        }
        Value::Array(arr)
    }

    pub fn from_cache_json(value: &Value) -> Result<OperatorSum, String> {
        let arr = value.as_array().ok_or("expected array")?;
        let mut out = OperatorSum::zero();
        for term in arr {
            let indices: Vec<i64> = term
                .get("indices")
                .and_then(|v| v.as_array())
                .ok_or("missing indices")?
                .iter()
                .map(|x| x.as_i64().ok_or("bad index"))
                .collect::<Result<_, _>>()?;
            let tensor_terms = term
                .get("tensor")
                .and_then(|v| v.as_array())
                .ok_or("missing tensor")?;
            let arity = indices.len();
            let entry = out
                .terms
                .entry(indices)
                .or_insert_with(|| TensorClass::zero(arity));
            for tt in tensor_terms {
                let slots: Vec<usize> = tt
                    .get("slots")
                    .and_then(|v| v.as_array())
                    .ok_or("missing slots")?
                    .iter()
                    .map(|x| x.as_u64().map(|u| u as usize).ok_or("bad slot"))
                    .collect::<Result<_, _>>()?;
                let coeff = parse_q(tt.get("coeff").and_then(|v| v.as_str()).ok_or("missing coeff")?)?;
                entry.add_term(slots, &coeff);
            }
        }
        out.terms.retain(|_, t| !t.is_zero());
        Ok(out)
    }
}

/// Apply `a_{i_1} ··· a_{i_k}` attached to `tensor` to a vector
/// (right-to-left).
pub fn apply_indexed(
    model: &SurfaceModel,
    indices: &[i64],
    tensor: &TensorClass,
    v: &FockVector,
) -> FockVector {
    debug_assert_eq!(indices.len(), tensor.arity);
    let mut out = FockVector::zero();
    for (slots, coeff) in &tensor.terms {
        let mut u = v.scale(coeff);
        for (i, s) in indices.iter().zip(slots.iter()).rev() {
            if u.is_zero() {
                break;
            }
            let class = CohClass::basis(*s);
            u = if *i < 0 {
                u.create(model, (-i) as u32, &class)
            } else {
                u.annihilate(model, *i as u32, &class)
            };
        }
        out = out.add(&u);
    }
    out
}

/// The Virasoro-type operator action:
/// `𝔏_n(α)·v = −(1/2) Σ_m :a_m a_{n−m}: (τ_{2*}α) · v`,
/// where `m` ranges over `|m| ≤ (max weight of v) + |n|` (letters of larger
/// index annihilate every monomial of `v`). Because `τ_{2*}α` is symmetric
/// under the Koszul slot swap, normal ordering a pair is just sorting its
/// indices.
pub fn virasoro_apply(model: &SurfaceModel, n: i64, alpha: &CohClass, v: &FockVector) -> FockVector {
    assert!(n != 0, "Virasoro index must be nonzero");
    let tau = model.tau2_class(alpha);
    if tau.is_zero() {
        return FockVector::zero();
    }
    let bound = v.max_weight() as i64 + n.abs();
    let minus_half = -Q::one() / Q::from_integer(2.into());
    let mut out = FockVector::zero();
    for m in -bound..=bound {
        let m2 = n - m;
        if m == 0 || m2 == 0 {
            continue;
        }
        let (lo, hi) = (m.min(m2), m.max(m2));
        let contrib = apply_indexed(model, &[lo, hi], &tau, v);
        out = out.add(&contrib.scale(&minus_half));
    }
    out
}

/// The boundary operator `𝔡` on Fock vectors (cup product with the first
/// Chern class of the tautological rank-`n` bundle, realized through the
/// derivative of single letters):
/// `𝔡(a_{-r}(c)·w) = a_{-r}′(c)·w + a_{-r}(c)·𝔡(w)` with
/// `a_{-r}′(c) = −r·𝔏_{-r}(c) + (r(r−1)/2)·a_{-r}(K·c)`.
pub fn boundary_apply(model: &SurfaceModel, v: &FockVector) -> FockVector {
    let mut out = FockVector::zero();
    for (mono, coeff) in &v.terms {
        if mono.factors.is_empty() {
            continue;
        }
        let head = mono.factors[0];
        let mut rest = FockVector::zero();
        rest.add_term(
            crate::fock::HeisenbergMonomial { factors: mono.factors[1..].to_vec() },
            &Q::one(),
        );
        let c = CohClass::basis(head.c);
        let r = head.r as i64;
        // a_{-r}′(c)·rest
        let mut derived = virasoro_apply(model, -r, &c, &rest).scale(&Q::from_integer((-r).into()));
        if r > 1 {
            let kc = model.mul(&c, &model.canonical_class);
            let half = Q::from_integer((r * (r - 1)).into()) / Q::from_integer(2.into());
            derived = derived.add(&rest.create(model, head.r, &kc).scale(&half));
        }
        // a_{-r}(c)·𝔡(rest); the boundary operator is even, so no sign.
        let tail = boundary_apply(model, &rest).create(model, head.r, &c);
        out = out.add(&derived.add(&tail).scale(coeff));
    }
    out
}

impl Engine {
    /// `[𝔊_k(α), a_{-r}(β)]`, complete for action on vectors of weight
    /// `≤ budget` (bilinear in `α`, `β`).
    pub fn chern_commutator(
        &self,
        k: u32,
        alpha: &CohClass,
        r: u32,
        beta: &CohClass,
        budget: u32,
    ) -> OperatorSum {
        let mut out = OperatorSum::zero();
        for (i, ca) in &alpha.0 {
            for (j, cb) in &beta.0 {
                let part = self.cc_basis(k, *i, r, *j, budget);
                out = out.add(&part.scale(&(ca * cb)));
            }
        }
        out
    }

    fn cc_basis(&self, k: u32, i: usize, r: u32, j: usize, budget: u32) -> OperatorSum {
        assert!(r >= 1);
        if let Some((b, s)) = self.cc_cache.lock().unwrap().get(&(k, i, r, j)) {
            if *b >= budget {
                return s.truncate(budget);
            }
        }
        if let Some(store) = &self.store {
            let key = format!(
                "cc-v2-{}-k{}-a{}-r{}-b{}",
                self.model.fingerprint, k, i, r, j
            );
            if let Some(v) = store.get(&key) {
                if let (Some(b), Some(t)) = (v.get("budget").and_then(|x| x.as_u64()), v.get("sum")) {
                    if let Ok(s) = OperatorSum::from_cache_json(t) {
                        if b as u32 >= budget {
                            self.cc_cache
                                .lock()
                                .unwrap()
                                .insert((k, i, r, j), (b as u32, s.clone()));
                            return s.truncate(budget);
                        }
                    }
                }
            }
        }
        let sum = self.cc_compute(k, i, r, j, budget);
        self.cc_cache
            .lock()
            .unwrap()
            .insert((k, i, r, j), (budget, sum.clone()));
        if let Some(store) = &self.store {
            let key = format!(
                "cc-v2-{}-k{}-a{}-r{}-b{}",
                self.model.fingerprint, k, i, r, j
            );
            store.put(&key, &json!({"budget": budget, "sum": sum.to_cache_json()}));
        }
        sum
    }

    fn cc_compute(&self, k: u32, i: usize, r: u32, j: usize, budget: u32) -> OperatorSum {
        let model = &*self.model;
        if r == 1 {
            let prod = model.mul(&CohClass::basis(i), &CohClass::basis(j));
            if prod.is_zero() {
                return OperatorSum::zero();
            }
            let mut sum = OperatorSum::single(model, -1, &prod);
            for _ in 0..k {
                sum = sum.derivative(model, budget);
            }
            return sum.scale(&(Q::one() / factorial(k as u64)));
        }
        // Reduce r via:
        // [𝔊, a_{-r}(β)] = −1/(r−1) · ( [[𝔊, a_{-1}(1)]′, a_{-(r−1)}(β)]
        //                               + [a_{-1}′(1), [𝔊, a_{-(r−1)}(β)]] )
        let y = self.cc_basis(k, i, r - 1, j, budget + 1);
        let t2 = y.lowering_shift(model);
        let d1 = self.cc_basis(k, i, 1, model.unit, budget + r - 1);
        let d = d1.derivative(model, budget + r - 1);
        let b_op = OperatorSum::single(model, -((r as i64) - 1), &CohClass::basis(j));
        let t1 = OperatorSum::commutator(model, &d, &b_op);
        t1.add(&t2)
            .scale(&(-Q::one() / Q::from_integer(((r as i64) - 1).into())))
            .truncate(budget)
    }

    /// Fully nested bracket
    /// `[[…[𝔊_k(b_i), a_{-r_1}(β_1)], …], a_{-r_s}(β_s)]`, truncated to
    /// annihilation weight 0 (all that survives against the vacuum).
    fn nested_bracket(&self, k: u32, i: usize, chain: &[(u32, usize)]) -> OperatorSum {
        let key = (k, i, chain.to_vec());
        if let Some(s) = self.bracket_cache.lock().unwrap().get(&key) {
            return s.clone();
        }
        let model = &*self.model;
        let total: u32 = chain[1..].iter().map(|(r, _)| r).sum();
        let mut sum = self.cc_basis(k, i, chain[0].0, chain[0].1, total);
        let mut remaining = total;
        for (r, b) in &chain[1..] {
            remaining -= r;
            let letter = OperatorSum::single(model, -(*r as i64), &CohClass::basis(*b));
            sum = OperatorSum::commutator(model, &sum, &letter).truncate(remaining);
        }
        self.bracket_cache.lock().unwrap().insert(key, sum.clone());
        sum
    }

    /// Apply the Chern-character component operator `𝔊_k(α)` to a vector.
    ///
    /// The operator kills the vacuum and its `(k+2)`-fold commutators with
    /// creation operators vanish, so on a creation monomial it expands into
    /// terms that bracket it with `1 ≤ i ≤ k+1` chosen letters and multiply
    /// back the rest (with Koszul signs for carrying the operator and the
    /// chosen letters past the untouched ones).
    pub fn chern_apply(&self, k: u32, alpha: &CohClass, v: &FockVector) -> FockVector {
        let mut out = FockVector::zero();
        for (ci, ca) in &alpha.0 {
            for (mono, coeff) in &v.terms {
                let w = self.chern_apply_mono(k, *ci, mono);
                if !w.is_zero() {
                    out = out.add(&w.scale(&(coeff * ca)));
                }
            }
        }
        out
    }

    /// `𝔊_k(basis class i)` applied to one creation monomial; memoized, since
    /// large products revisit the same monomials across many classes and
    /// truncation levels.
    fn chern_apply_mono(&self, k: u32, ci: usize, mono: &HeisenbergMonomial) -> FockVector {
        let cache_key = (k, ci, mono.clone());
        if let Some(w) = self.apply_cache.lock().unwrap().get(&cache_key) {
            return w.clone();
        }
        let model = &*self.model;
        let s_parity = model.parity(ci);
        let mut out = FockVector::zero();
        let b = mono.factors.len();
        let max_i = ((k + 1) as usize).min(b);
        let parities: Vec<u8> = mono.factors.iter().map(|f| model.parity(f.c)).collect();
        for size in 1..=max_i {
            for sel in subsets(b, size) {
                // Koszul sign.
                let mut exp: u8 = 0;
                let mut in_sel = vec![false; b];
                for &q in &sel {
                    in_sel[q] = true;
                }
                if s_parity == 1 {
                    for l in 0..b {
                        if !in_sel[l] {
                            exp += parities[l];
                        }
                    }
                }
                for &q in &sel {
                    if parities[q] == 1 {
                        for l in q + 1..b {
                            if !in_sel[l] {
                                exp += parities[l];
                            }
                        }
                    }
                }
                let chain: Vec<(u32, usize)> = sel
                    .iter()
                    .map(|&q| (mono.factors[q].r, mono.factors[q].c))
                    .collect();
                let bracket = self.nested_bracket(k, ci, &chain);
                if bracket.is_zero() {
                    continue;
                }
                let applied = bracket.apply(model, &FockVector::vacuum());
                if applied.is_zero() {
                    continue;
                }
                // Multiply the untouched letters back, rightmost first.
                let mut w = applied;
                for l in (0..b).rev() {
                    if !in_sel[l] {
                        w = w.create(
                            model,
                            mono.factors[l].r,
                            &CohClass::basis(mono.factors[l].c),
                        );
                    }
                }
                if exp % 2 == 1 {
                    w = w.scale(&-Q::one());
                }
                out = out.add(&w);
            }
        }
        self.apply_cache
            .lock()
            .unwrap()
            .insert(cache_key, out.clone());
        out
    }

    /// The characteristic class `G_k(α, n)` as a Fock vector: the Chern
    /// operator applied to the unit of `H*(X^[n])`.
    pub fn chern_class(&self, k: u32, alpha: &CohClass, n: u32) -> FockVector {
        self.chern_apply(k, alpha, &FockVector::unit_of(&self.model, n))
    }

    /// The tautological class `B_i(α, n) = 𝟙_{-(n-i-1)} a_{-(i+1)}(α)|0⟩`
    /// (zero when `i ≥ n`).
    pub fn b_class(&self, i: u32, alpha: &CohClass, n: u32) -> FockVector {
        if i >= n {
            return FockVector::zero();
        }
        FockVector::vacuum()
            .create(&self.model, i + 1, alpha)
            .pad(&self.model, n)
    }
}

/// All strictly increasing `size`-subsets of `0..n`.
fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(size);
    fn go(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for q in start..n {
            if n - q < size - cur.len() {
                break;
            }
            cur.push(q);
            go(q + 1, n, size, cur, out);
            cur.pop();
        }
    }
    go(0, n, size, &mut cur, &mut out);
    out
}
