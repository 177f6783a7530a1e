//! Finite model of the cohomology ring `H*(X)` of a smooth projective
//! surface: graded super-commutative multiplication, integration, the
//! Poincaré pairing, distinguished classes (unit, point, canonical, Euler),
//! and the diagonal pushforwards `τ_{k*}: H*(X) → H*(X^k)`.
//!
//! Models are loaded from JSON (see [`SurfaceModel::load_json`]) and fully
//! validated: every ring axiom is checked exactly and violations are
//! collected into an error report naming the failing axiom.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::linalg::Mat;
use crate::rational::{format_q, parse_q, Q};

/// One basis element of `H*(X)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisClass {
    pub name: String,
    /// Cohomological degree, in `0..=4`.
    pub degree: u8,
}

impl BasisClass {
    pub fn parity(&self) -> u8 {
        self.degree % 2
    }
}

/// A cohomology class on the surface: sparse rational combination of basis
/// classes, keyed by basis index. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct CohClass(pub BTreeMap<usize, Q>);

impl CohClass {
    pub fn zero() -> Self {
        CohClass(BTreeMap::new())
    }

    pub fn basis(idx: usize) -> Self {
        let mut m = BTreeMap::new();
        m.insert(idx, Q::one());
        CohClass(m)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add_term(&mut self, idx: usize, coeff: &Q) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.0.entry(idx).or_insert_with(Q::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.0.remove(&idx);
        }
    }

    pub fn add(&self, other: &CohClass) -> CohClass {
        let mut out = self.clone();
        for (i, c) in &other.0 {
            out.add_term(*i, c);
        }
        out
    }

    pub fn scale(&self, k: &Q) -> CohClass {
        if k.is_zero() {
            return CohClass::zero();
        }
        CohClass(self.0.iter().map(|(i, c)| (*i, c * k)).collect())
    }

    pub fn neg(&self) -> CohClass {
        CohClass(self.0.iter().map(|(i, c)| (*i, -c.clone())).collect())
    }
}

/// An element of `H*(X^k)` in Künneth form: sparse rational combination of
/// `k`-fold tensor products of basis classes. Arity 0 is the scalar case
/// (single term keyed by the empty tuple).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TensorClass {
    pub arity: usize,
    pub terms: BTreeMap<Vec<usize>, Q>,
}

impl TensorClass {
    pub fn zero(arity: usize) -> Self {
        TensorClass {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(q: Q) -> Self {
        let mut t = TensorClass::zero(0);
        t.add_term(vec![], &q);
        t
    }

    /// Arity-1 tensor from a class.
    pub fn from_class(a: &CohClass) -> Self {
        let mut t = TensorClass::zero(1);
        for (i, c) in &a.0 {
            t.add_term(vec![*i], c);
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, slots: Vec<usize>, coeff: &Q) {
        debug_assert_eq!(slots.len(), self.arity);
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(slots).or_insert_with(Q::zero);
        *entry += coeff;
        if entry.is_zero() {
            // Re-borrowing to remove: recompute the key cheaply.
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn add(&self, other: &TensorClass) -> TensorClass {
        assert_eq!(self.arity, other.arity, "tensor arity mismatch");
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_term(s.clone(), c);
        }
        out
    }

    pub fn scale(&self, k: &Q) -> TensorClass {
        if k.is_zero() {
            return TensorClass::zero(self.arity);
        }
        TensorClass {
            arity: self.arity,
            terms: self.terms.iter().map(|(s, c)| (s.clone(), c * k)).collect(),
        }
    }

    /// The scalar value of an arity-0 tensor.
    pub fn scalar_value(&self) -> Q {
        debug_assert_eq!(self.arity, 0);
        self.terms.get(&vec![]).cloned().unwrap_or_else(Q::zero)
    }
}

/// Errors from loading or validating a surface model.
#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    /// The file does not even describe a model (malformed JSON, unknown
    /// names, missing required pieces).
    #[error("model schema error: {0}")]
    Schema(String),
    /// The model is structurally well-formed but violates ring axioms.
    #[error("model invariant violations:\n{}", .0.join("\n"))]
    Invariant(Vec<String>),
}

/// JSON schema of a surface-model file.
#[derive(Deserialize)]
struct ModelFile {
    name: String,
    basis: Vec<BasisEntry>,
    mult: Vec<MultEntry>,
    integral: BTreeMap<String, String>,
    canonical_class: BTreeMap<String, String>,
    euler_class: BTreeMap<String, String>,
    point_class: String,
}

#[derive(Deserialize)]
struct BasisEntry {
    name: String,
    degree: u8,
}

#[derive(Deserialize)]
struct MultEntry {
    i: usize,
    j: usize,
    k: usize,
    c: String,
}

/// Raw, index-resolved model data prior to validation.
struct RawModel {
    name: String,
    basis: Vec<BasisClass>,
    /// Explicit structure-constant entries `(i, j, k, c)` meaning the
    /// coefficient of `b_k` in `b_i · b_j`.
    mult_entries: Vec<(usize, usize, usize, Q)>,
    integral: Vec<Q>,
    canonical: CohClass,
    euler: CohClass,
    point: usize,
}

/// A validated model of `H*(X)`.
#[derive(Debug)]
pub struct SurfaceModel {
    pub name: String,
    pub basis: Vec<BasisClass>,
    /// Full multiplication table: `mult[i][j]` = `b_i · b_j`.
    mult: Vec<Vec<CohClass>>,
    /// Integral of each basis class.
    integral: Vec<Q>,
    pub canonical_class: CohClass,
    pub euler_class: CohClass,
    /// Basis index of the point class `[x]`.
    pub point: usize,
    /// Basis index of the unit class `1_X`.
    pub unit: usize,
    /// `τ_{2*}` of each basis class.
    tau2: Vec<TensorClass>,
    /// Content hash of the model data; keys persistent caches.
    pub fingerprint: String,
}

impl SurfaceModel {
    /// Number of basis classes.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn degree(&self, idx: usize) -> u8 {
        self.basis[idx].degree
    }

    pub fn parity(&self, idx: usize) -> u8 {
        self.basis[idx].parity()
    }

    /// Betti numbers `b_0..b_4` of the model.
    pub fn betti(&self) -> [u64; 5] {
        let mut b = [0u64; 5];
        for cls in &self.basis {
            b[cls.degree as usize] += 1;
        }
        b
    }

    pub fn unit_class(&self) -> CohClass {
        CohClass::basis(self.unit)
    }

    pub fn point_class(&self) -> CohClass {
        CohClass::basis(self.point)
    }

    pub fn basis_index(&self, name: &str) -> Option<usize> {
        self.basis.iter().position(|b| b.name == name)
    }

    /// Product of two basis classes.
    pub fn mul_basis(&self, i: usize, j: usize) -> &CohClass {
        &self.mult[i][j]
    }

    /// Bilinear product of two classes.
    pub fn mul(&self, a: &CohClass, b: &CohClass) -> CohClass {
        let mut out = CohClass::zero();
        for (i, ca) in &a.0 {
            for (j, cb) in &b.0 {
                let f = ca * cb;
                for (k, ck) in &self.mult[*i][*j].0 {
                    out.add_term(*k, &(&f * ck));
                }
            }
        }
        out
    }

    pub fn integral_basis(&self, i: usize) -> &Q {
        &self.integral[i]
    }

    /// `∫_X a`.
    pub fn integrate(&self, a: &CohClass) -> Q {
        let mut acc = Q::zero();
        for (i, c) in &a.0 {
            acc += c * &self.integral[*i];
        }
        acc
    }

    /// `∫_X (a·b)`.
    pub fn integrate_product(&self, a: &CohClass, b: &CohClass) -> Q {
        self.integrate(&self.mul(a, b))
    }

    /// The homogeneous degree of a class, if homogeneous (zero counts as any
    /// degree and returns `None`).
    pub fn homogeneous_degree(&self, a: &CohClass) -> Option<u8> {
        let mut deg = None;
        for i in a.0.keys() {
            let d = self.degree(*i);
            match deg {
                None => deg = Some(d),
                Some(d0) if d0 != d => return None,
                _ => {}
            }
        }
        deg
    }

    /// Parity of a homogeneous class (zero → even).
    pub fn class_parity(&self, a: &CohClass) -> u8 {
        self.homogeneous_degree(a).unwrap_or(0) % 2
    }

    /// `τ_{2*}` of a basis class.
    pub fn tau2_basis(&self, i: usize) -> &TensorClass {
        &self.tau2[i]
    }

    /// Diagonal pushforward `τ_{k*}(a)` for `k ≥ 0`. `k = 0` yields the
    /// arity-0 scalar `∫a`; `k = 1` yields `a` itself; higher `k` is computed
    /// by refining the last slot with `τ_{2*}` repeatedly.
    pub fn tau_push(&self, k: usize, a: &CohClass) -> TensorClass {
        match k {
            0 => TensorClass::scalar(self.integrate(a)),
            1 => TensorClass::from_class(a),
            _ => {
                let mut t = self.tau2_class(a);
                for _ in 2..k {
                    t = self.tensor_refine(&t, t.arity - 1);
                }
                t
            }
        }
    }

    /// `τ_{2*}` of an arbitrary class (linear extension).
    pub fn tau2_class(&self, a: &CohClass) -> TensorClass {
        let mut out = TensorClass::zero(2);
        for (i, c) in &a.0 {
            out = out.add(&self.tau2[*i].scale(c));
        }
        out
    }

    /// Sum of slot parities of `slots[range]`.
    fn parity_sum(&self, slots: &[usize]) -> u8 {
        slots.iter().map(|&s| self.parity(s)).sum::<u8>() % 2
    }

    /// Multiply slot `j` (0-based) of every term by `b`, with the Koszul sign
    /// `(−1)^{|b|·(sum of parities of slots after j)}`. The slot value
    /// multiplies `b` from the left: `slot · b`.
    pub fn tensor_absorb(&self, t: &TensorClass, j: usize, b: &CohClass) -> TensorClass {
        assert!(j < t.arity, "absorb slot out of range");
        let mut out = TensorClass::zero(t.arity);
        for (slots, coeff) in &t.terms {
            for (bi, bc) in &b.0 {
                let mut f = coeff * bc;
                if self.parity(*bi) == 1 && self.parity_sum(&slots[j + 1..]) == 1 {
                    f = -f;
                }
                let prod = &self.mult[slots[j]][*bi];
                for (k, ck) in &prod.0 {
                    let mut s = slots.clone();
                    s[j] = *k;
                    out.add_term(s, &(&f * ck));
                }
            }
        }
        out
    }

    /// Remove slot `j`, multiplying each term by `∫(slot_j)`. Nonzero only
    /// when the slot has degree 4, so no Koszul sign can arise.
    pub fn tensor_integrate_slot(&self, t: &TensorClass, j: usize) -> TensorClass {
        assert!(j < t.arity, "integrate slot out of range");
        let mut out = TensorClass::zero(t.arity - 1);
        for (slots, coeff) in &t.terms {
            let w = &self.integral[slots[j]];
            if w.is_zero() {
                continue;
            }
            let mut s = slots.clone();
            s.remove(j);
            out.add_term(s, &(coeff * w));
        }
        out
    }

    /// Replace slot `j` by `τ_{2*}(slot_j)`, increasing arity by one. The two
    /// new slots sit at positions `j`, `j+1`. No sign is involved.
    pub fn tensor_refine(&self, t: &TensorClass, j: usize) -> TensorClass {
        assert!(j < t.arity, "refine slot out of range");
        let mut out = TensorClass::zero(t.arity + 1);
        for (slots, coeff) in &t.terms {
            for (pair, pc) in &self.tau2[slots[j]].terms {
                let mut s = Vec::with_capacity(slots.len() + 1);
                s.extend_from_slice(&slots[..j]);
                s.push(pair[0]);
                s.push(pair[1]);
                s.extend_from_slice(&slots[j + 1..]);
                out.add_term(s, &(coeff * pc));
            }
        }
        out
    }

    /// Swap adjacent slots `j`, `j+1` with the Koszul sign
    /// `(−1)^{|slot_j||slot_{j+1}|}`.
    pub fn tensor_swap_adjacent(&self, t: &TensorClass, j: usize) -> TensorClass {
        assert!(j + 1 < t.arity, "swap slot out of range");
        let mut out = TensorClass::zero(t.arity);
        for (slots, coeff) in &t.terms {
            let mut s = slots.clone();
            s.swap(j, j + 1);
            let mut f = coeff.clone();
            if self.parity(slots[j]) == 1 && self.parity(slots[j + 1]) == 1 {
                f = -f;
            }
            out.add_term(s, &f);
        }
        out
    }

    /// Multiply adjacent slots `j`, `j+1` into a single slot (their ring
    /// product, in stored order), decreasing arity by one. Contracting the
    /// two slots created by [`Self::tensor_refine`] multiplies the refined
    /// slot by the Euler class.
    pub fn tensor_contract_refined(&self, t: &TensorClass, j: usize) -> TensorClass {
        assert!(j + 1 < t.arity, "contract slot out of range");
        let mut out = TensorClass::zero(t.arity - 1);
        for (slots, coeff) in &t.terms {
            let prod = &self.mult[slots[j]][slots[j + 1]];
            for (k, ck) in &prod.0 {
                let mut s = Vec::with_capacity(slots.len() - 1);
                s.extend_from_slice(&slots[..j]);
                s.push(*k);
                s.extend_from_slice(&slots[j + 2..]);
                out.add_term(s, &(coeff * ck));
            }
        }
        out
    }

    /// Remove adjacent slots `j`, `j+1`, multiplying each term by
    /// `∫(slot_j · slot_{j+1})` (stored order). The removed pair has even
    /// total parity whenever the integral is nonzero, so no external sign.
    pub fn tensor_contract_pair_integral(&self, t: &TensorClass, j: usize) -> TensorClass {
        assert!(j + 1 < t.arity, "contract slot out of range");
        let mut out = TensorClass::zero(t.arity - 2);
        for (slots, coeff) in &t.terms {
            let w = self.integrate(&self.mul(
                &CohClass::basis(slots[j]),
                &CohClass::basis(slots[j + 1]),
            ));
            if w.is_zero() {
                continue;
            }
            let mut s = Vec::with_capacity(slots.len() - 2);
            s.extend_from_slice(&slots[..j]);
            s.extend_from_slice(&slots[j + 2..]);
            out.add_term(s, &(coeff * &w));
        }
        out
    }

    /// The pairing on `H*(X^k)`:
    /// `⟨a_1⊗…⊗a_k, b_1⊗…⊗b_k⟩ = (−1)^{Σ_{i<j}|b_i||a_j|} ∏ ∫(a_i·b_i)`.
    pub fn tensor_pairing(&self, t: &TensorClass, u: &TensorClass) -> Q {
        assert_eq!(t.arity, u.arity, "pairing arity mismatch");
        let mut acc = Q::zero();
        for (a, ca) in &t.terms {
            for (b, cb) in &u.terms {
                let mut prod = ca * cb;
                for i in 0..t.arity {
                    if prod.is_zero() {
                        break;
                    }
                    let w = self.integrate(
                        &self.mul(&CohClass::basis(a[i]), &CohClass::basis(b[i])),
                    );
                    prod *= w;
                }
                if prod.is_zero() {
                    continue;
                }
                // Koszul sign: Σ_{i<j} |b_i||a_j|.
                let mut exp = 0u8;
                for i in 0..t.arity {
                    if self.parity(b[i]) == 1 {
                        exp = (exp + self.parity_sum(&a[i + 1..])) % 2;
                    }
                }
                if exp == 1 {
                    prod = -prod;
                }
                acc += prod;
            }
        }
        acc
    }

    /// Load and validate a model from JSON text.
    pub fn load_json(text: &str) -> Result<Arc<SurfaceModel>, ModelError> {
        let file: ModelFile = serde_json::from_str(text)
            .map_err(|e| ModelError::Schema(format!("invalid JSON: {e}")))?;
        let raw = resolve_file(file)?;
        Self::from_raw(raw).map(Arc::new)
    }

    /// One of the models shipped with the binary.
    pub fn builtin(name: &str) -> Result<Arc<SurfaceModel>, ModelError> {
        let text = match name {
            "P2" => include_str!("../models/p2.json"),
            "P1xP1" => include_str!("../models/p1xp1.json"),
            "K3like" => include_str!("../models/k3like.json"),
            "Abelianlike" => include_str!("../models/abelianlike.json"),
            _ => {
                return Err(ModelError::Schema(format!(
                    "unknown builtin model {name:?}; available: P2, P1xP1, K3like, Abelianlike"
                )))
            }
        };
        Self::load_json(text)
    }

    pub const BUILTIN_NAMES: [&'static str; 4] = ["P2", "P1xP1", "K3like", "Abelianlike"];

    /// Rebuild the model with its basis listed in a new order.
    /// `perm[new_index] = old_index`.
    pub fn permute_basis(&self, perm: &[usize]) -> Result<Arc<SurfaceModel>, ModelError> {
        assert_eq!(perm.len(), self.dim(), "permutation length mismatch");
        let mut inv = vec![usize::MAX; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            assert!(inv[old] == usize::MAX, "not a permutation");
            inv[old] = new;
        }
        let remap = |c: &CohClass| CohClass(c.0.iter().map(|(i, q)| (inv[*i], q.clone())).collect());
        let basis: Vec<BasisClass> = perm.iter().map(|&old| self.basis[old].clone()).collect();
        let mut mult_entries = Vec::new();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                for (k, c) in &self.mult[i][j].0 {
                    mult_entries.push((inv[i], inv[j], inv[*k], c.clone()));
                }
            }
        }
        let raw = RawModel {
            name: format!("{}-permuted", self.name),
            basis,
            mult_entries,
            integral: perm.iter().map(|&old| self.integral[old].clone()).collect(),
            canonical: remap(&self.canonical_class),
            euler: remap(&self.euler_class),
            point: inv[self.point],
        };
        Self::from_raw(raw).map(Arc::new)
    }

    fn from_raw(raw: RawModel) -> Result<SurfaceModel, ModelError> {
        let b = raw.basis.len();
        let mut failures: Vec<String> = Vec::new();

        // Fill the multiplication table; complete missing (j,i) from (i,j) by
        // graded super-commutativity.
        let mut provided = vec![vec![false; b]; b];
        let mut mult = vec![vec![CohClass::zero(); b]; b];
        let mut seen = BTreeMap::new();
        for (i, j, k, c) in &raw.mult_entries {
            if seen.insert((*i, *j, *k), ()).is_some() {
                return Err(ModelError::Schema(format!(
                    "duplicate mult entry for (i={i}, j={j}, k={k})"
                )));
            }
            provided[*i][*j] = true;
            mult[*i][*j].add_term(*k, c);
        }
        for i in 0..b {
            for j in 0..b {
                if provided[i][j] && !provided[j][i] && i != j {
                    let sign_flip =
                        raw.basis[i].parity() == 1 && raw.basis[j].parity() == 1;
                    mult[j][i] = if sign_flip {
                        mult[i][j].neg()
                    } else {
                        mult[i][j].clone()
                    };
                    provided[j][i] = true;
                }
            }
        }

        // --- Ring axioms ---
        for (i, cls) in raw.basis.iter().enumerate() {
            if cls.degree > 4 {
                failures.push(format!("basis class {} has degree {} > 4", cls.name, cls.degree));
            }
            for j in 0..b {
                for (k, _) in &mult[i][j].0 {
                    if raw.basis[*k].degree as u16
                        != raw.basis[i].degree as u16 + raw.basis[j].degree as u16
                    {
                        failures.push(format!(
                            "degree additivity fails: {}·{} has a {} component",
                            raw.basis[i].name, raw.basis[j].name, raw.basis[*k].name
                        ));
                    }
                }
            }
        }
        let unit = {
            let units: Vec<usize> = (0..b).filter(|&i| raw.basis[i].degree == 0).collect();
            if units.len() != 1 {
                return Err(ModelError::Schema(format!(
                    "expected exactly one degree-0 basis class, found {}",
                    units.len()
                )));
            }
            units[0]
        };
        if raw.basis[raw.point].degree != 4 {
            return Err(ModelError::Schema(format!(
                "point class {} does not have degree 4",
                raw.basis[raw.point].name
            )));
        }

        let model_stub = |mult: &Vec<Vec<CohClass>>, a: &CohClass, c: &CohClass| -> CohClass {
            let mut out = CohClass::zero();
            for (i, ca) in &a.0 {
                for (j, cb) in &c.0 {
                    let f = ca * cb;
                    for (k, ck) in &mult[*i][*j].0 {
                        out.add_term(*k, &(&f * ck));
                    }
                }
            }
            out
        };

        for i in 0..b {
            let prod = &mult[unit][i];
            if *prod != CohClass::basis(i) {
                failures.push(format!(
                    "unit law fails: 1·{} ≠ {}",
                    raw.basis[i].name, raw.basis[i].name
                ));
            }
        }
        for i in 0..b {
            for j in 0..b {
                let sign_flip = raw.basis[i].parity() == 1 && raw.basis[j].parity() == 1;
                let rhs = if sign_flip { mult[j][i].neg() } else { mult[j][i].clone() };
                if mult[i][j] != rhs {
                    failures.push(format!(
                        "super-commutativity fails for ({}, {})",
                        raw.basis[i].name, raw.basis[j].name
                    ));
                }
            }
            if raw.basis[i].parity() == 1 && !mult[i][i].is_zero() {
                failures.push(format!(
                    "odd class {} has nonzero square",
                    raw.basis[i].name
                ));
            }
        }
        for i in 0..b {
            for j in 0..b {
                for k in 0..b {
                    let left = model_stub(&mult, &mult[i][j], &CohClass::basis(k));
                    let right = model_stub(&mult, &CohClass::basis(i), &mult[j][k]);
                    if left != right {
                        failures.push(format!(
                            "associativity fails for triple ({}, {}, {})",
                            raw.basis[i].name, raw.basis[j].name, raw.basis[k].name
                        ));
                    }
                }
            }
        }

        // --- Integration ---
        for i in 0..b {
            if !raw.integral[i].is_zero() && raw.basis[i].degree != 4 {
                failures.push(format!(
                    "integral is supported on degree 4 but ∫{} ≠ 0",
                    raw.basis[i].name
                ));
            }
        }
        if raw.integral[raw.point] != Q::one() {
            failures.push("point class not normalized: ∫[x] ≠ 1".to_string());
        }

        let integrate = |a: &CohClass| -> Q {
            let mut acc = Q::zero();
            for (i, c) in &a.0 {
                acc += c * &raw.integral[*i];
            }
            acc
        };

        // Poincaré nondegeneracy.
        let pairing_rows: Vec<Vec<Q>> = (0..b)
            .map(|i| {
                (0..b)
                    .map(|j| integrate(&mult[i][j]))
                    .collect()
            })
            .collect();
        let pmat = Mat::from_rows(pairing_rows);
        if pmat.rank() != b {
            failures.push("Poincaré pairing matrix is singular".to_string());
        }

        // Distinguished classes.
        if raw
            .canonical
            .0
            .keys()
            .any(|&i| raw.basis[i].degree != 2)
        {
            failures.push("canonical class is not of pure degree 2".to_string());
        }
        if raw.euler.0.keys().any(|&i| raw.basis[i].degree != 4) {
            failures.push("euler class is not of pure degree 4".to_string());
        }
        let k2 = model_stub(&mult, &raw.canonical, &raw.canonical);
        let k3 = model_stub(&mult, &k2, &raw.canonical);
        if !k3.is_zero() {
            failures.push("canonical class cubed is nonzero".to_string());
        }

        if !failures.is_empty() {
            return Err(ModelError::Invariant(failures));
        }

        // --- Solve for τ_{2*} of every basis class ---
        // Unknowns T_{uv}; equations over all index pairs (i, j):
        //   Σ_{u,v} T_{uv} · (−1)^{|b_i||b_v|} ∫(b_u b_i) ∫(b_v b_j) = ∫(α b_i b_j).
        let n2 = b * b;
        let mut sys = Mat::new(n2, n2);
        for i in 0..b {
            for j in 0..b {
                for u in 0..b {
                    for v in 0..b {
                        let mut c = &pmat.data[u][i] * &pmat.data[v][j];
                        if raw.basis[i].parity() == 1 && raw.basis[v].parity() == 1 {
                            c = -c;
                        }
                        sys.data[i * b + j][u * b + v] = c;
                    }
                }
            }
        }
        let mut tau2 = Vec::with_capacity(b);
        for a in 0..b {
            let rhs: Vec<Q> = (0..b)
                .flat_map(|i| {
                    (0..b).map(move |j| (i, j)).collect::<Vec<_>>()
                })
                .map(|(i, j)| {
                    integrate(&model_stub(
                        &mult,
                        &model_stub(&mult, &CohClass::basis(a), &CohClass::basis(i)),
                        &CohClass::basis(j),
                    ))
                })
                .collect();
            let sol = sys.solve(&rhs).ok_or_else(|| {
                ModelError::Invariant(vec![format!(
                    "pushforward system is singular for basis class {}",
                    raw.basis[a].name
                )])
            })?;
            let mut t = TensorClass::zero(2);
            for u in 0..b {
                for v in 0..b {
                    t.add_term(vec![u, v], &sol[u * b + v]);
                }
            }
            tau2.push(t);
        }

        // The Euler class is determined: contracting τ_{2*}(1_X) must give it.
        let fingerprint = fingerprint_raw(&raw);
        let model = SurfaceModel {
            name: raw.name,
            basis: raw.basis,
            mult,
            integral: raw.integral,
            canonical_class: raw.canonical,
            euler_class: raw.euler,
            point: raw.point,
            unit,
            tau2,
            fingerprint,
        };
        let e = model.tensor_contract_refined(&model.tau_push(2, &model.unit_class()), 0);
        let mut e_class = CohClass::zero();
        for (slots, c) in &e.terms {
            e_class.add_term(slots[0], c);
        }
        if e_class != model.euler_class {
            return Err(ModelError::Invariant(vec![
                "euler class mismatch: the declared class does not equal the diagonal self-intersection".to_string(),
            ]));
        }
        Ok(model)
    }
}

impl fmt::Display for CohClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(i, c)| format!("{}·#{}", format_q(c), i))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

fn resolve_file(file: ModelFile) -> Result<RawModel, ModelError> {
    if file.basis.is_empty() {
        return Err(ModelError::Schema("empty basis".to_string()));
    }
    let mut names = BTreeMap::new();
    for (i, e) in file.basis.iter().enumerate() {
        if e.name.is_empty() {
            return Err(ModelError::Schema(format!("basis class {i} has an empty name")));
        }
        if names.insert(e.name.clone(), i).is_some() {
            return Err(ModelError::Schema(format!("duplicate basis name {:?}", e.name)));
        }
    }
    let lookup = |n: &str| -> Result<usize, ModelError> {
        names
            .get(n)
            .copied()
            .ok_or_else(|| ModelError::Schema(format!("unknown basis name {n:?}")))
    };
    let basis: Vec<BasisClass> = file
        .basis
        .iter()
        .map(|e| BasisClass {
            name: e.name.clone(),
            degree: e.degree,
        })
        .collect();
    let b = basis.len();

    let mut mult_entries = Vec::new();
    for e in &file.mult {
        if e.i >= b || e.j >= b || e.k >= b {
            return Err(ModelError::Schema(format!(
                "mult entry indices out of range: (i={}, j={}, k={})",
                e.i, e.j, e.k
            )));
        }
        let c = parse_q(&e.c).map_err(|m| {
            ModelError::Schema(format!("bad mult coefficient for (i={}, j={}, k={}): {m}", e.i, e.j, e.k))
        })?;
        mult_entries.push((e.i, e.j, e.k, c));
    }

    let parse_class = |m: &BTreeMap<String, String>, what: &str| -> Result<CohClass, ModelError> {
        let mut out = CohClass::zero();
        for (name, val) in m {
            let idx = lookup(name)?;
            let q = parse_q(val)
                .map_err(|e| ModelError::Schema(format!("bad coefficient in {what}: {e}")))?;
            out.add_term(idx, &q);
        }
        Ok(out)
    };

    let mut integral = vec![Q::zero(); b];
    for (name, val) in &file.integral {
        let idx = lookup(name)?;
        integral[idx] =
            parse_q(val).map_err(|e| ModelError::Schema(format!("bad integral value: {e}")))?;
    }

    Ok(RawModel {
        name: file.name,
        basis,
        mult_entries,
        integral,
        canonical: parse_class(&file.canonical_class, "canonical_class")?,
        euler: parse_class(&file.euler_class, "euler_class")?,
        point: lookup(&file.point_class)?,
    })
}

fn fingerprint_raw(raw: &RawModel) -> String {
    let mut h = Sha256::new();
    h.update(raw.name.as_bytes());
    h.update([0u8]);
    for bc in &raw.basis {
        h.update(bc.name.as_bytes());
        h.update([0u8, bc.degree]);
    }
    let mut entries = raw.mult_entries.clone();
    entries.sort();
    for (i, j, k, c) in &entries {
        h.update(format!("m{i},{j},{k},{}", format_q(c)).as_bytes());
        h.update([0u8]);
    }
    for q in &raw.integral {
        h.update(format!("i{}", format_q(q)).as_bytes());
        h.update([0u8]);
    }
    for (label, class) in [("k", &raw.canonical), ("e", &raw.euler)] {
        for (i, c) in &class.0 {
            h.update(format!("{label}{i}={}", format_q(c)).as_bytes());
            h.update([0u8]);
        }
    }
    h.update(format!("p{}", raw.point).as_bytes());
    format!("{:x}", h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qz;

    fn p2() -> Arc<SurfaceModel> {
        SurfaceModel::builtin("P2").unwrap()
    }

    fn odd_model() -> Arc<SurfaceModel> {
        SurfaceModel::builtin("Abelianlike").unwrap()
    }

    #[test]
    fn builtins_load() {
        for name in SurfaceModel::BUILTIN_NAMES {
            let m = SurfaceModel::builtin(name).unwrap();
            assert!(m.dim() >= 3, "{name} too small");
        }
    }

    #[test]
    fn p2_ring_basics() {
        let m = p2();
        let h = m.basis_index("h").unwrap();
        let p = m.basis_index("p").unwrap();
        assert_eq!(m.mul_basis(h, h), &CohClass::basis(p));
        assert_eq!(m.integrate(&CohClass::basis(p)), qz(1));
        assert_eq!(m.integrate(&m.unit_class()), qz(0));
        // ∫(3p − 2p) = 1
        let c = CohClass::basis(p).scale(&qz(3)).add(&CohClass::basis(p).scale(&qz(-2)));
        assert_eq!(m.integrate(&c), qz(1));
        // K² = 9p
        let k2 = m.mul(&m.canonical_class, &m.canonical_class);
        assert_eq!(m.integrate(&k2), qz(9));
    }

    #[test]
    fn p2_tau2_fixtures() {
        let m = p2();
        let one = m.basis_index("1").unwrap();
        let h = m.basis_index("h").unwrap();
        let p = m.basis_index("p").unwrap();
        let t1 = m.tau_push(2, &m.unit_class());
        let mut expect = TensorClass::zero(2);
        expect.add_term(vec![one, p], &qz(1));
        expect.add_term(vec![h, h], &qz(1));
        expect.add_term(vec![p, one], &qz(1));
        assert_eq!(t1, expect);

        let th = m.tau_push(2, &CohClass::basis(h));
        let mut expect_h = TensorClass::zero(2);
        expect_h.add_term(vec![h, p], &qz(1));
        expect_h.add_term(vec![p, h], &qz(1));
        assert_eq!(th, expect_h);

        // τ_{0*} is the integral; τ_{k*}[x] = [x]⊗…⊗[x].
        assert_eq!(m.tau_push(0, &CohClass::basis(p)).scalar_value(), qz(1));
        let t3 = m.tau_push(3, &CohClass::basis(p));
        let mut expect_p3 = TensorClass::zero(3);
        expect_p3.add_term(vec![p, p, p], &qz(1));
        assert_eq!(t3, expect_p3);
    }

    #[test]
    fn odd_model_tau2() {
        let m = odd_model();
        let one = m.basis_index("1").unwrap();
        let x = m.basis_index("x").unwrap();
        let y = m.basis_index("y").unwrap();
        let p = m.basis_index("p").unwrap();
        let t1 = m.tau_push(2, &m.unit_class());
        let mut expect = TensorClass::zero(2);
        expect.add_term(vec![one, p], &qz(1));
        expect.add_term(vec![p, one], &qz(1));
        expect.add_term(vec![x, y], &qz(-1));
        expect.add_term(vec![y, x], &qz(1));
        assert_eq!(t1, expect);
        // Euler contraction is zero on this model.
        let e = m.tensor_contract_refined(&t1, 0);
        assert!(e.is_zero());
        // τ₂ of the odd degree-1 class.
        let tx = m.tau_push(2, &CohClass::basis(x));
        let mut expect_x = TensorClass::zero(2);
        expect_x.add_term(vec![x, p], &qz(1));
        expect_x.add_term(vec![p, x], &qz(1));
        assert_eq!(tx, expect_x);
    }

    #[test]
    fn tau2_is_koszul_symmetric() {
        for name in SurfaceModel::BUILTIN_NAMES {
            let m = SurfaceModel::builtin(name).unwrap();
            for a in 0..m.dim() {
                let t = m.tau2_basis(a);
                assert_eq!(&m.tensor_swap_adjacent(t, 0), t, "τ₂ not symmetric on {name}");
            }
        }
    }

    #[test]
    fn absorb_matches_tau_of_product() {
        // tensor_absorb(τ_k(α), j, β) = τ_k(αβ) for all basis α, β, slots j, k≤3.
        for name in SurfaceModel::BUILTIN_NAMES {
            let m = SurfaceModel::builtin(name).unwrap();
            for k in 1..=3usize {
                for a in 0..m.dim() {
                    let t = m.tau_push(k, &CohClass::basis(a));
                    for bidx in 0..m.dim() {
                        let beta = CohClass::basis(bidx);
                        let prod = m.mul(&CohClass::basis(a), &beta);
                        let expect = m.tau_push(k, &prod);
                        for j in 0..k {
                            assert_eq!(
                                m.tensor_absorb(&t, j, &beta),
                                expect,
                                "absorb mismatch on {name}: k={k} a={a} b={bidx} j={j}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn pairing_characterization() {
        // ⟨τ₂(α), b_i⊗b_j⟩ = ∫(α·b_i·b_j) for all basis α, i, j, on every model.
        for name in SurfaceModel::BUILTIN_NAMES {
            let m = SurfaceModel::builtin(name).unwrap();
            for a in 0..m.dim() {
                let t = m.tau_push(2, &CohClass::basis(a));
                for i in 0..m.dim() {
                    for j in 0..m.dim() {
                        let mut probe = TensorClass::zero(2);
                        probe.add_term(vec![i, j], &Q::one());
                        let lhs = m.tensor_pairing(&t, &probe);
                        let rhs = m.integrate(&m.mul(
                            &m.mul(&CohClass::basis(a), &CohClass::basis(i)),
                            &CohClass::basis(j),
                        ));
                        assert_eq!(lhs, rhs, "pairing mismatch on {name}: a={a} i={i} j={j}");
                    }
                }
            }
        }
    }

    #[test]
    fn euler_contraction_all_models() {
        for name in SurfaceModel::BUILTIN_NAMES {
            let m = SurfaceModel::builtin(name).unwrap();
            for a in 0..m.dim() {
                let t = m.tau_push(2, &CohClass::basis(a));
                let contracted = m.tensor_contract_refined(&t, 0);
                let mut expect = TensorClass::zero(1);
                let ea = m.mul(&m.euler_class, &CohClass::basis(a));
                for (i, c) in &ea.0 {
                    expect.add_term(vec![*i], c);
                }
                assert_eq!(contracted, expect, "Euler contraction fails on {name} for basis {a}");
            }
        }
    }

    #[test]
    fn invalid_models_rejected() {
        // Non-associative table: h·h = h on a P2-shaped model breaks degree
        // additivity too; craft a degree-consistent but non-associative one.
        let bad = r#"{
            "name": "bad",
            "basis": [{"name":"1","degree":0},{"name":"a","degree":2},{"name":"b","degree":2},{"name":"p","degree":4}],
            "mult": [
                {"i":0,"j":0,"k":0,"c":"1"},
                {"i":0,"j":1,"k":1,"c":"1"},
                {"i":0,"j":2,"k":2,"c":"1"},
                {"i":0,"j":3,"k":3,"c":"1"},
                {"i":1,"j":1,"k":3,"c":"1"},
                {"i":1,"j":2,"k":3,"c":"1"},
                {"i":2,"j":2,"k":3,"c":"1"}
            ],
            "integral": {"p": "2"},
            "canonical_class": {},
            "euler_class": {"p": "4"},
            "point_class": "p"
        }"#;
        match SurfaceModel::load_json(bad) {
            Err(ModelError::Invariant(fails)) => {
                assert!(fails.iter().any(|f| f.contains("not normalized")), "{fails:?}");
            }
            other => panic!("expected invariant failure, got {other:?}"),
        }

        let missing_point = r#"{
            "name": "bad2",
            "basis": [{"name":"1","degree":0},{"name":"h","degree":2},{"name":"p","degree":4}],
            "mult": [{"i":0,"j":0,"k":0,"c":"1"}],
            "integral": {"p":"1"},
            "canonical_class": {},
            "euler_class": {},
            "point_class": "q"
        }"#;
        assert!(matches!(
            SurfaceModel::load_json(missing_point),
            Err(ModelError::Schema(_))
        ));

        let dup = r#"{
            "name": "bad3",
            "basis": [{"name":"1","degree":0},{"name":"p","degree":4}],
            "mult": [
                {"i":0,"j":0,"k":0,"c":"1"},
                {"i":0,"j":0,"k":0,"c":"1"},
                {"i":0,"j":1,"k":1,"c":"1"}
            ],
            "integral": {"p":"1"},
            "canonical_class": {},
            "euler_class": {},
            "point_class": "p"
        }"#;
        assert!(matches!(SurfaceModel::load_json(dup), Err(ModelError::Schema(_))));
    }

    #[test]
    fn permute_basis_roundtrip() {
        let m = SurfaceModel::builtin("P1xP1").unwrap();
        // Swap the two middle classes.
        let pm = m.permute_basis(&[0, 2, 1, 3]).unwrap();
        assert_ne!(m.fingerprint, pm.fingerprint);
        let f_old = m.basis_index("f").unwrap();
        let f_new = pm.basis_index("f").unwrap();
        let g_new = pm.basis_index("g").unwrap();
        assert_eq!(pm.mul_basis(f_new, g_new), &CohClass::basis(pm.point));
        assert_eq!(m.degree(f_old), pm.degree(f_new));
        // Double permutation restores the original fingerprint layout.
        let back = pm.permute_basis(&[0, 2, 1, 3]).unwrap();
        assert_eq!(back.mul_basis(1, 2), m.mul_basis(1, 2));
    }

    #[test]
    fn integrate_slot_and_refine_consistency() {
        // Second pushforward formula at k=2, j=1 (0-based 1):
        // Σ_i ±∫(α_{i,2}β)·α_{i,1} = τ_{1*}(αβ) when absorbing then integrating.
        let m = odd_model();
        for a in 0..m.dim() {
            for bidx in 0..m.dim() {
                let beta = CohClass::basis(bidx);
                let t = m.tau_push(2, &CohClass::basis(a));
                let absorbed = m.tensor_absorb(&t, 1, &beta);
                let contracted = m.tensor_integrate_slot(&absorbed, 1);
                let expect = m.tau_push(1, &m.mul(&CohClass::basis(a), &beta));
                assert_eq!(contracted, expect, "a={a} b={bidx}");
            }
        }
    }

    #[test]
    fn refine_matches_higher_tau() {
        let m = odd_model();
        for a in 0..m.dim() {
            let t2 = m.tau_push(2, &CohClass::basis(a));
            let t3 = m.tau_push(3, &CohClass::basis(a));
            // Refining either slot of τ₂ gives τ₃.
            assert_eq!(m.tensor_refine(&t2, 0), t3, "refine slot 0, a={a}");
            assert_eq!(m.tensor_refine(&t2, 1), t3, "refine slot 1, a={a}");
        }
    }
}
