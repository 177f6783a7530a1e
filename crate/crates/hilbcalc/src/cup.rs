//! Cup products, intersection numbers, and conversions between the
//! creation-monomial basis and the characteristic-class generator basis.
//!
//! For a partition-valued key `ρ` (see [`crate::hilbert::PartitionKey`]) the
//! class `𝔞_ρ(n)` is the padded creation monomial with one factor
//! `a_{-r}(c)` per part `r` of `ρ(c)`, factors ordered class-major with
//! parts ascending. These classes form a basis of `H*(X^[n])`.
//!
//! The bridge to cup products: multiplying by the characteristic class
//! `G_k(α, n)` is exactly applying the operator `𝔊_k(α)`. Every `𝔞_ρ(n)` is
//! a universal polynomial in the `G_k(c, n)` (class-by-class generators,
//! including `G_0(1_X, n)` — multiplication by `n`), so cup product against
//! `𝔞_ρ(n)` becomes a sequence of operator applications. The expansion is
//! found by downward induction on the weight `∥ρ∥`: the leading generator
//! product matches `𝔞_ρ` up to classes of strictly smaller weight, whose
//! `n`-independent coefficients are extracted by the stable-decomposition
//! sampler ([`Engine::decompose_stable`]).

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::engine::Engine;
use crate::fock::{CreationFactor, FockVector};
use crate::hilbert::PartitionKey;
use crate::rational::{factorial, format_q, parse_q, sign_pow, Q};
use crate::surface::{CohClass, SurfaceModel};

use std::collections::BTreeMap;

/// One generator: the class `G_k(c, n)` for a basis class `c` (or, in the
/// tautological-class expansion, `B_k(c, n)`). Ordered class-major, then by
/// order `k` — matching the factor order of `𝔞_ρ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ChernGen {
    pub c: usize,
    pub k: u32,
}

/// A polynomial in generators, stored as sorted monomials. Generators on odd
/// basis classes are odd: they anticommute and square to zero; the formal
/// multiplication tracks the Koszul signs.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GPolynomial {
    pub terms: BTreeMap<Vec<ChernGen>, Q>,
}

impl GPolynomial {
    pub fn zero() -> GPolynomial {
        GPolynomial { terms: BTreeMap::new() }
    }

    pub fn one() -> GPolynomial {
        let mut p = GPolynomial::zero();
        p.terms.insert(Vec::new(), Q::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, gens: Vec<ChernGen>, coeff: &Q) {
        if coeff.is_zero() {
            return;
        }
        debug_assert!(gens.windows(2).all(|w| w[0] <= w[1]), "unsorted generator monomial");
        let entry = self.terms.entry(gens).or_insert_with(Q::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn add(&self, other: &GPolynomial) -> GPolynomial {
        let mut out = self.clone();
        for (g, c) in &other.terms {
            out.add_term(g.clone(), c);
        }
        out
    }

    pub fn scale(&self, k: &Q) -> GPolynomial {
        if k.is_zero() {
            return GPolynomial::zero();
        }
        GPolynomial {
            terms: self.terms.iter().map(|(g, c)| (g.clone(), c * k)).collect(),
        }
    }

    /// Formal super-commutative product.
    pub fn mul(&self, model: &SurfaceModel, other: &GPolynomial) -> GPolynomial {
        let mut out = GPolynomial::zero();
        for (ga, ca) in &self.terms {
            'outer: for (gb, cb) in &other.terms {
                let mut gens = ga.clone();
                let mut sign = 0u8;
                for g in gb {
                    let odd = model.parity(g.c) == 1;
                    let pos = gens.partition_point(|e| e <= g);
                    if odd {
                        if gens[..pos].last() == Some(g) {
                            continue 'outer; // odd generator squared
                        }
                        sign = (sign
                            + gens[pos..]
                                .iter()
                                .map(|e| model.parity(e.c))
                                .sum::<u8>())
                            % 2;
                    }
                    gens.insert(pos, *g);
                }
                let mut q = ca * cb;
                if sign == 1 {
                    q = -q;
                }
                out.add_term(gens, &q);
            }
        }
        out
    }

    /// The largest total order `Σ(k_i+1)` over monomials (the weight the
    /// polynomial reaches), 0 for constants.
    pub fn max_weight(&self) -> u32 {
        self.terms
            .keys()
            .map(|g| g.iter().map(|e| e.k + 1).sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn to_cache_json(&self) -> Value {
        let arr: Vec<Value> = self
            .terms
            .iter()
            .map(|(g, c)| {
                json!({
                    "gens": g.iter().map(|e| json!([e.c, e.k])).collect::<Vec<_>>(),
                    "coeff": format_q(c),
                })
            })
            .collect();
        Value::Array(arr)
    }

    pub fn from_cache_json(value: &Value) -> Result<GPolynomial, String> {
        let arr = value.as_array().ok_or("expected array")?;
        let mut out = GPolynomial::zero();
        for t in arr {
            let gens: Vec<ChernGen> = t
                .get("gens")
                .and_then(|v| v.as_array())
                .ok_or("missing gens")?
                .iter()
                .map(|g| {
                    let pair = g.as_array().filter(|a| a.len() == 2).ok_or("bad gen")?;
                    Ok(ChernGen {
                        c: pair[0].as_u64().ok_or("bad gen class")? as usize,
                        k: pair[1].as_u64().ok_or("bad gen order")? as u32,
                    })
                })
                .collect::<Result<_, String>>()?;
            let coeff = parse_q(t.get("coeff").and_then(|v| v.as_str()).ok_or("missing coeff")?)?;
            out.add_term(gens, &coeff);
        }
        Ok(out)
    }
}

impl Engine {
    /// The basis class `𝔞_ρ(n)`: creation factors `a_{-r}(c)` for the parts
    /// of `ρ`, class-major with parts ascending, padded to weight `n`
    /// (zero when `n < ∥ρ∥`).
    pub fn heisenberg_class(&self, rho: &PartitionKey, n: u32) -> FockVector {
        let model = &*self.model;
        let mut v = FockVector::vacuum();
        for (c, r) in rho.factor_sequence().into_iter().rev() {
            v = v.create(model, r, &CohClass::basis(c));
        }
        v.pad(model, n)
    }

    /// Express a weight-`n` vector over the reduced-key basis `𝔞_ν̄(n)`,
    /// `∥ν̄∥ ≤ n`. Each canonical monomial determines its key by stripping
    /// the padding factors `a_{-1}(1_X)`; the remaining coefficient
    /// conversion accounts for the padding normalization and the Koszul sign
    /// between the stored factor order and the class-major key order.
    pub fn decompose_intrinsic(&self, v: &FockVector, n: u32) -> BTreeMap<PartitionKey, Q> {
        let model = &*self.model;
        let mut out: BTreeMap<PartitionKey, Q> = BTreeMap::new();
        for (mono, coeff) in &v.terms {
            assert_eq!(mono.weight(), n, "decompose: monomial of weight {} at n={n}", mono.weight());
            let pad = CreationFactor { r: 1, c: model.unit };
            let intrinsic: Vec<CreationFactor> =
                mono.factors.iter().copied().filter(|f| *f != pad).collect();
            let nu = PartitionKey::from_factors(&intrinsic);
            let reference = self.heisenberg_class(&nu, n);
            assert_eq!(reference.terms.len(), 1, "key class must be a single monomial");
            let (ref_mono, ref_coeff) = reference.terms.iter().next().unwrap();
            assert_eq!(ref_mono, mono, "key/monomial mismatch");
            let d = coeff / ref_coeff;
            let entry = out.entry(nu).or_insert_with(Q::zero);
            *entry += d;
            if entry.is_zero() {
                out.retain(|_, c| !c.is_zero());
            }
        }
        out
    }

    /// The expansion of `𝔞_ρ` as a universal polynomial in the generators
    /// `G_k(c)`, valid at every `n` at once (memoized).
    ///
    /// The generator monomial read off `ρ` part-by-part (`a_{-r}(c)` ↦
    /// `G_{r-1}(c)`, so a part 1 on the unit class contributes the factor
    /// `G_0(1_X) = n`) matches `𝔞_ρ` with coefficient `∏ (−1)^{r−1} r!`, up
    /// to classes of weight `≤ ∥ρ∥ − 1`; their stable coefficients feed the
    /// recursion, which therefore descends strictly in weight.
    pub fn to_g_basis(&self, rho: &PartitionKey) -> GPolynomial {
        if rho.is_empty() {
            return GPolynomial::one();
        }
        if let Some(p) = self.gb_cache.lock().unwrap().get(rho) {
            return p.clone();
        }
        if let Some(store) = &self.store {
            let key = format!("gb-v3-{}-{}", self.model.fingerprint, rho.cache_tag());
            if let Some(v) = store.get(&key) {
                if let Ok(p) = GPolynomial::from_cache_json(&v) {
                    self.gb_cache.lock().unwrap().insert(rho.clone(), p.clone());
                    return p;
                }
            }
        }
        let gens: Vec<ChernGen> = rho
            .factor_sequence()
            .into_iter()
            .map(|(c, r)| ChernGen { c, k: r - 1 })
            .collect();
        debug_assert!(gens.windows(2).all(|w| w[0] <= w[1]));
        let mut c_lead = Q::one();
        for (_, r) in rho.factor_sequence() {
            c_lead *= sign_pow((r - 1) as u64) * factorial(r as u64);
        }
        let diff = |n: u32| -> Result<FockVector, String> {
            Ok(self
                .heisenberg_class(rho, n)
                .sub(&self.g_monomial_class(&gens, n).scale(&c_lead)))
        };
        let row = self
            .decompose_stable(&diff, rho.weight().saturating_sub(1))
            .unwrap_or_else(|e| {
                panic!("generator expansion failed for {}: {e}", rho.display(&self.model))
            });
        let mut poly = GPolynomial::zero();
        poly.add_term(gens, &c_lead);
        for (nu, d) in row {
            poly = poly.add(&self.to_g_basis(&nu).scale(&d));
        }
        self.gb_cache.lock().unwrap().insert(rho.clone(), poly.clone());
        if let Some(store) = &self.store {
            let key = format!("gb-v3-{}-{}", self.model.fingerprint, rho.cache_tag());
            store.put(&key, &poly.to_cache_json());
        }
        poly
    }

    /// Evaluate a generator monomial at `n`: apply the Chern operators
    /// right-to-left to the unit of `H*(X^[n])`.
    pub fn g_monomial_class(&self, gens: &[ChernGen], n: u32) -> FockVector {
        let mut v = FockVector::unit_of(&self.model, n);
        for g in gens.iter().rev() {
            v = self.chern_apply(g.k, &CohClass::basis(g.c), &v);
        }
        v
    }

    /// Evaluate a generator polynomial at `n`.
    pub fn g_eval(&self, poly: &GPolynomial, n: u32) -> FockVector {
        let mut out = FockVector::zero();
        for (gens, coeff) in &poly.terms {
            out = out.add(&self.g_monomial_class(gens, n).scale(coeff));
        }
        out
    }

    /// Apply a generator polynomial to an arbitrary vector (cup product with
    /// the polynomial's value).
    pub fn g_apply(&self, poly: &GPolynomial, v: &FockVector) -> FockVector {
        let mut out = FockVector::zero();
        for (gens, coeff) in &poly.terms {
            let mut w = v.clone();
            for g in gens.iter().rev() {
                w = self.chern_apply(g.k, &CohClass::basis(g.c), &w);
            }
            out = out.add(&w.scale(coeff));
        }
        out
    }

    /// Cup product on `H*(X^[n])`. Both vectors must be weight-homogeneous
    /// of weight `n` (zero is allowed).
    pub fn cup(&self, a: &FockVector, b: &FockVector, n: u32) -> Result<FockVector, String> {
        for (label, v) in [("first", a), ("second", b)] {
            if let Some(w) = v.homogeneous_weight() {
                if w != n {
                    return Err(format!(
                        "{label} factor lives on X^[{w}] but the product was requested on X^[{n}]"
                    ));
                }
            } else if !v.is_zero() {
                return Err(format!("{label} factor is not weight-homogeneous"));
            }
        }
        if a.is_zero() || b.is_zero() {
            return Ok(FockVector::zero());
        }
        let mut out = FockVector::zero();
        for (rho, d) in self.decompose_intrinsic(a, n) {
            let poly = self.to_g_basis(&rho);
            out = out.add(&self.g_apply(&poly, b).scale(&d));
        }
        Ok(out)
    }

    /// Intersection number `∫_{X^[n]} ∏ G_{k_i}(α_i, n)`: zero unless the
    /// total degree is `4n`; otherwise pair the product against the unit.
    pub fn intersection(&self, gens: &[(u32, CohClass)], n: u32) -> Q {
        let model = &*self.model;
        let mut degree: i64 = 0;
        for (k, alpha) in gens {
            match model.homogeneous_degree(alpha) {
                Some(d) => degree += 2 * (*k as i64) + d as i64,
                None => {
                    if alpha.is_zero() {
                        return Q::zero();
                    }
                    // Mixed-degree input: split by components.
                    let mut total = Q::zero();
                    for (ci, cc) in &alpha.0 {
                        let mut gens2 = gens.to_vec();
                        let pos = gens2
                            .iter()
                            .position(|(kk, aa)| kk == k && aa == alpha)
                            .unwrap();
                        gens2[pos] = (*k, CohClass::basis(*ci));
                        total += self.intersection(&gens2, n) * cc;
                    }
                    return total;
                }
            }
        }
        if degree != 4 * n as i64 {
            return Q::zero();
        }
        let mut v = FockVector::unit_of(model, n);
        for (k, alpha) in gens.iter().rev() {
            v = self.chern_apply(*k, alpha, &v);
        }
        v.pairing(model, &FockVector::unit_of(model, n))
    }

    /// Expansion of `G_k(α, n)` as a universal polynomial in tautological
    /// classes `B_m(c, n)` (generators encoded as [`ChernGen`] with `k = m`).
    /// Leading term: `((−1)^k/(k+1)!)·B_k(α)`.
    pub fn chern_in_b_basis(&self, k: u32, alpha: &CohClass) -> GPolynomial {
        let mut out = GPolynomial::zero();
        for (ci, ca) in &alpha.0 {
            out = out.add(&self.chern_in_b_basis_basis(k, *ci).scale(ca));
        }
        out
    }

    fn chern_in_b_basis_basis(&self, k: u32, a_idx: usize) -> GPolynomial {
        let model = &*self.model;
        // Expansion of the single-part key {(k+1, a)}: 𝔞 = B_k(a, ·) equals
        // c_lead·G_k(a) + (lower-order G-monomials).
        let key = PartitionKey::single(a_idx, k + 1);
        let poly = self.to_g_basis(&key);
        let c_lead = sign_pow(k as u64) * factorial((k + 1) as u64);
        let lead_gen = vec![ChernGen { c: a_idx, k }];
        // G_k(a) = (1/c_lead)·(B_k(a) − lower(G…)), replacing each lower
        // G-generator by its own B-expansion (strictly smaller order).
        let mut b_poly = GPolynomial::zero();
        b_poly.add_term(lead_gen.clone(), &Q::one());
        for (gens, coeff) in &poly.terms {
            if gens == &lead_gen {
                assert_eq!(coeff, &c_lead, "leading coefficient mismatch");
                continue;
            }
            let mut product = GPolynomial::one();
            for g in gens {
                assert!(g.k < k, "non-decreasing order in generator expansion");
                product = product.mul(model, &self.chern_in_b_basis_basis(g.k, g.c));
            }
            b_poly = b_poly.add(&product.scale(&(-coeff.clone())));
        }
        b_poly.scale(&(Q::one() / c_lead))
    }

    /// Evaluate a tautological-class polynomial at `n` (generators are
    /// `B_k(c, n)`, multiplied by cup product).
    pub fn b_poly_eval(&self, poly: &GPolynomial, n: u32) -> Result<FockVector, String> {
        let mut out = FockVector::zero();
        for (gens, coeff) in &poly.terms {
            let mut w = FockVector::unit_of(&self.model, n);
            for g in gens.iter().rev() {
                let b = self.b_class(g.k, &CohClass::basis(g.c), n);
                w = self.cup(&b, &w, n)?;
            }
            out = out.add(&w.scale(coeff));
        }
        Ok(out)
    }

    /// Check that a product of characteristic classes expands inside the
    /// universal envelope: every monomial of `∏ G_{k_i}(α_i, n)`, after
    /// stripping padding, has weight at most `Σ(k_i+1)`, and the whole class
    /// is homogeneous of degree `Σ(2k_i + |α_i|)`.
    pub fn verify_universal_shape(&self, gens: &[(u32, CohClass)], n: u32) -> Result<(), String> {
        let model = &*self.model;
        let mut v = FockVector::unit_of(model, n);
        for (k, alpha) in gens.iter().rev() {
            v = self.chern_apply(*k, alpha, &v);
        }
        let weight_bound: u32 = gens.iter().map(|(k, _)| k + 1).sum();
        let mut degree: u32 = 0;
        for (k, alpha) in gens {
            let d = model
                .homogeneous_degree(alpha)
                .ok_or("shape check needs homogeneous classes")?;
            degree += 2 * k + d as u32;
        }
        let pad = CreationFactor { r: 1, c: model.unit };
        for mono in v.terms.keys() {
            let stripped: u32 = mono
                .factors
                .iter()
                .filter(|f| **f != pad)
                .map(|f| f.r)
                .sum();
            if stripped > weight_bound {
                return Err(format!(
                    "monomial of intrinsic weight {stripped} exceeds bound {weight_bound}"
                ));
            }
            if mono.degree(model) != degree {
                return Err(format!(
                    "inhomogeneous product: found degree {}, expected {degree}",
                    mono.degree(model)
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{qq, qz};
    use crate::surface::SurfaceModel;

    fn engine(name: &str) -> Engine {
        Engine::new(SurfaceModel::builtin(name).unwrap())
    }

    fn basis(m: &SurfaceModel, name: &str) -> CohClass {
        CohClass::basis(m.basis_index(name).unwrap())
    }

    #[test]
    fn heisenberg_class_examples() {
        let eng = engine("P2");
        let m = &*eng.model;
        let h = m.basis_index("h").unwrap();
        // 𝔞_{(1,h)}(2) = 𝟙_{-1} a_{-1}(h)|0⟩.
        let key = PartitionKey::single(h, 1);
        let v = eng.heisenberg_class(&key, 2);
        let expect = FockVector::vacuum()
            .create(m, 1, &basis(m, "h"))
            .pad(m, 2);
        assert_eq!(v, expect);
        // Below its weight the class vanishes.
        assert!(eng.heisenberg_class(&key, 0).is_zero());
    }

    #[test]
    fn decompose_roundtrip() {
        let eng = engine("Abelianlike");
        let m = &*eng.model;
        for n in 1..=4u32 {
            for mono in crate::fock::enumerate_monomials(m, n) {
                let mut v = FockVector::zero();
                v.add_term(mono, &qq(3, 7));
                let decomp = eng.decompose_intrinsic(&v, n);
                let mut back = FockVector::zero();
                for (key, d) in &decomp {
                    back = back.add(&eng.heisenberg_class(key, n).scale(d));
                }
                assert_eq!(back, v);
            }
        }
    }

    #[test]
    fn cup_on_x1_is_surface_product() {
        // n = 1 reduces to H*(X).
        for name in SurfaceModel::BUILTIN_NAMES {
            let eng = engine(name);
            let m = &*eng.model;
            for i in 0..m.dim() {
                for j in 0..m.dim() {
                    let a = FockVector::vacuum().create(m, 1, &CohClass::basis(i));
                    let b = FockVector::vacuum().create(m, 1, &CohClass::basis(j));
                    let got = eng.cup(&a, &b, 1).unwrap();
                    let expect = FockVector::vacuum()
                        .create(m, 1, &m.mul(&CohClass::basis(i), &CohClass::basis(j)));
                    assert_eq!(got, expect, "{name}: {i}·{j}");
                }
            }
        }
    }

    #[test]
    fn cup_weight_mismatch_rejected() {
        let eng = engine("P2");
        let m = &*eng.model;
        let a = FockVector::vacuum().create(m, 1, &basis(m, "h"));
        let b = FockVector::vacuum().create(m, 2, &basis(m, "h"));
        assert!(eng.cup(&a, &b, 2).is_err());
        assert!(eng.cup(&b, &a, 1).is_err());
        assert!(eng.cup(&b, &b, 2).is_ok());
    }

    #[test]
    fn square_of_degree_two_class_p2() {
        // 𝔞_{(1,h)}(2)² = a_{-1}(h)²|0⟩ + 𝟙_{-1} a_{-1}(p)|0⟩.
        let eng = engine("P2");
        let m = &*eng.model;
        let h = m.basis_index("h").unwrap();
        let key = PartitionKey::single(h, 1);
        let a = eng.heisenberg_class(&key, 2);
        let got = eng.cup(&a, &a, 2).unwrap();
        let hh = FockVector::vacuum()
            .create(m, 1, &basis(m, "h"))
            .create(m, 1, &basis(m, "h"));
        let p1 = FockVector::vacuum().create(m, 1, &basis(m, "p")).pad(m, 2);
        assert_eq!(got, hh.add(&p1));
    }

    #[test]
    fn to_g_basis_roundtrip_small() {
        for name in ["P2", "Abelianlike"] {
            let eng = engine(name);
            let m = &*eng.model;
            for w in 1..=3u32 {
                for key in PartitionKey::enumerate(m, w) {
                    let poly = eng.to_g_basis(&key);
                    for n in [w, w + 1, w + 2] {
                        let got = eng.g_eval(&poly, n);
                        let expect = eng.heisenberg_class(&key, n);
                        assert_eq!(got, expect, "{name}: key {key:?} at n={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn leading_coefficient_single_part() {
        // For ρ = {(r, c)}: the G_{r-1}(c) coefficient is (−1)^{r−1}·r!.
        let eng = engine("P2");
        let m = &*eng.model;
        let h = m.basis_index("h").unwrap();
        for r in 1..=3u32 {
            let poly = eng.to_g_basis(&PartitionKey::single(h, r));
            let lead = vec![ChernGen { c: h, k: r - 1 }];
            let expect = sign_pow((r - 1) as u64) * factorial(r as u64);
            assert_eq!(poly.terms.get(&lead), Some(&expect), "r={r}");
        }
    }

    #[test]
    fn chern_in_b_basis_roundtrip() {
        let eng = engine("P2");
        let m = &*eng.model;
        let h = basis(m, "h");
        for k in 0..=2u32 {
            let poly = eng.chern_in_b_basis(k, &h);
            // Leading coefficient.
            let lead = vec![ChernGen { c: m.basis_index("h").unwrap(), k }];
            assert_eq!(
                poly.terms.get(&lead),
                Some(&(sign_pow(k as u64) / factorial((k + 1) as u64))),
                "k={k}"
            );
            // Evaluate at n = 3 and compare to the class itself.
            let got = eng.b_poly_eval(&poly, 3).unwrap();
            let expect = eng.chern_class(k, &h, 3);
            assert_eq!(got, expect, "k={k}");
        }
    }

    #[test]
    fn intersection_numbers_basic() {
        let eng = engine("P2");
        let m = &*eng.model;
        let h = basis(m, "h");
        let p = basis(m, "p");
        // n = 1: ∫ G_0(h)·G_0(h) = ∫(h²) = 1 — degree 4 = 4·1.
        let v = eng.intersection(&[(0, h.clone()), (0, h.clone())], 1);
        assert_eq!(v, qz(1));
        // Degree mismatch kills it.
        assert_eq!(eng.intersection(&[(0, h.clone())], 1), qz(0));
        // n = 1: ∫ G_0(p) = 1.
        assert_eq!(eng.intersection(&[(0, p.clone())], 1), qz(1));
        // n = 2: ∫ G_0(p)·G_0(p): points squared on X^[2]:
        // B_0(p,2)² = (𝟙_{-1}a_{-1}(p))² — cup square, then pair.
        let b0p = eng.b_class(0, &p, 2);
        let sq = eng.cup(&b0p, &b0p, 2).unwrap();
        let direct = sq.pairing(m, &FockVector::unit_of(m, 2));
        assert_eq!(eng.intersection(&[(0, p.clone()), (0, p.clone())], 2), direct);
    }

    #[test]
    fn universal_shape_small() {
        let eng = engine("P1xP1");
        let m = &*eng.model;
        let f = basis(m, "f");
        let g = basis(m, "g");
        for n in 2..=4u32 {
            eng.verify_universal_shape(&[(1, f.clone()), (0, g.clone())], n)
                .unwrap();
            eng.verify_universal_shape(&[(2, m.unit_class()), (1, f.clone())], n)
                .unwrap();
        }
    }
}
