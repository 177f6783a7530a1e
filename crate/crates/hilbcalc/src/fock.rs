//! The bigraded Fock space spanned by creation-operator monomials applied to
//! the vacuum.
//!
//! A monomial `a_{-r_1}(c_1) ··· a_{-r_k}(c_k) |0⟩` is stored with its
//! factors sorted by `(r, c)`; reordering a written product into this
//! canonical order only introduces Koszul signs (operators with distinct
//! indices or classes super-commute), which [`FockVector::create`] tracks.
//! A monomial containing a repeated factor with an odd-degree class is zero.
//!
//! The weight-`n` graded piece models `H*(X^[n])`; the cohomological degree
//! of a factor `a_{-r}(c)` is `2(r-1) + deg c`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::rational::{factorial, format_q, parse_q, Q};
use crate::surface::{CohClass, SurfaceModel};

/// One creation factor `a_{-r}(c)` with `r ≥ 1` and `c` a basis-class index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CreationFactor {
    pub r: u32,
    pub c: usize,
}

/// A canonical creation monomial: factors sorted ascending by `(r, c)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default, Hash)]
pub struct HeisenbergMonomial {
    pub factors: Vec<CreationFactor>,
}

impl HeisenbergMonomial {
    pub fn vacuum() -> Self {
        HeisenbergMonomial { factors: Vec::new() }
    }

    /// Total weight `Σ r_i`; the monomial lives in `H*(X^[weight])`.
    pub fn weight(&self) -> u32 {
        self.factors.iter().map(|f| f.r).sum()
    }

    /// Cohomological degree `Σ (2(r_i - 1) + deg c_i)`.
    pub fn degree(&self, model: &SurfaceModel) -> u32 {
        self.factors
            .iter()
            .map(|f| 2 * (f.r - 1) + model.degree(f.c) as u32)
            .sum()
    }

    /// Parity of the cohomological degree.
    pub fn parity(&self, model: &SurfaceModel) -> u8 {
        (self.degree(model) % 2) as u8
    }
}

/// A vector in the Fock space: sparse rational combination of canonical
/// monomials.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FockVector {
    pub terms: BTreeMap<HeisenbergMonomial, Q>,
}

impl FockVector {
    pub fn zero() -> Self {
        FockVector { terms: BTreeMap::new() }
    }

    /// The vacuum `|0⟩` with coefficient 1.
    pub fn vacuum() -> Self {
        let mut v = FockVector::zero();
        v.add_term(HeisenbergMonomial::vacuum(), &Q::one());
        v
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, mono: HeisenbergMonomial, coeff: &Q) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(mono).or_insert_with(Q::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn add(&self, other: &FockVector) -> FockVector {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &FockVector) -> FockVector {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), &(-c.clone()));
        }
        out
    }

    pub fn scale(&self, k: &Q) -> FockVector {
        if k.is_zero() {
            return FockVector::zero();
        }
        FockVector {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn coeff(&self, mono: &HeisenbergMonomial) -> Q {
        self.terms.get(mono).cloned().unwrap_or_else(Q::zero)
    }

    /// Weight shared by all monomials, if the vector is weight-homogeneous
    /// and nonzero.
    pub fn homogeneous_weight(&self) -> Option<u32> {
        let mut w = None;
        for m in self.terms.keys() {
            match w {
                None => w = Some(m.weight()),
                Some(w0) if w0 != m.weight() => return None,
                _ => {}
            }
        }
        w
    }

    /// Largest monomial weight occurring (0 for the zero vector).
    pub fn max_weight(&self) -> u32 {
        self.terms.keys().map(|m| m.weight()).max().unwrap_or(0)
    }

    /// Cohomological degree shared by all monomials, if homogeneous.
    pub fn homogeneous_degree(&self, model: &SurfaceModel) -> Option<u32> {
        let mut d = None;
        for m in self.terms.keys() {
            match d {
                None => d = Some(m.degree(model)),
                Some(d0) if d0 != m.degree(model) => return None,
                _ => {}
            }
        }
        d
    }

    /// Apply the creation operator `a_{-r}(class)` from the left.
    pub fn create(&self, model: &SurfaceModel, r: u32, class: &CohClass) -> FockVector {
        let mut out = FockVector::zero();
        for (ci, cc) in &class.0 {
            let new = CreationFactor { r, c: *ci };
            let odd = model.parity(*ci) == 1;
            'terms: for (mono, coeff) in &self.terms {
                let pos = mono.factors.partition_point(|f| *f < new);
                if odd {
                    // A repeated odd factor squares to zero.
                    if mono.factors[pos..].first() == Some(&new) {
                        continue 'terms;
                    }
                }
                let mut f = coeff * cc;
                if odd {
                    let jumped: u8 = mono.factors[..pos]
                        .iter()
                        .map(|g| model.parity(g.c))
                        .sum::<u8>()
                        % 2;
                    if jumped == 1 {
                        f = -f;
                    }
                }
                let mut factors = mono.factors.clone();
                factors.insert(pos, new);
                out.add_term(HeisenbergMonomial { factors }, &f);
            }
        }
        out
    }

    /// Apply the annihilation operator `a_{r}(class)` (with `r ≥ 1`) from the
    /// left: each factor `a_{-r}(c_t)` can be contracted, contributing
    /// `(−1)^{|class|·(parities before t)} · (−r) · ∫(class · c_t)` times the
    /// monomial with factor `t` removed.
    pub fn annihilate(&self, model: &SurfaceModel, r: u32, class: &CohClass) -> FockVector {
        let mut out = FockVector::zero();
        for (ci, cc) in &class.0 {
            let c_parity = model.parity(*ci);
            for (mono, coeff) in &self.terms {
                let mut jumped: u8 = 0;
                for (t, f) in mono.factors.iter().enumerate() {
                    if f.r == r {
                        let w = model.integrate_product(
                            &CohClass::basis(*ci),
                            &CohClass::basis(f.c),
                        );
                        if !w.is_zero() {
                            let mut q = coeff * cc * w * Q::from_integer((-(r as i64)).into());
                            if c_parity == 1 && jumped == 1 {
                                q = -q;
                            }
                            let mut factors = mono.factors.clone();
                            factors.remove(t);
                            out.add_term(HeisenbergMonomial { factors }, &q);
                        }
                    }
                    jumped = (jumped + c_parity * model.parity(f.c)) % 2;
                }
            }
        }
        out
    }

    /// The bilinear form with `(|0⟩, |0⟩) = 1` induced by declaring
    /// `a_{-r}(c)` adjoint to `(−1)^r a_{r}(c)` up to the super sign:
    /// `(a_{-r}(c)·w, v) = (−1)^{r + |c||w|} (w, a_r(c)·v)`.
    pub fn pairing(&self, model: &SurfaceModel, other: &FockVector) -> Q {
        let mut acc = Q::zero();
        for (mono, coeff) in &self.terms {
            let p = Self::pairing_mono(model, &mono.factors, other);
            acc += coeff * p;
        }
        acc
    }

    fn pairing_mono(model: &SurfaceModel, factors: &[CreationFactor], v: &FockVector) -> Q {
        match factors.split_first() {
            None => v.coeff(&HeisenbergMonomial::vacuum()),
            Some((head, rest)) => {
                let moved = v.annihilate(model, head.r, &CohClass::basis(head.c));
                if moved.is_zero() {
                    return Q::zero();
                }
                let rest_parity: u8 = rest.iter().map(|f| model.parity(f.c)).sum::<u8>() % 2;
                let mut sign = Q::one();
                if (head.r % 2 == 1) ^ (model.parity(head.c) == 1 && rest_parity == 1) {
                    sign = -sign;
                }
                sign * Self::pairing_mono(model, rest, &moved)
            }
        }
    }

    /// Extend each monomial of weight `w ≤ n` to weight `n` by the normalized
    /// unit-class padding `(1/(n-w)!) a_{-1}(1_X)^{n-w}`; monomials of weight
    /// `> n` are dropped.
    pub fn pad(&self, model: &SurfaceModel, n: u32) -> FockVector {
        let mut out = FockVector::zero();
        let pad_factor = CreationFactor { r: 1, c: model.unit };
        for (mono, coeff) in &self.terms {
            let w = mono.weight();
            if w > n {
                continue;
            }
            let j = n - w;
            let mut factors = mono.factors.clone();
            for _ in 0..j {
                let pos = factors.partition_point(|f| *f < pad_factor);
                factors.insert(pos, pad_factor);
            }
            let q = coeff / factorial(j as u64);
            out.add_term(HeisenbergMonomial { factors }, &q);
        }
        out
    }

    /// The unit of `H*(X^[n])` as a Fock vector.
    pub fn unit_of(model: &SurfaceModel, n: u32) -> FockVector {
        FockVector::vacuum().pad(model, n)
    }

    /// Serialize per the CLI JSON format:
    /// `[{"factors": [{"r": 1, "c": "h"}, …], "coeff": "p/q"}, …]`.
    pub fn to_json(&self, model: &SurfaceModel) -> Value {
        let arr: Vec<Value> = self
            .terms
            .iter()
            .map(|(m, c)| {
                json!({
                    "factors": m
                        .factors
                        .iter()
                        .map(|f| json!({"r": f.r, "c": model.basis[f.c].name}))
                        .collect::<Vec<_>>(),
                    "coeff": format_q(c),
                })
            })
            .collect();
        Value::Array(arr)
    }

    /// Parse the CLI JSON format. Factor lists may be given in any order;
    /// they are interpreted as the product of creation operators in the
    /// written order, so reordering introduces the appropriate signs.
    pub fn from_json(model: &SurfaceModel, value: &Value) -> Result<FockVector, String> {
        let arr = value.as_array().ok_or("expected a JSON array of terms")?;
        let mut out = FockVector::zero();
        for (ti, term) in arr.iter().enumerate() {
            let obj = term.as_object().ok_or(format!("term {ti}: expected an object"))?;
            let coeff_str = obj
                .get("coeff")
                .and_then(|v| v.as_str())
                .ok_or(format!("term {ti}: missing string field \"coeff\""))?;
            let coeff = parse_q(coeff_str).map_err(|e| format!("term {ti}: {e}"))?;
            let factors = obj
                .get("factors")
                .and_then(|v| v.as_array())
                .ok_or(format!("term {ti}: missing array field \"factors\""))?;
            let mut mono = FockVector::vacuum();
            for f in factors.iter().rev() {
                let fo = f.as_object().ok_or(format!("term {ti}: bad factor"))?;
                let r = fo
                    .get("r")
                    .and_then(|v| v.as_u64())
                    .filter(|&r| r >= 1)
                    .ok_or(format!("term {ti}: factor field \"r\" must be a positive integer"))?;
                let cname = fo
                    .get("c")
                    .and_then(|v| v.as_str())
                    .ok_or(format!("term {ti}: factor field \"c\" must be a basis name"))?;
                let ci = model
                    .basis_index(cname)
                    .ok_or(format!("term {ti}: unknown basis class {cname:?}"))?;
                mono = mono.create(model, r as u32, &CohClass::basis(ci));
            }
            for (m, c) in &mono.terms {
                out.add_term(m.clone(), &(c * &coeff));
            }
        }
        Ok(out)
    }
}

/// All canonical monomials of weight `n` over the model's basis.
pub fn enumerate_monomials(model: &SurfaceModel, n: u32) -> Vec<HeisenbergMonomial> {
    let mut out = Vec::new();
    let mut current: Vec<CreationFactor> = Vec::new();
    fn go(
        model: &SurfaceModel,
        remaining: u32,
        min: CreationFactor,
        current: &mut Vec<CreationFactor>,
        out: &mut Vec<HeisenbergMonomial>,
    ) {
        if remaining == 0 {
            out.push(HeisenbergMonomial { factors: current.clone() });
            return;
        }
        for r in min.r..=remaining {
            let c0 = if r == min.r { min.c } else { 0 };
            for c in c0..model.dim() {
                let f = CreationFactor { r, c };
                if model.parity(c) == 1 && current.last() == Some(&f) {
                    continue; // odd classes cannot repeat
                }
                current.push(f);
                go(model, remaining - r, f, current, out);
                current.pop();
            }
        }
    }
    go(model, n, CreationFactor { r: 1, c: 0 }, &mut current, &mut out);
    out
}

/// Dimension of `H^i(X^[n])` in the model: the number of canonical monomials
/// of weight `n` and cohomological degree `i`.
pub fn graded_dimension(model: &SurfaceModel, n: u32, i: u32) -> u64 {
    enumerate_monomials(model, n)
        .iter()
        .filter(|m| m.degree(model) == i)
        .count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{qq, qz};
    use std::sync::Arc;

    fn p2() -> Arc<SurfaceModel> {
        SurfaceModel::builtin("P2").unwrap()
    }

    fn odd_model() -> Arc<SurfaceModel> {
        SurfaceModel::builtin("Abelianlike").unwrap()
    }

    #[test]
    fn create_orders_factors() {
        let m = p2();
        let h = CohClass::basis(m.basis_index("h").unwrap());
        let one = m.unit_class();
        // a_{-2}(h) a_{-1}(1) |0⟩ built in two orders gives the same monomial.
        let v1 = FockVector::vacuum().create(&m, 1, &one).create(&m, 2, &h);
        let v2 = FockVector::vacuum().create(&m, 2, &h).create(&m, 1, &one);
        assert_eq!(v1, v2);
        assert_eq!(v1.terms.len(), 1);
        let mono = v1.terms.keys().next().unwrap();
        assert_eq!(mono.weight(), 3);
        assert_eq!(mono.degree(&m), 4);
    }

    #[test]
    fn odd_factors_anticommute() {
        let m = odd_model();
        let x = CohClass::basis(m.basis_index("x").unwrap());
        let y = CohClass::basis(m.basis_index("y").unwrap());
        // a_{-1}(x) a_{-2}(x): no sign to canonicalize (already ordered).
        let v_xy = FockVector::vacuum().create(&m, 2, &x).create(&m, 1, &x);
        assert_eq!(v_xy.terms.len(), 1);
        assert_eq!(v_xy.terms.values().next().unwrap(), &qz(1));
        // Reversed application order: a_{-2}(x) a_{-1}(x)|0⟩ — the new factor
        // (2,x) jumps over (1,x): sign −1.
        let v_yx = FockVector::vacuum().create(&m, 1, &x).create(&m, 2, &x);
        assert_eq!(v_yx.terms.values().next().unwrap(), &qz(-1));
        // Repeated odd factor dies.
        let dead = FockVector::vacuum().create(&m, 1, &x).create(&m, 1, &x);
        assert!(dead.is_zero());
        let alive = FockVector::vacuum().create(&m, 1, &y).create(&m, 1, &x);
        assert_eq!(alive.terms.len(), 1);
    }

    #[test]
    fn annihilate_contracts() {
        let m = p2();
        let h = CohClass::basis(m.basis_index("h").unwrap());
        // a_2(h) a_{-2}(h) |0⟩ = −2·∫(h·h)·|0⟩ = −2|0⟩.
        let v = FockVector::vacuum().create(&m, 2, &h);
        let w = v.annihilate(&m, 2, &h);
        assert_eq!(w, FockVector::vacuum().scale(&qz(-2)));
        // Mismatched index: zero.
        assert!(v.annihilate(&m, 1, &h).is_zero());
        // a_1(h) on a_{-1}(h)a_{-1}(h)|0⟩: two equal contractions.
        let v2 = FockVector::vacuum().create(&m, 1, &h).create(&m, 1, &h);
        let w2 = v2.annihilate(&m, 1, &h);
        let expect = FockVector::vacuum().create(&m, 1, &h).scale(&qz(-2));
        assert_eq!(w2, expect);
    }

    #[test]
    fn annihilate_sign_on_odd_classes() {
        let m = odd_model();
        let x = CohClass::basis(m.basis_index("x").unwrap());
        let y = CohClass::basis(m.basis_index("y").unwrap());
        // v = a_{-1}(x) a_{-1}(y) |0⟩ (canonical order: (1,x) < (1,y)).
        let v = FockVector::vacuum().create(&m, 1, &y).create(&m, 1, &x);
        // a_1(x) contracts only the y-factor (∫(x·y) = 1), jumping over the
        // odd x-factor: sign −1, coefficient −1·(−1)·∫(xy) = +1 ⟹ +a_{-1}(x).
        let w = v.annihilate(&m, 1, &x);
        let expect = FockVector::vacuum().create(&m, 1, &x);
        assert_eq!(w, expect);
        // a_1(y) contracts the x-factor without a jump:
        // −1·∫(y·x) = −1·(−1) = 1 ⟹ +a_{-1}(y).
        let w2 = v.annihilate(&m, 1, &y);
        let expect2 = FockVector::vacuum().create(&m, 1, &y);
        assert_eq!(w2, expect2);
    }

    #[test]
    fn pairing_examples() {
        let m = p2();
        let h = CohClass::basis(m.basis_index("h").unwrap());
        let p = CohClass::basis(m.basis_index("p").unwrap());
        let one = m.unit_class();
        // (a_{-1}(h)|0⟩, a_{-1}(h)|0⟩) = (−1)^1·(−1)·∫(h²·…) → +1.
        let vh = FockVector::vacuum().create(&m, 1, &h);
        assert_eq!(vh.pairing(&m, &vh), qz(1));
        // (a_{-1}(1)|0⟩, a_{-1}(p)|0⟩) = 1.
        let v1 = FockVector::vacuum().create(&m, 1, &one);
        let vp = FockVector::vacuum().create(&m, 1, &p);
        assert_eq!(v1.pairing(&m, &vp), qz(1));
        assert_eq!(v1.pairing(&m, &v1), qz(0));
        // (a_{-2}(h)|0⟩, a_{-2}(h)|0⟩) = (−1)^2·(−2)·∫(h²) = −2... sign check:
        // peel rule gives (−1)^{2}·(w, a_2(h)a_{-2}(h)|0⟩) = 1·(−2) = −2.
        let v2h = FockVector::vacuum().create(&m, 2, &h);
        assert_eq!(v2h.pairing(&m, &v2h), qz(-2));
        // Distinct shapes are orthogonal.
        assert_eq!(vh.pairing(&m, &v2h), qz(0));
        // Weight-2 pairing: (a_{-1}(p)a_{-1}(1)|0⟩, a_{-1}(p)a_{-1}(1)|0⟩) = 1.
        let vp1 = FockVector::vacuum().create(&m, 1, &p).create(&m, 1, &one);
        assert_eq!(vp1.pairing(&m, &vp1), qz(1));
    }

    #[test]
    fn pairing_gram_nondegenerate_small() {
        for name in SurfaceModel::BUILTIN_NAMES {
            let m = SurfaceModel::builtin(name).unwrap();
            for n in 1..=3u32 {
                let monos = enumerate_monomials(&m, n);
                // Build the Gram matrix of the full weight-n space.
                let vecs: Vec<FockVector> = monos
                    .iter()
                    .map(|mo| {
                        let mut v = FockVector::zero();
                        v.add_term(mo.clone(), &qz(1));
                        v
                    })
                    .collect();
                let rows: Vec<Vec<Q>> = vecs
                    .iter()
                    .map(|u| vecs.iter().map(|w| u.pairing(&m, w)).collect())
                    .collect();
                let mat = crate::linalg::Mat::from_rows(rows);
                assert_eq!(mat.rank(), monos.len(), "degenerate pairing: {name} n={n}");
            }
        }
    }

    #[test]
    fn pad_and_unit() {
        let m = p2();
        let u2 = FockVector::unit_of(&m, 2);
        assert_eq!(u2.terms.len(), 1);
        let (mono, c) = u2.terms.iter().next().unwrap();
        assert_eq!(mono.weight(), 2);
        assert_eq!(mono.degree(&m), 0);
        assert_eq!(c, &qq(1, 2));
        // Padding a weight-2 vector to n=2 is the identity.
        let h = CohClass::basis(m.basis_index("h").unwrap());
        let v = FockVector::vacuum().create(&m, 2, &h);
        assert_eq!(v.pad(&m, 2), v);
        // Padding drops overweight terms.
        assert!(v.pad(&m, 1).is_zero());
    }

    #[test]
    fn json_roundtrip() {
        let m = odd_model();
        let x = CohClass::basis(m.basis_index("x").unwrap());
        let y = CohClass::basis(m.basis_index("y").unwrap());
        let v = FockVector::vacuum()
            .create(&m, 1, &y)
            .create(&m, 2, &x)
            .scale(&qq(-3, 7));
        let j = v.to_json(&m);
        let back = FockVector::from_json(&m, &j).unwrap();
        assert_eq!(back, v);
        // Out-of-order factor list picks up the Koszul sign.
        let txt = r#"[{"factors":[{"r":2,"c":"y"},{"r":1,"c":"y"}],"coeff":"1"}]"#;
        let parsed = FockVector::from_json(&m, &serde_json::from_str(txt).unwrap()).unwrap();
        let canonical = FockVector::vacuum().create(&m, 2, &y).create(&m, 1, &y);
        // Written order (2,y),(1,y) vs canonical (1,y),(2,y): one odd swap.
        assert_eq!(parsed, canonical.scale(&qz(-1)));
        // Unknown class rejected.
        let bad = r#"[{"factors":[{"r":1,"c":"z"}],"coeff":"1"}]"#;
        assert!(FockVector::from_json(&m, &serde_json::from_str(bad).unwrap()).is_err());
    }

    #[test]
    fn dimension_counts_p2() {
        let m = p2();
        // n = 1: H*(P2) itself.
        assert_eq!(graded_dimension(&m, 1, 0), 1);
        assert_eq!(graded_dimension(&m, 1, 2), 1);
        assert_eq!(graded_dimension(&m, 1, 4), 1);
        assert_eq!(graded_dimension(&m, 1, 1), 0);
        // n = 2: known Betti numbers of (P2)^[2]: 1, 0, 2, 0, 3, 0, 2, 0, 1.
        let expect = [1u64, 0, 2, 0, 3, 0, 2, 0, 1];
        for (i, e) in expect.iter().enumerate() {
            assert_eq!(graded_dimension(&m, 2, i as u32), *e, "i={i}");
        }
        // Total dimension at n=2 is 9.
        assert_eq!(enumerate_monomials(&m, 2).len(), 9);
    }

    #[test]
    fn dimension_counts_odd() {
        let m = odd_model();
        // Weight-1 monomials: one per basis class.
        assert_eq!(enumerate_monomials(&m, 1).len(), 4);
        // Odd classes cannot repeat at the same index: a_{-1}(x)a_{-1}(x) is
        // not enumerated.
        let monos = enumerate_monomials(&m, 2);
        assert!(monos.iter().all(|mo| {
            mo.factors.windows(2).all(|w| {
                !(w[0] == w[1] && m.parity(w[0].c) == 1)
            })
        }));
    }
}
