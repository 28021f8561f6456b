//! Multi-indices and the coefficient tensors `A_{αβ}`, `B^k_α` they index.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A multi-index `α ∈ ℕⁿ`, the exponent vector of a mixed partial `D^α`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// Spatial dimension `n`.
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|α| = α₁ + … + αₙ`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// All multi-indices of length `n` and order exactly `m`, in ascending
/// lexicographic order. There are `C(m+n−1, n−1)` of them.
pub fn enumerate(n: usize, m: u32) -> Vec<MultiIndex> {
    fn fill(prefix: &mut Vec<u32>, slots: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for head in 0..=remaining {
            prefix.push(head);
            fill(prefix, slots - 1, remaining - head, out);
            prefix.pop();
        }
    }

    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    fill(&mut Vec::with_capacity(n), n, m, &mut out);
    out
}

/// Leading-order quadratic forms of a coefficient set over the basis
/// `{ξ_α : |α| = m}`.
#[derive(Clone, Debug)]
pub struct LeadingForms {
    pub basis: Vec<MultiIndex>,
    /// `S[α,β] = A_{αβ} + A_{βα}`.
    pub drift: DMatrix<f64>,
    /// `N = Σ_k b_k b_kᵀ` with `b_k[α] = B^k_α`.
    pub noise: DMatrix<f64>,
}

/// Coefficients `A_{αβ}` (|α|,|β| ≤ m) and `B^k_α` (|α| ≤ m) at one time
/// snapshot. Entries not stored are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSet {
    n: usize,
    m: u32,
    a: BTreeMap<(MultiIndex, MultiIndex), f64>,
    b: Vec<BTreeMap<MultiIndex, f64>>,
}

impl CoefficientSet {
    /// Empty (all-zero) coefficients with `noise_count` Wiener processes.
    pub fn new(n: usize, m: u32, noise_count: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "spatial dimension must be at least 1"));
        }
        if m == 0 {
            return Err(Error::param("m", "half-order must be at least 1"));
        }
        Ok(CoefficientSet {
            n,
            m,
            a: BTreeMap::new(),
            b: vec![BTreeMap::new(); noise_count],
        })
    }

    /// The one-dimensional family `du = (-1)^{m+1} a D^{2m}u dt + Σ_k μ_k D^m u dw^k`.
    pub fn scalar(m: u32, a: f64, mu: &[f64]) -> Result<Self> {
        let mut c = CoefficientSet::new(1, m, mu.len())?;
        let top = MultiIndex(vec![m]);
        c.set_a(top.clone(), top.clone(), a)?;
        for (k, &value) in mu.iter().enumerate() {
            c.set_b(k, top.clone(), value)?;
        }
        Ok(c)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_order(&self) -> u32 {
        self.m
    }

    pub fn noise_count(&self) -> usize {
        self.b.len()
    }

    fn check_index(&self, alpha: &MultiIndex) -> Result<()> {
        if alpha.dim() != self.n {
            return Err(Error::InvalidCoefficient(format!(
                "multi-index {alpha} has length {}, expected {}",
                alpha.dim(),
                self.n
            )));
        }
        if alpha.order() > self.m {
            return Err(Error::InvalidCoefficient(format!(
                "multi-index {alpha} has order {} > m = {}",
                alpha.order(),
                self.m
            )));
        }
        Ok(())
    }

    pub fn set_a(&mut self, alpha: MultiIndex, beta: MultiIndex, value: f64) -> Result<()> {
        self.check_index(&alpha)?;
        self.check_index(&beta)?;
        if !value.is_finite() {
            return Err(Error::InvalidCoefficient(format!("A_{{{alpha},{beta}}} is not finite")));
        }
        self.a.insert((alpha, beta), value);
        Ok(())
    }

    pub fn set_b(&mut self, k: usize, alpha: MultiIndex, value: f64) -> Result<()> {
        self.check_index(&alpha)?;
        if k >= self.b.len() {
            return Err(Error::InvalidCoefficient(format!(
                "noise index {k} out of range (K = {})",
                self.b.len()
            )));
        }
        if !value.is_finite() {
            return Err(Error::InvalidCoefficient(format!("B^{k}_{alpha} is not finite")));
        }
        self.b[k].insert(alpha, value);
        Ok(())
    }

    pub fn a(&self, alpha: &MultiIndex, beta: &MultiIndex) -> f64 {
        self.a.get(&(alpha.clone(), beta.clone())).copied().unwrap_or(0.0)
    }

    pub fn b(&self, k: usize, alpha: &MultiIndex) -> f64 {
        self.b.get(k).and_then(|bk| bk.get(alpha)).copied().unwrap_or(0.0)
    }

    /// Non-zero `A` entries.
    pub fn a_entries(&self) -> impl Iterator<Item = (&MultiIndex, &MultiIndex, f64)> {
        self.a.iter().map(|((al, be), v)| (al, be, *v))
    }

    /// Non-zero `B^k` entries for one noise index.
    pub fn b_entries(&self, k: usize) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.b[k].iter().map(|(al, v)| (al, *v))
    }

    /// Multiplies every `B^k_α` by `s`.
    pub fn scale_noise(&self, s: f64) -> Self {
        let mut out = self.clone();
        for bk in &mut out.b {
            for v in bk.values_mut() {
                *v *= s;
            }
        }
        out
    }

    /// Assembles `S` and `N` over the order-`m` basis. Lower-order entries
    /// are ignored.
    pub fn leading_forms(&self) -> LeadingForms {
        let basis = enumerate(self.n, self.m);
        let dim = basis.len();
        let drift = DMatrix::from_fn(dim, dim, |i, j| {
            self.a(&basis[i], &basis[j]) + self.a(&basis[j], &basis[i])
        });
        let mut noise = DMatrix::zeros(dim, dim);
        for k in 0..self.b.len() {
            let bk: Vec<f64> = basis.iter().map(|al| self.b(k, al)).collect();
            for i in 0..dim {
                for j in 0..dim {
                    noise[(i, j)] += bk[i] * bk[j];
                }
            }
        }
        LeadingForms { basis, drift, noise }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawCoefficients = serde_json::from_str(text)
            .map_err(|e| Error::InvalidCoefficient(format!("malformed coefficient JSON: {e}")))?;
        raw.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&RawCoefficients::from(self)).expect("coefficients serialize")
    }
}

#[derive(Serialize, Deserialize)]
struct RawA {
    alpha: MultiIndex,
    beta: MultiIndex,
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct RawB {
    alpha: MultiIndex,
    value: f64,
}

/// Wire form: `{"n":1,"m":2,"A":[{"alpha":[2],"beta":[2],"value":1.0}],"B":[[{"alpha":[2],"value":1.0}]]}`.
#[derive(Serialize, Deserialize)]
pub(crate) struct RawCoefficients {
    n: usize,
    m: u32,
    #[serde(rename = "A", default)]
    a: Vec<RawA>,
    #[serde(rename = "B", default)]
    b: Vec<Vec<RawB>>,
}

impl TryFrom<RawCoefficients> for CoefficientSet {
    type Error = Error;

    fn try_from(raw: RawCoefficients) -> Result<Self> {
        let mut c = CoefficientSet::new(raw.n, raw.m, raw.b.len())?;
        for entry in raw.a {
            if c.a.contains_key(&(entry.alpha.clone(), entry.beta.clone())) {
                return Err(Error::InvalidCoefficient(format!(
                    "duplicate entry A_{{{},{}}}",
                    entry.alpha, entry.beta
                )));
            }
            c.set_a(entry.alpha, entry.beta, entry.value)?;
        }
        for (k, list) in raw.b.into_iter().enumerate() {
            for entry in list {
                if c.b[k].contains_key(&entry.alpha) {
                    return Err(Error::InvalidCoefficient(format!(
                        "duplicate entry B^{k}_{}",
                        entry.alpha
                    )));
                }
                c.set_b(k, entry.alpha, entry.value)?;
            }
        }
        Ok(c)
    }
}

impl From<&CoefficientSet> for RawCoefficients {
    fn from(c: &CoefficientSet) -> Self {
        RawCoefficients {
            n: c.n,
            m: c.m,
            a: c.a
                .iter()
                .map(|((alpha, beta), &value)| RawA {
                    alpha: alpha.clone(),
                    beta: beta.clone(),
                    value,
                })
                .collect(),
            b: c.b
                .iter()
                .map(|bk| {
                    bk.iter()
                        .map(|(alpha, &value)| RawB {
                            alpha: alpha.clone(),
                            value,
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

impl Serialize for CoefficientSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawCoefficients::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoefficientSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawCoefficients::deserialize(d)?;
        raw.try_into().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn binomial(n: u64, k: u64) -> u64 {
        (1..=k).fold(1, |acc, i| acc * (n + 1 - i) / i)
    }

    // Independent generator: filter the full box {0..=m}^n by order.
    fn brute_force(n: usize, m: u32) -> Vec<Vec<u32>> {
        let mut all = vec![vec![]];
        for _ in 0..n {
            all = all
                .into_iter()
                .flat_map(|v: Vec<u32>| {
                    (0..=m).map(move |e| {
                        let mut w = v.clone();
                        w.push(e);
                        w
                    })
                })
                .collect();
        }
        all.retain(|v| v.iter().sum::<u32>() == m);
        all.sort();
        all
    }

    #[test]
    fn enumerate_small_cases() {
        assert_eq!(enumerate(1, 2), vec![MultiIndex(vec![2])]);
        assert_eq!(enumerate(2, 1), vec![MultiIndex(vec![0, 1]), MultiIndex(vec![1, 0])]);
        assert_eq!(enumerate(3, 2).len(), 6);
    }

    #[test]
    fn enumerate_matches_brute_force_and_stars_and_bars() {
        for n in 1..=4usize {
            for m in 0..=6u32 {
                let got: Vec<Vec<u32>> = enumerate(n, m).into_iter().map(|a| a.0).collect();
                assert_eq!(got, brute_force(n, m), "n={n} m={m}");
                let expected = binomial(m as u64 + n as u64 - 1, n as u64 - 1);
                assert_eq!(got.len() as u64, expected);
            }
        }
    }

    #[test]
    fn leading_forms_scalar() {
        let c = CoefficientSet::scalar(2, 1.0, &[1.0]).unwrap();
        let forms = c.leading_forms();
        assert_eq!(forms.drift.as_slice(), &[2.0]);
        assert_eq!(forms.noise.as_slice(), &[1.0]);

        let c = CoefficientSet::scalar(1, 1.0, &[]).unwrap();
        let forms = c.leading_forms();
        assert_eq!(forms.drift.as_slice(), &[2.0]);
        assert_eq!(forms.noise.as_slice(), &[0.0]);
    }

    #[test]
    fn leading_forms_two_dimensional() {
        let e1 = MultiIndex(vec![1, 0]);
        let e2 = MultiIndex(vec![0, 1]);
        let mut c = CoefficientSet::new(2, 1, 1).unwrap();
        c.set_a(e1.clone(), e1.clone(), 1.0).unwrap();
        c.set_a(e2.clone(), e2.clone(), 1.0).unwrap();
        c.set_b(0, e1.clone(), 1.0).unwrap();
        c.set_b(0, e2.clone(), 0.0).unwrap();
        let forms = c.leading_forms();
        // basis order is [(0,1), (1,0)]
        assert_eq!(forms.basis, vec![e2, e1]);
        assert_eq!(forms.drift, DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]));
        assert_eq!(forms.noise, DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]));
    }

    #[test]
    fn lower_order_terms_do_not_enter_leading_forms() {
        let mut c = CoefficientSet::scalar(2, 1.0, &[0.5]).unwrap();
        c.set_a(MultiIndex(vec![1]), MultiIndex(vec![0]), 7.0).unwrap();
        c.set_b(0, MultiIndex(vec![1]), 3.0).unwrap();
        let forms = c.leading_forms();
        assert_eq!(forms.drift.as_slice(), &[2.0]);
        assert_eq!(forms.noise.as_slice(), &[0.25]);
    }

    #[test]
    fn rejects_bad_indices() {
        let mut c = CoefficientSet::new(2, 2, 1).unwrap();
        assert!(c.set_a(MultiIndex(vec![3, 0]), MultiIndex(vec![0, 2]), 1.0).is_err());
        assert!(c.set_b(0, MultiIndex(vec![1]), 1.0).is_err());
        assert!(c.set_b(1, MultiIndex(vec![1, 1]), 1.0).is_err());
        assert!(CoefficientSet::new(1, 0, 0).is_err());
    }

    #[test]
    fn json_wire_format() {
        let text = r#"{"n":1,"m":2,"A":[{"alpha":[2],"beta":[2],"value":1.0}],"B":[[{"alpha":[2],"value":1.0}]]}"#;
        let c = CoefficientSet::from_json(text).unwrap();
        assert_eq!(c, CoefficientSet::scalar(2, 1.0, &[1.0]).unwrap());
        assert_eq!(CoefficientSet::from_json(&c.to_json()).unwrap(), c);

        // missing entries are zero, missing B means no noise
        let c = CoefficientSet::from_json(r#"{"n":2,"m":1}"#).unwrap();
        assert_eq!(c.noise_count(), 0);
        assert_eq!(c.a(&MultiIndex(vec![1, 0]), &MultiIndex(vec![1, 0])), 0.0);

        let dup = r#"{"n":1,"m":1,"A":[{"alpha":[1],"beta":[1],"value":1.0},{"alpha":[1],"beta":[1],"value":2.0}]}"#;
        assert!(CoefficientSet::from_json(dup).is_err());
        assert!(CoefficientSet::from_json(r#"{"n":1,"m":1,"A":[{"alpha":[1,0],"beta":[1],"value":1.0}]}"#).is_err());
    }

    fn arb_coefficients() -> impl Strategy<Value = CoefficientSet> {
        (1usize..=3, 1u32..=3, 0usize..=3)
            .prop_flat_map(|(n, m, k)| {
                let dim = enumerate(n, m).len();
                (
                    Just((n, m, k)),
                    prop::collection::vec(-2.0f64..2.0, dim * dim),
                    prop::collection::vec(-2.0f64..2.0, dim * k),
                )
            })
            .prop_map(|((n, m, k), a, b)| {
                let basis = enumerate(n, m);
                let dim = basis.len();
                let mut c = CoefficientSet::new(n, m, k).unwrap();
                for i in 0..dim {
                    for j in 0..dim {
                        c.set_a(basis[i].clone(), basis[j].clone(), a[i * dim + j]).unwrap();
                    }
                }
                for kk in 0..k {
                    for i in 0..dim {
                        c.set_b(kk, basis[i].clone(), b[kk * dim + i]).unwrap();
                    }
                }
                c
            })
    }

    proptest! {
        #[test]
        fn forms_are_symmetric_and_noise_is_psd(c in arb_coefficients()) {
            let forms = c.leading_forms();
            prop_assert_eq!(&forms.drift, &forms.drift.transpose());
            prop_assert_eq!(&forms.noise, &forms.noise.transpose());
            let eig = forms.noise.clone().symmetric_eigen();
            prop_assert!(eig.eigenvalues.iter().all(|&l| l >= -1e-12));
        }

        #[test]
        fn json_round_trip(c in arb_coefficients()) {
            prop_assert_eq!(CoefficientSet::from_json(&c.to_json()).unwrap(), c);
        }
    }
}
