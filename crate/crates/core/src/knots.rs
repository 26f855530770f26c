//! Knot inputs for knot surgery: symmetrized Alexander polynomials and
//! fibered genera.
//!
//! All intermediate arithmetic happens in `Z[u, u⁻¹]` with `u = t^{1/2}`,
//! so `t^{1/2} V − t^{−1/2} Vᵀ` and the torus-knot closed form are computed
//! without any symmetrization step. The final polynomial is checked to lie
//! in `Z[t, t⁻¹]`.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{int, Int};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KnotError {
    #[error("torus knot parameters ({0}, {1}) must be coprime and at least 2")]
    InvalidTorus(i64, i64),
    #[error("Seifert matrix must be square")]
    NotSquare,
    #[error("not a knot: Δ(1) = {0}, expected ±1")]
    NotAKnot(Int),
    #[error("Alexander polynomial has half-integral powers of t")]
    HalfIntegralExponent,
    #[error("polynomial is not symmetric under t ↦ t⁻¹")]
    NotSymmetric,
    #[error("knot is not marked as fibered")]
    NotFibered,
}

/// A Laurent polynomial with integer coefficients in one variable.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    terms: BTreeMap<i64, Int>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, Int::one())
    }

    pub fn monomial(exp: i64, coef: Int) -> Self {
        let mut p = Self::zero();
        p.add_term(exp, coef);
        p
    }

    pub fn from_pairs(pairs: &[(i64, i64)]) -> Self {
        let mut p = Self::zero();
        for &(e, c) in pairs {
            p.add_term(e, int(c));
        }
        p
    }

    fn add_term(&mut self, exp: i64, coef: Int) {
        if coef.is_zero() {
            return;
        }
        let slot = self.terms.entry(exp).or_insert_with(Int::zero);
        *slot += coef;
        if slot.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i64, &Int)> {
        self.terms.iter().map(|(&e, c)| (e, c))
    }

    pub fn coefficient(&self, exp: i64) -> Int {
        self.terms.get(&exp).cloned().unwrap_or_else(Int::zero)
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Value at 1, i.e. the coefficient sum.
    pub fn eval_one(&self) -> Int {
        self.terms.values().sum()
    }

    /// Invariant under `x ↦ x⁻¹`.
    pub fn is_symmetric(&self) -> bool {
        self.terms.iter().all(|(&e, c)| self.coefficient(-e) == *c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&e, c) in &other.terms {
            out.add_term(e, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        LaurentPoly { terms: self.terms.iter().map(|(&e, c)| (e, -c)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&ea, ca) in &self.terms {
            for (&eb, cb) in &other.terms {
                out.add_term(ea + eb, ca * cb);
            }
        }
        out
    }

    /// Exact quotient `self / divisor`, or `None` if the division leaves a
    /// remainder (or `divisor` is zero).
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        if divisor.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let d_min = divisor.min_exp()?;
        let d_max = divisor.max_exp()?;
        let lead = divisor.coefficient(d_max);
        let mut rem = self.clone();
        let mut quot = Self::zero();
        // Long division from the top; the quotient's lowest exponent is
        // bounded by min(self) - min(divisor).
        let floor = self.min_exp()? - d_min;
        while let Some(top) = rem.max_exp() {
            let shift = top - d_max;
            if shift < floor {
                return None;
            }
            let (q, r) = rem.coefficient(top).div_rem(&lead);
            if !r.is_zero() {
                return None;
            }
            let step = Self::monomial(shift, q);
            rem = rem.sub(&step.mul(divisor));
            quot = quot.add(&step);
        }
        Some(quot)
    }

    /// `x^{n} − x^{−n}`.
    fn antisym(n: i64) -> Self {
        Self::from_pairs(&[(n, 1), (-n, -1)])
    }
}

/// Renders a Laurent polynomial in the named variable, highest power first.
pub fn render_laurent(p: &LaurentPoly, var: &str) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (e, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        let mag = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let monomial = match e {
            0 => String::new(),
            1 => var.to_string(),
            e => format!("{var}^{e}"),
        };
        if monomial.is_empty() {
            out.push_str(&mag.to_string());
        } else if mag.is_one() {
            out.push_str(&monomial);
        } else {
            out.push_str(&format!("{mag}{monomial}"));
        }
    }
    out
}

/// A symmetrized Alexander polynomial, normalized so that `Δ(1) = 1`.
///
/// Stored in the variable `u = t^{1/2}` (only even powers occur).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlexanderPolynomial {
    in_u: LaurentPoly,
}

impl AlexanderPolynomial {
    /// Accepts a polynomial in `u`; checks that it lies in `Z[t, t⁻¹]`, is
    /// symmetric, and has `Δ(1) = ±1`, normalizing the sign.
    pub fn from_u_poly(p: LaurentPoly) -> Result<Self, KnotError> {
        let at_one = p.eval_one();
        if at_one.abs() != Int::one() {
            return Err(KnotError::NotAKnot(at_one));
        }
        if p.terms().any(|(e, _)| e % 2 != 0) {
            return Err(KnotError::HalfIntegralExponent);
        }
        let p = if at_one.is_one() { p } else { p.neg() };
        if !p.is_symmetric() {
            return Err(KnotError::NotSymmetric);
        }
        Ok(AlexanderPolynomial { in_u: p })
    }

    /// From `(t-exponent, coefficient)` pairs.
    pub fn from_t_pairs(pairs: &[(i64, i64)]) -> Result<Self, KnotError> {
        let doubled: Vec<(i64, i64)> = pairs.iter().map(|&(e, c)| (2 * e, c)).collect();
        Self::from_u_poly(LaurentPoly::from_pairs(&doubled))
    }

    pub fn one() -> Self {
        AlexanderPolynomial { in_u: LaurentPoly::one() }
    }

    /// `(t-exponent, coefficient)` pairs in increasing exponent order.
    pub fn t_terms(&self) -> impl DoubleEndedIterator<Item = (i64, &Int)> {
        self.in_u.terms().map(|(e, c)| (e / 2, c))
    }

    pub fn as_u_poly(&self) -> &LaurentPoly {
        &self.in_u
    }

    /// Highest power of `t`.
    pub fn degree(&self) -> i64 {
        self.in_u.max_exp().unwrap_or(0) / 2
    }

    pub fn term_count(&self) -> usize {
        self.in_u.terms.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.in_u.is_symmetric()
    }

    pub fn eval_one(&self) -> Int {
        self.in_u.eval_one()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.t_terms()
                .map(|(e, c)| serde_json::json!([e, crate::arith::int_to_json(c)]))
                .collect(),
        )
    }
}

impl fmt::Display for AlexanderPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t_poly = LaurentPoly { terms: self.t_terms().map(|(e, c)| (e, c.clone())).collect() };
        f.write_str(&render_laurent(&t_poly, "t"))
    }
}

/// A knot as consumed by knot surgery.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KnotDescriptor {
    Unknot,
    Torus { p: i64, q: i64 },
    Seifert { matrix: Vec<Vec<i64>>, fibered: bool },
}

impl KnotDescriptor {
    pub fn torus(p: i64, q: i64) -> Result<Self, KnotError> {
        let k = KnotDescriptor::Torus { p, q };
        k.validate()?;
        Ok(k)
    }

    pub fn trefoil() -> Self {
        KnotDescriptor::Torus { p: 2, q: 3 }
    }

    pub fn validate(&self) -> Result<(), KnotError> {
        match self {
            KnotDescriptor::Unknot => Ok(()),
            &KnotDescriptor::Torus { p, q } => {
                if p < 2 || q < 2 || p.gcd(&q) != 1 {
                    Err(KnotError::InvalidTorus(p, q))
                } else {
                    Ok(())
                }
            }
            KnotDescriptor::Seifert { matrix, .. } => {
                if matrix.iter().any(|r| r.len() != matrix.len()) {
                    return Err(KnotError::NotSquare);
                }
                alexander(self).map(|_| ())
            }
        }
    }

    pub fn is_fibered(&self) -> bool {
        match self {
            KnotDescriptor::Unknot | KnotDescriptor::Torus { .. } => true,
            KnotDescriptor::Seifert { fibered, .. } => *fibered,
        }
    }

    /// Short name used in reports.
    pub fn name(&self) -> String {
        match self {
            KnotDescriptor::Unknot => "unknot".into(),
            KnotDescriptor::Torus { p, q } => format!("T({p},{q})"),
            KnotDescriptor::Seifert { matrix, .. } => format!("Seifert[{}x{}]", matrix.len(), matrix.len()),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            KnotDescriptor::Unknot => serde_json::json!("unknot"),
            KnotDescriptor::Torus { p, q } => serde_json::json!({ "torus": [p, q] }),
            KnotDescriptor::Seifert { matrix, fibered } => {
                serde_json::json!({ "seifert": matrix, "fibered": fibered })
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum KnotRepr {
    Name(String),
    Torus {
        torus: (i64, i64),
    },
    Seifert {
        seifert: Vec<Vec<i64>>,
        #[serde(default)]
        fibered: bool,
    },
}

impl Serialize for KnotDescriptor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for KnotDescriptor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let k = match KnotRepr::deserialize(d)? {
            KnotRepr::Name(n) if n == "unknot" => KnotDescriptor::Unknot,
            KnotRepr::Name(n) => return Err(D::Error::custom(format!("unknown knot name `{n}`"))),
            KnotRepr::Torus { torus: (p, q) } => KnotDescriptor::Torus { p, q },
            KnotRepr::Seifert { seifert, fibered } => KnotDescriptor::Seifert { matrix: seifert, fibered },
        };
        match &k {
            // Seifert matrices are validated lazily (needs a determinant).
            KnotDescriptor::Seifert { matrix, .. } if matrix.iter().any(|r| r.len() != matrix.len()) => {
                Err(D::Error::custom(KnotError::NotSquare))
            }
            KnotDescriptor::Seifert { .. } => Ok(k),
            _ => k.validate().map(|_| k).map_err(D::Error::custom),
        }
    }
}

/// `det(u V − u⁻¹ Vᵀ)` by fraction-free elimination over `Z[u, u⁻¹]`.
pub fn seifert_determinant(v: &[Vec<i64>]) -> Result<LaurentPoly, KnotError> {
    let n = v.len();
    if v.iter().any(|r| r.len() != n) {
        return Err(KnotError::NotSquare);
    }
    if n == 0 {
        return Ok(LaurentPoly::one());
    }
    let mut a: Vec<Vec<LaurentPoly>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| LaurentPoly::from_pairs(&[(1, v[i][j]), (-1, -v[j][i])]))
                .collect()
        })
        .collect();
    let mut negate = false;
    let mut prev = LaurentPoly::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    negate = !negate;
                }
                None => return Ok(LaurentPoly::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[i][j].mul(&a[k][k]).sub(&a[i][k].mul(&a[k][j]));
                a[i][j] = num.div_exact(&prev).expect("Bareiss quotients are exact");
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    Ok(if negate { det.neg() } else { det })
}

/// The symmetrized Alexander polynomial, normalized to `Δ(1) = 1`.
pub fn alexander(k: &KnotDescriptor) -> Result<AlexanderPolynomial, KnotError> {
    match k {
        KnotDescriptor::Unknot => Ok(AlexanderPolynomial::one()),
        &KnotDescriptor::Torus { p, q } => {
            if p < 2 || q < 2 || p.gcd(&q) != 1 {
                return Err(KnotError::InvalidTorus(p, q));
            }
            let num = LaurentPoly::antisym(p * q).mul(&LaurentPoly::antisym(1));
            let den = LaurentPoly::antisym(p).mul(&LaurentPoly::antisym(q));
            let quotient = num.div_exact(&den).expect("torus-knot closed form divides exactly");
            AlexanderPolynomial::from_u_poly(quotient)
        }
        KnotDescriptor::Seifert { matrix, .. } => AlexanderPolynomial::from_u_poly(seifert_determinant(matrix)?),
    }
}

/// Genus of the fiber surface, read off as the top power of `Δ_K`.
pub fn fibered_genus(k: &KnotDescriptor) -> Result<i64, KnotError> {
    if !k.is_fibered() {
        return Err(KnotError::NotFibered);
    }
    Ok(alexander(k)?.degree())
}

/// Checks the Conway skein relation
/// `Δ_{K+} − Δ_{K−} = (t^{1/2} − t^{−1/2}) Δ_{K0}` exactly, with `Δ_{K0}`
/// given in the variable `u = t^{1/2}`.
pub fn skein_check(k_plus: &KnotDescriptor, k_minus: &KnotDescriptor, k_zero: &LaurentPoly) -> Result<bool, KnotError> {
    let lhs = alexander(k_plus)?.in_u.sub(&alexander(k_minus)?.in_u);
    let rhs = LaurentPoly::antisym(1).mul(k_zero);
    Ok(lhs == rhs)
}

/// Torus-knot genus `(p−1)(q−1)/2`.
pub fn torus_genus(p: i64, q: i64) -> i64 {
    (p - 1) * (q - 1) / 2
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct 2×2 expansion: (u a − u⁻¹ a)(u d − u⁻¹ d) − (u b − u⁻¹ c)(u c − u⁻¹ b).
    fn det2_oracle(v: [[i64; 2]; 2]) -> LaurentPoly {
        let e = |x: i64, y: i64| LaurentPoly::from_pairs(&[(1, x), (-1, -y)]);
        let m00 = e(v[0][0], v[0][0]);
        let m01 = e(v[0][1], v[1][0]);
        let m10 = e(v[1][0], v[0][1]);
        let m11 = e(v[1][1], v[1][1]);
        m00.mul(&m11).sub(&m01.mul(&m10))
    }

    #[test]
    fn unknot_is_one() {
        assert_eq!(alexander(&KnotDescriptor::Unknot).unwrap(), AlexanderPolynomial::one());
        assert_eq!(fibered_genus(&KnotDescriptor::Unknot).unwrap(), 0);
    }

    #[test]
    fn trefoil_from_seifert_matrix() {
        let v = vec![vec![-1, 1], vec![0, -1]];
        let oracle = det2_oracle([[-1, 1], [0, -1]]);
        assert_eq!(seifert_determinant(&v).unwrap(), oracle);
        let d = alexander(&KnotDescriptor::Seifert { matrix: v, fibered: true }).unwrap();
        assert_eq!(d, AlexanderPolynomial::from_t_pairs(&[(1, 1), (0, -1), (-1, 1)]).unwrap());
        assert_eq!(d.to_string(), "t - 1 + t^-1");
    }

    #[test]
    fn torus_closed_form() {
        let d = alexander(&KnotDescriptor::Torus { p: 2, q: 5 }).unwrap();
        assert_eq!(d.to_string(), "t^2 - t + 1 - t^-1 + t^-2");
        assert_eq!(fibered_genus(&KnotDescriptor::Torus { p: 2, q: 3 }).unwrap(), 1);
        assert_eq!(fibered_genus(&KnotDescriptor::Torus { p: 3, q: 4 }).unwrap(), 3);
    }

    #[test]
    fn invalid_inputs() {
        assert_eq!(KnotDescriptor::torus(2, 4), Err(KnotError::InvalidTorus(2, 4)));
        assert_eq!(KnotDescriptor::torus(1, 3), Err(KnotError::InvalidTorus(1, 3)));
        // Odd size: det(V − Vᵀ) vanishes.
        let odd = KnotDescriptor::Seifert { matrix: vec![vec![1]], fibered: false };
        assert!(matches!(alexander(&odd), Err(KnotError::NotAKnot(_))));
        let ragged = KnotDescriptor::Seifert { matrix: vec![vec![1, 0], vec![0]], fibered: false };
        assert_eq!(alexander(&ragged), Err(KnotError::NotSquare));
        let unfibered = KnotDescriptor::Seifert { matrix: vec![vec![-1, 1], vec![0, -1]], fibered: false };
        assert_eq!(fibered_genus(&unfibered), Err(KnotError::NotFibered));
    }

    #[test]
    fn skein_examples() {
        // Positive Hopf link, Conway-normalized: t^{1/2} − t^{−1/2}.
        let hopf = LaurentPoly::from_pairs(&[(1, 1), (-1, -1)]);
        assert!(skein_check(&KnotDescriptor::trefoil(), &KnotDescriptor::Unknot, &hopf).unwrap());
        // (t − 1 + t⁻¹) − 1 = t − 2 + t⁻¹, whereas (u − u⁻¹)(u + u⁻¹) = t − t⁻¹.
        let symmetric_sum = LaurentPoly::from_pairs(&[(1, 1), (-1, 1)]);
        assert!(!skein_check(&KnotDescriptor::trefoil(), &KnotDescriptor::Unknot, &symmetric_sum).unwrap());
        let t25 = KnotDescriptor::Torus { p: 2, q: 5 };
        let guess = LaurentPoly::from_pairs(&[(3, 1), (-3, 1)]);
        assert!(!skein_check(&t25, &KnotDescriptor::trefoil(), &guess).unwrap());
        // The T(2,4) torus link: t^{3/2} − t^{1/2} + t^{−1/2} − t^{−3/2}.
        let t24 = LaurentPoly::from_pairs(&[(3, 1), (1, -1), (-1, 1), (-3, -1)]);
        assert!(skein_check(&t25, &KnotDescriptor::trefoil(), &t24).unwrap());
        assert!(skein_check(&KnotDescriptor::trefoil(), &KnotDescriptor::trefoil(), &LaurentPoly::zero()).unwrap());
        assert!(!skein_check(&KnotDescriptor::trefoil(), &KnotDescriptor::Unknot, &LaurentPoly::zero()).unwrap());
    }

    #[test]
    fn exact_division() {
        let a = LaurentPoly::from_pairs(&[(2, 1), (0, -1)]);
        let b = LaurentPoly::from_pairs(&[(1, 1), (0, -1)]);
        assert_eq!(a.div_exact(&b).unwrap(), LaurentPoly::from_pairs(&[(1, 1), (0, 1)]));
        assert!(a.div_exact(&LaurentPoly::from_pairs(&[(1, 2), (0, 1)])).is_none());
        assert!(a.div_exact(&LaurentPoly::zero()).is_none());
        let shifted = LaurentPoly::from_pairs(&[(-3, 1), (-5, -1)]);
        // u⁻⁵(u² − 1) / u⁻⁴(u − 1) = u⁻¹(u + 1)
        let q = shifted.div_exact(&b.mul(&LaurentPoly::monomial(-4, int(1)))).unwrap();
        assert_eq!(q, LaurentPoly::from_pairs(&[(0, 1), (-1, 1)]));
    }

    #[test]
    fn json_forms() {
        let parse = |s: &str| serde_json::from_str::<KnotDescriptor>(s);
        assert_eq!(parse(r#""unknot""#).unwrap(), KnotDescriptor::Unknot);
        assert_eq!(parse(r#"{"torus":[2,5]}"#).unwrap(), KnotDescriptor::Torus { p: 2, q: 5 });
        assert_eq!(
            parse(r#"{"seifert":[[-1,1],[0,-1]],"fibered":true}"#).unwrap(),
            KnotDescriptor::Seifert { matrix: vec![vec![-1, 1], vec![0, -1]], fibered: true }
        );
        assert!(parse(r#"{"torus":[2,4]}"#).is_err());
        assert!(parse(r#""figure8""#).is_err());
        let k = KnotDescriptor::Seifert { matrix: vec![vec![-1, 1], vec![0, -1]], fibered: true };
        assert_eq!(parse(&k.to_json().to_string()).unwrap(), k);
    }
}
