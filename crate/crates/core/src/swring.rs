//! The integral group ring `Z H₂(X)`.
//!
//! An [`SwPolynomial`] is a finite formal sum `Σ a_β t_β` with integer
//! coefficients indexed by lattice vectors `β`. Exponents are rational
//! coordinate vectors over the ambient basis; fractional exponents are only
//! admitted when their denominators divide the recorded log-transform
//! multiplicity (the class `T/p` of a multiple fiber).
//!
//! A [`ReducedSwPolynomial`] lives in the quotient by the rational span of a
//! torus class `T`; each exponent is stored as the unique representative
//! whose pivot coordinate (the first nonzero coordinate of `T`) vanishes.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{int, lcm, Int, JsonInt, Rat};
use crate::lattice::{IntersectionLattice, LatticeVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SwError {
    #[error("polynomials live over different lattices")]
    AmbientMismatch,
    #[error("exponent has {got} coordinates, ambient rank is {rank}")]
    DimensionMismatch { got: usize, rank: usize },
    #[error("exponent {0} has a denominator not dividing the recorded multiplicity")]
    UnflaggedDenominator(String),
    #[error("torus class must be a nonzero coordinate vector")]
    ZeroTorus,
    #[error("reduced polynomials are taken modulo different torus classes")]
    TorusMismatch,
    #[error("malformed polynomial JSON: {0}")]
    Json(String),
}

fn same_ambient(a: &Arc<IntersectionLattice>, b: &Arc<IntersectionLattice>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

fn add_term(terms: &mut BTreeMap<LatticeVector, Int>, exp: LatticeVector, coef: Int) {
    if coef.is_zero() {
        return;
    }
    match terms.entry(exp) {
        Entry::Vacant(v) => {
            v.insert(coef);
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += coef;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

fn convolve(
    a: &BTreeMap<LatticeVector, Int>,
    b: &BTreeMap<LatticeVector, Int>,
) -> BTreeMap<LatticeVector, Int> {
    let mut out = BTreeMap::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            add_term(&mut out, ea + eb, ca * cb);
        }
    }
    out
}

/// Verdicts of an equality test modulo the overall sign ambiguity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignComparison {
    pub as_is: bool,
    pub flipped: bool,
}

impl SignComparison {
    pub fn either(&self) -> bool {
        self.as_is || self.flipped
    }
}

#[derive(Clone, Debug)]
pub struct SwPolynomial {
    ambient: Arc<IntersectionLattice>,
    multiplicity: Int,
    terms: BTreeMap<LatticeVector, Int>,
}

impl PartialEq for SwPolynomial {
    fn eq(&self, other: &Self) -> bool {
        same_ambient(&self.ambient, &other.ambient) && self.terms == other.terms
    }
}

impl Eq for SwPolynomial {}

impl SwPolynomial {
    pub fn zero(ambient: Arc<IntersectionLattice>) -> Self {
        SwPolynomial { ambient, multiplicity: Int::one(), terms: BTreeMap::new() }
    }

    pub fn one(ambient: Arc<IntersectionLattice>) -> Self {
        let dim = ambient.rank();
        let mut p = Self::zero(ambient);
        p.terms.insert(LatticeVector::zero(dim), Int::one());
        p
    }

    /// `coef · t_exp` with an integral exponent.
    pub fn monomial(ambient: Arc<IntersectionLattice>, exp: LatticeVector, coef: Int) -> Result<Self, SwError> {
        Self::from_terms(ambient, Int::one(), [(exp, coef)])
    }

    /// The group element `t_v`.
    pub fn t(ambient: Arc<IntersectionLattice>, v: LatticeVector) -> Result<Self, SwError> {
        Self::monomial(ambient, v, Int::one())
    }

    /// Builds a polynomial, merging repeated exponents. Every denominator
    /// must divide `multiplicity`.
    pub fn from_terms<I>(ambient: Arc<IntersectionLattice>, multiplicity: Int, terms: I) -> Result<Self, SwError>
    where
        I: IntoIterator<Item = (LatticeVector, Int)>,
    {
        let mut p = SwPolynomial { ambient, multiplicity: multiplicity.abs(), terms: BTreeMap::new() };
        for (exp, coef) in terms {
            p.check_exponent(&exp)?;
            add_term(&mut p.terms, exp, coef);
        }
        Ok(p)
    }

    fn check_exponent(&self, exp: &LatticeVector) -> Result<(), SwError> {
        if exp.dim() != self.ambient.rank() {
            return Err(SwError::DimensionMismatch { got: exp.dim(), rank: self.ambient.rank() });
        }
        if !(&self.multiplicity % exp.denominator()).is_zero() {
            return Err(SwError::UnflaggedDenominator(exp.to_string()));
        }
        Ok(())
    }

    /// The multiplicity-`p` log-transform multiplier
    /// `s^{-(p-1)} + s^{-(p-3)} + … + s^{p-1}` with `s = t_{T/p}`.
    pub fn log_transform_multiplier(ambient: Arc<IntersectionLattice>, torus: &LatticeVector, p: u32) -> Result<Self, SwError> {
        assert!(p >= 1, "multiplicity must be positive");
        let p_int = int(p as i64);
        let s = torus.scale(&Rat::new(Int::one(), p_int.clone()));
        let terms = (0..p).map(|j| {
            let e = 2 * j as i64 - (p as i64 - 1);
            (s.scale(&Rat::from_integer(int(e))), Int::one())
        });
        Self::from_terms(ambient, p_int, terms)
    }

    pub fn ambient(&self) -> &Arc<IntersectionLattice> {
        &self.ambient
    }

    /// The recorded multiplicity bounding exponent denominators.
    pub fn multiplicity(&self) -> &Int {
        &self.multiplicity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&LatticeVector, &Int)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exp: &LatticeVector) -> Int {
        self.terms.get(exp).cloned().unwrap_or_else(Int::zero)
    }

    pub fn coefficient_sum(&self) -> Int {
        self.terms.values().sum()
    }

    /// `(class, coefficient)` for every basic class, lexicographic in the
    /// coordinates.
    pub fn basic_classes(&self) -> Vec<(LatticeVector, Int)> {
        self.terms.iter().map(|(e, c)| (e.clone(), c.clone())).collect()
    }

    fn check_compatible(&self, other: &Self) -> Result<(), SwError> {
        if !same_ambient(&self.ambient, &other.ambient) {
            return Err(SwError::AmbientMismatch);
        }
        Ok(())
    }

    pub fn multiply(&self, other: &Self) -> Result<Self, SwError> {
        self.check_compatible(other)?;
        Ok(SwPolynomial {
            ambient: self.ambient.clone(),
            multiplicity: lcm(&self.multiplicity, &other.multiplicity),
            terms: convolve(&self.terms, &other.terms),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, SwError> {
        self.check_compatible(other)?;
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            add_term(&mut terms, e.clone(), c.clone());
        }
        Ok(SwPolynomial {
            ambient: self.ambient.clone(),
            multiplicity: lcm(&self.multiplicity, &other.multiplicity),
            terms,
        })
    }

    pub fn scale(&self, k: &Int) -> Self {
        let terms = if k.is_zero() {
            BTreeMap::new()
        } else {
            self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect()
        };
        SwPolynomial { ambient: self.ambient.clone(), multiplicity: self.multiplicity.clone(), terms }
    }

    pub fn neg(&self) -> Self {
        self.scale(&int(-1))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(self.ambient.clone());
        for _ in 0..n {
            acc = acc.multiply(self).expect("same ambient");
        }
        acc
    }

    /// Moves the polynomial to a new ambient lattice through a coordinate
    /// map on exponents.
    pub fn reembed<F>(&self, ambient: Arc<IntersectionLattice>, map: F) -> Result<Self, SwError>
    where
        F: Fn(&LatticeVector) -> LatticeVector,
    {
        Self::from_terms(
            ambient,
            self.multiplicity.clone(),
            self.terms.iter().map(|(e, c)| (map(e), c.clone())),
        )
    }

    /// True iff `coefficient(−β) = sign · coefficient(β)` for every `β`.
    pub fn is_symmetric(&self, sign: i8) -> bool {
        let s = int(sign as i64);
        self.terms.iter().all(|(e, c)| self.coefficient(&-e) == c * &s)
    }

    /// Equality as-is and after an overall sign flip.
    pub fn compare_up_to_sign(&self, other: &Self) -> SignComparison {
        SignComparison { as_is: self == other, flipped: *self == other.neg() }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<TermRepr> = self
            .terms
            .iter()
            .map(|(e, c)| TermRepr { exp: e.to_json(), coef: JsonInt(c.clone()) })
            .collect();
        serde_json::to_value(terms).expect("terms serialize")
    }

    /// Parses the JSON term list over `ambient`. The multiplicity is
    /// recovered as the lcm of the exponent denominators.
    pub fn from_json(v: &serde_json::Value, ambient: Arc<IntersectionLattice>) -> Result<Self, SwError> {
        let terms: Vec<TermRepr> =
            serde_json::from_value(v.clone()).map_err(|e| SwError::Json(e.to_string()))?;
        let mut parsed = Vec::with_capacity(terms.len());
        let mut multiplicity = Int::one();
        for t in terms {
            let exp = LatticeVector::from_json(&t.exp).map_err(|e| SwError::Json(e.to_string()))?;
            multiplicity = lcm(&multiplicity, &exp.denominator());
            parsed.push((exp, t.coef.0));
        }
        Self::from_terms(ambient, multiplicity, parsed)
    }

    /// Human-readable form using the ambient basis labels, e.g.
    /// `t{2F} - 1 + t{-2F}`.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        // Descending order reads more naturally for one-variable cases.
        let mut out = String::new();
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if e.is_zero() {
                out.push_str(&mag.to_string());
                continue;
            }
            if !mag.is_one() {
                out.push_str(&format!("{mag}·"));
            }
            out.push_str(&format!("t{{{}}}", render_class(&self.ambient, e)));
        }
        out
    }
}

/// Renders a class as a labeled combination, e.g. `2F - E1` or `F/2`.
pub fn render_class(lattice: &IntersectionLattice, v: &LatticeVector) -> String {
    let mut out = String::new();
    for (label, c) in lattice.labels().iter().zip(v.coords()) {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let mag = c.abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if mag.is_one() {
            out.push_str(label);
        } else if mag.denom().is_one() {
            out.push_str(&format!("{}{label}", mag.numer()));
        } else if mag.numer().is_one() {
            out.push_str(&format!("{label}/{}", mag.denom()));
        } else {
            out.push_str(&format!("{}{label}/{}", mag.numer(), mag.denom()));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for SwPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exp: serde_json::Value,
    coef: JsonInt,
}

/// A polynomial in the group ring of `H₂ / span_Q(T)`.
#[derive(Clone, Debug)]
pub struct ReducedSwPolynomial {
    ambient: Arc<IntersectionLattice>,
    torus: LatticeVector,
    pivot: usize,
    terms: BTreeMap<LatticeVector, Int>,
}

impl PartialEq for ReducedSwPolynomial {
    fn eq(&self, other: &Self) -> bool {
        same_ambient(&self.ambient, &other.ambient) && self.torus == other.torus && self.terms == other.terms
    }
}

impl Eq for ReducedSwPolynomial {}

impl ReducedSwPolynomial {
    pub fn zero(ambient: Arc<IntersectionLattice>, torus: &LatticeVector) -> Result<Self, SwError> {
        if torus.dim() != ambient.rank() {
            return Err(SwError::DimensionMismatch { got: torus.dim(), rank: ambient.rank() });
        }
        let pivot = torus.coords().iter().position(|c| !c.is_zero()).ok_or(SwError::ZeroTorus)?;
        // Normalize so the pivot coordinate is 1; the line is what matters.
        let torus = torus.scale(&(Rat::one() / &torus.coords()[pivot]));
        Ok(ReducedSwPolynomial { ambient, torus, pivot, terms: BTreeMap::new() })
    }

    pub fn one(ambient: Arc<IntersectionLattice>, torus: &LatticeVector) -> Result<Self, SwError> {
        let mut r = Self::zero(ambient, torus)?;
        r.terms.insert(LatticeVector::zero(r.torus.dim()), Int::one());
        Ok(r)
    }

    fn canonical(&self, e: &LatticeVector) -> LatticeVector {
        let k = &e.coords()[self.pivot];
        if k.is_zero() {
            e.clone()
        } else {
            e - &self.torus.scale(k)
        }
    }

    pub fn torus(&self) -> &LatticeVector {
        &self.torus
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&LatticeVector, &Int)> {
        self.terms.iter()
    }

    pub fn coefficient_sum(&self) -> Int {
        self.terms.values().sum()
    }

    /// Inserts `coef · t_exp`, canonicalizing the exponent.
    pub fn add_term(&mut self, exp: &LatticeVector, coef: Int) {
        let key = self.canonical(exp);
        add_term(&mut self.terms, key, coef);
    }

    fn check_compatible(&self, other: &Self) -> Result<(), SwError> {
        if !same_ambient(&self.ambient, &other.ambient) {
            return Err(SwError::AmbientMismatch);
        }
        if self.torus != other.torus {
            return Err(SwError::TorusMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SwError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            add_term(&mut out.terms, e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, k: &Int) -> Self {
        let mut out = self.clone();
        out.terms = if k.is_zero() {
            BTreeMap::new()
        } else {
            self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect()
        };
        out
    }

    pub fn multiply(&self, other: &Self) -> Result<Self, SwError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        // Representatives have a zero pivot coordinate, so sums do too.
        out.terms = convolve(&self.terms, &other.terms);
        Ok(out)
    }
}

/// The torus-quotient map `π_*`: merges exponents congruent modulo the
/// rational span of `torus`.
pub fn reduce_by_torus(p: &SwPolynomial, torus: &LatticeVector) -> Result<ReducedSwPolynomial, SwError> {
    let mut r = ReducedSwPolynomial::zero(p.ambient.clone(), torus)?;
    for (e, c) in &p.terms {
        r.add_term(e, c.clone());
    }
    Ok(r)
}

/// `p·A + q·B + r·C` in the reduced ring.
pub fn mms_combine(
    a: &ReducedSwPolynomial,
    b: &ReducedSwPolynomial,
    c: &ReducedSwPolynomial,
    p: &Int,
    q: &Int,
    r: &Int,
) -> Result<ReducedSwPolynomial, SwError> {
    a.scale(p).add(&b.scale(q))?.add(&c.scale(r))
}
