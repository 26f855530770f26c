//! Integer lattices with a symmetric bilinear form.
//!
//! An [`IntersectionLattice`] is a free abelian group with an explicit basis
//! (each basis element carries a label such as `F`, `E1` or `u0`) and the
//! Gram matrix of its pairing. Vectors are [`LatticeVector`]s: rational
//! coordinates over that basis, so fractional classes can be carried
//! alongside integral ones.

pub mod linalg;

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{int, is_even, is_integral, Int, JsonInt, JsonRat, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("gram matrix is not square ({rows} rows, row {row} has {len} entries)")]
    NotSquare { rows: usize, row: usize, len: usize },
    #[error("gram matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("{labels} labels for a rank-{rank} lattice")]
    LabelCount { labels: usize, rank: usize },
    #[error("duplicate basis label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown basis label `{0}`")]
    UnknownLabel(String),
    #[error("the form is degenerate (determinant 0)")]
    DegenerateForm,
    #[error("vector has {got} coordinates, lattice rank is {rank}")]
    DimensionMismatch { got: usize, rank: usize },
    #[error("vector is not integral")]
    NonIntegralVector,
    #[error("vector is not characteristic")]
    NotCharacteristic,
    #[error("vectors are linearly dependent")]
    DependentVectors,
    #[error("gram entry does not fit in a machine word")]
    EntryTooLarge,
}

/// A vector over the ambient basis with rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticeVector(Vec<Rat>);

impl LatticeVector {
    pub fn new(coords: Vec<Rat>) -> Self {
        LatticeVector(coords)
    }

    pub fn zero(dim: usize) -> Self {
        LatticeVector(vec![Rat::zero(); dim])
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        LatticeVector(coords.iter().map(|&c| Rat::from_integer(int(c))).collect())
    }

    pub fn from_big(coords: &[Int]) -> Self {
        LatticeVector(coords.iter().cloned().map(Rat::from_integer).collect())
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zero(dim);
        v.0[i] = Rat::one();
        v
    }

    pub fn coords(&self) -> &[Rat] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(is_integral)
    }

    /// Integer coordinates, if the vector is integral.
    pub fn to_ints(&self) -> Option<Vec<Int>> {
        self.is_integral().then(|| self.0.iter().map(|c| c.numer().clone()).collect())
    }

    /// Least common multiple of the coordinate denominators.
    pub fn denominator(&self) -> Int {
        self.0.iter().fold(Int::one(), |acc, c| crate::arith::lcm(&acc, c.denom()))
    }

    pub fn scale(&self, r: &Rat) -> Self {
        LatticeVector(self.0.iter().map(|c| c * r).collect())
    }

    /// Appends `extra` zero coordinates (embedding into `L ⊕ L'`).
    pub fn extended(&self, extra: usize) -> Self {
        let mut c = self.0.clone();
        c.extend(std::iter::repeat_n(Rat::zero(), extra));
        LatticeVector(c)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.0.iter().cloned().map(JsonRat).collect::<Vec<_>>())
            .expect("rationals serialize")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, serde_json::Error> {
        let coords: Vec<JsonRat> = serde_json::from_value(v.clone())?;
        Ok(LatticeVector(coords.into_iter().map(|r| r.0).collect()))
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", crate::arith::rat_display(c))?;
        }
        write!(f, ")")
    }
}

impl Add for &LatticeVector {
    type Output = LatticeVector;
    fn add(self, rhs: &LatticeVector) -> LatticeVector {
        debug_assert_eq!(self.dim(), rhs.dim());
        LatticeVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &LatticeVector {
    type Output = LatticeVector;
    fn sub(self, rhs: &LatticeVector) -> LatticeVector {
        debug_assert_eq!(self.dim(), rhs.dim());
        LatticeVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &LatticeVector {
    type Output = LatticeVector;
    fn neg(self) -> LatticeVector {
        LatticeVector(self.0.iter().map(|a| -a).collect())
    }
}

impl Mul<&LatticeVector> for i64 {
    type Output = LatticeVector;
    fn mul(self, rhs: &LatticeVector) -> LatticeVector {
        rhs.scale(&Rat::from_integer(int(self)))
    }
}

/// `(b⁺, b⁻)` of a non-degenerate form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub b_plus: usize,
    pub b_minus: usize,
}

impl Signature {
    pub fn sigma(&self) -> i64 {
        self.b_plus as i64 - self.b_minus as i64
    }
}

/// The result of [`IntersectionLattice::orthogonal_complement`].
#[derive(Clone, Debug)]
pub struct Complement {
    pub lattice: IntersectionLattice,
    /// Complement basis vectors, in coordinates of the ambient lattice.
    pub embedding: Vec<LatticeVector>,
}

impl Complement {
    /// Coordinates in the complement basis of an ambient vector lying in the
    /// complement's rational span.
    pub fn coordinates_of(&self, v: &LatticeVector) -> Option<LatticeVector> {
        let cols: Vec<Vec<Rat>> = self.embedding.iter().map(|e| e.coords().to_vec()).collect();
        linalg::solve_in_span(&cols, v.coords()).map(LatticeVector::new)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionLattice {
    labels: Vec<String>,
    gram: Vec<Vec<Int>>,
}

impl IntersectionLattice {
    pub fn new(labels: Vec<String>, gram: Vec<Vec<Int>>) -> Result<Self, LatticeError> {
        let n = gram.len();
        for (row, r) in gram.iter().enumerate() {
            if r.len() != n {
                return Err(LatticeError::NotSquare { rows: n, row, len: r.len() });
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if gram[i][j] != gram[j][i] {
                    return Err(LatticeError::NotSymmetric(i, j));
                }
            }
        }
        if labels.len() != n {
            return Err(LatticeError::LabelCount { labels: labels.len(), rank: n });
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(LatticeError::DuplicateLabel(l.clone()));
            }
        }
        Ok(IntersectionLattice { labels, gram })
    }

    pub fn from_rows<S: AsRef<str>>(labels: &[S], gram: &[Vec<i64>]) -> Result<Self, LatticeError> {
        Self::new(
            labels.iter().map(|s| s.as_ref().to_string()).collect(),
            gram.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect(),
        )
    }

    /// The empty (rank 0) lattice.
    pub fn empty() -> Self {
        IntersectionLattice { labels: Vec::new(), gram: Vec::new() }
    }

    /// Diagonal form; labels are `{prefix}{i}` starting at `start`.
    pub fn diagonal(prefix: &str, start: usize, entries: &[i64]) -> Self {
        let n = entries.len();
        let labels = (0..n).map(|i| format!("{prefix}{}", start + i)).collect();
        let gram = (0..n)
            .map(|i| (0..n).map(|j| if i == j { int(entries[i]) } else { Int::zero() }).collect())
            .collect();
        IntersectionLattice { labels, gram }
    }

    /// The hyperbolic plane `[[0,1],[1,0]]` with basis `{name}a`, `{name}b`.
    pub fn hyperbolic(name: &str) -> Self {
        IntersectionLattice {
            labels: vec![format!("{name}a"), format!("{name}b")],
            gram: vec![vec![int(0), int(1)], vec![int(1), int(0)]],
        }
    }

    /// The negative definite `E8` form (negated Cartan matrix, Bourbaki
    /// numbering: chain 1-3-4-5-6-7-8 with node 2 attached to node 4).
    pub fn neg_e8(name: &str) -> Self {
        const EDGES: [(usize, usize); 7] = [(0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 3)];
        let mut gram = vec![vec![Int::zero(); 8]; 8];
        for (i, row) in gram.iter_mut().enumerate() {
            row[i] = int(-2);
        }
        for (a, b) in EDGES {
            gram[a][b] = int(1);
            gram[b][a] = int(1);
        }
        IntersectionLattice { labels: (1..=8).map(|i| format!("{name}_{i}")).collect(), gram }
    }

    /// The same basis with the form negated.
    pub fn negated(&self) -> Self {
        let gram = self.gram.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
        IntersectionLattice { labels: self.labels.clone(), gram }
    }

    /// A copy with every label prefixed, for disjoint direct sums.
    pub fn relabeled(&self, prefix: &str) -> Self {
        let labels = self.labels.iter().map(|l| format!("{prefix}{l}")).collect();
        IntersectionLattice { labels, gram: self.gram.clone() }
    }

    pub fn direct_sum(&self, other: &IntersectionLattice) -> Result<Self, LatticeError> {
        let (n, m) = (self.rank(), other.rank());
        let mut gram = vec![vec![Int::zero(); n + m]; n + m];
        for i in 0..n {
            for j in 0..n {
                gram[i][j] = self.gram[i][j].clone();
            }
        }
        for i in 0..m {
            for j in 0..m {
                gram[n + i][n + j] = other.gram[i][j].clone();
            }
        }
        let labels = self.labels.iter().chain(&other.labels).cloned().collect();
        Self::new(labels, gram)
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn gram(&self) -> &[Vec<Int>] {
        &self.gram
    }

    pub fn entry(&self, i: usize, j: usize) -> &Int {
        &self.gram[i][j]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn basis_vector(&self, i: usize) -> LatticeVector {
        LatticeVector::unit(self.rank(), i)
    }

    pub fn vector(&self, label: &str) -> Result<LatticeVector, LatticeError> {
        self.index_of(label)
            .map(|i| self.basis_vector(i))
            .ok_or_else(|| LatticeError::UnknownLabel(label.to_string()))
    }

    /// Builds a vector from `(label, coefficient)` pairs.
    pub fn combination(&self, terms: &[(&str, i64)]) -> Result<LatticeVector, LatticeError> {
        let mut v = LatticeVector::zero(self.rank());
        for &(label, c) in terms {
            let i = self.index_of(label).ok_or_else(|| LatticeError::UnknownLabel(label.into()))?;
            v.0[i] += Rat::from_integer(int(c));
        }
        Ok(v)
    }

    fn check_dim(&self, v: &LatticeVector) -> Result<(), LatticeError> {
        if v.dim() != self.rank() {
            return Err(LatticeError::DimensionMismatch { got: v.dim(), rank: self.rank() });
        }
        Ok(())
    }

    /// `G v` as a rational vector.
    fn apply(&self, v: &LatticeVector) -> Vec<Rat> {
        self.gram
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v.coords())
                    .filter(|(g, c)| !g.is_zero() && !c.is_zero())
                    .fold(Rat::zero(), |acc, (g, c)| acc + c * g)
            })
            .collect()
    }

    pub fn pair(&self, a: &LatticeVector, b: &LatticeVector) -> Rat {
        assert_eq!(a.dim(), self.rank(), "vector dimension does not match lattice rank");
        assert_eq!(b.dim(), self.rank(), "vector dimension does not match lattice rank");
        self.apply(b)
            .iter()
            .zip(a.coords())
            .filter(|(x, y)| !x.is_zero() && !y.is_zero())
            .fold(Rat::zero(), |acc, (x, y)| acc + x * y)
    }

    pub fn square(&self, v: &LatticeVector) -> Rat {
        self.pair(v, v)
    }

    pub fn determinant(&self) -> Int {
        linalg::determinant(&self.gram)
    }

    pub fn is_degenerate(&self) -> bool {
        self.determinant().is_zero()
    }

    /// `(positive, negative, null)` counts of any (possibly degenerate) form.
    pub fn inertia(&self) -> (usize, usize, usize) {
        linalg::inertia(&self.gram)
    }

    pub fn signature(&self) -> Result<Signature, LatticeError> {
        let (b_plus, b_minus, null) = self.inertia();
        if null > 0 {
            return Err(LatticeError::DegenerateForm);
        }
        Ok(Signature { b_plus, b_minus })
    }

    /// Type `t`: 0 if the form is even, 1 if odd.
    pub fn parity(&self) -> u8 {
        if self.gram.iter().enumerate().all(|(i, r)| is_even(&r[i])) {
            0
        } else {
            1
        }
    }

    /// `k·x ≡ x·x (mod 2)` for every basis vector `x`.
    pub fn is_characteristic(&self, k: &LatticeVector) -> Result<bool, LatticeError> {
        self.check_dim(k)?;
        if !k.is_integral() {
            return Err(LatticeError::NonIntegralVector);
        }
        let gk = self.apply(k);
        Ok(gk.iter().enumerate().all(|(i, v)| is_even(&(v.numer() - &self.gram[i][i]))))
    }

    /// Some characteristic vector with coordinates in {0, 1}, if one exists.
    pub fn characteristic_vector(&self) -> Option<LatticeVector> {
        let a: Vec<Vec<bool>> =
            self.gram.iter().map(|r| r.iter().map(|x| !is_even(x)).collect()).collect();
        let b: Vec<bool> = (0..self.rank()).map(|i| !is_even(&self.gram[i][i])).collect();
        let (x, _) = linalg::gf2_solve(&a, &b)?;
        Some(LatticeVector::from_ints(&x.iter().map(|&bit| bit as i64).collect::<Vec<_>>()))
    }

    /// The parity patterns (coordinates mod 2) of all characteristic vectors.
    pub fn characteristic_residues(&self) -> Vec<Vec<bool>> {
        let a: Vec<Vec<bool>> =
            self.gram.iter().map(|r| r.iter().map(|x| !is_even(x)).collect()).collect();
        let b: Vec<bool> = (0..self.rank()).map(|i| !is_even(&self.gram[i][i])).collect();
        let Some((x, kernel)) = linalg::gf2_solve(&a, &b) else {
            return Vec::new();
        };
        let mut out = vec![x];
        for k in kernel {
            let shifted: Vec<Vec<bool>> = out
                .iter()
                .map(|v| v.iter().zip(&k).map(|(a, b)| a ^ b).collect())
                .collect();
            out.extend(shifted);
        }
        out.sort();
        out
    }

    /// The full integral orthogonal complement of `vs` together with its
    /// induced form. Basis vectors of the complement that coincide with an
    /// ambient basis vector keep that vector's label; the rest are named
    /// `w0`, `w1`, ...
    pub fn orthogonal_complement(&self, vs: &[LatticeVector]) -> Result<Complement, LatticeError> {
        let n = self.rank();
        let mut rows = Vec::with_capacity(vs.len());
        let mut coords = Vec::with_capacity(vs.len());
        for v in vs {
            self.check_dim(v)?;
            let ints = v.to_ints().ok_or(LatticeError::NonIntegralVector)?;
            rows.push(self.apply(v).into_iter().map(|r| r.numer().clone()).collect::<Vec<_>>());
            coords.push(ints);
        }
        if linalg::rank(&coords) < vs.len() {
            return Err(LatticeError::DependentVectors);
        }
        let kernel = linalg::hermite_rows(linalg::integer_kernel(&rows, n));
        let embedding: Vec<LatticeVector> = kernel.iter().map(|k| LatticeVector::from_big(k)).collect();
        let mut fresh = 0;
        let labels = embedding
            .iter()
            .map(|e| match unit_index(e) {
                Some(i) => self.labels[i].clone(),
                None => loop {
                    let name = format!("w{fresh}");
                    fresh += 1;
                    if !self.labels.contains(&name) {
                        break name;
                    }
                },
            })
            .collect();
        let gram = embedding
            .iter()
            .map(|a| embedding.iter().map(|b| self.pair(a, b).numer().clone()).collect())
            .collect();
        Ok(Complement { lattice: Self::new(labels, gram)?, embedding })
    }

    /// A copy with the `(i, i)` entry shifted by `delta`.
    pub fn with_diagonal_shift(&self, i: usize, delta: i64) -> Self {
        let mut g = self.gram.clone();
        g[i][i] += int(delta);
        IntersectionLattice { labels: self.labels.clone(), gram: g }
    }

    /// The Gram matrix as machine integers, for tight enumeration loops.
    pub fn gram_i64(&self) -> Result<Vec<Vec<i64>>, LatticeError> {
        self.gram
            .iter()
            .map(|r| r.iter().map(|x| x.to_i64().ok_or(LatticeError::EntryTooLarge)).collect())
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(LatticeRepr {
            labels: self.labels.clone(),
            gram: self.gram.iter().map(|r| r.iter().cloned().map(JsonInt).collect()).collect(),
        })
        .expect("lattice serializes")
    }
}

fn unit_index(v: &LatticeVector) -> Option<usize> {
    let mut found = None;
    for (i, c) in v.coords().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        if !c.is_one() || found.is_some() {
            return None;
        }
        found = Some(i);
    }
    found
}

#[derive(Serialize, Deserialize)]
struct LatticeRepr {
    labels: Vec<String>,
    gram: Vec<Vec<JsonInt>>,
}

impl Serialize for IntersectionLattice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntersectionLattice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = LatticeRepr::deserialize(d)?;
        IntersectionLattice::new(
            repr.labels,
            repr.gram.into_iter().map(|r| r.into_iter().map(|x| x.0).collect()).collect(),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// Formal dimension `d(k) = (k·k − c)/4` of the moduli space for a
/// characteristic `k`, where `c = 3σ + 2e`.
pub fn formal_dimension(lattice: &IntersectionLattice, c: i64, k: &LatticeVector) -> Result<Rat, LatticeError> {
    if !lattice.is_characteristic(k)? {
        return Err(LatticeError::NotCharacteristic);
    }
    Ok((lattice.square(k) - Rat::from_integer(int(c))) / Rat::from_integer(int(4)))
}
