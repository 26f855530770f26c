//! Manifold models: homeomorphism data, intersection lattice, SW status and
//! provenance, together with validation, the homeomorphism classifier, the
//! exotic-pair detector and the `b⁺ = 1` wall-crossing tools.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::arith::{int, is_integral, rat, rat_display, Int, Rat};
use crate::lattice::{IntersectionLattice, LatticeError, LatticeVector};
use crate::swring::{render_class, SwError, SwPolynomial};

/// Default box radius for the characteristic-vector searches.
pub const DEFAULT_SEARCH_RADIUS: i64 = 5;

/// The search radius, overridable through `M4CALC_SEARCH_RADIUS`.
pub fn search_radius() -> i64 {
    std::env::var("M4CALC_SEARCH_RADIUS")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|r: &i64| *r >= 0)
        .unwrap_or(DEFAULT_SEARCH_RADIUS)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ManifoldError {
    #[error("SW invariant is not known for this model")]
    UnknownSw,
    #[error("intersection form is degenerate")]
    DegenerateLattice,
    #[error("class is not integral")]
    NonIntegralVector,
    #[error("class is not characteristic")]
    NotCharacteristic,
    #[error("formal dimension {0} is negative")]
    NegativeDimension(String),
    #[error("formal dimension {0} is not even")]
    OddDimension(String),
    #[error("wall crossing needs chi_h = 1, model has chi_h = {0}")]
    NotChiOne(String),
    #[error("chamber vector has non-positive square {0}")]
    NotPositive(String),
    #[error("chamber vectors lie in opposite components of the positive cone")]
    OppositeComponents,
    #[error("k pairs to zero with a chamber vector")]
    OnWall,
    #[error("k·H has the same sign in both chambers")]
    NoWall,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("malformed model JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Sw(#[from] SwError),
}

/// `(e, σ, t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct HomeoType {
    pub e: i64,
    pub sigma: i64,
    pub t: u8,
}

impl HomeoType {
    pub fn new(e: i64, sigma: i64, t: u8) -> Self {
        HomeoType { e, sigma, t }
    }

    /// Reads `(e, σ, t)` off a non-degenerate lattice.
    pub fn from_lattice(lattice: &IntersectionLattice) -> Result<Self, LatticeError> {
        let sig = lattice.signature()?;
        Ok(HomeoType { e: lattice.rank() as i64 + 2, sigma: sig.sigma(), t: lattice.parity() })
    }

    pub fn chi_h(&self) -> Rat {
        Rat::new(int(self.e + self.sigma), int(4))
    }

    pub fn chi_h_int(&self) -> Option<i64> {
        let s = self.e + self.sigma;
        (s % 4 == 0).then_some(s / 4)
    }

    pub fn c(&self) -> i64 {
        3 * self.sigma + 2 * self.e
    }

    pub fn b_plus(&self) -> i64 {
        (self.e - 2 + self.sigma) / 2
    }

    pub fn b_minus(&self) -> i64 {
        (self.e - 2 - self.sigma) / 2
    }

    pub fn to_json(&self) -> Value {
        json!({
            "e": self.e,
            "sigma": self.sigma,
            "t": self.t,
            "chi_h": rat_display(&self.chi_h()),
            "c": self.c(),
        })
    }
}

impl fmt::Display for HomeoType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "e={} sigma={} t={} chi_h={} c={}",
            self.e,
            self.sigma,
            self.t,
            rat_display(&self.chi_h()),
            self.c()
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SwStatus {
    Known(SwPolynomial),
    Unknown,
    Undefined,
}

impl SwStatus {
    pub fn known(&self) -> Option<&SwPolynomial> {
        match self {
            SwStatus::Known(p) => Some(p),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            SwStatus::Known(p) => json!({ "known": p.to_json() }),
            SwStatus::Unknown => json!("unknown"),
            SwStatus::Undefined => json!("undefined"),
        }
    }

    pub fn from_json(v: &Value, ambient: Arc<IntersectionLattice>) -> Result<Self, ManifoldError> {
        match v {
            Value::String(s) if s == "unknown" => Ok(SwStatus::Unknown),
            Value::String(s) if s == "undefined" => Ok(SwStatus::Undefined),
            Value::Object(o) if o.contains_key("known") => {
                Ok(SwStatus::Known(SwPolynomial::from_json(&o["known"], ambient)?))
            }
            other => Err(ManifoldError::Json(format!("bad sw status {other}"))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SwStatus::Known(_) => "known",
            SwStatus::Unknown => "unknown",
            SwStatus::Undefined => "undefined",
        }
    }
}

/// A square-zero torus class with the caller's assertions about it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedTorus {
    pub cls: LatticeVector,
    pub node_neighborhood: bool,
    pub simply_connected_complement: bool,
}

impl MarkedTorus {
    pub fn new(cls: LatticeVector, node_neighborhood: bool, simply_connected_complement: bool) -> Self {
        MarkedTorus { cls, node_neighborhood, simply_connected_complement }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "class": self.cls.to_json(),
            "node_neighborhood": self.node_neighborhood,
            "simply_connected_complement": self.simply_connected_complement,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, ManifoldError> {
        let cls = v
            .get("class")
            .ok_or_else(|| ManifoldError::Json("torus without class".into()))
            .and_then(|c| LatticeVector::from_json(c).map_err(|e| ManifoldError::Json(e.to_string())))?;
        let flag = |k: &str| v.get(k).and_then(Value::as_bool).unwrap_or(false);
        Ok(MarkedTorus::new(cls, flag("node_neighborhood"), flag("simply_connected_complement")))
    }
}

/// One node of the construction DAG.
#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub op: String,
    pub params: Value,
    pub parents: Vec<Arc<Provenance>>,
    pub notes: Vec<String>,
}

impl Provenance {
    pub fn new(op: impl Into<String>, params: Value, parents: Vec<Arc<Provenance>>) -> Self {
        Provenance { op: op.into(), params, parents, notes: Vec::new() }
    }

    pub fn with_notes(mut self, notes: Vec<String>) -> Self {
        self.notes = notes;
        self
    }

    pub fn to_json(&self) -> Value {
        json!({
            "op": self.op,
            "params": self.params,
            "notes": self.notes,
            "parents": self.parents.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Provenance {
        Provenance {
            op: v.get("op").and_then(Value::as_str).unwrap_or("imported").to_string(),
            params: v.get("params").cloned().unwrap_or(Value::Null),
            parents: v
                .get("parents")
                .and_then(Value::as_array)
                .map(|ps| ps.iter().map(|p| Arc::new(Provenance::from_json(p))).collect())
                .unwrap_or_default(),
            notes: v
                .get("notes")
                .and_then(Value::as_array)
                .map(|ns| ns.iter().filter_map(|n| n.as_str().map(String::from)).collect())
                .unwrap_or_default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ManifoldModel {
    pub name: String,
    pub homeo: HomeoType,
    pub lattice: Arc<IntersectionLattice>,
    pub sw: SwStatus,
    pub tori: BTreeMap<String, MarkedTorus>,
    pub irreducible: Option<bool>,
    pub provenance: Arc<Provenance>,
}

impl ManifoldModel {
    /// Assembles a model. `homeo` is the incrementally tracked triple; it is
    /// compared with the lattice by [`validate`], not overwritten.
    pub fn new(
        name: impl Into<String>,
        homeo: HomeoType,
        lattice: Arc<IntersectionLattice>,
        sw: SwStatus,
        provenance: Provenance,
    ) -> Result<Self, ManifoldError> {
        if lattice.is_degenerate() {
            return Err(ManifoldError::DegenerateLattice);
        }
        Ok(ManifoldModel {
            name: name.into(),
            homeo,
            lattice,
            sw,
            tori: BTreeMap::new(),
            irreducible: None,
            provenance: Arc::new(provenance),
        })
    }

    /// A model whose homeomorphism data is read off the lattice.
    pub fn from_lattice(
        name: impl Into<String>,
        lattice: Arc<IntersectionLattice>,
        sw: SwStatus,
        provenance: Provenance,
    ) -> Result<Self, ManifoldError> {
        let homeo = HomeoType::from_lattice(&lattice).map_err(|_| ManifoldError::DegenerateLattice)?;
        Self::new(name, homeo, lattice, sw, provenance)
    }

    pub fn with_torus(mut self, name: impl Into<String>, torus: MarkedTorus) -> Self {
        self.tori.insert(name.into(), torus);
        self
    }

    pub fn chi_h(&self) -> Rat {
        self.homeo.chi_h()
    }

    pub fn c(&self) -> i64 {
        self.homeo.c()
    }

    pub fn torus(&self, name: &str) -> Option<&MarkedTorus> {
        self.tori.get(name)
    }

    pub fn basic_class_count(&self) -> Option<usize> {
        self.sw.known().map(SwPolynomial::term_count)
    }

    pub fn to_json(&self) -> Value {
        let tori: serde_json::Map<String, Value> =
            self.tori.iter().map(|(k, t)| (k.clone(), t.to_json())).collect();
        json!({
            "name": self.name,
            "homeo": self.homeo.to_json(),
            "lattice": self.lattice.to_json(),
            "sw": self.sw.to_json(),
            "tori": tori,
            "irreducible": self.irreducible,
            "provenance": self.provenance.to_json(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, ManifoldError> {
        let lattice: IntersectionLattice = serde_json::from_value(
            v.get("lattice").cloned().ok_or_else(|| ManifoldError::Json("missing lattice".into()))?,
        )
        .map_err(|e| ManifoldError::Json(e.to_string()))?;
        let lattice = Arc::new(lattice);
        let homeo = match v.get("homeo") {
            Some(h) => {
                let field = |k: &str| {
                    h.get(k)
                        .and_then(Value::as_i64)
                        .ok_or_else(|| ManifoldError::Json(format!("homeo.{k} missing")))
                };
                HomeoType::new(field("e")?, field("sigma")?, field("t")? as u8)
            }
            None => HomeoType::from_lattice(&lattice).map_err(|_| ManifoldError::DegenerateLattice)?,
        };
        let sw = match v.get("sw") {
            Some(s) => SwStatus::from_json(s, lattice.clone())?,
            None => SwStatus::Unknown,
        };
        let provenance = v.get("provenance").map(Provenance::from_json).unwrap_or_else(|| {
            Provenance::new("imported", Value::Null, Vec::new())
        });
        let name = v.get("name").and_then(Value::as_str).unwrap_or("model").to_string();
        let mut m = ManifoldModel::new(name, homeo, lattice, sw, provenance)?;
        if let Some(Value::Object(tori)) = v.get("tori") {
            for (k, t) in tori {
                m.tori.insert(k.clone(), MarkedTorus::from_json(t)?);
            }
        }
        m.irreducible = v.get("irreducible").and_then(Value::as_bool);
        Ok(m)
    }
}

/// `d(k) = (k² − c)/4` on a model, for integral characteristic `k`.
pub fn formal_dimension(m: &ManifoldModel, k: &LatticeVector) -> Result<Rat, ManifoldError> {
    if !k.is_integral() {
        return Err(ManifoldError::NonIntegralVector);
    }
    if !m.lattice.is_characteristic(k)? {
        return Err(ManifoldError::NotCharacteristic);
    }
    Ok(crate::lattice::formal_dimension(&m.lattice, m.c(), k)?)
}

/// `SW(−β) = (−1)^{χ_h} SW(β)` for every `β`.
pub fn check_symmetry(m: &ManifoldModel) -> Result<bool, ManifoldError> {
    let p = m.sw.known().ok_or(ManifoldError::UnknownSw)?;
    let Some(chi) = m.homeo.chi_h_int() else {
        return Ok(false);
    };
    Ok(p.is_symmetric(if chi.rem_euclid(2) == 0 { 1 } else { -1 }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Violation {
    EulerTooSmall { e: i64 },
    EulerRankMismatch { e: i64, rank: usize },
    DegenerateLattice,
    SignatureMismatch { tracked: i64, lattice: i64 },
    ParityMismatch { tracked: u8, lattice: u8 },
    SignatureOutOfRange { sigma: i64, b2: i64 },
    SignatureParity { sigma: i64, b2: i64 },
    RokhlinViolation { sigma: i64 },
    VanDerBlijViolation { square: String, sigma: i64 },
    SwWithNonIntegralChi { chi_h: String },
    AmbientMismatch,
    SymmetryViolation,
    NonIntegralBasicClass { class: String },
    NonCharacteristicBasicClass { class: String },
    NonIntegralDimension { class: String, d: String },
    NegativeDimension { class: String, d: String },
    TorusNotSquareZero { torus: String, square: String },
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::EulerTooSmall { .. } => "EulerTooSmall",
            Violation::EulerRankMismatch { .. } => "EulerRankMismatch",
            Violation::DegenerateLattice => "DegenerateLattice",
            Violation::SignatureMismatch { .. } => "SignatureMismatch",
            Violation::ParityMismatch { .. } => "ParityMismatch",
            Violation::SignatureOutOfRange { .. } => "SignatureOutOfRange",
            Violation::SignatureParity { .. } => "SignatureParity",
            Violation::RokhlinViolation { .. } => "RokhlinViolation",
            Violation::VanDerBlijViolation { .. } => "VanDerBlijViolation",
            Violation::SwWithNonIntegralChi { .. } => "SwWithNonIntegralChi",
            Violation::AmbientMismatch => "AmbientMismatch",
            Violation::SymmetryViolation => "SymmetryViolation",
            Violation::NonIntegralBasicClass { .. } => "NonIntegralBasicClass",
            Violation::NonCharacteristicBasicClass { .. } => "NonCharacteristicBasicClass",
            Violation::NonIntegralDimension { .. } => "NonIntegralDimension",
            Violation::NegativeDimension { .. } => "NegativeDimension",
            Violation::TorusNotSquareZero { .. } => "TorusNotSquareZero",
        }
    }
}

fn mod8(r: &Rat) -> Option<i64> {
    is_integral(r).then(|| (r.numer() % int(8)).to_i64().unwrap_or(0).rem_euclid(8))
}

/// Every broken invariant of the model; empty iff the model is consistent.
pub fn validate(m: &ManifoldModel) -> Vec<Violation> {
    let mut out = Vec::new();
    let h = m.homeo;
    let lat = &m.lattice;
    if h.e < 2 {
        out.push(Violation::EulerTooSmall { e: h.e });
    }
    if h.e - 2 != lat.rank() as i64 {
        out.push(Violation::EulerRankMismatch { e: h.e, rank: lat.rank() });
    }
    let unimodular = lat.determinant().abs().is_one();
    match HomeoType::from_lattice(lat) {
        Err(_) => out.push(Violation::DegenerateLattice),
        Ok(derived) => {
            if derived.sigma != h.sigma {
                out.push(Violation::SignatureMismatch { tracked: h.sigma, lattice: derived.sigma });
            }
            if derived.t != h.t {
                out.push(Violation::ParityMismatch { tracked: h.t, lattice: derived.t });
            }
        }
    }
    let b2 = h.e - 2;
    if h.sigma.abs() > b2 {
        out.push(Violation::SignatureOutOfRange { sigma: h.sigma, b2 });
    }
    if (h.sigma - b2).rem_euclid(2) != 0 {
        out.push(Violation::SignatureParity { sigma: h.sigma, b2 });
    }
    if h.t == 0 && h.sigma.rem_euclid(16) != 0 {
        out.push(Violation::RokhlinViolation { sigma: h.sigma });
    }
    let sigma8 = h.sigma.rem_euclid(8);
    if unimodular {
        if let Some(k) = lat.characteristic_vector() {
            let sq = lat.square(&k);
            if mod8(&sq) != Some(sigma8) {
                out.push(Violation::VanDerBlijViolation { square: rat_display(&sq), sigma: h.sigma });
            }
        }
    }
    for (name, t) in &m.tori {
        if t.cls.dim() != lat.rank() {
            out.push(Violation::TorusNotSquareZero { torus: name.clone(), square: "dimension mismatch".into() });
            continue;
        }
        let sq = lat.square(&t.cls);
        if !sq.is_zero() {
            out.push(Violation::TorusNotSquareZero { torus: name.clone(), square: rat_display(&sq) });
        }
    }
    let Some(p) = m.sw.known() else {
        return out;
    };
    if **p.ambient() != **lat {
        out.push(Violation::AmbientMismatch);
        return out;
    }
    if h.chi_h_int().is_none() {
        out.push(Violation::SwWithNonIntegralChi { chi_h: rat_display(&h.chi_h()) });
    } else if check_symmetry(m) != Ok(true) {
        out.push(Violation::SymmetryViolation);
    }
    let c = rat(h.c());
    for (beta, _) in p.terms() {
        let class = render_class(lat, beta);
        let sq = lat.square(beta);
        let d = (&sq - &c) / rat(4);
        if beta.is_integral() {
            match lat.is_characteristic(beta) {
                Ok(true) => {
                    if !is_integral(&d) {
                        out.push(Violation::NonIntegralDimension { class: class.clone(), d: rat_display(&d) });
                    }
                    if unimodular && mod8(&sq) != Some(sigma8) {
                        out.push(Violation::VanDerBlijViolation { square: rat_display(&sq), sigma: h.sigma });
                    }
                }
                _ => out.push(Violation::NonCharacteristicBasicClass { class: class.clone() }),
            }
        } else if p.multiplicity().is_one() {
            out.push(Violation::NonIntegralBasicClass { class: class.clone() });
        }
        if d.is_negative() {
            out.push(Violation::NegativeDimension { class, d: rat_display(&d) });
        }
    }
    out
}

pub fn homeomorphic(x: &ManifoldModel, y: &ManifoldModel) -> bool {
    x.homeo == y.homeo
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ExoticVerdict {
    NotHomeomorphic,
    ExoticPair,
    IndistinguishableHere,
    Undetermined,
}

impl fmt::Display for ExoticVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExoticVerdict::NotHomeomorphic => "NotHomeomorphic",
            ExoticVerdict::ExoticPair => "ExoticPair",
            ExoticVerdict::IndistinguishableHere => "IndistinguishableHere",
            ExoticVerdict::Undetermined => "Undetermined",
        };
        f.write_str(s)
    }
}

type FingerprintEntry = (Int, Rat, Vec<(Rat, Int)>);

/// An isometry-invariant summary of an SW polynomial: for each basic class
/// its coefficient, its square and the sorted multiset of its pairings with
/// all basic classes (tagged by their coefficients).
pub fn fingerprint(lattice: &IntersectionLattice, p: &SwPolynomial) -> Vec<FingerprintEntry> {
    let classes = p.basic_classes();
    let mut out: Vec<FingerprintEntry> = classes
        .iter()
        .map(|(b, c)| {
            let mut row: Vec<(Rat, Int)> =
                classes.iter().map(|(b2, c2)| (lattice.pair(b, b2), c2.clone())).collect();
            row.sort();
            (c.clone(), lattice.square(b), row)
        })
        .collect();
    out.sort();
    out
}

fn negate_fingerprint(f: &[FingerprintEntry]) -> Vec<FingerprintEntry> {
    let mut out: Vec<FingerprintEntry> = f
        .iter()
        .map(|(c, sq, row)| {
            let mut row: Vec<(Rat, Int)> = row.iter().map(|(x, c2)| (x.clone(), -c2)).collect();
            row.sort();
            (-c, sq.clone(), row)
        })
        .collect();
    out.sort();
    out
}

pub fn exotic_verdict(x: &ManifoldModel, y: &ManifoldModel) -> ExoticVerdict {
    if !homeomorphic(x, y) {
        return ExoticVerdict::NotHomeomorphic;
    }
    let (Some(px), Some(py)) = (x.sw.known(), y.sw.known()) else {
        return ExoticVerdict::Undetermined;
    };
    let fx = fingerprint(&x.lattice, px);
    let fy = fingerprint(&y.lattice, py);
    if fx == fy || fx == negate_fingerprint(&fy) {
        ExoticVerdict::IndistinguishableHere
    } else {
        ExoticVerdict::ExoticPair
    }
}

/// A vector of positive square, selecting a chamber of the positive cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChamberVector(LatticeVector);

impl ChamberVector {
    pub fn new(lattice: &IntersectionLattice, h: LatticeVector) -> Result<Self, ManifoldError> {
        if h.dim() != lattice.rank() {
            return Err(LatticeError::DimensionMismatch { got: h.dim(), rank: lattice.rank() }.into());
        }
        let sq = lattice.square(&h);
        if !sq.is_positive() {
            return Err(ManifoldError::NotPositive(rat_display(&sq)));
        }
        Ok(ChamberVector(h))
    }

    pub fn vector(&self) -> &LatticeVector {
        &self.0
    }
}

/// The jump `SW_{H_to}(k) − SW_{H_from}(k)` across the wall `k^⊥`.
///
/// With `k·H_from < 0 < k·H_to` this is `(−1)^{1 + d(k)/2}`; crossing in the
/// opposite direction negates it.
pub fn wall_crossing_delta(
    x: &ManifoldModel,
    k: &LatticeVector,
    from: &ChamberVector,
    to: &ChamberVector,
) -> Result<i64, ManifoldError> {
    if x.homeo.chi_h_int() != Some(1) {
        return Err(ManifoldError::NotChiOne(rat_display(&x.chi_h())));
    }
    let d = formal_dimension(x, k)?;
    if d.is_negative() {
        return Err(ManifoldError::NegativeDimension(rat_display(&d)));
    }
    let half = &d / rat(2);
    if !is_integral(&half) {
        return Err(ManifoldError::OddDimension(rat_display(&d)));
    }
    let lat = &x.lattice;
    if !lat.pair(from.vector(), to.vector()).is_positive() {
        return Err(ManifoldError::OppositeComponents);
    }
    let a = lat.pair(k, from.vector());
    let b = lat.pair(k, to.vector());
    if a.is_zero() || b.is_zero() {
        return Err(ManifoldError::OnWall);
    }
    if a.is_positive() == b.is_positive() {
        return Err(ManifoldError::NoWall);
    }
    let exponent = half.numer() + 1;
    let delta = if crate::arith::is_even(&exponent) { 1 } else { -1 };
    Ok(if a.is_negative() { delta } else { -delta })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityReport {
    pub stable: bool,
    /// The first offending class: least L1 norm, then positive leading
    /// coordinate, then lexicographically least.
    pub witness: Option<LatticeVector>,
    pub radius: i64,
    pub examined: u64,
}

/// Searches characteristic `k` with `|k_i| ≤ radius` and `c ≤ k² < 0`
/// (so `d(k) ≥ 0` while `k^⊥` meets the positive cone). The model is stable
/// iff none exists.
pub fn small_bminus_stability(
    x: &ManifoldModel,
    radius: i64,
    waive_precondition: bool,
) -> Result<StabilityReport, ManifoldError> {
    if !waive_precondition {
        if x.homeo.chi_h_int() != Some(1) {
            return Err(ManifoldError::Precondition(format!("chi_h = {}", rat_display(&x.chi_h()))));
        }
        if x.homeo.b_minus() > 9 {
            return Err(ManifoldError::Precondition(format!("b- = {} exceeds 9", x.homeo.b_minus())));
        }
    }
    let gram = x.lattice.gram_i64()?;
    let residues = x.lattice.characteristic_residues();
    let n = gram.len();
    let mut search = BoxSearch { gram: &gram, radius, lower: x.c(), examined: 0, k: vec![0; n] };
    let max_l1 = radius * n as i64;
    for l1 in 0..=max_l1 {
        let mut best: Option<Vec<i64>> = None;
        for pattern in &residues {
            if let Some(w) = search.shell(pattern, l1) {
                if best.as_ref().is_none_or(|b| w < *b) {
                    best = Some(w);
                }
            }
        }
        if let Some(w) = best {
            return Ok(StabilityReport {
                stable: false,
                witness: Some(LatticeVector::from_ints(&w)),
                radius,
                examined: search.examined,
            });
        }
    }
    Ok(StabilityReport { stable: true, witness: None, radius, examined: search.examined })
}

struct BoxSearch<'a> {
    gram: &'a [Vec<i64>],
    radius: i64,
    lower: i64,
    examined: u64,
    k: Vec<i64>,
}

impl BoxSearch<'_> {
    /// The lexicographically least witness of L1 norm exactly `l1` with the
    /// given coordinate parities and positive leading coordinate.
    fn shell(&mut self, parity: &[bool], l1: i64) -> Option<Vec<i64>> {
        self.descend(parity, 0, l1, 0).then(|| self.k.clone())
    }

    fn min_abs(&self, odd: bool) -> i64 {
        odd as i64
    }

    fn descend(&mut self, parity: &[bool], i: usize, budget: i64, square: i64) -> bool {
        let n = self.k.len();
        if i == n {
            if budget != 0 {
                return false;
            }
            self.examined += 1;
            let leading_positive = self.k.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0);
            return leading_positive && square < 0 && square >= self.lower;
        }
        let rest_min: i64 = parity[i + 1..].iter().map(|&o| self.min_abs(o)).sum();
        let rest_max = self.radius * (n - i - 1) as i64;
        let odd = parity[i];
        let r = self.radius;
        let start = if (r - odd as i64) % 2 == 0 { -r } else { -r + 1 };
        let mut v = start;
        while v <= r {
            let left = budget - v.abs();
            if left >= rest_min && left <= rest_max {
                let mut cross = 0i64;
                for j in 0..i {
                    cross += self.gram[i][j] * self.k[j];
                }
                self.k[i] = v;
                let sq = square + self.gram[i][i] * v * v + 2 * v * cross;
                if self.descend(parity, i + 1, left, sq) {
                    return true;
                }
            }
            v += 2;
        }
        self.k[i] = 0;
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_model(entries: &[i64]) -> ManifoldModel {
        let mut labels = vec!["h".to_string()];
        labels.extend((1..entries.len()).map(|i| format!("e{i}")));
        let gram: Vec<Vec<i64>> = (0..entries.len())
            .map(|i| (0..entries.len()).map(|j| if i == j { entries[i] } else { 0 }).collect())
            .collect();
        let lat = IntersectionLattice::from_rows(&labels, &gram).unwrap();
        ManifoldModel::from_lattice("test", Arc::new(lat), SwStatus::Unknown, Provenance::new("test", Value::Null, vec![]))
            .unwrap()
    }

    fn cp2_blown(m: usize) -> ManifoldModel {
        let mut d = vec![1];
        d.extend(std::iter::repeat_n(-1, m));
        diag_model(&d)
    }

    #[test]
    fn homeo_accessors() {
        let h = HomeoType::new(24, -16, 0);
        assert_eq!(h.chi_h_int(), Some(2));
        assert_eq!(h.c(), 0);
        assert_eq!((h.b_plus(), h.b_minus()), (3, 19));
        assert_eq!(HomeoType::new(13, -9, 1).c(), -1);
    }

    #[test]
    fn rokhlin_fixture() {
        let lat = Arc::new(IntersectionLattice::neg_e8("E"));
        let m = ManifoldModel::from_lattice("e8", lat, SwStatus::Unknown, Provenance::new("test", Value::Null, vec![]))
            .unwrap();
        let v = validate(&m);
        assert_eq!(v.iter().map(Violation::kind).collect::<Vec<_>>(), vec!["RokhlinViolation"]);
    }

    #[test]
    fn wall_crossing_signs() {
        let x = cp2_blown(10);
        let k = LatticeVector::from_ints(&[3, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1]);
        let mut from = vec![100];
        from.extend(std::iter::repeat_n(-31, 10));
        let from = ChamberVector::new(&x.lattice, LatticeVector::from_ints(&from)).unwrap();
        let to = ChamberVector::new(&x.lattice, LatticeVector::unit(11, 0)).unwrap();
        assert_eq!(wall_crossing_delta(&x, &k, &from, &to), Ok(-1));
        assert_eq!(wall_crossing_delta(&x, &k, &to, &from), Ok(1));
        assert_eq!(wall_crossing_delta(&x, &k, &to, &to), Err(ManifoldError::NoWall));
    }

    #[test]
    fn stability_small_cases() {
        let r = small_bminus_stability(&cp2_blown(0), 5, false).unwrap();
        assert!(r.stable);
        let r = small_bminus_stability(&cp2_blown(3), 5, false).unwrap();
        assert!(r.stable);
        assert!(small_bminus_stability(&cp2_blown(10), 5, false).is_err());
        let r = small_bminus_stability(&cp2_blown(10), 5, true).unwrap();
        assert!(!r.stable);
        assert_eq!(r.witness.unwrap(), LatticeVector::from_ints(&[3, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1]));
    }

    #[test]
    fn json_round_trip() {
        let m = cp2_blown(2);
        let back = ManifoldModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back.homeo, m.homeo);
        assert_eq!(*back.lattice, *m.lattice);
        assert_eq!(back.sw, m.sw);
    }
}
