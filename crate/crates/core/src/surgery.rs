//! Cut-and-paste operations on [`ManifoldModel`]s and the seed library.
//!
//! Every operation returns a fresh model whose `(e, σ, t)` is updated from
//! the operation's own bookkeeping rule; [`crate::manifold::validate`]
//! cross-checks it against the new lattice.
//!
//! Seed bases:
//!
//! * `E(n)`: `⟨F, S⟩ ⊕ (2n−2)H ⊕ n(−E8)` with `F² = 0`, `F·S = 1`,
//!   `S² = −n`. `F` is the fiber, marked as torus `"fiber"`. Hyperbolic
//!   summands are labeled `H{i}a`, `H{i}b`; `E8` blocks `Q{j}_1 … Q{j}_8`.
//! * `CP2#mCP2bar`: `⟨1⟩ ⊕ m⟨−1⟩` with labels `h, e1, …, em`.
//! * `S2xS2`: the hyperbolic plane with labels `Ha`, `Hb`.

use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde_json::json;
use thiserror::Error;

use crate::arith::{rat, rat_display, Int, Rat};
use crate::knots::{alexander, KnotDescriptor, KnotError};
use crate::lattice::{linalg, IntersectionLattice, LatticeError, LatticeVector};
use crate::manifold::{HomeoType, ManifoldError, ManifoldModel, MarkedTorus, Provenance, SwStatus};
use crate::swring::{render_class, SwError, SwPolynomial};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SurgeryError {
    #[error("unknown seed {0:?}")]
    UnknownSeed(String),
    #[error("no marked torus named {0:?}")]
    UnknownTorus(String),
    #[error("torus {0:?} is not asserted to lie in a node neighborhood")]
    NotInNodeNeighborhood(String),
    #[error("multiplicity must be at least 1")]
    InvalidMultiplicity,
    #[error("plumbing configuration rejected: {0}")]
    BadPlumbing(String),
    #[error("orthogonal complement of the plumbing is degenerate")]
    DegenerateComplement,
    #[error("fiber class has square {0}, expected 0")]
    NotSquareZero(String),
    #[error("no diagonal entry can be shifted to make the form odd")]
    ParityFlipUnavailable,
    #[error("requested type t = {t} is incompatible with e = {e}, sigma = {sigma}")]
    ImpossibleType { e: i64, sigma: i64, t: u8 },
    #[error(transparent)]
    Knot(#[from] KnotError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Sw(#[from] SwError),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
}

type Result<T> = std::result::Result<T, SurgeryError>;

fn fresh_label(lattice: &IntersectionLattice, prefix: &str) -> String {
    (1..)
        .map(|i| format!("{prefix}{i}"))
        .find(|l| lattice.index_of(l).is_none())
        .expect("unbounded label supply")
}

fn sign_of_chi(h: &HomeoType) -> Option<i8> {
    h.chi_h_int().map(|c| if c.rem_euclid(2) == 0 { 1 } else { -1 })
}

// ---------------------------------------------------------------- seeds

/// A recognized seed name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeedName {
    Elliptic(u32),
    BlownUpCp2(usize),
    S2xS2,
}

impl SeedName {
    /// Accepts `E(n)` (n ≥ 1), `CP2`, `CP2#mCP2bar`, `CP2#CP2bar`, `S2xS2`.
    pub fn parse(name: &str) -> Option<SeedName> {
        let compact: String = name.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(n) = compact.strip_prefix("E(").and_then(|r| r.strip_suffix(')')) {
            return n.parse().ok().filter(|&n| n >= 1).map(SeedName::Elliptic);
        }
        match compact.as_str() {
            "CP2" => return Some(SeedName::BlownUpCp2(0)),
            "S2xS2" => return Some(SeedName::S2xS2),
            _ => {}
        }
        let m = compact.strip_prefix("CP2#")?.strip_suffix("CP2bar")?;
        if m.is_empty() {
            Some(SeedName::BlownUpCp2(1))
        } else {
            m.parse().ok().map(SeedName::BlownUpCp2)
        }
    }
}

pub fn seed(name: &str) -> Result<ManifoldModel> {
    match SeedName::parse(name).ok_or_else(|| SurgeryError::UnknownSeed(name.into()))? {
        SeedName::Elliptic(n) => elliptic(n),
        SeedName::BlownUpCp2(m) => blown_up_cp2(m),
        SeedName::S2xS2 => s2xs2(),
    }
}

fn seed_provenance(name: &str, notes: Vec<String>) -> Provenance {
    Provenance::new("seed", json!({ "name": name }), Vec::new()).with_notes(notes)
}

/// The elliptic surface `E(n)` with `SW = (t_F − t_F⁻¹)^{n−2}`.
pub fn elliptic(n: u32) -> Result<ManifoldModel> {
    let ni = n as i64;
    let mut lat = IntersectionLattice::from_rows(&["F", "S"], &[vec![0, 1], vec![1, -ni]])?;
    for i in 1..=(2 * n - 2) {
        lat = lat.direct_sum(&IntersectionLattice::hyperbolic(&format!("H{i}")))?;
    }
    for j in 1..=n {
        lat = lat.direct_sum(&IntersectionLattice::neg_e8(&format!("Q{j}")))?;
    }
    let lat = Arc::new(lat);
    let fiber = lat.vector("F")?;
    let name = format!("E({n})");
    let mut notes = vec![format!("basis <F,S> + {}H + {}(-E8), S^2 = -{n}", 2 * n - 2, n)];
    let sw = if n == 1 {
        notes.push("b+ = 1 and b- = 9: SW is chamber-dependent and left undefined for comparison".into());
        SwStatus::Undefined
    } else {
        let t = SwPolynomial::t(lat.clone(), fiber.clone())?;
        let t_inv = SwPolynomial::t(lat.clone(), -&fiber)?;
        SwStatus::Known(t.add(&t_inv.neg())?.pow(n - 2))
    };
    let homeo = HomeoType::new(12 * ni, -8 * ni, (n % 2) as u8);
    let m = ManifoldModel::new(name.clone(), homeo, lat, sw, seed_provenance(&name, notes))?;
    Ok(m.with_torus("fiber", MarkedTorus::new(fiber, true, true)))
}

/// `CP² # m CP̄²`; SW is 0 in the small-`b⁻` chamber for `m ≤ 9`.
pub fn blown_up_cp2(m: usize) -> Result<ManifoldModel> {
    let mut lat = IntersectionLattice::from_rows(&["h"], &[vec![1]])?;
    if m > 0 {
        lat = lat.direct_sum(&IntersectionLattice::diagonal("e", 1, &vec![-1; m]))?;
    }
    let lat = Arc::new(lat);
    let name = if m == 0 { "CP2".to_string() } else { format!("CP2#{m}CP2bar") };
    let (sw, note) = if m <= 9 {
        (SwStatus::Known(SwPolynomial::zero(lat.clone())), "b+ = 1, b- <= 9: SW taken in the small-perturbation chamber, identically 0")
    } else {
        (SwStatus::Unknown, "b+ = 1, b- > 9: SW depends on the chamber")
    };
    let homeo = HomeoType::new(3 + m as i64, 1 - m as i64, 1);
    Ok(ManifoldModel::new(name.clone(), homeo, lat, sw, seed_provenance(&name, vec![note.into()]))?)
}

pub fn s2xs2() -> Result<ManifoldModel> {
    let lat = Arc::new(IntersectionLattice::hyperbolic("H"));
    let sw = SwStatus::Known(SwPolynomial::zero(lat.clone()));
    let homeo = HomeoType::new(4, 0, 0);
    Ok(ManifoldModel::new(
        "S2xS2",
        homeo,
        lat,
        sw,
        seed_provenance("S2xS2", vec!["b+ = 1: SW taken in the small-perturbation chamber, identically 0".into()]),
    )?)
}

/// `n` if the model is a seed `E(n)` or a registered fiber sum producing one.
pub fn elliptic_index(m: &ManifoldModel) -> Option<u32> {
    let label = match m.provenance.op.as_str() {
        "seed" => m.provenance.params.get("name")?.as_str()?,
        "fiber_sum" => m.provenance.params.get("registered")?.as_str()?,
        _ => return None,
    };
    label.strip_prefix("E(")?.strip_suffix(')')?.parse().ok()
}

// ---------------------------------------------------------------- blowup

pub fn blowup(x: &ManifoldModel) -> Result<ManifoldModel> {
    let label = fresh_label(&x.lattice, "E");
    let lat = Arc::new(x.lattice.direct_sum(&IntersectionLattice::from_rows(&[label.as_str()], &[vec![-1]])?)?);
    let n = lat.rank();
    let e = LatticeVector::unit(n, n - 1);
    let sw = match &x.sw {
        SwStatus::Known(p) => {
            let moved = p.reembed(lat.clone(), |v| v.extended(1))?;
            let factor = SwPolynomial::t(lat.clone(), e.clone())?.add(&SwPolynomial::t(lat.clone(), -&e)?)?;
            SwStatus::Known(moved.multiply(&factor)?)
        }
        other => other.clone(),
    };
    let h = x.homeo;
    let homeo = HomeoType::new(h.e + 1, h.sigma - 1, 1);
    let prov = Provenance::new("blowup", json!({ "exceptional": label }), vec![x.provenance.clone()]);
    let mut out = ManifoldModel::new(format!("{}#CP2bar", x.name), homeo, lat, sw, prov)?;
    for (name, t) in &x.tori {
        out.tori.insert(name.clone(), MarkedTorus { cls: t.cls.extended(1), ..t.clone() });
    }
    out.irreducible = Some(false);
    Ok(out)
}

// ---------------------------------------------------------------- log transform

fn marked<'a>(x: &'a ManifoldModel, torus: &str) -> Result<&'a MarkedTorus> {
    let t = x.torus(torus).ok_or_else(|| SurgeryError::UnknownTorus(torus.into()))?;
    if !t.node_neighborhood {
        return Err(SurgeryError::NotInNodeNeighborhood(torus.into()));
    }
    Ok(t)
}

/// Shifts one even diagonal entry outside the torus support by ±1 so the
/// form becomes odd while `|det|` and the signature are unchanged.
fn flip_parity(lattice: &IntersectionLattice, torus: &LatticeVector) -> Result<(IntersectionLattice, String)> {
    let det = lattice.determinant().abs();
    let sig = lattice.signature()?;
    for i in 0..lattice.rank() {
        if !torus.coords()[i].is_zero() || !crate::arith::is_even(lattice.entry(i, i)) {
            continue;
        }
        for delta in [1, -1] {
            let cand = lattice.with_diagonal_shift(i, delta);
            if cand.determinant().abs() == det && cand.signature().ok() == Some(sig) && cand.parity() == 1 {
                let note = format!("diagonal entry {} shifted by {delta:+}", lattice.labels()[i]);
                return Ok((cand, note));
            }
        }
    }
    Err(SurgeryError::ParityFlipUnavailable)
}

/// Multiplicity-`p` logarithmic transform on a marked torus.
pub fn log_transform(x: &ManifoldModel, torus: &str, p: u32) -> Result<ManifoldModel> {
    if p == 0 {
        return Err(SurgeryError::InvalidMultiplicity);
    }
    let t = marked(x, torus)?;
    let h = x.homeo;
    let mut notes = Vec::new();
    let mut lat = x.lattice.clone();
    let mut new_t = h.t;
    if !t.simply_connected_complement {
        notes.push("complement of the torus not asserted simply connected: type t indeterminate, kept as before".into());
    } else if h.t == 0 && p.is_multiple_of(2) {
        let (flipped, note) = flip_parity(&x.lattice, &t.cls)?;
        notes.push(format!("even multiplicity on a spin manifold makes the form odd; {note}"));
        lat = Arc::new(flipped);
        new_t = 1;
    }
    let sw = match &x.sw {
        SwStatus::Known(poly) => {
            let moved = if Arc::ptr_eq(&lat, &x.lattice) { poly.clone() } else { poly.reembed(lat.clone(), |v| v.clone())? };
            let mult = SwPolynomial::log_transform_multiplier(lat.clone(), &t.cls, p)?;
            SwStatus::Known(moved.multiply(&mult)?)
        }
        other => other.clone(),
    };
    let homeo = HomeoType::new(h.e, h.sigma, new_t);
    let prov = Provenance::new(
        "log_transform",
        json!({ "torus": torus, "p": p, "simply_connected_complement": t.simply_connected_complement }),
        vec![x.provenance.clone()],
    )
    .with_notes(notes);
    let mut out = ManifoldModel::new(format!("{}_p{p}", x.name), homeo, lat, sw, prov)?;
    out.tori = x.tori.clone();
    Ok(out)
}

// ---------------------------------------------------------------- knot surgery

/// Knot surgery on a marked torus: `SW · Δ_K(t_{2T})`.
pub fn knot_surgery(x: &ManifoldModel, torus: &str, knot: &KnotDescriptor) -> Result<ManifoldModel> {
    let t = marked(x, torus)?;
    let delta = alexander(knot)?;
    let mut notes = Vec::new();
    if !t.simply_connected_complement {
        notes.push("complement of the torus not asserted simply connected: homeomorphism to the input not guaranteed".into());
    }
    let chi_above_one = x.homeo.chi_h_int().is_some_and(|c| c > 1);
    let sw = match &x.sw {
        SwStatus::Known(poly) if chi_above_one => {
            let factor = SwPolynomial::from_terms(
                x.lattice.clone(),
                Int::one(),
                delta.t_terms().map(|(j, c)| (t.cls.scale(&rat(2 * j)), c.clone())),
            )?;
            SwStatus::Known(poly.multiply(&factor)?)
        }
        SwStatus::Known(_) => {
            notes.push("chi_h <= 1: no product formula applies, SW left unknown".into());
            SwStatus::Unknown
        }
        other => other.clone(),
    };
    let prov = Provenance::new("knot_surgery", json!({ "torus": torus, "knot": knot.to_json() }), vec![x.provenance.clone()])
        .with_notes(notes);
    let mut out = ManifoldModel::new(format!("{}_{}", x.name, knot.name()), x.homeo, x.lattice.clone(), sw, prov)?;
    out.tori = x.tori.clone();
    Ok(out)
}

// ---------------------------------------------------------------- rational blowdown

/// The classes `u₀, …, u_{p−2}` of the plumbing `C_p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlumbingConfig {
    pub p: u32,
    pub classes: Vec<LatticeVector>,
}

impl PlumbingConfig {
    pub fn new(p: u32, classes: Vec<LatticeVector>) -> Self {
        PlumbingConfig { p, classes }
    }

    pub fn from_labels<S: AsRef<str>>(lattice: &IntersectionLattice, p: u32, labels: &[S]) -> Result<Self> {
        let classes = labels.iter().map(|l| lattice.vector(l.as_ref())).collect::<std::result::Result<_, _>>()?;
        Ok(PlumbingConfig { p, classes })
    }

    /// Checks the Gram matrix of the classes against the `C_p` chain.
    pub fn check(&self, lattice: &IntersectionLattice) -> Result<()> {
        let p = self.p as i64;
        if p < 2 {
            return Err(SurgeryError::BadPlumbing(format!("p = {p} < 2")));
        }
        if self.classes.len() as i64 != p - 1 {
            return Err(SurgeryError::BadPlumbing(format!("expected {} classes, got {}", p - 1, self.classes.len())));
        }
        for (i, u) in self.classes.iter().enumerate() {
            if u.dim() != lattice.rank() || !u.is_integral() {
                return Err(SurgeryError::BadPlumbing(format!("u{i} is not an integral class of the lattice")));
            }
        }
        for (i, a) in self.classes.iter().enumerate() {
            for (j, b) in self.classes.iter().enumerate() {
                let want = match (i, j) {
                    (0, 0) => -(p + 2),
                    _ if i == j => -2,
                    _ if i.abs_diff(j) == 1 => 1,
                    _ => 0,
                };
                let got = lattice.pair(a, b);
                if got != rat(want) {
                    return Err(SurgeryError::BadPlumbing(format!(
                        "u{i}.u{j} = {}, expected {want}",
                        rat_display(&got)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Replaces the plumbing `C_p` by a rational ball.
///
/// The lattice becomes the orthogonal complement of the `u_i`, so
/// `Δe = −(p−1)`, `Δσ = +(p−1)` and `Δc = +(p−1)`. Basic classes are moved
/// by orthogonal projection and kept only when the projection is integral,
/// characteristic and has the same formal dimension.
pub fn rational_blowdown(x: &ManifoldModel, cfg: &PlumbingConfig) -> Result<ManifoldModel> {
    cfg.check(&x.lattice)?;
    let complement = x.lattice.orthogonal_complement(&cfg.classes).map_err(|e| match e {
        LatticeError::DependentVectors => SurgeryError::BadPlumbing("classes are dependent".into()),
        other => other.into(),
    })?;
    if complement.lattice.is_degenerate() {
        return Err(SurgeryError::DegenerateComplement);
    }
    let lat = Arc::new(complement.lattice.clone());
    let pm1 = cfg.p as i64 - 1;
    let h = x.homeo;
    let homeo = HomeoType::new(h.e - pm1, h.sigma + pm1, lat.parity());
    let mut notes = vec![format!(
        "c changes by +{pm1} (from e -{pm1}, sigma +{pm1}); the alternative rule with c decreasing by p-3 is not applied"
    )];

    let gu: Vec<Vec<Rat>> = cfg
        .classes
        .iter()
        .map(|a| cfg.classes.iter().map(|b| x.lattice.pair(a, b)).collect())
        .collect();
    let project = |beta: &LatticeVector| -> Option<LatticeVector> {
        let rhs: Vec<Rat> = cfg.classes.iter().map(|u| x.lattice.pair(beta, u)).collect();
        let cols: Vec<Vec<Rat>> = (0..gu.len()).map(|j| gu.iter().map(|r| r[j].clone()).collect()).collect();
        let c = linalg::solve_in_span(&cols, &rhs)?;
        let mut hat = beta.clone();
        for (ci, u) in c.iter().zip(&cfg.classes) {
            hat = &hat - &u.scale(ci);
        }
        complement.coordinates_of(&hat)
    };

    let c_old = rat(h.c());
    let c_new = rat(homeo.c());
    let b_plus_gt_one = h.b_plus() > 1;
    let sw = match &x.sw {
        SwStatus::Known(_) if !b_plus_gt_one => {
            notes.push("b+ = 1: SW transport needs a chamber argument, left unknown".into());
            SwStatus::Unknown
        }
        SwStatus::Known(poly) => {
            let mut kept = Vec::new();
            for (beta, coef) in poly.terms() {
                let shown = render_class(&x.lattice, beta);
                if !beta.is_integral() {
                    notes.push(format!("dropped {shown}: fractional class"));
                    continue;
                }
                let Some(hat) = project(beta) else {
                    notes.push(format!("dropped {shown}: projection outside the complement"));
                    continue;
                };
                if !hat.is_integral() {
                    notes.push(format!("dropped {shown}: projection {hat} is not integral"));
                    continue;
                }
                if !lat.is_characteristic(&hat)? {
                    notes.push(format!("dropped {shown}: projection is not characteristic"));
                    continue;
                }
                let d_old = (x.lattice.square(beta) - &c_old) / rat(4);
                let d_new = (lat.square(&hat) - &c_new) / rat(4);
                if d_old != d_new {
                    notes.push(format!(
                        "dropped {shown}: formal dimension {} becomes {}",
                        rat_display(&d_old),
                        rat_display(&d_new)
                    ));
                    continue;
                }
                kept.push((hat, coef.clone()));
            }
            SwStatus::Known(SwPolynomial::from_terms(lat.clone(), Int::one(), kept)?)
        }
        other => other.clone(),
    };
    let prov = Provenance::new(
        "rational_blowdown",
        json!({
            "p": cfg.p,
            "classes": cfg.classes.iter().map(|u| render_class(&x.lattice, u)).collect::<Vec<_>>(),
        }),
        vec![x.provenance.clone()],
    )
    .with_notes(notes);
    let mut out = ManifoldModel::new(format!("{}_({})", x.name, cfg.p), homeo, lat, sw, prov)?;
    for (name, t) in &x.tori {
        if cfg.classes.iter().all(|u| x.lattice.pair(&t.cls, u).is_zero()) {
            if let Some(c) = complement.coordinates_of(&t.cls).filter(|c| c.is_integral()) {
                out.tori.insert(name.clone(), MarkedTorus { cls: c, ..t.clone() });
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- fiber sum

#[derive(Clone, Debug, Default)]
pub struct FiberSumOptions {
    /// Forces the type of the result.
    pub t: Option<u8>,
    /// Caller asserts the gluing preserves a spin structure.
    pub spin_preserving: bool,
}

/// A lattice with the given `(b⁺, b⁻)` and parity: diagonal when odd,
/// hyperbolic planes plus `E8` blocks when even.
pub fn bookkeeping_lattice(e: i64, sigma: i64, t: u8) -> Result<IntersectionLattice> {
    let b2 = e - 2;
    if b2 < 0 || sigma.abs() > b2 || (b2 - sigma).rem_euclid(2) != 0 {
        return Err(SurgeryError::ImpossibleType { e, sigma, t });
    }
    let b_plus = (b2 + sigma) / 2;
    let b_minus = (b2 - sigma) / 2;
    if t == 1 {
        if b2 == 0 {
            return Err(SurgeryError::ImpossibleType { e, sigma, t });
        }
        let mut lat = IntersectionLattice::empty();
        if b_plus > 0 {
            lat = lat.direct_sum(&IntersectionLattice::diagonal("p", 1, &vec![1; b_plus as usize]))?;
        }
        if b_minus > 0 {
            lat = lat.direct_sum(&IntersectionLattice::diagonal("n", 1, &vec![-1; b_minus as usize]))?;
        }
        return Ok(lat);
    }
    if sigma.rem_euclid(8) != 0 {
        return Err(SurgeryError::ImpossibleType { e, sigma, t });
    }
    let blocks = sigma.abs() / 8;
    let planes = (b2 - 8 * blocks) / 2;
    let mut lat = IntersectionLattice::empty();
    for i in 1..=planes {
        lat = lat.direct_sum(&IntersectionLattice::hyperbolic(&format!("H{i}")))?;
    }
    for j in 1..=blocks {
        let e8 = IntersectionLattice::neg_e8(&format!("Q{j}"));
        lat = lat.direct_sum(&if sigma > 0 { e8.negated() } else { e8 })?;
    }
    Ok(lat)
}

fn class_of(x: &ManifoldModel, name: &str) -> Result<LatticeVector> {
    if let Some(t) = x.torus(name) {
        return Ok(t.cls.clone());
    }
    Ok(x.lattice.vector(name)?)
}

/// Generalized fiber sum along genus-`g` surfaces `F₁ ⊂ X₁`, `F₂ ⊂ X₂`,
/// named by marked torus or basis label.
pub fn fiber_sum(
    x1: &ManifoldModel,
    f1: &str,
    x2: &ManifoldModel,
    f2: &str,
    g: u32,
    opts: &FiberSumOptions,
) -> Result<ManifoldModel> {
    let c1 = class_of(x1, f1)?;
    let c2 = class_of(x2, f2)?;
    for (x, c) in [(x1, &c1), (x2, &c2)] {
        let sq = x.lattice.square(c);
        if !sq.is_zero() {
            return Err(SurgeryError::NotSquareZero(rat_display(&sq)));
        }
    }
    let parents = vec![x1.provenance.clone(), x2.provenance.clone()];
    let mut params = json!({ "genus": g, "classes": [f1, f2] });
    let registered = match (elliptic_index(x1), elliptic_index(x2)) {
        (Some(m), Some(n))
            if g == 1
                && opts.t.is_none()
                && x1.torus("fiber").map(|t| &t.cls) == Some(&c1)
                && x2.torus("fiber").map(|t| &t.cls) == Some(&c2) =>
        {
            Some(m + n)
        }
        _ => None,
    };
    if let Some(k) = registered {
        let base = elliptic(k)?;
        params["registered"] = json!(format!("E({k})"));
        let prov = Provenance::new("fiber_sum", params, parents)
            .with_notes(vec![format!("registered rule: fiber sum of elliptic fibrations gives E({k}); SW from the seed library")]);
        let mut out = ManifoldModel::new(
            format!("{}#f{}", x1.name, x2.name),
            base.homeo,
            base.lattice.clone(),
            base.sw.clone(),
            prov,
        )?;
        out.tori = base.tori.clone();
        return Ok(out);
    }
    let gi = g as i64;
    let e = x1.homeo.e + x2.homeo.e + 4 * gi - 4;
    let sigma = x1.homeo.sigma + x2.homeo.sigma;
    let both_spin = x1.homeo.t == 0 && x2.homeo.t == 0;
    let t = opts.t.unwrap_or(if both_spin && opts.spin_preserving { 0 } else { 1 });
    let lat = Arc::new(bookkeeping_lattice(e, sigma, t)?);
    params["t"] = json!(t);
    let prov = Provenance::new("fiber_sum", params, parents).with_notes(vec![
        "bookkeeping lattice realizes (e, sigma, t) only; no closed-form SW rule registered, SW unknown".into(),
    ]);
    Ok(ManifoldModel::new(
        format!("{}#f{}", x1.name, x2.name),
        HomeoType::new(e, sigma, t),
        lat,
        SwStatus::Unknown,
        prov,
    )?)
}

/// Coefficient sum of the SW polynomial, used by the multiplicity checks.
pub fn sw_coefficient_sum(m: &ManifoldModel) -> Option<Int> {
    m.sw.known().map(|p| p.coefficient_sum())
}

/// The sign `(−1)^{χ_h}` expected by the symmetry law, when defined.
pub fn symmetry_sign(m: &ManifoldModel) -> Option<i8> {
    sign_of_chi(&m.homeo)
}
