//! The `(χ_h, c)` plane: region classification, the basic-class count
//! bound, recipe search over the surgery operations, and charts.
//!
//! Region boundaries overlap; a point on two regions takes the label of the
//! region with smaller `c`, except that `c = 9χ_h` is always `OnNineLine`.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::fmt::Write as _;

use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::arith::{int, is_integral, rat, rat_display, Rat};
use crate::manifold::ManifoldModel;
use crate::script::{Operation, Script, Step};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeographyError {
    #[error("SW invariant is not known for this model")]
    UnknownSw,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeographyPoint {
    pub chi_h: Rat,
    pub c: i64,
    pub spin_constrained: bool,
}

impl GeographyPoint {
    pub fn new(chi_h: i64, c: i64) -> Self {
        GeographyPoint { chi_h: rat(chi_h), c, spin_constrained: false }
    }

    pub fn of(m: &ManifoldModel) -> Self {
        GeographyPoint { chi_h: m.chi_h(), c: m.c(), spin_constrained: m.homeo.t == 0 }
    }

    pub fn chi_int(&self) -> Option<i64> {
        is_integral(&self.chi_h).then(|| self.chi_h.numer().to_i64()).flatten()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Region {
    #[serde(rename = "NegativeC_Unknown")]
    NegativeCUnknown,
    ManyBasicClasses,
    OneBasicClass,
    GeneralType,
    #[serde(rename = "AboveNine_Unknown")]
    AboveNineUnknown,
    OnNineLine,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::NegativeCUnknown => "NegativeC_Unknown",
            Region::ManyBasicClasses => "ManyBasicClasses",
            Region::OneBasicClass => "OneBasicClass",
            Region::GeneralType => "GeneralType",
            Region::AboveNineUnknown => "AboveNine_Unknown",
            Region::OnNineLine => "OnNineLine",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RegionLabel {
    pub region: Region,
    /// Whether `c ≡ 8χ_h (mod 16)`, the congruence forced by a spin structure.
    pub spin_admissible: bool,
}

/// `c ≡ 8χ_h (mod 16)`; false for non-integral `χ_h`.
pub fn spin_congruence(chi_h: &Rat, c: i64) -> bool {
    is_integral(chi_h)
        && ((int(c) - chi_h.numer() * int(8)) % int(16)).is_zero()
}

pub fn classify_point(p: &GeographyPoint) -> RegionLabel {
    let c = rat(p.c);
    let chi = &p.chi_h;
    let region = if p.c < 0 {
        Region::NegativeCUnknown
    } else if c > chi * rat(9) {
        Region::AboveNineUnknown
    } else if c == chi * rat(9) {
        Region::OnNineLine
    } else if c <= chi - rat(3) {
        Region::ManyBasicClasses
    } else if c <= chi * rat(2) - rat(6) {
        Region::OneBasicClass
    } else {
        Region::GeneralType
    };
    RegionLabel { region, spin_admissible: spin_congruence(chi, p.c) }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result")]
pub enum BoundCheck {
    Pass { count: usize, bound: i64 },
    Fail { count: usize, bound: i64 },
    NotApplicable,
}

/// In the strip `0 ≤ c ≤ χ_h − 3`, checks that there are at least
/// `χ_h − c − 2` basic classes.
pub fn verify_basic_class_bound(m: &ManifoldModel) -> Result<BoundCheck, GeographyError> {
    let p = m.sw.known().ok_or(GeographyError::UnknownSw)?;
    let Some(chi) = m.homeo.chi_h_int() else {
        return Ok(BoundCheck::NotApplicable);
    };
    let c = m.c();
    if c < 0 || c > chi - 3 {
        return Ok(BoundCheck::NotApplicable);
    }
    let bound = chi - c - 2;
    let count = p.term_count();
    Ok(if count as i64 >= bound { BoundCheck::Pass { count, bound } } else { BoundCheck::Fail { count, bound } })
}

/// Genus of the fibration on `E(n)_K` for a fibered knot of genus `g`.
pub fn fibration_genus(n: i64, knot_genus: i64) -> i64 {
    2 * knot_genus + n - 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Plan {
    Seed(i64),
    Blowup,
    FiberSum(i64),
}

/// Abstract search state: the point plus whether it is still a bare
/// elliptic surface (fiber sums need the fiber).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct State {
    chi: i64,
    c: i64,
    elliptic: bool,
}

/// Breadth-first search for the shortest plan reaching `(chi, c)` using
/// elliptic seeds, blowups and genus-1 fiber sums of elliptic surfaces.
/// Knot surgery and log transforms do not move the point and are not
/// explored.
fn plan(chi: i64, c: i64, budget: usize) -> Option<Vec<Plan>> {
    if chi < 1 || c > 0 {
        return None;
    }
    let mut parent: HashMap<State, (Option<State>, Plan)> = HashMap::new();
    let mut queue = VecDeque::new();
    for n in 1..=chi {
        let s = State { chi: n, c: 0, elliptic: true };
        parent.insert(s, (None, Plan::Seed(n)));
        queue.push_back((s, 1usize));
    }
    while let Some((s, depth)) = queue.pop_front() {
        if s.chi == chi && s.c == c {
            let mut out = Vec::new();
            let mut cur = Some(s);
            while let Some(st) = cur {
                let (prev, step) = parent[&st];
                out.push(step);
                cur = prev;
            }
            out.reverse();
            return Some(out);
        }
        if depth >= budget {
            continue;
        }
        let mut next = Vec::new();
        if s.c > c {
            next.push((State { chi: s.chi, c: s.c - 1, elliptic: false }, Plan::Blowup));
        }
        if s.elliptic {
            for k in 1..=(chi - s.chi) {
                next.push((State { chi: s.chi + k, c: 0, elliptic: true }, Plan::FiberSum(k)));
            }
        }
        for (n, step) in next {
            if let std::collections::hash_map::Entry::Vacant(v) = parent.entry(n) {
                v.insert((Some(s), step));
                queue.push_back((n, depth + 1));
            }
        }
    }
    None
}

fn plan_to_script(plan: &[Plan]) -> Script {
    let mut steps = Vec::new();
    let mut current = String::new();
    for (i, p) in plan.iter().enumerate() {
        let bind = format!("m{i}");
        match *p {
            Plan::Seed(n) => {
                steps.push(Step::new(Operation::Seed { name: format!("E({n})") }, &bind));
            }
            Plan::Blowup => {
                steps.push(Step::new(Operation::Blowup { on: current.clone() }, &bind));
            }
            Plan::FiberSum(k) => {
                let other = format!("s{i}");
                steps.push(Step::new(Operation::Seed { name: format!("E({k})") }, &other));
                steps.push(Step::new(
                    Operation::FiberSum {
                        x1: current.clone(),
                        f1: "fiber".into(),
                        x2: other,
                        f2: "fiber".into(),
                        g: 1,
                        t: None,
                        spin_preserving: false,
                    },
                    &bind,
                ));
            }
        }
        current = bind;
    }
    Script { steps, compare: Vec::new() }
}

fn plan_ref(plan: &[Plan]) -> String {
    let mut parts = Vec::new();
    let mut blowups = 0;
    for p in plan {
        match p {
            Plan::Seed(n) => parts.push(format!("E({n})")),
            Plan::FiberSum(k) => parts.push(format!("#fE({k})")),
            Plan::Blowup => blowups += 1,
        }
    }
    let mut s = parts.concat();
    if blowups > 0 {
        let _ = write!(s, "+{blowups}bu");
    }
    s
}

/// Default number of search steps for [`realize`].
pub const DEFAULT_BUDGET: usize = 64;

/// The search budget for [`realize`], overridable through
/// `M4CALC_SEARCH_RADIUS`.
pub fn default_budget() -> usize {
    std::env::var("M4CALC_SEARCH_RADIUS")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

#[derive(Clone, Debug)]
pub enum Realization {
    Found { script: Script, model: Box<ManifoldModel> },
    NotFound,
}

/// Searches for a construction reaching the target point and runs it.
pub fn realize(target: &GeographyPoint, budget: usize) -> Realization {
    let Some(chi) = target.chi_int() else {
        return Realization::NotFound;
    };
    let Some(p) = plan(chi, target.c, budget) else {
        return Realization::NotFound;
    };
    let script = plan_to_script(&p);
    match crate::script::run(&script) {
        Ok(run) => match run.models.last() {
            Some((_, m)) => Realization::Found { script, model: Box::new(m.clone()) },
            None => Realization::NotFound,
        },
        Err(_) => Realization::NotFound,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChartFormat {
    Tsv,
    Svg,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChartRow {
    pub chi_h: i64,
    pub c: i64,
    pub region: Region,
    pub spin_admissible: bool,
    /// `realized`, `reducible` (the recipe needs a blowup) or `-`.
    pub realized: String,
    pub script_ref: String,
    pub fibration_genus: String,
}

/// Lowest `c` listed per column of the chart.
pub const CHART_MIN_C: i64 = -3;

pub fn chart_rows(chi_max: i64, spin: bool) -> Vec<ChartRow> {
    let mut rows = Vec::new();
    for chi in 1..=chi_max {
        for c in CHART_MIN_C..=9 * chi + 1 {
            let label = classify_point(&GeographyPoint { chi_h: rat(chi), c, spin_constrained: spin });
            if spin && !label.spin_admissible {
                continue;
            }
            let plan = plan(chi, c, DEFAULT_BUDGET);
            let (realized, script_ref) = match &plan {
                Some(p) if p.contains(&Plan::Blowup) => ("reducible".to_string(), plan_ref(p)),
                Some(p) => ("realized".to_string(), plan_ref(p)),
                None => ("-".to_string(), "-".to_string()),
            };
            let fibration_genus = if c == 0 && plan.is_some() {
                format!("2g+{}", fibration_genus(chi, 0))
            } else {
                "-".into()
            };
            rows.push(ChartRow {
                chi_h: chi,
                c,
                region: label.region,
                spin_admissible: label.spin_admissible,
                realized,
                script_ref,
                fibration_genus,
            });
        }
    }
    rows
}

pub const TSV_HEADER: &str = "chi_h\tc\tregion\tspin_admissible\trealized\tscript_ref\tfibration_genus";

pub fn chart(chi_max: i64, format: ChartFormat, spin: bool) -> String {
    match format {
        ChartFormat::Tsv => chart_tsv(chi_max, spin),
        ChartFormat::Svg => chart_svg(chi_max, spin),
    }
}

fn chart_tsv(chi_max: i64, spin: bool) -> String {
    let mut out = String::from(TSV_HEADER);
    out.push('\n');
    for r in chart_rows(chi_max, spin) {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.chi_h, r.c, r.region, r.spin_admissible, r.realized, r.script_ref, r.fibration_genus
        );
    }
    out
}

struct Frame {
    chi_max: f64,
    c_min: f64,
    c_max: f64,
}

impl Frame {
    const W: f64 = 720.0;
    const H: f64 = 540.0;
    const PAD: f64 = 60.0;

    fn x(&self, chi: f64) -> f64 {
        Self::PAD + chi / self.chi_max * (Self::W - 2.0 * Self::PAD)
    }

    fn y(&self, c: f64) -> f64 {
        Self::H - Self::PAD - (c - self.c_min) / (self.c_max - self.c_min) * (Self::H - 2.0 * Self::PAD)
    }

    fn poly(&self, pts: &[(f64, f64)]) -> String {
        pts.iter().map(|&(a, b)| format!("{:.1},{:.1}", self.x(a), self.y(b))).collect::<Vec<_>>().join(" ")
    }
}

fn chart_svg(chi_max: i64, spin: bool) -> String {
    let n = chi_max.max(1) as f64;
    let f = Frame { chi_max: n + 0.5, c_min: CHART_MIN_C as f64 - 1.0, c_max: 9.0 * n + 4.0 };
    let top = f.c_max;
    let xe = f.chi_max;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="11">"#,
        Frame::W,
        Frame::H,
        Frame::W,
        Frame::H
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let clip = |v: f64| v.max(0.0);
    let regions: [(&str, &str, Vec<(f64, f64)>); 5] = [
        ("NegativeC_Unknown", "#eeeeee", vec![(0.0, f.c_min), (xe, f.c_min), (xe, 0.0), (0.0, 0.0)]),
        ("ManyBasicClasses", "#cfe8cf", vec![(3.0, 0.0), (xe, 0.0), (xe, clip(xe - 3.0))]),
        ("OneBasicClass", "#cfdcf0", vec![(3.0, 0.0), (xe, clip(xe - 3.0)), (xe, 2.0 * xe - 6.0), (3.0, 0.0)]),
        (
            "GeneralType",
            "#f3e3c3",
            vec![(0.0, 0.0), (3.0, 0.0), (xe, 2.0 * xe - 6.0), (xe, (9.0 * xe).min(top)), (top / 9.0, top)],
        ),
        ("AboveNine_Unknown", "#eeeeee", vec![(0.0, 0.0), (top / 9.0, top), (0.0, top)]),
    ];
    for (name, color, pts) in &regions {
        let _ = writeln!(
            s,
            r#"<polygon class="region" data-region="{name}" points="{}" fill="{color}" stroke="none"/>"#,
            f.poly(pts)
        );
    }
    let _ = writeln!(
        s,
        r##"<line class="axis" x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#000"/>"##,
        f.x(0.0),
        f.y(0.0),
        f.x(xe),
        f.y(0.0)
    );
    let _ = writeln!(
        s,
        r##"<line class="axis" x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#000"/>"##,
        f.x(0.0),
        f.y(f.c_min),
        f.x(0.0),
        f.y(top)
    );
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">chi_h</text>"#, f.x(xe) - 30.0, f.y(0.0) + 16.0);
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">c</text>"#, f.x(0.0) - 14.0, f.y(top) + 4.0);
    let lines: [(&str, f64, f64); 4] =
        [("c = 9chi_h", 9.0, 0.0), ("c = 8chi_h", 8.0, 0.0), ("c = 2chi_h - 6", 2.0, -6.0), ("c = chi_h - 3", 1.0, -3.0)];
    for (label, slope, icpt) in lines {
        let x0 = if icpt < 0.0 { -icpt / slope } else { 0.0 };
        let x1 = ((top - icpt) / slope).min(xe);
        let (y0, y1) = (slope * x0 + icpt, slope * x1 + icpt);
        let _ = writeln!(
            s,
            r##"<line class="boundary" data-label="{label}" x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#333" stroke-dasharray="4 2"/>"##,
            f.x(x0),
            f.y(y0),
            f.x(x1),
            f.y(y1)
        );
        let _ = writeln!(s, r#"<text class="boundary-label" x="{:.1}" y="{:.1}">{label}</text>"#, f.x(x1) - 70.0, f.y(y1) - 4.0);
    }
    for chi in 1..=chi_max {
        if spin && !spin_congruence(&rat(chi), 0) {
            continue;
        }
        let _ = writeln!(
            s,
            r##"<circle class="elliptic" data-chi="{chi}" cx="{:.1}" cy="{:.1}" r="3" fill="#b00"/>"##,
            f.x(chi as f64),
            f.y(0.0)
        );
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">E({chi})</text>"#, f.x(chi as f64) - 8.0, f.y(0.0) + 14.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}">boundary points take the region of smaller c; c = 9chi_h is OnNineLine{}</text>"#,
        Frame::PAD,
        Frame::H - 12.0,
        if spin { "; spin points only" } else { "" }
    );
    s.push_str("</svg>\n");
    s
}

/// Row summary for reports.
pub fn point_json(m: &ManifoldModel) -> serde_json::Value {
    let label = classify_point(&GeographyPoint::of(m));
    json!({
        "chi_h": rat_display(&m.chi_h()),
        "c": m.c(),
        "region": label.region.name(),
        "spin_admissible": label.spin_admissible,
    })
}
