//! Construction scripts.
//!
//! A script is a JSON document
//!
//! ```json
//! {"steps": [{"op": "seed", "args": {"name": "E(2)"}, "bind": "x"},
//!            {"op": "knot_surgery", "args": {"on": "x", "torus": [2, 3], "T": "fiber"}, "bind": "y"}],
//!  "compare": [["x", "y"]]}
//! ```
//!
//! [`parse`] validates op names, argument schemas and binding references and
//! reports problems with line/column positions; [`run`] executes the steps in
//! order; [`report_json`], [`report_text`] and [`emit_dag`] render results.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::geography::{point_json, verify_basic_class_bound};
use crate::knots::KnotDescriptor;
use crate::lattice::LatticeVector;
use crate::manifold::{exotic_verdict, homeomorphic, validate, ExoticVerdict, ManifoldModel};
use crate::surgery::{self, FiberSumOptions, PlumbingConfig, SeedName};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DiagnosticKind {
    SyntaxError,
    UnknownOp,
    BadArgs,
    DanglingRef,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub line: usize,
    pub column: usize,
    /// Index of the offending step, when the problem sits inside one.
    pub step: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {:?}", self.line, self.column, self.kind)?;
        if let Some(i) = self.step {
            write!(f, " (step {i})")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// A class named by basis label or given by integer coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassRef {
    Label(String),
    Coords(Vec<i64>),
}

impl ClassRef {
    fn to_json(&self) -> Value {
        match self {
            ClassRef::Label(l) => json!(l),
            ClassRef::Coords(c) => json!(c),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Operation {
    Seed { name: String },
    Blowup { on: String },
    LogTransform { on: String, torus: String, p: u32 },
    KnotSurgery { on: String, torus: String, knot: KnotDescriptor },
    RationalBlowdown { on: String, p: u32, classes: Vec<ClassRef> },
    FiberSum { x1: String, f1: String, x2: String, f2: String, g: u32, t: Option<u8>, spin_preserving: bool },
}

pub const OP_NAMES: [&str; 6] = ["seed", "blowup", "log_transform", "knot_surgery", "rational_blowdown", "fiber_sum"];

impl Operation {
    pub fn name(&self) -> &'static str {
        match self {
            Operation::Seed { .. } => "seed",
            Operation::Blowup { .. } => "blowup",
            Operation::LogTransform { .. } => "log_transform",
            Operation::KnotSurgery { .. } => "knot_surgery",
            Operation::RationalBlowdown { .. } => "rational_blowdown",
            Operation::FiberSum { .. } => "fiber_sum",
        }
    }

    /// Argument names holding binding references, with the bindings.
    pub fn refs(&self) -> Vec<(&'static str, &str)> {
        match self {
            Operation::Seed { .. } => vec![],
            Operation::Blowup { on }
            | Operation::LogTransform { on, .. }
            | Operation::KnotSurgery { on, .. }
            | Operation::RationalBlowdown { on, .. } => vec![("on", on.as_str())],
            Operation::FiberSum { x1, x2, .. } => vec![("x1", x1.as_str()), ("x2", x2.as_str())],
        }
    }

    pub fn args_json(&self) -> Map<String, Value> {
        let v = match self {
            Operation::Seed { name } => json!({ "name": name }),
            Operation::Blowup { on } => json!({ "on": on }),
            Operation::LogTransform { on, torus, p } => json!({ "on": on, "T": torus, "p": p }),
            Operation::KnotSurgery { on, torus, knot } => {
                let mut m = json!({ "on": on, "T": torus });
                match knot {
                    KnotDescriptor::Torus { p, q } => m["torus"] = json!([p, q]),
                    KnotDescriptor::Seifert { matrix, fibered } => {
                        m["seifert"] = json!(matrix);
                        m["fibered"] = json!(fibered);
                    }
                    KnotDescriptor::Unknot => m["knot"] = json!("unknot"),
                }
                m
            }
            Operation::RationalBlowdown { on, p, classes } => {
                json!({ "on": on, "p": p, "u": classes.iter().map(ClassRef::to_json).collect::<Vec<_>>() })
            }
            Operation::FiberSum { x1, f1, x2, f2, g, t, spin_preserving } => {
                let mut m = json!({ "x1": x1, "F1": f1, "x2": x2, "F2": f2, "g": g, "spin_preserving": spin_preserving });
                if let Some(t) = t {
                    m["t"] = json!(t);
                }
                m
            }
        };
        match v {
            Value::Object(m) => m,
            _ => unreachable!("argument objects"),
        }
    }

    /// Arguments other than binding references, for labels.
    fn params(&self) -> Vec<(String, Value)> {
        let refs: HashSet<&str> = self.refs().iter().map(|(k, _)| *k).collect();
        self.args_json().into_iter().filter(|(k, _)| !refs.contains(k.as_str())).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub op: Operation,
    pub bind: String,
    /// Caller's assertion about irreducibility, recorded in provenance.
    pub irreducible: Option<bool>,
}

impl Step {
    pub fn new(op: Operation, bind: &str) -> Self {
        Step { op, bind: bind.to_string(), irreducible: None }
    }

    pub fn to_json(&self) -> Value {
        let mut args = self.op.args_json();
        if let Some(b) = self.irreducible {
            args.insert("irreducible".into(), json!(b));
        }
        json!({ "op": self.op.name(), "args": args, "bind": self.bind })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Script {
    pub steps: Vec<Step>,
    pub compare: Vec<(String, String)>,
}

impl Script {
    pub fn to_json(&self) -> Value {
        let mut v = json!({ "steps": self.steps.iter().map(Step::to_json).collect::<Vec<_>>() });
        if !self.compare.is_empty() {
            v["compare"] = json!(self.compare.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>());
        }
        v
    }

    pub fn to_text(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("script serializes") + "\n"
    }
}

// ------------------------------------------------------------ positions

/// Start positions (1-based line and column) of every value in a JSON
/// document, keyed by JSON pointer. Assumes the text is valid JSON.
fn value_positions(text: &str) -> HashMap<String, (usize, usize)> {
    struct Scan<'a> {
        chars: std::iter::Peekable<std::str::Chars<'a>>,
        line: usize,
        col: usize,
        out: HashMap<String, (usize, usize)>,
    }
    impl Scan<'_> {
        fn bump(&mut self) -> Option<char> {
            let c = self.chars.next()?;
            if c == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
            Some(c)
        }
        fn ws(&mut self) {
            while matches!(self.chars.peek(), Some(c) if c.is_whitespace()) {
                self.bump();
            }
        }
        fn string(&mut self) -> String {
            self.bump();
            let mut s = String::new();
            while let Some(c) = self.bump() {
                match c {
                    '"' => break,
                    '\\' => {
                        if let Some(e) = self.bump() {
                            s.push(e);
                        }
                    }
                    c => s.push(c),
                }
            }
            s
        }
        fn value(&mut self, path: String) {
            self.ws();
            self.out.insert(path.clone(), (self.line, self.col));
            match self.chars.peek() {
                Some('{') => {
                    self.bump();
                    loop {
                        self.ws();
                        match self.chars.peek() {
                            Some('}') => {
                                self.bump();
                                break;
                            }
                            Some(',') => {
                                self.bump();
                            }
                            Some('"') => {
                                let key = self.string();
                                self.ws();
                                self.bump();
                                let escaped = key.replace('~', "~0").replace('/', "~1");
                                self.value(format!("{path}/{escaped}"));
                            }
                            _ => break,
                        }
                    }
                }
                Some('[') => {
                    self.bump();
                    let mut i = 0;
                    loop {
                        self.ws();
                        match self.chars.peek() {
                            Some(']') => {
                                self.bump();
                                break;
                            }
                            Some(',') => {
                                self.bump();
                            }
                            Some(_) => {
                                self.value(format!("{path}/{i}"));
                                i += 1;
                            }
                            None => break,
                        }
                    }
                }
                Some('"') => {
                    self.string();
                }
                _ => {
                    while matches!(self.chars.peek(), Some(c) if !matches!(c, ',' | ']' | '}') && !c.is_whitespace()) {
                        self.bump();
                    }
                }
            }
        }
    }
    let mut s = Scan { chars: text.chars().peekable(), line: 1, col: 1, out: HashMap::new() };
    s.value(String::new());
    s.out
}

struct Diagnostics {
    positions: HashMap<String, (usize, usize)>,
    list: Vec<Diagnostic>,
}

impl Diagnostics {
    /// Position of the deepest existing prefix of `pointer`.
    fn locate(&self, pointer: &str) -> (usize, usize) {
        let mut p = pointer.to_string();
        loop {
            if let Some(&pos) = self.positions.get(&p) {
                return pos;
            }
            match p.rfind('/') {
                Some(i) => p.truncate(i),
                None => return (1, 1),
            }
        }
    }

    fn push(&mut self, kind: DiagnosticKind, pointer: &str, step: Option<usize>, message: impl Into<String>) {
        let (line, column) = self.locate(pointer);
        self.list.push(Diagnostic { kind, line, column, step, message: message.into() });
    }
}

// ------------------------------------------------------------ argument schemas

struct Args<'a> {
    map: &'a Map<String, Value>,
    base: String,
    issues: Vec<(String, String)>,
}

impl<'a> Args<'a> {
    fn bad(&mut self, key: &str, msg: impl Into<String>) {
        self.issues.push((format!("{}/{key}", self.base), msg.into()));
    }

    fn string(&mut self, key: &str) -> Option<String> {
        match self.map.get(key) {
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => {
                self.bad(key, format!("argument {key:?} must be a string"));
                None
            }
            None => {
                self.bad(key, format!("missing argument {key:?}"));
                None
            }
        }
    }

    fn string_or(&mut self, key: &str, default: &str) -> Option<String> {
        if self.map.contains_key(key) {
            self.string(key)
        } else {
            Some(default.to_string())
        }
    }

    fn uint(&mut self, key: &str, min: u64, default: Option<u64>) -> Option<u32> {
        match self.map.get(key) {
            Some(v) => match v.as_u64() {
                Some(n) if n >= min && n <= u32::MAX as u64 => Some(n as u32),
                _ => {
                    self.bad(key, format!("argument {key:?} must be an integer >= {min}"));
                    None
                }
            },
            None => match default {
                Some(d) => Some(d as u32),
                None => {
                    self.bad(key, format!("missing argument {key:?}"));
                    None
                }
            },
        }
    }

    fn boolean(&mut self, key: &str) -> Option<Option<bool>> {
        match self.map.get(key) {
            None => Some(None),
            Some(Value::Bool(b)) => Some(Some(*b)),
            Some(_) => {
                self.bad(key, format!("argument {key:?} must be a boolean"));
                None
            }
        }
    }

    fn allow_only(&mut self, allowed: &[&str]) {
        let extra: Vec<String> =
            self.map.keys().filter(|k| !allowed.contains(&k.as_str()) && *k != "irreducible").cloned().collect();
        for k in extra {
            self.bad(&k, format!("unknown argument {k:?}"));
        }
    }

    fn int_matrix(&mut self, key: &str) -> Option<Vec<Vec<i64>>> {
        let rows = self.map.get(key)?.as_array();
        let parsed: Option<Vec<Vec<i64>>> = rows.and_then(|rows| {
            rows.iter()
                .map(|r| r.as_array().and_then(|r| r.iter().map(Value::as_i64).collect::<Option<Vec<_>>>()))
                .collect()
        });
        if parsed.is_none() {
            self.bad(key, format!("argument {key:?} must be a matrix of integers"));
        }
        parsed
    }
}

fn parse_knot(a: &mut Args) -> Option<KnotDescriptor> {
    let present: Vec<&str> = ["torus", "seifert", "knot"].into_iter().filter(|k| a.map.contains_key(*k)).collect();
    if present.len() != 1 {
        a.bad("", "exactly one of \"torus\", \"seifert\" or \"knot\" is required");
        return None;
    }
    let knot = match present[0] {
        "torus" => {
            let pq = a.map["torus"].as_array().and_then(|v| {
                (v.len() == 2).then(|| v.iter().map(Value::as_i64).collect::<Option<Vec<_>>>()).flatten()
            });
            match pq {
                Some(pq) => KnotDescriptor::Torus { p: pq[0], q: pq[1] },
                None => {
                    a.bad("torus", "argument \"torus\" must be a pair of integers [p, q]");
                    return None;
                }
            }
        }
        "seifert" => {
            let matrix = a.int_matrix("seifert")?;
            let fibered = a.boolean("fibered")?.unwrap_or(false);
            KnotDescriptor::Seifert { matrix, fibered }
        }
        _ => match serde_json::from_value::<KnotDescriptor>(a.map["knot"].clone()) {
            Ok(k) => k,
            Err(e) => {
                a.bad("knot", format!("bad knot descriptor: {e}"));
                return None;
            }
        },
    };
    let key = present[0];
    if let Err(e) = knot.validate() {
        a.bad(key, format!("invalid knot: {e}"));
        return None;
    }
    Some(knot)
}

fn parse_operation(op: &str, a: &mut Args) -> Option<Operation> {
    match op {
        "seed" => {
            a.allow_only(&["name"]);
            let name = a.string("name")?;
            if SeedName::parse(&name).is_none() {
                a.bad("name", format!("unknown seed {name:?}"));
                return None;
            }
            Some(Operation::Seed { name })
        }
        "blowup" => {
            a.allow_only(&["on"]);
            Some(Operation::Blowup { on: a.string("on")? })
        }
        "log_transform" => {
            a.allow_only(&["on", "T", "p"]);
            let on = a.string("on");
            let torus = a.string_or("T", "fiber");
            let p = a.uint("p", 1, None);
            Some(Operation::LogTransform { on: on?, torus: torus?, p: p? })
        }
        "knot_surgery" => {
            a.allow_only(&["on", "T", "torus", "seifert", "fibered", "knot"]);
            let on = a.string("on");
            let torus = a.string_or("T", "fiber");
            let knot = parse_knot(a);
            Some(Operation::KnotSurgery { on: on?, torus: torus?, knot: knot? })
        }
        "rational_blowdown" => {
            a.allow_only(&["on", "p", "u"]);
            let on = a.string("on");
            let p = a.uint("p", 2, None);
            let classes: Option<Vec<ClassRef>> = match a.map.get("u").and_then(Value::as_array) {
                Some(items) => items
                    .iter()
                    .map(|v| match v {
                        Value::String(s) => Some(ClassRef::Label(s.clone())),
                        Value::Array(xs) => xs.iter().map(Value::as_i64).collect::<Option<Vec<_>>>().map(ClassRef::Coords),
                        _ => None,
                    })
                    .collect(),
                None => None,
            };
            if classes.is_none() {
                a.bad("u", "argument \"u\" must list basis labels or integer coordinate vectors");
            }
            let (p, classes) = (p?, classes?);
            if classes.len() + 1 != p as usize {
                a.bad("u", format!("p = {p} needs {} classes, got {}", p - 1, classes.len()));
                return None;
            }
            Some(Operation::RationalBlowdown { on: on?, p, classes })
        }
        "fiber_sum" => {
            a.allow_only(&["x1", "F1", "x2", "F2", "g", "t", "spin_preserving"]);
            let x1 = a.string("x1");
            let f1 = a.string_or("F1", "fiber");
            let x2 = a.string("x2");
            let f2 = a.string_or("F2", "fiber");
            let g = a.uint("g", 0, Some(1));
            let t = match a.map.get("t") {
                None => Some(None),
                Some(v) => match v.as_u64() {
                    Some(t @ 0..=1) => Some(Some(t as u8)),
                    _ => {
                        a.bad("t", "argument \"t\" must be 0 or 1");
                        None
                    }
                },
            };
            let spin_preserving = a.boolean("spin_preserving");
            Some(Operation::FiberSum {
                x1: x1?,
                f1: f1?,
                x2: x2?,
                f2: f2?,
                g: g?,
                t: t?,
                spin_preserving: spin_preserving?.unwrap_or(false),
            })
        }
        _ => None,
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses and validates a script, collecting every problem found.
pub fn parse(text: &str) -> Result<Script, Vec<Diagnostic>> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        vec![Diagnostic {
            kind: DiagnosticKind::SyntaxError,
            line: e.line().max(1),
            column: e.column().max(1),
            step: None,
            message: e.to_string(),
        }]
    })?;
    let mut d = Diagnostics { positions: value_positions(text), list: Vec::new() };
    let Some(top) = root.as_object() else {
        d.push(DiagnosticKind::BadArgs, "", None, "script must be a JSON object");
        return Err(d.list);
    };
    for k in top.keys().filter(|k| *k != "steps" && *k != "compare") {
        d.push(DiagnosticKind::BadArgs, &format!("/{k}"), None, format!("unknown top-level key {k:?}"));
    }
    let steps_v = match top.get("steps") {
        Some(Value::Array(s)) => s.as_slice(),
        Some(_) => {
            d.push(DiagnosticKind::BadArgs, "/steps", None, "\"steps\" must be an array");
            &[]
        }
        None => {
            d.push(DiagnosticKind::BadArgs, "", None, "missing \"steps\"");
            &[]
        }
    };
    let mut bound: HashSet<String> = HashSet::new();
    let mut steps = Vec::new();
    for (i, sv) in steps_v.iter().enumerate() {
        let base = format!("/steps/{i}");
        let Some(obj) = sv.as_object() else {
            d.push(DiagnosticKind::BadArgs, &base, Some(i), "step must be an object");
            continue;
        };
        for k in obj.keys().filter(|k| !matches!(k.as_str(), "op" | "args" | "bind")) {
            d.push(DiagnosticKind::BadArgs, &format!("{base}/{k}"), Some(i), format!("unknown step key {k:?}"));
        }
        let bind = match obj.get("bind") {
            Some(Value::String(b)) if is_identifier(b) => Some(b.clone()),
            Some(_) => {
                d.push(DiagnosticKind::BadArgs, &format!("{base}/bind"), Some(i), "\"bind\" must be an identifier");
                None
            }
            None => {
                d.push(DiagnosticKind::BadArgs, &base, Some(i), "missing \"bind\"");
                None
            }
        };
        let op_name = match obj.get("op") {
            Some(Value::String(o)) if OP_NAMES.contains(&o.as_str()) => Some(o.as_str()),
            Some(Value::String(o)) => {
                d.push(DiagnosticKind::UnknownOp, &format!("{base}/op"), Some(i), format!("unknown operation {o:?}"));
                None
            }
            Some(_) => {
                d.push(DiagnosticKind::UnknownOp, &format!("{base}/op"), Some(i), "\"op\" must be a string");
                None
            }
            None => {
                d.push(DiagnosticKind::UnknownOp, &base, Some(i), "missing \"op\"");
                None
            }
        };
        let empty = Map::new();
        let args_map = match obj.get("args") {
            Some(Value::Object(m)) => m,
            Some(_) => {
                d.push(DiagnosticKind::BadArgs, &format!("{base}/args"), Some(i), "\"args\" must be an object");
                &empty
            }
            None => &empty,
        };
        let mut irreducible = None;
        let mut op = None;
        if let Some(name) = op_name {
            let mut a = Args { map: args_map, base: format!("{base}/args"), issues: Vec::new() };
            op = parse_operation(name, &mut a);
            match a.boolean("irreducible") {
                Some(b) => irreducible = b,
                None => op = None,
            }
            for (ptr, msg) in a.issues {
                d.push(DiagnosticKind::BadArgs, &ptr, Some(i), msg);
            }
            if !a_issues_empty(&d, i) {
                op = None;
            }
        }
        if let Some(op) = &op {
            for (key, r) in op.refs() {
                if !bound.contains(r) {
                    d.push(
                        DiagnosticKind::DanglingRef,
                        &format!("{base}/args/{key}"),
                        Some(i),
                        format!("step {i} refers to undefined binding {r:?}"),
                    );
                }
            }
        }
        if let Some(b) = &bind {
            if !bound.insert(b.clone()) {
                d.push(DiagnosticKind::BadArgs, &format!("{base}/bind"), Some(i), format!("binding {b:?} is already defined"));
            }
        }
        if let (Some(op), Some(bind)) = (op, bind) {
            steps.push(Step { op, bind, irreducible });
        }
    }
    let mut compare = Vec::new();
    match top.get("compare") {
        None => {}
        Some(Value::Array(pairs)) => {
            for (j, pv) in pairs.iter().enumerate() {
                let ptr = format!("/compare/{j}");
                let pair = pv.as_array().filter(|p| p.len() == 2).and_then(|p| Some((p[0].as_str()?, p[1].as_str()?)));
                let Some((a, b)) = pair else {
                    d.push(DiagnosticKind::BadArgs, &ptr, None, "compare entries must be pairs of binding names");
                    continue;
                };
                for (k, name) in [(0, a), (1, b)] {
                    if !bound.contains(name) {
                        d.push(DiagnosticKind::DanglingRef, &format!("{ptr}/{k}"), None, format!("compare refers to undefined binding {name:?}"));
                    }
                }
                compare.push((a.to_string(), b.to_string()));
            }
        }
        Some(_) => d.push(DiagnosticKind::BadArgs, "/compare", None, "\"compare\" must be an array"),
    }
    if d.list.is_empty() {
        Ok(Script { steps, compare })
    } else {
        Err(d.list)
    }
}

fn a_issues_empty(d: &Diagnostics, step: usize) -> bool {
    !d.list.iter().any(|x| x.step == Some(step) && x.kind == DiagnosticKind::BadArgs)
}

// ------------------------------------------------------------ execution

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunError {
    pub step: usize,
    pub bind: String,
    pub op: String,
    pub message: String,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {} ({} -> {}): {}", self.step, self.op, self.bind, self.message)
    }
}

impl std::error::Error for RunError {}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub a: String,
    pub b: String,
    pub homeomorphic: bool,
    pub verdict: ExoticVerdict,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub script: Script,
    pub models: Vec<(String, ManifoldModel)>,
    pub comparisons: Vec<Comparison>,
}

impl RunResult {
    pub fn model(&self, bind: &str) -> Option<&ManifoldModel> {
        self.models.iter().find(|(b, _)| b == bind).map(|(_, m)| m)
    }
}

fn execute(op: &Operation, env: &IndexMap<String, ManifoldModel>) -> Result<ManifoldModel, String> {
    let get = |b: &str| env.get(b).ok_or_else(|| format!("undefined binding {b:?}"));
    let out = match op {
        Operation::Seed { name } => surgery::seed(name),
        Operation::Blowup { on } => surgery::blowup(get(on)?),
        Operation::LogTransform { on, torus, p } => surgery::log_transform(get(on)?, torus, *p),
        Operation::KnotSurgery { on, torus, knot } => surgery::knot_surgery(get(on)?, torus, knot),
        Operation::RationalBlowdown { on, p, classes } => {
            let x = get(on)?;
            let mut vs = Vec::with_capacity(classes.len());
            for c in classes {
                vs.push(match c {
                    ClassRef::Label(l) => x.lattice.vector(l).map_err(|e| e.to_string())?,
                    ClassRef::Coords(v) if v.len() == x.lattice.rank() => LatticeVector::from_ints(v),
                    ClassRef::Coords(v) => {
                        return Err(format!("class has {} coordinates, lattice rank is {}", v.len(), x.lattice.rank()))
                    }
                });
            }
            surgery::rational_blowdown(x, &PlumbingConfig::new(*p, vs))
        }
        Operation::FiberSum { x1, f1, x2, f2, g, t, spin_preserving } => surgery::fiber_sum(
            get(x1)?,
            f1,
            get(x2)?,
            f2,
            *g,
            &FiberSumOptions { t: *t, spin_preserving: *spin_preserving },
        ),
    };
    out.map_err(|e| e.to_string())
}

/// Executes every step in order, then the requested comparisons.
pub fn run(script: &Script) -> Result<RunResult, RunError> {
    let mut env: IndexMap<String, ManifoldModel> = IndexMap::new();
    for (i, step) in script.steps.iter().enumerate() {
        let fail = |message: String| RunError { step: i, bind: step.bind.clone(), op: step.op.name().into(), message };
        let mut m = execute(&step.op, &env).map_err(fail)?;
        if let Some(b) = step.irreducible {
            m.irreducible = Some(b);
            let prov = Arc::make_mut(&mut m.provenance);
            prov.notes.push(format!("irreducible = {b} asserted by caller"));
        }
        env.insert(step.bind.clone(), m);
    }
    let comparisons = script
        .compare
        .iter()
        .map(|(a, b)| {
            let (x, y) = (&env[a.as_str()], &env[b.as_str()]);
            Comparison { a: a.clone(), b: b.clone(), homeomorphic: homeomorphic(x, y), verdict: exotic_verdict(x, y) }
        })
        .collect();
    Ok(RunResult { script: script.clone(), models: env.into_iter().collect(), comparisons })
}

// ------------------------------------------------------------ reports

fn model_summary(bind: &str, m: &ManifoldModel) -> Value {
    let violations = validate(m);
    let bound = match verify_basic_class_bound(m) {
        Ok(b) => serde_json::to_value(b).expect("bound serializes"),
        Err(_) => json!({ "result": "UnknownSw" }),
    };
    json!({
        "bind": bind,
        "name": m.name,
        "op": m.provenance.op,
        "homeo": m.homeo.to_json(),
        "sw_status": m.sw.label(),
        "sw": m.sw.known().map(|p| p.render()),
        "basic_classes": m.basic_class_count(),
        "valid": violations.is_empty(),
        "validation": serde_json::to_value(&violations).expect("violations serialize"),
        "geography": point_json(m),
        "basic_class_bound": bound,
        "irreducible": m.irreducible,
        "notes": m.provenance.notes,
        "model": m.to_json(),
    })
}

pub fn report_json(r: &RunResult) -> Value {
    json!({
        "models": r.models.iter().map(|(b, m)| model_summary(b, m)).collect::<Vec<_>>(),
        "comparisons": r.comparisons.iter().map(|c| json!({
            "a": c.a,
            "b": c.b,
            "homeomorphic": c.homeomorphic,
            "verdict": c.verdict.to_string(),
        })).collect::<Vec<_>>(),
    })
}

pub fn report_text(r: &RunResult) -> String {
    let mut s = String::new();
    for (b, m) in &r.models {
        let _ = writeln!(s, "{b} = {} [{}]", m.name, m.provenance.op);
        let _ = writeln!(s, "  {}", m.homeo);
        match m.sw.known() {
            Some(p) => {
                let _ = writeln!(s, "  SW = {}  ({} basic classes)", p.render(), p.term_count());
            }
            None => {
                let _ = writeln!(s, "  SW {}", m.sw.label());
            }
        }
        let v = validate(m);
        if v.is_empty() {
            let _ = writeln!(s, "  validation: ok");
        } else {
            let kinds: Vec<&str> = v.iter().map(|x| x.kind()).collect();
            let _ = writeln!(s, "  validation: {}", kinds.join(", "));
        }
        let label = crate::geography::classify_point(&crate::geography::GeographyPoint::of(m));
        let _ = writeln!(s, "  region: {}", label.region);
        for n in &m.provenance.notes {
            let _ = writeln!(s, "  note: {n}");
        }
    }
    for c in &r.comparisons {
        let _ = writeln!(s, "compare {} {}: {} (homeomorphic: {})", c.a, c.b, c.verdict, c.homeomorphic);
    }
    s
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// The construction DAG in DOT: a node per binding, an edge per reference.
pub fn emit_dag(r: &RunResult) -> String {
    let mut s = String::from("digraph construction {\n  rankdir=LR;\n");
    for (b, m) in &r.models {
        let count = m.basic_class_count().map_or("?".to_string(), |c| c.to_string());
        let label = format!(
            "{b}\\n(chi_h={}, c={}, t={}, #bc={count})",
            crate::arith::rat_display(&m.chi_h()),
            m.c(),
            m.homeo.t
        );
        let _ = writeln!(s, "  \"{}\" [label=\"{}\"];", dot_escape(b), dot_escape(&label).replace("\\\\n", "\\n"));
    }
    for step in &r.script.steps {
        let params: Vec<String> = step.op.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
        let label = if params.is_empty() { step.op.name().to_string() } else { format!("{} {}", step.op.name(), params.join(" ")) };
        for (_, parent) in step.op.refs() {
            let _ = writeln!(
                s,
                "  \"{}\" -> \"{}\" [label=\"{}\"];",
                dot_escape(parent),
                dot_escape(&step.bind),
                dot_escape(&label)
            );
        }
    }
    s.push_str("}\n");
    s
}
