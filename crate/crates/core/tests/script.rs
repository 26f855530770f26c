use m4calc::knots::KnotDescriptor;
use m4calc::script::{
    emit_dag, parse, report_json, report_text, run, ClassRef, DiagnosticKind, Operation, Script, Step,
};
use proptest::prelude::*;

fn run_text(text: &str) -> m4calc::script::RunResult {
    run(&parse(text).unwrap()).unwrap()
}

#[test]
fn parse_examples() {
    let s = parse(r#"{"steps":[{"op":"seed","args":{"name":"E(2)"},"bind":"x"}]}"#).unwrap();
    assert_eq!(s.steps, vec![Step::new(Operation::Seed { name: "E(2)".into() }, "x")]);
    let s = parse(
        r#"{"steps":[{"op":"seed","args":{"name":"E(2)"},"bind":"x"},
                     {"op":"knot_surgery","args":{"on":"x","torus":[2,3],"T":"fiber"},"bind":"k"}]}"#,
    )
    .unwrap();
    assert_eq!(
        s.steps[1].op,
        Operation::KnotSurgery { on: "x".into(), torus: "fiber".into(), knot: KnotDescriptor::trefoil() }
    );
}

#[test]
fn diagnostics_carry_positions() {
    let text = "{\"steps\": [\n  {\"op\": \"seed\", \"args\": {\"name\": \"E(2)\"}, \"bind\": \"x\"},\n  {\"op\": \"blowup\", \"args\": {\"on\": \"y\"}, \"bind\": \"z\"}\n]}";
    let d = parse(text).unwrap_err();
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].kind, DiagnosticKind::DanglingRef);
    assert_eq!(d[0].step, Some(1));
    assert_eq!((d[0].line, d[0].column), (3, 35));

    let d = parse(r#"{"steps":[{"op":"seed","args":{"name":"K7"},"bind":"x"}]}"#).unwrap_err();
    assert_eq!(d[0].kind, DiagnosticKind::BadArgs);
    let d = parse(r#"{"steps":[{"op":"log_transform","args":{"on":"x","p":0},"bind":"x"}]}"#).unwrap_err();
    assert!(d.iter().any(|x| x.kind == DiagnosticKind::BadArgs && x.message.contains("\"p\"")));
    let d = parse(r#"{"steps":[{"op":"knot_surgery","args":{"on":"x","torus":[2,4]},"bind":"y"}]}"#).unwrap_err();
    assert!(d.iter().any(|x| x.kind == DiagnosticKind::BadArgs));
    let d = parse(r#"{"steps":[{"op":"seed","args":{"name":"E(2)"},"bind":"x"}],"compare":[["x","q"]]}"#).unwrap_err();
    assert_eq!(d[0].kind, DiagnosticKind::DanglingRef);
    let d = parse(r#"{"steps":[{"op":"seed","args":{"name":"E(2)"},"bind":"x"},{"op":"seed","args":{"name":"E(3)"},"bind":"x"}]}"#)
        .unwrap_err();
    assert!(d[0].message.contains("already defined"));
    let d = parse("{\"steps\": [}").unwrap_err();
    assert_eq!((d[0].kind, d[0].line), (DiagnosticKind::SyntaxError, 1));
}

#[test]
fn run_reports_exotic_pair() {
    let r = run_text(
        r#"{"steps":[{"op":"seed","args":{"name":"E(2)"},"bind":"x"},
                     {"op":"knot_surgery","args":{"on":"x","torus":[2,3]},"bind":"y"}],
            "compare":[["x","y"]]}"#,
    );
    let report = report_json(&r);
    assert_eq!(report["comparisons"][0]["verdict"], "ExoticPair");
    assert_eq!(report["comparisons"][0]["homeomorphic"], true);
    assert_eq!(report["models"][1]["basic_classes"], 3);
    assert_eq!(report["models"][1]["homeo"]["chi_h"], "2");
    assert!(report_text(&r).contains("compare x y: ExoticPair"));
}

#[test]
fn empty_script() {
    let r = run_text(r#"{"steps":[]}"#);
    assert!(r.models.is_empty());
    assert_eq!(report_json(&r), serde_json::json!({ "models": [], "comparisons": [] }));
    assert_eq!(report_text(&r), "");
}

#[test]
fn double_blowup_count() {
    let r = run_text(
        r#"{"steps":[{"op":"seed","args":{"name":"E(2)"},"bind":"x"},
                     {"op":"blowup","args":{"on":"x"},"bind":"b1"},
                     {"op":"blowup","args":{"on":"b1"},"bind":"b2"}]}"#,
    );
    assert_eq!(report_json(&r)["models"][2]["basic_classes"], 4);
}

#[test]
fn run_errors_name_the_step() {
    let s = parse(
        r#"{"steps":[{"op":"seed","args":{"name":"E(2)"},"bind":"x"},
                     {"op":"log_transform","args":{"on":"x","T":"missing","p":2},"bind":"y"}]}"#,
    )
    .unwrap();
    let e = run(&s).unwrap_err();
    assert_eq!((e.step, e.bind.as_str(), e.op.as_str()), (1, "y", "log_transform"));
}

fn edges(dot: &str) -> Vec<(String, String)> {
    dot.lines()
        .filter(|l| l.contains("->"))
        .map(|l| {
            let q: Vec<&str> = l.split('"').collect();
            (q[1].to_string(), q[3].to_string())
        })
        .collect()
}

fn nodes(dot: &str) -> usize {
    dot.lines().filter(|l| l.contains("[label=") && !l.contains("->")).count()
}

#[test]
fn dag_shapes() {
    let one = emit_dag(&run_text(r#"{"steps":[{"op":"seed","args":{"name":"E(2)"},"bind":"x"}]}"#));
    assert_eq!((nodes(&one), edges(&one).len()), (1, 0));
    assert!(one.contains("chi_h=2, c=0, t=0, #bc=1"));

    let sum = emit_dag(&run_text(
        r#"{"steps":[{"op":"seed","args":{"name":"E(1)"},"bind":"a"},
                     {"op":"seed","args":{"name":"E(1)"},"bind":"b"},
                     {"op":"fiber_sum","args":{"x1":"a","x2":"b"},"bind":"s"}]}"#,
    ));
    assert_eq!(edges(&sum).iter().filter(|(_, to)| to == "s").count(), 2);

    let chain = emit_dag(&run_text(
        r#"{"steps":[{"op":"seed","args":{"name":"E(2)"},"bind":"x0"},
                     {"op":"knot_surgery","args":{"on":"x0","torus":[2,3]},"bind":"x1"},
                     {"op":"knot_surgery","args":{"on":"x1","torus":[2,5]},"bind":"x2"},
                     {"op":"knot_surgery","args":{"on":"x2","torus":[2,7]},"bind":"x3"}]}"#,
    ));
    assert_eq!(nodes(&chain), 4);
    let e = edges(&chain);
    let want: Vec<(String, String)> = (0..3).map(|i| (format!("x{i}"), format!("x{}", i + 1))).collect();
    assert_eq!(e, want);
    assert!(chain.contains("knot_surgery T=\\\"fiber\\\" torus=[2,5]"));
}

#[test]
fn reports_are_deterministic() {
    let text = r#"{"steps":[{"op":"seed","args":{"name":"E(3)"},"bind":"x"},
                            {"op":"knot_surgery","args":{"on":"x","torus":[3,4]},"bind":"y"},
                            {"op":"blowup","args":{"on":"y"},"bind":"z"},
                            {"op":"log_transform","args":{"on":"x","p":3},"bind":"w"}],
                   "compare":[["x","y"],["y","w"]]}"#;
    let a = serde_json::to_string(&report_json(&run_text(text))).unwrap();
    let b = serde_json::to_string(&report_json(&run_text(text))).unwrap();
    assert_eq!(a, b);
    assert_eq!(report_text(&run_text(text)), report_text(&run_text(text)));
}

#[test]
fn rational_blowdown_by_labels() {
    let r = run_text(
        r#"{"steps":[{"op":"seed","args":{"name":"CP2#3CP2bar"},"bind":"x"},
                     {"op":"rational_blowdown","args":{"on":"x","p":2,"u":[[0,2,0,0]]},"bind":"y"}]}"#,
    );
    let y = r.model("y").unwrap();
    assert_eq!((y.homeo.e, y.homeo.sigma), (5, -1));
    assert!(y.provenance.notes.iter().any(|n| n.contains("p-3")));
}

fn step_strategy() -> impl Strategy<Value = Operation> {
    let on = Just("x".to_string());
    prop_oneof![
        on.clone().prop_map(|on| Operation::Blowup { on }),
        (on.clone(), 1u32..8).prop_map(|(on, p)| Operation::LogTransform { on, torus: "fiber".into(), p }),
        (on.clone(), prop::sample::select(vec![(2i64, 3i64), (2, 5), (3, 4), (3, 5), (4, 7)])).prop_map(|(on, (p, q))| {
            Operation::KnotSurgery { on, torus: "fiber".into(), knot: KnotDescriptor::Torus { p, q } }
        }),
        (on.clone(), any::<bool>()).prop_map(|(on, lbl)| Operation::RationalBlowdown {
            on,
            p: 2,
            classes: vec![if lbl { ClassRef::Label("e1".into()) } else { ClassRef::Coords(vec![0, 2, 0]) }],
        }),
        (0u32..3, prop::option::of(0u8..2), any::<bool>()).prop_map(|(g, t, spin_preserving)| Operation::FiberSum {
            x1: "x".into(),
            f1: "fiber".into(),
            x2: "x".into(),
            f2: "fiber".into(),
            g,
            t,
            spin_preserving,
        }),
    ]
}

proptest! {
    #[test]
    fn parse_inverts_serialize(ops in prop::collection::vec((step_strategy(), prop::option::of(any::<bool>())), 0..6), n in 1u32..5) {
        let mut steps = vec![Step::new(Operation::Seed { name: format!("E({n})") }, "x")];
        for (i, (op, irr)) in ops.into_iter().enumerate() {
            let mut s = Step::new(op, &format!("y{i}"));
            s.irreducible = irr;
            steps.push(s);
        }
        let compare = if steps.len() > 1 { vec![("x".to_string(), "y0".to_string())] } else { vec![] };
        let script = Script { steps, compare };
        let text = script.to_text();
        prop_assert_eq!(parse(&text).unwrap(), script.clone());
        let compact = serde_json::to_string(&script.to_json()).unwrap();
        prop_assert_eq!(parse(&compact).unwrap(), script);
    }
}
