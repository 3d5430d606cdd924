use proptest::prelude::*;
use qof_core::linearize::linearize_circuit;
use qof_core::oracle::{circuit_unitary, output_truth_table};
use qof_core::pipeline::{run_pipeline, Stage};
use qof_core::qof::{emit_qof, parse_qof};
use qof_core::{
    gates_commute, Circuit, Control, EsopExpr, Gate, Literal, OpKind, PipelineConfig, Polarity, ProductTerm,
    WireRole,
};

const WIRES: usize = 4;

fn base_circuit() -> Circuit {
    let mut c = Circuit::new();
    for n in ["a", "b", "c"] {
        c.add_wire(n, WireRole::Input).unwrap();
    }
    c.add_wire("t", WireRole::Output).unwrap();
    c
}

fn op() -> impl Strategy<Value = OpKind> {
    prop_oneof![
        Just(OpKind::V),
        Just(OpKind::X),
        Just(OpKind::Vdg),
        Just(OpKind::VirtV),
        Just(OpKind::VirtVdg)
    ]
}

fn gate() -> impl Strategy<Value = Gate> {
    (op(), 0..WIRES, prop::collection::vec(prop::option::of(any::<bool>()), WIRES)).prop_map(
        |(op, target, slots)| {
            let controls = slots
                .into_iter()
                .enumerate()
                .filter(|&(w, _)| w != target)
                .filter_map(|(w, s)| s.map(|pos| (w, pos)))
                .take(2)
                .map(|(w, pos)| Control::new(w, if pos { Polarity::Positive } else { Polarity::Negative }))
                .collect();
            Gate::new(op, target, controls).unwrap()
        },
    )
}

fn term(arity: usize) -> impl Strategy<Value = ProductTerm> {
    prop::collection::btree_map(0..arity, any::<bool>(), 1..=arity).prop_map(|m| {
        let lits = m
            .into_iter()
            .map(|(v, pos)| if pos { Literal::positive(v) } else { Literal::negative(v) })
            .collect();
        ProductTerm::new(lits).unwrap()
    })
}

fn esop() -> impl Strategy<Value = EsopExpr> {
    (1usize..=4).prop_flat_map(|arity| {
        prop::collection::vec(term(arity), 1..=4).prop_map(move |ts| EsopExpr::new(arity, ts).unwrap())
    })
}

fn stage() -> impl Strategy<Value = Stage> {
    prop_oneof![
        Just(Stage::Cascade),
        Just(Stage::DecomposeClassical),
        Just(Stage::DecomposeQuantum),
        Just(Stage::Linearize),
        Just(Stage::Minimize)
    ]
}

fn at_stage(e: &EsopExpr, stop_after: Stage) -> Circuit {
    let config = PipelineConfig {
        stop_after,
        ..PipelineConfig::default()
    };
    run_pipeline(e, &config).unwrap().circuit.unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn merge_keeps_function_and_is_idempotent(e in esop()) {
        let m = e.merge_terms();
        prop_assert_eq!(m.truth_table().unwrap(), e.truth_table().unwrap());
        prop_assert_eq!(m.merge_terms(), m);
    }

    #[test]
    fn commuting_gates_swap_exactly(g1 in gate(), g2 in gate()) {
        if !gates_commute(&g1, &g2) {
            return Ok(());
        }
        let mut ab = base_circuit();
        ab.gates = vec![g1.clone(), g2.clone()];
        let mut ba = base_circuit();
        ba.gates = vec![g2, g1];
        let d = circuit_unitary(&ab).unwrap().max_diff(&circuit_unitary(&ba).unwrap());
        prop_assert!(d < 1e-10, "deviation {}", d);
    }

    #[test]
    fn unitary_of_concatenation_is_the_product(
        xs in prop::collection::vec(gate(), 0..6),
        ys in prop::collection::vec(gate(), 0..6),
    ) {
        let mut a = base_circuit();
        a.gates = xs.clone();
        let mut b = base_circuit();
        b.gates = ys.clone();
        let mut ab = base_circuit();
        ab.gates = xs.into_iter().chain(ys).collect();
        let product = circuit_unitary(&b).unwrap().mul(&circuit_unitary(&a).unwrap());
        prop_assert!(circuit_unitary(&ab).unwrap().approx_eq(&product, 1e-10));
    }

    #[test]
    fn qof_round_trips(e in esop(), s in stage()) {
        let mut c = at_stage(&e, s);
        c.renumber_groups();
        let mut back = parse_qof(&emit_qof(&c)).unwrap();
        back.renumber_groups();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn uninterrupted_spans_stay_uninterrupted_when_shrunk(
        gates in prop::collection::vec(gate(), 1..10),
        wire in 0..WIRES,
        bounds in (0usize..10, 0usize..10, 0usize..10, 0usize..10),
    ) {
        let mut c = base_circuit();
        c.gates = gates;
        let n = c.len();
        let mut cut = [bounds.0 % n, bounds.1 % n, bounds.2 % n, bounds.3 % n];
        cut.sort();
        let [from, lo, hi, to] = cut;
        if lo < hi && c.is_uninterrupted(wire, from, to).unwrap() {
            prop_assert!(c.is_uninterrupted(wire, lo, hi).unwrap());
        }
    }

    #[test]
    fn linearize_keeps_output_function(e in esop()) {
        let quantum = at_stage(&e, Stage::DecomposeQuantum);
        let (linear, _) = linearize_circuit(&quantum).unwrap();
        prop_assert_eq!(
            output_truth_table(&linear).unwrap(),
            output_truth_table(&quantum).unwrap()
        );
    }

    #[test]
    fn pipeline_output_matches_expression(e in esop()) {
        let c = at_stage(&e, Stage::Minimize);
        prop_assert_eq!(output_truth_table(&c).unwrap(), e.truth_table().unwrap());
    }
}
