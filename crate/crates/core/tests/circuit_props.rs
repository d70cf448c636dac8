use proptest::prelude::*;
use zne_core::circuit::{
    build_trotter, Circuit, DdSequence, DecompositionMode, Gate, GateDurations, GateKind, IsingParams,
};
use zne_core::sim::{evolve_exact, Statevector};
use zne_core::topology::{color_edges, heavy_hex_27, Topology};

#[derive(Debug, Clone)]
enum Op {
    Rx(usize, f64),
    Rz(usize, f64),
    U(usize, f64, f64, f64),
    Cnot(usize, bool),
    Rzz(usize, f64),
    Barrier,
}

fn op(n: usize) -> impl Strategy<Value = Op> {
    let a = -3.2f64..3.2;
    prop_oneof![
        (0..n, a.clone()).prop_map(|(q, t)| Op::Rx(q, t)),
        (0..n, a.clone()).prop_map(|(q, t)| Op::Rz(q, t)),
        (0..n, a.clone(), a.clone(), a.clone()).prop_map(|(q, t, p, l)| Op::U(q, t, p, l)),
        (0..n - 1, any::<bool>()).prop_map(|(q, flip)| Op::Cnot(q, flip)),
        (0..n - 1, a).prop_map(|(q, t)| Op::Rzz(q, t)),
        Just(Op::Barrier),
    ]
}

fn build(n: usize, ops: &[Op]) -> Circuit {
    let d = GateDurations::default();
    let mut c = Circuit::new(n);
    for o in ops {
        match *o {
            Op::Rx(q, t) => c.push(vec![Gate::rx(q, t, &d)]),
            Op::Rz(q, t) => c.push(vec![Gate::rz(q, t)]),
            Op::U(q, t, p, l) => c.push(vec![Gate::u(q, t, p, l, d.single)]),
            Op::Cnot(q, false) => c.push(vec![Gate::cnot(q, q + 1, &d)]),
            Op::Cnot(q, true) => c.push(vec![Gate::cnot(q + 1, q, &d)]),
            Op::Rzz(q, t) => c.push(vec![Gate::rzz(q, q + 1, t, &d)]),
            Op::Barrier => c.push_barrier(),
        }
    }
    c
}

fn same_state(a: &Statevector, b: &Statevector) -> bool {
    a.fidelity(b) >= 1.0 - 1e-10
}

fn circuits() -> impl Strategy<Value = Circuit> {
    (2usize..=5).prop_flat_map(|n| prop::collection::vec(op(n), 1..30).prop_map(move |ops| build(n, &ops)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transformations_preserve_the_ideal_state(circ in circuits(), seed in any::<u64>()) {
        circ.validate().unwrap();
        let d = GateDurations::default();
        let want = evolve_exact(&circ).unwrap();
        for seq in [DdSequence::X2, DdSequence::XY4, DdSequence::XY8] {
            let dd = circ.insert_dd(seq, &d);
            dd.validate().unwrap();
            prop_assert!(same_state(&want, &evolve_exact(&dd).unwrap()));
        }
        for t in circ.twirl(seed, 3).unwrap() {
            t.validate().unwrap();
            prop_assert!(same_state(&want, &evolve_exact(&t).unwrap()));
        }
        let s = circ.stretch(1.7).unwrap();
        prop_assert!(same_state(&want, &evolve_exact(&s).unwrap()));
        let m = circ.merge_single_qubit();
        m.validate().unwrap();
        prop_assert!(same_state(&want, &evolve_exact(&m).unwrap()));
        let filled = circ.fill_idle();
        prop_assert!(same_state(&want, &evolve_exact(&filled).unwrap()));
    }

    #[test]
    fn stretch_scales_time(circ in circuits(), c in 1.0f64..3.0) {
        let s = circ.stretch(c).unwrap();
        prop_assert!((s.total_time() - c * circ.total_time()).abs() < 1e-9 * (1.0 + circ.total_time()));
    }

    #[test]
    fn dd_keeps_schedule_length(circ in circuits()) {
        let d = GateDurations::default();
        let dd = circ.insert_dd(DdSequence::XY4, &d);
        prop_assert!((dd.total_time() - circ.total_time()).abs() < 1e-9);
    }
}

#[test]
fn trotter_gate_counts() {
    let d = GateDurations::default();
    let p = IsingParams {
        j: 0.5236,
        h: 1.0,
        dt: 0.5,
    };
    for top in [Topology::chain(7), heavy_hex_27()] {
        let col = color_edges(&top);
        for steps in [1, 3, 20] {
            let native = build_trotter(&top, &col, p, steps, DecompositionMode::NativeRzz, &d).unwrap();
            native.validate().unwrap();
            assert_eq!(
                native.count(|k| matches!(k, GateKind::Rzz { .. })),
                steps * top.edge_count()
            );
            let pair = build_trotter(&top, &col, p, steps, DecompositionMode::CnotPair, &d).unwrap();
            pair.validate().unwrap();
            assert_eq!(pair.count(|k| *k == GateKind::Cnot), 2 * steps * top.edge_count());
            assert_eq!(native.barrier_count(), steps);
        }
    }
}

#[test]
fn decompositions_agree() {
    let d = GateDurations::default();
    let top = Topology::chain(5);
    let col = color_edges(&top);
    let p = IsingParams {
        j: 0.3,
        h: 1.0,
        dt: 0.4,
    };
    let a = evolve_exact(&build_trotter(&top, &col, p, 3, DecompositionMode::NativeRzz, &d).unwrap()).unwrap();
    let b = evolve_exact(&build_trotter(&top, &col, p, 3, DecompositionMode::CnotPair, &d).unwrap()).unwrap();
    assert!(same_state(&a, &b));
}
