use proptest::prelude::*;

use mparray::array::{decompose_to_cycles, GridSpec, Site, Trap};
use mparray::baseline::{compile_sequential, delta_stage_accounting};
use mparray::circuit::Circuit;
use mparray::compiler::{compile_on_array, solve_window, ArrayJob, Budget, CompileOptions};
use mparray::validator::{validate_joint, validate_single, ViolationKind};

fn circuit(max_qubits: usize, max_gates: usize) -> impl Strategy<Value = Circuit> {
    (2..=max_qubits).prop_flat_map(move |n| {
        let pair = (0..n, 0..n - 1).prop_map(|(a, b)| (a, if b >= a { b + 1 } else { b }));
        prop::collection::vec(pair, 1..=max_gates)
            .prop_map(move |pairs| Circuit::from_pairs("p", n, &pairs).unwrap())
    })
}

fn compile(c: &Circuit, grid: GridSpec) -> mparray::compiler::CompiledSchedule {
    let occ = mparray::array::ArrayOccupancy::new(grid);
    solve_window(c, grid, &occ, &Budget::unlimited(), &CompileOptions::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn single_schedules_are_clean_and_respect_depth(c in circuit(5, 6)) {
        let grid = GridSpec::new(4, 4);
        let s = compile(&c, grid);
        prop_assert!(validate_single(&s, grid).is_empty());
        prop_assert!(s.stage_count() >= c.depth());
        for (g, preds) in c.predecessors().iter().enumerate() {
            for &p in preds {
                prop_assert!(s.gate_stage[p] < s.gate_stage[g]);
            }
        }
    }

    #[test]
    fn decomposition_replays_every_stage(c in circuit(4, 5)) {
        let grid = GridSpec::new(4, 4);
        let s = compile(&c, grid);
        let seq = decompose_to_cycles(&s, 0).unwrap();
        prop_assert_eq!(seq.replay().unwrap(), s.stages.clone());
        let back = mparray::array::ExecutionSequence::from_json(&seq.to_json(), 0).unwrap();
        prop_assert_eq!(back, seq);
    }

    #[test]
    fn moving_a_parked_qubit_is_drift(c in circuit(4, 4), dx in 1usize..4) {
        let grid = GridSpec::new(4, 4);
        let mut s = compile(&c, grid);
        prop_assume!(s.stages.len() >= 2);
        let last = s.stages.len() - 1;
        let q = &mut s.stages[last][0];
        q.trap = Trap::Slm;
        s.stages[last - 1][0].trap = Trap::Slm;
        let from = s.stages[last - 1][0].site;
        s.stages[last][0].site = Site::new((from.x + dx) % grid.x_sites, from.y);
        prop_assert!(validate_single(&s, grid).count(ViolationKind::SlmDrift) > 0);
    }

    #[test]
    fn three_circuits_share_an_array_cleanly(a in circuit(4, 4), b in circuit(4, 4), c in circuit(3, 3)) {
        let grid = GridSpec::new(6, 6);
        let jobs: Vec<ArrayJob> = [&a, &b, &c].into_iter().map(|circuit| ArrayJob { circuit, start_offset: 0 }).collect();
        if let Ok(run) = compile_on_array(&jobs, grid, &Budget::unlimited(), &CompileOptions::default()) {
            prop_assert!(validate_joint(&run.occupancy).is_empty());
            let deltas: usize = delta_stage_accounting(&run).iter().map(|d| d.delta_l).sum();
            prop_assert_eq!(deltas, run.stage_count());
            let longest = run.schedules.iter().map(|s| s.stage_count()).max().unwrap();
            prop_assert_eq!(run.stage_count(), longest);
        }
    }

    #[test]
    fn sequential_total_is_sum_of_standalone(a in circuit(4, 4), b in circuit(4, 4)) {
        let grid = GridSpec::new(4, 4);
        let run = compile_sequential(&[&a, &b], grid, &Budget::unlimited(), &CompileOptions::default()).unwrap();
        prop_assert_eq!(run.total_stages(), compile(&a, grid).stage_count() + compile(&b, grid).stage_count());
    }
}

#[test]
fn offset_circuit_starts_no_earlier() {
    let grid = GridSpec::new(5, 5);
    let a = Circuit::from_pairs("a", 2, &[(0, 1), (0, 1)]).unwrap();
    let b = Circuit::from_pairs("b", 2, &[(0, 1)]).unwrap();
    let jobs = [ArrayJob { circuit: &a, start_offset: 0 }, ArrayJob { circuit: &b, start_offset: 3 }];
    let run = compile_on_array(&jobs, grid, &Budget::unlimited(), &CompileOptions::default()).unwrap();
    assert_eq!(run.schedules[1].gate_stage, vec![3]);
    assert_eq!(run.stage_count(), 4);
    assert!(validate_joint(&run.occupancy).is_empty());
}
