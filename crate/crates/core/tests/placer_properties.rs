use proptest::prelude::*;

use mparray::circuit::LayeredCircuit;
use mparray::placer::{schedule_all, PlacementRequest};

fn request() -> impl Strategy<Value = PlacementRequest> {
    (1usize..=8, 1usize..=3).prop_flat_map(|(cap, arrays)| {
        prop::collection::vec(prop::collection::vec(1..=cap, 1..10), 1..=10).prop_map(move |profiles| PlacementRequest {
            circuits: profiles
                .iter()
                .enumerate()
                .map(|(i, w)| LayeredCircuit::from_widths(format!("c{i}"), w))
                .collect(),
            num_arrays: arrays,
            capacity: cap,
        })
    })
}

proptest! {
    #[test]
    fn every_circuit_lands_once_within_capacity(req in request()) {
        let p = schedule_all(&req).unwrap();
        let mut count = vec![0; req.circuits.len()];
        for (j, tl) in p.arrays.iter().enumerate() {
            prop_assert!(tl.occupancy.iter().all(|&w| w <= req.capacity));
            for a in &tl.assigned {
                count[a.circuit] += 1;
                let slot = p.slots[a.circuit].unwrap();
                prop_assert_eq!((slot.array, slot.start), (j, a.start));
            }
            let mut load = vec![0; tl.occupancy.len()];
            for a in &tl.assigned {
                for (k, w) in req.circuits[a.circuit].width_profile().into_iter().enumerate() {
                    load[a.start + k] += w;
                }
            }
            prop_assert_eq!(&load, &tl.occupancy);
        }
        prop_assert!(count.iter().all(|&c| c == 1));
    }

    #[test]
    fn placement_is_deterministic(req in request()) {
        prop_assert_eq!(schedule_all(&req).unwrap(), schedule_all(&req).unwrap());
    }
}

#[test]
fn too_wide_circuit_is_rejected() {
    let req = PlacementRequest {
        circuits: vec![LayeredCircuit::from_widths("wide", &[1, 5])],
        num_arrays: 2,
        capacity: 4,
    };
    assert!(schedule_all(&req).is_err());
}
