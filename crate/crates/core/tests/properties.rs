//! Property-based invariants over random boxes, weights and wirings.

mod common;

use nsbox_core::boxes::{NsBox, PlaneCoords, TOL_EXACT, TOL_FIT};
use nsbox_core::wiring::{compose, PartyWiring, ProtocolWiring, PARTY_WIRING_COUNT};
use proptest::prelude::*;

fn vertex_weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|mut w| {
        let total: f64 = w.iter().sum();
        for x in &mut w {
            *x /= total;
        }
        let drift: f64 = w.iter().sum::<f64>() - 1.0;
        w[0] -= drift;
        w
    })
}

fn ns_box() -> impl Strategy<Value = NsBox> {
    vertex_weights(24).prop_map(|w| {
        let vertices: Vec<NsBox> = common::local_vertices()
            .into_iter()
            .chain(common::pr_vertices())
            .collect();
        NsBox::mix(&vertices, &w).expect("convex mixture")
    })
}

fn valid_box() -> impl Strategy<Value = NsBox> {
    // validity only requires normalization and positivity, not no-signaling
    prop::collection::vec(0.001f64..1.0, 16).prop_map(|raw| {
        let mut p = [0.0; 16];
        for block in 0..4 {
            let s: f64 = raw[block * 4..block * 4 + 4].iter().sum();
            for k in 0..4 {
                p[block * 4 + k] = raw[block * 4 + k] / s;
            }
            let drift: f64 = p[block * 4..block * 4 + 4].iter().sum::<f64>() - 1.0;
            p[block * 4] -= drift;
        }
        NsBox::from_table(p)
    })
}

fn wiring_id() -> impl Strategy<Value = u16> {
    0..PARTY_WIRING_COUNT as u16
}

fn plane_coords() -> impl Strategy<Value = PlaneCoords> {
    (0.0f64..=1.0, -1.0f64..=1.0)
        .prop_map(|(xi, gamma)| PlaneCoords::new(xi, gamma))
        .prop_filter("valid section point", |c| {
            c.in_constraint_region() && NsBox::from_plane(*c).is_ok()
        })
}

proptest! {
    #[test]
    fn chsh_is_affine_under_mix(a in valid_box(), b in valid_box(), w in -1.0f64..2.0) {
        if let Ok(mixed) = NsBox::mix(&[a, b], &[w, 1.0 - w]) {
            let expect = w * a.chsh() + (1.0 - w) * b.chsh();
            prop_assert!((mixed.chsh() - expect).abs() <= TOL_EXACT);
        }
    }

    #[test]
    fn depolarization_is_idempotent(b in ns_box()) {
        let once = b.depolarize().unwrap();
        let twice = once.depolarize().unwrap();
        prop_assert!(twice.max_abs_diff(&once) <= TOL_EXACT);
        prop_assert!((once.chsh() - b.chsh()).abs() <= TOL_EXACT);
    }

    #[test]
    fn plane_coordinates_round_trip(c in plane_coords()) {
        let back = NsBox::from_plane(c).unwrap().to_plane_coords().unwrap();
        prop_assert!((back.xi - c.xi).abs() <= TOL_FIT);
        prop_assert!((back.gamma - c.gamma).abs() <= TOL_FIT);
    }

    #[test]
    fn compose_preserves_nonsignaling(
        b1 in ns_box(),
        b2 in ns_box(),
        a_id in wiring_id(),
        b_id in wiring_id(),
    ) {
        let w = ProtocolWiring::from_ids(a_id, b_id).unwrap();
        let out = compose(&b1, &b2, &w).unwrap();
        prop_assert!(out.is_valid());
        prop_assert!(out.is_nonsignaling());
    }

    #[test]
    fn wiring_ids_are_bijective(id in wiring_id()) {
        let w = PartyWiring::decode(id).unwrap();
        prop_assert_eq!(w.encode(), id);
    }

    #[test]
    fn serialization_round_trips_bit_exactly(b in ns_box()) {
        let via_json = NsBox::from_json(&b.to_json()).unwrap();
        let via_csv = NsBox::from_csv_line(&b.to_csv_line()).unwrap();
        for ((orig, j), c) in b.table().iter().zip(via_json.table()).zip(via_csv.table()) {
            prop_assert_eq!(orig.to_bits(), j.to_bits());
            prop_assert_eq!(orig.to_bits(), c.to_bits());
        }
    }
}
