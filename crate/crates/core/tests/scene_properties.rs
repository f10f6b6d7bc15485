//! Property tests for the scene invariants: random mutation sequences keep
//! every accepted state valid, acceptance agrees with the collision check,
//! overlap is symmetric, and place/remove compose to identity.

use proptest::prelude::*;
use tidytable_core::scene::{overlaps, ObjectSpec, Placement, SceneState};

#[derive(Debug, Clone)]
enum Op {
    Place { k: u32, x: f64, y: f64 },
    Remove { k: u32 },
}

fn op_strategy() -> impl Strategy<Value = Op> {
    prop_oneof![
        3 => (0u32..12, 0.0f64..1.2, 0.0f64..0.8)
            .prop_map(|(k, x, y)| Op::Place { k, x, y }),
        1 => (0u32..12).prop_map(|k| Op::Remove { k }),
    ]
}

fn object(k: u32) -> ObjectSpec {
    let category = if k % 2 == 0 { "can" } else { "fork" };
    ObjectSpec::new(format!("obj_{k}"), category, 0.06 + 0.01 * f64::from(k % 3), 0.06).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn random_mutation_sequences_keep_invariants(ops in proptest::collection::vec(op_strategy(), 0..40)) {
        let mut scene = SceneState::new(1.2, 0.8).unwrap();
        for op in ops {
            match op {
                Op::Place { k, x, y } => {
                    let obj = object(k);
                    // Acceptance must agree with the collision check.
                    let free = scene.collision_free(&obj, x, y);
                    match scene.place(&obj, x, y) {
                        Ok(next) => {
                            prop_assert!(free, "place accepted a colliding position");
                            next.validate().unwrap();
                            scene = next;
                        }
                        Err(_) => prop_assert!(!free, "place rejected a free position"),
                    }
                }
                Op::Remove { k } => {
                    let id = format!("obj_{k}");
                    let present = scene.get(&id).is_some();
                    match scene.remove(&id) {
                        Ok(next) => {
                            prop_assert!(present);
                            next.validate().unwrap();
                            scene = next;
                        }
                        Err(_) => prop_assert!(!present),
                    }
                }
            }
        }
    }

    #[test]
    fn overlap_is_symmetric(
        (ax, ay, bx, by) in (0.1f64..1.1, 0.1f64..0.7, 0.1f64..1.1, 0.1f64..0.7),
        (aw, ad, bw, bd) in (0.01f64..0.3, 0.01f64..0.3, 0.01f64..0.3, 0.01f64..0.3),
    ) {
        let a = Placement { object: ObjectSpec::new("obj_0", "can", aw, ad).unwrap(), x: ax, y: ay };
        let b = Placement { object: ObjectSpec::new("obj_1", "can", bw, bd).unwrap(), x: bx, y: by };
        prop_assert_eq!(overlaps(&a, &b), overlaps(&b, &a));
    }

    #[test]
    fn place_then_remove_is_identity(
        base_ops in proptest::collection::vec(op_strategy(), 0..12),
        x in 0.0f64..1.2,
        y in 0.0f64..0.8,
    ) {
        let mut scene = SceneState::new(1.2, 0.8).unwrap();
        for op in base_ops {
            if let Op::Place { k, x, y } = op {
                if let Ok(next) = scene.place(&object(k), x, y) {
                    scene = next;
                }
            }
        }
        // A fresh object not in the base set keeps the check clean.
        let obj = ObjectSpec::new("obj_20", "pen", 0.05, 0.05).unwrap();
        if let Ok(placed) = scene.place(&obj, x, y) {
            let removed = placed.remove("obj_20").unwrap();
            prop_assert_eq!(removed, scene);
        }
    }
}
