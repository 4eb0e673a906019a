use acma_core::{compose, make_qam, Complex64, OffsetVector, SystemConfig};
use proptest::prelude::*;
use std::f64::consts::TAU;

fn order() -> impl Strategy<Value = u32> {
    prop_oneof![Just(4u32), Just(16u32)]
}

/// Up to three users, random split and offsets, total power in [0.1, 10].
fn system() -> impl Strategy<Value = (SystemConfig, Vec<f64>)> {
    (1usize..=3)
        .prop_flat_map(|k| {
            (
                prop::collection::vec(order(), k),
                prop::collection::vec(0.01f64..1.0, k),
                prop::collection::vec(0.0..TAU, k),
                0.1f64..10.0,
            )
        })
        .prop_map(|(m, raw, d, p)| {
            let s: f64 = raw.iter().sum();
            let a = raw.iter().map(|x| x / s).collect();
            (SystemConfig::new(m, a, p).unwrap(), d)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mean_energy_equals_total_power((c, d) in system()) {
        let comp = compose(&c, &OffsetVector::new(d).unwrap()).unwrap();
        let mean = comp.points().iter().map(|s| s.norm_sqr()).sum::<f64>() / comp.len() as f64;
        prop_assert!((mean - c.total_power()).abs() <= 1e-9 * c.total_power().max(1.0));
    }

    #[test]
    fn common_offset_rotates_every_point((c, d) in system(), shift in 0.0..TAU) {
        let base = OffsetVector::new(d).unwrap();
        let a = compose(&c, &base).unwrap();
        let b = compose(&c, &base.shifted(shift).unwrap()).unwrap();
        let rot = Complex64::from_polar(1.0, shift);
        for (p, q) in a.points().iter().zip(b.points()) {
            prop_assert!((p * rot - q).norm() <= 1e-12);
        }
    }

    #[test]
    fn labels_reconstruct_points((c, d) in system()) {
        let comp = compose(&c, &OffsetVector::new(d.clone()).unwrap()).unwrap();
        let alphabets: Vec<_> = c.mod_orders().iter().map(|&m| make_qam(m).unwrap()).collect();
        prop_assert_eq!(comp.len(), c.mod_orders().iter().map(|&m| m as usize).product::<usize>());
        let mut seen = std::collections::HashSet::new();
        for (i, label) in comp.labels().enumerate() {
            let s: Complex64 = label
                .iter()
                .enumerate()
                .map(|(k, &m)| alphabets[k].point(m) * Complex64::from_polar(c.amplitude(k), d[k]))
                .sum();
            prop_assert!((s - comp.points()[i]).norm() <= 1e-12);
            prop_assert_eq!(comp.index_of(c.mod_orders(), label), i);
            prop_assert!(seen.insert(label.to_vec()));
        }
    }
}

#[test]
fn qam_alphabets_have_unit_energy_and_gray_neighbours() {
    for m in [4u32, 16, 64, 256] {
        let q = make_qam(m).unwrap();
        let e = q.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / m as f64;
        assert!((e - 1.0).abs() < 1e-12, "{m}-QAM energy {e}");
        let d2 = 6.0 / (m as f64 - 1.0);
        for i in 0..q.len() {
            for j in 0..q.len() {
                if ((q.point(i) - q.point(j)).norm_sqr() - d2).abs() < 1e-9 {
                    assert_eq!((i ^ j).count_ones(), 1, "{m}-QAM {i} vs {j}");
                }
            }
        }
    }
}
