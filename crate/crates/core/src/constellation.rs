//! Square QAM alphabets and K-user composite constellations.
//!
//! Index mapping: for an order `M` with `m = sqrt(M)` levels per dimension,
//! symbol index `i` splits row-major into an in-phase code `i / m` and a
//! quadrature code `i % m`. Each code is Gray-decoded to a level position
//! `p` and mapped to the amplitude `2p + 1 - m`, so neighbouring levels differ
//! in a single bit. Points are then scaled to unit mean energy.

use num_complex::Complex64;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::optimizer::OffsetVector;

/// QAM orders accepted everywhere in the crate.
pub const SUPPORTED_ORDERS: [u32; 4] = [4, 16, 64, 256];

/// A unit-energy square M-QAM alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: u32,
    points: Vec<Complex64>,
}

impl Constellation {
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.order.trailing_zeros()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn gray_decode(mut code: u32) -> u32 {
    let mut shift = code >> 1;
    while shift != 0 {
        code ^= shift;
        shift >>= 1;
    }
    code
}

/// Builds the Gray-mapped square QAM alphabet of the given order.
pub fn make_qam(order: u32) -> Result<Constellation> {
    if !SUPPORTED_ORDERS.contains(&order) {
        return Err(Error::invalid(
            "order",
            format!("unsupported QAM order {order}; expected one of {SUPPORTED_ORDERS:?}"),
        ));
    }
    let side = 1u32 << (order.trailing_zeros() / 2);
    // mean of i^2 + q^2 over the odd-integer lattice is 2(M - 1)/3
    let scale = (3.0 / (2.0 * (order as f64 - 1.0))).sqrt();
    let level = |code: u32| (2 * gray_decode(code) + 1) as f64 - side as f64;
    let points = (0..order)
        .map(|i| Complex64::new(level(i / side), level(i % side)) * scale)
        .collect();
    Ok(Constellation { order, points })
}

/// All `prod(M_k)` superposed points together with the symbol tuple that
/// generates each of them.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeConstellation {
    points: Vec<Complex64>,
    labels: Vec<usize>,
    num_users: usize,
    offsets: OffsetVector,
    /// Label index restricted to powered users; present only when some
    /// user has zero power.
    active_keys: Option<Vec<usize>>,
}

impl CompositeConstellation {
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    /// Symbol indices (one per user) that produce point `i`.
    pub fn label(&self, i: usize) -> &[usize] {
        &self.labels[i * self.num_users..(i + 1) * self.num_users]
    }

    pub fn labels(&self) -> impl Iterator<Item = &[usize]> {
        self.labels.chunks_exact(self.num_users)
    }

    pub fn offsets(&self) -> &OffsetVector {
        &self.offsets
    }

    pub(crate) fn active_keys(&self) -> Option<&[usize]> {
        self.active_keys.as_deref()
    }

    /// Position of a label tuple in the mixed-radix enumeration (user 1 slowest).
    pub fn index_of(&self, orders: &[u32], indices: &[usize]) -> usize {
        indices
            .iter()
            .zip(orders)
            .fold(0, |acc, (&m, &order)| acc * order as usize + m)
    }
}

/// Per-user rotated and scaled alphabets `sqrt(alpha_k P_T) x e^{j delta_k}`.
pub(crate) fn user_alphabets(config: &SystemConfig, offsets: &[f64]) -> Vec<Vec<Complex64>> {
    config
        .mod_orders()
        .iter()
        .zip(offsets)
        .enumerate()
        .map(|(k, (&order, &delta))| {
            let rot = Complex64::from_polar(config.amplitude(k), delta);
            make_qam(order)
                .expect("validated order")
                .points
                .into_iter()
                .map(|x| x * rot)
                .collect()
        })
        .collect()
}

/// Superposes all users' alphabets. Each user's symbol is rotated by its
/// offset as a whole, so the alphabet shape is preserved.
pub fn compose(config: &SystemConfig, offsets: &OffsetVector) -> Result<CompositeConstellation> {
    config.validate()?;
    let k = config.num_users();
    if offsets.len() != k {
        return Err(Error::invalid(
            "offsets",
            format!("expected {k} offsets, got {}", offsets.len()),
        ));
    }
    let alphabets = user_alphabets(config, offsets.as_slice());
    let total = config.composite_size();
    let mut points = Vec::with_capacity(total);
    let mut labels = Vec::with_capacity(total * k);
    let mut tuple = vec![0usize; k];
    for _ in 0..total {
        points.push(tuple.iter().zip(&alphabets).map(|(&m, a)| a[m]).sum());
        labels.extend_from_slice(&tuple);
        // odometer increment, last user fastest
        for u in (0..k).rev() {
            tuple[u] += 1;
            if tuple[u] < alphabets[u].len() {
                break;
            }
            tuple[u] = 0;
        }
    }
    let active: Vec<bool> = (0..k).map(|u| config.amplitude(u) > 0.0).collect();
    let active_keys = active.contains(&false).then(|| {
        labels
            .chunks_exact(k)
            .map(|l| {
                l.iter()
                    .zip(config.mod_orders())
                    .zip(&active)
                    .filter(|(_, &on)| on)
                    .fold(0, |acc, ((&m, &order), _)| acc * order as usize + m)
            })
            .collect()
    });
    Ok(CompositeConstellation {
        points,
        labels,
        num_users: k,
        offsets: offsets.clone(),
        active_keys,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn min_pair_distance(points: &[Complex64]) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in points.iter().enumerate() {
            for b in &points[i + 1..] {
                best = best.min((a - b).norm_sqr());
            }
        }
        best
    }

    #[test]
    fn qpsk_points() {
        let c = make_qam(4).unwrap();
        for p in c.points() {
            assert!((p.re.abs() - FRAC_1_SQRT_2).abs() < 1e-15);
            assert!((p.im.abs() - FRAC_1_SQRT_2).abs() < 1e-15);
        }
        assert_eq!(c.bits_per_symbol(), 2);
    }

    #[test]
    fn qam16_levels_and_distance() {
        let c = make_qam(16).unwrap();
        let s = 10f64.sqrt();
        for p in c.points() {
            let lv = (p.re * s).abs();
            assert!((lv - 1.0).abs() < 1e-12 || (lv - 3.0).abs() < 1e-12);
        }
        // 120 pairs enumerated
        assert!((min_pair_distance(c.points()) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn unsupported_orders_rejected() {
        for order in [0, 2, 8, 32, 128, 1024] {
            assert!(matches!(
                make_qam(order),
                Err(Error::InvalidParameter { field: "order", .. })
            ));
        }
    }

    #[test]
    fn alphabet_invariants() {
        for order in SUPPORTED_ORDERS {
            let c = make_qam(order).unwrap();
            assert_eq!(c.len(), order as usize);
            let energy: f64 =
                c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / order as f64;
            assert!((energy - 1.0).abs() < 1e-12, "order {order}");
            let has = |q: Complex64| c.points().iter().any(|p| (p - q).norm() < 1e-12);
            for &p in c.points() {
                assert!(has(-p) && has(p.conj()));
            }
            assert!(min_pair_distance(c.points()) > 1e-6);
        }
    }

    #[test]
    fn gray_neighbours_differ_in_one_bit() {
        let c = make_qam(64).unwrap();
        let d2 = 6.0 / 63.0;
        for i in 0..64usize {
            for j in 0..64usize {
                if ((c.point(i) - c.point(j)).norm_sqr() - d2).abs() < 1e-9 {
                    assert_eq!((i ^ j).count_ones(), 1, "{i} vs {j}");
                }
            }
        }
    }

    #[test]
    fn single_user_composite_is_identity() {
        let cfg = SystemConfig::new(vec![4], vec![1.0], 1.0).unwrap();
        let comp = compose(&cfg, &OffsetVector::zeros(1)).unwrap();
        assert_eq!(comp.points(), make_qam(4).unwrap().points());
    }

    #[test]
    fn two_qpsk_users_collide_without_rotation() {
        let cfg = SystemConfig::new(vec![4, 4], vec![0.5, 0.5], 1.0).unwrap();
        let comp = compose(&cfg, &OffsetVector::zeros(2)).unwrap();
        assert_eq!(comp.len(), 16);
        let zeros = comp.points().iter().filter(|p| p.norm() < 1e-15).count();
        assert!(zeros >= 2);
    }

    #[test]
    fn labels_cover_cartesian_product_once() {
        let cfg = SystemConfig::new(vec![16, 4], vec![0.35, 0.65], 1.0).unwrap();
        let comp = compose(&cfg, &OffsetVector::new(vec![2.0 * PI / 3.0, 0.0]).unwrap()).unwrap();
        assert_eq!(comp.len(), 64);
        let mut seen = [false; 64];
        for (i, l) in comp.labels().enumerate() {
            let idx = comp.index_of(cfg.mod_orders(), l);
            assert_eq!(idx, i);
            assert!(!seen[idx]);
            seen[idx] = true;
        }
        assert!(min_pair_distance(comp.points()) > 0.0);
    }

    #[test]
    fn wrong_offset_length_rejected() {
        let cfg = SystemConfig::new(vec![4, 4], vec![0.5, 0.5], 1.0).unwrap();
        assert!(compose(&cfg, &OffsetVector::zeros(3)).is_err());
    }
}
