//! Closed-form symbol error rates of square QAM.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::channel::Fading;

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// True for `4, 16, 64, ...`.
pub fn is_square_qam_order(order: u64) -> bool {
    order >= 4 && order.is_power_of_two() && order.trailing_zeros().is_multiple_of(2)
}

/// Minimum squared distance of unit-energy square QAM.
pub fn square_qam_d2min(order: u64) -> f64 {
    6.0 / (order as f64 - 1.0)
}

const CRAIG_INTERVALS: usize = 2000;

/// Composite Simpson rule of `f` over `[a, b]`.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + inner + f(b)) * h / 3.0
}

/// SER of unit-energy square `order`-QAM at mean per-antenna SNR
/// `E_s E|h|^2 / N_0` (linear), with `antennas` branches combined by
/// maximum ratio. Rayleigh branches are i.i.d.
pub fn square_qam_ser(order: u64, snr: f64, fading: Fading, antennas: usize) -> f64 {
    assert!(is_square_qam_order(order), "order {order} is not a square QAM");
    assert!(antennas >= 1);
    let q = 1.0 - 1.0 / (order as f64).sqrt();
    // Q(sqrt(2 g gamma)) is the per-dimension error at SNR gamma
    let g = 1.5 / (order as f64 - 1.0);
    let l = antennas as f64;
    match fading {
        Fading::Awgn => {
            let p = q_function((2.0 * g * snr * l).sqrt());
            4.0 * q * p - 4.0 * q * q * p * p
        }
        Fading::Rayleigh if antennas == 1 => {
            let c = g * snr;
            let mu = (c / (1.0 + c)).sqrt();
            let i1 = 0.5 * (1.0 - mu);
            let i2 = 0.25 * (1.0 - 4.0 * mu / PI * (1.0 / mu).atan());
            4.0 * q * i1 - 4.0 * q * q * i2
        }
        Fading::Rayleigh => {
            let c = g * snr;
            let mgf = |t: f64| {
                let s = t.sin();
                if s == 0.0 {
                    0.0
                } else {
                    (1.0 + c / (s * s)).powf(-l)
                }
            };
            let i1 = simpson(mgf, 0.0, PI / 2.0, CRAIG_INTERVALS) / PI;
            let i2 = simpson(mgf, 0.0, PI / 4.0, CRAIG_INTERVALS) / PI;
            4.0 * q * i1 - 4.0 * q * q * i2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_checks() {
        for m in [4, 16, 64, 256, 1024, 4096] {
            assert!(is_square_qam_order(m));
        }
        for m in [0, 1, 2, 8, 32, 100] {
            assert!(!is_square_qam_order(m));
        }
        assert!((square_qam_d2min(16) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn q_function_values() {
        assert!((q_function(0.0) - 0.5).abs() < 1e-15);
        // Q(3) from tables
        assert!((q_function(3.0) - 1.3498980316301e-3).abs() < 1e-15);
    }

    #[test]
    fn qpsk_awgn_closed_form() {
        // QPSK: 2Q(sqrt(g)) - Q(sqrt(g))^2 with g = SNR
        let snr = 10f64;
        let p = q_function(snr.sqrt());
        let expect = 2.0 * p - p * p;
        assert!((square_qam_ser(4, snr, Fading::Awgn, 1) - expect).abs() < 1e-15);
    }

    /// Averages the AWGN expression over the Gamma(L, snr) density of the
    /// combined SNR with a plain trapezoid rule.
    fn rayleigh_by_quadrature(order: u64, snr: f64, l: usize) -> f64 {
        let fact: f64 = (1..l).map(|i| i as f64).product();
        let pdf = |x: f64| x.powi(l as i32 - 1) * (-x / snr).exp() / (snr.powi(l as i32) * fact);
        let upper = snr * 60.0;
        let n = 400_000;
        let h = upper / n as f64;
        (0..=n)
            .map(|i| {
                let x = i as f64 * h;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * square_qam_ser(order, x, Fading::Awgn, 1) * pdf(x)
            })
            .sum::<f64>()
            * h
    }

    #[test]
    fn rayleigh_matches_quadrature_oracle() {
        for (order, snr_db, l) in [(4, 10.0, 1), (16, 20.0, 1), (256, 35.0, 1), (16, 12.0, 2), (64, 20.0, 2)] {
            let snr = 10f64.powf(snr_db / 10.0);
            let closed = square_qam_ser(order, snr, Fading::Rayleigh, l);
            let oracle = rayleigh_by_quadrature(order, snr, l);
            assert!(
                (closed - oracle).abs() / oracle < 1e-4,
                "M={order} {snr_db} dB L={l}: {closed} vs {oracle}"
            );
        }
    }

    #[test]
    fn craig_branch_agrees_with_closed_form() {
        // the numeric branch evaluated at L=1 must reproduce the closed form
        let order = 64u64;
        let snr = 100.0;
        let q = 1.0 - 1.0 / 8.0;
        let c = 1.5 / 63.0 * snr;
        let mgf = |t: f64| {
            let s = t.sin();
            if s == 0.0 { 0.0 } else { 1.0 / (1.0 + c / (s * s)) }
        };
        let num = 4.0 * q * simpson(mgf, 0.0, PI / 2.0, 2000) / PI
            - 4.0 * q * q * simpson(mgf, 0.0, PI / 4.0, 2000) / PI;
        let closed = square_qam_ser(order, snr, Fading::Rayleigh, 1);
        assert!((num - closed).abs() < 1e-10);
    }

    #[test]
    fn diversity_lowers_ser() {
        let snr = 1000.0;
        assert!(
            square_qam_ser(16, snr, Fading::Rayleigh, 2) < square_qam_ser(16, snr, Fading::Rayleigh, 1)
        );
    }
}
