use acma_core::analytic::square_qam_ser;
use acma_core::channel::{ChannelSpec, Fading};
use acma_core::report::{write_constellation_csv, write_results_csv, write_sweep_csv, write_throughput_csv};
use acma_core::simulator::with_workers;
use acma_core::{
    build_lookup, compose, run_alpha_sweep, run_ser, sweep_offsets, throughput, ExperimentSpec,
    LookupTable, OffsetVector, Scheme, SearchGrid, SystemConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn table() -> &'static LookupTable {
    static T: OnceLock<LookupTable> = OnceLock::new();
    T.get_or_init(|| build_lookup(&[vec![16, 4], vec![4, 4]], &SearchGrid::harmonic(20).unwrap(), 20).unwrap())
}

fn spec(scheme: Scheme, snr: Vec<f64>) -> ExperimentSpec {
    let c = SystemConfig::new(vec![16, 4], vec![0.35, 0.65], 1.0).unwrap();
    ExperimentSpec {
        symbols_per_point: 10_000,
        min_errors: 20,
        seed: 5,
        ..ExperimentSpec::new(scheme, c, ChannelSpec::rayleigh(0.0, 1), snr)
    }
}

#[test]
fn results_are_bit_identical_across_runs_and_workers() {
    let s = spec(Scheme::PdNoma, vec![10.0, 25.0]);
    let a = with_workers(1, || run_ser(&s, table())).unwrap().unwrap();
    let b = with_workers(4, || run_ser(&s, table())).unwrap().unwrap();
    let c = run_ser(&s, table()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    let other = run_ser(&ExperimentSpec { seed: 6, ..s }, table()).unwrap();
    assert_ne!(a, other);
}

#[test]
fn tallies_are_consistent() {
    for scheme in [Scheme::Acma, Scheme::PdNoma, Scheme::Tdma, Scheme::SingleUser { order: 16 }] {
        let r = run_ser(&spec(scheme, vec![0.0, 20.0]), table()).unwrap();
        for p in &r.points {
            for t in p.users.iter().chain(std::iter::once(&p.composite)) {
                assert!(t.errors <= t.trials);
                assert!(t.trials >= 10_000 && t.trials % 1000 == 0);
                assert_eq!(t.ser(), t.errors as f64 / t.trials as f64);
            }
            assert!(p.composite.errors >= p.users.iter().map(|u| u.errors).max().unwrap());
        }
        let th = throughput(&r);
        for p in &th.points {
            assert!(p.omega >= 0.0 && p.omega <= 8.0);
        }
    }
}

#[test]
fn acma_ser_decreases_with_snr() {
    let r = run_ser(&spec(Scheme::Acma, vec![10.0, 20.0, 30.0, 40.0]), table()).unwrap();
    for k in 0..2 {
        for w in r.points.windows(2) {
            let (a, b) = (w[0].users[k], w[1].users[k]);
            assert!(b.ser() <= a.ser() + 3.0 * (a.ci_halfwidth().hypot(b.ci_halfwidth())));
        }
    }
}

#[test]
fn single_user_rayleigh_matches_closed_form() {
    let c = SystemConfig::new(vec![4], vec![1.0], 1.0).unwrap();
    for antennas in [1, 2] {
        let s = ExperimentSpec {
            symbols_per_point: 100_000,
            seed: 8,
            ..ExperimentSpec::new(
                Scheme::SingleUser { order: 4 },
                c.clone(),
                ChannelSpec::rayleigh(0.0, antennas),
                vec![5.0, 15.0],
            )
        };
        let r = run_ser(&s, table()).unwrap();
        for p in &r.points {
            let exact = square_qam_ser(4, 10f64.powf(p.snr_db / 10.0), Fading::Rayleigh, antennas);
            let t = p.users[0];
            assert!((t.ser() - exact).abs() <= 3.0 * t.ci_halfwidth(), "L={antennas} {} dB", p.snr_db);
        }
    }
}

#[test]
fn block_fading_is_accepted_and_deterministic() {
    let mut s = spec(Scheme::Acma, vec![20.0]);
    s.channel.coherence = 10;
    let a = run_ser(&s, table()).unwrap();
    assert_eq!(a, run_ser(&s, table()).unwrap());
    s.channel.coherence = 7;
    assert!(run_ser(&s, table()).is_err());
}

#[test]
fn invalid_specs_are_rejected() {
    let mut s = spec(Scheme::Acma, vec![20.0, 10.0]);
    assert!(run_ser(&s, table()).is_err());
    s.snr_grid_db = vec![];
    assert!(run_ser(&s, table()).is_err());
    let mut s = spec(Scheme::Acma, vec![20.0]);
    s.symbols_per_point = 5000;
    assert!(run_ser(&s, table()).is_err());
    let c = SystemConfig::new(vec![16, 16], vec![0.5, 0.5], 1.0).unwrap();
    let s = ExperimentSpec::new(Scheme::Acma, c, ChannelSpec::rayleigh(0.0, 1), vec![20.0]);
    assert!(run_ser(&s, table()).is_err(), "missing lookup entry must be reported");
}

#[test]
fn alpha_sweep_covers_grid() {
    let mut s = spec(Scheme::Acma, vec![30.0]);
    s.alpha_grid = Some(vec![0.1, 0.35, 0.5]);
    let r = run_alpha_sweep(&s, table()).unwrap();
    assert_eq!(r.points.len(), 3);
    let alphas: Vec<f64> = r.points.iter().map(|p| p.alpha[0]).collect();
    assert_eq!(alphas, vec![0.1, 0.35, 0.5]);
}

#[test]
fn channel_draws_are_reproducible() {
    let ch = ChannelSpec::rayleigh(20.0, 2);
    let draw = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..100).flat_map(|_| ch.draw_channel(1, &mut rng)).collect::<Vec<_>>()
    };
    assert_eq!(draw(3), draw(3));
    assert_ne!(draw(3), draw(4));
}

#[test]
fn csv_writers_emit_expected_headers() {
    let r = run_ser(&spec(Scheme::Acma, vec![20.0]), table()).unwrap();
    let mut buf = Vec::new();
    write_results_csv(&mut buf, &r, true).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scheme,K,mods,alpha1,alpha2,ratio_db,antennas,snr_db,user,ser,errors,trials,ci_halfwidth,omega"
    );
    assert_eq!(lines.count(), 3);

    let mut buf = Vec::new();
    write_throughput_csv(&mut buf, &r, &throughput(&r), true).unwrap();
    assert!(String::from_utf8(buf).unwrap().lines().count() >= 2);

    let c = SystemConfig::new(vec![16, 4], vec![0.35, 0.65], 1.0).unwrap();
    let mut buf = Vec::new();
    write_constellation_csv(&mut buf, &compose(&c, &OffsetVector::zeros(2)).unwrap()).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("label_user1,label_user2,re,im"));
    assert_eq!(text.lines().count(), 65);

    let rows = sweep_offsets(&[16, 4], &[0.2, 0.35], &SearchGrid::harmonic(20).unwrap()).unwrap();
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, &rows).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("alpha1,offset_rad,offset_deg,d2min"));
}
