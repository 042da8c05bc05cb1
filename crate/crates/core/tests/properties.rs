use proptest::prelude::*;
use spce::cli::{format_events, parse_events};
use spce::estimators::chsh_value;
use spce::geometry::{sample_cap, CapSpec, Direction};
use spce::models::{quadrature_correlations, BellLinearModel, Spin};
use spce::rng::seeded;
use spce::simulate::{match_coincidences, EventRecord, EventStreams, Side};
use spce::stats::{
    chi2_homogeneity, holm_adjust, normal_scores_test, runs_test, segment_by_time, wmw_test, CategoricalSeries,
};

fn direction() -> impl Strategy<Value = Direction> {
    (0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU).prop_map(|(t, p)| Direction::from_spherical(t, p))
}

fn stream(side: Side) -> impl Strategy<Value = Vec<EventRecord>> {
    prop::collection::vec((0u64..5_000, 1u8..=2, any::<bool>()), 0..60).prop_map(move |raw| {
        let mut t = 0;
        raw.into_iter()
            .map(|(gap, setting, up)| {
                t += gap;
                EventRecord {
                    time_ns: t,
                    side,
                    setting,
                    outcome: if up { Spin::Up } else { Spin::Down },
                }
            })
            .collect()
    })
}

fn small_sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0u8..4).prop_map(f64::from), 1..8)
}

proptest! {
    #[test]
    fn directions_are_unit(d in direction(), x in -5.0..5.0f64, y in -5.0..5.0f64, z in 0.1..5.0f64) {
        prop_assert!(d.is_unit());
        prop_assert!((Direction::new(x, y, z).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cap_samples_stay_in_cap(c in direction(), eps in 0.0..=2.0f64, seed in any::<u64>()) {
        let cap = CapSpec::new(c, eps).unwrap();
        let mut rng = seeded(seed);
        for _ in 0..50 {
            let d = sample_cap(&cap, &mut rng);
            prop_assert!(d.is_unit());
            prop_assert!(cap.contains(&d));
        }
    }

    #[test]
    fn rank_tests_are_valid_and_symmetric(x in small_sample(), y in small_sample()) {
        for test in [wmw_test, normal_scores_test] {
            match (test(&x, &y, 0.05), test(&y, &x, 0.05)) {
                (Ok(a), Ok(b)) => {
                    prop_assert!((0.0..=1.0).contains(&a.p_value));
                    prop_assert!((a.p_value - b.p_value).abs() < 1e-9);
                }
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "asymmetric failure"),
            }
        }
    }

    #[test]
    fn runs_and_chi2_p_in_unit_interval(seq in prop::collection::vec(any::<bool>(), 2..80),
                                         rows in prop::collection::vec(prop::collection::vec(0u64..30, 3), 2..5)) {
        if let Ok(r) = runs_test(&seq, 0.05) {
            prop_assert!((0.0..=1.0).contains(&r.p_value));
        }
        if let Ok(r) = chi2_homogeneity(&rows, 0.05) {
            prop_assert!((0.0..=1.0).contains(&r.p_value));
        }
    }

    #[test]
    fn segments_concatenate_to_input(gaps in prop::collection::vec(0u64..1000, 1..200), width in 1u64..5000) {
        let ts: Vec<u64> = gaps.iter().scan(0, |t, g| { *t += g; Some(*t) }).collect();
        let values: Vec<u32> = (0..ts.len() as u32).map(|i| i % 3).collect();
        let s = CategoricalSeries::with_timestamps(values, ts.clone(), 3).unwrap();
        let segs = segment_by_time(&s, width).unwrap();
        let joined: Vec<u64> = segs.iter().flat_map(|g| g.timestamps().unwrap().to_vec()).collect();
        prop_assert_eq!(joined, ts.clone());
        for g in &segs {
            let t = g.timestamps().unwrap();
            prop_assert!(!t.is_empty());
            prop_assert_eq!((t[0] - ts[0]) / width, (t[t.len() - 1] - ts[0]) / width);
        }
    }

    #[test]
    fn holm_never_lowers_p(p in prop::collection::vec(0.0..=1.0f64, 0..30)) {
        let adj = holm_adjust(&p);
        prop_assert_eq!(adj.len(), p.len());
        for (a, r) in adj.iter().zip(&p) {
            prop_assert!(a >= r && *a <= 1.0);
        }
        for i in 0..p.len() {
            for j in 0..p.len() {
                if p[i] < p[j] {
                    prop_assert!(adj[i] <= adj[j]);
                }
            }
        }
    }

    #[test]
    fn matching_conserves_and_respects_window(a in stream(Side::A), b in stream(Side::B), w in 0u64..3000) {
        let m = match_coincidences(&a, &b, w).unwrap();
        prop_assert_eq!(m.pairs.len() as u64 + m.n_unmatched_a(), a.len() as u64);
        prop_assert_eq!(m.pairs.len() as u64 + m.n_unmatched_b(), b.len() as u64);
        for (ea, eb) in &m.pairs {
            prop_assert!(ea.time_ns.abs_diff(eb.time_ns) <= w);
        }
        for p in m.pairs.windows(2) {
            prop_assert!(p[0].0.time_ns <= p[1].0.time_ns && p[0].1.time_ns <= p[1].1.time_ns);
        }
    }

    #[test]
    fn events_round_trip(a in stream(Side::A), b in stream(Side::B)) {
        let streams = EventStreams { a, b };
        let text = format_events(&streams);
        let back = parse_events(&text, "mem").unwrap();
        prop_assert_eq!(&back, &streams);
        prop_assert_eq!(format_events(&back), text);
    }

    #[test]
    fn chsh_value_bounded(e in prop::array::uniform4(-1.0..=1.0f64)) {
        prop_assert!(chsh_value(e[0], e[1], e[2], e[3]).abs() <= 4.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn local_model_never_exceeds_two(a in direction(), a2 in direction(), b in direction(), b2 in direction()) {
        let e = quadrature_correlations(&BellLinearModel, &[(a, b), (a, b2), (a2, b2), (a2, b)], 40);
        prop_assert!(chsh_value(e[0], e[1], e[2], e[3]).abs() <= 2.0 + 1e-9);
    }
}
