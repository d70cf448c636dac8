use proptest::prelude::*;
use zne_core::mitigation::{
    average_twirl_instances, bootstrap, corrected_expectation, extrapolate, readout_mitigate, InstanceEstimate,
    StretchSeries,
};
use zne_core::noise::{apply_readout_confusion, Confusion};
use zne_core::pauli::{Pauli, PauliString};
use zne_core::rng::rng_from;
use zne_core::sim::{sample_counts, Counts};

fn stretch_points(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, n).prop_map(|gaps| {
        let mut c = 1.0;
        gaps.iter()
            .map(|g| {
                let v = c;
                c += g;
                v
            })
            .collect()
    })
}

fn confusion() -> impl Strategy<Value = Confusion> {
    (0.0f64..0.1, 0.0f64..0.1).prop_map(|(a, b)| Confusion::from_flips(a, b))
}

proptest! {
    #[test]
    fn linear_two_point_identity(cs in stretch_points(2), y1 in -1.0f64..1.0, y2 in -1.0f64..1.0) {
        let m = extrapolate(&StretchSeries::exact(&cs, &[y1, y2]).unwrap(), 1).unwrap();
        let want = y1 - cs[0] * (y2 - y1) / (cs[1] - cs[0]);
        prop_assert!((m.estimate - want).abs() < 1e-10 * (1.0 + want.abs()));
    }

    #[test]
    fn richardson_recovers_polynomials(order in 1usize..=3, coeffs in prop::collection::vec(-1.0f64..1.0, 4),
                                       cs in stretch_points(4)) {
        let cs = &cs[..order + 1];
        let f = |c: f64| (0..=order).map(|k| coeffs[k] * c.powi(k as i32)).sum::<f64>();
        let ys: Vec<f64> = cs.iter().map(|&c| f(c)).collect();
        let m = extrapolate(&StretchSeries::exact(cs, &ys).unwrap(), order).unwrap();
        prop_assert!((m.estimate - coeffs[0]).abs() < 1e-10);
    }

    #[test]
    fn least_squares_recovers_polynomials(order in 1usize..=2, coeffs in prop::collection::vec(-1.0f64..1.0, 3),
                                          cs in stretch_points(5)) {
        let f = |c: f64| (0..=order).map(|k| coeffs[k] * c.powi(k as i32)).sum::<f64>();
        let ys: Vec<f64> = cs.iter().map(|&c| f(c)).collect();
        let m = extrapolate(&StretchSeries::exact(&cs, &ys).unwrap(), order).unwrap();
        prop_assert!((m.estimate - coeffs[0]).abs() < 1e-8);
    }

    #[test]
    fn readout_round_trip(raw in prop::collection::vec(0.0f64..1.0, 16), conf in prop::collection::vec(confusion(), 4)) {
        let s: f64 = raw.iter().sum::<f64>().max(1e-9);
        let p: Vec<f64> = raw.iter().map(|x| x / s).collect();
        let noisy = apply_readout_confusion(&p, &conf).unwrap();
        let back = readout_mitigate(&noisy, &conf).unwrap();
        for (a, b) in p.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pooled_mean_lies_between_instances(vals in prop::collection::vec((-1.0f64..1.0, 1u64..1000), 1..8)) {
        let items: Vec<InstanceEstimate> = vals.iter().map(|&(value, shots)| InstanceEstimate { value, stderr: 0.01, shots }).collect();
        let p = average_twirl_instances(&items).unwrap();
        let lo = vals.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
        let hi = vals.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(p.value >= lo - 1e-12 && p.value <= hi + 1e-12);
    }
}

fn sampled(probs: &[f64], shots: u64, seed: u64) -> Counts {
    let mut c = Counts::new(vec![0, 1, 2, 3], vec![Pauli::Z; 4], seed);
    for (o, k) in sample_counts(probs, shots, &mut rng_from(seed, &[])) {
        c.record(o, k);
    }
    c
}

#[test]
fn corrected_expectation_is_within_binomial_error() {
    let truth = [
        0.3, 0.05, 0.1, 0.02, 0.08, 0.02, 0.03, 0.1, 0.05, 0.05, 0.04, 0.01, 0.02, 0.03, 0.05, 0.05,
    ];
    let conf = [
        Confusion::from_flips(0.02, 0.05),
        Confusion::from_flips(0.01, 0.03),
        Confusion::from_flips(0.04, 0.04),
        Confusion::from_flips(0.0, 0.08),
    ];
    let noisy = apply_readout_confusion(&truth, &conf).unwrap();
    let shots = 100_000;
    let counts = sampled(&noisy, shots, 99);
    for q in 0..4 {
        let p = PauliString::on(4, &[q], Pauli::Z);
        let exact: f64 = truth
            .iter()
            .enumerate()
            .map(|(i, v)| if i >> q & 1 == 0 { *v } else { -*v })
            .sum();
        let est = corrected_expectation(&counts, &conf, &p).unwrap();
        let a = conf[q].0;
        let gain = a[0][0] - a[0][1];
        let sigma = ((1.0 - exact * exact) / shots as f64).sqrt() / gain;
        assert!((est - exact).abs() < 5.0 * sigma, "qubit {q}: {est} vs {exact}");
    }
}

#[test]
fn bootstrap_is_deterministic() {
    let counts = sampled(&[1.0 / 16.0; 16], 5000, 1);
    let z = PauliString::on(4, &[0, 1], Pauli::Z);
    let run = |seed| bootstrap(std::slice::from_ref(&counts), 50, seed, |s| s[0].expectation(&z)).unwrap();
    assert_eq!(run(7), run(7));
    assert_ne!(run(7), run(8));
    let r = run(7);
    let sigma = (1.0f64 / 5000.0).sqrt();
    assert!(r.std() > 0.5 * sigma && r.std() < 1.5 * sigma);
}
