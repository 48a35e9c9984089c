use leakrb_core::channel::{
    depolarizing_comp, dilated_error, infidelity_comp_exact, stochastic_error, tune_delta, twirl,
    unitary_error, Channel, ErrorModel,
};
use leakrb_core::clifford::{
    build_extended_set, EntanglerVariant, ExtendedCliffordSet, LeakagePolicy,
};
use leakrb_core::engine::{
    analytic_variance_curve, exhaustive_average, run_protocol, summarize, ProtocolSpec,
    SequenceOptions, VarianceCurve,
};
use leakrb_core::fit::{
    error_per_gate, fit_decay, fit_variance_shape, safe_error_bound, DecayFit, DecaySample,
};
use leakrb_core::rng_from_seed;
use rand::Rng;
use rand_distr::{Distribution, Normal};

fn set1() -> ExtendedCliffordSet {
    build_extended_set(1, LeakagePolicy::Identity, EntanglerVariant::Diagonal).unwrap()
}

fn simulate(
    set: &ExtendedCliffordSet,
    ch: Channel,
    lengths: Vec<usize>,
    k: usize,
    seed: u64,
) -> VarianceCurve {
    let spec = ProtocolSpec {
        lengths,
        sequences_per_length: k,
        master_seed: seed,
        options: SequenceOptions::default(),
    };
    summarize(&run_protocol(set, &ErrorModel::gate_independent(ch), &spec, None).unwrap())
}

fn fit_curve(curve: &VarianceCurve) -> DecayFit {
    let samples: Vec<DecaySample> = curve
        .points
        .iter()
        .map(|p| DecaySample::from_summary(p).unwrap())
        .collect();
    fit_decay(&samples, 3).unwrap()
}

#[test]
fn exhaustive_average_equals_twirl_power() {
    let set = build_extended_set(
        1,
        LeakagePolicy::FixedPhases(vec![1.1]),
        EntanglerVariant::Diagonal,
    )
    .unwrap();
    let ch = dilated_error(3, 3, 0.3, &mut rng_from_seed(1)).unwrap();
    let tw = twirl(&ch, &set).unwrap().matrix;
    let model = ErrorModel::gate_independent(ch);
    let opts = SequenceOptions {
        ideal_inverter: true,
        ..SequenceOptions::default()
    };
    for y in 1..=2 {
        let ex = exhaustive_average(&set, &model, y, &opts).unwrap();
        assert!((ex - tw.survival(0, y)).abs() < 1e-10, "y = {y}");
    }
}

#[test]
fn depolarizing_decay_matches_closed_form() {
    let p = 0.01;
    let fit = fit_curve(&simulate(
        &set1(),
        depolarizing_comp(1, p).unwrap(),
        (1..=20).map(|k| 10 * k).collect(),
        20,
        4,
    ));
    let decay = fit
        .modes
        .iter()
        .find(|m| (m.lambda.re - 1.0).abs() > 1e-6)
        .unwrap();
    assert!((decay.lambda.re - (1.0 - p)).abs() < 1e-3);
    let eps = error_per_gate(&fit).unwrap();
    assert!((eps / (p / 2.0) - 1.0).abs() < 0.05, "{eps}");
}

#[test]
fn small_stochastic_error_is_recovered() {
    let (_, ch) = tune_delta(7.42e-4, 0.05, |d| {
        stochastic_error(3, d, &mut rng_from_seed(11))
    })
    .unwrap();
    let truth = infidelity_comp_exact(&ch);
    let fit = fit_curve(&simulate(
        &set1(),
        ch,
        (1..=30).map(|k| 100 * k).collect(),
        30,
        5,
    ));
    let eps = error_per_gate(&fit).unwrap();
    assert!((eps / truth - 1.0).abs() < 0.1, "{eps} vs {truth}");
}

#[test]
fn variance_curve_has_the_predicted_shape() {
    let (_, ch) = tune_delta(7e-4, 0.05, |d| {
        stochastic_error(3, d, &mut rng_from_seed(12))
    })
    .unwrap();
    let curve = simulate(
        &set1(),
        ch.clone(),
        (1..=30).map(|k| 100 * k).collect(),
        30,
        6,
    );
    assert!(fit_variance_shape(&curve).unwrap().r_squared >= 0.8);
    let ys = vec![100, 500, 1500];
    let mc = simulate(&set1(), ch.clone(), ys.clone(), 600, 7);
    let analytic = analytic_variance_curve(&ch, &set1(), &ys, 0).unwrap();
    for (p, a) in mc.points.iter().zip(&analytic) {
        let ratio = p.variance / a;
        assert!((0.5..=2.0).contains(&ratio), "y = {}: ratio {ratio}", p.y);
    }
}

#[test]
fn analytic_variance_misses_coherent_accumulation() {
    let (_, ch) = tune_delta(7e-4, 0.05, |d| unitary_error(3, d, &mut rng_from_seed(13))).unwrap();
    let ys = vec![500];
    let mc = simulate(&set1(), ch.clone(), ys.clone(), 200, 8);
    let analytic = analytic_variance_curve(&ch, &set1(), &ys, 0).unwrap();
    assert!(mc.points[0].variance > 10.0 * analytic[0]);
}

#[test]
fn variance_scale_vanishes_with_the_error() {
    let ys: Vec<usize> = (1..=20).map(|k| 100 * k).collect();
    let c: Vec<f64> = [0.02, 0.01]
        .iter()
        .map(|&d| {
            let ch = stochastic_error(3, d, &mut rng_from_seed(14)).unwrap();
            let v = analytic_variance_curve(&ch, &set1(), &ys, 0).unwrap();
            let curve = VarianceCurve {
                points: ys
                    .iter()
                    .zip(v)
                    .map(|(&y, variance)| leakrb_core::engine::LengthSummary {
                        y,
                        mean: 0.0,
                        variance,
                        stderr: 0.0,
                        count: 1,
                    })
                    .collect(),
            };
            fit_variance_shape(&curve).unwrap().c
        })
        .collect();
    assert!(c[1] < 0.5 * c[0], "{c:?}");
}

#[test]
fn model_order_selection_is_parsimonious() {
    let truths: [&[(f64, f64)]; 3] = [
        &[(0.95, 0.98)],
        &[(0.5, 1.0), (0.45, 0.98)],
        &[(0.3, 1.0), (0.35, 0.99), (0.3, 0.9)],
    ];
    let noise = Normal::new(0.0, 0.02).unwrap();
    for (m, modes) in truths.iter().enumerate() {
        let mut rng = rng_from_seed(100 + m as u64);
        let hits = (0..100)
            .filter(|_| {
                let samples: Vec<DecaySample> = (0..40)
                    .map(|k| {
                        let y = 1 + 5 * k;
                        let mean: f64 =
                            modes.iter().map(|&(a, l)| a * f64::powi(l, y as i32)).sum();
                        let vals: Vec<f64> =
                            (0..30).map(|_| mean + noise.sample(&mut rng)).collect();
                        let s = leakrb_core::engine::summary_of(y, &vals);
                        DecaySample::new(y, s.mean.clamp(0.0, 1.0), s.stderr, s.count).unwrap()
                    })
                    .collect();
                fit_decay(&samples, 3).unwrap().model_order == m + 1
            })
            .count();
        assert!(hits >= 90, "order {}: {hits}/100", m + 1);
    }
}

#[test]
fn safe_bound_covers_the_true_error() {
    let set = set1();
    let mut rng = rng_from_seed(15);
    for trial in 0..100 {
        let delta = 0.02 + 0.1 * rng.random::<f64>();
        let ch = match trial % 3 {
            0 => unitary_error(3, delta, &mut rng),
            1 => dilated_error(3, 2, delta, &mut rng),
            _ => stochastic_error(3, delta, &mut rng),
        }
        .unwrap();
        let truth = infidelity_comp_exact(&ch);
        let tw = twirl(&ch, &set).unwrap().matrix;
        let prep = [1.0 - 0.02 * rng.random::<f64>(), 0.0, 0.0];
        let prep = [prep[0], 1.0 - prep[0], 0.0];
        let meas = [
            1.0 - 0.02 * rng.random::<f64>(),
            0.01 * rng.random::<f64>(),
            0.0,
        ];
        let step = (0.2 / truth).ceil().max(1.0) as usize;
        let samples: Vec<DecaySample> = (1..=30)
            .map(|k| {
                DecaySample::new(k * step, tw.expectation(&meas, &prep, k * step), 0.0, 1).unwrap()
            })
            .collect();
        let fit = fit_decay(&samples, 3).unwrap();
        let bound = safe_error_bound(&fit, 1).unwrap();
        assert!(
            bound >= truth,
            "trial {trial}: bound {bound} < truth {truth}"
        );
    }
}
