use dine_core::retrofit::{evaluate, gradients, AutoencoderParams, LossTerms};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-5;

fn instance(seed: u64) -> (AutoencoderParams, Array2<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Array2::from_shape_simple_fn((4, 5), || rng.random_range(-1.0..1.0));
    let mut p = AutoencoderParams::init(4, 3, seed);
    p.b0.iter_mut()
        .for_each(|b| *b = rng.random_range(-0.5..0.5));
    p.b1.iter_mut()
        .for_each(|b| *b = rng.random_range(-0.5..0.5));
    (p, x)
}

fn only(ac: bool, orth: bool, size: bool) -> LossTerms {
    LossTerms { ac, orth, size }
}

/// Central differences over every scalar parameter, compared to the analytic
/// gradient as one flattened vector.
fn relative_error(terms: LossTerms, seed: u64) -> f64 {
    let (params, x) = instance(seed);
    let (_, analytic) = gradients(&params, &x, terms).unwrap();
    let analytic: Vec<f64> = analytic
        .w0
        .iter()
        .chain(analytic.b0.iter())
        .chain(analytic.w1.iter())
        .chain(analytic.b1.iter())
        .copied()
        .collect();

    let total = |p: &AutoencoderParams| evaluate(p, &x, terms).unwrap().total;
    let mut numeric = Vec::with_capacity(analytic.len());
    for tensor in 0..4 {
        let len = match tensor {
            0 => params.w0.len(),
            1 => params.b0.len(),
            2 => params.w1.len(),
            _ => params.b1.len(),
        };
        for i in 0..len {
            let shifted = |delta: f64| {
                let mut p = params.clone();
                let slot = match tensor {
                    0 => &mut p.w0.as_slice_mut().unwrap()[i],
                    1 => &mut p.b0.as_slice_mut().unwrap()[i],
                    2 => &mut p.w1.as_slice_mut().unwrap()[i],
                    _ => &mut p.b1.as_slice_mut().unwrap()[i],
                };
                *slot += delta;
                total(&p)
            };
            numeric.push((shifted(STEP) - shifted(-STEP)) / (2.0 * STEP));
        }
    }
    let diff: f64 = analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| (a - n).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale: f64 = analytic
        .iter()
        .map(|a| a * a)
        .sum::<f64>()
        .sqrt()
        .max(numeric.iter().map(|n| n * n).sum::<f64>().sqrt());
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

#[test]
fn reconstruction_gradient_matches_finite_differences() {
    for seed in 0..3 {
        let e = relative_error(only(true, false, false), seed);
        assert!(e < 1e-4, "seed {seed}: {e}");
    }
}

#[test]
fn orthogonality_gradient_matches_finite_differences() {
    for seed in 0..3 {
        let e = relative_error(only(false, true, false), seed);
        assert!(e < 1e-4, "seed {seed}: {e}");
    }
}

#[test]
fn size_gradient_matches_finite_differences() {
    for seed in 0..3 {
        let e = relative_error(only(false, false, true), seed);
        assert!(e < 1e-4, "seed {seed}: {e}");
    }
}

#[test]
fn combined_gradient_matches_finite_differences() {
    for seed in 0..3 {
        let e = relative_error(LossTerms::ALL, seed);
        assert!(e < 1e-4, "seed {seed}: {e}");
    }
}

#[test]
fn perfect_reconstruction_has_zero_gradient() {
    // zero decoder weights and b1 equal to the (constant) input columns
    let x = Array2::from_shape_fn((3, 4), |(d, _)| d as f64 - 1.0);
    let mut p = AutoencoderParams::init(3, 2, 9);
    p.w1.fill(0.0);
    p.b1 = x.column(0).to_owned();
    let (loss, g) = gradients(&p, &x, only(true, false, false)).unwrap();
    assert_eq!(loss.l_ac, 0.0);
    assert_eq!(g.norm(), 0.0);
}
