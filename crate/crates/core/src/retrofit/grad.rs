//! Analytic gradients of the retrofit objective.

use ndarray::{Array1, Array2, Axis};

use super::loss::{
    breakdown, forward, frobenius, mask_mass, partition_matrix, Forward, LossBreakdown, LossTerms,
};
use super::AutoencoderParams;
use crate::error::Result;

/// Same shapes as [`AutoencoderParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w0: Array2<f64>,
    pub b0: Array1<f64>,
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
}

impl Gradients {
    pub fn norm(&self) -> f64 {
        self.w0
            .iter()
            .chain(self.b0.iter())
            .chain(self.w1.iter())
            .chain(self.b1.iter())
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }
}

/// Loss value and gradient of the enabled terms w.r.t. every parameter.
pub fn gradients(
    params: &AutoencoderParams,
    x: &Array2<f64>,
    terms: LossTerms,
) -> Result<(LossBreakdown, Gradients)> {
    let fwd = forward(params, x)?;
    let loss = breakdown(x, &fwd, terms)?;
    let Forward { hidden, recon } = &fwd;
    let (k, n) = hidden.dim();

    let mut grad_hidden = Array2::<f64>::zeros((k, n));
    let mut grad_recon = Array2::<f64>::zeros(recon.raw_dim());
    if terms.ac {
        grad_recon = (recon - x) * (2.0 / n as f64);
        grad_hidden += &params.w1.t().dot(&grad_recon);
    }
    if terms.orth {
        grad_hidden += &orth_hidden_grad(hidden);
    }
    if terms.size {
        let per_row = size_mass_grad(hidden);
        grad_hidden += &per_row.insert_axis(Axis(1));
    }

    // through the sigmoid
    let grad_pre = grad_hidden * &hidden.mapv(|h| h * (1.0 - h));
    Ok((
        loss,
        Gradients {
            w0: grad_pre.dot(&x.t()),
            b0: grad_pre.sum_axis(Axis(1)),
            w1: grad_recon.dot(&hidden.t()),
            b1: grad_recon.sum_axis(Axis(1)),
        },
    ))
}

/// d loss_orth / dH, composed through `A = PPᵀ`, the Frobenius
/// normalization and `P = H ∘ r/K`.
fn orth_hidden_grad(hidden: &Array2<f64>) -> Array2<f64> {
    let k = hidden.nrows();
    let kf = k as f64;
    let p = partition_matrix(hidden);
    let gram = p.dot(&p.t());
    let norm = frobenius(&gram);
    if norm == 0.0 {
        return Array2::zeros(hidden.raw_dim());
    }
    let normalized = &gram / norm;
    let target = 1.0 / kf.sqrt();
    let mut grad_n = normalized.clone();
    for i in 0..k {
        grad_n[[i, i]] -= target;
    }
    grad_n *= 2.0 / (kf * kf);
    let inner: f64 = grad_n
        .iter()
        .zip(normalized.iter())
        .map(|(a, b)| a * b)
        .sum();
    let grad_gram = (&grad_n - &(&normalized * inner)) / norm;
    let grad_p = (&grad_gram + &grad_gram.t()).dot(&p);

    let mass = mask_mass(hidden);
    // direct term: P_{d,v} depends on h_d(v) with coefficient r_d/K
    let mut out = &grad_p * &(&mass / kf).insert_axis(Axis(1));
    // through r_d, which every h_d(v) feeds with coefficient 1
    let via_mass = (&grad_p * hidden).sum_axis(Axis(1)) / kf;
    out += &via_mass.insert_axis(Axis(1));
    out
}

/// d loss_size / d r_d (identical for every node of row d).
fn size_mass_grad(hidden: &Array2<f64>) -> Array1<f64> {
    let kf = hidden.nrows() as f64;
    let mass = mask_mass(hidden);
    let sizes = mass.mapv(|r| r * r / kf);
    let total: f64 = sizes.sum();
    let probs = &sizes / total;
    let mean_log: f64 = probs.iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum();
    let grad_sizes = probs.mapv(|p| {
        if p > 0.0 {
            (p.ln() - mean_log) / total
        } else {
            0.0
        }
    });
    grad_sizes * mass.mapv(|r| 2.0 * r / kf)
}

/// Central-difference check of [`gradients`]: returns
/// `‖g − ĝ‖ / max(‖g‖, ‖ĝ‖)` where `ĝ` perturbs every parameter by `±step`.
pub fn gradient_check(
    params: &AutoencoderParams,
    x: &Array2<f64>,
    terms: LossTerms,
    step: f64,
) -> Result<f64> {
    let (_, analytic) = gradients(params, x, terms)?;
    let mut probe = params.clone();
    let mut numeric = Vec::new();
    for t in 0..4 {
        let len = probe.tensors_mut()[t].len();
        for i in 0..len {
            let original = probe.tensors_mut()[t][i];
            probe.tensors_mut()[t][i] = original + step;
            let up = super::loss::evaluate(&probe, x, terms)?.total;
            probe.tensors_mut()[t][i] = original - step;
            let down = super::loss::evaluate(&probe, x, terms)?.total;
            probe.tensors_mut()[t][i] = original;
            numeric.push((up - down) / (2.0 * step));
        }
    }
    let analytic: Vec<f64> = analytic
        .tensors()
        .iter()
        .flat_map(|s| s.iter().copied())
        .collect();
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, b)| a - b).collect();
    let scale = norm(&analytic).max(norm(&numeric));
    Ok(if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    })
}
