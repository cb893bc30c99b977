use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::AutoencoderParams;
use crate::error::{Error, Result};

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Hidden matrix `H = σ(W0·X + b0)` and reconstruction `X̃ = W1·H + b1`.
#[derive(Debug, Clone)]
pub struct Forward {
    pub hidden: Array2<f64>,
    pub recon: Array2<f64>,
}

pub fn forward(params: &AutoencoderParams, x: &Array2<f64>) -> Result<Forward> {
    params.check_input(x)?;
    let mut hidden = params.w0.dot(x);
    hidden += &params.b0.view().insert_axis(Axis(1));
    hidden.mapv_inplace(sigmoid);
    let mut recon = params.w1.dot(&hidden);
    recon += &params.b1.view().insert_axis(Axis(1));
    Ok(Forward { hidden, recon })
}

/// `(1/|V|) Σ_v ‖X_{:,v} − X̃_{:,v}‖²`.
pub fn loss_ac(x: &Array2<f64>, recon: &Array2<f64>) -> f64 {
    let n = x.ncols().max(1) as f64;
    x.iter()
        .zip(recon.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n
}

/// Row sums `r_d = Σ_u h_d(u)`.
pub fn mask_mass(hidden: &Array2<f64>) -> Array1<f64> {
    hidden.sum_axis(Axis(1))
}

/// `P_{d,v} = Σ_u m_d(u,v) = h_d(v)·r_d / K` with `m_d(u,v) = h_d(u)h_d(v)/K`.
pub fn partition_matrix(hidden: &Array2<f64>) -> Array2<f64> {
    let k = hidden.nrows() as f64;
    let scale = mask_mass(hidden) / k;
    hidden * &scale.insert_axis(Axis(1))
}

/// Mean squared difference between `PPᵀ/‖PPᵀ‖_F` and `I_K/√K`. A zero
/// `PPᵀ` normalizes to the zero matrix.
pub fn loss_orth(p: &Array2<f64>) -> f64 {
    let k = p.nrows();
    let gram = p.dot(&p.t());
    let norm = frobenius(&gram);
    let target = 1.0 / (k as f64).sqrt();
    let mut total = 0.0;
    for ((i, j), &a) in gram.indexed_iter() {
        let n = if norm > 0.0 { a / norm } else { 0.0 };
        let t = if i == j { target } else { 0.0 };
        total += (n - t) * (n - t);
    }
    total / (k * k) as f64
}

pub(crate) fn frobenius(a: &Array2<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Mask sizes `s_d = Σ_{u,v} m_d(u,v) = r_d² / K`.
pub fn mask_sizes(hidden: &Array2<f64>) -> Array1<f64> {
    let k = hidden.nrows() as f64;
    mask_mass(hidden).mapv(|r| r * r / k)
}

/// `log K + Σ_d p_d log p_d` with `p_d = s_d / Σ_q s_q` (natural log).
pub fn loss_size(hidden: &Array2<f64>) -> Result<f64> {
    let s = mask_sizes(hidden);
    let total: f64 = s.sum();
    if total <= 0.0 {
        return Err(Error::DegenerateSizes);
    }
    let k = hidden.nrows() as f64;
    let neg_entropy: f64 = s
        .iter()
        .map(|&sd| {
            let p = sd / total;
            if p > 0.0 {
                p * p.ln()
            } else {
                0.0
            }
        })
        .sum();
    Ok(k.ln() + neg_entropy)
}

/// One row of the loss trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub l_ac: f64,
    pub l_orth: f64,
    pub l_size: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn is_finite(&self) -> bool {
        self.l_ac.is_finite()
            && self.l_orth.is_finite()
            && self.l_size.is_finite()
            && self.total.is_finite()
    }
}

/// Which regularizers enter the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LossTerms {
    pub ac: bool,
    pub orth: bool,
    pub size: bool,
}

impl LossTerms {
    pub const ALL: Self = Self {
        ac: true,
        orth: true,
        size: true,
    };
}

pub fn evaluate(
    params: &AutoencoderParams,
    x: &Array2<f64>,
    terms: LossTerms,
) -> Result<LossBreakdown> {
    let fwd = forward(params, x)?;
    breakdown(x, &fwd, terms)
}

pub(crate) fn breakdown(x: &Array2<f64>, fwd: &Forward, terms: LossTerms) -> Result<LossBreakdown> {
    let l_ac = loss_ac(x, &fwd.recon);
    let l_orth = loss_orth(&partition_matrix(&fwd.hidden));
    let l_size = loss_size(&fwd.hidden)?;
    let total = [(terms.ac, l_ac), (terms.orth, l_orth), (terms.size, l_size)]
        .iter()
        .filter(|(on, _)| *on)
        .map(|(_, l)| l)
        .sum();
    Ok(LossBreakdown {
        l_ac,
        l_orth,
        l_size,
        total,
    })
}
