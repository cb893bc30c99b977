use ndarray::Array2;

use crate::attribution::marginal_utility_definitional;
use crate::error::{Error, Result};
use crate::graph::Edge;

/// Gap between the marginal utility of hypercube vectors and their mask
/// entry `u_d v_d / K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremResidual {
    pub hidden_dim: usize,
    /// `max |μ_d − u_d v_d/K|` over all pairs and dimensions.
    pub max_abs: f64,
    pub mean_abs: f64,
    /// Largest deviation from `μ_d − u_d v_d/K = −(S − u_d v_d)/(K(K−1))`.
    pub max_identity_error: f64,
    /// `1/K`.
    pub bound: f64,
}

impl TheoremResidual {
    pub fn within_bound(&self) -> bool {
        self.max_abs <= self.bound
    }
}

/// Evaluates the residual on node pairs of a `K × |V|` hidden matrix with
/// entries in `[0, 1]`, using the literal two-Δ marginal utility.
pub fn theorem_residual(hidden: &Array2<f64>, pairs: &[Edge]) -> Result<TheoremResidual> {
    let (k, n) = hidden.dim();
    if k < 2 {
        return Err(Error::TooFewDimensions(k));
    }
    if let Some(bad) = hidden.iter().find(|h| !(0.0..=1.0).contains(*h)) {
        return Err(Error::InvalidParameter(format!(
            "hidden entry {bad} is outside [0, 1]"
        )));
    }
    let kf = k as f64;
    let mut max_abs: f64 = 0.0;
    let mut sum_abs = 0.0;
    let mut max_identity_error: f64 = 0.0;
    let mut count = 0usize;
    for &(a, b) in pairs {
        if a >= n || b >= n {
            return Err(Error::ShapeMismatch(format!(
                "pair ({a}, {b}) outside {n} nodes"
            )));
        }
        let u = hidden.column(a).to_vec();
        let v = hidden.column(b).to_vec();
        let mu = marginal_utility_definitional(&u, &v)?;
        let total: f64 = u.iter().zip(&v).map(|(x, y)| x * y).sum();
        for d in 0..k {
            let product = u[d] * v[d];
            let residual = mu[d] - product / kf;
            let identity = -(total - product) / (kf * (kf - 1.0));
            max_identity_error = max_identity_error.max((residual - identity).abs());
            max_abs = max_abs.max(residual.abs());
            sum_abs += residual.abs();
            count += 1;
        }
    }
    Ok(TheoremResidual {
        hidden_dim: k,
        max_abs,
        mean_abs: if count == 0 {
            0.0
        } else {
            sum_abs / count as f64
        },
        max_identity_error,
        bound: 1.0 / kf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn two_dims_all_ones() {
        // μ_1 = 0, mask = 1/2, residual = −1/2 = −(2 − 1)/(2·1)
        let h = array![[1.0, 1.0], [1.0, 1.0]];
        let r = theorem_residual(&h, &[(0, 1)]).unwrap();
        assert!((r.max_abs - 0.5).abs() < 1e-15);
        assert!(r.max_identity_error < 1e-15);
        assert!(r.within_bound());
    }

    #[test]
    fn zero_vectors() {
        let h = Array2::zeros((4, 2));
        let r = theorem_residual(&h, &[(0, 1)]).unwrap();
        assert_eq!(r.max_abs, 0.0);
    }

    #[test]
    fn rejects_out_of_range_entries() {
        let h = array![[1.5, 0.0], [0.0, 0.0]];
        assert!(theorem_residual(&h, &[(0, 1)]).is_err());
    }
}
