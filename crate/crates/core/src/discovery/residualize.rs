use super::BivariateSample;
use crate::error::{degenerate, invalid, Result};
use crate::numstat::centered;

/// Relative norm below which a confounder column counts as linearly dependent.
const RANK_TOLERANCE: f64 = 1e-10;

/// Orthonormal basis of the intercept plus confounder columns, by modified
/// Gram-Schmidt with one reorthogonalization pass.
fn orthonormal_basis(n: usize, confounders: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
    let mut basis = vec![vec![1.0 / (n as f64).sqrt(); n]];
    for (c, col) in confounders.iter().enumerate() {
        let original = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut v = col.to_vec();
        for _ in 0..2 {
            for q in &basis {
                let dot: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= dot * qi);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if original == 0.0 || norm <= RANK_TOLERANCE * original.max(1.0) {
            return degenerate(format!(
                "confounder {c} is linearly dependent on the intercept and earlier confounders"
            ));
        }
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    Ok(basis)
}

fn project_out(v: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut r = v.to_vec();
    for q in basis {
        let dot: f64 = q.iter().zip(&r).map(|(a, b)| a * b).sum();
        r.iter_mut().zip(q).for_each(|(ri, qi)| *ri -= dot * qi);
    }
    r
}

/// Residuals of `x` and `y` after least-squares regression on an intercept
/// and the known confounders.
pub fn residualize(x: &[f64], y: &[f64], confounders: &[&[f64]]) -> Result<BivariateSample> {
    let n = x.len();
    if y.len() != n || confounders.iter().any(|c| c.len() != n) {
        return invalid("x, y and every confounder must have the same length");
    }
    if n <= confounders.len() + 1 {
        return degenerate(format!(
            "{n} observations cannot support an intercept and {} confounders",
            confounders.len()
        ));
    }
    if confounders.is_empty() {
        return BivariateSample::new(centered(x), centered(y));
    }
    let basis = orthonormal_basis(n, confounders)?;
    BivariateSample::new(project_out(x, &basis), project_out(y, &basis))
}
