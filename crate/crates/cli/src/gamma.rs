//! The `gamma_k` sequence behind the automatic choice of `k0`.

use aeq_core::dyadic::besov_tail_pow;
use aeq_core::DensityModel;

use crate::error::{CliError, Result};

/// `gamma_k = max_f ||f - f_bar_k||^2_{1/2,2,2}` for `k = 0..=k_max`, with
/// the tails truncated at `k_max`. Nonincreasing because each tail is.
pub fn gamma_sequence(family: &[DensityModel], k_max: u32) -> Result<Vec<f64>> {
    if family.is_empty() {
        return Err(CliError::Config("gamma sequence needs at least one density".into()));
    }
    let mut gamma = vec![0.0f64; k_max as usize + 1];
    for f in family {
        // Tails from level k share all terms with level k + 1, so accumulate
        // fine to coarse instead of calling the tail once per k.
        let mut tail = 0.0;
        for k in (0..=k_max).rev() {
            tail += besov_tail_pow(f, 0.5, 2.0, 2.0, k, k)?;
            gamma[k as usize] = gamma[k as usize].max(tail);
        }
    }
    Ok(gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use aeq_core::{make_density, DensitySpec, FamilySpec};

    fn model(family: FamilySpec, eps0: f64) -> DensityModel {
        make_density(&DensitySpec::new(family, eps0)).unwrap()
    }

    #[test]
    fn uniform_is_zero() {
        let g = gamma_sequence(&[model(FamilySpec::Uniform, 1.0)], 8).unwrap();
        assert_eq!(g, vec![0.0; 9]);
    }

    #[test]
    fn linear_closed_form() {
        let k_max = 20;
        let g = gamma_sequence(&[model(FamilySpec::Linear { a: 0.5, b: 1.0 }, 0.5)], k_max).unwrap();
        for (k, v) in g.iter().enumerate() {
            // Level j contributes 2^{-2j-4} 2^j; truncating at k_max drops 2^{-k_max-4}.
            let expected = (-(k as f64) - 3.0).exp2() - (-(k_max as f64) - 4.0).exp2();
            assert!((v - expected).abs() < 1e-15, "k={k}");
        }
    }

    #[test]
    fn family_is_pointwise_max() {
        let lin = model(FamilySpec::Linear { a: 0.5, b: 1.0 }, 0.5);
        let cos = model(FamilySpec::Fourier { coefficients: vec![[1.0, 0.0], [0.1, 0.0]] }, 0.7);
        let both = gamma_sequence(&[lin.clone(), cos.clone()], 10).unwrap();
        let a = gamma_sequence(&[lin], 10).unwrap();
        let b = gamma_sequence(&[cos], 10).unwrap();
        for k in 0..=10 {
            assert_eq!(both[k], a[k].max(b[k]));
        }
        assert!(both.windows(2).all(|w| w[1] <= w[0]));
        assert!(gamma_sequence(&[], 3).is_err());
    }
}
