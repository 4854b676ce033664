//! Pooled two-proportion z-test.

use statrs::function::erf::erfc;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProportionTest {
    pub proportion_a: f64,
    pub proportion_b: f64,
    pub z: f64,
    /// Two-sided.
    pub p_value: f64,
}

pub fn two_proportion_test(
    successes_a: u64,
    n_a: u64,
    successes_b: u64,
    n_b: u64,
) -> Result<ProportionTest> {
    if n_a == 0 || n_b == 0 {
        return Err(Error::InvalidArgument(
            "sample sizes must be positive".into(),
        ));
    }
    if successes_a > n_a || successes_b > n_b {
        return Err(Error::InvalidArgument(
            "successes exceed sample size".into(),
        ));
    }
    let (na, nb) = (n_a as f64, n_b as f64);
    let pa = successes_a as f64 / na;
    let pb = successes_b as f64 / nb;
    let pooled = (successes_a + successes_b) as f64 / (na + nb);
    let variance = pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb);
    let (z, p_value) = if variance > 0.0 {
        let z = (pa - pb) / variance.sqrt();
        (z, erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0))
    } else {
        (0.0, 1.0)
    };
    Ok(ProportionTest {
        proportion_a: pa,
        proportion_b: pb,
        z,
        p_value,
    })
}
