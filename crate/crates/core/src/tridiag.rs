//! Thomas algorithm for complex tridiagonal systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Reusable scratch space for repeated solves of the same size.
#[derive(Debug, Clone)]
pub struct Thomas {
    c_prime: Vec<Complex64>,
    d_prime: Vec<Complex64>,
}

impl Thomas {
    pub fn new(n: usize) -> Self {
        Self {
            c_prime: vec![Complex64::new(0.0, 0.0); n],
            d_prime: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Solves `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]` in place
    /// of `rhs`. `sub[0]` and `sup[n-1]` are ignored.
    pub fn solve(
        &mut self,
        sub: &[Complex64],
        diag: &[Complex64],
        sup: &[Complex64],
        rhs: &mut [Complex64],
    ) -> Result<()> {
        let n = rhs.len();
        if diag.len() != n || sub.len() != n || sup.len() != n {
            return Err(Error::InvalidParameter(
                "tridiagonal bands and right-hand side differ in length".into(),
            ));
        }
        if n == 0 {
            return Ok(());
        }
        if self.c_prime.len() != n {
            *self = Self::new(n);
        }
        let (cp, dp) = (&mut self.c_prime, &mut self.d_prime);
        if diag[0].norm() == 0.0 {
            return Err(Error::InvalidParameter("singular tridiagonal system".into()));
        }
        cp[0] = sup[0] / diag[0];
        dp[0] = rhs[0] / diag[0];
        for i in 1..n {
            let denom = diag[i] - sub[i] * cp[i - 1];
            if denom.norm() == 0.0 {
                return Err(Error::InvalidParameter("singular tridiagonal system".into()));
            }
            cp[i] = sup[i] / denom;
            dp[i] = (rhs[i] - sub[i] * dp[i - 1]) / denom;
        }
        rhs[n - 1] = dp[n - 1];
        for i in (0..n - 1).rev() {
            rhs[i] = dp[i] - cp[i] * rhs[i + 1];
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solves_against_dense_product() {
        let n = 7;
        let sub: Vec<_> = (0..n).map(|i| c(-1.0, 0.1 * i as f64)).collect();
        let sup: Vec<_> = (0..n).map(|i| c(-1.0, -0.2 * i as f64)).collect();
        let diag: Vec<_> = (0..n).map(|i| c(4.0 + i as f64, 0.5)).collect();
        let x: Vec<_> = (0..n).map(|i| c(i as f64 - 2.0, 1.0 / (1.0 + i as f64))).collect();
        let mut rhs: Vec<_> = (0..n)
            .map(|i| {
                let mut v = diag[i] * x[i];
                if i > 0 {
                    v += sub[i] * x[i - 1];
                }
                if i + 1 < n {
                    v += sup[i] * x[i + 1];
                }
                v
            })
            .collect();
        Thomas::new(n).solve(&sub, &diag, &sup, &mut rhs).unwrap();
        for (a, b) in rhs.iter().zip(&x) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn rejects_length_mismatch() {
        let v = vec![c(1.0, 0.0); 3];
        let mut r = vec![c(1.0, 0.0); 4];
        assert!(Thomas::new(4).solve(&v, &v, &v, &mut r).is_err());
    }
}
