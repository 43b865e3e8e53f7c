//! Exact nonnegative integer matrix algebra and certified spectral radii.

mod matrix;
mod perron;
mod scc;
mod signed;

use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

pub use matrix::NonNegIntMatrix;
pub use perron::{
    collatz_wielandt, perron_root, perron_root_with, PerronConfig, PerronEstimate,
    DEFAULT_MAX_ITERATIONS, DEFAULT_TOL,
};
pub use scc::{scc_decompose, Condensation};
pub use signed::{
    exterior_power, log_entry_growth, sorted_subsets, spectral_radius_signed, SignedIntMatrix,
};


#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("matrix has no rows")]
    EmptyMatrix,
    #[error("matrix with {rows} rows has a row or entry list of length {len}")]
    NotSquare { rows: usize, len: usize },
    #[error("matrix parse error: {0}")]
    Parse(String),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("entry size {bits} bits exceeds cap {cap}")]
    EntryCap { bits: u64, cap: u64 },
    #[error("power iteration did not reach tolerance; best bracket [{}, {}]", best.lower, best.upper)]
    NonConvergence { best: PerronEstimate },
    #[error("exterior degree {p} exceeds dimension {k}")]
    ExteriorDegree { p: usize, k: usize },
    #[error("matrix power exponent must be at least 1")]
    ZeroExponent,
}

/// Size limits for exact matrix arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpectralCaps {
    pub max_dim: usize,
    pub max_entry_bits: u64,
}

impl Default for SpectralCaps {
    fn default() -> Self {
        SpectralCaps { max_dim: 512, max_entry_bits: 1 << 16 }
    }
}

/// Kronecker product `A ⊗ B`.
pub fn tensor_product(
    a: &NonNegIntMatrix,
    b: &NonNegIntMatrix,
    caps: &SpectralCaps,
) -> Result<NonNegIntMatrix, SpectralError> {
    let (na, nb) = (a.dim(), b.dim());
    let n = na * nb;
    if n > caps.max_dim {
        return Err(SpectralError::DimensionCap { dim: n, cap: caps.max_dim });
    }
    let mut out = NonNegIntMatrix::zeros(n);
    for i in 0..na {
        for j in 0..na {
            let x = a.get(i, j);
            if x.is_zero() {
                continue;
            }
            for k in 0..nb {
                for l in 0..nb {
                    let y = b.get(k, l);
                    if !y.is_zero() {
                        out.set(i * nb + k, j * nb + l, x * y);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Exact `Aⁿ` by repeated squaring.
pub fn matrix_power(
    a: &NonNegIntMatrix,
    n: u32,
    caps: &SpectralCaps,
) -> Result<NonNegIntMatrix, SpectralError> {
    if n == 0 {
        return Err(SpectralError::ZeroExponent);
    }
    a.check_dim(caps)?;
    let check = |m: &NonNegIntMatrix| -> Result<(), SpectralError> {
        let bits = m.max_bits();
        if bits > caps.max_entry_bits {
            Err(SpectralError::EntryCap { bits, cap: caps.max_entry_bits })
        } else {
            Ok(())
        }
    };
    let mut result: Option<NonNegIntMatrix> = None;
    let mut base = a.clone();
    let mut e = n;
    loop {
        if e & 1 == 1 {
            let next = match result {
                None => base.clone(),
                Some(r) => r.mul(&base),
            };
            check(&next)?;
            result = Some(next);
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base = base.mul(&base);
        check(&base)?;
    }
    Ok(result.expect("n ≥ 1"))
}

/// Exact number of length-`len` paths: sum of entries of `A^len` (len ≥ 0).
pub fn path_count(a: &NonNegIntMatrix, len: u32) -> BigUint {
    let mut v = vec![BigUint::from(1u32); a.dim()];
    for _ in 0..len {
        v = a.mul_vec(&v);
    }
    v.into_iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(text: &str) -> NonNegIntMatrix {
        text.parse().unwrap()
    }

    #[test]
    fn tensor_identity_and_scalars() {
        let a = m("1 1 / 1 0");
        let caps = SpectralCaps::default();
        assert_eq!(tensor_product(&a, &m("1"), &caps).unwrap(), a);
        assert_eq!(tensor_product(&m("2"), &m("3"), &caps).unwrap(), m("6"));
        let small = SpectralCaps { max_dim: 3, ..caps };
        assert!(matches!(
            tensor_product(&a, &a, &small),
            Err(SpectralError::DimensionCap { dim: 4, cap: 3 })
        ));
    }

    #[test]
    fn powers() {
        let a = m("1 1 / 1 0");
        let caps = SpectralCaps::default();
        assert_eq!(matrix_power(&a, 1, &caps).unwrap(), a);
        assert_eq!(matrix_power(&a, 3, &caps).unwrap(), m("3 2 / 2 1"));
        assert_eq!(matrix_power(&a, 0, &caps), Err(SpectralError::ZeroExponent));
        let tight = SpectralCaps { max_entry_bits: 8, ..caps };
        assert!(matches!(matrix_power(&m("2"), 20, &tight), Err(SpectralError::EntryCap { .. })));
    }

    #[test]
    fn path_counts() {
        assert_eq!(path_count(&m("1 1 / 1 0"), 4), BigUint::from(13u32));
        assert_eq!(path_count(&m("0 1 / 0 0"), 2), BigUint::zero());
    }
}
