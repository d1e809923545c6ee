//! The vector-field number.

use crate::error::{Error, Result};

/// `rho(n) = 2^c + 8d` where `n = 2^(c+4d) (2a+1)` and `0 <= c <= 3`.
pub fn rho(n: u64) -> Result<u64> {
    if n < 2 {
        return Err(Error::Domain(format!("rho needs n >= 2, got {}", n)));
    }
    let b = n.trailing_zeros() as u64;
    let (c, d) = (b % 4, b / 4);
    Ok((1 << c) + 8 * d)
}
