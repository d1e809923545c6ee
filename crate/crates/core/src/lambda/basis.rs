use std::sync::Arc;

use dashmap::DashMap;
use once_cell::sync::Lazy;

use super::{Indices, LambdaMonomial};

static BASIS: Lazy<DashMap<(u32, u32), Arc<Vec<LambdaMonomial>>>> = Lazy::new(DashMap::new);

/// Admissible monomials of length `s` and weight `w`, in lexicographic order.
pub fn admissible_basis(s: u32, w: u32) -> Arc<Vec<LambdaMonomial>> {
    if let Some(v) = BASIS.get(&(s, w)) {
        return v.clone();
    }
    let out = if s == 0 {
        if w == 0 {
            vec![LambdaMonomial::unit()]
        } else {
            vec![]
        }
    } else {
        let mut out = vec![];
        for i in 0..=w {
            for r in admissible_basis(s - 1, w - i).iter() {
                if r.first().map_or(true, |j| j <= 2 * i) {
                    let mut v = Indices::with_capacity(s as usize);
                    v.push(i);
                    v.extend_from_slice(&r.0);
                    out.push(LambdaMonomial(v));
                }
            }
        }
        out
    };
    let out = Arc::new(out);
    BASIS.insert((s, w), out.clone());
    out
}

pub fn admissible_count(s: u32, w: u32) -> usize {
    admissible_basis(s, w).len()
}
