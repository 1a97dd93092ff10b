//! Random program generators and brute-force oracles.
//!
//! Everything here works on its own small ASTs and never calls into the
//! library under test, so the oracles stay independent of it.

pub mod arith;
pub mod mini;
pub mod reliability;
pub mod safety;

/// `Σ_{n≥0} first · ratio^n`, summed term by term until the terms vanish.
/// `None` when the series does not converge.
pub fn geometric_sum(first: f64, ratio: f64) -> Option<f64> {
    if !(0.0..1.0).contains(&ratio.abs()) {
        return None;
    }
    let mut total = 0.0;
    let mut term = first;
    for _ in 0..1_000_000 {
        total += term;
        term *= ratio;
        if term.abs() < 1e-18 {
            return Some(total);
        }
    }
    Some(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric() {
        assert!((geometric_sum(1.0, 0.5).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(geometric_sum(0.0, 0.0), Some(0.0));
        assert_eq!(geometric_sum(1.0, 1.0), None);
    }
}
