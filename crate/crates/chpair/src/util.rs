//! Small numeric helpers used across modules.

/// Largest absolute entry, 0.0 for an empty slice.
pub fn max_abs(f: &[f64]) -> f64 {
    f.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()))
}

/// Largest absolute pointwise difference.
pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(0.0_f64, |acc, (&x, &y)| acc.max((x - y).abs()))
}

/// True when every entry is finite.
pub fn all_finite(f: &[f64]) -> bool {
    f.iter().all(|x| x.is_finite())
}

/// Index of the first entry that is not finite, if any.
pub fn first_non_finite(f: &[f64]) -> Option<usize> {
    f.iter().position(|x| !x.is_finite())
}
