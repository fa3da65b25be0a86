//! Finite-difference verification of analytic gradients.
//!
//! Runs in f64 only; f32 roundoff would drown the signal the check looks
//! for.

/// Compares an analytic gradient against central differences
/// (f(x+ε)−f(x−ε))/2ε, coordinate by coordinate, and returns the largest
/// relative error |a−n| / max(|a|, |n|, 1e-8).
///
/// `f` must be a pure scalar function of the flat coordinate vector.
/// Sensible ε is 1e-6..=1e-4.
pub fn max_relative_error<F>(mut f: F, x: &[f64], analytic: &[f64], eps: f64) -> f64
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(
        x.len(),
        analytic.len(),
        "analytic gradient length must match coordinates"
    );
    let mut probe = x.to_vec();
    let mut worst = 0.0f64;
    for i in 0..probe.len() {
        let orig = probe[i];
        probe[i] = orig + eps;
        let plus = f(&probe);
        probe[i] = orig - eps;
        let minus = f(&probe);
        probe[i] = orig;

        let numeric = (plus - minus) / (2.0 * eps);
        let a = analytic[i];
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
        if rel > worst {
            worst = rel;
        }
    }
    worst
}
