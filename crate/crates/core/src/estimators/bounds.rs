//! Closed-form guarantees that the empirical checks compare against.

/// Radius `2θ/(1−l2)` of the absorbing ball around `u`.
pub fn good_set_radius(theta: f64, l2: f64) -> f64 {
    2.0 * theta / (1.0 - l2)
}

/// Contraction coefficient `1 − 0.8(1−l2)`.
pub fn contraction_bound(l2: f64) -> f64 {
    1.0 - 0.8 * (1.0 - l2)
}

/// Largest `θ` covered by the contraction guarantee: `(1−l2)^{3/2} / 40`.
pub fn theta_hypothesis(l2: f64) -> f64 {
    (1.0 - l2).powf(1.5) / 40.0
}

/// `(θ log(1/θ) / (1−l2))²`, the shape of the stationary bias.
fn bias_shape(theta: f64, l2: f64) -> f64 {
    if theta <= 0.0 {
        return 0.0;
    }
    (theta * (1.0 / theta).ln() / (1.0 - l2)).powi(2)
}

/// Distance bound between `u` and the stationary mean: `8(θ log(1/θ)/(1−l2))²`.
pub fn stationary_bias_bound(theta: f64, l2: f64) -> f64 {
    8.0 * bias_shape(theta, l2)
}

/// Variance bound of a `t`-step time average: `70θ²/((1−l2)² t)`.
pub fn time_average_variance_bound(theta: f64, l2: f64, t: usize) -> f64 {
    70.0 * theta * theta / ((1.0 - l2).powi(2) * t as f64)
}

/// Single-sample variance bound `20θ²/(1−l2)²`.
pub fn single_sample_variance_bound(theta: f64, l2: f64) -> f64 {
    20.0 * theta * theta / (1.0 - l2).powi(2)
}

/// Eigenvector error bound after `t` averaged rounds with failure
/// probability `delta`.
pub fn eigvec_error_bound(theta: f64, l2: f64, t: usize, delta: f64) -> f64 {
    18.0 * theta / ((1.0 - l2) * (t as f64 * delta).sqrt()) + 12.0 * bias_shape(theta, l2)
}

/// Number of fixed-sparsification rounds for the warm start:
/// `⌈3 log(n/θ) / (1−l2−θ)⌉`.
pub fn warm_start_rounds(n: usize, theta: f64, l2: f64) -> usize {
    (3.0 * (n as f64 / theta).ln() / (1.0 - l2 - theta)).ceil() as usize
}

/// Quality required of the warm-start sparsification: `θ²/(2(1−l2))`.
pub fn warm_start_quality(theta: f64, l2: f64) -> f64 {
    theta * theta / (2.0 * (1.0 - l2))
}

/// Admissible range of `t` for the eigenvalue guarantee:
/// `max{log2 n, 2 log_{1/l2} n} <= t <= n/(4αγ)`.
pub fn eigenvalue_window(n: usize, l2: f64, alpha: f64, gamma: f64) -> (f64, f64) {
    let nf = n as f64;
    let lo = nf.log2().max(2.0 * nf.ln() / (1.0 / l2).ln());
    let hi = if alpha > 0.0 {
        nf / (4.0 * alpha * gamma)
    } else {
        f64::INFINITY
    };
    (lo, hi)
}

/// Relative eigenvalue error bound: the maximum of the three terms.
pub fn eigenvalue_error_bound(n: usize, t: usize, alpha: f64, gamma: f64, delta: f64) -> f64 {
    let (nf, tf) = (n as f64, t as f64);
    let ln = nf.ln();
    let a = 8.0 * 2f64.sqrt() / (tf * nf * delta.sqrt());
    let b = 32.0 * (alpha * gamma.powf(1.5) * ln / (tf * tf * delta)).sqrt();
    let c = 48.0 * (alpha * gamma.powi(3) * ln * ln / (tf * nf * delta)).sqrt();
    a.max(b).max(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_values() {
        assert_eq!(good_set_radius(0.1, 0.5), 0.4);
        assert!((contraction_bound(0.5) - 0.6).abs() < 1e-15);
        assert!((theta_hypothesis(0.5) - 0.0088388347648318).abs() < 1e-15);
        // 18*0.1/(0.5*sqrt(40)) + 12*(0.1*ln10/0.5)^2
        let expect = 1.8 / (0.5 * 40f64.sqrt()) + 12.0 * (0.2 * 10f64.ln()).powi(2);
        assert!((eigvec_error_bound(0.1, 0.5, 400, 0.1) - expect).abs() < 1e-12);
        // 3 ln(100/0.2) / 0.3 = 62.14...
        assert_eq!(warm_start_rounds(100, 0.2, 0.5), 63);
        assert!((warm_start_quality(0.2, 0.5) - 0.04).abs() < 1e-15);
        let (lo, hi) = eigenvalue_window(1024, 0.5, 0.0, 1.0);
        assert!((lo - 20.0).abs() < 1e-12 && hi.is_infinite());
        assert_eq!(stationary_bias_bound(0.0, 0.5), 0.0);
    }
}
