use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

/// One Chambers–Mallows–Stuck draw from S(alpha, 0, 1, 0).
///
/// With `U ~ Uniform(-pi/2, pi/2)` and `W ~ Exp(1)`:
/// `X = sin(alpha U) / cos(U)^{1/alpha} * (cos((1 - alpha) U) / W)^{(1 - alpha)/alpha}`,
/// reducing to `tan U` at alpha = 1.
pub fn sample_standard_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u = loop {
        let u: f64 = rng.gen_range(-FRAC_PI_2..FRAC_PI_2);
        if u > -FRAC_PI_2 {
            break u;
        }
    };
    if alpha == 1.0 {
        return u.tan();
    }
    let w: f64 = loop {
        let w: f64 = Exp1.sample(rng);
        if w > 0.0 {
            break w;
        }
    };
    let cos_u = u.cos();
    let head = (alpha * u).sin() / cos_u.powf(1.0 / alpha);
    let tail = (((1.0 - alpha) * u).cos() / w).powf((1.0 - alpha) / alpha);
    head * tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gaussian_endpoint_has_variance_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_standard_stable(2.0, &mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // sd of the sample variance of N(0, 2): 2 * sqrt(2 / n)
        let se = 2.0 * (2.0 / n as f64).sqrt();
        assert!((var - 2.0).abs() < 3.0 * se, "var {var}");
    }

    #[test]
    fn cauchy_median_and_quartile() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let mut xs: Vec<f64> = (0..n).map(|_| sample_standard_stable(1.0, &mut rng)).collect();
        let below_one = xs.iter().filter(|&&x| x <= 1.0).count() as f64 / n as f64;
        let se = (0.75 * 0.25 / n as f64).sqrt();
        assert!((below_one - 0.75).abs() < 3.0 * se);
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = xs[n / 2];
        // se of the median for Cauchy: pi / (2 sqrt(n))
        assert!(median.abs() < 3.0 * std::f64::consts::PI / (2.0 * (n as f64).sqrt()));
    }
}
