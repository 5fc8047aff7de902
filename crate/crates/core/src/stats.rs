//! Small numeric helpers: normal distribution, integer cube roots, and an
//! order-preserving map that runs on rayon when the `parallel` feature is on.

use alloc::vec::Vec;

/// Smallest `m` with `m³ ≥ n`.
pub fn ceil_cbrt(n: usize) -> usize {
    let mut m = libm::cbrt(n as f64) as usize;
    while m.saturating_mul(m).saturating_mul(m) < n {
        m += 1;
    }
    while m > 0 && (m - 1) * (m - 1) * (m - 1) >= n {
        m -= 1;
    }
    m
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// Two-sided tail probability `P(|Z| ≥ |z|)`.
pub fn two_sided_p_value(z: f64) -> f64 {
    libm::erfc(z.abs() / core::f64::consts::SQRT_2)
}

/// Standard normal quantile. Acklam's rational approximation followed by one
/// Halley step against `erfc`, good to about 1e-15 relative.
pub fn normal_quantile(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let low = 0.02425;
    let x = if p < low {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = libm::sqrt(-2.0 * libm::log(1.0 - p));
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = normal_cdf(x) - p;
    let u = e * libm::sqrt(2.0 * core::f64::consts::PI) * libm::exp(x * x / 2.0);
    x - u / (1.0 + x * u / 2.0)
}

/// Sample mean and standard deviation (divisor `len − 1`). The sums run on
/// deviations from the first element so identical inputs give exactly zero.
pub fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let len = values.len();
    if len == 0 {
        return (f64::NAN, f64::NAN);
    }
    let shift = values[0];
    let mean_dev = values.iter().map(|v| v - shift).sum::<f64>() / len as f64;
    if len < 2 {
        return (shift + mean_dev, f64::NAN);
    }
    let ss: f64 = values.iter().map(|v| (v - shift - mean_dev) * (v - shift - mean_dev)).sum();
    (shift + mean_dev, libm::sqrt(ss / (len - 1) as f64))
}

/// `(0..len).map(f)` collected in index order, in parallel when enabled.
#[cfg(feature = "parallel")]
pub fn ordered_map<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn ordered_map<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..len).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_roots() {
        assert_eq!(ceil_cbrt(2000), 13);
        assert_eq!(ceil_cbrt(1000), 10);
        assert_eq!(ceil_cbrt(1001), 11);
        assert_eq!(ceil_cbrt(8), 2);
        assert_eq!(ceil_cbrt(5000), 18);
        assert_eq!(ceil_cbrt(1), 1);
        for n in 1..5000usize {
            let m = ceil_cbrt(n);
            assert!(m * m * m >= n && (m - 1) * (m - 1) * (m - 1) < n);
        }
    }

    #[test]
    fn quantile_known_values() {
        assert!((normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-12);
        assert!((normal_quantile(0.995) - 2.575_829_303_548_901).abs() < 1e-12);
        assert!((normal_quantile(0.95) - 1.644_853_626_951_472_2).abs() < 1e-12);
        assert_eq!(normal_quantile(0.5), 0.0);
        assert!((normal_quantile(1e-10) + 6.361_340_902_404_056).abs() < 1e-9);
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            assert!((normal_cdf(normal_quantile(p)) - p).abs() < 1e-14);
        }
    }

    #[test]
    fn p_values() {
        assert!((two_sided_p_value(1.959_963_984_540_054) - 0.05).abs() < 1e-12);
        assert_eq!(two_sided_p_value(0.0), 1.0);
        assert_eq!(two_sided_p_value(-2.0), two_sided_p_value(2.0));
    }

    #[test]
    fn sd_of_constant_is_exact_zero() {
        assert_eq!(mean_and_sd(&[0.1 + 0.2; 7]).1, 0.0);
        let (m, s) = mean_and_sd(&[1.0, 2.0, 3.0, 4.0]);
        assert!((m - 2.5).abs() < 1e-15);
        assert!((s - libm::sqrt(5.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn ordered_map_keeps_order() {
        assert_eq!(ordered_map(5, |i| i * i), alloc::vec![0, 1, 4, 9, 16]);
    }
}
