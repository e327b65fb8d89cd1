use alloc::vec;
use alloc::vec::Vec;

use super::ExperimentError;

/// Ranks starting at 1, ties sharing the mean of the ranks they span.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let mean = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = mean;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Spearman's rank correlation: the Pearson correlation of average ranks.
/// Constant input has no defined correlation and is reported as
/// [`ExperimentError::Degenerate`].
pub fn spearman_rho(xs: &[f64], ys: &[f64]) -> Result<f64, ExperimentError> {
    if xs.len() != ys.len() {
        return Err(ExperimentError::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 3 {
        return Err(ExperimentError::TooFew { needed: 3, found: xs.len() });
    }
    pearson(&average_ranks(xs), &average_ranks(ys)).ok_or(ExperimentError::Degenerate)
}

/// Pearson's χ² statistic (1 degree of freedom, no continuity correction)
/// on the correct/incorrect table of two systems, with its upper-tail
/// p-value.
pub fn chi_squared_2x2(
    correct_a: u64,
    total_a: u64,
    correct_b: u64,
    total_b: u64,
) -> Result<(f64, f64), ExperimentError> {
    if correct_a > total_a || correct_b > total_b {
        return Err(ExperimentError::DegenerateTable);
    }
    let table = [
        [correct_a as f64, (total_a - correct_a) as f64],
        [correct_b as f64, (total_b - correct_b) as f64],
    ];
    let rows = [table[0][0] + table[0][1], table[1][0] + table[1][1]];
    let cols = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
    if rows.contains(&0.0) || cols.contains(&0.0) {
        return Err(ExperimentError::DegenerateTable);
    }
    let n = rows[0] + rows[1];
    let mut stat = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let expected = rows[i] * cols[j] / n;
            let d = table[i][j] - expected;
            stat += d * d / expected;
        }
    }
    Ok((stat, chi_squared_sf(stat, 1.0)))
}

/// `P(X > x)` for `X ~ χ²(df)`.
pub fn chi_squared_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(df / 2.0, x / 2.0)
}

/// Lanczos approximation (g = 7, 9 terms) of `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection: Γ(x) Γ(1 - x) = π / sin(π x).
        let pi = core::f64::consts::PI;
        return libm::log(pi / libm::fabs(libm::sin(pi * x))) - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, &c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * libm::log(2.0 * core::f64::consts::PI) + (x + 0.5) * libm::log(t) - t + libm::log(a)
}

const EPS: f64 = 1e-15;
const MAX_ITER: usize = 1000;

/// Regularized lower incomplete gamma `P(a, x)` by its power series; good
/// for `x < a + 1`.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if libm::fabs(term) < libm::fabs(sum) * EPS {
            break;
        }
    }
    sum * libm::exp(-x + a * libm::log(x) - ln_gamma(a))
}

/// Regularized upper incomplete gamma `Q(a, x)` by Lentz's continued
/// fraction; good for `x >= a + 1`.
fn gamma_q_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = b + an / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if libm::fabs(delta - 1.0) < EPS {
            break;
        }
    }
    libm::exp(-x + a * libm::log(x) - ln_gamma(a)) * h
}

/// Regularized upper incomplete gamma `Q(a, x) = Γ(a, x) / Γ(a)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_fraction(a, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng;
    use rand::Rng as _;

    #[test]
    fn perfect_and_reversed_ranks() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(spearman_rho(&xs, &[10.0, 20.0, 30.0, 40.0, 50.0]).unwrap(), 1.0);
        assert_eq!(spearman_rho(&xs, &[5.0, 4.0, 3.0, 2.0, 1.0]).unwrap(), -1.0);
    }

    #[test]
    fn small_rank_example() {
        // d = (1, 1, 1, 1): 1 - 6 * 4 / (4 * 15) = 0.6.
        let rho = spearman_rho(&[1.0, 2.0, 3.0, 4.0], &[2.0, 1.0, 4.0, 3.0]).unwrap();
        assert!((rho - 0.6).abs() < 1e-12);
    }

    #[test]
    fn spearman_errors() {
        assert!(matches!(spearman_rho(&[1.0, 2.0], &[1.0, 2.0]), Err(ExperimentError::TooFew { .. })));
        assert!(matches!(spearman_rho(&[1.0, 2.0, 3.0], &[1.0]), Err(ExperimentError::LengthMismatch { .. })));
        assert_eq!(spearman_rho(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(ExperimentError::Degenerate));
    }

    /// Definitional oracle: brute-force average ranks by counting, then the
    /// covariance formula.
    fn rho_oracle(xs: &[f64], ys: &[f64]) -> f64 {
        let rank = |v: &[f64], i: usize| {
            let less = v.iter().filter(|&&w| w < v[i]).count() as f64;
            let equal = v.iter().filter(|&&w| w == v[i]).count() as f64;
            less + (equal + 1.0) / 2.0
        };
        let n = xs.len();
        let rx: Vec<f64> = (0..n).map(|i| rank(xs, i)).collect();
        let ry: Vec<f64> = (0..n).map(|i| rank(ys, i)).collect();
        let mean = (n as f64 + 1.0) / 2.0;
        let cov: f64 = (0..n).map(|i| (rx[i] - mean) * (ry[i] - mean)).sum();
        let vx: f64 = rx.iter().map(|r| (r - mean) * (r - mean)).sum();
        let vy: f64 = ry.iter().map(|r| (r - mean) * (r - mean)).sum();
        cov / libm::sqrt(vx * vy)
    }

    #[test]
    fn spearman_matches_oracle_with_ties() {
        let mut r = rng(1);
        let mut checked = 0;
        for _ in 0..1000 {
            let n = r.gen_range(3..20);
            // Few distinct values force ties.
            let xs: Vec<f64> = (0..n).map(|_| r.gen_range(0..5) as f64).collect();
            let ys: Vec<f64> = (0..n).map(|_| r.gen_range(0..5) as f64).collect();
            match spearman_rho(&xs, &ys) {
                Ok(rho) => {
                    assert!((rho - rho_oracle(&xs, &ys)).abs() < 1e-9);
                    checked += 1;
                }
                Err(e) => assert_eq!(e, ExperimentError::Degenerate),
            }
        }
        assert!(checked > 950);
    }

    #[test]
    fn spearman_ignores_monotone_transforms() {
        let mut r = rng(2);
        for _ in 0..100 {
            let xs: Vec<f64> = (0..10).map(|_| r.gen_range(-3.0..3.0)).collect();
            let ys: Vec<f64> = (0..10).map(|_| r.gen_range(-3.0..3.0)).collect();
            let a = spearman_rho(&xs, &ys).unwrap();
            let tx: Vec<f64> = xs.iter().map(|&x| libm::exp(x) * 3.0 + 1.0).collect();
            let ty: Vec<f64> = ys.iter().map(|&y| y * y * y).collect();
            assert!((a - spearman_rho(&tx, &ty).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn chi_squared_examples() {
        let (s, p) = chi_squared_2x2(50, 100, 25, 50).unwrap();
        assert!(s.abs() < 1e-12 && (p - 1.0).abs() < 1e-12);
        let (_, p) = chi_squared_2x2(100, 100, 0, 100).unwrap();
        assert!(p < 1e-10);

        // Definitional oracle: expected counts 85/15 in both rows,
        // sum of (O - E)^2 / E over the four cells.
        let oracle = 2.0 * (25.0 / 85.0 + 25.0 / 15.0);
        let (s, p) = chi_squared_2x2(90, 100, 80, 100).unwrap();
        assert!((s - oracle).abs() < 1e-12);
        assert!((s - 3.9216).abs() < 1e-4);
        assert!((p - 0.0477).abs() < 1e-3);

        assert_eq!(chi_squared_2x2(100, 100, 100, 100), Err(ExperimentError::DegenerateTable));
        assert_eq!(chi_squared_2x2(0, 0, 1, 2), Err(ExperimentError::DegenerateTable));
    }

    #[test]
    fn chi_squared_is_symmetric() {
        let mut r = rng(3);
        for _ in 0..200 {
            let (ta, tb) = (r.gen_range(1..200), r.gen_range(1..200));
            let (ca, cb) = (r.gen_range(0..=ta), r.gen_range(0..=tb));
            match (chi_squared_2x2(ca, ta, cb, tb), chi_squared_2x2(cb, tb, ca, ta)) {
                (Ok(a), Ok(b)) => {
                    assert!((a.0 - b.0).abs() < 1e-9 * a.0.max(1.0));
                    assert!((a.1 - b.1).abs() < 1e-12);
                }
                (a, b) => assert_eq!(a, b),
            }
        }
    }

    #[test]
    fn survival_function_matches_erfc() {
        // With one degree of freedom P(X > x) = erfc(sqrt(x / 2)).
        for i in 0..400 {
            let x = i as f64 * 0.1;
            let want = libm::erfc(libm::sqrt(x / 2.0));
            let got = chi_squared_sf(x, 1.0);
            assert!((got - want).abs() < 1e-10 * want.max(1e-300).max(1.0), "{x}: {got} vs {want}");
            if want > 1e-200 {
                assert!((got - want).abs() / want < 1e-9, "{x}: {got} vs {want}");
            }
        }
        // Two degrees of freedom: exp(-x / 2).
        for x in [0.1, 1.0, 5.0, 30.0] {
            assert!((chi_squared_sf(x, 2.0) - libm::exp(-x / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0).abs() < 1e-13);
        assert!(ln_gamma(2.0).abs() < 1e-13);
        assert!((ln_gamma(0.5) - libm::log(libm::sqrt(core::f64::consts::PI))).abs() < 1e-13);
        assert!((ln_gamma(10.0) - libm::log(362_880.0)).abs() < 1e-12);
        assert!((ln_gamma(0.1) - libm::lgamma(0.1)).abs() < 1e-12);
    }
}
