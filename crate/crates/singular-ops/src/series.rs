use gauss_quad::GaussLegendre;
use std::num::NonZeroUsize;

/// Alternating sum of the integrals of `b` over the 2^k dyadic cells of
/// [0,1], signed + on even cells, against the crude bound
/// pieces · 2^{−k} · sup|b|.  Returns (|alternating sum|, bound).
///
/// For b with a bounded derivative consecutive cell integrals differ by
/// O(4^{−k}), so the alternating sum collapses to O(2^{−k}) while each
/// individual integral is only O(2^{−k}); the bound keeps one factor.
pub fn alt_series_bound_check(b: impl Fn(f64) -> f64, pieces: usize, k: u32) -> (f64, f64) {
    assert!(k >= 1, "need at least two cells");
    let cells = 1usize << k;
    let h = 0.5f64.powi(k as i32);
    let gl = GaussLegendre::new(NonZeroUsize::new(16).unwrap());
    let mut sum = 0.0;
    let mut sup = 0.0f64;
    for i in 0..cells {
        let lo = i as f64 * h;
        let hi = lo + h;
        let integral = gl.integrate(lo, hi, &b);
        sum += if i % 2 == 0 { integral } else { -integral };
        // sup over the nodes plus both endpoints, so boundary extremes count
        for &(node, _) in gl.as_node_weight_pairs() {
            let x = 0.5 * ((hi - lo) * node + hi + lo);
            sup = sup.max(b(x).abs());
        }
        sup = sup.max(b(lo).abs()).max(b(hi).abs());
    }
    (sum.abs(), pieces as f64 * h * sup)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_terms_cancel_exactly() {
        let (lhs, bound) = alt_series_bound_check(|_| 3.0, 4, 6);
        assert_eq!(lhs, 0.0);
        assert!((bound - 4.0 * 3.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn linear_integrand_has_a_closed_alternating_sum() {
        // cell integrals of b(x)=x form an arithmetic sequence; pairing
        // neighbours leaves 2^{k-1} copies of -h^2, total 2^{-(k+1)}
        let (lhs, bound) = alt_series_bound_check(|x| x, 1, 5);
        assert!((lhs - 0.5f64.powi(6)).abs() < 1e-15);
        assert!((bound - 0.5f64.powi(5)).abs() < 1e-15);
        assert!(lhs <= bound);
    }

    #[test]
    fn doubling_the_depth_halves_the_sum() {
        let mut prev = f64::NAN;
        for k in 3..8 {
            let (lhs, bound) = alt_series_bound_check(f64::exp, 1, k);
            assert!(lhs <= bound);
            if !prev.is_nan() {
                assert!(lhs < prev * 0.51, "k={k}: {lhs} vs {prev}");
                assert!(lhs > prev * 0.49);
            }
            prev = lhs;
        }
    }
}
