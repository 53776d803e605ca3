//! Integer-order Bessel functions of the first kind.

/// `J_0(x) ..= J_nmax(x)` by Miller's backward recurrence, normalized with
/// `J_0 + 2 sum_k J_2k = 1`.
pub fn bessel_j_upto(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = (nmax as f64).max(ax);
    // Start well above both the requested order and |x|; the recurrence is
    // then dominated by the minimal (decaying) solution.
    let mut start = (top + 30.0 + (50.0 * top).sqrt()) as usize;
    start += start % 2;

    let mut j_next = 0.0; // J_{k+1}
    let mut j_cur = 1e-300; // J_k
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let j_prev = 2.0 * k as f64 / ax * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        // j_cur now holds J_{k-1}
        let idx = k - 1;
        if idx <= nmax {
            out[idx] = j_cur;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * j_cur;
        }
        if j_cur.abs() > 1e250 {
            let s = 1e-250;
            j_cur *= s;
            j_next *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    norm += j_cur;
    for v in out.iter_mut() {
        *v /= norm;
    }
    if x < 0.0 {
        for (n, v) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// `J_n(x)` for any integer order, using `J_{-n} = (-1)^n J_n`.
pub fn bessel_jn(n: i64, x: f64) -> f64 {
    let m = n.unsigned_abs() as usize;
    let v = bessel_j_upto(m, x)[m];
    if n < 0 && m % 2 == 1 {
        -v
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Power series, test-only oracle.
    fn series(n: usize, x: f64) -> f64 {
        let mut term = (x / 2.0).powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>();
        let mut sum = term;
        for k in 1..200 {
            term *= -(x * x / 4.0) / (k as f64 * (k + n) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    }

    #[test]
    fn reference_values() {
        assert!((bessel_jn(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_jn(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((bessel_jn(5, 10.0) - -0.234_061_528_186_793_6).abs() < 1e-14);
    }

    #[test]
    fn matches_power_series_for_small_arguments() {
        for &x in &[-3.0, -0.06, -0.005, 0.01, 0.5, 2.0, 4.0] {
            for n in 0..12 {
                let a = bessel_jn(n as i64, x);
                let b = series(n, x);
                assert!((a - b).abs() <= 1e-14 * (1.0 + b.abs()), "n={n} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn negative_orders_and_zero_argument() {
        assert_eq!(bessel_jn(-3, 0.7), -bessel_jn(3, 0.7));
        assert_eq!(bessel_jn(-2, 0.7), bessel_jn(2, 0.7));
        assert_eq!(bessel_jn(0, 0.0), 1.0);
        assert_eq!(bessel_jn(4, 0.0), 0.0);
    }

    #[test]
    fn addition_theorem_normalization() {
        for &x in &[0.3, 7.0, 35.0] {
            let j = bessel_j_upto(120, x);
            let s: f64 = j[0] * j[0] + 2.0 * j[1..].iter().map(|v| v * v).sum::<f64>();
            assert!((s - 1.0).abs() < 1e-13, "x = {x}: {s}");
        }
    }
}
