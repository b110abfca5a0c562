//! Least-squares projection onto non-decreasing sequences (pool adjacent
//! violators).

/// Weighted isotonic regression of `y`, in place.
pub fn isotonic_weighted(y: &mut [f64], w: &[f64]) {
    let n = y.len();
    assert_eq!(n, w.len());
    // blocks as (mean, weight, length)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        let mut cur = (y[i], w[i], 1usize);
        while let Some(&(m, wt, len)) = blocks.last() {
            if m <= cur.0 {
                break;
            }
            let tw = wt + cur.1;
            cur = ((m * wt + cur.0 * cur.1) / tw, tw, len + cur.2);
            blocks.pop();
        }
        blocks.push(cur);
    }
    let mut i = 0;
    for (m, _, len) in blocks {
        for v in &mut y[i..i + len] {
            *v = m;
        }
        i += len;
    }
}

/// Unweighted isotonic regression of `y`, in place.
pub fn isotonic(y: &mut [f64]) {
    let w = vec![1.0; y.len()];
    isotonic_weighted(y, &w);
}

/// Projection onto `{0 <= x_0 <= ... <= x_{n-1} <= 1}`.
pub fn project_cdf(y: &mut [f64]) {
    isotonic(y);
    for v in y.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pools_violators() {
        let mut y = vec![1.0, 3.0, 2.0, 4.0, 0.0];
        isotonic(&mut y);
        let expect = [1.0, 2.25, 2.25, 2.25, 2.25];
        for (a, b) in y.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let mut y = vec![0.5, 0.5, 2.0];
        project_cdf(&mut y);
        assert_eq!(y, vec![0.5, 0.5, 1.0]);
    }

    proptest! {
        #[test]
        fn projection_is_monotone_and_optimal(v in prop::collection::vec(-2.0f64..2.0, 1..40)) {
            let mut p = v.clone();
            isotonic(&mut p);
            for w in p.windows(2) {
                prop_assert!(w[0] <= w[1] + 1e-12);
            }
            // mean preserved
            let s0: f64 = v.iter().sum();
            let s1: f64 = p.iter().sum();
            prop_assert!((s0 - s1).abs() < 1e-9);
            // variational inequality against the sorted sequence (a monotone point)
            let mut q = v.clone();
            q.sort_by(f64::total_cmp);
            let ip: f64 = v.iter().zip(&p).zip(&q).map(|((y, p), q)| (y - p) * (q - p)).sum();
            prop_assert!(ip <= 1e-9);
        }
    }
}
