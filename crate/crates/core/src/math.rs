use crate::C64;

/// `e^{iθ}` through `libm`, independent of the host libm.
#[inline]
pub(crate) fn cis(theta: f64) -> C64 {
    let (s, c) = libm::sincos(theta);
    C64::new(c, s)
}

#[inline]
pub(crate) fn abs(z: C64) -> f64 {
    libm::hypot(z.re, z.im)
}

/// Pairwise (cascade) summation. Result depends only on the slice order.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if xs.len() <= LEAF {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        acc
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}
