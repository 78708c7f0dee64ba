//! One-dimensional search: golden-section minimization and bisection.

/// 1/φ, the golden-section shrink factor.
const INV_PHI: f64 = 0.618_033_988_749_894_848_204_586_834_365_638_1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Minimizes a unimodal `f` on `[a, b]` until the bracket is narrower than `width`.
///
/// For non-unimodal functions the result is a local minimum. The returned point
/// is the best evaluated point, so `value <= f(a).min(f(b))` is not guaranteed.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, width: f64) -> Minimum {
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while b - a > width && iterations < 500 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iterations += 1;
        if c >= d {
            break;
        }
    }
    let (x, value) = if fc <= fd { (c, fc) } else { (d, fd) };
    Minimum {
        x,
        value,
        iterations,
    }
}

/// Finds a sign change of `f` inside `[a, b]` given `f(a)` and `f(b)` of opposite sign.
///
/// Runs until the bracket stops shrinking in floating point.
pub fn bisect_root<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a.min(b) || mid >= a.max(b) {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn golden_finds_parabola_vertex() {
        let m = golden_section_min(|x| (x - 0.3) * (x - 0.3) + 1.0, 0.0, 1.0, 1e-12);
        assert_abs_diff_eq!(m.x, 0.3, epsilon = 1e-7);
        assert_abs_diff_eq!(m.value, 1.0, epsilon = 1e-14);
        assert!(m.iterations > 40);
    }

    #[test]
    fn golden_handles_boundary_minimum() {
        let m = golden_section_min(|x| x, 2.0, 5.0, 1e-10);
        assert_abs_diff_eq!(m.x, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn bisection_converges_to_machine_precision() {
        let r = bisect_root(|x| x * x - 2.0, 0.0, 2.0);
        assert_abs_diff_eq!(r, std::f64::consts::SQRT_2, epsilon = 1e-15);
        let r = bisect_root(|x| 1.0 - x, 0.0, 3.0);
        assert_abs_diff_eq!(r, 1.0, epsilon = 1e-15);
    }
}
