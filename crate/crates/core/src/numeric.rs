//! Small 1-D solvers and series used across the crate.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimise a unimodal function on `[a, b]` by golden-section search.
/// Returns `(argmin, min)` with the argument accurate to `tol`.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    if b - a <= tol {
        let m = 0.5 * (a + b);
        return (m, f(m));
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
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
    }
    // The endpoints are candidates too: the minimum of a convex function may sit on the boundary.
    let m = 0.5 * (a + b);
    let fm = f(m);
    let mut best = (m, fm);
    for (x, fx) in [(c, fc), (d, fd)] {
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Golden-section search that also checks the interval endpoints, for convex
/// functions whose minimum may be attained at the boundary.
pub fn convex_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let fa = f(a);
    let fb = f(b);
    let mut best = golden_min(&mut f, a, b, tol);
    if fa <= best.1 {
        best = (a, fa);
    }
    if fb < best.1 {
        best = (b, fb);
    }
    best
}

/// Bisection for a predicate that is `false` at `lo` and `true` at `hi`.
/// Returns the boundary to within `tol`.
pub fn bisect_predicate<F: FnMut(f64) -> bool>(mut pred: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut iter = 0;
    while hi - lo > tol && iter < 200 {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        iter += 1;
    }
    0.5 * (lo + hi)
}

/// Root of a function that is negative at `lo` and positive at `hi`.
pub fn bisect_root<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut iter = 0;
    while hi - lo > tol * (1.0 + lo.abs()) && iter < 400 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iter += 1;
    }
    0.5 * (lo + hi)
}

/// Partial sum `Σ_{L=1}^{m} L^{-p}`.
pub fn zeta_partial(p: i32, m: usize) -> f64 {
    (1..=m).rev().map(|l| (l as f64).powi(-p)).sum()
}

/// Upper bound for the tail `Σ_{L>m} L^{-3}`.
pub fn cube_tail_bound(m: usize) -> f64 {
    1.0 / (2.0 * (m as f64) * (m as f64))
}

pub const ZETA2: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;
pub const ZETA3: f64 = 1.202_056_903_159_594_3;

/// The reverse-triangle constant `Σ (3/(2L²) + 5/L³) = 3ζ(2)/2 + 5ζ(3)`.
pub fn reverse_triangle_constant() -> f64 {
    1.5 * ZETA2 + 5.0 * ZETA3
}
