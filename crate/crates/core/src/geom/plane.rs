use super::Xy;

pub fn dist(a: Xy, b: Xy) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

/// Length and unit direction from `a` to `b`. Degenerate segments get `(1, 0)`.
pub fn direction(a: Xy, b: Xy) -> (f64, Xy) {
    let len = dist(a, b);
    if len == 0.0 {
        (0.0, [1.0, 0.0])
    } else {
        (len, [(b[0] - a[0]) / len, (b[1] - a[1]) / len])
    }
}

pub fn project_param(a: Xy, u: Xy, len: f64, q: Xy) -> f64 {
    ((q[0] - a[0]) * u[0] + (q[1] - a[1]) * u[1]).clamp(0.0, len)
}

pub fn cross(o: Xy, a: Xy, b: Xy) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

pub fn lerp(a: Xy, b: Xy, s: f64) -> Xy {
    [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
}
