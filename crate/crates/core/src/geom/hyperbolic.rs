//! Hyperbolic plane in the upper half-plane chart.
//!
//! Each geodesic carries a Möbius frame `f` sending it to the imaginary axis,
//! with `|f(z)|` increasing along the direction of travel. Arclength along the
//! geodesic is `log|f(z)| - s0`, and the level sets of `log|f|` are exactly the
//! fibres of the closest-point projection.

use num_complex::Complex64 as C;

use super::Xy;

pub fn dist(a: Xy, b: Xy) -> f64 {
    let num = (b[0] - a[0]).hypot(b[1] - a[1]);
    2.0 * (num / (2.0 * a[1].sqrt() * b[1].sqrt())).asinh()
}

/// Point reached from `p` after travelling `len` in chart direction `angle`.
pub fn exp(p: Xy, angle: f64, len: f64) -> Xy {
    let len = len.min(super::HYP_MAX_LEN);
    let phi = angle - std::f64::consts::FRAC_PI_2;
    let (s, c) = (0.5 * phi).sin_cos();
    // R(w) = (c w + s) / (-s w + c) applied to w = i e^len.
    let r = if len <= 0.0 {
        let w = C::new(0.0, len.exp());
        (w * c + s) / (C::new(c, 0.0) - w * s)
    } else {
        let v = C::new(0.0, -(-len).exp());
        (C::new(c, 0.0) + v * s) / (v * c - s)
    };
    [p[0] + p[1] * r.re, (p[1] * r.im).max(f64::MIN_POSITIVE)]
}

/// A point of the closed real line, possibly at infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ideal {
    Real(f64),
    Inf,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ends {
    /// Vertical line `x = x0`, travelling upward.
    Up { x0: f64 },
    /// Vertical line `x = x0`, travelling downward.
    Down { x0: f64 },
    /// Semicircle from ideal point `a` to ideal point `b`.
    Circle { a: f64, b: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HypGeo {
    pub ends: Ends,
    /// `log|f|` at the start point.
    pub s0: f64,
}

fn sigma(a: f64, b: f64) -> f64 {
    if a > b {
        1.0
    } else {
        -1.0
    }
}

impl HypGeo {
    pub fn through(p: Xy, q: Xy) -> Self {
        let scale = p[0].abs().max(q[0].abs()).max(p[1]).max(q[1]);
        let dx = q[0] - p[0];
        if dx.abs() <= 1e-13 * scale {
            return if q[1] >= p[1] {
                HypGeo { ends: Ends::Up { x0: p[0] }, s0: p[1].ln() }
            } else {
                HypGeo { ends: Ends::Down { x0: p[0] }, s0: -p[1].ln() }
            };
        }
        let c = ((q[0] - p[0]) * (q[0] + p[0]) + (q[1] - p[1]) * (q[1] + p[1])) / (2.0 * dx);
        let r = (p[0] - c).hypot(p[1]);
        let prod = 2.0 * c * p[0] - p[0] * p[0] - p[1] * p[1];
        let (lo, hi) = if c >= 0.0 { (prod / (c + r), c + r) } else { (c - r, prod / (c - r)) };
        let (a, b) = if dx > 0.0 { (lo, hi) } else { (hi, lo) };
        let g = HypGeo { ends: Ends::Circle { a, b }, s0: 0.0 };
        let s0 = g.log_lambda(p);
        HypGeo { s0, ..g }
    }

    /// `log|f(z)|` together with the unit complex `f(z)/|f(z)|`.
    pub fn to_frame(&self, z: Xy) -> (f64, C) {
        let zc = C::new(z[0], z[1]);
        match self.ends {
            Ends::Up { x0 } => {
                let w = zc - x0;
                (w.norm().ln(), w / w.norm())
            }
            Ends::Down { x0 } => {
                let d = zc - x0;
                let u = -(d / d.norm()).conj();
                (-d.norm().ln(), u)
            }
            Ends::Circle { a, b } => {
                let s = sigma(a, b);
                let za = (zc - a) * s;
                let zb = zc - b;
                let u = (za / za.norm()) * (zb / zb.norm()).conj();
                (za.norm().ln() - zb.norm().ln(), u)
            }
        }
    }

    /// Inverse frame map applied to `e^mu * u` with `|u| = 1`.
    pub fn from_frame(&self, mu: f64, u: C) -> Xy {
        let out = match self.ends {
            Ends::Up { x0 } => u * mu.exp() + x0,
            Ends::Down { x0 } => C::new(x0, 0.0) - u.conj() * (-mu).exp(),
            Ends::Circle { a, b } => {
                let s = sigma(a, b);
                if mu <= 0.0 {
                    let w = u * mu.exp();
                    (w * b - s * a) / (w - s)
                } else {
                    let v = u.conj() * (-mu).exp();
                    (C::new(b, 0.0) - v * (s * a)) / (C::new(1.0, 0.0) - v * s)
                }
            }
        };
        [out.re, out.im.max(f64::MIN_POSITIVE)]
    }

    pub fn log_lambda(&self, z: Xy) -> f64 {
        self.to_frame(z).0
    }

    /// Signed arclength of the projection of `z` onto the full geodesic.
    pub fn param(&self, z: Xy) -> f64 {
        self.log_lambda(z) - self.s0
    }

    pub fn project_param(&self, z: Xy, len: f64) -> f64 {
        self.param(z).clamp(0.0, len)
    }

    pub fn eval(&self, t: f64) -> Xy {
        self.from_frame(self.s0 + t, C::new(0.0, 1.0))
    }

    /// Point at signed distance `u` along the fibre through `eval(t)`.
    pub fn fiber_point(&self, t: f64, u: f64) -> Xy {
        self.from_frame(self.s0 + t, C::new(u.tanh(), 1.0 / u.cosh()))
    }

    /// Unit chart tangent at `eval(t)`.
    pub fn tangent(&self, t: f64) -> Xy {
        let mu = self.s0 + t;
        let v = match self.ends {
            Ends::Up { .. } => C::new(0.0, 1.0),
            Ends::Down { .. } => C::new(0.0, -1.0),
            Ends::Circle { a, b } => {
                let s = sigma(a, b);
                if mu <= 0.0 {
                    let w = C::new(0.0, mu.exp());
                    w / ((w - s) * (w - s))
                } else {
                    let iv = C::new(0.0, -(-mu).exp());
                    let d = C::new(1.0, 0.0) - iv * s;
                    iv / (d * d)
                }
            }
        };
        let n = v.norm();
        [v.re / n, v.im / n]
    }

    pub fn ideal_to_frame(&self, x: Ideal) -> Ideal {
        match (self.ends, x) {
            (Ends::Up { x0 }, Ideal::Real(x)) => Ideal::Real(x - x0),
            (Ends::Up { .. }, Ideal::Inf) => Ideal::Inf,
            (Ends::Down { x0 }, Ideal::Real(x)) => {
                if x == x0 {
                    Ideal::Inf
                } else {
                    Ideal::Real(-1.0 / (x - x0))
                }
            }
            (Ends::Down { .. }, Ideal::Inf) => Ideal::Real(0.0),
            (Ends::Circle { a, b }, Ideal::Real(x)) => {
                if x == b {
                    Ideal::Inf
                } else {
                    Ideal::Real(sigma(a, b) * (x - a) / (x - b))
                }
            }
            (Ends::Circle { a, b }, Ideal::Inf) => Ideal::Real(sigma(a, b)),
        }
    }

    pub fn ideal_from_frame(&self, w: Ideal) -> Ideal {
        match (self.ends, w) {
            (Ends::Up { x0 }, Ideal::Real(w)) => Ideal::Real(w + x0),
            (Ends::Up { .. }, Ideal::Inf) => Ideal::Inf,
            (Ends::Down { x0 }, Ideal::Real(w)) => {
                if w == 0.0 {
                    Ideal::Inf
                } else {
                    Ideal::Real(x0 - 1.0 / w)
                }
            }
            (Ends::Down { x0 }, Ideal::Inf) => Ideal::Real(x0),
            (Ends::Circle { a, b }, Ideal::Real(w)) => {
                let s = sigma(a, b);
                if w == s {
                    Ideal::Inf
                } else {
                    Ideal::Real((w * b - s * a) / (w - s))
                }
            }
            (Ends::Circle { b, .. }, Ideal::Inf) => Ideal::Real(b),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Xy, b: Xy, tol: f64) -> bool {
        (a[0] - b[0]).abs() < tol && (a[1] - b[1]).abs() < tol
    }

    #[test]
    fn vertical_distance_is_log_ratio() {
        assert!((dist([0.0, 1.0], [0.0, 1f64.exp()]) - 1.0).abs() < 1e-14);
        assert!((dist([3.0, 2.0], [3.0, 0.5]) - 4f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn circle_geodesic_hits_both_ends() {
        for (p, q) in [([0.0, 1.0], [2.0, 0.5]), ([5.0, 0.3], [-1.0, 2.0]), ([0.1, 3.0], [0.2, 3.0])] {
            let g = HypGeo::through(p, q);
            let d = dist(p, q);
            assert!(close(g.eval(0.0), p, 1e-9), "{:?}", g.eval(0.0));
            assert!(close(g.eval(d), q, 1e-9), "{:?} vs {q:?}", g.eval(d));
            let m = g.eval(0.3 * d);
            assert!((dist(p, m) - 0.3 * d).abs() < 1e-9);
            assert!((dist(m, q) - 0.7 * d).abs() < 1e-9);
        }
    }

    #[test]
    fn downward_geodesic() {
        let g = HypGeo::through([1.0, 5.0], [1.0, 1.0]);
        let d = 5f64.ln();
        assert!(close(g.eval(d), [1.0, 1.0], 1e-12));
        assert!(g.tangent(0.5)[1] < -0.99);
    }

    #[test]
    fn fiber_points_project_to_base() {
        let g = HypGeo::through([0.0, 1.0], [3.0, 1.0]);
        for u in [-2.0, -0.3, 0.0, 1.5] {
            let z = g.fiber_point(0.7, u);
            assert!((g.param(z) - 0.7).abs() < 1e-10);
            assert!((dist(z, g.eval(0.7)) - u.abs()).abs() < 1e-9);
        }
    }

    #[test]
    fn exp_map_distance_and_direction() {
        let p = [0.5, 2.0];
        for ang in [0.0, 1.0, 2.5, 4.0, 5.9] {
            let q = exp(p, ang, 1.7);
            assert!((dist(p, q) - 1.7).abs() < 1e-10);
        }
        let up = exp(p, std::f64::consts::FRAC_PI_2, 1.0);
        assert!(close(up, [0.5, 2.0 * 1f64.exp()], 1e-12));
    }

    #[test]
    fn ideal_frames_are_inverse() {
        let g = HypGeo::through([0.0, 1.0], [2.0, 0.5]);
        for x in [-3.0, 0.1, 7.0] {
            match g.ideal_from_frame(g.ideal_to_frame(Ideal::Real(x))) {
                Ideal::Real(y) => assert!((x - y).abs() < 1e-10),
                Ideal::Inf => panic!(),
            }
        }
    }
}
