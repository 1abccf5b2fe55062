//! Quadrature of `φ_{E,B,K}(u) = ∫ du / (√2 √(u³ − Bu² − 2Eu + K))`.
//!
//! Along a Maxwell-Bloch orbit `q̈₃² = 2P(q̇₃)` with `P` the cubic above, so
//! on an arc where `q̈₃` keeps its sign `±φ(q̇₃) − t` is constant.

use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;

/// Monic cubic `u³ + c2 u² + c1 u + c0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cubic {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl Cubic {
    /// `u³ − Bu² − 2Eu + K`.
    pub fn maxwell_bloch(e: f64, b: f64, k: f64) -> Self {
        Self {
            c2: -b,
            c1: -2.0 * e,
            c0: k,
        }
    }

    pub fn value(&self, u: f64) -> f64 {
        ((u + self.c2) * u + self.c1) * u + self.c0
    }

    pub fn derivative(&self, u: f64) -> f64 {
        (3.0 * u + 2.0 * self.c2) * u + self.c1
    }

    pub fn second_derivative(&self, u: f64) -> f64 {
        6.0 * u + 2.0 * self.c2
    }

    /// Magnitude of the largest term at `u`, used to judge "zero".
    fn scale(&self, u: f64) -> f64 {
        let a = u.abs();
        1f64.max(a * a * a)
            .max(self.c2.abs() * a * a)
            .max(self.c1.abs() * a)
            .max(self.c0.abs())
    }

    /// Real roots in increasing order, repeated roots listed once.
    pub fn real_roots(&self) -> Vec<f64> {
        let (a, b, c) = (self.c2, self.c1, self.c0);
        let shift = a / 3.0;
        // depressed cubic x³ + px + q with u = x − a/3
        let p = b - a * a / 3.0;
        let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
        let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
        let mut roots = if p == 0.0 && q == 0.0 {
            vec![0.0]
        } else if disc > 0.0 {
            let sq = disc.sqrt();
            vec![(-q / 2.0 + sq).cbrt() + (-q / 2.0 - sq).cbrt()]
        } else {
            let r = (-p / 3.0).sqrt();
            let arg = (3.0 * q / (2.0 * p * r)).clamp(-1.0, 1.0);
            let theta = arg.acos() / 3.0;
            (0..3)
                .map(|k| 2.0 * r * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
                .collect()
        };
        for x in &mut roots {
            let mut u = *x - shift;
            for _ in 0..3 {
                let d = self.derivative(u);
                if d == 0.0 {
                    break;
                }
                let next = u - self.value(u) / d;
                if !next.is_finite() {
                    break;
                }
                u = next;
            }
            *x = u;
        }
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-9 * (1.0 + y.abs()));
        roots
    }
}

/// `P(u) = (u − r)((u − m)² + δ)` with `r` the best-separated real root.
///
/// Near a double root the monomial form cancels catastrophically; this
/// form keeps relative accuracy there.
#[derive(Clone, Copy, Debug)]
struct Factored {
    r: f64,
    m: f64,
    delta: f64,
}

impl Factored {
    fn new(p: &Cubic) -> Self {
        let roots = p.real_roots();
        let r = if roots.len() == 3 {
            let gap = |i: usize| {
                (0..3)
                    .filter(|&j| j != i)
                    .map(|j| (roots[i] - roots[j]).abs())
                    .fold(f64::INFINITY, f64::min)
            };
            roots[(0..3)
                .max_by(|&a, &b| gap(a).total_cmp(&gap(b)))
                .unwrap_or(0)]
        } else {
            // one simple root, or a simple and a double one
            *roots
                .iter()
                .max_by(|a, b| p.derivative(**a).abs().total_cmp(&p.derivative(**b).abs()))
                .expect("a real cubic has a real root")
        };
        // synthetic division by (u − r)
        let a = p.c2 + r;
        let b = p.c1 + r * a;
        let m = -0.5 * a;
        Self {
            r,
            m,
            delta: b - m * m,
        }
    }

    fn value(&self, u: f64) -> f64 {
        let d = u - self.m;
        (u - self.r) * (d * d + self.delta)
    }
}

const ROOT_TOL: f64 = 1e-12;
const ABS_TOL: f64 = 1e-12;
const REL_TOL: f64 = 1e-10;

enum End {
    Regular,
    SimpleRoot { slope: f64, curvature: f64 },
}

fn classify(p: &Cubic, u: f64) -> Result<End> {
    let v = p.value(u);
    let scale = p.scale(u);
    if v.abs() <= ROOT_TOL * scale {
        let slope = p.derivative(u);
        if slope.abs() <= 1e-8 * scale {
            return Err(Error::Domain(format!(
                "u = {u} is a double root of the cubic; the integral diverges there"
            )));
        }
        Ok(End::SimpleRoot {
            slope,
            curvature: p.second_derivative(u),
        })
    } else if v < 0.0 {
        Err(Error::Domain(format!("cubic is negative at u = {u}")))
    } else {
        Ok(End::Regular)
    }
}

/// `∫_{u_from}^{u_to} du / (√2 √P(u))` with `P = u³ − Bu² − 2Eu + K`.
///
/// Endpoints may be simple roots of `P`. The interval is halved and each
/// half uses `u = end ± s²`, which removes the inverse square-root
/// singularity at that end.
pub fn phi_quadrature(u_from: f64, u_to: f64, e: f64, b: f64, k: f64) -> Result<f64> {
    if !(u_from.is_finite() && u_to.is_finite() && e.is_finite() && b.is_finite() && k.is_finite())
    {
        return Err(Error::Domain("non-finite argument".into()));
    }
    if u_from == u_to {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if u_from < u_to {
        (u_from, u_to, 1.0)
    } else {
        (u_to, u_from, -1.0)
    };
    let p = Cubic::maxwell_bloch(e, b, k);
    let lo_end = classify(&p, lo)?;
    let hi_end = classify(&p, hi)?;
    let width_tol = 1e-10 * (1.0 + lo.abs().max(hi.abs()));
    if let Some(r) = p
        .real_roots()
        .into_iter()
        .find(|&r| r > lo + width_tol && r < hi - width_tol)
    {
        return Err(Error::Domain(format!(
            "cubic vanishes at u = {r} inside [{lo}, {hi}]"
        )));
    }
    let mid = 0.5 * (lo + hi);
    if p.value(mid) <= 0.0 {
        return Err(Error::Domain(format!(
            "cubic is not positive on ({lo}, {hi})"
        )));
    }
    let pf = Factored::new(&p);
    let half = (0.5 * (hi - lo)).sqrt();
    let left = match lo_end {
        End::SimpleRoot { slope, curvature } => integrate_adaptive(
            |s| {
                let x = s * s;
                2.0 / (2.0 * (slope + 0.5 * curvature * x + x * x)).sqrt()
            },
            0.0,
            half,
            ABS_TOL,
            REL_TOL,
        )?,
        End::Regular => integrate_adaptive(
            |s| 2.0 * s / (2.0 * pf.value(lo + s * s)).sqrt(),
            0.0,
            half,
            ABS_TOL,
            REL_TOL,
        )?,
    };
    let right = match hi_end {
        End::SimpleRoot { slope, curvature } => integrate_adaptive(
            |s| {
                let x = s * s;
                2.0 / (2.0 * (-slope + 0.5 * curvature * x - x * x)).sqrt()
            },
            0.0,
            half,
            ABS_TOL,
            REL_TOL,
        )?,
        End::Regular => integrate_adaptive(
            |s| 2.0 * s / (2.0 * pf.value(hi - s * s)).sqrt(),
            0.0,
            half,
            ABS_TOL,
            REL_TOL,
        )?,
    };
    Ok(sign * (left + right))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_cube() {
        let v = phi_quadrature(1.0, 4.0, 0.0, 0.0, 0.0).unwrap();
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12, "{v}");
        let r = phi_quadrature(4.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert!((r + v).abs() < 1e-14);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(phi_quadrature(0.3, 0.3, 3.0, -1.0, -6.0).unwrap(), 0.0);
    }

    #[test]
    fn homoclinic_travel_time() {
        // q̇₃ = 1 − 2 sech² t is increasing for t > 0
        let u = |t: f64| 1.0 - 2.0 / t.cosh().powi(2);
        for (t1, t2) in [(0.5, 2.0), (0.1, 4.0), (1.0, 1.5)] {
            let v = phi_quadrature(u(t1), u(t2), 0.5, 1.0, 1.0).unwrap();
            assert!((v - (t2 - t1)).abs() < 1e-10, "{v} vs {}", t2 - t1);
        }
    }

    #[test]
    fn simple_root_endpoint() {
        // P = (u + 1)(u − 2)(u − 5) has a simple root at −1
        // ∫_{-1}^{1} du/√(2P) computed by a fine midpoint rule in s
        let (e, b, k) = (-3.0 / 2.0, 6.0, 10.0);
        let p = Cubic::maxwell_bloch(e, b, k);
        assert!(p.value(-1.0).abs() < 1e-12);
        let v = phi_quadrature(-1.0, 1.0, e, b, k).unwrap();
        let n = 200_000;
        let smax = 2f64.sqrt();
        let mut reference = 0.0;
        for i in 0..n {
            let s = (i as f64 + 0.5) * smax / n as f64;
            reference += 2.0 * s / (2.0 * p.value(-1.0 + s * s)).sqrt();
        }
        reference *= smax / n as f64;
        assert!((v - reference).abs() < 1e-8, "{v} vs {reference}");
        let both = phi_quadrature(-1.0, 2.0, e, b, k).unwrap();
        assert!(both.is_finite() && both > v);
    }

    #[test]
    fn rejects_interior_roots_and_double_roots() {
        assert!(matches!(
            phi_quadrature(-2.0, 3.0, 0.5, 1.0, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            phi_quadrature(0.0, 1.0, 0.5, 1.0, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            phi_quadrature(3.0, 4.0, -1.5, 6.0, 10.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn factored_form_is_accurate_near_a_double_root() {
        let p = Cubic::maxwell_bloch(0.5, 1.0, 1.0);
        let f = Factored::new(&p);
        for gap in [1e-3, 1e-6, 1e-7] {
            let u: f64 = 1.0 - gap;
            let d = 1.0 - u;
            let exact = d * d * (2.0 - d);
            assert!((f.value(u) - exact).abs() <= 1e-14 * exact, "{gap}");
        }
        let g = Factored::new(&Cubic::maxwell_bloch(3.0, -1.0, -6.0));
        for u in [-3.0, -2.0, 0.0, 2.7] {
            assert!((g.value(u) - (u + 1.0) * (u * u - 6.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_roots() {
        let p = Cubic::maxwell_bloch(3.0, -1.0, -6.0);
        let r = p.real_roots();
        assert_eq!(r.len(), 3);
        let want = [-6f64.sqrt(), -1.0, 6f64.sqrt()];
        for (a, b) in r.iter().zip(want) {
            assert!((a - b).abs() < 1e-13);
        }
        let h = Cubic::maxwell_bloch(0.5, 1.0, 1.0).real_roots();
        assert!((h[0] + 1.0).abs() < 1e-12);
        assert!(h.iter().any(|r| (r - 1.0).abs() < 1e-6));
        assert_eq!(Cubic::maxwell_bloch(0.0, 0.0, 0.0).real_roots(), vec![0.0]);
        let one = Cubic {
            c2: 0.0,
            c1: 1.0,
            c0: 1.0,
        }
        .real_roots();
        assert_eq!(one.len(), 1);
        assert!(
            Cubic {
                c2: 0.0,
                c1: 1.0,
                c0: 1.0
            }
            .value(one[0])
            .abs()
                < 1e-14
        );
    }
}
