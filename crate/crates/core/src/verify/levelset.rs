//! Marching-squares extraction of `ψ_{E,B}(u, v) = K`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::systems::maxwell_bloch::{psi, psi_gradient};

/// One connected piece of a level set.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSetPolyline {
    pub points: Vec<(f64, f64)>,
    /// First and last points coincide when closed (the point is not repeated).
    pub closed: bool,
    /// Every vertex has `|u| ≤ √(2E)`, up to one grid cell.
    pub inside_stripe: bool,
    /// The initial point lies within one grid cell of the curve.
    pub contains_initial: bool,
    /// Inside the stripe and through the initial point (if one was given).
    pub accessible: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelSetOptions {
    /// Number of grid vertices along `u` and `v`.
    pub grid: (usize, usize),
    pub initial: Option<(f64, f64)>,
    /// One Newton step along `∇ψ` per vertex.
    pub polish: bool,
}

impl Default for LevelSetOptions {
    fn default() -> Self {
        Self {
            grid: (256, 256),
            initial: None,
            polish: false,
        }
    }
}

/// Larger side of the window; vertex residuals are judged against it.
pub fn window_scale(u_range: (f64, f64), v_range: (f64, f64)) -> f64 {
    (u_range.1 - u_range.0)
        .abs()
        .max((v_range.1 - v_range.0).abs())
}

fn check_range(name: &str, r: (f64, f64)) -> Result<bool> {
    if !(r.0.is_finite() && r.1.is_finite()) {
        return Err(Error::Config(format!("{name} range must be finite")));
    }
    if r.1 < r.0 {
        return Err(Error::Config(format!(
            "{name} range is reversed: [{}, {}]",
            r.0, r.1
        )));
    }
    Ok(r.1 > r.0)
}

pub fn level_set(
    e: f64,
    b: f64,
    k: f64,
    u_range: (f64, f64),
    v_range: (f64, f64),
    options: &LevelSetOptions,
) -> Result<Vec<LevelSetPolyline>> {
    let (nu, nv) = options.grid;
    if nu < 32 || nv < 32 {
        return Err(Error::Config(format!(
            "level-set grid must be at least 32x32, got {nu}x{nv}"
        )));
    }
    let nonempty_u = check_range("u", u_range)?;
    let nonempty_v = check_range("v", v_range)?;
    if !(nonempty_u && nonempty_v) {
        return Ok(Vec::new());
    }
    let hu = (u_range.1 - u_range.0) / (nu - 1) as f64;
    let hv = (v_range.1 - v_range.0) / (nv - 1) as f64;
    let u_at = |i: usize| u_range.0 + hu * i as f64;
    let v_at = |j: usize| v_range.0 + hv * j as f64;
    let f: Vec<f64> = (0..nv)
        .flat_map(|j| (0..nu).map(move |i| (i, j)))
        .map(|(i, j)| psi(e, b, u_at(i), v_at(j)) - k)
        .collect();
    let at = |i: usize, j: usize| f[j * nu + i];

    // edge ids: 2·vertex for the edge towards +u, 2·vertex + 1 towards +v
    let mut points: HashMap<usize, (f64, f64)> = HashMap::new();
    let mut crossing = |id: usize| -> Option<usize> {
        let vtx = id / 2;
        let (i, j) = (vtx % nu, vtx / nu);
        let (i2, j2) = if id.is_multiple_of(2) {
            (i + 1, j)
        } else {
            (i, j + 1)
        };
        let (f0, f1) = (at(i, j), at(i2, j2));
        if (f0 > 0.0) == (f1 > 0.0) {
            return None;
        }
        points.entry(id).or_insert_with(|| {
            let s = f0 / (f0 - f1);
            let (u0, v0) = (u_at(i), v_at(j));
            (u0 + s * (u_at(i2) - u0), v0 + s * (v_at(j2) - v0))
        });
        Some(id)
    };

    let mut segments: Vec<(usize, usize)> = Vec::new();
    for j in 0..nv - 1 {
        for i in 0..nu - 1 {
            let base = j * nu + i;
            // counter-clockwise: bottom, right, top, left
            let edges = [2 * base, 2 * (base + 1) + 1, 2 * (base + nu), 2 * base + 1];
            let hits: Vec<usize> = edges.iter().filter_map(|&id| crossing(id)).collect();
            match hits.len() {
                2 => segments.push((hits[0], hits[1])),
                4 => {
                    let centre = 0.25 * (at(i, j) + at(i + 1, j) + at(i + 1, j + 1) + at(i, j + 1));
                    if (centre > 0.0) == (at(i, j) > 0.0) {
                        // corners 0 and 2 joined through the centre
                        segments.push((hits[0], hits[1]));
                        segments.push((hits[2], hits[3]));
                    } else {
                        segments.push((hits[3], hits[0]));
                        segments.push((hits[1], hits[2]));
                    }
                }
                _ => {}
            }
        }
    }

    let chains = chain(&segments);
    let stripe = (2.0 * e).max(0.0).sqrt();
    let reach = hu.hypot(hv);
    let mut out = Vec::with_capacity(chains.len());
    for (ids, closed) in chains {
        let mut pts: Vec<(f64, f64)> = ids.iter().map(|id| points[id]).collect();
        if options.polish {
            for p in &mut pts {
                let r = psi(e, b, p.0, p.1) - k;
                let (gu, gv) = psi_gradient(e, b, p.0, p.1);
                let g2 = gu * gu + gv * gv;
                if g2 > 0.0 {
                    *p = (p.0 - r * gu / g2, p.1 - r * gv / g2);
                }
            }
        }
        let inside_stripe = pts.iter().all(|p| p.0.abs() <= stripe + hu);
        let contains_initial = options
            .initial
            .is_some_and(|x| distance_to_polyline(x, &pts, closed) <= reach);
        let accessible = inside_stripe && (options.initial.is_none() || contains_initial);
        out.push(LevelSetPolyline {
            points: pts,
            closed,
            inside_stripe,
            contains_initial,
            accessible,
        });
    }
    Ok(out)
}

/// Joins segments sharing an edge crossing into ordered chains.
fn chain(segments: &[(usize, usize)]) -> Vec<(Vec<usize>, bool)> {
    let mut by_edge: HashMap<usize, Vec<usize>> = HashMap::new();
    for (s, &(a, b)) in segments.iter().enumerate() {
        by_edge.entry(a).or_default().push(s);
        by_edge.entry(b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let next = |used: &mut [bool], at: usize| -> Option<usize> {
        let s = *by_edge[&at].iter().find(|&&s| !used[s])?;
        used[s] = true;
        let (a, b) = segments[s];
        Some(if a == at { b } else { a })
    };
    let mut chains = Vec::new();
    for s in 0..segments.len() {
        if used[s] {
            continue;
        }
        used[s] = true;
        let (a, b) = segments[s];
        let mut fwd = vec![a, b];
        while let Some(e) = next(&mut used, *fwd.last().unwrap()) {
            if e == a {
                fwd.push(e);
                break;
            }
            fwd.push(e);
        }
        if fwd.len() > 2 && fwd.first() == fwd.last() {
            fwd.pop();
            chains.push((fwd, true));
            continue;
        }
        let mut back = Vec::new();
        let mut at = a;
        while let Some(e) = next(&mut used, at) {
            back.push(e);
            at = e;
        }
        back.reverse();
        back.extend(fwd);
        chains.push((back, false));
    }
    chains
}

fn distance_to_polyline(p: (f64, f64), pts: &[(f64, f64)], closed: bool) -> f64 {
    if pts.len() == 1 {
        return (p.0 - pts[0].0).hypot(p.1 - pts[0].1);
    }
    let n = pts.len();
    let count = if closed { n } else { n - 1 };
    (0..count)
        .map(|i| segment_distance(p, pts[i], pts[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let s = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p.0 - a.0 - s * dx).hypot(p.1 - a.1 - s * dy)
}
