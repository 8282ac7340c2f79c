//! Minimization of a player's priced cost `h(x) = g_i(x) + l' x` over a box
//! `[0, upper]^n`. `h` is convex, so coordinate descent with exact 1-D
//! steps (bisection on the partial derivative) drives it to the minimum.

use crate::game::GameSpec;

pub(crate) fn priced_cost(spec: &GameSpec, i: usize, prices: &[f64], x: &[f64]) -> f64 {
    spec.cost_at(i, x) + super::dot(prices, x)
}

fn priced_partial(spec: &GameSpec, i: usize, prices: &[f64], x: &[f64], k: usize) -> f64 {
    spec.partial_cost_at(i, k, x) + prices[k]
}

/// Exact minimizer of `h` along coordinate `k` within `[0, upper]`.
fn line_minimize(spec: &GameSpec, i: usize, prices: &[f64], x: &mut [f64], k: usize, upper: f64) {
    let slope = |t: f64, x: &mut [f64]| {
        x[k] = t;
        priced_partial(spec, i, prices, x, k)
    };
    if slope(0.0, x) >= 0.0 {
        x[k] = 0.0;
        return;
    }
    if slope(upper, x) <= 0.0 {
        x[k] = upper;
        return;
    }
    let (mut lo, mut hi) = (0.0, upper);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid, x) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    x[k] = 0.5 * (lo + hi);
}

/// Cyclic coordinate descent from `start`. Returns the final point and
/// its priced cost.
pub(crate) fn coordinate_descent(
    spec: &GameSpec,
    i: usize,
    prices: &[f64],
    start: &[f64],
    upper: f64,
    sweeps: usize,
) -> (Vec<f64>, f64) {
    let mut x: Vec<f64> = start.iter().map(|v| v.clamp(0.0, upper)).collect();
    let mut value = priced_cost(spec, i, prices, &x);
    for _ in 0..sweeps {
        let before = x.clone();
        for k in 0..x.len() {
            line_minimize(spec, i, prices, &mut x, k, upper);
        }
        let new_value = priced_cost(spec, i, prices, &x);
        let moved = x
            .iter()
            .zip(&before)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        value = new_value;
        if moved <= 1e-15 * (1.0 + upper) {
            break;
        }
    }
    (x, value)
}

/// Points on the coordinate axes and coordinate planes through `center`,
/// spaced `spacing` apart, `reach` steps each way, clipped to `x >= 0`.
pub(crate) fn local_grid(
    center: &[f64],
    spacing: f64,
    axis_reach: i32,
    plane_reach: i32,
) -> Vec<Vec<f64>> {
    let n = center.len();
    let mut points = Vec::new();
    for k in 0..n {
        for s in -axis_reach..=axis_reach {
            if s == 0 {
                continue;
            }
            let mut p = center.to_vec();
            p[k] += s as f64 * spacing;
            if p[k] >= 0.0 {
                points.push(p);
            }
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            for sa in -plane_reach..=plane_reach {
                for sb in -plane_reach..=plane_reach {
                    if sa == 0 || sb == 0 {
                        continue;
                    }
                    let mut p = center.to_vec();
                    p[a] += sa as f64 * spacing;
                    p[b] += sb as f64 * spacing;
                    if p[a] >= 0.0 && p[b] >= 0.0 {
                        points.push(p);
                    }
                }
            }
        }
    }
    points
}
