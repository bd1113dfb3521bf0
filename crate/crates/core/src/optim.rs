//! Derivative-free local search on boxes.

use crate::models::BoxRegion;
use rand::Rng;

#[derive(Clone, Copy, Debug)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    /// Stop once the simplex diameter falls below this (per-axis, absolute).
    pub xtol: f64,
    /// and the spread of function values is below this, relative to `|f_best|`.
    pub ftol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_iter: 2000,
            xtol: 1e-11,
            ftol: 1e-15,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder–Mead minimization of `f` over a box; trial vertices are clipped
/// onto the box. `step` is the initial edge length per axis.
pub fn nelder_mead<F>(
    f: F,
    x0: &[f64],
    step: &[f64],
    bounds: &BoxRegion,
    opts: &NelderMeadOptions,
) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let clip = |x: &mut Vec<f64>| bounds.clamp(x);

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut start = x0.to_vec();
    clip(&mut start);
    simplex.push(start.clone());
    for j in 0..n {
        let mut v = start.clone();
        v[j] += step[j];
        if v[j] > bounds.upper[j] {
            v[j] = start[j] - step[j];
        }
        clip(&mut v);
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

    let mut iterations = 0;
    let mut converged = false;
    let mut order: Vec<usize> = (0..=n).collect();
    while iterations < opts.max_iter {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let (best, worst, second) = (order[0], order[n], order[n.saturating_sub(1)]);

        let diameter = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        let spread = values[worst] - values[best];
        if diameter <= opts.xtol
            || (spread <= opts.ftol * values[best].abs().max(1e-300) && diameter <= 1e-6)
        {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for &i in order.iter().take(n) {
            for (c, v) in centroid.iter_mut().zip(&simplex[i]) {
                *c += v / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            let mut v: Vec<f64> = centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + t * (c - w))
                .collect();
            clip(&mut v);
            v
        };

        let xr = along(1.0);
        let fr = eval(&xr);
        if fr < values[best] {
            let xe = along(2.0);
            let fe = eval(&xe);
            if fe < fr {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[second] {
            simplex[worst] = xr;
            values[worst] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[worst] {
            let xc = along(0.5);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < values[worst].min(fr) {
            simplex[worst] = xc;
            values[worst] = fc;
            continue;
        }
        // shrink towards the best vertex
        let xb = simplex[best].clone();
        for &i in order.iter().skip(1) {
            let mut v: Vec<f64> = simplex[i]
                .iter()
                .zip(&xb)
                .map(|(s, b)| b + 0.5 * (s - b))
                .collect();
            clip(&mut v);
            values[i] = eval(&v);
            simplex[i] = v;
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
        converged,
    }
}

/// Maximizes `f` over a box: scans a uniform grid with `grid_n` points per
/// axis, then polishes the `starts` best grid points with Nelder–Mead and
/// keeps the best. Ties keep the earlier grid point.
pub fn maximize_on_box<F>(f: F, bounds: &BoxRegion, grid_n: usize, starts: usize) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let grid_n = grid_n.max(2);
    let grid = bounds.grid(grid_n);
    let values: Vec<f64> = grid
        .iter()
        .map(|x| {
            let v = f(x);
            if v.is_nan() {
                f64::NEG_INFINITY
            } else {
                v
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));

    let step: Vec<f64> = (0..bounds.dim())
        .map(|j| 0.5 * bounds.width(j) / (grid_n - 1) as f64)
        .collect();
    let opts = NelderMeadOptions::default();
    let mut best_x = grid[order[0]].clone();
    let mut best_v = values[order[0]];
    for &i in order.iter().take(starts.max(1)) {
        let m = nelder_mead(|x| -f(x), &grid[i], &step, bounds, &opts);
        if -m.value > best_v {
            best_v = -m.value;
            best_x = m.x;
        }
    }
    (best_x, best_v)
}

/// Latin hypercube sample of `n` points in a box.
pub fn latin_hypercube<R: Rng + ?Sized>(
    n: usize,
    bounds: &BoxRegion,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let d = bounds.dim();
    let mut pts = vec![vec![0.0; d]; n];
    for j in 0..d {
        let mut strata: Vec<usize> = (0..n).collect();
        // Fisher–Yates
        for i in (1..n).rev() {
            let k = rng.random_range(0..=i);
            strata.swap(i, k);
        }
        for (pt, s) in pts.iter_mut().zip(strata) {
            let u: f64 = rng.random();
            pt[j] = bounds.lower[j] + bounds.width(j) * (s as f64 + u) / n as f64;
        }
    }
    pts
}
