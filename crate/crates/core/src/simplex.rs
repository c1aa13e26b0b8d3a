//! Nelder–Mead simplex minimizer.

use crate::scalar::{c, Real};

#[derive(Debug, Clone)]
pub(crate) struct SimplexOutcome<T> {
    pub x: Vec<T>,
    pub iterations: usize,
}

/// Minimizes `f` from `start` with an axis-aligned initial simplex of edge
/// `step`. Non-finite objective values act as walls. Stops when the spread of
/// simplex values falls below `rel_tol·(|f_best| + tiny)` or after
/// `max_iter` iterations.
pub(crate) fn minimize<T: Real>(
    f: impl Fn(&[T]) -> T,
    start: &[T],
    step: &[T],
    rel_tol: T,
    max_iter: usize,
) -> SimplexOutcome<T> {
    let n = start.len();
    let eval = |x: &[T]| {
        let v = f(x);
        if v.is_nan() {
            T::infinity()
        } else {
            v
        }
    };
    let mut pts: Vec<Vec<T>> = Vec::with_capacity(n + 1);
    pts.push(start.to_vec());
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] = p[i] + step[i];
        pts.push(p);
    }
    let mut vals: Vec<T> = pts.iter().map(|p| eval(p)).collect();
    let (alpha, gamma, rho, sigma) = (T::one(), c::<T>(2.0), c::<T>(0.5), c::<T>(0.5));
    let tiny = c::<T>(1e-300).max(T::min_positive_value());
    let mut iterations = 0;
    while iterations < max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).expect("no NaN after eval"));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        let (best, worst) = (vals[0], vals[n]);
        if best.is_finite() && worst.is_finite() && (worst - best) <= rel_tol * (best.abs() + tiny)
        {
            let size = (1..=n)
                .flat_map(|k| (0..n).map(move |d| (k, d)))
                .fold(T::zero(), |m, (k, d)| m.max((pts[k][d] - pts[0][d]).abs()));
            let scale = pts[0].iter().fold(T::one(), |m, x| m.max(x.abs()));
            if size <= c::<T>(1e-10) * scale {
                break;
            }
        }
        iterations += 1;
        let centroid: Vec<T> = (0..n)
            .map(|d| pts[..n].iter().map(|p| p[d]).sum::<T>() / c(n as f64))
            .collect();
        let along = |t: T| -> Vec<T> {
            (0..n)
                .map(|d| centroid[d] + t * (pts[n][d] - centroid[d]))
                .collect()
        };
        let xr = along(-alpha);
        let fr = eval(&xr);
        if fr < vals[0] {
            let xe = along(-gamma);
            let fe = eval(&xe);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let x = along(-rho);
            let v = eval(&x);
            (x, v)
        } else {
            let x = along(rho);
            let v = eval(&x);
            (x, v)
        };
        if fc < vals[n].min(fr) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        for k in 1..=n {
            let p: Vec<T> = (0..n)
                .map(|d| pts[0][d] + sigma * (pts[k][d] - pts[0][d]))
                .collect();
            vals[k] = eval(&p);
            pts[k] = p;
        }
    }
    let (ib, _) =
        vals.iter().enumerate().fold(
            (0, T::infinity()),
            |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc },
        );
    SimplexOutcome {
        x: pts[ib].clone(),
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let out = minimize(f, &[-1.2, 1.0], &[0.1, 0.1], 1e-14, 5000);
        assert!((out.x[0] - 1.0).abs() < 1e-5, "{:?}", out.x);
        assert!((out.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn walls_are_respected() {
        // Minimum of the parabola lies outside the feasible half-plane x > 0.
        let f = |x: &[f64]| {
            if x[0] <= 0.0 {
                f64::INFINITY
            } else {
                (x[0] + 1.0).powi(2) + x[1] * x[1]
            }
        };
        let out = minimize(f, &[1.0, 1.0], &[0.5, 0.5], 1e-12, 2000);
        assert!(out.x[0] > 0.0 && out.x[0] < 1e-4);
        assert!(out.x[1].abs() < 1e-4);
    }

    #[test]
    fn zero_budget_returns_start() {
        let f = |x: &[f64]| x[0] * x[0];
        let out = minimize(f, &[0.5], &[0.1], 1e-12, 0);
        assert_eq!(out.x, vec![0.5]);
        assert_eq!(out.iterations, 0);
    }
}
