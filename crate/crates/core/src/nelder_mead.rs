//! Derivative-free simplex minimization (Nelder-Mead).
//!
//! Standard coefficients: reflection 1, expansion 2, contraction 1/2,
//! shrink 1/2. The objective is called for every trial point, so callers can
//! observe the full evaluation sequence.

/// Stopping controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    /// Upper bound on simplex updates.
    pub max_iters: usize,
    /// Stop once every vertex lies within this distance of the best vertex,
    /// coordinate by coordinate.
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The simplex collapsed below the tolerance.
    Converged,
    IterationLimit,
    /// The objective returned NaN or an infinity.
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
}

struct Vertex {
    x: Vec<f64>,
    f: f64,
}

/// Minimizes `f` from `x0` using an axis-aligned initial simplex with the
/// given per-coordinate step sizes.
///
/// `f` receives the 0-based iteration index it is evaluated under (0 for
/// the initial simplex) along with the point.
pub fn minimize<F>(mut f: F, x0: &[f64], steps: &[f64], opts: Options) -> Report
where
    F: FnMut(usize, &[f64]) -> f64,
{
    assert_eq!(x0.len(), steps.len(), "one step size per coordinate");
    let n = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |iter: usize, x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        f(iter, x)
    };

    let mut simplex: Vec<Vertex> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut x = x0.to_vec();
        if i > 0 {
            x[i - 1] += steps[i - 1];
        }
        let fx = eval(0, &x, &mut evaluations);
        if !fx.is_finite() {
            return Report {
                x,
                value: fx,
                iterations: 0,
                evaluations,
                termination: Termination::NonFinite,
            };
        }
        simplex.push(Vertex { x, f: fx });
    }

    let mut iterations = 0;
    let termination = loop {
        // Stable sort keeps earlier vertices ahead on ties, so runs replay exactly.
        simplex.sort_by(|a, b| a.f.total_cmp(&b.f));
        if collapsed(&simplex, opts.tolerance) {
            break Termination::Converged;
        }
        if iterations >= opts.max_iters {
            break Termination::IterationLimit;
        }
        iterations += 1;
        let it = iterations;

        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|v| v.x[d]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64, toward: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(toward)
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let worst = simplex[n].x.clone();
        let (f_best, f_second, f_worst) = (simplex[0].f, simplex[n - 1].f, simplex[n].f);

        let xr = along(-1.0, &worst);
        let fr = eval(it, &xr, &mut evaluations);
        if !fr.is_finite() {
            break Termination::NonFinite;
        }

        if fr < f_best {
            let xe = along(-2.0, &worst);
            let fe = eval(it, &xe, &mut evaluations);
            if !fe.is_finite() {
                break Termination::NonFinite;
            }
            simplex[n] = if fe < fr {
                Vertex { x: xe, f: fe }
            } else {
                Vertex { x: xr, f: fr }
            };
            continue;
        }
        if fr < f_second {
            simplex[n] = Vertex { x: xr, f: fr };
            continue;
        }

        let outside = fr < f_worst;
        let xc = if outside {
            along(-0.5, &worst)
        } else {
            along(0.5, &worst)
        };
        let fc = eval(it, &xc, &mut evaluations);
        if !fc.is_finite() {
            break Termination::NonFinite;
        }
        if (outside && fc <= fr) || (!outside && fc < f_worst) {
            simplex[n] = Vertex { x: xc, f: fc };
            continue;
        }

        // Shrink toward the best vertex.
        let best = simplex[0].x.clone();
        let mut failed = false;
        for v in simplex.iter_mut().skip(1) {
            for (xd, bd) in v.x.iter_mut().zip(&best) {
                *xd = bd + 0.5 * (*xd - bd);
            }
            v.f = eval(it, &v.x, &mut evaluations);
            if !v.f.is_finite() {
                failed = true;
                break;
            }
        }
        if failed {
            break Termination::NonFinite;
        }
    };

    simplex.sort_by(|a, b| a.f.total_cmp(&b.f));
    let best = simplex.swap_remove(0);
    Report {
        x: best.x,
        value: best.f,
        iterations,
        evaluations,
        termination,
    }
}

fn collapsed(simplex: &[Vertex], tol: f64) -> bool {
    let best = &simplex[0].x;
    simplex[1..]
        .iter()
        .all(|v| v.x.iter().zip(best).all(|(a, b)| (a - b).abs() < tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    const OPTS: Options = Options {
        max_iters: 2000,
        tolerance: 1e-10,
    };

    #[test]
    fn quadratic_bowl() {
        let r = minimize(
            |_, x| (x[0] - 1.5).powi(2) + 3.0 * (x[1] + 0.25).powi(2),
            &[0.0, 0.0],
            &[0.25, 0.25],
            OPTS,
        );
        assert_eq!(r.termination, Termination::Converged);
        assert!((r.x[0] - 1.5).abs() < 1e-8 && (r.x[1] + 0.25).abs() < 1e-8);
    }

    #[test]
    fn rosenbrock() {
        let r = minimize(
            |_, x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &[0.1, 0.1],
            OPTS,
        );
        assert!(r.value < 1e-12, "{r:?}");
        assert!((r.x[0] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn polyhedral_minimum() {
        let r = minimize(
            |_, x| (x[0] - 0.3).abs() + 2.0 * (x[1] - x[0]).abs(),
            &[2.0, -1.0],
            &[0.25, 0.25],
            OPTS,
        );
        assert!(r.value < 1e-8, "{r:?}");
    }

    #[test]
    fn iteration_cap_is_respected() {
        let mut seen_max = 0;
        let r = minimize(
            |it, x| {
                seen_max = seen_max.max(it);
                (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
            },
            &[-1.2, 1.0],
            &[0.1, 0.1],
            Options {
                max_iters: 7,
                tolerance: 1e-12,
            },
        );
        assert_eq!(r.iterations, 7);
        assert_eq!(seen_max, 7);
        assert_eq!(r.termination, Termination::IterationLimit);
    }

    #[test]
    fn aborts_on_nan() {
        let r = minimize(
            |_, x| if x[0] > 0.6 { f64::NAN } else { -x[0] },
            &[0.0, 0.0],
            &[0.25, 0.25],
            OPTS,
        );
        assert_eq!(r.termination, Termination::NonFinite);
    }

    #[test]
    fn deterministic() {
        let f = |_: usize, x: &[f64]| (x[0].sin() + x[1]).abs() + 0.1 * x[0] * x[0];
        let a = minimize(f, &[1.0, 2.0], &[0.25, 0.25], OPTS);
        let b = minimize(f, &[1.0, 2.0], &[0.25, 0.25], OPTS);
        assert_eq!(a, b);
    }
}
