//! Bounded Nelder–Mead simplex minimization.
//!
//! Trial points are projected onto the parameter box. Non-finite objective
//! values are treated as `+∞`, so a failing evaluation simply rejects the
//! trial point.

/// Box constraints; use infinities for open sides.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn unbounded(dim: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn is_valid(&self) -> bool {
        self.lower.len() == self.upper.len()
            && self
                .lower
                .iter()
                .zip(&self.upper)
                .all(|(l, u)| !l.is_nan() && !u.is_nan() && l <= u)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    fn project(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOptions {
    /// Iteration cap shared by the initial run and the restart.
    pub max_iterations: usize,
    /// Per-coordinate tolerance is `xtol_rel · max(|x_i|, step_i) + xtol_abs`.
    pub xtol_rel: f64,
    pub xtol_abs: f64,
    /// Restart once from the best point with a fresh simplex.
    pub restart: bool,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            xtol_rel: 1e-10,
            xtol_abs: 0.0,
            restart: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best objective value after every iteration.
    pub history: Vec<f64>,
}

struct Vertex {
    x: Vec<f64>,
    f: f64,
}

/// Minimize `objective` from `start` with initial simplex edge lengths `steps`.
///
/// A zero step fixes that coordinate. The start is projected into `bounds`.
pub fn minimize<F>(
    mut objective: F,
    start: &[f64],
    steps: &[f64],
    bounds: &Bounds,
    options: &SimplexOptions,
) -> SimplexOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = start.len();
    assert_eq!(steps.len(), dim, "one step per coordinate");
    assert_eq!(bounds.dim(), dim, "one bound per coordinate");

    let free: Vec<usize> = (0..dim).filter(|&i| steps[i] != 0.0).collect();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = objective(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut x0 = start.to_vec();
    bounds.project(&mut x0);
    let f0 = eval(&x0);
    if free.is_empty() {
        return SimplexOutcome {
            x: x0,
            value: f0,
            iterations: 0,
            evaluations,
            converged: true,
            history: vec![f0],
        };
    }

    let mut best = Vertex { x: x0, f: f0 };
    let mut history = vec![f0];
    let mut iterations = 0;
    let mut converged = false;
    let runs = if options.restart { 2 } else { 1 };

    for _ in 0..runs {
        let (vertex, conv) = run(
            &mut eval,
            best,
            steps,
            &free,
            bounds,
            options,
            &mut iterations,
            &mut history,
        );
        best = vertex;
        converged = conv;
        if !conv {
            break;
        }
    }
    // `eval` borrows `evaluations` mutably
    drop(eval);

    SimplexOutcome {
        x: best.x,
        value: best.f,
        iterations,
        evaluations,
        converged,
        history,
    }
}

#[allow(clippy::too_many_arguments)]
fn run<E: FnMut(&[f64]) -> f64>(
    eval: &mut E,
    start: Vertex,
    steps: &[f64],
    free: &[usize],
    bounds: &Bounds,
    options: &SimplexOptions,
    iterations: &mut usize,
    history: &mut Vec<f64>,
) -> (Vertex, bool) {
    let n = free.len();
    let mut simplex = Vec::with_capacity(n + 1);
    for &i in free {
        let mut x = start.x.clone();
        let mut candidate = x[i] + steps[i];
        if candidate > bounds.upper[i] || candidate < bounds.lower[i] {
            candidate = x[i] - steps[i];
        }
        x[i] = candidate;
        bounds.project(&mut x);
        let f = eval(&x);
        simplex.push(Vertex { x, f });
    }
    simplex.push(start);

    let tol: Vec<f64> = (0..steps.len())
        .map(|i| options.xtol_rel * steps[i].abs() + options.xtol_abs)
        .collect();

    loop {
        simplex.sort_by(|a, b| a.f.total_cmp(&b.f));
        if is_converged(&simplex, free, &tol, options.xtol_rel) {
            let best = simplex.swap_remove(0);
            return (best, true);
        }
        if *iterations >= options.max_iterations {
            let best = simplex.swap_remove(0);
            return (best, false);
        }
        *iterations += 1;

        let centroid: Vec<f64> = {
            let mut c = vec![0.0; simplex[0].x.len()];
            for v in &simplex[..n] {
                for (ci, xi) in c.iter_mut().zip(&v.x) {
                    *ci += xi / n as f64;
                }
            }
            c
        };
        let along = |coef: f64, worst: &[f64]| {
            let mut x: Vec<f64> = centroid
                .iter()
                .zip(worst)
                .map(|(c, w)| c + coef * (c - w))
                .collect();
            bounds.project(&mut x);
            x
        };

        let worst = simplex[n].x.clone();
        let f_best = simplex[0].f;
        let f_second = simplex[n - 1].f;
        let f_worst = simplex[n].f;

        let xr = along(1.0, &worst);
        let fr = eval(&xr);
        if fr < f_best {
            let xe = along(2.0, &worst);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { Vertex { x: xe, f: fe } } else { Vertex { x: xr, f: fr } };
        } else if fr < f_second {
            simplex[n] = Vertex { x: xr, f: fr };
        } else {
            let (xc, fc) = if fr < f_worst {
                let xc = along(0.5, &worst);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-0.5, &worst);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < f_worst.min(fr) {
                simplex[n] = Vertex { x: xc, f: fc };
            } else {
                let anchor = simplex[0].x.clone();
                for v in simplex.iter_mut().skip(1) {
                    for (xi, ai) in v.x.iter_mut().zip(&anchor) {
                        *xi = ai + 0.5 * (*xi - ai);
                    }
                    v.f = eval(&v.x);
                }
            }
        }
        let current = simplex.iter().map(|v| v.f).fold(f64::INFINITY, f64::min);
        let last = *history.last().expect("history seeded");
        history.push(current.min(last));
    }
}

fn is_converged(simplex: &[Vertex], free: &[usize], tol: &[f64], xtol_rel: f64) -> bool {
    let best = &simplex[0].x;
    free.iter().all(|&i| {
        let limit = tol[i] + xtol_rel * best[i].abs();
        simplex[1..].iter().all(|v| (v.x[i] - best[i]).abs() <= limit)
    })
}
