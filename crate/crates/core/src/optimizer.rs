//! Derivative-free minimization: Powell's conjugate-direction method with
//! bracketing plus Brent line searches, a hard cap on objective
//! evaluations, and a full evaluation trace.
//!
//! The objective may be stochastic; every call is recorded and the reported
//! optimum is the best evaluation seen anywhere in the trace.

use rand::Rng;

const GOLD: f64 = 1.618_034;
const GLIMIT: f64 = 100.0;
const TINY: f64 = 1e-20;
const ZEPS: f64 = 1e-11;
/// Evaluation cap per line search (bracketing plus refinement).
const LINE_EVAL_CAP: usize = 20;

/// Why the optimizer stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The evaluation budget was consumed.
    BudgetExhausted,
    /// Relative improvement over a full direction sweep fell below the
    /// tolerance.
    Converged,
    /// The objective returned a non-finite value; the trace holds
    /// everything up to and including that call.
    NonFinite,
}

impl Termination {
    pub fn tag(&self) -> &'static str {
        match self {
            Termination::BudgetExhausted => "budget",
            Termination::Converged => "converged",
            Termination::NonFinite => "non_finite",
        }
    }
}

/// Complete record of one minimization run.
#[derive(Debug, Clone)]
pub struct OptimizationTrace {
    /// Every objective call, in order: (parameters, observed value).
    pub evaluations: Vec<(Vec<f64>, f64)>,
    pub best_value: f64,
    pub best_params: Vec<f64>,
    pub evaluations_used: usize,
    pub termination: Termination,
}

impl OptimizationTrace {
    /// Running minimum of observed values per evaluation index.
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.evaluations
            .iter()
            .map(|(_, v)| {
                if v.is_finite() && *v < best {
                    best = *v;
                }
                best
            })
            .collect()
    }
}

enum Stop {
    Budget,
    NonFinite,
}

struct Recorder<F> {
    objective: F,
    budget: usize,
    evaluations: Vec<(Vec<f64>, f64)>,
    best_value: f64,
    best_params: Vec<f64>,
}

impl<F: FnMut(&[f64]) -> f64> Recorder<F> {
    fn new(objective: F, budget: usize, x0: &[f64]) -> Self {
        Self {
            objective,
            budget,
            evaluations: Vec::new(),
            best_value: f64::INFINITY,
            best_params: x0.to_vec(),
        }
    }

    fn eval(&mut self, x: &[f64]) -> Result<f64, Stop> {
        if self.evaluations.len() >= self.budget {
            return Err(Stop::Budget);
        }
        let value = (self.objective)(x);
        self.evaluations.push((x.to_vec(), value));
        if !value.is_finite() {
            return Err(Stop::NonFinite);
        }
        if value < self.best_value {
            self.best_value = value;
            self.best_params = x.to_vec();
        }
        Ok(value)
    }

    fn finish(self, termination: Termination) -> OptimizationTrace {
        OptimizationTrace {
            evaluations_used: self.evaluations.len(),
            evaluations: self.evaluations,
            best_value: self.best_value,
            best_params: self.best_params,
            termination,
        }
    }
}

enum LineStop {
    Global(Stop),
    LocalCap,
}

/// One-dimensional view of the objective along `origin + alpha * direction`,
/// with its own evaluation cap and best-seen tracking.
struct LineSearch<'a, F> {
    recorder: &'a mut Recorder<F>,
    origin: &'a [f64],
    direction: &'a [f64],
    evals: usize,
    best_alpha: f64,
    best_value: f64,
    point: Vec<f64>,
}

impl<'a, F: FnMut(&[f64]) -> f64> LineSearch<'a, F> {
    fn new(recorder: &'a mut Recorder<F>, origin: &'a [f64], direction: &'a [f64], f0: f64) -> Self {
        Self {
            recorder,
            origin,
            direction,
            evals: 0,
            best_alpha: 0.0,
            best_value: f0,
            point: vec![0.0; origin.len()],
        }
    }

    fn probe(&mut self, alpha: f64) -> Result<f64, LineStop> {
        if self.evals >= LINE_EVAL_CAP {
            return Err(LineStop::LocalCap);
        }
        for (slot, (o, d)) in self.point.iter_mut().zip(self.origin.iter().zip(self.direction))
        {
            *slot = o + alpha * d;
        }
        let point = std::mem::take(&mut self.point);
        let value = self.recorder.eval(&point).map_err(LineStop::Global);
        self.point = point;
        let value = value?;
        self.evals += 1;
        if value < self.best_value {
            self.best_value = value;
            self.best_alpha = alpha;
        }
        Ok(value)
    }

    /// Golden-section bracketing of a minimum starting from alpha = 0.
    fn bracket(&mut self) -> Result<(f64, f64, f64, f64), LineStop> {
        let (mut ax, mut fa) = (0.0, self.best_value);
        let mut bx = 1.0;
        let mut fb = self.probe(bx)?;
        if fb > fa {
            std::mem::swap(&mut ax, &mut bx);
            std::mem::swap(&mut fa, &mut fb);
        }
        let mut cx = bx + GOLD * (bx - ax);
        let mut fc = self.probe(cx)?;
        while fb > fc {
            let r = (bx - ax) * (fb - fc);
            let q = (bx - cx) * (fb - fa);
            let denom = 2.0 * (q - r).abs().max(TINY) * (q - r).signum();
            let mut u = bx - ((bx - cx) * q - (bx - ax) * r) / denom;
            let ulim = bx + GLIMIT * (cx - bx);
            let mut fu;
            if (bx - u) * (u - cx) > 0.0 {
                fu = self.probe(u)?;
                if fu < fc {
                    return Ok((bx, u, cx, fu));
                } else if fu > fb {
                    return Ok((ax, bx, u, fb));
                }
                u = cx + GOLD * (cx - bx);
                fu = self.probe(u)?;
            } else if (cx - u) * (u - ulim) > 0.0 {
                fu = self.probe(u)?;
                if fu < fc {
                    bx = cx;
                    cx = u;
                    u = cx + GOLD * (cx - bx);
                    fb = fc;
                    fc = fu;
                    fu = self.probe(u)?;
                }
            } else if (u - ulim) * (ulim - cx) >= 0.0 {
                u = ulim;
                fu = self.probe(u)?;
            } else {
                u = cx + GOLD * (cx - bx);
                fu = self.probe(u)?;
            }
            ax = bx;
            bx = cx;
            cx = u;
            fa = fb;
            fb = fc;
            fc = fu;
        }
        Ok((ax, bx, cx, fb))
    }

    /// Brent refinement inside a bracket: parabolic interpolation with
    /// golden-section fallback.
    fn brent(&mut self, ax: f64, bx: f64, cx: f64, fbx: f64, tol: f64) -> Result<(), LineStop> {
        let cgold = 0.381_966_0;
        let (mut a, mut b) = (ax.min(cx), ax.max(cx));
        let (mut x, mut w, mut v) = (bx, bx, bx);
        let (mut fx, mut fw, mut fv) = (fbx, fbx, fbx);
        let mut d = 0.0f64;
        let mut e = 0.0f64;
        loop {
            let xm = 0.5 * (a + b);
            let tol1 = tol * x.abs() + ZEPS;
            let tol2 = 2.0 * tol1;
            if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
                return Ok(());
            }
            let mut use_golden = true;
            if e.abs() > tol1 {
                let r = (x - w) * (fx - fv);
                let mut q = (x - v) * (fx - fw);
                let mut p = (x - v) * q - (x - w) * r;
                q = 2.0 * (q - r);
                if q > 0.0 {
                    p = -p;
                }
                q = q.abs();
                let etemp = e;
                e = d;
                if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                    d = p / q;
                    let u = x + d;
                    if u - a < tol2 || b - u < tol2 {
                        d = tol1.copysign(xm - x);
                    }
                    use_golden = false;
                }
            }
            if use_golden {
                e = if x >= xm { a - x } else { b - x };
                d = cgold * e;
            }
            let took_min_step = d.abs() < tol1;
            let u = if took_min_step { x + tol1.copysign(d) } else { x + d };
            let fu = self.probe(u)?;
            // a minimum-displacement probe that fails to improve means the
            // minimum is already resolved at the tol1 scale
            if took_min_step && fu >= fx {
                return Ok(());
            }
            if fu <= fx {
                if u >= x {
                    a = x;
                } else {
                    b = x;
                }
                v = w;
                w = x;
                x = u;
                fv = fw;
                fw = fx;
                fx = fu;
            } else {
                if u < x {
                    a = u;
                } else {
                    b = u;
                }
                if fu <= fw || w == x {
                    v = w;
                    w = u;
                    fv = fw;
                    fw = fu;
                } else if fu <= fv || v == x || v == w {
                    v = u;
                    fv = fu;
                }
            }
        }
    }

    /// Full line minimization; returns the best (alpha, value) probed,
    /// alpha = 0 when nothing beat the starting point.
    fn run(mut self, tol: f64) -> Result<(f64, f64), Stop> {
        let outcome = self
            .bracket()
            .and_then(|(ax, bx, cx, fbx)| self.brent(ax, bx, cx, fbx, tol));
        match outcome {
            Ok(()) | Err(LineStop::LocalCap) => Ok((self.best_alpha, self.best_value)),
            Err(LineStop::Global(stop)) => Err(stop),
        }
    }
}

/// Powell minimization from `x0` with coordinate axes as the initial
/// direction set.
///
/// Stops when `budget` objective evaluations are consumed or when the
/// relative improvement over a full sweep drops below `line_tol`, which is
/// also the parameter-space tolerance of each Brent line search.
pub fn minimize<F: FnMut(&[f64]) -> f64>(
    objective: F,
    x0: &[f64],
    budget: usize,
    line_tol: f64,
) -> OptimizationTrace {
    let n = x0.len();
    let axes: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect();
    minimize_with_directions(objective, x0, budget, line_tol, axes)
}

/// Powell minimization with an explicit initial direction set.
pub fn minimize_with_directions<F: FnMut(&[f64]) -> f64>(
    objective: F,
    x0: &[f64],
    budget: usize,
    line_tol: f64,
    mut directions: Vec<Vec<f64>>,
) -> OptimizationTrace {
    let n = x0.len();
    assert!(n > 0, "cannot minimize over an empty parameter vector");
    assert_eq!(directions.len(), n, "need one direction per dimension");
    let mut recorder = Recorder::new(objective, budget, x0);

    let mut p = x0.to_vec();
    let mut fp = match recorder.eval(&p) {
        Ok(v) => v,
        Err(stop) => return finish_on(recorder, stop),
    };

    loop {
        let p_start = p.clone();
        let fp_start = fp;
        let mut biggest_drop = 0.0;
        let mut drop_index = 0;

        for (i, direction) in directions.iter().enumerate() {
            let search = LineSearch::new(&mut recorder, &p, direction, fp);
            let (alpha, f_after) = match search.run(line_tol) {
                Ok(found) => found,
                Err(stop) => return finish_on(recorder, stop),
            };
            if alpha != 0.0 {
                for (slot, d) in p.iter_mut().zip(direction) {
                    *slot += alpha * d;
                }
            }
            if fp - f_after > biggest_drop {
                biggest_drop = fp - f_after;
                drop_index = i;
            }
            fp = f_after;
        }

        // relative-improvement convergence test over the sweep
        if 2.0 * (fp_start - fp) <= line_tol * (fp_start.abs() + fp.abs()) + TINY {
            return recorder.finish(Termination::Converged);
        }

        // Powell direction replacement: try the extrapolated point and, if
        // profitable, search along the sweep displacement and substitute it
        // for the direction of largest decrease.
        let p_ext: Vec<f64> =
            p.iter().zip(&p_start).map(|(a, b)| 2.0 * a - b).collect();
        let f_ext = match recorder.eval(&p_ext) {
            Ok(v) => v,
            Err(stop) => return finish_on(recorder, stop),
        };
        if f_ext < fp_start {
            let t = 2.0 * (fp_start - 2.0 * fp + f_ext)
                * (fp_start - fp - biggest_drop).powi(2)
                - biggest_drop * (fp_start - f_ext).powi(2);
            if t < 0.0 {
                let mut new_direction: Vec<f64> =
                    p.iter().zip(&p_start).map(|(a, b)| a - b).collect();
                let norm = new_direction.iter().map(|d| d * d).sum::<f64>().sqrt();
                if norm > 1e-14 {
                    for d in &mut new_direction {
                        *d /= norm;
                    }
                    let search = LineSearch::new(&mut recorder, &p, &new_direction, fp);
                    let (alpha, f_after) = match search.run(line_tol) {
                        Ok(found) => found,
                        Err(stop) => return finish_on(recorder, stop),
                    };
                    if alpha != 0.0 {
                        for (slot, d) in p.iter_mut().zip(&new_direction) {
                            *slot += alpha * d;
                        }
                    }
                    fp = f_after;
                    directions[drop_index] = directions[n - 1].clone();
                    directions[n - 1] = new_direction;
                }
            }
        }
    }
}

fn finish_on<F: FnMut(&[f64]) -> f64>(recorder: Recorder<F>, stop: Stop) -> OptimizationTrace {
    match stop {
        Stop::Budget => recorder.finish(Termination::BudgetExhausted),
        Stop::NonFinite => recorder.finish(Termination::NonFinite),
    }
}

/// Independent uniform starting points on `[0, 2pi]^dim`, one per restart.
pub fn restart_schedule<R: Rng>(dim: usize, n_restarts: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..n_restarts)
        .map(|_| (0..dim).map(|_| rng.gen_range(0.0..2.0 * std::f64::consts::PI)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quadratic_3d_within_budget() {
        let target = [1.5, -0.7, 2.2];
        let objective =
            |x: &[f64]| x.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let trace = minimize(objective, &[0.0, 0.0, 0.0], 200, 1e-8);
        for (a, b) in trace.best_params.iter().zip(&target) {
            assert!((a - b).abs() < 1e-6, "got {:?}", trace.best_params);
        }
        assert!(trace.evaluations_used <= 200);
    }

    #[test]
    fn constant_objective_converges_after_one_sweep() {
        let trace = minimize(|_| 42.0, &[1.0, 2.0], 500, 1e-6);
        assert_eq!(trace.termination, Termination::Converged);
        assert_eq!(trace.best_value, 42.0);
        // initial eval plus two capped line searches at most
        assert!(trace.evaluations_used <= 1 + 2 * 20);
    }

    #[test]
    fn rosenbrock_2d() {
        let rosenbrock =
            |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let trace = minimize(rosenbrock, &[-1.2, 1.0], 2000, 1e-8);
        assert!(
            trace.best_value < 1e-4,
            "best {} at {:?} after {} evals",
            trace.best_value,
            trace.best_params,
            trace.evaluations_used
        );
    }

    #[test]
    fn budget_is_exact_when_exhausted() {
        let objective = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let trace = minimize(objective, &[3.0; 6], 40, 1e-12);
        assert_eq!(trace.termination, Termination::BudgetExhausted);
        assert_eq!(trace.evaluations_used, 40);
        assert_eq!(trace.evaluations.len(), 40);
    }

    #[test]
    fn noisy_objective_trace_and_running_best() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let objective = move |x: &[f64]| {
            x.iter().map(|v| v * v).sum::<f64>() + rng.gen_range(-0.5..0.5)
        };
        let trace = minimize(objective, &[2.0, -1.0, 0.5], 150, 1e-3);
        assert!(trace.evaluations_used <= 150);
        let best_curve = trace.best_so_far();
        for pair in best_curve.windows(2) {
            assert!(pair[1] <= pair[0]);
        }
        let min_seen =
            trace.evaluations.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
        assert_eq!(trace.best_value, min_seen);
    }

    #[test]
    fn non_finite_objective_aborts_with_trace() {
        let objective = |x: &[f64]| {
            if x[0] > 2.0 {
                f64::NAN
            } else {
                (x[0] - 5.0).powi(2)
            }
        };
        let trace = minimize(objective, &[0.0], 100, 1e-8);
        assert_eq!(trace.termination, Termination::NonFinite);
        assert!(!trace.evaluations.is_empty());
        assert!(trace.evaluations.last().unwrap().1.is_nan());
    }

    #[test]
    fn direction_order_does_not_change_convex_result() {
        let quadratic = |x: &[f64]| {
            let mut v = 0.0;
            for i in 0..x.len() {
                v += (i as f64 + 1.0) * x[i] * x[i];
            }
            v += 0.3 * x[0] * x[1] + 0.2 * x[2] * x[3];
            v
        };
        let n = 4;
        let axes: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        let mut permuted = axes.clone();
        permuted.rotate_left(2);
        let x0 = vec![1.0, -2.0, 0.5, 1.5];
        let a = minimize_with_directions(quadratic, &x0, 2000, 1e-9, axes);
        let b = minimize_with_directions(quadratic, &x0, 2000, 1e-9, permuted);
        for (x, y) in a.best_params.iter().zip(&b.best_params) {
            assert!((x - y).abs() < 1e-8, "{:?} vs {:?}", a.best_params, b.best_params);
        }
    }

    #[test]
    fn restart_schedule_uniform_over_angle_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let points = restart_schedule(4, 2500, &mut rng);
        assert_eq!(points.len(), 2500);
        let mut sum = 0.0;
        for point in &points {
            assert_eq!(point.len(), 4);
            for &v in point {
                assert!((0.0..2.0 * std::f64::consts::PI).contains(&v));
                sum += v;
            }
        }
        let mean = sum / (2500.0 * 4.0);
        assert!((mean - std::f64::consts::PI).abs() < 0.05, "mean {mean}");

        let mut rng_a = ChaCha8Rng::seed_from_u64(9);
        let mut rng_b = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(restart_schedule(3, 5, &mut rng_a), restart_schedule(3, 5, &mut rng_b));
    }

    #[test]
    fn six_dim_quadratic_reaches_optimum_in_200_evals() {
        let target = [0.3, -1.1, 0.8, 2.0, -0.4, 1.6];
        let objective = |x: &[f64]| {
            let mut v = 0.0;
            for i in 0..6 {
                v += (1.0 + i as f64) * (x[i] - target[i]).powi(2);
            }
            v + 0.5 * (x[0] - target[0]) * (x[1] - target[1])
        };
        let trace = minimize(objective, &[0.0; 6], 200, 1e-9);
        let dist: f64 = trace
            .best_params
            .iter()
            .zip(&target)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(
            dist <= 1e-5,
            "distance {dist:.2e} after {} evals ({:?})",
            trace.evaluations_used,
            trace.termination
        );
    }
}
