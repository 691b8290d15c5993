//! Quasi-Newton minimization (BFGS with a strong-Wolfe line search) and
//! central finite-difference gradients.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    /// Stop once the gradient infinity norm is at most this.
    pub grad_tol: f64,
    /// Budget of objective-plus-gradient evaluations.
    pub max_evaluations: usize,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            grad_tol: 1e-6,
            max_evaluations: 2000,
            c1: 1e-4,
            c2: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_inf_norm: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Central differences with absolute step `h`.
pub fn finite_difference_gradient<F>(mut f: F, x: &[f64], h: f64) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            xp[i] = x[i] + h;
            let fp = f(&xp);
            xp[i] = x[i] - h;
            let fm = f(&xp);
            xp[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

struct Counted<F> {
    f: F,
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> (f64, Vec<f64>)> Counted<F> {
    fn eval(&mut self, x: &[f64]) -> (f64, Vec<f64>) {
        self.evaluations += 1;
        (self.f)(x)
    }
}

struct Point {
    alpha: f64,
    value: f64,
    slope: f64,
    grad: Vec<f64>,
}

/// Minimizer of the cubic through two points with values and slopes,
/// falling back to bisection when it leaves the safeguarded interval.
fn interpolate(lo: &Point, hi: &Point) -> f64 {
    let (a, b) = (lo.alpha, hi.alpha);
    let d1 = lo.slope + hi.slope - 3.0 * (lo.value - hi.value) / (a - b);
    let disc = d1 * d1 - lo.slope * hi.slope;
    let mid = 0.5 * (a + b);
    if disc < 0.0 {
        return mid;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let t = b - (b - a) * (hi.slope + d2 - d1) / (hi.slope - lo.slope + 2.0 * d2);
    let (lo_b, hi_b) = (a.min(b), a.max(b));
    let margin = 0.1 * (hi_b - lo_b);
    if !t.is_finite() || t < lo_b + margin || t > hi_b - margin {
        mid
    } else {
        t
    }
}

/// Strong-Wolfe line search; `None` when no acceptable step is found
/// within the evaluation budget.
fn line_search<F>(
    obj: &mut Counted<F>,
    x: &[f64],
    dir: &[f64],
    f0: f64,
    g0: &[f64],
    alpha0: f64,
    s: &OptimizerSettings,
) -> Option<Point>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let slope0 = dot(g0, dir);
    let at = |obj: &mut Counted<F>, alpha: f64| -> Point {
        let xa: Vec<f64> = x.iter().zip(dir).map(|(xi, di)| xi + alpha * di).collect();
        let (value, grad) = obj.eval(&xa);
        let slope = dot(&grad, dir);
        Point {
            alpha,
            value,
            slope,
            grad,
        }
    };
    let armijo = |p: &Point| p.value <= f0 + s.c1 * p.alpha * slope0;
    let curvature = |p: &Point| p.slope.abs() <= -s.c2 * slope0;

    let zoom = |obj: &mut Counted<F>, mut lo: Point, mut hi: Point| -> Option<Point> {
        for _ in 0..40 {
            if obj.evaluations >= s.max_evaluations {
                return None;
            }
            let alpha = interpolate(&lo, &hi);
            if (alpha - lo.alpha).abs() < 1e-16 * alpha.abs().max(1.0) {
                return None;
            }
            let p = at(obj, alpha);
            if !armijo(&p) || p.value >= lo.value {
                hi = p;
            } else {
                if curvature(&p) {
                    return Some(p);
                }
                if p.slope * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                lo = p;
            }
        }
        None
    };

    let mut prev = Point {
        alpha: 0.0,
        value: f0,
        slope: slope0,
        grad: g0.to_vec(),
    };
    let mut alpha = alpha0;
    for i in 0..30 {
        if obj.evaluations >= s.max_evaluations {
            return None;
        }
        let p = at(obj, alpha);
        if !p.value.is_finite() {
            alpha = 0.5 * (prev.alpha + alpha);
            continue;
        }
        if !armijo(&p) || (i > 0 && p.value >= prev.value) {
            return zoom(obj, prev, p);
        }
        if curvature(&p) {
            return Some(p);
        }
        if p.slope >= 0.0 {
            return zoom(obj, p, prev);
        }
        alpha *= 2.0;
        prev = p;
    }
    None
}

/// BFGS minimization of `f`, which returns the value and gradient.
///
/// On line-search failure the inverse Hessian is reset once; a second
/// failure returns the best point with `converged = false`.
pub fn bfgs<F>(f: F, x0: &[f64], settings: &OptimizerSettings) -> OptimizeResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut obj = Counted { f, evaluations: 0 };
    let mut x = x0.to_vec();
    let (mut fx, mut g) = obj.eval(&x);
    let identity = |scale: f64| -> Vec<f64> {
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            h[i * n + i] = scale;
        }
        h
    };
    let mut hinv = identity(1.0);
    let mut fresh = true;
    let mut iterations = 0;

    loop {
        let gnorm = inf_norm(&g);
        if gnorm <= settings.grad_tol || n == 0 {
            return OptimizeResult {
                x,
                value: fx,
                grad_inf_norm: gnorm,
                evaluations: obj.evaluations,
                iterations,
                converged: true,
            };
        }
        if obj.evaluations >= settings.max_evaluations {
            break;
        }
        let mut dir: Vec<f64> = (0..n)
            .map(|i| -(0..n).map(|j| hinv[i * n + j] * g[j]).sum::<f64>())
            .collect();
        if dot(&dir, &g) >= 0.0 {
            hinv = identity(1.0);
            fresh = true;
            dir = g.iter().map(|v| -v).collect();
        }
        let alpha0 = if fresh {
            (1.0 / inf_norm(&dir)).min(1.0)
        } else {
            1.0
        };
        let step = line_search(&mut obj, &x, &dir, fx, &g, alpha0, settings);
        let Some(p) = step else {
            if fresh {
                break;
            }
            hinv = identity(1.0);
            fresh = true;
            continue;
        };
        let s: Vec<f64> = dir.iter().map(|d| p.alpha * d).collect();
        let y: Vec<f64> = p.grad.iter().zip(&g).map(|(a, b)| a - b).collect();
        for (xi, si) in x.iter_mut().zip(&s) {
            *xi += si;
        }
        fx = p.value;
        g = p.grad;
        iterations += 1;

        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if fresh {
                hinv = identity(sy / dot(&y, &y));
            }
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| hinv[i * n + j] * y[j]).sum())
                .collect();
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j])
                        + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
            fresh = false;
        }
    }
    OptimizeResult {
        grad_inf_norm: inf_norm(&g),
        x,
        value: fx,
        evaluations: obj.evaluations,
        iterations,
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> (f64, Vec<f64>) {
        let (a, b) = (x[0], x[1]);
        let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![
            -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
            200.0 * (b - a * a),
        ];
        (f, g)
    }

    #[test]
    fn minimizes_rosenbrock() {
        let r = bfgs(rosenbrock, &[-1.2, 1.0], &OptimizerSettings::default());
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5);
        assert!(r.grad_inf_norm <= 1e-6);
    }

    #[test]
    fn quadratic_converges_quickly() {
        let f = |x: &[f64]| {
            let v = 3.0 * x[0] * x[0] + x[1] * x[1] + x[0] * x[1] - x[0];
            (v, vec![6.0 * x[0] + x[1] - 1.0, 2.0 * x[1] + x[0]])
        };
        let r = bfgs(f, &[2.0, -3.0], &OptimizerSettings::default());
        assert!(r.converged);
        assert!(r.iterations < 20);
    }

    #[test]
    fn stationary_start_takes_no_step() {
        let f = |x: &[f64]| ((x[0] - 0.5).powi(2), vec![2.0 * (x[0] - 0.5)]);
        let r = bfgs(f, &[0.5], &OptimizerSettings::default());
        assert_eq!(r.x, vec![0.5]);
        assert_eq!(r.evaluations, 1);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let s = OptimizerSettings {
            max_evaluations: 3,
            ..Default::default()
        };
        let r = bfgs(rosenbrock, &[-1.2, 1.0], &s);
        assert!(!r.converged);
        assert!(r.value <= rosenbrock(&[-1.2, 1.0]).0);
    }

    #[test]
    fn central_differences() {
        let g = finite_difference_gradient(|x| x[0].sin() * x[1], &[0.3, 2.0], 1e-5);
        assert!((g[0] - 0.3f64.cos() * 2.0).abs() < 1e-9);
        assert!((g[1] - 0.3f64.sin()).abs() < 1e-9);
    }
}
