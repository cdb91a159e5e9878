//! Nelder–Mead simplex minimisation.

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NelderMeadOptions<T> {
    /// Edge length of the initial axis-aligned simplex.
    pub initial_scale: T,
    pub max_iters: usize,
    /// Stop once every vertex is within this distance of the best one.
    pub diameter_tol: T,
}

impl<T: Real> Default for NelderMeadOptions<T> {
    fn default() -> Self {
        Self {
            initial_scale: T::lit(0.5),
            max_iters: 4000,
            diameter_tol: T::lit(1e-9),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NelderMeadResult<T> {
    pub x: Vec<T>,
    pub f: T,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimises `f` from `x0`. NaN values are treated as `+∞`.
pub fn minimize<T: Real, F>(mut f: F, x0: &[T], opts: &NelderMeadOptions<T>) -> NelderMeadResult<T>
where
    F: FnMut(&[T]) -> T,
{
    let n = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[T]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            T::infinity()
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<T>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.initial_scale;
        simplex.push(v);
    }
    let mut values: Vec<T> = simplex.iter().map(|v| eval(v)).collect();

    let (alpha, gamma, rho, sigma) = (T::one(), T::lit(2.0), T::lit(0.5), T::lit(0.5));
    let along = |base: &[T], toward: &[T], t: T| -> Vec<T> {
        base.iter().zip(toward).map(|(&b, &w)| b + t * (w - b)).collect()
    };

    let mut iterations = 0;
    let mut converged = false;
    loop {
        // stable sort keeps earlier vertices first on ties
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("NaN filtered out"));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if diameter(&simplex) < opts.diameter_tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iters {
            break;
        }
        iterations += 1;

        let mut centroid = vec![T::zero(); n];
        for v in &simplex[..n] {
            for (c, &x) in centroid.iter_mut().zip(v) {
                *c += x;
            }
        }
        let inv = T::one() / T::from_usize(n).expect("dimension");
        centroid.iter_mut().for_each(|c| *c *= inv);

        let worst = simplex[n].clone();
        let reflected = along(&centroid, &worst, -alpha);
        let f_r = eval(&reflected);
        if f_r < values[0] {
            let expanded = along(&centroid, &worst, -gamma);
            let f_e = eval(&expanded);
            if f_e < f_r {
                simplex[n] = expanded;
                values[n] = f_e;
            } else {
                simplex[n] = reflected;
                values[n] = f_r;
            }
            continue;
        }
        if f_r < values[n - 1] {
            simplex[n] = reflected;
            values[n] = f_r;
            continue;
        }
        let (contracted, f_c, accept) = if f_r < values[n] {
            let c = along(&centroid, &reflected, rho);
            let fc = eval(&c);
            let ok = fc <= f_r;
            (c, fc, ok)
        } else {
            let c = along(&centroid, &worst, rho);
            let fc = eval(&c);
            let ok = fc < values[n];
            (c, fc, ok)
        };
        if accept {
            simplex[n] = contracted;
            values[n] = f_c;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            simplex[i] = along(&best, &simplex[i], sigma);
            values[i] = eval(&simplex[i]);
        }
    }

    NelderMeadResult {
        x: simplex.swap_remove(0),
        f: values[0],
        iterations,
        evaluations,
        converged,
    }
}

fn diameter<T: Real>(simplex: &[Vec<T>]) -> T {
    let best = &simplex[0];
    simplex[1..]
        .iter()
        .map(|v| {
            v.iter()
                .zip(best)
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum::<T>()
                .sqrt()
        })
        .fold(T::zero(), T::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let r = minimize(
            |x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2),
            &[0.0, 0.0],
            &NelderMeadOptions::default(),
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-8 && (r.x[1] + 2.0).abs() < 1e-8);
    }

    #[test]
    fn rosenbrock() {
        let opts = NelderMeadOptions {
            max_iters: 20_000,
            ..Default::default()
        };
        let r = minimize(
            |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2),
            &[-1.2, 1.0],
            &opts,
        );
        assert!(r.f < 1e-12, "{r:?}");
    }

    #[test]
    fn infinite_plateau_shrinks() {
        let r = minimize(|_: &[f64]| f64::INFINITY, &[0.0, 0.0, 0.0], &NelderMeadOptions::default());
        assert!(r.converged);
        assert_eq!(r.x, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn walls_of_infinity_are_avoided() {
        let r = minimize(
            |x: &[f64]| if x[0] < 0.3 { f64::INFINITY } else { (x[0] - 0.5).powi(2) },
            &[1.0],
            &NelderMeadOptions::default(),
        );
        assert!((r.x[0] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn iteration_cap() {
        let opts = NelderMeadOptions {
            max_iters: 3,
            ..Default::default()
        };
        let r = minimize(|x: &[f64]| x[0] * x[0], &[10.0], &opts);
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
    }
}
