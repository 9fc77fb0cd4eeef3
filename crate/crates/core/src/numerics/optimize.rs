//! Derivative-free minimization by the Nelder-Mead simplex method.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{domain, Result};

/// Stopping rules and simplex construction for [`nelder_mead`].
#[derive(Clone, Copy)]
pub struct NelderMeadOptions<'a> {
    /// Offset of the initial simplex vertices along each axis.
    pub initial_step: f64,
    /// Stop when every vertex lies within this max-norm distance of the best.
    pub x_tol: f64,
    /// Stop when worst and best objective values differ by at most this.
    pub f_tol: f64,
    pub max_iter: usize,
    /// Dimension-dependent coefficients (Gao and Han, 2012). Reduces to the
    /// classic (1, 2, 1/2, 1/2) in two dimensions.
    pub adaptive: bool,
    /// Polled once per iteration; returning `true` stops the search early.
    pub cancel: Option<&'a dyn Fn() -> bool>,
}

impl Default for NelderMeadOptions<'_> {
    fn default() -> Self {
        Self {
            initial_step: 0.5,
            x_tol: 1e-9,
            f_tol: 1e-10,
            max_iter: 5000,
            adaptive: true,
            cancel: None,
        }
    }
}

impl fmt::Debug for NelderMeadOptions<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NelderMeadOptions")
            .field("initial_step", &self.initial_step)
            .field("x_tol", &self.x_tol)
            .field("f_tol", &self.f_tol)
            .field("max_iter", &self.max_iter)
            .field("adaptive", &self.adaptive)
            .field("cancel", &self.cancel.is_some())
            .finish()
    }
}

/// Outcome of a Nelder-Mead run. Non-convergence is reported, not raised.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
    /// The best vertex value never increased between iterations.
    pub monotone: bool,
    pub cancelled: bool,
}

struct Coefficients {
    reflect: f64,
    expand: f64,
    contract: f64,
    shrink: f64,
}

impl Coefficients {
    fn for_dimension(n: usize, adaptive: bool) -> Self {
        if adaptive && n >= 2 {
            let n = n as f64;
            Self {
                reflect: 1.0,
                expand: 1.0 + 2.0 / n,
                contract: 0.75 - 0.5 / n,
                shrink: 1.0 - 1.0 / n,
            }
        } else {
            Self { reflect: 1.0, expand: 2.0, contract: 0.5, shrink: 0.5 }
        }
    }
}

/// Minimizes `objective` starting from `init`.
///
/// Non-finite objective values anywhere except `init` are treated as `+inf`,
/// which lets callers encode hard constraints by returning `f64::INFINITY`.
pub fn nelder_mead<F>(mut objective: F, init: &[f64], options: &NelderMeadOptions<'_>) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = init.len();
    if n == 0 {
        return Err(domain("nelder_mead needs at least one parameter"));
    }
    let f0 = objective(init);
    if !f0.is_finite() {
        return Err(domain("nelder_mead: objective is not finite at the initial point"));
    }
    let mut evaluations = 1;
    let mut eval = |x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        let v = objective(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let coef = Coefficients::for_dimension(n, options.adaptive);
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut values: Vec<f64> = Vec::with_capacity(n + 1);
    simplex.push(init.to_vec());
    values.push(f0);
    for i in 0..n {
        let mut v = init.to_vec();
        v[i] += options.initial_step;
        values.push(eval(&v, &mut evaluations));
        simplex.push(v);
    }

    let mut centroid = alloc::vec![0.0; n];
    let mut trial = alloc::vec![0.0; n];
    let mut trial2 = alloc::vec![0.0; n];
    let mut best_so_far = f64::INFINITY;
    let mut monotone = true;
    let mut converged = false;
    let mut cancelled = false;
    let mut iterations = 0;

    loop {
        // stable sort keeps `init` first among equal values
        let mut paired: Vec<(Vec<f64>, f64)> = simplex.drain(..).zip(values.drain(..)).collect();
        paired.sort_by(|a, b| a.1.total_cmp(&b.1));
        for (x, v) in paired {
            simplex.push(x);
            values.push(v);
        }

        if values[0] > best_so_far {
            monotone = false;
        }
        best_so_far = best_so_far.min(values[0]);

        let spread = values[n] - values[0];
        let diameter = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= options.f_tol || diameter <= options.x_tol {
            converged = true;
            break;
        }
        if iterations >= options.max_iter {
            break;
        }
        if let Some(cancel) = options.cancel {
            if cancel() {
                cancelled = true;
                break;
            }
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= n as f64);

        let worst = &simplex[n];
        for j in 0..n {
            trial[j] = centroid[j] + coef.reflect * (centroid[j] - worst[j]);
        }
        let f_reflect = eval(&trial, &mut evaluations);

        if f_reflect < values[0] {
            for j in 0..n {
                trial2[j] = centroid[j] + coef.expand * (trial[j] - centroid[j]);
            }
            let f_expand = eval(&trial2, &mut evaluations);
            if f_expand < f_reflect {
                simplex[n].copy_from_slice(&trial2);
                values[n] = f_expand;
            } else {
                simplex[n].copy_from_slice(&trial);
                values[n] = f_reflect;
            }
            continue;
        }
        if f_reflect < values[n - 1] {
            simplex[n].copy_from_slice(&trial);
            values[n] = f_reflect;
            continue;
        }

        let accepted = if f_reflect < values[n] {
            for j in 0..n {
                trial2[j] = centroid[j] + coef.contract * (trial[j] - centroid[j]);
            }
            let f_contract = eval(&trial2, &mut evaluations);
            if f_contract <= f_reflect {
                simplex[n].copy_from_slice(&trial2);
                values[n] = f_contract;
                true
            } else {
                false
            }
        } else {
            let worst = &simplex[n];
            for j in 0..n {
                trial2[j] = centroid[j] + coef.contract * (worst[j] - centroid[j]);
            }
            let f_contract = eval(&trial2, &mut evaluations);
            if f_contract < values[n] {
                simplex[n].copy_from_slice(&trial2);
                values[n] = f_contract;
                true
            } else {
                false
            }
        };

        if !accepted {
            let (best, rest) = simplex.split_at_mut(1);
            for (v, fv) in rest.iter_mut().zip(values[1..].iter_mut()) {
                for (x, b) in v.iter_mut().zip(&best[0]) {
                    *x = b + coef.shrink * (*x - b);
                }
                *fv = eval(v, &mut evaluations);
            }
        }
    }

    Ok(Minimum {
        x: simplex.swap_remove(0),
        value: values[0],
        converged,
        iterations,
        evaluations,
        monotone,
        cancelled,
    })
}
