//! Windowed Picard iteration of `u(τ) = u₀ + ∫₀^τ G(τ′, u(τ′)) dτ′` with the
//! composite trapezoid rule on a uniform mesh.
//!
//! Shared by the integrated evolution equation and by the wavepacket
//! interaction systems, which differ only in the integrand `G` and in the
//! layout of the unknown vector.

use crate::error::{Result, WavepaxError};
use num_complex::Complex64;
use rayon::prelude::*;

/// Mesh and stopping parameters.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PicardPlan {
    /// Number of mesh steps on `[0, τ*]`.
    pub steps: usize,
    /// Mesh step.
    pub h: f64,
    /// Mesh steps per Picard window.
    pub window_steps: usize,
    /// Absolute stopping tolerance on the sup-time distance.
    pub tol: f64,
    pub max_iter: usize,
}

/// Runs the iteration. `make_state` builds one per-thread workspace, `g`
/// evaluates the integrand, `dist` measures the distance of two iterates at
/// one mesh point and `visit(i, τ_i, u_i)` receives every mesh point `i ≥ 1`
/// in increasing order. Returns the distance history of every window.
///
/// When `zero` is set the integrand is known to vanish and no iteration runs.
pub(crate) fn picard_integrate<S, I, G, D>(
    u0: &[Complex64],
    plan: PicardPlan,
    zero: bool,
    make_state: I,
    g: G,
    dist: D,
    visit: &mut dyn FnMut(usize, f64, &[Complex64]),
) -> Result<Vec<Vec<f64>>>
where
    S: Send,
    I: Fn() -> S + Sync + Send,
    G: Fn(&mut S, f64, &[Complex64]) -> Result<Vec<Complex64>> + Sync + Send,
    D: Fn(&[Complex64], &[Complex64]) -> f64,
{
    let PicardPlan {
        steps,
        h,
        window_steps,
        tol,
        max_iter,
    } = plan;
    let window_steps = window_steps.clamp(1, steps.max(1));
    let mut history = Vec::new();
    let mut start = u0.to_vec();
    let mut start_g = if zero {
        None
    } else {
        Some(g(&mut make_state(), 0.0, &start)?)
    };
    let mut i0 = 0usize;
    while i0 < steps {
        let i1 = (i0 + window_steps).min(steps);
        let npts = i1 - i0;
        let taus: Vec<f64> = (1..=npts).map(|j| (i0 + j) as f64 * h).collect();
        let mut u: Vec<Vec<Complex64>> = vec![start.clone(); npts];
        let mut hist = Vec::new();
        if zero {
            hist.push(0.0);
        } else {
            let g0 = start_g.as_ref().expect("set when nonzero");
            let mut growth = 0;
            loop {
                let gs: Vec<Vec<Complex64>> = taus
                    .par_iter()
                    .zip(u.par_iter())
                    .map_init(&make_state, |state, (&t, ui)| g(state, t, ui))
                    .collect::<Result<_>>()?;
                let mut acc = start.clone();
                let mut prev = g0;
                let mut next = Vec::with_capacity(npts);
                for gi in &gs {
                    for ((a, p), q) in acc.iter_mut().zip(prev.iter()).zip(gi.iter()) {
                        *a += (p + q) * (0.5 * h);
                    }
                    prev = gi;
                    next.push(acc.clone());
                }
                let d = next
                    .iter()
                    .zip(&u)
                    .map(|(a, b)| dist(a, b))
                    .fold(0.0, f64::max);
                u = next;
                if !d.is_finite() {
                    hist.push(d);
                    return Err(WavepaxError::PicardDiverged {
                        iterations: hist.len(),
                        history: hist,
                    });
                }
                if let Some(&last) = hist.last() {
                    growth = if d > last { growth + 1 } else { 0 };
                }
                hist.push(d);
                if d <= tol {
                    break;
                }
                if growth >= 3 {
                    return Err(WavepaxError::PicardDiverged {
                        iterations: hist.len(),
                        history: hist,
                    });
                }
                if hist.len() >= max_iter {
                    return Err(WavepaxError::PicardMaxIter {
                        iterations: hist.len(),
                        distance: d,
                    });
                }
            }
        }
        history.push(hist);
        for (j, ui) in u.iter().enumerate() {
            visit(i0 + j + 1, taus[j], ui);
        }
        start = u.pop().expect("window has points");
        if !zero {
            start_g = Some(g(&mut make_state(), taus[npts - 1], &start)?);
        }
        i0 = i1;
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_linear_ode() {
        // u' = i u, u(0) = 1 → e^{iτ}; trapezoid error O(h²)
        let plan = PicardPlan {
            steps: 200,
            h: 1.0 / 200.0,
            window_steps: 50,
            tol: 1e-14,
            max_iter: 100,
        };
        let mut last = Complex64::new(0.0, 0.0);
        let hist = picard_integrate(
            &[Complex64::new(1.0, 0.0)],
            plan,
            false,
            || (),
            |_, _, u| Ok(vec![Complex64::i() * u[0]]),
            |a, b| (a[0] - b[0]).norm(),
            &mut |i, _, u| {
                if i == 200 {
                    last = u[0]
                }
            },
        )
        .unwrap();
        assert_eq!(hist.len(), 4);
        assert!((last - Complex64::from_polar(1.0, 1.0)).norm() < 1e-5);
    }

    #[test]
    fn zero_integrand_skips_iteration() {
        let plan = PicardPlan {
            steps: 3,
            h: 0.1,
            window_steps: 10,
            tol: 1e-12,
            max_iter: 5,
        };
        let mut seen = Vec::new();
        let hist = picard_integrate(
            &[Complex64::new(2.0, 0.0)],
            plan,
            true,
            || (),
            |_, _, _| unreachable!(),
            |a, b| (a[0] - b[0]).norm(),
            &mut |i, t, u| seen.push((i, t, u[0].re)),
        )
        .unwrap();
        assert_eq!(hist, vec![vec![0.0]]);
        assert_eq!(seen.len(), 3);
        assert!(seen.iter().all(|s| s.2 == 2.0));
    }
}
