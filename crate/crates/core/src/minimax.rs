//! Local maximisation of `min_j f_j(x)` for smooth pieces `f_j`, by sequential
//! linear programming inside a box trust region.

use crate::lp::{LpOutcome, LpProblem};

/// Convergence tolerance on the objective, reported alongside results.
pub const OPT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
pub struct MinimaxOptions {
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub max_iter: usize,
}

impl Default for MinimaxOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.25,
            max_step: 4.0,
            min_step: 1e-12,
            max_iter: 2000,
        }
    }
}

/// A piece value and its gradient.
pub type Piece = (f64, Vec<f64>);

#[derive(Clone, Debug, PartialEq)]
pub struct MinimaxResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

fn min_value(pieces: &[Piece]) -> f64 {
    pieces.iter().map(|p| p.0).fold(f64::INFINITY, f64::min)
}

/// Maximises `min_j f_j` starting from `x0`; `f` returns all pieces at a point.
pub fn maximize_min<F>(f: F, x0: Vec<f64>, opts: MinimaxOptions) -> MinimaxResult
where
    F: Fn(&[f64]) -> Vec<Piece>,
{
    let n = x0.len();
    let mut x = x0;
    let mut pieces = f(&x);
    let mut value = min_value(&pieces);
    let mut step = opts.initial_step;
    let mut iterations = 0;
    while iterations < opts.max_iter && step >= opts.min_step {
        iterations += 1;
        // variables: d (n), t; maximise t
        let mut obj = vec![0.0; n + 1];
        obj[n] = 1.0;
        let mut lp = LpProblem::maximize(obj);
        for (v, g) in &pieces {
            let mut row: Vec<f64> = g.iter().map(|x| -x).collect();
            row.push(1.0);
            lp.leq(row, *v);
        }
        for i in 0..n {
            let mut e = vec![0.0; n + 1];
            e[i] = 1.0;
            lp.leq(e.clone(), step);
            e[i] = -1.0;
            lp.leq(e, step);
        }
        let LpOutcome::Optimal { value: t, point } = lp.solve() else {
            break;
        };
        let predicted = t - value;
        if predicted <= 1e-15 * (1.0 + value.abs()) {
            break;
        }
        let cand: Vec<f64> = x.iter().zip(&point[..n]).map(|(a, d)| a + d).collect();
        let cand_pieces = f(&cand);
        let cand_value = min_value(&cand_pieces);
        let ratio = (cand_value - value) / predicted;
        if ratio > 0.1 {
            x = cand;
            pieces = cand_pieces;
            value = cand_value;
            if ratio > 0.75 {
                step = (2.0 * step).min(opts.max_step);
            }
        } else {
            step *= 0.25;
        }
    }
    MinimaxResult {
        x,
        value,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_centre_of_triangle() {
        // distance to the three sides of the triangle (0,0), (1,0), (0,1)
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let f = |x: &[f64]| {
            vec![
                (x[1], vec![0.0, 1.0]),
                (x[0], vec![1.0, 0.0]),
                ((1.0 - x[0] - x[1]) * s, vec![-s, -s]),
            ]
        };
        let r = maximize_min(f, vec![0.1, 0.1], MinimaxOptions::default());
        let expect = 1.0 / (2.0 + std::f64::consts::SQRT_2);
        assert!((r.value - expect).abs() < 1e-12, "{r:?}");
        assert!((r.x[0] - expect).abs() < 1e-9 && (r.x[1] - expect).abs() < 1e-9);
    }

    #[test]
    fn smooth_single_piece() {
        // max of 1 - |x - c|^2
        let f = |x: &[f64]| {
            let d = [x[0] - 0.3, x[1] + 0.2];
            vec![(
                1.0 - d[0] * d[0] - d[1] * d[1],
                vec![-2.0 * d[0], -2.0 * d[1]],
            )]
        };
        let r = maximize_min(f, vec![2.0, 2.0], MinimaxOptions::default());
        assert!((r.value - 1.0).abs() < 1e-12);
    }
}
