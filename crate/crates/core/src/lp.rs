//! Small dense linear-programming solver.
//!
//! Problems are stated as `maximize c·x subject to a_i·x <= b_i` with every
//! variable free. The solver is a two-phase tableau simplex with Bland's
//! pivoting rule, so results are deterministic for a given row order and the
//! method cannot cycle.

use serde::{Deserialize, Serialize};

/// Reduced-cost threshold for choosing an entering column.
const COST_TOL: f64 = 1e-11;
/// Smallest admissible pivot magnitude.
const PIVOT_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 200_000;

/// One inequality row `coeffs·x <= rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpRow {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

/// `maximize objective·x` subject to `rows`, x free.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64, point: Vec<f64> },
    Unbounded,
    Infeasible,
}

impl LpOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }
}

impl LpProblem {
    pub fn maximize(objective: Vec<f64>) -> Self {
        Self {
            objective,
            rows: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.objective.len()
    }

    /// Adds `coeffs·x <= rhs`.
    pub fn leq(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        debug_assert_eq!(coeffs.len(), self.dim());
        self.rows.push(LpRow { coeffs, rhs });
        self
    }

    /// Adds `coeffs·x >= rhs`.
    pub fn geq(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        let neg = coeffs.into_iter().map(|c| -c).collect();
        self.leq(neg, -rhs)
    }

    /// Largest violation `a_i·x - b_i` over all rows (0 if feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|r| r.coeffs.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() - r.rhs)
            .fold(0.0, f64::max)
    }

    pub fn solve(&self) -> LpOutcome {
        solve_lp(self)
    }
}

struct Tableau {
    /// Row-major, `rows` constraint rows plus one objective row; last column is the rhs.
    data: Vec<f64>,
    width: usize,
    rows: usize,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.data[r * self.width + self.width - 1]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let p = self.data[pr * w + pc];
        for c in 0..w {
            self.data[pr * w + c] /= p;
        }
        self.data[pr * w + pc] = 1.0;
        for r in 0..=self.rows {
            if r == pr {
                continue;
            }
            let f = self.data[r * w + pc];
            if f == 0.0 {
                continue;
            }
            for c in 0..w {
                let v = self.data[pr * w + c];
                if v != 0.0 {
                    self.data[r * w + c] -= f * v;
                }
            }
            self.data[r * w + pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Rebuilds the objective row for `maximize cost·z`.
    fn load_objective(&mut self, cost: &[f64]) {
        let w = self.width;
        let obj = self.rows * w;
        for c in 0..w {
            let mut z = if c + 1 < w { -cost[c] } else { 0.0 };
            for r in 0..self.rows {
                let cb = cost[self.basis[r]];
                if cb != 0.0 {
                    z += cb * self.data[r * w + c];
                }
            }
            self.data[obj + c] = z;
        }
    }

    /// Runs Bland-rule simplex on the loaded objective. Returns false when unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        let obj = self.rows;
        for _ in 0..MAX_PIVOTS {
            let entering = (0..allowed).find(|&c| self.at(obj, c) < -COST_TOL);
            let Some(pc) = entering else {
                return true;
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(r).max(0.0) / a;
                best = match best {
                    None => Some((r, ratio)),
                    Some((br, bratio)) => {
                        let scale = 1.0 + bratio.abs();
                        if ratio < bratio - 1e-12 * scale
                            || (ratio <= bratio + 1e-12 * scale && self.basis[r] < self.basis[br])
                        {
                            Some((r, ratio))
                        } else {
                            Some((br, bratio))
                        }
                    }
                };
            }
            match best {
                Some((pr, _)) => self.pivot(pr, pc),
                None => return false,
            }
        }
        panic!("simplex exceeded {MAX_PIVOTS} pivots; numerical cycling");
    }
}

/// Solves `maximize c·x s.t. Ax <= b` over free `x`.
pub fn solve_lp(p: &LpProblem) -> LpOutcome {
    let n = p.dim();
    let m = p.rows.len();
    if m == 0 {
        return if p.objective.iter().all(|&c| c == 0.0) {
            LpOutcome::Optimal {
                value: 0.0,
                point: vec![0.0; n],
            }
        } else {
            LpOutcome::Unbounded
        };
    }

    // columns: x+ (n), x- (n), slack (m), artificial (one per negative-rhs row)
    let neg_rows: Vec<usize> = (0..m).filter(|&i| p.rows[i].rhs < 0.0).collect();
    let n_art = neg_rows.len();
    let art_start = 2 * n + m;
    let n_cols = art_start + n_art;
    let width = n_cols + 1;
    let mut t = Tableau {
        data: vec![0.0; (m + 1) * width],
        width,
        rows: m,
        basis: vec![0; m],
    };
    let mut art_idx = 0;
    for (i, row) in p.rows.iter().enumerate() {
        let sign = if row.rhs < 0.0 { -1.0 } else { 1.0 };
        let base = i * width;
        for j in 0..n {
            t.data[base + j] = sign * row.coeffs[j];
            t.data[base + n + j] = -sign * row.coeffs[j];
        }
        t.data[base + 2 * n + i] = sign;
        t.data[base + width - 1] = sign * row.rhs;
        if row.rhs < 0.0 {
            t.data[base + art_start + art_idx] = 1.0;
            t.basis[i] = art_start + art_idx;
            art_idx += 1;
        } else {
            t.basis[i] = 2 * n + i;
        }
    }

    if n_art > 0 {
        let mut cost = vec![0.0; n_cols];
        for c in cost.iter_mut().skip(art_start) {
            *c = -1.0;
        }
        t.load_objective(&cost);
        t.optimize(n_cols);
        let infeas = -t.rhs(m);
        let scale = 1.0 + p.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
        if infeas > 1e-9 * scale {
            return LpOutcome::Infeasible;
        }
        // drive remaining artificials out of the basis; drop redundant rows
        let mut r = 0;
        while r < t.rows {
            if t.basis[r] >= art_start {
                let col = (0..art_start)
                    .filter(|&c| t.at(r, c).abs() > 1e-9)
                    .max_by(|&a, &b| t.at(r, a).abs().total_cmp(&t.at(r, b).abs()));
                match col {
                    Some(c) => t.pivot(r, c),
                    None => {
                        remove_row(&mut t, r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    let mut cost = vec![0.0; n_cols];
    for j in 0..n {
        cost[j] = p.objective[j];
        cost[n + j] = -p.objective[j];
    }
    t.load_objective(&cost);
    if !t.optimize(art_start) {
        return LpOutcome::Unbounded;
    }

    let mut z = vec![0.0; n_cols];
    for r in 0..t.rows {
        z[t.basis[r]] = t.rhs(r);
    }
    let point: Vec<f64> = (0..n).map(|j| z[j] - z[n + j]).collect();
    let value = point.iter().zip(&p.objective).map(|(x, c)| x * c).sum();
    let viol = p.max_violation(&point);
    if viol > 1e-7 {
        log::warn!("lp certificate violates a row by {viol:e}");
    }
    LpOutcome::Optimal { value, point }
}

fn remove_row(t: &mut Tableau, r: usize) {
    let w = t.width;
    t.data.drain(r * w..(r + 1) * w);
    t.basis.remove(r);
    t.rows -= 1;
}
