//! Dense two-phase simplex with Bland's anti-cycling rule, and the
//! matrix-game solver built on it.

use thiserror::Error;

const PIVOT_TOL: f64 = 1e-9;
const PIVOT_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex exceeded its pivot budget ({0} pivots)")]
    CycleLimit(usize),
    #[error("malformed linear program: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// `opt c·x  s.t.  rows[i]·x (sense_i) rhs[i]`, with `x_j ≥ 0` unless `free[j]`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub senses: Vec<Sense>,
    pub rhs: Vec<f64>,
    pub maximize: bool,
    pub free: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
    pub pivots: usize,
}

impl LinearProgram {
    pub fn minimize(
        objective: Vec<f64>,
        rows: Vec<Vec<f64>>,
        senses: Vec<Sense>,
        rhs: Vec<f64>,
    ) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            rows,
            senses,
            rhs,
            maximize: false,
            free: vec![false; n],
        }
    }

    pub fn maximize(
        objective: Vec<f64>,
        rows: Vec<Vec<f64>>,
        senses: Vec<Sense>,
        rhs: Vec<f64>,
    ) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            rows,
            senses,
            rhs,
            maximize: true,
            free: vec![false; n],
        }
    }

    pub fn with_free(mut self, free: Vec<bool>) -> Self {
        self.free = free;
        self
    }

    fn check(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        if n == 0 {
            return Err(LpError::Malformed("no variables".into()));
        }
        if self.free.len() != n {
            return Err(LpError::Malformed(
                "free mask length differs from objective".into(),
            ));
        }
        if self.rows.len() != self.rhs.len() || self.rows.len() != self.senses.len() {
            return Err(LpError::Malformed(
                "row, rhs and sense counts differ".into(),
            ));
        }
        if self.rows.iter().any(|r| r.len() != n) {
            return Err(LpError::Malformed(
                "constraint row length differs from objective".into(),
            ));
        }
        let finite = self
            .objective
            .iter()
            .chain(self.rhs.iter())
            .chain(self.rows.iter().flatten());
        if finite.into_iter().any(|v| !v.is_finite()) {
            return Err(LpError::Malformed("non-finite coefficient".into()));
        }
        Ok(())
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        self.check()?;
        let n = self.objective.len();
        let m = self.rows.len();

        // Column layout: split originals, then slacks/surpluses, then artificials.
        let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(n);
        let mut ncols = 0;
        for j in 0..n {
            if self.free[j] {
                col_of.push((ncols, Some(ncols + 1)));
                ncols += 2;
            } else {
                col_of.push((ncols, None));
                ncols += 1;
            }
        }
        let n_struct = ncols;

        let mut senses = self.senses.clone();
        let mut rows = self.rows.clone();
        let mut rhs = self.rhs.clone();
        for i in 0..m {
            if rhs[i] < 0.0 {
                rhs[i] = -rhs[i];
                rows[i].iter_mut().for_each(|v| *v = -*v);
                senses[i] = match senses[i] {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                };
            }
        }
        let n_slack = senses.iter().filter(|s| **s != Sense::Eq).count();
        let n_art = senses.iter().filter(|s| **s != Sense::Le).count();
        let width = n_struct + n_slack + n_art;
        let art_start = n_struct + n_slack;

        let mut t = vec![vec![0.0; width + 1]; m + 1];
        let mut basis = vec![0usize; m];
        let (mut s_idx, mut a_idx) = (n_struct, art_start);
        for i in 0..m {
            for j in 0..n {
                let (p, neg) = col_of[j];
                t[i][p] = rows[i][j];
                if let Some(q) = neg {
                    t[i][q] = -rows[i][j];
                }
            }
            t[i][width] = rhs[i];
            match senses[i] {
                Sense::Le => {
                    t[i][s_idx] = 1.0;
                    basis[i] = s_idx;
                    s_idx += 1;
                }
                Sense::Ge => {
                    t[i][s_idx] = -1.0;
                    s_idx += 1;
                    t[i][a_idx] = 1.0;
                    basis[i] = a_idx;
                    a_idx += 1;
                }
                Sense::Eq => {
                    t[i][a_idx] = 1.0;
                    basis[i] = a_idx;
                    a_idx += 1;
                }
            }
        }

        let scale = rhs.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let feas_tol = 1e-9 * scale;
        let mut pivots = 0usize;

        // Phase 1: minimize the sum of artificials.
        if n_art > 0 {
            for c in art_start..width {
                t[m][c] = 1.0;
            }
            for i in 0..m {
                if basis[i] >= art_start {
                    for c in 0..=width {
                        t[m][c] -= t[i][c];
                    }
                }
            }
            run_simplex(&mut t, &mut basis, width, width, &mut pivots)?;
            if -t[m][width] > feas_tol {
                return Err(LpError::Infeasible);
            }
            // Drive remaining artificials out of the basis; drop redundant rows.
            let mut i = 0;
            while i < basis.len() {
                if basis[i] >= art_start {
                    let entering = (0..art_start).find(|&c| t[i][c].abs() > PIVOT_TOL);
                    match entering {
                        Some(c) => {
                            pivot(&mut t, &mut basis, i, c);
                            pivots += 1;
                            i += 1;
                        }
                        None => {
                            t.remove(i);
                            basis.remove(i);
                        }
                    }
                } else {
                    i += 1;
                }
            }
        }
        let m = basis.len();

        // Phase 2 on the original objective (as minimization), artificials barred.
        let sign = if self.maximize { -1.0 } else { 1.0 };
        let mut cost = vec![0.0; width + 1];
        for j in 0..n {
            let (p, neg) = col_of[j];
            cost[p] = sign * self.objective[j];
            if let Some(q) = neg {
                cost[q] = -sign * self.objective[j];
            }
        }
        for i in 0..m {
            let cb = cost[basis[i]];
            if cb != 0.0 {
                for c in 0..=width {
                    cost[c] -= cb * t[i][c];
                }
            }
        }
        t[m] = cost;
        run_simplex(&mut t, &mut basis, art_start, width, &mut pivots)?;

        let mut cols = vec![0.0; width];
        for i in 0..m {
            cols[basis[i]] = t[i][width];
        }
        let x: Vec<f64> = col_of
            .iter()
            .map(|&(p, neg)| cols[p] - neg.map_or(0.0, |q| cols[q]))
            .collect();
        let value = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution { value, x, pivots })
    }
}

/// Minimizes the objective row of `t` over columns `< allowed`. Bland's rule.
fn run_simplex(
    t: &mut [Vec<f64>],
    basis: &mut [usize],
    allowed: usize,
    width: usize,
    pivots: &mut usize,
) -> Result<(), LpError> {
    let m = basis.len();
    loop {
        if *pivots >= PIVOT_BUDGET {
            return Err(LpError::CycleLimit(*pivots));
        }
        let entering = match (0..allowed).find(|&c| t[m][c] < -PIVOT_TOL) {
            Some(c) => c,
            None => return Ok(()),
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = t[i][entering];
            if a > PIVOT_TOL {
                let ratio = t[i][width] / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-12 || (ratio <= lr + 1e-12 && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let (row, _) = leave.ok_or(LpError::Unbounded)?;
        pivot(t, basis, row, entering);
        *pivots += 1;
    }
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let p = t[row][col];
    t[row].iter_mut().for_each(|v| *v /= p);
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i != row {
            let f = r[col];
            if f != 0.0 {
                for (v, pr) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
                r[col] = 0.0;
            }
        }
    }
    basis[row] = col;
}

/// Optimal mixed strategies of the zero-sum game where the row player pays
/// `g[i][j]` to the column player.
#[derive(Debug, Clone)]
pub struct MatrixGameSolution {
    /// `min_x max_y xᵀ G y` from the row player's LP.
    pub value: f64,
    /// `max_y min_x xᵀ G y` from the column player's LP.
    pub lower_value: f64,
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
}

pub fn matrix_game(g: &[Vec<f64>]) -> Result<MatrixGameSolution, LpError> {
    let m = g.len();
    if m == 0 || g[0].is_empty() {
        return Err(LpError::Malformed("empty payoff matrix".into()));
    }
    let n = g[0].len();
    if g.iter().any(|r| r.len() != n) {
        return Err(LpError::Malformed("ragged payoff matrix".into()));
    }
    if g.iter().flatten().any(|v| !v.is_finite()) {
        return Err(LpError::Malformed("non-finite payoff".into()));
    }
    let lo = g.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - lo;

    // Row player: max Σu  s.t.  Σ_i u_i G'_ij ≤ 1 for every column j.
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..m).map(|i| g[i][j] + shift).collect())
        .collect();
    let row_lp = LinearProgram::maximize(vec![1.0; m], rows, vec![Sense::Le; n], vec![1.0; n]);
    let rs = row_lp.solve()?;
    let su: f64 = rs.x.iter().sum();
    if !(su > 0.0) {
        return Err(LpError::Malformed("degenerate row program".into()));
    }
    let row_strategy = normalize(rs.x);

    // Column player: min Σw  s.t.  Σ_j G'_ij w_j ≥ 1 for every row i.
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|i| g[i].iter().map(|v| v + shift).collect())
        .collect();
    let col_lp = LinearProgram::minimize(vec![1.0; n], rows, vec![Sense::Ge; m], vec![1.0; m]);
    let cs = col_lp.solve()?;
    let sw: f64 = cs.x.iter().sum();
    if !(sw > 0.0) {
        return Err(LpError::Malformed("degenerate column program".into()));
    }
    let col_strategy = normalize(cs.x);

    Ok(MatrixGameSolution {
        value: 1.0 / su - shift,
        lower_value: 1.0 / sw - shift,
        row_strategy,
        col_strategy,
    })
}

fn normalize(mut x: Vec<f64>) -> Vec<f64> {
    x.iter_mut().for_each(|v| *v = v.max(0.0));
    let s: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= s);
    x
}

/// `max_j xᵀ G e_j`
pub fn best_response_value(g: &[Vec<f64>], x: &[f64]) -> f64 {
    (0..g[0].len())
        .map(|j| g.iter().zip(x).map(|(r, xi)| r[j] * xi).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `min_i e_iᵀ G y`
pub fn best_reply_value(g: &[Vec<f64>], y: &[f64]) -> f64 {
    g.iter()
        .map(|r| r.iter().zip(y).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp_with_known_optimum() {
        // max 3x + 2y  s.t. x + y ≤ 4, x + 3y ≤ 6, x ≤ 3  →  (3, 1), value 11.
        let lp = LinearProgram::maximize(
            vec![3.0, 2.0],
            vec![vec![1.0, 1.0], vec![1.0, 3.0], vec![1.0, 0.0]],
            vec![Sense::Le; 3],
            vec![4.0, 6.0, 3.0],
        );
        let s = lp.solve().unwrap();
        assert!((s.value - 11.0).abs() < 1e-9);
        assert!((s.x[0] - 3.0).abs() < 1e-9 && (s.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn box_bound_and_vertex_examples() {
        let lp = LinearProgram::maximize(
            vec![1.0, 1.0],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![Sense::Le; 2],
            vec![1.0, 1.0],
        );
        assert!((lp.solve().unwrap().value - 2.0).abs() < 1e-9);
        let lp = LinearProgram::minimize(vec![1.0], vec![vec![1.0]], vec![Sense::Ge], vec![3.0]);
        assert!((lp.solve().unwrap().value - 3.0).abs() < 1e-9);
        // Basic feasible vertices (0,0), (4,0), (0,2), (3,1): objective 0, 12, 4, 11.
        let lp = LinearProgram::maximize(
            vec![3.0, 2.0],
            vec![vec![1.0, 1.0], vec![1.0, 3.0]],
            vec![Sense::Le; 2],
            vec![4.0, 6.0],
        );
        let s = lp.solve().unwrap();
        assert!((s.value - 12.0).abs() < 1e-9);
        assert!((s.x[0] - 4.0).abs() < 1e-9 && s.x[1].abs() < 1e-9);
    }

    #[test]
    fn constant_and_mixed_two_by_two_games() {
        let s = matrix_game(&[vec![0.7, 0.7], vec![0.7, 0.7]]).unwrap();
        assert!((s.value - 0.7).abs() < 1e-12);
        // max(3p, 2 - p) is minimized at p = 1/2.
        let s = matrix_game(&[vec![3.0, 1.0], vec![0.0, 2.0]]).unwrap();
        assert!((s.value - 1.5).abs() < 1e-9);
        assert!((s.row_strategy[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn equality_and_free_variables() {
        // min x  s.t. x - y = -2, y ≤ 1, y ≥ -5, x free  →  x = -7.
        let lp = LinearProgram::minimize(
            vec![1.0, 0.0],
            vec![vec![1.0, -1.0], vec![0.0, 1.0], vec![0.0, 1.0]],
            vec![Sense::Eq, Sense::Le, Sense::Ge],
            vec![-2.0, 1.0, -5.0],
        )
        .with_free(vec![true, true]);
        let s = lp.solve().unwrap();
        assert!((s.value + 7.0).abs() < 1e-9, "{}", s.value);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let lp = LinearProgram::minimize(
            vec![1.0],
            vec![vec![1.0], vec![1.0]],
            vec![Sense::Le, Sense::Ge],
            vec![1.0, 2.0],
        );
        assert_eq!(lp.solve().unwrap_err(), LpError::Infeasible);
        let lp = LinearProgram::maximize(vec![1.0], vec![vec![-1.0]], vec![Sense::Le], vec![1.0]);
        assert_eq!(lp.solve().unwrap_err(), LpError::Unbounded);
    }

    #[test]
    fn degenerate_redundant_equalities() {
        let lp = LinearProgram::minimize(
            vec![1.0, 1.0],
            vec![vec![1.0, 1.0], vec![2.0, 2.0]],
            vec![Sense::Eq, Sense::Eq],
            vec![1.0, 2.0],
        );
        let s = lp.solve().unwrap();
        assert!((s.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn malformed_inputs() {
        let lp =
            LinearProgram::minimize(vec![1.0, 2.0], vec![vec![1.0]], vec![Sense::Le], vec![1.0]);
        assert!(matches!(lp.solve(), Err(LpError::Malformed(_))));
        assert!(matches!(matrix_game(&[]), Err(LpError::Malformed(_))));
    }

    #[test]
    fn matching_pennies_value() {
        let g = vec![vec![1.0, -1.0], vec![-1.0, 1.0]];
        let s = matrix_game(&g).unwrap();
        assert!(s.value.abs() < 1e-9 && s.lower_value.abs() < 1e-9);
        assert!((s.row_strategy[0] - 0.5).abs() < 1e-9);
        assert!((s.col_strategy[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn rock_paper_scissors_and_saddle() {
        let rps = vec![
            vec![0.0, 1.0, -1.0],
            vec![-1.0, 0.0, 1.0],
            vec![1.0, -1.0, 0.0],
        ];
        let s = matrix_game(&rps).unwrap();
        assert!(s.value.abs() < 1e-9);
        // Pure saddle at (1, 0): row minimizes, column maximizes.
        let g = vec![vec![3.0, 5.0], vec![2.0, 1.5]];
        let s = matrix_game(&g).unwrap();
        assert!((s.value - 2.0).abs() < 1e-9);
        assert!((best_response_value(&g, &s.row_strategy) - s.value).abs() < 1e-9);
        assert!((best_reply_value(&g, &s.col_strategy) - s.lower_value).abs() < 1e-9);
    }
}
