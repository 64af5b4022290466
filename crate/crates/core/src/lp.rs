//! Dense two-phase simplex for small equality-form programs
//! `min c·x  s.t.  A x = b, x >= 0`.
//!
//! Pivoting follows Bland's rule (lowest eligible index enters, ties in the
//! ratio test go to the lowest basic variable), which rules out cycling on the
//! heavily degenerate marginal-matching systems this crate produces.
//!
//! Phase one minimises the sum of artificial variables. Its final simplex
//! multipliers `y` satisfy `yᵀA_j <= 0` for every column and `yᵀb` equal to the
//! residual, which is exactly a Farkas certificate when the residual is positive.

const PIVOT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    /// Minimised. Empty means pure feasibility.
    pub objective: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        x: Vec<f64>,
        value: f64,
    },
    /// `farkas` has `farkasᵀA_j <= 0` for all columns and `farkasᵀb = residual > 0`.
    Infeasible {
        farkas: Vec<f64>,
        residual: f64,
    },
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOne {
    pub residual: f64,
    pub x: Vec<f64>,
    /// Simplex multipliers of the phase-one objective, in the original row signs.
    pub multipliers: Vec<f64>,
}

struct Tableau {
    m: usize,
    n: usize,
    // m rows of width n + m + 1 (structural, artificial, rhs)
    t: Vec<Vec<f64>>,
    // reduced-cost row, same width; last entry is minus the objective value
    cost: Vec<f64>,
    basis: Vec<usize>,
    barred: Vec<bool>,
}

impl Tableau {
    fn width(&self) -> usize {
        self.n + self.m + 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width();
        let p = self.t[r][c];
        for j in 0..w {
            self.t[r][j] /= p;
        }
        let pivot_row = self.t[r].clone();
        for i in 0..self.m {
            if i != r {
                let f = self.t[i][c];
                if f != 0.0 {
                    for j in 0..w {
                        self.t[i][j] -= f * pivot_row[j];
                    }
                }
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for j in 0..w {
                self.cost[j] -= f * pivot_row[j];
            }
        }
        self.basis[r] = c;
    }

    /// Runs Bland's rule to optimality. Returns false if unbounded.
    fn optimize(&mut self) -> bool {
        let rhs = self.width() - 1;
        loop {
            let entering = (0..self.n + self.m).find(|&j| !self.barred[j] && self.cost[j] < -PIVOT_EPS);
            let Some(c) = entering else { return true };
            let mut best: Option<(f64, usize, usize)> = None;
            for i in 0..self.m {
                let a = self.t[i][c];
                if a > PIVOT_EPS {
                    let ratio = self.t[i][rhs] / a;
                    let better = match best {
                        None => true,
                        Some((br, _, bb)) => ratio < br - PIVOT_EPS || (ratio <= br + PIVOT_EPS && self.basis[i] < bb),
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            match best {
                Some((_, r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }

    fn solution(&self) -> Vec<f64> {
        let rhs = self.width() - 1;
        let mut x = vec![0.0; self.n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.t[i][rhs].max(0.0);
            }
        }
        x
    }
}

impl LinearProgram {
    pub fn feasibility(num_vars: usize, rows: Vec<Vec<f64>>, rhs: Vec<f64>) -> Self {
        LinearProgram { num_vars, rows, rhs, objective: Vec::new() }
    }

    fn phase_one_tableau(&self) -> (Tableau, Vec<f64>) {
        let m = self.rows.len();
        let n = self.num_vars;
        let mut signs = vec![1.0; m];
        let mut t = Vec::with_capacity(m);
        for i in 0..m {
            let s = if self.rhs[i] < 0.0 { -1.0 } else { 1.0 };
            signs[i] = s;
            let mut row = vec![0.0; n + m + 1];
            for j in 0..n {
                row[j] = s * self.rows[i].get(j).copied().unwrap_or(0.0);
            }
            row[n + i] = 1.0;
            row[n + m] = s * self.rhs[i];
            t.push(row);
        }
        // reduced costs of the all-artificial start: c_j - 1ᵀ A_j
        let mut cost = vec![0.0; n + m + 1];
        for j in 0..n {
            cost[j] = -t.iter().map(|r| r[j]).sum::<f64>();
        }
        cost[n + m] = -t.iter().map(|r| r[n + m]).sum::<f64>();
        let tab = Tableau { m, n, t, cost, basis: (n..n + m).collect(), barred: vec![false; n + m] };
        (tab, signs)
    }

    /// Minimises the total artificial slack on `A x = b`.
    pub fn phase_one(&self) -> PhaseOne {
        let (mut tab, signs) = self.phase_one_tableau();
        tab.optimize();
        let residual = -tab.cost[tab.width() - 1];
        // reduced cost of artificial i is 1 - y_i
        let multipliers = (0..tab.m).map(|i| signs[i] * (1.0 - tab.cost[tab.n + i])).collect();
        PhaseOne { residual, x: tab.solution(), multipliers }
    }

    /// Full two-phase solve. `tol` decides feasibility on the phase-one residual.
    pub fn solve(&self, tol: f64) -> LpOutcome {
        let (mut tab, signs) = self.phase_one_tableau();
        tab.optimize();
        let w = tab.width();
        let residual = -tab.cost[w - 1];
        if residual > tol {
            let farkas = (0..tab.m).map(|i| signs[i] * (1.0 - tab.cost[tab.n + i])).collect();
            return LpOutcome::Infeasible { farkas, residual };
        }
        // drive remaining artificials out of the basis; rows where that is
        // impossible are redundant and keep their artificial at zero
        for r in 0..tab.m {
            if tab.basis[r] >= tab.n {
                if let Some(c) = (0..tab.n).find(|&j| tab.t[r][j].abs() > 1e-9) {
                    tab.pivot(r, c);
                }
            }
        }
        for j in tab.n..tab.n + tab.m {
            tab.barred[j] = true;
        }
        let mut cost = vec![0.0; w];
        for (j, &c) in self.objective.iter().enumerate().take(tab.n) {
            cost[j] = c;
        }
        for r in 0..tab.m {
            let b = tab.basis[r];
            let cb = if b < tab.n { cost[b] } else { 0.0 };
            if cb != 0.0 {
                for j in 0..w {
                    cost[j] -= cb * tab.t[r][j];
                }
            }
        }
        tab.cost = cost;
        if !tab.optimize() {
            return LpOutcome::Unbounded;
        }
        let x = tab.solution();
        let value = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        LpOutcome::Optimal { x, value }
    }
}
