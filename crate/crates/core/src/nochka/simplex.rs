//! Dense two-phase simplex over exact rationals with Bland's rule.
//!
//! Sized for the weight problems here: a few dozen variables and at most a
//! few hundred constraints. No attempt at sparsity or numerical tricks; every
//! pivot is exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(num: i64, den: i64) -> Q {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn qi(num: i64) -> Q {
    BigRational::from_integer(BigInt::from(num))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Q>,
    pub sense: Sense,
    pub rhs: Q,
}

impl Constraint {
    pub fn new(coeffs: Vec<Q>, sense: Sense, rhs: Q) -> Self {
        Constraint { coeffs, sense, rhs }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal {
        x: Vec<Q>,
        value: Q,
    },
    /// Phase one ended with positive infeasibility; `row` is the original
    /// constraint carrying the largest artificial value.
    Infeasible {
        row: usize,
        violation: Q,
    },
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Q>>, // each row: coefficients for all columns, then rhs
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Q {
        &self.rows[i][self.ncols]
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col].clone();
        for v in self.rows[r].iter_mut() {
            *v = &*v / &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v = &*v - &f * pv;
                }
            }
        }
        self.basis[r] = col;
    }

    /// Maximises `cost · x` from the current basic feasible solution.
    /// `allowed` masks columns that may enter.
    fn optimise(&mut self, cost: &[Q], allowed: &[bool]) -> Result<(), ()> {
        loop {
            // reduced profit d_j = c_j - Σ c_B(i) a_ij
            let entering = (0..self.ncols).find(|&j| {
                if !allowed[j] || self.basis.contains(&j) {
                    return false;
                }
                let mut d = cost[j].clone();
                for (i, row) in self.rows.iter().enumerate() {
                    if !row[j].is_zero() {
                        d -= &cost[self.basis[i]] * &row[j];
                    }
                }
                d.is_positive()
            });
            let Some(col) = entering else {
                return Ok(());
            };
            let mut best: Option<(usize, Q)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, col),
                None => return Err(()),
            }
        }
    }
}

/// Maximises `objective · x` subject to `constraints` and `x >= 0`.
pub fn maximize(objective: &[Q], constraints: &[Constraint]) -> LpOutcome {
    let nvars = objective.len();
    let m = constraints.len();
    // normalise to rhs >= 0
    let normalised: Vec<(Vec<Q>, Sense, Q)> = constraints
        .iter()
        .map(|c| {
            let mut coeffs = c.coeffs.clone();
            coeffs.resize(nvars, Q::zero());
            if c.rhs.is_negative() {
                let sense = match c.sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                };
                (coeffs.iter().map(|v| -v).collect(), sense, -c.rhs.clone())
            } else {
                (coeffs, c.sense, c.rhs.clone())
            }
        })
        .collect();

    let n_slack = normalised.iter().filter(|c| c.1 != Sense::Eq).count();
    let n_art = normalised.iter().filter(|c| c.1 != Sense::Le).count();
    let ncols = nvars + n_slack + n_art;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art_row = Vec::new(); // (column, original row)
    let (mut s, mut a) = (nvars, nvars + n_slack);
    for (i, (coeffs, sense, rhs)) in normalised.into_iter().enumerate() {
        let mut row = vec![Q::zero(); ncols + 1];
        row[..nvars].clone_from_slice(&coeffs);
        row[ncols] = rhs;
        match sense {
            Sense::Le => {
                row[s] = Q::one();
                basis.push(s);
                s += 1;
            }
            Sense::Ge => {
                row[s] = -Q::one();
                s += 1;
                row[a] = Q::one();
                basis.push(a);
                art_row.push((a, i));
                a += 1;
            }
            Sense::Eq => {
                row[a] = Q::one();
                basis.push(a);
                art_row.push((a, i));
                a += 1;
            }
        }
        rows.push(row);
    }
    let mut t = Tableau { rows, basis, ncols };
    let is_art = |j: usize| j >= nvars + n_slack;

    if n_art > 0 {
        let cost: Vec<Q> = (0..ncols)
            .map(|j| if is_art(j) { -Q::one() } else { Q::zero() })
            .collect();
        let allowed = vec![true; ncols];
        // phase one is bounded by construction
        let _ = t.optimise(&cost, &allowed);
        let infeasibility: Q = (0..m).filter(|&i| is_art(t.basis[i])).map(|i| t.rhs(i).clone()).sum();
        if infeasibility.is_positive() {
            let (row, violation) = (0..m)
                .filter(|&i| is_art(t.basis[i]) && t.rhs(i).is_positive())
                .map(|i| {
                    let orig = art_row
                        .iter()
                        .find(|(col, _)| *col == t.basis[i])
                        .map(|p| p.1)
                        .unwrap_or(i);
                    (orig, t.rhs(i).clone())
                })
                .max_by(|x, y| x.1.cmp(&y.1))
                .unwrap_or((0, infeasibility));
            return LpOutcome::Infeasible { row, violation };
        }
        // drive zero-level artificials out of the basis
        let mut i = 0;
        while i < t.rows.len() {
            if is_art(t.basis[i]) {
                match (0..nvars + n_slack).find(|&j| !t.rows[i][j].is_zero()) {
                    Some(j) => {
                        t.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    let mut cost = vec![Q::zero(); ncols];
    cost[..nvars].clone_from_slice(objective);
    let allowed: Vec<bool> = (0..ncols).map(|j| !is_art(j)).collect();
    if t.optimise(&cost, &allowed).is_err() {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Q::zero(); nvars];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < nvars {
            x[b] = t.rhs(i).clone();
        }
    }
    let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpOutcome::Optimal { x, value }
}
