//! Phase-one primal simplex with Bland's rule.
//!
//! Only feasibility is needed by the clustering relaxations, so the solver
//! minimises the sum of artificial variables and stops. An infeasible
//! system comes back with dual multipliers that form a Farkas certificate,
//! checkable independently with [`FarkasCertificate::verify`].

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// `sum coeffs · x  (sense)  rhs`, sparse.
#[derive(Clone, Debug)]
pub struct Constraint<S> {
    pub coeffs: Vec<(usize, S)>,
    pub sense: Sense,
    pub rhs: S,
}

/// A system of linear constraints over non-negative variables.
#[derive(Clone, Debug)]
pub struct LinearSystem<S> {
    pub num_vars: usize,
    pub constraints: Vec<Constraint<S>>,
}

/// Multipliers `π`, one per constraint, with `π ≤ 0` on `Le` rows, `π ≥ 0`
/// on `Ge` rows, `πᵀA ≤ 0` column-wise and `πᵀb > 0`. Their existence
/// proves that no non-negative `x` satisfies the system.
#[derive(Clone, Debug, PartialEq)]
pub struct FarkasCertificate<S> {
    pub multipliers: Vec<S>,
}

impl<S: Scalar> FarkasCertificate<S> {
    /// Checks the certificate against the system, from scratch.
    pub fn verify(&self, system: &LinearSystem<S>) -> bool {
        if self.multipliers.len() != system.constraints.len() {
            return false;
        }
        let mut column = vec![S::zero(); system.num_vars];
        let mut rhs = S::zero();
        for (row, pi) in system.constraints.iter().zip(&self.multipliers) {
            let sign_ok = match row.sense {
                Sense::Le => pi.approx_le(&S::zero()),
                Sense::Ge => S::zero().approx_le(pi),
                Sense::Eq => true,
            };
            if !sign_ok {
                return false;
            }
            for (j, a) in &row.coeffs {
                column[*j] = column[*j].clone() + a.clone() * pi.clone();
            }
            rhs = rhs + row.rhs.clone() * pi.clone();
        }
        column.iter().all(|c| c.approx_le(&S::zero())) && S::zero().definitely_lt(&rhs)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility<S> {
    Feasible(Vec<S>),
    Infeasible(FarkasCertificate<S>),
}

/// Pivot limit for the floating backend; Bland's rule terminates in exact
/// arithmetic, but rounding can still stall it.
const FLOAT_PIVOT_LIMIT: usize = 50_000;

struct Tableau<S> {
    rows: Vec<Vec<S>>,
    /// Reduced costs of the phase-one objective.
    cost: Vec<S>,
    /// Right-hand side per row, and the negated objective value.
    rhs: Vec<S>,
    objective: S,
    basis: Vec<usize>,
}

/// Layout of tableau columns: structural variables, then one slack or
/// surplus per inequality, then one artificial per `Ge`/`Eq` row.
struct Columns {
    slack: Vec<Option<usize>>,
    artificial: Vec<Option<usize>>,
    total: usize,
}

/// Finds a non-negative point satisfying every constraint, or a Farkas
/// certificate of infeasibility.
pub fn find_feasible<S: Scalar>(system: &LinearSystem<S>) -> Result<Feasibility<S>> {
    // Normalise to non-negative right-hand sides.
    let mut flipped = vec![false; system.constraints.len()];
    let rows: Vec<Constraint<S>> = system
        .constraints
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if c.rhs.definitely_lt(&S::zero()) {
                flipped[i] = true;
                Constraint {
                    coeffs: c.coeffs.iter().map(|(j, a)| (*j, -a.clone())).collect(),
                    sense: match c.sense {
                        Sense::Le => Sense::Ge,
                        Sense::Ge => Sense::Le,
                        Sense::Eq => Sense::Eq,
                    },
                    rhs: -c.rhs.clone(),
                }
            } else {
                c.clone()
            }
        })
        .collect();

    let nv = system.num_vars;
    let m = rows.len();
    let mut next = nv;
    let mut slack = vec![None; m];
    for (i, r) in rows.iter().enumerate() {
        if r.sense != Sense::Eq {
            slack[i] = Some(next);
            next += 1;
        }
    }
    let mut artificial = vec![None; m];
    for (i, r) in rows.iter().enumerate() {
        if r.sense != Sense::Le {
            artificial[i] = Some(next);
            next += 1;
        }
    }
    let cols = Columns {
        slack,
        artificial,
        total: next,
    };

    let mut tab = Tableau {
        rows: Vec::with_capacity(m),
        cost: vec![S::zero(); cols.total],
        rhs: Vec::with_capacity(m),
        objective: S::zero(),
        basis: Vec::with_capacity(m),
    };
    for (i, r) in rows.iter().enumerate() {
        let mut row = vec![S::zero(); cols.total];
        for (j, a) in &r.coeffs {
            row[*j] = row[*j].clone() + a.clone();
        }
        if let Some(s) = cols.slack[i] {
            row[s] = if r.sense == Sense::Le {
                S::one()
            } else {
                -S::one()
            };
        }
        if let Some(a) = cols.artificial[i] {
            row[a] = S::one();
            // Phase-one reduced costs: c_j - sum over artificial rows.
            for (j, v) in row.iter().enumerate() {
                if j != a && !v.near_zero() {
                    tab.cost[j] = tab.cost[j].clone() - v.clone();
                }
            }
            tab.objective = tab.objective.clone() - r.rhs.clone();
            tab.basis.push(a);
        } else {
            tab.basis
                .push(cols.slack[i].expect("Le rows carry a slack"));
        }
        tab.rows.push(row);
        tab.rhs.push(r.rhs.clone());
    }

    let mut pivots = 0usize;
    while let Some(enter) = (0..cols.total).find(|&j| tab.cost[j].definitely_lt(&S::zero())) {
        let leave = choose_leaving(&tab, enter);
        let Some(leave) = leave else {
            // Unbounded direction cannot occur: the objective is bounded by 0.
            return Err(Error::SolverPrecisionExceeded);
        };
        pivot(&mut tab, leave, enter);
        pivots += 1;
        if !S::EXACT && pivots > FLOAT_PIVOT_LIMIT {
            return Err(Error::SolverPrecisionExceeded);
        }
    }

    // objective holds minus the phase-one optimum.
    let infeasibility = -tab.objective.clone();
    if infeasibility.near_zero() {
        let mut x = vec![S::zero(); nv];
        for (i, &b) in tab.basis.iter().enumerate() {
            if b < nv {
                x[b] = tab.rhs[i].clone();
            }
        }
        if !S::EXACT && !satisfies(system, &x) {
            return Err(Error::SolverPrecisionExceeded);
        }
        return Ok(Feasibility::Feasible(x));
    }

    // Duals: artificial column a_i has cost 1, so π_i = 1 - r(a_i); a Le
    // row's slack has cost 0 and column e_i, so π_i = -r(s_i).
    let multipliers: Vec<S> = (0..m)
        .map(|i| {
            let pi = match (cols.artificial[i], cols.slack[i]) {
                (Some(a), _) => S::one() - tab.cost[a].clone(),
                (None, Some(s)) => -tab.cost[s].clone(),
                (None, None) => unreachable!("every row has a slack or an artificial"),
            };
            if flipped[i] {
                -pi
            } else {
                pi
            }
        })
        .collect();
    let cert = FarkasCertificate { multipliers };
    if !S::EXACT && !cert.verify(system) {
        return Err(Error::SolverPrecisionExceeded);
    }
    Ok(Feasibility::Infeasible(cert))
}

/// Minimum-ratio test; ties go to the lowest basic variable index (Bland).
fn choose_leaving<S: Scalar>(tab: &Tableau<S>, enter: usize) -> Option<usize> {
    let mut best: Option<(usize, S)> = None;
    for (i, row) in tab.rows.iter().enumerate() {
        let a = &row[enter];
        if !S::zero().definitely_lt(a) {
            continue;
        }
        let ratio = tab.rhs[i].clone() / a.clone();
        best = match best {
            None => Some((i, ratio)),
            Some((bi, br)) => {
                if ratio.definitely_lt(&br)
                    || (ratio.approx_eq(&br) && tab.basis[i] < tab.basis[bi])
                {
                    Some((i, ratio))
                } else {
                    Some((bi, br))
                }
            }
        };
    }
    best.map(|(i, _)| i)
}

fn pivot<S: Scalar>(tab: &mut Tableau<S>, leave: usize, enter: usize) {
    let inv = S::one() / tab.rows[leave][enter].clone();
    let support: Vec<usize> = {
        let row = &mut tab.rows[leave];
        let mut support = Vec::new();
        for (j, v) in row.iter_mut().enumerate() {
            if !v.near_zero() {
                *v = v.clone() * inv.clone();
                support.push(j);
            } else if !S::EXACT {
                *v = S::zero();
            }
        }
        support
    };
    tab.rhs[leave] = tab.rhs[leave].clone() * inv;
    let prow = tab.rows[leave].clone();
    let prhs = tab.rhs[leave].clone();
    for i in 0..tab.rows.len() {
        if i == leave {
            continue;
        }
        let factor = tab.rows[i][enter].clone();
        if factor.near_zero() {
            continue;
        }
        let row = &mut tab.rows[i];
        for &j in &support {
            row[j].sub_mul_assign(&factor, &prow[j]);
        }
        row[enter] = S::zero();
        tab.rhs[i].sub_mul_assign(&factor, &prhs);
        if !S::EXACT && tab.rhs[i] < S::zero() && tab.rhs[i].near_zero() {
            tab.rhs[i] = S::zero();
        }
    }
    let factor = tab.cost[enter].clone();
    if !factor.near_zero() {
        for &j in &support {
            tab.cost[j].sub_mul_assign(&factor, &prow[j]);
        }
        tab.cost[enter] = S::zero();
        tab.objective.sub_mul_assign(&factor, &prhs);
    }
    tab.basis[leave] = enter;
}

/// Checks every constraint at `x` (within tolerance for floats).
pub fn satisfies<S: Scalar>(system: &LinearSystem<S>, x: &[S]) -> bool {
    if x.iter().any(|v| v.definitely_lt(&S::zero())) {
        return false;
    }
    system.constraints.iter().all(|c| {
        let lhs = c
            .coeffs
            .iter()
            .fold(S::zero(), |acc, (j, a)| acc + a.clone() * x[*j].clone());
        match c.sense {
            Sense::Le => lhs.approx_le(&c.rhs),
            Sense::Ge => c.rhs.approx_le(&lhs),
            Sense::Eq => lhs.approx_eq(&c.rhs),
        }
    })
}
