//! Bounded-variable primal simplex for
//!
//! ```text
//!     maximize  cᵀa   subject to  A a = b,  0 ≤ a_j ≤ u_j
//! ```
//!
//! with few equality rows (`m`, the number of regression parameters) and many
//! bounded columns (`n`, one per observation). This is the dual of the
//! weighted pinball-loss problem; the simplex multipliers at the optimum are
//! the regression coefficients.
//!
//! Phase one starts from a crash basis of `m` artificial columns with the
//! structural columns parked at caller-chosen bounds. Pricing is Dantzig's
//! rule with lowest-index tie breaking; after a run of degenerate pivots it
//! switches to Bland's rule (lowest eligible index enters, lowest index among
//! tied ratios leaves) until progress resumes, so the method cannot cycle and
//! the pivot sequence is fully deterministic.

use crate::linalg::{dot, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Basic,
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpError {
    Infeasible,
    IterationLimit(usize),
    Singular,
}

impl std::fmt::Display for LpError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LpError::Infeasible => f.write_str("linear program is infeasible"),
            LpError::IterationLimit(n) => write!(f, "no convergence after {n} simplex iterations"),
            LpError::Singular => f.write_str("basis matrix became singular"),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LpSolution<T> {
    /// Simplex multipliers `π = B⁻ᵀ c_B`.
    pub duals: Vec<T>,
    /// Primal values of the structural columns.
    #[allow(dead_code)]
    pub values: Vec<T>,
    #[allow(dead_code)]
    pub iterations: usize,
}

/// Problem data. Column `j` of `A` is row `j` of `columns`.
pub(crate) struct BoundedLp<'a, T> {
    pub columns: &'a Matrix<T>,
    pub cost: &'a [T],
    pub upper: &'a [T],
    pub rhs: Vec<T>,
}

const DEGENERATE_RUN: usize = 30;
const REFACTOR_EVERY: usize = 64;

struct State<'a, T> {
    lp: &'a BoundedLp<'a, T>,
    n: usize,
    m: usize,
    status: Vec<Status>,
    /// Variable index per basis row; `n + k` is the artificial of row `k`.
    basis: Vec<usize>,
    xb: Vec<T>,
    binv: Matrix<T>,
    art_sign: Vec<T>,
    phase_one: bool,
    iterations: usize,
    since_refactor: usize,
}

impl<'a, T: Scalar> State<'a, T> {
    fn column(&self, j: usize) -> Vec<T> {
        if j < self.n {
            self.lp.columns.row(j).to_vec()
        } else {
            let mut e = vec![T::zero(); self.m];
            e[j - self.n] = self.art_sign[j - self.n];
            e
        }
    }

    fn upper(&self, j: usize) -> T {
        if j < self.n {
            self.lp.upper[j]
        } else if self.phase_one {
            T::infinity()
        } else {
            T::zero()
        }
    }

    fn cost(&self, j: usize) -> T {
        match (self.phase_one, j < self.n) {
            (true, true) => T::zero(),
            (true, false) => -T::one(),
            (false, true) => self.lp.cost[j],
            (false, false) => T::zero(),
        }
    }

    fn duals(&self) -> Vec<T> {
        let mut pi = vec![T::zero(); self.m];
        for (k, &var) in self.basis.iter().enumerate() {
            let c = self.cost(var);
            if c != T::zero() {
                for (i, p) in pi.iter_mut().enumerate() {
                    *p += c * self.binv[(k, i)];
                }
            }
        }
        pi
    }

    fn ftran(&self, col: &[T]) -> Vec<T> {
        self.binv.mul_vec(col)
    }

    /// Rebuilds `B⁻¹` and the basic values from scratch.
    fn refactor(&mut self) -> Result<(), LpError> {
        let mut bmat = Matrix::zeros(self.m, self.m);
        for (k, &var) in self.basis.iter().enumerate() {
            let col = self.column(var);
            for i in 0..self.m {
                bmat[(i, k)] = col[i];
            }
        }
        self.binv = bmat.inverse(T::pivot_tolerance()).ok_or(LpError::Singular)?;
        let mut r = self.lp.rhs.clone();
        for j in 0..self.n {
            if self.status[j] == Status::Upper {
                let u = self.lp.upper[j];
                for (ri, &a) in r.iter_mut().zip(self.lp.columns.row(j)) {
                    *ri -= a * u;
                }
            }
        }
        self.xb = self.ftran(&r);
        self.since_refactor = 0;
        Ok(())
    }

    fn pivot(&mut self, row: usize, alpha: &[T]) {
        let piv = alpha[row];
        for c in 0..self.m {
            self.binv[(row, c)] /= piv;
        }
        for r in 0..self.m {
            if r != row && alpha[r] != T::zero() {
                let f = alpha[r];
                for c in 0..self.m {
                    let v = self.binv[(row, c)];
                    self.binv[(r, c)] -= f * v;
                }
            }
        }
    }

    /// Runs the current phase to optimality.
    fn optimize(&mut self, max_iter: usize) -> Result<(), LpError> {
        let opt_tol = T::optimality_tolerance();
        let piv_tol = T::pivot_tolerance();
        let mut degenerate = 0usize;
        loop {
            if self.iterations >= max_iter {
                return Err(LpError::IterationLimit(self.iterations));
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let bland = degenerate >= DEGENERATE_RUN;
            let pi = self.duals();

            // pricing; artificials never re-enter
            let mut entering: Option<(usize, T)> = None;
            for j in 0..self.n {
                let st = self.status[j];
                if st == Status::Basic {
                    continue;
                }
                let c = self.cost(j);
                let z = dot(&pi, self.lp.columns.row(j));
                let d = c - z;
                let tol = opt_tol * (T::one() + c.abs().max(z.abs()));
                let eligible = (st == Status::Lower && d > tol) || (st == Status::Upper && d < -tol);
                if !eligible {
                    continue;
                }
                if bland {
                    entering = Some((j, d));
                    break;
                }
                if entering.is_none_or(|(_, best)| d.abs() > best.abs()) {
                    entering = Some((j, d));
                }
            }
            let Some((j, _)) = entering else {
                return Ok(());
            };
            self.iterations += 1;

            let alpha = self.ftran(&self.column(j));
            let dir = if self.status[j] == Status::Lower {
                T::one()
            } else {
                -T::one()
            };
            let flip = self.upper(j);

            // ratio test over basic variables moving as x_B − θ·dir·α
            let mut leave: Option<(usize, T, Status)> = None;
            for r in 0..self.m {
                let delta = dir * alpha[r];
                let var = self.basis[r];
                let (theta, to) = if delta > piv_tol {
                    ((self.xb[r] / delta).max(T::zero()), Status::Lower)
                } else if delta < -piv_tol {
                    let ub = self.upper(var);
                    if !ub.is_finite() {
                        continue;
                    }
                    (((ub - self.xb[r]) / -delta).max(T::zero()), Status::Upper)
                } else {
                    continue;
                };
                let better = match leave {
                    None => true,
                    Some((best_r, best_theta, _)) => {
                        let slack = piv_tol * (T::one() + best_theta.abs());
                        if theta < best_theta - slack {
                            true
                        } else if theta <= best_theta + slack {
                            if bland {
                                var < self.basis[best_r]
                            } else {
                                (dir * alpha[r]).abs() > (dir * alpha[best_r]).abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    leave = Some((r, theta, to));
                }
            }

            match leave.filter(|&(_, theta, _)| theta < flip) {
                None => {
                    // bound flip of the entering column
                    for r in 0..self.m {
                        self.xb[r] -= flip * dir * alpha[r];
                    }
                    self.status[j] = if self.status[j] == Status::Lower {
                        Status::Upper
                    } else {
                        Status::Lower
                    };
                    degenerate = 0;
                }
                Some((r, theta, to)) => {
                    for k in 0..self.m {
                        self.xb[k] -= theta * dir * alpha[k];
                    }
                    let entering_value = if dir > T::zero() { theta } else { flip - theta };
                    let old = self.basis[r];
                    if old < self.n {
                        self.status[old] = to;
                    }
                    self.status[j] = Status::Basic;
                    self.basis[r] = j;
                    self.xb[r] = entering_value;
                    self.pivot(r, &alpha);
                    self.since_refactor += 1;
                    if theta <= piv_tol {
                        degenerate += 1;
                    } else {
                        degenerate = 0;
                    }
                }
            }
        }
    }

    /// Replaces artificials still basic (at level zero) by structural columns.
    fn drive_out_artificials(&mut self) -> Result<(), LpError> {
        let piv_tol = T::pivot_tolerance();
        for r in 0..self.m {
            if self.basis[r] < self.n {
                continue;
            }
            let candidate = (0..self.n)
                .filter(|&j| self.status[j] != Status::Basic)
                .map(|j| {
                    let a = self.ftran(self.lp.columns.row(j));
                    (j, a)
                })
                .find(|(_, a)| a[r].abs() > piv_tol);
            let Some((j, alpha)) = candidate else {
                // redundant row; the artificial stays basic at zero
                continue;
            };
            let value = if self.status[j] == Status::Upper {
                self.lp.upper[j]
            } else {
                T::zero()
            };
            self.status[j] = Status::Basic;
            self.basis[r] = j;
            self.pivot(r, &alpha);
            self.xb[r] = value;
            self.refactor()?;
        }
        Ok(())
    }
}

impl<'a, T: Scalar> BoundedLp<'a, T> {
    /// Solves the program. `start_at_upper[j]` parks column `j` at its upper
    /// bound in the crash basis; a good guess (from a nearby solution) cuts
    /// the iteration count sharply.
    pub(crate) fn solve(&'a self, start_at_upper: Option<&[bool]>) -> Result<LpSolution<T>, LpError> {
        let n = self.columns.rows();
        let m = self.rhs.len();
        assert_eq!(self.columns.cols(), m);
        assert_eq!(self.cost.len(), n);
        assert_eq!(self.upper.len(), n);

        let status: Vec<Status> = (0..n)
            .map(|j| match start_at_upper {
                Some(s) if s[j] => Status::Upper,
                _ => Status::Lower,
            })
            .collect();
        let mut resid = self.rhs.clone();
        for j in 0..n {
            if status[j] == Status::Upper {
                for (r, &a) in resid.iter_mut().zip(self.columns.row(j)) {
                    *r -= a * self.upper[j];
                }
            }
        }
        let art_sign: Vec<T> = resid
            .iter()
            .map(|&r| if r < T::zero() { -T::one() } else { T::one() })
            .collect();
        let mut binv = Matrix::zeros(m, m);
        for k in 0..m {
            binv[(k, k)] = art_sign[k];
        }
        let mut st = State {
            lp: self,
            n,
            m,
            status,
            basis: (n..n + m).collect(),
            xb: resid.iter().map(|r| r.abs()).collect(),
            binv,
            art_sign,
            phase_one: true,
            iterations: 0,
            since_refactor: 0,
        };
        let max_iter = 50 * (n + m) + 1000;

        st.optimize(max_iter)?;
        st.refactor()?;
        let infeasibility: T = st
            .basis
            .iter()
            .zip(&st.xb)
            .filter(|(&v, _)| v >= n)
            .map(|(_, &x)| x.abs())
            .sum();
        let scale = self.rhs.iter().fold(T::one(), |a, &b| a.max(b.abs()));
        if infeasibility > T::optimality_tolerance() * scale {
            return Err(LpError::Infeasible);
        }
        st.drive_out_artificials()?;
        st.phase_one = false;
        st.optimize(max_iter)?;
        st.refactor()?;

        let mut values: Vec<T> = (0..n)
            .map(|j| match st.status[j] {
                Status::Upper => self.upper[j],
                _ => T::zero(),
            })
            .collect();
        for (k, &var) in st.basis.iter().enumerate() {
            if var < n {
                values[var] = st.xb[k];
            }
        }
        Ok(LpSolution {
            duals: st.duals(),
            values,
            iterations: st.iterations,
        })
    }
}
