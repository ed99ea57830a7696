//! Dense revised simplex with bounded variables.
//!
//! Every row `i` carries a logical variable `r_i` with `a_i·x - r_i = 0`; the
//! row sense lives in the bounds of `r_i`. The all-logical basis is therefore
//! always available as a starting point, and a new row can be appended to an
//! optimal basis with its logical basic, which keeps the old basis as a warm
//! start. Phase I minimizes the sum of bound violations of basic variables.

use crate::error::{Error, Result};

const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_SWITCH: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free variable resting at zero.
    Zero,
}

/// Solution of a linear program.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
    pub iterations: usize,
}

/// Incremental simplex state. Rows may be appended between solves.
#[derive(Debug, Clone)]
pub struct Simplex {
    ns: usize,
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    lo: Vec<f64>,
    up: Vec<f64>,
    x: Vec<f64>,
    status: Vec<Status>,
    head: Vec<usize>,
    binv: Vec<f64>,
    since_refactor: usize,
    pub max_iterations: usize,
    pub total_iterations: usize,
}

impl Simplex {
    /// Structural variables with costs and bounds; no rows yet.
    pub fn new(cost: Vec<f64>, bounds: Vec<(f64, f64)>) -> Result<Self> {
        if cost.len() != bounds.len() {
            return Err(Error::InvalidInput("cost and bound lengths differ".into()));
        }
        let ns = cost.len();
        let mut x = Vec::with_capacity(ns);
        let mut status = Vec::with_capacity(ns);
        for (j, &(l, u)) in bounds.iter().enumerate() {
            if l > u || l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(Error::InvalidInput(format!("bad bounds on variable {j}")));
            }
            let (v, s) = initial_position(cost[j], l, u);
            x.push(v);
            status.push(s);
        }
        Ok(Simplex {
            ns,
            m: 0,
            cols: vec![Vec::new(); ns],
            cost,
            lo: bounds.iter().map(|b| b.0).collect(),
            up: bounds.iter().map(|b| b.1).collect(),
            x,
            status,
            head: Vec::new(),
            binv: Vec::new(),
            since_refactor: 0,
            max_iterations: 200_000,
            total_iterations: 0,
        })
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn num_structural(&self) -> usize {
        self.ns
    }

    /// Appends `coeffs · x (sense) rhs`. The logical of the new row enters the
    /// basis, so an optimal basis stays dual feasible.
    pub fn add_row(&mut self, coeffs: &[(usize, f64)], sense: RowSense, rhs: f64) -> Result<()> {
        let row = self.m;
        let mut value = 0.0;
        for &(j, a) in coeffs {
            if j >= self.ns {
                return Err(Error::IndexOutOfRange { index: j, n: self.ns });
            }
            if a != 0.0 {
                self.cols[j].push((row, a));
                value += a * self.x[j];
            }
        }
        let (l, u) = match sense {
            RowSense::Eq => (rhs, rhs),
            RowSense::Le => (f64::NEG_INFINITY, rhs),
            RowSense::Ge => (rhs, f64::INFINITY),
        };
        // Extend B^{-1}: new row is a_B^T B^{-1} followed by -1.
        let m = self.m;
        let mut a_b = vec![0.0; m];
        for (p, &h) in self.head.iter().enumerate() {
            if h < self.ns {
                a_b[p] = coeffs.iter().filter(|c| c.0 == h).map(|c| c.1).sum();
            }
        }
        let mut nb = vec![0.0; (m + 1) * (m + 1)];
        for i in 0..m {
            nb[i * (m + 1)..i * (m + 1) + m].copy_from_slice(&self.binv[i * m..(i + 1) * m]);
        }
        for (p, &ap) in a_b.iter().enumerate() {
            if ap != 0.0 {
                for c in 0..m {
                    nb[m * (m + 1) + c] += ap * self.binv[p * m + c];
                }
            }
        }
        nb[m * (m + 1) + m] = -1.0;
        self.binv = nb;
        self.m += 1;
        self.cost.push(0.0);
        self.lo.push(l);
        self.up.push(u);
        self.x.push(value);
        self.status.push(Status::Basic);
        self.head.push(self.ns + row);
        Ok(())
    }

    /// Current value of structural variable `j`.
    pub fn value(&self, j: usize) -> f64 {
        self.x[j]
    }

    pub fn objective(&self) -> f64 {
        (0..self.ns).map(|j| self.cost[j] * self.x[j]).sum()
    }

    /// Optimizes from the current basis.
    pub fn solve(&mut self) -> Result<LpSolution> {
        let start = self.total_iterations;
        self.refactor()?;
        self.run(true)?;
        if self.infeasibility() > FEAS_TOL * 10.0 {
            return Err(Error::LpInfeasible);
        }
        self.run(false)?;
        // Snap structural values onto bounds they sit at.
        for j in 0..self.ns {
            for b in [self.lo[j], self.up[j]] {
                if b.is_finite() && (self.x[j] - b).abs() < 1e-11 {
                    self.x[j] = b;
                }
            }
        }
        Ok(LpSolution {
            value: self.objective(),
            x: self.x[..self.ns].to_vec(),
            iterations: self.total_iterations - start,
        })
    }

    fn infeasibility(&self) -> f64 {
        self.head
            .iter()
            .map(|&h| (self.lo[h] - self.x[h]).max(0.0) + (self.x[h] - self.up[h]).max(0.0))
            .sum()
    }

    fn column(&self, j: usize, out: &mut Vec<(usize, f64)>) {
        out.clear();
        if j < self.ns {
            out.extend_from_slice(&self.cols[j]);
        } else {
            out.push((j - self.ns, -1.0));
        }
    }

    /// Rebuilds `B^{-1}` by Gauss-Jordan elimination and recomputes basic values.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        let mut col = Vec::new();
        for (p, &h) in self.head.iter().enumerate() {
            self.column(h, &mut col);
            for &(r, v) in &col {
                a[r * m + p] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let piv = (c..m)
                .max_by(|&i, &j| a[i * m + c].abs().partial_cmp(&a[j * m + c].abs()).unwrap())
                .unwrap();
            if a[piv * m + c].abs() < 1e-12 {
                return Err(Error::InvalidInput("singular simplex basis".into()));
            }
            if piv != c {
                for k in 0..m {
                    a.swap(piv * m + k, c * m + k);
                    inv.swap(piv * m + k, c * m + k);
                }
            }
            let d = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= d;
                inv[c * m + k] /= d;
            }
            for i in 0..m {
                if i != c {
                    let f = a[i * m + c];
                    if f != 0.0 {
                        for k in 0..m {
                            a[i * m + k] -= f * a[c * m + k];
                            inv[i * m + k] -= f * inv[c * m + k];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        self.since_refactor = 0;
        // x_B = -B^{-1} N x_N
        let mut rhs = vec![0.0; m];
        for j in 0..self.ns + m {
            if self.status[j] != Status::Basic && self.x[j] != 0.0 {
                self.column(j, &mut col);
                for &(r, v) in &col {
                    rhs[r] -= v * self.x[j];
                }
            }
        }
        for p in 0..m {
            let h = self.head[p];
            self.x[h] = (0..m).map(|r| self.binv[p * m + r] * rhs[r]).sum();
        }
        Ok(())
    }

    fn run(&mut self, phase_one: bool) -> Result<()> {
        let m = self.m;
        let nv = self.ns + m;
        let mut degenerate = 0usize;
        let mut col = Vec::new();
        let mut alpha = vec![0.0; m];
        let mut cb = vec![0.0; m];
        let mut y = vec![0.0; m];
        loop {
            if self.total_iterations >= self.max_iterations {
                return Err(Error::IterationLimit { last_bound: self.objective() });
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            // Basic costs for this phase.
            let mut any_infeasible = false;
            for (p, &h) in self.head.iter().enumerate() {
                cb[p] = if phase_one {
                    if self.x[h] < self.lo[h] - FEAS_TOL {
                        any_infeasible = true;
                        -1.0
                    } else if self.x[h] > self.up[h] + FEAS_TOL {
                        any_infeasible = true;
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    self.cost[h]
                };
            }
            if phase_one && !any_infeasible {
                return Ok(());
            }
            for r in 0..m {
                y[r] = (0..m).map(|p| cb[p] * self.binv[p * m + r]).sum();
            }
            // Pricing.
            let bland = degenerate >= DEGENERATE_SWITCH;
            let mut enter: Option<(usize, f64, f64)> = None; // (var, dir, |d|)
            for j in 0..nv {
                let st = self.status[j];
                if st == Status::Basic || self.lo[j] == self.up[j] {
                    continue;
                }
                let cj = if phase_one { 0.0 } else { self.cost[j] };
                let d = if j < self.ns {
                    cj - self.cols[j].iter().map(|&(r, v)| y[r] * v).sum::<f64>()
                } else {
                    cj + y[j - self.ns]
                };
                let dir = match st {
                    Status::Lower if d < -OPT_TOL => 1.0,
                    Status::Upper if d > OPT_TOL => -1.0,
                    Status::Zero if d.abs() > OPT_TOL => -d.signum(),
                    _ => continue,
                };
                if bland {
                    enter = Some((j, dir, d.abs()));
                    break;
                }
                if enter.is_none_or(|e| d.abs() > e.2) {
                    enter = Some((j, dir, d.abs()));
                }
            }
            let Some((q, dir, _)) = enter else {
                return Ok(());
            };
            // alpha = B^{-1} a_q
            self.column(q, &mut col);
            alpha.iter_mut().for_each(|a| *a = 0.0);
            for &(r, v) in &col {
                for p in 0..m {
                    alpha[p] += self.binv[p * m + r] * v;
                }
            }
            // Ratio test. Basic p changes at rate -dir * alpha[p].
            let flip = self.up[q] - self.lo[q];
            let mut best: Option<(usize, f64, f64, f64)> = None; // (position, bound, step, |rate|)
            for p in 0..m {
                let rate = -dir * alpha[p];
                if rate.abs() < PIVOT_TOL {
                    continue;
                }
                let h = self.head[p];
                let (xv, l, u) = (self.x[h], self.lo[h], self.up[h]);
                let target = if phase_one && xv < l - FEAS_TOL {
                    if rate > 0.0 {
                        Some(l)
                    } else {
                        None
                    }
                } else if phase_one && xv > u + FEAS_TOL {
                    if rate < 0.0 {
                        Some(u)
                    } else {
                        None
                    }
                } else if rate > 0.0 {
                    u.is_finite().then_some(u)
                } else {
                    l.is_finite().then_some(l)
                };
                let Some(b) = target else { continue };
                let t = ((b - xv) / rate).max(0.0);
                let take = match best {
                    None => t <= flip + 1e-12,
                    Some((bp, _, bt, br)) => {
                        t < bt - 1e-12
                            || (t <= bt + 1e-12
                                && if bland { h < self.head[bp] } else { rate.abs() > br })
                    }
                };
                if take {
                    best = Some((p, b, t, rate.abs()));
                }
            }
            let leave = best.map(|(p, b, _, _)| (p, b));
            let step = best.map_or(flip, |b| b.2);
            if !step.is_finite() {
                if phase_one {
                    return Err(Error::LpInfeasible);
                }
                return Err(Error::LpUnbounded);
            }
            self.total_iterations += 1;
            if step < 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            // Move.
            self.x[q] += dir * step;
            for p in 0..m {
                let h = self.head[p];
                self.x[h] -= dir * step * alpha[p];
            }
            match leave {
                None => {
                    // Bound flip of the entering variable.
                    let (st, v) = if dir > 0.0 { (Status::Upper, self.up[q]) } else { (Status::Lower, self.lo[q]) };
                    self.status[q] = st;
                    self.x[q] = v;
                }
                Some((p, b)) => {
                    let h = self.head[p];
                    self.x[h] = b;
                    self.status[h] = if b == self.lo[h] { Status::Lower } else { Status::Upper };
                    self.status[q] = Status::Basic;
                    self.head[p] = q;
                    self.pivot(p, &alpha);
                }
            }
        }
    }

    fn pivot(&mut self, p: usize, alpha: &[f64]) {
        let m = self.m;
        let piv = alpha[p];
        for c in 0..m {
            self.binv[p * m + c] /= piv;
        }
        let (before, rest) = self.binv.split_at_mut(p * m);
        let (prow, after) = rest.split_at_mut(m);
        for (i, row) in before.chunks_exact_mut(m).enumerate() {
            let f = alpha[i];
            if f != 0.0 {
                for c in 0..m {
                    row[c] -= f * prow[c];
                }
            }
        }
        for (k, row) in after.chunks_exact_mut(m).enumerate() {
            let f = alpha[p + 1 + k];
            if f != 0.0 {
                for c in 0..m {
                    row[c] -= f * prow[c];
                }
            }
        }
        self.since_refactor += 1;
    }
}

fn initial_position(cost: f64, l: f64, u: f64) -> (f64, Status) {
    match (l.is_finite(), u.is_finite()) {
        (true, true) => {
            if cost < 0.0 {
                (u, Status::Upper)
            } else {
                (l, Status::Lower)
            }
        }
        (true, false) => (l, Status::Lower),
        (false, true) => (u, Status::Upper),
        (false, false) => (0.0, Status::Zero),
    }
}

/// Minimizes `costs · x` subject to `equalities` (`a·x = b`), `inequalities`
/// (`a·x <= b`) and per-variable `bounds` (infinite bounds allowed).
pub fn lp_min(
    costs: &[f64],
    equalities: &[(Vec<(usize, f64)>, f64)],
    inequalities: &[(Vec<(usize, f64)>, f64)],
    bounds: &[(f64, f64)],
) -> Result<LpSolution> {
    let mut s = Simplex::new(costs.to_vec(), bounds.to_vec())?;
    for (a, b) in equalities {
        s.add_row(a, RowSense::Eq, *b)?;
    }
    for (a, b) in inequalities {
        s.add_row(a, RowSense::Le, *b)?;
    }
    s.solve()
}
