//! Assembly of the polar AC-OPF program.
//!
//! Variable layout (all per-unit): `[Va (all buses), Vm (all buses),
//! Pg (per gen), Qg (per gen)]`. The slack angle is pinned by an explicit
//! equality so the count is 2*n_bus balances + 1 pin.
//!
//! Inequalities are enumerated in a fixed global order:
//! Vm lower, Vm upper, Pg lower, Pg upper, Qg lower, Qg upper, then for
//! every in-service branch with a rating two rows of squared apparent
//! power (from end, to end). Reduced problems select a subset of these
//! global indices; equalities are never masked.

use opflab_grid::GridCase;

use crate::linalg::SymMat;
use crate::{Result, SolverError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IneqKind {
    VmLower(usize),
    VmUpper(usize),
    PgLower(usize),
    PgUpper(usize),
    QgLower(usize),
    QgUpper(usize),
    /// (branch index, measured at from end?)
    BranchFlow(usize, bool),
}

#[derive(Debug, Clone)]
pub struct IneqInfo {
    pub kind: IneqKind,
    /// Magnitude of the bound, for the relative binding rule.
    pub bound: f64,
}

/// Precomputed branch admittance terms.
#[derive(Debug, Clone, Copy)]
struct BranchAdm {
    from: usize,
    to: usize,
    g_s: f64,
    b_s: f64,
    b_half: f64,
}

impl BranchAdm {
    // Self admittance at either end (no taps, charging split evenly).
    fn own(&self) -> (f64, f64) {
        (self.g_s, self.b_s + self.b_half)
    }
    fn mutual(&self) -> (f64, f64) {
        (-self.g_s, -self.b_s)
    }
}

/// Sparse constraint row: (column, coefficient) pairs.
pub type SparseRow = Vec<(usize, f64)>;

pub struct OPFProblem {
    pub case: GridCase,
    pub n_bus: usize,
    pub n_gen: usize,
    /// Number of equalities: 2*n_bus + 1.
    pub n_eq: usize,
    /// Number of inequalities in the full enumeration.
    pub n_ineq: usize,
    pub ineq_info: Vec<IneqInfo>,
    /// Default subset selector for reduced problems; `None` keeps all.
    pub inequality_mask: Option<Vec<usize>>,
    slack: usize,
    /// Ybus as adjacency rows: ybus[i] = [(j, G_ij, B_ij), ...], the
    /// diagonal entry first.
    ybus: Vec<Vec<(usize, f64, f64)>>,
    branches: Vec<BranchAdm>,
    /// Generators per bus.
    gens_at: Vec<Vec<usize>>,
    /// Net load per bus.
    pd: Vec<f64>,
    qd: Vec<f64>,
    /// Case branch index per in-service branch entry.
    branch_case_index: Vec<usize>,
}

impl OPFProblem {
    pub fn n_vars(&self) -> usize {
        2 * self.n_bus + 2 * self.n_gen
    }

    #[inline]
    pub fn va_idx(&self, bus: usize) -> usize {
        bus
    }
    #[inline]
    pub fn vm_idx(&self, bus: usize) -> usize {
        self.n_bus + bus
    }
    #[inline]
    pub fn pg_idx(&self, gen: usize) -> usize {
        2 * self.n_bus + gen
    }
    #[inline]
    pub fn qg_idx(&self, gen: usize) -> usize {
        2 * self.n_bus + self.n_gen + gen
    }

    /// Conventional flat start, clipped into bounds with a small margin.
    pub fn flat_start(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.n_vars()];
        const MARGIN: f64 = 1e-3;
        let clip = |v: f64, lo: f64, hi: f64| {
            if lo + MARGIN >= hi - MARGIN {
                0.5 * (lo + hi)
            } else {
                v.clamp(lo + MARGIN, hi - MARGIN)
            }
        };
        for (b, bus) in self.case.buses.iter().enumerate() {
            y[self.vm_idx(b)] = clip(1.0, bus.vm_min, bus.vm_max);
        }
        for (g, gen) in self.case.gens.iter().enumerate() {
            y[self.pg_idx(g)] = 0.5 * (gen.p_min + gen.p_max);
            y[self.qg_idx(g)] = clip(0.0, gen.q_min, gen.q_max);
        }
        y
    }

    /// Clip a candidate start into variable bounds with margin 1e-3,
    /// returning the number of clipped entries.
    pub fn clip_into_bounds(&self, y: &mut [f64]) -> usize {
        const MARGIN: f64 = 1e-3;
        let mut clipped = 0;
        let mut apply = |v: &mut f64, lo: f64, hi: f64| {
            let (lo, hi) = if lo + MARGIN >= hi - MARGIN {
                (lo, hi)
            } else {
                (lo + MARGIN, hi - MARGIN)
            };
            if *v < lo || *v > hi {
                *v = v.clamp(lo, hi);
                clipped += 1;
            }
        };
        for (b, bus) in self.case.buses.iter().enumerate() {
            apply(&mut y[self.n_bus + b], bus.vm_min, bus.vm_max);
        }
        for (g, gen) in self.case.gens.iter().enumerate() {
            apply(&mut y[2 * self.n_bus + g], gen.p_min, gen.p_max);
            apply(&mut y[2 * self.n_bus + self.n_gen + g], gen.q_min, gen.q_max);
        }
        clipped
    }

    pub fn objective(&self, y: &[f64]) -> f64 {
        self.case
            .gens
            .iter()
            .enumerate()
            .map(|(g, gen)| gen.cost.eval(y[self.pg_idx(g)]))
            .sum()
    }

    pub fn objective_gradient(&self, y: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; self.n_vars()];
        for (g, gen) in self.case.gens.iter().enumerate() {
            grad[self.pg_idx(g)] = gen.cost.grad(y[self.pg_idx(g)]);
        }
        grad
    }

    /// Net complex power injection P_i + jQ_i of the network at bus i.
    fn bus_injection(&self, y: &[f64], bus: usize) -> (f64, f64) {
        let vm_i = y[self.vm_idx(bus)];
        let va_i = y[self.va_idx(bus)];
        let mut p = 0.0;
        let mut q = 0.0;
        for &(j, g, b) in &self.ybus[bus] {
            let vm_j = y[self.vm_idx(j)];
            let theta = va_i - y[self.va_idx(j)];
            let (sin, cos) = theta.sin_cos();
            p += vm_i * vm_j * (g * cos + b * sin);
            q += vm_i * vm_j * (g * sin - b * cos);
        }
        (p, q)
    }

    /// Equality residuals: P balances, Q balances, slack angle pin.
    pub fn eq_constraints(&self, y: &[f64]) -> Vec<f64> {
        let mut c = vec![0.0; self.n_eq];
        for i in 0..self.n_bus {
            let (p, q) = self.bus_injection(y, i);
            let mut pg = 0.0;
            let mut qg = 0.0;
            for &g in &self.gens_at[i] {
                pg += y[self.pg_idx(g)];
                qg += y[self.qg_idx(g)];
            }
            c[i] = p - pg + self.pd[i];
            c[self.n_bus + i] = q - qg + self.qd[i];
        }
        c[2 * self.n_bus] = y[self.va_idx(self.slack)];
        c
    }

    /// Sparse Jacobian of the equalities (one row per constraint).
    pub fn eq_jacobian(&self, y: &[f64]) -> Vec<SparseRow> {
        let mut rows = Vec::with_capacity(self.n_eq);
        // Active balances.
        for i in 0..self.n_bus {
            rows.push(self.balance_row(y, i, true));
        }
        for i in 0..self.n_bus {
            rows.push(self.balance_row(y, i, false));
        }
        rows.push(vec![(self.va_idx(self.slack), 1.0)]);
        rows
    }

    fn balance_row(&self, y: &[f64], i: usize, active: bool) -> SparseRow {
        let vm_i = y[self.vm_idx(i)];
        let va_i = y[self.va_idx(i)];
        let mut d_va_i = 0.0;
        let mut d_vm_i = 0.0;
        let mut row: SparseRow = Vec::with_capacity(2 * self.ybus[i].len() + self.gens_at[i].len());
        for &(j, g, b) in &self.ybus[i] {
            let vm_j = y[self.vm_idx(j)];
            let theta = va_i - y[self.va_idx(j)];
            let (sin, cos) = theta.sin_cos();
            let a_ij = g * cos + b * sin;
            let b_ij = g * sin - b * cos;
            if active {
                // P_i = Vm_i sum_j Vm_j a_ij
                if j == i {
                    d_vm_i += 2.0 * vm_i * a_ij;
                } else {
                    d_va_i += -vm_i * vm_j * b_ij;
                    d_vm_i += vm_j * a_ij;
                    row.push((self.va_idx(j), vm_i * vm_j * b_ij));
                    row.push((self.vm_idx(j), vm_i * a_ij));
                }
            } else {
                // Q_i = Vm_i sum_j Vm_j b_ij
                if j == i {
                    d_vm_i += 2.0 * vm_i * b_ij;
                } else {
                    d_va_i += vm_i * vm_j * a_ij;
                    d_vm_i += vm_j * b_ij;
                    row.push((self.va_idx(j), -vm_i * vm_j * a_ij));
                    row.push((self.vm_idx(j), vm_i * b_ij));
                }
            }
        }
        row.push((self.va_idx(i), d_va_i));
        row.push((self.vm_idx(i), d_vm_i));
        for &g in &self.gens_at[i] {
            row.push((if active { self.pg_idx(g) } else { self.qg_idx(g) }, -1.0));
        }
        row.sort_unstable_by_key(|&(c, _)| c);
        row
    }

    /// Branch end flows (P, Q) measured at the chosen end.
    fn branch_flow(&self, y: &[f64], br: &BranchAdm, from_end: bool) -> (f64, f64) {
        let (i, j) = if from_end { (br.from, br.to) } else { (br.to, br.from) };
        let (g_own, b_own) = br.own();
        let (g_mut, b_mut) = br.mutual();
        let vm_i = y[self.vm_idx(i)];
        let vm_j = y[self.vm_idx(j)];
        let theta = y[self.va_idx(i)] - y[self.va_idx(j)];
        let (sin, cos) = theta.sin_cos();
        let a = g_mut * cos + b_mut * sin;
        let b = g_mut * sin - b_mut * cos;
        let p = vm_i * vm_i * g_own + vm_i * vm_j * a;
        let q = -vm_i * vm_i * b_own + vm_i * vm_j * b;
        (p, q)
    }

    /// Gradients of (P, Q) at a branch end over [va_i, va_j, vm_i, vm_j].
    fn branch_flow_grads(
        &self,
        y: &[f64],
        br: &BranchAdm,
        from_end: bool,
    ) -> ([usize; 4], [f64; 4], [f64; 4], (f64, f64)) {
        let (i, j) = if from_end { (br.from, br.to) } else { (br.to, br.from) };
        let (g_own, b_own) = br.own();
        let (g_mut, b_mut) = br.mutual();
        let vm_i = y[self.vm_idx(i)];
        let vm_j = y[self.vm_idx(j)];
        let theta = y[self.va_idx(i)] - y[self.va_idx(j)];
        let (sin, cos) = theta.sin_cos();
        let a = g_mut * cos + b_mut * sin;
        let b = g_mut * sin - b_mut * cos;
        let p = vm_i * vm_i * g_own + vm_i * vm_j * a;
        let q = -vm_i * vm_i * b_own + vm_i * vm_j * b;

        let cols = [self.va_idx(i), self.va_idx(j), self.vm_idx(i), self.vm_idx(j)];
        let dp = [
            -vm_i * vm_j * b,
            vm_i * vm_j * b,
            2.0 * vm_i * g_own + vm_j * a,
            vm_i * a,
        ];
        let dq = [
            vm_i * vm_j * a,
            -vm_i * vm_j * a,
            -2.0 * vm_i * b_own + vm_j * b,
            vm_i * b,
        ];
        (cols, dp, dq, (p, q))
    }

    /// Value of inequality `idx` (>= 0 when satisfied).
    pub fn ineq_value(&self, y: &[f64], idx: usize) -> f64 {
        match self.ineq_info[idx].kind {
            IneqKind::VmLower(b) => y[self.vm_idx(b)] - self.case.buses[b].vm_min,
            IneqKind::VmUpper(b) => self.case.buses[b].vm_max - y[self.vm_idx(b)],
            IneqKind::PgLower(g) => y[self.pg_idx(g)] - self.case.gens[g].p_min,
            IneqKind::PgUpper(g) => self.case.gens[g].p_max - y[self.pg_idx(g)],
            IneqKind::QgLower(g) => y[self.qg_idx(g)] - self.case.gens[g].q_min,
            IneqKind::QgUpper(g) => self.case.gens[g].q_max - y[self.qg_idx(g)],
            IneqKind::BranchFlow(k, from_end) => {
                let br = &self.branches[k];
                let rate = self.flow_rate(k);
                let (p, q) = self.branch_flow(y, br, from_end);
                rate * rate - p * p - q * q
            }
        }
    }

    fn flow_rate(&self, k: usize) -> f64 {
        // Flow rows are only generated for rated branches.
        self.case.branches[self.branch_case_index[k]]
            .rate_a
            .expect("rated branch")
    }

    /// Values of all (or a masked subset of) inequalities.
    pub fn ineq_values(&self, y: &[f64], mask: Option<&[usize]>) -> Vec<f64> {
        match mask {
            None => (0..self.n_ineq).map(|j| self.ineq_value(y, j)).collect(),
            Some(idx) => idx.iter().map(|&j| self.ineq_value(y, j)).collect(),
        }
    }

    /// Sparse Jacobian row of inequality `idx`.
    pub fn ineq_jacobian_row(&self, y: &[f64], idx: usize) -> SparseRow {
        match self.ineq_info[idx].kind {
            IneqKind::VmLower(b) => vec![(self.vm_idx(b), 1.0)],
            IneqKind::VmUpper(b) => vec![(self.vm_idx(b), -1.0)],
            IneqKind::PgLower(g) => vec![(self.pg_idx(g), 1.0)],
            IneqKind::PgUpper(g) => vec![(self.pg_idx(g), -1.0)],
            IneqKind::QgLower(g) => vec![(self.qg_idx(g), 1.0)],
            IneqKind::QgUpper(g) => vec![(self.qg_idx(g), -1.0)],
            IneqKind::BranchFlow(k, from_end) => {
                let (cols, dp, dq, (p, q)) = self.branch_flow_grads(y, &self.branches[k], from_end);
                let mut row: SparseRow = cols
                    .iter()
                    .zip(dp.iter().zip(dq.iter()))
                    .map(|(&c, (&dpk, &dqk))| (c, -2.0 * p * dpk - 2.0 * q * dqk))
                    .collect();
                row.sort_unstable_by_key(|&(c, _)| c);
                row
            }
        }
    }

    /// Hessian of the Lagrangian f - lambda' c_E - mu' c_I at `y`.
    /// `mu` is indexed like `mask` (full order when `mask` is `None`).
    pub fn lagrangian_hessian(
        &self,
        y: &[f64],
        lambda: &[f64],
        mu: &[f64],
        mask: Option<&[usize]>,
    ) -> SymMat {
        let n = self.n_vars();
        let mut h = SymMat::zeros(n);

        // Objective block: 2 c2 on the Pg diagonal.
        for (g, gen) in self.case.gens.iter().enumerate() {
            let k = self.pg_idx(g);
            h.data[k * n + k] += 2.0 * gen.cost.c2;
        }

        // Power balance blocks, weighted by -lambda.
        for i in 0..self.n_bus {
            let wp = -lambda[i];
            let wq = -lambda[self.n_bus + i];
            if wp == 0.0 && wq == 0.0 {
                continue;
            }
            self.accumulate_injection_hessian(y, i, wp, wq, &mut h);
        }

        // Branch flow rows, weighted by -mu.
        let apply = |h: &mut SymMat, idx: usize, w: f64| {
            if w == 0.0 {
                return;
            }
            if let IneqKind::BranchFlow(k, from_end) = self.ineq_info[idx].kind {
                self.accumulate_flow_hessian(y, k, from_end, w, h);
            }
        };
        match mask {
            None => {
                for (idx, &m) in mu.iter().enumerate() {
                    apply(&mut h, idx, -m);
                }
            }
            Some(kept) => {
                for (&idx, &m) in kept.iter().zip(mu) {
                    apply(&mut h, idx, -m);
                }
            }
        }
        h
    }

    /// w_p * H(P_i) + w_q * H(Q_i) accumulated into `h`.
    fn accumulate_injection_hessian(&self, y: &[f64], i: usize, wp: f64, wq: f64, h: &mut SymMat) {
        let vm_i = y[self.vm_idx(i)];
        let va_i = y[self.va_idx(i)];
        let (vai, vmi) = (self.va_idx(i), self.vm_idx(i));
        for &(j, g, b) in &self.ybus[i] {
            if j == i {
                // Vm_i^2 * (G_ii, -B_ii): constant curvature in Vm_i.
                h.add(vmi, vmi, wp * 2.0 * g + wq * (-2.0 * b));
                continue;
            }
            let vm_j = y[self.vm_idx(j)];
            let theta = va_i - y[self.va_idx(j)];
            let (sin, cos) = theta.sin_cos();
            let a_ij = g * cos + b * sin;
            let b_ij = g * sin - b * cos;
            let (vaj, vmj) = (self.va_idx(j), self.vm_idx(j));
            let big_a = vm_i * vm_j * a_ij;
            let big_b = vm_i * vm_j * b_ij;

            // t = Vm_i Vm_j a_ij enters P_i; u = Vm_i Vm_j b_ij enters Q_i.
            h.add(vai, vai, wp * (-big_a) + wq * (-big_b));
            h.add(vaj, vaj, wp * (-big_a) + wq * (-big_b));
            h.add(vai, vaj, wp * big_a + wq * big_b);
            h.add(vai, vmi, wp * (-vm_j * b_ij) + wq * (vm_j * a_ij));
            h.add(vai, vmj, wp * (-vm_i * b_ij) + wq * (vm_i * a_ij));
            h.add(vaj, vmi, wp * (vm_j * b_ij) + wq * (-vm_j * a_ij));
            h.add(vaj, vmj, wp * (vm_i * b_ij) + wq * (-vm_i * a_ij));
            h.add(vmi, vmj, wp * a_ij + wq * b_ij);
        }
    }

    /// w * H(rate^2 - P^2 - Q^2) for one branch end accumulated into `h`.
    fn accumulate_flow_hessian(&self, y: &[f64], k: usize, from_end: bool, w: f64, h: &mut SymMat) {
        let br = &self.branches[k];
        let (i, j) = if from_end { (br.from, br.to) } else { (br.to, br.from) };
        let (cols, dp, dq, (p, q)) = self.branch_flow_grads(y, br, from_end);

        // Outer-product part: -2 (dP dP' + dQ dQ').
        for r in 0..4 {
            for c in r..4 {
                let v = -2.0 * (dp[r] * dp[c] + dq[r] * dq[c]);
                if cols[r] <= cols[c] {
                    h.add(cols[r], cols[c], w * v);
                } else {
                    h.add(cols[c], cols[r], w * v);
                }
            }
        }

        // Curvature part: -2 (P H(P) + Q H(Q)).
        let (g_own, b_own) = br.own();
        let (g_mut, b_mut) = br.mutual();
        let vm_i = y[self.vm_idx(i)];
        let vm_j = y[self.vm_idx(j)];
        let theta = y[self.va_idx(i)] - y[self.va_idx(j)];
        let (sin, cos) = theta.sin_cos();
        let a = g_mut * cos + b_mut * sin;
        let b = g_mut * sin - b_mut * cos;
        let big_a = vm_i * vm_j * a;
        let big_b = vm_i * vm_j * b;
        let (vai, vaj, vmi, vmj) = (cols[0], cols[1], cols[2], cols[3]);
        let wp = -2.0 * w * p;
        let wq = -2.0 * w * q;

        h.add(vai, vai, wp * (-big_a) + wq * (-big_b));
        h.add(vaj, vaj, wp * (-big_a) + wq * (-big_b));
        h.add(vai, vaj, wp * big_a + wq * big_b);
        h.add(vai, vmi, wp * (-vm_j * b) + wq * (vm_j * a));
        h.add(vai, vmj, wp * (-vm_i * b) + wq * (vm_i * a));
        h.add(vaj, vmi, wp * (vm_j * b) + wq * (-vm_j * a));
        h.add(vaj, vmj, wp * (vm_i * b) + wq * (-vm_i * a));
        h.add(vmi, vmj, wp * a + wq * b);
        h.add(vmi, vmi, wp * 2.0 * g_own + wq * (-2.0 * b_own));
    }

    /// Deterministic per-inequality bound magnitude for the binding rule.
    pub fn ineq_bound(&self, idx: usize) -> f64 {
        self.ineq_info[idx].bound
    }
}

pub fn assemble(case: &GridCase) -> Result<OPFProblem> {
    if case.n_gens() == 0 {
        return Err(SolverError::NoGenerators);
    }
    if !case.is_connected() {
        return Err(SolverError::Disconnected);
    }
    let n_bus = case.n_buses();
    let n_gen = case.n_gens();

    // Ybus rows with the diagonal entry first.
    let mut diag_g = vec![0.0; n_bus];
    let mut diag_b = vec![0.0; n_bus];
    for (b, bus) in case.buses.iter().enumerate() {
        diag_g[b] = bus.gs;
        diag_b[b] = bus.bs;
    }
    let mut off: Vec<std::collections::BTreeMap<usize, (f64, f64)>> =
        vec![Default::default(); n_bus];
    let mut branches = Vec::new();
    let mut flow_rows = Vec::new();
    let mut branch_case_index = Vec::new();
    for (bi, br) in case.branches.iter().enumerate() {
        if !br.status {
            continue;
        }
        let denom = br.r * br.r + br.x * br.x;
        let g_s = br.r / denom;
        let b_s = -br.x / denom;
        let adm = BranchAdm { from: br.from, to: br.to, g_s, b_s, b_half: br.b / 2.0 };
        diag_g[br.from] += g_s;
        diag_b[br.from] += b_s + adm.b_half;
        diag_g[br.to] += g_s;
        diag_b[br.to] += b_s + adm.b_half;
        let e = off[br.from].entry(br.to).or_insert((0.0, 0.0));
        e.0 -= g_s;
        e.1 -= b_s;
        let e = off[br.to].entry(br.from).or_insert((0.0, 0.0));
        e.0 -= g_s;
        e.1 -= b_s;
        if br.rate_a.is_some() {
            flow_rows.push((branches.len(), true));
            flow_rows.push((branches.len(), false));
        }
        branch_case_index.push(bi);
        branches.push(adm);
    }
    let ybus: Vec<Vec<(usize, f64, f64)>> = (0..n_bus)
        .map(|i| {
            let mut row = vec![(i, diag_g[i], diag_b[i])];
            row.extend(off[i].iter().map(|(&j, &(g, b))| (j, g, b)));
            row
        })
        .collect();

    let mut gens_at = vec![Vec::new(); n_bus];
    for (g, gen) in case.gens.iter().enumerate() {
        gens_at[gen.bus].push(g);
    }
    let mut pd = vec![0.0; n_bus];
    let mut qd = vec![0.0; n_bus];
    for l in &case.loads {
        pd[l.bus] += l.pd;
        qd[l.bus] += l.qd;
    }

    // Fixed global inequality order.
    let mut ineq_info = Vec::new();
    for (b, bus) in case.buses.iter().enumerate() {
        ineq_info.push(IneqInfo { kind: IneqKind::VmLower(b), bound: bus.vm_min.abs() });
    }
    for (b, bus) in case.buses.iter().enumerate() {
        ineq_info.push(IneqInfo { kind: IneqKind::VmUpper(b), bound: bus.vm_max.abs() });
    }
    for (g, gen) in case.gens.iter().enumerate() {
        ineq_info.push(IneqInfo { kind: IneqKind::PgLower(g), bound: gen.p_min.abs() });
    }
    for (g, gen) in case.gens.iter().enumerate() {
        ineq_info.push(IneqInfo { kind: IneqKind::PgUpper(g), bound: gen.p_max.abs() });
    }
    for (g, gen) in case.gens.iter().enumerate() {
        ineq_info.push(IneqInfo { kind: IneqKind::QgLower(g), bound: gen.q_min.abs() });
    }
    for (g, gen) in case.gens.iter().enumerate() {
        ineq_info.push(IneqInfo { kind: IneqKind::QgUpper(g), bound: gen.q_max.abs() });
    }
    for &(k, from_end) in &flow_rows {
        let orig = branch_case_index[k];
        let rate = case.branches[orig].rate_a.expect("rated branch");
        ineq_info.push(IneqInfo {
            kind: IneqKind::BranchFlow(k, from_end),
            bound: rate * rate,
        });
    }

    let slack = case.slack();
    Ok(OPFProblem {
        case: case.clone(),
        n_bus,
        n_gen,
        n_eq: 2 * n_bus + 1,
        n_ineq: ineq_info.len(),
        ineq_info,
        inequality_mask: None,
        slack,
        ybus,
        branches,
        gens_at,
        pd,
        qd,
        branch_case_index,
    })
}
