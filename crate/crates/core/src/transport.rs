//! Exact discrete optimal transport.
//!
//! [`solve_transport`] is a transportation simplex on the bipartite tree
//! basis: north-west corner start on masses perturbed by `ε` (which keeps
//! every basis nondegenerate), entering cell by Bland's rule or block search,
//! leaving cell by the ratio test with Bland tie-breaking. The final basis is
//! re-solved on the unperturbed masses, and its potentials `(u, v)` certify
//! optimality through complementary slackness.

use std::collections::VecDeque;
use std::io::{Read, Write};

use serde::Serialize;

use crate::gaussian::WeightedConfiguration;
use crate::io::format_number;
use crate::{Error, RMatrix, Result};

/// Tolerance on the difference between the two total masses.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// First improving cell in row-major order.
    Bland,
    /// Most improving cell within the first block (of about √(MN) cells)
    /// that contains an improving cell, scanning cyclically.
    BlockSearch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportOptions {
    pub pivot: PivotRule,
    /// Mass perturbation, scaled by the total mass.
    pub perturbation: f64,
    pub max_pivots: Option<usize>,
}

impl Default for TransportOptions {
    fn default() -> Self {
        Self {
            pivot: PivotRule::Bland,
            perturbation: 1e-13,
            max_pivots: None,
        }
    }
}

/// Optimal plan `p_ij` with its value and dual potentials.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalCoupling {
    pub plan: RMatrix,
    pub cost: f64,
    pub row_potentials: Vec<f64>,
    pub col_potentials: Vec<f64>,
    pub pivots: usize,
}

impl ClassicalCoupling {
    /// `Σ m_i u_i + Σ n_j v_j`.
    pub fn dual_value(&self, m: &[f64], n: &[f64]) -> f64 {
        let a: f64 = m.iter().zip(&self.row_potentials).map(|(x, u)| x * u).sum();
        let b: f64 = n.iter().zip(&self.col_potentials).map(|(x, v)| x * v).sum();
        a + b
    }

    /// `min_ij (c_ij − u_i − v_j)`; nonnegative up to rounding at optimality.
    pub fn min_reduced_cost(&self, cost: &RMatrix) -> f64 {
        let mut worst = f64::INFINITY;
        for i in 0..cost.nrows() {
            for j in 0..cost.ncols() {
                worst = worst.min(cost[(i, j)] - self.row_potentials[i] - self.col_potentials[j]);
            }
        }
        worst
    }

    /// Largest deviation of the plan's row and column sums from `m`, `n`.
    pub fn marginal_defect(&self, m: &[f64], n: &[f64]) -> f64 {
        let rows = (0..self.plan.nrows()).map(|i| (self.plan.row(i).sum() - m[i]).abs());
        let cols = (0..self.plan.ncols()).map(|j| (self.plan.column(j).sum() - n[j]).abs());
        rows.chain(cols).fold(0.0, f64::max)
    }
}

pub fn solve_transport(m: &[f64], n: &[f64], cost: &RMatrix) -> Result<ClassicalCoupling> {
    solve_transport_with(m, n, cost, &TransportOptions::default())
}

pub fn solve_transport_with(
    m: &[f64],
    n: &[f64],
    cost: &RMatrix,
    opts: &TransportOptions,
) -> Result<ClassicalCoupling> {
    validate_masses(m, n)?;
    if cost.nrows() != m.len() || cost.ncols() != n.len() {
        return Err(Error::DimensionMismatch(format!(
            "cost is {}x{} for masses of length {} and {}",
            cost.nrows(),
            cost.ncols(),
            m.len(),
            n.len()
        )));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("cost entry"));
    }

    let mut simplex = Simplex::north_west(m, n, cost, opts.perturbation);
    let limit = opts.max_pivots.unwrap_or(50 * m.len() * n.len() + 10_000);
    let scale = cost.iter().fold(1.0_f64, |acc, c| acc.max(c.abs()));
    let tol = 1e-12 * scale;
    let mut pivots = 0;
    let mut cursor = 0;
    loop {
        simplex.update_potentials();
        let entering = match opts.pivot {
            PivotRule::Bland => simplex.bland_entering(tol),
            PivotRule::BlockSearch => simplex.block_entering(tol, &mut cursor),
        };
        let Some((i, j)) = entering else { break };
        simplex.pivot(i, j);
        pivots += 1;
        if pivots > limit {
            return Err(Error::NumericalBreakdown(format!(
                "transportation simplex exceeded {limit} pivots"
            )));
        }
    }
    simplex.update_potentials();
    let plan = simplex.unperturbed_plan(m, n);
    let value = plan.iter().zip(cost.iter()).map(|(p, c)| p * c).sum();
    log::trace!(
        "transport {}x{} solved in {pivots} pivots",
        m.len(),
        n.len()
    );
    Ok(ClassicalCoupling {
        plan,
        cost: value,
        row_potentials: simplex.u,
        col_potentials: simplex.v,
        pivots,
    })
}

fn validate_masses(m: &[f64], n: &[f64]) -> Result<()> {
    if m.is_empty() || n.is_empty() {
        return Err(Error::InvalidConfiguration("empty marginal".into()));
    }
    if m.iter().chain(n).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("mass"));
    }
    if m.iter().chain(n).any(|&x| x < 0.0) {
        return Err(Error::InvalidConfiguration("negative mass".into()));
    }
    let (sm, sn): (f64, f64) = (m.iter().sum(), n.iter().sum());
    if (sm - sn).abs() > MASS_TOLERANCE {
        return Err(Error::InfeasibleMasses(sm, sn));
    }
    Ok(())
}

const NOT_BASIC: usize = usize::MAX;

struct Simplex<'a> {
    rows: usize,
    cols: usize,
    cost: &'a RMatrix,
    cells: Vec<(usize, usize)>,
    flow: Vec<f64>,
    slot: Vec<usize>,
    row_adj: Vec<Vec<usize>>,
    col_adj: Vec<Vec<usize>>,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl<'a> Simplex<'a> {
    fn north_west(m: &[f64], n: &[f64], cost: &'a RMatrix, perturbation: f64) -> Self {
        let (rows, cols) = (m.len(), n.len());
        let total: f64 = m.iter().sum::<f64>().max(f64::MIN_POSITIVE);
        let eps = perturbation * total;
        let mut supply: Vec<f64> = m.iter().map(|x| x + eps).collect();
        let mut demand = n.to_vec();
        demand[cols - 1] += eps * rows as f64;

        let mut s = Self {
            rows,
            cols,
            cost,
            cells: Vec::with_capacity(rows + cols - 1),
            flow: Vec::with_capacity(rows + cols - 1),
            slot: vec![NOT_BASIC; rows * cols],
            row_adj: vec![Vec::new(); rows],
            col_adj: vec![Vec::new(); cols],
            u: vec![0.0; rows],
            v: vec![0.0; cols],
        };
        let (mut i, mut j) = (0, 0);
        loop {
            let f = supply[i].min(demand[j]);
            s.add_cell(i, j, f);
            supply[i] -= f;
            demand[j] -= f;
            if i == rows - 1 && j == cols - 1 {
                break;
            }
            let row_done = supply[i] <= demand[j];
            if (row_done && i < rows - 1) || j == cols - 1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        s
    }

    fn add_cell(&mut self, i: usize, j: usize, f: f64) {
        let k = self.cells.len();
        self.cells.push((i, j));
        self.flow.push(f);
        self.slot[i * self.cols + j] = k;
        self.row_adj[i].push(k);
        self.col_adj[j].push(k);
    }

    fn update_potentials(&mut self) {
        let mut row_seen = vec![false; self.rows];
        let mut col_seen = vec![false; self.cols];
        let mut stack = vec![(true, 0usize)];
        row_seen[0] = true;
        self.u[0] = 0.0;
        while let Some((is_row, node)) = stack.pop() {
            if is_row {
                for &k in &self.row_adj[node] {
                    let j = self.cells[k].1;
                    if !col_seen[j] {
                        col_seen[j] = true;
                        self.v[j] = self.cost[(node, j)] - self.u[node];
                        stack.push((false, j));
                    }
                }
            } else {
                for &k in &self.col_adj[node] {
                    let i = self.cells[k].0;
                    if !row_seen[i] {
                        row_seen[i] = true;
                        self.u[i] = self.cost[(i, node)] - self.v[node];
                        stack.push((true, i));
                    }
                }
            }
        }
    }

    fn reduced(&self, i: usize, j: usize) -> f64 {
        self.cost[(i, j)] - self.u[i] - self.v[j]
    }

    fn bland_entering(&self, tol: f64) -> Option<(usize, usize)> {
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.slot[i * self.cols + j] == NOT_BASIC && self.reduced(i, j) < -tol {
                    return Some((i, j));
                }
            }
        }
        None
    }

    fn block_entering(&self, tol: f64, cursor: &mut usize) -> Option<(usize, usize)> {
        let total = self.rows * self.cols;
        let block = ((total as f64).sqrt() as usize).max(64).min(total);
        let mut best: Option<(usize, f64)> = None;
        for step in 0..total {
            let idx = (*cursor + step) % total;
            if self.slot[idx] == NOT_BASIC {
                let r = self.reduced(idx / self.cols, idx % self.cols);
                if r < -tol && best.is_none_or(|(_, b)| r < b) {
                    best = Some((idx, r));
                }
            }
            if (step + 1) % block == 0 {
                if let Some((idx, _)) = best {
                    *cursor = (*cursor + step + 1) % total;
                    return Some((idx / self.cols, idx % self.cols));
                }
            }
        }
        best.map(|(idx, _)| (idx / self.cols, idx % self.cols))
    }

    /// Cells on the tree path from row `i` to column `j`, starting next to row `i`.
    fn tree_path(&self, i: usize, j: usize) -> Vec<usize> {
        let nodes = self.rows + self.cols;
        let mut parent_cell = vec![NOT_BASIC; nodes];
        let mut seen = vec![false; nodes];
        let mut queue = VecDeque::from([i]);
        seen[i] = true;
        let target = self.rows + j;
        while let Some(node) = queue.pop_front() {
            if node == target {
                break;
            }
            let adj = if node < self.rows {
                &self.row_adj[node]
            } else {
                &self.col_adj[node - self.rows]
            };
            for &k in adj {
                let (r, c) = self.cells[k];
                let next = if node < self.rows { self.rows + c } else { r };
                if !seen[next] {
                    seen[next] = true;
                    parent_cell[next] = k;
                    queue.push_back(next);
                }
            }
        }
        let mut path = Vec::new();
        let mut node = target;
        while node != i {
            let k = parent_cell[node];
            path.push(k);
            let (r, c) = self.cells[k];
            node = if node < self.rows { self.rows + c } else { r };
        }
        path.reverse();
        path
    }

    fn pivot(&mut self, i: usize, j: usize) {
        let path = self.tree_path(i, j);
        // odd positions (0, 2, ...) along the path lose flow
        let theta = path
            .iter()
            .step_by(2)
            .map(|&k| self.flow[k])
            .fold(f64::INFINITY, f64::min);
        let leaving = path
            .iter()
            .step_by(2)
            .copied()
            .filter(|&k| self.flow[k] - theta <= 1e-15 * theta.abs().max(1e-300))
            .min_by_key(|&k| {
                let (r, c) = self.cells[k];
                r * self.cols + c
            })
            .expect("cycle has a decreasing cell");
        for (pos, &k) in path.iter().enumerate() {
            if pos % 2 == 0 {
                self.flow[k] -= theta;
            } else {
                self.flow[k] += theta;
            }
        }
        let (lr, lc) = self.cells[leaving];
        self.slot[lr * self.cols + lc] = NOT_BASIC;
        self.row_adj[lr].retain(|&k| k != leaving);
        self.col_adj[lc].retain(|&k| k != leaving);
        self.cells[leaving] = (i, j);
        self.flow[leaving] = theta;
        self.slot[i * self.cols + j] = leaving;
        self.row_adj[i].push(leaving);
        self.col_adj[j].push(leaving);
    }

    /// Flows of the current basis for the original masses, by leaf elimination.
    fn unperturbed_plan(&self, m: &[f64], n: &[f64]) -> RMatrix {
        let (rows, cols) = (self.rows, self.cols);
        let mut rem: Vec<f64> = m.iter().chain(n).copied().collect();
        let mut degree: Vec<usize> = self
            .row_adj
            .iter()
            .chain(&self.col_adj)
            .map(Vec::len)
            .collect();
        let mut used = vec![false; self.cells.len()];
        let mut plan = RMatrix::zeros(rows, cols);
        let mut leaves: Vec<usize> = (0..rows + cols).filter(|&x| degree[x] == 1).collect();
        while let Some(node) = leaves.pop() {
            if degree[node] != 1 {
                continue;
            }
            let adj = if node < rows {
                &self.row_adj[node]
            } else {
                &self.col_adj[node - rows]
            };
            let Some(&k) = adj.iter().find(|&&k| !used[k]) else {
                continue;
            };
            used[k] = true;
            let (r, c) = self.cells[k];
            let other = if node < rows { rows + c } else { r };
            let f = rem[node];
            plan[(r, c)] = f.max(0.0);
            rem[node] = 0.0;
            rem[other] -= f;
            degree[node] -= 1;
            degree[other] -= 1;
            if degree[other] == 1 {
                leaves.push(other);
            }
        }
        plan
    }
}

/// Squared phase-space distances `|x_i − y_j|²`.
pub fn squared_distance_cost(x: &WeightedConfiguration, y: &WeightedConfiguration) -> RMatrix {
    RMatrix::from_fn(x.len(), y.len(), |i, j| {
        x.points()[i].distance_squared(&y.points()[j])
    })
}

/// Exact `W₂²` between two weighted point sets in phase space.
pub fn w2_squared(
    mu: &WeightedConfiguration,
    nu: &WeightedConfiguration,
) -> Result<ClassicalCoupling> {
    solve_transport(mu.weights(), nu.weights(), &squared_distance_cost(mu, nu))
}

/// `W₂²` between zero-momentum point sets via the monotone (quantile) coupling.
pub fn w2_squared_1d(mu: &WeightedConfiguration, nu: &WeightedConfiguration) -> Result<f64> {
    if !mu.has_zero_momenta() || !nu.has_zero_momenta() {
        return Err(Error::NonzeroMomentum);
    }
    let sorted = |c: &WeightedConfiguration| {
        let mut v: Vec<(f64, f64)> = c
            .points()
            .iter()
            .zip(c.weights())
            .map(|(z, &w)| (z.q(), w))
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    };
    let xs = sorted(mu);
    let ys = sorted(nu);
    let (mut i, mut j) = (0, 0);
    let (mut left_x, mut left_y) = (xs[0].1, ys[0].1);
    let mut total = 0.0;
    while i < xs.len() && j < ys.len() {
        let f = left_x.min(left_y);
        total += f * (xs[i].0 - ys[j].0).powi(2);
        left_x -= f;
        left_y -= f;
        if left_x <= left_y {
            i += 1;
            if i < xs.len() {
                left_x = xs[i].1;
            }
        } else {
            j += 1;
            if j < ys.len() {
                left_y = ys[j].1;
            }
        }
    }
    Ok(total)
}

/// Uniform rectangular lattice of phase-space nodes, `q` index outer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseGrid {
    pub q_min: f64,
    pub p_min: f64,
    pub step_q: f64,
    pub step_p: f64,
    pub nq: usize,
    pub np: usize,
}

impl PhaseGrid {
    /// Square grid `[−w, w]²` with the given step.
    pub fn square(half_width: f64, step: f64) -> Result<Self> {
        Self::centered(0.0, 0.0, half_width, step)
    }

    pub fn centered(q0: f64, p0: f64, half_width: f64, step: f64) -> Result<Self> {
        if !(half_width > 0.0 && step > 0.0 && half_width.is_finite() && step.is_finite()) {
            return Err(Error::GridMismatch(format!(
                "invalid grid half-width {half_width} / step {step}"
            )));
        }
        let count = (2.0 * half_width / step).round() as usize + 1;
        Ok(Self {
            q_min: q0 - half_width,
            p_min: p0 - half_width,
            step_q: step,
            step_p: step,
            nq: count,
            np: count,
        })
    }

    pub fn len(&self) -> usize {
        self.nq * self.np
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, index: usize) -> (f64, f64) {
        let (iq, ip) = (index / self.np, index % self.np);
        (
            self.q_min + iq as f64 * self.step_q,
            self.p_min + ip as f64 * self.step_p,
        )
    }

    pub fn cell_area(&self) -> f64 {
        self.step_q * self.step_p
    }

    pub fn diameter(&self) -> f64 {
        let wq = (self.nq.saturating_sub(1)) as f64 * self.step_q;
        let wp = (self.np.saturating_sub(1)) as f64 * self.step_p;
        wq.hypot(wp)
    }

    pub fn cell_diagonal(&self) -> f64 {
        self.step_q.hypot(self.step_p)
    }
}

/// Density values sampled at the nodes of a [`PhaseGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    grid: PhaseGrid,
    values: Vec<f64>,
}

impl GridDensity {
    pub fn new(grid: PhaseGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::GridMismatch(
                "density values must be finite and nonnegative".into(),
            ));
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(Error::GridMismatch("density has no mass".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn sample(grid: PhaseGrid, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = (0..grid.len())
            .map(|k| {
                let (q, p) = grid.node(k);
                f(q, p)
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Riemann sum `Σ f · cell area`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    /// Node masses normalized to total one.
    pub fn masses(&self) -> Vec<f64> {
        let total: f64 = self.values.iter().sum();
        self.values.iter().map(|v| v / total).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridW2Options {
    /// Normalized node masses below this are dropped.
    pub mass_cutoff: f64,
    /// Largest support handed to the LP after aggregation.
    pub max_support: usize,
    /// Force a block factor instead of choosing the smallest admissible one.
    pub block: Option<usize>,
    pub pivot: PivotRule,
}

impl Default for GridW2Options {
    fn default() -> Self {
        Self {
            mass_cutoff: 1e-12,
            max_support: 1600,
            block: None,
            pivot: PivotRule::BlockSearch,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridW2Report {
    /// `W₂²` of the truncated, aggregated measures.
    pub value: f64,
    pub dropped_mass: [f64; 2],
    /// Nodes per block side used for aggregation (1 = none).
    pub block: usize,
    pub support: [usize; 2],
    /// Bound on `|W₂ − W₂(truncated)|` from the dropped mass.
    pub truncation_bound: f64,
    /// Bound on the `W₂` displacement caused by aggregation.
    pub aggregation_bound: f64,
    /// Resulting bound on `|W₂² − value|` relative to the untruncated grid measures.
    pub discretization_bound: f64,
    pub pivots: usize,
}

/// `W₂²` between two densities sampled on the same grid.
pub fn w2_squared_grid(f: &GridDensity, g: &GridDensity) -> Result<GridW2Report> {
    w2_squared_grid_with(f, g, &GridW2Options::default())
}

pub fn w2_squared_grid_with(
    f: &GridDensity,
    g: &GridDensity,
    opts: &GridW2Options,
) -> Result<GridW2Report> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch(
            "densities live on different grids".into(),
        ));
    }
    let grid = f.grid;
    let (mf, dropped_f) = truncate(&f.masses(), opts.mass_cutoff);
    let (mg, dropped_g) = truncate(&g.masses(), opts.mass_cutoff);

    let block = match opts.block {
        Some(k) => k.max(1),
        None => {
            let mut k = 1;
            loop {
                let fits = [&mf, &mg]
                    .iter()
                    .all(|m| aggregate(&grid, m, k).len() <= opts.max_support);
                if fits || k >= grid.nq.max(grid.np) {
                    break k;
                }
                k += 1;
            }
        }
    };
    let sf = aggregate(&grid, &mf, block);
    let sg = aggregate(&grid, &mg, block);
    let cost = RMatrix::from_fn(sf.len(), sg.len(), |i, j| {
        (sf[i].0 - sg[j].0).powi(2) + (sf[i].1 - sg[j].1).powi(2)
    });
    let wf: Vec<f64> = sf.iter().map(|s| s.2).collect();
    let wg: Vec<f64> = sg.iter().map(|s| s.2).collect();
    let plan = solve_transport_with(
        &wf,
        &wg,
        &cost,
        &TransportOptions {
            pivot: opts.pivot,
            ..TransportOptions::default()
        },
    )?;

    let truncation_bound = (dropped_f.sqrt() + dropped_g.sqrt()) * grid.diameter();
    let aggregation_bound = 2.0 * (block - 1) as f64 * grid.cell_diagonal();
    let e = truncation_bound + aggregation_bound;
    let value = plan.cost.max(0.0);
    Ok(GridW2Report {
        value,
        dropped_mass: [dropped_f, dropped_g],
        block,
        support: [sf.len(), sg.len()],
        truncation_bound,
        aggregation_bound,
        discretization_bound: e * (2.0 * value.sqrt() + e),
        pivots: plan.pivots,
    })
}

fn truncate(masses: &[f64], cutoff: f64) -> (Vec<f64>, f64) {
    let dropped: f64 = masses.iter().filter(|&&m| m < cutoff).sum();
    let keep = 1.0 - dropped;
    let out = masses
        .iter()
        .map(|&m| if m < cutoff { 0.0 } else { m / keep })
        .collect();
    (out, dropped)
}

/// Mass-weighted centroids of `k × k` node blocks, sorted by position.
fn aggregate(grid: &PhaseGrid, masses: &[f64], k: usize) -> Vec<(f64, f64, f64)> {
    let bq = grid.nq.div_ceil(k);
    let bp = grid.np.div_ceil(k);
    let mut acc = vec![(0.0, 0.0, 0.0); bq * bp];
    for (idx, &m) in masses.iter().enumerate() {
        if m <= 0.0 {
            continue;
        }
        let (iq, ip) = (idx / grid.np, idx % grid.np);
        let (q, p) = grid.node(idx);
        let slot = &mut acc[(iq / k) * bp + ip / k];
        slot.0 += m * q;
        slot.1 += m * p;
        slot.2 += m;
    }
    acc.into_iter()
        .filter(|s| s.2 > 0.0)
        .map(|(q, p, m)| (q / m, p / m, m))
        .collect()
}

/// Writes a matrix as CSV: header `row,0,1,...`, then one line per row.
pub fn write_matrix_csv<W: Write>(writer: W, m: &RMatrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["row".to_string()];
    header.extend((0..m.ncols()).map(|j| j.to_string()));
    w.write_record(&header)?;
    for i in 0..m.nrows() {
        let mut record = vec![i.to_string()];
        record.extend((0..m.ncols()).map(|j| format_number(m[(i, j)])));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv<R: Read>(reader: R) -> Result<RMatrix> {
    let mut r = csv::Reader::from_reader(reader);
    let cols = r.headers()?.len().saturating_sub(1);
    let mut data = Vec::new();
    let mut rows = 0;
    for record in r.records() {
        let record = record?;
        if record.len() != cols + 1 {
            return Err(Error::DimensionMismatch(format!(
                "row {rows} has {} fields, expected {}",
                record.len(),
                cols + 1
            )));
        }
        for field in record.iter().skip(1) {
            let x: f64 = field.trim().parse().map_err(|_| {
                Error::InvalidConfiguration(format!("cannot parse {field:?} as a number"))
            })?;
            data.push(x);
        }
        rows += 1;
    }
    Ok(RMatrix::from_row_slice(rows, cols, &data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_mass_pairs_use_diagonal_plan() {
        let x = WeightedConfiguration::on_line(&[-1.0, 1.0], &[0.5, 0.5]).unwrap();
        let y = WeightedConfiguration::on_line(&[-2.0, 2.0], &[0.5, 0.5]).unwrap();
        let sol = w2_squared(&x, &y).unwrap();
        assert!((sol.cost - 1.0).abs() < 1e-12);
        assert!((sol.plan[(0, 0)] - 0.5).abs() < 1e-12);
        assert!((sol.plan[(1, 1)] - 0.5).abs() < 1e-12);
        assert!(sol.plan[(0, 1)].abs() < 1e-12);
    }

    #[test]
    fn unequal_mass_pair_cost() {
        let (a, eta) = (1.0, 0.5);
        let x = WeightedConfiguration::on_line(&[-a, a], &[(1.0 - eta) / 2.0, (1.0 + eta) / 2.0])
            .unwrap();
        let y = WeightedConfiguration::on_line(&[-a, a], &[0.5, 0.5]).unwrap();
        let sol = w2_squared(&x, &y).unwrap();
        assert!((sol.cost - 2.0 * eta * a * a).abs() < 1e-12);
        assert!((sol.plan[(1, 0)] - eta / 2.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_masses_are_rejected() {
        let c = RMatrix::zeros(2, 2);
        assert!(matches!(
            solve_transport(&[0.5, 0.5], &[0.5, 0.6], &c),
            Err(Error::InfeasibleMasses(..))
        ));
        assert!(solve_transport(&[1.0], &[1.0], &RMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn identical_measures_cost_nothing() {
        let x = WeightedConfiguration::on_line(&[0.0, 1.0, 3.0], &[0.2, 0.3, 0.5]).unwrap();
        assert!(w2_squared_1d(&x, &x).unwrap().abs() < 1e-15);
        assert!(w2_squared(&x, &x).unwrap().cost.abs() < 1e-12);
    }

    #[test]
    fn two_point_monotone_example() {
        let x = WeightedConfiguration::on_line(&[0.0, 1.0], &[0.5, 0.5]).unwrap();
        let y = WeightedConfiguration::on_line(&[0.0, 2.0], &[0.5, 0.5]).unwrap();
        assert!((w2_squared_1d(&x, &y).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn one_dimensional_rejects_momentum() {
        let x = WeightedConfiguration::new(
            vec![crate::gaussian::CoherentPoint::new(0.0, 1.0).unwrap()],
            vec![1.0],
        )
        .unwrap();
        assert!(matches!(w2_squared_1d(&x, &x), Err(Error::NonzeroMomentum)));
    }

    #[test]
    fn degenerate_instance_with_zero_masses() {
        let m = [0.0, 0.5, 0.0, 0.5];
        let n = [0.25, 0.25, 0.5];
        let cost = RMatrix::from_fn(4, 3, |i, j| ((i as f64) - 1.5 * j as f64).powi(2));
        for pivot in [PivotRule::Bland, PivotRule::BlockSearch] {
            let sol = solve_transport_with(
                &m,
                &n,
                &cost,
                &TransportOptions {
                    pivot,
                    ..TransportOptions::default()
                },
            )
            .unwrap();
            assert!(sol.marginal_defect(&m, &n) < 1e-12);
            assert!(sol.min_reduced_cost(&cost) > -1e-9);
            assert!((sol.dual_value(&m, &n) - sol.cost).abs() < 1e-9);
        }
    }

    #[test]
    fn grid_point_masses() {
        let grid = PhaseGrid::square(2.0, 0.5).unwrap();
        let spike = |k: usize| {
            let mut v = vec![0.0; grid.len()];
            v[k] = 1.0;
            GridDensity::new(grid, v).unwrap()
        };
        let a = spike(3 * grid.np + 2);
        let b = spike(6 * grid.np + 6);
        let (qa, pa) = grid.node(3 * grid.np + 2);
        let (qb, pb) = grid.node(6 * grid.np + 6);
        let report = w2_squared_grid(&a, &b).unwrap();
        let r2 = (qa - qb).powi(2) + (pa - pb).powi(2);
        assert!((report.value - r2).abs() < 1e-12);
        assert_eq!(report.block, 1);
        assert!(w2_squared_grid(&a, &a).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let g1 = PhaseGrid::square(2.0, 0.5).unwrap();
        let g2 = PhaseGrid::square(2.0, 0.25).unwrap();
        let a = GridDensity::sample(g1, |_, _| 1.0).unwrap();
        let b = GridDensity::sample(g2, |_, _| 1.0).unwrap();
        assert!(matches!(
            w2_squared_grid(&a, &b),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn csv_round_trip() {
        let m = RMatrix::from_row_slice(2, 3, &[0.5, 0.0, 1e-17, 3.25, -2.0, 7.0]);
        let mut out = Vec::new();
        write_matrix_csv(&mut out, &m).unwrap();
        let text = String::from_utf8(out.clone()).unwrap();
        assert!(text.starts_with("row,0,1,2\n0,"));
        assert_eq!(read_matrix_csv(out.as_slice()).unwrap(), m);
    }
}
