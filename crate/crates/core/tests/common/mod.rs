//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use qot_core::gaussian::{moments, CoherentPoint, PhaseSpaceContext, WeightedConfiguration};
use qot_core::linalg::{hermitian_eig, hermitian_part};
use qot_core::transport::{solve_transport, w2_squared, w2_squared_1d};
use qot_core::{CMatrix, RMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn masses(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

// ---- coherent states by quadrature ----

/// `ψ(x)`, `ψ'(x)`, `ψ''(x)` for the normalized coherent state at `z`.
fn wave(h: f64, q: f64, p: f64, x: f64) -> [C64; 3] {
    let norm = (std::f64::consts::PI * h).powf(-0.25);
    let psi = C64::from_polar(norm * (-(x - q).powi(2) / (2.0 * h)).exp(), p * x / h);
    let k = C64::new(-(x - q) / h, p / h);
    [psi, k * psi, (k * k - 1.0 / h) * psi]
}

/// Composite Simpson rule for `⟨z₁|A|z₂⟩`, `A ∈ {1, x, x², p, p²}`.
pub fn quadrature_moments(h: f64, z1: (f64, f64), z2: (f64, f64)) -> [C64; 5] {
    let centre = 0.5 * (z1.0 + z2.0);
    let half = 14.0 * h.sqrt() + 0.5 * (z1.0 - z2.0).abs();
    let n = 8000;
    let dx = 2.0 * half / n as f64;
    let mut acc = [C64::new(0.0, 0.0); 5];
    for k in 0..=n {
        let x = centre - half + k as f64 * dx;
        let w = dx / 3.0
            * if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
        let bra = wave(h, z1.0, z1.1, x)[0].conj();
        let [psi, d1, d2] = wave(h, z2.0, z2.1, x);
        let i_h = C64::new(0.0, -h);
        acc[0] += bra * psi * w;
        acc[1] += bra * psi * x * w;
        acc[2] += bra * psi * x * x * w;
        acc[3] += bra * i_h * d1 * w;
        acc[4] += bra * d2 * (-h * h) * w;
    }
    acc
}

// ---- transportation problem by vertex enumeration ----

struct Trees<'a> {
    m: usize,
    n: usize,
    mu: &'a [f64],
    nu: &'a [f64],
    cost: &'a RMatrix,
    best: f64,
}

fn find(parent: &mut [usize], mut v: usize) -> usize {
    while parent[v] != v {
        v = parent[v];
    }
    v
}

impl Trees<'_> {
    /// Flow on a spanning tree of the bipartite graph, by leaf elimination.
    fn tree_flow(&self, cells: &[usize]) -> Option<f64> {
        let mut supply: Vec<f64> = self.mu.iter().chain(self.nu).copied().collect();
        let mut alive = cells.to_vec();
        let mut total = 0.0;
        while !alive.is_empty() {
            let mut degree = vec![0usize; self.m + self.n];
            for &c in &alive {
                degree[c / self.n] += 1;
                degree[self.m + c % self.n] += 1;
            }
            let pos = alive
                .iter()
                .position(|&c| degree[c / self.n] == 1 || degree[self.m + c % self.n] == 1)?;
            let c = alive.remove(pos);
            let (i, j) = (c / self.n, self.m + c % self.n);
            let leaf = if degree[i] == 1 { i } else { j };
            let other = if leaf == i { j } else { i };
            let flow = supply[leaf];
            if flow < -1e-12 {
                return None;
            }
            supply[leaf] = 0.0;
            supply[other] -= flow;
            total += flow * self.cost[(c / self.n, c % self.n)];
        }
        supply.iter().all(|s| s.abs() < 1e-9).then_some(total)
    }

    fn search(&mut self, start: usize, chosen: &mut Vec<usize>, parent: &mut Vec<usize>) {
        let need = self.m + self.n - 1;
        if chosen.len() == need {
            if let Some(v) = self.tree_flow(chosen) {
                self.best = self.best.min(v);
            }
            return;
        }
        let cells = self.m * self.n;
        if cells - start < need - chosen.len() {
            return;
        }
        for c in start..cells {
            let (a, b) = (find(parent, c / self.n), find(parent, self.m + c % self.n));
            if a == b {
                continue;
            }
            let saved = parent.clone();
            parent[a] = b;
            chosen.push(c);
            self.search(c + 1, chosen, parent);
            chosen.pop();
            *parent = saved;
        }
    }
}

pub fn enumerate_vertices(mu: &[f64], nu: &[f64], cost: &RMatrix) -> f64 {
    let mut t = Trees {
        m: mu.len(),
        n: nu.len(),
        mu,
        nu,
        cost,
        best: f64::INFINITY,
    };
    let mut parent: Vec<usize> = (0..mu.len() + nu.len()).collect();
    t.search(0, &mut Vec::new(), &mut parent);
    t.best
}

/// Largest deviation of the closed-form overlaps and moments from quadrature.
pub fn quadrature_deviation(count: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst = 0.0_f64;
    for _ in 0..count {
        let h = r.random_range(0.2..2.0);
        let z1 = (r.random_range(-3.0..3.0), r.random_range(-3.0..3.0));
        let z2 = (r.random_range(-3.0..3.0), r.random_range(-3.0..3.0));
        let ctx = PhaseSpaceContext::new(h).unwrap();
        let p1 = CoherentPoint::new(z1.0, z1.1).unwrap();
        let p2 = CoherentPoint::new(z2.0, z2.1).unwrap();
        let m = moments(&ctx, &p1, &p2);
        let exact = [m.overlap, m.x, m.x2, m.p, m.p2];
        for (e, n) in exact.iter().zip(&quadrature_moments(h, z1, z2)) {
            worst = worst.max((e - n).norm());
        }
    }
    worst
}

/// Largest `|simplex − vertex enumeration|` over random instances with `M, N ≤ 5`.
pub fn simplex_deviation(count: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst = 0.0_f64;
    for _ in 0..count {
        let (m, n) = (r.random_range(1..=5), r.random_range(1..=5));
        let mu = masses(&mut r, m);
        let nu = masses(&mut r, n);
        let cost = RMatrix::from_fn(m, n, |_, _| r.random_range(0.0..5.0));
        let exact = enumerate_vertices(&mu, &nu, &cost);
        let sol = solve_transport(&mu, &nu, &cost).unwrap();
        worst = worst
            .max((sol.cost - exact).abs())
            .max(sol.marginal_defect(&mu, &nu));
    }
    worst
}

fn random_line(r: &mut ChaCha8Rng) -> WeightedConfiguration {
    let k = r.random_range(1..=8);
    let shift = r.random_range(-4.0..4.0);
    let pos: Vec<f64> = (0..k)
        .map(|i| i as f64 + r.random_range(-0.4..0.4) + shift)
        .collect();
    let w = masses(r, k);
    WeightedConfiguration::on_line(&pos, &w).unwrap()
}

/// Largest `|monotone − LP|` over random one-dimensional instances.
pub fn monotone_deviation(count: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst = 0.0_f64;
    for _ in 0..count {
        let (x, y) = (random_line(&mut r), random_line(&mut r));
        let lp = w2_squared(&x, &y).unwrap().cost;
        worst = worst.max((lp - w2_squared_1d(&x, &y).unwrap()).abs());
    }
    worst
}

/// Largest reconstruction residual `‖V diag(w) V† − M‖` over random
/// Hermitian matrices with `n ≤ 12`.
pub fn jacobi_residual(count: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst = 0.0_f64;
    for _ in 0..count {
        let n = r.random_range(1..=12);
        let m = hermitian_part(&CMatrix::from_fn(n, n, |_, _| {
            C64::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0))
        }));
        let eig = hermitian_eig(&m).unwrap();
        worst = worst.max((eig.reconstruct_with(|w| w) - &m).norm());
    }
    worst
}
