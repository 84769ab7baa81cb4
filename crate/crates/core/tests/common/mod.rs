//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls into the library's algorithms; each oracle is a
//! direct, slow restatement of the quantity under test.

#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rsg_core::model::SchemeSpec;

// ---------------------------------------------------------------------------
// Heralded source

/// Herald statistics from an explicit density operator.
///
/// Builds the truncated two-mode squeezed vacuum, applies the loss Kraus
/// operators to the herald mode, projects it onto exactly one photon and
/// traces it out. Returns `(p_s, ε)` with `ε` the multi-photon fraction of
/// the heralded mode.
pub fn kraus_herald(s: f64, eta: f64, n_max: usize) -> (f64, f64) {
    let dim = n_max + 1;
    let lam = s.sqrt();
    let binom = |n: usize, k: usize| (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
    // psi[a][b]: herald a photons, signal b photons
    let mut psi = vec![vec![0.0; dim]; dim];
    for (n, row) in psi.iter_mut().enumerate() {
        row[n] = (1.0 - s).sqrt() * lam.powi(n as i32);
    }
    let mut rho = vec![vec![0.0; dim]; dim];
    for lost in 0..dim {
        // K_lost maps herald |n> to |n - lost>
        let mut phi = vec![vec![0.0; dim]; dim];
        for n in lost..dim {
            let amp = (binom(n, lost) * eta.powi((n - lost) as i32) * (1.0 - eta).powi(lost as i32)).sqrt();
            for j in 0..dim {
                phi[n - lost][j] += amp * psi[n][j];
            }
        }
        let w = &phi[1];
        for i in 0..dim {
            for j in 0..dim {
                rho[i][j] += w[i] * w[j];
            }
        }
    }
    let p_s: f64 = (0..dim).map(|i| rho[i][i]).sum();
    (p_s, 1.0 - (rho[0][0] + rho[1][1]) / p_s)
}

// ---------------------------------------------------------------------------
// Sharing

/// Distribution after stage 1 (keep each set w.p. `p1`), merge by `c1`, and
/// stage 2 (keep w.p. `p2`), by enumerating every success pattern.
///
/// Patterns are tallied as integers per success count before weighting, so
/// the 2^m enumeration adds no floating-point roundoff.
pub fn enumerate_two_stage(initial: &[f64], p1: f64, c1: usize, p2: f64) -> Vec<f64> {
    let tally = |k: usize| {
        let mut t = vec![0u64; k + 1];
        for mask in 0u32..(1 << k) {
            t[mask.count_ones() as usize] += 1;
        }
        t
    };
    let m = initial.len() - 1;
    let mut after = vec![0.0; m + 1];
    for (k, &pk) in initial.iter().enumerate() {
        for (s, &n1) in tally(k).iter().enumerate() {
            let w = n1 as f64 * p1.powi(s as i32) * (1.0 - p1).powi((k - s) as i32);
            let sets = s / c1;
            for (t, &n2) in tally(sets).iter().enumerate() {
                after[t] += pk * w * n2 as f64 * p2.powi(t as i32) * (1.0 - p2).powi((sets - t) as i32);
            }
        }
    }
    after
}

/// One Monte Carlo run of a shared module, set by set.
pub fn sample_module(scheme: &SchemeSpec, p_s: f64, n: usize, x: f64, sched: &[u32], rng: &mut ChaCha8Rng) -> bool {
    let mut count = (0..n).filter(|_| rng.random::<f64>() < p_s).count();
    for (stage, &depth) in scheme.stages.iter().zip(sched) {
        // all detected photons of a set cross `depth` lossy components
        let survival = (1.0 - x).powi((depth * stage.detected) as i32);
        let mut ok = 0;
        for _ in 0..count {
            if rng.random::<f64>() < survival && rng.random::<f64>() < stage.success_prob {
                ok += 1;
            }
        }
        count = ok / stage.copies as usize;
    }
    count > 0
}

// ---------------------------------------------------------------------------
// Graphs as boolean matrices

pub type Adj = Vec<Vec<bool>>;

pub fn adj_from_edges(n: usize, edges: &[(usize, usize)]) -> Adj {
    let mut a = vec![vec![false; n]; n];
    for &(u, v) in edges {
        a[u][v] = true;
        a[v][u] = true;
    }
    a
}

pub fn edges_of(a: &Adj) -> Vec<(usize, usize)> {
    let n = a.len();
    (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|&(u, v)| a[u][v]).collect()
}

pub fn naive_lc(a: &Adj, v: usize) -> Adj {
    let nb: Vec<usize> = (0..a.len()).filter(|&u| a[v][u]).collect();
    let mut b = a.clone();
    for (i, &x) in nb.iter().enumerate() {
        for &y in &nb[i + 1..] {
            b[x][y] = !b[x][y];
            b[y][x] = !b[y][x];
        }
    }
    b
}

pub fn connected(a: &Adj) -> bool {
    let n = a.len();
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if a[u][v] && !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Every graph reachable by local complementations.
pub fn naive_orbit(a: &Adj) -> HashSet<Adj> {
    let mut seen = HashSet::from([a.clone()]);
    let mut queue = VecDeque::from([a.clone()]);
    while let Some(g) = queue.pop_front() {
        for v in 0..g.len() {
            let h = naive_lc(&g, v);
            if seen.insert(h.clone()) {
                queue.push_back(h);
            }
        }
    }
    seen
}

/// Minimum edge count of the LC class of every labeled graph on `n`
/// vertices, indexed by edge mask over pairs `(u < v)` in lexicographic order.
pub struct OrbitTable {
    pub n: usize,
    pub pairs: Vec<(usize, usize)>,
    pub min_edges: Vec<usize>,
}

impl OrbitTable {
    pub fn build(n: usize) -> Self {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let total = 1usize << pairs.len();
        let mut parent: Vec<usize> = (0..total).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for mask in 0..total {
            let a = Self::decode(n, &pairs, mask);
            for v in 0..n {
                let b = Self::encode(&pairs, &naive_lc(&a, v));
                let (ra, rb) = (find(&mut parent, mask), find(&mut parent, b));
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }
        let mut best = vec![usize::MAX; total];
        for mask in 0..total {
            let r = find(&mut parent, mask);
            best[r] = best[r].min(mask.count_ones() as usize);
        }
        let min_edges = (0..total).map(|m| best[find(&mut parent, m)]).collect();
        OrbitTable { n, pairs, min_edges }
    }

    pub fn decode(n: usize, pairs: &[(usize, usize)], mask: usize) -> Adj {
        let edges: Vec<_> = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
        adj_from_edges(n, &edges)
    }

    pub fn encode(pairs: &[(usize, usize)], a: &Adj) -> usize {
        pairs.iter().enumerate().filter(|(_, &(u, v))| a[u][v]).map(|(i, _)| 1 << i).sum()
    }
}

// ---------------------------------------------------------------------------
// Stabilizer states, signs ignored

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauliOp {
    pub x: u32,
    pub z: u32,
}

impl PauliOp {
    fn commutes(self, o: PauliOp) -> bool {
        ((self.x & o.z).count_ones() + (self.z & o.x).count_ones()) % 2 == 0
    }
    fn mul(self, o: PauliOp) -> PauliOp {
        PauliOp { x: self.x ^ o.x, z: self.z ^ o.z }
    }
    fn is_identity(self) -> bool {
        self.x == 0 && self.z == 0
    }
}

/// Generators `X_v Z_{N(v)}` of a graph state.
pub fn graph_stabilizers(a: &Adj) -> Vec<PauliOp> {
    (0..a.len())
        .map(|v| PauliOp {
            x: 1 << v,
            z: (0..a.len()).filter(|&u| a[v][u]).map(|u| 1 << u).sum(),
        })
        .collect()
}

/// Independent subset of `ops` (Gaussian elimination over the symplectic bits).
fn independent(ops: Vec<PauliOp>) -> Vec<PauliOp> {
    let mut basis: Vec<(u64, PauliOp)> = Vec::new();
    let key = |p: PauliOp| (p.x as u64) << 32 | p.z as u64;
    let mut out = Vec::new();
    for op in ops {
        let mut k = key(op);
        for &(b, _) in &basis {
            if k ^ b < k {
                k ^= b;
            }
        }
        if k != 0 {
            // keep the basis sorted by leading bit so the reduction above is valid
            basis.push((k, op));
            basis.sort_by_key(|b| std::cmp::Reverse(b.0));
            out.push(op);
        }
    }
    out
}

/// Stabilizer generators of the other `n − 1` qubits after measuring qubit
/// `v` of a graph state in `basis` (`'X'`, `'Y'` or `'Z'`), relabeled to drop `v`.
pub fn measured_stabilizers(a: &Adj, v: usize, basis: char) -> Vec<PauliOp> {
    let n = a.len();
    let bit = 1u32 << v;
    let p = match basis {
        'X' => PauliOp { x: bit, z: 0 },
        'Z' => PauliOp { x: 0, z: bit },
        'Y' => PauliOp { x: bit, z: bit },
        _ => panic!("basis {basis}"),
    };
    let gens = graph_stabilizers(a);
    let anti: Vec<usize> = (0..n).filter(|&i| !gens[i].commutes(p)).collect();
    let mut new_gens = vec![p];
    for (i, &g) in gens.iter().enumerate() {
        if anti.is_empty() || !anti.contains(&i) {
            new_gens.push(g);
        } else if i != anti[0] {
            new_gens.push(g.mul(gens[anti[0]]));
        }
    }
    // every generator now acts on v as I or as P; clear it
    let cleared: Vec<PauliOp> = new_gens
        .into_iter()
        .map(|g| {
            let on_v = PauliOp { x: g.x & bit, z: g.z & bit };
            if on_v.is_identity() {
                g
            } else {
                assert_eq!(on_v, p, "generator does not commute with the measurement");
                g.mul(p)
            }
        })
        .filter(|g| !g.is_identity())
        .collect();
    let drop_v = |m: u32| (m & (bit - 1)) | ((m >> 1) & !(bit - 1));
    let reduced = independent(cleared.into_iter().map(|g| PauliOp { x: drop_v(g.x), z: drop_v(g.z) }).collect());
    assert_eq!(reduced.len(), n - 1, "post-measurement state is not pure on the rest");
    reduced
}

/// A graph locally Clifford-equivalent to the stabilizer state: Hadamards on
/// some subset make the X block invertible, then `Γ = X⁻¹ Z` with its
/// diagonal removed by phase gates.
pub fn graph_form(gens: &[PauliOp], m: usize) -> Adj {
    for h in 0u32..(1 << m) {
        let rows: Vec<PauliOp> = gens
            .iter()
            .map(|g| PauliOp { x: (g.x & !h) | (g.z & h), z: (g.z & !h) | (g.x & h) })
            .collect();
        if let Some(gamma) = reduce_to_identity(rows, m) {
            let mut a = vec![vec![false; m]; m];
            for i in 0..m {
                for j in 0..m {
                    a[i][j] = i != j && gamma[i].z >> j & 1 == 1;
                }
            }
            for i in 0..m {
                for j in 0..m {
                    assert_eq!(a[i][j], a[j][i], "Γ not symmetric");
                }
            }
            return a;
        }
    }
    panic!("no Hadamard pattern gives an invertible X block")
}

/// Row-reduces so the X block is the identity; `None` when singular.
fn reduce_to_identity(mut rows: Vec<PauliOp>, m: usize) -> Option<Vec<PauliOp>> {
    for col in 0..m {
        let pivot = (col..m).find(|&r| rows[r].x >> col & 1 == 1)?;
        rows.swap(col, pivot);
        for r in 0..m {
            if r != col && rows[r].x >> col & 1 == 1 {
                rows[r] = rows[r].mul(rows[col]);
            }
        }
    }
    Some(rows)
}

/// Removes vertex `v` from a matrix.
pub fn delete_vertex(a: &Adj, v: usize) -> Adj {
    a.iter()
        .enumerate()
        .filter(|&(i, _)| i != v)
        .map(|(_, row)| row.iter().enumerate().filter(|&(j, _)| j != v).map(|(_, &b)| b).collect())
        .collect()
}
