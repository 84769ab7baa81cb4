//! Graph states up to local Cliffords.
//!
//! Vertices are `0..n` with `n ≤ 64`; row `v` of the adjacency is a bitmask.
//! Local complementation never relabels vertices, so orbit deduplication
//! compares adjacency rows directly.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_VERTICES: usize = 64;

/// Simple undirected graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    adj: Vec<u64>,
}

impl Graph {
    pub fn empty(n: usize) -> Result<Self> {
        if n > MAX_VERTICES {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: format!("{n} vertices exceed the limit of {MAX_VERTICES}"),
            });
        }
        Ok(Graph { n, adj: vec![0; n] })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Self::from_edges(n, &edges).expect("path fits")
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Self::path(n);
        if n > 2 {
            g.add_edge(n - 1, 0).expect("in range");
        }
        g
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n).expect("complete graph fits");
        for u in 0..n {
            for v in u + 1..n {
                g.toggle(u, v);
            }
        }
        g
    }

    pub fn star(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|v| (0, v)).collect();
        Self::from_edges(n, &edges).expect("star fits")
    }

    /// Central graph of a ring of `ring_len` logical qubits, each encoded
    /// in a (2,2) Shor code.
    ///
    /// Logical qubit `v` occupies central vertices `2v, 2v + 1`; every ring
    /// edge becomes a complete bipartite `K_{2,2}` between the two pairs.
    pub fn encoded_ring_central(ring_len: usize) -> Result<Self> {
        let mut g = Self::empty(2 * ring_len)?;
        for v in 0..ring_len {
            let w = (v + 1) % ring_len;
            for a in [2 * v, 2 * v + 1] {
                for b in [2 * w, 2 * w + 1] {
                    g.add_edge(a, b)?;
                }
            }
        }
        Ok(g)
    }

    /// Full encoded ring: the central graph plus one leaf per central vertex.
    ///
    /// Leaves `c + 2·ring_len` hang off central vertex `c`. The state equals
    /// the encoded ring up to Hadamards on the leaves.
    pub fn encoded_ring(ring_len: usize) -> Result<Self> {
        let central = Self::encoded_ring_central(ring_len)?;
        let k = central.n;
        let mut g = Self::empty(2 * k)?;
        for (u, v) in central.edges() {
            g.add_edge(u, v)?;
        }
        for c in 0..k {
            g.add_edge(c, c + k)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check(&self, v: usize) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { vertex: v, n: self.n })
        }
    }

    fn toggle(&mut self, u: usize, v: usize) {
        self.adj[u] ^= 1 << v;
        self.adj[v] ^= 1 << u;
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(Error::InvalidParameter {
                name: "edge",
                reason: format!("self-loop at {u}"),
            });
        }
        self.adj[u] |= 1 << v;
        self.adj[v] |= 1 << u;
        Ok(())
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.adj[u] >> v & 1 == 1
    }

    /// Neighbourhood of `v` as a bitmask.
    pub fn neighbors_mask(&self, v: usize) -> u64 {
        self.adj[v]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        bits(self.adj[v])
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones() as usize
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|r| r.count_ones() as usize).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|u| bits(self.adj[u] >> u >> 1).map(move |d| (u, u + 1 + d)))
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let all = full_mask(self.n);
        let mut seen = 1u64;
        let mut frontier = 1u64;
        while frontier != 0 {
            let mut next = 0;
            for v in bits(frontier) {
                next |= self.adj[v];
            }
            frontier = next & !seen;
            seen |= next;
        }
        seen & all == all
    }

    /// Removes every edge at `v`; the vertex index is kept.
    pub fn isolate(&mut self, v: usize) -> Result<()> {
        self.check(v)?;
        for u in bits(self.adj[v]) {
            self.adj[u] &= !(1 << v);
        }
        self.adj[v] = 0;
        Ok(())
    }

    /// In-place local complementation at `v`.
    pub fn local_complement_mut(&mut self, v: usize) -> Result<()> {
        self.check(v)?;
        let nbhd = self.adj[v];
        for u in bits(nbhd) {
            // toggles u–w for every other neighbour w; bit u of nbhd is clear in adj[u]
            self.adj[u] ^= nbhd & !(1 << u);
        }
        Ok(())
    }

    /// Toggles every edge inside the neighbourhood of `v`.
    pub fn local_complement(&self, v: usize) -> Result<Self> {
        let mut g = self.clone();
        g.local_complement_mut(v)?;
        Ok(g)
    }

    /// Applies `vertices` as successive local complementations.
    pub fn apply_lc_sequence(&self, vertices: &[usize]) -> Result<Self> {
        let mut g = self.clone();
        for &v in vertices {
            g.local_complement_mut(v)?;
        }
        Ok(g)
    }

    /// Parses `u v` lines, zero-indexed, `#` comments allowed.
    ///
    /// A line `vertices N` fixes the vertex count; otherwise it is one more
    /// than the largest index used.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut declared = None;
        let mut edges = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let bad = |message: String| Error::GraphParse { line, message };
            match fields.as_slice() {
                ["vertices", n] => {
                    declared = Some(n.parse::<usize>().map_err(|_| bad(format!("bad vertex count `{n}`")))?)
                }
                [u, v] => {
                    let u: usize = u.parse().map_err(|_| bad(format!("bad vertex `{u}`")))?;
                    let v: usize = v.parse().map_err(|_| bad(format!("bad vertex `{v}`")))?;
                    if u == v {
                        return Err(bad(format!("self-loop at {u}")));
                    }
                    edges.push((line, u, v));
                }
                _ => return Err(bad(format!("expected `u v`, found `{content}`"))),
            }
        }
        let used = edges.iter().map(|&(_, u, v)| u.max(v) + 1).max().unwrap_or(0);
        let n = declared.unwrap_or(used);
        let mut g = Self::empty(n).map_err(|e| Error::GraphParse { line: 0, message: e.to_string() })?;
        for (line, u, v) in edges {
            g.add_edge(u, v).map_err(|e| Error::GraphParse { line, message: e.to_string() })?;
        }
        Ok(g)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("vertices {}\n", self.n);
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn to_adjacency_json(&self) -> AdjacencyJson {
        AdjacencyJson {
            n: self.n,
            adjacency: (0..self.n).map(|v| self.neighbors(v).collect()).collect(),
        }
    }

    pub fn from_adjacency_json(doc: &AdjacencyJson) -> Result<Self> {
        if doc.adjacency.len() != doc.n {
            return Err(Error::GraphParse {
                line: 0,
                message: format!("{} adjacency rows for n = {}", doc.adjacency.len(), doc.n),
            });
        }
        let mut g = Self::empty(doc.n)?;
        for (u, row) in doc.adjacency.iter().enumerate() {
            for &v in row {
                g.add_edge(u, v)?;
            }
        }
        for u in 0..doc.n {
            if g.degree(u) != doc.adjacency[u].len() {
                return Err(Error::GraphParse {
                    line: 0,
                    message: format!("adjacency row {u} is not symmetric or has duplicates"),
                });
            }
        }
        Ok(g)
    }
}

/// `{"n": …, "adjacency": [[…], …]}` document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjacencyJson {
    pub n: usize,
    pub adjacency: Vec<Vec<usize>>,
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (mask != 0).then(|| {
            let v = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            v
        })
    })
}

/// Result of a breadth-first LC-orbit search.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSearch {
    pub min_edges: usize,
    /// LC vertices taking the input to `representative`.
    pub witness: Vec<usize>,
    pub representative: Graph,
    pub visited: usize,
    /// The search stopped at `node_cap` before exhausting the orbit.
    pub truncated: bool,
}

/// Level-synchronous BFS over the LC orbit of `g`, visiting at most `node_cap` graphs.
///
/// Ties on edge count keep the representative found first (shortest witness).
pub fn lc_orbit_min_edges(g: &Graph, node_cap: usize) -> OrbitSearch {
    let cap = node_cap.max(1);
    // node -> (parent index, vertex applied)
    let mut nodes: Vec<(Graph, usize, usize)> = vec![(g.clone(), usize::MAX, usize::MAX)];
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::from([(g.adj.clone(), 0)]);
    let mut best = 0;
    let mut frontier = vec![0usize];
    let mut truncated = false;

    'bfs: while !frontier.is_empty() {
        let mut next = Vec::new();
        for &idx in &frontier {
            for v in 0..g.n {
                if nodes[idx].0.adj[v].count_ones() < 2 {
                    continue; // LC at a vertex of degree < 2 is the identity
                }
                let child = nodes[idx].0.local_complement(v).expect("vertex in range");
                if seen.contains_key(&child.adj) {
                    continue;
                }
                if nodes.len() >= cap {
                    truncated = true;
                    break 'bfs;
                }
                let id = nodes.len();
                seen.insert(child.adj.clone(), id);
                if child.edge_count() < nodes[best].0.edge_count() {
                    best = id;
                }
                nodes.push((child, idx, v));
                next.push(id);
            }
        }
        frontier = next;
    }

    let mut witness = Vec::new();
    let mut at = best;
    while nodes[at].1 != usize::MAX {
        witness.push(nodes[at].2);
        at = nodes[at].1;
    }
    witness.reverse();
    OrbitSearch {
        min_edges: nodes[best].0.edge_count(),
        witness,
        representative: nodes[best].0.clone(),
        visited: nodes.len(),
        truncated,
    }
}

/// Every member of the LC orbit of `g`, in BFS order.
pub fn lc_orbit(g: &Graph, node_cap: usize) -> (Vec<Graph>, bool) {
    let mut seen: HashMap<Vec<u64>, ()> = HashMap::from([(g.adj.clone(), ())]);
    let mut members = vec![g.clone()];
    let mut i = 0;
    while i < members.len() {
        for v in 0..g.n {
            let child = members[i].local_complement(v).expect("vertex in range");
            if seen.insert(child.adj.clone(), ()).is_none() {
                if members.len() >= node_cap {
                    return (members, true);
                }
                members.push(child);
            }
        }
        i += 1;
    }
    (members, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl std::str::FromStr for Pauli {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" | "x" => Ok(Pauli::X),
            "Y" | "y" => Ok(Pauli::Y),
            "Z" | "z" => Ok(Pauli::Z),
            other => Err(Error::InvalidParameter {
                name: "basis",
                reason: format!("`{other}` is not X, Y or Z"),
            }),
        }
    }
}

/// Graph after measuring `v` in `basis`, up to local Cliffords on the rest.
///
/// `v` is left as an isolated vertex. The X rule complements at the
/// lowest-index neighbour of `v`.
pub fn measure_pauli(g: &Graph, v: usize, basis: Pauli) -> Result<Graph> {
    g.check(v)?;
    let mut h = g.clone();
    match basis {
        Pauli::Z => {}
        Pauli::Y => h.local_complement_mut(v)?,
        Pauli::X => {
            if let Some(b) = g.neighbors(v).next() {
                h.local_complement_mut(b)?;
                h.local_complement_mut(v)?;
                h.isolate(v)?;
                h.local_complement_mut(b)?;
                return Ok(h);
            }
        }
    }
    h.isolate(v)?;
    Ok(h)
}

pub type Round = Vec<(usize, usize)>;

/// Partitions the edges into matchings, one per RUS round.
///
/// Uses Misra–Gries (at most `Δ + 1` rounds), then a bounded backtracking
/// search for a `Δ`-colouring on graphs with at most 64 edges.
pub fn rus_schedule(g: &Graph) -> Vec<Round> {
    let delta = g.max_degree();
    if delta == 0 {
        return Vec::new();
    }
    let mut colouring = misra_gries(g);
    let used = colouring.values().copied().max().map_or(0, |c| c + 1);
    if used > delta && g.edge_count() <= 64 {
        if let Some(exact) = backtrack_colouring(g, delta, 2_000_000) {
            colouring = exact;
        }
    }
    let rounds = colouring.values().copied().max().map_or(0, |c| c + 1);
    let mut out = vec![Vec::new(); rounds];
    for (u, v) in g.edges() {
        out[colouring[&(u, v)]].push((u, v));
    }
    out.retain(|r| !r.is_empty());
    out
}

fn key(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

/// Misra–Gries edge colouring with colours `0..=Δ`.
fn misra_gries(g: &Graph) -> HashMap<(usize, usize), usize> {
    let n = g.n;
    let palette = g.max_degree() + 1;
    // colour_at[x][c] = the other endpoint of the c-coloured edge at x
    let mut colour_at: Vec<Vec<Option<usize>>> = vec![vec![None; palette]; n];
    let mut colour: HashMap<(usize, usize), usize> = HashMap::new();

    let free = |ca: &Vec<Vec<Option<usize>>>, x: usize, c: usize| ca[x][c].is_none();
    let first_free = |ca: &Vec<Vec<Option<usize>>>, x: usize| (0..palette).find(|&c| ca[x][c].is_none()).expect("Δ + 1 colours suffice");

    fn set(ca: &mut [Vec<Option<usize>>], col: &mut HashMap<(usize, usize), usize>, u: usize, v: usize, c: usize) {
        ca[u][c] = Some(v);
        ca[v][c] = Some(u);
        col.insert(key(u, v), c);
    }
    fn unset(ca: &mut [Vec<Option<usize>>], col: &mut HashMap<(usize, usize), usize>, u: usize, v: usize) {
        if let Some(c) = col.remove(&key(u, v)) {
            ca[u][c] = None;
            ca[v][c] = None;
        }
    }

    for (u, v) in g.edges() {
        // maximal fan of u starting at v
        let mut fan = vec![v];
        loop {
            let last = *fan.last().expect("non-empty");
            let next = g.neighbors(u).find(|&w| {
                !fan.contains(&w) && colour.get(&key(u, w)).is_some_and(|&c| free(&colour_at, last, c))
            });
            match next {
                Some(w) => fan.push(w),
                None => break,
            }
        }
        let c = first_free(&colour_at, u);
        let d = first_free(&colour_at, *fan.last().expect("non-empty"));

        // invert the cd-path starting at u
        if c != d {
            let mut path = Vec::new();
            let (mut x, mut want) = (u, d);
            while let Some(y) = colour_at[x][want] {
                path.push((x, y));
                x = y;
                want = if want == d { c } else { d };
                if path.len() > g.edge_count() {
                    break;
                }
            }
            let recoloured: Vec<(usize, usize, usize)> = path
                .iter()
                .map(|&(a, b)| (a, b, if colour[&key(a, b)] == d { c } else { d }))
                .collect();
            for &(a, b, _) in &recoloured {
                unset(&mut colour_at, &mut colour, a, b);
            }
            for (a, b, nc) in recoloured {
                set(&mut colour_at, &mut colour, a, b, nc);
            }
        }

        // first fan vertex with d free; its prefix is still a fan
        let mut w_idx = fan.len() - 1;
        for (i, &w) in fan.iter().enumerate() {
            if free(&colour_at, w, d) {
                w_idx = i;
                break;
            }
        }
        // rotate the prefix fan[..=w_idx]
        for i in 0..w_idx {
            let shifted = colour[&key(u, fan[i + 1])];
            unset(&mut colour_at, &mut colour, u, fan[i + 1]);
            unset(&mut colour_at, &mut colour, u, fan[i]);
            set(&mut colour_at, &mut colour, u, fan[i], shifted);
        }
        unset(&mut colour_at, &mut colour, u, fan[w_idx]);
        set(&mut colour_at, &mut colour, u, fan[w_idx], d);
    }
    colour
}

/// Depth-first search for an edge colouring with `k` colours.
fn backtrack_colouring(g: &Graph, k: usize, node_budget: usize) -> Option<HashMap<(usize, usize), usize>> {
    let edges = g.edges();
    let mut used = vec![0u64; g.n]; // colour bitmask per vertex
    let mut assign = vec![usize::MAX; edges.len()];
    let mut budget = node_budget;

    fn go(i: usize, edges: &[(usize, usize)], k: usize, used: &mut [u64], assign: &mut [usize], budget: &mut usize) -> bool {
        if i == edges.len() {
            return true;
        }
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let (u, v) = edges[i];
        let blocked = used[u] | used[v];
        for c in 0..k {
            if blocked >> c & 1 == 0 {
                used[u] |= 1 << c;
                used[v] |= 1 << c;
                assign[i] = c;
                if go(i + 1, edges, k, used, assign, budget) {
                    return true;
                }
                used[u] &= !(1 << c);
                used[v] &= !(1 << c);
            }
        }
        false
    }

    go(0, &edges, k, &mut used, &mut assign, &mut budget)
        .then(|| edges.iter().zip(assign).map(|(&e, c)| (e, c)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_graph(n: usize, density: f64, rng: &mut ChaCha8Rng) -> Graph {
        let mut g = Graph::empty(n).unwrap();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random::<f64>() < density {
                    g.add_edge(u, v).unwrap();
                }
            }
        }
        g
    }

    #[test]
    fn lc_examples() {
        let tri = Graph::path(3).local_complement(1).unwrap();
        assert_eq!(tri, Graph::complete(3));
        assert_eq!(Graph::cycle(12).local_complement(4).unwrap().edge_count(), 13);
        assert!(matches!(Graph::path(3).local_complement(3), Err(Error::VertexOutOfRange { vertex: 3, n: 3 })));
    }

    #[test]
    fn lc_is_an_involution_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let n = rng.random_range(1..=16);
            let g = random_graph(n, rng.random(), &mut rng);
            let v = rng.random_range(0..n);
            assert_eq!(g.local_complement(v).unwrap().local_complement(v).unwrap(), g);
        }
    }

    #[test]
    fn complete_graph_orbit_reaches_star() {
        let s = lc_orbit_min_edges(&Graph::complete(5), 10_000);
        assert_eq!(s.min_edges, 4);
        assert_eq!(s.witness.len(), 1);
        assert!(!s.truncated);
        assert_eq!(Graph::complete(5).apply_lc_sequence(&s.witness).unwrap(), s.representative);
    }

    #[test]
    fn witness_inverts() {
        let g = Graph::encoded_ring_central(6).unwrap();
        let s = lc_orbit_min_edges(&g, 100_000);
        let mut back = s.witness.clone();
        back.reverse();
        assert_eq!(s.representative.apply_lc_sequence(&back).unwrap(), g);
    }

    #[test]
    fn truncation_is_flagged() {
        let s = lc_orbit_min_edges(&Graph::encoded_ring_central(6).unwrap(), 10);
        assert!(s.truncated);
        assert_eq!(s.visited, 10);
    }

    #[test]
    fn central_graph_minimum() {
        let g = Graph::encoded_ring_central(6).unwrap();
        assert_eq!(g.edge_count(), 24);
        let s = lc_orbit_min_edges(&g, 1_000_000);
        assert!(!s.truncated);
        assert_eq!(s.visited, 1908);
        assert_eq!(s.min_edges, 14);
        assert_eq!(s.representative.max_degree(), 4);
        assert_eq!(rus_schedule(&s.representative).len(), 4);
    }

    #[test]
    fn measurement_examples() {
        let star = Graph::star(5);
        let m = measure_pauli(&star, 4, Pauli::Z).unwrap();
        assert_eq!(m.edges(), vec![(0, 1), (0, 2), (0, 3)]);
        let y = measure_pauli(&Graph::path(3), 1, Pauli::Y).unwrap();
        assert_eq!(y.edges(), vec![(0, 2)]);
        let pair = Graph::path(2);
        let z = measure_pauli(&measure_pauli(&pair, 0, Pauli::Z).unwrap(), 1, Pauli::Z).unwrap();
        assert_eq!(z.edge_count(), 0);
        let lone = Graph::empty(3).unwrap();
        assert_eq!(measure_pauli(&lone, 1, Pauli::X).unwrap(), lone);
    }

    #[test]
    fn schedule_examples() {
        let matching = Graph::from_edges(6, &[(0, 1), (2, 3), (4, 5)]).unwrap();
        assert_eq!(rus_schedule(&matching).len(), 1);
        assert_eq!(rus_schedule(&Graph::cycle(12)).len(), 2);
        assert!(rus_schedule(&Graph::empty(4).unwrap()).is_empty());
        // Petersen graph is class 2
        let petersen = Graph::from_edges(
            10,
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 5), (1, 6), (2, 7), (3, 8), (4, 9), (5, 7), (7, 9), (9, 6), (6, 8), (8, 5)],
        )
        .unwrap();
        assert_eq!(rus_schedule(&petersen).len(), 4);
    }

    fn assert_partition(g: &Graph, rounds: &[Round]) {
        let mut all: Vec<(usize, usize)> = rounds.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, g.edges());
        for r in rounds {
            let mut touched = 0u64;
            for &(u, v) in r {
                assert_eq!(touched & (1 << u | 1 << v), 0, "round is not a matching");
                touched |= 1 << u | 1 << v;
            }
        }
        assert!(rounds.len() <= g.max_degree() + 1);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::encoded_ring(6).unwrap();
        assert_eq!(g.n(), 24);
        assert_eq!(g.edge_count(), 36);
        assert_eq!(Graph::parse_edge_list(&g.to_edge_list()).unwrap(), g);
        let json = serde_json::to_string(&g.to_adjacency_json()).unwrap();
        let back: AdjacencyJson = serde_json::from_str(&json).unwrap();
        assert_eq!(Graph::from_adjacency_json(&back).unwrap(), g);
    }

    #[test]
    fn edge_list_errors() {
        assert!(matches!(Graph::parse_edge_list("0 1\n1 1\n"), Err(Error::GraphParse { line: 2, .. })));
        assert!(matches!(Graph::parse_edge_list("0 x\n"), Err(Error::GraphParse { line: 1, .. })));
        assert!(matches!(Graph::parse_edge_list("vertices 2\n0 5\n"), Err(Error::GraphParse { line: 2, .. })));
        assert_eq!(Graph::parse_edge_list("# empty\n\nvertices 3\n").unwrap().n(), 3);
    }

    proptest! {
        #[test]
        fn schedules_partition_edges(n in 1usize..24, density in 0.0f64..1.0, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_graph(n, density, &mut rng);
            assert_partition(&g, &rus_schedule(&g));
        }

        #[test]
        fn orbit_membership_is_symmetric(n in 2usize..8, density in 0.2f64..0.9, seed in any::<u64>(), walk in prop::collection::vec(0usize..8, 0..12)) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_graph(n, density, &mut rng);
            let seq: Vec<usize> = walk.into_iter().map(|v| v % n).collect();
            let h = g.apply_lc_sequence(&seq).unwrap();
            let mut back = seq.clone();
            back.reverse();
            prop_assert_eq!(h.apply_lc_sequence(&back).unwrap(), g.clone());
            let (orbit_g, _) = lc_orbit(&g, 100_000);
            let (orbit_h, _) = lc_orbit(&h, 100_000);
            prop_assert!(orbit_g.contains(&h) && orbit_h.contains(&g));
        }
    }
}
