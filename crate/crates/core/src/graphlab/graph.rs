use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::stablepoly::VectorSystem;

/// Edge `u → v` with positive weight. The orientation fixes the sign of the
/// incidence vector `b_e = e_u − e_v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Undirected weighted multigraph without self-loops.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
}

/// Union–find over vertices.
#[derive(Clone, Debug)]
pub struct Dsu {
    parent: Vec<usize>,
    parts: usize,
}

impl Dsu {
    pub fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
            parts: n,
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the classes of `a` and `b`; false if already merged.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        self.parts -= 1;
        true
    }

    pub fn parts(&self) -> usize {
        self.parts
    }
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        for (i, e) in edges.iter().enumerate() {
            if e.u >= n || e.v >= n {
                return Err(Error::InvalidInput(format!(
                    "edge {i} has an endpoint outside 0..{n}"
                )));
            }
            if e.u == e.v {
                return Err(Error::InvalidInput(format!("edge {i} is a self-loop")));
            }
            if !(e.w.is_finite() && e.w > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "edge {i} has non-positive weight {}",
                    e.w
                )));
            }
        }
        Ok(WeightedGraph { n, edges })
    }

    /// Unit-weight graph from endpoint pairs.
    pub fn unweighted(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::new(
            n,
            pairs.iter().map(|&(u, v)| Edge { u, v, w: 1.0 }).collect(),
        )
    }

    pub fn complete(n: usize) -> Self {
        let pairs: Vec<_> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        Self::unweighted(n, &pairs).expect("valid complete graph")
    }

    pub fn cycle(n: usize) -> Self {
        let pairs: Vec<_> = (0..n).map(|u| (u, (u + 1) % n)).collect();
        Self::unweighted(n, &pairs).expect("valid cycle")
    }

    pub fn path(n: usize) -> Self {
        let pairs: Vec<_> = (1..n).map(|u| (u - 1, u)).collect();
        Self::unweighted(n, &pairs).expect("valid path")
    }

    /// Parses an edge list: one `u v [w]` per line, 0-indexed, `#` comments.
    /// The vertex count is one more than the largest index seen.
    pub fn parse(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut n = 0;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::Parse {
                line: ln + 1,
                msg: msg.to_string(),
            };
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.len() < 2 || tok.len() > 3 {
                return Err(bad("expected `u v [w]`"));
            }
            let u: usize = tok[0].parse().map_err(|_| bad("bad vertex index"))?;
            let v: usize = tok[1].parse().map_err(|_| bad("bad vertex index"))?;
            let w = match tok.get(2) {
                Some(t) => rational::to_f64(&rational::parse(t).map_err(|_| bad("bad weight"))?),
                None => 1.0,
            };
            if u == v {
                return Err(bad("self-loop"));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(bad("weight must be positive"));
            }
            n = n.max(u + 1).max(v + 1);
            edges.push(Edge { u, v, w });
        }
        Self::new(n, edges)
    }

    pub fn to_text(&self) -> String {
        self.edges
            .iter()
            .map(|e| {
                if e.w == 1.0 {
                    format!("{} {}\n", e.u, e.v)
                } else {
                    format!("{} {} {}\n", e.u, e.v, e.w)
                }
            })
            .collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Mask of all edges; requires at most 64 edges.
    pub fn all_edges(&self) -> Result<u64> {
        match self.m() {
            64 => Ok(u64::MAX),
            m if m < 64 => Ok((1u64 << m) - 1),
            m => Err(Error::BudgetExceeded {
                what: "edge count for subset masks",
                needed: m as u128,
                budget: 64,
            }),
        }
    }

    fn edge_indices(&self, mask: u64) -> impl Iterator<Item = usize> + '_ {
        (0..self.m()).filter(move |&i| mask >> i & 1 == 1)
    }

    /// Connected-component partition of the edge subset.
    pub fn dsu_of(&self, mask: u64) -> Dsu {
        let mut dsu = Dsu::new(self.n);
        for i in self.edge_indices(mask) {
            dsu.union(self.edges[i].u, self.edges[i].v);
        }
        dsu
    }

    pub fn is_connected_on(&self, mask: u64) -> bool {
        self.n <= 1 || self.dsu_of(mask).parts() == 1
    }

    pub fn is_connected(&self) -> bool {
        let mut dsu = Dsu::new(self.n);
        for e in &self.edges {
            dsu.union(e.u, e.v);
        }
        dsu.parts() <= 1
    }

    pub fn component_count(&self) -> usize {
        let mut dsu = Dsu::new(self.n);
        for e in &self.edges {
            dsu.union(e.u, e.v);
        }
        dsu.parts()
    }

    pub fn same_component(&self, a: usize, b: usize) -> bool {
        let mut dsu = Dsu::new(self.n);
        for e in &self.edges {
            dsu.union(e.u, e.v);
        }
        dsu.find(a) == dsu.find(b)
    }

    pub fn is_spanning_tree(&self, mask: u64) -> bool {
        mask.count_ones() as usize + 1 == self.n && self.is_connected_on(mask)
    }

    /// All spanning trees using only edges in `within`, as edge masks in
    /// increasing order. Fails once more than `budget` trees are found.
    pub fn spanning_trees(&self, within: u64, budget: u64) -> Result<Vec<u64>> {
        let edges: Vec<usize> = self.edge_indices(within).collect();
        let mut out = Vec::new();
        if self.n == 0 {
            return Ok(out);
        }
        self.enumerate_trees(&edges, 0, 0, &Dsu::new(self.n), budget, &mut out)?;
        out.sort_unstable();
        Ok(out)
    }

    fn enumerate_trees(
        &self,
        edges: &[usize],
        pos: usize,
        chosen: u64,
        dsu: &Dsu,
        budget: u64,
        out: &mut Vec<u64>,
    ) -> Result<()> {
        let (count, need) = (chosen.count_ones() as usize, self.n - 1);
        if count == need {
            out.push(chosen);
            if out.len() as u64 > budget {
                return Err(Error::BudgetExceeded {
                    what: "spanning tree enumeration",
                    needed: out.len() as u128,
                    budget: budget as u128,
                });
            }
            return Ok(());
        }
        if edges.len() - pos < need - count {
            return Ok(());
        }
        let e = edges[pos];
        let mut with = dsu.clone();
        if with.union(self.edges[e].u, self.edges[e].v) {
            self.enumerate_trees(edges, pos + 1, chosen | 1 << e, &with, budget, out)?;
        }
        // skipping e is only useful if the rest can still connect everything
        let mut rest = dsu.clone();
        for &f in &edges[pos + 1..] {
            rest.union(self.edges[f].u, self.edges[f].v);
        }
        if rest.parts() == 1 {
            self.enumerate_trees(edges, pos + 1, chosen, dsu, budget, out)?;
        }
        Ok(())
    }

    /// Total weight of edges in `mask` crossing the vertex cut `side`.
    pub fn cut_weight(&self, side: u64, mask: u64) -> f64 {
        self.edge_indices(mask)
            .filter(|&i| (side >> self.edges[i].u & 1) != (side >> self.edges[i].v & 1))
            .map(|i| self.edges[i].w)
            .sum()
    }

    fn cut_count(&self, side: u64, mask: u64) -> usize {
        self.edge_indices(mask)
            .filter(|&i| (side >> self.edges[i].u & 1) != (side >> self.edges[i].v & 1))
            .count()
    }

    /// Calls `f` with every vertex set containing vertex 0 other than `V`,
    /// i.e. one side of each nontrivial cut. Requires `n ≤ 24`.
    pub fn for_each_cut(&self, mut f: impl FnMut(u64)) -> Result<()> {
        check_cut_budget(self.n)?;
        if self.n < 2 {
            return Ok(());
        }
        let full = (1u64 << self.n) - 1;
        for rest in 0..(1u64 << (self.n - 1)) {
            let side = rest << 1 | 1;
            if side != full {
                f(side);
            }
        }
        Ok(())
    }

    /// Minimum number of edges (of `mask`) crossing a nontrivial cut.
    pub fn edge_connectivity_on(&self, mask: u64) -> Result<usize> {
        let mut best = usize::MAX;
        self.for_each_cut(|s| best = best.min(self.cut_count(s, mask)))?;
        Ok(if best == usize::MAX { 0 } else { best })
    }

    pub fn edge_connectivity(&self) -> Result<usize> {
        self.edge_connectivity_on(self.all_edges()?)
    }

    /// Reduced incidence vectors `b_e` with vertex 0 deleted, ignoring
    /// weights. Their determinantal measures are spanning-tree measures.
    pub fn reduced_incidence(&self) -> Result<VectorSystem> {
        let d = self.n.saturating_sub(1);
        let vectors = self
            .edges
            .iter()
            .map(|e| {
                let mut b = vec![Rational::from_integer(0.into()); d];
                if e.u > 0 {
                    b[e.u - 1] = rational::int(1);
                }
                if e.v > 0 {
                    b[e.v - 1] = rational::int(-1);
                }
                b
            })
            .collect();
        VectorSystem::new(d, vectors)
    }

    /// Spanning tree of the edges in `within` drawn with probability
    /// proportional to `Π_{e∈T} weight[e]`, by Wilson's algorithm.
    pub fn wilson_tree(&self, within: u64, weight: &[f64], rng: &mut impl Rng) -> Result<u64> {
        if !self.is_connected_on(within) {
            return Err(Error::NoBasis("edge set is not connected".into()));
        }
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.n];
        for i in self.edge_indices(within) {
            let e = self.edges[i];
            adj[e.u].push((e.v, i));
            adj[e.v].push((e.u, i));
        }
        let mut in_tree = vec![false; self.n];
        let mut next_edge = vec![usize::MAX; self.n];
        if self.n == 0 {
            return Ok(0);
        }
        in_tree[0] = true;
        for start in 1..self.n {
            let mut u = start;
            while !in_tree[u] {
                let total: f64 = adj[u].iter().map(|&(_, i)| weight[i]).sum();
                let mut r = rng.random::<f64>() * total;
                let mut pick = adj[u][adj[u].len() - 1];
                for &(v, i) in &adj[u] {
                    if r < weight[i] {
                        pick = (v, i);
                        break;
                    }
                    r -= weight[i];
                }
                next_edge[u] = pick.1;
                u = pick.0;
            }
            let mut u = start;
            while !in_tree[u] {
                in_tree[u] = true;
                let e = self.edges[next_edge[u]];
                u = if e.u == u { e.v } else { e.u };
            }
        }
        Ok((1..self.n).fold(0u64, |m, v| m | 1 << next_edge[v]))
    }
}

pub(crate) fn check_cut_budget(n: usize) -> Result<()> {
    if n > 24 {
        return Err(Error::BudgetExceeded {
            what: "cut enumeration vertex count",
            needed: n as u128,
            budget: 24,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parse_edge_list() {
        let g = WeightedGraph::parse("# triangle\n0 1\n1 2 2.5\n2 0\n").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edges()[1].w, 2.5);
        assert!(matches!(
            WeightedGraph::parse("0 0\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(WeightedGraph::parse("0 1 -1\n").is_err());
        assert!(WeightedGraph::parse("0 x\n").is_err());
    }

    #[test]
    fn spanning_tree_counts() {
        assert_eq!(
            WeightedGraph::complete(3)
                .spanning_trees(0b111, 100)
                .unwrap(),
            vec![0b011, 0b101, 0b110]
        );
        let k4 = WeightedGraph::complete(4);
        assert_eq!(
            k4.spanning_trees(k4.all_edges().unwrap(), 100)
                .unwrap()
                .len(),
            16
        );
        let k5 = WeightedGraph::complete(5);
        assert_eq!(
            k5.spanning_trees(k5.all_edges().unwrap(), 1000)
                .unwrap()
                .len(),
            125
        );
        assert!(k5.spanning_trees(k5.all_edges().unwrap(), 100).is_err());
        assert_eq!(
            WeightedGraph::cycle(4)
                .spanning_trees(0b1111, 10)
                .unwrap()
                .len(),
            4
        );
    }

    #[test]
    fn connectivity() {
        assert_eq!(WeightedGraph::complete(4).edge_connectivity().unwrap(), 3);
        assert_eq!(WeightedGraph::cycle(5).edge_connectivity().unwrap(), 2);
        assert_eq!(WeightedGraph::path(4).edge_connectivity().unwrap(), 1);
        let split = WeightedGraph::unweighted(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(!split.is_connected());
        assert_eq!(split.component_count(), 2);
    }

    #[test]
    fn wilson_returns_spanning_trees() {
        let g = WeightedGraph::complete(5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let t = g
                .wilson_tree(g.all_edges().unwrap(), &[1.0; 10], &mut rng)
                .unwrap();
            assert!(g.is_spanning_tree(t));
        }
    }
}
