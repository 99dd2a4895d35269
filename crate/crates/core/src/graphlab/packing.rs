use std::collections::VecDeque;

use serde::Serialize;

use super::graph::WeightedGraph;
use crate::error::{Error, Result};

/// Edge-disjoint spanning trees found by [`disjoint_spanning_trees`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreePacking {
    /// Edge masks, one per tree.
    pub trees: Vec<u64>,
    pub found: usize,
    /// Whether `found` reached the requested count.
    pub complete: bool,
}

/// Up to `want` edge-disjoint spanning trees using edges of `within`.
///
/// Matroid partition over `k` copies of the graphic matroid: each edge is
/// inserted along a shortest exchange path, which yields a maximum-size
/// union of `k` forests. `k` starts at `want` and decreases until the
/// union consists of `k` spanning trees, so the result is the largest
/// feasible packing up to `want`.
pub fn disjoint_spanning_trees(g: &WeightedGraph, within: u64, want: usize) -> Result<TreePacking> {
    if !g.is_connected_on(within) {
        return Err(Error::NoBasis("edge set is not connected".into()));
    }
    let n = g.n();
    if n <= 1 {
        return Ok(TreePacking {
            trees: vec![0; want],
            found: want,
            complete: true,
        });
    }
    let edges: Vec<usize> = (0..g.m()).filter(|&i| within >> i & 1 == 1).collect();
    let cap = edges.len() / (n - 1);
    for k in (1..=want.min(cap)).rev() {
        let forests = partition(g, &edges, k);
        if forests.iter().all(|f| f.count_ones() as usize == n - 1) {
            return Ok(TreePacking {
                trees: forests,
                found: k,
                complete: k == want,
            });
        }
    }
    // connected, so one tree always exists; reached only when want == 0
    Ok(TreePacking {
        trees: Vec::new(),
        found: 0,
        complete: want == 0,
    })
}

fn forest_path(g: &WeightedGraph, forest: u64, from: usize, to: usize) -> Option<Vec<usize>> {
    let n = g.n();
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            break;
        }
        for i in (0..g.m()).filter(|&i| forest >> i & 1 == 1) {
            let e = g.edges()[i];
            let w = if e.u == u {
                e.v
            } else if e.v == u {
                e.u
            } else {
                continue;
            };
            if !seen[w] {
                seen[w] = true;
                prev[w] = Some((u, i));
                queue.push_back(w);
            }
        }
    }
    if !seen[to] {
        return None;
    }
    let mut path = Vec::new();
    let mut cur = to;
    while let Some((p, e)) = prev[cur] {
        path.push(e);
        cur = p;
    }
    Some(path)
}

fn partition(g: &WeightedGraph, edges: &[usize], k: usize) -> Vec<u64> {
    let mut forests = vec![0u64; k];
    let mut owner: Vec<Option<usize>> = vec![None; g.m()];
    for &s in edges {
        augment(g, &mut forests, &mut owner, s);
    }
    forests
}

/// Tries to add edge `s` to the union of forests by a shortest exchange
/// sequence. Returns whether the union grew.
fn augment(g: &WeightedGraph, forests: &mut [u64], owner: &mut [Option<usize>], s: usize) -> bool {
    // label[y] = (x, i): x enters forest i, evicting y from it
    let mut label: Vec<Option<(usize, usize)>> = vec![None; g.m()];
    let mut visited = vec![false; g.m()];
    visited[s] = true;
    let mut queue = VecDeque::from([s]);
    while let Some(x) = queue.pop_front() {
        let e = g.edges()[x];
        for i in 0..forests.len() {
            if owner[x] == Some(i) {
                continue;
            }
            match forest_path(g, forests[i], e.u, e.v) {
                None => {
                    // x fits into forest i; replay the chain back to s
                    let mut cur = x;
                    let mut target = i;
                    loop {
                        if let Some(old) = owner[cur] {
                            forests[old] &= !(1 << cur);
                        }
                        forests[target] |= 1 << cur;
                        owner[cur] = Some(target);
                        match label[cur] {
                            Some((prev, j)) => {
                                target = j;
                                cur = prev;
                            }
                            None => return true,
                        }
                    }
                }
                Some(cycle) => {
                    for y in cycle {
                        if !visited[y] {
                            visited[y] = true;
                            label[y] = Some((x, i));
                            queue.push_back(y);
                        }
                    }
                }
            }
        }
    }
    false
}

/// Checks that the masks are pairwise disjoint spanning trees.
pub fn is_tree_packing(g: &WeightedGraph, trees: &[u64]) -> bool {
    let mut used = 0u64;
    for &t in trees {
        if used & t != 0 || !g.is_spanning_tree(t) {
            return false;
        }
        used |= t;
    }
    true
}
