//! HDBSCAN: mutual-reachability MST, condensed tree and excess-of-mass
//! cluster selection. Noise is labelled `-1`.

use std::collections::VecDeque;

use ndarray::ArrayView2;

use crate::linalg;
use crate::scalar::Scalar;

pub const NOISE: i64 = -1;

/// Lambda used for zero-length edges (duplicate points).
const LAMBDA_CAP: f64 = 1e200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hdbscan {
    pub min_cluster_size: usize,
    /// Neighbour count for core distances, counting the point itself.
    pub min_samples: usize,
}

impl Hdbscan {
    pub fn new(min_cluster_size: usize) -> Self {
        Hdbscan {
            min_cluster_size,
            min_samples: min_cluster_size,
        }
    }

    pub fn fit<F: Scalar>(&self, y: ArrayView2<'_, F>) -> Vec<i64> {
        let n = y.nrows();
        let mcs = self.min_cluster_size.max(2);
        if n < mcs {
            return vec![NOISE; n];
        }
        let dist = linalg::pairwise_euclidean(y);
        let dist = |i: usize, j: usize| dist[[i, j]].to_f64_lossy();

        let k = self.min_samples.clamp(1, n);
        let core: Vec<f64> = (0..n)
            .map(|i| {
                let mut row: Vec<f64> = (0..n).map(|j| dist(i, j)).collect();
                row.sort_by(f64::total_cmp);
                row[k - 1]
            })
            .collect();
        let mreach = |i: usize, j: usize| dist(i, j).max(core[i]).max(core[j]);

        let mut edges = prim_mst(n, mreach);
        edges.sort_by(|a, b| a.2.total_cmp(&b.2));
        let tree = single_linkage(n, &edges);
        let condensed = condense(&tree, n, mcs);
        let selected = select_eom(&condensed, n);
        label_points(&condensed, &selected, n)
    }
}

/// Density clustering with `min_samples = min_cluster_size`.
pub fn density_cluster<F: Scalar>(y: ArrayView2<'_, F>, min_cluster_size: usize) -> Vec<i64> {
    Hdbscan::new(min_cluster_size).fit(y)
}

/// Prim's algorithm on the dense graph; ties keep the lower vertex index.
fn prim_mst(n: usize, w: impl Fn(usize, usize) -> f64) -> Vec<(usize, usize, f64)> {
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let mut next = usize::MAX;
        let mut next_w = f64::INFINITY;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let d = w(current, j);
            if d < best[j] {
                best[j] = d;
                parent[j] = current;
            }
            if next == usize::MAX || best[j] < next_w {
                next = j;
                next_w = best[j];
            }
        }
        in_tree[next] = true;
        edges.push((parent[next], next, next_w));
        current = next;
    }
    edges
}

#[derive(Debug, Clone, Copy)]
struct Merge {
    left: usize,
    right: usize,
    distance: f64,
    size: usize,
}

/// Single-linkage dendrogram; node `n + i` is the i-th merge.
fn single_linkage(n: usize, sorted_edges: &[(usize, usize, f64)]) -> Vec<Merge> {
    let mut parent: Vec<usize> = (0..2 * n).collect();
    let mut size = vec![1usize; 2 * n];
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for (i, &(a, b, d)) in sorted_edges.iter().enumerate() {
        let ra = find(&mut parent, a);
        let rb = find(&mut parent, b);
        let node = n + i;
        parent[ra] = node;
        parent[rb] = node;
        size[node] = size[ra] + size[rb];
        merges.push(Merge {
            left: ra,
            right: rb,
            distance: d,
            size: size[node],
        });
    }
    merges
}

/// One row of the condensed tree: `child` left `parent` at `lambda`.
/// Clusters are numbered from `n` (the root); points are `< n`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct CondensedEdge {
    parent: usize,
    child: usize,
    lambda: f64,
    size: usize,
}

fn lambda_of(distance: f64) -> f64 {
    if distance > 0.0 {
        (1.0 / distance).min(LAMBDA_CAP)
    } else {
        LAMBDA_CAP
    }
}

fn condense(tree: &[Merge], n: usize, min_cluster_size: usize) -> Vec<CondensedEdge> {
    let root = 2 * n - 2;
    let node_size = |x: usize| if x < n { 1 } else { tree[x - n].size };
    let mut relabel = vec![0usize; 2 * n - 1];
    relabel[root] = n;
    let mut next_label = n + 1;
    let mut ignore = vec![false; 2 * n - 1];
    let mut out = Vec::new();

    let leaves_under = |start: usize| -> Vec<usize> {
        let mut stack = vec![start];
        let mut found = Vec::new();
        while let Some(x) = stack.pop() {
            if x < n {
                found.push(x);
            } else {
                stack.push(tree[x - n].right);
                stack.push(tree[x - n].left);
            }
        }
        found
    };

    let mut queue = VecDeque::from([root]);
    while let Some(node) = queue.pop_front() {
        if node < n {
            continue;
        }
        let m = tree[node - n];
        queue.push_back(m.left);
        queue.push_back(m.right);
        if ignore[node] {
            continue;
        }
        let lambda = lambda_of(m.distance);
        let (ls, rs) = (node_size(m.left), node_size(m.right));
        let big_l = ls >= min_cluster_size;
        let big_r = rs >= min_cluster_size;
        let here = relabel[node];
        let shed = |side: usize, out: &mut Vec<CondensedEdge>, ignore: &mut [bool]| {
            for leaf in leaves_under(side) {
                out.push(CondensedEdge {
                    parent: here,
                    child: leaf,
                    lambda,
                    size: 1,
                });
            }
            mark_subtree(tree, n, side, ignore);
        };
        match (big_l, big_r) {
            (true, true) => {
                for (side, size) in [(m.left, ls), (m.right, rs)] {
                    relabel[side] = next_label;
                    out.push(CondensedEdge {
                        parent: here,
                        child: next_label,
                        lambda,
                        size,
                    });
                    next_label += 1;
                }
            }
            (false, false) => {
                shed(m.left, &mut out, &mut ignore);
                shed(m.right, &mut out, &mut ignore);
            }
            (true, false) => {
                relabel[m.left] = here;
                shed(m.right, &mut out, &mut ignore);
            }
            (false, true) => {
                relabel[m.right] = here;
                shed(m.left, &mut out, &mut ignore);
            }
        }
    }
    out
}

fn mark_subtree(tree: &[Merge], n: usize, start: usize, ignore: &mut [bool]) {
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        ignore[x] = true;
        if x >= n {
            stack.push(tree[x - n].left);
            stack.push(tree[x - n].right);
        }
    }
}

/// Excess-of-mass selection; the root is never selected. Returns a flag per
/// cluster label offset by `n`.
fn select_eom(condensed: &[CondensedEdge], n: usize) -> Vec<bool> {
    let n_clusters = condensed
        .iter()
        .map(|e| e.parent.max(if e.child >= n { e.child } else { 0 }))
        .max()
        .map_or(1, |m| m - n + 1);
    let mut birth = vec![0.0f64; n_clusters];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n_clusters];
    for e in condensed.iter().filter(|e| e.child >= n) {
        birth[e.child - n] = e.lambda;
        children[e.parent - n].push(e.child - n);
    }
    let mut stability = vec![0.0f64; n_clusters];
    for e in condensed {
        let p = e.parent - n;
        stability[p] += (e.lambda - birth[p]) * e.size as f64;
    }

    let mut selected = vec![false; n_clusters];
    // children always carry larger labels than their parent
    for c in (1..n_clusters).rev() {
        let child_sum: f64 = children[c].iter().map(|&k| stability[k]).sum();
        if children[c].is_empty() {
            selected[c] = true;
        } else if child_sum > stability[c] {
            selected[c] = false;
            stability[c] = child_sum;
        } else {
            selected[c] = true;
            let mut stack = children[c].clone();
            while let Some(k) = stack.pop() {
                selected[k] = false;
                stack.extend(children[k].iter().copied());
            }
        }
    }
    selected
}

fn label_points(condensed: &[CondensedEdge], selected: &[bool], n: usize) -> Vec<i64> {
    let mut cluster_parent = vec![usize::MAX; selected.len()];
    let mut point_parent = vec![usize::MAX; n];
    for e in condensed {
        if e.child >= n {
            cluster_parent[e.child - n] = e.parent - n;
        } else {
            point_parent[e.child] = e.parent - n;
        }
    }
    let owner = |mut c: usize| -> Option<usize> {
        loop {
            if selected[c] {
                return Some(c);
            }
            if c == 0 || cluster_parent[c] == usize::MAX {
                return None;
            }
            c = cluster_parent[c];
        }
    };
    let mut dense: Vec<Option<i64>> = vec![None; selected.len()];
    let mut next = 0i64;
    (0..n)
        .map(|i| {
            let Some(c) = (point_parent[i] != usize::MAX)
                .then(|| owner(point_parent[i]))
                .flatten()
            else {
                return NOISE;
            };
            *dense[c].get_or_insert_with(|| {
                next += 1;
                next - 1
            })
        })
        .collect()
}
