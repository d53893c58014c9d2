//! Outlier clustering by dynamic programming over a minimum spanning tree.
//!
//! On resilient instances every optimal cluster is a subtree of the MST, so
//! it suffices to partition the tree. The tree is first made binary by
//! inserting dummy vertices, which sit at distance 0 from everything, may
//! join clusters, are never centers and never count as outliers.
//!
//! `COST(u, j, t, c)` is the cheapest way to split the subtree of `u` into
//! `j` clusters with `t` outliers, where `u` belongs to the cluster centered
//! at `c` (or is an outlier when `c` is empty). The cluster of `c` counts
//! towards `j` even when `c` lies outside the subtree.

use crate::error::{Error, Result};
use crate::instance::{Clustering, Instance, Objective};
use crate::scalar::Scalar;

/// Minimum spanning tree by Kruskal over edges sorted by `(d, u, v)`.
pub fn build_mst<S: Scalar>(inst: &Instance<S>) -> Result<Vec<(usize, usize)>> {
    if !inst.is_symmetric() {
        return Err(Error::AsymmetricUnsupported);
    }
    let n = inst.n();
    let mut edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    edges.sort_by(|&(a, b), &(c, d)| {
        inst.d(a, b)
            .total_cmp(inst.d(c, d))
            .then((a, b).cmp(&(c, d)))
    });
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut tree = Vec::with_capacity(n.saturating_sub(1));
    for (u, v) in edges {
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru != rv {
            parent[ru] = rv;
            tree.push((u, v));
            if tree.len() + 1 == n {
                break;
            }
        }
    }
    Ok(tree)
}

/// Rooted binary tree over the points `0..n` and dummy nodes `n..`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryTree {
    n: usize,
    root: usize,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl BinaryTree {
    pub fn num_points(&self) -> usize {
        self.n
    }

    pub fn num_nodes(&self) -> usize {
        self.children.len()
    }

    pub fn num_dummies(&self) -> usize {
        self.num_nodes() - self.n
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn is_dummy(&self, node: usize) -> bool {
        node >= self.n
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    /// At most two children.
    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    pub fn left(&self, node: usize) -> Option<usize> {
        self.children[node].first().copied()
    }

    pub fn right(&self, node: usize) -> Option<usize> {
        self.children[node].get(1).copied()
    }

    /// Tree edges between points after contracting the dummy nodes, each
    /// as `(min, max)`, sorted.
    pub fn contract(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = (0..self.n)
            .filter_map(|v| {
                let mut p = self.parent[v]?;
                while self.is_dummy(p) {
                    p = self.parent[p].expect("dummies have parents");
                }
                Some((v.min(p), v.max(p)))
            })
            .collect();
        edges.sort_unstable();
        edges
    }

    fn post_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.num_nodes());
        let mut stack = vec![(self.root, false)];
        while let Some((u, done)) = stack.pop() {
            if done {
                order.push(u);
            } else {
                stack.push((u, true));
                for &c in self.children[u].iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        order
    }

    /// `inside[u][v]`: point `v` lies in the subtree of `u`.
    fn subtree_membership(&self, order: &[usize]) -> Vec<Vec<bool>> {
        let mut inside = vec![vec![false; self.n]; self.num_nodes()];
        for &u in order {
            if !self.is_dummy(u) {
                inside[u][u] = true;
            }
            for &c in &self.children[u] {
                for v in 0..self.n {
                    if inside[c][v] {
                        inside[u][v] = true;
                    }
                }
            }
        }
        inside
    }
}

/// Roots the tree at point 0 and, while a node has more than two children,
/// moves its first two children under a new dummy child appended last.
pub fn binarize(tree: &[(usize, usize)], n: usize) -> BinaryTree {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in tree {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        let mut kids: Vec<usize> = adj[u].iter().copied().filter(|&v| !seen[v]).collect();
        kids.sort_unstable();
        for &v in &kids {
            seen[v] = true;
            parent[v] = Some(u);
            stack.push(v);
        }
        children[u] = kids;
    }
    for u in 0..n {
        while children[u].len() > 2 {
            let dummy = children.len();
            let pair: Vec<usize> = children[u].drain(..2).collect();
            for &c in &pair {
                parent[c] = Some(dummy);
            }
            children.push(pair);
            parent.push(Some(u));
            children[u].push(dummy);
        }
    }
    BinaryTree {
        n,
        root: 0,
        parent,
        children,
    }
}

/// Optimal tree-structured clustering found by the dynamic program.
#[derive(Clone, Debug, PartialEq)]
pub struct DpSolution<S> {
    pub clustering: Clustering,
    pub cost: S,
}

#[derive(Clone, Copy, Debug)]
enum Choice {
    /// Children taken with their own centers (`None` for an outlier root).
    Own {
        jl: usize,
        tl: usize,
        cl: Option<usize>,
        cr: Option<usize>,
    },
    /// Left child in the cluster of `c`, right child on its own.
    LeftJoins {
        jl: usize,
        tl: usize,
        cr: Option<usize>,
    },
    RightJoins {
        jl: usize,
        tl: usize,
        cl: Option<usize>,
    },
    BothJoin {
        jl: usize,
        tl: usize,
    },
}

struct Entry<S> {
    value: S,
    choice: Choice,
}

/// Dense table over `(j, t, c)` with `c = n` standing for the empty center.
struct Table<S> {
    z: usize,
    n: usize,
    cells: Vec<Option<Entry<S>>>,
}

impl<S: Scalar> Table<S> {
    fn new(k: usize, z: usize, n: usize) -> Self {
        let mut cells = Vec::new();
        cells.resize_with((k + 1) * (z + 1) * (n + 1), || None);
        Self { z, n, cells }
    }

    fn idx(&self, j: usize, t: usize, c: Option<usize>) -> usize {
        (j * (self.z + 1) + t) * (self.n + 1) + c.unwrap_or(self.n)
    }

    fn get(&self, j: usize, t: usize, c: Option<usize>) -> Option<&Entry<S>> {
        self.cells[self.idx(j, t, c)].as_ref()
    }

    fn value(&self, j: usize, t: usize, c: Option<usize>) -> Option<&S> {
        self.get(j, t, c).map(|e| &e.value)
    }
}

/// Cheapest entry of a child over centers inside its subtree or empty.
/// A missing child only admits `(0, 0)` at cost 0.
struct OwnBest<S> {
    best: Vec<Option<(S, Option<usize>)>>,
    z: usize,
}

impl<S: Scalar> OwnBest<S> {
    fn get(&self, j: usize, t: usize) -> Option<&(S, Option<usize>)> {
        self.best[j * (self.z + 1) + t].as_ref()
    }
}

fn own_best<S: Scalar>(
    table: Option<&Table<S>>,
    inside: Option<&[bool]>,
    k: usize,
    z: usize,
    n: usize,
) -> OwnBest<S> {
    let mut best = vec![None; (k + 1) * (z + 1)];
    match (table, inside) {
        (Some(table), Some(inside)) => {
            for j in 0..=k {
                for t in 0..=z {
                    let mut cur: Option<(S, Option<usize>)> = None;
                    let centers = (0..n).filter(|&c| inside[c]).map(Some).chain([None]);
                    for c in centers {
                        if let Some(v) = table.value(j, t, c) {
                            if cur.as_ref().is_none_or(|(b, _)| v.definitely_lt(b)) {
                                cur = Some((v.clone(), c));
                            }
                        }
                    }
                    best[j * (z + 1) + t] = cur;
                }
            }
        }
        _ => best[0] = Some((S::zero(), None)),
    }
    OwnBest { best, z }
}

/// Fills `COST` bottom-up and reconstructs the cheapest solution with `k`
/// clusters and at most `z` counted outliers. For k-center the sums become
/// maxima.
pub fn solve_btp<S: Scalar>(
    inst: &Instance<S>,
    btree: &BinaryTree,
    obj: Objective,
) -> Result<DpSolution<S>> {
    let (n, k, z) = (inst.n(), inst.k(), inst.z());
    let order = btree.post_order();
    let inside = btree.subtree_membership(&order);
    let mut tables: Vec<Option<Table<S>>> = (0..btree.num_nodes()).map(|_| None).collect();
    let add = |a: &S, b: &S| obj.combine(a.clone(), b.clone());

    for &u in &order {
        let (l, r) = (btree.left(u), btree.right(u));
        let lt = l.and_then(|l| tables[l].as_ref());
        let rt = r.and_then(|r| tables[r].as_ref());
        let lo = own_best(lt, l.map(|l| inside[l].as_slice()), k, z, n);
        let ro = own_best(rt, r.map(|r| inside[r].as_slice()), k, z, n);
        let in_l = |c: usize| l.is_some_and(|l| inside[l][c]);
        let in_r = |c: usize| r.is_some_and(|r| inside[r][c]);
        let mut table = Table::new(k, z, n);

        for j in 0..=k {
            for t in 0..=z {
                // u is an outlier; a dummy one is not counted.
                let budget = if btree.is_dummy(u) {
                    Some(t)
                } else {
                    t.checked_sub(1)
                };
                if let Some(tt) = budget {
                    let mut best: Option<Entry<S>> = None;
                    for jl in 0..=j {
                        for tl in 0..=tt {
                            let (Some((a, cl)), Some((b, cr))) =
                                (lo.get(jl, tl), ro.get(j - jl, tt - tl))
                            else {
                                continue;
                            };
                            let v = add(a, b);
                            if best.as_ref().is_none_or(|e| v.definitely_lt(&e.value)) {
                                let choice = Choice::Own {
                                    jl,
                                    tl,
                                    cl: *cl,
                                    cr: *cr,
                                };
                                best = Some(Entry { value: v, choice });
                            }
                        }
                    }
                    let i = table.idx(j, t, None);
                    table.cells[i] = best;
                }

                for c in 0..n {
                    let mut best: Option<Entry<S>> = None;
                    let mut offer = |v: S, choice: Choice| {
                        if best.as_ref().is_none_or(|e| v.definitely_lt(&e.value)) {
                            best = Some(Entry { value: v, choice });
                        }
                    };
                    let (cl_in, cr_in) = (in_l(c), in_r(c));
                    // (1) neither child joins u's cluster.
                    if !cl_in && !cr_in && j >= 1 {
                        for jl in 0..j {
                            for tl in 0..=t {
                                if let (Some((a, cl)), Some((b, cr))) =
                                    (lo.get(jl, tl), ro.get(j - 1 - jl, t - tl))
                                {
                                    offer(
                                        add(a, b),
                                        Choice::Own {
                                            jl,
                                            tl,
                                            cl: *cl,
                                            cr: *cr,
                                        },
                                    );
                                }
                            }
                        }
                    }
                    // (2) only the right child joins.
                    if !cl_in {
                        if let Some(rt) = rt {
                            for jl in 0..=j {
                                for tl in 0..=t {
                                    if let (Some((a, cl)), Some(b)) =
                                        (lo.get(jl, tl), rt.value(j - jl, t - tl, Some(c)))
                                    {
                                        offer(add(a, b), Choice::RightJoins { jl, tl, cl: *cl });
                                    }
                                }
                            }
                        }
                    }
                    // (3) only the left child joins.
                    if !cr_in {
                        if let Some(lt) = lt {
                            for jl in 0..=j {
                                for tl in 0..=t {
                                    if let (Some(a), Some((b, cr))) =
                                        (lt.value(jl, tl, Some(c)), ro.get(j - jl, t - tl))
                                    {
                                        offer(add(a, b), Choice::LeftJoins { jl, tl, cr: *cr });
                                    }
                                }
                            }
                        }
                    }
                    // (4) both children join; their shared cluster is counted twice.
                    if let (Some(lt), Some(rt)) = (lt, rt) {
                        for jl in 1..=j {
                            let jr = j + 1 - jl;
                            for tl in 0..=t {
                                if let (Some(a), Some(b)) =
                                    (lt.value(jl, tl, Some(c)), rt.value(jr, t - tl, Some(c)))
                                {
                                    offer(add(a, b), Choice::BothJoin { jl, tl });
                                }
                            }
                        }
                    }
                    if let Some(mut e) = best {
                        if !btree.is_dummy(u) {
                            e.value = add(&obj.term(inst.d(c, u)), &e.value);
                        }
                        let i = table.idx(j, t, Some(c));
                        table.cells[i] = Some(e);
                    }
                }
            }
        }
        tables[u] = Some(table);
    }

    let root = btree.root();
    let root_table = tables[root].as_ref().expect("root processed");
    let mut answer: Option<(S, usize, Option<usize>)> = None;
    for t in 0..=z {
        for c in (0..n).map(Some).chain([None]) {
            if let Some(v) = root_table.value(k, t, c) {
                if answer.as_ref().is_none_or(|(b, _, _)| v.definitely_lt(b)) {
                    answer = Some((v.clone(), t, c));
                }
            }
        }
    }
    let (value, t, c) = answer.ok_or(Error::Infeasible { k, z })?;

    let mut label: Vec<Option<usize>> = vec![None; btree.num_nodes()];
    let mut stack = vec![(root, k, t, c)];
    while let Some((u, j, t, c)) = stack.pop() {
        let table = tables[u].as_ref().expect("table");
        let entry = table
            .get(j, t, c)
            .expect("reconstruction follows finite entries");
        label[u] = c;
        let (l, r) = (btree.left(u), btree.right(u));
        let t_rest = if c.is_none() && !btree.is_dummy(u) {
            t - 1
        } else {
            t
        };
        let j_rest = match (c, entry.choice) {
            (Some(_), Choice::Own { .. }) => j - 1,
            (Some(_), Choice::BothJoin { .. }) => j + 1,
            _ => j,
        };
        let (jl, tl, cl, cr) = match entry.choice {
            Choice::Own { jl, tl, cl, cr } => (jl, tl, cl, cr),
            Choice::LeftJoins { jl, tl, cr } => (jl, tl, c, cr),
            Choice::RightJoins { jl, tl, cl } => (jl, tl, cl, c),
            Choice::BothJoin { jl, tl } => (jl, tl, c, c),
        };
        if let Some(l) = l {
            stack.push((l, jl, tl, cl));
        }
        if let Some(r) = r {
            stack.push((r, j_rest - jl, t_rest - tl, cr));
        }
    }

    let mut centers: Vec<usize> = label[..n].iter().flatten().copied().collect();
    centers.sort_unstable();
    centers.dedup();
    let assignment = label[..n]
        .iter()
        .map(|c| c.map(|c| centers.binary_search(&c).expect("center labelled")))
        .collect();
    let clustering = Clustering::new(assignment, centers)?;
    Ok(DpSolution {
        clustering,
        cost: value,
    })
}

/// MST, binarisation and the dynamic program in sequence. Exact on
/// instances whose optimal clusters are subtrees of the MST; on other inputs
/// the result is the best tree-structured clustering.
pub fn solve_outlier_clustering<S: Scalar>(
    inst: &Instance<S>,
    obj: Objective,
) -> Result<Clustering> {
    let tree = build_mst(inst)?;
    let btree = binarize(&tree, inst.n());
    Ok(solve_btp(inst, &btree, obj)?.clustering)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::cost;
    use crate::scalar::Rational;

    fn points(xs: &[i64], k: usize, z: usize) -> Instance<Rational> {
        Instance::from_fn(xs.len(), true, k, z, |u, v| {
            Rational::from_i64((xs[u] - xs[v]).abs())
        })
        .unwrap()
    }

    fn star(leaves: usize) -> Vec<(usize, usize)> {
        (1..=leaves).map(|v| (0, v)).collect()
    }

    #[test]
    fn mst_of_line() {
        assert_eq!(build_mst(&points(&[0, 1], 1, 0)).unwrap(), vec![(0, 1)]);
        assert_eq!(
            build_mst(&points(&[0, 1, 10, 11], 2, 0)).unwrap(),
            vec![(0, 1), (2, 3), (1, 2)]
        );
    }

    #[test]
    fn binarize_counts_dummies() {
        let path = binarize(&[(0, 1), (1, 2), (2, 3)], 4);
        assert_eq!(path.num_dummies(), 0);
        let s3 = binarize(&star(3), 4);
        assert_eq!(s3.num_dummies(), 1);
        let s5 = binarize(&star(5), 6);
        assert_eq!(s5.num_dummies(), 3);
        for node in 0..s5.num_nodes() {
            assert!(s5.children(node).len() <= 2);
        }
        let mut original = star(5);
        original.sort_unstable();
        assert_eq!(s5.contract(), original);
    }

    #[test]
    fn singletons_cost_zero() {
        let inst = points(&[0, 1, 10, 11], 4, 0);
        let sol = solve_btp(
            &inst,
            &binarize(&build_mst(&inst).unwrap(), 4),
            Objective::KMedian,
        )
        .unwrap();
        assert_eq!(sol.cost, Rational::from_i64(0));
        assert_eq!(sol.clustering.cluster_sizes(), vec![1; 4]);
    }

    #[test]
    fn line_kmedian() {
        let inst = points(&[0, 1, 10, 11], 2, 0);
        let clus = solve_outlier_clustering(&inst, Objective::KMedian).unwrap();
        assert_eq!(
            cost(&inst, &clus, Objective::KMedian).unwrap(),
            Rational::from_i64(2)
        );
        assert_eq!(
            clus.partition_key(),
            vec![Some(0), Some(0), Some(1), Some(1)]
        );
    }

    #[test]
    fn line_with_outlier() {
        let inst = points(&[0, 1, 10, 11, 100], 2, 1);
        let clus = solve_outlier_clustering(&inst, Objective::KMedian).unwrap();
        assert_eq!(
            cost(&inst, &clus, Objective::KMedian).unwrap(),
            Rational::from_i64(2)
        );
        assert_eq!(clus.outliers(), vec![4]);
    }

    #[test]
    fn star_with_dummies_matches_direct_cost() {
        // Center 0 with leaves at 1, 2, 3, 4 and a far group {5, 6}.
        let pos: [(i64, i64); 7] = [(0, 0), (1, 0), (0, 1), (-1, 0), (0, -1), (20, 0), (21, 0)];
        let d = |u: usize, v: usize| (pos[u].0 - pos[v].0).abs() + (pos[u].1 - pos[v].1).abs();
        let inst = Instance::from_fn(7, true, 2, 1, |u, v| Rational::from_i64(d(u, v))).unwrap();
        for obj in [Objective::KMedian, Objective::KMeans, Objective::KCenter] {
            let tree = build_mst(&inst).unwrap();
            let sol = solve_btp(&inst, &binarize(&tree, 7), obj).unwrap();
            assert_eq!(
                cost(&inst, &sol.clustering, obj).unwrap(),
                sol.cost,
                "{obj}"
            );
            assert!(sol.clustering.outlier_count() <= 1);
        }
    }

    #[test]
    fn rejects_asymmetric() {
        let inst = Instance::from_fn(2, false, 1, 0, |u, v| {
            (u != v) as i64 as f64 * (1 + u) as f64
        })
        .unwrap();
        assert_eq!(build_mst(&inst), Err(Error::AsymmetricUnsupported));
    }
}
