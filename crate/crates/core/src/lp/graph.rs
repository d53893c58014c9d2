use crate::instance::Instance;
use crate::scalar::Scalar;

/// Threshold graph `G_R`: `u -> v` whenever `d(u, v) <= R`. Every point is
/// its own neighbour.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdGraph<S> {
    pub radius: S,
    /// `out_nbr[v] = {u : d(v, u) <= R}`, sorted.
    pub out_nbr: Vec<Vec<usize>>,
    /// `in_nbr[v] = {u : d(u, v) <= R}`, sorted.
    pub in_nbr: Vec<Vec<usize>>,
}

pub fn build_threshold_graph<S: Scalar>(inst: &Instance<S>, radius: &S) -> ThresholdGraph<S> {
    let n = inst.n();
    let mut out_nbr = vec![Vec::new(); n];
    let mut in_nbr = vec![Vec::new(); n];
    for u in 0..n {
        for v in 0..n {
            if u == v || inst.d(u, v).approx_le(radius) {
                out_nbr[u].push(v);
                in_nbr[v].push(u);
            }
        }
    }
    ThresholdGraph {
        radius: radius.clone(),
        out_nbr,
        in_nbr,
    }
}

impl<S: Scalar> ThresholdGraph<S> {
    pub fn n(&self) -> usize {
        self.out_nbr.len()
    }

    /// Weakly connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut label = vec![usize::MAX; n];
        let mut comps = Vec::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut stack = vec![start];
            let mut members = Vec::new();
            label[start] = id;
            while let Some(u) = stack.pop() {
                members.push(u);
                for &v in self.out_nbr[u].iter().chain(&self.in_nbr[u]) {
                    if label[v] == usize::MAX {
                        label[v] = id;
                        stack.push(v);
                    }
                }
            }
            members.sort_unstable();
            comps.push(members);
        }
        comps
    }

    /// Number of directed edges, self-loops included.
    pub fn edge_count(&self) -> usize {
        self.out_nbr.iter().map(Vec::len).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> Instance<f64> {
        let xs = [0.0, 1.0, 10.0, 11.0];
        Instance::from_fn(4, true, 2, 0, |u, v| f64::abs(xs[u] - xs[v])).unwrap()
    }

    #[test]
    fn zero_radius_has_only_self_loops() {
        let g = build_threshold_graph(&line(), &0.0);
        for v in 0..4 {
            assert_eq!(g.in_nbr[v], vec![v]);
            assert_eq!(g.out_nbr[v], vec![v]);
        }
    }

    #[test]
    fn large_radius_is_complete() {
        let g = build_threshold_graph(&line(), &11.0);
        assert_eq!(g.edge_count(), 16);
        assert_eq!(g.components(), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn unit_radius_splits_the_line() {
        let g = build_threshold_graph(&line(), &1.0);
        assert_eq!(g.components(), vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn asymmetric_neighbourhoods_differ() {
        let d = [[0.0, 1.0], [3.0, 0.0]];
        let inst = Instance::from_fn(2, false, 1, 0, |u, v| d[u][v]).unwrap();
        let g = build_threshold_graph(&inst, &1.0);
        assert_eq!(g.out_nbr[0], vec![0, 1]);
        assert_eq!(g.in_nbr[0], vec![0]);
        assert_eq!(g.in_nbr[1], vec![0, 1]);
        assert_eq!(g.components().len(), 1);
    }
}
