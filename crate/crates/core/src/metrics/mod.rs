//! Graph measures and the ensemble convergence harness.

mod converge;

pub use converge::{
    convergence_experiment, convergence_point, write_convergence_csv, EnsembleReport, EnsembleStart,
    Metric, Trajectory, CSV_HEADER, MIN_ENSEMBLE,
};

use crate::ca::CommunityAssignment;
use crate::graph::{degrees, Edge, EdgeList};

/// Compressed adjacency with every edge stored from its lower-ranked
/// endpoint, ranks ordering nodes by `(degree, id)`.
struct Oriented {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

fn orient(edges: &[Edge], n: usize) -> Oriented {
    let deg = degrees(edges, n);
    let rank_key = |v: u64| (deg[v as usize], v);
    let mut out_deg = vec![0usize; n + 1];
    for e in edges {
        let s = if rank_key(e.u) < rank_key(e.v) { e.u } else { e.v };
        out_deg[s as usize + 1] += 1;
    }
    for i in 0..n {
        out_deg[i + 1] += out_deg[i];
    }
    let offsets = out_deg.clone();
    let mut fill = out_deg;
    let mut targets = vec![0u32; edges.len()];
    for e in edges {
        let (s, t) = if rank_key(e.u) < rank_key(e.v) { (e.u, e.v) } else { (e.v, e.u) };
        targets[fill[s as usize]] = t as u32;
        fill[s as usize] += 1;
    }
    for v in 0..n {
        targets[offsets[v]..offsets[v + 1]].sort_unstable();
    }
    Oriented { offsets, targets }
}

/// Calls `f(a, b, c)` once per triangle.
fn for_each_triangle(edges: &[Edge], n: usize, mut f: impl FnMut(u64, u64, u64)) {
    let g = orient(edges, n);
    let out = |v: usize| &g.targets[g.offsets[v]..g.offsets[v + 1]];
    for u in 0..n {
        let nu = out(u);
        for &v in nu {
            let nv = out(v as usize);
            let (mut i, mut j) = (0, 0);
            while i < nu.len() && j < nv.len() {
                match nu[i].cmp(&nv[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        f(u as u64, v as u64, nu[i] as u64);
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
    }
}

pub fn triangle_count(edges: &EdgeList) -> u64 {
    let mut t = 0;
    for_each_triangle(edges.as_slice(), edges.node_bound() as usize, |_, _, _| t += 1);
    t
}

/// Triangles through each of the nodes `0..n`.
pub fn local_triangles(edges: &EdgeList, n: usize) -> Vec<u64> {
    let n = n.max(edges.node_bound() as usize);
    let mut t = vec![0u64; n];
    for_each_triangle(edges.as_slice(), n, |a, b, c| {
        t[a as usize] += 1;
        t[b as usize] += 1;
        t[c as usize] += 1;
    });
    t
}

/// Mean local clustering over nodes `0..n`; nodes of degree below two
/// contribute zero.
pub fn avg_local_clustering(edges: &EdgeList, n: usize) -> f64 {
    let n = n.max(edges.node_bound() as usize);
    if n == 0 {
        return 0.0;
    }
    let deg = degrees(edges.as_slice(), n);
    let tri = local_triangles(edges, n);
    let sum: f64 = (0..n)
        .filter(|&v| deg[v] >= 2)
        .map(|v| tri[v] as f64 / (deg[v] * (deg[v] - 1) / 2) as f64)
        .sum();
    sum / n as f64
}

/// Pearson correlation of endpoint degrees over both orientations of every
/// edge; `None` with fewer than two edges or zero variance.
pub fn degree_assortativity(edges: &EdgeList) -> Option<f64> {
    if edges.len() < 2 {
        return None;
    }
    let deg = degrees(edges.as_slice(), edges.node_bound() as usize);
    let (mut s1, mut s2, mut sxy) = (0u128, 0u128, 0u128);
    for e in edges.iter() {
        let (x, y) = (deg[e.u as usize] as u128, deg[e.v as usize] as u128);
        s1 += x + y;
        s2 += x * x + y * y;
        sxy += 2 * x * y;
    }
    let k = 2 * edges.len() as u128;
    let var = k * s2 - s1 * s1;
    if var == 0 {
        return None;
    }
    let cov = (k * sxy) as f64 - (s1 * s1) as f64;
    Some(cov / var as f64)
}

/// Fraction of external neighbours per node.
#[derive(Clone, Debug, PartialEq)]
pub struct Mixing {
    /// `None` for isolated nodes.
    pub per_node: Vec<Option<f64>>,
    pub mean: Option<f64>,
}

pub fn realized_mixing(edges: &EdgeList, truth: &CommunityAssignment, n: usize) -> Mixing {
    let n = n.max(edges.node_bound() as usize);
    let deg = degrees(edges.as_slice(), n);
    let mut ext = vec![0u64; n];
    for e in edges.iter() {
        if !truth.share_community(e.u, e.v) {
            ext[e.u as usize] += 1;
            ext[e.v as usize] += 1;
        }
    }
    let per_node: Vec<Option<f64>> = (0..n)
        .map(|v| (deg[v] > 0).then(|| ext[v] as f64 / deg[v] as f64))
        .collect();
    let vals: Vec<f64> = per_node.iter().flatten().copied().collect();
    let mean = (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64);
    Mixing { per_node, mean }
}

pub fn distinct_degree_count(degrees: &[u64]) -> usize {
    let mut d = degrees.to_vec();
    d.sort_unstable();
    d.dedup();
    d.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::Seed;
    use proptest::prelude::*;
    use rand::Rng;

    fn list(v: &[(u64, u64)]) -> EdgeList {
        EdgeList::from_unsorted(v.iter().map(|&(a, b)| Edge::new(a, b))).unwrap()
    }

    fn complete(k: u64) -> EdgeList {
        list(&(0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).collect::<Vec<_>>())
    }

    fn random_graph(n: u64, m: usize, seed: u64) -> EdgeList {
        let mut rng = Seed(seed).rng("g");
        let mut set = std::collections::BTreeSet::new();
        let cap = (n * (n - 1) / 2) as usize;
        while set.len() < m.min(cap) {
            let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
            if a != b {
                set.insert(Edge::new(a, b));
            }
        }
        EdgeList::from_sorted(set.into_iter().collect()).unwrap()
    }

    fn adjacency(e: &EdgeList, n: usize) -> Vec<Vec<bool>> {
        let mut a = vec![vec![false; n]; n];
        for x in e.iter() {
            a[x.u as usize][x.v as usize] = true;
            a[x.v as usize][x.u as usize] = true;
        }
        a
    }

    fn brute_local(e: &EdgeList, n: usize) -> Vec<u64> {
        let a = adjacency(e, n);
        let mut t = vec![0; n];
        for i in 0..n {
            for j in 0..n {
                for k in j + 1..n {
                    if j != i && k != i && a[i][j] && a[i][k] && a[j][k] {
                        t[i] += 1;
                    }
                }
            }
        }
        t
    }

    fn brute_triangles(e: &EdgeList, n: usize) -> u64 {
        let a = adjacency(e, n);
        let mut t = 0;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    t += (a[i][j] && a[i][k] && a[j][k]) as u64;
                }
            }
        }
        t
    }

    fn pearson_oracle(e: &EdgeList) -> Option<f64> {
        let deg = degrees(e.as_slice(), e.node_bound() as usize);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for x in e.iter() {
            let (a, b) = (deg[x.u as usize] as f64, deg[x.v as usize] as f64);
            xs.extend([a, b]);
            ys.extend([b, a]);
        }
        let k = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / k;
        let my = ys.iter().sum::<f64>() / k;
        let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        (vx > 0.0).then(|| cov / (vx * vy).sqrt())
    }

    #[test]
    fn triangle_examples() {
        assert_eq!(triangle_count(&complete(3)), 1);
        assert_eq!(triangle_count(&complete(4)), 4);
        assert_eq!(triangle_count(&list(&[(0, 1), (1, 2)])), 0);
        let g = random_graph(50, 200, 3);
        assert_eq!(triangle_count(&g), brute_triangles(&g, 50));
    }

    #[test]
    fn clustering_examples() {
        assert_eq!(avg_local_clustering(&complete(3), 3), 1.0);
        assert_eq!(avg_local_clustering(&list(&[(0, 1), (1, 2)]), 3), 0.0);
        // a triangle plus a pendant: node 3 has degree one
        let g = list(&[(0, 1), (0, 2), (1, 2), (2, 3)]);
        let want = (1.0 + 1.0 + 1.0 / 3.0 + 0.0) / 4.0;
        assert!((avg_local_clustering(&g, 4) - want).abs() < 1e-15);
    }

    #[test]
    fn assortativity_examples() {
        assert_eq!(degree_assortativity(&complete(5)), None);
        assert_eq!(degree_assortativity(&list(&[(0, 1), (2, 3)])), None);
        let star = list(&[(0, 1), (0, 2), (0, 3), (0, 4)]);
        assert!((degree_assortativity(&star).unwrap() + 1.0).abs() < 1e-12);
        let g = random_graph(60, 300, 5);
        let (a, b) = (degree_assortativity(&g).unwrap(), pearson_oracle(&g).unwrap());
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn mixing_examples() {
        let g = list(&[(0, 1), (1, 2), (2, 3)]);
        let one = CommunityAssignment::from_pairs((0..5).map(|v| (v, 0)).collect());
        let m = realized_mixing(&g, &one, 5);
        assert_eq!(m.mean, Some(0.0));
        assert_eq!(m.per_node[4], None);
        let bip = CommunityAssignment::from_pairs((0..4).map(|v| (v, (v % 2) as u32)).collect());
        assert_eq!(realized_mixing(&g, &bip, 4).mean, Some(1.0));
        let split = CommunityAssignment::from_pairs(vec![(0, 0), (1, 0), (2, 1), (3, 1)]);
        let m = realized_mixing(&g, &split, 4);
        assert_eq!(m.per_node, vec![Some(0.0), Some(0.5), Some(0.5), Some(0.0)]);
        assert_eq!(distinct_degree_count(&[3, 1, 3, 2, 1]), 3);
    }

    proptest! {
        #[test]
        fn metrics_match_brute_force(n in 3u64..60, density in 0.0f64..0.5, seed in any::<u64>()) {
            let m = (density * (n * (n - 1) / 2) as f64) as usize;
            let g = random_graph(n, m, seed);
            let k = n as usize;
            prop_assert_eq!(triangle_count(&g), brute_triangles(&g, k));
            let local = brute_local(&g, k);
            prop_assert_eq!(local_triangles(&g, k), local.clone());
            let deg = degrees(g.as_slice(), k);
            let acc: f64 = (0..k)
                .map(|v| if deg[v] < 2 { 0.0 } else { local[v] as f64 * 2.0 / (deg[v] * (deg[v] - 1)) as f64 })
                .sum::<f64>() / k as f64;
            prop_assert!((avg_local_clustering(&g, k) - acc).abs() < 1e-12);
            match (degree_assortativity(&g), pearson_oracle(&g)) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-9),
                (None, b) => prop_assert!(b.is_none() || g.len() < 2),
                (Some(_), None) => prop_assert!(false, "oracle undefined"),
            }
        }
    }
}
