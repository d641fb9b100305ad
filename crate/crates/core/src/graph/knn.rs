use super::{CoordinateSet, Graph};
use crate::error::{Error, Result};
use crate::par;

/// k-nearest-neighbor graph, symmetrized by union.
///
/// Each vertex selects its `k` closest points (Euclidean, ties to the
/// smaller id); an edge exists if either endpoint selected the other.
/// Coincident points are valid neighbors at distance 0.
pub fn infer_knn_graph(coords: &CoordinateSet, k: usize) -> Result<Graph> {
    let n = coords.len();
    if n < 2 {
        return Err(Error::param(format!(
            "k-NN inference needs n >= 2 points, got {n}"
        )));
    }
    if k == 0 || k >= n {
        return Err(Error::param(format!(
            "k must satisfy 1 <= k < n (k = {k}, n = {n})"
        )));
    }

    let selections = par::map_range(n, |i| {
        let mut others: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (coords.distance(i, j), j))
            .collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        others.truncate(k);
        others.into_iter().map(|(_, j)| j).collect::<Vec<_>>()
    });

    let edges = selections
        .iter()
        .enumerate()
        .flat_map(|(i, sel)| sel.iter().map(move |&j| (i, j)));
    Graph::from_edges(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(xs: &[f64]) -> CoordinateSet {
        CoordinateSet::new(xs.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    #[test]
    fn collinear_k1() {
        // d(0,1) = d(1,2) = 1 < d(0,2) = 2; vertex 1 picks 0 on the id tie.
        let g = infer_knn_graph(&line(&[0.0, 1.0, 2.0]), 1).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn collinear_k2_is_complete() {
        let g = infer_knn_graph(&line(&[0.0, 1.0, 2.0]), 2).unwrap();
        assert_eq!(g, Graph::complete(3));
    }

    #[test]
    fn unit_square_k1_is_four_cycle() {
        // Corners in ring order 0:(0,0) 1:(1,0) 2:(1,1) 3:(0,1).
        let c = CoordinateSet::new(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ])
        .unwrap();
        let g = infer_knn_graph(&c, 1).unwrap();
        // 0 -> 1, 1 -> 0, 2 -> 1, 3 -> 0 (ties to smaller id)
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 3), (1, 2)]);
        let g = infer_knn_graph(&c, 2).unwrap();
        assert_eq!(g, Graph::cycle(4));
    }

    #[test]
    fn duplicate_points_are_neighbors() {
        let g = infer_knn_graph(&line(&[5.0, 5.0, 9.0]), 1).unwrap();
        assert!(g.has_edge(0, 1));
    }

    #[test]
    fn hub_degree_exceeds_2k() {
        // Every outer point's nearest neighbor is the origin.
        let c = CoordinateSet::new(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
        ])
        .unwrap();
        let g = infer_knn_graph(&c, 1).unwrap();
        assert_eq!(g.degree(0), 4);
    }

    #[test]
    fn k_too_large() {
        assert!(matches!(
            infer_knn_graph(&line(&[0.0, 1.0]), 2),
            Err(Error::Parameter(_))
        ));
    }

    proptest! {
        #[test]
        fn every_selection_is_an_edge(
            pts in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..40),
            k_raw in 1usize..10,
        ) {
            let n = pts.len();
            let k = 1 + k_raw % (n - 1);
            let c = CoordinateSet::new(pts.into_iter().map(|(x, y)| vec![x, y]).collect()).unwrap();
            let g = infer_knn_graph(&c, k).unwrap();
            for v in 0..n {
                // Union keeps all k selections; hubs may be picked by many others.
                prop_assert!(g.degree(v) >= k && g.degree(v) < n);
                let mut d: Vec<(f64, usize)> = (0..n).filter(|&j| j != v).map(|j| (c.distance(v, j), j)).collect();
                d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                for &(_, j) in &d[..k] {
                    prop_assert!(g.has_edge(v, j));
                }
            }
        }
    }
}
