//! Seeded random graph families used by tests, benches and the demo pipeline.

use rand::Rng;

use super::{infer_knn_graph, CoordinateSet, Graph};

/// G(n, p) with independent edges.
pub fn erdos_renyi<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).expect("generated edges are valid")
}

/// Draws G(n, p) until the sample is connected.
pub fn connected_erdos_renyi<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    loop {
        let g = erdos_renyi(n, p, rng);
        if g.is_connected() {
            return g;
        }
    }
}

/// Random connected graph: a random spanning tree plus `extra` random edges.
pub fn random_connected<R: Rng>(n: usize, extra: usize, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    if n >= 2 {
        for _ in 0..extra {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            if u != v {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).expect("generated edges are valid")
}

/// Uniform points in the unit square.
pub fn uniform_points<R: Rng>(n: usize, rng: &mut R) -> CoordinateSet {
    let pts = (0..n)
        .map(|_| vec![rng.random::<f64>(), rng.random::<f64>()])
        .collect();
    CoordinateSet::new(pts).expect("finite points")
}

/// Random geometric graph: uniform points in the unit square joined by
/// k-NN inference, redrawn until connected.
pub fn random_geometric<R: Rng>(n: usize, k: usize, rng: &mut R) -> (CoordinateSet, Graph) {
    loop {
        let coords = uniform_points(n, rng);
        let g = infer_knn_graph(&coords, k).expect("k < n");
        if g.is_connected() {
            return (coords, g);
        }
    }
}
