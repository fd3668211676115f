#![allow(dead_code)]

use linsync::netgraph::{laplacian_of, Digraph, LaplacianMatrix, DEFAULT_ALPHA_FLOOR};
use linsync::numkit::DenseMatrix;
use linsync::switchsim::GraphFamily;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize, scale: f64) -> DenseMatrix {
    let data: Vec<f64> = (0..r * c).map(|_| rng.gen_range(-scale..scale)).collect();
    DenseMatrix::from_row_slice(r, c, &data).unwrap()
}

fn random_edges(rng: &mut ChaCha8Rng, m: usize, p: f64, symmetric: bool) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for i in 0..m {
        for j in 0..m {
            if i == j || (symmetric && j < i) {
                continue;
            }
            if rng.gen_bool(p) {
                out.push((i, j, rng.gen_range(0.2..1.0)));
            }
        }
    }
    out
}

/// Rejection-samples an undirected connected graph.
pub fn undirected_connected(rng: &mut ChaCha8Rng, m: usize) -> LaplacianMatrix {
    loop {
        let e = random_edges(rng, m, 0.5, true);
        let g = Digraph::undirected(m, &e, DEFAULT_ALPHA_FLOOR).unwrap();
        if g.is_connected() {
            return laplacian_of(&g);
        }
    }
}

/// Directed graph containing a spanning tree (strongly connected when `strong`),
/// and not symmetric.
pub fn directed_connected(rng: &mut ChaCha8Rng, m: usize, strong: bool) -> LaplacianMatrix {
    loop {
        let e = random_edges(rng, m, 0.4, false);
        let g = Digraph::directed(m, &e, DEFAULT_ALPHA_FLOOR).unwrap();
        let ok = if strong { g.is_strongly_connected() } else { g.is_connected() };
        if ok && !g.is_undirected() {
            return laplacian_of(&g);
        }
    }
}

/// Any graph, possibly disconnected or directed.
pub fn arbitrary_graph(rng: &mut ChaCha8Rng, m: usize) -> LaplacianMatrix {
    let symmetric = rng.gen_bool(0.5);
    let e = random_edges(rng, m, 0.5, symmetric);
    let g = if symmetric {
        Digraph::undirected(m, &e, DEFAULT_ALPHA_FLOOR)
    } else {
        Digraph::directed(m, &e, DEFAULT_ALPHA_FLOOR)
    };
    laplacian_of(&g.unwrap())
}

pub fn family(members: Vec<LaplacianMatrix>) -> GraphFamily {
    GraphFamily::new(members).unwrap()
}

pub fn rel_gap(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.max_abs_diff(b) / b.max_abs().max(1.0)
}
