mod common;

use linsync::netgraph::{laplacian_of, spectral_summary, Digraph, DEFAULT_ALPHA_FLOOR};
use linsync::numkit::{eig, expm, inverse, kron, Complex64, ComplexMatrix, DenseMatrix};
use linsync::switchsim::{generate_schedule, propagate_modal_closed_form, GraphFamily};
use linsync::synth::phi_from_gamma;
use linsync::verify::{contraction_undirected, oracle_full_kronecker};
use proptest::prelude::*;

fn matrix(n: usize, scale: f64) -> impl Strategy<Value = DenseMatrix> {
    prop::collection::vec(-scale..scale, n * n)
        .prop_map(move |v| DenseMatrix::from_row_slice(n, n, &v).unwrap())
}

fn sized_matrix(max: usize, scale: f64) -> impl Strategy<Value = DenseMatrix> {
    (1..=max).prop_flat_map(move |n| matrix(n, scale))
}

/// Undirected weighted graph on `m` agents, path edges always present.
fn connected_undirected(m: usize) -> impl Strategy<Value = Digraph> {
    prop::collection::vec((0.2f64..1.0, prop::bool::ANY, 0.2f64..1.0), m * m).prop_map(move |raw| {
        let mut edges = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                let (w, extra, w2) = raw[i * m + j];
                if j == i + 1 {
                    edges.push((i, j, w));
                } else if extra {
                    edges.push((i, j, w2));
                }
            }
        }
        Digraph::undirected(m, &edges, DEFAULT_ALPHA_FLOOR).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expm_semigroup(m in sized_matrix(5, 1.0), s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let lhs = expm(&m, s + t).unwrap();
        let rhs = expm(&m, s).unwrap().matmul(&expm(&m, t).unwrap());
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-10 * lhs.max_abs().max(1.0));
    }

    #[test]
    fn expm_of_commuting_sum_factors(m in sized_matrix(4, 1.0), c in -1.0f64..1.0) {
        let n = m.rows();
        let other = &m.scale(c) + &DenseMatrix::identity(n).scale(0.3);
        let lhs = expm(&(&m + &other), 1.0).unwrap();
        let rhs = expm(&m, 1.0).unwrap().matmul(&expm(&other, 1.0).unwrap());
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-10 * lhs.max_abs().max(1.0));
    }

    #[test]
    fn expm_inverse_is_negative_time(m in sized_matrix(5, 1.0)) {
        let n = m.rows();
        let p = expm(&m, 1.0).unwrap().matmul(&expm(&m, -1.0).unwrap());
        prop_assert!(p.max_abs_diff(&DenseMatrix::identity(n)) < 1e-10);
    }

    #[test]
    fn kron_mixed_product(a in matrix(2, 1.0), b in matrix(3, 1.0), c in matrix(2, 1.0), d in matrix(3, 1.0)) {
        let lhs = kron(&a, &b).unwrap().matmul(&kron(&c, &d).unwrap());
        let rhs = kron(&a.matmul(&c), &b.matmul(&d)).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn kron_transpose_and_identity(a in matrix(3, 1.0), b in matrix(2, 1.0)) {
        let k = kron(&a, &b).unwrap();
        prop_assert_eq!(k.transpose(), kron(&a.transpose(), &b.transpose()).unwrap());
        let i = kron(&DenseMatrix::identity(3), &DenseMatrix::identity(2)).unwrap();
        prop_assert_eq!(i, DenseMatrix::identity(6));
    }

    #[test]
    fn eig_reconstructs(m in sized_matrix(6, 1.0)) {
        let e = eig(&m).unwrap();
        prop_assume!(!e.is_defective());
        let n = m.rows();
        let v = &e.right_vectors;
        let av = ComplexMatrix::from_real(&m).matmul(v);
        let mut vl = v.clone();
        for j in 0..n {
            for i in 0..n {
                vl[(i, j)] = v[(i, j)] * e.values[j];
            }
        }
        prop_assert!(av.max_abs_diff(&vl) < 1e-8 * m.max_abs().max(1.0));
        let trace: Complex64 = e.values.iter().sum();
        prop_assert!((trace.re - m.trace()).abs() < 1e-9 && trace.im.abs() < 1e-9);
    }

    #[test]
    fn phi_round_trips_to_diagonal(q in matrix(3, 1.0), g in prop::collection::vec(0.1f64..5.0, 3)) {
        let q = &q + &DenseMatrix::identity(3).scale(2.0);
        let phi = phi_from_gamma(&q, &g).unwrap();
        let back = inverse(&q).unwrap().matmul(&phi).matmul(&q);
        prop_assert!(back.max_abs_diff(&DenseMatrix::from_diag(&g)) < 1e-9);
    }

    #[test]
    fn laplacian_rows_sum_to_zero(g in (2usize..7).prop_flat_map(connected_undirected)) {
        let l = laplacian_of(&g);
        let m = l.order();
        let ones = vec![1.0; m];
        prop_assert!(l.matrix().matvec(&ones).iter().all(|v| v.abs() < 1e-12));
        let s = spectral_summary(&l).unwrap();
        prop_assert!(s.simple_zero);
        prop_assert!(s.lambda2.re > 0.0);
        prop_assert!((s.left1.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn contraction_monotone_in_gamma(
        g in (2usize..6).prop_flat_map(connected_undirected),
        gamma in 0.1f64..2.0,
        seed in 0u64..1000,
    ) {
        let fam = GraphFamily::new(vec![laplacian_of(&g)]).unwrap();
        let sched = generate_schedule(seed, 1, 0.5, 1.0, 5.0).unwrap();
        let x0 = vec![1.0; fam.agent_count()];
        let lo = contraction_undirected(&fam, &sched, gamma, 0.2, &x0).unwrap();
        let hi = contraction_undirected(&fam, &sched, 2.0 * gamma, 0.2, &x0).unwrap();
        for (a, b) in lo.per_interval.iter().zip(&hi.per_interval) {
            prop_assert!(b.norm < a.norm);
            prop_assert!((a.norm - a.predicted.unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn schedules_are_reproducible(seed in any::<u64>(), v in 1usize..5, low in 0.1f64..1.0, extra in 0.0f64..1.0) {
        let high = low + extra;
        let a = generate_schedule(seed, v, low, high, 20.0).unwrap();
        let b = generate_schedule(seed, v, low, high, 20.0).unwrap();
        prop_assert_eq!(&a, &b);
        for iv in a.intervals() {
            prop_assert!(iv.mode < v);
            // the final interval may be cut by the horizon
            if iv.end < a.horizon() {
                prop_assert!(iv.length() >= low - 1e-12 && iv.length() <= high + 1e-12);
            }
        }
    }

    #[test]
    fn modal_engine_matches_kronecker(
        s_diag in prop::collection::vec(-1.0f64..0.5, 1..4),
        gammas_raw in prop::collection::vec(0.2f64..2.0, 4),
        graphs in prop::collection::vec((3usize..4).prop_flat_map(connected_undirected), 1..3),
        x_raw in prop::collection::vec(-1.0f64..1.0, 12),
        seed in 0u64..1000,
    ) {
        let n = s_diag.len();
        let gammas = &gammas_raw[..n];
        let fam = GraphFamily::new(graphs.iter().map(laplacian_of).collect()).unwrap();
        let m = fam.agent_count();
        let sched = generate_schedule(seed, fam.len(), 0.5, 1.0, 6.0).unwrap();
        let mut sorted = s_diag.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let s = DenseMatrix::from_diag(&sorted);
        let model = linsync::synth::AgentModel::new(s.clone(), DenseMatrix::zeros(n, 1), None).unwrap();
        let mf = linsync::synth::modal_decompose(&model, Some(&DenseMatrix::identity(n))).unwrap();
        let x0 = DenseMatrix::from_row_slice(n, m, &x_raw[..n * m]).unwrap();
        let run = propagate_modal_closed_form(&mf, gammas, &fam, &sched, &ComplexMatrix::from_real(&x0)).unwrap();
        let oracle = oracle_full_kronecker(&s, &DenseMatrix::from_diag(gammas), &fam, &sched, x0.as_slice()).unwrap();
        for (k, st) in run.states.iter().enumerate() {
            prop_assert!(common::rel_gap(&st.real_part(), &oracle.modal_matrix(k, n)) < 1e-10);
        }
    }
}
