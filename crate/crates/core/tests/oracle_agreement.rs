use gpack_core::generate::{generate_instance, InstanceKind};
use gpack_core::graph::{Graph, GraphSequence};
use gpack_core::oracle::{brute_force_pack, BacktrackBudget, Outcome};
use gpack_core::pipeline::{run_pipeline, RunConfig};
use gpack_core::rational::ratio;

#[test]
fn small_successes_are_satisfiable() {
    for seed in 0..6 {
        let seq = generate_instance(InstanceKind::GyarfasExact, 5, 4, seed, 0.9).unwrap();
        let r = run_pipeline(
            &RunConfig {
                epsilon: ratio(1, 1),
                seed,
                ..Default::default()
            },
            &seq,
        )
        .unwrap();
        assert!(r.verified);
        let bf = brute_force_pack(&seq, r.host_order, BacktrackBudget::default());
        assert!(matches!(bf.outcome, Outcome::Sat(_)), "seed {seed}");
    }
}

#[test]
fn overfull_sequences_are_cut_before_search() {
    let seq = GraphSequence::new(5, 4, vec![Graph::complete(5), Graph::path(2)]);
    let r = brute_force_pack(&seq, 5, BacktrackBudget::default());
    assert_eq!(r.outcome, Outcome::Unsat);
    assert!(r.early_cut);
    assert_eq!(r.nodes, 0);
}

#[test]
fn gyarfas_seven_packs() {
    let seq = GraphSequence::new(
        7,
        6,
        vec![
            Graph::empty(1),
            Graph::path(2),
            Graph::path(3),
            Graph::star(3),
            Graph::path(5),
            Graph::star(5),
            Graph::path(7),
        ],
    );
    let r = brute_force_pack(&seq, 7, BacktrackBudget::default());
    assert!(matches!(r.outcome, Outcome::Sat(_)));
}
