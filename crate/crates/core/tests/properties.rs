//! Randomized invariants checked against independent constructions.

mod common;

use common::*;
use ficoder::codec::{check_linear_map, EncodingMap, MapLinearity};
use ficoder::confusion::{cayley_graph, PowerLabeling};
use ficoder::*;
use num_rational::Ratio;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn pairwise_graph_equals_cayley_graph() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..50 {
        let (inst, oracles) = random_linear(&mut rng);
        assert!(inst.is_linear());
        let pairwise = build_graph(&inst, 1 << 10).unwrap();
        let cayley = cayley_graph(&inst, 1 << 10).unwrap();
        assert!(cayley.is_cayley());
        assert_eq!(pairwise, cayley);
        assert_eq!(
            pairwise.graph(),
            &oracle_graph(inst.field.q(), inst.nk(), &oracles)
        );
    }
}

#[test]
fn lifted_graph_spans_the_or_power() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut strict = 0;
    for _ in 0..20 {
        let inst = random_nonlinear(&mut rng);
        if inst.nk() > 4 {
            continue;
        }
        let base = build_graph(&inst, 64).unwrap();
        let lifted = build_graph(&inst.lift(2).unwrap(), 1 << 10).unwrap();
        let power = or_power(&base, 2, 1 << 10).unwrap();
        let lab = PowerLabeling {
            field: inst.field,
            base_len: inst.nk(),
            m: 2,
        };
        // Variable k·m + j of the lift is sub-packet j of message k.
        let to_power = |v: usize| {
            let x = inst.field.unrank(v, 2 * inst.nk()).unwrap().into_symbols();
            let copies: Vec<usize> = (0..2)
                .map(|j| {
                    inst.field
                        .rank(&(0..inst.nk()).map(|k| x[2 * k + j]).collect::<Vec<_>>())
                })
                .collect();
            lab.to_vertex(&copies)
        };
        for (u, v) in lifted.graph().edges() {
            assert!(power.has_edge(to_power(u), to_power(v)));
        }
        strict += usize::from(lifted.edge_count() < power.edge_count());
        assert!(lifted.edge_count() <= power.edge_count());
    }
    assert!(strict > 0, "some lift is a proper subgraph");
}

#[test]
fn independence_and_fractional_number_multiply_under_or_powers() {
    let f2 = PrimeField::new(2).unwrap();
    let mut bases = Vec::new();
    // The 5-cycle padded with three isolated vertices to eight vertices.
    let mut c5 = Graph::empty(8);
    for (u, v) in Graph::cycle(5).edges() {
        c5.add_edge(u, v);
    }
    bases.push(ConfusionGraph::from_graph(f2, 3, c5).unwrap());
    for name in ["table2", "table3", "table4_f2", "table5"] {
        bases.push(confusion_graph(&instance(name)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        bases.push(ConfusionGraph::from_graph(f2, 3, random_graph(&mut rng, 8, 0.4)).unwrap());
    }
    for (idx, g) in bases.into_iter().enumerate() {
        let (a, _) = max_independent_set(g.graph(), 1 << 24).unwrap();
        if idx == 0 {
            assert_eq!(a, 2 + 3);
        }
        let p = or_power(&g, 2, 1 << 10).unwrap();
        let (a2, witness) = max_independent_set(p.graph(), 1 << 24).unwrap();
        assert_eq!(a2, a * a);
        assert!(p.graph().is_independent(&witness));
        if g.vertex_count() <= 64 {
            assert_eq!(a, brute_alpha(g.graph()));
        }
        if g.is_cayley() {
            let f = vt_fractional(g.vertex_count(), Some(a)).unwrap();
            let f2 = vt_fractional(p.vertex_count(), Some(a2)).unwrap();
            assert_eq!(f2, f * f);
        }
    }
}

fn confusion_graph(inst: &FicpInstance) -> ConfusionGraph {
    ficoder::confusion::confusion_graph(inst, 1 << 12).unwrap()
}

#[test]
fn delta_condition_matches_exhaustive_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xecc);
    let (mut seen_pass, mut seen_fail) = (0, 0);
    let mut tried = 0;
    while tried < 20 {
        let inst = random_nonlinear(&mut rng);
        let g = confusion_graph(&inst);
        if g.edge_count() == 0 {
            continue;
        }
        tried += 1;
        let len = rng.gen_range(1..=5);
        let words = (0..g.vertex_count())
            .map(|_| Word::new(inst.field, random_row(&mut rng, 2, len)).unwrap())
            .collect();
        let map = EncodingMap::from_vertex_words(inst.field, inst.nk(), words).unwrap();
        for delta in 0..=1 {
            let check = verify_delta(&g, &map, delta).unwrap();
            let sim = simulate_errors(&inst, &map, delta, &SimMode::Exhaustive, 1 << 24).unwrap();
            assert_eq!(
                check.passed,
                sim.passed(),
                "delta {delta}, min distance {:?}",
                check.min_distance
            );
            if check.passed {
                seen_pass += 1;
            } else {
                seen_fail += 1;
            }
        }
    }
    assert!(seen_pass > 0 && seen_fail > 0);
}

#[test]
fn decoder_conflicts_exactly_on_unseparated_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut ok, mut bad) = (0, 0);
    for _ in 0..60 {
        let inst = random_nonlinear(&mut rng);
        let g = confusion_graph(&inst);
        let colors = rng.gen_range(1..=g.vertex_count().min(8));
        let words: Vec<Word> = (0..g.vertex_count())
            .map(|_| inst.field.unrank(rng.gen_range(0..colors), 3).unwrap())
            .collect();
        let map = EncodingMap::from_vertex_words(inst.field, inst.nk(), words).unwrap();
        let valid = separates(g.graph(), &map);
        match build_decoders(&inst, &map) {
            Ok(_) => {
                assert!(valid);
                assert!(verify_map(&inst, &map).unwrap().passed);
                ok += 1;
            }
            Err(Error::Conflict {
                receiver,
                x,
                x_prime,
            }) => {
                assert!(!valid);
                assert!(confusable(&inst, receiver, x, x_prime).unwrap());
                assert_eq!(map.codeword(x), map.codeword(x_prime));
                bad += 1;
            }
            Err(e) => panic!("{e}"),
        }
    }
    assert!(ok > 0 && bad > 0);
}

#[test]
fn chromatic_sandwich_on_cayley_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0);
    for _ in 0..30 {
        let (inst, _) = random_linear(&mut rng);
        if inst.vertex_count().unwrap() > 64 {
            continue;
        }
        let g = cayley_graph(&inst, 1 << 10).unwrap();
        let (a, _) = max_independent_set(g.graph(), 1 << 24).unwrap();
        let chi = exact_chromatic(g.graph(), 1 << 24, None).unwrap().chi;
        let f = vt_fractional(g.vertex_count(), Some(a)).unwrap();
        assert!(Ratio::from_integer(chi as u128) >= f);
        let upper = (*f.numer() as f64 / *f.denom() as f64) * (1.0 + (a as f64).log2());
        assert!(chi as f64 <= upper + 1e-9, "chi {chi} > {upper}");
        let b = code_size_bounds(&inst, &g, 1, 1 << 24).unwrap();
        assert!(b.codebook_lower <= chi as u128 && chi as u128 <= b.codebook_upper);
    }
}

fn seeded() -> impl Strategy<Value = ChaCha8Rng> {
    any::<u64>().prop_map(ChaCha8Rng::seed_from_u64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn synthesized_codes_round_trip(mut rng in seeded()) {
        let inst = random_nonlinear(&mut rng);
        let g = confusion_graph(&inst);
        let col = dsatur(g.graph());
        let fic = codec::synthesize(&inst, &g, &col, None).unwrap();
        prop_assert!(verify_fic(&inst, &fic).unwrap().passed);
        for v in 0..g.vertex_count() {
            let x = inst.field.unrank(v, inst.nk()).unwrap().into_symbols();
            let c = fic.encode(&x).unwrap().clone();
            for i in 0..inst.num_receivers() {
                prop_assert_eq!(fic.decode(i, &c, &inst.has_key(i, &x)).unwrap(), inst.want_key(i, &x));
            }
        }
        prop_assert!(fic.len() >= mu_bound(&inst));
    }

    #[test]
    fn optimal_length_is_at_least_mu(mut rng in seeded()) {
        let (inst, _) = random_linear(&mut rng);
        prop_assume!(inst.vertex_count().unwrap() <= 64);
        let g = confusion_graph(&inst);
        let chi = exact_chromatic(g.graph(), 1 << 22, None).unwrap().chi;
        let l = ficoder::coloring::ceil_log(inst.field.q(), chi as u128);
        prop_assert!(l >= mu_bound(&inst));
    }

    #[test]
    fn linear_maps_are_recovered(mut rng in seeded()) {
        let q = [2u32, 3, 5][rng.gen_range(0..3)];
        let field = PrimeField::new(q).unwrap();
        let rows = rng.gen_range(1..=4);
        let cols = rng.gen_range(1..=4);
        let m = Matrix::new(field, rows, cols, random_row(&mut rng, q, rows * cols)).unwrap();
        let map = EncodingMap::from_matrix(&m).unwrap();
        prop_assert_eq!(check_linear_map(&map), MapLinearity::Linear(m.clone()));
        let shifted = map.map_codewords(|w| w.add(&Word::new(field, vec![1; cols]).unwrap())).unwrap();
        prop_assert_eq!(check_linear_map(&shifted), MapLinearity::Affine(m, vec![1; cols]));
    }
}
