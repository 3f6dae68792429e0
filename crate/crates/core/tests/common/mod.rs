#![allow(dead_code)]

use std::path::PathBuf;

use ficoder::codec::EncodingMap;
use ficoder::model::{Expr, Receiver};
use ficoder::{FicpInstance, FuncDef, Graph, Matrix, PrimeField};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn instance(name: &str) -> FicpInstance {
    FicpInstance::from_json(&read_fixture(&format!("{name}.json"))).unwrap()
}

pub fn matrix(name: &str) -> Matrix {
    Matrix::parse(&read_fixture(&format!("{name}.mat"))).unwrap()
}

pub fn code(inst: &FicpInstance, name: &str) -> EncodingMap {
    EncodingMap::parse_code_file(
        inst.field,
        inst.nk(),
        &read_fixture(&format!("{name}.code")),
    )
    .unwrap()
    .0
}

pub const INSTANCES: [&str; 10] = [
    "table1",
    "table2",
    "table3",
    "table4_f2",
    "table4_f3",
    "table5",
    "table6_case1",
    "table6_case2",
    "table6_case3",
    "table7",
];

/// Big-endian digits of `label`.
pub fn digits(q: u32, len: usize, mut label: usize) -> Vec<u32> {
    let mut out = vec![0; len];
    for d in out.iter_mut().rev() {
        *d = (label % q as usize) as u32;
        label /= q as usize;
    }
    out
}

pub type Eval = Box<dyn Fn(&[u32]) -> Vec<u32>>;

/// A receiver spelled out as plain closures over the message digits.
pub struct Oracle {
    pub has: Eval,
    pub want: Eval,
}

pub fn oracle(
    has: impl Fn(&[u32]) -> Vec<u32> + 'static,
    want: impl Fn(&[u32]) -> Vec<u32> + 'static,
) -> Oracle {
    Oracle {
        has: Box::new(has),
        want: Box::new(want),
    }
}

/// Confusion graph straight from the definition, pair by pair.
pub fn oracle_graph(q: u32, len: usize, receivers: &[Oracle]) -> Graph {
    let n = (q as usize).pow(len as u32);
    let xs: Vec<Vec<u32>> = (0..n).map(|v| digits(q, len, v)).collect();
    let mut g = Graph::empty(n);
    for a in 0..n {
        for b in a + 1..n {
            if receivers
                .iter()
                .any(|r| (r.has)(&xs[a]) == (r.has)(&xs[b]) && (r.want)(&xs[a]) != (r.want)(&xs[b]))
            {
                g.add_edge(a, b);
            }
        }
    }
    g
}

pub fn maj(a: u32, b: u32, c: u32) -> u32 {
    u32::from(a + b + c >= 2)
}

/// Independence number by the recursion `α(S) = max(α(S − v), 1 + α(S − N[v]))`
/// over 64-bit vertex masks.
pub fn brute_alpha(g: &Graph) -> usize {
    let n = g.vertex_count();
    assert!(n <= 64);
    let nbr: Vec<u64> = (0..n)
        .map(|v| {
            (0..n)
                .filter(|&u| g.has_edge(u, v))
                .fold(0u64, |m, u| m | 1 << u)
        })
        .collect();
    fn rec(set: u64, nbr: &[u64]) -> usize {
        if set == 0 {
            return 0;
        }
        // Branch on a vertex of maximum degree inside `set`.
        let v = (0..64)
            .filter(|&v| set >> v & 1 == 1)
            .max_by_key(|&v| (nbr[v] & set).count_ones())
            .unwrap();
        if (nbr[v] & set).count_ones() == 0 {
            // Every remaining vertex is isolated.
            return set.count_ones() as usize;
        }
        let without = rec(set & !(1 << v), nbr);
        let with = 1 + rec(set & !(1 << v) & !nbr[v], nbr);
        without.max(with)
    }
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    rec(all, &nbr)
}

/// Whether `map` separates every edge of `g` (a proper coloring).
pub fn separates(g: &Graph, map: &EncodingMap) -> bool {
    g.edges().all(|(u, v)| map.codeword(u) != map.codeword(v))
}

pub fn linear_expr(coeffs: &[u32]) -> Expr {
    Expr::Add(
        coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(j, &c)| Expr::Mul(vec![Expr::Const(c), Expr::Var(j)]))
            .collect(),
    )
}

pub fn random_row(rng: &mut ChaCha8Rng, q: u32, len: usize) -> Vec<u32> {
    (0..len).map(|_| rng.gen_range(0..q)).collect()
}

/// A random linear instance together with its plain-closure oracle.
pub fn random_linear(rng: &mut ChaCha8Rng) -> (FicpInstance, Vec<Oracle>) {
    let q = [2u32, 3, 5][rng.gen_range(0..3)];
    let max_len = match q {
        2 => 8,
        3 => 5,
        _ => 4,
    };
    let nk = rng.gen_range(2..=max_len);
    let n = if nk % 2 == 0 && rng.gen_bool(0.5) {
        2
    } else {
        1
    };
    let field = PrimeField::new(q).unwrap();
    let mut receivers = Vec::new();
    let mut oracles = Vec::new();
    for _ in 0..rng.gen_range(1..=4) {
        let has: Vec<Vec<u32>> = (0..rng.gen_range(0..=2))
            .map(|_| random_row(rng, q, nk))
            .collect();
        let wants: Vec<Vec<u32>> = (0..rng.gen_range(1..=2))
            .map(|_| random_row(rng, q, nk))
            .collect();
        receivers.push(Receiver {
            has: has
                .iter()
                .map(|r| FuncDef::scalar(linear_expr(r)))
                .collect(),
            wants: wants
                .iter()
                .map(|r| FuncDef::scalar(linear_expr(r)))
                .collect(),
        });
        let dot = move |rows: Vec<Vec<u32>>| {
            move |x: &[u32]| -> Vec<u32> {
                rows.iter()
                    .map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum::<u32>() % q)
                    .collect()
            }
        };
        oracles.push(oracle(dot(has), dot(wants)));
    }
    let inst = FicpInstance {
        field,
        n,
        k: nk / n,
        receivers,
    };
    (inst, oracles)
}

/// A random binary instance mixing products into Has- and Want-functions.
pub fn random_nonlinear(rng: &mut ChaCha8Rng) -> FicpInstance {
    let field = PrimeField::new(2).unwrap();
    let nk = rng.gen_range(2..=6);
    let term = |rng: &mut ChaCha8Rng| {
        let a = Expr::Var(rng.gen_range(0..nk));
        if rng.gen_bool(0.5) {
            Expr::Mul(vec![a, Expr::Var(rng.gen_range(0..nk))])
        } else {
            a
        }
    };
    let func = |rng: &mut ChaCha8Rng| {
        FuncDef::scalar(Expr::Add(
            (0..rng.gen_range(1..=3)).map(|_| term(rng)).collect(),
        ))
    };
    let receivers = (0..rng.gen_range(1..=4))
        .map(|_| Receiver {
            has: (0..rng.gen_range(0..=2)).map(|_| func(rng)).collect(),
            wants: vec![func(rng)],
        })
        .collect();
    FicpInstance {
        field,
        n: 1,
        k: nk,
        receivers,
    }
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    Graph::from_edges(
        n,
        (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect::<Vec<_>>()
            .into_iter()
            .filter(|_| rng.gen_bool(p)),
    )
}
