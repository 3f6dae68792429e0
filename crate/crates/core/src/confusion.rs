//! Generalized exclusive laws and confusion graphs.
//!
//! Vertex `v` of a confusion graph is the message vector `unrank(v, nK)`.
//! Two vectors are confusable for receiver `i` when their Has-values agree
//! and their Want-values differ; the confusion graph joins every pair that
//! is confusable for at least one receiver.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::field::{PrimeField, Symbol, Word};
use crate::graph::Graph;
use crate::model::{FicpInstance, ValueTable};

/// Dense adjacency costs `V²/8` bytes, so 2^14 vertices is 32 MiB.
pub const DEFAULT_VERTEX_BUDGET: usize = 1 << 14;

/// Difference set of a Cayley graph on `F_q^{nK}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionSet {
    field: PrimeField,
    len: usize,
    elements: Vec<Word>,
}

impl ConnectionSet {
    /// Validates that `elements` excludes zero and is closed under negation.
    pub fn new(field: PrimeField, len: usize, elements: Vec<Word>) -> Result<Self> {
        let mut elements = elements;
        for e in &elements {
            if e.len() != len || e.field() != field {
                return Err(Error::BadConnectionSet(format!(
                    "{e} is not a word of F_{}^{len}",
                    field.q()
                )));
            }
            if e.weight() == 0 {
                return Err(Error::BadConnectionSet("contains the zero word".into()));
            }
        }
        elements.sort_by_key(Word::rank);
        elements.dedup();
        for e in &elements {
            if elements
                .binary_search_by_key(&e.neg().rank(), Word::rank)
                .is_err()
            {
                return Err(Error::BadConnectionSet(format!(
                    "missing the negation of {e}"
                )));
            }
        }
        Ok(ConnectionSet {
            field,
            len,
            elements,
        })
    }

    pub fn empty(field: PrimeField, len: usize) -> Self {
        ConnectionSet {
            field,
            len,
            elements: Vec::new(),
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// Length of the member words.
    pub fn word_len(&self) -> usize {
        self.len
    }

    pub fn elements(&self) -> &[Word] {
        &self.elements
    }

    pub fn labels(&self) -> Vec<usize> {
        self.elements.iter().map(Word::rank).collect()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.elements
            .binary_search_by_key(&w.rank(), Word::rank)
            .is_ok()
    }

    pub fn union(&self, other: &ConnectionSet) -> Result<ConnectionSet> {
        let mut all = self.elements.clone();
        all.extend(other.elements.iter().cloned());
        ConnectionSet::new(self.field, self.len, all)
    }
}

/// Graph on all `q^{nK}` message vectors.
#[derive(Debug, Clone)]
pub struct ConfusionGraph {
    field: PrimeField,
    nk: usize,
    graph: Graph,
    cayley: Option<ConnectionSet>,
}

/// Equality compares vertices and edges only, not the Cayley annotation.
impl PartialEq for ConfusionGraph {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.nk == other.nk && self.graph == other.graph
    }
}

impl Eq for ConfusionGraph {}

fn check_budget(field: PrimeField, len: usize, budget: usize) -> Result<usize> {
    let count = field.word_count(len).unwrap_or(u128::MAX);
    if count > budget as u128 {
        return Err(Error::SizeLimit {
            vertices: count,
            budget,
        });
    }
    Ok(count as usize)
}

impl ConfusionGraph {
    pub fn edgeless(field: PrimeField, nk: usize, budget: usize) -> Result<Self> {
        let n = check_budget(field, nk, budget)?;
        Ok(ConfusionGraph {
            field,
            nk,
            graph: Graph::empty(n),
            cayley: None,
        })
    }

    /// Wraps an arbitrary graph whose vertex count must equal `q^{nk}`.
    pub fn from_graph(field: PrimeField, nk: usize, graph: Graph) -> Result<Self> {
        let n = field.word_count(nk).unwrap_or(u128::MAX);
        if n != graph.vertex_count() as u128 {
            return Err(Error::VertexMismatch {
                left: graph.vertex_count(),
                right: n.min(usize::MAX as u128) as usize,
            });
        }
        Ok(ConfusionGraph {
            field,
            nk,
            graph,
            cayley: None,
        })
    }

    #[inline]
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// Number of scalar symbols per vertex label.
    pub fn symbols_per_vertex(&self) -> usize {
        self.nk
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.graph.has_edge(u, v)
    }

    /// Connection set when the graph is known to be Cayley by construction.
    pub fn cayley_set(&self) -> Option<&ConnectionSet> {
        self.cayley.as_ref()
    }

    pub fn is_cayley(&self) -> bool {
        self.cayley.is_some()
    }

    pub fn vertex_word(&self, v: usize) -> Word {
        self.field.unrank(v, self.nk).expect("vertex within range")
    }
}

/// Whether `x` and `x'` (vertex labels) are confusable for receiver `i`.
pub fn confusable(inst: &FicpInstance, i: usize, x: usize, x_prime: usize) -> Result<bool> {
    if x == x_prime {
        return Err(Error::SameVertex(x));
    }
    let a = inst.field.unrank(x, inst.nk())?.into_symbols();
    let b = inst.field.unrank(x_prime, inst.nk())?.into_symbols();
    Ok(inst.has_key(i, &a) == inst.has_key(i, &b) && inst.want_key(i, &a) != inst.want_key(i, &b))
}

struct Fibers {
    table: ValueTable,
    members: Vec<Vec<usize>>,
}

impl Fibers {
    fn new(table: ValueTable) -> Self {
        let mut members = vec![Vec::new(); table.has_values.len()];
        for (v, &h) in table.has_ids.iter().enumerate() {
            members[h as usize].push(v);
        }
        Fibers { table, members }
    }

    fn mark_row(&self, v: usize, bits: &mut [u64]) {
        let want = self.table.want_ids[v];
        for &u in &self.members[self.table.has_ids[v] as usize] {
            if self.table.want_ids[u] != want {
                bits[u / 64] |= 1 << (u % 64);
            }
        }
    }
}

/// Confusion graph `C_i` of a single receiver.
pub fn build_receiver_graph(
    inst: &FicpInstance,
    i: usize,
    budget: usize,
) -> Result<ConfusionGraph> {
    let n = check_budget(inst.field, inst.nk(), budget)?;
    let fibers = Fibers::new(inst.tabulate(i)?);
    Ok(ConfusionGraph {
        field: inst.field,
        nk: inst.nk(),
        graph: Graph::from_rows_par(n, |v, bits| fibers.mark_row(v, bits)),
        cayley: None,
    })
}

/// Confusion graph of the whole instance: union of all per-receiver edges.
pub fn build_graph(inst: &FicpInstance, budget: usize) -> Result<ConfusionGraph> {
    let n = check_budget(inst.field, inst.nk(), budget)?;
    let fibers: Vec<Fibers> = (0..inst.num_receivers())
        .map(|i| inst.tabulate(i).map(Fibers::new))
        .collect::<Result<_>>()?;
    Ok(ConfusionGraph {
        field: inst.field,
        nk: inst.nk(),
        graph: Graph::from_rows_par(n, |v, bits| fibers.iter().for_each(|f| f.mark_row(v, bits))),
        cayley: None,
    })
}

/// Edge-set union of graphs on the same vertex set. The Cayley annotation
/// survives when every summand carries one.
pub fn graph_sum(graphs: &[ConfusionGraph]) -> Result<ConfusionGraph> {
    let first = graphs
        .first()
        .ok_or_else(|| Error::DimensionMismatch("graph sum of an empty list".into()))?;
    let mut out = first.clone();
    for g in &graphs[1..] {
        if g.vertex_count() != out.vertex_count() || g.nk != out.nk || g.field != out.field {
            return Err(Error::VertexMismatch {
                left: out.vertex_count(),
                right: g.vertex_count(),
            });
        }
        out.graph.union_with(&g.graph);
        out.cayley = match (out.cayley.take(), &g.cayley) {
            (Some(a), Some(b)) => Some(a.union(b)?),
            _ => None,
        };
    }
    Ok(out)
}

/// Vertex labeling of the `m`-fold OR power that matches lifted instances:
/// coordinate `j` of the tuple supplies sub-packet `j` of every symbol, and
/// symbol `k`'s sub-packets are contiguous (scalar index `k·m + j`).
#[derive(Debug, Clone, Copy)]
pub struct PowerLabeling {
    pub field: PrimeField,
    /// Symbols per base vertex.
    pub base_len: usize,
    pub m: usize,
}

impl PowerLabeling {
    pub fn to_vertex(&self, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.m);
        let mut lifted = vec![0 as Symbol; self.base_len * self.m];
        let mut digits = vec![0 as Symbol; self.base_len];
        for (j, &a) in tuple.iter().enumerate() {
            self.field.unrank_into(a, &mut digits);
            for (k, &d) in digits.iter().enumerate() {
                lifted[k * self.m + j] = d;
            }
        }
        self.field.rank(&lifted)
    }

    pub fn to_tuple(&self, v: usize) -> Vec<usize> {
        let mut lifted = vec![0 as Symbol; self.base_len * self.m];
        self.field.unrank_into(v, &mut lifted);
        (0..self.m)
            .map(|j| {
                let digits: Vec<Symbol> =
                    (0..self.base_len).map(|k| lifted[k * self.m + j]).collect();
                self.field.rank(&digits)
            })
            .collect()
    }
}

/// Co-normal (OR) power `G^m`, labeled by [`PowerLabeling`].
///
/// The confusion graph of the `m`-fold lifted instance is a spanning
/// subgraph of this power, usually a proper one: a receiver that can tell
/// two vectors apart in one sub-packet is not confused by them at all,
/// whereas the power joins them as soon as any coordinate is confusable.
/// Upper bounds transfer from the power to lifted codes; lower bounds do not.
pub fn or_power(g: &ConfusionGraph, m: usize, budget: usize) -> Result<ConfusionGraph> {
    if m == 0 {
        return Err(Error::DimensionMismatch("OR power needs m >= 1".into()));
    }
    let len = g.nk * m;
    let n = check_budget(g.field, len, budget)?;
    let labeling = PowerLabeling {
        field: g.field,
        base_len: g.nk,
        m,
    };
    let tuples: Vec<usize> = (0..n).flat_map(|v| labeling.to_tuple(v)).collect();
    let base = &g.graph;
    let graph = Graph::from_rows_par(n, |v, bits| {
        let a = &tuples[v * m..(v + 1) * m];
        for u in 0..n {
            let b = &tuples[u * m..(u + 1) * m];
            if a.iter()
                .zip(b)
                .any(|(&x, &y)| x != y && base.has_edge(x, y))
            {
                bits[u / 64] |= 1 << (u % 64);
            }
        }
    });
    let cayley = match &g.cayley {
        Some(_) => {
            let elements = graph
                .neighbors(0)
                .map(|v| g.field.unrank(v, len))
                .collect::<Result<_>>()?;
            Some(ConnectionSet::new(g.field, len, elements)?)
        }
        None => None,
    };
    Ok(ConfusionGraph {
        field: g.field,
        nk: len,
        graph,
        cayley,
    })
}

/// Connection set `{s : s·M_H = 0, s·M_W != 0}` of a linear receiver,
/// found by enumerating the left null space of `M_H`.
pub fn connection_set_linear(inst: &FicpInstance, i: usize) -> Result<ConnectionSet> {
    let (mh, mw) = inst
        .receiver_matrices(i)
        .ok_or(Error::NotLinearReceiver(i))?;
    let field = inst.field;
    let nk = inst.nk();
    let basis = mh.left_null_space();
    let combos = field.word_count_usize(basis.len())?;
    let mut coeffs = vec![0; basis.len()];
    let mut elements = Vec::new();
    for c in 0..combos {
        field.unrank_into(c, &mut coeffs);
        let mut s = vec![0; nk];
        for (&a, b) in coeffs.iter().zip(&basis) {
            if a != 0 {
                for (si, &bi) in s.iter_mut().zip(b) {
                    *si = field.add(*si, field.mul(a, bi));
                }
            }
        }
        if mw.vec_mul(&s).iter().any(|&v| v != 0) {
            elements.push(Word::new(field, s)?);
        }
    }
    ConnectionSet::new(field, nk, elements)
}

/// Cayley graph of `(F_q^{len}, +)`: `x` is adjacent to `x + s` for every `s` in `set`.
pub fn cayley_from_connection_set(set: &ConnectionSet, budget: usize) -> Result<ConfusionGraph> {
    // Re-validate: ConnectionSet fields are private, but keep the contract local.
    let set = ConnectionSet::new(set.field, set.len, set.elements.clone())?;
    let field = set.field;
    let len = set.len;
    let n = check_budget(field, len, budget)?;
    let shifts: Vec<&[Symbol]> = set.elements.iter().map(Word::symbols).collect();
    let graph = Graph::from_rows_par(n, |v, bits| {
        let mut x = vec![0; len];
        field.unrank_into(v, &mut x);
        let mut y = vec![0; len];
        for s in &shifts {
            for ((yi, &xi), &si) in y.iter_mut().zip(&x).zip(s.iter()) {
                *yi = field.add(xi, si);
            }
            let u = field.rank(&y);
            bits[u / 64] |= 1 << (u % 64);
        }
    });
    Ok(ConfusionGraph {
        field,
        nk: len,
        graph,
        cayley: Some(set),
    })
}

/// [`cayley_graph`] for linear instances (keeping the Cayley annotation),
/// [`build_graph`] otherwise.
pub fn confusion_graph(inst: &FicpInstance, budget: usize) -> Result<ConfusionGraph> {
    if inst.is_linear() {
        cayley_graph(inst, budget)
    } else {
        build_graph(inst, budget)
    }
}

/// Confusion graph of a linear instance built as the Cayley graph of the
/// union of per-receiver connection sets.
pub fn cayley_graph(inst: &FicpInstance, budget: usize) -> Result<ConfusionGraph> {
    let mut set = ConnectionSet::empty(inst.field, inst.nk());
    for i in 0..inst.num_receivers() {
        set = set.union(&connection_set_linear(inst, i)?)?;
    }
    cayley_from_connection_set(&set, budget)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Regularity {
    pub regular: bool,
    pub degree: Option<usize>,
    pub min_degree: usize,
    pub max_degree: usize,
}

pub fn is_regular(g: &Graph) -> Regularity {
    let degrees: Vec<usize> = (0..g.vertex_count()).map(|v| g.degree(v)).collect();
    let min_degree = degrees.iter().copied().min().unwrap_or(0);
    let max_degree = degrees.iter().copied().max().unwrap_or(0);
    let regular = min_degree == max_degree;
    Regularity {
        regular,
        degree: regular.then_some(min_degree),
        min_degree,
        max_degree,
    }
}

/// Graphviz rendering with decimal vertex labels, vertices and edges ascending.
pub fn export_dot(g: &Graph) -> String {
    let mut out = String::from("graph confusion {\n");
    for v in 0..g.vertex_count() {
        writeln!(out, "  {v};").unwrap();
    }
    for (u, v) in g.edges() {
        writeln!(out, "  {u} -- {v};").unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> FicpInstance {
        FicpInstance::from_json(text).unwrap()
    }

    fn table2() -> FicpInstance {
        load(
            r#"{"q":2,"n":1,"K":3,"receivers":[
            {"has":["x1"],"wants":["x2+x3","x1+x3"]},
            {"has":["maj(x1,x2,x3)"],"wants":["x1","x2","x3"]}]}"#,
        )
    }

    fn table3() -> FicpInstance {
        load(
            r#"{"q":2,"n":1,"K":4,"receivers":[
            {"has":["x1+x2"],"wants":["x2+x3"]},
            {"has":["x3+x4"],"wants":["x1+x4","x1+x2+x3+x4"]}]}"#,
        )
    }

    fn words(field: PrimeField, texts: &[&str]) -> Vec<Word> {
        texts
            .iter()
            .map(|t| Word::parse(field, t).unwrap())
            .collect()
    }

    #[test]
    fn gel_cases() {
        let inst = table2();
        assert!(confusable(&inst, 0, 0, 1).unwrap());
        assert!(!confusable(&inst, 0, 0, 7).unwrap());
        assert!(!confusable(&inst, 1, 0, 7).unwrap());
        assert!(matches!(
            confusable(&inst, 0, 3, 3),
            Err(Error::SameVertex(3))
        ));
    }

    #[test]
    fn edge_count_matches_pairwise_oracle() {
        let inst = table2();
        let g = build_graph(&inst, DEFAULT_VERTEX_BUDGET).unwrap();
        let mut expected = 0;
        for x in 0..8 {
            for y in x + 1..8 {
                let c = (0..2).any(|i| confusable(&inst, i, x, y).unwrap());
                assert_eq!(g.has_edge(x, y), c, "({x},{y})");
                expected += usize::from(c);
            }
        }
        assert_eq!(g.edge_count(), expected);
    }

    #[test]
    fn sum_of_receiver_graphs() {
        let inst = table2();
        let parts: Vec<_> = (0..2)
            .map(|i| build_receiver_graph(&inst, i, DEFAULT_VERTEX_BUDGET).unwrap())
            .collect();
        let g = build_graph(&inst, DEFAULT_VERTEX_BUDGET).unwrap();
        assert_eq!(graph_sum(&parts).unwrap(), g);
        assert_eq!(graph_sum(&[g.clone(), g.clone()]).unwrap(), g);
        let empty = ConfusionGraph::edgeless(inst.field, 3, DEFAULT_VERTEX_BUDGET).unwrap();
        assert_eq!(graph_sum(&[g.clone(), empty]).unwrap(), g);
        let other = ConfusionGraph::edgeless(inst.field, 4, DEFAULT_VERTEX_BUDGET).unwrap();
        assert!(matches!(
            graph_sum(&[g, other]),
            Err(Error::VertexMismatch { .. })
        ));
    }

    #[test]
    fn omniscient_and_empty_side_information() {
        let all = load(r#"{"q":2,"n":1,"K":2,"receivers":[{"has":["x1","x2"],"wants":["x1"]}]}"#);
        assert_eq!(build_receiver_graph(&all, 0, 16).unwrap().edge_count(), 0);
        let none = load(r#"{"q":2,"n":1,"K":1,"receivers":[{"has":[],"wants":["x1"]}]}"#);
        let g = build_receiver_graph(&none, 0, 16).unwrap();
        assert_eq!(g.graph().edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn size_limit() {
        let inst = table3();
        assert!(matches!(
            build_graph(&inst, 15),
            Err(Error::SizeLimit {
                vertices: 16,
                budget: 15
            })
        ));
    }

    #[test]
    fn printed_connection_sets() {
        let inst = table3();
        let f = inst.field;
        let s1 = connection_set_linear(&inst, 0).unwrap();
        let mut e1 = words(f, &["0010", "0011", "1100", "1101"]);
        e1.sort_by_key(Word::rank);
        assert_eq!(s1.elements(), &e1[..]);
        let s2 = connection_set_linear(&inst, 1).unwrap();
        let mut e2 = words(f, &["1100", "1000", "0011", "0111", "0100", "1011"]);
        e2.sort_by_key(Word::rank);
        assert_eq!(s2.elements(), &e2[..]);
        assert!(matches!(
            connection_set_linear(&table2(), 1),
            Err(Error::NotLinearReceiver(1))
        ));
    }

    #[test]
    fn cayley_equals_pairwise_on_linear_instance() {
        let inst = table3();
        let pairwise = build_graph(&inst, DEFAULT_VERTEX_BUDGET).unwrap();
        let cayley = cayley_graph(&inst, DEFAULT_VERTEX_BUDGET).unwrap();
        assert_eq!(pairwise, cayley);
        let s = cayley.cayley_set().unwrap().len();
        let reg = is_regular(cayley.graph());
        assert!(reg.regular);
        assert_eq!(reg.degree, Some(s));
    }

    #[test]
    fn demand_inside_side_information_span() {
        let inst =
            load(r#"{"q":3,"n":1,"K":2,"receivers":[{"has":["x1","x2"],"wants":["x1+2*x2"]}]}"#);
        assert!(connection_set_linear(&inst, 0).unwrap().is_empty());
    }

    #[test]
    fn five_cycle_as_cayley_graph() {
        let f5 = PrimeField::new(5).unwrap();
        let s = ConnectionSet::new(f5, 1, words(f5, &["1", "4"])).unwrap();
        let g = cayley_from_connection_set(&s, 16).unwrap();
        assert_eq!(g.graph(), &Graph::cycle(5));
        let empty = cayley_from_connection_set(&ConnectionSet::empty(f5, 2), 64).unwrap();
        assert_eq!(empty.edge_count(), 0);
        assert!(is_regular(empty.graph()).regular);
        assert_eq!(is_regular(empty.graph()).degree, Some(0));
    }

    #[test]
    fn bad_connection_sets() {
        let f5 = PrimeField::new(5).unwrap();
        assert!(ConnectionSet::new(f5, 1, words(f5, &["1"])).is_err());
        assert!(ConnectionSet::new(f5, 1, words(f5, &["0"])).is_err());
        assert!(ConnectionSet::new(f5, 2, words(f5, &["1"])).is_err());
    }

    #[test]
    fn or_power_identity_and_labeling() {
        let inst = table2();
        let g = build_graph(&inst, DEFAULT_VERTEX_BUDGET).unwrap();
        assert_eq!(or_power(&g, 1, 64).unwrap(), g);
        let p = or_power(&g, 2, 64).unwrap();
        let lab = PowerLabeling {
            field: inst.field,
            base_len: 3,
            m: 2,
        };
        for u in 0..64 {
            assert_eq!(lab.to_vertex(&lab.to_tuple(u)), u);
            for v in 0..64 {
                let (a, b) = (lab.to_tuple(u), lab.to_tuple(v));
                let expected = u != v && (0..2).any(|j| g.has_edge(a[j], b[j]));
                assert_eq!(p.has_edge(u, v), expected);
            }
        }
        // (x1^1, x1^2, x2^1, x2^2, x3^1, x3^2) with tuple (1, 0) = ((0,0,1), (0,0,0))
        assert_eq!(lab.to_vertex(&[1, 0]), 0b000010);
    }

    #[test]
    fn lifted_graph_is_spanning_subgraph_of_or_power() {
        let inst = table2();
        let g = build_graph(&inst, DEFAULT_VERTEX_BUDGET).unwrap();
        let lifted = build_graph(&inst.lift(2).unwrap(), DEFAULT_VERTEX_BUDGET).unwrap();
        let power = or_power(&g, 2, DEFAULT_VERTEX_BUDGET).unwrap();
        assert!(lifted.graph().edges().all(|(u, v)| power.has_edge(u, v)));
        // Coordinates (0, 1) are confusable for R1, while (1, 7) is told
        // apart by both receivers: the lifted receivers see that difference.
        let lab = PowerLabeling {
            field: inst.field,
            base_len: 3,
            m: 2,
        };
        let (u, v) = (lab.to_vertex(&[0, 1]), lab.to_vertex(&[1, 7]));
        assert!(
            g.has_edge(0, 1)
                && !confusable(&inst, 0, 1, 7).unwrap()
                && !confusable(&inst, 1, 1, 7).unwrap()
        );
        assert!(power.has_edge(u, v));
        assert!(!lifted.has_edge(u, v));
    }

    #[test]
    fn linear_instances_get_cayley_graphs() {
        assert!(confusion_graph(&table3(), 64).unwrap().is_cayley());
        assert!(!confusion_graph(&table2(), 64).unwrap().is_cayley());
    }

    #[test]
    fn dot_export_is_ordered() {
        let g = Graph::from_edges(3, [(2, 0), (1, 2)]);
        assert_eq!(
            export_dot(&g),
            "graph confusion {\n  0;\n  1;\n  2;\n  0 -- 2;\n  1 -- 2;\n}\n"
        );
    }
}
