use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::expr::{parse_expr, Expr, ParseContext};
use super::linear::{extract_linear, Linearity};
use crate::error::{Error, Result};
use crate::field::{Matrix, PrimeField, Symbol, Word};

/// A vector-valued function of the `nK` scalar message symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FuncDef {
    pub outputs: Vec<Expr>,
}

impl FuncDef {
    pub fn new(outputs: Vec<Expr>) -> Self {
        FuncDef { outputs }
    }

    pub fn scalar(e: Expr) -> Self {
        FuncDef { outputs: vec![e] }
    }

    pub fn arity(&self) -> usize {
        self.outputs.len()
    }

    pub fn eval(&self, field: &PrimeField, x: &[Symbol]) -> Vec<Symbol> {
        self.outputs.iter().map(|e| e.eval(field, x)).collect()
    }

    fn eval_into(&self, field: &PrimeField, x: &[Symbol], out: &mut Vec<Symbol>) {
        out.extend(self.outputs.iter().map(|e| e.eval(field, x)));
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Receiver {
    pub has: Vec<FuncDef>,
    pub wants: Vec<FuncDef>,
}

/// A functional index coding problem: `K` messages of `n` sub-packets
/// each over F_q, and receivers with Has/Want function lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FicpInstance {
    pub field: PrimeField,
    pub n: usize,
    pub k: usize,
    pub receivers: Vec<Receiver>,
}

/// Per-receiver tabulation of Has- and Want-values over every message
/// vector, with values interned to dense ids in order of first appearance.
#[derive(Debug, Clone)]
pub struct ValueTable {
    pub has_ids: Vec<u32>,
    pub want_ids: Vec<u32>,
    pub has_values: Vec<Vec<Symbol>>,
    pub want_values: Vec<Vec<Symbol>>,
}

fn intern(values: Vec<Vec<Symbol>>) -> (Vec<u32>, Vec<Vec<Symbol>>) {
    let mut index: HashMap<Vec<Symbol>, u32> = HashMap::new();
    let mut distinct = Vec::new();
    let ids = values
        .into_iter()
        .map(|v| {
            *index.entry(v).or_insert_with_key(|v| {
                distinct.push(v.clone());
                (distinct.len() - 1) as u32
            })
        })
        .collect();
    (ids, distinct)
}

impl FicpInstance {
    pub fn nk(&self) -> usize {
        self.n * self.k
    }

    pub fn num_receivers(&self) -> usize {
        self.receivers.len()
    }

    pub fn vertex_count(&self) -> Option<u128> {
        self.field.word_count(self.nk())
    }

    pub fn parse_context(&self) -> ParseContext {
        ParseContext {
            field: self.field,
            n: self.n,
            k: self.k,
        }
    }

    fn values(&self, funcs: &[FuncDef], x: &[Symbol]) -> Vec<Word> {
        funcs
            .iter()
            .map(|f| {
                Word::new(self.field, f.eval(&self.field, x))
                    .expect("evaluation stays in the field")
            })
            .collect()
    }

    /// `H_i(x)`, one word per Has-function.
    pub fn has_value(&self, i: usize, x: &[Symbol]) -> Vec<Word> {
        self.values(&self.receivers[i].has, x)
    }

    /// `W_i(x)`, one word per Want-function.
    pub fn want_value(&self, i: usize, x: &[Symbol]) -> Vec<Word> {
        self.values(&self.receivers[i].wants, x)
    }

    /// Concatenated Has-value; equal tuples have equal keys since arities are fixed.
    pub fn has_key(&self, i: usize, x: &[Symbol]) -> Vec<Symbol> {
        let mut out = Vec::new();
        for f in &self.receivers[i].has {
            f.eval_into(&self.field, x, &mut out);
        }
        out
    }

    pub fn want_key(&self, i: usize, x: &[Symbol]) -> Vec<Symbol> {
        let mut out = Vec::new();
        for f in &self.receivers[i].wants {
            f.eval_into(&self.field, x, &mut out);
        }
        out
    }

    /// Tabulates receiver `i` over all `q^{nK}` message vectors.
    pub fn tabulate(&self, i: usize) -> Result<ValueTable> {
        let count = self.field.word_count_usize(self.nk())?;
        let nk = self.nk();
        let (has, want): (Vec<_>, Vec<_>) = (0..count)
            .into_par_iter()
            .map_init(
                || vec![0; nk],
                |x, label| {
                    self.field.unrank_into(label, x);
                    (self.has_key(i, x), self.want_key(i, x))
                },
            )
            .unzip();
        let (has_ids, has_values) = intern(has);
        let (want_ids, want_values) = intern(want);
        Ok(ValueTable {
            has_ids,
            want_ids,
            has_values,
            want_values,
        })
    }

    /// Replicates a scalar (`n = 1`) instance over `m` sub-packets. Sub-packet
    /// `j` of message `k` becomes scalar variable `k·m + j`; every scalar output
    /// expands to `m` consecutive outputs, one per sub-packet.
    pub fn lift(&self, m: usize) -> Result<FicpInstance> {
        if self.n != 1 {
            return Err(Error::InvalidInstance(vec![format!(
                "lifting requires block length 1, instance has n = {}",
                self.n
            )]));
        }
        if m == 0 {
            return Err(Error::InvalidInstance(vec![
                "lift factor must be at least 1".into(),
            ]));
        }
        let lift_func = |f: &FuncDef| FuncDef {
            outputs: f
                .outputs
                .iter()
                .flat_map(|e| (0..m).map(move |j| e.map_vars(&|k| k * m + j)))
                .collect(),
        };
        Ok(FicpInstance {
            field: self.field,
            n: m,
            k: self.k,
            receivers: self
                .receivers
                .iter()
                .map(|r| Receiver {
                    has: r.has.iter().map(lift_func).collect(),
                    wants: r.wants.iter().map(lift_func).collect(),
                })
                .collect(),
        })
    }

    /// Linearity of every function of receiver `i`.
    pub fn receiver_matrices(&self, i: usize) -> Option<(Matrix, Matrix)> {
        let r = &self.receivers[i];
        let collect = |funcs: &[FuncDef]| -> Option<Matrix> {
            let mut parts = Vec::new();
            for f in funcs {
                match extract_linear(f, self) {
                    Linearity::Affine(form) if form.is_linear() => parts.push(form.coeffs),
                    _ => return None,
                }
            }
            Matrix::hstack(self.field, self.nk(), &parts).ok()
        };
        Some((collect(&r.has)?, collect(&r.wants)?))
    }

    /// A linear FICP: every Has- and Want-function is linear with zero constant.
    pub fn is_linear(&self) -> bool {
        (0..self.num_receivers()).all(|i| self.receiver_matrices(i).is_some())
    }

    pub fn from_json(text: &str) -> Result<FicpInstance> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.into_instance()
    }

    pub fn to_json(&self) -> String {
        let render = |f: &FuncDef| {
            if f.outputs.len() == 1 {
                FuncText::Single(f.outputs[0].render(self.n))
            } else {
                FuncText::Multi(f.outputs.iter().map(|e| e.render(self.n)).collect())
            }
        };
        let file = InstanceFile {
            name: None,
            q: self.field.q(),
            n: self.n,
            k: self.k,
            receivers: self
                .receivers
                .iter()
                .map(|r| ReceiverFile {
                    has: r.has.iter().map(render).collect(),
                    wants: r.wants.iter().map(render).collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("instance serializes")
    }

    /// Checks structural invariants and flags vacuous demands. Enumerates
    /// message vectors only when `q^{nK} <= budget`.
    pub fn validate(&self, budget: usize) -> ValidationReport {
        let mut report = ValidationReport::default();
        let nk = self.nk();
        if self.n == 0 {
            report
                .errors
                .push("block length n must be at least 1".into());
        }
        if self.k == 0 {
            report
                .errors
                .push("message count K must be at least 1".into());
        }
        if self.receivers.is_empty() {
            report
                .errors
                .push("at least one receiver is required".into());
        }
        for (i, r) in self.receivers.iter().enumerate() {
            if r.wants.is_empty() {
                report
                    .errors
                    .push(format!("receiver {} has an empty Want-set", i + 1));
            }
            for (kind, funcs) in [("Has", &r.has), ("Want", &r.wants)] {
                for (j, f) in funcs.iter().enumerate() {
                    let tag = format!("receiver {} {kind}-function {}", i + 1, j + 1);
                    if f.outputs.is_empty() {
                        report.errors.push(format!("{tag} has no outputs"));
                    }
                    if f.outputs.iter().filter_map(Expr::max_var).any(|v| v >= nk) {
                        report
                            .errors
                            .push(format!("{tag} references a variable outside 0..{nk}"));
                    }
                    if self.field.q() != 2 && f.outputs.iter().any(Expr::uses_boolean_ops) {
                        report
                            .errors
                            .push(format!("{tag} uses maj/not over q = {}", self.field.q()));
                    }
                    if !f.outputs.is_empty() && f.arity() != self.n {
                        report.notes.push(format!(
                            "{tag} has {} outputs (block length is {})",
                            f.arity(),
                            self.n
                        ));
                    }
                }
            }
        }
        report.notes.push(
            "confusable pairs: H_i(x) = H_i(x') and W_i(x) != W_i(x') (generalized exclusive law)"
                .into(),
        );
        if !report.errors.is_empty() {
            return report;
        }
        match self.vertex_count() {
            Some(v) if v <= budget as u128 => {
                for i in 0..self.num_receivers() {
                    let t = self.tabulate(i).expect("within budget");
                    let mut first_want: HashMap<u32, u32> = HashMap::new();
                    let vacuous = t
                        .has_ids
                        .iter()
                        .zip(&t.want_ids)
                        .all(|(h, w)| *first_want.entry(*h).or_insert(*w) == *w);
                    if vacuous {
                        report.warnings.push(format!(
                            "receiver {} wants a function of its own Has-value (zero-entropy demand)",
                            i + 1
                        ));
                    }
                }
            }
            _ => report
                .notes
                .push("instance too large to enumerate; vacuous-demand check skipped".into()),
        }
        report
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum FuncText {
    Single(String),
    Multi(Vec<String>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ReceiverFile {
    has: Vec<FuncText>,
    wants: Vec<FuncText>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct InstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    q: u32,
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    receivers: Vec<ReceiverFile>,
}

impl InstanceFile {
    fn into_instance(self) -> Result<FicpInstance> {
        let field = PrimeField::new(self.q)?;
        let ctx = ParseContext {
            field,
            n: self.n,
            k: self.k,
        };
        let func = |text: &FuncText| -> Result<FuncDef> {
            let texts: Vec<&String> = match text {
                FuncText::Single(s) => vec![s],
                FuncText::Multi(v) => v.iter().collect(),
            };
            Ok(FuncDef {
                outputs: texts
                    .into_iter()
                    .map(|t| parse_expr(t, ctx))
                    .collect::<std::result::Result<_, _>>()?,
            })
        };
        let receivers = self
            .receivers
            .iter()
            .map(|r| {
                Ok(Receiver {
                    has: r.has.iter().map(func).collect::<Result<_>>()?,
                    wants: r.wants.iter().map(func).collect::<Result<_>>()?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(FicpInstance {
            field,
            n: self.n,
            k: self.k,
            receivers,
        })
    }
}
