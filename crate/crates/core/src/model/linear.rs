use super::instance::{FicpInstance, FuncDef};
use crate::field::{Matrix, Symbol};

/// Largest instance checked exhaustively; larger ones fall back to
/// structural expansion of the expression trees.
pub const EXHAUSTIVE_LINEARITY_LIMIT: u128 = 1 << 16;

/// `f(x) = x·coeffs + constant`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearForm {
    /// `nK × arity` coefficient matrix; column `j` belongs to output `j`.
    pub coeffs: Matrix,
    pub constant: Vec<Symbol>,
}

impl LinearForm {
    pub fn is_linear(&self) -> bool {
        self.constant.iter().all(|&c| c == 0)
    }

    pub fn apply(&self, x: &[Symbol]) -> Vec<Symbol> {
        let f = self.coeffs.field();
        self.coeffs
            .vec_mul(x)
            .into_iter()
            .zip(&self.constant)
            .map(|(a, &b)| f.add(a, b))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Linearity {
    Affine(LinearForm),
    NotAffine,
}

pub fn extract_linear(f: &FuncDef, inst: &FicpInstance) -> Linearity {
    let field = inst.field;
    let nk = inst.nk();
    match inst.vertex_count() {
        Some(count) if count <= EXHAUSTIVE_LINEARITY_LIMIT => {
            let zero = vec![0; nk];
            let constant = f.eval(&field, &zero);
            let mut unit = zero.clone();
            let mut columns = vec![vec![0; nk]; f.arity()];
            for v in 0..nk {
                unit[v] = 1;
                for (j, val) in f.eval(&field, &unit).into_iter().enumerate() {
                    columns[j][v] = field.sub(val, constant[j]);
                }
                unit[v] = 0;
            }
            let form = LinearForm {
                coeffs: Matrix::from_columns(field, nk, &columns).expect("columns have nk entries"),
                constant,
            };
            let mut x = vec![0; nk];
            for label in 0..count as usize {
                field.unrank_into(label, &mut x);
                if form.apply(&x) != f.eval(&field, &x) {
                    return Linearity::NotAffine;
                }
            }
            Linearity::Affine(form)
        }
        _ => {
            let mut columns = Vec::with_capacity(f.arity());
            let mut constant = Vec::with_capacity(f.arity());
            for e in &f.outputs {
                let Some((c, b)) = e.structural_affine(&field, nk) else {
                    return Linearity::NotAffine;
                };
                columns.push(c);
                constant.push(b);
            }
            Linearity::Affine(LinearForm {
                coeffs: Matrix::from_columns(field, nk, &columns).expect("columns have nk entries"),
                constant,
            })
        }
    }
}
