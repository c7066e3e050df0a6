//! Reading derivatives off lifted points.
//!
//! At a point `a_i + x_i` (one generator per input) the coefficient of the
//! basis monomial `x^α` in a lifted output is `∂^α f(a)/α!`, as long as `x^α`
//! is a basis monomial of the algebra.

use weil_core::lift::WeilPoint;
use weil_core::poly::Monomial;
use weil_core::scalar::factorial;
use weil_core::{Scalar, WeilAlgebra};

use crate::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct JetTerm<S> {
    pub monomial: Monomial,
    pub coefficient: S,
    /// `α! ·` coefficient, the partial derivative `∂^α f(a)`.
    pub derivative: S,
}

fn alpha_factorial<S: Scalar>(m: &Monomial) -> S {
    m.0.iter()
        .fold(S::one(), |acc, &e| acc * S::from_rational(&factorial(e as usize)))
}

/// Nonzero basis coordinates of every output component.
pub fn jet<S: Scalar>(out: &WeilPoint<S>) -> Vec<Vec<JetTerm<S>>> {
    let w = out.algebra();
    out.components()
        .iter()
        .map(|e| {
            w.basis()
                .iter()
                .zip(e.coords())
                .filter(|(_, c)| !c.is_zero())
                .map(|(m, c)| JetTerm {
                    monomial: m.clone(),
                    coefficient: c.clone(),
                    derivative: c.clone() * alpha_factorial(m),
                })
                .collect()
        })
        .collect()
}

fn one_generator_per_input(w: &WeilAlgebra, arity: usize) -> CliResult<()> {
    if w.n_gens() == arity {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "derivative extraction needs one generator per input: {arity} inputs, {} generators",
            w.n_gens()
        )))
    }
}

fn coefficient<S: Scalar>(w: &WeilAlgebra, coords: &[S], m: &Monomial) -> Option<S> {
    w.basis_index(m).map(|k| coords[k].clone())
}

/// `gradient[j][i] = ∂f_j/∂x_i`.
pub fn gradient<S: Scalar>(out: &WeilPoint<S>, arity: usize) -> CliResult<Vec<Vec<S>>> {
    let w = out.algebra();
    one_generator_per_input(w, arity)?;
    out.components()
        .iter()
        .map(|e| {
            (0..arity)
                .map(|i| {
                    coefficient(w, e.coords(), &Monomial::var(arity, i)).ok_or_else(|| {
                        CliError::Usage(format!("x{i} is not a basis monomial of the algebra"))
                    })
                })
                .collect()
        })
        .collect()
}

/// `hessian[j][i][k] = ∂²f_j/∂x_i∂x_k`, `None` where the algebra kills `x_i x_k`.
pub fn hessian<S: Scalar>(out: &WeilPoint<S>, arity: usize) -> CliResult<Vec<Vec<Vec<Option<S>>>>> {
    let w = out.algebra();
    one_generator_per_input(w, arity)?;
    if w.basis().iter().all(|m| m.degree() != 2) {
        return Err(CliError::Usage("the algebra has no second-order basis monomials".into()));
    }
    let h = out
        .components()
        .iter()
        .map(|e| {
            (0..arity)
                .map(|i| {
                    (0..arity)
                        .map(|k| {
                            let m = Monomial::var(arity, i).mul(&Monomial::var(arity, k));
                            coefficient(w, e.coords(), &m).map(|c| c * alpha_factorial(&m))
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(h)
}
