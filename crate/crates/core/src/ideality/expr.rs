//! Linear combinations of products of subsystem `K` values.
//!
//! A product `K_{X1} K_{X2} ...` is stored as the sorted list of its
//! component blocks. Adjoining a trivial system removes it from every
//! block, and a block left empty contributes `K = 1`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use super::linear::{LinForm, Rational};
use crate::error::{Error, Result};
use crate::partition::{members, Block, Shape};

/// A product of `K` values, one per block.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term(Vec<Block>);

impl Term {
    pub fn new(blocks: impl IntoIterator<Item = Block>) -> Self {
        let mut b: Vec<Block> = blocks.into_iter().filter(|&b| b != 0).collect();
        b.sort_unstable();
        Term(b)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.0
    }

    pub fn shape(&self) -> Shape {
        Shape::of_blocks(&self.0)
    }

    fn map(&self, f: &impl Fn(Block) -> Block) -> Term {
        Term::new(self.0.iter().map(|&b| f(b)))
    }

    fn times(&self, other: &Term) -> Term {
        Term::new(self.0.iter().chain(&other.0).copied())
    }
}

const NAMES: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ";

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for &b in &self.0 {
            let name: String = members(b).map(|i| NAMES[i] as char).collect();
            write!(f, "K_{name}")?;
        }
        Ok(())
    }
}

/// `sum_t coeff_t * t`, always with nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Expr(BTreeMap<Term, LinForm>);

impl Expr {
    pub fn new() -> Self {
        Expr::default()
    }

    pub fn add_term(&mut self, term: Term, coeff: LinForm) {
        let slot = self.0.entry(term.clone()).or_default();
        *slot = std::mem::take(slot) + coeff;
        if slot.is_zero() {
            self.0.remove(&term);
        }
    }

    pub fn add_expr(&mut self, other: &Expr) {
        for (t, c) in &other.0 {
            self.add_term(t.clone(), c.clone());
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Term, &LinForm)> {
        self.0.iter()
    }

    pub fn coeff(&self, term: &Term) -> LinForm {
        self.0.get(term).cloned().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scale(&self, c: Rational) -> Expr {
        let mut out = Expr::new();
        for (t, f) in &self.0 {
            out.add_term(t.clone(), f.scale(c));
        }
        out
    }

    /// Multiplies every coefficient by `factor` and every term by `extra`.
    pub fn times(&self, factor: &LinForm, extra: &Term) -> Result<Expr> {
        let mut out = Expr::new();
        for (t, c) in &self.0 {
            out.add_term(t.times(extra), c.try_mul(factor)?);
        }
        Ok(out)
    }

    /// Applies `f` to every block, merging terms that coincide afterwards.
    pub fn map_blocks(&self, f: impl Fn(Block) -> Block) -> Expr {
        let mut out = Expr::new();
        for (t, c) in &self.0 {
            out.add_term(t.map(&f), c.clone());
        }
        out
    }

    /// Substitutes trivial systems for the components in `trivial`.
    pub fn reduce_trivial(&self, trivial: Block) -> Expr {
        self.map_blocks(|b| b & !trivial)
    }

    /// Groups terms by block-size shape. Fails if two terms of the same
    /// shape carry different coefficients, i.e. the expression is not
    /// permutation symmetric.
    pub fn by_shape(&self) -> Result<BTreeMap<Shape, LinForm>> {
        let mut out: BTreeMap<Shape, LinForm> = BTreeMap::new();
        for (t, c) in &self.0 {
            let shape = t.shape();
            match out.get(&shape) {
                Some(prev) if prev != c => {
                    return Err(Error::Derivation(format!(
                        "terms of shape {shape} have different coefficients ({prev} vs {c})"
                    )))
                }
                _ => {
                    out.insert(shape, c.clone());
                }
            }
        }
        Ok(out)
    }

    /// Evaluates a constant-coefficient expression with `k(block)`.
    pub fn evaluate(&self, k: impl Fn(Block) -> Result<i128>) -> Result<Rational> {
        let mut acc = Rational::zero();
        for (t, c) in &self.0 {
            if !c.is_constant() {
                return Err(Error::Derivation(format!("coefficient {c} is not a number")));
            }
            let mut product: i128 = 1;
            for &b in t.blocks() {
                product = product.checked_mul(k(b)?).ok_or(Error::Overflow("K product"))?;
            }
            let product = i64::try_from(product).map_err(|_| Error::Overflow("K product"))?;
            acc += c.constant * Rational::from_integer(product);
        }
        Ok(acc)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        for (i, (t, c)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c}){t}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideality::linear::rat;

    #[test]
    fn trivial_reduction_merges_terms() {
        // K_AB K_C + K_AC K_B + K_BC K_A with C trivial -> K_AB + 2 K_A K_B
        let mut e = Expr::new();
        e.add_term(Term::new([0b011, 0b100]), LinForm::constant(rat(1, 1)));
        e.add_term(Term::new([0b101, 0b010]), LinForm::constant(rat(1, 1)));
        e.add_term(Term::new([0b110, 0b001]), LinForm::constant(rat(1, 1)));
        let r = e.reduce_trivial(0b100);
        assert_eq!(r.coeff(&Term::new([0b011])), LinForm::constant(rat(1, 1)));
        assert_eq!(r.coeff(&Term::new([0b001, 0b010])), LinForm::constant(rat(2, 1)));
        assert_eq!(r.len(), 2);
        assert_eq!(Term::new([0b011, 0b100]).to_string(), "K_ABK_C");
    }

    #[test]
    fn asymmetric_expression_is_detected() {
        let mut e = Expr::new();
        e.add_term(Term::new([0b01, 0b10]), LinForm::constant(rat(1, 1)));
        assert!(e.by_shape().is_ok());
        e.add_term(Term::new([0b011, 0b100]), LinForm::constant(rat(1, 1)));
        e.add_term(Term::new([0b101, 0b010]), LinForm::constant(rat(2, 1)));
        assert!(e.by_shape().is_err());
    }
}
