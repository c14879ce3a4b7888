//! Exact derivation of `n`-local ideality coefficients.
//!
//! The ideality condition for `n + 1` components is written as
//!
//! ```text
//! K_{A1..A(n+1)} = sum over partitions P != {all} of alpha_shape(P) * prod_{blocks} K_block
//! ```
//!
//! with one unknown coefficient per block-size shape, since the right-hand
//! side must be symmetric under permutations of the components. The
//! coefficients are pinned down by three requirements:
//!
//! - adjoining trivial systems (`K = 1`, no effect on larger systems) must
//!   not turn the condition into a lower-level one, so every trivial
//!   reduction must vanish identically;
//! - for `n = 3`, every bilocally ideal theory must also satisfy the
//!   condition, which gives a one-parameter family in `epsilon`;
//! - the two must agree.
//!
//! Everything is derived symbolically with exact rationals.

mod expr;
pub mod linear;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;
use serde::Serialize;

pub use expr::{Expr, Term};
pub use linear::{rat, LinForm, Rational, Solution};

use crate::counting::{kl_multi, SystemDims, TheoryProfile};
use crate::error::{domain, Error, Result};
use crate::partition::{integer_partitions, members, permutations, permute_block, set_partitions, Block, Shape};

/// Name of the free parameter of the inclusion family.
pub const EPSILON: &str = "epsilon";

const GREEK: [&str; 4] = ["alpha", "beta", "gamma", "delta"];

fn unknown_name(i: usize) -> String {
    GREEK.get(i).map_or_else(|| format!("c{}", i + 1), |g| g.to_string())
}

/// Permutation-symmetric ideality ansatz for `n + 1` components.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionAnsatz {
    pub n: usize,
    /// Shapes in reverse lexicographic order with their coefficients.
    pub terms: Vec<(Shape, LinForm)>,
}

impl PartitionAnsatz {
    pub fn components(&self) -> usize {
        self.n + 1
    }

    pub fn unknowns(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for (_, c) in &self.terms {
            for u in c.unknowns() {
                if !out.iter().any(|o| o == u) {
                    out.push(u.to_owned());
                }
            }
        }
        out
    }

    fn coeff_of(&self, shape: &Shape) -> Option<&LinForm> {
        self.terms.iter().find(|(s, _)| s == shape).map(|(_, c)| c)
    }

    /// `K_all - sum_P coeff(shape(P)) prod K_block`.
    pub fn equation(&self) -> Result<Expr> {
        let m = self.components();
        let all: Block = (1 << m) - 1;
        let mut e = Expr::new();
        e.add_term(Term::new([all]), LinForm::constant(Rational::one()));
        for partition in set_partitions(m) {
            if partition.len() == 1 {
                continue;
            }
            let shape = Shape::of_blocks(&partition);
            let coeff = self
                .coeff_of(&shape)
                .ok_or_else(|| Error::Derivation(format!("ansatz has no coefficient for shape {shape}")))?;
            e.add_term(Term::new(partition), -coeff.clone());
        }
        Ok(e)
    }

    /// Number of labeled partitions with the given shape.
    pub fn multiplicity(&self, shape: &Shape) -> usize {
        set_partitions(self.components())
            .iter()
            .filter(|p| &Shape::of_blocks(p) == shape)
            .count()
    }

    /// The ansatz with every unknown replaced by its solved value.
    pub fn substitute(&self, values: &BTreeMap<String, Rational>) -> Result<PartitionAnsatz> {
        Ok(PartitionAnsatz {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(s, c)| Ok((s.clone(), LinForm::constant(c.eval(values)?))))
                .collect::<Result<_>>()?,
        })
    }
}

/// One unknown per partition shape of `n + 1` elements other than the single
/// block.
pub fn build_ansatz(n: usize) -> Result<PartitionAnsatz> {
    if n == 0 {
        return Err(domain("locality level must be at least 1"));
    }
    if n + 1 > 12 {
        return Err(domain("ansatz supports at most 12 components"));
    }
    let terms = integer_partitions(n + 1)
        .into_iter()
        .skip(1)
        .enumerate()
        .map(|(i, shape)| (shape, LinForm::var(&unknown_name(i))))
        .collect();
    Ok(PartitionAnsatz { n, terms })
}

/// Origin of a constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Identity forced by adjoining this many trivial systems.
    TrivialSystem(usize),
    Novelty,
    Inclusion,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::TrivialSystem(t) => write!(f, "trivial-system-{t}"),
            Provenance::Novelty => f.write_str("novelty"),
            Provenance::Inclusion => f.write_str("inclusion(epsilon)"),
        }
    }
}

/// `form = 0` with its origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub form: LinForm,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstraintSystem {
    pub unknowns: Vec<String>,
    pub equations: Vec<Constraint>,
}

impl ConstraintSystem {
    pub fn new(unknowns: Vec<String>) -> Self {
        ConstraintSystem {
            unknowns,
            equations: Vec::new(),
        }
    }

    pub fn push(&mut self, form: LinForm, provenance: Provenance) -> Result<()> {
        if let Some(u) = form.unknowns().find(|u| !self.unknowns.iter().any(|n| n == u)) {
            return Err(Error::Derivation(format!(
                "equation {form} uses undeclared unknown {u}"
            )));
        }
        self.equations.push(Constraint { form, provenance });
        Ok(())
    }

    pub fn extend(&mut self, other: &ConstraintSystem) -> Result<()> {
        for u in &other.unknowns {
            if !self.unknowns.contains(u) {
                self.unknowns.push(u.clone());
            }
        }
        for c in &other.equations {
            self.push(c.form.clone(), c.provenance)?;
        }
        Ok(())
    }

    fn forms(&self) -> Vec<LinForm> {
        self.equations.iter().map(|c| c.form.clone()).collect()
    }

    pub fn solve(&self) -> Result<Solution> {
        linear::solve(&self.forms(), &self.unknowns)
    }

    pub fn rank(&self) -> Result<usize> {
        linear::rank(&self.forms(), &self.unknowns)
    }

    /// Equations rendered as `lhs = rhs` with the constant moved right.
    pub fn render(&self) -> Vec<String> {
        self.equations
            .iter()
            .map(|c| {
                let lhs = c.form.clone() - LinForm::constant(c.form.constant);
                format!(
                    "{} = {}   [{}]",
                    lhs.display_ordered(&self.unknowns),
                    -c.form.constant,
                    c.provenance
                )
            })
            .collect()
    }
}

/// The ideality equation after adjoining trivial systems, written as
/// `sum_shape coeff(shape) * (sum of products of that shape) = 0` over the
/// surviving components.
#[derive(Debug, Clone, PartialEq)]
pub struct TrivialReduction {
    pub n: usize,
    pub num_trivial: usize,
    pub surviving: usize,
    pub relations: Vec<(Shape, LinForm)>,
}

impl TrivialReduction {
    pub fn relation(&self, shape: &Shape) -> LinForm {
        self.relations
            .iter()
            .find(|(s, _)| s == shape)
            .map(|(_, c)| c.clone())
            .unwrap_or_default()
    }

    /// Requires every shape coefficient to vanish.
    pub fn identity_constraints(&self, provenance: Provenance, unknowns: &[String]) -> Result<ConstraintSystem> {
        let mut sys = ConstraintSystem::new(unknowns.to_vec());
        for (_, form) in &self.relations {
            if !form.is_zero() {
                sys.push(form.sign_normalized(), provenance)?;
            }
        }
        Ok(sys)
    }
}

/// Adjoins `num_trivial` trivial systems (the last components) and collects
/// the coefficient of each surviving product shape.
pub fn trivial_reduce(ansatz: &PartitionAnsatz, num_trivial: usize) -> Result<TrivialReduction> {
    let m = ansatz.components();
    if num_trivial == 0 || num_trivial >= m {
        return Err(domain(format!(
            "need 1 <= trivial systems <= {} for level {}, got {num_trivial}",
            m - 1,
            ansatz.n
        )));
    }
    let surviving = m - num_trivial;
    let trivial: Block = ((1 << m) - 1) & !((1 << surviving) - 1);
    let reduced = ansatz.equation()?.reduce_trivial(trivial);
    let by_shape = reduced.by_shape()?;
    let relations = integer_partitions(surviving)
        .into_iter()
        .map(|s| {
            let c = by_shape.get(&s).cloned().unwrap_or_default();
            (s, c)
        })
        .collect();
    Ok(TrivialReduction {
        n: ansatz.n,
        num_trivial,
        surviving,
        relations,
    })
}

/// Constraints from trivial reductions at level `n`: a reduction that does
/// not vanish identically is either contradicted by triviality or collapses
/// to a lower-level condition.
fn level_constraints(ansatz: &PartitionAnsatz) -> Result<ConstraintSystem> {
    let unknowns = ansatz.unknowns();
    let provenance = if ansatz.n == 1 {
        Provenance::TrivialSystem(1)
    } else {
        Provenance::Novelty
    };
    trivial_reduce(ansatz, 1)?.identity_constraints(provenance, &unknowns)
}

/// `{alpha = 1, alpha + beta + gamma = 0, 3 gamma + delta = 0}` at level 3,
/// derived from the one-trivial reduction. The two-trivial reduction is
/// checked to add nothing new.
pub fn novelty_constraints(n: usize) -> Result<ConstraintSystem> {
    if n != 3 {
        return Err(Error::UnsupportedLevel(n));
    }
    let ansatz = build_ansatz(n)?;
    let novelty = level_constraints(&ansatz)?;
    let mut with_two = novelty.clone();
    with_two
        .extend(&trivial_reduce(&ansatz, 2)?.identity_constraints(Provenance::TrivialSystem(2), &ansatz.unknowns())?)?;
    if with_two.rank()? != novelty.rank()? {
        return Err(Error::Derivation(
            "two-trivial reduction is not implied by the one-trivial reduction".into(),
        ));
    }
    Ok(novelty)
}

/// Coefficients of the level-3 condition implied by bilocal ideality, as
/// affine functions of `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct InclusionFamily {
    /// Coefficients after symmetrizing the pair-substituted bilocal
    /// condition, before any replacement.
    pub symmetrized: Vec<(Shape, Rational)>,
    pub coefficients: Vec<(Shape, LinForm)>,
}

impl InclusionFamily {
    pub fn at(&self, epsilon: Rational) -> Result<Vec<(Shape, Rational)>> {
        let values = BTreeMap::from([(EPSILON.to_owned(), epsilon)]);
        self.coefficients
            .iter()
            .map(|(s, c)| Ok((s.clone(), c.eval(&values)?)))
            .collect()
    }
}

/// Coefficients of `sum coeff * products` in `K_all - (...) = 0`, read as
/// the right-hand side. The `K_all` coefficient must be one.
fn rhs_coefficients(e: &Expr, m: usize) -> Result<Vec<(Shape, LinForm)>> {
    let mut by_shape = e.by_shape()?;
    let top = by_shape.remove(&Shape::new(vec![m])).unwrap_or_default();
    if top != LinForm::constant(Rational::one()) {
        return Err(Error::Derivation(format!(
            "K of the whole system has coefficient {top}"
        )));
    }
    Ok(integer_partitions(m)
        .into_iter()
        .skip(1)
        .map(|s| {
            let c = by_shape.get(&s).cloned().unwrap_or_default();
            (s, -c)
        })
        .collect())
}

/// Places a three-component equation onto the given blocks.
fn embed_three(e: &Expr, targets: [Block; 3]) -> Expr {
    e.map_blocks(|b| members(b).fold(0, |acc, i| acc | targets[i]))
}

/// Rederives the inclusion family: take the bilocal condition on `A, B, CD`,
/// symmetrize over the 24 relabelings of `ABCD`, then rewrite every
/// three-component `K_T` as `K_T + 2 epsilon (K_T - bilocal(T))`, which adds
/// a multiple of a valid identity.
pub fn inclusion_family(n: usize) -> Result<InclusionFamily> {
    if n != 3 {
        return Err(Error::UnsupportedLevel(n));
    }
    let bilocal = solve_ideality(2)?.ansatz.equation()?;

    let pair_substituted = embed_three(&bilocal, [0b0001, 0b0010, 0b1100]);
    let perms = permutations(4);
    let mut symmetrized = Expr::new();
    for perm in &perms {
        symmetrized.add_expr(&pair_substituted.map_blocks(|b| permute_block(b, perm)));
    }
    let symmetrized = symmetrized.scale(rat(1, perms.len() as i64));
    let before = rhs_coefficients(&symmetrized, 4)?
        .into_iter()
        .map(|(s, c)| {
            if c.is_constant() {
                Ok((s, c.constant))
            } else {
                Err(Error::Derivation(format!(
                    "symmetrized coefficient {c} is not a number"
                )))
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let two_eps = LinForm::term(EPSILON, rat(2, 1));
    let mut replaced = symmetrized.clone();
    for (term, coeff) in symmetrized.terms() {
        let Some(&triple) = term.blocks().iter().find(|b| b.count_ones() == 3) else {
            continue;
        };
        let rest = Term::new(term.blocks().iter().copied().filter(|&b| b != triple));
        let singles: Vec<Block> = members(triple).map(|i| 1 << i).collect();
        let identity = embed_three(&bilocal, [singles[0], singles[1], singles[2]]);
        replaced.add_expr(&identity.times(&coeff.try_mul(&two_eps)?, &rest)?);
    }
    Ok(InclusionFamily {
        symmetrized: before,
        coefficients: rhs_coefficients(&replaced, 4)?,
    })
}

/// Solved ideality condition at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealitySolution {
    pub level: usize,
    /// The ansatz with numeric coefficients.
    pub ansatz: PartitionAnsatz,
    pub names: Vec<String>,
    pub epsilon: Option<Rational>,
    pub system: ConstraintSystem,
}

impl IdealitySolution {
    pub fn coefficients(&self) -> Vec<(Shape, String, Rational)> {
        self.ansatz
            .terms
            .iter()
            .zip(&self.names)
            .map(|((s, c), name)| (s.clone(), name.clone(), c.constant))
            .collect()
    }

    pub fn summary(&self) -> IdealitySummary {
        IdealitySummary {
            level: self.level,
            coefficients: self
                .coefficients()
                .into_iter()
                .map(|(shape, name, value)| CoefficientEntry {
                    name,
                    shape,
                    value: value.to_string(),
                })
                .collect(),
            epsilon: self.epsilon.map(|e| e.to_string()),
            constraints: self.system.render(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientEntry {
    pub name: String,
    pub shape: Shape,
    /// Exact fraction such as `-4/3`.
    pub value: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdealitySummary {
    pub level: usize,
    pub coefficients: Vec<CoefficientEntry>,
    pub epsilon: Option<String>,
    pub constraints: Vec<String>,
}

fn unique(system: &ConstraintSystem) -> Result<BTreeMap<String, Rational>> {
    match system.solve()? {
        Solution::Unique(values) => Ok(values),
        Solution::Family { free, .. } => Err(Error::Derivation(format!(
            "constraints are underdetermined (free: {})",
            free.join(", ")
        ))),
        Solution::Inconsistent => Err(Error::Derivation("constraints are inconsistent".into())),
    }
}

/// Solves the ideality coefficients for levels 1, 2 and 3.
pub fn solve_ideality(n: usize) -> Result<IdealitySolution> {
    if !(1..=3).contains(&n) {
        return Err(Error::UnsupportedLevel(n));
    }
    let ansatz = build_ansatz(n)?;
    let names = ansatz.unknowns();
    let (system, epsilon) = if n < 3 {
        (level_constraints(&ansatz)?, None)
    } else {
        let mut system = novelty_constraints(3)?;
        system.extend(&trivial_reduce(&ansatz, 2)?.identity_constraints(Provenance::TrivialSystem(2), &names)?)?;
        system.unknowns.push(EPSILON.to_owned());
        let family = inclusion_family(3)?;
        for ((shape, unknown), (fshape, form)) in ansatz.terms.iter().zip(&family.coefficients) {
            debug_assert_eq!(shape, fshape);
            system.push(unknown.clone() - form.clone(), Provenance::Inclusion)?;
        }
        let values = unique(&system)?;
        (system, Some(values[EPSILON]))
    };
    let values = unique(&system)?;
    Ok(IdealitySolution {
        level: n,
        ansatz: ansatz.substitute(&values)?,
        names,
        epsilon,
        system,
    })
}

/// Result of evaluating the level-3 condition on a concrete theory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InclusionCheck {
    /// `|scale * (K_ABCD - rhs)|`, an exact integer.
    pub residual: u128,
    /// Common denominator of the coefficients.
    pub scale: i64,
    pub k_total: u64,
}

/// Evaluates the solved 3-local ideality condition with `K` values computed
/// from the profile, scaled to clear denominators.
pub fn verify_inclusion_numeric(profile: &TheoryProfile, dims: &SystemDims) -> Result<InclusionCheck> {
    if dims.len() != 4 {
        return Err(domain("inclusion check needs exactly four components"));
    }
    let solution = solve_ideality(3)?;
    let scale = solution
        .ansatz
        .terms
        .iter()
        .fold(1i64, |acc, (_, c)| num_integer_lcm(acc, *c.constant.denom()));
    let equation = solution.ansatz.equation()?.scale(Rational::from_integer(scale));
    let k_of = |b: Block| -> Result<i128> {
        let sub: Vec<usize> = members(b).map(|i| dims.as_slice()[i]).collect();
        Ok(kl_multi(&SystemDims::new(sub)?, profile)?.k as i128)
    };
    let value = equation.evaluate(k_of)?;
    if !value.is_integer() {
        return Err(Error::Derivation(format!("scaled residual {value} is not an integer")));
    }
    Ok(InclusionCheck {
        residual: value.to_integer().unsigned_abs() as u128,
        scale,
        k_total: kl_multi(dims, profile)?.k,
    })
}

fn num_integer_lcm(a: i64, b: i64) -> i64 {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    (a / gcd(a, b) * b).abs()
}
