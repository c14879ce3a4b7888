//! Affine forms over named unknowns and exact Gaussian elimination.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational number in lowest terms with a positive denominator.
pub type Rational = Ratio<i64>;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

/// `constant + sum_i coeffs[i] * unknown_i`. Zero coefficients are never
/// stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinForm {
    pub constant: Rational,
    coeffs: BTreeMap<String, Rational>,
}

impl LinForm {
    pub fn constant(c: Rational) -> Self {
        LinForm {
            constant: c,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn var(name: &str) -> Self {
        LinForm::term(name, Rational::one())
    }

    pub fn term(name: &str, c: Rational) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(name.to_owned(), c);
        }
        LinForm {
            constant: Rational::zero(),
            coeffs,
        }
    }

    pub fn coeff(&self, name: &str) -> Rational {
        self.coeffs.get(name).copied().unwrap_or_else(Rational::zero)
    }

    pub fn unknowns(&self) -> impl Iterator<Item = &str> {
        self.coeffs.keys().map(String::as_str)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.is_constant() && self.constant.is_zero()
    }

    pub fn scale(&self, c: Rational) -> LinForm {
        if c.is_zero() {
            return LinForm::default();
        }
        LinForm {
            constant: self.constant * c,
            coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), *v * c)).collect(),
        }
    }

    /// Product of two forms; at least one must be constant to stay affine.
    pub fn try_mul(&self, other: &LinForm) -> Result<LinForm> {
        if self.is_constant() {
            Ok(other.scale(self.constant))
        } else if other.is_constant() {
            Ok(self.scale(other.constant))
        } else {
            Err(Error::Derivation(format!(
                "product of non-constant forms ({self}) * ({other})"
            )))
        }
    }

    pub fn eval(&self, values: &BTreeMap<String, Rational>) -> Result<Rational> {
        self.coeffs.iter().try_fold(self.constant, |acc, (k, c)| {
            values
                .get(k)
                .map(|v| acc + *c * *v)
                .ok_or_else(|| Error::Derivation(format!("no value for unknown {k}")))
        })
    }

    /// Flips the sign so the first nonzero unknown coefficient is positive.
    pub fn sign_normalized(&self) -> LinForm {
        match self.coeffs.values().next() {
            Some(c) if c.is_negative() => -self.clone(),
            _ => self.clone(),
        }
    }

    /// The same form with unknowns listed in `order` printed first.
    pub fn display_ordered(&self, order: &[String]) -> String {
        let mut parts: Vec<(Rational, &str)> = Vec::new();
        for name in order {
            if let Some(c) = self.coeffs.get(name) {
                parts.push((*c, name));
            }
        }
        for (name, c) in &self.coeffs {
            if !order.contains(name) {
                parts.push((*c, name));
            }
        }
        let mut out = String::new();
        for (i, (c, name)) in parts.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if i == 0 {
                if c.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(&format!(" {sign} "));
            }
            let mag = c.abs();
            if mag.is_one() {
                out.push_str(name);
            } else {
                out.push_str(&format!("{mag}{name}"));
            }
        }
        if !self.constant.is_zero() || parts.is_empty() {
            if parts.is_empty() {
                out.push_str(&self.constant.to_string());
            } else {
                let sign = if self.constant.is_negative() { "-" } else { "+" };
                out.push_str(&format!(" {sign} {}", self.constant.abs()));
            }
        }
        out
    }
}

impl fmt::Display for LinForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_ordered(&[]))
    }
}

impl Add for LinForm {
    type Output = LinForm;

    fn add(mut self, rhs: LinForm) -> LinForm {
        self.constant += rhs.constant;
        for (k, v) in rhs.coeffs {
            let slot = self.coeffs.entry(k.clone()).or_insert_with(Rational::zero);
            *slot += v;
            if slot.is_zero() {
                self.coeffs.remove(&k);
            }
        }
        self
    }
}

impl Neg for LinForm {
    type Output = LinForm;

    fn neg(self) -> LinForm {
        self.scale(-Rational::one())
    }
}

impl Sub for LinForm {
    type Output = LinForm;

    fn sub(self, rhs: LinForm) -> LinForm {
        self + (-rhs)
    }
}

impl Mul<Rational> for LinForm {
    type Output = LinForm;

    fn mul(self, rhs: Rational) -> LinForm {
        self.scale(rhs)
    }
}

/// Outcome of solving `form_i = 0` for all `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solution {
    Unique(BTreeMap<String, Rational>),
    /// Underdetermined: `free` unknowns remain after elimination.
    Family {
        rank: usize,
        free: Vec<String>,
    },
    Inconsistent,
}

/// Solves the homogeneous-form system `forms[i] = 0` over `unknowns` by
/// exact reduced row echelon form.
pub fn solve(forms: &[LinForm], unknowns: &[String]) -> Result<Solution> {
    for form in forms {
        if let Some(u) = form.unknowns().find(|u| !unknowns.iter().any(|n| n == u)) {
            return Err(Error::Derivation(format!(
                "equation {form} uses undeclared unknown {u}"
            )));
        }
    }
    let cols = unknowns.len();
    let mut rows: Vec<Vec<Rational>> = forms
        .iter()
        .map(|f| {
            let mut row: Vec<Rational> = unknowns.iter().map(|u| f.coeff(u)).collect();
            row.push(-f.constant);
            row
        })
        .collect();

    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut() {
            *v *= inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let factor = row[c];
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    if rows[r..].iter().any(|row| !row[cols].is_zero()) {
        return Ok(Solution::Inconsistent);
    }
    if pivots.len() < cols {
        let free = (0..cols)
            .filter(|c| !pivots.contains(c))
            .map(|c| unknowns[c].clone())
            .collect();
        return Ok(Solution::Family {
            rank: pivots.len(),
            free,
        });
    }
    Ok(Solution::Unique(
        pivots
            .iter()
            .enumerate()
            .map(|(i, &c)| (unknowns[c].clone(), rows[i][cols]))
            .collect(),
    ))
}

/// Number of independent equations among `forms`.
pub fn rank(forms: &[LinForm], unknowns: &[String]) -> Result<usize> {
    // Drop constants so the system is always consistent and the pivot count
    // is the rank of the coefficient part.
    let homogeneous: Vec<LinForm> = forms
        .iter()
        .map(|f| LinForm {
            constant: Rational::zero(),
            coeffs: f.coeffs.clone(),
        })
        .collect();
    Ok(match solve(&homogeneous, unknowns)? {
        Solution::Unique(_) => unknowns.len(),
        Solution::Family { rank, .. } => rank,
        Solution::Inconsistent => unreachable!("homogeneous systems are consistent"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn form_arithmetic_and_display() {
        let f = LinForm::constant(rat(1, 1)) - LinForm::var("a");
        assert_eq!(f.to_string(), "-a + 1");
        assert_eq!(f.sign_normalized().to_string(), "a - 1");
        let g = LinForm::var("g").scale(rat(3, 1)) + LinForm::var("d");
        assert_eq!(g.display_ordered(&names(&["g", "d"])), "3g + d");
        assert!((LinForm::var("a") - LinForm::var("a")).is_zero());
        assert!(LinForm::var("a").try_mul(&LinForm::var("b")).is_err());
        assert_eq!(
            LinForm::constant(rat(-1, 2))
                .try_mul(&LinForm::term("e", rat(2, 1)))
                .unwrap(),
            LinForm::term("e", rat(-1, 1))
        );
    }

    #[test]
    fn unique_family_and_inconsistent() {
        let u = names(&["x", "y"]);
        // x + y = 3, x - y = 1
        let eqs = [
            LinForm::var("x") + LinForm::var("y") - LinForm::constant(rat(3, 1)),
            LinForm::var("x") - LinForm::var("y") - LinForm::constant(rat(1, 1)),
        ];
        let Solution::Unique(sol) = solve(&eqs, &u).unwrap() else {
            panic!()
        };
        assert_eq!(sol["x"], rat(2, 1));
        assert_eq!(sol["y"], rat(1, 1));

        let fam = solve(&eqs[..1], &u).unwrap();
        assert_eq!(
            fam,
            Solution::Family {
                rank: 1,
                free: names(&["y"])
            }
        );

        let bad = [LinForm::var("x"), LinForm::var("x") - LinForm::constant(rat(1, 1))];
        assert_eq!(solve(&bad, &u).unwrap(), Solution::Inconsistent);
        assert!(solve(&[LinForm::var("z")], &u).is_err());
        assert_eq!(rank(&bad, &u).unwrap(), 1);
    }
}
