//! Constraint systems over bounded integer variables.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::expr::ConstraintExpr;
use crate::ensemble::Occupation;
use crate::error::{Error, Result};

/// Largest domain [`feasible_set`] and the solver will enumerate.
pub const MAX_ENUMERATION: u128 = 100_000_000;

/// Constraint values of one tuple, one entry per constraint.
pub type ValueVector = SmallVec<[i128; 2]>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=", alias = "le")]
    Le,
    #[serde(rename = "=", alias = "==", alias = "eq")]
    Eq,
    #[serde(rename = ">=", alias = "ge")]
    Ge,
}

/// Exact ordering of an integer against a finite real.
pub fn cmp_int_real(v: i128, x: f64) -> Ordering {
    const LIMIT: f64 = 170141183460469231731687303715884105728.0; // 2^127
    if x >= LIMIT {
        return Ordering::Less;
    }
    if x < -LIMIT {
        return Ordering::Greater;
    }
    let f = x.floor();
    let fi = f as i128;
    match v.cmp(&fi) {
        Ordering::Less => Ordering::Less,
        Ordering::Greater => Ordering::Greater,
        Ordering::Equal if x == f => Ordering::Equal,
        Ordering::Equal => Ordering::Less,
    }
}

impl Relation {
    /// `v (rel) bound`, compared exactly.
    pub fn holds(self, v: i128, bound: f64) -> bool {
        let o = cmp_int_real(v, bound);
        match self {
            Self::Le => o != Ordering::Greater,
            Self::Eq => o == Ordering::Equal,
            Self::Ge => o != Ordering::Less,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    #[serde(default)]
    pub lower: u64,
    pub upper: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub expr: String,
    pub relation: Relation,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub spec: ConstraintSpec,
    pub expr: ConstraintExpr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RawSystem {
    variables: Vec<Variable>,
    constraints: Vec<ConstraintSpec>,
}

/// `B` constraints `f_k (rel) a_k` over `A` variables in `[lower, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
}

impl Serialize for ConstraintSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawSystem {
            variables: self.variables.clone(),
            constraints: self.constraints.iter().map(|c| c.spec.clone()).collect(),
        }
        .serialize(s)
    }
}

impl ConstraintSystem {
    pub fn new(variables: Vec<Variable>, constraints: Vec<ConstraintSpec>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::InvalidConfig("no variables".into()));
        }
        if constraints.is_empty() {
            return Err(Error::InvalidConfig("no constraints".into()));
        }
        let names: Vec<String> = variables.iter().map(|v| v.name.clone()).collect();
        for (i, v) in variables.iter().enumerate() {
            if v.lower > v.upper {
                return Err(Error::InvalidConfig(format!(
                    "variable {} has lower > upper",
                    v.name
                )));
            }
            if names[..i].contains(&v.name) {
                return Err(Error::InvalidConfig(format!(
                    "variable {} declared twice",
                    v.name
                )));
            }
        }
        let constraints = constraints
            .into_iter()
            .map(|spec| {
                if !spec.bound.is_finite() {
                    return Err(Error::InvalidConfig(format!(
                        "bound of '{}' is not finite",
                        spec.expr
                    )));
                }
                let expr = ConstraintExpr::parse(&spec.expr, &names)?;
                Ok(Constraint { spec, expr })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            variables,
            constraints,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawSystem = serde_json::from_str(text)?;
        Self::new(raw.variables, raw.constraints)
    }

    /// One linear-coupling constraint `m1·m2 = N` over the factoring ranges.
    pub fn factoring(n: u64) -> Result<Self> {
        let r = crate::ensemble::FactoringRanges::new(n)?;
        Self::new(
            vec![
                Variable {
                    name: "m1".into(),
                    lower: r.n_lo,
                    upper: r.n_hi,
                },
                Variable {
                    name: "m2".into(),
                    lower: r.m_lo,
                    upper: r.m_hi,
                },
            ],
            vec![ConstraintSpec {
                expr: "m1*m2".into(),
                relation: Relation::Eq,
                bound: n as f64,
            }],
        )
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// `A`.
    pub fn arity(&self) -> usize {
        self.variables.len()
    }

    /// `B`.
    pub fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    /// Number of tuples in the box, or `None` past 128 bits.
    pub fn domain_size(&self) -> Option<u128> {
        self.variables.iter().try_fold(1u128, |acc, v| {
            acc.checked_mul((v.upper - v.lower) as u128 + 1)
        })
    }

    pub fn contains(&self, tuple: &[u64]) -> bool {
        tuple.len() == self.arity()
            && tuple
                .iter()
                .zip(&self.variables)
                .all(|(x, v)| (v.lower..=v.upper).contains(x))
    }

    /// Whether every constraint holds for the value vector.
    pub fn satisfied_by(&self, values: &[i128]) -> bool {
        self.constraints
            .iter()
            .zip(values)
            .all(|(c, &v)| c.spec.relation.holds(v, c.spec.bound))
    }

    pub(crate) fn check_enumerable(&self) -> Result<u64> {
        match self.domain_size() {
            Some(d) if d <= MAX_ENUMERATION => Ok(d as u64),
            d => Err(Error::DomainTooLarge(format!(
                "{} tuples exceed the enumeration cap {MAX_ENUMERATION}",
                d.map_or("over 2^128".to_string(), |d| d.to_string())
            ))),
        }
    }

    /// Visit every tuple in lexicographic order.
    pub(crate) fn for_each_tuple<F>(&self, mut f: F) -> Result<()>
    where
        F: FnMut(&[u64]) -> Result<()>,
    {
        let mut cur: Vec<u64> = self.variables.iter().map(|v| v.lower).collect();
        loop {
            f(&cur)?;
            let mut j = cur.len();
            loop {
                if j == 0 {
                    return Ok(());
                }
                j -= 1;
                if cur[j] < self.variables[j].upper {
                    cur[j] += 1;
                    break;
                }
                cur[j] = self.variables[j].lower;
            }
        }
    }
}

/// `(f_1(m), ..., f_B(m))`.
pub fn evaluate_constraints(system: &ConstraintSystem, tuple: &[u64]) -> Result<ValueVector> {
    if !system.contains(tuple) {
        return Err(Error::Domain(format!(
            "tuple {tuple:?} outside the variable bounds"
        )));
    }
    let values: SmallVec<[i128; 4]> = tuple.iter().map(|&x| x as i128).collect();
    system
        .constraints
        .iter()
        .map(|c| c.expr.eval(&values))
        .collect()
}

/// Every tuple satisfying all constraints, by exhaustive enumeration.
pub fn feasible_set(system: &ConstraintSystem) -> Result<Vec<Occupation>> {
    system.check_enumerable()?;
    let mut out = Vec::new();
    system.for_each_tuple(|t| {
        if system.satisfied_by(&evaluate_constraints(system, t)?) {
            out.push(Occupation::new(t));
        }
        Ok(())
    })?;
    Ok(out)
}
