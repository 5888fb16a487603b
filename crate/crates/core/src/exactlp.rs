//! Exact linear programming over the rationals.
//!
//! Dense two-phase primal simplex with Bland's rule. No presolve and no
//! scaling: instances here have a few dozen variables at most, and exact
//! arithmetic makes degenerate pivots common, so termination matters more
//! than speed.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::rational::Rational;

type Row = (Vec<(usize, Rational)>, Relation, Rational);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("constraint {constraint} references undeclared variable {var:?}")]
    UnknownVariable { constraint: usize, var: String },
    #[error("objective references undeclared variable {0:?}")]
    UnknownObjectiveVariable(String),
    #[error("variable {0:?} declared twice")]
    DuplicateVariable(String),
    #[error("variable index {0} out of range")]
    BadIndex(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
        }
    }

    fn flipped(self) -> Self {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Eq => Relation::Eq,
            Relation::Ge => Relation::Le,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `maximize objective · x` subject to the constraints; variables flagged
/// nonnegative carry an implicit `x >= 0`, the others are free.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinearProgram {
    names: Vec<String>,
    nonneg: Vec<bool>,
    objective: Vec<(usize, Rational)>,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, assignment: Vec<Rational> },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an LP from named pieces; `nonneg` lists the sign-constrained
    /// variables.
    pub fn from_named(
        variables: &[&str],
        objective: &BTreeMap<&str, Rational>,
        constraints: &[(BTreeMap<&str, Rational>, Relation, Rational)],
        nonneg: &BTreeSet<&str>,
    ) -> Result<Self, LpError> {
        let mut lp = LinearProgram::new();
        let mut index = HashMap::new();
        for v in variables {
            if index.insert(*v, lp.add_var(v, nonneg.contains(v))).is_some() {
                return Err(LpError::DuplicateVariable(v.to_string()));
            }
        }
        let mut obj = Vec::new();
        for (v, c) in objective {
            let i = index.get(v).ok_or_else(|| LpError::UnknownObjectiveVariable(v.to_string()))?;
            obj.push((*i, c.clone()));
        }
        lp.set_objective(obj);
        for (k, (coeffs, rel, rhs)) in constraints.iter().enumerate() {
            let mut row = Vec::new();
            for (v, c) in coeffs {
                let i = index.get(v).ok_or_else(|| LpError::UnknownVariable {
                    constraint: k,
                    var: v.to_string(),
                })?;
                row.push((*i, c.clone()));
            }
            lp.add_constraint(row, *rel, rhs.clone());
        }
        Ok(lp)
    }

    pub fn add_var(&mut self, name: &str, nonneg: bool) -> usize {
        self.names.push(name.to_string());
        self.nonneg.push(nonneg);
        self.names.len() - 1
    }

    pub fn set_objective(&mut self, coeffs: Vec<(usize, Rational)>) {
        self.objective = coeffs;
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) {
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn var_count(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn is_nonneg(&self, var: usize) -> bool {
        self.nonneg[var]
    }

    pub fn objective(&self) -> &[(usize, Rational)] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        self.objective.iter().map(|(j, c)| c * &x[*j]).sum()
    }

    /// Exact feasibility test for a point.
    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        if x.len() != self.names.len() {
            return false;
        }
        let signs = x.iter().zip(&self.nonneg).all(|(v, nn)| !nn || !v.is_negative());
        signs
            && self.constraints.iter().all(|c| {
                let lhs: Rational = c.coeffs.iter().map(|(j, a)| a * &x[*j]).sum();
                c.relation.holds(&lhs, &c.rhs)
            })
    }

    fn check(&self) -> Result<(), LpError> {
        let n = self.names.len();
        let bad = self
            .objective
            .iter()
            .chain(self.constraints.iter().flat_map(|c| c.coeffs.iter()))
            .find(|(j, _)| *j >= n);
        match bad {
            Some((j, _)) => Err(LpError::BadIndex(*j)),
            None => Ok(()),
        }
    }

    pub fn solve(&self) -> Result<LpOutcome, LpError> {
        self.check()?;
        Ok(Tableau::build(self).run(self))
    }
}

/// Column layout: split structural columns, then slack/surplus, then
/// artificials, then the right-hand side.
struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    pos_col: Vec<usize>,
    neg_col: Vec<Option<usize>>,
    n_struct: usize,
    first_artificial: usize,
    width: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let mut pos_col = Vec::with_capacity(lp.names.len());
        let mut neg_col = Vec::with_capacity(lp.names.len());
        let mut next = 0;
        for &nn in &lp.nonneg {
            pos_col.push(next);
            next += 1;
            if nn {
                neg_col.push(None);
            } else {
                neg_col.push(Some(next));
                next += 1;
            }
        }
        let n_struct = next;
        // normalize rows to nonnegative rhs
        let norm: Vec<Row> = lp
            .constraints
            .iter()
            .map(|c| {
                let mut dense: BTreeMap<usize, Rational> = BTreeMap::new();
                for (j, a) in &c.coeffs {
                    *dense.entry(pos_col[*j]).or_insert_with(Rational::zero) += a;
                    if let Some(nc) = neg_col[*j] {
                        *dense.entry(nc).or_insert_with(Rational::zero) -= a;
                    }
                }
                let coeffs: Vec<_> = dense.into_iter().filter(|(_, a)| !a.is_zero()).collect();
                if c.rhs.is_negative() {
                    (
                        coeffs.into_iter().map(|(j, a)| (j, -a)).collect(),
                        c.relation.flipped(),
                        -&c.rhs,
                    )
                } else {
                    (coeffs, c.relation, c.rhs.clone())
                }
            })
            .collect();
        let n_slack = norm.iter().filter(|r| r.1 != Relation::Eq).count();
        let n_art = norm.iter().filter(|r| r.1 != Relation::Le).count();
        let first_artificial = n_struct + n_slack;
        let width = first_artificial + n_art + 1;
        let mut rows = Vec::with_capacity(norm.len());
        let mut basis = Vec::with_capacity(norm.len());
        let (mut slack, mut art) = (n_struct, first_artificial);
        for (coeffs, rel, rhs) in norm {
            let mut row = vec![Rational::zero(); width];
            for (j, a) in coeffs {
                row[j] = a;
            }
            row[width - 1] = rhs;
            match rel {
                Relation::Le => {
                    row[slack] = Rational::one();
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -Rational::one();
                    slack += 1;
                    row[art] = Rational::one();
                    basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = Rational::one();
                    basis.push(art);
                    art += 1;
                }
            }
            rows.push(row);
        }
        Tableau { rows, basis, pos_col, neg_col, n_struct, first_artificial, width }
    }

    fn pivot(&mut self, r: usize, c: usize, obj: &mut [Rational]) {
        let p = self.rows[r][c].clone();
        if p != 1 {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v = &*v / &p;
                }
            }
        }
        let prow = std::mem::take(&mut self.rows[r]);
        let nz: Vec<usize> = (0..self.width).filter(|&j| !prow[j].is_zero()).collect();
        let eliminate = |row: &mut [Rational]| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for &j in &nz {
                row[j] -= &f * &prow[j];
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(obj);
        self.rows[r] = prow;
        self.basis[r] = c;
    }

    /// Reduced-cost row `c - c_B B^-1 A`, last entry `-c_B b`.
    fn reduced_costs(&self, costs: &[Rational]) -> Vec<Rational> {
        let mut d: Vec<Rational> = costs.to_vec();
        d.resize(self.width, Rational::zero());
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &costs[b];
            if cb.is_zero() {
                continue;
            }
            for (dj, a) in d.iter_mut().zip(row) {
                if !a.is_zero() {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    /// Bland's rule maximization over columns `< limit`.
    /// Returns false when unbounded.
    fn optimize(&mut self, obj: &mut [Rational], limit: usize) -> bool {
        let rhs = self.width - 1;
        loop {
            let Some(enter) = (0..limit).find(|&j| obj[j].is_positive()) else {
                return true;
            };
            let mut best: Option<(Rational, usize, usize)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[enter];
                let better = match &best {
                    None => true,
                    Some((r, _, b)) => ratio < *r || (ratio == *r && self.basis[i] < *b),
                };
                if better {
                    best = Some((ratio, i, self.basis[i]));
                }
            }
            let Some((_, leave, _)) = best else { return false };
            self.pivot(leave, enter, obj);
        }
    }

    fn run(mut self, lp: &LinearProgram) -> LpOutcome {
        let rhs = self.width - 1;
        // phase 1: maximize minus the sum of artificials
        if self.first_artificial < rhs {
            let mut costs = vec![Rational::zero(); self.width];
            for c in costs.iter_mut().take(rhs).skip(self.first_artificial) {
                *c = -Rational::one();
            }
            let mut obj = self.reduced_costs(&costs);
            self.optimize(&mut obj, rhs);
            if obj[rhs].is_positive() {
                return LpOutcome::Infeasible;
            }
            // drive artificials out of the basis; drop redundant rows
            let mut i = 0;
            while i < self.rows.len() {
                if self.basis[i] >= self.first_artificial {
                    match (0..self.first_artificial).find(|&j| !self.rows[i][j].is_zero()) {
                        Some(j) => {
                            let mut dummy = vec![Rational::zero(); self.width];
                            self.pivot(i, j, &mut dummy);
                        }
                        None => {
                            self.rows.remove(i);
                            self.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
        }
        // phase 2
        let mut costs = vec![Rational::zero(); self.width];
        for (j, c) in &lp.objective {
            costs[self.pos_col[*j]] += c;
            if let Some(nc) = self.neg_col[*j] {
                costs[nc] -= c;
            }
        }
        let mut obj = self.reduced_costs(&costs);
        if !self.optimize(&mut obj, self.first_artificial) {
            return LpOutcome::Unbounded;
        }
        let mut col_value = vec![Rational::zero(); self.n_struct];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.n_struct {
                col_value[b] = row[rhs].clone();
            }
        }
        let assignment: Vec<Rational> = (0..lp.names.len())
            .map(|j| {
                let p = col_value[self.pos_col[j]].clone();
                match self.neg_col[j] {
                    Some(nc) => p - &col_value[nc],
                    None => p,
                }
            })
            .collect();
        let value = lp.objective_value(&assignment);
        LpOutcome::Optimal { value, assignment }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn m<'a>(pairs: &[(&'a str, &str)]) -> BTreeMap<&'a str, Rational> {
        pairs.iter().map(|(k, v)| (*k, q(v))).collect()
    }

    #[test]
    fn single_variable_bound() {
        let lp = LinearProgram::from_named(
            &["x"],
            &m(&[("x", "1")]),
            &[(m(&[("x", "1")]), Relation::Le, q("1"))],
            &BTreeSet::from(["x"]),
        )
        .unwrap();
        assert_eq!(lp.solve().unwrap(), LpOutcome::Optimal { value: q("1"), assignment: vec![q("1")] });
    }

    #[test]
    fn infeasible_bound() {
        let lp = LinearProgram::from_named(
            &["x"],
            &m(&[("x", "1")]),
            &[(m(&[("x", "1")]), Relation::Le, q("-1"))],
            &BTreeSet::from(["x"]),
        )
        .unwrap();
        assert_eq!(lp.solve().unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn two_variables() {
        let lp = LinearProgram::from_named(
            &["x", "y"],
            &m(&[("x", "1"), ("y", "1")]),
            &[
                (m(&[("x", "1"), ("y", "1")]), Relation::Le, q("2")),
                (m(&[("x", "1")]), Relation::Le, q("1")),
            ],
            &BTreeSet::from(["x", "y"]),
        )
        .unwrap();
        match lp.solve().unwrap() {
            LpOutcome::Optimal { value, assignment } => {
                assert_eq!(value, q("2"));
                assert!(lp.is_feasible_point(&assignment));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unbounded_and_free_variables() {
        let lp = LinearProgram::from_named(
            &["x"],
            &m(&[("x", "1")]),
            &[(m(&[("x", "1")]), Relation::Ge, q("0"))],
            &BTreeSet::new(),
        )
        .unwrap();
        assert_eq!(lp.solve().unwrap(), LpOutcome::Unbounded);
        // free variable driven negative
        let lp = LinearProgram::from_named(
            &["x"],
            &m(&[("x", "-1")]),
            &[(m(&[("x", "1")]), Relation::Ge, q("-5/2"))],
            &BTreeSet::new(),
        )
        .unwrap();
        assert_eq!(
            lp.solve().unwrap(),
            LpOutcome::Optimal { value: q("5/2"), assignment: vec![q("-5/2")] }
        );
    }

    #[test]
    fn equality_and_redundant_rows() {
        let lp = LinearProgram::from_named(
            &["x", "y"],
            &m(&[("x", "2"), ("y", "1")]),
            &[
                (m(&[("x", "1"), ("y", "1")]), Relation::Eq, q("3")),
                (m(&[("x", "2"), ("y", "2")]), Relation::Eq, q("6")),
                (m(&[("x", "1")]), Relation::Le, q("1/2")),
            ],
            &BTreeSet::from(["x", "y"]),
        )
        .unwrap();
        assert_eq!(
            lp.solve().unwrap(),
            LpOutcome::Optimal { value: q("7/2"), assignment: vec![q("1/2"), q("5/2")] }
        );
    }

    #[test]
    fn malformed_inputs() {
        let err = LinearProgram::from_named(
            &["x"],
            &m(&[]),
            &[(m(&[("y", "1")]), Relation::Le, q("1"))],
            &BTreeSet::new(),
        );
        assert!(matches!(err, Err(LpError::UnknownVariable { .. })));
        assert!(matches!(
            LinearProgram::from_named(&["x", "x"], &m(&[]), &[], &BTreeSet::new()),
            Err(LpError::DuplicateVariable(_))
        ));
        let mut lp = LinearProgram::new();
        lp.add_constraint(vec![(3, q("1"))], Relation::Le, q("1"));
        assert_eq!(lp.solve(), Err(LpError::BadIndex(3)));
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's classic cycling instance (maximization form).
        let lp = LinearProgram::from_named(
            &["x1", "x2", "x3", "x4"],
            &m(&[("x1", "3/4"), ("x2", "-150"), ("x3", "1/50"), ("x4", "-6")]),
            &[
                (m(&[("x1", "1/4"), ("x2", "-60"), ("x3", "-1/25"), ("x4", "9")]), Relation::Le, q("0")),
                (m(&[("x1", "1/2"), ("x2", "-90"), ("x3", "-1/50"), ("x4", "3")]), Relation::Le, q("0")),
                (m(&[("x3", "1")]), Relation::Le, q("1")),
            ],
            &BTreeSet::from(["x1", "x2", "x3", "x4"]),
        )
        .unwrap();
        match lp.solve().unwrap() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, q("1/20")),
            other => panic!("{other:?}"),
        }
    }
}
