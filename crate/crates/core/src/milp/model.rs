use std::collections::HashSet;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    /// Integer in `{lower, ..., upper}` with bounds inside `[0, 1]`; relaxable.
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub sense: Sense,
    pub rhs: f64,
    pub terms: Vec<(VarId, f64)>,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    /// Amount by which `values` violate this row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ModelError {
    #[error("row {row} references unknown variable {var}")]
    UnknownVariable { row: String, var: usize },
    #[error("row {row} lists variable {var} twice")]
    DuplicateTerm { row: String, var: usize },
    #[error("variable {0} has lower bound above upper bound")]
    BadBounds(String),
    #[error("binary variable {0} has bounds outside [0, 1]")]
    BadBinary(String),
}

/// A minimization MILP: variable table plus sparse constraint rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpModel {
    vars: Vec<Variable>,
    rows: Vec<Constraint>,
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: f64,
        upper: f64,
        objective: f64,
    ) -> VarId {
        let id = VarId(self.vars.len());
        self.vars.push(Variable {
            name: name.into(),
            kind,
            lower,
            upper,
            objective,
        });
        id
    }

    /// Appends a row. Exact-zero coefficients are dropped.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<usize, ModelError> {
        let name = name.into();
        let terms: Vec<_> = terms.into_iter().filter(|&(_, a)| a != 0.0).collect();
        let mut seen = HashSet::with_capacity(terms.len());
        for &(v, _) in &terms {
            if v.0 >= self.vars.len() {
                return Err(ModelError::UnknownVariable { row: name, var: v.0 });
            }
            if !seen.insert(v) {
                return Err(ModelError::DuplicateTerm { row: name, var: v.0 });
            }
        }
        self.rows.push(Constraint {
            name,
            sense,
            rhs,
            terms,
        });
        Ok(self.rows.len() - 1)
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    pub fn var_mut(&mut self, id: VarId) -> &mut Variable {
        &mut self.vars[id.0]
    }

    pub fn rows(&self) -> &[Constraint] {
        &self.rows
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn binary_count(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for v in &self.vars {
            if !(v.lower <= v.upper) {
                return Err(ModelError::BadBounds(v.name.clone()));
            }
            if v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(ModelError::BadBinary(v.name.clone()));
            }
        }
        for r in &self.rows {
            let mut seen = HashSet::with_capacity(r.terms.len());
            for &(v, _) in &r.terms {
                if v.0 >= self.vars.len() {
                    return Err(ModelError::UnknownVariable {
                        row: r.name.clone(),
                        var: v.0,
                    });
                }
                if !seen.insert(v) {
                    return Err(ModelError::DuplicateTerm {
                        row: r.name.clone(),
                        var: v.0,
                    });
                }
            }
        }
        Ok(())
    }

    /// Copy with every binary turned continuous over its bounds.
    pub fn relaxed(&self) -> MilpModel {
        let mut out = self.clone();
        for v in &mut out.vars {
            v.kind = VarKind::Continuous;
        }
        out
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.vars
            .iter()
            .zip(values)
            .map(|(v, x)| v.objective * x)
            .sum()
    }

    /// Largest row or bound violation, each scaled by `max(1, |rhs|)`
    /// (bounds by `max(1, |bound|)`).
    pub fn max_scaled_violation(&self, values: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for r in &self.rows {
            worst = worst.max(r.violation(values) / r.rhs.abs().max(1.0));
        }
        for (v, &x) in self.vars.iter().zip(values) {
            if x < v.lower {
                worst = worst.max((v.lower - x) / v.lower.abs().max(1.0));
            }
            if x > v.upper {
                worst = worst.max((x - v.upper) / v.upper.abs().max(1.0));
            }
        }
        worst
    }
}
