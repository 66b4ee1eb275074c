use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// `lhs <= rhs`
    Le,
    /// `lhs >= rhs`
    Ge,
    /// `lhs == rhs`
    Eq,
}

/// Outcome of checking a claimed relation between two computed quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub holds: bool,
}

impl BoundCheck {
    /// `lhs <= rhs + tol`.
    pub fn le(lhs: f64, rhs: f64, tol: f64) -> Self {
        Self {
            lhs,
            rhs,
            relation: Relation::Le,
            holds: lhs <= rhs + tol,
        }
    }

    /// `lhs >= rhs - tol`.
    pub fn ge(lhs: f64, rhs: f64, tol: f64) -> Self {
        Self {
            lhs,
            rhs,
            relation: Relation::Ge,
            holds: lhs >= rhs - tol,
        }
    }

    /// `|lhs - rhs| <= tol`.
    pub fn eq(lhs: f64, rhs: f64, tol: f64) -> Self {
        Self {
            lhs,
            rhs,
            relation: Relation::Eq,
            holds: (lhs - rhs).abs() <= tol,
        }
    }

    /// Slack of the relation; negative means violated (before tolerance).
    pub fn margin(&self) -> f64 {
        match self.relation {
            Relation::Le => self.rhs - self.lhs,
            Relation::Ge => self.lhs - self.rhs,
            Relation::Eq => -(self.lhs - self.rhs).abs(),
        }
    }
}
