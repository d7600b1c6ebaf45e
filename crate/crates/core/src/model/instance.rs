use std::fmt;

use super::{ConstraintKind, Domain, Expr, VarId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub domain: Domain,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub kind: ConstraintKind,
    /// Annotation tags such as `symmetry-breaking` or `redundant`; they never
    /// change the meaning of the constraint.
    pub tags: Vec<String>,
}

impl Constraint {
    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.iter().any(|t| t == tag)
    }
}

pub const TAG_SYMMETRY_BREAKING: &str = "symmetry-breaking";
pub const TAG_REDUNDANT: &str = "redundant";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    /// Whether `a` is strictly better than `b`.
    pub fn better(self, a: i64, b: i64) -> bool {
        match self {
            Sense::Minimize => a < b,
            Sense::Maximize => a > b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ObjectiveBody {
    Expr(Expr),
    WeightedSum { scope: Vec<VarId>, coeffs: Vec<i64> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Objective {
    pub sense: Sense,
    pub body: ObjectiveBody,
}

impl Objective {
    pub fn vars(&self) -> Vec<VarId> {
        let mut v = match &self.body {
            ObjectiveBody::Expr(e) => e.vars(),
            ObjectiveBody::WeightedSum { scope, .. } => scope.clone(),
        };
        v.sort_unstable();
        v.dedup();
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    Csp,
    Cop,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Csp => "CSP",
            ProblemKind::Cop => "COP",
        })
    }
}

/// A constraint satisfaction or optimization problem. Variable and
/// constraint ids are their positions in the respective lists.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Instance {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Option<Objective>,
}

impl Instance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn kind(&self) -> ProblemKind {
        if self.objective.is_some() {
            ProblemKind::Cop
        } else {
            ProblemKind::Csp
        }
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn add_var(&mut self, name: impl Into<String>, domain: Domain) -> VarId {
        self.variables.push(Variable { name: name.into(), domain });
        self.variables.len() - 1
    }

    pub fn post(&mut self, kind: ConstraintKind) -> usize {
        self.post_tagged(kind, &[])
    }

    pub fn post_tagged(&mut self, kind: ConstraintKind, tags: &[&str]) -> usize {
        self.constraints.push(Constraint { kind, tags: tags.iter().map(|t| t.to_string()).collect() });
        self.constraints.len() - 1
    }

    pub fn minimize(&mut self, body: ObjectiveBody) {
        self.objective = Some(Objective { sense: Sense::Minimize, body });
    }

    pub fn maximize(&mut self, body: ObjectiveBody) {
        self.objective = Some(Objective { sense: Sense::Maximize, body });
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Copy without the constraints carrying `tag`.
    pub fn without_tag(&self, tag: &str) -> Instance {
        Instance {
            variables: self.variables.clone(),
            constraints: self.constraints.iter().filter(|c| !c.has_tag(tag)).cloned().collect(),
            objective: self.objective.clone(),
        }
    }
}

/// Source of variable values for evaluation.
pub trait Values {
    fn value(&self, var: VarId) -> i64;
}

impl Values for [i64] {
    fn value(&self, var: VarId) -> i64 {
        self[var]
    }
}

impl Values for Vec<i64> {
    fn value(&self, var: VarId) -> i64 {
        self[var]
    }
}

/// Total assignment: one value per variable id.
#[derive(Clone, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct Assignment(pub Vec<i64>);

impl Assignment {
    pub fn new(values: Vec<i64>) -> Self {
        Assignment(values)
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Space-separated values, the `v` line payload.
    pub fn to_value_line(&self) -> String {
        self.0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
    }
}

impl Values for Assignment {
    fn value(&self, var: VarId) -> i64 {
        self.0[var]
    }
}
