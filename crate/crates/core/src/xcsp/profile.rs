use crate::model::ConstraintKind;

/// Constraint support profile of a competition track.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Profile {
    #[default]
    Main,
    Mini,
}

/// Element names accepted by the mini profile.
pub const MINI_ELEMENTS: &[&str] = &["intension", "extension", "allDifferent", "sum", "element"];

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Main => "main",
            Profile::Mini => "mini",
        }
    }

    pub fn from_name(s: &str) -> Option<Profile> {
        match s {
            "main" => Some(Profile::Main),
            "mini" => Some(Profile::Mini),
            _ => None,
        }
    }

    /// Whether a constraint may appear in documents of this profile.
    pub fn allows(self, kind: &ConstraintKind) -> bool {
        match self {
            Profile::Main => true,
            Profile::Mini => matches!(
                kind,
                ConstraintKind::Intension(_)
                    | ConstraintKind::Extension { .. }
                    | ConstraintKind::AllDifferent { .. }
                    | ConstraintKind::Sum { .. }
                    | ConstraintKind::Element { .. }
            ),
        }
    }
}
