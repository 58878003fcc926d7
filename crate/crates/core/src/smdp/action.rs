use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A non-empty, open-loop sequence of primitive action ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct MacroAction(Vec<usize>);

impl MacroAction {
    pub fn new(actions: Vec<usize>) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::InvalidMacro("a macro needs at least one action".into()));
        }
        Ok(Self(actions))
    }

    /// `action` repeated `len` times.
    pub fn repeat(action: usize, len: usize) -> Result<Self> {
        Self::new(vec![action; len])
    }

    pub fn actions(&self) -> &[usize] {
        &self.0
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_repeat(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }

    pub fn validate(&self, num_primitives: usize) -> Result<()> {
        match self.0.iter().find(|&&a| a >= num_primitives) {
            Some(&a) => Err(Error::InvalidMacro(format!(
                "action id {a} is out of range for {num_primitives} primitives"
            ))),
            None => Ok(()),
        }
    }

    /// Parse from action names such as `["MOVE_FORWARD", "TURN_RIGHT"]`.
    pub fn from_names<S: AsRef<str>>(names: &[S], action_names: &[String]) -> Result<Self> {
        let ids = names
            .iter()
            .map(|n| {
                let n = n.as_ref().trim();
                action_names
                    .iter()
                    .position(|a| a == n)
                    .ok_or_else(|| Error::InvalidMacro(format!("unknown action name `{n}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(ids)
    }

    /// Parse a comma-joined list of names, e.g. `MOVE_FORWARD,TURN_RIGHT`.
    pub fn parse_names(joined: &str, action_names: &[String]) -> Result<Self> {
        let parts: Vec<&str> = joined.split(',').filter(|s| !s.trim().is_empty()).collect();
        Self::from_names(&parts, action_names)
    }

    pub fn to_names(&self, action_names: &[String]) -> Vec<String> {
        self.0
            .iter()
            .map(|&a| action_names.get(a).cloned().unwrap_or_else(|| format!("#{a}")))
            .collect()
    }

    /// Comma-joined action names, the on-disk form of a macro.
    pub fn display_names(&self, action_names: &[String]) -> String {
        self.to_names(action_names).join(",")
    }
}

impl TryFrom<Vec<usize>> for MacroAction {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<MacroAction> for Vec<usize> {
    fn from(m: MacroAction) -> Self {
        m.0
    }
}

impl fmt::Display for MacroAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// The agent's selectable set: every primitive plus at most one macro.
///
/// Index `i < num_primitives` selects primitive `i`; index `num_primitives`
/// selects the macro when one is present.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSet {
    num_primitives: usize,
    macro_action: Option<MacroAction>,
}

/// What an action-set index resolves to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Choice<'a> {
    Primitive(usize),
    Macro(&'a MacroAction),
}

impl ActionSet {
    pub fn primitives_only(num_primitives: usize) -> Self {
        Self {
            num_primitives,
            macro_action: None,
        }
    }

    pub fn num_primitives(&self) -> usize {
        self.num_primitives
    }

    pub fn macro_action(&self) -> Option<&MacroAction> {
        self.macro_action.as_ref()
    }

    pub fn macro_index(&self) -> Option<usize> {
        self.macro_action.as_ref().map(|_| self.num_primitives)
    }

    /// `|A| + 1` with a macro, `|A|` without.
    pub fn len(&self) -> usize {
        self.num_primitives + usize::from(self.macro_action.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn resolve(&self, index: usize) -> Option<Choice<'_>> {
        if index < self.num_primitives {
            Some(Choice::Primitive(index))
        } else if index == self.num_primitives {
            self.macro_action.as_ref().map(Choice::Macro)
        } else {
            None
        }
    }

    /// Primitive steps consumed by choosing `index`, assuming no early
    /// termination.
    pub fn nominal_length(&self, index: usize) -> usize {
        match self.resolve(index) {
            Some(Choice::Macro(m)) => m.len(),
            _ => 1,
        }
    }

    /// Short tag used in curve files: `vanilla` or the joined macro names.
    pub fn tag(&self, action_names: &[String]) -> String {
        match &self.macro_action {
            None => "vanilla".to_string(),
            Some(m) => format!("macro[{}]", m.to_names(action_names).join(" ")),
        }
    }
}

/// Builds `M = A ∪ {m}` with the primitives in their original order and the
/// macro, if any, at index `|A|`.
pub fn augment_action_space(num_primitives: usize, macro_action: Option<MacroAction>) -> Result<ActionSet> {
    if let Some(m) = &macro_action {
        m.validate(num_primitives)?;
    }
    Ok(ActionSet {
        num_primitives,
        macro_action,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const LEFT: usize = 0;
    const RIGHT: usize = 1;
    const FWD: usize = 2;

    #[test]
    fn augment_appends_macro_last() {
        let m = MacroAction::new(vec![FWD, FWD, RIGHT]).unwrap();
        let set = augment_action_space(3, Some(m.clone())).unwrap();
        assert_eq!(set.len(), 4);
        assert_eq!(set.macro_index(), Some(3));
        assert_eq!(set.resolve(LEFT), Some(Choice::Primitive(LEFT)));
        assert_eq!(set.resolve(3), Some(Choice::Macro(&m)));
        assert_eq!(set.resolve(4), None);
    }

    #[test]
    fn augment_without_macro_is_primitive_set() {
        let set = augment_action_space(1, None).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.resolve(0), Some(Choice::Primitive(0)));
        assert_eq!(set.resolve(1), None);
    }

    #[test]
    fn augment_rejects_out_of_range_macro() {
        let m = MacroAction::new(vec![0, 3]).unwrap();
        assert!(matches!(augment_action_space(3, Some(m)), Err(Error::InvalidMacro(_))));
    }

    #[test]
    fn named_round_trip() {
        let names: Vec<String> = ["MOVE_FORWARD", "TURN_LEFT", "TURN_RIGHT"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let m = MacroAction::parse_names("MOVE_FORWARD,MOVE_FORWARD,TURN_RIGHT", &names).unwrap();
        assert_eq!(m.actions(), &[0, 0, 2]);
        assert_eq!(m.display_names(&names), "MOVE_FORWARD,MOVE_FORWARD,TURN_RIGHT");
        assert!(MacroAction::parse_names("JUMP", &names).is_err());
        assert!(MacroAction::new(vec![]).is_err());
    }

    #[test]
    fn serde_rejects_empty() {
        assert!(serde_json::from_str::<MacroAction>("[]").is_err());
        let m: MacroAction = serde_json::from_str("[1,2]").unwrap();
        assert_eq!(m.len(), 2);
    }
}
