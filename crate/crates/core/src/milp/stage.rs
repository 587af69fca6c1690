//! Stage bounds for relax-and-fix: every setup-state variable is either fixed
//! to a previous stage's value, kept binary, or relaxed to `[0, 1]`.

use super::model::{MilpModel, VarKind};
use crate::model::VarMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XState {
    Fixed(f64),
    Integer,
    Relaxed,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum StageError {
    #[error("stage bounds cover {given} variables, the setup-state family has {expected}")]
    Coverage { given: usize, expected: usize },
    #[error("cannot fix setup-state variable {index} to {value}: only 0 and 1 are allowed")]
    NonBinaryFix { index: usize, value: f64 },
}

/// One state per x-variable, aligned with the triple order of the [`VarMap`].
#[derive(Debug, Clone, PartialEq)]
pub struct StageBounds {
    states: Vec<XState>,
}

impl StageBounds {
    pub fn new(states: Vec<XState>) -> Self {
        Self { states }
    }

    pub fn uniform(count: usize, state: XState) -> Self {
        Self {
            states: vec![state; count],
        }
    }

    pub fn states(&self) -> &[XState] {
        &self.states
    }

    pub fn set(&mut self, index: usize, state: XState) {
        self.states[index] = state;
    }

    pub fn count(&self, pred: impl Fn(&XState) -> bool) -> usize {
        self.states.iter().filter(|s| pred(s)).count()
    }
}

/// Returns a copy of `model` with the stage bounds applied to the x family;
/// rows and every other variable are untouched.
pub fn apply_stage_bounds(
    model: &MilpModel,
    vm: &VarMap,
    sb: &StageBounds,
) -> Result<MilpModel, StageError> {
    let xs = vm.x_ids();
    if sb.states.len() != xs.len() {
        return Err(StageError::Coverage {
            given: sb.states.len(),
            expected: xs.len(),
        });
    }
    let mut out = model.clone();
    for (index, (&id, state)) in xs.iter().zip(&sb.states).enumerate() {
        let var = out.var_mut(id);
        match *state {
            XState::Fixed(value) => {
                if value != 0.0 && value != 1.0 {
                    return Err(StageError::NonBinaryFix { index, value });
                }
                var.kind = VarKind::Binary;
                var.lower = value;
                var.upper = value;
            }
            XState::Integer => {
                var.kind = VarKind::Binary;
                var.lower = 0.0;
                var.upper = 1.0;
            }
            XState::Relaxed => {
                var.kind = VarKind::Continuous;
                var.lower = 0.0;
                var.upper = 1.0;
            }
        }
    }
    Ok(out)
}
