use std::io::Write;

use super::ActionValue;
use crate::env::Observation;
use crate::error::{Error, Result};

/// Dense `|X| × |A|` table, row-major by state.
#[derive(Clone, Debug, PartialEq)]
pub struct TabularQ {
    num_states: usize,
    num_actions: usize,
    table: Vec<f64>,
}

impl TabularQ {
    pub fn new(num_states: usize, num_actions: usize, initial_value: f64) -> Self {
        Self { num_states, num_actions, table: vec![initial_value; num_states * num_actions] }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    fn check(&self, state: usize, action: usize) -> Result<usize> {
        if state >= self.num_states {
            return Err(Error::StateOutOfRange { state, num_states: self.num_states });
        }
        if action >= self.num_actions {
            return Err(Error::ActionOutOfRange { action, num_actions: self.num_actions });
        }
        Ok(state * self.num_actions + action)
    }

    pub fn get(&self, state: usize, action: usize) -> Result<f64> {
        Ok(self.table[self.check(state, action)?])
    }

    pub fn set(&mut self, state: usize, action: usize, value: f64) -> Result<()> {
        let i = self.check(state, action)?;
        self.table[i] = value;
        Ok(())
    }

    pub fn row(&self, state: usize) -> Result<&[f64]> {
        self.check(state, 0)?;
        let start = state * self.num_actions;
        Ok(&self.table[start..start + self.num_actions])
    }

    pub fn row_mut(&mut self, state: usize) -> Result<&mut [f64]> {
        self.check(state, 0)?;
        let start = state * self.num_actions;
        Ok(&mut self.table[start..start + self.num_actions])
    }

    pub fn max(&self, state: usize) -> Result<f64> {
        Ok(self.row(state)?.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.table
    }

    pub fn is_finite(&self) -> bool {
        self.table.iter().all(|v| v.is_finite())
    }

    /// One row per state, one column per action.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let header: Vec<String> = (0..self.num_actions).map(|a| format!("a{a}")).collect();
        writeln!(out, "state,{}", header.join(","))?;
        for s in 0..self.num_states {
            let row = &self.table[s * self.num_actions..(s + 1) * self.num_actions];
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{s},{}", cells.join(","))?;
        }
        Ok(())
    }
}

impl ActionValue for TabularQ {
    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn q_eval(&self, observation: &Observation, action: usize) -> Result<f64> {
        self.get(observation.discrete()?, action)
    }

    fn q_row(&self, observation: &Observation, out: &mut Vec<f64>) -> Result<()> {
        let row = self.row(observation.discrete()?)?;
        out.clear();
        out.extend_from_slice(row);
        Ok(())
    }
}
