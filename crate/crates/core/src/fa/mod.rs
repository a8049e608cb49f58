//! Action-value representations.

mod fourier;
mod linear;
mod tabular;

pub use fourier::FourierBasis;
pub use linear::LinearQ;
pub use tabular::TabularQ;

use crate::env::Observation;
use crate::error::Result;

pub trait ActionValue {
    fn num_actions(&self) -> usize;

    fn q_eval(&self, observation: &Observation, action: usize) -> Result<f64>;

    /// All action values for one observation, written into `out`.
    fn q_row(&self, observation: &Observation, out: &mut Vec<f64>) -> Result<()>;
}
