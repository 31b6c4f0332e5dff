//! Uniform-frequency table lookup.
//!
//! When every active core must share one frequency, the package-power table
//! indexed by active-core count answers the question directly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Assignment, Choice, CoreId, Khz, LookupTable, ProcessorSpec, Watts};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LookupChoice {
    /// Column within the table, 0 being the lowest listed Turbo level.
    pub column: usize,
    pub level_khz: Khz,
    pub table_watts: Watts,
}

/// Highest listed level whose package watts fit `budget_watts` for
/// `n_active` cores; `None` when even the lowest one does not.
pub fn solve_lookup_uniform(
    table: &LookupTable,
    n_active: usize,
    budget_watts: Watts,
) -> Result<Option<LookupChoice>> {
    let row = table.row(n_active).ok_or(Error::NoTableRow(n_active))?;
    Ok(row
        .watts
        .iter()
        .zip(&table.levels_khz)
        .enumerate()
        .filter(|(_, (&w, _))| w <= budget_watts)
        .max_by_key(|(_, (_, &khz))| khz)
        .map(|(column, (&table_watts, &level_khz))| LookupChoice {
            column,
            level_khz,
            table_watts,
        }))
}

/// Spreads a uniform lookup result over `active` cores.
pub fn lookup_assignment(
    spec: &ProcessorSpec,
    choice: &LookupChoice,
    active: impl IntoIterator<Item = CoreId>,
) -> Result<Assignment> {
    let idx = spec.ladder.index_of_khz(choice.level_khz).ok_or_else(|| {
        Error::InvalidRequest(format!("{} kHz not on the ladder", choice.level_khz))
    })?;
    let c = Choice::from_ladder_index(&spec.ladder, idx);
    Ok(Assignment::from_choices(
        spec,
        active.into_iter().map(|core| (core, c)),
    ))
}
