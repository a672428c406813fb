//! Oracle restarts on the rayon pool.
//!
//! Each restart draws from its own seeded stream and the reduction breaks
//! ties by restart index, so the result is identical to the sequential
//! [`clonebound_core::oracle::maximize_fidelity`].

use clonebound_core::bounds::CloneTask;
use clonebound_core::oracle::{
    select_best, OracleError, OracleOptions, OracleProblem, OracleResult,
};
use rayon::prelude::*;

pub fn maximize_fidelity_parallel(
    task: &CloneTask,
    opts: &OracleOptions,
) -> Result<OracleResult, OracleError> {
    opts.validate()?;
    let problem = OracleProblem::from_task(task, opts)?;
    let outcomes = (0..opts.restarts)
        .into_par_iter()
        .map(|i| problem.run_restart(i, opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(select_best(outcomes).expect("at least one restart"))
}
