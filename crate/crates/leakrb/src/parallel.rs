//! Thread-parallel versions of the engine loops. Work is split by index
//! and reduced in index order, so results do not depend on the number of
//! threads.

use leakrb_core::channel::{
    check_t_map_inputs, t_map_chunk, twirl_chunk, twirl_from_chunks, Channel, ErrorModel, TMap,
    TMapVariant, Twirled, TWIRL_CHUNK,
};
use leakrb_core::clifford::{ExtendedCliffordSet, QutritUnitary};
use leakrb_core::engine::{
    interleaved_master_seed, run_keyed, Interleave, ProtocolSpec, SequenceResult,
};
use leakrb_core::fit::{bootstrap_replicate, BootstrapSummary, DecayFit, SequenceGroup};
use leakrb_core::linalg::RealMatrix;
use rayon::prelude::*;

use crate::error::{CliError, Result};

/// Runs `f` on a pool of `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(pool.install(f))
}

pub fn run_protocol_par(
    set: &ExtendedCliffordSet,
    model: &ErrorModel,
    spec: &ProtocolSpec,
    interleave: Option<Interleave<'_>>,
) -> Result<Vec<SequenceResult>> {
    spec.validate()?;
    model.check_covers(set)?;
    Ok(spec
        .work_items()
        .into_par_iter()
        .map(|(y, k)| run_keyed(set, model, spec, y, k, interleave))
        .collect::<leakrb_core::Result<Vec<_>>>()?)
}

/// Reference and interleaved runs seeded as in the serial engine.
pub fn run_irb_par(
    set: &ExtendedCliffordSet,
    model: &ErrorModel,
    spec: &ProtocolSpec,
    gate: &QutritUnitary,
    error: &Channel,
) -> Result<(Vec<SequenceResult>, Vec<SequenceResult>)> {
    let reference = run_protocol_par(set, model, spec, None)?;
    let spec_i = ProtocolSpec {
        master_seed: interleaved_master_seed(spec.master_seed),
        ..spec.clone()
    };
    let interleaved = run_protocol_par(set, model, &spec_i, Some(Interleave { gate, error }))?;
    Ok((reference, interleaved))
}

fn chunk_starts(len: usize) -> Vec<usize> {
    (0..len).step_by(TWIRL_CHUNK).collect()
}

pub fn twirl_par(ch: &Channel, set: &ExtendedCliffordSet) -> Result<Twirled> {
    let chunks: Vec<RealMatrix> = chunk_starts(set.len())
        .into_par_iter()
        .map(|s| twirl_chunk(ch, set, s..(s + TWIRL_CHUNK).min(set.len())))
        .collect();
    Ok(twirl_from_chunks(set, chunks, ch.dim())?)
}

pub fn t_map_par(
    model: &ErrorModel,
    set: &ExtendedCliffordSet,
    variant: &TMapVariant,
) -> Result<TMap> {
    check_t_map_inputs(model, set, variant)?;
    let chunks: Vec<RealMatrix> = chunk_starts(set.len())
        .into_par_iter()
        .map(|s| t_map_chunk(model, set, variant, s..(s + TWIRL_CHUNK).min(set.len())))
        .collect();
    Ok(TMap::from_chunks(set, chunks)?)
}

pub fn bootstrap_par(
    groups: &[SequenceGroup],
    order: usize,
    replicates: usize,
    seed: u64,
) -> BootstrapSummary {
    let fits: Vec<leakrb_core::Result<DecayFit>> = (0..replicates)
        .into_par_iter()
        .map(|r| bootstrap_replicate(groups, order, seed, r))
        .collect();
    BootstrapSummary::from_fits(&fits)
}
