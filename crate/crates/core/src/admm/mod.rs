//! Consensus-ADMM reconstruction of the complex shear modulus over
//! overlapping sub-zones, with k-space sparsity on the displacement and a
//! total-variation prior on the global modulus.

mod fft;
mod params;
mod partition;
mod prox;
mod solver;
mod zone;

pub use fft::Fft3;
pub use params::{
    compute_params, AdmmParams, ParamInputs, ParamOverrides, DEFAULT_MAX_ITER, DEFAULT_MU_IM_BOUNDS, DEFAULT_MU_RE_BOUNDS,
    DEFAULT_TOL_MU,
};
pub use partition::{axis_starts, partition_subzones, SubzonePartition, Zone};
pub use prox::{l1_norm, soft_threshold, total_variation, tv_objective, tv_prox, TvOptions, TvOutcome};
pub use solver::{
    run_reconstruction, write_trace_csv, Mode, ObjectiveCheck, Reconstruction, ReconstructionConfig, Subproblem, TraceRow,
};
pub use zone::{ObjectivePair, LOCAL_TOL};
