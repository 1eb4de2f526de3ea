//! Frame analysis: scale sequences, semi-continuous bounds, discrete frame
//! quotients on bandlimited subspaces and frame-algorithm reconstruction.

mod band;
mod bounds;
mod reconstruct;
mod scales;

pub use band::{band_kernel, BandFunction};
pub use bounds::{
    analysis_coeff, analysis_data, band_dimension, frame_bounds_eig, frame_bounds_mc, frame_quotient, grid_id,
    semicontinuous_quotient, semiframe_bounds, CentersSpec, FrameMethod, FrameReport, FrameSystem, McSpec,
    SemiframeProfile, GRAM_THRESHOLD,
};
pub use reconstruct::{iteration_bound, reconstruct, ReconstructionReport};
pub use scales::{make_scales, ScaleKind, ScaleSequence};
