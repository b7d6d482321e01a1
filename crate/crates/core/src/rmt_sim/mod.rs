//! Monte Carlo sampling of matrix chains and comparison of the sampled squared
//! singular values with the exact densities.

mod sampling;
mod stats;

pub use sampling::{
    draw_stream, sample_chain, sample_chain_matrix, sample_ginibre, sample_ginibre_times_fixed, sample_haar_truncation,
    sample_haar_unitary, squared_singular_values, CMatrix, FactorSpec, MatrixChainSpec, SampleBatch,
    MAX_INVERSE_CONDITION,
};
pub use stats::{
    average_char_poly, empirical_vs_density, goodness_of_fit, one_point_per_draw, two_sample_ks, CharPolyEstimate,
    GoodnessReport, CHI2_BINS,
};
