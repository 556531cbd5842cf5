//! Radial calculus: exact power sums and the discrete clamped bilaplacian.

pub mod grid;
pub mod operator;
pub mod powersum;

pub use grid::{RadialField, RadialGrid, Spacing, DEFAULT_GRADING};
pub use operator::{
    assemble_discrete_bilaplacian, check_discrete_positivity, DiscreteOperator, PositivityReport, ScaledFactor,
};
pub use powersum::{bilaplacian_power, bilaplacian_powersum, laplacian_power, PowerSum};
