//! Frequency setups, small-divisor sieves, the kernel/range splitting of the
//! mode box and the diagonal operators inverted on each part.

mod decomposition;
mod operators;
mod setup;
mod sieve;

pub use decomposition::{Decomposition, IndexClass, Target};
pub use operators::{
    certify_bounds, BoundReport, CertifiedOperators, DiagonalOperator, OperatorKind,
};
pub use setup::{Frequency, FrequencySetup, EPS0_DEFAULT, GAMMA_DEFAULT};
pub use sieve::{
    check_b_gamma, check_c_gamma, rational_witness, sieve_interval, Condition, SieveCase,
    SievePoint, SieveScan, SieveVerdict, RATIONAL_DENOMINATOR_MAX, RATIONAL_MATCH_TOL,
};
