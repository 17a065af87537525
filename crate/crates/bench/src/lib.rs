//! Fixtures shared by the criterion benches.

use symtoep::problems::{example1, example2, ProblemInstance};

/// Seed for every generated right-hand side.
pub const SEED: u64 = 1;

/// Deterministic dense test vector with entries in `[-1, 1]`.
pub fn test_vector(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 * 0.618_033_988_75).sin()).collect()
}

/// Dense-symbol problem: `(2 - 2cos θ)(1 + iθ)`.
pub fn dense_symbol(n: usize) -> ProblemInstance {
    example1(n, SEED).expect("example 1 is valid for every n")
}

/// Fractional diffusion with `α = 1.5`, `d₊ = 2`, `d₋ = 0.5`.
pub fn fractional(n: usize) -> ProblemInstance {
    example2(n, 1.5, 2.0, 0.5).expect("example 2 is valid for every n")
}
