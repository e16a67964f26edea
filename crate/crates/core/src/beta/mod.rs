//! β-expansions of 1 and the β-shifts they define.

mod expansion;
mod number;
mod system;

pub use expansion::{
    beta_from_digits, greedy_expansion, greedy_interval, quasi_greedy, BetaExpansion, Certificate,
    PrecisionPolicy, Tail,
};
pub use number::{golden_ratio, parse_beta, BetaValue};
pub use system::{BetaSystem, DEFAULT_EXPANSION_DIGITS};
