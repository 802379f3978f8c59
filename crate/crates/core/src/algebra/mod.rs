//! Exact algebra over Q: polynomials, parsing, Gröbner bases, ideals,
//! derivative ideals.

pub mod derivative;
pub mod groebner;
pub mod ideal;
pub mod parse;
pub mod poly;

pub use derivative::{
    derivative_ideal, derivative_power, determinant, log_derivative_ideal, log_derivative_power, max_order, singular_locus,
};
pub use groebner::{groebner_basis, normal_form, TermOrder};
pub use ideal::Ideal;
pub use parse::{parse_polynomial, parse_polynomial_list, parse_rational, render_rational, ParseError};
pub use poly::{rat, rat_frac, Polynomial, Rational};
