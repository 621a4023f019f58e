//! Thin wrappers over `libm`.
//!
//! Routing every transcendental through `libm` keeps results bit-identical
//! across platforms and keeps the crate `no_std`-compatible (the `f64`
//! inherent methods live in `std`).

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}
