//! Float helpers that work identically with and without `std`.
//!
//! Exactly-rounded operations (sqrt, abs, floor, ...) may use the native
//! methods when `std` is on; transcendentals always route through `libm`
//! so results do not depend on the feature set.

pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

#[cfg(feature = "std")]
pub fn sqrt(x: f64) -> f64 {
    x.sqrt()
}

#[cfg(not(feature = "std"))]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[cfg(feature = "std")]
pub fn floor(x: f64) -> f64 {
    x.floor()
}

#[cfg(not(feature = "std"))]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[cfg(feature = "std")]
pub fn ceil(x: f64) -> f64 {
    x.ceil()
}

#[cfg(not(feature = "std"))]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// Rounds half away from zero, like `f64::round`.
#[cfg(feature = "std")]
pub fn round(x: f64) -> f64 {
    x.round()
}

#[cfg(not(feature = "std"))]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

/// Logistic function, the transfer used by binary PSO and the boosted
/// classifier alike.
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + exp(-x))
}

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * exp(-0.5 * z * z)
}

/// Standard normal CDF via `erf`.
pub fn normal_cdf(z: f64) -> f64 {
    const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;
    0.5 * (1.0 + erf(z * FRAC_1_SQRT_2))
}
