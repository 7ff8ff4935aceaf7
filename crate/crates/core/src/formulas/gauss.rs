use errorfunctions::RealErrorFunctions;

/// Scaled complementary error function `exp(x^2) erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    RealErrorFunctions::erfcx(x)
}

pub fn erf(x: f64) -> f64 {
    RealErrorFunctions::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    RealErrorFunctions::erfc(x)
}

/// Standard normal distribution function.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal survival function `1 - Phi(x)`, accurate in the far tail.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}
