/// `phi_L(dk) = (L/2) sinc(dk L / 2)` with `sinc(x) = sin(x)/x`.
pub fn phase_matching(delta_k: f64, length: f64) -> crate::Result<f64> {
    if !(length > 0.0) {
        return Err(crate::Error::Validation(format!("crystal length must be positive, got {length}")));
    }
    let x = delta_k * length / 2.0;
    let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
    Ok(0.5 * length * sinc)
}

/// Field radiated by the sample and observed at retarded time:
/// `-i series(t - r/c) theta(t - r/c)`.
pub fn retarded_field_contribution(
    series: impl Fn(f64) -> crate::linalg::C64,
    r_over_c: f64,
    t: f64,
) -> crate::Result<crate::linalg::C64> {
    if !(r_over_c >= 0.0) {
        return Err(crate::Error::Validation(format!("r/c must be nonnegative, got {r_over_c}")));
    }
    let s = t - r_over_c;
    if s < 0.0 {
        return Ok(crate::linalg::ZERO);
    }
    Ok(-crate::linalg::I * series(s))
}
