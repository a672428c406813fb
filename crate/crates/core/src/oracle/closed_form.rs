use super::OracleError;

/// Two equiprobable states with real overlap `s`, `m → n` copies: the optimal
/// auxiliary fidelity and the corresponding global fidelity.
///
/// `F′ = ½[√((1+s^m)(1+s^n)) + √((1−s^m)(1−s^n))]`,
/// `F = F′² = ½[1 + s^{m+n} + √((1−s^{2m})(1−s^{2n}))]`.
pub fn two_state_closed_form(s: f64, m: u32, n: u32) -> Result<(f64, f64), OracleError> {
    if !(0.0..=1.0).contains(&s) {
        return Err(OracleError::BadRange(alloc::format!(
            "overlap {s} outside [0, 1]"
        )));
    }
    if m < 1 || m > n {
        return Err(OracleError::BadRange(alloc::format!(
            "need 1 ≤ M ≤ N (M = {m}, N = {n})"
        )));
    }
    let sm = libm::pow(s, f64::from(m));
    let sn = libm::pow(s, f64::from(n));
    let fprime = 0.5 * (libm::sqrt((1.0 + sm) * (1.0 + sn)) + libm::sqrt((1.0 - sm) * (1.0 - sn)));
    let fidelity = 0.5 * (1.0 + sm * sn + libm::sqrt((1.0 - sm * sm) * (1.0 - sn * sn)));
    Ok((fprime, fidelity))
}

/// Optimal probability of correctly identifying one of two equiprobable pure
/// states with overlap modulus `s_eff`: `½(1 + √(1 − s_eff²))`.
pub fn helstrom_reference(s_eff: f64) -> Result<f64, OracleError> {
    if !(0.0..=1.0).contains(&s_eff) {
        return Err(OracleError::BadRange(alloc::format!(
            "overlap {s_eff} outside [0, 1]"
        )));
    }
    Ok(0.5 * (1.0 + libm::sqrt(1.0 - s_eff * s_eff)))
}
