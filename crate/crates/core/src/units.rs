//! Physical constants (exact SI values) and unit conversions.

/// Elementary charge in coulombs.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Planck constant in J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant in J·s.
pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);

/// e²/(2h) expressed in fF·GHz, approximately 19.3702.
///
/// A charging energy in GHz is this constant times an inverse capacitance in
/// 1/fF, so `E_C = CHARGING_FF_GHZ / C_sigma_fF`.
pub const CHARGING_FF_GHZ: f64 =
    ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (2.0 * PLANCK) * 1e15 * 1e-9;

/// Charging energy in GHz for a total capacitance in fF.
pub fn charging_energy_ghz(c_ff: f64) -> f64 {
    CHARGING_FF_GHZ / c_ff
}

/// Total capacitance in fF that yields the given charging energy in GHz.
pub fn capacitance_for_charging_energy(ec_ghz: f64) -> f64 {
    CHARGING_FF_GHZ / ec_ghz
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charging_constant() {
        assert!((CHARGING_FF_GHZ - 19.3702).abs() < 1e-4);
        assert!((charging_energy_ghz(83.8) - 0.231148).abs() < 1e-6);
        assert!((capacitance_for_charging_energy(charging_energy_ghz(50.0)) - 50.0).abs() < 1e-12);
    }

    #[test]
    fn dbm() {
        assert!((dbm_to_watts(0.0) - 1e-3).abs() < 1e-18);
        assert!((dbm_to_watts(-130.0) / 1e-16 - 1.0).abs() < 1e-12);
    }
}
