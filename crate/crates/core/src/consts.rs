//! Physical and signal constants shared by every module.

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// GPS L1 carrier frequency, Hz.
pub const F_L1: f64 = 1_575.42e6;

/// C/A code chipping rate, chips/s.
pub const F_CHIP: f64 = 1.023e6;

/// C/A code length, chips.
pub const CODE_LENGTH: usize = 1023;

/// C/A code period, s.
pub const CODE_PERIOD: f64 = CODE_LENGTH as f64 / F_CHIP;

/// Code periods per navigation data bit (50 bps).
pub const CODES_PER_BIT: u64 = 20;

/// Code-to-carrier frequency ratio `f_chip / f_c` (exactly 1/1540 for L1 C/A).
pub const CODE_CARRIER_RATIO: f64 = F_CHIP / F_L1;

/// Earth gravitational parameter, m^3/s^2.
pub const MU_EARTH: f64 = 3.986_004_418e14;

/// Earth rotation rate, rad/s.
pub const OMEGA_EARTH: f64 = 7.292_115e-5;

/// Mean Earth radius used for the spherical local frame, m.
pub const EARTH_RADIUS: f64 = 6_371_000.0;

/// Meters per chip of code delay.
pub const METERS_PER_CHIP: f64 = SPEED_OF_LIGHT / F_CHIP;

/// Carrier wavelength, m.
pub const L1_WAVELENGTH: f64 = SPEED_OF_LIGHT / F_L1;
