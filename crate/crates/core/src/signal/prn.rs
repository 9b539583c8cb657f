//! GPS C/A Gold codes from the two 10-stage LFSRs (G1, G2 with a phase
//! selector per PRN).

use crate::consts::CODE_LENGTH;
use crate::error::{Error, Result};

/// G2 phase-selector taps (1-based stage numbers) for PRN 1..=32.
const G2_TAPS: [(usize, usize); 32] = [
    (2, 6), (3, 7), (4, 8), (5, 9), (1, 9), (2, 10), (1, 8), (2, 9),
    (3, 10), (2, 3), (3, 4), (5, 6), (6, 7), (7, 8), (8, 9), (9, 10),
    (1, 4), (2, 5), (3, 6), (4, 7), (5, 8), (6, 9), (1, 3), (4, 6),
    (5, 7), (6, 8), (7, 9), (8, 10), (1, 6), (2, 7), (3, 8), (4, 9),
];

/// Chip sequence for `prn` as ±1 (logic 0 → +1, logic 1 → −1).
pub fn prn_code(prn: u8) -> Result<Vec<i8>> {
    Ok(prn_code_bits(prn)?.into_iter().map(|b| if b == 0 { 1 } else { -1 }).collect())
}

/// Chip sequence for `prn` as logic levels 0/1.
pub fn prn_code_bits(prn: u8) -> Result<Vec<u8>> {
    if !(1..=32).contains(&prn) {
        return Err(Error::InvalidPrn(prn));
    }
    let (s1, s2) = G2_TAPS[prn as usize - 1];
    let mut g1 = [1u8; 10];
    let mut g2 = [1u8; 10];
    let mut out = Vec::with_capacity(CODE_LENGTH);
    for _ in 0..CODE_LENGTH {
        out.push(g1[9] ^ g2[s1 - 1] ^ g2[s2 - 1]);
        let f1 = g1[2] ^ g1[9];
        let f2 = g2[1] ^ g2[2] ^ g2[5] ^ g2[7] ^ g2[8] ^ g2[9];
        g1.rotate_right(1);
        g2.rotate_right(1);
        g1[0] = f1;
        g2[0] = f2;
    }
    Ok(out)
}

/// All 32 codes, indexed by `prn - 1`.
pub fn code_table() -> Vec<Vec<i8>> {
    (1..=32).map(|p| prn_code(p).expect("prn in range")).collect()
}
