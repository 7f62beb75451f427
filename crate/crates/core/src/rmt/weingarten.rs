use crate::error::{Error, Result};
use num_traits::{FromPrimitive, Num};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycleType {
    /// [1,1]
    Id2,
    /// [2]
    Swap,
    /// [1,1,1,1]
    Id4,
    /// [1,1,2]
    Transposition4,
    /// [2,2]
    DoubleTransposition,
    /// [1,3]
    ThreeCycle,
    /// [4]
    FourCycle,
}

impl CycleType {
    pub fn from_parts(parts: &[u32]) -> Result<Self> {
        let mut p = parts.to_vec();
        p.sort_unstable();
        Ok(match p.as_slice() {
            [1, 1] => CycleType::Id2,
            [2] => CycleType::Swap,
            [1, 1, 1, 1] => CycleType::Id4,
            [1, 1, 2] => CycleType::Transposition4,
            [2, 2] => CycleType::DoubleTransposition,
            [1, 3] => CycleType::ThreeCycle,
            [4] => CycleType::FourCycle,
            _ => return Err(Error::UnsupportedCycleType(parts.to_vec())),
        })
    }
}

/// Exact numerator and denominator of Wg(cycle, D).
fn fraction(cycle: CycleType, d: i128) -> (i128, i128) {
    let d2 = d * d;
    let sextic = (d2 - 1) * (d2 - 4) * (d2 - 9);
    match cycle {
        CycleType::Id2 => (1, d2 - 1),
        CycleType::Swap => (-1, d * (d2 - 1)),
        CycleType::Id4 => (6 - 8 * d2 + d2 * d2, d2 * sextic),
        CycleType::Transposition4 => (-1, 9 * d - 10 * d * d2 + d * d2 * d2),
        CycleType::DoubleTransposition => (6 + d2, d2 * sextic),
        CycleType::ThreeCycle => (-3 + 2 * d2, d2 * sextic),
        CycleType::FourCycle => (-5, d * sextic),
    }
}

/// Unitary Weingarten function for cycle types of S_2 and S_4, exact in `T`
/// (e.g. `Ratio<i128>`) or rounded once in a float type.
pub fn weingarten<T: Num + FromPrimitive>(parts: &[u32], d: u64) -> Result<T> {
    let cycle = CycleType::from_parts(parts)?;
    if d > 10_000 {
        return Err(Error::DimensionTooLarge {
            dim: d as usize,
            limit: 10_000,
        });
    }
    let (num, den) = fraction(cycle, d as i128);
    if den == 0 {
        return Err(Error::WeingartenPole(d));
    }
    let n = T::from_i128(num).ok_or_else(|| Error::DimensionMismatch("numerator overflow".into()))?;
    let m = T::from_i128(den).ok_or_else(|| Error::DimensionMismatch("denominator overflow".into()))?;
    Ok(n / m)
}
