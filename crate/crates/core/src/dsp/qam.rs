use num_complex::Complex64;

use crate::{Error, Result};

/// Gray-coded square QAM with unit average power.
///
/// The upper half of the index bits selects the in-phase level and the lower
/// half the quadrature level; each axis is Gray coded so that neighbouring
/// levels differ in one bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: u32,
    levels_per_axis: u32,
    bits_per_axis: u32,
    scale: f64,
}

impl Constellation {
    pub fn new(order: u32) -> Result<Self> {
        let bits_per_axis = match order {
            4 => 1,
            16 => 2,
            64 => 3,
            _ => return Err(Error::InvalidOrder(order)),
        };
        let m = order as f64;
        Ok(Constellation {
            order,
            levels_per_axis: 1 << bits_per_axis,
            bits_per_axis,
            scale: (2.0 * (m - 1.0) / 3.0).sqrt().recip(),
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    fn level_amplitude(&self, level: u32) -> f64 {
        (2.0 * level as f64 - (self.levels_per_axis - 1) as f64) * self.scale
    }

    fn gray_to_level(mut g: u32) -> u32 {
        let mut shift = g >> 1;
        while shift != 0 {
            g ^= shift;
            shift >>= 1;
        }
        g
    }

    pub fn map(&self, index: u32) -> Result<Complex64> {
        if index >= self.order {
            return Err(Error::IndexOutOfRange {
                index,
                order: self.order,
            });
        }
        let mask = self.levels_per_axis - 1;
        let i_bits = index >> self.bits_per_axis;
        let q_bits = index & mask;
        Ok(Complex64::new(
            self.level_amplitude(Self::gray_to_level(i_bits)),
            self.level_amplitude(Self::gray_to_level(q_bits)),
        ))
    }

    /// Nearest level on one axis. Exact midpoints round up to the higher
    /// level, so a zero sample decides the level just above the origin.
    fn decide_axis(&self, x: f64) -> u32 {
        let top = (self.levels_per_axis - 1) as f64;
        let level = ((x / self.scale + top) / 2.0).round().clamp(0.0, top) as u32;
        level ^ (level >> 1)
    }

    pub fn demap(&self, sample: Complex64) -> u32 {
        (self.decide_axis(sample.re) << self.bits_per_axis) | self.decide_axis(sample.im)
    }

    /// All constellation points in index order.
    pub fn points(&self) -> Vec<Complex64> {
        (0..self.order).map(|i| self.map(i).expect("index in range")).collect()
    }
}

pub fn qam_map(indices: &[u32], order: u32) -> Result<Vec<Complex64>> {
    let c = Constellation::new(order)?;
    indices.iter().map(|&i| c.map(i)).collect()
}

pub fn qam_demap(samples: &[Complex64], order: u32) -> Result<Vec<u32>> {
    let c = Constellation::new(order)?;
    Ok(samples.iter().map(|&s| c.demap(s)).collect())
}
