//! Shaping-mode presets on 64-QAM.
//!
//! Three Maxwell–Boltzmann modes are defined by their entropy; the fourth
//! transmits uniformly on the inner 6×6 square only, so the corner points of
//! the 64-QAM grid are never used.

use crate::constellation::{Constellation, SymbolDistribution};
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ShapingSpec {
    /// MB law whose ν is solved to hit the target entropy.
    MaxwellBoltzmann,
    /// Uniform on the `side × side` inner square.
    InnerSquare { side: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapingMode {
    pub name: &'static str,
    /// Bits per label of the base constellation.
    pub m: u32,
    pub spec: ShapingSpec,
    /// Input entropy in bits.
    pub target_entropy: f64,
}

pub const PRESETS: [ShapingMode; 4] = [
    ShapingMode {
        name: "mode1",
        m: 6,
        spec: ShapingSpec::MaxwellBoltzmann,
        target_entropy: 4.5,
    },
    ShapingMode {
        name: "mode2",
        m: 6,
        spec: ShapingSpec::MaxwellBoltzmann,
        target_entropy: 5.0,
    },
    ShapingMode {
        name: "mode3",
        m: 6,
        spec: ShapingSpec::MaxwellBoltzmann,
        target_entropy: 5.5,
    },
    ShapingMode {
        name: "mode4",
        m: 6,
        spec: ShapingSpec::InnerSquare { side: 6 },
        // log2(36)
        target_entropy: 5.169_925_001_442_312,
    },
];

pub fn preset(name: &str) -> Result<ShapingMode> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .copied()
        .ok_or_else(|| invalid(format!("unknown shaping mode '{name}'")))
}

impl ShapingMode {
    pub fn constellation(&self) -> Result<Constellation> {
        Constellation::square_qam(self.m)
    }

    pub fn distribution(&self, c: &Constellation) -> Result<SymbolDistribution> {
        match self.spec {
            ShapingSpec::MaxwellBoltzmann => SymbolDistribution::maxwell_boltzmann_with_entropy(c, self.target_entropy),
            ShapingSpec::InnerSquare { side } => {
                let support = c.inner_square(side);
                if support.len() != side * side {
                    return Err(invalid(format!("no {side}x{side} inner square")));
                }
                SymbolDistribution::uniform_on(c.len(), &support)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_hit_their_entropies() {
        for mode in PRESETS {
            let c = mode.constellation().unwrap();
            let d = mode.distribution(&c).unwrap();
            assert!((d.entropy() - mode.target_entropy).abs() < 0.01, "{}", mode.name);
        }
    }

    #[test]
    fn mode4_leaves_corners_empty() {
        let m = preset("mode4").unwrap();
        let c = m.constellation().unwrap();
        let d = m.distribution(&c).unwrap();
        assert_eq!(d.support().len(), 36);
        assert!(preset("mode9").is_err());
    }
}
