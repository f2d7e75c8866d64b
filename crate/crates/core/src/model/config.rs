use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::features::{structural_width, DeConfig, DeVariant};

/// Where raw node features enter the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RawInjection {
    /// Concatenated to the initial representation of every subgraph node.
    First,
    /// Concatenated to the target's final representation before the head.
    Last,
    None,
}

/// The eight feature configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Preset {
    M1,
    M2,
    M3,
    M4,
    M5,
    M6,
    M7,
    M8,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::M1,
        Preset::M2,
        Preset::M3,
        Preset::M4,
        Preset::M5,
        Preset::M6,
        Preset::M7,
        Preset::M8,
    ];

    pub fn uses_de(self) -> bool {
        matches!(self, Preset::M1 | Preset::M2 | Preset::M3)
    }

    /// Label as used in result tables, e.g. `M2-SPD`, `M5`.
    pub fn label(self, de: Option<DeVariant>) -> String {
        match de {
            Some(v) if self.uses_de() => format!("{self}-{v}"),
            _ => self.to_string(),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M{}", *self as usize + 1)
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let idx = s
            .trim()
            .strip_prefix(['M', 'm'])
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|d| (1..=8).contains(d))
            .ok_or_else(|| Error::Config(format!("unknown model {s:?} (expected M1..M8)")))?;
        Ok(Preset::ALL[idx - 1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModelConfig {
    pub de: Option<DeConfig>,
    pub use_degree: bool,
    pub raw_injection: RawInjection,
    pub num_layers: usize,
    pub hidden_dim: usize,
    /// Ego-subgraph radius; `None` means `max(num_layers, k)`.
    pub subgraph_hops: Option<usize>,
}

impl ModelConfig {
    /// Builds one of the eight presets with one SAGE layer, 64 hidden units
    /// and `k = 3`. A DE variant is required for M1-M3 and rejected otherwise.
    pub fn preset(preset: Preset, de_variant: Option<DeVariant>) -> Result<Self> {
        let de = match (preset.uses_de(), de_variant) {
            (true, Some(v)) => Some(DeConfig::new(v, DeConfig::DEFAULT_K)?),
            (true, None) => return Err(Error::Config(format!("{preset} needs a DE variant (spd or rw)"))),
            (false, Some(v)) => return Err(Error::Config(format!("{preset} takes no DE features, got {v}"))),
            (false, None) => None,
        };
        let (use_degree, raw_injection) = match preset {
            Preset::M1 => (true, RawInjection::First),
            Preset::M2 => (true, RawInjection::Last),
            Preset::M3 => (true, RawInjection::None),
            Preset::M4 => (true, RawInjection::None),
            Preset::M5 => (false, RawInjection::First),
            Preset::M6 => (false, RawInjection::Last),
            Preset::M7 => (true, RawInjection::First),
            Preset::M8 => (true, RawInjection::Last),
        };
        Ok(ModelConfig {
            de,
            use_degree,
            raw_injection,
            num_layers: 1,
            hidden_dim: 64,
            subgraph_hops: None,
        })
    }

    pub fn with_k(mut self, k: usize) -> Result<Self> {
        if let Some(de) = self.de.as_mut() {
            *de = DeConfig::new(de.variant, k)?;
        }
        Ok(self)
    }

    pub fn structural_width(&self) -> usize {
        structural_width(self.de, self.use_degree)
    }

    /// No structural features and no raw features on the propagation path:
    /// the model reduces to an MLP on the target's raw features.
    pub fn is_mlp(&self) -> bool {
        self.structural_width() == 0 && self.raw_injection == RawInjection::Last
    }

    pub fn hops(&self) -> usize {
        self.subgraph_hops
            .unwrap_or_else(|| self.num_layers.max(self.de.map_or(self.num_layers, |d| d.k)))
    }

    /// Radius of the neighbourhood that can influence the target's output.
    pub fn receptive_radius(&self) -> usize {
        if self.is_mlp() {
            0
        } else {
            self.num_layers.min(self.hops())
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_layers == 0 || self.hidden_dim == 0 {
            return Err(Error::Config("layers and hidden units must be at least 1".into()));
        }
        if self.subgraph_hops == Some(0) {
            return Err(Error::Config("subgraph hops must be at least 1".into()));
        }
        if self.structural_width() == 0 && self.raw_injection == RawInjection::None {
            return Err(Error::EmptyFeatures);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_rows() {
        let m3 = ModelConfig::preset(Preset::M3, Some(DeVariant::Spd)).unwrap();
        assert_eq!(m3.de.unwrap().variant, DeVariant::Spd);
        assert!(m3.use_degree);
        assert_eq!(m3.raw_injection, RawInjection::None);

        let m5 = ModelConfig::preset(Preset::M5, None).unwrap();
        assert_eq!((m5.de, m5.use_degree, m5.raw_injection), (None, false, RawInjection::First));

        let m1 = ModelConfig::preset(Preset::M1, Some(DeVariant::Rw)).unwrap();
        let m2 = ModelConfig::preset(Preset::M2, Some(DeVariant::Rw)).unwrap();
        assert_eq!(
            ModelConfig {
                raw_injection: RawInjection::Last,
                ..m1
            },
            m2
        );
        assert_eq!(m1.raw_injection, RawInjection::First);
    }

    #[test]
    fn full_table() {
        let expect = [
            (Preset::M1, true, true, RawInjection::First),
            (Preset::M2, true, true, RawInjection::Last),
            (Preset::M3, true, true, RawInjection::None),
            (Preset::M4, false, true, RawInjection::None),
            (Preset::M5, false, false, RawInjection::First),
            (Preset::M6, false, false, RawInjection::Last),
            (Preset::M7, false, true, RawInjection::First),
            (Preset::M8, false, true, RawInjection::Last),
        ];
        for (p, de, deg, raw) in expect {
            let cfg = ModelConfig::preset(p, de.then_some(DeVariant::Rw)).unwrap();
            assert_eq!(cfg.de.is_some(), de, "{p}");
            assert_eq!(cfg.use_degree, deg, "{p}");
            assert_eq!(cfg.raw_injection, raw, "{p}");
            assert_eq!(cfg.is_mlp(), p == Preset::M6, "{p}");
            cfg.validate().unwrap();
        }
    }

    #[test]
    fn de_variant_mismatch() {
        assert!(ModelConfig::preset(Preset::M2, None).is_err());
        assert!(ModelConfig::preset(Preset::M4, Some(DeVariant::Spd)).is_err());
    }

    #[test]
    fn hops_default_and_names() {
        let mut cfg = ModelConfig::preset(Preset::M1, Some(DeVariant::Spd)).unwrap();
        assert_eq!(cfg.hops(), 3);
        cfg.num_layers = 4;
        assert_eq!(cfg.hops(), 4);
        let m7 = ModelConfig::preset(Preset::M7, None).unwrap();
        assert_eq!(m7.hops(), 1);
        assert_eq!("m6".parse::<Preset>().unwrap(), Preset::M6);
        assert!("M9".parse::<Preset>().is_err());
        assert_eq!(Preset::M2.label(Some(DeVariant::Spd)), "M2-SPD");
        assert_eq!(Preset::M5.label(None), "M5");
    }
}
