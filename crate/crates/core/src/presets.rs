//! Named default views, read from the preset file shipped with the crate.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Deserialize;

use crate::classifier::BasinGridConfig;
use crate::families::{Family, ParamWindow};

pub const PRESET_SOURCE: &str = include_str!("../presets/presets.toml");

#[derive(Debug, Deserialize)]
struct PresetFile {
    version: u32,
    render: RenderSection,
    family: BTreeMap<Family, FamilySection>,
}

#[derive(Debug, Deserialize)]
struct RenderSection {
    size: u32,
    grid_size: u32,
    confirm_grid_size: Option<u32>,
    capture_slack: Option<u32>,
}

#[derive(Debug, Deserialize)]
struct FamilySection {
    center: [f64; 2],
    half_width: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Preset {
    pub family: Family,
    pub center: Complex64,
    pub half_width: f64,
    pub size: u32,
    /// Basin grid for whole-image renders.
    pub grid: BasinGridConfig,
}

impl Preset {
    pub fn for_family(family: Family) -> Preset {
        presets().1[&family]
    }

    pub fn window(&self) -> ParamWindow {
        self.window_sized(self.size, self.size)
    }

    pub fn window_sized(&self, pixels_x: u32, pixels_y: u32) -> ParamWindow {
        ParamWindow::new(self.center, self.half_width, pixels_x, pixels_y)
            .expect("preset windows are valid")
    }
}

pub fn preset_version() -> u32 {
    presets().0
}

fn presets() -> &'static (u32, BTreeMap<Family, Preset>) {
    static PRESETS: OnceLock<(u32, BTreeMap<Family, Preset>)> = OnceLock::new();
    PRESETS.get_or_init(|| {
        let file: PresetFile = toml::from_str(PRESET_SOURCE).expect("shipped preset file parses");
        let grid = BasinGridConfig {
            grid_size: file.render.grid_size,
            confirm_grid_size: file.render.confirm_grid_size,
            capture_slack: file.render.capture_slack,
            ..BasinGridConfig::default()
        };
        grid.validate().expect("shipped preset grid is valid");
        let map = file
            .family
            .into_iter()
            .map(|(family, s)| {
                let preset = Preset {
                    family,
                    center: Complex64::new(s.center[0], s.center[1]),
                    half_width: s.half_width,
                    size: file.render.size,
                    grid,
                };
                (family, preset)
            })
            .collect();
        (file.version, map)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::ALL_FAMILIES;

    #[test]
    fn every_family_has_a_valid_preset() {
        assert_eq!(preset_version(), 2);
        for family in ALL_FAMILIES {
            let p = Preset::for_family(family);
            assert_eq!(p.family, family);
            p.window().validate().unwrap();
        }
        assert_eq!(Preset::for_family(Family::V1).center, Complex64::new(-0.5, 0.0));
        assert_eq!(Preset::for_family(Family::V4A).half_width, 8.0);
    }
}
