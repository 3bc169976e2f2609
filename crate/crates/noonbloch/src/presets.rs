//! Figure-reproduction presets shipped with the binary.
//!
//! All presets use C = 1 and B = 4/15, so the classical excursion 4C/B is 15
//! sites. That ratio is cosmetic: every result that matters depends only on
//! distances in units of the Bloch period.

use std::path::{Path, PathBuf};

use crate::config::{parse_config, ConfigError, RunConfig};

/// One configuration inside a preset, written to `subdir` of the preset's
/// output directory (or directly into it when `subdir` is empty).
#[derive(Debug, Clone, Copy)]
pub struct PresetRun {
    pub subdir: &'static str,
    pub source: &'static str,
}

#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub runs: &'static [PresetRun],
}

macro_rules! run {
    ($subdir:literal, $file:literal) => {
        PresetRun { subdir: $subdir, source: include_str!(concat!("../presets/", $file, ".toml")) }
    };
}

pub const PRESETS: &[Preset] = &[
    Preset { name: "fig1a", description: "single-site injection density", runs: &[run!("", "fig1a")] },
    Preset { name: "fig1b", description: "N=1 NOON density (coherent)", runs: &[run!("", "fig1b")] },
    Preset { name: "fig1c", description: "N=2 NOON density (incoherent)", runs: &[run!("", "fig1c")] },
    Preset { name: "fig2a", description: "N=2 correlation matrices, phase 0", runs: &[run!("", "fig2a")] },
    Preset { name: "fig2b", description: "N=2 correlation matrices, phase pi/2", runs: &[run!("", "fig2b")] },
    Preset { name: "fig2c", description: "N=2 correlation matrices, phase pi", runs: &[run!("", "fig2c")] },
    Preset {
        name: "fig2d",
        description: "N=2 coincidence ratio and period for three phases",
        runs: &[
            run!("phi0", "fig2d_phi0"),
            run!("phi_half_pi", "fig2d_phi_half_pi"),
            run!("phi_pi", "fig2d_phi_pi"),
        ],
    },
    Preset { name: "fig3a", description: "N=2, inputs two sites apart, correlation matrices", runs: &[run!("", "fig3a")] },
    Preset { name: "fig3b", description: "N=6 correlation matrices", runs: &[run!("", "fig3b")] },
    Preset { name: "fig3c", description: "N=10 correlation matrices", runs: &[run!("", "fig3c")] },
    Preset {
        name: "fig3d",
        description: "coincidence ratio periods for N=2 (two sites apart), N=6 and N=10",
        runs: &[
            run!("n2_d2", "fig3d_n2_d2"),
            run!("n6", "fig3d_n6"),
            run!("n10", "fig3d_n10"),
        ],
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

impl Preset {
    /// Parsed configurations paired with their output directories below `root`.
    pub fn configs(&self, root: &Path) -> Result<Vec<(RunConfig, PathBuf)>, ConfigError> {
        self.runs
            .iter()
            .map(|run| {
                let cfg = parse_config(run.source)?;
                let dir = if run.subdir.is_empty() { root.to_path_buf() } else { root.join(run.subdir) };
                Ok((cfg, dir))
            })
            .collect()
    }

    /// Default output directory: the one named in the first configuration.
    pub fn default_output_dir(&self) -> PathBuf {
        parse_config(self.runs[0].source)
            .map(|c| c.output_dir)
            .unwrap_or_else(|_| PathBuf::from("out").join(self.name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses() {
        for preset in PRESETS {
            let configs = preset.configs(Path::new("x")).unwrap();
            assert_eq!(configs.len(), preset.runs.len(), "{}", preset.name);
            for (cfg, _) in configs {
                assert_eq!(cfg.lattice.coupling(), 1.0);
                assert!((cfg.lattice.excursion(1.0) - 15.0).abs() < 1e-12);
            }
        }
        assert!(find("fig2d").is_some());
        assert!(find("fig4").is_none());
    }
}
