//! Executes a [`RunConfig`]: all observables are computed in memory first,
//! then written by a single writer that cleans up after itself on failure.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use noonbloch_core::correlation::{
    coincidence_trace, correlation_matrix, oscillation_period, photon_density, single_site_density,
    CoincidenceTrace,
};
use thiserror::Error;

use crate::config::{Observable, RunConfig};
use crate::table::{self, DensityRow, GammaRow, MatrixTable, PeriodRecord, TableError};
use crate::verify::{predicted_period, verify, VerificationReport};

/// Overrides the configured output directory (but not `--out`).
pub const OUTPUT_DIR_ENV: &str = "NOONBLOCH_OUTPUT_DIR";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{observable}: {source}")]
    Compute {
        observable: String,
        #[source]
        source: noonbloch_core::Error,
    },
    #[error("{path}: {source}")]
    Table {
        path: PathBuf,
        #[source]
        source: TableError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("verification failed\n{0}")]
    VerificationFailed(VerificationReport),
}

/// One output file, path relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
    pub report: Option<VerificationReport>,
    pub period: Option<PeriodRecord>,
}

/// `--out` wins over the environment, which wins over the config file.
pub fn resolve_output_dir(cfg: &RunConfig, cli: Option<&Path>) -> PathBuf {
    cli.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| cfg.output_dir.clone())
}

fn encode<F>(path: PathBuf, write: F) -> Result<Artifact, RunError>
where
    F: FnOnce(&mut Vec<u8>) -> Result<(), TableError>,
{
    let mut bytes = Vec::new();
    match write(&mut bytes) {
        Ok(()) => Ok(Artifact { path, bytes }),
        Err(source) => Err(RunError::Table { path, source }),
    }
}

fn computing(obs: &Observable) -> impl FnOnce(noonbloch_core::Error) -> RunError + '_ {
    move |source| RunError::Compute { observable: obs.to_string(), source }
}

/// Computes every requested observable without touching the filesystem.
pub fn compute(cfg: &RunConfig) -> Result<RunOutput, RunError> {
    let mut out = RunOutput::default();
    let mut traces: BTreeMap<u32, CoincidenceTrace> = BTreeMap::new();
    let trace_for = |p: u32, traces: &mut BTreeMap<u32, CoincidenceTrace>, obs: &Observable| {
        if let std::collections::btree_map::Entry::Vacant(slot) = traces.entry(p) {
            let t = coincidence_trace(&cfg.state, &cfg.lattice, p, &cfg.grid, &cfg.window)
                .map_err(computing(obs))?;
            slot.insert(t);
        }
        Ok::<_, RunError>(traces[&p].clone())
    };

    for obs in &cfg.observables {
        match *obs {
            Observable::Density | Observable::SingleDensity => {
                let mut rows = Vec::with_capacity(cfg.grid.samples() * cfg.window.len());
                for z in cfg.grid.iter() {
                    let n = if *obs == Observable::Density {
                        photon_density(&cfg.state, &cfg.lattice, z, &cfg.window)
                    } else {
                        single_site_density(&cfg.lattice, cfg.state.site_a(), cfg.state.n_photons(), z, &cfg.window)
                    }
                    .map_err(computing(obs))?;
                    rows.extend(cfg.window.sites().zip(n).map(|(site, n)| DensityRow { z, site, n }));
                }
                let name = if *obs == Observable::Density { "density.csv" } else { "single_density.csv" };
                out.artifacts.push(encode(name.into(), |buf| table::write_density(buf, &rows))?);
            }
            Observable::Correlation(p) => {
                for (i, z) in cfg.grid.iter().enumerate() {
                    let m = correlation_matrix(&cfg.state, &cfg.lattice, z, p, &cfg.window)
                        .map_err(computing(obs))?;
                    let path = Path::new("correlation").join(format!("p{p}_z{i:05}.csv"));
                    out.artifacts.push(encode(path, |buf| table::write_matrix(buf, &MatrixTable::from(&m)))?);
                }
            }
            Observable::Gamma(p) => {
                let rows = GammaRow::from_trace(&trace_for(p, &mut traces, obs)?);
                out.artifacts.push(encode(format!("gamma_p{p}.csv").into(), |buf| table::write_gamma(buf, &rows))?);
            }
            Observable::Period => {
                let trace = trace_for(cfg.period_split(), &mut traces, obs)?;
                let estimate = oscillation_period(&trace).map_err(computing(obs))?;
                let lam = cfg.lattice.bloch_period().map_err(computing(obs))?;
                let record = PeriodRecord::new(&estimate, predicted_period(&cfg.state, lam));
                out.artifacts.push(encode("period.csv".into(), |buf| table::write_period(buf, &record))?);
                out.period = Some(record);
            }
            Observable::Verify => {
                let report = verify(cfg);
                out.artifacts.push(encode("verify.csv".into(), |buf| table::write_report(buf, &report))?);
                out.report = Some(report);
            }
        }
    }
    Ok(out)
}

/// Files and directories created so far, removed again on failure.
#[derive(Default)]
struct Written {
    files: Vec<PathBuf>,
    dirs: Vec<PathBuf>,
}

impl Written {
    fn create_dir_all(&mut self, dir: &Path) -> io::Result<()> {
        let mut missing = Vec::new();
        let mut cur = Some(dir);
        while let Some(d) = cur {
            if d.as_os_str().is_empty() || d.exists() {
                break;
            }
            missing.push(d.to_path_buf());
            cur = d.parent();
        }
        for d in missing.into_iter().rev() {
            fs::create_dir(&d)?;
            self.dirs.push(d);
        }
        Ok(())
    }

    fn roll_back(self) {
        // Best effort: the original error is what gets reported.
        for f in self.files.iter().rev() {
            let _ = fs::remove_file(f);
        }
        for d in self.dirs.iter().rev() {
            let _ = fs::remove_dir(d);
        }
    }
}

/// Writes all artifacts below `dir`. On any I/O error everything written by
/// this call is removed.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, RunError> {
    let mut written = Written::default();
    let result = (|| {
        for art in artifacts {
            let path = dir.join(&art.path);
            let parent = path.parent().unwrap_or(dir);
            written
                .create_dir_all(parent)
                .map_err(|source| RunError::Io { path: parent.to_path_buf(), source })?;
            fs::write(&path, &art.bytes).map_err(|source| RunError::Io { path: path.clone(), source })?;
            written.files.push(path);
        }
        Ok(())
    })();
    match result {
        Ok(()) => Ok(written.files),
        Err(e) => {
            written.roll_back();
            Err(e)
        }
    }
}

/// Computes and writes. A failed verification writes nothing and returns
/// [`RunError::VerificationFailed`].
pub fn run(cfg: &RunConfig, dir: &Path) -> Result<RunOutput, RunError> {
    let out = compute(cfg)?;
    if let Some(report) = out.report.as_ref().filter(|r| !r.passed()) {
        return Err(RunError::VerificationFailed(report.clone()));
    }
    write_artifacts(dir, &out.artifacts)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_write_removes_partial_output() {
        let tmp = std::env::temp_dir().join(format!("noonbloch-run-{}", std::process::id()));
        let _ = fs::remove_dir_all(&tmp);
        fs::create_dir_all(&tmp).unwrap();
        // A directory where a file should go makes the second write fail.
        fs::create_dir_all(tmp.join("out/b.csv")).unwrap();
        let arts = vec![
            Artifact { path: "sub/a.csv".into(), bytes: b"a\n".to_vec() },
            Artifact { path: "b.csv".into(), bytes: b"b\n".to_vec() },
        ];
        assert!(matches!(write_artifacts(&tmp.join("out"), &arts), Err(RunError::Io { .. })));
        assert!(!tmp.join("out/sub").exists());
        assert!(tmp.join("out/b.csv").is_dir());
        fs::remove_dir_all(&tmp).unwrap();
    }
}
