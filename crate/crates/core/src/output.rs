//! CSV emission and run manifests.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::config::to_config_string;
use crate::dynamics::{ConservationReport, Trajectory};
use crate::error::{Error, Result};
use crate::observables::{ObservableRecord, Regime};
use crate::scenarios::{ComparisonReport, ScenarioConfig};
use crate::statics::StaticSolution;

pub const TRAJECTORY_HEADER: &str = "t,x,p,s_ent,e_osc,e_ss,norm,total_energy";
pub const STATICS_HEADER: &str = "branch,x,p,eigenvalue,residual";

/// One written file.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub regime: Option<Regime>,
    pub rows: usize,
}

pub fn trajectory_csv(records: &[ObservableRecord]) -> String {
    let mut s = String::with_capacity(64 * (records.len() + 1));
    s.push_str(TRAJECTORY_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            r.t, r.x_like, r.p_like, r.s_ent, r.e_osc, r.e_ss, r.norm, r.total_energy
        );
    }
    s
}

pub fn write_trajectory_csv(traj: &Trajectory, path: &Path) -> Result<ManifestEntry> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(trajectory_csv(&traj.records).as_bytes())?;
    w.flush()?;
    Ok(ManifestEntry {
        path: path.to_path_buf(),
        regime: Some(traj.regime),
        rows: traj.records.len(),
    })
}

pub fn parse_trajectory_csv(text: &str) -> Result<Vec<ObservableRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == TRAJECTORY_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header '{TRAJECTORY_HEADER}'"),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let vals: Vec<f64> = line
            .split(',')
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
        if vals.len() != 8 {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected 8 fields, got {}", vals.len()),
            });
        }
        out.push(ObservableRecord {
            t: vals[0],
            x_like: vals[1],
            p_like: vals[2],
            s_ent: vals[3],
            e_osc: vals[4],
            e_ss: vals[5],
            norm: vals[6],
            total_energy: vals[7],
        });
    }
    Ok(out)
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<ObservableRecord>> {
    parse_trajectory_csv(&fs::read_to_string(path)?)
}

pub fn statics_csv(solutions: &[StaticSolution]) -> String {
    let mut s = String::from(STATICS_HEADER);
    s.push('\n');
    for sol in solutions {
        let _ = writeln!(
            s,
            "{},{:?},{:?},{:?},{:?}",
            sol.branch, sol.x, sol.p, sol.eigenvalue, sol.residual
        );
    }
    s
}

pub fn write_statics_csv(solutions: &[StaticSolution], path: &Path) -> Result<ManifestEntry> {
    fs::write(path, statics_csv(solutions))?;
    Ok(ManifestEntry {
        path: path.to_path_buf(),
        regime: None,
        rows: solutions.len(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub label: String,
    pub config: ScenarioConfig,
    pub files: Vec<ManifestEntry>,
    pub conservation: Vec<(Regime, ConservationReport)>,
    pub duration: Duration,
}

impl RunManifest {
    /// Config echo followed by a `[manifest]` section, which the config
    /// parser skips.
    pub fn render(&self) -> String {
        let mut s = to_config_string(&self.config);
        let _ = writeln!(s, "\n[manifest]");
        let _ = writeln!(s, "label = {}", self.label);
        for f in &self.files {
            let name = f.regime.map_or("statics", |r| r.as_str());
            let _ = writeln!(s, "file_{name} = {}", f.path.display());
            let _ = writeln!(s, "rows_{name} = {}", f.rows);
        }
        for (regime, c) in &self.conservation {
            let r = regime.as_str();
            let _ = writeln!(s, "norm_drift_{r} = {:?}", c.max_norm_drift);
            match c.max_energy_drift {
                Some(e) => {
                    let _ = writeln!(s, "energy_drift_{r} = {e:?}");
                }
                None => {
                    let _ = writeln!(s, "energy_drift_{r} = n/a");
                }
            }
            if let Some(reason) = &c.aborted {
                let _ = writeln!(s, "aborted_{r} = {reason}");
            }
            let _ = writeln!(s, "violation_{r} = {}", c.violated());
        }
        let _ = writeln!(s, "duration_s = {:?}", self.duration.as_secs_f64());
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render())?;
        Ok(())
    }
}

/// Writes `<label>_<regime>.csv` per trajectory and `<label>_manifest.cfg`.
pub fn write_report(
    report: &ComparisonReport,
    cfg: &ScenarioConfig,
    dir: &Path,
    duration: Duration,
) -> Result<(RunManifest, PathBuf)> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for traj in &report.trajectories {
        let path = dir.join(format!("{}_{}.csv", report.label, traj.regime.as_str()));
        files.push(write_trajectory_csv(traj, &path)?);
    }
    let manifest = RunManifest {
        label: report.label.clone(),
        config: cfg.clone(),
        files,
        conservation: report
            .trajectories
            .iter()
            .map(|t| (t.regime, t.conservation.clone()))
            .collect(),
        duration,
    };
    let path = dir.join(format!("{}_manifest.cfg", report.label));
    manifest.write(&path)?;
    Ok((manifest, path))
}
