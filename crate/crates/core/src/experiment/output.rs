use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::montecarlo::{AveragedObservable, SweepPoint};

use super::config::Observable;
use super::{ExperimentData, ExperimentRun};

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn table<I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
}

fn observable_rows(obs: &AveragedObservable) -> impl Iterator<Item = Vec<String>> + '_ {
    obs.grid.iter().enumerate().map(|(i, x)| {
        vec![
            x.to_string(),
            obs.mean[i].to_string(),
            opt(obs.stderr.as_ref().map(|s| s[i])),
        ]
    })
}

fn sweep_rows(points: &[SweepPoint]) -> impl Iterator<Item = Vec<String>> + '_ {
    points.iter().map(|p| {
        let t = &p.trapping;
        vec![
            p.value.to_string(),
            opt(t.mean),
            opt(t.stderr),
            opt(t.tau_of_mean.value()),
            t.n_failed.to_string(),
        ]
    })
}

/// CSV text of a finished run. Depends only on the results, so equal runs
/// give byte-equal files.
pub fn render_csv(run: &ExperimentRun) -> String {
    let mut out = String::new();
    out.push_str("# units: frequencies in gamma0, times in tau0 = 1/gamma0, lengths in lambda-bar = 1/k0\n");
    match (&run.data, run.config.observable) {
        (ExperimentData::Spectrum(obs), _) => {
            out.push_str("# |b_s(omega)|^2 in 1/gamma0^2, averaged over realizations\n");
            out.push_str(&table(&["delta_omega", "mean", "stderr"], observable_rows(obs)));
        }
        (ExperimentData::Decay { decay, .. }, _) => {
            out.push_str(&table(&["t", "P_sum_mean", "P_sum_stderr"], observable_rows(decay)));
        }
        (ExperimentData::Sweep(points), obs) => {
            let what = if obs == Observable::TrappingVsStark {
                "Stark splitting"
            } else {
                "inhomogeneous width"
            };
            let _ = writeln!(out, "# sweep_value is the {what} in gamma0; tau columns in tau0");
            out.push_str(&table(
                &["sweep_value", "tau_mean", "tau_stderr", "tau_of_mean", "n_failed"],
                sweep_rows(points),
            ));
        }
    }
    out
}

/// Manifest: a comment header followed by the resolved configuration, which
/// re-runs to the same CSV.
pub fn render_manifest(run: &ExperimentRun) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# dipmirror {} run manifest", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# seed = {}", run.config.seed);
    let _ = writeln!(out, "# wall_clock_seconds = {:.3}", run.elapsed.as_secs_f64());
    let _ = writeln!(out, "# atoms = {}", run.n_atoms);
    let _ = writeln!(out, "# failed_realizations = {}", run.failed_realizations);
    if let ExperimentData::Decay { trapping, .. } = &run.data {
        let _ = writeln!(
            out,
            "# tau_mean = {} tau_stderr = {} tau_of_mean = {} n_failed = {}",
            opt(trapping.mean),
            opt(trapping.stderr),
            opt(trapping.tau_of_mean.value()),
            trapping.n_failed
        );
    }
    if let Some(c) = &run.calibration {
        let _ = writeln!(
            out,
            "# calibrated from reference density {}: scale = {}, tau_reference = {}, tau_calibrated = {}",
            c.reference_density, c.scale, c.tau_reference, c.tau_calibrated
        );
    }
    out.push('\n');
    out.push_str(&run.config.to_toml());
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WrittenFiles {
    pub csv: PathBuf,
    pub manifest: PathBuf,
}

/// Writes `<stem>.csv` and `<stem>.manifest.toml` into `dir`. Both files are
/// written to a staging directory first and renamed into place, so a failure
/// never leaves a truncated result.
pub fn write_outputs(run: &ExperimentRun, dir: &Path) -> Result<WrittenFiles> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stem = run.config.file_stem();
    let staging = dir.join(format!(".staging-{stem}-{}", std::process::id()));
    fs::create_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;

    let files = [
        (format!("{stem}.csv"), render_csv(run)),
        (format!("{stem}.manifest.toml"), render_manifest(run)),
    ];
    let result = (|| {
        for (name, text) in &files {
            let p = staging.join(name);
            fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
        }
        for (name, _) in &files {
            let target = dir.join(name);
            fs::rename(staging.join(name), &target).map_err(|e| Error::io(&target, e))?;
        }
        Ok(())
    })();
    let _ = fs::remove_dir_all(&staging);
    result?;
    Ok(WrittenFiles {
        csv: dir.join(&files[0].0),
        manifest: dir.join(&files[1].0),
    })
}
