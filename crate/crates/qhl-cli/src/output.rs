//! Output plumbing: the replay header every report carries, atomic file
//! writes, and the `--out` target convention (`-` for standard output, a
//! `.json` path for a single file, anything else for a directory).

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::spec::DomainSpec;
use qhl::report::VerificationReport;

/// Everything needed to replay a run. Serialized at the top of each report;
/// identical configs must produce byte-identical output.
#[derive(Serialize)]
pub struct RunConfig {
    pub command: String,
    pub domain_path: String,
    pub domain: DomainSpec,
    pub h: f64,
    pub stencil: String,
    pub seed: u64,
    pub samples: usize,
    /// Property-specific flags, stringified, in flag order.
    pub params: BTreeMap<String, String>,
    pub out: String,
    pub formats: Vec<String>,
}

#[derive(Serialize)]
struct CliReport<'a> {
    version: &'static str,
    config: &'a RunConfig,
    #[serde(flatten)]
    report: &'a VerificationReport,
}

pub fn report_json(config: &RunConfig, report: &VerificationReport) -> Result<String> {
    let wrapped = CliReport { version: env!("CARGO_PKG_VERSION"), config, report };
    let mut s = serde_json::to_string_pretty(&wrapped).context("serializing report")?;
    s.push('\n');
    Ok(s)
}

/// Where the artifacts of one run go.
pub enum OutTarget {
    Stdout,
    File(PathBuf),
    Dir(PathBuf),
}

impl OutTarget {
    pub fn parse(out: &str) -> Result<OutTarget> {
        if out == "-" {
            return Ok(OutTarget::Stdout);
        }
        let p = PathBuf::from(out);
        if p.extension().is_some() {
            Ok(OutTarget::File(p))
        } else {
            std::fs::create_dir_all(&p).with_context(|| format!("creating {}", p.display()))?;
            Ok(OutTarget::Dir(p))
        }
    }

    /// Emit the primary artifact (stdout or file) or a named file in a dir.
    pub fn write(&self, name: &str, contents: &str) -> Result<()> {
        match self {
            OutTarget::Stdout => {
                std::io::stdout().write_all(contents.as_bytes()).context("writing stdout")
            }
            OutTarget::File(p) => atomic_write(p, contents),
            OutTarget::Dir(d) => atomic_write(&d.join(name), contents),
        }
    }

    /// Secondary artifacts (SVG, CSV sidecars) only land next to a primary
    /// file or inside a directory; stdout runs skip them.
    pub fn write_sidecar(&self, name: &str, contents: &str) -> Result<bool> {
        match self {
            OutTarget::Stdout => Ok(false),
            OutTarget::File(p) => {
                let side = p.with_file_name(name);
                atomic_write(&side, contents)?;
                Ok(true)
            }
            OutTarget::Dir(d) => {
                atomic_write(&d.join(name), contents)?;
                Ok(true)
            }
        }
    }
}

/// Write via a temp file and rename so readers never see partial output.
fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    std::fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path)
        .with_context(|| format!("moving {} into place", path.display()))?;
    Ok(())
}
