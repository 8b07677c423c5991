//! Profile CSV files and their parameter sidecars.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use ricci_rot::geometry::{ProfileSample, PROFILE_CSV_HEADER};
use ricci_rot::{ProfileCurve, RicciParams};
use serde::{Deserialize, Serialize};

/// Written next to every profile CSV so the curve can be rebuilt.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileMeta {
    pub params: RicciParams,
    pub s0_anchor: f64,
}

/// `<csv>.params.json`
pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".params.json");
    PathBuf::from(name)
}

pub fn write_sidecar(csv: &Path, curve: &ProfileCurve) -> anyhow::Result<PathBuf> {
    let meta = ProfileMeta {
        params: curve.params,
        s0_anchor: curve.s0_anchor,
    };
    let path = sidecar_path(csv);
    let mut text = serde_json::to_string_pretty(&meta)?;
    text.push('\n');
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn read_sidecar(csv: &Path) -> anyhow::Result<ProfileMeta> {
    let path = sidecar_path(csv);
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_real(field: &str, column: &str, row: usize) -> anyhow::Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .with_context(|| format!("row {row}: column {column} is not a number: '{field}'"))
}

/// Rebuilds a curve from the CSV columns exactly as stored, so that a corrupted
/// column reaches the validator unchanged.
pub fn read_profile_csv(path: &Path, meta: &ProfileMeta) -> anyhow::Result<ProfileCurve> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != PROFILE_CSV_HEADER {
        bail!("unexpected header '{}', expected '{PROFILE_CSV_HEADER}'", header.join(","));
    }
    let mut samples = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("row {}", i + 1))?;
        let col = |j: usize| parse_real(&rec[j], &header[j], i + 1);
        let h = col(5)?;
        samples.push(ProfileSample {
            s: col(0)?,
            f: col(1)?,
            fp: col(2)?,
            g: col(3)?,
            k: col(4)?,
            h: h.is_finite().then_some(h),
            residual: col(6)?,
        });
    }
    Ok(ProfileCurve {
        params: meta.params,
        samples,
        s0_anchor: meta.s0_anchor,
    })
}
