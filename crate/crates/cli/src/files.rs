//! File formats and the on-disk cache.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use num_bigint::BigInt;
use wehler_k3::liftsearch::{parse_point, ZPoint};
use wehler_k3::orbit::CycleTable;
use wehler_k3::SurfaceCoefficients;

pub fn read_surface(path: &Path) -> Result<SurfaceCoefficients> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    SurfaceCoefficients::parse(&text).with_context(|| format!("in {}", path.display()))
}

pub fn read_point(path: &Path) -> Result<ZPoint> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_point(&text).with_context(|| format!("in {}", path.display()))
}

/// Lines `m N_m`; blank lines and `#` comments are skipped. The indices must
/// run 1, 2, 3, ... without gaps.
pub fn parse_counts(text: &str) -> Result<Vec<BigInt>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [m, n] = fields[..] else {
            bail!("line {}: expected `m N_m`", lineno + 1);
        };
        let m: usize = m
            .parse()
            .with_context(|| format!("line {}: bad index", lineno + 1))?;
        let n: BigInt = n
            .parse()
            .with_context(|| format!("line {}: bad count", lineno + 1))?;
        if m != out.len() + 1 {
            bail!(
                "line {}: expected index {}, found {m}",
                lineno + 1,
                out.len() + 1
            );
        }
        out.push(n);
    }
    Ok(out)
}

pub fn read_counts(path: &Path) -> Result<Vec<BigInt>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_counts(&text).with_context(|| format!("in {}", path.display()))
}

pub fn format_counts(counts: &[u64]) -> String {
    counts
        .iter()
        .enumerate()
        .map(|(i, n)| format!("{} {n}\n", i + 1))
        .collect()
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn counts_path(cache: &Path, surface: &SurfaceCoefficients, p: u64) -> PathBuf {
    cache.join(format!("{}-p{p}.counts", surface.digest()))
}

fn cycles_path(cache: &Path, surface: &SurfaceCoefficients, p: u64) -> PathBuf {
    cache.join(format!("{}-p{p}.cycles.json", surface.digest()))
}

/// A cached table is used only if it parses and names the same surface and
/// prime; anything else is treated as a miss.
pub fn load_cycles(cache: &Path, surface: &SurfaceCoefficients, p: u64) -> Option<CycleTable> {
    let text = fs::read_to_string(cycles_path(cache, surface, p)).ok()?;
    let table: CycleTable = serde_json::from_str(&text).ok()?;
    (table.prime == p && table.surface_id == surface.digest()).then_some(table)
}

pub fn store_cycles(cache: &Path, surface: &SurfaceCoefficients, table: &CycleTable) -> Result<()> {
    let text = serde_json::to_string(table)?;
    write_file(&cycles_path(cache, surface, table.prime), &text)
}
