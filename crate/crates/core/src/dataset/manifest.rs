//! Text manifest listing the sample files of a dataset.
//!
//! UTF-8, one record per line, fields separated by tabs, each field
//! `key=value`. The first line is the header:
//!
//! `dbar-manifest version=1 count=N [pipeline={json}]`; each following line
//! is `file=… crc32=… seed=… style=… delta=… r_delta=… radii=6,7,8 level=…
//! extent_factor=… width=… height=… version=…` with tabs between fields.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::format::write_atomic;
use super::sample::{PipelineConfig, SampleMeta};

pub const MANIFEST_NAME: &str = "manifest.txt";
pub const MANIFEST_VERSION: u32 = 1;
const HEADER_TAG: &str = "dbar-manifest";

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub file: String,
    pub crc32: u32,
    pub meta: SampleMeta,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Manifest {
    pub pipeline: Option<PipelineConfig>,
    pub entries: Vec<ManifestEntry>,
}

fn join_radii(radii: &[f64]) -> String {
    radii
        .iter()
        .map(|r| r.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn fields(line: &str, lineno: usize) -> Result<Vec<(&str, &str)>> {
    line.split('\t')
        .map(|f| {
            f.split_once('=')
                .ok_or_else(|| Error::Manifest(format!("line {lineno}: field `{f}` lacks `=`")))
        })
        .collect()
}

fn lookup<'a>(fields: &[(&str, &'a str)], key: &str, lineno: usize) -> Result<&'a str> {
    fields
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::Manifest(format!("line {lineno}: missing `{key}`")))
}

fn parse<T: std::str::FromStr>(value: &str, key: &str, lineno: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Manifest(format!("line {lineno}: bad value `{value}` for `{key}`")))
}

impl Manifest {
    pub fn render(&self) -> Result<String> {
        let mut out = format!(
            "{HEADER_TAG}\tversion={MANIFEST_VERSION}\tcount={}",
            self.entries.len()
        );
        if let Some(p) = &self.pipeline {
            write!(out, "\tpipeline={}", serde_json::to_string(p)?).unwrap();
        }
        out.push('\n');
        for e in &self.entries {
            let m = &e.meta;
            writeln!(
                out,
                "file={}\tcrc32={:08x}\tseed={}\tstyle={}\tdelta={}\tr_delta={}\tradii={}\tlevel={}\textent_factor={}\twidth={}\theight={}\tversion={}",
                e.file,
                e.crc32,
                m.seed,
                m.style,
                m.delta,
                m.r_delta,
                join_radii(&m.radii),
                m.level,
                m.extent_factor,
                m.width,
                m.height,
                m.version
            )
            .unwrap();
        }
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Manifest("empty manifest".into()))?;
        let (tag, rest) = header.split_once('\t').unwrap_or((header, ""));
        if tag != HEADER_TAG {
            return Err(Error::Manifest(format!("line 1: expected `{HEADER_TAG}`")));
        }
        let head = if rest.is_empty() {
            Vec::new()
        } else {
            fields(rest, 1)?
        };
        let version: u32 = parse(lookup(&head, "version", 1)?, "version", 1)?;
        if version != MANIFEST_VERSION {
            return Err(Error::Version {
                file: MANIFEST_NAME.into(),
                found: version,
                expected: MANIFEST_VERSION,
            });
        }
        let count: usize = parse(lookup(&head, "count", 1)?, "count", 1)?;
        let pipeline = match head.iter().find(|(k, _)| *k == "pipeline") {
            Some((_, json)) => Some(serde_json::from_str(json)?),
            None => None,
        };
        let mut entries = Vec::with_capacity(count);
        for (lineno, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let f = fields(line, lineno)?;
            let get = |k: &str| lookup(&f, k, lineno);
            let radii = get("radii")?
                .split(',')
                .filter(|s| !s.is_empty())
                .map(|s| parse(s, "radii", lineno))
                .collect::<Result<Vec<f64>>>()?;
            let crc = u32::from_str_radix(get("crc32")?, 16)
                .map_err(|_| Error::Manifest(format!("line {lineno}: bad crc32")))?;
            let file = get("file")?.to_string();
            if file.contains(['/', '\\']) || file.starts_with('.') {
                return Err(Error::Manifest(format!(
                    "line {lineno}: unsafe file name `{file}`"
                )));
            }
            entries.push(ManifestEntry {
                file,
                crc32: crc,
                meta: SampleMeta {
                    seed: parse(get("seed")?, "seed", lineno)?,
                    style: get("style")?.parse()?,
                    delta: parse(get("delta")?, "delta", lineno)?,
                    r_delta: parse(get("r_delta")?, "r_delta", lineno)?,
                    radii,
                    level: parse(get("level")?, "level", lineno)?,
                    extent_factor: parse(get("extent_factor")?, "extent_factor", lineno)?,
                    width: parse(get("width")?, "width", lineno)?,
                    height: parse(get("height")?, "height", lineno)?,
                    version: parse(get("version")?, "version", lineno)?,
                },
            });
        }
        if entries.len() != count {
            return Err(Error::Manifest(format!(
                "header announces {count} records, found {}",
                entries.len()
            )));
        }
        Ok(Self { pipeline, entries })
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_atomic(&dir.join(MANIFEST_NAME), self.render()?.as_bytes())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_NAME);
        let text = fs::read_to_string(&path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::Manifest(format!("no manifest at {}", path.display()))
            } else {
                e.into()
            }
        })?;
        Self::parse(&text)
    }
}
