//! Lossless text serialization of an archive.
//!
//! ```text
//! moqd-archive 1
//! cells <k>
//! feature_dim <d>
//! objectives <m>            (0 when the archive is empty)
//! capacity <n | unbounded>
//! solutions <count>
//! centroid <d values>       (k lines, in cell order)
//! solution <cell>\t<origin>\t<fitness>\t<feature>\t<pref | ->\t<layout id>\t<genotype>
//! end
//! ```
//!
//! Number lists are comma separated. Floats use the shortest representation
//! that parses back to the same bits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::archive::{MoArchive, UNBOUNDED};
use crate::error::{Error, Result};
use crate::tessellation::Tessellation;
use crate::types::{Feature, FitnessVector, Genotype, Preference, Solution};

const MAGIC: &str = "moqd-archive 1";

fn join(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v:?}");
    }
    s
}

pub fn to_string(archive: &MoArchive) -> String {
    let mut out = String::new();
    let t = archive.tessellation();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "cells {}", archive.num_cells());
    let _ = writeln!(out, "feature_dim {}", t.dim());
    let _ = writeln!(out, "objectives {}", archive.num_objectives().unwrap_or(0));
    if archive.capacity() == UNBOUNDED {
        let _ = writeln!(out, "capacity unbounded");
    } else {
        let _ = writeln!(out, "capacity {}", archive.capacity());
    }
    let _ = writeln!(out, "solutions {}", archive.len());
    for c in t.centroids() {
        let values: Vec<String> = c.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(out, "centroid {}", values.join(" "));
    }
    for (cell, front) in archive.fronts().iter().enumerate() {
        for s in front.members() {
            let pref = s.pref.as_ref().map_or_else(|| "-".to_string(), |p| join(p));
            let _ = writeln!(
                out,
                "solution {cell}\t{}\t{}\t{}\t{pref}\t{}\t{}",
                s.origin,
                join(&s.fitness),
                join(&s.feature),
                s.genotype.layout_id(),
                join(s.genotype.params())
            );
        }
    }
    out.push_str("end\n");
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok((i + 1, l))
            }
            None => Err(Error::Parse {
                line: self.last + 1,
                msg: "unexpected end of file".into(),
            }),
        }
    }

    fn keyed(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (n, line) = self.next_line()?;
        match line.strip_prefix(key).and_then(|r| r.strip_prefix(' ')) {
            Some(rest) => Ok((n, rest.trim())),
            None => Err(parse_err(n, format!("expected `{key}`"))),
        }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_usize(line: usize, s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| parse_err(line, format!("`{s}` is not a non-negative integer")))
}

fn parse_list(line: usize, s: &str, what: &str) -> Result<Vec<f64>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| parse_err(line, format!("bad number `{v}` in {what}")))
        })
        .collect()
}

pub fn from_str(text: &str) -> Result<MoArchive> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let (n, magic) = lines.next_line()?;
    if magic.trim() != MAGIC {
        return Err(parse_err(n, "not an archive snapshot"));
    }
    let (n, v) = lines.keyed("cells")?;
    let k = parse_usize(n, v)?;
    let (n, v) = lines.keyed("feature_dim")?;
    let d = parse_usize(n, v)?;
    let (n, v) = lines.keyed("objectives")?;
    let m = parse_usize(n, v)?;
    let (n, v) = lines.keyed("capacity")?;
    let capacity = if v == "unbounded" { UNBOUNDED } else { parse_usize(n, v)? };
    let (n, v) = lines.keyed("solutions")?;
    let count = parse_usize(n, v)?;

    let mut centroids = Vec::with_capacity(k);
    for _ in 0..k {
        let (n, v) = lines.keyed("centroid")?;
        let c: Vec<f64> = v
            .split_whitespace()
            .map(|x| x.parse().map_err(|_| parse_err(n, format!("bad centroid value `{x}`"))))
            .collect::<Result<_>>()?;
        if c.len() != d {
            return Err(parse_err(n, format!("centroid has {} values, expected {d}", c.len())));
        }
        centroids.push(c);
    }
    let tessellation =
        Tessellation::from_centroids(centroids).map_err(|e| Error::Validation(e.to_string()))?;

    let mut cells = Vec::with_capacity(count);
    for _ in 0..count {
        let (n, v) = lines.keyed("solution")?;
        let fields: Vec<&str> = v.split('\t').collect();
        if fields.len() != 7 {
            return Err(parse_err(n, format!("solution record has {} fields, expected 7", fields.len())));
        }
        let cell = parse_usize(n, fields[0])?;
        let origin = fields[1].parse().map_err(|e: Error| parse_err(n, e.to_string()))?;
        let fitness = parse_list(n, fields[2], "fitness")?;
        if fitness.len() != m {
            return Err(parse_err(n, format!("fitness has {} values, expected {m}", fitness.len())));
        }
        let feature = parse_list(n, fields[3], "feature")?;
        let pref = match fields[4] {
            "-" => None,
            p => Some(
                Preference::new(parse_list(n, p, "preference")?)
                    .map_err(|e| parse_err(n, e.to_string()))?,
            ),
        };
        let genotype = Genotype::from_layout_id(fields[5], parse_list(n, fields[6], "genotype")?)
            .map_err(|e| parse_err(n, e.to_string()))?;
        let solution = Solution {
            genotype,
            fitness: FitnessVector::new(fitness).map_err(|e| parse_err(n, e.to_string()))?,
            feature: Feature::new(feature).map_err(|e| parse_err(n, e.to_string()))?,
            origin,
            pref,
        };
        cells.push((cell, solution));
    }
    let (n, end) = lines.next_line()?;
    if end.trim() != "end" {
        return Err(parse_err(n, "expected `end` after the declared solutions"));
    }
    MoArchive::from_parts(tessellation, capacity, cells)
}

pub fn save(archive: &MoArchive, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_string(archive))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<MoArchive> {
    from_str(&fs::read_to_string(path)?)
}
