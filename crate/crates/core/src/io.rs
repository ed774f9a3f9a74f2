//! The JSON design-file format.
//!
//! Files are written in one canonical layout: keys in a fixed order, points
//! within a block ascending, blocks and groups sorted, one block per line and
//! a compact `meta` object. Parsing accepts any valid JSON with the same keys
//! and canonicalizes it, so `serialize(parse(serialize(x)))` reproduces the
//! original bytes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::design::{GroupedDesign, IncidenceDesign};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
pub const GENERATOR_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignKind {
    Pbd,
    Gdd,
    Latin,
}

/// Provenance attached to every file: how it was built and what flat bound
/// the construction certifies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Meta {
    pub route: Option<String>,
    pub params: Map<String, Value>,
    pub flat_bound: Option<usize>,
    pub generator_version: String,
    pub seed: u64,
}

impl Default for Meta {
    fn default() -> Self {
        Meta { route: None, params: Map::new(), flat_bound: None, generator_version: GENERATOR_VERSION.into(), seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignFile {
    pub format_version: u32,
    pub kind: DesignKind,
    pub v: usize,
    pub blocks: Vec<Vec<usize>>,
    pub groups: Option<Vec<Vec<usize>>>,
    pub grid: Option<Vec<Vec<usize>>>,
    pub meta: Meta,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    format_version: u32,
    kind: DesignKind,
    v: usize,
    #[serde(default)]
    meta: Meta,
    groups: Option<Vec<Vec<usize>>>,
    blocks: Option<Vec<Vec<usize>>>,
    grid: Option<Vec<Vec<usize>>>,
}

fn sorted_sets(sets: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = sets
        .iter()
        .map(|s| {
            let mut s = s.clone();
            s.sort_unstable();
            s
        })
        .collect();
    out.sort();
    out
}

impl DesignFile {
    pub fn from_pbd(design: &IncidenceDesign, meta: Meta) -> Self {
        DesignFile {
            format_version: FORMAT_VERSION,
            kind: DesignKind::Pbd,
            v: design.v(),
            blocks: sorted_sets(design.blocks()),
            groups: None,
            grid: None,
            meta,
        }
    }

    pub fn from_gdd(design: &GroupedDesign, meta: Meta) -> Self {
        DesignFile {
            format_version: FORMAT_VERSION,
            kind: DesignKind::Gdd,
            v: design.v(),
            blocks: sorted_sets(design.blocks()),
            groups: Some(sorted_sets(design.groups())),
            grid: None,
            meta,
        }
    }

    pub fn from_grid(grid: Vec<Vec<usize>>, meta: Meta) -> Self {
        DesignFile {
            format_version: FORMAT_VERSION,
            kind: DesignKind::Latin,
            v: grid.len(),
            blocks: Vec::new(),
            groups: None,
            grid: Some(grid),
            meta,
        }
    }

    pub fn to_pbd(&self) -> Result<IncidenceDesign> {
        match self.kind {
            DesignKind::Pbd => IncidenceDesign::new(self.v, self.blocks.clone()),
            DesignKind::Gdd => Ok(self.to_gdd()?.to_incidence()),
            DesignKind::Latin => Err(Error::Format("a latin square file holds no blocks".into())),
        }
    }

    pub fn to_gdd(&self) -> Result<GroupedDesign> {
        match (&self.kind, &self.groups) {
            (DesignKind::Gdd, Some(groups)) => GroupedDesign::new(self.v, groups.clone(), self.blocks.clone()),
            (DesignKind::Pbd, _) => Ok(IncidenceDesign::new(self.v, self.blocks.clone())?.as_grouped()),
            _ => Err(Error::Format(format!("a {:?} file holds no groups", self.kind))),
        }
    }
}

fn write_sets(out: &mut String, key: &str, sets: &[Vec<usize>]) {
    write!(out, ",\n  \"{key}\": [").unwrap();
    for (i, s) in sets.iter().enumerate() {
        out.push_str(if i == 0 { "\n    [" } else { ",\n    [" });
        for (j, x) in s.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{x}").unwrap();
        }
        out.push(']');
    }
    out.push_str(if sets.is_empty() { "]" } else { "\n  ]" });
}

fn document(file: &DesignFile) -> String {
    let mut out = String::new();
    let kind = serde_json::to_string(&file.kind).expect("kind serializes");
    let meta = serde_json::to_string(&file.meta).expect("meta serializes");
    write!(
        out,
        "{{\n  \"format_version\": {},\n  \"kind\": {kind},\n  \"v\": {},\n  \"meta\": {meta}",
        file.format_version, file.v
    )
    .unwrap();
    if let Some(groups) = &file.groups {
        write_sets(&mut out, "groups", &sorted_sets(groups));
    }
    if file.kind == DesignKind::Latin {
        write_sets(&mut out, "grid", file.grid.as_deref().unwrap_or(&[]));
    } else {
        write_sets(&mut out, "blocks", &sorted_sets(&file.blocks));
    }
    out.push_str("\n}");
    out
}

/// Canonical text of one design file, newline-terminated.
pub fn serialize(file: &DesignFile) -> String {
    let mut s = document(file);
    s.push('\n');
    s
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse { line: e.line(), column: e.column(), message: e.to_string() }
}

fn check_range(sets: &[Vec<usize>], v: usize, what: &str) -> Result<()> {
    for (i, s) in sets.iter().enumerate() {
        if let Some(&x) = s.iter().find(|&&x| x >= v) {
            return Err(Error::Format(format!("{what} {i} contains point {x} outside [0,{v})")));
        }
    }
    Ok(())
}

fn validate(raw: RawFile) -> Result<DesignFile> {
    if raw.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            raw.format_version
        )));
    }
    let v = raw.v;
    match raw.kind {
        DesignKind::Pbd | DesignKind::Gdd => {
            if raw.grid.is_some() {
                return Err(Error::Format("only latin files carry a grid".into()));
            }
            let blocks = raw.blocks.ok_or_else(|| Error::Format("missing \"blocks\"".into()))?;
            check_range(&blocks, v, "block")?;
            let groups = match (raw.kind, raw.groups) {
                (DesignKind::Gdd, Some(g)) => {
                    check_range(&g, v, "group")?;
                    GroupedDesign::new(v, g.clone(), blocks.clone())?;
                    Some(sorted_sets(&g))
                }
                (DesignKind::Gdd, None) => return Err(Error::Format("gdd file is missing \"groups\"".into())),
                (_, Some(_)) => return Err(Error::Format("only gdd files carry groups".into())),
                (_, None) => {
                    IncidenceDesign::new(v, blocks.clone())?;
                    None
                }
            };
            Ok(DesignFile {
                format_version: raw.format_version,
                kind: raw.kind,
                v,
                blocks: sorted_sets(&blocks),
                groups,
                grid: None,
                meta: raw.meta,
            })
        }
        DesignKind::Latin => {
            if raw.groups.is_some() || raw.blocks.as_ref().is_some_and(|b| !b.is_empty()) {
                return Err(Error::Format("latin files carry only a grid".into()));
            }
            let grid = raw.grid.ok_or_else(|| Error::Format("latin file is missing \"grid\"".into()))?;
            if grid.len() != v || grid.iter().any(|row| row.len() != v) {
                return Err(Error::Format(format!("grid must be {v} x {v}")));
            }
            check_range(&grid, v, "row")?;
            Ok(DesignFile::from_grid(grid, raw.meta))
        }
    }
}

/// Parses and validates one design file. Syntax errors carry a line and
/// column; structural errors name the offending block or group.
pub fn parse(text: &str) -> Result<DesignFile> {
    validate(serde_json::from_str(text).map_err(parse_error)?)
}

/// A bundle is a JSON array of design files, each in canonical layout.
pub fn serialize_bundle(files: &[DesignFile]) -> String {
    let docs: Vec<String> = files.iter().map(document).collect();
    if docs.is_empty() {
        return "[]\n".into();
    }
    format!("[\n{}\n]\n", docs.join(",\n"))
}

pub fn parse_bundle(text: &str) -> Result<Vec<DesignFile>> {
    let raws: Vec<RawFile> = serde_json::from_str(text).map_err(parse_error)?;
    raws.into_iter().map(validate).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_projective_space;

    fn fano_file() -> DesignFile {
        let mut meta = Meta::default();
        meta.route = Some("geometry".into());
        meta.params.insert("q".into(), 2.into());
        meta.flat_bound = Some(7);
        DesignFile::from_pbd(&build_projective_space(2, 2).unwrap(), meta)
    }

    #[test]
    fn fano_round_trip_is_byte_identical() {
        let text = serialize(&fano_file());
        let back = parse(&text).unwrap();
        assert_eq!(back, fano_file());
        assert_eq!(serialize(&back), text);
        assert!(text.starts_with("{\n  \"format_version\": 1,\n  \"kind\": \"pbd\",\n  \"v\": 7,\n  \"meta\": {"));
        assert_eq!(text.lines().filter(|l| l.trim_start().starts_with('[')).count(), 7);
    }

    #[test]
    fn out_of_range_point_is_rejected() {
        let text = "{\"format_version\":1,\"kind\":\"pbd\",\"v\":3,\"meta\":{\"route\":null,\"flat_bound\":null,\"generator_version\":\"x\",\"seed\":0},\"blocks\":[[0,1,3]]}";
        match parse(text) {
            Err(Error::Format(msg)) => assert!(msg.contains("point 3"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn meta_may_be_omitted() {
        let f = parse(r#"{"format_version": 1, "kind": "pbd", "v": 3, "blocks": [[2,0,1]]}"#).unwrap();
        assert_eq!(f.meta, Meta::default());
        assert_eq!(f.blocks, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn gdd_without_groups_is_rejected() {
        let text = serialize(&fano_file()).replace("\"pbd\"", "\"gdd\"");
        assert!(matches!(parse(&text), Err(Error::Format(m)) if m.contains("groups")));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let text = "{\n  \"format_version\": 1,\n  \"kind\": pbd\n}";
        match parse(text) {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn noncanonical_input_is_normalized() {
        let text = "{\"format_version\":1,\"kind\":\"pbd\",\"v\":3,\"meta\":{\"route\":null,\"flat_bound\":null,\"generator_version\":\"x\",\"seed\":4},\"blocks\":[[2,0,1]]}";
        let file = parse(text).unwrap();
        assert_eq!(file.blocks, vec![vec![0, 1, 2]]);
        assert_eq!(parse(&serialize(&file)).unwrap(), file);
    }

    #[test]
    fn latin_grid_round_trip() {
        let file = DesignFile::from_grid(vec![vec![0, 2, 1], vec![2, 1, 0], vec![1, 0, 2]], Meta::default());
        let text = serialize(&file);
        assert!(!text.contains("blocks"));
        assert_eq!(parse(&text).unwrap(), file);
    }

    #[test]
    fn bundle_round_trip() {
        let files = vec![fano_file(), DesignFile::from_gdd(&crate::catalog::recipes::fano_with_group().unwrap(), Meta::default())];
        let text = serialize_bundle(&files);
        let back = parse_bundle(&text).unwrap();
        assert_eq!(back, files);
        assert_eq!(serialize_bundle(&back), text);
    }
}
