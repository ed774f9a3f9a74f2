//! Small fixed designs consumed by the recursive constructions: ingredient
//! GDDs, PBDs on at most 62 points and idempotent latin squares of orders 3
//! to 5.
//!
//! The catalog ships as a design-file bundle (`data/catalog.json`) that is
//! re-verified when loaded. [`Catalog::generate`] rebuilds it from the
//! recipes in [`recipes`] and the search in [`search`].

pub mod recipes;
pub mod search;
mod small;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde_json::Value;

use crate::design::{verify_gdd, verify_pbd, GroupedDesign, IncidenceDesign, TypeMultiset};
use crate::error::{Error, Result};
use crate::io::{parse_bundle, serialize_bundle, DesignFile, Meta};
use crate::latin::LatinSquare;

pub use search::{preflight, search_capped, search_design, NotFound, SearchSpec};

const EMBEDDED_BUNDLE: &str = include_str!("../../data/catalog.json");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GddTemplate {
    ty: TypeMultiset,
    k: Vec<usize>,
    design: GroupedDesign,
    provenance: String,
}

/// Relabels a GDD so groups come in order of decreasing size (ties by least
/// point) and occupy consecutive points.
fn canonical_gdd(design: &GroupedDesign) -> GroupedDesign {
    let mut groups = design.groups().to_vec();
    groups.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    let mut map = vec![0; design.v()];
    let mut next = 0;
    let mut new_groups = Vec::with_capacity(groups.len());
    for g in &groups {
        for &x in g {
            map[x] = next;
            next += 1;
        }
        new_groups.push((next - g.len()..next).collect());
    }
    let mut blocks: Vec<Vec<usize>> = design.blocks().iter().map(|b| b.iter().map(|&x| map[x]).collect()).collect();
    for b in blocks.iter_mut() {
        b.sort_unstable();
    }
    blocks.sort();
    GroupedDesign::new(design.v(), new_groups, blocks).expect("relabeling preserves validity")
}

impl GddTemplate {
    pub fn new(ty: TypeMultiset, mut k: Vec<usize>, design: GroupedDesign, provenance: String) -> Self {
        k.sort_unstable();
        k.dedup();
        GddTemplate { ty, k, design: canonical_gdd(&design), provenance }
    }

    pub fn ty(&self) -> &TypeMultiset {
        &self.ty
    }

    pub fn k(&self) -> &[usize] {
        &self.k
    }

    pub fn design(&self) -> &GroupedDesign {
        &self.design
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Checks the type and the GDD axioms with the declared block sizes.
    pub fn verify(&self) -> Result<()> {
        if self.design.type_multiset() != self.ty {
            return Err(Error::Verification(format!(
                "template declared {} but has type {}",
                self.ty,
                self.design.type_multiset()
            )));
        }
        verify_gdd(&self.design, &self.k).into_result().map(|_| ())
    }

    fn to_file(&self) -> DesignFile {
        let mut meta = Meta { route: Some("catalog".into()), ..Meta::default() };
        meta.params.insert("type".into(), self.ty.to_string().into());
        meta.params.insert("k".into(), self.k.clone().into());
        meta.params.insert("provenance".into(), self.provenance.clone().into());
        DesignFile::from_gdd(&self.design, meta)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallPbd {
    pub design: IncidenceDesign,
    pub provenance: String,
}

/// Types the catalog provides, with their declared block sizes.
pub fn supported_types() -> Vec<(TypeMultiset, Vec<usize>)> {
    let mix = |a: usize, i: usize, b: usize, j: usize| {
        TypeMultiset::new([(a, i), (b, j)].into_iter().filter(|e| e.1 > 0)).expect("valid type")
    };
    let mut out = Vec::new();
    for i in 0..=5 {
        out.push((mix(1, i, 3, 5 - i), vec![3, 4, 5]));
        out.push((mix(4, i, 5, 5 - i), vec![3, 4, 5]));
    }
    for i in [4, 1, 0] {
        out.push((mix(1, i, 3, 4 - i), vec![3, 4]));
    }
    out.push((mix(3, 4, 4, 1), vec![3, 4, 5]));
    out.push((mix(3, 3, 4, 2), vec![3, 4, 5]));
    out.push((mix(3, 3, 4, 1), vec![3, 4]));
    out
}

/// Builds one supported template from its recipe, or by search where no
/// recipe is known.
pub fn build_template(ty: &TypeMultiset, k: &[usize]) -> Result<GddTemplate> {
    let name = ty.to_string();
    let (design, provenance) = match name.as_str() {
        "1^5" | "1^4" => (recipes::single_block(ty.total_points()), "single block"),
        "3^1 1^4" => (recipes::fano_with_group()?, "PG_2(2) with one line as group"),
        "3^2 1^3" => (recipes::affine_plane_3_two_groups()?, "AG_2(3) with two parallel lines as groups"),
        "4^5" => (recipes::punctured_plane_4()?, "PG_2(4) minus a point"),
        "5^5" | "5^4 4^1" | "5^3 4^2" | "5^2 4^3" | "5^1 4^4" => {
            let i = ty.entries().iter().find(|e| e.0 == 4).map_or(0, |e| e.1);
            (recipes::conic_truncated_td5(i)?, "TD(5,5) minus conic points")
        }
        "4^1 3^4" => (recipes::conic_truncated_td4(4)?, "TD(5,4) minus a cap of 4 points"),
        "4^2 3^3" => (recipes::conic_truncated_td4(3)?, "TD(5,4) minus 3 conic points"),
        "4^1 3^3" => (recipes::td4_minus_block_points()?, "TD(4,4) minus 3 points of a block"),
        "3^3 1^1" => (recipes::td3_plus_point()?, "TD(3,3) plus a point on a parallel class"),
        "3^4" => (recipes::transversal_design(4, 3)?, "TD(4,3)"),
        _ => {
            let found = search_capped(ty, k, 20_000, 4)
                .map_err(|e| Error::NotInCatalog(format!("{ty}: {e}")))?;
            return Ok(found);
        }
    };
    let template = GddTemplate::new(ty.clone(), k.to_vec(), design, provenance.into());
    template.verify()?;
    Ok(template)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Catalog {
    templates: BTreeMap<TypeMultiset, GddTemplate>,
    small: BTreeMap<usize, SmallPbd>,
}

impl Catalog {
    /// Rebuilds the whole catalog from recipes and search.
    pub fn generate() -> Result<Catalog> {
        let mut cat = Catalog::default();
        for (ty, k) in supported_types() {
            let t = build_template(&ty, &k)?;
            cat.templates.insert(ty, t);
        }
        for v in 1..=small::SMALL_MAX {
            if [2, 6, 8].contains(&v) {
                continue;
            }
            let entry = small::build(&cat, v)?;
            verify_pbd(&entry.design, &[3, 4, 5]).into_result()?;
            cat.small.insert(v, entry);
        }
        Ok(cat)
    }

    /// The bundled catalog, parsed and verified on first use.
    pub fn embedded() -> Result<&'static Catalog> {
        static CATALOG: OnceLock<Result<Catalog>> = OnceLock::new();
        CATALOG.get_or_init(|| Catalog::from_bundle(EMBEDDED_BUNDLE)).as_ref().map_err(Clone::clone)
    }

    pub fn embedded_bundle() -> &'static str {
        EMBEDDED_BUNDLE
    }

    /// Parses a bundle and verifies every entry.
    pub fn from_bundle(text: &str) -> Result<Catalog> {
        let mut cat = Catalog::default();
        for file in parse_bundle(text)? {
            let param = |key: &str| file.meta.params.get(key).cloned().unwrap_or(Value::Null);
            let provenance = param("provenance").as_str().unwrap_or_default().to_string();
            if file.groups.is_some() {
                let ty: TypeMultiset = param("type")
                    .as_str()
                    .ok_or_else(|| Error::Format("template without a type".into()))?
                    .parse()?;
                let k: Vec<usize> = serde_json::from_value(param("k"))
                    .map_err(|e| Error::Format(format!("template {ty}: bad block sizes: {e}")))?;
                let template = GddTemplate::new(ty.clone(), k, file.to_gdd()?, provenance);
                template.verify()?;
                cat.templates.insert(ty, template);
            } else {
                let design = file.to_pbd()?;
                verify_pbd(&design, &[3, 4, 5]).into_result()?;
                cat.small.insert(design.v(), SmallPbd { design, provenance });
            }
        }
        Ok(cat)
    }

    pub fn load(path: &std::path::Path) -> Result<Catalog> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        Catalog::from_bundle(&text)
    }

    pub fn to_bundle(&self) -> String {
        let mut files: Vec<DesignFile> = self.templates.values().map(GddTemplate::to_file).collect();
        for (v, entry) in &self.small {
            let mut meta = Meta { route: Some("catalog".into()), flat_bound: Some(*v), ..Meta::default() };
            meta.params.insert("provenance".into(), entry.provenance.clone().into());
            files.push(DesignFile::from_pbd(&entry.design, meta));
        }
        serialize_bundle(&files)
    }

    pub fn templates(&self) -> impl Iterator<Item = &GddTemplate> {
        self.templates.values()
    }

    pub fn small_pbds(&self) -> impl Iterator<Item = (&usize, &SmallPbd)> {
        self.small.iter()
    }

    /// The template of type `ty` whose declared block sizes lie in `k`.
    pub fn get_ingredient(&self, ty: &TypeMultiset, k: &[usize]) -> Result<&GddTemplate> {
        match self.templates.get(ty) {
            Some(t) if t.k.iter().all(|s| k.contains(s)) => Ok(t),
            Some(t) => Err(Error::NotInCatalog(format!("{ty} is only available with K = {:?}", t.k))),
            None => Err(Error::NotInCatalog(ty.to_string())),
        }
    }

    pub fn small_pbd(&self, v: usize) -> Result<&SmallPbd> {
        if [2, 6, 8].contains(&v) || v == 0 {
            return Err(Error::NoDesignExists(v));
        }
        self.small
            .get(&v)
            .ok_or_else(|| Error::NotInCatalog(format!("no small PBD on {v} points")))
    }
}

pub fn get_ingredient(ty: &TypeMultiset, k: &[usize]) -> Result<GddTemplate> {
    Catalog::embedded()?.get_ingredient(ty, k).cloned()
}

pub fn small_pbd(v: usize) -> Result<IncidenceDesign> {
    if v > small::SMALL_MAX {
        return Err(Error::OutOfRange(format!("small PBDs cover v <= {}, got {v}", small::SMALL_MAX)));
    }
    Ok(Catalog::embedded()?.small_pbd(v)?.design.clone())
}

/// An idempotent latin square of order 3, 4 or 5.
pub fn idempotent_square(n: usize) -> Result<LatinSquare> {
    let grid: Vec<Vec<usize>> = match n {
        3 => (0..3).map(|i| (0..3).map(|j| (2 * (i + j)) % 3).collect()).collect(),
        5 => (0..5).map(|i| (0..5).map(|j| (3 * (i + j)) % 5).collect()).collect(),
        4 => {
            // L(i,j) = w*i + w^2*j over GF(4) with w = 2.
            let f = crate::field::FieldTable::new(4)?;
            (0..4u8).map(|i| (0..4u8).map(|j| f.add(f.mul(2, i), f.mul(3, j)) as usize).collect()).collect()
        }
        2 => return Err(Error::NoIdempotentSquare(2)),
        _ => return Err(Error::NotInCatalog(format!("idempotent square of order {n}"))),
    };
    LatinSquare::new(grid)
}
