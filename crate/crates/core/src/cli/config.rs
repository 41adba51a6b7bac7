//! Run configuration: TOML file plus command-line overrides.

use crate::experiments::ColexSimilarity;
use crate::stats::Alternative;
use crate::store::{read_store_header, Condition};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorePaths {
    pub contextual: Option<PathBuf>,
    pub decontextual: Option<PathBuf>,
    pub comparison: Option<PathBuf>,
    pub colors: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourcePaths {
    pub asjp: Option<PathBuf>,
    pub language_map: Option<PathBuf>,
    pub colex_edges: Option<PathBuf>,
    pub pair_universe: Option<PathBuf>,
    pub word_forms: Option<PathBuf>,
    pub subfamilies: Option<PathBuf>,
    pub offset_pairs: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Analysis {
    /// Layer number as stored; the store's last layer when absent.
    pub layer: Option<u32>,
    /// Signed so that a negative value is reported as a violation.
    pub k: i64,
    pub apply_global_mean: bool,
    pub perms: usize,
    pub n_boot: usize,
    pub colex_threshold: u32,
    pub colex_similarity: ColexSimilarity,
    pub k_values: Vec<i64>,
    pub color_components: usize,
    pub comparison_alternative: Alternative,
    pub surface_scripts: Vec<String>,
}

impl Default for Analysis {
    fn default() -> Self {
        Self {
            layer: None,
            k: 3,
            apply_global_mean: true,
            perms: 999,
            n_boot: 1000,
            colex_threshold: 3,
            colex_similarity: ColexSimilarity::Centroid,
            k_values: vec![0, 1, 3, 5, 10],
            color_components: 3,
            comparison_alternative: Alternative::TwoSided,
            surface_scripts: vec!["Latn".into()],
        }
    }
}

/// Shape of the fixture set written by `lexgeo synth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSection {
    pub n_concepts: usize,
    pub n_languages: usize,
    pub dim: usize,
    pub n_layers: usize,
    pub concept_scale: f64,
    pub offset_scale: f64,
    pub noise_scale: f64,
    pub layer_offset_decay: Option<f64>,
    pub n_colex_pairs: usize,
    pub colex_correlation: f64,
    pub missing_fraction: f64,
}

impl Default for SynthSection {
    fn default() -> Self {
        Self {
            n_concepts: 40,
            n_languages: 30,
            dim: 64,
            n_layers: 3,
            concept_scale: 1.0,
            offset_scale: 1.0,
            noise_scale: 0.1,
            layer_offset_decay: Some(0.7),
            n_colex_pairs: 10,
            colex_correlation: 0.9,
            missing_fraction: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub stores: StorePaths,
    #[serde(default)]
    pub resources: ResourcePaths,
    #[serde(default)]
    pub analysis: Analysis,
    #[serde(default)]
    pub synth: SynthSection,
}

/// A config field that fails a constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: String,
    pub constraint: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.constraint)
    }
}

fn violation(field: &str, constraint: impl Into<String>) -> Violation {
    Violation {
        field: field.to_string(),
        constraint: constraint.into(),
    }
}

impl RunConfig {
    /// Parses a TOML document; relative paths resolve against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, toml::de::Error> {
        let mut cfg: RunConfig = toml::from_str(text)?;
        cfg.resolve(base);
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        let s = &mut self.stores;
        for p in [&mut s.contextual, &mut s.decontextual, &mut s.comparison, &mut s.colors] {
            fix(p);
        }
        let r = &mut self.resources;
        for p in [
            &mut r.asjp,
            &mut r.language_map,
            &mut r.colex_edges,
            &mut r.pair_universe,
            &mut r.word_forms,
            &mut r.subfamilies,
            &mut r.offset_pairs,
        ] {
            fix(p);
        }
        fix(&mut self.out);
    }

    /// Named optional paths, in a fixed order.
    pub fn paths(&self) -> Vec<(&'static str, Option<&PathBuf>)> {
        let s = &self.stores;
        let r = &self.resources;
        vec![
            ("stores.contextual", s.contextual.as_ref()),
            ("stores.decontextual", s.decontextual.as_ref()),
            ("stores.comparison", s.comparison.as_ref()),
            ("stores.colors", s.colors.as_ref()),
            ("resources.asjp", r.asjp.as_ref()),
            ("resources.language_map", r.language_map.as_ref()),
            ("resources.colex_edges", r.colex_edges.as_ref()),
            ("resources.pair_universe", r.pair_universe.as_ref()),
            ("resources.word_forms", r.word_forms.as_ref()),
            ("resources.subfamilies", r.subfamilies.as_ref()),
            ("resources.offset_pairs", r.offset_pairs.as_ref()),
        ]
    }

    pub fn path(&self, field: &str) -> Option<&PathBuf> {
        self.paths().into_iter().find(|(f, _)| *f == field).and_then(|(_, p)| p)
    }
}

/// Fields a subcommand cannot run without.
pub fn required_fields(subcommand: &str) -> &'static [&'static str] {
    match subcommand {
        "surface" => &["stores.contextual", "resources.word_forms"],
        "compare" => &["stores.contextual", "stores.comparison"],
        "carrier" => &["stores.contextual", "stores.decontextual"],
        "phylo" => &["stores.contextual", "resources.asjp"],
        "colex" => &["stores.contextual", "resources.colex_edges"],
        "colors" => &["stores.colors"],
        "all" => &["stores.contextual", "resources.asjp", "resources.colex_edges"],
        "synth" => &[],
        _ => &["stores.contextual"],
    }
}

/// Everything wrong with a config, independent of the subcommand.
/// Empty when every present field is usable.
pub fn validate_config(config: &RunConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    if config.seed.is_none() {
        out.push(violation("seed", "required"));
    }
    let a = &config.analysis;
    if a.k < 0 {
        out.push(violation("analysis.k", format!("must be ≥ 0, got {}", a.k)));
    }
    if let Some(k) = a.k_values.iter().find(|&&k| k < 0) {
        out.push(violation("analysis.k_values", format!("entries must be ≥ 0, got {k}")));
    }
    if a.k_values.is_empty() {
        out.push(violation("analysis.k_values", "must not be empty"));
    }
    if a.perms == 0 {
        out.push(violation("analysis.perms", "must be ≥ 1"));
    }
    if a.n_boot < 100 {
        out.push(violation("analysis.n_boot", format!("must be ≥ 100, got {}", a.n_boot)));
    }
    if !(2..=3).contains(&a.color_components) {
        out.push(violation(
            "analysis.color_components",
            format!("must be 2 or 3, got {}", a.color_components),
        ));
    }
    for (field, path) in config.paths() {
        if let Some(p) = path {
            if !p.is_file() {
                out.push(violation(field, format!("file not found: {}", p.display())));
            }
        }
    }
    let expect = [
        ("stores.contextual", Some(Condition::Contextual)),
        ("stores.decontextual", Some(Condition::Decontextual)),
        ("stores.comparison", None),
        ("stores.colors", None),
    ];
    for (field, want) in expect {
        let Some(p) = config.path(field).filter(|p| p.is_file()) else { continue };
        match read_store_header(p) {
            Ok(h) => {
                if let Some(want) = want {
                    if h.condition != want {
                        out.push(violation(
                            field,
                            format!("condition mismatch: store is {}, expected {want}", h.condition),
                        ));
                    }
                }
                if let Some(layer) = a.layer {
                    if field != "stores.colors" && !h.layers.contains(&layer) {
                        out.push(violation(
                            "analysis.layer",
                            format!("layer {layer} not in {field} (layers {:?})", h.layers),
                        ));
                    }
                }
            }
            Err(e) => out.push(violation(field, format!("unreadable store: {e}"))),
        }
    }
    out
}

/// [`validate_config`] plus the inputs `subcommand` requires.
pub fn validate_for(config: &RunConfig, subcommand: &str) -> Vec<Violation> {
    let mut out: Vec<Violation> = required_fields(subcommand)
        .iter()
        .filter(|f| config.path(f).is_none())
        .map(|f| violation(f, format!("required by `{subcommand}`")))
        .collect();
    out.extend(validate_config(config));
    out
}
