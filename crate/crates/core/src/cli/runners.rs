//! One function per subcommand; each returns a report and a summary paragraph.

use super::config::{required_fields, RunConfig};
use super::{CliError, Command};
use crate::experiments::*;
use crate::geometry::CorrectionConfig;
use crate::store::{
    load_asjp_matrix, load_colex_edges, load_gloss_pairs, load_language_map, load_store,
    load_subfamilies, load_word_forms, EmbeddingStore, LanguageMapping, StoreError,
};
use crate::synth::{write_fixture_set, ColexPlant, PlantSpec};
use serde::Serialize;
use serde_json::{json, Value};
use std::cell::OnceCell;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

const ORDER: [Command; 13] = [
    Command::Convergence,
    Command::Surface,
    Command::Categories,
    Command::Compare,
    Command::Isotropy,
    Command::Carrier,
    Command::Layers,
    Command::Phylo,
    Command::Colex,
    Command::Storeratio,
    Command::Colors,
    Command::Offsets,
    Command::Conceptmap,
];

struct Outcome {
    report: ExperimentReport<Value>,
    summary: String,
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    seed: u64,
    correction: CorrectionConfig,
    stores: [OnceCell<EmbeddingStore>; 4],
}

const STORE_FIELDS: [&str; 4] = [
    "stores.contextual",
    "stores.decontextual",
    "stores.comparison",
    "stores.colors",
];

fn io(e: StoreError) -> CliError {
    match e {
        StoreError::Io { .. } => CliError::Io(e.to_string()),
        other => CliError::Io(format!("cannot load input: {other}")),
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a RunConfig) -> Self {
        Self {
            cfg,
            seed: cfg.seed.expect("validated"),
            correction: CorrectionConfig {
                k: cfg.analysis.k as usize,
                apply_global_mean: cfg.analysis.apply_global_mean,
            },
            stores: Default::default(),
        }
    }

    fn path(&self, field: &str) -> Result<&PathBuf, CliError> {
        self.cfg.path(field).ok_or_else(|| {
            CliError::Invalid(vec![super::Violation {
                field: field.into(),
                constraint: "required".into(),
            }])
        })
    }

    fn store(&self, field: &str) -> Result<&EmbeddingStore, CliError> {
        let i = STORE_FIELDS.iter().position(|f| *f == field).expect("known store field");
        if let Some(s) = self.stores[i].get() {
            return Ok(s);
        }
        let s = load_store(self.path(field)?).map_err(io)?;
        Ok(self.stores[i].get_or_init(|| s))
    }

    /// Position of the configured layer, or the last layer.
    fn layer(&self, store: &EmbeddingStore, strict: bool) -> Result<usize, CliError> {
        match self.cfg.analysis.layer {
            Some(v) => match store.layer_position(v) {
                Some(p) => Ok(p),
                None if !strict => Ok(store.n_layers() - 1),
                None => Err(CliError::Invalid(vec![super::Violation {
                    field: "analysis.layer".into(),
                    constraint: format!("layer {v} not in store (layers {:?})", store.layers()),
                }])),
            },
            None => Ok(store.n_layers() - 1),
        }
    }

    /// Erases the report and records input paths.
    fn finish<R: Serialize>(
        &self,
        report: ExperimentReport<R>,
        stores: &[(&str, &str)],
        resources: &[&str],
        summary: String,
    ) -> Outcome {
        let mut report = report.erase();
        // deterministic experiments echo the run seed too
        if let Value::Object(config) = &mut report.config {
            config.entry("seed").or_insert(Value::from(self.seed));
        }
        for (role, field) in stores {
            if let Some(p) = self.cfg.path(field) {
                report.set_store_path(role, &path_str(p));
            }
        }
        for field in resources {
            let name = field.trim_start_matches("resources.");
            match self.cfg.path(field) {
                Some(p) => report.add_resource(name, &path_str(p)),
                None => report.add_resource(name, "builtin"),
            }
        }
        Outcome { report, summary }
    }
}

fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.3}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "+inf".into()
    } else {
        "-inf".into()
    }
}

fn signed(v: f64) -> String {
    if v.is_finite() { format!("{v:+.3}") } else { fmt(v) }
}

fn fmt_p(p: f64) -> String {
    if p < 1e-3 { format!("{p:.2e}") } else { format!("{p:.4}") }
}

fn opt(v: Option<f64>) -> String {
    v.map_or("n/a".into(), fmt)
}

fn convergence(ctx: &Ctx) -> Result<Outcome, CliError> {
    let store = ctx.store("stores.contextual")?;
    let rep = exp_convergence_ranking(store, ctx.layer(store, true)?, &ctx.correction)?;
    let r = &rep.results;
    let summary = format!(
        "convergence: {} concepts ranked; mean {} (sd {}), range {} to {}; highest {}, lowest {}; {} excluded.",
        r.ranking.len(),
        fmt(r.mean),
        fmt(r.sd),
        fmt(r.min),
        fmt(r.max),
        r.top.first().map_or("-", String::as_str),
        r.bottom.first().map_or("-", String::as_str),
        r.excluded.len()
    );
    Ok(ctx.finish(rep, &[("store", "stores.contextual")], &[], summary))
}

fn surface(ctx: &Ctx) -> Result<Outcome, CliError> {
    let store = ctx.store("stores.contextual")?;
    let forms = load_word_forms(ctx.path("resources.word_forms")?).map_err(io)?;
    let cfg = SurfaceSimilarityConfig {
        scripts: ctx.cfg.analysis.surface_scripts.iter().cloned().collect(),
        ..Default::default()
    };
    let rep = exp_surface_regression(store, ctx.layer(store, true)?, &ctx.correction, &forms, &cfg)?;
    let r = &rep.results;
    let summary = format!(
        "surface: over {} concepts, orthographic similarity explains R² = {} and phonetic similarity R² = {} of convergence.",
        r.n_concepts,
        fmt(r.orthographic.r2),
        fmt(r.phonetic.r2)
    );
    Ok(ctx.finish(rep, &[("store", "stores.contextual")], &["resources.word_forms"], summary))
}

fn categories(ctx: &Ctx) -> Result<Outcome, CliError> {
    let store = ctx.store("stores.contextual")?;
    let rep = exp_category_summary(store, ctx.layer(store, true)?, &ctx.correction)?;
    let groups: Vec<String> = rep
        .results
        .categories
        .iter()
        .map(|g| format!("{} {}±{} (n={})", g.category, fmt(g.mean), fmt(g.sd), g.n))
        .collect();
    let summary = format!("categories: {}.", groups.join("; "));
    Ok(ctx.finish(rep, &[("store", "stores.contextual")], &[], summary))
}

fn compare(ctx: &Ctx) -> Result<Outcome, CliError> {
    let a = ctx.store("stores.contextual")?;
    let b = ctx.store("stores.comparison")?;
    let rep = exp_group_comparison(
        a,
        b,
        ctx.layer(a, true)?,
        &ctx.correction,
        ctx.cfg.analysis.comparison_alternative,
    )?;
    let r = &rep.results;
    let summary = format!(
        "compare: mean convergence {} (n={}) vs {} (n={}); Mann-Whitney U = {}, p = {} ({}); Cohen's d = {}.",
        fmt(r.mean_a),
        r.n_a,
        fmt(r.mean_b),
        r.n_b,
        r.mann_whitney.statistic,
        fmt_p(r.mann_whitney.p_value),
        r.mann_whitney.alternative,
        fmt(r.cohens_d)
    );
    Ok(ctx.finish(
        rep,
        &[("store_a", "stores.contextual"), ("store_b", "stores.comparison")],
        &[],
        summary,
    ))
}

fn isotropy(ctx: &Ctx) -> Result<Outcome, CliError> {
    let store = ctx.store("stores.contextual")?;
    let ks: Vec<usize> = ctx.cfg.analysis.k_values.iter().map(|&k| k as usize).collect();
    let rep = exp_isotropy_validation(store, ctx.layer(store, true)?, &ks)?;
    let r = &rep.results;
    let summary = format!(
        "isotropy: against the k={} ranking, raw ρ = {} and the minimum over the k sweep is {}.",
        r.reference_k,
        opt(r.raw_vs_corrected),
        opt(r.min_rho)
    );
    Ok(ctx.finish(rep, &[("store", "stores.contextual")], &[], summary))
}

fn carrier(ctx: &Ctx) -> Result<Outcome, CliError> {
    let c = ctx.store("stores.contextual")?;
    let d = ctx.store("stores.decontextual")?;
    let rep = exp_carrier_robustness(c, d, ctx.layer(c, true)?, &ctx.correction)?;
    let r = &rep.results;
    let t = match &r.paired_t {
        Some(t) => format!("paired t = {}, p = {}", fmt(t.statistic), fmt_p(t.p_value)),
        None => "scores exactly equal".into(),
    };
    let summary = format!(
        "carrier: over {} concepts, contextual vs decontextual Spearman ρ = {} (p = {}); mean absolute difference {}; {t}.",
        r.n_concepts,
        fmt(r.spearman_rho),
        fmt_p(r.spearman_p),
        fmt(r.mean_abs_diff)
    );
    Ok(ctx.finish(
        rep,
        &[("contextual", "stores.contextual"), ("decontextual", "stores.decontextual")],
        &[],
        summary,
    ))
}

fn layers(ctx: &Ctx) -> Result<Outcome, CliError> {
    let store = ctx.store("stores.contextual")?;
    let rep = exp_layerwise(store, &ctx.correction)?;
    let r = &rep.results;
    let first = r.layers.first().expect("at least 2 layers");
    let last = r.layers.last().expect("at least 2 layers");
    let summary = format!(
        "layers: mean convergence goes from {} at layer {} to {} at layer {}; the centered ratio changes most at layer {} ({}).",
        fmt(first.mean_convergence),
        first.layer,
        fmt(last.mean_convergence),
        last.layer,
        r.transition_layer,
        signed(r.transition_increase.0)
    );
    Ok(ctx.finish(rep, &[("store", "stores.contextual")], &[], summary))
}

fn phylo(ctx: &Ctx) -> Result<Outcome, CliError> {
    let store = ctx.store("stores.contextual")?;
    let asjp = load_asjp_matrix(ctx.path("resources.asjp")?).map_err(io)?;
    let mapping = match ctx.cfg.path("resources.language_map") {
        Some(p) => load_language_map(p).map_err(io)?,
        None => LanguageMapping::default(),
    };
    let subfamilies = match ctx.cfg.path("resources.subfamilies") {
        Some(p) => load_subfamilies(p).map_err(io)?,
        None => BTreeMap::new(),
    };
    let rep = exp_phylogenetic(
        store,
        ctx.layer(store, true)?,
        &ctx.correction,
        &asjp,
        &mapping,
        &subfamilies,
        ctx.cfg.analysis.perms,
        ctx.seed,
    )?;
    let m = &rep.results.mantel;
    let summary = format!(
        "phylo: Mantel ρ = {} (p = {}, {} permutations, seed {}) between embedding and reference distances over {} languages.",
        fmt(m.statistic),
        fmt_p(m.p_value),
        m.n_resamples.unwrap_or(0),
        ctx.seed,
        rep.results.n_languages
    );
    let mut resources = vec!["resources.asjp"];
    for f in ["resources.language_map", "resources.subfamilies"] {
        if ctx.cfg.path(f).is_some() {
            resources.push(f);
        }
    }
    Ok(ctx.finish(rep, &[("store", "stores.contextual")], &resources, summary))
}

fn colex(ctx: &Ctx) -> Result<Outcome, CliError> {
    let store = ctx.store("stores.contextual")?;
    let edges = load_colex_edges(ctx.path("resources.colex_edges")?).map_err(io)?;
    let universe = match ctx.cfg.path("resources.pair_universe") {
        Some(p) => load_gloss_pairs(p).map_err(io)?,
        None => {
            let g: Vec<&str> = store.concepts().iter().map(|c| c.gloss.as_str()).collect();
            (0..g.len())
                .flat_map(|i| ((i + 1)..g.len()).map(move |j| (i, j)))
                .map(|(i, j)| (g[i].to_string(), g[j].to_string()))
                .collect()
        }
    };
    let a = &ctx.cfg.analysis;
    let rep = exp_colexification(
        store,
        ctx.layer(store, true)?,
        &ctx.correction,
        &edges,
        &universe,
        a.colex_threshold,
        a.colex_similarity,
    )?;
    let r = &rep.results;
    let rho = r
        .spearman
        .as_ref()
        .map_or("undefined".into(), |s| format!("{} (p = {})", fmt(s.rho), fmt_p(s.p_value)));
    let mw = r.mann_whitney.as_ref().map_or("undefined".into(), |t| {
        format!("U = {}, one-sided p = {}", t.statistic, fmt_p(t.p_value))
    });
    let summary = format!(
        "colex: over {} pairs, Spearman ρ between family count and similarity is {rho}; {} pairs colexified in ≥ {} families vs {} others: {mw}, d = {}.",
        r.n_pairs,
        r.n_colexified,
        a.colex_threshold,
        r.n_other,
        opt(r.cohens_d)
    );
    Ok(ctx.finish(
        rep,
        &[("store", "stores.contextual")],
        &["resources.colex_edges", "resources.pair_universe"],
        summary,
    ))
}

fn storeratio(ctx: &Ctx) -> Result<Outcome, CliError> {
    let store = ctx.store("stores.contextual")?;
    let rep = exp_conceptual_store(
        store,
        ctx.layer(store, true)?,
        &ctx.correction,
        ctx.cfg.analysis.n_boot,
        ctx.seed,
    )?;
    let r = &rep.results;
    let ci = |c: &Option<crate::stats::BootstrapCI>| {
        c.as_ref()
            .map_or(String::new(), |c| format!(" [{}, {}]", fmt(c.lower), fmt(c.upper)))
    };
    let summary = format!(
        "storeratio: between/within ratio {}{} after correction, {}{} after per-language centering; improvement factor {} ({} bootstrap resamples, seed {}).",
        fmt(r.raw.ratio.0),
        ci(&r.raw.ci),
        fmt(r.centered.ratio.0),
        ci(&r.centered.ci),
        fmt(r.improvement.0),
        ctx.cfg.analysis.n_boot,
        ctx.seed
    );
    Ok(ctx.finish(rep, &[("store", "stores.contextual")], &[], summary))
}

fn colors(ctx: &Ctx) -> Result<Outcome, CliError> {
    let store = ctx.store("stores.colors")?;
    let rep = exp_color_circle(
        store,
        ctx.layer(store, false)?,
        &ctx.correction,
        ctx.cfg.analysis.color_components,
    )?;
    let r = &rep.results;
    let evr: Vec<String> = r.explained_variance_ratio.iter().map(|v| fmt(*v)).collect();
    let summary = format!(
        "colors: explained variance ratios {}; achromatic terms separate best on component {}.",
        evr.join(", "),
        r.achromatic_component.map_or("n/a".into(), |c| c.to_string())
    );
    Ok(ctx.finish(rep, &[("colors", "stores.colors")], &[], summary))
}

fn offsets(ctx: &Ctx) -> Result<Outcome, CliError> {
    let store = ctx.store("stores.contextual")?;
    let pairs: Vec<OffsetPairSpec> = match ctx.cfg.path("resources.offset_pairs") {
        Some(p) => load_gloss_pairs(p)
            .map_err(io)?
            .into_iter()
            .map(|(a, b)| OffsetPairSpec::new(a, b))
            .collect(),
        None => default_offset_pairs()
            .into_iter()
            .filter(|p| store.concept_index(&p.concept_a).is_some() && store.concept_index(&p.concept_b).is_some())
            .collect(),
    };
    if pairs.is_empty() {
        return Err(ExperimentError::Insufficient(
            "none of the offset pairs is present in the store".into(),
        )
        .into());
    }
    let rep = exp_offset_invariance(store, ctx.layer(store, true)?, &ctx.correction, &pairs)?;
    let r = &rep.results;
    let summary = format!(
        "offsets: mean consistency {} over {} pairs (range {} to {}); best pair {}; {} excluded.",
        opt(r.mean),
        r.pairs.len(),
        opt(r.min),
        opt(r.max),
        r.best_pair.as_deref().unwrap_or("-"),
        r.excluded.len()
    );
    Ok(ctx.finish(rep, &[("store", "stores.contextual")], &["resources.offset_pairs"], summary))
}

fn conceptmap(ctx: &Ctx) -> Result<Outcome, CliError> {
    let store = ctx.store("stores.contextual")?;
    let rep = exp_concept_map(store, ctx.layer(store, true)?, &ctx.correction)?;
    let r = &rep.results;
    let evr: Vec<String> = r.explained_variance_ratio.iter().map(|v| fmt(*v)).collect();
    let summary = format!(
        "conceptmap: {} concept centroids projected on {} component(s), explained variance ratios {}.",
        r.concepts.len(),
        r.n_components,
        evr.join(", ")
    );
    Ok(ctx.finish(rep, &[("store", "stores.contextual")], &[], summary))
}

fn dispatch(cmd: Command, ctx: &Ctx) -> Result<Outcome, CliError> {
    match cmd {
        Command::Convergence => convergence(ctx),
        Command::Surface => surface(ctx),
        Command::Categories => categories(ctx),
        Command::Compare => compare(ctx),
        Command::Isotropy => isotropy(ctx),
        Command::Carrier => carrier(ctx),
        Command::Layers => layers(ctx),
        Command::Phylo => phylo(ctx),
        Command::Colex => colex(ctx),
        Command::Storeratio => storeratio(ctx),
        Command::Colors => colors(ctx),
        Command::Offsets => offsets(ctx),
        Command::Conceptmap => conceptmap(ctx),
        Command::Synth | Command::All => unreachable!("handled by run"),
    }
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn write(outcome: &Outcome, dir: &Path, name: &str) -> Result<(), CliError> {
    outcome.report.write(dir, name).map_err(|e| match e {
        ExperimentError::Store(s) => io(s),
        other => CliError::Experiment(other),
    })?;
    println!("{}\n", outcome.summary);
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

pub(super) fn run(cmd: Command, cfg: &RunConfig) -> Result<(), CliError> {
    let dir = out_dir(cfg);
    match cmd {
        Command::Synth => synth(cfg, &dir),
        Command::All => all(cfg, &dir),
        cmd => {
            let ctx = Ctx::new(cfg);
            let outcome = dispatch(cmd, &ctx)?;
            write(&outcome, &dir, cmd.name())
        }
    }
}

/// Why an experiment cannot run under `all`, if it cannot.
fn skip_reason(cmd: Command, ctx: &Ctx) -> Result<Option<String>, CliError> {
    if let Some(f) = required_fields(cmd.name())
        .iter()
        .find(|f| ctx.cfg.path(f).is_none())
    {
        return Ok(Some(format!("{f} not configured")));
    }
    if cmd == Command::Layers {
        let n = ctx.store("stores.contextual")?.n_layers();
        if n < 2 {
            return Ok(Some(format!("store has {n} layer")));
        }
    }
    Ok(None)
}

fn all(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let ctx = Ctx::new(cfg);
    let mut completed = BTreeMap::new();
    let mut skipped = BTreeMap::new();
    let mut failed = BTreeMap::new();
    let mut first_error = None;
    for cmd in ORDER {
        let name = cmd.name();
        if let Some(reason) = skip_reason(cmd, &ctx)? {
            println!("{name}: skipped, {reason}.\n");
            skipped.insert(name, reason);
            continue;
        }
        match dispatch(cmd, &ctx) {
            Ok(outcome) => {
                write(&outcome, dir, name)?;
                completed.insert(name, outcome.summary);
            }
            Err(e @ CliError::Io(_)) => return Err(e),
            Err(e) => {
                println!("{name}: failed, {e}.\n");
                failed.insert(name, e.to_string());
                first_error.get_or_insert(e);
            }
        }
    }
    let doc = json!({
        "experiment": "all",
        "seed": ctx.seed,
        "completed": completed,
        "skipped": skipped,
        "failed": failed,
    });
    write_text(&dir.join("all.json"), &to_canonical_json(&doc))?;
    match first_error {
        None => Ok(()),
        Some(_) => Err(CliError::Failed(format!(
            "{} experiment(s) failed: {}",
            failed.len(),
            failed.keys().copied().collect::<Vec<_>>().join(", ")
        ))),
    }
}

fn synth(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let s = &cfg.synth;
    let seed = cfg.seed.expect("validated");
    let mut spec = PlantSpec::new(
        s.n_concepts,
        s.n_languages,
        s.dim,
        s.concept_scale,
        s.offset_scale,
        s.noise_scale,
        seed,
    );
    spec.n_layers = s.n_layers;
    spec.layer_offset_decay = s.layer_offset_decay;
    spec.missing_fraction = s.missing_fraction;
    spec.colex_pairs = (0..s.n_colex_pairs.min(s.n_concepts / 2))
        .map(|i| ColexPlant {
            concept_a: 2 * i,
            concept_b: 2 * i + 1,
            correlation: s.colex_correlation,
        })
        .collect();
    let set = write_fixture_set(dir, &spec).map_err(|e| match e {
        crate::synth::SynthError::InvalidSpec(m) => CliError::Invalid(vec![super::Violation {
            field: "synth".into(),
            constraint: m,
        }]),
        other => CliError::Io(other.to_string()),
    })?;
    let name = |p: &Path| p.file_name().expect("fixture file").to_string_lossy().into_owned();
    let generated = RunConfig {
        seed: Some(seed),
        out: Some(PathBuf::from("results")),
        stores: super::StorePaths {
            contextual: Some(name(&set.contextual).into()),
            decontextual: Some(name(&set.decontextual).into()),
            comparison: Some(name(&set.comparison).into()),
            colors: Some(name(&set.colors).into()),
        },
        resources: super::ResourcePaths {
            asjp: Some(name(&set.asjp).into()),
            language_map: None,
            colex_edges: Some(name(&set.colex_edges).into()),
            pair_universe: Some(name(&set.pair_universe).into()),
            word_forms: Some(name(&set.word_forms).into()),
            subfamilies: Some(name(&set.subfamilies).into()),
            offset_pairs: Some(name(&set.offset_pairs).into()),
        },
        analysis: cfg.analysis.clone(),
        synth: cfg.synth.clone(),
    };
    let toml = toml::to_string(&generated)
        .map_err(|e| CliError::Failed(format!("cannot encode config: {e}")))?;
    write_text(&dir.join("lexgeo.toml"), &toml)?;
    let doc = json!({
        "experiment": "synth",
        "config": {"seed": seed, "synth": s},
        "results": {
            "files": set,
            "ground_truth": name(&set.ground_truth),
        },
    });
    write_text(&dir.join("synth.json"), &to_canonical_json(&doc))?;
    println!(
        "synth: wrote a {}×{}×{} planted store with {} layer(s), matching decontextual, comparison and color stores, and resources to {}; run `lexgeo all --config {}`.\n",
        s.n_concepts,
        s.n_languages,
        s.dim,
        s.n_layers,
        dir.display(),
        dir.join("lexgeo.toml").display()
    );
    Ok(())
}
