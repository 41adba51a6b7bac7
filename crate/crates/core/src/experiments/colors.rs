//! Basic color terms in the principal plane of their centroids.

use super::report::{ExperimentReport, FigureSeries, StoreInfo};
use super::{base_config, ExperimentError};
use crate::geometry::{correct_layer, pca_project, CorrectionConfig};
use crate::stats::cohens_d;
use crate::store::EmbeddingStore;
use crate::synth::BERLIN_KAY_TERMS;
use serde::Serialize;
use serde_json::json;

const ACHROMATIC: [&str; 3] = ["white", "black", "grey"];

/// Convex hull by monotone chain, counter-clockwise from the lowest-x point.
/// Collinear boundary points are dropped; fewer than 3 distinct points are
/// returned sorted.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColorCentroid {
    pub gloss: String,
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentGap {
    /// 1-based component number.
    pub component: usize,
    /// `|d|` between achromatic and chromatic language points.
    pub standardized_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColorResults {
    pub n_components: usize,
    pub explained_variance_ratio: Vec<f64>,
    pub centroids: Vec<ColorCentroid>,
    /// Per-component separation of the achromatic terms; empty for 2 components.
    pub achromatic_gaps: Vec<ComponentGap>,
    pub achromatic_component: Option<usize>,
}

/// PCA of the eleven color-term centroids with per-language points and
/// per-term hulls in the first two components.
pub fn exp_color_circle(
    store: &EmbeddingStore,
    layer: usize,
    correction: &CorrectionConfig,
    n_components: usize,
) -> Result<ExperimentReport<ColorResults>, ExperimentError> {
    if !(2..=3).contains(&n_components) {
        return Err(ExperimentError::Config(format!(
            "n_components must be 2 or 3, got {n_components}"
        )));
    }
    let mut config = base_config(store, layer, correction)?;
    config.insert("n_components".into(), json!(n_components));
    let idx: Vec<usize> = BERLIN_KAY_TERMS
        .iter()
        .map(|t| {
            store
                .concept_index(t)
                .ok_or_else(|| ExperimentError::MissingConcept(t.to_string()))
        })
        .collect::<Result<_, _>>()?;
    let slice = correct_layer(store, layer, correction)?;
    let centroids: Vec<Vec<f64>> = idx
        .iter()
        .zip(BERLIN_KAY_TERMS)
        .map(|(&c, t)| {
            slice
                .concept_centroid(c)
                .ok_or_else(|| ExperimentError::Insufficient(format!("{t} has no valid cells")))
        })
        .collect::<Result<_, _>>()?;
    let pca = pca_project(&centroids, n_components)?;

    let mut points = FigureSeries::new(&["gloss", "language", "pc1", "pc2", "pc3"]);
    let mut hulls = FigureSeries::new(&["gloss", "vertex", "pc1", "pc2"]);
    let mut centroid_rows = FigureSeries::new(&["gloss", "pc1", "pc2", "pc3"]);
    let mut achromatic: Vec<Vec<f64>> = vec![Vec::new(); n_components];
    let mut chromatic: Vec<Vec<f64>> = vec![Vec::new(); n_components];
    for (k, (&c, term)) in idx.iter().zip(BERLIN_KAY_TERMS).enumerate() {
        let mut plane = Vec::new();
        for l in slice.valid_languages(c) {
            let p = pca.transform(slice.vector(c, l));
            plane.push([p[0], p[1]]);
            let group = if ACHROMATIC.contains(&term) { &mut achromatic } else { &mut chromatic };
            for (j, x) in p.iter().enumerate() {
                group[j].push(*x);
            }
            points.push(vec![
                term.into(),
                store.languages()[l].code.as_str().into(),
                p[0].into(),
                p[1].into(),
                p.get(2).copied().unwrap_or(f64::NAN).into(),
            ]);
        }
        for (v, p) in convex_hull(&plane).iter().enumerate() {
            hulls.push(vec![term.into(), v.into(), p[0].into(), p[1].into()]);
        }
        let q = &pca.projected[k];
        centroid_rows.push(vec![
            term.into(),
            q[0].into(),
            q[1].into(),
            q.get(2).copied().unwrap_or(f64::NAN).into(),
        ]);
    }

    let mut achromatic_gaps = Vec::new();
    if n_components == 3 {
        for j in 0..3 {
            let gap = match cohens_d(&achromatic[j], &chromatic[j]) {
                Ok(d) => d.abs(),
                Err(crate::stats::StatsError::ZeroPooledVariance) => {
                    let diff = super::mean_sd(&achromatic[j]).0 - super::mean_sd(&chromatic[j]).0;
                    if diff == 0.0 { 0.0 } else { f64::INFINITY }
                }
                Err(e) => return Err(ExperimentError::stats("achromatic separation")(e)),
            };
            achromatic_gaps.push(ComponentGap {
                component: j + 1,
                standardized_gap: gap,
            });
        }
    }
    let achromatic_component = achromatic_gaps
        .iter()
        .fold(None::<&ComponentGap>, |best, g| match best {
            Some(b) if b.standardized_gap >= g.standardized_gap => Some(b),
            _ => Some(g),
        })
        .map(|g| g.component);
    let results = ColorResults {
        n_components,
        explained_variance_ratio: pca.explained_variance_ratio.clone(),
        centroids: BERLIN_KAY_TERMS
            .iter()
            .zip(&pca.projected)
            .map(|(t, p)| ColorCentroid {
                gloss: t.to_string(),
                coords: p.clone(),
            })
            .collect(),
        achromatic_gaps,
        achromatic_component,
    };
    Ok(ExperimentReport::new(
        "color_circle",
        config,
        results,
        vec![StoreInfo::of("colors", store)],
    )
    .figure("points", points)
    .figure("hulls", hulls)
    .figure("centroids", centroid_rows))
}
