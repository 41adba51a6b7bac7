//! CSV loaders for external resources and language alignment.

use super::{normalize_gloss, DistanceMatrix, EmbeddingStore, StoreError};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

fn open_csv(path: &Path, has_headers: bool) -> Result<csv::Reader<std::fs::File>, StoreError> {
    let file = std::fs::File::open(path).map_err(|source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(has_headers)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn csv_err(path: &Path, e: impl std::fmt::Display) -> StoreError {
    StoreError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn line_of(record: &csv::StringRecord) -> usize {
    record.position().map(|p| p.line() as usize).unwrap_or(0)
}

/// Positions of the named columns in the header row.
fn columns(
    path: &Path,
    reader: &mut csv::Reader<std::fs::File>,
    names: &[&str],
) -> Result<Vec<usize>, StoreError> {
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    names
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h.eq_ignore_ascii_case(name))
                .ok_or_else(|| csv_err(path, format!("missing column {name:?}")))
        })
        .collect()
}

fn field<'r>(
    path: &Path,
    record: &'r csv::StringRecord,
    idx: usize,
) -> Result<&'r str, StoreError> {
    record
        .get(idx)
        .ok_or_else(|| csv_err(path, format!("line {}: too few fields", line_of(record))))
}

/// Loads a square language-distance CSV.
///
/// The header row carries the language labels. Body rows may optionally
/// start with their own label (detected when the first field is not
/// numeric), in which case it must match the header order.
pub fn load_asjp_matrix(path: impl AsRef<Path>) -> Result<DistanceMatrix, StoreError> {
    let path = path.as_ref();
    let mut reader = open_csv(path, false)?;
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        records.push(rec);
    }
    let Some((header, body)) = records.split_first() else {
        return Err(csv_err(path, "empty file"));
    };
    let labelled = body
        .first()
        .and_then(|r| r.get(0))
        .is_some_and(|f| f.parse::<f64>().is_err());
    let header: Vec<String> = header.iter().map(str::to_string).collect();
    let labels: Vec<String> = match body.first() {
        Some(first) if labelled && header.len() == first.len() => header[1..].to_vec(),
        _ => header,
    };
    let n = labels.len();
    if body.len() != n {
        return Err(StoreError::NonSquare(format!(
            "{n} labels but {} body rows",
            body.len()
        )));
    }
    let mut values = Vec::with_capacity(n * n);
    for (i, rec) in body.iter().enumerate() {
        let fields: Vec<&str> = rec.iter().collect();
        let numeric = if labelled {
            if fields[0] != labels[i] {
                return Err(csv_err(
                    path,
                    format!(
                        "line {}: row label {:?} does not match column {:?}",
                        line_of(rec),
                        fields[0],
                        labels[i]
                    ),
                ));
            }
            &fields[1..]
        } else {
            &fields[..]
        };
        if numeric.len() != n {
            return Err(StoreError::NonSquare(format!(
                "row {} has {} values, expected {n}",
                i + 1,
                numeric.len()
            )));
        }
        for v in numeric {
            values.push(v.parse::<f64>().map_err(|_| StoreError::BadNumber {
                value: v.to_string(),
                line: line_of(rec),
            })?);
        }
    }
    DistanceMatrix::new(labels, values)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColexEdge {
    pub concept_a: String,
    pub concept_b: String,
    pub family_count: u32,
}

/// Colexification edges keyed by unordered, normalised gloss pair.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ColexEdgeList {
    edges: Vec<ColexEdge>,
    index: HashMap<(String, String), usize>,
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    let (a, b) = (normalize_gloss(a), normalize_gloss(b));
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl ColexEdgeList {
    pub fn from_edges(edges: Vec<ColexEdge>) -> Result<Self, StoreError> {
        let mut list = Self::default();
        for (i, e) in edges.into_iter().enumerate() {
            list.push(e, i + 1)?;
        }
        Ok(list)
    }

    fn push(&mut self, mut edge: ColexEdge, line: usize) -> Result<(), StoreError> {
        edge.concept_a = normalize_gloss(&edge.concept_a);
        edge.concept_b = normalize_gloss(&edge.concept_b);
        if edge.concept_a == edge.concept_b {
            return Err(StoreError::SelfLoop(edge.concept_a, line));
        }
        let key = pair_key(&edge.concept_a, &edge.concept_b);
        if self.index.contains_key(&key) {
            return Err(StoreError::DuplicatePair(key.0, key.1, line));
        }
        self.index.insert(key, self.edges.len());
        self.edges.push(edge);
        Ok(())
    }

    pub fn edges(&self) -> &[ColexEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Family count for an unordered pair; zero when absent.
    pub fn family_count(&self, a: &str, b: &str) -> u32 {
        self.index
            .get(&pair_key(a, b))
            .map(|&i| self.edges[i].family_count)
            .unwrap_or(0)
    }

    pub fn contains(&self, a: &str, b: &str) -> bool {
        self.index.contains_key(&pair_key(a, b))
    }
}

/// Loads `concept_a, concept_b, family_count` rows.
pub fn load_colex_edges(path: impl AsRef<Path>) -> Result<ColexEdgeList, StoreError> {
    let path = path.as_ref();
    let mut reader = open_csv(path, true)?;
    let cols = columns(path, &mut reader, &["concept_a", "concept_b", "family_count"])?;
    let mut list = ColexEdgeList::default();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = line_of(&rec);
        let raw = field(path, &rec, cols[2])?;
        let count: i64 = raw.parse().map_err(|_| StoreError::BadNumber {
            value: raw.to_string(),
            line,
        })?;
        if count < 0 {
            return Err(StoreError::NegativeCount(count, line));
        }
        let family_count = u32::try_from(count).map_err(|_| StoreError::BadNumber {
            value: raw.to_string(),
            line,
        })?;
        list.push(
            ColexEdge {
                concept_a: field(path, &rec, cols[0])?.to_string(),
                concept_b: field(path, &rec, cols[1])?.to_string(),
                family_count,
            },
            line,
        )?;
    }
    Ok(list)
}

/// Loads `concept_a, concept_b` rows (offset pairs, colexification pair universe).
pub fn load_gloss_pairs(path: impl AsRef<Path>) -> Result<Vec<(String, String)>, StoreError> {
    let path = path.as_ref();
    let mut reader = open_csv(path, true)?;
    let cols = columns(path, &mut reader, &["concept_a", "concept_b"])?;
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let a = normalize_gloss(field(path, &rec, cols[0])?);
        let b = normalize_gloss(field(path, &rec, cols[1])?);
        if a == b {
            return Err(StoreError::SelfLoop(a, line_of(&rec)));
        }
        out.push((a, b));
    }
    Ok(out)
}

/// Surface forms keyed by (normalised gloss, language code).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WordFormTable {
    entries: BTreeMap<(String, String), String>,
}

impl WordFormTable {
    pub fn insert(&mut self, gloss: &str, code: &str, form: &str) -> Result<(), StoreError> {
        if form.trim().is_empty() {
            return Err(StoreError::Invalid(format!(
                "empty form for ({gloss}, {code})"
            )));
        }
        self.entries
            .insert((normalize_gloss(gloss), code.to_string()), form.trim().to_string());
        Ok(())
    }

    pub fn get(&self, gloss: &str, code: &str) -> Option<&str> {
        self.entries
            .get(&(normalize_gloss(gloss), code.to_string()))
            .map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, &str)> {
        self.entries
            .iter()
            .map(|((g, c), f)| (g.as_str(), c.as_str(), f.as_str()))
    }
}

/// Loads `gloss, language_code, form` rows.
pub fn load_word_forms(path: impl AsRef<Path>) -> Result<WordFormTable, StoreError> {
    let path = path.as_ref();
    let mut reader = open_csv(path, true)?;
    let cols = columns(path, &mut reader, &["gloss", "language_code", "form"])?;
    let mut table = WordFormTable::default();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let gloss = field(path, &rec, cols[0])?;
        let code = field(path, &rec, cols[1])?;
        if table.get(gloss, code).is_some() {
            return Err(csv_err(
                path,
                format!("line {}: duplicate form for ({gloss}, {code})", line_of(&rec)),
            ));
        }
        table
            .insert(gloss, code, field(path, &rec, cols[2])?)
            .map_err(|e| csv_err(path, format!("line {}: {e}", line_of(&rec))))?;
    }
    Ok(table)
}

/// Store language code → external label (e.g. an ASJP doculect name).
/// Codes without an entry map to themselves.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LanguageMapping {
    map: BTreeMap<String, String>,
}

impl LanguageMapping {
    pub fn new(map: BTreeMap<String, String>) -> Result<Self, StoreError> {
        let mut seen = HashSet::new();
        for label in map.values() {
            if !seen.insert(label) {
                return Err(StoreError::MappingNotInjective(label.clone()));
            }
        }
        Ok(Self { map })
    }

    pub fn label<'a>(&'a self, code: &'a str) -> &'a str {
        self.map.get(code).map(String::as_str).unwrap_or(code)
    }
}

/// Loads `code, label` rows.
pub fn load_language_map(path: impl AsRef<Path>) -> Result<LanguageMapping, StoreError> {
    let path = path.as_ref();
    let mut reader = open_csv(path, true)?;
    let cols = columns(path, &mut reader, &["code", "label"])?;
    let mut map = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        map.insert(
            field(path, &rec, cols[0])?.to_string(),
            field(path, &rec, cols[1])?.to_string(),
        );
    }
    LanguageMapping::new(map)
}

/// Loads `language_code, subfamily` rows.
pub fn load_subfamilies(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>, StoreError> {
    let path = path.as_ref();
    let mut reader = open_csv(path, true)?;
    let cols = columns(path, &mut reader, &["language_code", "subfamily"])?;
    let mut map = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        map.insert(
            field(path, &rec, cols[0])?.to_string(),
            field(path, &rec, cols[1])?.to_string(),
        );
    }
    Ok(map)
}

/// Restricts a store and an external language matrix to their common
/// languages, in store order. The returned matrix is relabelled with store
/// codes so both outputs carry identical labels.
pub fn align_languages(
    store: &EmbeddingStore,
    matrix: &DistanceMatrix,
    mapping: &LanguageMapping,
) -> Result<(EmbeddingStore, DistanceMatrix), StoreError> {
    let mut used = HashSet::new();
    for lang in store.languages() {
        let label = mapping.label(&lang.code);
        if !used.insert(label) {
            return Err(StoreError::MappingNotInjective(label.to_string()));
        }
    }
    let mut store_idx = Vec::new();
    let mut matrix_idx = Vec::new();
    for (i, lang) in store.languages().iter().enumerate() {
        if let Some(j) = matrix.index_of(mapping.label(&lang.code)) {
            store_idx.push(i);
            matrix_idx.push(j);
        }
    }
    if store_idx.is_empty() {
        return Err(StoreError::EmptyIntersection);
    }
    let sub_store = store.select_languages(&store_idx)?;
    let codes = sub_store.languages().iter().map(|l| l.code.clone()).collect();
    let sub_matrix = matrix.select(&matrix_idx).relabel(codes)?;
    Ok((sub_store, sub_matrix))
}
