//! Loading, cleaning, summarizing, subsampling and synthesizing NetFlow-style
//! datasets with a binary `Label` and an `attack_cat` category column.

use std::collections::{BTreeMap, HashMap};
use std::io::Read;
use std::path::Path;

use log::warn;
use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stage_rng, StageRng, TAG_SUBSAMPLE, TAG_SYNTH};

pub const NORMAL: &str = "Normal";

/// Canonical category names. Index 0 is the benign class.
pub const CANONICAL_CATEGORIES: [&str; 10] = [
    NORMAL,
    "Generic",
    "Exploits",
    "Fuzzers",
    "DoS",
    "Reconnaissance",
    "Analysis",
    "Backdoor",
    "Shellcode",
    "Worms",
];

/// Per-category record counts of the selected UNSW-NB15 half-set.
pub const UNSW_HALF_SET_COUNTS: [(&str, usize); 10] = [
    (NORMAL, 1_325_038),
    ("Generic", 35_405),
    ("Exploits", 16_512),
    ("Fuzzers", 9_719),
    ("DoS", 5_804),
    ("Reconnaissance", 4_875),
    ("Analysis", 1_134),
    ("Backdoor", 904),
    ("Shellcode", 547),
    ("Worms", 64),
];

/// Maps a raw category string onto the canonical set: trims, ignores case and
/// folds the plural `Backdoors`.
pub fn canonical_category(raw: &str) -> Option<&'static str> {
    let key = raw.trim().to_ascii_lowercase();
    if key == "backdoors" {
        return Some("Backdoor");
    }
    CANONICAL_CATEGORIES
        .iter()
        .copied()
        .find(|c| c.eq_ignore_ascii_case(&key))
}

/// A non-numeric feature cell seen by [`load_csv`], kept until [`clean`] decodes it.
#[derive(Debug, Clone, PartialEq)]
struct RawCell {
    row: usize,
    col: usize,
    text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Array2<f64>,
    pub feature_names: Vec<String>,
    /// 0 = normal, 1 = attack.
    pub label: Vec<u8>,
    pub attack_cat: Vec<String>,
    unparsed: Vec<RawCell>,
}

impl Dataset {
    pub fn new(
        features: Array2<f64>,
        feature_names: Vec<String>,
        label: Vec<u8>,
        attack_cat: Vec<String>,
    ) -> Result<Self> {
        let n = features.nrows();
        if n == 0 {
            return Err(Error::Empty("dataset".into()));
        }
        if feature_names.len() != features.ncols() {
            return Err(Error::DimensionMismatch {
                expected: features.ncols(),
                found: feature_names.len(),
            });
        }
        if label.len() != n || attack_cat.len() != n {
            return Err(Error::invalid(format!(
                "column lengths differ: {n} feature rows, {} labels, {} categories",
                label.len(),
                attack_cat.len()
            )));
        }
        if let Some(i) = label.iter().position(|&l| l > 1) {
            return Err(Error::BadLabel {
                line: i as u64,
                value: label[i].to_string(),
            });
        }
        Ok(Dataset {
            features: features.as_standard_layout().into_owned(),
            feature_names,
            label,
            attack_cat,
            unparsed: Vec::new(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_attacks(&self) -> usize {
        self.label.iter().filter(|&&l| l == 1).count()
    }

    /// True while non-numeric cells from loading are still waiting for [`clean`].
    pub fn has_unparsed(&self) -> bool {
        !self.unparsed.is_empty()
    }

    /// Row-exact extraction in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Dataset> {
        let n = self.n_rows();
        if let Some(&bad) = rows.iter().find(|&&r| r >= n) {
            return Err(Error::IndexOutOfRange { index: bad, len: n });
        }
        if rows.is_empty() {
            return Err(Error::Empty("row selection".into()));
        }
        Ok(Dataset {
            features: self.features.select(Axis(0), rows),
            feature_names: self.feature_names.clone(),
            label: rows.iter().map(|&r| self.label[r]).collect(),
            attack_cat: rows.iter().map(|&r| self.attack_cat[r].clone()).collect(),
            unparsed: Vec::new(),
        })
    }

    pub fn select_columns(&self, cols: &[usize]) -> Result<Dataset> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.n_features()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.n_features(),
            });
        }
        Ok(Dataset {
            features: self.features.select(Axis(1), cols),
            feature_names: cols.iter().map(|&c| self.feature_names[c].clone()).collect(),
            label: self.label.clone(),
            attack_cat: self.attack_cat.clone(),
            unparsed: Vec::new(),
        })
    }

    /// Rows violating `label = 0 <=> attack_cat = Normal`.
    pub fn label_category_violations(&self) -> Vec<usize> {
        self.label
            .iter()
            .zip(&self.attack_cat)
            .enumerate()
            .filter(|(_, (&l, c))| (l == 0) != (c.as_str() == NORMAL))
            .map(|(i, _)| i)
            .collect()
    }

    /// Writes the dataset as CSV with a header; `attack_cat` and `Label` come last.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.extend(["attack_cat", "Label"]);
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(header.len());
        for (i, row) in self.features.outer_iter().enumerate() {
            record.clear();
            record.extend(row.iter().map(|v| v.to_string()));
            record.push(self.attack_cat[i].clone());
            record.push(self.label[i].to_string());
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

/// Reads a UNSW-NB15-style CSV.
///
/// With a header, `Label`/`label` and `attack_cat` are located by name (case
/// insensitive). Without one, they are the last two columns (`attack_cat`,
/// then `Label`) and feature names come from `feature_names` or default to
/// `f0, f1, ...`. Non-numeric feature cells load as NaN and are resolved by
/// [`clean`].
pub fn load_csv(
    path: impl AsRef<Path>,
    has_header: bool,
    feature_names: Option<&[String]>,
) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_csv_from_reader(file, has_header, feature_names)
}

/// Reads a sidecar feature-name file: one name per line, blank lines skipped.
pub fn load_feature_names(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

pub fn load_csv_from_reader<R: Read>(
    reader: R,
    has_header: bool,
    feature_names: Option<&[String]>,
) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .from_reader(reader);

    let header: Option<Vec<String>> = if has_header {
        Some(rdr.headers()?.iter().map(|h| h.trim().to_string()).collect())
    } else {
        None
    };

    let mut width = header.as_ref().map(Vec::len);
    let mut values: Vec<f64> = Vec::new();
    let mut labels = Vec::new();
    let mut cats = Vec::new();
    let mut unparsed = Vec::new();
    let mut layout: Option<(usize, usize, Vec<usize>)> = None;

    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(row as u64 + 1);
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRow {
                line,
                expected,
                found: record.len(),
            });
        }
        let (label_col, cat_col, feature_cols) = match &layout {
            Some(l) => l,
            None => layout.insert(column_layout(header.as_deref(), expected)?),
        };

        let raw_label = record[*label_col].trim();
        labels.push(match raw_label.parse::<f64>() {
            Ok(v) if v == 0.0 => 0u8,
            Ok(v) if v == 1.0 => 1u8,
            _ => {
                return Err(Error::BadLabel {
                    line,
                    value: raw_label.to_string(),
                })
            }
        });
        cats.push(record[*cat_col].to_string());

        for (j, &c) in feature_cols.iter().enumerate() {
            let text = record[c].trim();
            match text.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    values.push(f64::NAN);
                    unparsed.push(RawCell {
                        row,
                        col: j,
                        text: text.to_string(),
                    });
                }
            }
        }
    }

    let (_, _, feature_cols) = layout.ok_or_else(|| Error::Empty("CSV file".into()))?;
    let names: Vec<String> = match (&header, feature_names) {
        (Some(h), _) => feature_cols.iter().map(|&c| h[c].clone()).collect(),
        (None, Some(names)) => {
            if names.len() != feature_cols.len() {
                return Err(Error::DimensionMismatch {
                    expected: feature_cols.len(),
                    found: names.len(),
                });
            }
            names.to_vec()
        }
        (None, None) => (0..feature_cols.len()).map(|j| format!("f{j}")).collect(),
    };
    let n_rows = labels.len();
    let features = Array2::from_shape_vec((n_rows, feature_cols.len()), values)
        .map_err(|e| Error::invalid(e.to_string()))?;
    let mut d = Dataset::new(features, names, labels, cats)?;
    d.unparsed = unparsed;
    Ok(d)
}

fn column_layout(header: Option<&[String]>, width: usize) -> Result<(usize, usize, Vec<usize>)> {
    let (label_col, cat_col) = match header {
        Some(h) => {
            let find = |names: &[&str]| {
                h.iter()
                    .position(|c| names.iter().any(|n| c.eq_ignore_ascii_case(n)))
            };
            let label = find(&["label"]).ok_or_else(|| Error::MissingColumn("Label".into()))?;
            let cat = find(&["attack_cat", "attack-cat"])
                .ok_or_else(|| Error::MissingColumn("attack_cat".into()))?;
            (label, cat)
        }
        None => {
            if width < 3 {
                return Err(Error::invalid(format!(
                    "headerless CSV needs at least 3 columns, found {width}"
                )));
            }
            (width - 1, width - 2)
        }
    };
    let features = (0..width).filter(|&c| c != label_col && c != cat_col).collect();
    Ok((label_col, cat_col, features))
}

// ---------------------------------------------------------------------------
// Cleaning
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CleaningSummary {
    pub rows_in: usize,
    pub rows_out: usize,
    pub dropped_rows: usize,
    pub null_categories_fixed: usize,
    /// Integer codes given to categorical feature values, by first appearance.
    pub encodings: BTreeMap<String, BTreeMap<String, u32>>,
}

fn parse_hex(text: &str) -> Option<f64> {
    let t = text.trim();
    let digits = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X"))?;
    u64::from_str_radix(digits, 16).ok().map(|v| v as f64)
}

/// Resolves categories and non-numeric cells.
///
/// Empty categories on normal rows become `Normal`; names are canonicalized.
/// A feature column whose unparsed cells are mostly text (more than half the
/// rows) is integer-encoded in first-seen order; otherwise hex cells are
/// decoded and rows with any remaining unparseable cell are dropped.
pub fn clean(raw: &Dataset) -> Result<(Dataset, CleaningSummary)> {
    let n = raw.n_rows();
    let mut summary = CleaningSummary {
        rows_in: n,
        ..Default::default()
    };

    let mut cats = Vec::with_capacity(n);
    let mut missing_attack = Vec::new();
    for (i, (raw_cat, &label)) in raw.attack_cat.iter().zip(&raw.label).enumerate() {
        if raw_cat.trim().is_empty() {
            if label == 0 {
                summary.null_categories_fixed += 1;
                cats.push(NORMAL.to_string());
            } else {
                missing_attack.push(i);
                cats.push(String::new());
            }
            continue;
        }
        let canon =
            canonical_category(raw_cat).ok_or_else(|| Error::UnknownCategory(raw_cat.clone()))?;
        cats.push(canon.to_string());
    }
    if !missing_attack.is_empty() {
        return Err(Error::UnknownAttackType {
            rows: missing_attack,
        });
    }

    let mut features = raw.features.clone();
    let mut drop = vec![false; n];

    let mut by_col: BTreeMap<usize, Vec<&RawCell>> = BTreeMap::new();
    for cell in &raw.unparsed {
        by_col.entry(cell.col).or_default().push(cell);
    }
    for (col, cells) in by_col {
        let textual = cells
            .iter()
            .filter(|c| !c.text.is_empty() && parse_hex(&c.text).is_none())
            .count();
        if 2 * textual > n {
            let raw_text: HashMap<usize, &str> =
                cells.iter().map(|c| (c.row, c.text.as_str())).collect();
            let mut codes: HashMap<String, u32> = HashMap::new();
            let mut column = features.column_mut(col);
            for (row, v) in column.iter_mut().enumerate() {
                let key = match raw_text.get(&row) {
                    Some(t) => (*t).to_string(),
                    None => v.to_string(),
                };
                let next = codes.len() as u32;
                *v = *codes.entry(key).or_insert(next) as f64;
            }
            summary
                .encodings
                .insert(raw.feature_names[col].clone(), codes.into_iter().collect());
        } else {
            for cell in cells {
                match parse_hex(&cell.text) {
                    Some(v) => features[[cell.row, col]] = v,
                    None => drop[cell.row] = true,
                }
            }
        }
    }

    for (i, row) in features.outer_iter().enumerate() {
        if row.iter().any(|v| !v.is_finite()) {
            drop[i] = true;
        }
    }

    let keep: Vec<usize> = (0..n).filter(|&i| !drop[i]).collect();
    summary.rows_out = keep.len();
    summary.dropped_rows = n - keep.len();
    if keep.is_empty() {
        return Err(Error::Empty("dataset after cleaning".into()));
    }

    let mismatched: Vec<usize> = keep
        .iter()
        .copied()
        .filter(|&i| (raw.label[i] == 0) != (cats[i] == NORMAL))
        .collect();
    if !mismatched.is_empty() {
        return Err(Error::LabelCategoryMismatch { rows: mismatched });
    }

    let dataset = Dataset {
        features: features.select(Axis(0), &keep),
        feature_names: raw.feature_names.clone(),
        label: keep.iter().map(|&i| raw.label[i]).collect(),
        attack_cat: keep.iter().map(|&i| std::mem::take(&mut cats[i])).collect(),
        unparsed: Vec::new(),
    };
    Ok((dataset, summary))
}

// ---------------------------------------------------------------------------
// Counts and subsampling
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryCount {
    pub category: String,
    pub count: usize,
    pub percentage: f64,
}

/// One entry per distinct category, by descending count (ties by name).
pub fn category_counts(d: &Dataset) -> Vec<CategoryCount> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for c in &d.attack_cat {
        *counts.entry(c.as_str()).or_default() += 1;
    }
    let n = d.n_rows() as f64;
    let mut out: Vec<CategoryCount> = counts
        .into_iter()
        .map(|(category, count)| CategoryCount {
            category: category.to_string(),
            count,
            percentage: 100.0 * count as f64 / n,
        })
        .collect();
    out.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.category.cmp(&b.category)));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Stratify {
    #[default]
    Category,
    Label,
    None,
}

/// Seeded subsample. Output rows keep their original relative order.
pub fn subsample(d: &Dataset, fraction: f64, seed: u64, stratify_by: Stratify) -> Result<Dataset> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid(format!("subsample fraction {fraction} not in (0, 1]")));
    }
    let n = d.n_rows();
    if fraction * (n as f64) < 1.0 {
        return Err(Error::invalid("subsample would contain no rows"));
    }

    let mut strata: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let key = match stratify_by {
            Stratify::Category => d.attack_cat[i].clone(),
            Stratify::Label => d.label[i].to_string(),
            Stratify::None => String::new(),
        };
        strata.entry(key).or_default().push(i);
    }

    let mut rng = stage_rng(seed, TAG_SUBSAMPLE);
    let mut keep = Vec::new();
    for (key, mut rows) in strata {
        let mut take = (fraction * rows.len() as f64).round() as usize;
        if take == 0 {
            warn!("stratum {key:?} rounds to 0 of {} rows; keeping 1", rows.len());
            take = 1;
        }
        rows.shuffle(&mut rng);
        keep.extend_from_slice(&rows[..take.min(rows.len())]);
    }
    keep.sort_unstable();
    d.select_rows(&keep)
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

/// Attack-category mix of the UNSW-NB15 half-set, as fractions of all attacks.
pub fn unsw_category_mix() -> BTreeMap<String, f64> {
    let attacks: usize = UNSW_HALF_SET_COUNTS[1..].iter().map(|&(_, c)| c).sum();
    UNSW_HALF_SET_COUNTS[1..]
        .iter()
        .map(|&(name, c)| (name.to_string(), c as f64 / attacks as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_rows: usize,
    pub n_features: usize,
    pub attack_fraction: f64,
    pub category_mix: BTreeMap<String, f64>,
    /// Distance between the normal and attack cluster centers.
    pub class_separation: f64,
    pub noise_std: f64,
    /// Offset of each category's sub-center from the attack center, as a
    /// multiple of `class_separation`, orthogonal to the class axis.
    pub category_spread: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_rows: 50_000,
            n_features: 20,
            attack_fraction: 0.0536,
            category_mix: unsw_category_mix(),
            class_separation: 3.5,
            noise_std: 1.0,
            category_spread: 0.5,
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_rows == 0 || self.n_features == 0 {
            return Err(Error::invalid("n_rows and n_features must be positive"));
        }
        if !(self.attack_fraction > 0.0 && self.attack_fraction < 1.0) {
            return Err(Error::invalid("attack_fraction must lie in (0, 1)"));
        }
        if self.class_separation < 0.0 || self.category_spread < 0.0 {
            return Err(Error::invalid("class_separation and category_spread must be >= 0"));
        }
        if self.noise_std <= 0.0 {
            return Err(Error::invalid("noise_std must be positive"));
        }
        if self.category_mix.is_empty() {
            return Err(Error::invalid("category_mix is empty"));
        }
        for (name, &f) in &self.category_mix {
            if canonical_category(name).is_none_or(|c| c == NORMAL) {
                return Err(Error::UnknownCategory(name.clone()));
            }
            if f < 0.0 {
                return Err(Error::invalid(format!("negative mix fraction for {name}")));
            }
        }
        let total: f64 = self.category_mix.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("category_mix sums to {total}, not 1")));
        }
        Ok(())
    }

    /// Number of attacks per category by largest remainder; zero-count
    /// categories are omitted.
    pub fn category_allocation(&self) -> Vec<(String, usize)> {
        let n_attacks = (self.attack_fraction * self.n_rows as f64).round() as usize;
        let quotas: Vec<(&String, f64)> = self
            .category_mix
            .iter()
            .map(|(name, &f)| (name, f * n_attacks as f64))
            .collect();
        let mut alloc: Vec<usize> = quotas.iter().map(|(_, q)| q.floor() as usize).collect();
        let mut remaining = n_attacks.saturating_sub(alloc.iter().sum());
        let mut order: Vec<usize> = (0..quotas.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = quotas[a].1 - quotas[a].1.floor();
            let rb = quotas[b].1 - quotas[b].1.floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &i in order.iter().cycle() {
            if remaining == 0 {
                break;
            }
            alloc[i] += 1;
            remaining -= 1;
        }
        quotas
            .iter()
            .zip(alloc)
            .filter_map(|((name, _), count)| {
                if count == 0 {
                    warn!("category {name} receives 0 synthetic rows; omitted");
                    None
                } else {
                    Some(((*name).clone(), count))
                }
            })
            .collect()
    }
}

fn random_unit(rng: &mut StageRng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Orthonormal columns by Gram-Schmidt on a Gaussian matrix.
fn orthonormal_mixing(rng: &mut StageRng, rows: usize, cols: usize) -> Array2<f64> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cols);
    while basis.len() < cols {
        let mut v = random_unit(rng, rows);
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    Array2::from_shape_fn((rows, cols), |(i, j)| basis[j][i])
}

/// Gaussian clusters in a latent space mixed into `n_features` correlated
/// columns. Normal traffic is centered at the origin; attacks sit
/// `class_separation` away, and each category has its own sub-center so rare
/// categories occupy distinct regions.
pub fn synthesize(cfg: &SynthConfig) -> Result<Dataset> {
    cfg.validate()?;
    let mut rng = stage_rng(cfg.seed, TAG_SYNTH);
    let nf = cfg.n_features;
    let latent = if nf <= 3 { nf } else { nf.div_ceil(2) };
    let mixing = orthonormal_mixing(&mut rng, nf, latent);
    let axis = random_unit(&mut rng, latent);

    let allocation = cfg.category_allocation();
    let n_attacks: usize = allocation.iter().map(|(_, c)| c).sum();
    if n_attacks >= cfg.n_rows {
        return Err(Error::invalid("attack count leaves no normal rows"));
    }

    let mut centers: Vec<(String, Vec<f64>, usize)> =
        vec![(NORMAL.to_string(), vec![0.0; latent], cfg.n_rows - n_attacks)];
    for (name, count) in allocation {
        let mut offset = random_unit(&mut rng, latent);
        if latent > 1 {
            let dot: f64 = offset.iter().zip(&axis).map(|(o, a)| o * a).sum();
            offset.iter_mut().zip(&axis).for_each(|(o, a)| *o -= dot * a);
            let norm = offset.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            offset.iter_mut().for_each(|o| *o /= norm);
        } else {
            offset.iter_mut().for_each(|o| *o = 0.0);
        }
        let center = axis
            .iter()
            .zip(&offset)
            .map(|(a, o)| cfg.class_separation * (a + cfg.category_spread * o))
            .collect();
        centers.push((name, center, count));
    }

    let feature_noise = 0.1 * cfg.noise_std;
    let mut features = Array2::<f64>::zeros((cfg.n_rows, nf));
    let mut label = Vec::with_capacity(cfg.n_rows);
    let mut cats = Vec::with_capacity(cfg.n_rows);
    let mut z = vec![0.0; latent];
    let mut row = 0;
    for (name, center, count) in &centers {
        for _ in 0..*count {
            for (zk, ck) in z.iter_mut().zip(center) {
                *zk = ck + cfg.noise_std * rng.sample::<f64, _>(StandardNormal);
            }
            for j in 0..nf {
                let mixed: f64 = (0..latent).map(|k| mixing[[j, k]] * z[k]).sum();
                features[[row, j]] = mixed + feature_noise * rng.sample::<f64, _>(StandardNormal);
            }
            label.push(u8::from(name != NORMAL));
            cats.push(name.clone());
            row += 1;
        }
    }

    let mut order: Vec<usize> = (0..cfg.n_rows).collect();
    order.shuffle(&mut rng);
    let names = (0..nf).map(|j| format!("f{j:02}")).collect();
    Dataset::new(features, names, label, cats)?.select_rows(&order)
}
