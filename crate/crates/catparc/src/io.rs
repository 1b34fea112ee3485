//! Tabular output writers, ranking/truth readers for the benchmark harness,
//! and the JSON run manifest.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::align::EncodedMatrix;
use crate::bench::RocCurve;
use crate::error::{Error, Result};
use crate::features::FeatureRow;
use crate::pairwise::PairResult;
use crate::scalar::Scalar;

fn opt<F: Scalar>(v: Option<F>) -> String {
    match v {
        Some(v) => format!("{v}"),
        None => "NA".into(),
    }
}

pub const PAIR_TSV_HEADER: &str =
    "i\tj\td_i\td_j\tT\tdf\tp_chisq\tp_weighted\trefit_i\trefit_j\tunstable\tbh_adj_p";

/// Pair results in the contact table schema. With `method`, a leading
/// `method` column is prepended (baseline tables share the schema).
pub fn write_pair_tsv<F: Scalar>(
    w: &mut impl Write,
    results: &[PairResult<F>],
    method: Option<&str>,
) -> Result<()> {
    match method {
        Some(_) => writeln!(w, "method\t{PAIR_TSV_HEADER}")?,
        None => writeln!(w, "{PAIR_TSV_HEADER}")?,
    }
    for r in results {
        let prefix = method.map(|m| format!("{m}\t")).unwrap_or_default();
        writeln!(
            w,
            "{prefix}{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.i,
            r.j,
            r.d_i,
            r.d_j,
            r.t,
            r.d_i * r.d_j,
            r.p_chisq,
            opt(r.p_weighted),
            u8::from(r.refit_flags.0),
            u8::from(r.refit_flags.1),
            u8::from(r.unstable),
            r.bh_adj_p,
        )?;
    }
    Ok(())
}

/// Generic ranking rows consumed by the ROC harness.
pub fn write_ranking_tsv(
    w: &mut impl Write,
    rows: &[(usize, usize, f64)],
    method: &str,
) -> Result<()> {
    writeln!(w, "method\ti\tj\tscore")?;
    for (i, j, score) in rows {
        writeln!(w, "{method}\t{i}\t{j}\t{score}")?;
    }
    Ok(())
}

/// Reads `i j score` rows (a `method` column, if present, is skipped).
pub fn read_ranking_tsv(r: impl BufRead) -> Result<Vec<(usize, usize, f64)>> {
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let fields: Vec<&str> = line.trim().split('\t').collect();
        if line.trim().is_empty() || fields.iter().any(|f| *f == "score" || *f == "i") {
            continue;
        }
        let tail = &fields[fields.len().saturating_sub(3)..];
        if tail.len() != 3 {
            return Err(Error::Format(format!("ranking line {}: {line}", lineno + 1)));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Format(format!("ranking line {}: {line}", lineno + 1)))
        };
        out.push((
            parse(tail[0])? as usize,
            parse(tail[1])? as usize,
            parse(tail[2])?,
        ));
    }
    if out.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(out)
}

/// Truth labels: `i j label` with label 1 for positives.
pub fn write_truth_tsv(w: &mut impl Write, truth: &[((usize, usize), bool)]) -> Result<()> {
    writeln!(w, "i\tj\tlabel")?;
    for ((i, j), t) in truth {
        writeln!(w, "{i}\t{j}\t{}", u8::from(*t))?;
    }
    Ok(())
}

pub fn read_truth_tsv(r: impl BufRead) -> Result<Vec<((usize, usize), bool)>> {
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with("i\t") {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::Format(format!("truth line {}: {line}", lineno + 1)));
        }
        let parse = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::Format(format!("truth line {}: {line}", lineno + 1)))
        };
        out.push(((parse(fields[0])?, parse(fields[1])?), parse(fields[2])? != 0));
    }
    if out.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(out)
}

/// Amino-acid combination table: `res_i res_j z p bh_adj_p`.
pub fn write_aa_tsv<F: Scalar>(
    w: &mut impl Write,
    rows: &[(char, char, F, F, F)],
) -> Result<()> {
    writeln!(w, "res_i\tres_j\tz\tp\tbh_adj_p")?;
    for (ri, rj, z, p, bh) in rows {
        writeln!(w, "{ri}\t{rj}\t{z}\t{p}\t{bh}")?;
    }
    Ok(())
}

/// Grouped-strength table for heatmap rendering.
pub fn write_group_strength_tsv<F: Scalar>(
    w: &mut impl Write,
    names: &[String],
    strength: &ndarray::Array2<F>,
) -> Result<()> {
    writeln!(w, "group_i\tgroup_j\tstrength")?;
    for (gi, ni) in names.iter().enumerate() {
        for (gj, nj) in names.iter().enumerate() {
            writeln!(w, "{ni}\t{nj}\t{}", strength[[gi, gj]])?;
        }
    }
    Ok(())
}

pub fn write_features_csv<F: Scalar>(w: &mut impl Write, rows: &[FeatureRow<F>]) -> Result<()> {
    writeln!(w, "id,deltaC,deltaM,n_mutations,unseen_count")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.id, r.delta_c, r.delta_m, r.n_mutations, r.unseen_count
        )?;
    }
    Ok(())
}

/// Mutant input CSV: `id,sequence[,effect]`, with an optional header line.
pub fn read_mutants_csv(r: impl BufRead) -> Result<Vec<(String, String, Option<f64>)>> {
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(|f| f.trim()).collect();
        if lineno == 0 && fields[0].eq_ignore_ascii_case("id") {
            continue;
        }
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::Format(format!("mutant line {}: {line}", lineno + 1)));
        }
        let effect = match fields.get(2) {
            Some(s) if !s.is_empty() => Some(
                s.parse()
                    .map_err(|_| Error::Format(format!("mutant line {}: {line}", lineno + 1)))?,
            ),
            _ => None,
        };
        out.push((fields[0].to_string(), fields[1].to_string(), effect));
    }
    if out.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(out)
}

pub fn write_roc_tsv(w: &mut impl Write, roc: &RocCurve) -> Result<()> {
    writeln!(w, "threshold\tfpr\ttpr")?;
    for k in 0..roc.fpr.len() {
        writeln!(w, "{}\t{}\t{}", roc.thresholds[k], roc.fpr[k], roc.tpr[k])?;
    }
    Ok(())
}

/// Encoded matrix dump: TSV with `pos:res` column labels, plus a JSON sidecar
/// describing groups, drops, and standardization constants.
pub fn write_encoded_tsv<F: Scalar>(w: &mut impl Write, enc: &EncodedMatrix<F>) -> Result<()> {
    let header: Vec<String> = enc
        .column_labels
        .iter()
        .map(|(pos, res)| format!("{pos}:{res}"))
        .collect();
    writeln!(w, "{}", header.join("\t"))?;
    for row in enc.x.rows() {
        let fields: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", fields.join("\t"))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct EncodedSidecar {
    pub n: usize,
    pub positions: Vec<usize>,
    pub group_sizes: Vec<usize>,
    pub dropped_positions: Vec<usize>,
    pub column_labels: Vec<String>,
    pub col_mean: Vec<f64>,
    pub col_sd: Vec<f64>,
}

pub fn encoded_sidecar<F: Scalar>(enc: &EncodedMatrix<F>) -> EncodedSidecar {
    EncodedSidecar {
        n: enc.n(),
        positions: enc.positions.clone(),
        group_sizes: enc.group_sizes(),
        dropped_positions: enc.dropped_positions.clone(),
        column_labels: enc
            .column_labels
            .iter()
            .map(|(pos, res)| format!("{pos}:{res}"))
            .collect(),
        col_mean: enc.col_mean.iter().map(|v| v.to_f64_lossy()).collect(),
        col_sd: enc.col_sd.iter().map(|v| v.to_f64_lossy()).collect(),
    }
}

/// Reproducibility record written next to every output set.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub options: BTreeMap<String, String>,
    pub input_digests: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub version: String,
    pub timings_ms: BTreeMap<String, u128>,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            options: BTreeMap::new(),
            input_digests: BTreeMap::new(),
            seed: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timings_ms: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    pub fn digest_input(&mut self, path: &Path) -> Result<()> {
        let digest = sha256_file(path)?;
        self.input_digests
            .insert(path.display().to_string(), digest);
        Ok(())
    }

    pub fn write(&self, w: &mut impl Write) -> Result<()> {
        serde_json::to_writer_pretty(&mut *w, self)
            .map_err(|e| Error::Io(std::io::Error::new(std::io::ErrorKind::Other, e)))?;
        writeln!(w)?;
        Ok(())
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}
