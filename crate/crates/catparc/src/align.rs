//! Alignment parsing, rare-residue trimming, and one-hot encoding with
//! per-position column groups.

use std::io::BufRead;
use std::ops::Range;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The 20 amino-acid letters, alphabetical.
pub const AMINO_ACIDS: [char; 20] = [
    'A', 'C', 'D', 'E', 'F', 'G', 'H', 'I', 'K', 'L', 'M', 'N', 'P', 'Q', 'R', 'S', 'T', 'V',
    'W', 'Y',
];

/// Gap symbol.
pub const GAP: char = '-';

pub fn is_amino_acid(c: char) -> bool {
    AMINO_ACIDS.binary_search(&c).is_ok()
}

/// Input format of an aligned sequence file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignmentFormat {
    Fasta,
    Stockholm,
    RawRows,
}

impl std::str::FromStr for AlignmentFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fasta" | "fa" => Ok(AlignmentFormat::Fasta),
            "stockholm" | "sto" => Ok(AlignmentFormat::Stockholm),
            "raw-rows" | "raw" => Ok(AlignmentFormat::RawRows),
            other => Err(Error::Parameter(format!("unknown alignment format: {other}"))),
        }
    }
}

/// Aligned categorical sequences over the 21-symbol alphabet
/// (20 amino acids plus the gap).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub ids: Vec<String>,
    pub sequences: Vec<String>,
    /// Count of unknown residue letters mapped to the gap during parsing.
    pub unknown_mapped: usize,
}

impl Alignment {
    /// Builds an alignment from already-normalized rows, validating lengths
    /// and the alphabet.
    pub fn new(ids: Vec<String>, sequences: Vec<String>) -> Result<Alignment> {
        let mut a = Alignment {
            ids,
            sequences,
            unknown_mapped: 0,
        };
        a.normalize()?;
        Ok(a)
    }

    fn normalize(&mut self) -> Result<()> {
        if self.sequences.is_empty() {
            return Err(Error::EmptyInput);
        }
        let m = self.sequences[0].chars().count();
        if m < 1 {
            return Err(Error::EmptyInput);
        }
        let mut mapped = 0usize;
        for seq in self.sequences.iter_mut() {
            let norm: String = seq
                .chars()
                .map(|c| {
                    let c = c.to_ascii_uppercase();
                    if c == '.' {
                        GAP
                    } else if c == GAP || is_amino_acid(c) {
                        c
                    } else {
                        mapped += 1;
                        GAP
                    }
                })
                .collect();
            if norm.chars().count() != m {
                return Err(Error::Format(format!(
                    "ragged sequence lengths: expected {m}, got {}",
                    norm.chars().count()
                )));
            }
            *seq = norm;
        }
        self.unknown_mapped += mapped;
        Ok(())
    }

    /// Number of sequences.
    pub fn n(&self) -> usize {
        self.sequences.len()
    }

    /// Number of positions.
    pub fn m(&self) -> usize {
        self.sequences.first().map_or(0, |s| s.chars().count())
    }

    /// Symbol at `(sequence, position)`.
    pub fn symbol(&self, seq: usize, pos: usize) -> char {
        self.sequences[seq].as_bytes()[pos] as char
    }
}

/// Parses an alignment from a byte stream in the declared format.
pub fn parse_alignment(input: impl BufRead, format: AlignmentFormat) -> Result<Alignment> {
    match format {
        AlignmentFormat::Fasta => parse_fasta(input),
        AlignmentFormat::Stockholm => parse_stockholm(input),
        AlignmentFormat::RawRows => parse_raw_rows(input),
    }
}

fn parse_fasta(input: impl BufRead) -> Result<Alignment> {
    let mut ids = Vec::new();
    let mut sequences: Vec<String> = Vec::new();
    for line in input.lines() {
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('>') {
            ids.push(header.trim().to_string());
            sequences.push(String::new());
        } else {
            match sequences.last_mut() {
                Some(seq) => seq.push_str(line.trim()),
                None => {
                    return Err(Error::Format(
                        "FASTA sequence data before first header".into(),
                    ))
                }
            }
        }
    }
    Alignment::new(ids, sequences)
}

fn parse_stockholm(input: impl BufRead) -> Result<Alignment> {
    let mut order: Vec<String> = Vec::new();
    let mut seqs: std::collections::HashMap<String, String> = std::collections::HashMap::new();
    for line in input.lines() {
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "//" {
            break;
        }
        let mut parts = line.split_whitespace();
        let name = parts
            .next()
            .ok_or_else(|| Error::Format("malformed Stockholm line".into()))?;
        let seq = parts
            .next()
            .ok_or_else(|| Error::Format(format!("Stockholm line without sequence: {line}")))?;
        let entry = seqs.entry(name.to_string()).or_insert_with(|| {
            order.push(name.to_string());
            String::new()
        });
        entry.push_str(seq);
    }
    let sequences = order.iter().map(|k| seqs[k].clone()).collect();
    Alignment::new(order, sequences)
}

fn parse_raw_rows(input: impl BufRead) -> Result<Alignment> {
    let mut ids = Vec::new();
    let mut sequences = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        ids.push(format!("row{}", i + 1));
        sequences.push(line.to_string());
    }
    Alignment::new(ids, sequences)
}

/// Removes every sequence carrying a rare residue (column proportion below
/// `threshold` among the current sequence set), iterating to a fixed point.
pub fn trim_rare_residues(a: &Alignment, threshold: f64) -> Result<Alignment> {
    if !(0.0..1.0).contains(&threshold) {
        return Err(Error::Parameter(format!(
            "trim threshold must be in [0, 1), got {threshold}"
        )));
    }
    let m = a.m();
    let mut keep: Vec<usize> = (0..a.n()).collect();
    loop {
        let n = keep.len();
        if n == 0 {
            return Err(Error::DegenerateData(
                "trimming removed all sequences".into(),
            ));
        }
        // residue counts per position over the current sequence set
        let mut counts = vec![[0usize; 20]; m];
        for &k in &keep {
            for pos in 0..m {
                let c = a.symbol(k, pos);
                if let Ok(idx) = AMINO_ACIDS.binary_search(&c) {
                    counts[pos][idx] += 1;
                }
            }
        }
        let rare = |pos: usize, idx: usize| {
            let cnt = counts[pos][idx];
            cnt > 0 && (cnt as f64) < threshold * n as f64
        };
        let next: Vec<usize> = keep
            .iter()
            .copied()
            .filter(|&k| {
                !(0..m).any(|pos| {
                    AMINO_ACIDS
                        .binary_search(&a.symbol(k, pos))
                        .map_or(false, |idx| rare(pos, idx))
                })
            })
            .collect();
        if next.len() == keep.len() {
            break;
        }
        keep = next;
    }
    if keep.is_empty() {
        return Err(Error::DegenerateData(
            "trimming removed all sequences".into(),
        ));
    }
    Ok(Alignment {
        ids: keep.iter().map(|&k| a.ids[k].clone()).collect(),
        sequences: keep.iter().map(|&k| a.sequences[k].clone()).collect(),
        unknown_mapped: a.unknown_mapped,
    })
}

/// Drops sequences whose gap fraction exceeds `max_frac`.
pub fn filter_gap_fraction(a: &Alignment, max_frac: f64) -> Result<Alignment> {
    let m = a.m() as f64;
    let keep: Vec<usize> = (0..a.n())
        .filter(|&k| {
            let gaps = a.sequences[k].chars().filter(|&c| c == GAP).count();
            gaps as f64 / m <= max_frac
        })
        .collect();
    if keep.is_empty() {
        return Err(Error::DegenerateData(
            "gap-fraction filter removed all sequences".into(),
        ));
    }
    Ok(Alignment {
        ids: keep.iter().map(|&k| a.ids[k].clone()).collect(),
        sequences: keep.iter().map(|&k| a.sequences[k].clone()).collect(),
        unknown_mapped: a.unknown_mapped,
    })
}

/// Standardized one-hot design matrix with per-position column groups.
#[derive(Debug, Clone)]
pub struct EncodedMatrix<F> {
    /// N x D standardized design matrix.
    pub x: Array2<F>,
    /// Contiguous column ranges, one per retained position, partitioning 0..D.
    pub groups: Vec<Range<usize>>,
    /// Original alignment position for each retained group.
    pub positions: Vec<usize>,
    /// `(original position, residue letter)` per column.
    pub column_labels: Vec<(usize, char)>,
    pub col_mean: Vec<F>,
    pub col_sd: Vec<F>,
    /// Positions reduced to zero retained columns.
    pub dropped_positions: Vec<usize>,
}

impl<F: Scalar> EncodedMatrix<F> {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d_total(&self) -> usize {
        self.x.ncols()
    }

    /// Number of retained positions.
    pub fn m(&self) -> usize {
        self.groups.len()
    }

    /// Group size of retained position `i`.
    pub fn d(&self, i: usize) -> usize {
        self.groups[i].len()
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.len()).collect()
    }

    /// Residue letters for retained position `i`, column order.
    pub fn residues(&self, i: usize) -> Vec<char> {
        self.groups[i]
            .clone()
            .map(|c| self.column_labels[c].1)
            .collect()
    }
}

/// One-hot encodes an alignment and standardizes every retained column.
///
/// Gap columns are never emitted; constant columns (residue present in all
/// or none of the sequences at a position) are dropped before
/// standardization; positions left with zero columns are excluded and
/// recorded in `dropped_positions`. Residues within a position are ordered
/// alphabetically.
pub fn one_hot_encode<F: Scalar>(a: &Alignment) -> Result<EncodedMatrix<F>> {
    let n = a.n();
    let m = a.m();
    if n < 3 {
        return Err(Error::DegenerateData(format!(
            "need at least 3 sequences to encode, got {n}"
        )));
    }

    let mut retained: Vec<(usize, Vec<char>)> = Vec::new();
    let mut dropped_positions = Vec::new();
    for pos in 0..m {
        let mut counts = [0usize; 20];
        for k in 0..n {
            if let Ok(idx) = AMINO_ACIDS.binary_search(&a.symbol(k, pos)) {
                counts[idx] += 1;
            }
        }
        let cols: Vec<char> = AMINO_ACIDS
            .iter()
            .enumerate()
            .filter(|&(idx, _)| counts[idx] >= 1 && counts[idx] <= n - 1)
            .map(|(_, &c)| c)
            .collect();
        if cols.is_empty() {
            dropped_positions.push(pos);
        } else {
            retained.push((pos, cols));
        }
    }
    if retained.is_empty() {
        return Err(Error::DegenerateData(
            "no position has a non-constant residue column".into(),
        ));
    }

    let d_total: usize = retained.iter().map(|(_, cols)| cols.len()).sum();
    let mut x = Array2::<F>::zeros((n, d_total));
    let mut groups = Vec::with_capacity(retained.len());
    let mut positions = Vec::with_capacity(retained.len());
    let mut column_labels = Vec::with_capacity(d_total);
    let mut col_mean = Vec::with_capacity(d_total);
    let mut col_sd = Vec::with_capacity(d_total);

    let n_f = F::from_usize_lossy(n);
    let mut col = 0usize;
    for (pos, cols) in retained {
        let start = col;
        for res in cols {
            let mut count = 0usize;
            for k in 0..n {
                if a.symbol(k, pos) == res {
                    x[[k, col]] = F::one();
                    count += 1;
                }
            }
            // population variance of a 0/1 column is p(1-p)
            let p = F::from_usize_lossy(count) / n_f;
            let sd = (p * (F::one() - p)).sqrt();
            for k in 0..n {
                x[[k, col]] = (x[[k, col]] - p) / sd;
            }
            column_labels.push((pos, res));
            col_mean.push(p);
            col_sd.push(sd);
            col += 1;
        }
        groups.push(start..col);
        positions.push(pos);
    }

    Ok(EncodedMatrix {
        x,
        groups,
        positions,
        column_labels,
        col_mean,
        col_sd,
        dropped_positions,
    })
}
