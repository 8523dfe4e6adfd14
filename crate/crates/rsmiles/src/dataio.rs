//! Reaction-dataset ingestion, cleaning, and token-file emission.
//!
//! Input rows hold one reaction string `reactants>reagents>products` each,
//! either as plain lines or as CSV rows with `id`/`class`/`reaction_smiles`
//! columns. [`clean`] expands multi-product rows one reaction per product
//! and drops rows that cannot enter the pipeline, counting every decision in
//! a [`CleanReport`]. [`write_pairs`] emits the space-separated token files
//! consumed by sequence models.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::align::AlignedPair;
use crate::molgraph::{split_fragments, Molecule, Reaction};
use crate::smiles::{parse, SmilesError};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error(transparent)]
    Smiles(#[from] SmilesError),
}

/// One raw dataset row, prior to parsing and cleaning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    /// 1-based source row number (data rows for CSV, physical lines
    /// otherwise).
    pub line_no: usize,
    /// `reactants>reagents>products`; the reagents segment may be empty.
    pub reaction_smiles: String,
    pub class_label: Option<String>,
    pub id: Option<String>,
}

/// Input file layout accepted by [`read_dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DatasetFormat {
    /// One reaction string per line; blank lines are skipped.
    #[default]
    Lines,
    /// Header-driven CSV with a `reaction_smiles` column (a column whose
    /// header contains `>` is accepted as an alias) and optional `id` and
    /// `class` columns.
    Csv,
}

/// Whether reagents stay in their own segment or join the reactants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReagentMode {
    /// Keep reagents separate; they never receive alignment roots.
    #[default]
    Separated,
    /// Fold reagent molecules into the reactant list.
    Mixed,
}

/// Outcome counts of [`clean`]. `kept` plus the drop counters equals the
/// expanded record count: the input rows plus `duplicated_multiproduct`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CleanReport {
    pub kept: usize,
    /// Extra records created by splitting multi-product rows.
    pub duplicated_multiproduct: usize,
    pub dropped_no_product: usize,
    pub dropped_single_ion: usize,
    pub dropped_parse_error: usize,
}

impl CleanReport {
    /// Total records after multi-product expansion.
    pub fn expanded(&self) -> usize {
        self.kept + self.dropped_no_product + self.dropped_single_ion + self.dropped_parse_error
    }
}

impl std::fmt::Display for CleanReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "kept                     {}", self.kept)?;
        writeln!(f, "duplicated_multiproduct  {}", self.duplicated_multiproduct)?;
        writeln!(f, "dropped_no_product       {}", self.dropped_no_product)?;
        writeln!(f, "dropped_single_ion       {}", self.dropped_single_ion)?;
        write!(f, "dropped_parse_error      {}", self.dropped_parse_error)
    }
}

/// Split at `sep` occurrences outside square brackets.
fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth = depth.saturating_sub(1),
            c if c == sep && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

/// Split a reaction string into its three segments, requiring exactly two
/// `>` separators outside brackets.
pub fn split_reaction(s: &str) -> Option<(&str, &str, &str)> {
    match split_top_level(s, '>')[..] {
        [reactants, reagents, products] => Some((reactants, reagents, products)),
        _ => None,
    }
}

fn record_from_line(line_no: usize, reaction_smiles: &str) -> Result<RawRecord, DataError> {
    if split_reaction(reaction_smiles).is_none() {
        return Err(DataError::Format {
            line: line_no,
            reason: format!(
                "expected exactly two '>' separators outside brackets, got {:?}",
                reaction_smiles
            ),
        });
    }
    Ok(RawRecord {
        line_no,
        reaction_smiles: reaction_smiles.to_string(),
        class_label: None,
        id: None,
    })
}

fn read_lines(reader: impl Read) -> Result<Vec<RawRecord>, DataError> {
    let mut records = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        records.push(record_from_line(i + 1, trimmed)?);
    }
    Ok(records)
}

fn read_csv(reader: impl Read) -> Result<Vec<RawRecord>, DataError> {
    let mut csv_reader = csv::Reader::from_reader(reader);
    let headers = csv_reader
        .headers()
        .map_err(|e| DataError::Format {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let reaction_col = find("reaction_smiles")
        .or_else(|| headers.iter().position(|h| h.contains('>')))
        .ok_or_else(|| DataError::Format {
            line: 1,
            reason: "no reaction_smiles column in the CSV header".to_string(),
        })?;
    let id_col = find("id");
    let class_col = find("class");

    let mut records = Vec::new();
    for (i, row) in csv_reader.records().enumerate() {
        let line_no = i + 1;
        let row = row.map_err(|e| DataError::Format {
            line: line_no,
            reason: e.to_string(),
        })?;
        let reaction_smiles = row.get(reaction_col).ok_or_else(|| DataError::Format {
            line: line_no,
            reason: "row is shorter than the header".to_string(),
        })?;
        let mut record = record_from_line(line_no, reaction_smiles.trim())?;
        record.id = id_col.and_then(|c| row.get(c)).map(str::to_string);
        record.class_label = class_col.and_then(|c| row.get(c)).map(str::to_string);
        records.push(record);
    }
    Ok(records)
}

/// Read a dataset file into raw records. Row numbers in errors are 1-based
/// (counting data rows for CSV).
pub fn read_dataset(path: &Path, format: DatasetFormat) -> Result<Vec<RawRecord>, DataError> {
    let file = File::open(path)?;
    match format {
        DatasetFormat::Lines => read_lines(file),
        DatasetFormat::Csv => read_csv(file),
    }
}

fn parse_side(segment: &str) -> Result<Vec<Molecule>, SmilesError> {
    if segment.is_empty() {
        return Ok(Vec::new());
    }
    Ok(split_fragments(&parse(segment)?))
}

fn is_single_ion(reactants: &[Molecule]) -> bool {
    let [only] = reactants else {
        return false;
    };
    let heavy = only.atoms().iter().filter(|a| a.is_heavy()).count();
    let charge: i32 = only.atoms().iter().map(|a| i32::from(a.charge)).sum();
    heavy == 1 && charge != 0
}

/// Parse and filter raw records into reactions with exactly one product
/// each.
///
/// Multi-product rows become one record per product, sharing the reactant
/// and reagent sides. A record is dropped when its product list is empty,
/// when any segment fails to parse, or when the reactant side is a single
/// one-heavy-atom fragment with net charge (a bare ion). Failures are
/// counted, never fatal.
pub fn clean(records: &[RawRecord], mode: ReagentMode) -> (Vec<Reaction>, CleanReport) {
    let mut kept = Vec::new();
    let mut report = CleanReport::default();
    for record in records {
        let Some((reactant_seg, reagent_seg, product_seg)) =
            split_reaction(&record.reaction_smiles)
        else {
            report.dropped_parse_error += 1;
            continue;
        };
        let product_pieces: Vec<&str> = if product_seg.is_empty() {
            Vec::new()
        } else {
            split_top_level(product_seg, '.')
        };
        if product_pieces.is_empty() {
            report.dropped_no_product += 1;
            continue;
        }
        report.duplicated_multiproduct += product_pieces.len() - 1;

        let sides = parse_side(reactant_seg).and_then(|r| Ok((r, parse_side(reagent_seg)?)));
        let Ok((mut reactants, mut reagents)) = sides else {
            report.dropped_parse_error += product_pieces.len();
            continue;
        };
        if mode == ReagentMode::Mixed {
            reactants.append(&mut reagents);
        }
        for piece in product_pieces {
            let Ok(product) = parse(piece) else {
                report.dropped_parse_error += 1;
                continue;
            };
            if is_single_ion(&reactants) {
                report.dropped_single_ion += 1;
                continue;
            }
            kept.push(Reaction {
                reactants: reactants.clone(),
                reagents: reagents.clone(),
                products: vec![product],
                source_id: record.id.clone(),
            });
            report.kept += 1;
        }
    }
    debug_assert_eq!(
        report.expanded(),
        records.len() + report.duplicated_multiproduct,
        "every expanded record must be kept or counted as dropped"
    );
    (kept, report)
}

/// Write aligned pairs as parallel token files: line `i` of the source file
/// holds the space-joined tokens of pair `i`'s source, and likewise for the
/// target file. Files are UTF-8 with LF endings and end with a newline when
/// nonempty.
pub fn write_pairs(
    pairs: &[AlignedPair],
    src_path: &Path,
    tgt_path: &Path,
) -> Result<(), DataError> {
    let mut src = BufWriter::new(File::create(src_path)?);
    let mut tgt = BufWriter::new(File::create(tgt_path)?);
    for pair in pairs {
        writeln!(src, "{}", pair.source_tokens()?)?;
        writeln!(tgt, "{}", pair.target_tokens()?)?;
    }
    src.flush()?;
    tgt.flush()?;
    Ok(())
}
