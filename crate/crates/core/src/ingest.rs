//! Corpus loading, text cleaning, sentence segmentation, syntactic filtering.
//!
//! Input is a CSV manifest (`doc_id,bank_id,year,path`) pointing at
//! pre-extracted plain-text report files. Segmentation is rule based:
//! a sentence ends at `.`, `!` or `?` followed by whitespace and an
//! uppercase letter or digit, unless the terminator closes a known
//! abbreviation.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::tokenize;

/// One annual report: identity, bank, year, raw narrative text.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub bank_id: String,
    pub year: i32,
    pub text: String,
}

/// A segmented, filtered unit of analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub sentence_id: String,
    pub doc_id: String,
    pub year: i32,
    pub text: String,
    pub token_count: usize,
}

/// Reason a sentence was rejected by [`filter_sentences`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DropReason {
    TooShort,
    TooLong,
    TableLike,
    NoProse,
}

impl std::fmt::Display for DropReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DropReason::TooShort => "TOO_SHORT",
            DropReason::TooLong => "TOO_LONG",
            DropReason::TableLike => "TABLE_LIKE",
            DropReason::NoProse => "NO_PROSE",
        };
        f.write_str(s)
    }
}

/// Thresholds for syntactic filtering.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilterPolicy {
    pub min_tokens: usize,
    pub max_tokens: usize,
    pub max_digit_ratio: f64,
    pub require_lowercase_word: bool,
}

impl Default for FilterPolicy {
    fn default() -> Self {
        FilterPolicy {
            min_tokens: 4,
            max_tokens: 128,
            max_digit_ratio: 0.5,
            require_lowercase_word: true,
        }
    }
}

impl FilterPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.min_tokens < 1 || self.min_tokens > self.max_tokens {
            return Err(Error::InvalidFilterPolicy(format!(
                "need 1 <= min_tokens <= max_tokens, got min={} max={}",
                self.min_tokens, self.max_tokens
            )));
        }
        if !(0.0..=1.0).contains(&self.max_digit_ratio) {
            return Err(Error::InvalidFilterPolicy(format!(
                "max_digit_ratio {} outside [0, 1]",
                self.max_digit_ratio
            )));
        }
        Ok(())
    }
}

/// Terminator-ending tokens that never close a sentence.
pub fn default_abbreviations() -> Vec<String> {
    ["U.S.", "Inc.", "Corp.", "Mr.", "Ms.", "No.", "Fig.", "et al."]
        .into_iter()
        .map(str::to_string)
        .collect()
}

/// One abbreviation per line; blank lines and `#` comments ignored.
pub fn load_abbreviations(path: &Path) -> Result<Vec<String>> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

/// Load documents in manifest order. Text is read as UTF-8 with invalid
/// sequences replaced; relative paths resolve against the manifest directory.
pub fn load_corpus(manifest_path: &Path) -> Result<Vec<Document>> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(false)
        .from_path(manifest_path)
        .map_err(|e| csv_open_error(manifest_path, e))?;
    let headers = reader
        .headers()
        .map_err(|e| csv_open_error(manifest_path, e))?
        .clone();
    let mut col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                path: manifest_path.into(),
                column: name.to_string(),
            })
    };
    let (c_doc, c_bank, c_year, c_path) = (col("doc_id")?, col("bank_id")?, col("year")?, col("path")?);

    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut docs = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (i, record) in reader.records().enumerate() {
        let row = i as u64 + 2; // header is line 1
        let record = record.map_err(|e| Error::MalformedRow {
            path: manifest_path.into(),
            row,
            message: e.to_string(),
        })?;
        let field = |idx: usize| -> Result<&str> {
            record.get(idx).ok_or_else(|| Error::MalformedRow {
                path: manifest_path.into(),
                row,
                message: format!("missing field {idx}"),
            })
        };
        let doc_id = field(c_doc)?.trim().to_string();
        if doc_id.is_empty() {
            return Err(Error::MalformedRow {
                path: manifest_path.into(),
                row,
                message: "empty doc_id".into(),
            });
        }
        if !seen.insert(doc_id.clone()) {
            return Err(Error::DuplicateDocId(doc_id));
        }
        let bank_id = field(c_bank)?.trim().to_string();
        let year: i64 = field(c_year)?.trim().parse().map_err(|_| Error::MalformedRow {
            path: manifest_path.into(),
            row,
            message: format!("year `{}` is not an integer", field(c_year).unwrap_or("")),
        })?;
        if !(1900..=2100).contains(&year) {
            return Err(Error::YearOutOfRange { doc_id, year });
        }
        let rel = field(c_path)?.trim();
        let text_path = base.join(rel);
        let bytes = std::fs::read(&text_path).map_err(|e| Error::io(&text_path, e))?;
        let text = String::from_utf8_lossy(&bytes).into_owned();
        if text.trim().is_empty() {
            return Err(Error::EmptyDocument { doc_id });
        }
        docs.push(Document {
            doc_id,
            bank_id,
            year: year as i32,
            text,
        });
    }
    Ok(docs)
}

fn csv_open_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::InvalidFormat {
            path: path.into(),
            message: format!("{other:?}"),
        },
    }
}

/// Deterministic text cleanup: CR normalization, de-hyphenation across line
/// breaks, non-whitespace control characters stripped, in-line whitespace
/// collapsed to single spaces, line edges trimmed.
pub fn clean_text(raw: &str) -> String {
    let unified = raw.replace("\r\n", "\n").replace('\r', "\n");
    let dehyphenated = unified.replace("-\n", "");
    let stripped: String = dehyphenated
        .chars()
        .filter(|&c| !c.is_control() || c.is_whitespace())
        .collect();
    let lines: Vec<String> = stripped
        .split('\n')
        .map(|line| line.split_whitespace().collect::<Vec<_>>().join(" "))
        .collect();
    // Drop blank lines so repeated cleaning is a fixed point.
    let mut out = lines
        .into_iter()
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join("\n");
    out.shrink_to_fit();
    out
}

/// Split cleaned text into sentences using the default abbreviation list.
pub fn segment_sentences(doc: &Document) -> Vec<Sentence> {
    segment_sentences_with(doc, &default_abbreviations())
}

/// Split at `.`/`!`/`?` + whitespace + uppercase-or-digit, suppressing splits
/// after listed abbreviations. Sentence ids are `{doc_id}:s{index}`.
pub fn segment_sentences_with(doc: &Document, abbreviations: &[String]) -> Vec<Sentence> {
    let chars: Vec<char> = doc.text.chars().collect();
    let n = chars.len();
    let mut boundaries: Vec<usize> = Vec::new(); // index of terminator char

    for i in 0..n {
        if !matches!(chars[i], '.' | '!' | '?') {
            continue;
        }
        let mut j = i + 1;
        if j >= n || !chars[j].is_whitespace() {
            continue;
        }
        while j < n && chars[j].is_whitespace() {
            j += 1;
        }
        if j >= n || !(chars[j].is_uppercase() || chars[j].is_numeric()) {
            continue;
        }
        if chars[i] == '.' && ends_with_abbreviation(&chars[..=i], abbreviations) {
            continue;
        }
        boundaries.push(i);
    }

    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut emit = |range: &[char], sentences: &mut Vec<Sentence>| {
        let text: String = range
            .iter()
            .map(|&c| if c == '\n' { ' ' } else { c })
            .collect::<String>()
            .trim()
            .to_string();
        if text.is_empty() {
            return;
        }
        let token_count = tokenize(&text).len();
        let sentence_id = format!("{}:s{:05}", doc.doc_id, sentences.len());
        sentences.push(Sentence {
            sentence_id,
            doc_id: doc.doc_id.clone(),
            year: doc.year,
            text,
            token_count,
        });
    };
    for &b in &boundaries {
        emit(&chars[start..=b], &mut sentences);
        start = b + 1;
    }
    if start < n {
        emit(&chars[start..], &mut sentences);
    }
    sentences
}

/// True when the text ending at a `.` terminator ends with a listed
/// abbreviation preceded by a word boundary.
fn ends_with_abbreviation(prefix: &[char], abbreviations: &[String]) -> bool {
    for abbrev in abbreviations {
        let abbrev_chars: Vec<char> = abbrev.chars().collect();
        let len = abbrev_chars.len();
        if len == 0 || len > prefix.len() {
            continue;
        }
        if prefix[prefix.len() - len..] != abbrev_chars[..] {
            continue;
        }
        let before = prefix.len() - len;
        if before == 0 || prefix[before - 1].is_whitespace() {
            return true;
        }
    }
    false
}

/// Partition sentences by policy. Reasons are checked in the order
/// TOO_SHORT, TOO_LONG, TABLE_LIKE, NO_PROSE; the first failure wins.
pub fn filter_sentences(
    sentences: Vec<Sentence>,
    policy: &FilterPolicy,
) -> Result<(Vec<Sentence>, Vec<(Sentence, DropReason)>)> {
    policy.validate()?;
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for sentence in sentences {
        match drop_reason(&sentence, policy) {
            None => kept.push(sentence),
            Some(reason) => dropped.push((sentence, reason)),
        }
    }
    Ok((kept, dropped))
}

fn drop_reason(sentence: &Sentence, policy: &FilterPolicy) -> Option<DropReason> {
    if sentence.token_count < policy.min_tokens {
        return Some(DropReason::TooShort);
    }
    if sentence.token_count > policy.max_tokens {
        return Some(DropReason::TooLong);
    }
    if digit_ratio(&sentence.text) > policy.max_digit_ratio {
        return Some(DropReason::TableLike);
    }
    if policy.require_lowercase_word && !sentence.text.chars().any(char::is_lowercase) {
        return Some(DropReason::NoProse);
    }
    None
}

/// Digit characters over non-whitespace characters; 0 for blank text.
pub fn digit_ratio(text: &str) -> f64 {
    let mut digits = 0usize;
    let mut total = 0usize;
    for c in text.chars() {
        if c.is_whitespace() {
            continue;
        }
        total += 1;
        if c.is_ascii_digit() {
            digits += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        digits as f64 / total as f64
    }
}

/// JSONL writer: one object per sentence with keys
/// `sentence_id, doc_id, year, text, token_count`.
pub fn write_sentences_jsonl(path: &Path, sentences: &[Sentence]) -> Result<()> {
    let mut out = Vec::new();
    for sentence in sentences {
        serde_json::to_writer(&mut out, sentence).expect("sentence serializes");
        out.push(b'\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_sentences_jsonl(path: &Path) -> Result<Vec<Sentence>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut sentences = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let sentence: Sentence =
            serde_json::from_str(&line).map_err(|e| Error::MalformedRow {
                path: path.into(),
                row: i as u64 + 1,
                message: e.to_string(),
            })?;
        sentences.push(sentence);
    }
    Ok(sentences)
}

pub fn write_dropped_jsonl(path: &Path, dropped: &[(Sentence, DropReason)]) -> Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        #[serde(flatten)]
        sentence: &'a Sentence,
        reason: DropReason,
    }
    let mut buffer = Vec::new();
    for (sentence, reason) in dropped {
        serde_json::to_writer(
            &mut buffer,
            &Row {
                sentence,
                reason: *reason,
            },
        )
        .expect("dropped row serializes");
        buffer.push(b'\n');
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&buffer).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(text: &str) -> Document {
        Document {
            doc_id: "d1".into(),
            bank_id: "bank".into(),
            year: 2020,
            text: text.into(),
        }
    }

    fn sent(text: &str) -> Sentence {
        Sentence {
            sentence_id: "s".into(),
            doc_id: "d1".into(),
            year: 2020,
            text: text.into(),
            token_count: tokenize(text).len(),
        }
    }

    #[test]
    fn clean_joins_hyphen_line_breaks() {
        assert_eq!(clean_text("finan-\ncial results"), "financial results");
    }

    #[test]
    fn clean_collapses_whitespace() {
        assert_eq!(clean_text("a  b\t c"), "a b c");
    }

    #[test]
    fn clean_strips_control_characters() {
        assert_eq!(clean_text("x\u{7}y"), "xy");
    }

    #[test]
    fn clean_handles_crlf_hyphenation() {
        assert_eq!(clean_text("finan-\r\ncial"), "financial");
    }

    #[test]
    fn segment_splits_on_terminator_before_uppercase() {
        let sentences = segment_sentences(&doc(
            "The bank deployed AI. It improved fraud detection.",
        ));
        assert_eq!(sentences.len(), 2);
        assert_eq!(sentences[0].text, "The bank deployed AI.");
        assert_eq!(sentences[1].text, "It improved fraud detection.");
    }

    #[test]
    fn segment_suppresses_abbreviation_splits() {
        let sentences = segment_sentences(&doc("The U.S. bank grew deposits."));
        assert_eq!(sentences.len(), 1);
        // "U.S. Banks" style: suppression also applies before uppercase.
        let sentences = segment_sentences(&doc("The U.S. Bank grew deposits."));
        assert_eq!(sentences.len(), 1);
    }

    #[test]
    fn segment_single_terminator_is_one_sentence() {
        let sentences = segment_sentences(&doc("Revenue rose 4%."));
        assert_eq!(sentences.len(), 1);
        assert_eq!(sentences[0].text, "Revenue rose 4%.");
    }

    #[test]
    fn segment_splits_before_digits() {
        let sentences = segment_sentences(&doc("Costs fell. 2020 was strong."));
        assert_eq!(sentences.len(), 2);
    }

    #[test]
    fn segment_requires_whitespace_after_terminator() {
        let sentences = segment_sentences(&doc("Version 2.5 shipped to clients everywhere."));
        assert_eq!(sentences.len(), 1);
    }

    #[test]
    fn segment_carries_metadata_and_token_counts() {
        let sentences = segment_sentences(&doc("Alpha beta gamma. Delta epsilon."));
        assert_eq!(sentences[0].doc_id, "d1");
        assert_eq!(sentences[0].year, 2020);
        assert_eq!(sentences[0].token_count, 3);
        assert_eq!(sentences[1].token_count, 2);
        assert_eq!(sentences[0].sentence_id, "d1:s00000");
        assert_eq!(sentences[1].sentence_id, "d1:s00001");
    }

    #[test]
    fn segment_et_al_is_suppressed() {
        let sentences = segment_sentences(&doc("See Smith et al. For details see notes."));
        assert_eq!(sentences.len(), 1);
    }

    #[test]
    fn filter_reasons_match_policy() {
        let policy = FilterPolicy::default();
        let (kept, dropped) = filter_sentences(
            vec![
                sent("Yes."),
                sent("12 34 56 78 90"),
                sent("The bank expanded its retail deposit franchise this year."),
                sent("TOTAL ASSETS AND LIABILITIES REVIEW"),
            ],
            &policy,
        )
        .unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(dropped.len(), 3);
        assert_eq!(dropped[0].1, DropReason::TooShort);
        assert_eq!(dropped[1].1, DropReason::TableLike);
        assert_eq!(dropped[2].1, DropReason::NoProse);
    }

    #[test]
    fn filter_too_long() {
        let long = vec!["word"; 200].join(" ");
        let (_, dropped) = filter_sentences(vec![sent(&long)], &FilterPolicy::default()).unwrap();
        assert_eq!(dropped[0].1, DropReason::TooLong);
    }

    #[test]
    fn filter_rejects_invalid_policy() {
        let policy = FilterPolicy {
            min_tokens: 10,
            max_tokens: 4,
            ..FilterPolicy::default()
        };
        assert!(matches!(
            filter_sentences(vec![], &policy),
            Err(Error::InvalidFilterPolicy(_))
        ));
    }

    #[test]
    fn load_corpus_reads_manifest_rows_in_order() {
        let dir = tempfile::tempdir().unwrap();
        for (name, text) in [("a.txt", "Alpha bank text."), ("b.txt", "Beta bank text."), ("c.txt", "Gamma bank text.")] {
            std::fs::write(dir.path().join(name), text).unwrap();
        }
        let manifest = dir.path().join("manifest.csv");
        std::fs::write(
            &manifest,
            "doc_id,bank_id,year,path\nA2020,A,2020,a.txt\nB2021,B,2021,b.txt\nC2022,C,2022,c.txt\n",
        )
        .unwrap();
        let docs = load_corpus(&manifest).unwrap();
        assert_eq!(docs.len(), 3);
        assert_eq!(docs[0].doc_id, "A2020");
        assert_eq!(docs[1].bank_id, "B");
        assert_eq!(docs[2].year, 2022);
        assert_eq!(docs[0].text, "Alpha bank text.");
    }

    #[test]
    fn load_corpus_rejects_duplicate_doc_id() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.txt"), "Some text.").unwrap();
        let manifest = dir.path().join("manifest.csv");
        std::fs::write(
            &manifest,
            "doc_id,bank_id,year,path\nX,A,2020,a.txt\nX,B,2021,a.txt\n",
        )
        .unwrap();
        match load_corpus(&manifest).unwrap_err() {
            Error::DuplicateDocId(id) => assert_eq!(id, "X"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn load_corpus_reports_row_numbers() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.txt"), "Some text.").unwrap();
        let manifest = dir.path().join("manifest.csv");
        std::fs::write(
            &manifest,
            "doc_id,bank_id,year,path\nX,A,not_a_year,a.txt\n",
        )
        .unwrap();
        match load_corpus(&manifest).unwrap_err() {
            Error::MalformedRow { row, .. } => assert_eq!(row, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn load_corpus_rejects_out_of_range_year() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.txt"), "Some text.").unwrap();
        let manifest = dir.path().join("manifest.csv");
        std::fs::write(&manifest, "doc_id,bank_id,year,path\nX,A,1850,a.txt\n").unwrap();
        assert!(matches!(
            load_corpus(&manifest).unwrap_err(),
            Error::YearOutOfRange { year: 1850, .. }
        ));
    }

    #[test]
    fn jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sentences.jsonl");
        let sentences = segment_sentences(&doc("One sentence here. Another sentence there."));
        write_sentences_jsonl(&path, &sentences).unwrap();
        let loaded = read_sentences_jsonl(&path).unwrap();
        assert_eq!(loaded, sentences);
    }

    proptest! {
        // clean_text is idempotent.
        #[test]
        fn clean_is_idempotent(raw in "\\PC{0,200}") {
            let once = clean_text(&raw);
            prop_assert_eq!(clean_text(&once), once);
        }

        // Every non-whitespace character of cleaned text lands in exactly
        // one sentence.
        #[test]
        fn segmentation_is_total(raw in "[A-Za-z0-9 .!?\n]{0,200}") {
            let cleaned = clean_text(&raw);
            let d = Document { doc_id: "p".into(), bank_id: "b".into(), year: 2020, text: cleaned.clone() };
            let sentences = segment_sentences(&d);
            let joined: String = sentences.iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join(" ");
            let strip = |s: &str| s.chars().filter(|c| !c.is_whitespace()).collect::<String>();
            prop_assert_eq!(strip(&joined), strip(&cleaned));
        }

        // Filtering partitions its input.
        #[test]
        fn filter_partitions_input(texts in proptest::collection::vec("[a-zA-Z0-9 ]{0,40}", 0..20)) {
            let input: Vec<Sentence> = texts.iter().map(|t| sent(t)).collect();
            let (kept, dropped) = filter_sentences(input.clone(), &FilterPolicy::default()).unwrap();
            prop_assert_eq!(kept.len() + dropped.len(), input.len());
            let mut reassembled: Vec<String> = kept.iter().map(|s| s.text.clone())
                .chain(dropped.iter().map(|(s, _)| s.text.clone())).collect();
            reassembled.sort();
            let mut expected: Vec<String> = input.iter().map(|s| s.text.clone()).collect();
            expected.sort();
            prop_assert_eq!(reassembled, expected);
        }
    }
}
