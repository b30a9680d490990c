//! CoNLL-U / CoNLL-X reading.
//!
//! Only the id, form, part-of-speech, head and relation columns are kept.
//! Sentences containing a malformed line are skipped and reported; parsing
//! carries on with the next sentence.

mod preprocess;

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use preprocess::{
    preprocess, preprocess_sentence, CleanSentence, CleanToken, ExclusionReason, PreprocessConfig,
    Scheme, TokenRule,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TokenId {
    Word(usize),
    /// Multiword range line such as `3-4`.
    Range(usize, usize),
    /// Empty node such as `5.1`.
    Empty(usize, usize),
}

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenId::Word(i) => write!(f, "{i}"),
            TokenId::Range(a, b) => write!(f, "{a}-{b}"),
            TokenId::Empty(a, b) => write!(f, "{a}.{b}"),
        }
    }
}

impl FromStr for TokenId {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |t: &str| t.parse::<usize>().map_err(|_| ());
        if let Some((a, b)) = s.split_once('-') {
            Ok(TokenId::Range(num(a)?, num(b)?))
        } else if let Some((a, b)) = s.split_once('.') {
            Ok(TokenId::Empty(num(a)?, num(b)?))
        } else {
            match num(s)? {
                0 => Err(()),
                i => Ok(TokenId::Word(i)),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawToken {
    pub id: TokenId,
    /// `None` for range lines and empty nodes, whose head column is `_`.
    pub head: Option<usize>,
    pub form: String,
    pub pos: String,
    pub deprel: String,
}

impl RawToken {
    pub fn is_empty_node(&self) -> bool {
        matches!(self.id, TokenId::Empty(..))
    }

    pub fn is_range_token(&self) -> bool {
        matches!(self.id, TokenId::Range(..))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawSentence {
    pub tokens: Vec<RawToken>,
    pub source_id: String,
    pub treebank_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TreebankFormat {
    #[default]
    Conllu,
    Conllx,
}

impl FromStr for TreebankFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "conllu" => Ok(TreebankFormat::Conllu),
            "conllx" | "conll" => Ok(TreebankFormat::Conllx),
            other => Err(format!("unknown treebank format `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{treebank}:{line}: {message}")]
pub struct ParseError {
    pub treebank: String,
    pub line: usize,
    pub message: String,
}

/// Sentences read from one treebank, plus the sentences that had to be skipped.
#[derive(Debug, Clone, Default)]
pub struct ParsedTreebank {
    pub sentences: Vec<RawSentence>,
    pub errors: Vec<ParseError>,
}

pub fn parse_treebank<R: BufRead>(
    reader: R,
    format: TreebankFormat,
    treebank_id: &str,
) -> io::Result<ParsedTreebank> {
    let mut out = ParsedTreebank::default();
    let mut block = SentenceBlock::default();
    let mut ordinal = 0;

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() {
            block.finish(&mut out, &mut ordinal, treebank_id);
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(id) = comment.trim().strip_prefix("sent_id") {
                block.sent_id = Some(id.trim_start_matches([' ', '=']).trim().to_string());
            }
            continue;
        }
        if block.error.is_some() {
            continue;
        }
        let token =
            parse_token_line(trimmed, format).and_then(|token| match (token.id, block.last_word) {
                (TokenId::Word(id), Some(last)) if id <= last => {
                    Err(format!("token id {id} does not follow {last}"))
                }
                _ => Ok(token),
            });
        match token {
            Ok(token) => {
                if let TokenId::Word(id) = token.id {
                    block.last_word = Some(id);
                }
                block.tokens.push(token);
            }
            Err(message) => {
                out.errors.push(ParseError {
                    treebank: treebank_id.to_string(),
                    line: line_no,
                    message,
                });
                block.error = Some(line_no);
            }
        }
    }
    block.finish(&mut out, &mut ordinal, treebank_id);
    Ok(out)
}

#[derive(Default)]
struct SentenceBlock {
    tokens: Vec<RawToken>,
    sent_id: Option<String>,
    last_word: Option<usize>,
    error: Option<usize>,
}

impl SentenceBlock {
    fn finish(&mut self, out: &mut ParsedTreebank, ordinal: &mut usize, treebank_id: &str) {
        let block = std::mem::take(self);
        if block.tokens.is_empty() && block.error.is_none() {
            return;
        }
        *ordinal += 1;
        if block.error.is_some() {
            return;
        }
        out.sentences.push(RawSentence {
            tokens: block.tokens,
            source_id: block.sent_id.unwrap_or_else(|| ordinal.to_string()),
            treebank_id: treebank_id.to_string(),
        });
    }
}

fn parse_token_line(line: &str, format: TreebankFormat) -> Result<RawToken, String> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(format!(
            "expected 10 tab-separated columns, found {}",
            cols.len()
        ));
    }
    let id: TokenId = cols[0]
        .parse()
        .map_err(|_| format!("invalid token id `{}`", cols[0]))?;
    if format == TreebankFormat::Conllx && !matches!(id, TokenId::Word(_)) {
        return Err(format!("CoNLL-X does not allow token id `{id}`"));
    }
    let head = match (id, cols[6]) {
        (TokenId::Word(_), h) => {
            let head = h
                .parse::<usize>()
                .map_err(|_| format!("invalid head `{h}`"))?;
            if TokenId::Word(head) == id {
                return Err(format!("token {id} is its own head"));
            }
            Some(head)
        }
        (_, "_") => None,
        (_, h) => Some(
            h.parse::<usize>()
                .map_err(|_| format!("invalid head `{h}`"))?,
        ),
    };
    Ok(RawToken {
        id,
        head,
        form: cols[1].to_string(),
        pos: cols[3].to_string(),
        deprel: cols[7].to_string(),
    })
}

/// Treebank files under `path`: the file itself, or every `*.conllu` /
/// `*.conll` below a directory, in sorted order.
pub fn collect_treebank_files(path: &Path) -> io::Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    if !path.is_dir() {
        return Err(io::Error::new(
            io::ErrorKind::NotFound,
            format!("{} does not exist", path.display()),
        ));
    }
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(path).sort_by_file_name() {
        let entry = entry.map_err(io::Error::other)?;
        let is_treebank = entry
            .path()
            .extension()
            .is_some_and(|ext| ext == "conllu" || ext == "conll");
        if entry.file_type().is_file() && is_treebank {
            files.push(entry.into_path());
        }
    }
    Ok(files)
}

pub fn parse_treebank_file(path: &Path, format: TreebankFormat) -> io::Result<ParsedTreebank> {
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_treebank(BufReader::new(File::open(path)?), format, &id)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> ParsedTreebank {
        parse_treebank(text.as_bytes(), TreebankFormat::Conllu, "test").unwrap()
    }

    fn line(id: &str, form: &str, pos: &str, head: &str) -> String {
        format!("{id}\t{form}\t_\t{pos}\t_\t_\t{head}\tdep\t_\t_\n")
    }

    #[test]
    fn three_token_sentence() {
        let text = [
            line("1", "A", "X", "2"),
            line("2", "B", "X", "0"),
            line("3", "C", "X", "2"),
        ]
        .concat();
        let parsed = parse(&text);
        assert!(parsed.errors.is_empty());
        let sentence = &parsed.sentences[0];
        let ids: Vec<_> = sentence.tokens.iter().map(|t| t.id).collect();
        assert_eq!(
            ids,
            vec![TokenId::Word(1), TokenId::Word(2), TokenId::Word(3)]
        );
        let heads: Vec<_> = sentence.tokens.iter().map(|t| t.head).collect();
        assert_eq!(heads, vec![Some(2), Some(0), Some(2)]);
        assert_eq!(sentence.source_id, "1");
    }

    #[test]
    fn range_and_empty_lines_are_flagged() {
        let text = [
            "# sent_id = s1\n".to_string(),
            "1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n".to_string(),
            line("1", "de", "ADP", "0"),
            line("2", "el", "DET", "1"),
            "2.1\tx\t_\tX\t_\t_\t_\t_\t1:dep\t_\n".to_string(),
        ]
        .concat();
        let parsed = parse(&text);
        let sentence = &parsed.sentences[0];
        assert_eq!(sentence.source_id, "s1");
        assert!(sentence.tokens[0].is_range_token());
        assert!(sentence.tokens[3].is_empty_node());
        assert_eq!(sentence.tokens[3].head, None);
    }

    #[test]
    fn blank_lines_separate_sentences() {
        let text = [
            line("1", "A", "X", "0"),
            "\n".into(),
            line("1", "B", "X", "0"),
            "\n\n".into(),
        ]
        .concat();
        assert_eq!(parse(&text).sentences.len(), 2);
    }

    #[test]
    fn malformed_sentence_is_skipped() {
        let text = [
            line("1", "A", "X", "0"),
            "\n".into(),
            line("1", "B", "X", "0"),
            "2\tC\t_\tX\n".into(),
            "\n".into(),
            line("1", "D", "X", "x"),
            "\n".into(),
            line("1", "E", "X", "0"),
        ]
        .concat();
        let parsed = parse(&text);
        let forms: Vec<_> = parsed
            .sentences
            .iter()
            .map(|s| s.tokens[0].form.as_str())
            .collect();
        assert_eq!(forms, vec!["A", "E"]);
        assert_eq!(parsed.sentences[1].source_id, "4");
        let lines: Vec<_> = parsed.errors.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![4, 6]);
    }

    #[test]
    fn conllx_rejects_ranges() {
        let text = "1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n";
        let parsed = parse_treebank(text.as_bytes(), TreebankFormat::Conllx, "x").unwrap();
        assert!(parsed.sentences.is_empty());
        assert_eq!(parsed.errors.len(), 1);
    }

    #[test]
    fn out_of_order_ids() {
        let text = [line("2", "A", "X", "0"), line("1", "B", "X", "2")].concat();
        let parsed = parse(&text);
        assert!(parsed.sentences.is_empty());
        assert_eq!(parsed.errors[0].line, 2);
    }
}
