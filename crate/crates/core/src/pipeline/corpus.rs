use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use super::PipelineError;
use crate::tree::LinearizedTree;
use crate::treebank::{preprocess, ExclusionReason, ParsedTreebank, PreprocessConfig};

/// Preprocessed trees grouped by language, plus what was thrown away.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    languages: BTreeMap<String, Vec<LinearizedTree>>,
    exclusions: BTreeMap<ExclusionReason, u64>,
    parse_errors: u64,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_tree(&mut self, language: &str, tree: LinearizedTree) {
        self.languages
            .entry(language.to_string())
            .or_default()
            .push(tree);
    }

    pub fn add_trees(&mut self, language: &str, trees: impl IntoIterator<Item = LinearizedTree>) {
        self.languages
            .entry(language.to_string())
            .or_default()
            .extend(trees);
    }

    pub fn add_exclusion(&mut self, reason: ExclusionReason) {
        *self.exclusions.entry(reason).or_insert(0) += 1;
    }

    /// Preprocesses every sentence of a parsed treebank into `language`.
    pub fn add_treebank(
        &mut self,
        language: &str,
        treebank: &ParsedTreebank,
        cfg: &PreprocessConfig,
    ) {
        self.parse_errors += treebank.errors.len() as u64;
        let trees = self.languages.entry(language.to_string()).or_default();
        for sentence in &treebank.sentences {
            match preprocess(sentence, cfg) {
                Ok(tree) => trees.push(tree),
                Err(reason) => *self.exclusions.entry(reason).or_insert(0) += 1,
            }
        }
    }

    /// Languages in lexicographic order.
    pub fn languages(&self) -> impl Iterator<Item = (&str, &[LinearizedTree])> {
        self.languages
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn trees(&self, language: &str) -> Option<&[LinearizedTree]> {
        self.languages.get(language).map(Vec::as_slice)
    }

    pub fn exclusions(&self) -> &BTreeMap<ExclusionReason, u64> {
        &self.exclusions
    }

    pub fn parse_errors(&self) -> u64 {
        self.parse_errors
    }

    pub fn is_empty(&self) -> bool {
        self.languages.values().all(Vec::is_empty)
    }
}

/// Language code of a treebank file: the file name up to the first `_`
/// (`ja_gsd-ud-train.conllu` gives `ja`).
pub fn language_from_path(path: &Path) -> String {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    match stem.split_once('_') {
        Some((lang, _)) if !lang.is_empty() => lang.to_string(),
        _ => stem,
    }
}

/// Language to family map read from `language<TAB>family` lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Families(BTreeMap<String, String>);

impl Families {
    pub fn parse<R: BufRead>(reader: R) -> Result<Self, PipelineError> {
        let mut map = BTreeMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (language, family) =
                line.split_once('\t')
                    .ok_or_else(|| PipelineError::Families {
                        line: i + 1,
                        message: "expected `language<TAB>family`".into(),
                    })?;
            let (language, family) = (language.trim(), family.trim());
            if language.is_empty() || family.is_empty() || family.contains('\t') {
                return Err(PipelineError::Families {
                    line: i + 1,
                    message: "expected exactly two non-empty columns".into(),
                });
            }
            map.insert(language.to_string(), family.to_string());
        }
        Ok(Self(map))
    }

    pub fn family_of(&self, language: &str) -> Option<&str> {
        self.0.get(language).map(String::as_str)
    }

    pub fn insert(&mut self, language: impl Into<String>, family: impl Into<String>) {
        self.0.insert(language.into(), family.into());
    }
}

impl FromIterator<(String, String)> for Families {
    fn from_iter<T: IntoIterator<Item = (String, String)>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn language_codes_from_file_names() {
        assert_eq!(
            language_from_path(Path::new("/x/ja_gsd-ud-train.conllu")),
            "ja"
        );
        assert_eq!(language_from_path(Path::new("hindi.conll")), "hindi");
    }

    #[test]
    fn families_file() {
        let text = "# language\tfamily\nJapanese\tJaponic\n\nBasque\tIsolate\r\n";
        let families = Families::parse(text.as_bytes()).unwrap();
        assert_eq!(families.family_of("Japanese"), Some("Japonic"));
        assert_eq!(families.family_of("Basque"), Some("Isolate"));
        assert_eq!(families.family_of("Latin"), None);
        assert!(matches!(
            Families::parse("Latin Indo-European\n".as_bytes()),
            Err(PipelineError::Families { line: 1, .. })
        ));
    }
}
