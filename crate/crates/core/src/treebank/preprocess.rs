use std::collections::HashMap;
use std::fmt;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{RawSentence, RawToken, TokenId};
use crate::tree::LinearizedTree;

/// Annotation scheme of the input, which decides how punctuation is spotted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Universal Dependencies: UPOS `PUNCT`.
    #[default]
    Ud,
    /// HamleDT Prague-style release: coarse tag `Z`.
    Prague,
    /// HamleDT Stanford-style release: coarse tag `Z`.
    Stanford,
    /// Any tag that looks like a punctuation tag or is itself made of punctuation.
    Generic,
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ud" => Ok(Scheme::Ud),
            "prague" => Ok(Scheme::Prague),
            "stanford" => Ok(Scheme::Stanford),
            "generic" => Ok(Scheme::Generic),
            other => Err(format!("unknown annotation scheme `{other}`")),
        }
    }
}

/// Pure predicate over a single token.
#[derive(Debug, Clone)]
pub enum TokenRule {
    Never,
    PosIn(Vec<String>),
    PosMatches(Regex),
    FormMatches(Regex),
    DeprelIn(Vec<String>),
    Any(Vec<TokenRule>),
}

impl TokenRule {
    pub fn matches(&self, token: &RawToken) -> bool {
        match self {
            TokenRule::Never => false,
            TokenRule::PosIn(tags) => tags.contains(&token.pos),
            TokenRule::PosMatches(re) => re.is_match(&token.pos),
            TokenRule::FormMatches(re) => re.is_match(&token.form),
            TokenRule::DeprelIn(rels) => rels.contains(&token.deprel),
            TokenRule::Any(rules) => rules.iter().any(|r| r.matches(token)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PreprocessConfig {
    pub scheme: Scheme,
    pub punct: TokenRule,
    /// Tokens that stand for no word, such as HamleDT null elements.
    pub null_elements: TokenRule,
    pub remove_empty_nodes: bool,
}

impl PreprocessConfig {
    pub fn for_scheme(scheme: Scheme) -> Self {
        let (punct, null_elements) = match scheme {
            Scheme::Ud => (TokenRule::PosIn(vec!["PUNCT".into()]), TokenRule::Never),
            Scheme::Prague | Scheme::Stanford => (
                TokenRule::PosMatches(Regex::new("^Z").expect("valid regex")),
                TokenRule::FormMatches(Regex::new("^NULL").expect("valid regex")),
            ),
            Scheme::Generic => (
                TokenRule::PosMatches(
                    Regex::new(r"^(PUNCT|PUNC|PU|Punc|punct|Z|\p{P}+)$").expect("valid regex"),
                ),
                TokenRule::Never,
            ),
        };
        Self {
            scheme,
            punct,
            null_elements,
            remove_empty_nodes: true,
        }
    }
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self::for_scheme(Scheme::Ud)
    }
}

/// Why a sentence did not yield a tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    Cycle,
    Disconnected,
    MultipleRoots,
    EmptyAfterPreprocessing,
    Malformed,
}

impl ExclusionReason {
    pub const ALL: [ExclusionReason; 5] = [
        ExclusionReason::Cycle,
        ExclusionReason::Disconnected,
        ExclusionReason::MultipleRoots,
        ExclusionReason::EmptyAfterPreprocessing,
        ExclusionReason::Malformed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExclusionReason::Cycle => "cycle",
            ExclusionReason::Disconnected => "disconnected",
            ExclusionReason::MultipleRoots => "multiple_roots",
            ExclusionReason::EmptyAfterPreprocessing => "empty_after_preprocessing",
            ExclusionReason::Malformed => "malformed",
        }
    }
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanToken {
    pub form: String,
    pub pos: String,
    pub deprel: String,
    /// Position of the head among the surviving tokens, 0 for the root.
    pub head: usize,
}

/// A sentence after deletion and reattachment, still carrying its heads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanSentence {
    pub source_id: String,
    pub tokens: Vec<CleanToken>,
}

impl CleanSentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn heads(&self) -> Vec<usize> {
        self.tokens.iter().map(|t| t.head).collect()
    }

    pub fn tree(&self) -> LinearizedTree {
        LinearizedTree::from_heads(&self.heads()).expect("preprocessing yields a tree")
    }

    /// CoNLL-U rendering with only the columns the reader uses filled in.
    pub fn to_conllu(&self) -> String {
        let mut out = format!("# sent_id = {}\n", self.source_id);
        for (i, t) in self.tokens.iter().enumerate() {
            out.push_str(&format!(
                "{}\t{}\t_\t{}\t_\t_\t{}\t{}\t_\t_\n",
                i + 1,
                t.form,
                t.pos,
                t.head,
                t.deprel
            ));
        }
        out.push('\n');
        out
    }
}

pub fn preprocess(
    sentence: &RawSentence,
    cfg: &PreprocessConfig,
) -> Result<LinearizedTree, ExclusionReason> {
    preprocess_sentence(sentence, cfg).map(|s| s.tree())
}

/// Drops ranges, empty nodes, null elements and punctuation, reattaches every
/// survivor to its nearest surviving ancestor and renumbers the survivors.
pub fn preprocess_sentence(
    sentence: &RawSentence,
    cfg: &PreprocessConfig,
) -> Result<CleanSentence, ExclusionReason> {
    let words: Vec<&RawToken> = sentence
        .tokens
        .iter()
        .filter(|t| matches!(t.id, TokenId::Word(_)))
        .collect();
    let index: HashMap<usize, usize> = words
        .iter()
        .enumerate()
        .map(|(i, t)| match t.id {
            TokenId::Word(id) => (id, i),
            _ => unreachable!(),
        })
        .collect();

    // Empty nodes never head basic dependencies, so removing them only shrinks the sentence.
    if !cfg.remove_empty_nodes && sentence.tokens.iter().any(|t| t.is_empty_node()) {
        return Err(ExclusionReason::Malformed);
    }

    let mut head_index = Vec::with_capacity(words.len());
    for t in &words {
        match t.head {
            Some(0) => head_index.push(None),
            Some(h) => match index.get(&h) {
                Some(&i) => head_index.push(Some(i)),
                None => return Err(ExclusionReason::Malformed),
            },
            None => return Err(ExclusionReason::Malformed),
        }
    }

    let deleted: Vec<bool> = words
        .iter()
        .map(|t| cfg.punct.matches(t) || cfg.null_elements.matches(t))
        .collect();

    let mut new_position = vec![0usize; words.len()];
    let mut survivors = Vec::new();
    for (i, &gone) in deleted.iter().enumerate() {
        if !gone {
            survivors.push(i);
            new_position[i] = survivors.len();
        }
    }
    if survivors.is_empty() {
        return Err(ExclusionReason::EmptyAfterPreprocessing);
    }

    let mut tokens = Vec::with_capacity(survivors.len());
    for &i in &survivors {
        let mut head = head_index[i];
        let mut steps = 0;
        while let Some(h) = head {
            if !deleted[h] {
                break;
            }
            steps += 1;
            if steps > words.len() {
                return Err(ExclusionReason::Cycle);
            }
            head = head_index[h];
        }
        tokens.push(CleanToken {
            form: words[i].form.clone(),
            pos: words[i].pos.clone(),
            deprel: words[i].deprel.clone(),
            head: head.map_or(0, |h| new_position[h]),
        });
    }

    let heads: Vec<usize> = tokens.iter().map(|t| t.head).collect();
    check_tree(&heads)?;
    Ok(CleanSentence {
        source_id: sentence.source_id.clone(),
        tokens,
    })
}

/// Single root, every head chain ends at the root.
fn check_tree(heads: &[usize]) -> Result<(), ExclusionReason> {
    let n = heads.len();
    // 0 = unvisited, 1 = on current chain, 2 = reaches root
    let mut state = vec![0u8; n + 1];
    for start in 1..=n {
        let mut chain = Vec::new();
        let mut v = start;
        loop {
            if v == 0 || state[v] == 2 {
                break;
            }
            if state[v] == 1 {
                return Err(ExclusionReason::Cycle);
            }
            state[v] = 1;
            chain.push(v);
            v = heads[v - 1];
        }
        for u in chain {
            state[u] = 2;
        }
    }
    match heads.iter().filter(|&&h| h == 0).count() {
        1 => {}
        0 => return Err(ExclusionReason::Disconnected),
        _ => return Err(ExclusionReason::MultipleRoots),
    }
    if LinearizedTree::from_heads(heads).is_err() {
        return Err(ExclusionReason::Disconnected);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(id: usize, form: &str, pos: &str, head: usize) -> RawToken {
        RawToken {
            id: TokenId::Word(id),
            head: Some(head),
            form: form.into(),
            pos: pos.into(),
            deprel: "dep".into(),
        }
    }

    fn sentence(tokens: Vec<RawToken>) -> RawSentence {
        RawSentence {
            tokens,
            source_id: "s".into(),
            treebank_id: "t".into(),
        }
    }

    #[test]
    fn reattaches_through_punctuation() {
        let s = sentence(vec![
            word(1, "A", "X", 0),
            word(2, ",", "PUNCT", 1),
            word(3, "B", "X", 2),
        ]);
        let clean = preprocess_sentence(&s, &PreprocessConfig::default()).unwrap();
        assert_eq!(clean.heads(), vec![0, 1]);
        assert_eq!(clean.tokens[1].form, "B");
        assert_eq!(clean.tree(), LinearizedTree::new(2, [(1, 2)]).unwrap());
    }

    #[test]
    fn clean_sentence_is_renumbered_identity() {
        let s = sentence(vec![
            word(1, "A", "X", 2),
            word(2, "B", "X", 0),
            word(3, "C", "X", 2),
        ]);
        let tree = preprocess(&s, &PreprocessConfig::default()).unwrap();
        assert_eq!(tree, LinearizedTree::from_heads(&[2, 0, 2]).unwrap());
    }

    #[test]
    fn two_cycle_is_excluded() {
        let s = sentence(vec![word(1, "A", "X", 2), word(2, "B", "X", 1)]);
        assert_eq!(
            preprocess(&s, &PreprocessConfig::default()),
            Err(ExclusionReason::Cycle)
        );
    }

    #[test]
    fn other_exclusions() {
        let cfg = PreprocessConfig::default();
        let roots = sentence(vec![word(1, "A", "X", 0), word(2, "B", "X", 0)]);
        assert_eq!(
            preprocess(&roots, &cfg),
            Err(ExclusionReason::MultipleRoots)
        );
        let punct_only = sentence(vec![word(1, ".", "PUNCT", 0)]);
        assert_eq!(
            preprocess(&punct_only, &cfg),
            Err(ExclusionReason::EmptyAfterPreprocessing)
        );
        let dangling = sentence(vec![word(1, "A", "X", 0), word(2, "B", "X", 7)]);
        assert_eq!(preprocess(&dangling, &cfg), Err(ExclusionReason::Malformed));
    }

    #[test]
    fn hamledt_null_elements() {
        let cfg = PreprocessConfig::for_scheme(Scheme::Prague);
        let s = sentence(vec![
            word(1, "a", "N", 2),
            word(2, "NULL", "V", 0),
            word(3, "b", "N", 2),
            word(4, "c", "V", 3),
            word(5, ".", "Z", 2),
        ]);
        let clean = preprocess_sentence(&s, &cfg).unwrap_err();
        // both dependents of the deleted root become roots
        assert_eq!(clean, ExclusionReason::MultipleRoots);

        let s = sentence(vec![
            word(1, "a", "N", 0),
            word(2, "NULL", "V", 1),
            word(3, "b", "N", 2),
        ]);
        assert_eq!(preprocess_sentence(&s, &cfg).unwrap().heads(), vec![0, 1]);
    }

    #[test]
    fn generic_scheme_spots_symbol_tags() {
        let cfg = PreprocessConfig::for_scheme(Scheme::Generic);
        for tag in ["PUNCT", ",", "-", "Z"] {
            assert!(cfg.punct.matches(&word(1, "x", tag, 0)), "{tag}");
        }
        assert!(!cfg.punct.matches(&word(1, "x", "NOUN", 0)));
    }
}
