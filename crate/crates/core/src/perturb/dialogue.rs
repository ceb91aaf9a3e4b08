//! Dialogue pseudo-data: naturalness, coherence, engagingness negatives and
//! groundedness positive/negative pairs.

use std::collections::HashMap;
use std::str::FromStr;

use rand::Rng;

use crate::corpus::{sentence_texts, DialogueRecord};
use crate::text::{normalize_whitespace, tokenize};

use super::{fluency_negative, Corruption, PerturbConfig, PerturbError};

const MAX_ATTEMPTS: usize = 24;

const STOPWORDS: &[&str] = &[
    "the", "and", "you", "your", "are", "was", "were", "that", "this", "have", "has", "had", "for",
    "not", "but", "with", "what", "how", "did", "does", "like", "they", "them", "their", "there",
    "its", "just", "about", "from", "know", "yes", "yeah", "really", "very", "much", "some", "all",
    "can", "will", "would", "could", "should", "any", "who", "why", "when", "where", "which", "lol",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DialogueDimension {
    Naturalness,
    Coherence,
    Engagingness,
}

impl FromStr for DialogueDimension {
    type Err = PerturbError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naturalness" => Ok(Self::Naturalness),
            "coherence" => Ok(Self::Coherence),
            "engagingness" => Ok(Self::Engagingness),
            other => Err(PerturbError::UnknownDimension { task: "dialogue".into(), dimension: other.into() }),
        }
    }
}

/// Produces a dull reply conditioned on a single utterance.
pub trait DullResponseProvider: Send + Sync {
    fn name(&self) -> &str;
    fn generate(&self, last_turn: &str) -> Result<String, String>;
}

/// Offline stand-in: a fixed template around the most frequent content word
/// of the last turn.
#[derive(Debug, Clone, Copy, Default)]
pub struct DullStub;

impl DullResponseProvider for DullStub {
    fn name(&self) -> &str {
        "dull-stub"
    }

    fn generate(&self, last_turn: &str) -> Result<String, String> {
        let tokens = tokenize(last_turn);
        let mut counts: HashMap<&str, (usize, usize)> = HashMap::new();
        for (pos, t) in tokens.iter().enumerate() {
            if t.len() < 3 || STOPWORDS.contains(&t.as_str()) {
                continue;
            }
            counts.entry(t.as_str()).or_insert((0, pos)).0 += 1;
        }
        let top = counts
            .into_iter()
            .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.1 .1.cmp(&a.1 .1)))
            .map(|(t, _)| t);
        Ok(match top {
            Some(word) => format!("i don't know much about {word}."),
            None => "i don't know.".to_string(),
        })
    }
}

/// Rewrites a sentence while keeping its content.
pub trait ParaphraseProvider: Send + Sync {
    fn name(&self) -> &str;
    fn paraphrase(&self, sentence: &str) -> Result<String, String>;
}

const SYNONYMS: &[(&str, &str)] = &[
    ("first", "initial"), ("big", "large"), ("large", "big"), ("small", "little"), ("fast", "quick"),
    ("quick", "fast"), ("begin", "start"), ("start", "begin"), ("started", "began"), ("began", "started"),
    ("buy", "purchase"), ("bought", "purchased"), ("famous", "well-known"), ("movie", "film"),
    ("film", "movie"), ("show", "program"), ("made", "created"), ("created", "made"), ("built", "constructed"),
    ("house", "home"), ("car", "automobile"), ("children", "kids"), ("kids", "children"), ("about", "around"),
    ("also", "too"), ("many", "numerous"), ("often", "frequently"), ("only", "just"), ("called", "named"),
    ("named", "called"), ("said", "stated"), ("help", "assist"), ("helped", "assisted"), ("use", "utilize"),
    ("used", "utilized"), ("got", "received"), ("very", "extremely"), ("huge", "enormous"), ("old", "aged"),
    ("world", "globe"), ("job", "occupation"), ("money", "funds"), ("country", "nation"), ("city", "town"),
];

/// Deterministic fallback: substitutes the first word with a listed synonym
/// and swaps the two halves of a sentence split by a single comma.
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleParaphraser;

impl RuleParaphraser {
    fn substitute(sentence: &str) -> Option<String> {
        let words: Vec<&str> = sentence.split(' ').collect();
        for (i, w) in words.iter().enumerate() {
            let core = w.trim_matches(|c: char| !c.is_alphanumeric());
            if let Some((_, syn)) = SYNONYMS.iter().find(|(k, _)| *k == core) {
                let mut out: Vec<String> = words.iter().map(|s| s.to_string()).collect();
                out[i] = w.replacen(core, syn, 1);
                return Some(out.join(" "));
            }
        }
        None
    }

    fn reorder(sentence: &str) -> Option<String> {
        if sentence.matches(", ").count() != 1 {
            return None;
        }
        let (head, tail) = sentence.split_once(", ")?;
        let end = tail.trim_end_matches(['.', '!', '?']);
        let terminator = &tail[end.len()..];
        if head.split(' ').count() < 2 || end.split(' ').count() < 2 {
            return None;
        }
        Some(format!("{end}, {}{terminator}", lowercase_first(head)))
    }
}

fn lowercase_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if chars.clone().next().is_some_and(|n| n.is_lowercase()) => c.to_lowercase().chain(chars).collect(),
        _ => s.to_string(),
    }
}

impl ParaphraseProvider for RuleParaphraser {
    fn name(&self) -> &str {
        "paraphrase-rules"
    }

    fn paraphrase(&self, sentence: &str) -> Result<String, String> {
        let sentence = normalize_whitespace(sentence);
        let substituted = Self::substitute(&sentence).unwrap_or_else(|| sentence.clone());
        Ok(Self::reorder(&substituted).unwrap_or(substituted))
    }
}

/// Negative response for one dialogue dimension.
pub fn dialogue_negative<R: Rng + ?Sized>(
    record: &DialogueRecord,
    dimension: DialogueDimension,
    pool: &[DialogueRecord],
    generator: Option<&dyn DullResponseProvider>,
    cfg: &PerturbConfig,
    rng: &mut R,
) -> Result<Corruption, PerturbError> {
    let gold = normalize_whitespace(&record.gold_response);
    match dimension {
        DialogueDimension::Naturalness => {
            let mut c = fluency_negative(&gold, cfg.lambda_dialog, rng)?;
            c.source_ids = vec![record.id.clone()];
            Ok(c)
        }
        DialogueDimension::Coherence => {
            if pool.len() < 2 {
                return Err(PerturbError::PoolTooSmall(format!("coherence needs 2 dialogues, got {}", pool.len())));
            }
            let others: Vec<&DialogueRecord> = pool
                .iter()
                .filter(|d| d.id != record.id && normalize_whitespace(&d.gold_response) != gold)
                .collect();
            if others.is_empty() {
                return Err(PerturbError::PoolTooSmall(format!("no other response differs from {}", record.id)));
            }
            let other = others[rng.random_range(0..others.len())];
            Ok(Corruption::new(normalize_whitespace(&other.gold_response), "coherence-other-response")
                .with_sources(vec![record.id.clone(), other.id.clone()]))
        }
        DialogueDimension::Engagingness => {
            let stub = DullStub;
            let generator = generator.unwrap_or(&stub);
            let last = record.history.last().map(String::as_str).unwrap_or_default();
            let text = generator
                .generate(last)
                .map_err(|message| PerturbError::Generator { id: record.id.clone(), message })?;
            let mut text = normalize_whitespace(&text);
            if text == gold || text.is_empty() {
                text = "ok.".to_string();
                if text == gold {
                    text = "i see.".to_string();
                }
            }
            Ok(Corruption::new(text, generator.name()).with_sources(vec![record.id.clone()]))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundednessPair {
    pub positive: String,
    pub positive_rule: String,
    pub negative: String,
    pub negative_source: String,
}

/// Positive: paraphrase of a sentence of the record's own knowledge.
/// Negative: a sentence from another record's knowledge.
pub fn groundedness_pair<R: Rng + ?Sized>(
    record: &DialogueRecord,
    pool: &[DialogueRecord],
    paraphraser: Option<&dyn ParaphraseProvider>,
    rng: &mut R,
) -> Result<GroundednessPair, PerturbError> {
    let own = sentence_texts(&record.knowledge);
    if own.is_empty() {
        return Err(PerturbError::EmptyKnowledge(record.id.clone()));
    }
    let chosen = &own[rng.random_range(0..own.len())];
    let fallback = RuleParaphraser;
    let (positive, positive_rule) = match paraphraser.unwrap_or(&fallback).paraphrase(chosen) {
        Ok(p) if normalize_whitespace(&p) != *chosen && !p.trim().is_empty() => {
            (normalize_whitespace(&p), paraphraser.map_or("paraphrase-rules", |p| p.name()).to_string())
        }
        _ => (chosen.clone(), "paraphrase-identity".to_string()),
    };
    let others: Vec<&DialogueRecord> = pool
        .iter()
        .filter(|d| d.id != record.id && !d.knowledge.trim().is_empty())
        .collect();
    if others.is_empty() {
        return Err(PerturbError::PoolTooSmall(format!("no other knowledge context for {}", record.id)));
    }
    for _ in 0..MAX_ATTEMPTS {
        let other = others[rng.random_range(0..others.len())];
        let sentences = sentence_texts(&other.knowledge);
        if sentences.is_empty() {
            continue;
        }
        let negative = sentences[rng.random_range(0..sentences.len())].clone();
        if negative != positive && !own.contains(&negative) {
            return Ok(GroundednessPair { positive, positive_rule, negative, negative_source: other.id.clone() });
        }
    }
    Err(PerturbError::PoolTooSmall(format!("no distinct knowledge sentence for {}", record.id)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_rng;
    use std::collections::HashSet;

    fn record(id: &str, history: &[&str], response: &str, knowledge: &str) -> DialogueRecord {
        DialogueRecord {
            id: id.into(),
            history: history.iter().map(|s| s.to_string()).collect(),
            gold_response: response.into(),
            knowledge: knowledge.into(),
            extras: Default::default(),
        }
    }

    fn pool() -> Vec<DialogueRecord> {
        vec![
            record("a", &["hi", "do you like basketball?"], "yes i love the raptors and their coach.", "the raptors won in 2019. basketball was invented in 1891."),
            record("b", &["hello", "seen any movies?"], "i watched star wars last night.", "star wars premiered in 1977."),
        ]
    }

    #[test]
    fn coherence_takes_other_response() {
        let p = pool();
        let c = dialogue_negative(&p[0], DialogueDimension::Coherence, &p, None, &PerturbConfig::default(), &mut derive_rng(0, 0, 0)).unwrap();
        assert_eq!(c.text, "i watched star wars last night.");
        assert_eq!(c.source_ids, vec!["a", "b"]);
        let single = &p[..1];
        assert!(dialogue_negative(&p[0], DialogueDimension::Coherence, single, None, &PerturbConfig::default(), &mut derive_rng(0, 0, 0)).is_err());
    }

    #[test]
    fn naturalness_edits_one_span() {
        let p = pool();
        let c = dialogue_negative(&p[0], DialogueDimension::Naturalness, &p, None, &PerturbConfig::default(), &mut derive_rng(5, 0, 0)).unwrap();
        assert_ne!(c.text, p[0].gold_response);
        assert!(c.rule.starts_with("fluency-"));
    }

    #[test]
    fn engagingness_stub() {
        let p = [record("x", &["hey", "do you like basketball?"], "sure.", "")];
        let c = dialogue_negative(&p[0], DialogueDimension::Engagingness, &p, None, &PerturbConfig::default(), &mut derive_rng(0, 0, 0)).unwrap();
        assert_eq!(c.rule, "dull-stub");
        assert!(!c.text.is_empty());
        assert_eq!(c.text, "i don't know much about basketball.");
    }

    struct Failing;
    impl DullResponseProvider for Failing {
        fn name(&self) -> &str {
            "failing"
        }
        fn generate(&self, _: &str) -> Result<String, String> {
            Err("model offline".into())
        }
    }

    #[test]
    fn generator_failure_names_dialogue() {
        let p = pool();
        let err = dialogue_negative(&p[1], DialogueDimension::Engagingness, &p, Some(&Failing), &PerturbConfig::default(), &mut derive_rng(0, 0, 0)).unwrap_err();
        assert_eq!(err, PerturbError::Generator { id: "b".into(), message: "model offline".into() });
    }

    #[test]
    fn groundedness_negative_from_other_record() {
        let p = pool();
        for seed in 0..20 {
            let pair = groundedness_pair(&p[0], &p, None, &mut derive_rng(seed, 0, 0)).unwrap();
            assert_eq!(pair.negative_source, "b");
            assert_eq!(pair.negative, "star wars premiered in 1977.");
        }
    }

    struct Identity;
    impl ParaphraseProvider for Identity {
        fn name(&self) -> &str {
            "identity"
        }
        fn paraphrase(&self, s: &str) -> Result<String, String> {
            Ok(s.to_string())
        }
    }

    #[test]
    fn identity_fallback_is_flagged() {
        let p = pool();
        let pair = groundedness_pair(&p[1], &p, Some(&Identity), &mut derive_rng(0, 0, 0)).unwrap();
        assert_eq!(pair.positive, "star wars premiered in 1977.");
        assert_eq!(pair.positive_rule, "paraphrase-identity");
    }

    #[test]
    fn rule_paraphrase_keeps_content() {
        let input = "the first phone number of the white house was 1.";
        let out = RuleParaphraser.paraphrase(input).unwrap();
        assert_ne!(out, input);
        let content = |s: &str| -> HashSet<String> {
            tokenize(s).into_iter().filter(|t| !["the", "of", "was", "a"].contains(&t.as_str())).collect()
        };
        let (a, b) = (content(input), content(&out));
        let overlap = a.intersection(&b).count() as f64 / a.union(&b).count() as f64;
        assert!(overlap >= 0.6, "{out} overlap {overlap}");
    }

    #[test]
    fn rule_paraphrase_reorders_clauses() {
        let out = RuleParaphraser.paraphrase("After the game ended, fans went home.").unwrap();
        assert_eq!(out, "fans went home, after the game ended.");
    }

    #[test]
    fn empty_knowledge() {
        let p = vec![record("a", &["hi"], "hey.", ""), record("b", &["yo"], "sup.", "k.")];
        assert_eq!(
            groundedness_pair(&p[0], &p, None, &mut derive_rng(0, 0, 0)).unwrap_err(),
            PerturbError::EmptyKnowledge("a".into())
        );
    }
}
