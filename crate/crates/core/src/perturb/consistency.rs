//! Factual-inconsistency corruptions: antonym substitution, numerical editing,
//! entity replacement and syntactic pruning. Exactly one rule is applied per
//! sample, chosen uniformly among the rules that have a site in the text.

use std::collections::HashMap;
use std::ops::Range;

use rand::Rng;

use crate::corpus::sentence_texts;
use crate::text::normalize_whitespace;

use super::{Corruption, PerturbError};

const ANTONYM_PAIRS: &[(&str, &str)] = &[
    ("good", "bad"), ("high", "low"), ("large", "small"), ("big", "little"), ("early", "late"),
    ("first", "last"), ("increase", "decrease"), ("increased", "decreased"), ("rise", "fall"),
    ("rose", "fell"), ("win", "lose"), ("won", "lost"), ("strong", "weak"), ("rich", "poor"),
    ("old", "young"), ("new", "old"), ("happy", "sad"), ("hot", "cold"), ("long", "short"),
    ("fast", "slow"), ("quickly", "slowly"), ("heavy", "light"), ("easy", "difficult"),
    ("true", "false"), ("right", "wrong"), ("positive", "negative"), ("major", "minor"),
    ("more", "less"), ("most", "least"), ("always", "never"), ("before", "after"),
    ("above", "below"), ("inside", "outside"), ("open", "closed"), ("public", "private"),
    ("guilty", "innocent"), ("legal", "illegal"), ("safe", "dangerous"), ("alive", "dead"),
    ("accepted", "rejected"), ("allowed", "banned"), ("agreed", "refused"), ("upheld", "overturned"),
    ("north", "south"), ("east", "west"), ("higher", "lower"), ("larger", "smaller"),
    ("better", "worse"), ("best", "worst"), ("cheap", "expensive"), ("full", "empty"),
    ("wet", "dry"), ("friendly", "hostile"), ("popular", "unpopular"), ("successful", "unsuccessful"),
];

const FUNCTION_WORDS: &[&str] = &[
    "The", "A", "An", "In", "On", "At", "He", "She", "It", "They", "We", "This", "That", "But",
    "And", "His", "Her", "Their", "Its", "After", "Before", "When", "If", "As", "For", "By", "From",
];

const TERMINATORS: &[char] = &['.', '!', '?'];
const CLOSERS: &[char] = &['"', '\'', ')', ']', '}', '\u{201d}', '\u{2019}'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConsistencyRule {
    Antonym,
    Numeric,
    Entity,
    Pruning,
}

impl ConsistencyRule {
    pub const ALL: [ConsistencyRule; 4] = [Self::Antonym, Self::Numeric, Self::Entity, Self::Pruning];

    pub fn name(self) -> &'static str {
        match self {
            Self::Antonym => "antonym-substitution",
            Self::Numeric => "numerical-editing",
            Self::Entity => "entity-replacement",
            Self::Pruning => "syntactic-pruning",
        }
    }
}

/// Finds entity mentions as byte ranges of a whitespace-normalized text.
pub trait EntityDetector: Send + Sync {
    fn spans(&self, text: &str) -> Vec<Range<usize>>;
}

/// Heuristic matcher: greedy runs of capitalized tokens containing at least
/// one token that is not sentence-initial.
#[derive(Debug, Clone, Copy, Default)]
pub struct CapitalizedSpans;

struct Token {
    /// Byte range of the alphanumeric core.
    core: Range<usize>,
    has_trailing: bool,
    has_leading: bool,
    sentence_initial: bool,
}

fn tokens(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut offset = 0;
    let mut prev_ends_sentence = true;
    for raw in text.split(' ') {
        let start = offset;
        offset += raw.len() + 1;
        if raw.is_empty() {
            continue;
        }
        let lead = raw.len() - raw.trim_start_matches(|c: char| !c.is_alphanumeric()).len();
        let trail = raw.len() - raw.trim_end_matches(|c: char| !c.is_alphanumeric()).len();
        let sentence_initial = prev_ends_sentence;
        prev_ends_sentence = raw.trim_end_matches(CLOSERS).ends_with(TERMINATORS);
        if lead + trail >= raw.len() {
            continue;
        }
        out.push(Token {
            core: start + lead..start + raw.len() - trail,
            has_trailing: trail > 0,
            has_leading: lead > 0,
            sentence_initial,
        });
    }
    out
}

fn is_capitalized(word: &str) -> bool {
    let mut chars = word.chars();
    matches!(chars.next(), Some(c) if c.is_uppercase())
        && word != "I"
        && !word.chars().any(|c| c.is_ascii_digit())
}

impl EntityDetector for CapitalizedSpans {
    fn spans(&self, text: &str) -> Vec<Range<usize>> {
        let toks = tokens(text);
        let mut spans = Vec::new();
        let mut i = 0;
        while i < toks.len() {
            if !is_capitalized(&text[toks[i].core.clone()]) {
                i += 1;
                continue;
            }
            let mut j = i;
            while !toks[j].has_trailing
                && j + 1 < toks.len()
                && !toks[j + 1].has_leading
                && !toks[j + 1].sentence_initial
                && is_capitalized(&text[toks[j + 1].core.clone()])
            {
                j += 1;
            }
            let mut first = i;
            if toks[i].sentence_initial && j > i && FUNCTION_WORDS.contains(&&text[toks[i].core.clone()]) {
                first += 1;
            }
            if (first..=j).any(|k| !toks[k].sentence_initial) {
                spans.push(toks[first].core.start..toks[j].core.end);
            }
            i = j + 1;
        }
        spans
    }
}

pub struct ConsistencyCorrupter {
    antonyms: HashMap<String, String>,
    detector: Box<dyn EntityDetector>,
}

impl Default for ConsistencyCorrupter {
    fn default() -> Self {
        Self::with_detector(Box::new(CapitalizedSpans))
    }
}

fn match_case(template: &str, word: &str) -> String {
    if template.len() > 1 && template.chars().all(|c| !c.is_lowercase()) {
        return word.to_uppercase();
    }
    let mut chars = template.chars();
    if matches!(chars.next(), Some(c) if c.is_uppercase()) {
        let mut w = word.chars();
        return match w.next() {
            Some(f) => f.to_uppercase().chain(w).collect(),
            None => String::new(),
        };
    }
    word.to_string()
}

fn splice(text: &str, range: Range<usize>, replacement: &str) -> String {
    format!("{}{}{}", &text[..range.start], replacement, &text[range.end..])
}

/// Candidate rewrites of one digit run, in a fixed order.
fn numeric_edits(digits: &str) -> Vec<String> {
    let mut edits = Vec::new();
    edits.push(format!("{digits}0"));
    if digits.len() <= 18 {
        let value: u64 = digits.parse().expect("ascii digits");
        edits.push(((value + 5) / 10).to_string());
    }
    let mut chars: Vec<char> = digits.chars().collect();
    let lead = chars[0].to_digit(10).expect("digit");
    edits.push(if lead == 9 {
        format!("10{}", &digits[1..])
    } else {
        format!("{}{}", lead + 1, &digits[1..])
    });
    if let Some(k) = (0..chars.len().saturating_sub(1)).find(|&k| chars[k] != chars[k + 1]) {
        chars.swap(k, k + 1);
        if chars[0] != '0' {
            edits.push(chars.into_iter().collect());
        }
    }
    edits.retain(|e| e != digits);
    edits.dedup();
    edits
}

impl ConsistencyCorrupter {
    pub fn with_detector(detector: Box<dyn EntityDetector>) -> Self {
        let mut antonyms = HashMap::new();
        for (a, b) in ANTONYM_PAIRS {
            antonyms.entry(a.to_string()).or_insert_with(|| b.to_string());
            antonyms.entry(b.to_string()).or_insert_with(|| a.to_string());
        }
        Self { antonyms, detector }
    }

    fn antonym_sites(&self, text: &str) -> Vec<Range<usize>> {
        tokens(text)
            .into_iter()
            .filter(|t| self.antonyms.contains_key(&text[t.core.clone()].to_lowercase()))
            .map(|t| t.core)
            .collect()
    }

    fn numeric_sites(text: &str) -> Vec<Range<usize>> {
        let mut sites = Vec::new();
        for tok in tokens(text) {
            let word = &text[tok.core.clone()];
            if let Some(s) = word.find(|c: char| c.is_ascii_digit()) {
                let len = word[s..].find(|c: char| !c.is_ascii_digit()).unwrap_or(word.len() - s);
                sites.push(tok.core.start + s..tok.core.start + s + len);
            }
        }
        sites
    }

    fn entity_pairs(&self, text: &str) -> Vec<(Range<usize>, Range<usize>)> {
        let spans = self.detector.spans(text);
        let mut pairs = Vec::new();
        for (i, a) in spans.iter().enumerate() {
            for b in &spans[i + 1..] {
                if text[a.clone()] != text[b.clone()] {
                    pairs.push((a.clone(), b.clone()));
                }
            }
        }
        pairs
    }

    /// (sentence index, byte offset of comma within the sentence, clause end).
    fn pruning_sites(sentences: &[String]) -> Vec<(usize, usize, usize)> {
        let mut sites = Vec::new();
        for (i, s) in sentences.iter().enumerate() {
            let end = s.trim_end_matches(CLOSERS).trim_end_matches(TERMINATORS).len();
            for (c, _) in s[..end].match_indices(',') {
                let head = &s[..c];
                let clause = &s[c + 1..end];
                if head.chars().any(char::is_alphanumeric) && clause.chars().any(char::is_alphanumeric) {
                    sites.push((i, c, end));
                }
            }
        }
        sites
    }

    pub fn applicable_rules(&self, text: &str) -> Vec<ConsistencyRule> {
        let text = normalize_whitespace(text);
        let mut rules = Vec::new();
        if !self.antonym_sites(&text).is_empty() {
            rules.push(ConsistencyRule::Antonym);
        }
        if Self::numeric_sites(&text).iter().any(|r| !numeric_edits(&text[r.clone()]).is_empty()) {
            rules.push(ConsistencyRule::Numeric);
        }
        if !self.entity_pairs(&text).is_empty() {
            rules.push(ConsistencyRule::Entity);
        }
        if !Self::pruning_sites(&sentence_texts(&text)).is_empty() {
            rules.push(ConsistencyRule::Pruning);
        }
        rules
    }

    /// Applies one specific rule.
    pub fn apply<R: Rng + ?Sized>(
        &self,
        text: &str,
        rule: ConsistencyRule,
        rng: &mut R,
    ) -> Result<Corruption, PerturbError> {
        let text = normalize_whitespace(text);
        let out = match rule {
            ConsistencyRule::Antonym => {
                let sites = self.antonym_sites(&text);
                if sites.is_empty() {
                    return Err(PerturbError::NotApplicable);
                }
                let site = sites[rng.random_range(0..sites.len())].clone();
                let word = &text[site.clone()];
                let antonym = &self.antonyms[&word.to_lowercase()];
                (splice(&text, site.clone(), &match_case(word, antonym)), format!("site={}", site.start))
            }
            ConsistencyRule::Numeric => {
                let sites: Vec<_> = Self::numeric_sites(&text)
                    .into_iter()
                    .filter(|r| !numeric_edits(&text[r.clone()]).is_empty())
                    .collect();
                if sites.is_empty() {
                    return Err(PerturbError::NotApplicable);
                }
                let site = sites[rng.random_range(0..sites.len())].clone();
                let edits = numeric_edits(&text[site.clone()]);
                let edit = &edits[rng.random_range(0..edits.len())];
                (splice(&text, site.clone(), edit), format!("site={}", site.start))
            }
            ConsistencyRule::Entity => {
                let pairs = self.entity_pairs(&text);
                if pairs.is_empty() {
                    return Err(PerturbError::NotApplicable);
                }
                let (a, b) = pairs[rng.random_range(0..pairs.len())].clone();
                let (first, second) = if a.start < b.start { (a, b) } else { (b, a) };
                let out = format!(
                    "{}{}{}{}{}",
                    &text[..first.start],
                    &text[second.clone()],
                    &text[first.end..second.start],
                    &text[first.clone()],
                    &text[second.end..]
                );
                (out, format!("spans={}..{},{}..{}", first.start, first.end, second.start, second.end))
            }
            ConsistencyRule::Pruning => {
                let mut sentences = sentence_texts(&text);
                let sites = Self::pruning_sites(&sentences);
                if sites.is_empty() {
                    return Err(PerturbError::NotApplicable);
                }
                let (i, comma, end) = sites[rng.random_range(0..sites.len())];
                let s = &sentences[i];
                sentences[i] = format!("{}{}", &s[..comma], &s[end..]);
                (sentences.join(" "), format!("sentence={i}"))
            }
        };
        let (out, detail) = out;
        debug_assert_ne!(out, text);
        Ok(Corruption::new(out, rule.name()).with_detail(detail))
    }

    /// Applies one rule chosen uniformly among the applicable ones.
    pub fn corrupt<R: Rng + ?Sized>(&self, text: &str, rng: &mut R) -> Result<Corruption, PerturbError> {
        let rules = self.applicable_rules(text);
        if rules.is_empty() {
            return Err(PerturbError::NotApplicable);
        }
        let rule = rules[rng.random_range(0..rules.len())];
        self.apply(text, rule, rng)
    }
}

/// Default-lexicon, heuristic-NER consistency corruption.
pub fn consistency_negative<R: Rng + ?Sized>(reference: &str, rng: &mut R) -> Result<Corruption, PerturbError> {
    ConsistencyCorrupter::default().corrupt(reference, rng)
}
