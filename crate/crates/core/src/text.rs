//! Whitespace normalization and the retrieval tokenizer.

/// Collapses every run of whitespace to one space and trims both ends.
pub fn normalize_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Lowercases and splits on every non-alphanumeric character, dropping empties.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Whitespace tokens of `text`, as used by span edits.
pub fn words(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}
