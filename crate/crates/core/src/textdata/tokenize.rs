use serde::{Deserialize, Serialize};

/// Tokens exempt from sentence splitting. Matched after lowercasing.
pub const ABBREVIATIONS: &[&str] = &["u.s.", "mr.", "dr.", "st."];

/// One sentence: lowercased tokens plus the text it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceTokens {
    pub tokens: Vec<String>,
    pub source_text: String,
}

impl SentenceTokens {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

fn is_punct(c: char) -> bool {
    !c.is_alphanumeric()
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Tokens of one whitespace-delimited chunk, and whether the chunk ends a
/// sentence (its trailing punctuation contains a terminal mark that does not
/// belong to an abbreviation).
fn split_chunk(chunk: &str, out: &mut Vec<String>) -> bool {
    let lower = chunk.to_lowercase();
    let core_start = lower
        .char_indices()
        .find(|(_, c)| !is_punct(*c))
        .map(|(i, _)| i);
    let Some(core_start) = core_start else {
        // All punctuation: one token per character.
        out.extend(lower.chars().map(String::from));
        return lower.chars().any(is_terminal);
    };
    out.extend(lower[..core_start].chars().map(String::from));
    let rest = &lower[core_start..];

    for abbr in ABBREVIATIONS {
        if let Some(tail) = rest.strip_prefix(abbr) {
            if tail.chars().all(is_punct) {
                out.push((*abbr).to_string());
                out.extend(tail.chars().map(String::from));
                return tail.chars().any(is_terminal);
            }
        }
    }

    let core_end = rest
        .char_indices()
        .rev()
        .find(|(_, c)| !is_punct(*c))
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(rest.len());
    out.push(rest[..core_end].to_string());
    let tail = &rest[core_end..];
    out.extend(tail.chars().map(String::from));
    tail.chars().any(is_terminal)
}

/// Split running text into sentences of lowercased tokens.
///
/// A sentence ends after a whitespace-delimited chunk whose trailing
/// punctuation contains `.`, `!` or `?`; chunks made only of punctuation that
/// follow it still join the ending sentence. Leading and trailing punctuation of a
/// chunk become separate single-character tokens; [`ABBREVIATIONS`] stay whole
/// and never end a sentence.
pub fn tokenize(text: &str) -> Vec<SentenceTokens> {
    let chunks = text.split_whitespace();
    let mut sentences = Vec::new();
    let mut tokens = Vec::new();
    let mut source: Vec<&str> = Vec::new();
    let mut pending_break = false;
    for chunk in chunks {
        if pending_break && !chunk.chars().all(is_punct) {
            flush(&mut sentences, &mut tokens, &mut source);
            pending_break = false;
        }
        pending_break |= split_chunk(chunk, &mut tokens);
        source.push(chunk);
    }
    flush(&mut sentences, &mut tokens, &mut source);
    sentences
}

fn flush(out: &mut Vec<SentenceTokens>, tokens: &mut Vec<String>, source: &mut Vec<&str>) {
    if !tokens.is_empty() {
        out.push(SentenceTokens {
            tokens: std::mem::take(tokens),
            source_text: source.join(" "),
        });
    }
    source.clear();
}

/// Tokenize text already known to be a single sentence, without splitting.
pub fn tokenize_sentence(text: &str) -> SentenceTokens {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        split_chunk(chunk, &mut tokens);
    }
    SentenceTokens {
        tokens,
        source_text: text.to_string(),
    }
}
