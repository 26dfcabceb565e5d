/// Lowercased words with leading and trailing punctuation split off into
/// their own tokens. Placeholders such as `[FOOD]` pass through unchanged.
pub fn words(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        if is_placeholder(chunk) {
            out.push(chunk.to_string());
            continue;
        }
        let lower = chunk.to_lowercase();
        let chars: Vec<char> = lower.chars().collect();
        let mut start = 0;
        let mut end = chars.len();
        while start < end && !chars[start].is_alphanumeric() {
            out.push(chars[start].to_string());
            start += 1;
        }
        let mut trailing = Vec::new();
        while end > start && !chars[end - 1].is_alphanumeric() {
            trailing.push(chars[end - 1].to_string());
            end -= 1;
        }
        if start < end {
            out.push(chars[start..end].iter().collect());
        }
        out.extend(trailing.into_iter().rev());
    }
    out
}

/// Lowercased whitespace tokens.
pub fn whitespace_tokens(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_lowercase).collect()
}

pub fn is_placeholder(tok: &str) -> bool {
    tok.len() > 2
        && tok.starts_with('[')
        && tok.ends_with(']')
        && tok[1..tok.len() - 1].chars().all(|c| c.is_ascii_uppercase())
}

pub fn is_punct(tok: &str) -> bool {
    !tok.chars().any(char::is_alphanumeric) && !is_placeholder(tok)
}

/// Non-punctuation word count.
pub fn word_count(text: &str) -> usize {
    words(text).iter().filter(|w| !is_punct(w)).count()
}
