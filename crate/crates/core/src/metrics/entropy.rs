use std::collections::HashMap;

use thiserror::Error;

use super::tokenize::whitespace_tokens;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no trigrams: every text has fewer than three words")]
pub struct NoTrigrams;

/// Trigram frequencies over lowercased whitespace tokens, within each text.
pub fn trigram_counts<S: AsRef<str>>(texts: &[S]) -> HashMap<[String; 3], u64> {
    let mut counts = HashMap::new();
    for text in texts {
        let toks = whitespace_tokens(text.as_ref());
        for w in toks.windows(3) {
            *counts.entry([w[0].clone(), w[1].clone(), w[2].clone()]).or_insert(0) += 1;
        }
    }
    counts
}

/// Shannon entropy of a frequency table, in bits.
///
/// Computed as `log2(t) - Σ f·log2(f) / t`, which is the same quantity as
/// `-Σ (f/t)·log2(f/t)` and gives exactly `log2(k)` for `k` singletons.
pub fn entropy_of_counts<I: IntoIterator<Item = u64>>(counts: I) -> Option<f64> {
    let mut total = 0u64;
    let mut weighted = 0.0f64;
    for f in counts {
        if f == 0 {
            continue;
        }
        total += f;
        weighted += f as f64 * (f as f64).log2();
    }
    if total == 0 {
        return None;
    }
    let h = (total as f64).log2() - weighted / total as f64;
    Some(h.max(0.0))
}

/// Trigram entropy of a corpus of texts.
pub fn entropy<S: AsRef<str>>(texts: &[S]) -> Result<f64, NoTrigrams> {
    entropy_of_counts(trigram_counts(texts).into_values()).ok_or(NoTrigrams)
}
