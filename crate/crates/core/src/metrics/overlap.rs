//! Corpus-level BLEU-4 and NIST-5 with a single reference per hypothesis,
//! on lowercased whitespace tokens.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use super::tokenize::whitespace_tokens;

pub const BLEU_ORDER: usize = 4;
pub const NIST_ORDER: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OverlapError {
    #[error("no hypotheses")]
    Empty,
    #[error("{hypotheses} hypotheses but {references} references")]
    LengthMismatch { hypotheses: usize, references: usize },
}

fn ngrams(tokens: &[String], n: usize) -> HashMap<&[String], u32> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

type TokenPairs = (Vec<Vec<String>>, Vec<Vec<String>>);

fn tokenize_pairs<S: AsRef<str>, T: AsRef<str>>(
    hypotheses: &[S],
    references: &[T],
) -> Result<TokenPairs, OverlapError> {
    if hypotheses.len() != references.len() {
        return Err(OverlapError::LengthMismatch {
            hypotheses: hypotheses.len(),
            references: references.len(),
        });
    }
    if hypotheses.is_empty() {
        return Err(OverlapError::Empty);
    }
    let h = hypotheses.iter().map(|s| whitespace_tokens(s.as_ref())).collect();
    let r = references.iter().map(|s| whitespace_tokens(s.as_ref())).collect();
    Ok((h, r))
}

/// Sufficient statistics for corpus BLEU.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BleuStats {
    pub matches: [u64; BLEU_ORDER],
    pub totals: [u64; BLEU_ORDER],
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl BleuStats {
    pub fn score(&self) -> f64 {
        if self.hyp_len == 0 {
            return 0.0;
        }
        let mut log_sum = 0.0;
        for n in 0..BLEU_ORDER {
            if self.matches[n] == 0 || self.totals[n] == 0 {
                return 0.0;
            }
            log_sum += (self.matches[n] as f64 / self.totals[n] as f64).ln();
        }
        let bp = if self.hyp_len >= self.ref_len {
            1.0
        } else {
            (1.0 - self.ref_len as f64 / self.hyp_len as f64).exp()
        };
        bp * (log_sum / BLEU_ORDER as f64).exp()
    }
}

pub fn bleu_stats<S: AsRef<str>, T: AsRef<str>>(hypotheses: &[S], references: &[T]) -> Result<BleuStats, OverlapError> {
    let (hyps, refs) = tokenize_pairs(hypotheses, references)?;
    let mut st = BleuStats::default();
    for (h, r) in hyps.iter().zip(&refs) {
        st.hyp_len += h.len() as u64;
        st.ref_len += r.len() as u64;
        for n in 1..=BLEU_ORDER {
            let hc = ngrams(h, n);
            let rc = ngrams(r, n);
            st.totals[n - 1] += h.len().saturating_sub(n - 1) as u64;
            st.matches[n - 1] += hc
                .iter()
                .map(|(g, c)| (*c).min(rc.get(g).copied().unwrap_or(0)) as u64)
                .sum::<u64>();
        }
    }
    Ok(st)
}

/// Corpus BLEU-4 with brevity penalty, no smoothing.
pub fn bleu<S: AsRef<str>, T: AsRef<str>>(hypotheses: &[S], references: &[T]) -> Result<f64, OverlapError> {
    Ok(bleu_stats(hypotheses, references)?.score())
}

/// NIST brevity penalty: `exp(β · ln²(min(1, ratio)))` with β chosen so that
/// a length ratio of 2/3 gives a penalty of 0.5.
pub fn nist_length_penalty(ratio: f64) -> f64 {
    let beta = 0.5f64.ln() / 1.5f64.ln().powi(2);
    if ratio >= 1.0 {
        1.0
    } else if ratio <= 0.0 {
        0.0
    } else {
        (beta * ratio.ln().powi(2)).exp()
    }
}

/// Corpus NIST-5. Information weights come from the reference corpus.
pub fn nist<S: AsRef<str>, T: AsRef<str>>(hypotheses: &[S], references: &[T]) -> Result<f64, OverlapError> {
    let (hyps, refs) = tokenize_pairs(hypotheses, references)?;

    let mut ref_counts: HashMap<&[String], u64> = HashMap::new();
    let mut ref_words = 0u64;
    for r in &refs {
        ref_words += r.len() as u64;
        for n in 1..=NIST_ORDER {
            for (g, c) in ngrams(r, n) {
                *ref_counts.entry(g).or_insert(0) += c as u64;
            }
        }
    }
    let info = |g: &[String]| -> f64 {
        let count = ref_counts[g] as f64;
        let context = if g.len() == 1 {
            ref_words as f64
        } else {
            ref_counts[&g[..g.len() - 1]] as f64
        };
        (context / count).log2()
    };

    let mut gained = [0.0f64; NIST_ORDER];
    let mut totals = [0u64; NIST_ORDER];
    let mut hyp_words = 0u64;
    for (h, r) in hyps.iter().zip(&refs) {
        hyp_words += h.len() as u64;
        for n in 1..=NIST_ORDER {
            let hc = ngrams(h, n);
            let rc = ngrams(r, n);
            totals[n - 1] += h.len().saturating_sub(n - 1) as u64;
            for (g, c) in hc {
                let clipped = c.min(rc.get(g).copied().unwrap_or(0));
                if clipped > 0 {
                    gained[n - 1] += clipped as f64 * info(g);
                }
            }
        }
    }
    let score: f64 = (0..NIST_ORDER)
        .filter(|&i| totals[i] > 0)
        .map(|i| gained[i] / totals[i] as f64)
        .sum();
    let ratio = if ref_words == 0 {
        0.0
    } else {
        hyp_words as f64 / ref_words as f64
    };
    Ok(score * nist_length_penalty(ratio))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_corpus_scores_one() {
        let refs = ["the chicken was tasty", "service was slow but the beef was great"];
        assert_eq!(bleu(&refs, &refs).unwrap(), 1.0);
    }

    #[test]
    fn disjoint_corpus_scores_zero() {
        assert_eq!(bleu(&["x y z w"], &["a b c d"]).unwrap(), 0.0);
        assert_eq!(nist(&["x y z w"], &["a b c d"]).unwrap(), 0.0);
    }

    #[test]
    fn brevity_penalty_applies() {
        let st = bleu_stats(&["a b c d"], &["a b c d e f g h"]).unwrap();
        assert_eq!((st.hyp_len, st.ref_len), (4, 8));
        assert!((st.score() - (1.0f64 - 2.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn length_penalty_reference_point() {
        assert!((nist_length_penalty(2.0 / 3.0) - 0.5).abs() < 1e-12);
        assert_eq!(nist_length_penalty(1.3), 1.0);
    }

    #[test]
    fn input_errors() {
        assert_eq!(bleu::<&str, &str>(&[], &[]), Err(OverlapError::Empty));
        assert!(matches!(
            nist(&["a"], &["a", "b"]),
            Err(OverlapError::LengthMismatch { .. })
        ));
    }
}
