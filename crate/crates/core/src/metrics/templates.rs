use std::collections::HashMap;

use serde::Serialize;

use super::tokenize::{is_placeholder, words};
use crate::lexicon::AttributeLexicon;

/// Replaces longest lexicon matches with attribute placeholders. The result
/// is lowercased, tokenized and space-joined.
pub fn delexicalize(text: &str, lex: &AttributeLexicon) -> String {
    let toks = words(text);
    let mut out: Vec<&str> = Vec::with_capacity(toks.len());
    let mut i = 0;
    while i < toks.len() {
        if is_placeholder(&toks[i]) {
            out.push(&toks[i]);
            i += 1;
            continue;
        }
        match lex.longest_match_at(&toks, i) {
            Some((width, attr)) => {
                out.push(attr.placeholder());
                i += width;
            }
            None => {
                out.push(&toks[i]);
                i += 1;
            }
        }
    }
    out.join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Template {
    pub pattern: String,
    pub count: usize,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TemplateReport {
    pub unique: usize,
    pub total: usize,
    pub templates: Vec<Template>,
}

impl TemplateReport {
    pub fn top(&self, k: usize) -> &[Template] {
        &self.templates[..k.min(self.templates.len())]
    }
}

/// Counts delexicalized patterns; ranks by descending count, ties broken
/// lexicographically.
pub fn template_ranks<S: AsRef<str>>(texts: &[S], lex: &AttributeLexicon) -> TemplateReport {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for t in texts {
        *counts.entry(delexicalize(t.as_ref(), lex)).or_insert(0) += 1;
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    TemplateReport {
        unique: ranked.len(),
        total: texts.len(),
        templates: ranked
            .into_iter()
            .enumerate()
            .map(|(i, (pattern, count))| Template {
                pattern,
                count,
                rank: i + 1,
            })
            .collect(),
    }
}
