//! Slot error rate: (deletions + repetitions) / slots.
//!
//! Every tuple is a value slot. Variants with adjectives add one slot per
//! tuple whose adjective is not `no_adj`. A value occurring `k` times in the
//! MR must be realized `k` times; missing occurrences are deletions and
//! extra ones are repetitions. An adjective slot is realized when its word
//! appears anywhere in the output.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use super::tokenize::words;
use crate::mr::{Adjective, MeaningRepresentation};

/// Tokens allowed between the words of a coordinated compound value,
/// e.g. `beef_chicken_kebabs` realized as "beef and chicken kebabs".
const COORDINATORS: [&str; 4] = ["and", "or", "&", ","];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SerBreakdown {
    pub deletions: usize,
    pub repetitions: usize,
    pub slots: usize,
}

impl SerBreakdown {
    pub fn ser(&self) -> f64 {
        (self.deletions + self.repetitions) as f64 / self.slots as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SerError {
    #[error("MR has no tuples")]
    EmptyMr,
}

/// Length of a match of `value` at `out[start..]`, if any.
fn match_at(out: &[String], start: usize, value: &[&str]) -> Option<usize> {
    let mut j = start;
    for (k, v) in value.iter().enumerate() {
        if out.get(j).map(String::as_str) == Some(*v) {
            j += 1;
        } else if k > 0
            && out.get(j).is_some_and(|t| COORDINATORS.contains(&t.as_str()))
            && out.get(j + 1).map(String::as_str) == Some(*v)
        {
            j += 2;
        } else {
            return None;
        }
    }
    Some(j - start)
}

/// Occurrences of each value in `out`, scanning left to right and taking
/// the longest value at each position.
pub fn count_values<'a>(out: &[String], values: &[&'a str]) -> BTreeMap<&'a str, usize> {
    let mut ordered: Vec<(&str, Vec<&str>)> = values.iter().map(|v| (*v, v.split('_').collect())).collect();
    ordered.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(b.0)));
    ordered.dedup_by(|a, b| a.0 == b.0);
    let mut counts: BTreeMap<&str, usize> = values.iter().map(|v| (*v, 0)).collect();
    let mut i = 0;
    while i < out.len() {
        let hit = ordered
            .iter()
            .find_map(|(name, toks)| match_at(out, i, toks).map(|len| (*name, len)));
        match hit {
            Some((name, len)) => {
                *counts.get_mut(name).expect("known value") += 1;
                i += len;
            }
            None => i += 1,
        }
    }
    counts
}

pub fn ser(mr: &MeaningRepresentation, output: &str) -> Result<SerBreakdown, SerError> {
    if mr.tuples.is_empty() {
        return Err(SerError::EmptyMr);
    }
    let out = words(output);

    let mut required: BTreeMap<&str, usize> = BTreeMap::new();
    for t in &mr.tuples {
        *required.entry(t.value.as_str()).or_insert(0) += 1;
    }
    let names: Vec<&str> = required.keys().copied().collect();
    let found = count_values(&out, &names);

    let mut b = SerBreakdown {
        deletions: 0,
        repetitions: 0,
        slots: mr.tuples.len(),
    };
    for (value, need) in &required {
        let got = found[value];
        b.deletions += need.saturating_sub(got);
        b.repetitions += got.saturating_sub(*need);
    }

    if mr.variant.has_adj() {
        let present: HashSet<&str> = out.iter().map(String::as_str).collect();
        for t in &mr.tuples {
            if let Some(Adjective::Word(w)) = &t.adj {
                b.slots += 1;
                if !present.contains(w.as_str()) {
                    b.deletions += 1;
                }
            }
        }
    }
    Ok(b)
}

/// Mean per-MR SER over aligned MRs and outputs.
pub fn average_ser(mrs: &[MeaningRepresentation], outputs: &[String]) -> Result<f64, SerError> {
    let mut total = 0.0;
    for (mr, out) in mrs.iter().zip(outputs) {
        total += ser(mr, out)?.ser();
    }
    Ok(total / mrs.len().max(1) as f64)
}
