use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use super::tokenize::{is_punct, words};
use crate::extract::FIRST_PERSON;
use crate::mr::{LenBin, MeaningRepresentation, Variant};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StyleError {
    #[error("{0} MRs but {1} outputs")]
    LengthMismatch(usize, usize),
    #[error("style targets need +STYLE MRs, got {0}")]
    Variant(Variant),
}

/// How well outputs follow the +STYLE targets of their MRs.
///
/// `*_hit_rate` is agreement with the target over all instances (producing
/// the feature when asked and omitting it otherwise); `*_target_rate` is
/// compliance on the instances that ask for the feature, `None` when none do.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StyleHitReport {
    pub instances: usize,
    pub first_person_hit_rate: f64,
    pub first_person_targeted: usize,
    pub first_person_target_rate: Option<f64>,
    pub exclamation_hit_rate: f64,
    pub exclamation_targeted: usize,
    pub exclamation_target_rate: Option<f64>,
    pub avg_len_by_bin: BTreeMap<LenBin, f64>,
}

pub fn is_first_person(toks: &[String]) -> bool {
    toks.iter().any(|t| FIRST_PERSON.contains(&t.as_str()))
}

pub fn style_hits<S: AsRef<str>>(mrs: &[MeaningRepresentation], outputs: &[S]) -> Result<StyleHitReport, StyleError> {
    if mrs.len() != outputs.len() {
        return Err(StyleError::LengthMismatch(mrs.len(), outputs.len()));
    }
    let mut fp_agree = 0usize;
    let mut fp_targeted = 0usize;
    let mut fp_complied = 0usize;
    let mut ex_agree = 0usize;
    let mut ex_targeted = 0usize;
    let mut ex_complied = 0usize;
    let mut lens: BTreeMap<LenBin, (usize, usize)> = BTreeMap::new();

    for (mr, out) in mrs.iter().zip(outputs) {
        let Some(targets) = mr.style else {
            return Err(StyleError::Variant(mr.variant));
        };
        let toks = words(out.as_ref());
        let fp = is_first_person(&toks);
        let ex = toks.iter().any(|t| t == "!");
        fp_agree += usize::from(fp == targets.first_person);
        ex_agree += usize::from(ex == targets.exclamation);
        if targets.first_person {
            fp_targeted += 1;
            fp_complied += usize::from(fp);
        }
        if targets.exclamation {
            ex_targeted += 1;
            ex_complied += usize::from(ex);
        }
        let entry = lens.entry(targets.len_bin).or_insert((0, 0));
        entry.0 += toks.iter().filter(|t| !is_punct(t)).count();
        entry.1 += 1;
    }
    let n = mrs.len();
    let rate = |hits: usize, of: usize| if of == 0 { 0.0 } else { hits as f64 / of as f64 };
    Ok(StyleHitReport {
        instances: n,
        first_person_hit_rate: rate(fp_agree, n),
        first_person_targeted: fp_targeted,
        first_person_target_rate: (fp_targeted > 0).then(|| rate(fp_complied, fp_targeted)),
        exclamation_hit_rate: rate(ex_agree, n),
        exclamation_targeted: ex_targeted,
        exclamation_target_rate: (ex_targeted > 0).then(|| rate(ex_complied, ex_targeted)),
        avg_len_by_bin: lens
            .into_iter()
            .map(|(bin, (words, count))| (bin, words as f64 / count as f64))
            .collect(),
    })
}
