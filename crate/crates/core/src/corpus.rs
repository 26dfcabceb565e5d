//! Parallel MR → reference corpora: assembly, JSONL storage, splits,
//! train/test overlap and corpus statistics.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::extract::{build_mr, ExtractError};
use crate::lexicon::AttributeLexicon;
use crate::metrics::discourse::{detect_discourse, MarkerConfig};
use crate::metrics::entropy::entropy;
use crate::metrics::tokenize::{whitespace_tokens, word_count};
use crate::mr::{Adjective, MeaningRepresentation, Variant};
use crate::sentence::{passes_filter, FilterPolicy, ParsedSentence, RejectReason};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("duplicate instance id `{0}`")]
    DuplicateId(String),
    #[error("empty corpus")]
    Empty,
    #[error("invalid split fractions {0:?}: each must lie in (0,1) and they must sum to 1")]
    BadSplit([f64; 3]),
    #[error("variant mismatch: {0} vs {1}")]
    VariantMismatch(Variant, Variant),
    #[error("line {line}: {message}")]
    Record { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusInstance {
    pub id: String,
    pub mr: MeaningRepresentation,
    /// Original casing.
    pub reference: String,
    pub review_id: String,
    pub business_id: String,
    pub stars: u8,
}

impl CorpusInstance {
    pub fn restrict(&self, variant: Variant) -> Option<CorpusInstance> {
        Some(CorpusInstance {
            mr: self.mr.restrict(variant)?,
            ..self.clone()
        })
    }

    pub fn to_record(&self, lowercase_reference: bool) -> InstanceRecord {
        InstanceRecord {
            id: self.id.clone(),
            variant: self.mr.variant,
            mr: self.mr.clone(),
            mr_text: self.mr.to_text(),
            reference: if lowercase_reference {
                self.reference.to_lowercase()
            } else {
                self.reference.clone()
            },
            review_id: self.review_id.clone(),
            business_id: self.business_id.clone(),
            stars: self.stars,
        }
    }
}

/// One JSONL line. Field order is the on-disk key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub id: String,
    pub variant: Variant,
    pub mr: MeaningRepresentation,
    pub mr_text: String,
    pub reference: String,
    pub review_id: String,
    pub business_id: String,
    pub stars: u8,
}

impl InstanceRecord {
    pub fn into_instance(self) -> Result<CorpusInstance, String> {
        self.mr.validate().map_err(|e| e.to_string())?;
        if self.mr.variant != self.variant {
            return Err(format!(
                "variant {} disagrees with mr variant {}",
                self.variant, self.mr.variant
            ));
        }
        if self.mr.to_text() != self.mr_text {
            return Err(format!("mr_text `{}` disagrees with mr", self.mr_text));
        }
        if self.reference.trim().is_empty() {
            return Err("empty reference".into());
        }
        Ok(CorpusInstance {
            id: self.id,
            mr: self.mr,
            reference: self.reference,
            review_id: self.review_id,
            business_id: self.business_id,
            stars: self.stars,
        })
    }
}

pub fn write_jsonl<W: Write>(mut w: W, instances: &[CorpusInstance], lowercase_reference: bool) -> std::io::Result<()> {
    for inst in instances {
        let line = serde_json::to_string(&inst.to_record(lowercase_reference)).map_err(std::io::Error::other)?;
        w.write_all(line.as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<CorpusInstance>, CorpusError> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record_err = |message: String| CorpusError::Record { line: i + 1, message };
        let rec: InstanceRecord = serde_json::from_str(&line).map_err(|e| record_err(e.to_string()))?;
        let inst = rec.into_instance().map_err(record_err)?;
        if !ids.insert(inst.id.clone()) {
            return Err(CorpusError::DuplicateId(inst.id));
        }
        out.push(inst);
    }
    Ok(out)
}

/// Result of running sentences through filtering and extraction.
#[derive(Debug, Clone, Default)]
pub struct BuildOutcome {
    /// +STYLE instances in input order.
    pub instances: Vec<CorpusInstance>,
    pub rejected: BTreeMap<RejectReason, usize>,
    pub without_values: usize,
}

/// Filters, extracts and numbers sentences. Multi-token values are recorded
/// in `lex` as they are found, in input order.
pub fn build_instances(
    sentences: &[ParsedSentence],
    lex: &mut AttributeLexicon,
    policy: &FilterPolicy,
) -> Result<BuildOutcome, CorpusError> {
    let mut outcome = BuildOutcome::default();
    let mut per_review: HashMap<&str, usize> = HashMap::new();
    let mut ids = HashSet::new();
    for s in sentences {
        let n = per_review.entry(s.review_id.as_str()).or_insert(0);
        *n += 1;
        if let Err(reason) = passes_filter(s, policy) {
            *outcome.rejected.entry(reason).or_insert(0) += 1;
            continue;
        }
        let built = match build_mr(s, lex, Variant::Style) {
            Ok(b) => b,
            Err(ExtractError::NoValues) => {
                outcome.without_values += 1;
                continue;
            }
        };
        for (tokens, attr) in &built.compounds {
            // A compound already typed differently stays as it is.
            let _ = lex.record_compound(tokens, *attr);
        }
        let id = s.sent_id.clone().unwrap_or_else(|| format!("{}#{}", s.review_id, n));
        if !ids.insert(id.clone()) {
            return Err(CorpusError::DuplicateId(id));
        }
        outcome.instances.push(CorpusInstance {
            id,
            mr: built.mr,
            reference: built.reference,
            review_id: s.review_id.clone(),
            business_id: s.business_id.clone(),
            stars: s.stars,
        });
    }
    Ok(outcome)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: f64,
    pub dev: f64,
    pub test: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train: 0.8,
            dev: 0.1,
            test: 0.1,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let f = [self.train, self.dev, self.test];
        if f.iter().any(|x| !(*x > 0.0 && *x < 1.0)) || (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(CorpusError::BadSplit(f));
        }
        Ok(())
    }

    /// Split sizes by largest remainder; each is within 1 of `n · fraction`.
    pub fn sizes(&self, n: usize) -> [usize; 3] {
        let fracs = [self.train, self.dev, self.test];
        let exact: Vec<f64> = fracs.iter().map(|f| f * n as f64).collect();
        let mut sizes: [usize; 3] = [0; 3];
        for i in 0..3 {
            sizes[i] = exact[i].floor() as usize;
        }
        let mut left = n - sizes.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..3).collect();
        order.sort_by(|&a, &b| {
            let ra = exact[a] - exact[a].floor();
            let rb = exact[b] - exact[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for i in order {
            if left == 0 {
                break;
            }
            sizes[i] += 1;
            left -= 1;
        }
        sizes
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Split {
    pub train: Vec<CorpusInstance>,
    pub dev: Vec<CorpusInstance>,
    pub test: Vec<CorpusInstance>,
}

/// Seeded hash of an instance id.
pub fn id_key(seed: u64, id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(id.as_bytes());
    let digest = h.finalize();
    u64::from_be_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// Ranks instances by a seeded hash of their id and cuts the ranking at the
/// split sizes. Each split keeps input order.
pub fn split_corpus(instances: &[CorpusInstance], spec: &SplitSpec) -> Result<Split, CorpusError> {
    spec.validate()?;
    if instances.is_empty() {
        return Err(CorpusError::Empty);
    }
    let mut ranked: Vec<(u64, &str, usize)> = instances
        .iter()
        .enumerate()
        .map(|(i, inst)| (id_key(spec.seed, &inst.id), inst.id.as_str(), i))
        .collect();
    ranked.sort_unstable();
    let [train_n, dev_n, _] = spec.sizes(instances.len());
    let mut bucket = vec![2u8; instances.len()];
    for (rank, (_, _, i)) in ranked.iter().enumerate() {
        bucket[*i] = if rank < train_n {
            0
        } else if rank < train_n + dev_n {
            1
        } else {
            2
        };
    }
    let mut split = Split::default();
    for (inst, b) in instances.iter().zip(bucket) {
        match b {
            0 => split.train.push(inst.clone()),
            1 => split.dev.push(inst.clone()),
            _ => split.test.push(inst.clone()),
        }
    }
    Ok(split)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Overlap {
    pub pct_test_mrs_in_train: f64,
    pub pct_test_pairs_in_train: f64,
}

fn common_variant(instances: &[CorpusInstance]) -> Result<Option<Variant>, CorpusError> {
    let mut variant = None;
    for inst in instances {
        match variant {
            None => variant = Some(inst.mr.variant),
            Some(v) if v != inst.mr.variant => return Err(CorpusError::VariantMismatch(v, inst.mr.variant)),
            _ => {}
        }
    }
    Ok(variant)
}

/// Share of test MRs (and MR–reference pairs) that also occur in train.
pub fn overlap_report(train: &[CorpusInstance], test: &[CorpusInstance]) -> Result<Overlap, CorpusError> {
    if let (Some(a), Some(b)) = (common_variant(train)?, common_variant(test)?) {
        if a != b {
            return Err(CorpusError::VariantMismatch(a, b));
        }
    }
    let mrs: HashSet<String> = train.iter().map(|i| i.mr.to_text()).collect();
    let pairs: HashSet<(String, String)> = train
        .iter()
        .map(|i| (i.mr.to_text(), i.reference.to_lowercase()))
        .collect();
    if test.is_empty() {
        return Ok(Overlap {
            pct_test_mrs_in_train: 0.0,
            pct_test_pairs_in_train: 0.0,
        });
    }
    let mut mr_hits = 0usize;
    let mut pair_hits = 0usize;
    for inst in test {
        let text = inst.mr.to_text();
        if mrs.contains(&text) {
            mr_hits += 1;
        }
        if pairs.contains(&(text, inst.reference.to_lowercase())) {
            pair_hits += 1;
        }
    }
    let pct = |k: usize| 100.0 * k as f64 / test.len() as f64;
    Ok(Overlap {
        pct_test_mrs_in_train: pct(mr_hits),
        pct_test_pairs_in_train: pct(pair_hits),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub size: usize,
    /// Distinct lowercased whitespace tokens, punctuation included.
    pub vocab_size: usize,
    /// Distinct adjective slot fillers (no_adj excluded).
    pub n_adjectives: usize,
    /// Trigram entropy in bits; `None` when no reference has three tokens.
    pub entropy: Option<f64>,
    /// Mean non-punctuation words per reference.
    pub avg_ref_len: f64,
    pub pct_contrast: f64,
    pub pct_aggregation: f64,
    pub mr_len_histogram: BTreeMap<usize, usize>,
}

pub fn corpus_stats(instances: &[CorpusInstance], markers: &MarkerConfig) -> Result<CorpusStats, CorpusError> {
    if instances.is_empty() {
        return Err(CorpusError::Empty);
    }
    let refs: Vec<String> = instances.iter().map(|i| i.reference.to_lowercase()).collect();
    let vocab: HashSet<String> = refs.iter().flat_map(|r| whitespace_tokens(r)).collect();
    let adjectives: HashSet<&str> = instances
        .iter()
        .flat_map(|i| i.mr.tuples.iter())
        .filter_map(|t| match &t.adj {
            Some(Adjective::Word(w)) => Some(w.as_str()),
            _ => None,
        })
        .collect();
    let mut contrast = 0usize;
    let mut aggregation = 0usize;
    let mut words = 0usize;
    let mut hist = BTreeMap::new();
    for (inst, r) in instances.iter().zip(&refs) {
        let d = detect_discourse(r, markers);
        contrast += usize::from(d.contrast);
        aggregation += usize::from(d.aggregation);
        words += word_count(r);
        *hist.entry(inst.mr.tuples.len()).or_insert(0) += 1;
    }
    let n = instances.len() as f64;
    Ok(CorpusStats {
        size: instances.len(),
        vocab_size: vocab.len(),
        n_adjectives: adjectives.len(),
        entropy: entropy(&refs).ok(),
        avg_ref_len: words as f64 / n,
        pct_contrast: 100.0 * contrast as f64 / n,
        pct_aggregation: 100.0 * aggregation as f64 / n,
        mr_len_histogram: hist,
    })
}

impl CorpusStats {
    /// Fixed-layout text rendering.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<22}{:>12}", "size", self.size);
        let _ = writeln!(out, "{:<22}{:>12}", "vocab", self.vocab_size);
        let _ = writeln!(out, "{:<22}{:>12}", "adjectives", self.n_adjectives);
        let entropy = self.entropy.map_or("-".to_string(), |e| format!("{e:.4}"));
        let _ = writeln!(out, "{:<22}{:>12}", "entropy (bits)", entropy);
        let _ = writeln!(out, "{:<22}{:>12.2}", "avg ref length", self.avg_ref_len);
        let _ = writeln!(out, "{:<22}{:>11.2}%", "refs w/ contrast", self.pct_contrast);
        let _ = writeln!(out, "{:<22}{:>11.2}%", "refs w/ aggregation", self.pct_aggregation);
        let _ = writeln!(out, "tuples per MR:");
        for (len, freq) in &self.mr_len_histogram {
            let _ = writeln!(out, "  {len:>3} {freq:>10}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::AttributeType;
    use crate::mr::{LenBin, MrTuple, Sentiment, StyleFeatures};
    use proptest::prelude::*;

    pub(crate) fn instance(id: &str, values: &[&str], reference: &str) -> CorpusInstance {
        let tuples: Vec<MrTuple> = values
            .iter()
            .map(|v| MrTuple {
                attr: AttributeType::Food,
                value: v.to_string(),
                adj: Some(Adjective::None),
                mention: Some(1),
            })
            .collect();
        let style = StyleFeatures {
            sentiment: Sentiment::Positive,
            len_bin: LenBin::Short,
            first_person: false,
            exclamation: false,
        };
        CorpusInstance {
            id: id.to_string(),
            mr: MeaningRepresentation::project(&tuples, style, Variant::Style),
            reference: reference.to_string(),
            review_id: "r".into(),
            business_id: "b".into(),
            stars: 5,
        }
    }

    fn numbered(n: usize) -> Vec<CorpusInstance> {
        (0..n)
            .map(|i| instance(&format!("i{i}"), &["beef"], "the beef"))
            .collect()
    }

    #[test]
    fn ten_instances_split_eight_one_one() {
        let s = split_corpus(&numbered(10), &SplitSpec::default()).unwrap();
        assert_eq!((s.train.len(), s.dev.len(), s.test.len()), (8, 1, 1));
        let again = split_corpus(&numbered(10), &SplitSpec::default()).unwrap();
        assert_eq!(s, again);
        let other = split_corpus(
            &numbered(10),
            &SplitSpec {
                seed: 7,
                ..SplitSpec::default()
            },
        )
        .unwrap();
        assert_eq!(other.train.len(), 8);
    }

    #[test]
    fn degenerate_fractions_are_rejected() {
        for (a, b, c) in [(1.0, 0.0, 0.0), (0.5, 0.5, 0.1), (0.8, 0.3, -0.1)] {
            let spec = SplitSpec {
                train: a,
                dev: b,
                test: c,
                seed: 0,
            };
            assert!(matches!(
                split_corpus(&numbered(3), &spec),
                Err(CorpusError::BadSplit(_))
            ));
        }
        assert!(matches!(
            split_corpus(&[], &SplitSpec::default()),
            Err(CorpusError::Empty)
        ));
    }

    #[test]
    fn overlap_edge_cases() {
        let train = vec![instance("a", &["beef"], "the beef"), instance("b", &["rice"], "rice")];
        let disjoint = vec![instance("c", &["crab"], "crab")];
        assert_eq!(
            overlap_report(&train, &disjoint).unwrap(),
            Overlap {
                pct_test_mrs_in_train: 0.0,
                pct_test_pairs_in_train: 0.0
            }
        );
        assert_eq!(
            overlap_report(&train, &train).unwrap(),
            Overlap {
                pct_test_mrs_in_train: 100.0,
                pct_test_pairs_in_train: 100.0
            }
        );
        let base: Vec<_> = disjoint.iter().map(|i| i.restrict(Variant::Base).unwrap()).collect();
        assert!(matches!(
            overlap_report(&train, &base),
            Err(CorpusError::VariantMismatch(..))
        ));
    }

    #[test]
    fn stats_of_tiny_corpora() {
        let m = MarkerConfig::default();
        let one = corpus_stats(&[instance("a", &["beef"], "a b c d")], &m).unwrap();
        assert_eq!(one.vocab_size, 4);
        // "a b c d" has two distinct trigrams.
        assert_eq!(one.entropy, Some(1.0));
        let two = corpus_stats(
            &[
                instance("a", &["beef"], "a b c"),
                instance("b", &["beef", "rice"], "A B C"),
            ],
            &m,
        )
        .unwrap();
        assert_eq!(two.vocab_size, 3);
        assert_eq!(two.entropy, Some(0.0));
        assert_eq!(two.mr_len_histogram, BTreeMap::from([(1, 1), (2, 1)]));
        assert!(corpus_stats(&[], &m).is_err());
        let short = corpus_stats(&[instance("a", &["beef"], "beef !")], &m).unwrap();
        assert_eq!(short.entropy, None);
        assert!(short.to_table().contains("entropy (bits)"));
    }

    #[test]
    fn jsonl_round_trip_and_key_order() {
        let inst = instance("x1", &["chicken_wrap"], "I had a Chicken Wrap .");
        let mut buf = Vec::new();
        write_jsonl(&mut buf, std::slice::from_ref(&inst), true).unwrap();
        let line = String::from_utf8(buf.clone()).unwrap();
        let keys = [
            "\"id\"",
            "\"variant\"",
            "\"mr\"",
            "\"mr_text\"",
            "\"reference\"",
            "\"review_id\"",
            "\"business_id\"",
            "\"stars\"",
        ];
        let positions: Vec<usize> = keys.iter().map(|k| line.find(k).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "{line}");
        assert!(line.contains("i had a chicken wrap ."));
        let back = read_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back[0].mr, inst.mr);
        assert_eq!(back[0].reference, "i had a chicken wrap .");

        let tampered = line.replace("val=chicken_wrap", "val=beef");
        assert!(matches!(
            read_jsonl(tampered.as_bytes()),
            Err(CorpusError::Record { line: 1, .. })
        ));
        let twice = format!("{line}{line}");
        assert!(matches!(read_jsonl(twice.as_bytes()), Err(CorpusError::DuplicateId(_))));
    }

    proptest! {
        #[test]
        fn split_sizes_track_fractions(n in 1usize..5000, seed in any::<u64>()) {
            let spec = SplitSpec { seed, ..SplitSpec::default() };
            let sizes = spec.sizes(n);
            prop_assert_eq!(sizes.iter().sum::<usize>(), n);
            for (size, f) in sizes.iter().zip([spec.train, spec.dev, spec.test]) {
                prop_assert!((*size as f64 - f * n as f64).abs() <= 1.0);
            }
        }

        #[test]
        fn split_is_a_partition(n in 1usize..300, seed in any::<u64>()) {
            let data = numbered(n);
            let s = split_corpus(&data, &SplitSpec { seed, ..SplitSpec::default() }).unwrap();
            let mut ids: Vec<&str> = s.train.iter().chain(&s.dev).chain(&s.test).map(|i| i.id.as_str()).collect();
            prop_assert_eq!(ids.len(), n);
            ids.sort_unstable();
            ids.dedup();
            prop_assert_eq!(ids.len(), n);
        }

        #[test]
        fn histogram_totals_size(lens in proptest::collection::vec(1usize..6, 1..50)) {
            let data: Vec<_> = lens
                .iter()
                .enumerate()
                .map(|(i, k)| instance(&format!("i{i}"), &vec!["beef"; *k], "the beef was good"))
                .collect();
            let st = corpus_stats(&data, &MarkerConfig::default()).unwrap();
            prop_assert_eq!(st.mr_len_histogram.values().sum::<usize>(), data.len());
            prop_assert!((0.0..=100.0).contains(&st.pct_contrast));
        }
    }
}
