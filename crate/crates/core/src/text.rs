//! Recognition scoring and the deterministic stand-in recognizer.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::rng::{derive_seed, mix64};

/// Levenshtein distance over Unicode scalar values.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = Vec::with_capacity(b.len() + 1);
    for (i, ca) in a.iter().enumerate() {
        cur.clear();
        cur.push(i + 1);
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur.push(sub.min(prev[j + 1] + 1).min(cur[j] + 1));
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Character error rate `edit_distance / reference length`. `None` when
/// the reference is empty.
pub fn cer(predicted: &str, reference: &str) -> Option<f64> {
    let n = reference.chars().count();
    (n > 0).then(|| edit_distance(predicted, reference) as f64 / n as f64)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RecognitionResult {
    pub crop_id: String,
    pub text: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WordScore {
    pub crop_id: String,
    pub reference: String,
    pub predicted: String,
    pub correct: bool,
    pub edits: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WordReport {
    pub evaluated: usize,
    pub correct: usize,
    pub accuracy: Option<f64>,
    /// Total edits over total reference characters.
    pub cer: Option<f64>,
    pub words: Vec<WordScore>,
    /// Ids with a prediction but no reference.
    pub missing_reference: Vec<String>,
    /// Ids with a reference but no prediction.
    pub missing_prediction: Vec<String>,
}

/// Exact-match word accuracy and aggregate CER over the crop ids present in
/// both inputs. Comparison is case-sensitive unless `ignore_case` is set.
pub fn word_accuracy(
    results: &[RecognitionResult],
    truth: &BTreeMap<String, String>,
    ignore_case: bool,
) -> WordReport {
    let predicted: BTreeMap<&str, &str> = results
        .iter()
        .map(|r| (r.crop_id.as_str(), r.text.as_str()))
        .collect();
    let norm = |s: &str| -> String {
        if ignore_case {
            s.to_lowercase()
        } else {
            String::from(s)
        }
    };
    let mut words = Vec::new();
    let mut missing_prediction = Vec::new();
    let (mut edits, mut chars) = (0usize, 0usize);
    for (id, reference) in truth {
        let Some(&pred) = predicted.get(id.as_str()) else {
            missing_prediction.push(id.clone());
            continue;
        };
        let (p, r) = (norm(pred), norm(reference));
        let e = edit_distance(&p, &r);
        edits += e;
        chars += r.chars().count();
        words.push(WordScore {
            crop_id: id.clone(),
            reference: reference.clone(),
            predicted: String::from(pred),
            correct: p == r,
            edits: e,
        });
    }
    let missing_reference = predicted
        .keys()
        .filter(|id| !truth.contains_key(**id))
        .map(|id| String::from(*id))
        .collect();
    let correct = words.iter().filter(|w| w.correct).count();
    let evaluated = words.len();
    WordReport {
        evaluated,
        correct,
        accuracy: (evaluated > 0).then(|| correct as f64 / evaluated as f64),
        cer: (chars > 0).then(|| edits as f64 / chars as f64),
        words,
        missing_reference,
        missing_prediction,
    }
}

/// Deterministic fake recognition of one crop: a lexicon word and a
/// confidence in `[0, 1)`, both hashed from the crop id and seed.
pub fn mock_recognize(crop_id: &str, lexicon: &[String], seed: u64) -> Result<RecognitionResult> {
    if lexicon.is_empty() {
        return Err(CoreError::Empty("mock recognizer needs a non-empty lexicon"));
    }
    let h = derive_seed(seed, crop_id);
    let word = &lexicon[(h % lexicon.len() as u64) as usize];
    let confidence = (mix64(h) >> 11) as f64 / (1u64 << 53) as f64;
    Ok(RecognitionResult {
        crop_id: String::from(crop_id),
        text: word.clone(),
        confidence,
    })
}
