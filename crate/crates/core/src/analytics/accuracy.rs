use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oculomotor::UserId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    /// Answer stated directly in the lecture.
    Easy,
    /// Requires combining material.
    Hard,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionSpec {
    pub id: String,
    pub difficulty: Difficulty,
    /// `[start, end)` of the related lecture material.
    pub segment: (i64, i64),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_options: Option<u32>,
}

impl QuestionSpec {
    pub fn validate(&self) -> Result<()> {
        if self.segment.0 >= self.segment.1 {
            return Err(Error::InvalidData(format!(
                "question `{}` has an empty segment",
                self.id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub user: UserId,
    pub question: String,
    pub correct: bool,
}

/// Mean correctness per difficulty; `None` when the user answered nothing in that subset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub easy: Option<f64>,
    pub hard: Option<f64>,
    pub overall: Option<f64>,
}

fn mean_flag(flags: &[bool]) -> Option<f64> {
    (!flags.is_empty()).then(|| flags.iter().filter(|c| **c).count() as f64 / flags.len() as f64)
}

fn difficulty_of<'a>(
    questions: &'a HashMap<&str, &QuestionSpec>,
    r: &ResponseRecord,
) -> Result<&'a QuestionSpec> {
    questions
        .get(r.question.as_str())
        .copied()
        .ok_or_else(|| Error::InvalidData(format!("unknown question id `{}`", r.question)))
}

/// Accuracy of one user's responses.
pub fn score_user(responses: &[&ResponseRecord], questions: &[QuestionSpec]) -> Result<Accuracy> {
    let index: HashMap<&str, &QuestionSpec> = questions.iter().map(|q| (q.id.as_str(), q)).collect();
    let (mut easy, mut hard) = (Vec::new(), Vec::new());
    for r in responses {
        match difficulty_of(&index, r)?.difficulty {
            Difficulty::Easy => easy.push(r.correct),
            Difficulty::Hard => hard.push(r.correct),
        }
    }
    let all: Vec<bool> = easy.iter().chain(&hard).copied().collect();
    Ok(Accuracy {
        easy: mean_flag(&easy),
        hard: mean_flag(&hard),
        overall: mean_flag(&all),
    })
}

/// Accuracy for every user with at least one response.
pub fn score_accuracy(
    responses: &[ResponseRecord],
    questions: &[QuestionSpec],
) -> Result<BTreeMap<UserId, Accuracy>> {
    let mut by_user: BTreeMap<&UserId, Vec<&ResponseRecord>> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    for r in responses {
        if !seen.insert((&r.user, r.question.as_str())) {
            return Err(Error::InvalidData(format!(
                "duplicate response for user `{}` question `{}`",
                r.user, r.question
            )));
        }
        by_user.entry(&r.user).or_default().push(r);
    }
    by_user
        .into_iter()
        .map(|(u, rs)| Ok((u.clone(), score_user(&rs, questions)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(id: &str, difficulty: Difficulty) -> QuestionSpec {
        QuestionSpec {
            id: id.into(),
            difficulty,
            segment: (0, 1000),
            n_options: None,
        }
    }

    fn r(q: &str, correct: bool) -> ResponseRecord {
        ResponseRecord {
            user: UserId::new("u1"),
            question: q.into(),
            correct,
        }
    }

    fn questions() -> Vec<QuestionSpec> {
        vec![
            q("e1", Difficulty::Easy),
            q("e2", Difficulty::Easy),
            q("e3", Difficulty::Easy),
            q("h1", Difficulty::Hard),
            q("h2", Difficulty::Hard),
        ]
    }

    #[test]
    fn mixed_accuracy() {
        let rs = [r("e1", true), r("e2", true), r("e3", false), r("h1", true), r("h2", false)];
        let acc = score_accuracy(&rs, &questions()).unwrap()[&UserId::new("u1")];
        assert!((acc.easy.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(acc.hard, Some(0.5));
        assert_eq!(acc.overall, Some(0.6));
    }

    #[test]
    fn all_correct_and_empty() {
        let rs = [r("e1", true), r("h1", true)];
        let acc = score_accuracy(&rs, &questions()).unwrap()[&UserId::new("u1")];
        assert_eq!((acc.easy, acc.hard, acc.overall), (Some(1.0), Some(1.0), Some(1.0)));
        assert_eq!(score_user(&[], &questions()).unwrap(), Accuracy::default());
    }

    #[test]
    fn unknown_question_is_an_error() {
        assert!(matches!(
            score_accuracy(&[r("zz", true)], &questions()),
            Err(Error::InvalidData(_))
        ));
        assert!(score_accuracy(&[r("e1", true), r("e1", false)], &questions()).is_err());
    }

    #[test]
    fn question_json_shape() {
        let qs: Vec<QuestionSpec> =
            serde_json::from_str(r#"[{"id":"q1","difficulty":"hard","segment":[30000,65000]}]"#).unwrap();
        assert_eq!(qs[0].segment, (30000, 65000));
        let resp: ResponseRecord = serde_json::from_str(r#"{"user":"u1","question":"q1","correct":true}"#).unwrap();
        assert!(resp.correct);
    }
}
