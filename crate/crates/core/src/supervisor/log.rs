use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dir {
    #[serde(rename = "cc->fd")]
    CcToFd,
    #[serde(rename = "fd->cc")]
    FdToCc,
    #[serde(rename = "supervisor")]
    Supervisor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    AssertEq,
    AssertDiff,
    PostAllDiff,
    NewTerm,
    PairEq,
    PairDiff,
    Decision,
    Backtrack,
    VerdictSat,
    VerdictUnsat,
    VerdictUnknown,
}

/// One exchange between the engines, as recorded by the supervisor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub round: u64,
    pub dir: Dir,
    pub kind: Kind,
    pub terms: Vec<String>,
}

/// Message log rendered as JSON lines.
pub fn to_jsonl(log: &[Message]) -> String {
    let mut out = String::new();
    for m in log {
        out.push_str(&serde_json::to_string(m).expect("messages serialize"));
        out.push('\n');
    }
    out
}

pub fn from_jsonl(text: &str) -> Result<Vec<Message>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}
