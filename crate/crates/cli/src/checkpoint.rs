//! Sweep checkpoint files.
//!
//! ```text
//! pellsieve-checkpoint 1 a=2..=100 b=3..=100 n=2..=200 m=1
//! pair 2 3
//! pair 2 10 1:2:14 1:6:7874
//! digest 5f0c…
//! ```
//!
//! One `pair` line per completed `(a, b)` pair, listing its hits as
//! `m:n:x`, in completion order. The digest is the SHA-256 of every line
//! above it and is written when the sweep finishes. A truncated final line
//! (from an interrupted run) is discarded on resume.

use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;

use pellsieve::search::PairReport;
use pellsieve::{MPolicy, Natural, SearchHit, SearchQuery};
use sha2::{Digest, Sha256};

use crate::Failure;

const MAGIC: &str = "pellsieve-checkpoint 1";

pub(crate) struct Checkpoint {
    file: File,
    hasher: Sha256,
    done: BTreeMap<(u64, u64), Vec<SearchHit>>,
    order: Vec<(u64, u64)>,
    hits: Vec<SearchHit>,
}

fn header(query: &SearchQuery) -> String {
    let m = match query.m_policy {
        MPolicy::Fixed(m) => m.to_string(),
        MPolicy::AllBelowN => "all".into(),
    };
    format!(
        "{MAGIC} a={}..={} b={}..={} n={}..={} m={m}",
        query.a_range.start(),
        query.a_range.end(),
        query.b_range.start(),
        query.b_range.end(),
        query.n_range.start(),
        query.n_range.end(),
    )
}

fn corrupt(line_no: usize, why: &str) -> Failure {
    Failure::Inconsistent(format!("checkpoint line {line_no}: {why}"))
}

fn parse_pair(line: &str, line_no: usize) -> Result<((u64, u64), Vec<SearchHit>), Failure> {
    let mut fields = line.split(' ').skip(1);
    let mut num = || -> Result<u64, Failure> {
        fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| corrupt(line_no, "malformed pair"))
    };
    let (a, b) = (num()?, num()?);
    let hits = line
        .split(' ')
        .skip(3)
        .map(|h| {
            let parts: Vec<&str> = h.split(':').collect();
            match parts.as_slice() {
                [m, n, x] => Some(SearchHit {
                    a,
                    b,
                    m: m.parse().ok()?,
                    n: n.parse().ok()?,
                    x: x.parse::<Natural>().ok()?,
                }),
                _ => None,
            }
        })
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| corrupt(line_no, "malformed hit"))?;
    Ok(((a, b), hits))
}

impl Checkpoint {
    /// Opens `path` for `query`, loading and validating any earlier progress.
    pub fn open(path: &Path, query: &SearchQuery) -> Result<Self, Failure> {
        let head = header(query);
        let existing = match std::fs::read_to_string(path) {
            Ok(text) => Some(text),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
            Err(e) => return Err(e.into()),
        };

        let mut kept = vec![head.clone()];
        let mut done = BTreeMap::new();
        let mut order = Vec::new();
        if let Some(text) = existing {
            let complete = match text.rfind('\n') {
                Some(i) => &text[..=i],
                None => "",
            };
            let mut lines = complete.lines();
            match lines.next() {
                Some(first) if first == head => {}
                Some(_) => {
                    return Err(Failure::Usage(format!(
                        "checkpoint {} was written for a different query",
                        path.display()
                    )))
                }
                None => {}
            }
            let valid: HashSet<(u64, u64)> = query.pairs().into_iter().collect();
            let mut hasher = Sha256::new();
            hasher.update(format!("{head}\n"));
            let mut digest_seen = false;
            for (i, line) in lines.enumerate() {
                let line_no = i + 2;
                if digest_seen {
                    return Err(corrupt(line_no, "content after digest"));
                }
                if let Some(hex_digest) = line.strip_prefix("digest ") {
                    let expected = hex::encode(hasher.clone().finalize());
                    if hex_digest != expected {
                        return Err(corrupt(line_no, "digest mismatch"));
                    }
                    digest_seen = true;
                    continue;
                }
                if !line.starts_with("pair ") {
                    return Err(corrupt(line_no, "unrecognised line"));
                }
                let (pair, hits) = parse_pair(line, line_no)?;
                if !valid.contains(&pair) {
                    return Err(corrupt(line_no, "pair outside the query box"));
                }
                if done.insert(pair, hits).is_some() {
                    return Err(corrupt(line_no, "pair recorded twice"));
                }
                order.push(pair);
                hasher.update(format!("{line}\n"));
                kept.push(line.to_string());
            }
        }

        // Rewrite without the partial line and the old digest.
        let mut file = OpenOptions::new().create(true).write(true).truncate(true).open(path)?;
        let mut hasher = Sha256::new();
        for line in &kept {
            let line = format!("{line}\n");
            file.write_all(line.as_bytes())?;
            hasher.update(line);
        }
        file.flush()?;
        let hits = done.values().flatten().cloned().collect();
        Ok(Self { file, hasher, done, order, hits })
    }

    pub fn completed(&self) -> HashSet<(u64, u64)> {
        self.done.keys().copied().collect()
    }

    pub fn hits(&self) -> &[SearchHit] {
        &self.hits
    }

    pub fn hits_of(&self, a: u64, b: u64) -> Vec<SearchHit> {
        self.done.get(&(a, b)).cloned().unwrap_or_default()
    }

    /// Most recently recorded pair.
    pub fn last_pair(&self) -> Option<(u64, u64)> {
        self.order.last().copied()
    }

    pub fn record(&mut self, report: &PairReport) -> std::io::Result<()> {
        let mut line = format!("pair {} {}", report.a, report.b);
        for h in &report.hits {
            line.push_str(&format!(" {}:{}:{}", h.m, h.n, h.x));
        }
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.flush()?;
        self.hasher.update(line);
        Ok(())
    }

    pub fn finish(&mut self) -> std::io::Result<()> {
        let digest = hex::encode(self.hasher.clone().finalize());
        writeln!(self.file, "digest {digest}")?;
        self.file.sync_all()
    }
}
