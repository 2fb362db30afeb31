//! Per-epoch retained counts, as recorded from a run or predicted by a
//! model, and their `epoch,retained` CSV form.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const SCHEDULE_HEADER: &str = "epoch,retained";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub epoch: usize,
    pub retained: usize,
}

/// Retained counts for epochs `1..=E` of a dataset of `n` samples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleRecord {
    n: usize,
    entries: Vec<ScheduleEntry>,
}

impl ScheduleRecord {
    /// `retained[i]` is the count for epoch `i + 1`.
    pub fn new(n: usize, retained: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("schedule needs N > 0".into()));
        }
        if retained.is_empty() {
            return Err(Error::Domain("schedule has no epochs".into()));
        }
        if let Some((i, k)) = retained.iter().enumerate().find(|(_, &k)| k > n) {
            return Err(Error::Domain(format!(
                "epoch {} retains {k} > N={n}",
                i + 1
            )));
        }
        let entries = retained
            .into_iter()
            .enumerate()
            .map(|(i, retained)| ScheduleEntry {
                epoch: i + 1,
                retained,
            })
            .collect();
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epochs(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[ScheduleEntry] {
        &self.entries
    }

    pub fn retained(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.retained).collect()
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|e| e.retained as u64).sum()
    }

    pub fn effective_epochs(&self) -> f64 {
        self.total() as f64 / self.n as f64
    }

    /// A replayable schedule ends with a full-data epoch.
    pub fn ends_with_revision(&self) -> bool {
        self.entries.last().is_some_and(|e| e.retained == self.n)
    }

    pub fn to_csv(&self) -> Result<String> {
        if !self.ends_with_revision() {
            return Err(Error::Domain(format!(
                "missing revision epoch: last epoch retains {} of N={}",
                self.entries.last().map_or(0, |e| e.retained),
                self.n
            )));
        }
        let mut out = String::with_capacity(16 * (self.entries.len() + 1));
        out.push_str(SCHEDULE_HEADER);
        out.push('\n');
        for e in &self.entries {
            writeln!(out, "{},{}", e.epoch, e.retained).expect("string write");
        }
        Ok(out)
    }

    /// Parses the CSV form. `N` is not stored in the file: when `expected_n`
    /// is `None` it is taken as the largest count, which the revision epoch
    /// must reach.
    pub fn parse(text: &str, path: &Path, expected_n: Option<usize>) -> Result<Self> {
        let err = |line: usize, reason: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let body = text.strip_suffix('\n').unwrap_or(text);
        let mut lines = body.split('\n').enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, SCHEDULE_HEADER)) => {}
            Some((line, other)) => {
                return Err(err(
                    line,
                    format!("expected header '{SCHEDULE_HEADER}', found '{other}'"),
                ))
            }
            None => return Err(err(1, "empty file".into())),
        }

        let mut retained = Vec::new();
        let mut last_line = 1;
        for (line, text) in lines {
            last_line = line;
            let (e, k) = text
                .split_once(',')
                .ok_or_else(|| err(line, format!("expected 'epoch,retained', found '{text}'")))?;
            let epoch: usize = e
                .parse()
                .map_err(|_| err(line, format!("invalid epoch '{e}'")))?;
            let count: usize = k
                .parse()
                .map_err(|_| err(line, format!("invalid retained count '{k}'")))?;
            if epoch != retained.len() + 1 {
                return Err(err(
                    line,
                    format!("expected epoch {}, found {epoch}", retained.len() + 1),
                ));
            }
            if let Some(n) = expected_n {
                if count > n {
                    return Err(err(line, format!("retained {count} exceeds N={n}")));
                }
            }
            retained.push(count);
        }
        if retained.is_empty() {
            return Err(err(last_line, "no epochs after header".into()));
        }

        let max = *retained.iter().max().expect("non-empty");
        let n = expected_n.unwrap_or(max);
        let last = *retained.last().expect("non-empty");
        if last != n {
            return Err(err(
                last_line,
                format!("missing revision epoch: last epoch retains {last}, expected N={n}"),
            ));
        }
        Self::new(n, retained).map_err(|e| err(last_line, e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path, expected_n: Option<usize>) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path, expected_n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, n: Option<usize>) -> Result<ScheduleRecord> {
        ScheduleRecord::parse(text, Path::new("sched.csv"), n)
    }

    #[test]
    fn three_epoch_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let rec = ScheduleRecord::new(100, vec![100, 40, 100]).unwrap();
        rec.write(&path).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            "epoch,retained\n1,100\n2,40\n3,100\n"
        );
        assert_eq!(ScheduleRecord::read(&path, Some(100)).unwrap(), rec);
        assert_eq!(ScheduleRecord::read(&path, None).unwrap(), rec);
    }

    #[test]
    fn count_above_n_is_rejected() {
        let err = parse("epoch,retained\n1,101\n2,100\n", Some(100)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(ScheduleRecord::new(10, vec![11]).is_err());
    }

    #[test]
    fn missing_revision_is_rejected() {
        let err = parse("epoch,retained\n1,100\n2,30\n", Some(100)).unwrap_err();
        assert!(err.to_string().contains("missing revision epoch"), "{err}");
        let err = parse("epoch,retained\n1,100\n2,30\n", None).unwrap_err();
        assert!(err.to_string().contains("missing revision epoch"), "{err}");
        assert!(ScheduleRecord::new(100, vec![100, 30])
            .unwrap()
            .to_csv()
            .is_err());
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let cases = [
            ("epoch,kept\n1,1\n", 1),
            ("epoch,retained\n1,5\n3,5\n", 3),
            ("epoch,retained\n1;5\n", 2),
            ("epoch,retained\n1,five\n", 2),
            ("epoch,retained\n1,5 \n", 2),
            ("epoch,retained\n1,5\n\n", 3),
            ("epoch,retained\n", 1),
        ];
        for (text, line) in cases {
            match parse(text, None) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn final_newline_is_optional() {
        let rec = parse("epoch,retained\n1,7\n2,7", None).unwrap();
        assert_eq!(rec.retained(), vec![7, 7]);
    }
}
