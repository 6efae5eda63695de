//! Append-only persistence of extractions and operator corrections.
//!
//! Each line of the log is one JSON event. State is never rewritten on disk;
//! opening a store replays the log from the beginning.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::schema::KtpRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReviewStatus {
    PendingReview,
    Reviewed,
    AutoAccepted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correction {
    pub field: String,
    pub old: String,
    pub new: String,
    pub timestamp: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredResult {
    pub record_id: String,
    pub record: KtpRecord,
    pub flagged_fields: Vec<String>,
    pub status: ReviewStatus,
    pub revision: u64,
    pub corrections: Vec<Correction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
enum Event {
    Extracted {
        record_id: String,
        record: KtpRecord,
        flagged_fields: Vec<String>,
        timestamp: String,
    },
    Corrected {
        record_id: String,
        /// Revision the batch was based on.
        base_revision: u64,
        corrections: Vec<Correction>,
    },
}

/// Content address of an input image.
pub fn record_id(image_bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(image_bytes))
}

#[derive(Debug, Default)]
pub struct Store {
    path: Option<PathBuf>,
    log: Option<File>,
    results: BTreeMap<String, StoredResult>,
    /// Extraction order, for a stable review queue.
    order: Vec<String>,
}

impl Store {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens or creates the log at `path` and replays it.
    pub fn open(path: &Path) -> Result<Self> {
        let mut store = Self {
            path: Some(path.to_path_buf()),
            ..Self::default()
        };
        if path.exists() {
            let reader = BufReader::new(File::open(path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let event: Event = serde_json::from_str(&line)
                    .map_err(|e| Error::Config(format!("{} line {}: {e}", path.display(), i + 1)))?;
                store.apply(event)?;
            }
        }
        store.log = Some(OpenOptions::new().create(true).append(true).open(path)?);
        Ok(store)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.results.len()
    }

    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&StoredResult> {
        self.results.get(id)
    }

    /// Records awaiting review, oldest extraction first.
    pub fn review_queue(&self) -> Vec<&StoredResult> {
        self.order
            .iter()
            .map(|id| &self.results[id])
            .filter(|r| r.status == ReviewStatus::PendingReview)
            .collect()
    }

    /// Stores a fresh extraction. An id already present is returned as is,
    /// so extracting the same image twice changes nothing.
    pub fn insert_extraction(
        &mut self,
        id: &str,
        record: KtpRecord,
        flagged_fields: Vec<String>,
    ) -> Result<StoredResult> {
        if let Some(existing) = self.results.get(id) {
            return Ok(existing.clone());
        }
        let event = Event::Extracted {
            record_id: id.to_string(),
            record,
            flagged_fields,
            timestamp: now(),
        };
        self.append(&event)?;
        self.apply(event)?;
        Ok(self.results[id].clone())
    }

    /// Applies one batch of operator edits, based on `revision`.
    ///
    /// Values are validated against the record rules. An empty batch still
    /// confirms the record and bumps the revision.
    pub fn apply_corrections(
        &mut self,
        id: &str,
        revision: u64,
        edits: &BTreeMap<String, String>,
    ) -> Result<StoredResult> {
        let current = self
            .results
            .get(id)
            .ok_or_else(|| Error::UnknownRecord(id.to_string()))?;
        if current.status == ReviewStatus::AutoAccepted {
            return Err(Error::Terminal(id.to_string()));
        }
        if current.revision != revision {
            return Err(Error::Conflict {
                requested: revision,
                current: current.revision,
            });
        }
        let mut probe = current.record.clone();
        let ts = now();
        let mut corrections = Vec::new();
        for (field, new) in edits {
            let old = probe.text(field).unwrap_or_default().to_string();
            probe.set_text(field, new)?;
            corrections.push(Correction {
                field: field.clone(),
                old,
                new: new.clone(),
                timestamp: ts.clone(),
            });
        }
        let event = Event::Corrected {
            record_id: id.to_string(),
            base_revision: revision,
            corrections,
        };
        self.append(&event)?;
        self.apply(event)?;
        Ok(self.results[id].clone())
    }

    fn append(&mut self, event: &Event) -> Result<()> {
        if let Some(f) = &mut self.log {
            let mut line = serde_json::to_string(event)?;
            line.push('\n');
            f.write_all(line.as_bytes())?;
            f.flush()?;
            f.sync_data()?;
        }
        Ok(())
    }

    fn apply(&mut self, event: Event) -> Result<()> {
        match event {
            Event::Extracted {
                record_id,
                record,
                flagged_fields,
                ..
            } => {
                if self.results.contains_key(&record_id) {
                    return Ok(());
                }
                let status = if flagged_fields.is_empty() {
                    ReviewStatus::AutoAccepted
                } else {
                    ReviewStatus::PendingReview
                };
                self.order.push(record_id.clone());
                self.results.insert(
                    record_id.clone(),
                    StoredResult {
                        record_id,
                        record,
                        flagged_fields,
                        status,
                        revision: 0,
                        corrections: Vec::new(),
                    },
                );
            }
            Event::Corrected {
                record_id,
                base_revision,
                corrections,
            } => {
                let r = self
                    .results
                    .get_mut(&record_id)
                    .ok_or_else(|| Error::UnknownRecord(record_id.clone()))?;
                if r.revision != base_revision || r.status == ReviewStatus::AutoAccepted {
                    return Err(Error::Consistency(format!(
                        "log correction of {record_id} at revision {base_revision} does not apply"
                    )));
                }
                for c in &corrections {
                    r.record.set_text(&c.field, &c.new)?;
                }
                r.corrections.extend(corrections);
                r.revision += 1;
                r.status = ReviewStatus::Reviewed;
            }
        }
        Ok(())
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flagged_record() -> (KtpRecord, Vec<String>) {
        let rec = KtpRecord {
            blood_type: "O".into(),
            religion: "ISLAM".into(),
            religion_conf: 18,
            ..KtpRecord::default()
        };
        (rec, vec!["religion".into()])
    }

    fn edits(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn id_is_sha256_hex() {
        assert_eq!(
            record_id(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn status_follows_flags() {
        let mut s = Store::in_memory();
        let (rec, flags) = flagged_record();
        assert_eq!(
            s.insert_extraction("a", rec.clone(), flags).unwrap().status,
            ReviewStatus::PendingReview
        );
        assert_eq!(
            s.insert_extraction("b", rec, vec![]).unwrap().status,
            ReviewStatus::AutoAccepted
        );
        assert_eq!(s.review_queue().len(), 1);
    }

    #[test]
    fn corrections_revision_and_conflicts() {
        let mut s = Store::in_memory();
        let (rec, flags) = flagged_record();
        s.insert_extraction("a", rec, flags).unwrap();
        let r = s.apply_corrections("a", 0, &edits(&[("religion", "HINDU")])).unwrap();
        assert_eq!(
            (r.revision, r.status, r.record.religion.as_str()),
            (1, ReviewStatus::Reviewed, "HINDU")
        );
        assert_eq!(r.corrections[0].old, "ISLAM");
        assert!(s.review_queue().is_empty());
        assert!(matches!(
            s.apply_corrections("a", 0, &edits(&[])),
            Err(Error::Conflict {
                requested: 0,
                current: 1
            })
        ));
        assert!(matches!(
            s.apply_corrections("a", 1, &edits(&[("identifier", "123")])),
            Err(Error::Validation { .. })
        ));
        assert_eq!(s.get("a").unwrap().revision, 1);
        let confirmed = s.apply_corrections("a", 1, &edits(&[])).unwrap();
        assert_eq!(confirmed.revision, 2);
        assert!(matches!(
            s.apply_corrections("zz", 0, &edits(&[])),
            Err(Error::UnknownRecord(_))
        ));
    }

    #[test]
    fn auto_accepted_is_terminal() {
        let mut s = Store::in_memory();
        s.insert_extraction("b", KtpRecord::default(), vec![]).unwrap();
        assert!(matches!(
            s.apply_corrections("b", 0, &edits(&[])),
            Err(Error::Terminal(_))
        ));
    }

    #[test]
    fn replay_reconstructs_state() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let (rec, flags) = flagged_record();
        let snapshot = {
            let mut s = Store::open(&path).unwrap();
            s.insert_extraction("a", rec.clone(), flags.clone()).unwrap();
            s.insert_extraction("a", KtpRecord::default(), vec![]).unwrap();
            s.insert_extraction("b", rec, vec![]).unwrap();
            s.apply_corrections("a", 0, &edits(&[("bloodType", "AB")])).unwrap();
            s.apply_corrections("a", 1, &edits(&[("name", "SITI")])).unwrap();
            (s.get("a").cloned(), s.get("b").cloned())
        };
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
        let reopened = Store::open(&path).unwrap();
        assert_eq!((reopened.get("a").cloned(), reopened.get("b").cloned()), snapshot);
        assert_eq!(reopened.get("a").unwrap().record.name, "SITI");
    }

    #[test]
    fn log_prefix_is_never_rewritten() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let mut s = Store::open(&path).unwrap();
        let (rec, flags) = flagged_record();
        s.insert_extraction("a", rec, flags).unwrap();
        let before = std::fs::read(&path).unwrap();
        s.apply_corrections("a", 0, &edits(&[("religion", "HINDU")])).unwrap();
        let after = std::fs::read(&path).unwrap();
        assert!(after.starts_with(&before) && after.len() > before.len());
    }
}
