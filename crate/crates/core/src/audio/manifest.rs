//! Corpus manifest: a UTF-8 CSV with header `file_path,subject_id,label`.
//! Relative file paths resolve against the manifest's directory.

use std::path::{Path, PathBuf};

use super::{class_from_name, ClassId, CLASS_NAMES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub file_path: PathBuf,
    pub subject_id: String,
    pub label: ClassId,
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Manifest(e.to_string()))?
        .clone();
    let expected = ["file_path", "subject_id", "label"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Manifest(format!(
            "header must be {expected:?}, got {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }

    let mut entries = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Manifest(format!("row {}: {e}", i + 2)))?;
        let raw_path = &record[0];
        let label = class_from_name(&record[2]).ok_or_else(|| {
            Error::Manifest(format!(
                "row {}: label {:?} not in {CLASS_NAMES:?}",
                i + 2,
                &record[2]
            ))
        })?;
        let file_path = {
            let p = PathBuf::from(raw_path);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        entries.push(ManifestEntry {
            file_path,
            subject_id: record[1].to_string(),
            label,
        });
    }
    Ok(entries)
}
