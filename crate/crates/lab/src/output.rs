//! Files written by a run. Each is staged in the target directory and
//! renamed into place, so an interrupted run leaves earlier outputs intact.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::{LabError, LabResult};

/// Provenance stamped into every output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stamp {
    pub config_hash: String,
    pub precision_bits: u32,
    pub seed: u64,
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    #[serde(flatten)]
    stamp: &'a Stamp,
    data: &'a T,
}

pub struct OutputDir {
    root: PathBuf,
    stamp: Stamp,
    written: Vec<PathBuf>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> LabError + '_ {
    move |source| LabError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl OutputDir {
    pub fn create(root: &Path, stamp: Stamp) -> LabResult<Self> {
        std::fs::create_dir_all(root).map_err(io_err(root))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            stamp,
            written: Vec::new(),
        })
    }

    pub fn stamp(&self) -> &Stamp {
        &self.stamp
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn commit(&mut self, name: &str, bytes: &[u8]) -> LabResult<PathBuf> {
        let path = self.root.join(name);
        let mut tmp = NamedTempFile::new_in(&self.root).map_err(io_err(&self.root))?;
        tmp.write_all(bytes).map_err(io_err(&path))?;
        tmp.as_file().sync_all().map_err(io_err(&path))?;
        tmp.persist(&path).map_err(|e| LabError::Io {
            path: path.clone(),
            source: e.error,
        })?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, data: &T) -> LabResult<PathBuf> {
        let mut bytes = serde_json::to_vec_pretty(&Envelope {
            stamp: &self.stamp,
            data,
        })
        .map_err(|source| LabError::Json {
            path: self.root.join(name),
            source,
        })?;
        bytes.push(b'\n');
        self.commit(name, &bytes)
    }

    /// CSV with a `#` provenance line before the header row.
    pub fn csv<R: Serialize>(
        &mut self,
        name: &str,
        header: &[&str],
        rows: &[R],
    ) -> LabResult<PathBuf> {
        let mut buf = format!(
            "# config_hash={} precision_bits={} seed={}\n",
            self.stamp.config_hash, self.stamp.precision_bits, self.stamp.seed
        )
        .into_bytes();
        {
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(&mut buf);
            w.write_record(header)?;
            for r in rows {
                w.serialize(r)?;
            }
            w.flush().map_err(io_err(&self.root.join(name)))?;
        }
        self.commit(name, &buf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn files_carry_the_stamp_and_replace_atomically() {
        let dir = tempfile::tempdir().unwrap();
        let stamp = Stamp {
            config_hash: "abc".into(),
            precision_bits: 237,
            seed: 4,
        };
        let mut out = OutputDir::create(dir.path(), stamp).unwrap();
        out.json("a.json", &vec![1, 2]).unwrap();
        out.json("a.json", &vec![3]).unwrap();
        out.csv("b.csv", &["n", "x"], &[(1, 0.5)]).unwrap();
        let a: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.json")).unwrap())
                .unwrap();
        assert_eq!(a["config_hash"], "abc");
        assert_eq!(a["data"], serde_json::json!([3]));
        let b = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
        assert_eq!(
            b,
            "# config_hash=abc precision_bits=237 seed=4\nn,x\n1,0.5\n"
        );
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
    }
}
