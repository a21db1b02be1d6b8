//! Output files are staged as temporaries beside their destination and
//! renamed into place only once every file of a command is written.

use std::io::Write;
use std::path::{Path, PathBuf};

use salsi_core::volume::{encode_payload, volume_paths, VolumeHeader};
use salsi_core::{Error, Result, Volume3D};
use tempfile::NamedTempFile;

#[derive(Default)]
pub struct Staged {
    files: Vec<(NamedTempFile, PathBuf)>,
}

impl Staged {
    pub fn add(&mut self, dest: impl Into<PathBuf>, bytes: &[u8]) -> Result<()> {
        let dest = dest.into();
        let dir = match dest.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let io = |e| Error::Io { path: dest.clone(), source: e };
        let mut tmp = NamedTempFile::new_in(&dir).map_err(io)?;
        tmp.write_all(bytes).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        self.files.push((tmp, dest));
        Ok(())
    }

    pub fn add_volume(&mut self, v: &Volume3D, stem: &Path) -> Result<()> {
        let (header_path, payload_path) = volume_paths(stem);
        let payload = encode_payload(v)?;
        let header = serde_json::to_string_pretty(&VolumeHeader::for_volume(v)).expect("header serializes");
        self.add(payload_path, &payload)?;
        self.add(header_path, format!("{header}\n").as_bytes())
    }

    /// Renames everything into place. If a rename fails, files already
    /// moved by this call are removed again.
    pub fn commit(self) -> Result<Vec<PathBuf>> {
        let mut done: Vec<PathBuf> = Vec::new();
        for (tmp, dest) in self.files {
            if let Err(e) = tmp.persist(&dest) {
                for p in &done {
                    let _ = std::fs::remove_file(p);
                }
                return Err(Error::Io { path: dest, source: e.error });
            }
            done.push(dest);
        }
        Ok(done)
    }
}
