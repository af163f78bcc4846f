//! Checkpoint files: a text manifest followed by a little-endian f32 blob.
//!
//! ```text
//! composenet-checkpoint 1
//! meta <key> <value>
//! param <name> <dims, comma separated> <byte offset> <byte length> <frozen 0|1>
//! end <blob byte length>
//! <blob>
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numcore::{ParamSet, Tensor};

const MAGIC: &str = "composenet-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Checkpoint {
    pub params: ParamSet,
    /// Free-form training metadata (experiment, seed, steps, config hash, ...).
    pub metadata: BTreeMap<String, String>,
}

fn bad(path: &Path, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{}: malformed checkpoint: {msg}", path.display()))
}

impl Checkpoint {
    pub fn new(params: ParamSet) -> Self {
        Checkpoint {
            params,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut manifest = format!("{MAGIC} {CHECKPOINT_VERSION}\n");
        for (k, v) in &self.metadata {
            if k.contains(char::is_whitespace) || v.contains('\n') || k.is_empty() {
                return Err(Error::Config(format!(
                    "metadata entry `{k}` cannot be stored"
                )));
            }
            manifest.push_str(&format!("meta {k} {v}\n"));
        }
        let mut blob = Vec::new();
        for (name, t) in self.params.iter() {
            let dims: Vec<String> = t.shape().iter().map(|d| d.to_string()).collect();
            let offset = blob.len();
            for v in t.data() {
                blob.extend_from_slice(&v.to_le_bytes());
            }
            manifest.push_str(&format!(
                "param {name} {} {offset} {} {}\n",
                dims.join(","),
                blob.len() - offset,
                u8::from(self.params.is_frozen(name))
            ));
        }
        manifest.push_str(&format!("end {}\n", blob.len()));
        let mut out = manifest.into_bytes();
        out.extend_from_slice(&blob);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let mut pos = 0;
        let next_line = |pos: &mut usize| -> Result<&str> {
            let rest = &bytes[*pos..];
            let end = rest
                .iter()
                .position(|&b| b == b'\n')
                .ok_or_else(|| bad(path, "truncated manifest"))?;
            *pos += end + 1;
            std::str::from_utf8(&rest[..end]).map_err(|_| bad(path, "manifest is not UTF-8"))
        };
        let header = next_line(&mut pos)?;
        match header.split_once(' ') {
            Some((MAGIC, v)) if v == CHECKPOINT_VERSION.to_string() => {}
            Some((MAGIC, v)) => return Err(bad(path, format!("unsupported version {v}"))),
            _ => return Err(bad(path, "missing header")),
        }
        let mut metadata = BTreeMap::new();
        let mut entries = Vec::new();
        let total = loop {
            let line = next_line(&mut pos)?;
            let (kind, rest) = line
                .split_once(' ')
                .ok_or_else(|| bad(path, format!("bad line `{line}`")))?;
            match kind {
                "meta" => {
                    let (k, v) = rest.split_once(' ').unwrap_or((rest, ""));
                    metadata.insert(k.to_string(), v.to_string());
                }
                "param" => {
                    let f: Vec<&str> = rest.split(' ').collect();
                    if f.len() != 5 {
                        return Err(bad(path, format!("bad param line `{line}`")));
                    }
                    let num = |s: &str| {
                        s.parse::<usize>()
                            .map_err(|_| bad(path, format!("bad number `{s}`")))
                    };
                    let shape = f[1].split(',').map(num).collect::<Result<Vec<_>>>()?;
                    let frozen = match f[4] {
                        "0" => false,
                        "1" => true,
                        other => return Err(bad(path, format!("bad frozen flag `{other}`"))),
                    };
                    entries.push((f[0].to_string(), shape, num(f[2])?, num(f[3])?, frozen));
                }
                "end" => {
                    break rest
                        .parse::<usize>()
                        .map_err(|_| bad(path, "bad blob length"))?
                }
                _ => return Err(bad(path, format!("unknown entry `{kind}`"))),
            }
        };
        let blob = &bytes[pos..];
        if blob.len() != total {
            return Err(bad(
                path,
                format!("blob holds {} bytes, manifest declares {total}", blob.len()),
            ));
        }
        let mut params = ParamSet::new();
        let mut expected_offset = 0;
        for (name, shape, offset, len, frozen) in entries {
            let n: usize = shape.iter().product();
            if offset != expected_offset || len != 4 * n || offset + len > total {
                return Err(bad(path, format!("inconsistent extent for `{name}`")));
            }
            expected_offset += len;
            let data = blob[offset..offset + len]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            params.insert(name.clone(), Tensor::new(shape, data)?);
            if frozen {
                params.freeze(&name)?;
            }
        }
        if expected_offset != total {
            return Err(bad(path, "blob has bytes not covered by the manifest"));
        }
        Ok(Checkpoint { params, metadata })
    }

    /// Writes atomically (temporary file, then rename).
    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, self.to_bytes()?).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    /// Loads a checkpoint; a missing file is a missing prerequisite.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = match fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::MissingPrerequisite(format!(
                    "checkpoint {} not found",
                    path.display()
                )))
            }
            Err(e) => return Err(Error::io(path, e)),
        };
        Self::from_bytes(&bytes, path)
    }
}
