//! File-name conventions for layer sets.

use std::fmt;
use std::path::{Path, PathBuf};

/// One file belonging to a layer stem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerFile {
    /// `<stem>.composed.png`
    Composed,
    /// `<stem>.occ.pfm`
    Occlusion,
    /// `<stem>.irr.pfm`
    Irradiance,
    /// `<stem>.alb.pfm`
    Albedo,
    /// `<stem>.spec.pfm`
    Specular,
    /// `<stem>.d{i}.pfm`, per soft-cube face.
    Diffuse(usize),
    /// `<stem>.s{i}.pfm`, per soft-cube face.
    SpecularDir(usize),
    /// `<stem>.env{i}.pfm`, a split environment map.
    Env(usize),
    /// `<stem>.meta.json`
    Meta,
}

impl fmt::Display for LayerFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayerFile::Composed => f.write_str("composed.png"),
            LayerFile::Occlusion => f.write_str("occ.pfm"),
            LayerFile::Irradiance => f.write_str("irr.pfm"),
            LayerFile::Albedo => f.write_str("alb.pfm"),
            LayerFile::Specular => f.write_str("spec.pfm"),
            LayerFile::Diffuse(i) => write!(f, "d{i}.pfm"),
            LayerFile::SpecularDir(i) => write!(f, "s{i}.pfm"),
            LayerFile::Env(i) => write!(f, "env{i}.pfm"),
            LayerFile::Meta => f.write_str("meta.json"),
        }
    }
}

/// A path prefix such as `out/rec00003`; files are `<stem>.<suffix>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerStem(PathBuf);

impl LayerStem {
    pub fn new(prefix: impl Into<PathBuf>) -> Self {
        Self(prefix.into())
    }

    pub fn prefix(&self) -> &Path {
        &self.0
    }

    pub fn path(&self, file: LayerFile) -> PathBuf {
        let mut s = self.0.clone().into_os_string();
        s.push(".");
        s.push(file.to_string());
        PathBuf::from(s)
    }

    /// The stem's final component, e.g. `rec00003`.
    pub fn name(&self) -> String {
        self.0
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default()
    }
}
