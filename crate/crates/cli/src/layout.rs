//! On-disk case layout.
//!
//! A case is a directory holding `image/`, `labels-weak/`, and optionally
//! `labels-gt/` and `anatomy/`, each with exactly one volume file. Pipeline
//! outputs go to `derived/`. A dataset is a directory of cases.

use std::fs;
use std::path::{Path, PathBuf};

use lymphkit_core::report::{render_rows, ReportFormat, TableRow};
use lymphkit_core::volgrid::{read_volume, write_volume, VolumeFormat};
use lymphkit_core::VolumeGrid;

use crate::error::{CliError, CliResult};

pub const IMAGE: &str = "image";
pub const LABELS_WEAK: &str = "labels-weak";
pub const LABELS_GT: &str = "labels-gt";
pub const ANATOMY: &str = "anatomy";
pub const DERIVED: &str = "derived";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseDir {
    pub id: String,
    pub root: PathBuf,
}

impl CaseDir {
    fn at(root: &Path) -> CliResult<Self> {
        let id = root
            .canonicalize()
            .ok()
            .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .ok_or_else(|| CliError::Missing(root.into()))?;
        Ok(CaseDir {
            id,
            root: root.to_path_buf(),
        })
    }

    pub fn is_case(path: &Path) -> bool {
        path.join(IMAGE).is_dir()
    }

    /// The single volume inside `sub/`, or `None` when `sub/` is absent.
    pub fn volume(&self, sub: &str) -> CliResult<Option<PathBuf>> {
        let dir = self.root.join(sub);
        if !dir.is_dir() {
            return Ok(None);
        }
        let found = volume_files(&dir)?;
        match found.as_slice() {
            [one] => Ok(Some(one.clone())),
            [] => Err(CliError::Missing(dir)),
            _ => Err(CliError::Usage(format!(
                "{} holds {} volumes, expected one",
                dir.display(),
                found.len()
            ))),
        }
    }

    pub fn require(&self, sub: &str) -> CliResult<PathBuf> {
        self.volume(sub)?
            .ok_or_else(|| CliError::Missing(self.root.join(sub)))
    }

    pub fn derived(&self) -> PathBuf {
        self.root.join(DERIVED)
    }

    /// `derived/<stem>` in whichever volume format it was written.
    pub fn derived_volume(&self, stem: &str) -> CliResult<Option<PathBuf>> {
        find_stem(&self.derived(), stem)
    }
}

/// Volume files of a directory in name order. A raw volume is listed once,
/// by its `.json` sidecar; JSON files without a payload are not volumes.
pub fn volume_files(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|_| CliError::Missing(dir.into()))?;
    let mut out = Vec::new();
    for e in entries {
        let path = e.map_err(|_| CliError::Missing(dir.into()))?.path();
        let is_volume = match VolumeFormat::from_path(&path) {
            Some(VolumeFormat::Raw) => {
                path.extension().is_some_and(|x| x == "json")
                    && path.with_extension("raw").is_file()
            }
            Some(_) => true,
            None => false,
        };
        if is_volume && path.is_file() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// File name of a volume without its format extension.
pub fn volume_stem(path: &Path) -> Option<String> {
    let name = path.file_name()?.to_str()?;
    let fmt = VolumeFormat::from_path(path)?;
    let cut = match fmt {
        VolumeFormat::Raw if name.ends_with(".raw") => ".raw".len(),
        f => f.extension().len(),
    };
    Some(name[..name.len() - cut].to_string())
}

fn find_stem(dir: &Path, stem: &str) -> CliResult<Option<PathBuf>> {
    let hits: Vec<PathBuf> = [
        VolumeFormat::NiftiGz,
        VolumeFormat::Nifti,
        VolumeFormat::Raw,
    ]
    .iter()
    .map(|f| dir.join(format!("{stem}{}", f.extension())))
    .filter(|p| p.is_file())
    .collect();
    match hits.len() {
        0 => Ok(None),
        1 => Ok(hits.into_iter().next()),
        _ => Err(CliError::Usage(format!(
            "{}: several formats of {stem}",
            dir.display()
        ))),
    }
}

/// Expands case and dataset paths into cases sorted by id.
pub fn discover_cases(paths: &[PathBuf]) -> CliResult<Vec<CaseDir>> {
    let mut cases = Vec::new();
    for p in paths {
        if !p.is_dir() {
            return Err(CliError::Missing(p.clone()));
        }
        if CaseDir::is_case(p) {
            cases.push(CaseDir::at(p)?);
            continue;
        }
        let before = cases.len();
        let entries = fs::read_dir(p).map_err(|_| CliError::Missing(p.clone()))?;
        for e in entries {
            let sub = e.map_err(|_| CliError::Missing(p.clone()))?.path();
            if CaseDir::is_case(&sub) {
                cases.push(CaseDir::at(&sub)?);
            }
        }
        if cases.len() == before {
            return Err(CliError::Usage(format!(
                "{} is neither a case nor a dataset of cases",
                p.display()
            )));
        }
    }
    cases.sort_by(|a, b| a.id.cmp(&b.id));
    if let Some(w) = cases.windows(2).find(|w| w[0].id == w[1].id) {
        return Err(CliError::Usage(format!(
            "case id {} appears twice",
            w[0].id
        )));
    }
    Ok(cases)
}

pub fn read(path: &Path) -> CliResult<VolumeGrid> {
    read_volume(path).map_err(CliError::input(format!("reading {}", path.display())))
}

/// `dir/stem` plus the extension of `format`.
pub fn volume_path(dir: &Path, stem: &str, format: VolumeFormat) -> PathBuf {
    dir.join(format!("{stem}{}", format.extension()))
}

pub fn write(grid: &VolumeGrid, path: &Path) -> CliResult<()> {
    ensure_parent(path)?;
    write_volume(grid, path).map_err(|e| CliError::Output {
        path: path.into(),
        reason: e.to_string(),
    })
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    ensure_parent(path)?;
    fs::write(path, text).map_err(|e| CliError::Output {
        path: path.into(),
        reason: e.to_string(),
    })
}

pub fn write_report<R: TableRow>(
    dir: &Path,
    stem: &str,
    rows: &[R],
    format: ReportFormat,
) -> CliResult<PathBuf> {
    let path = dir.join(format!("{stem}.{}", format.extension()));
    write_text(&path, &render_rows(rows, format))?;
    Ok(path)
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output {
        path: path.into(),
        reason: e.to_string(),
    })?;
    text.push('\n');
    write_text(path, &text)
}

/// Removes `dir` and everything below it, if present.
pub fn clear_dir(dir: &Path) -> CliResult<()> {
    if dir.exists() {
        fs::remove_dir_all(dir).map_err(|e| CliError::Output {
            path: dir.into(),
            reason: e.to_string(),
        })?;
    }
    Ok(())
}

fn ensure_parent(path: &Path) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::Output {
            path: parent.into(),
            reason: e.to_string(),
        })?;
    }
    Ok(())
}
