//! A directory of components, one file family per component:
//! `<name>.pos`, `<name>.status`, `<name>.pmm`, `<name>_wd.pmm`,
//! `<name>.pass` and the append-only `<name>.audit`.

use std::fs;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use super::{import_component, render_component, Component, StoreError};

#[derive(Clone, Debug)]
pub struct Workspace {
    root: PathBuf,
}

impl Workspace {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Workspace { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str, suffix: &str) -> PathBuf {
        self.root.join(format!("{name}{suffix}"))
    }

    /// Component names (stems of `*.pos` files), sorted.
    pub fn list(&self) -> Result<Vec<String>, StoreError> {
        let mut names = Vec::new();
        for entry in fs::read_dir(&self.root)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "pos") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    names.push(stem.to_string());
                }
            }
        }
        names.sort();
        Ok(names)
    }

    pub fn exists(&self, name: &str) -> bool {
        is_plain_name(name) && self.path(name, ".pos").is_file()
    }

    pub fn load(&self, name: &str) -> Result<Component, StoreError> {
        if !self.exists(name) {
            return Err(StoreError::UnknownComponent(name.to_string()));
        }
        let mut c = import_component(&fs::read_to_string(self.path(name, ".pos"))?)?;
        // the file name is authoritative for where the component lives
        c.name = name.to_string();
        if let Some(text) = read_optional(&self.path(name, ".status"))? {
            c.apply_status_text(&text)?;
        }
        c.pmm_text = read_optional(&self.path(name, ".pmm"))?.unwrap_or_default();
        c.wd_pmm_text = read_optional(&self.path(name, "_wd.pmm"))?.unwrap_or_default();
        c.user_pass_text = read_optional(&self.path(name, ".pass"))?.unwrap_or_default();
        Ok(c)
    }

    /// Writes every file of the component. Rule files must extend what is
    /// on disk; all checks happen before the first write.
    pub fn save(&self, c: &mut Component) -> Result<(), StoreError> {
        let pmm = self.path(&c.name, ".pmm");
        let wd_pmm = self.path(&c.name, "_wd.pmm");
        for (path, text) in [(&pmm, &c.pmm_text), (&wd_pmm, &c.wd_pmm_text)] {
            let old = read_optional(path)?.unwrap_or_default();
            if !text.starts_with(&old) {
                return Err(StoreError::NotAppendOnly {
                    file: path.display().to_string(),
                });
            }
        }
        write_atomic(&self.path(&c.name, ".pos"), &render_component(c))?;
        write_atomic(&self.path(&c.name, ".status"), &c.status_text())?;
        write_if_changed(&pmm, &c.pmm_text)?;
        write_if_changed(&wd_pmm, &c.wd_pmm_text)?;
        write_if_changed(&self.path(&c.name, ".pass"), &c.user_pass_text)?;
        if !c.pending_audit.is_empty() {
            let mut log = fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(self.path(&c.name, ".audit"))?;
            for line in c.pending_audit.drain(..) {
                writeln!(log, "{line}")?;
            }
        }
        Ok(())
    }
}

/// Component names double as file stems, so keep them to one path segment.
fn is_plain_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '-' || ch == '.')
        && !name.starts_with('.')
}

fn read_optional(path: &Path) -> Result<Option<String>, StoreError> {
    match fs::read_to_string(path) {
        Ok(text) => Ok(Some(text)),
        Err(e) if e.kind() == ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn write_if_changed(path: &Path, text: &str) -> Result<(), StoreError> {
    let old = read_optional(path)?;
    if old.as_deref() == Some(text) || (old.is_none() && text.is_empty()) {
        return Ok(());
    }
    write_atomic(path, text)
}

/// Write to a sibling temporary file, then rename over the target.
fn write_atomic(path: &Path, text: &str) -> Result<(), StoreError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| StoreError::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::Status;

    const SRC: &str = "COMPONENT C PATH /C.mch\nPO \"a\" GROUP common\nGOAL 1 = 1\nEND\n";

    #[test]
    fn save_then_load() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("C.pos"), SRC).unwrap();
        let ws = Workspace::open(dir.path()).unwrap();
        assert_eq!(ws.list().unwrap(), ["C"]);
        let mut c = ws.load("C").unwrap();
        c.set_status("a", Status::ProvedF1, None).unwrap();
        c.pmm_text.push_str("THEORY X IS\nEND\n");
        ws.save(&mut c).unwrap();
        let back = ws.load("C").unwrap();
        assert_eq!(back.po("a").unwrap().status, Status::ProvedF1);
        assert_eq!(back.pmm_text, "THEORY X IS\nEND\n");
        let audit = fs::read_to_string(ws.path("C", ".audit")).unwrap();
        assert!(audit.contains("UNPROVED -> PROVED_F1"));
    }

    #[test]
    fn pmm_is_append_only() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("C.pos"), SRC).unwrap();
        fs::write(dir.path().join("C.pmm"), "THEORY A IS\nEND\n").unwrap();
        let ws = Workspace::open(dir.path()).unwrap();
        let mut c = ws.load("C").unwrap();
        c.pmm_text = "THEORY B IS\nEND\n".into();
        c.set_status("a", Status::ProvedF1, None).unwrap();
        assert!(matches!(ws.save(&mut c), Err(StoreError::NotAppendOnly { .. })));
        // nothing was written
        assert_eq!(fs::read_to_string(ws.path("C", ".pmm")).unwrap(), "THEORY A IS\nEND\n");
        assert!(!ws.path("C", ".status").exists());
    }

    #[test]
    fn unknown_and_unsafe_names() {
        let dir = tempfile::tempdir().unwrap();
        let ws = Workspace::open(dir.path()).unwrap();
        assert!(matches!(ws.load("nope"), Err(StoreError::UnknownComponent(_))));
        assert!(matches!(ws.load("../etc"), Err(StoreError::UnknownComponent(_))));
    }
}
