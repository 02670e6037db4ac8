use std::io::Write;
use std::path::Path;

use mixtopo::Error;
use serde_json::Value;
use tempfile::NamedTempFile;

/// Writes through a temporary file in the target directory, then renames it into place.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(std::fs::Permissions::from_mode(0o644))
            .map_err(io)?;
    }
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), Error> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    atomic_write(path, s.as_bytes())
}

pub fn write_with<F>(path: Option<&Path>, f: F) -> Result<(), Error>
where
    F: FnOnce(&mut Vec<u8>) -> Result<(), Error>,
{
    if let Some(path) = path {
        let mut buf = Vec::new();
        f(&mut buf)?;
        atomic_write(path, &buf)?;
    }
    Ok(())
}

pub fn plural(n: usize, word: &str) -> String {
    match (n, word.strip_suffix("um")) {
        (1, _) => format!("{n} {word}"),
        (_, Some(stem)) => format!("{n} {stem}a"),
        _ => format!("{n} {word}s"),
    }
}
