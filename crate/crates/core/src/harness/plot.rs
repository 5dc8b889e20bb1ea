use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::scheduler::Variant;

/// `(algorithm, seed, run directory)` for every finished run under `root`,
/// ordered by algorithm name then seed.
pub fn list_runs(root: &Path) -> Result<Vec<(String, u64, PathBuf)>> {
    let mut runs = Vec::new();
    for v in Variant::ALL {
        let dir = root.join(v.name());
        if !dir.is_dir() {
            continue;
        }
        for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let entry = entry.map_err(|e| Error::io(&dir, e))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if let Some(seed) = name.strip_prefix("seed_").and_then(|s| s.parse::<u64>().ok()) {
                runs.push((v.name().to_string(), seed, entry.path()));
            }
        }
    }
    if runs.is_empty() {
        return Err(Error::io(
            root,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no run directories found"),
        ));
    }
    runs.sort();
    Ok(runs)
}

/// Tidy CSV `algorithm,seed,t,realized,pseudo` over every run of an
/// experiment directory. Returns the number of data rows.
pub fn emit_plot_data<W: Write>(root: &Path, mut out: W) -> Result<usize> {
    let io = |p: &Path| {
        let p = p.to_path_buf();
        move |e| Error::io(p, e)
    };
    writeln!(out, "algorithm,seed,t,realized,pseudo").map_err(io(root))?;
    let mut rows = 0;
    for (alg, seed, dir) in list_runs(root)? {
        let path = dir.join("regret.csv");
        let f = fs::File::open(&path).map_err(io(&path))?;
        for line in BufReader::new(f).lines().skip(1) {
            let line = line.map_err(io(&path))?;
            if line.is_empty() {
                continue;
            }
            writeln!(out, "{alg},{seed},{line}").map_err(io(&path))?;
            rows += 1;
        }
    }
    Ok(rows)
}
