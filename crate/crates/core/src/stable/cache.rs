//! On-disk CSV cache of radial profiles keyed by `(alpha, d, r_max, n_nodes)`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{build_profile, from_tables, StableError, StableProfile};

pub struct ProfileCache {
    dir: PathBuf,
}

impl ProfileCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path_for(&self, alpha: f64, d: usize, r_max: f64, n_nodes: usize) -> PathBuf {
        self.dir
            .join(format!("stable_a{alpha}_d{d}_r{r_max}_n{n_nodes}.csv"))
    }

    /// Loads the profile if cached, otherwise builds and stores it.
    pub fn load_or_build(
        &self,
        alpha: f64,
        d: usize,
        r_max: f64,
        n_nodes: usize,
    ) -> Result<StableProfile, StableError> {
        let path = self.path_for(alpha, d, r_max, n_nodes);
        if path.exists() {
            if let Ok(p) = read(&path, alpha, d, n_nodes) {
                return Ok(p);
            }
        }
        let profile = build_profile(alpha, d, r_max, n_nodes)?;
        fs::create_dir_all(&self.dir).map_err(io_err)?;
        write(&path, &profile)?;
        Ok(profile)
    }
}

fn io_err(e: std::io::Error) -> StableError {
    StableError::Cache(e.to_string())
}

fn write(path: &Path, p: &StableProfile) -> Result<(), StableError> {
    let mut out = Vec::new();
    writeln!(out, "r,p1,slope").map_err(io_err)?;
    for j in 0..p.r_nodes.len() {
        writeln!(out, "{},{},{}", p.r_nodes[j], p.p1_values[j], p.slopes[j]).map_err(io_err)?;
    }
    // write-then-rename so concurrent readers never see a partial file
    let tmp = path.with_extension("csv.tmp");
    fs::write(&tmp, out).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)
}

fn read(path: &Path, alpha: f64, d: usize, n_nodes: usize) -> Result<StableProfile, StableError> {
    let text = fs::read_to_string(path).map_err(io_err)?;
    let mut r = Vec::with_capacity(n_nodes);
    let mut p = Vec::with_capacity(n_nodes);
    let mut m = Vec::with_capacity(n_nodes);
    for (i, line) in text.lines().skip(1).enumerate() {
        let cols: Vec<f64> = line
            .split(',')
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| StableError::Cache(format!("{}:{}: {e}", path.display(), i + 2)))?;
        if cols.len() != 3 {
            return Err(StableError::Cache(format!(
                "{}:{}: expected 3 columns",
                path.display(),
                i + 2
            )));
        }
        r.push(cols[0]);
        p.push(cols[1]);
        m.push(cols[2]);
    }
    if r.len() != n_nodes {
        return Err(StableError::Cache(format!(
            "{}: wrong node count",
            path.display()
        )));
    }
    from_tables(alpha, d, r, p, m)
}
