//! Content-addressed store of built profiles.

use std::path::{Path, PathBuf};

use memheat_core::exponents::FractionalParams;
use memheat_core::kernel::{build_profile, GridSpec, ProfileTable};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Whether a profile came from the cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheOutcome {
    Hit,
    Built,
}

/// Hex SHA-256 of the inputs that determine a profile.
pub fn profile_key(params: &FractionalParams, grid: &GridSpec, tol: f64) -> String {
    let beta = params.beta_ratio();
    // `{:?}` prints the shortest representation that round-trips, so equal
    // floats and only equal floats give equal keys
    let canonical = format!(
        "memheat-profile-v1|N={}|alpha={:?}|beta={}/{}|r_min={:?}|r_max={:?}|points={}|tol={:?}",
        params.dim(),
        params.alpha(),
        beta.numer(),
        beta.denom(),
        grid.r_min,
        grid.r_max,
        grid.points,
        tol
    );
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// Loads the profile from `dir` or builds and stores it.
///
/// A freshly built table is passed through its text form before use, so a
/// run that builds and a run that loads see bit-identical tables.
pub fn load_or_build(
    dir: Option<&Path>,
    params: &FractionalParams,
    grid: &GridSpec,
    tol: f64,
) -> Result<(ProfileTable, CacheOutcome), CliError> {
    let path = dir.map(|d| d.join(format!("{}.profile", profile_key(params, grid, tol))));
    if let Some(path) = &path {
        if let Ok(text) = std::fs::read_to_string(path) {
            // a damaged entry is rebuilt rather than trusted
            if let Ok(table) = ProfileTable::from_text(&text) {
                if table.params() == params {
                    return Ok((table, CacheOutcome::Hit));
                }
            }
        }
    }
    let text = build_profile(params, grid, tol)?.to_text();
    if let (Some(dir), Some(path)) = (dir, &path) {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        write_atomic(path, &text)?;
    }
    Ok((ProfileTable::from_text(&text)?, CacheOutcome::Built))
}

fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let tmp: PathBuf = path.with_extension(format!("tmp{}", std::process::id()));
    std::fs::write(&tmp, text).map_err(CliError::io(&tmp))?;
    std::fs::rename(&tmp, path).map_err(CliError::io(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_separate_inputs() {
        let p = FractionalParams::with_ratio(1, 0.5, 1, 2).unwrap();
        let q = FractionalParams::with_ratio(1, 0.5, 2, 4).unwrap();
        let g = GridSpec::default();
        let k = profile_key(&p, &g, 1e-6);
        assert_eq!(k.len(), 64);
        // β is reduced, so 2/4 and 1/2 share an entry
        assert_eq!(k, profile_key(&q, &g, 1e-6));
        assert_ne!(k, profile_key(&p, &g, 1e-5));
        assert_ne!(k, profile_key(&p, &GridSpec { points: 601, ..g }, 1e-6));
        let r = FractionalParams::with_ratio(1, 0.5000000001, 1, 2).unwrap();
        assert_ne!(k, profile_key(&r, &g, 1e-6));
    }
}
