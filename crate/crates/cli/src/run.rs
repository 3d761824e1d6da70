//! Output directories: a staging dir that is renamed into place only after
//! the command succeeds, plus `manifest.json`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;
use sha2::{Digest, Sha256};
use walklab::model::ConfigFile;
use walklab::report::write_json;
use walklab::{Error, Result};

use crate::commands::{self, Ctx};
use crate::params::{parse_config, Params};

pub struct Invocation {
    pub subcommand: String,
    pub table: toml::Table,
    pub seed: u64,
    pub out: PathBuf,
}

pub fn config_hash(subcommand: &str, file: &ConfigFile) -> Result<String> {
    let mut h = Sha256::new();
    h.update(subcommand.as_bytes());
    h.update(b"\0");
    h.update(serde_json::to_vec(file)?);
    Ok(hex::encode(h.finalize()))
}

/// Runs the command and returns the final output directory.
pub fn execute(inv: Invocation) -> Result<PathBuf> {
    let (cfg, file) = parse_config(inv.table)?;
    let mut params = Params::new(file.params.clone());
    if let Some(threads) = params.get::<Option<usize>>("threads", None)? {
        // A second call in the same process fails; the first pool stays.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let hash = config_hash(&inv.subcommand, &file)?;
    std::fs::create_dir_all(&inv.out)?;
    let staging = inv.out.join(format!(".staging-{}-{}", inv.subcommand, std::process::id()));
    if staging.exists() {
        std::fs::remove_dir_all(&staging)?;
    }
    std::fs::create_dir_all(&staging)?;
    let started = Instant::now();
    let result = run_in(&inv.subcommand, &cfg, &mut params, inv.seed, &staging).and_then(|files| {
        let unused = params.unused();
        if !unused.is_empty() {
            return Err(Error::Config(format!("unknown parameters for {}: {}", inv.subcommand, unused.join(", "))));
        }
        let manifest = json!({
            "subcommand": inv.subcommand,
            "config_hash": hash,
            "seed": inv.seed,
            "config": file,
            "resolved_params": params.resolved,
            "versions": {
                "walklab": env!("CARGO_PKG_VERSION"),
                "rustc_target": std::env::consts::ARCH,
            },
            "wall_time_secs": started.elapsed().as_secs_f64(),
            "files": files,
        });
        write_json(&staging.join("manifest.json"), &manifest)?;
        let target = inv.out.join(format!("{}-{}-seed{}", inv.subcommand, &hash[..16], inv.seed));
        if target.exists() {
            std::fs::remove_dir_all(&target)?;
        }
        std::fs::rename(&staging, &target)?;
        Ok(target)
    });
    if result.is_err() {
        let _ = std::fs::remove_dir_all(&staging);
    }
    result
}

fn run_in(name: &str, cfg: &walklab::model::WalkConfig, params: &mut Params, seed: u64, dir: &Path) -> Result<Vec<String>> {
    let mut ctx = Ctx { cfg, params, seed, dir };
    commands::run(name, &mut ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{load_table, parse_config};

    #[test]
    fn hash_depends_on_subcommand_and_params() {
        let (_, a) = parse_config(load_table(None, &[]).unwrap()).unwrap();
        let (_, b) = parse_config(load_table(None, &["steps=5".into()]).unwrap()).unwrap();
        let h = |s, f| config_hash(s, f).unwrap();
        assert_eq!(h("simulate", &a), h("simulate", &a));
        assert_ne!(h("simulate", &a), h("weyl", &a));
        assert_ne!(h("simulate", &a), h("simulate", &b));
    }

    #[test]
    fn failed_run_leaves_no_directory() {
        let tmp = tempfile::tempdir().unwrap();
        let table = load_table(None, &["steps=-1".into()]).unwrap();
        let inv = Invocation { subcommand: "simulate".into(), table, seed: 1, out: tmp.path().to_path_buf() };
        assert!(execute(inv).is_err());
        assert_eq!(std::fs::read_dir(tmp.path()).unwrap().count(), 0);
    }
}
