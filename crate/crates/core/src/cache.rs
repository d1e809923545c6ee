//! On-disk cache of Ext results, one JSON record per `(module, s, t)`.
//!
//! Layout: `<dir>/<fingerprint>/module.toml` holds the module, and
//! `<dir>/<fingerprint>/<s>_<t>.json` holds a checksummed [`ExtRecord`].
//! Writes go to a temporary file that is then renamed into place.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ext::{ext_basis, ExtBasis, ExtClass};
use crate::gf2::BitVector;
use crate::lambda::LambdaChain;
use crate::modules::{module_from_str, module_to_string, FiniteAModule};

pub const CACHE_VERSION: u32 = 1;
pub const CACHE_ENV: &str = "LAMBDAEXT_CACHE";

const MODULE_FILE: &str = "module.toml";

/// Everything the charts need about one bidegree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtRecord {
    pub version: u32,
    pub fingerprint: String,
    pub module: String,
    pub s: u32,
    pub t: u32,
    pub dim: usize,
    pub chain_dim: usize,
    pub cycle_dim: usize,
    pub boundary_dim: usize,
    pub representatives: Vec<String>,
    pub names: Vec<String>,
    /// `h<i>` to the target coordinates of each basis class times `h_i`.
    pub products: BTreeMap<String, Vec<Vec<usize>>>,
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    checksum: String,
    record: ExtRecord,
}

fn checksum(record: &ExtRecord) -> String {
    let bytes = serde_json::to_vec(record).expect("record serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{:02x}", b)).collect()
}

/// Display name of each basis class: products of named generators on the
/// sphere, the `E_infinity` name otherwise.
pub fn class_names(module: &Arc<FiniteAModule>, basis: &ExtBasis) -> Vec<String> {
    let (s, t) = (basis.s(), basis.t());
    (0..basis.dim())
        .map(|k| {
            let coords = BitVector::unit(basis.dim(), k);
            let name = if module.fingerprint() == crate::modules::sphere(0).fingerprint() {
                crate::naming::sphere_class_name(s, t - s, &coords).ok()
            } else {
                let class = ExtClass { module: module.clone(), s, t, coords };
                crate::ss::locate_class(&class).ok().map(|n| n.label)
            };
            name.unwrap_or_else(|| format!("x{}_{}_{}", t - s, s, k))
        })
        .collect()
}

impl ExtRecord {
    pub fn from_basis(module: &Arc<FiniteAModule>, basis: &ExtBasis) -> ExtRecord {
        ExtRecord {
            version: CACHE_VERSION,
            fingerprint: module.fingerprint().to_string(),
            module: module.name().to_string(),
            s: basis.s(),
            t: basis.t(),
            dim: basis.dim(),
            chain_dim: basis.chain_dim(),
            cycle_dim: basis.cycle_dim(),
            boundary_dim: basis.boundary_dim(),
            representatives: basis.representatives().iter().map(|z| z.to_string()).collect(),
            names: class_names(module, basis),
            products: BTreeMap::new(),
        }
    }

    pub fn compute(module: &Arc<FiniteAModule>, s: u32, t: u32) -> Result<ExtRecord> {
        Ok(Self::from_basis(module, &*ext_basis(module, s, t)?))
    }

    /// Fill in the products by `h_i`, computing the target bidegree.
    pub fn add_product(&mut self, module: &Arc<FiniteAModule>, i: u32) -> Result<()> {
        let key = format!("h{}", i);
        if self.products.contains_key(&key) {
            return Ok(());
        }
        let h = LambdaChain::generator((1 << i) - 1);
        let src = ext_basis(module, self.s, self.t)?;
        let tgt = ext_basis(module, self.s + 1, self.t + (1 << i))?;
        let mut cols = vec![];
        for z in src.representatives() {
            cols.push(tgt.coords(&z.mul_lambda(&h))?.ones().collect());
        }
        self.products.insert(key, cols);
        Ok(())
    }
}

/// Entry count per module in a cache directory.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CacheStats {
    /// Fingerprint to `(module name, entries)`.
    pub modules: BTreeMap<String, (String, usize)>,
}

impl CacheStats {
    pub fn entries(&self) -> usize {
        self.modules.values().map(|(_, n)| n).sum()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub checked: usize,
    pub recomputed: usize,
}

#[derive(Clone, Debug)]
pub struct ResultCache {
    dir: PathBuf,
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().expect("cache paths have a parent");
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("entry");
    let tmp = dir.join(format!(".{}.{}.{}.tmp", name, std::process::id(), TMP_COUNTER.fetch_add(1, Ordering::Relaxed)));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn parse_key(name: &str) -> Option<(u32, u32)> {
    let (s, t) = name.strip_suffix(".json")?.split_once('_')?;
    Some((s.parse().ok()?, t.parse().ok()?))
}

impl ResultCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(ResultCache { dir })
    }

    /// The directory given explicitly, else the one named by the environment.
    pub fn from_flag_or_env(flag: Option<&Path>) -> Result<Option<Self>> {
        match flag.map(Path::to_path_buf).or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from)) {
            Some(d) => Ok(Some(Self::open(d)?)),
            None => Ok(None),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn entry_path(&self, fingerprint: &str, s: u32, t: u32) -> PathBuf {
        self.dir.join(fingerprint).join(format!("{}_{}.json", s, t))
    }

    fn read_path(path: &Path) -> Result<ExtRecord> {
        let bad = |msg: String| Error::CacheCorrupt(format!("{}: {}", path.display(), msg));
        let text = fs::read_to_string(path)?;
        let env: Envelope = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        if checksum(&env.record) != env.checksum {
            return Err(bad("checksum mismatch".into()));
        }
        if env.record.version != CACHE_VERSION {
            return Err(bad(format!("version {}", env.record.version)));
        }
        Ok(env.record)
    }

    pub fn get(&self, module: &FiniteAModule, s: u32, t: u32) -> Result<Option<ExtRecord>> {
        let path = self.entry_path(module.fingerprint(), s, t);
        if !path.exists() {
            return Ok(None);
        }
        let rec = Self::read_path(&path)?;
        if rec.fingerprint != module.fingerprint() || (rec.s, rec.t) != (s, t) {
            return Err(Error::CacheCorrupt(format!("{}: key does not match contents", path.display())));
        }
        Ok(Some(rec))
    }

    pub fn put(&self, module: &FiniteAModule, record: &ExtRecord) -> Result<()> {
        let dir = self.dir.join(module.fingerprint());
        fs::create_dir_all(&dir)?;
        let mpath = dir.join(MODULE_FILE);
        if !mpath.exists() {
            write_atomic(&mpath, module_to_string(module).as_bytes())?;
        }
        let env = Envelope { checksum: checksum(record), record: record.clone() };
        let bytes = serde_json::to_vec_pretty(&env).expect("record serializes");
        write_atomic(&self.entry_path(module.fingerprint(), record.s, record.t), &bytes)
    }

    /// Cached record, computed and stored on a miss.
    pub fn record(&self, module: &Arc<FiniteAModule>, s: u32, t: u32) -> Result<ExtRecord> {
        if let Some(r) = self.get(module, s, t)? {
            return Ok(r);
        }
        let r = ExtRecord::compute(module, s, t)?;
        self.put(module, &r)?;
        Ok(r)
    }

    fn all_entries(&self) -> Result<Vec<(String, PathBuf)>> {
        let mut out = vec![];
        for d in fs::read_dir(&self.dir)? {
            let d = d?;
            if !d.file_type()?.is_dir() {
                continue;
            }
            let fp = d.file_name().to_string_lossy().into_owned();
            for f in fs::read_dir(d.path())? {
                let f = f?;
                if parse_key(&f.file_name().to_string_lossy()).is_some() {
                    out.push((fp.clone(), f.path()));
                }
            }
        }
        out.sort();
        Ok(out)
    }

    pub fn stats(&self) -> Result<CacheStats> {
        let mut stats = CacheStats::default();
        for (fp, _) in self.all_entries()? {
            let name = match fs::read_to_string(self.dir.join(&fp).join(MODULE_FILE)) {
                Ok(text) => module_from_str(&text).map(|m| m.name().to_string()).unwrap_or_else(|_| "?".into()),
                Err(_) => "?".into(),
            };
            let e = stats.modules.entry(fp).or_insert((name, 0));
            e.1 += 1;
        }
        Ok(stats)
    }

    /// Remove every record; returns how many were removed.
    pub fn clear(&self) -> Result<usize> {
        let n = self.all_entries()?.len();
        for d in fs::read_dir(&self.dir)? {
            let d = d?;
            if d.file_type()?.is_dir() {
                fs::remove_dir_all(d.path())?;
            }
        }
        Ok(n)
    }

    /// Check every checksum, then recompute a random sample of records and
    /// compare them byte for byte.
    pub fn verify(&self, sample: usize, seed: u64) -> Result<VerifyReport> {
        let entries = self.all_entries()?;
        let mut records = vec![];
        for (fp, path) in &entries {
            let rec = Self::read_path(path)?;
            if &rec.fingerprint != fp {
                return Err(Error::CacheCorrupt(format!("{}: stored under the wrong module", path.display())));
            }
            records.push((path.clone(), rec));
        }
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let picked: Vec<_> = records.choose_multiple(&mut rng, sample.min(records.len())).collect();
        for (path, rec) in &picked {
            let text = fs::read_to_string(self.dir.join(&rec.fingerprint).join(MODULE_FILE))?;
            let module = module_from_str(&text)?;
            if module.fingerprint() != rec.fingerprint {
                return Err(Error::CacheCorrupt(format!("{}: module file does not match its fingerprint", path.display())));
            }
            let basis = ExtBasis::compute(&module, rec.s, rec.t)?;
            let mut fresh = ExtRecord::from_basis(&module, &basis);
            fresh.module = rec.module.clone();
            for key in rec.products.keys() {
                let i = key.trim_start_matches('h').parse().map_err(|_| Error::CacheCorrupt(format!("{}: product key {}", path.display(), key)))?;
                fresh.add_product(&module, i)?;
            }
            if serde_json::to_vec(&fresh).unwrap() != serde_json::to_vec(rec).unwrap() {
                return Err(Error::CacheCorrupt(format!("{}: recomputed record differs", path.display())));
            }
        }
        Ok(VerifyReport { checked: records.len(), recomputed: picked.len() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modules::{sphere, stunted_projective};

    #[test]
    fn round_trip_and_stats() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ResultCache::open(dir.path()).unwrap();
        assert_eq!(cache.stats().unwrap().entries(), 0);
        let s0 = sphere(0);
        let mut r = cache.record(&s0, 2, 16).unwrap();
        assert_eq!(r.names, ["h3^2"]);
        r.add_product(&s0, 0).unwrap();
        cache.put(&s0, &r).unwrap();
        assert_eq!(cache.get(&s0, 2, 16).unwrap().unwrap(), r);
        assert_eq!(r.products["h0"], vec![vec![0]]);
        let p = stunted_projective(1, 4).unwrap();
        cache.record(&p, 1, 3).unwrap();
        let stats = cache.stats().unwrap();
        assert_eq!(stats.entries(), 2);
        assert_eq!(stats.modules.len(), 2);
        assert_eq!(cache.verify(10, 7).unwrap(), VerifyReport { checked: 2, recomputed: 2 });
        assert_eq!(cache.clear().unwrap(), 2);
        assert_eq!(cache.stats().unwrap().entries(), 0);
    }

    #[test]
    fn tampering_is_caught() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ResultCache::open(dir.path()).unwrap();
        let s0 = sphere(0);
        cache.record(&s0, 1, 2).unwrap();
        let path = cache.entry_path(s0.fingerprint(), 1, 2);
        let text = fs::read_to_string(&path).unwrap().replace("\"dim\": 1", "\"dim\": 2");
        fs::write(&path, text).unwrap();
        assert!(matches!(cache.get(&s0, 1, 2), Err(Error::CacheCorrupt(_))));
        assert!(matches!(cache.verify(1, 0), Err(Error::CacheCorrupt(_))));
    }

    #[test]
    fn forged_checksum_is_caught_by_recompute() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ResultCache::open(dir.path()).unwrap();
        let s0 = sphere(0);
        let mut r = cache.record(&s0, 1, 2).unwrap();
        r.representatives = vec!["e0 l0".into()];
        cache.put(&s0, &r).unwrap();
        assert!(cache.get(&s0, 1, 2).is_ok());
        assert!(matches!(cache.verify(1, 0), Err(Error::CacheCorrupt(_))));
    }
}
