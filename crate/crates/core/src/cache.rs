//! Execution cache. Order and isolation results are stored under a key made
//! of everything that can change them, so a warm rerun of a campaign needs
//! no test executions at all.

use std::collections::{HashMap, VecDeque};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{ConfigSnapshot, MutantId, TestId};
use crate::protocol::{
    decode_message, encode_message, AdapterRequest, AdapterResponse, RequestBody, ResponseBody, SessionError,
    SessionFactory, Transport, TransportError,
};

pub const ORIGINAL: &str = "original";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn config_hash(config: &ConfigSnapshot) -> String {
    sha256_hex(&serde_json::to_vec(config).expect("config serializes"))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunCacheKey {
    pub suite_hash: String,
    /// A mutant id, or [`ORIGINAL`].
    pub mutant: String,
    pub sequence_hash: String,
    pub config_hash: String,
}

impl RunCacheKey {
    fn mutant_label(mutant: Option<&MutantId>) -> String {
        mutant.map_or_else(|| ORIGINAL.to_string(), MutantId::to_string)
    }

    pub fn for_order(suite_hash: &str, mutant: Option<&MutantId>, sequence: &[TestId], config_hash: &str) -> Self {
        let rendered: Vec<String> = sequence.iter().map(TestId::to_string).collect();
        Self {
            suite_hash: suite_hash.to_string(),
            mutant: Self::mutant_label(mutant),
            sequence_hash: sha256_hex(format!("order\n{}", rendered.join("\n")).as_bytes()),
            config_hash: config_hash.to_string(),
        }
    }

    /// Isolated runs of the same test are told apart by their ordinal within
    /// the session.
    pub fn for_isolated(
        suite_hash: &str,
        mutant: Option<&MutantId>,
        test: &TestId,
        ordinal: u64,
        config_hash: &str,
    ) -> Self {
        Self {
            suite_hash: suite_hash.to_string(),
            mutant: Self::mutant_label(mutant),
            sequence_hash: sha256_hex(format!("isolated\n{test}\n{ordinal}").as_bytes()),
            config_hash: config_hash.to_string(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CacheLine {
    key: RunCacheKey,
    response: ResponseBody,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: u64,
    /// Requests that reached the adapter, i.e. test executions.
    pub misses: u64,
}

/// Shared store with an append-only backing file written by one writer at a
/// time.
pub struct RunCache {
    entries: Mutex<HashMap<RunCacheKey, ResponseBody>>,
    writer: Mutex<Option<(PathBuf, File)>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl RunCache {
    pub fn in_memory() -> Self {
        Self {
            entries: Mutex::new(HashMap::new()),
            writer: Mutex::new(None),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    /// Loads `path` if it exists and appends new results to it. Lines that
    /// do not parse, such as a line cut short by an interrupted run, are
    /// skipped.
    pub fn open(path: &Path) -> Result<Self, CacheError> {
        let io = |source| CacheError::Io {
            path: path.to_path_buf(),
            source,
        };
        let cache = Self::in_memory();
        if path.exists() {
            let reader = BufReader::new(File::open(path).map_err(io)?);
            let mut entries = cache.entries.lock().expect("cache entries");
            for (number, line) in reader.lines().enumerate() {
                let line = line.map_err(io)?;
                match serde_json::from_str::<CacheLine>(&line) {
                    Ok(entry) => {
                        entries.insert(entry.key, entry.response);
                    }
                    Err(err) => log::warn!("{}:{}: skipping cache line: {err}", path.display(), number + 1),
                }
            }
        }
        let mut file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
        let ends_open = std::fs::read(path).map_err(io)?.last().is_some_and(|b| *b != b'\n');
        if ends_open {
            file.write_all(b"\n").map_err(io)?;
        }
        *cache.writer.lock().expect("cache writer") = Some((path.to_path_buf(), file));
        Ok(cache)
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache entries").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &RunCacheKey) -> Option<ResponseBody> {
        self.entries.lock().expect("cache entries").get(key).cloned()
    }

    pub fn insert(&self, key: RunCacheKey, response: ResponseBody) -> Result<(), CacheError> {
        let mut writer = self.writer.lock().expect("cache writer");
        if let Some((path, file)) = writer.as_mut() {
            let mut line = serde_json::to_vec(&CacheLine {
                key: key.clone(),
                response: response.clone(),
            })
            .expect("cache line serializes");
            line.push(b'\n');
            file.write_all(&line).map_err(|source| CacheError::Io {
                path: path.clone(),
                source,
            })?;
        }
        self.entries.lock().expect("cache entries").insert(key, response);
        Ok(())
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::SeqCst),
            misses: self.misses.load(Ordering::SeqCst),
        }
    }
}

/// Wraps another factory so that every session it opens consults `cache`
/// before executing tests.
pub struct CachingFactory<F> {
    inner: F,
    cache: Arc<RunCache>,
    suite_hash: String,
    config_hash: String,
}

impl<F: SessionFactory> CachingFactory<F> {
    pub fn new(inner: F, cache: Arc<RunCache>, suite_hash: impl Into<String>, config: &ConfigSnapshot) -> Self {
        Self {
            inner,
            cache,
            suite_hash: suite_hash.into(),
            config_hash: config_hash(config),
        }
    }

    pub fn cache(&self) -> &RunCache {
        &self.cache
    }
}

impl<F: SessionFactory> SessionFactory for CachingFactory<F> {
    fn connect(&self) -> Result<Box<dyn Transport>, SessionError> {
        Ok(Box::new(CachingTransport {
            inner: self.inner.connect()?,
            cache: Arc::clone(&self.cache),
            suite_hash: self.suite_hash.clone(),
            config_hash: self.config_hash.clone(),
            ordinals: HashMap::new(),
            queue: VecDeque::new(),
        }))
    }
}

enum Pending {
    Local(Vec<u8>),
    Remote(Option<(u64, RunCacheKey)>),
}

struct CachingTransport {
    inner: Box<dyn Transport>,
    cache: Arc<RunCache>,
    suite_hash: String,
    config_hash: String,
    ordinals: HashMap<(TestId, Option<MutantId>), u64>,
    queue: VecDeque<Pending>,
}

impl CachingTransport {
    fn key(&mut self, body: &RequestBody) -> Option<RunCacheKey> {
        match body {
            RequestBody::RunOrder { mutant, order, .. } => Some(RunCacheKey::for_order(
                &self.suite_hash,
                mutant.as_ref(),
                order.sequence(),
                &self.config_hash,
            )),
            RequestBody::RunIsolated { test, mutant, .. } => {
                let counter = self.ordinals.entry((test.clone(), mutant.clone())).or_default();
                let ordinal = *counter;
                *counter += 1;
                Some(RunCacheKey::for_isolated(
                    &self.suite_hash,
                    mutant.as_ref(),
                    test,
                    ordinal,
                    &self.config_hash,
                ))
            }
            _ => None,
        }
    }
}

impl Transport for CachingTransport {
    fn send_line(&mut self, line: &[u8]) -> Result<(), TransportError> {
        let request = decode_message::<AdapterRequest>(line).ok();
        let keyed = request.and_then(|r| self.key(&r.body).map(|k| (r.id, k)));
        if let Some((id, key)) = &keyed {
            if let Some(body) = self.cache.get(key) {
                self.cache.hits.fetch_add(1, Ordering::SeqCst);
                let response = AdapterResponse { id: *id, body };
                self.queue.push_back(Pending::Local(encode_message(&response)));
                return Ok(());
            }
            self.cache.misses.fetch_add(1, Ordering::SeqCst);
        }
        self.inner.send_line(line)?;
        self.queue.push_back(Pending::Remote(keyed));
        Ok(())
    }

    fn recv_line(&mut self, deadline: Duration) -> Result<Vec<u8>, TransportError> {
        match self.queue.pop_front() {
            Some(Pending::Local(line)) => Ok(line),
            Some(Pending::Remote(keyed)) => {
                let line = self.inner.recv_line(deadline)?;
                if let Some((id, key)) = keyed {
                    if let Ok(response) = decode_message::<AdapterResponse>(&line) {
                        let cacheable = matches!(
                            response.body,
                            ResponseBody::OrderResult { .. } | ResponseBody::IsolatedResult { .. }
                        );
                        if response.id == id && cacheable {
                            if let Err(err) = self.cache.insert(key, response.body) {
                                log::warn!("{err}");
                            }
                        }
                    }
                }
                Ok(line)
            }
            None => self.inner.recv_line(deadline),
        }
    }

    fn close(&mut self, grace: Duration) {
        self.inner.close(grace);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CampaignConfig, ClassId};
    use crate::pipeline::run_campaign;
    use crate::sim::{listings_suite, SimFactory};

    fn config() -> CampaignConfig {
        CampaignConfig {
            isolation_runs: 5,
            parallelism: 2,
            ..CampaignConfig::with_seed(3)
        }
    }

    #[test]
    fn keys_separate_mutants_orders_and_ordinals() {
        let class = ClassId::new("m", "C").unwrap();
        let a = class.test("a").unwrap();
        let b = class.test("b").unwrap();
        let mutant = MutantId::for_point(&a, 0);
        let ab = RunCacheKey::for_order("s", None, &[a.clone(), b.clone()], "c");
        assert_eq!(ab, RunCacheKey::for_order("s", None, &[a.clone(), b.clone()], "c"));
        assert_ne!(ab, RunCacheKey::for_order("s", None, &[b.clone(), a.clone()], "c"));
        assert_ne!(ab, RunCacheKey::for_order("s", Some(&mutant), &[a.clone(), b.clone()], "c"));
        assert_ne!(ab, RunCacheKey::for_order("t", None, &[a.clone(), b.clone()], "c"));
        assert_ne!(ab, RunCacheKey::for_order("s", None, &[a.clone(), b.clone()], "d"));
        assert_eq!(ab.mutant, ORIGINAL);
        assert_ne!(
            RunCacheKey::for_isolated("s", None, &a, 0, "c"),
            RunCacheKey::for_isolated("s", None, &a, 1, "c")
        );
    }

    #[test]
    fn warm_cache_reproduces_labels_without_executions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.jsonl");
        let cfg = config();
        let suite = listings_suite();
        let hash = sha256_hex(&serde_json::to_vec(&suite).unwrap());

        let cold_cache = Arc::new(RunCache::open(&path).unwrap());
        let cold = CachingFactory::new(SimFactory::new(suite.clone()), Arc::clone(&cold_cache), &hash, &cfg.snapshot());
        let first = run_campaign("listings", "keys", &cold, &cfg).unwrap();
        assert_eq!(cold_cache.stats().hits, 0);
        assert!(cold_cache.stats().misses > 0);
        drop(cold);
        drop(cold_cache);

        let warm_cache = Arc::new(RunCache::open(&path).unwrap());
        let warm = CachingFactory::new(SimFactory::new(suite), Arc::clone(&warm_cache), &hash, &cfg.snapshot());
        let second = run_campaign("listings", "keys", &warm, &cfg).unwrap();
        assert_eq!(warm_cache.stats().misses, 0);
        assert!(warm_cache.stats().hits > 0);
        assert_eq!(first.evaluations, second.evaluations);
        assert_eq!(first.classes.len(), second.classes.len());
    }

    #[test]
    fn truncated_lines_are_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.jsonl");
        std::fs::write(&path, "{\"key\":{\"suite_hash\"").unwrap();
        let cache = RunCache::open(&path).unwrap();
        assert!(cache.is_empty());
        let class = ClassId::new("m", "C").unwrap();
        let key = RunCacheKey::for_isolated("s", None, &class.test("a").unwrap(), 0, "c");
        cache.insert(key.clone(), ResponseBody::Goodbye).unwrap();
        drop(cache);
        assert_eq!(RunCache::open(&path).unwrap().get(&key), Some(ResponseBody::Goodbye));
    }
}
