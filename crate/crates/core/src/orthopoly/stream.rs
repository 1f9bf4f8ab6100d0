//! Lazily generated, memoized coefficient sequences.

use std::fmt;
use std::sync::RwLock;

use crate::error::Result;

type Generator<C> = dyn Fn(usize, &[C]) -> Result<C> + Send + Sync;

/// Coefficients `c_1, c_2, ...` produced on demand by a generator that
/// sees every earlier coefficient. Values are cached, so every consumer
/// reads the same numbers.
pub(crate) struct CoefficientStream<C> {
    cache: RwLock<Vec<C>>,
    generator: Box<Generator<C>>,
}

impl<C: Clone + Send + Sync> CoefficientStream<C> {
    pub(crate) fn new(generator: impl Fn(usize, &[C]) -> Result<C> + Send + Sync + 'static) -> Self {
        Self { cache: RwLock::new(Vec::new()), generator: Box::new(generator) }
    }

    /// Coefficient at step `t >= 1`.
    pub(crate) fn get(&self, t: usize) -> Result<C> {
        assert!(t >= 1, "coefficient streams start at t = 1");
        {
            let cache = self.cache.read().unwrap_or_else(|e| e.into_inner());
            if let Some(c) = cache.get(t - 1) {
                return Ok(c.clone());
            }
        }
        let mut cache = self.cache.write().unwrap_or_else(|e| e.into_inner());
        while cache.len() < t {
            let next = (self.generator)(cache.len() + 1, &cache)?;
            cache.push(next);
        }
        Ok(cache[t - 1].clone())
    }

    /// Coefficients `c_1..=c_t`.
    pub(crate) fn prefix(&self, t: usize) -> Result<Vec<C>> {
        if t == 0 {
            return Ok(Vec::new());
        }
        self.get(t)?;
        let cache = self.cache.read().unwrap_or_else(|e| e.into_inner());
        Ok(cache[..t].to_vec())
    }
}

impl<C: fmt::Debug> fmt::Debug for CoefficientStream<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cache = self.cache.read().unwrap_or_else(|e| e.into_inner());
        f.debug_struct("CoefficientStream").field("cached", &cache.len()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    #[test]
    fn memoizes_and_sees_history() {
        let calls = Arc::new(AtomicUsize::new(0));
        let c = calls.clone();
        let s = CoefficientStream::new(move |t, prev: &[u64]| {
            c.fetch_add(1, Ordering::SeqCst);
            Ok(if t <= 2 { 1 } else { prev[t - 2] + prev[t - 3] })
        });
        assert_eq!(s.get(10).unwrap(), 55);
        assert_eq!(s.get(3).unwrap(), 2);
        assert_eq!(calls.load(Ordering::SeqCst), 10);
        assert_eq!(s.prefix(4).unwrap(), vec![1, 1, 2, 3]);
    }

    #[test]
    fn concurrent_readers_agree() {
        let s = Arc::new(CoefficientStream::new(|t, _: &[f64]| Ok((t as f64).sqrt())));
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let s = s.clone();
                std::thread::spawn(move || (1..200).map(|t| s.get(t).unwrap()).collect::<Vec<_>>())
            })
            .collect();
        let results: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        assert!(results.windows(2).all(|w| w[0] == w[1]));
    }
}
