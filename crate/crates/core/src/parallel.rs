//! Worker-count control and a shared mutable buffer for disjoint parallel writes.

use std::marker::PhantomData;

use crate::error::{Error, Result};

/// Runs `f` inside a rayon pool capped at `workers` threads; `0` uses the
/// global pool.
pub fn with_workers<T, F>(workers: usize, f: F) -> Result<T>
where
    F: FnOnce() -> T + Send,
    T: Send,
{
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot build {workers}-worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Number of hardware threads reported by the OS.
pub fn max_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

/// A `&mut [T]` that concurrent tasks may write through, provided no two
/// tasks touch the same index and no task reads an index another task is
/// writing.
pub(crate) struct SharedSlice<'a, T> {
    ptr: *mut T,
    len: usize,
    _marker: PhantomData<&'a mut [T]>,
}

unsafe impl<T: Send> Send for SharedSlice<'_, T> {}
unsafe impl<T: Send> Sync for SharedSlice<'_, T> {}

impl<'a, T> SharedSlice<'a, T> {
    pub(crate) fn new(slice: &'a mut [T]) -> Self {
        SharedSlice {
            ptr: slice.as_mut_ptr(),
            len: slice.len(),
            _marker: PhantomData,
        }
    }

    /// # Safety
    /// The range must not overlap any range handed out to another live task.
    #[allow(clippy::mut_from_ref)]
    pub(crate) unsafe fn slice_mut(&self, start: usize, len: usize) -> &mut [T] {
        assert!(start <= self.len && len <= self.len - start);
        std::slice::from_raw_parts_mut(self.ptr.add(start), len)
    }

    /// # Safety
    /// No other task may be writing the range while the returned slice lives.
    pub(crate) unsafe fn slice(&self, start: usize, len: usize) -> &[T] {
        assert!(start <= self.len && len <= self.len - start);
        std::slice::from_raw_parts(self.ptr.add(start), len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pool_caps_threads() {
        let n = with_workers(2, rayon::current_num_threads).unwrap();
        assert_eq!(n, 2);
        assert!(max_workers() >= 1);
    }
}
