//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature, `Mode::Parallel` maps over rayon's pool.
//! Without it, every mode runs sequentially. Output order never depends on
//! the mode.

/// How exploration fans out over a frontier.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    #[default]
    Parallel,
    Sequential,
}

impl Mode {
    /// Whether the parallel engine is compiled in.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// `items.iter().map(f).collect()`, possibly in parallel.
pub fn map<T: Sync, U: Send>(mode: Mode, items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    #[cfg(feature = "parallel")]
    if mode == Mode::Parallel && items.len() > 1 {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = mode;
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        assert_eq!(map(Mode::Parallel, &xs, |x| x * x), map(Mode::Sequential, &xs, |x| x * x));
    }
}
