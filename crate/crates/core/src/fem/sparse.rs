//! Reverse Cuthill-McKee ordering and a skyline (envelope) Cholesky factorization.

use std::collections::VecDeque;

/// Reverse Cuthill-McKee permutation of a symmetric adjacency structure.
/// `perm[k]` is the original index placed at position `k`.
pub fn reverse_cuthill_mckee(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    let degree: Vec<usize> = adjacency.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(adjacency, &degree, seed);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adjacency[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(adjacency: &[Vec<usize>], start: usize) -> Vec<usize> {
    let mut level = vec![usize::MAX; adjacency.len()];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in &adjacency[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    level
}

fn pseudo_peripheral(adjacency: &[Vec<usize>], degree: &[usize], seed: usize) -> usize {
    let mut current = seed;
    let mut ecc = 0;
    for _ in 0..8 {
        let level = bfs_levels(adjacency, current);
        let far = level.iter().copied().filter(|&l| l != usize::MAX).max().unwrap_or(0);
        if far <= ecc && ecc > 0 {
            break;
        }
        ecc = far;
        current = (0..adjacency.len())
            .filter(|&v| level[v] == far)
            .min_by_key(|&v| (degree[v], v))
            .expect("non-empty level");
    }
    current
}

/// Symmetric matrix stored by rows of its lower envelope.
#[derive(Debug, Clone)]
pub struct Skyline {
    first: Vec<usize>,
    start: Vec<usize>,
    values: Vec<f64>,
}

impl Skyline {
    /// Envelope spanned by the given lower-triangular pattern `(i, j)` with `j <= i`.
    pub fn with_pattern(n: usize, entries: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut first: Vec<usize> = (0..n).collect();
        for (i, j) in entries {
            let (i, j) = if j <= i { (i, j) } else { (j, i) };
            first[i] = first[i].min(j);
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut acc = 0;
        for i in 0..n {
            start.push(acc);
            acc += i - first[i] + 1;
        }
        start.push(acc);
        Skyline {
            first,
            start,
            values: vec![0.0; acc],
        }
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    pub fn clear(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Add `v` to entry `(i, j)`; the entry must lie inside the envelope.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if j <= i { (i, j) } else { (j, i) };
        debug_assert!(j >= self.first[i]);
        self.values[self.start[i] + j - self.first[i]] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j <= i { (i, j) } else { (j, i) };
        if j < self.first[i] {
            0.0
        } else {
            self.values[self.start[i] + j - self.first[i]]
        }
    }

    /// In-place `L Lᵀ` factorization. Returns `false` if a pivot is not positive.
    pub fn cholesky(&mut self) -> bool {
        let n = self.dim();
        for i in 0..n {
            let fi = self.first[i];
            let si = self.start[i];
            for j in fi..=i {
                let fj = self.first[j];
                let sj = self.start[j];
                let k0 = fi.max(fj);
                let mut s = self.values[si + j - fi];
                for k in k0..j {
                    s -= self.values[si + k - fi] * self.values[sj + k - fj];
                }
                if j < i {
                    s /= self.values[sj + j - fj];
                    self.values[si + j - fi] = s;
                } else {
                    if !(s > 0.0) || !s.is_finite() {
                        return false;
                    }
                    self.values[si + i - fi] = s.sqrt();
                }
            }
        }
        true
    }

    /// Solve `L Lᵀ x = b` with a factorized matrix.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = b.to_vec();
        for i in 0..n {
            let fi = self.first[i];
            let si = self.start[i];
            let mut s = y[i];
            for k in fi..i {
                s -= self.values[si + k - fi] * y[k];
            }
            y[i] = s / self.values[si + i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let si = self.start[i];
            y[i] /= self.values[si + i - fi];
            let xi = y[i];
            for k in fi..i {
                y[k] -= self.values[si + k - fi] * xi;
            }
        }
        y
    }
}
