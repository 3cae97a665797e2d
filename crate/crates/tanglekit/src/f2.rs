//! Dense bit-packed linear algebra over F₂: rank and linear solves.
//! Matrices here are small (hom-space slices, per-order extension
//! systems), so simple row elimination on `u64` words is plenty.

#[derive(Clone, Debug)]
pub struct BitMat {
    pub rows: usize,
    pub cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64);
        BitMat { rows, cols, words, data: vec![0; rows * words] }
    }

    #[cfg(test)]
    pub fn from_entries(rows: usize, cols: usize, entries: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut m = BitMat::zero(rows, cols);
        for (r, c) in entries {
            m.flip(r, c);
        }
        m
    }

    pub fn flip(&mut self, r: usize, c: usize) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.words + c / 64] ^= 1u64 << (c % 64);
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.words + c / 64] >> (c % 64) & 1 == 1
    }

    fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        let (a, b) = (src * self.words, dst * self.words);
        for k in 0..self.words {
            let v = self.data[a + k];
            self.data[b + k] ^= v;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.words {
            self.data.swap(a * self.words + k, b * self.words + k);
        }
    }

    pub fn rank(mut self) -> usize {
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(pivot) = (rank..self.rows).find(|&r| self.get(r, col)) else {
                continue;
            };
            self.swap_rows(rank, pivot);
            for r in 0..self.rows {
                if r != rank && self.get(r, col) {
                    self.xor_row_into(rank, r);
                }
            }
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        rank
    }

    /// Basis of the right kernel `{x : M x = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<bool>> {
        let mut m = self.clone();
        let mut pivot_col = Vec::new();
        let mut rank = 0;
        for col in 0..m.cols {
            let Some(p) = (rank..m.rows).find(|&r| m.get(r, col)) else {
                continue;
            };
            m.swap_rows(rank, p);
            for r in 0..m.rows {
                if r != rank && m.get(r, col) {
                    m.xor_row_into(rank, r);
                }
            }
            pivot_col.push(col);
            rank += 1;
            if rank == m.rows {
                break;
            }
        }
        let mut is_pivot = vec![false; m.cols];
        for &c in &pivot_col {
            is_pivot[c] = true;
        }
        let mut out = Vec::new();
        for free in (0..m.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![false; m.cols];
            v[free] = true;
            for (r, &pc) in pivot_col.iter().enumerate() {
                if m.get(r, free) {
                    v[pc] = true;
                }
            }
            out.push(v);
        }
        out
    }

    /// One solution `x` of `M x = rhs` (column-vector convention), if any.
    pub fn solve(&self, rhs: &[bool]) -> Option<Vec<bool>> {
        assert_eq!(rhs.len(), self.rows);
        // Augment with the rhs as an extra column and eliminate.
        let mut m = BitMat::zero(self.rows, self.cols + 1);
        for r in 0..self.rows {
            m.data[r * m.words..r * m.words + self.words].copy_from_slice(self.row(r));
            if rhs[r] {
                m.flip(r, self.cols);
            }
        }
        let mut pivot_col = vec![usize::MAX; self.rows];
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(p) = (rank..self.rows).find(|&r| m.get(r, col)) else {
                continue;
            };
            m.swap_rows(rank, p);
            for r in 0..self.rows {
                if r != rank && m.get(r, col) {
                    m.xor_row_into(rank, r);
                }
            }
            pivot_col[rank] = col;
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        // Inconsistent if a zero row has rhs bit 1.
        for r in rank..self.rows {
            if m.get(r, self.cols) {
                return None;
            }
        }
        let mut x = vec![false; self.cols];
        for r in 0..rank {
            if m.get(r, self.cols) {
                x[pivot_col[r]] = true;
            }
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_solve() {
        // [1 1 0; 0 1 1; 1 0 1] has rank 2 over F2.
        let m = BitMat::from_entries(3, 3, [(0, 0), (0, 1), (1, 1), (1, 2), (2, 0), (2, 2)]);
        assert_eq!(m.clone().rank(), 2);

        let sol = m.solve(&[true, true, false]).expect("consistent");
        // Verify M x = rhs.
        let check: Vec<bool> = (0..3)
            .map(|r| (0..3).filter(|&c| m.get(r, c) && sol[c]).count() % 2 == 1)
            .collect();
        assert_eq!(check, vec![true, true, false]);

        assert!(m.solve(&[true, false, false]).is_none());
    }

    #[test]
    fn nullspace_spans_the_kernel() {
        let m = BitMat::from_entries(3, 3, [(0, 0), (0, 1), (1, 1), (1, 2), (2, 0), (2, 2)]);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 1);
        assert_eq!(ns[0], vec![true, true, true]);

        assert_eq!(BitMat::zero(2, 3).nullspace().len(), 3);
        // Identity has trivial kernel.
        let id = BitMat::from_entries(2, 2, [(0, 0), (1, 1)]);
        assert!(id.nullspace().is_empty());
    }

    #[test]
    fn empty_edge_cases() {
        let m = BitMat::zero(0, 5);
        assert_eq!(m.clone().rank(), 0);
        assert_eq!(m.solve(&[]), Some(vec![false; 5]));
        let m2 = BitMat::zero(3, 0);
        assert_eq!(m2.clone().rank(), 0);
        assert_eq!(m2.solve(&[false, true, false]), None);
        assert_eq!(m2.solve(&[false, false, false]), Some(vec![]));
    }
}
