use serde::{Deserialize, Serialize};

use super::PdeError;

/// Tensor grid on a box; axis 0 varies fastest in the linear node index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    nodes: Vec<usize>,
    h: Vec<f64>,
    strides: Vec<usize>,
}

/// One face of the box: `axis` and `upper` (false = lo side).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    pub axis: usize,
    pub upper: bool,
}

impl Face {
    /// Outward unit normal.
    pub fn normal(&self, n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[self.axis] = if self.upper { 1.0 } else { -1.0 };
        v
    }
}

impl Grid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, nodes: Vec<usize>) -> Result<Self, PdeError> {
        let n = lo.len();
        if hi.len() != n || nodes.len() != n || n == 0 {
            return Err(PdeError::GridShape("lo, hi and nodes must have the same nonzero length".into()));
        }
        if nodes.iter().any(|&m| m < 3) {
            return Err(PdeError::GridShape(format!("need at least 3 nodes per axis, got {nodes:?}")));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(PdeError::GridShape("each axis needs lo < hi".into()));
        }
        let h = (0..n).map(|k| (hi[k] - lo[k]) / (nodes[k] - 1) as f64).collect();
        let mut strides = vec![1; n];
        for k in 1..n {
            strides[k] = strides[k - 1] * nodes[k - 1];
        }
        Ok(Grid { lo, hi, nodes, h, strides })
    }

    pub fn uniform(lo: f64, hi: f64, n: usize, nodes: usize) -> Result<Self, PdeError> {
        Self::new(vec![lo; n], vec![hi; n], vec![nodes; n])
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn len(&self) -> usize {
        self.nodes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.iter().product()
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut m = vec![0; self.dim()];
        for k in 0..self.dim() {
            m[k] = idx % self.nodes[k];
            idx /= self.nodes[k];
        }
        m
    }

    pub fn linear_index(&self, m: &[usize]) -> usize {
        m.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    /// Index along `axis` of node `idx`.
    pub fn axis_index(&self, idx: usize, axis: usize) -> usize {
        (idx / self.strides[axis]) % self.nodes[axis]
    }

    pub fn coord(&self, idx: usize, axis: usize) -> f64 {
        let i = self.axis_index(idx, axis);
        if i + 1 == self.nodes[axis] {
            self.hi[axis]
        } else {
            self.lo[axis] + i as f64 * self.h[axis]
        }
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        (0..self.dim()).map(|k| self.coord(idx, k)).collect()
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        (0..self.dim()).any(|k| {
            let i = self.axis_index(idx, k);
            i == 0 || i + 1 == self.nodes[k]
        })
    }

    pub fn interior(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.is_boundary(i)).collect()
    }

    pub fn boundary(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_boundary(i)).collect()
    }

    /// Node → position in [`interior`](Self::interior), if interior.
    pub fn interior_map(&self) -> Vec<Option<usize>> {
        let mut map = vec![None; self.len()];
        for (k, i) in self.interior().into_iter().enumerate() {
            map[i] = Some(k);
        }
        map
    }

    /// Interior nodes adjacent to at least one boundary node along an axis.
    pub fn boundary_adjacent(&self) -> Vec<usize> {
        self.interior()
            .into_iter()
            .filter(|&i| {
                (0..self.dim()).any(|k| {
                    let a = self.axis_index(i, k);
                    a == 1 || a + 2 == self.nodes[k]
                })
            })
            .collect()
    }

    pub fn faces(&self) -> Vec<Face> {
        (0..self.dim()).flat_map(|axis| [Face { axis, upper: false }, Face { axis, upper: true }]).collect()
    }

    pub fn face_nodes(&self, f: Face) -> Vec<usize> {
        let target = if f.upper { self.nodes[f.axis] - 1 } else { 0 };
        (0..self.len()).filter(|&i| self.axis_index(i, f.axis) == target).collect()
    }

    /// Offset of node `idx` by `d` steps along `axis`, if inside the grid.
    pub fn neighbor(&self, idx: usize, axis: usize, d: isize) -> Option<usize> {
        let i = self.axis_index(idx, axis) as isize + d;
        if i < 0 || i >= self.nodes[axis] as isize {
            return None;
        }
        Some((idx as isize + d * self.strides[axis] as isize) as usize)
    }

    /// Evaluates `f` at every node.
    pub fn sample<F: Fn(&[f64]) -> f64 + Sync>(&self, f: F) -> Vec<f64> {
        use rayon::prelude::*;
        (0..self.len()).into_par_iter().map(|i| f(&self.point(i))).collect()
    }

    /// Same box with `factor`·(m−1)+1 nodes per axis.
    pub fn refine(&self, factor: usize) -> Grid {
        let nodes = self.nodes.iter().map(|&m| (m - 1) * factor + 1).collect();
        Grid::new(self.lo.clone(), self.hi.clone(), nodes).expect("refined grid is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masks_partition_nodes() {
        let g = Grid::new(vec![0.0, 0.0], vec![1.0, 2.0], vec![4, 5]).unwrap();
        assert_eq!(g.interior().len() + g.boundary().len(), g.len());
        assert_eq!(g.interior().len(), 2 * 3);
        assert_eq!(g.h(), &[1.0 / 3.0, 0.5]);
    }

    #[test]
    fn index_round_trip() {
        let g = Grid::uniform(0.0, 1.0, 3, 4).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.linear_index(&g.multi_index(i)), i);
        }
        assert_eq!(g.coord(g.len() - 1, 2), 1.0);
    }

    #[test]
    fn rejects_coarse_grid() {
        assert!(Grid::new(vec![0.0], vec![1.0], vec![2]).is_err());
    }

    #[test]
    fn neighbors_stay_inside() {
        let g = Grid::uniform(0.0, 1.0, 2, 3).unwrap();
        assert_eq!(g.neighbor(0, 0, -1), None);
        assert_eq!(g.neighbor(0, 1, 1), Some(3));
    }
}
