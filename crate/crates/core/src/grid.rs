/// Tensor-product point set with the first axis varying slowest.
///
/// Index `i` maps to coordinates by mixed-radix decomposition, last axis
/// fastest. This is the canonical node order of every rule and scan.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    axes: Vec<Vec<f64>>,
}

impl TensorGrid {
    pub fn new(axes: Vec<Vec<f64>>) -> Self {
        assert!(!axes.is_empty() && axes.len() <= crate::geometry::MAX_DIM);
        Self { axes }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    /// Per-axis indices of the linear index `i`.
    pub fn multi_index(&self, mut i: usize) -> [usize; crate::geometry::MAX_DIM] {
        let mut idx = [0; crate::geometry::MAX_DIM];
        for d in (0..self.axes.len()).rev() {
            let n = self.axes[d].len();
            idx[d] = i % n;
            i /= n;
        }
        idx
    }

    pub fn point(&self, i: usize) -> crate::geometry::Vector {
        let idx = self.multi_index(i);
        let mut p = crate::geometry::ZERO_VECTOR;
        for (d, axis) in self.axes.iter().enumerate() {
            p[d] = axis[idx[d]];
        }
        p
    }
}

/// `(i + 1/2) / n` for `i` in `0..n`.
pub fn midpoints(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
}
