use serde::Serialize;

/// Index type of one tensor slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Slot {
    FrameUp,
    FrameDown,
    CoordUp,
    CoordDown,
}

impl Slot {
    fn extent(self, rank: usize, dim: usize) -> usize {
        match self {
            Slot::FrameUp | Slot::FrameDown => rank,
            Slot::CoordUp | Slot::CoordDown => dim,
        }
    }
}

/// Dense components of a tensor at one chart point, row-major in slot order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TensorSample {
    pub slots: Vec<Slot>,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
    pub point: Vec<f64>,
}

impl TensorSample {
    pub fn zeros(slots: &[Slot], rank: usize, dim: usize, point: &[f64]) -> TensorSample {
        let shape: Vec<usize> = slots.iter().map(|s| s.extent(rank, dim)).collect();
        let len = shape.iter().product();
        TensorSample { slots: slots.to_vec(), shape, data: vec![0.0; len], point: point.to_vec() }
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| {
            debug_assert!(i < n);
            acc * n + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let k = self.offset(idx);
        self.data[k] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Largest componentwise difference; shapes must agree.
    pub fn max_abs_diff(&self, other: &TensorSample) -> f64 {
        assert_eq!(self.shape, other.shape, "tensor shapes differ");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> TensorSample {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }
}
