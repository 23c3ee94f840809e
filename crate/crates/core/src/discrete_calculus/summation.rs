use crate::grid_fields::Grid;

/// Compensated (Neumaier) summation.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn fast_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

/// Unevaluated sum `hi + lo` carrying roughly 106 bits.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    #[inline]
    pub(crate) fn add_f64(self, x: f64) -> Self {
        let (s, e) = two_sum(self.hi, x);
        let (hi, lo) = fast_two_sum(s, e + self.lo);
        DoubleDouble { hi, lo }
    }

    #[inline]
    pub(crate) fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (hi, lo) = fast_two_sum(s, e + self.lo + o.lo);
        DoubleDouble { hi, lo }
    }

    #[inline]
    pub(crate) fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    pub(crate) fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Summed-area table over a grid's cells (`x` fastest), accumulated in
/// double-double so window sums match direct compensated summation.
pub(crate) struct SummedArea {
    stride: usize,
    table: Vec<DoubleDouble>,
}

impl SummedArea {
    pub(crate) fn new(grid: &Grid, values: &[f64]) -> Self {
        let c0 = grid.cells()[0];
        let c1 = grid.cells().get(1).copied().unwrap_or(1);
        let stride = c0 + 1;
        let mut table = vec![DoubleDouble::default(); stride * (c1 + 1)];
        for j in 0..c1 {
            let mut row = DoubleDouble::default();
            for i in 0..c0 {
                row = row.add_f64(values[i + c0 * j]);
                table[(i + 1) + stride * (j + 1)] = table[(i + 1) + stride * j].add(row);
            }
        }
        SummedArea { stride, table }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> DoubleDouble {
        self.table[i + self.stride * j]
    }

    /// Sum over cells `[i, i + w0) × [j, j + w1)`.
    #[inline]
    pub(crate) fn window(&self, i: usize, j: usize, w0: usize, w1: usize) -> f64 {
        self.at(i + w0, j + w1)
            .add(self.at(i, j + w1).neg())
            .add(self.at(i + w0, j).neg())
            .add(self.at(i, j))
            .to_f64()
    }
}
