//! Sparse LU factorisation of a simplex basis plus a product-form eta file.
//!
//! The factorisation is left-looking (one sparse triangular solve per basis
//! column) with threshold partial pivoting. Among acceptable pivots the row
//! with the fewest basis nonzeros wins, which keeps coupling rows (annual caps,
//! emission limits) out of the early pivots and limits fill.

const NONE: usize = usize::MAX;
/// Relative threshold for acceptable pivots within a column.
const PIVOT_THRESHOLD: f64 = 0.1;
/// Columns whose largest remaining entry is below this are treated as dependent.
const SINGULAR_TOL: f64 = 1e-11;

/// Compressed sparse columns, row indices unsorted.
#[derive(Debug, Clone, Default)]
pub(crate) struct SparseColumns {
    pub ptr: Vec<usize>,
    pub idx: Vec<usize>,
    pub val: Vec<f64>,
}

impl SparseColumns {
    pub fn new() -> Self {
        Self {
            ptr: vec![0],
            idx: Vec::new(),
            val: Vec::new(),
        }
    }

    pub fn push_column(&mut self, entries: impl IntoIterator<Item = (usize, f64)>) {
        for (i, v) in entries {
            self.idx.push(i);
            self.val.push(v);
        }
        self.ptr.push(self.idx.len());
    }

    pub fn ncols(&self) -> usize {
        self.ptr.len() - 1
    }

    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let r = self.ptr[j]..self.ptr[j + 1];
        (&self.idx[r.clone()], &self.val[r])
    }

    pub fn nnz(&self) -> usize {
        self.idx.len()
    }
}

/// A basis that could not be factorised: the listed positions are linearly
/// dependent on the others and `free_rows` were never pivoted.
#[derive(Debug, Clone)]
pub(crate) struct Singular {
    pub positions: Vec<usize>,
    pub free_rows: Vec<usize>,
}

#[derive(Debug, Clone)]
struct LuFactors {
    m: usize,
    l: SparseColumns,
    u: SparseColumns,
    u_diag: Vec<f64>,
    /// original row -> pivot step
    row_step: Vec<usize>,
    /// pivot step -> basis position
    step_pos: Vec<usize>,
}

fn factorize(m: usize, basis: &SparseColumns) -> Result<LuFactors, Singular> {
    debug_assert_eq!(basis.ncols(), m);
    let mut row_count = vec![0usize; m];
    for &i in &basis.idx {
        row_count[i] += 1;
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&j| (basis.ptr[j + 1] - basis.ptr[j], j));

    let mut l = SparseColumns::new();
    let mut u = SparseColumns::new();
    let mut u_diag = Vec::with_capacity(m);
    let mut row_step = vec![NONE; m];
    let mut step_pos = Vec::with_capacity(m);
    let mut singular = Vec::new();

    let mut x = vec![0.0; m];
    let mut reach = Reach::new(m);

    for &pos in &order {
        let (rows, vals) = basis.column(pos);
        let top = reach.compute(rows, &l, &row_step);
        for (&i, &v) in rows.iter().zip(vals) {
            x[i] += v;
        }
        for &j in &reach.out[top..] {
            let step = row_step[j];
            if step == NONE {
                continue;
            }
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            let (li, lv) = l.column(step);
            for (&i, &v) in li.iter().zip(lv) {
                x[i] -= v * xj;
            }
        }

        let amax = reach.out[top..]
            .iter()
            .filter(|&&i| row_step[i] == NONE)
            .map(|&i| x[i].abs())
            .fold(0.0, f64::max);
        if amax <= SINGULAR_TOL {
            for &i in &reach.out[top..] {
                x[i] = 0.0;
            }
            singular.push(pos);
            continue;
        }
        let mut piv = NONE;
        for &i in &reach.out[top..] {
            if row_step[i] != NONE || x[i].abs() < PIVOT_THRESHOLD * amax {
                continue;
            }
            let better = piv == NONE
                || row_count[i] < row_count[piv]
                || (row_count[i] == row_count[piv]
                    && (x[i].abs() > x[piv].abs() || (x[i].abs() == x[piv].abs() && i < piv)));
            if better {
                piv = i;
            }
        }
        let pivot = x[piv];
        let step = step_pos.len();

        for &j in &reach.out[top..] {
            if row_step[j] != NONE && x[j] != 0.0 {
                u.idx.push(row_step[j]);
                u.val.push(x[j]);
            }
        }
        u.ptr.push(u.idx.len());
        u_diag.push(pivot);
        row_step[piv] = step;

        for &i in &reach.out[top..] {
            if row_step[i] == NONE && x[i] != 0.0 {
                l.idx.push(i);
                l.val.push(x[i] / pivot);
            }
            x[i] = 0.0;
        }
        l.ptr.push(l.idx.len());
        step_pos.push(pos);
    }

    if !singular.is_empty() {
        let free_rows = (0..m).filter(|&i| row_step[i] == NONE).collect();
        return Err(Singular {
            positions: singular,
            free_rows,
        });
    }

    for i in &mut l.idx {
        *i = row_step[*i];
    }
    Ok(LuFactors {
        m,
        l,
        u,
        u_diag,
        row_step,
        step_pos,
    })
}

/// Depth-first reachability in the graph of the partially built L factor.
struct Reach {
    marked: Vec<bool>,
    out: Vec<usize>,
    stack: Vec<(usize, usize)>,
}

impl Reach {
    fn new(m: usize) -> Self {
        Self {
            marked: vec![false; m],
            out: vec![0; m],
            stack: Vec::new(),
        }
    }

    /// Fills `out[top..]` with the rows reachable from `start` in topological
    /// order and returns `top`.
    fn compute(&mut self, start: &[usize], l: &SparseColumns, row_step: &[usize]) -> usize {
        let m = self.out.len();
        let mut top = m;
        for &s in start {
            if self.marked[s] {
                continue;
            }
            self.marked[s] = true;
            self.stack.push((s, 0));
            while let Some(&(j, mut next)) = self.stack.last() {
                let step = row_step[j];
                let children: &[usize] = if step == NONE { &[] } else { l.column(step).0 };
                let mut child = None;
                while next < children.len() {
                    let i = children[next];
                    next += 1;
                    if !self.marked[i] {
                        child = Some(i);
                        break;
                    }
                }
                let last = self.stack.len() - 1;
                self.stack[last].1 = next;
                match child {
                    Some(i) => {
                        self.marked[i] = true;
                        self.stack.push((i, 0));
                    }
                    None => {
                        self.stack.pop();
                        top -= 1;
                        self.out[top] = j;
                    }
                }
            }
        }
        for &i in &self.out[top..] {
            self.marked[i] = false;
        }
        top
    }
}

impl LuFactors {
    /// Solves `B x = b` in place: `b` is indexed by row on entry and by basis
    /// position on exit.
    fn solve(&self, b: &mut [f64], work: &mut [f64]) {
        let m = self.m;
        for i in 0..m {
            work[self.row_step[i]] = b[i];
        }
        for k in 0..m {
            let xk = work[k];
            if xk != 0.0 {
                let (li, lv) = self.l.column(k);
                for (&i, &v) in li.iter().zip(lv) {
                    work[i] -= v * xk;
                }
            }
        }
        for k in (0..m).rev() {
            if work[k] != 0.0 {
                let xk = work[k] / self.u_diag[k];
                work[k] = xk;
                let (ui, uv) = self.u.column(k);
                for (&i, &v) in ui.iter().zip(uv) {
                    work[i] -= v * xk;
                }
            }
        }
        for k in 0..m {
            b[self.step_pos[k]] = work[k];
        }
    }

    /// Solves `B^T y = c` in place: `c` is indexed by basis position on entry
    /// and by row on exit.
    fn solve_transpose(&self, c: &mut [f64], work: &mut [f64]) {
        let m = self.m;
        for k in 0..m {
            let (ui, uv) = self.u.column(k);
            let mut s = c[self.step_pos[k]];
            for (&i, &v) in ui.iter().zip(uv) {
                s -= v * work[i];
            }
            work[k] = s / self.u_diag[k];
        }
        for k in (0..m).rev() {
            let (li, lv) = self.l.column(k);
            let mut s = work[k];
            for (&i, &v) in li.iter().zip(lv) {
                s -= v * work[i];
            }
            work[k] = s;
        }
        for i in 0..m {
            c[i] = work[self.row_step[i]];
        }
    }

    fn nnz(&self) -> usize {
        self.l.nnz() + self.u.nnz() + self.m
    }
}

/// LU factors of a refactorised basis followed by the eta matrices of every
/// basis change since.
#[derive(Debug, Clone)]
pub(crate) struct BasisFactor {
    lu: LuFactors,
    eta_pos: Vec<usize>,
    eta_pivot: Vec<f64>,
    etas: SparseColumns,
    work: Vec<f64>,
}

impl BasisFactor {
    pub fn new(m: usize, basis: &SparseColumns) -> Result<Self, Singular> {
        let lu = factorize(m, basis)?;
        Ok(Self {
            lu,
            eta_pos: Vec::new(),
            eta_pivot: Vec::new(),
            etas: SparseColumns::new(),
            work: vec![0.0; m],
        })
    }

    pub fn num_updates(&self) -> usize {
        self.eta_pos.len()
    }

    /// Whether the eta file has grown enough that refactorising is cheaper.
    pub fn is_bloated(&self) -> bool {
        self.etas.nnz() > 2 * self.lu.nnz() + 10 * self.lu.m
    }

    /// `b` (row space) is overwritten by `B^{-1} b` (position space).
    pub fn ftran(&mut self, b: &mut [f64]) {
        self.lu.solve(b, &mut self.work);
        for k in 0..self.eta_pos.len() {
            let p = self.eta_pos[k];
            let xp = b[p] / self.eta_pivot[k];
            b[p] = xp;
            if xp != 0.0 {
                let (ei, ev) = self.etas.column(k);
                for (&i, &v) in ei.iter().zip(ev) {
                    b[i] -= v * xp;
                }
            }
        }
    }

    /// `c` (position space) is overwritten by `B^{-T} c` (row space).
    pub fn btran(&mut self, c: &mut [f64]) {
        for k in (0..self.eta_pos.len()).rev() {
            let p = self.eta_pos[k];
            let (ei, ev) = self.etas.column(k);
            let mut s = c[p];
            for (&i, &v) in ei.iter().zip(ev) {
                s -= v * c[i];
            }
            c[p] = s / self.eta_pivot[k];
        }
        self.lu.solve_transpose(c, &mut self.work);
    }

    /// Records that the column with transformed entries `alpha` (position
    /// space) replaced the basic variable at position `p`.
    pub fn update(&mut self, p: usize, alpha: &[f64]) {
        self.eta_pos.push(p);
        self.eta_pivot.push(alpha[p]);
        self.etas.push_column(
            alpha
                .iter()
                .enumerate()
                .filter(|&(i, &v)| i != p && v != 0.0)
                .map(|(i, &v)| (i, v)),
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_to_cols(a: &[Vec<f64>]) -> SparseColumns {
        let m = a.len();
        let mut cols = SparseColumns::new();
        for j in 0..m {
            cols.push_column((0..m).filter(|&i| a[i][j] != 0.0).map(|i| (i, a[i][j])));
        }
        cols
    }

    fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn mat_t_vec(a: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
        let m = a.len();
        (0..m).map(|j| (0..m).map(|i| a[i][j] * y[i]).sum()).collect()
    }

    fn sample() -> Vec<Vec<f64>> {
        vec![
            vec![4.0, 0.0, 1.0, 0.0, 0.0],
            vec![0.0, -1.0, 0.0, 2.0, 0.0],
            vec![1.0, 0.0, 3.0, 0.0, 1.0],
            vec![0.0, 0.5, 0.0, 0.0, -2.0],
            vec![2.0, 0.0, 0.0, 1.0, 1.0],
        ]
    }

    #[test]
    fn solves_match_dense_products() {
        let a = sample();
        let mut f = BasisFactor::new(5, &dense_to_cols(&a)).unwrap();
        let x_true = vec![1.0, -2.0, 0.5, 3.0, -1.5];
        let mut b = matvec(&a, &x_true);
        f.ftran(&mut b);
        for (got, want) in b.iter().zip(&x_true) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        let mut c = mat_t_vec(&a, &x_true);
        f.btran(&mut c);
        for (got, want) in c.iter().zip(&x_true) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn eta_updates_track_column_replacement() {
        let mut a = sample();
        let mut f = BasisFactor::new(5, &dense_to_cols(&a)).unwrap();
        let new_col = vec![0.0, 1.0, 1.0, 0.0, 3.0];
        let mut alpha = new_col.clone();
        f.ftran(&mut alpha);
        f.update(2, &alpha);
        for i in 0..5 {
            a[i][2] = new_col[i];
        }
        let x_true = vec![0.3, 1.0, -2.0, 0.25, 4.0];
        let mut b = matvec(&a, &x_true);
        f.ftran(&mut b);
        for (got, want) in b.iter().zip(&x_true) {
            assert!((got - want).abs() < 1e-12);
        }
        let mut c = mat_t_vec(&a, &x_true);
        f.btran(&mut c);
        for (got, want) in c.iter().zip(&x_true) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn dependent_columns_are_reported() {
        let a = vec![
            vec![1.0, 2.0, 0.0],
            vec![1.0, 2.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let err = BasisFactor::new(3, &dense_to_cols(&a)).unwrap_err();
        assert_eq!(err.positions.len(), 1);
        assert_eq!(err.free_rows.len(), 1);
    }
}
