use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

/// Dense storage up to this dimension, compressed rows above.
pub const DENSE_LIMIT: usize = 512;

#[derive(Clone, Debug)]
enum Storage {
    /// Row-major.
    Dense(Vec<Complex64>),
    Sparse { row_ptr: Vec<usize>, cols: Vec<usize>, vals: Vec<Complex64> },
}

/// Square complex matrix assembled to be Hermitian, with its measured defect.
#[derive(Clone, Debug)]
pub struct HermitianMatrix {
    n: usize,
    storage: Storage,
    defect: f64,
    max_entry: f64,
}

impl HermitianMatrix {
    /// Sums duplicate triplets. Storage is dense for n ≤ [`DENSE_LIMIT`].
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, Complex64)]) -> Self {
        Self::from_triplets_with(n, triplets, n > DENSE_LIMIT)
    }

    pub fn from_triplets_with(n: usize, triplets: &[(usize, usize, Complex64)], sparse: bool) -> Self {
        let storage = if sparse {
            let mut sorted: Vec<(usize, usize, Complex64)> = triplets.to_vec();
            sorted.sort_by_key(|a| (a.0, a.1));
            let mut row_ptr = vec![0usize; n + 1];
            let mut cols = Vec::with_capacity(sorted.len());
            let mut vals: Vec<Complex64> = Vec::with_capacity(sorted.len());
            let mut last: Option<(usize, usize)> = None;
            for (i, j, v) in sorted {
                if last == Some((i, j)) {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(j);
                    vals.push(v);
                    row_ptr[i + 1] += 1;
                    last = Some((i, j));
                }
            }
            for i in 0..n {
                row_ptr[i + 1] += row_ptr[i];
            }
            Storage::Sparse { row_ptr, cols, vals }
        } else {
            let mut data = vec![Complex64::new(0.0, 0.0); n * n];
            for &(i, j, v) in triplets {
                data[i * n + j] += v;
            }
            Storage::Dense(data)
        };
        let mut m = HermitianMatrix { n, storage, defect: 0.0, max_entry: 0.0 };
        m.certify();
        m
    }

    pub fn from_dense(n: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), n * n);
        let mut m = HermitianMatrix { n, storage: Storage::Dense(data), defect: 0.0, max_entry: 0.0 };
        m.certify();
        m
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let data = rows.iter().flat_map(|r| r.iter().map(|&x| Complex64::new(x, 0.0))).collect();
        Self::from_dense(n, data)
    }

    fn certify(&mut self) {
        let mut defect: f64 = 0.0;
        let mut max_entry: f64 = 0.0;
        for (i, j, v) in self.entries() {
            max_entry = max_entry.max(v.norm());
            if i <= j {
                defect = defect.max((v - self.get(j, i).conj()).norm());
            }
        }
        self.defect = defect;
        self.max_entry = max_entry;
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse { .. })
    }

    /// max |A − A*| entry.
    pub fn hermiticity_defect(&self) -> f64 {
        self.defect
    }

    pub fn max_entry(&self) -> f64 {
        self.max_entry
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.defect <= rel_tol * self.max_entry.max(1e-300)
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match &self.storage {
            Storage::Dense(d) => d[i * self.n + j],
            Storage::Sparse { row_ptr, cols, vals } => {
                let r = &cols[row_ptr[i]..row_ptr[i + 1]];
                match r.binary_search(&j) {
                    Ok(k) => vals[row_ptr[i] + k],
                    Err(_) => Complex64::new(0.0, 0.0),
                }
            }
        }
    }

    /// Nonzero (or stored) entries in row-major order.
    pub fn entries(&self) -> Vec<(usize, usize, Complex64)> {
        match &self.storage {
            Storage::Dense(d) => {
                let mut out = Vec::new();
                for i in 0..self.n {
                    for j in 0..self.n {
                        let v = d[i * self.n + j];
                        if v != Complex64::new(0.0, 0.0) {
                            out.push((i, j, v));
                        }
                    }
                }
                out
            }
            Storage::Sparse { row_ptr, cols, vals } => {
                let mut out = Vec::with_capacity(vals.len());
                for i in 0..self.n {
                    for k in row_ptr[i]..row_ptr[i + 1] {
                        out.push((i, cols[k], vals[k]));
                    }
                }
                out
            }
        }
    }

    /// Per-row adjacency lists (column, value), nonzeros only.
    pub fn rows(&self) -> Vec<Vec<(usize, Complex64)>> {
        let mut rows = vec![Vec::new(); self.n];
        for (i, j, v) in self.entries() {
            rows[i].push((j, v));
        }
        rows
    }

    pub fn to_dense(&self) -> Vec<Complex64> {
        match &self.storage {
            Storage::Dense(d) => d.clone(),
            Storage::Sparse { .. } => {
                let mut d = vec![Complex64::new(0.0, 0.0); self.n * self.n];
                for (i, j, v) in self.entries() {
                    d[i * self.n + j] = v;
                }
                d
            }
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i).re).collect()
    }

    pub fn is_real(&self) -> bool {
        self.entries().iter().all(|(_, _, v)| v.im == 0.0)
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        for (i, j, v) in self.entries() {
            y[i] += v * x[j];
        }
        y
    }

    /// Largest absolute row sum, an upper bound for the operator norm.
    pub fn row_sum_norm(&self) -> f64 {
        let mut s = vec![0.0; self.n];
        for (i, _, v) in self.entries() {
            s[i] += v.norm();
        }
        s.into_iter().fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries().iter().map(|(_, _, v)| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// Diagonal traces of A^1..A^k, computed from local walks, one vertex at a time.
    pub fn power_traces(&self, kmax: usize) -> Vec<f64> {
        let rows = self.rows();
        let mut traces = vec![0.0; kmax + 1];
        traces[0] = self.n as f64;
        let zero = Complex64::new(0.0, 0.0);
        let mut cur = vec![zero; self.n];
        let mut next = vec![zero; self.n];
        let mut mark = vec![false; self.n];
        for v in 0..self.n {
            let mut support = vec![v];
            cur[v] = Complex64::new(1.0, 0.0);
            for t in traces.iter_mut().skip(1) {
                let mut new_support = Vec::with_capacity(support.len() * 5);
                // (A f)(i) = Σ_j A(i, j) f(j); A is Hermitian so push along A(j, i)* = A(i, j).
                for &j in &support {
                    let f = cur[j];
                    for &(i, a) in &rows[j] {
                        if !mark[i] {
                            mark[i] = true;
                            new_support.push(i);
                        }
                        next[i] += a.conj() * f;
                    }
                }
                *t += next[v].re;
                for &j in &support {
                    cur[j] = zero;
                }
                for &i in &new_support {
                    mark[i] = false;
                    cur[i] = next[i];
                    next[i] = zero;
                }
                support = new_support;
            }
            for &j in &support {
                cur[j] = zero;
            }
        }
        traces
    }

    /// Column-major little-endian (re, im) pairs of f64.
    pub fn write_column_major(&self, w: &mut impl Write) -> std::io::Result<()> {
        let dense = self.to_dense();
        for j in 0..self.n {
            for i in 0..self.n {
                let v = dense[i * self.n + j];
                w.write_all(&v.re.to_le_bytes())?;
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MatrixHeader {
    #[serde(rename = "N")]
    pub n: usize,
    pub bc: String,
    pub flux: String,
    #[serde(rename = "box")]
    pub box_label: String,
}

/// Writes `<stem>.bin` (column-major complex doubles) and `<stem>.json` (header).
pub fn export_matrix(m: &HermitianMatrix, header: &MatrixHeader, stem: &Path) -> std::io::Result<()> {
    let bin = stem.with_extension("bin");
    let mut f = std::io::BufWriter::new(std::fs::File::create(bin)?);
    m.write_column_major(&mut f)?;
    f.flush()?;
    let json = serde_json::to_string_pretty(header).expect("header serializes");
    std::fs::write(stem.with_extension("json"), json + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dense_and_sparse_agree() {
        let t = vec![(0, 0, c(2.0, 0.0)), (0, 1, c(0.0, -1.0)), (1, 0, c(0.0, 1.0)), (1, 1, c(1.0, 0.0)), (1, 1, c(1.0, 0.0))];
        let d = HermitianMatrix::from_triplets_with(2, &t, false);
        let s = HermitianMatrix::from_triplets_with(2, &t, true);
        assert_eq!(d.to_dense(), s.to_dense());
        assert_eq!(s.get(1, 1), c(2.0, 0.0));
        assert_eq!(d.hermiticity_defect(), 0.0);
        assert!(!d.is_real());
        assert_eq!(d.power_traces(3), s.power_traces(3));
    }

    #[test]
    fn power_traces_match_dense_products() {
        let rows = vec![vec![2.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 2.0]];
        let m = HermitianMatrix::from_real_rows(&rows);
        let tr = m.power_traces(3);
        // Eigenvalues 2−√2, 2, 2+√2.
        let ev = [2.0 - 2f64.sqrt(), 2.0, 2.0 + 2f64.sqrt()];
        for k in 0..=3 {
            let expect: f64 = ev.iter().map(|x| x.powi(k as i32)).sum();
            assert!((tr[k] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn export_layout() {
        let t = vec![(0, 1, c(1.0, 2.0)), (1, 0, c(1.0, -2.0))];
        let m = HermitianMatrix::from_triplets(2, &t);
        let mut buf = Vec::new();
        m.write_column_major(&mut buf).unwrap();
        assert_eq!(buf.len(), 4 * 16);
        // Column 0 is (0, 1−2i).
        let re = f64::from_le_bytes(buf[16..24].try_into().unwrap());
        let im = f64::from_le_bytes(buf[24..32].try_into().unwrap());
        assert_eq!((re, im), (1.0, -2.0));
    }
}
