//! Sparse multi-index arrays over an exact (or numeric) coefficient ring,
//! with the contraction operations the R-matrix identities need.
//!
//! Indices are 1-based and each axis carries its own dimension, so tensors
//! over fundamental indices (dimension M) and adjoint indices (dimension
//! M^2) mix freely. Entries are stored in a `BTreeMap`, which makes every
//! iteration order — and therefore every JSON export — deterministic.

use crate::scalar::{ParamAssignment, Scalar, ScalarError, C64};
use smallvec::SmallVec;
use std::collections::{BTreeMap, HashMap};

pub type Idx = SmallVec<[u16; 8]>;

/// Coefficient ring interface for tensor entries.
pub trait Coeff: Clone {
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
}

impl Coeff for Scalar {
    fn add(&self, o: &Self) -> Self {
        Scalar::add(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Scalar::mul(self, o)
    }
    fn neg(&self) -> Self {
        Scalar::neg(self)
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
}

impl Coeff for C64 {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

#[derive(Debug, Clone)]
pub struct SparseTensor<T: Coeff = Scalar> {
    dims: SmallVec<[u16; 8]>,
    entries: BTreeMap<Idx, T>,
}

impl<T: Coeff> SparseTensor<T> {
    pub fn new(dims: &[u16]) -> Self {
        SparseTensor {
            dims: dims.iter().copied().collect(),
            entries: BTreeMap::new(),
        }
    }

    /// Square tensor: `rank` axes of dimension `dim`.
    pub fn square(rank: usize, dim: u16) -> Self {
        Self::new(&vec![dim; rank])
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[u16] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    fn check_idx(&self, idx: &[u16]) {
        debug_assert_eq!(idx.len(), self.dims.len(), "index rank mismatch");
        debug_assert!(
            idx.iter()
                .zip(self.dims.iter())
                .all(|(&i, &d)| i >= 1 && i <= d),
            "index out of range: {:?} for dims {:?}",
            idx,
            self.dims
        );
    }

    /// Accumulate into an entry; entries that become zero are removed.
    pub fn add_to(&mut self, idx: &[u16], v: T) {
        self.check_idx(idx);
        if v.is_zero() {
            return;
        }
        let key: Idx = idx.iter().copied().collect();
        match self.entries.remove(&key) {
            None => {
                self.entries.insert(key, v);
            }
            Some(old) => {
                let s = old.add(&v);
                if !s.is_zero() {
                    self.entries.insert(key, s);
                }
            }
        }
    }

    /// Overwrite an entry (or remove it when zero).
    pub fn set(&mut self, idx: &[u16], v: T) {
        self.check_idx(idx);
        let key: Idx = idx.iter().copied().collect();
        if v.is_zero() {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, v);
        }
    }

    pub fn get(&self, idx: &[u16]) -> Option<&T> {
        let key: Idx = idx.iter().copied().collect();
        self.entries.get(&key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Idx, &T)> {
        self.entries.iter()
    }

    pub fn map_values<U: Coeff, F: FnMut(&T) -> U>(&self, mut f: F) -> SparseTensor<U> {
        let mut out = SparseTensor::new(&self.dims);
        for (k, v) in &self.entries {
            let w = f(v);
            if !w.is_zero() {
                out.entries.insert(k.clone(), w);
            }
        }
        out
    }

    pub fn scale(&self, c: &T) -> SparseTensor<T> {
        self.map_values(|v| v.mul(c))
    }

    pub fn neg(&self) -> SparseTensor<T> {
        self.map_values(|v| v.neg())
    }

    pub fn add(&self, o: &SparseTensor<T>) -> SparseTensor<T> {
        assert_eq!(self.dims, o.dims, "tensor shape mismatch");
        let mut out = self.clone();
        for (k, v) in &o.entries {
            out.add_to(k, v.clone());
        }
        out
    }

    pub fn sub(&self, o: &SparseTensor<T>) -> SparseTensor<T> {
        self.add(&o.neg())
    }

    /// Reorder axes: output axis `k` is input axis `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> SparseTensor<T> {
        assert_eq!(perm.len(), self.rank());
        let dims: Vec<u16> = perm.iter().map(|&p| self.dims[p]).collect();
        let mut out = SparseTensor::new(&dims);
        for (k, v) in &self.entries {
            let idx: Idx = perm.iter().map(|&p| k[p]).collect();
            out.entries.insert(idx, v.clone());
        }
        out
    }

    /// Contract `pairs = [(axis_of_self, axis_of_other), ...]`. Output axes
    /// are the remaining axes of `self` followed by those of `other`.
    pub fn contract(&self, other: &SparseTensor<T>, pairs: &[(usize, usize)]) -> SparseTensor<T> {
        for &(a, b) in pairs {
            assert_eq!(self.dims[a], other.dims[b], "contracted axis mismatch");
        }
        let keep_a: Vec<usize> = (0..self.rank())
            .filter(|i| !pairs.iter().any(|&(a, _)| a == *i))
            .collect();
        let keep_b: Vec<usize> = (0..other.rank())
            .filter(|i| !pairs.iter().any(|&(_, b)| b == *i))
            .collect();
        let dims: Vec<u16> = keep_a
            .iter()
            .map(|&i| self.dims[i])
            .chain(keep_b.iter().map(|&i| other.dims[i]))
            .collect();

        // Bucket `other` by its contracted-index projection.
        let mut buckets: HashMap<Idx, Vec<(Idx, &T)>> = HashMap::new();
        for (k, v) in &other.entries {
            let proj: Idx = pairs.iter().map(|&(_, b)| k[b]).collect();
            let rest: Idx = keep_b.iter().map(|&i| k[i]).collect();
            buckets.entry(proj).or_default().push((rest, v));
        }

        let mut out = SparseTensor::new(&dims);
        let mut idx = Idx::new();
        for (k, v) in &self.entries {
            let proj: Idx = pairs.iter().map(|&(a, _)| k[a]).collect();
            if let Some(matches) = buckets.get(&proj) {
                for (rest, w) in matches {
                    idx.clear();
                    idx.extend(keep_a.iter().map(|&i| k[i]));
                    idx.extend(rest.iter().copied());
                    let prod = v.mul(w);
                    if !prod.is_zero() {
                        let key = idx.clone();
                        match out.entries.remove(&key) {
                            None => {
                                out.entries.insert(key, prod);
                            }
                            Some(old) => {
                                let s = old.add(&prod);
                                if !s.is_zero() {
                                    out.entries.insert(key, s);
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Trace internal axis pairs of a single tensor (sum over equal values).
    pub fn self_trace(&self, pairs: &[(usize, usize)]) -> SparseTensor<T> {
        let traced: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        let keep: Vec<usize> = (0..self.rank()).filter(|i| !traced.contains(i)).collect();
        let dims: Vec<u16> = keep.iter().map(|&i| self.dims[i]).collect();
        let mut out = SparseTensor::new(&dims);
        for (k, v) in &self.entries {
            if pairs.iter().all(|&(a, b)| k[a] == k[b]) {
                let idx: Idx = keep.iter().map(|&i| k[i]).collect();
                out.add_to(&idx, v.clone());
            }
        }
        out
    }

    /// Multiply entries by a diagonal weight depending on one axis value.
    pub fn weight_axis<F: Fn(u16) -> T>(&self, axis: usize, w: F) -> SparseTensor<T> {
        let mut out = SparseTensor::new(&self.dims);
        for (k, v) in &self.entries {
            let prod = v.mul(&w(k[axis]));
            if !prod.is_zero() {
                out.entries.insert(k.clone(), prod);
            }
        }
        out
    }

    /// Merge consecutive axis pairs `(2k, 2k+1)` of dimension `d` into single
    /// axes of dimension `d^2`, flat value `(i-1)*d + j`.
    pub fn flatten_pairs(&self) -> SparseTensor<T> {
        assert!(self.rank() % 2 == 0);
        let mut dims = Vec::new();
        for k in 0..self.rank() / 2 {
            let d = self.dims[2 * k];
            assert_eq!(d, self.dims[2 * k + 1]);
            dims.push(d * d);
        }
        let mut out = SparseTensor::new(&dims);
        for (k, v) in &self.entries {
            let idx: Idx = (0..self.rank() / 2)
                .map(|a| {
                    let d = self.dims[2 * a];
                    (k[2 * a] - 1) * d + k[2 * a + 1]
                })
                .collect();
            out.entries.insert(idx, v.clone());
        }
        out
    }

    /// Rows of a square "matrix" tensor whose first `front` axes index rows
    /// and remaining axes index columns: returns the row entries of `row`.
    pub fn row(&self, front: usize, row: &[u16]) -> Vec<(Idx, T)> {
        assert_eq!(front, row.len());
        let mut lo: Idx = row.iter().copied().collect();
        let mut hi = lo.clone();
        for d in &self.dims[front..] {
            lo.push(1);
            hi.push(*d);
        }
        self.entries
            .range(lo..=hi)
            .filter(|(k, _)| k[..front] == *row)
            .map(|(k, v)| (k[front..].iter().copied().collect(), v.clone()))
            .collect()
    }
}

impl SparseTensor<Scalar> {
    /// Identity on `copies` paired axes of dimension `dim`:
    /// `delta^{i1}_{j1} ... delta^{ik}_{jk}` laid out as
    /// `[i1..ik, j1..jk]`.
    pub fn identity(vars: &crate::scalar::Vars, dim: u16, copies: usize) -> Self {
        let dims = vec![dim; 2 * copies];
        let mut out = SparseTensor::new(&dims);
        let one = Scalar::one(vars);
        let mut idx: Vec<u16> = vec![1; copies];
        loop {
            let key: Idx = idx.iter().copied().chain(idx.iter().copied()).collect();
            out.entries.insert(key, one.clone());
            let mut k = 0;
            loop {
                if k == copies {
                    return out;
                }
                if idx[k] < dim {
                    idx[k] += 1;
                    break;
                }
                idx[k] = 1;
                k += 1;
            }
        }
    }

    /// Matrix product for square tensors split as `front` row axes and
    /// `front` column axes.
    pub fn matmul(&self, other: &SparseTensor<Scalar>, front: usize) -> SparseTensor<Scalar> {
        let pairs: Vec<(usize, usize)> = (0..front).map(|k| (front + k, k)).collect();
        self.contract(other, &pairs)
    }

    /// Evaluate every entry numerically.
    pub fn evaluate(&self, v: &ParamAssignment) -> Result<SparseTensor<C64>, ScalarError> {
        let mut out = SparseTensor::new(&self.dims);
        for (k, s) in &self.entries {
            let x = s.evaluate(v)?;
            if !Coeff::is_zero(&x) {
                out.entries.insert(k.clone(), x);
            }
        }
        Ok(out)
    }

    /// Deterministic JSON export: `{"rank", "dim"| "dims", "entries": [...]}`
    /// with entries sorted lexicographically by index.
    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|(k, v)| {
                serde_json::json!({
                    "idx": k.iter().map(|&i| i as u64).collect::<Vec<_>>(),
                    "val": v.to_json(),
                })
            })
            .collect();
        let uniform = self.dims.windows(2).all(|w| w[0] == w[1]);
        if uniform && !self.dims.is_empty() {
            serde_json::json!({
                "rank": self.rank(),
                "dim": self.dims[0],
                "entries": entries,
            })
        } else {
            serde_json::json!({
                "rank": self.rank(),
                "dims": self.dims.iter().map(|&d| d as u64).collect::<Vec<_>>(),
                "entries": entries,
            })
        }
    }
}

impl SparseTensor<C64> {
    pub fn max_norm(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Scalar, VarSet, Vars};

    fn vars() -> Vars {
        VarSet::new(vec!["s"])
    }

    fn sc(vars: &Vars, k: i64) -> Scalar {
        Scalar::from_int(vars, k)
    }

    #[test]
    fn contract_matches_dense_matrix_product() {
        let v = vars();
        // A = [[1,2],[3,4]], B = [[5,6],[7,8]]
        let mut a = SparseTensor::square(2, 2);
        let mut b = SparseTensor::square(2, 2);
        let data_a = [[1, 2], [3, 4]];
        let data_b = [[5, 6], [7, 8]];
        for i in 0..2 {
            for j in 0..2 {
                a.set(&[i as u16 + 1, j as u16 + 1], sc(&v, data_a[i][j]));
                b.set(&[i as u16 + 1, j as u16 + 1], sc(&v, data_b[i][j]));
            }
        }
        let c = a.contract(&b, &[(1, 0)]);
        let expect = [[19, 22], [43, 50]];
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(
                    c.get(&[i as u16 + 1, j as u16 + 1]).unwrap(),
                    &sc(&v, expect[i][j])
                );
            }
        }
    }

    #[test]
    fn identity_and_matmul() {
        let v = vars();
        let id = SparseTensor::identity(&v, 3, 2);
        assert_eq!(id.len(), 9);
        let prod = id.matmul(&id, 2);
        assert_eq!(prod.sub(&id).len(), 0);
    }

    #[test]
    fn flatten_pairs_indexing() {
        let v = vars();
        let mut t = SparseTensor::square(4, 3);
        t.set(&[2, 3, 1, 1], sc(&v, 7));
        let f = t.flatten_pairs();
        // (2,3) -> (2-1)*3+3 = 6; (1,1) -> 1
        assert_eq!(f.get(&[6, 1]).unwrap(), &sc(&v, 7));
    }

    #[test]
    fn row_extraction() {
        let v = vars();
        let mut t = SparseTensor::square(2, 3);
        t.set(&[2, 1], sc(&v, 5));
        t.set(&[2, 3], sc(&v, 6));
        t.set(&[1, 2], sc(&v, 9));
        let r = t.row(1, &[2]);
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].0.as_slice(), &[1]);
        assert_eq!(r[1].0.as_slice(), &[3]);
    }
}
