use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `N` points in `d` dimensions, stored row-major.
///
/// Ground-truth labels and centroids are optional and never consulted by the
/// clustering routines; they exist for generators, degradations and purity
/// reporting. A label of `None` marks an injected outlier.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    dim: usize,
    coords: Vec<T>,
    true_labels: Option<Vec<Option<usize>>>,
    true_centroids: Option<Vec<Vec<T>>>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(dim: usize, coords: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("dimension must be >= 1".into()));
        }
        if coords.is_empty() {
            return Err(Error::Shape("dataset must contain at least one point".into()));
        }
        if coords.len() % dim != 0 {
            return Err(Error::Shape(format!(
                "{} coordinates do not split into rows of dimension {dim}",
                coords.len()
            )));
        }
        if let Some(pos) = coords.iter().position(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite coordinate in row {}", pos / dim)));
        }
        Ok(Self {
            dim,
            coords,
            true_labels: None,
            true_centroids: None,
        })
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::Shape("dataset must contain at least one point".into()));
        };
        let dim = first.as_ref().len();
        let mut coords = Vec::with_capacity(dim * rows.len());
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::Shape(format!(
                    "row {i} has {} fields, expected {dim}",
                    row.len()
                )));
            }
            coords.extend_from_slice(row);
        }
        Self::new(dim, coords)
    }

    /// Attaches ground-truth labels. Labels of non-outliers must cover a
    /// contiguous range `0..K`.
    pub fn with_labels(mut self, labels: Vec<Option<usize>>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::Shape(format!(
                "{} labels for {} points",
                labels.len(),
                self.len()
            )));
        }
        if let Some(max) = labels.iter().flatten().max() {
            let mut seen = vec![false; max + 1];
            for &l in labels.iter().flatten() {
                seen[l] = true;
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::Shape("labels do not cover a contiguous range 0..K".into()));
            }
        }
        self.true_labels = Some(labels);
        Ok(self)
    }

    pub fn with_centroids(mut self, centroids: Vec<Vec<T>>) -> Result<Self> {
        if centroids.iter().any(|c| c.len() != self.dim) {
            return Err(Error::Shape("centroid dimension does not match data".into()));
        }
        self.true_centroids = Some(centroids);
        Ok(self)
    }

    pub fn without_truth(mut self) -> Self {
        self.true_labels = None;
        self.true_centroids = None;
        self
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn true_labels(&self) -> Option<&[Option<usize>]> {
        self.true_labels.as_deref()
    }

    pub fn true_centroids(&self) -> Option<&[Vec<T>]> {
        self.true_centroids.as_deref()
    }

    /// Number of distinct non-outlier ground-truth labels.
    pub fn true_cluster_count(&self) -> Option<usize> {
        self.true_labels
            .as_ref()
            .map(|l| l.iter().flatten().max().map_or(0, |m| m + 1))
    }

    pub fn mean(&self) -> Vec<T> {
        let mut acc = vec![T::zero(); self.dim];
        for p in self.points() {
            for (a, &x) in acc.iter_mut().zip(p) {
                *a = *a + x;
            }
        }
        let n = T::from_count(self.len());
        acc.iter_mut().for_each(|a| *a = *a / n);
        acc
    }

    /// Per-axis `(min, max)`.
    pub fn bounding_box(&self) -> Vec<(T, T)> {
        let mut bounds: Vec<(T, T)> = self.point(0).iter().map(|&x| (x, x)).collect();
        for p in self.points() {
            for (b, &x) in bounds.iter_mut().zip(p) {
                b.0 = b.0.min(x);
                b.1 = b.1.max(x);
            }
        }
        bounds
    }

    /// Rows at `indices`, in that order, carrying their labels along.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        let mut out = Self::new(self.dim, coords)?;
        out.true_labels = self
            .true_labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i]).collect());
        out.true_centroids = self.true_centroids.clone();
        Ok(out)
    }

    /// Appends points with the given labels. Labels are kept only if the
    /// dataset already carries them.
    pub(crate) fn extend(&mut self, coords: &[T], label: Option<usize>) {
        debug_assert_eq!(coords.len() % self.dim, 0);
        let added = coords.len() / self.dim;
        self.coords.extend_from_slice(coords);
        if let Some(labels) = &mut self.true_labels {
            labels.extend(std::iter::repeat_n(label, added));
        }
    }

    pub(crate) fn coords_mut(&mut self) -> &mut [T] {
        &mut self.coords
    }

    /// Per-dimension z-scoring. Dimensions with zero spread are centered only.
    pub fn standardized(&self) -> Self {
        let mean = self.mean();
        let n = T::from_count(self.len());
        let mut var = vec![T::zero(); self.dim];
        for p in self.points() {
            for ((v, &x), &m) in var.iter_mut().zip(p).zip(&mean) {
                *v = *v + (x - m) * (x - m);
            }
        }
        let sd: Vec<T> = var.iter().map(|&v| (v / n).sqrt()).collect();
        let mut out = self.clone();
        for row in out.coords.chunks_exact_mut(self.dim) {
            for ((x, &m), &s) in row.iter_mut().zip(&mean).zip(&sd) {
                *x = if s > T::zero() { (*x - m) / s } else { *x - m };
            }
        }
        out.true_centroids = None;
        out
    }
}

/// Parses the dataset CSV format: one point per line, comma-separated
/// decimal fields, optional single header line, blank lines ignored.
pub fn parse_csv<T: Scalar + FromStr>(text: &str, header: bool) -> Result<Dataset<T>> {
    let mut dim = None;
    let mut coords = Vec::new();
    for (lineno, line) in text.lines().enumerate().skip(usize::from(header)) {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut count = 0;
        for field in line.split(',') {
            let field = field.trim();
            let value = field.parse::<T>().map_err(|_| {
                Error::Parse(format!("line {}: invalid number `{field}`", lineno + 1))
            })?;
            coords.push(value);
            count += 1;
        }
        match dim {
            None => dim = Some(count),
            Some(d) if d != count => {
                return Err(Error::Parse(format!(
                    "line {}: expected {d} fields, found {count}",
                    lineno + 1
                )))
            }
            _ => {}
        }
    }
    let dim = dim.ok_or_else(|| Error::Parse("no data rows".into()))?;
    Dataset::new(dim, coords).map_err(|e| Error::Parse(e.to_string()))
}

/// Writes the dataset CSV format (no header, LF line endings). Values use
/// the shortest representation that round-trips.
pub fn to_csv<T: Scalar>(data: &Dataset<T>) -> String {
    let mut out = String::with_capacity(data.coords.len() * 12);
    for p in data.points() {
        for (j, x) in p.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{x}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        assert!(Dataset::<f64>::new(2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(Dataset::<f64>::new(2, vec![]).is_err());
        assert!(Dataset::<f64>::new(1, vec![f64::NAN]).is_err());
        assert!(Dataset::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        let d = Dataset::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.point(1), &[3.0, 4.0]);
        assert_eq!(d.mean(), vec![2.0, 3.0]);
    }

    #[test]
    fn labels_must_be_contiguous() {
        let d = Dataset::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        assert!(d.clone().with_labels(vec![Some(0), Some(2), None]).is_err());
        let d = d.with_labels(vec![Some(1), Some(0), None]).unwrap();
        assert_eq!(d.true_cluster_count(), Some(2));
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let d = Dataset::from_rows(&[[0.1, -2.5], [1e-7, 3.0]]).unwrap();
        let text = to_csv(&d);
        assert_eq!(text, "0.1,-2.5\n0.0000001,3\n");
        assert_eq!(parse_csv::<f64>(&text, false).unwrap(), d);
        let with_header = format!("x,y\n{text}");
        assert_eq!(parse_csv::<f64>(&with_header, true).unwrap(), d);
        assert!(parse_csv::<f64>("1,2\n3\n", false).is_err());
        assert!(parse_csv::<f64>("1,a\n", false).is_err());
        assert!(parse_csv::<f64>("\n\n", false).is_err());
    }

    #[test]
    fn standardize() {
        let d = Dataset::<f64>::from_rows(&[[0.0, 5.0], [2.0, 5.0], [4.0, 5.0]]).unwrap();
        let s = d.standardized();
        assert!((s.point(0)[0] + 1.224744871391589).abs() < 1e-12);
        assert_eq!(s.point(2)[1], 0.0);
    }
}
