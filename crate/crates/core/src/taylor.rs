//! Truncated multivariate polynomial arithmetic in the displacement
//! variables `d = x - x*`, plus [`LocalModel`], which packages one segment's
//! polynomial approximation of a vector field.
//!
//! All values are immutable once built and every operation is a pure
//! function, so they can be shared freely across worker threads.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Exponent vector of one monomial.
///
/// Ordered graded-lexicographically: lower total degree first, ties broken by
/// ascending lexicographic comparison of the exponent vector. This ordering
/// is what makes serialized coefficient lists unambiguous.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(SmallVec<[u8; 8]>);

impl MultiIndex {
    pub fn new(exponents: &[u8]) -> Self {
        MultiIndex(SmallVec::from_slice(exponents))
    }

    /// The all-zero index (the constant monomial) in `dim` variables.
    pub fn zero(dim: usize) -> Self {
        MultiIndex(SmallVec::from_elem(0, dim))
    }

    /// The index of the bare variable `d_i`.
    pub fn unit(dim: usize, var: usize) -> Self {
        debug_assert!(var < dim);
        let mut e = SmallVec::from_elem(0, dim);
        e[var] = 1;
        MultiIndex(e)
    }

    /// Greatest index of the given total degree under graded-lex order,
    /// i.e. all of the degree in the first variable.
    fn degree_cap(dim: usize, degree: usize) -> Self {
        let mut e = SmallVec::from_elem(0u8, dim);
        e[0] = degree as u8;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree (sum of exponents).
    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn exponents(&self) -> &[u8] {
        &self.0
    }

    fn sum(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        MultiIndex(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All multi-indices in `dim` variables with total degree at most `degree`,
/// in graded-lex order.
pub fn graded_indices(dim: usize, degree: usize) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(binomial(dim + degree, degree));
    let mut current = vec![0u8; dim];
    for total in 0..=degree {
        push_compositions(&mut out, &mut current, 0, total);
    }
    out
}

fn push_compositions(out: &mut Vec<MultiIndex>, current: &mut [u8], pos: usize, rest: usize) {
    if pos + 1 == current.len() {
        current[pos] = rest as u8;
        out.push(MultiIndex::new(current));
        return;
    }
    for head in 0..=rest {
        current[pos] = head as u8;
        push_compositions(out, current, pos + 1, rest - head);
    }
}

/// Binomial coefficient, exact for the sizes that occur here.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// A multivariate polynomial in the displacement `d = x - x*`, truncated at a
/// fixed total degree. Coefficients are stored sparsely; absent indices mean
/// zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedPoly {
    dim: usize,
    degree: usize,
    coeffs: BTreeMap<MultiIndex, f64>,
}

impl TruncatedPoly {
    pub fn zero(dim: usize, degree: usize) -> Self {
        TruncatedPoly {
            dim,
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, degree: usize, value: f64) -> Self {
        let mut p = Self::zero(dim, degree);
        if value != 0.0 {
            p.coeffs.insert(MultiIndex::zero(dim), value);
        }
        p
    }

    /// The polynomial `c + d_var`, the jet of the variable `x_var` about a
    /// center whose `var`-th entry is `c`.
    pub fn variable(dim: usize, degree: usize, var: usize, center_value: f64) -> Self {
        let mut p = Self::constant(dim, degree, center_value);
        if degree >= 1 {
            p.coeffs.insert(MultiIndex::unit(dim, var), 1.0);
        }
        p
    }

    /// Build from an explicit coefficient list.
    pub fn from_coefficients(
        dim: usize,
        degree: usize,
        entries: impl IntoIterator<Item = (MultiIndex, f64)>,
    ) -> Result<Self> {
        let mut p = Self::zero(dim, degree);
        for (idx, c) in entries {
            if idx.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: idx.dim(),
                });
            }
            if idx.degree() > degree {
                return Err(Error::DegreeMismatch {
                    expected: degree,
                    got: idx.degree(),
                });
            }
            if c != 0.0 {
                p.coeffs.insert(idx, c);
            }
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficient(&self, index: &MultiIndex) -> f64 {
        self.coeffs.get(index).copied().unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coefficient(&MultiIndex::zero(self.dim))
    }

    /// Stored (nonzero) coefficients in graded-lex order.
    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.coeffs.iter().map(|(i, &c)| (i, c))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                got: other.degree,
            });
        }
        Ok(())
    }

    /// Coefficient-wise sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (idx, c) in &other.coeffs {
            let entry = out.coeffs.entry(idx.clone()).or_insert(0.0);
            *entry += c;
            if *entry == 0.0 {
                out.coeffs.remove(idx);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = Self::zero(self.dim, self.degree);
        if factor != 0.0 {
            out.coeffs = self
                .coeffs
                .iter()
                .map(|(i, c)| (i.clone(), c * factor))
                .collect();
        }
        out
    }

    pub fn add_scalar(&self, value: f64) -> Self {
        let mut out = self.clone();
        let entry = out.coeffs.entry(MultiIndex::zero(self.dim)).or_insert(0.0);
        *entry += value;
        if *entry == 0.0 {
            out.coeffs.remove(&MultiIndex::zero(self.dim));
        }
        out
    }

    /// Product with every monomial above the truncation degree discarded.
    ///
    /// Pairs whose combined degree exceeds the bound are pruned before they
    /// are formed, which is what keeps high-dimensional jets affordable.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = Self::zero(self.dim, self.degree);
        for (ia, ca) in &self.coeffs {
            let budget = self.degree - ia.degree();
            let cap = MultiIndex::degree_cap(self.dim, budget);
            for (ib, cb) in other.coeffs.range(..=cap) {
                let idx = ia.sum(ib);
                *out.coeffs.entry(idx).or_insert(0.0) += ca * cb;
            }
        }
        out.coeffs.retain(|_, c| *c != 0.0);
        Ok(out)
    }

    /// Restriction to total degree `degree` (a prefix of the jet).
    pub fn truncate(&self, degree: usize) -> Self {
        let degree = degree.min(self.degree);
        TruncatedPoly {
            dim: self.dim,
            degree,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(i, _)| i.degree() <= degree)
                .map(|(i, &c)| (i.clone(), c))
                .collect(),
        }
    }

    /// Copy with the constant term removed.
    pub fn without_constant(&self) -> Self {
        let mut out = self.clone();
        out.coeffs.remove(&MultiIndex::zero(self.dim));
        out
    }

    /// Evaluate at a displacement vector. `displacement` must have length
    /// `dim`.
    pub fn eval(&self, displacement: &[f64]) -> f64 {
        assert_eq!(displacement.len(), self.dim, "displacement length != dim");
        let mut acc = 0.0;
        for (idx, c) in &self.coeffs {
            let mut term = *c;
            for (e, &d) in idx.exponents().iter().zip(displacement) {
                if *e > 0 {
                    term *= d.powi(*e as i32);
                }
            }
            acc += term;
        }
        acc
    }

    /// Dense coefficient list in graded-lex order (length `C(dim+degree, degree)`).
    pub fn dense_coefficients(&self) -> Vec<f64> {
        graded_indices(self.dim, self.degree)
            .iter()
            .map(|i| self.coefficient(i))
            .collect()
    }

    /// Inverse of [`dense_coefficients`](Self::dense_coefficients).
    pub fn from_dense(dim: usize, degree: usize, coefficients: &[f64]) -> Result<Self> {
        let indices = graded_indices(dim, degree);
        if coefficients.len() != indices.len() {
            return Err(Error::Config(format!(
                "expected {} coefficients for dim {} degree {}, got {}",
                indices.len(),
                dim,
                degree,
                coefficients.len()
            )));
        }
        Self::from_coefficients(
            dim,
            degree,
            indices.into_iter().zip(coefficients.iter().copied()),
        )
    }
}

/// Horner evaluation of a univariate power series in the polynomial algebra:
/// `sum_j series[j] * p^j`, truncated at `p`'s degree.
///
/// `series` must hold exactly `degree + 1` coefficients and `p` must have a
/// zero constant term (the series is taken about the split-off constant).
pub fn compose_univariate(series: &[f64], p: &TruncatedPoly) -> Result<TruncatedPoly> {
    let degree = p.degree();
    if series.len() != degree + 1 {
        return Err(Error::SeriesLength {
            degree,
            got: series.len(),
        });
    }
    debug_assert_eq!(p.constant_term(), 0.0, "argument must have no constant term");
    let mut acc = TruncatedPoly::constant(p.dim(), degree, series[degree]);
    for j in (0..degree).rev() {
        acc = acc.mul(p)?.add_scalar(series[j]);
    }
    Ok(acc)
}

/// One segment's approximation of a vector field: `dim` truncated
/// polynomials in the displacement from a shared expansion center.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalModel {
    center: Vec<f64>,
    components: Vec<TruncatedPoly>,
}

impl LocalModel {
    pub fn new(center: Vec<f64>, components: Vec<TruncatedPoly>) -> Result<Self> {
        let dim = center.len();
        if components.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: components.len(),
            });
        }
        let degree = components[0].degree();
        for c in &components {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.dim(),
                });
            }
            if c.degree() != degree {
                return Err(Error::DegreeMismatch {
                    expected: degree,
                    got: c.degree(),
                });
            }
        }
        Ok(LocalModel { center, components })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn degree(&self) -> usize {
        self.components[0].degree()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn components(&self) -> &[TruncatedPoly] {
        &self.components
    }

    /// Evaluate every component at `x` (displacement taken from the center).
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let delta: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        Ok(self.components.iter().map(|c| c.eval(&delta)).collect())
    }

    /// Restriction of every component to a lower degree.
    pub fn truncate(&self, degree: usize) -> Self {
        LocalModel {
            center: self.center.clone(),
            components: self.components.iter().map(|c| c.truncate(degree)).collect(),
        }
    }

    /// Payload size in the cost accounting: the truncation degree `k`, not
    /// the monomial count. The literal coefficient payload is
    /// [`coefficient_count`](Self::coefficient_count).
    pub fn weight_count(&self) -> usize {
        self.degree()
    }

    /// Number of stored coefficients in a dense encoding:
    /// `dim * C(dim + degree, degree)`.
    pub fn coefficient_count(&self) -> usize {
        let n = self.dim();
        n * binomial(n + self.degree(), self.degree())
    }
}
