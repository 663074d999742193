//! Dense indexed tensors of expressions over a chart.
//!
//! Indices are 1-based everywhere (component access, JSON dumps, witness
//! reports). Storage is dense: a rank-k tensor on an n-chart holds n^k
//! canonical expressions, so lookup for any valid tuple always succeeds.

use std::fmt;
use std::sync::Arc;

use crate::expr::{Expression, Verdict, ZeroParams, ZeroVerdict};
use crate::symbol::Symbol;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TensorError {
    #[error("chart needs at least one coordinate")]
    EmptyChart,
    #[error("chart coordinates must be distinct (`{0}` repeats)")]
    DuplicateCoordinate(Symbol),
    #[error("index {index} out of range 1..={dim} in slot {slot}")]
    IndexOutOfRange { slot: usize, index: usize, dim: usize },
    #[error("expected a rank-{expected} index tuple, got {got} indices")]
    RankMismatch { expected: usize, got: usize },
    #[error("slot {slot} out of range for rank {rank}")]
    SlotOutOfRange { slot: usize, rank: usize },
    #[error("slots {a} and {b} must have opposite variance and be distinct")]
    VarianceMismatch { a: usize, b: usize },
    #[error("tensors live on different charts")]
    ChartMismatch,
    #[error("tensor shapes differ (variance {left:?} vs {right:?})")]
    ShapeMismatch { left: Vec<Variance>, right: Vec<Variance> },
    #[error("component {index:?} violates the declared {kind} symmetry in slots ({a}, {b})")]
    SymmetryViolated { kind: &'static str, a: usize, b: usize, index: Vec<usize> },
}

/// An ordered chart of distinct coordinate symbols.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Chart {
    coords: Arc<Vec<Symbol>>,
}

impl Chart {
    pub fn new(coords: Vec<Symbol>) -> Result<Chart, TensorError> {
        if coords.is_empty() {
            return Err(TensorError::EmptyChart);
        }
        for (i, c) in coords.iter().enumerate() {
            if coords[..i].contains(c) {
                return Err(TensorError::DuplicateCoordinate(c.clone()));
            }
        }
        Ok(Chart { coords: Arc::new(coords) })
    }

    pub fn from_names(names: &[&str]) -> Result<Chart, TensorError> {
        Chart::new(names.iter().map(|n| Symbol::new(n)).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Symbol] {
        &self.coords
    }

    /// Coordinate symbol for a 1-based index.
    pub fn coord(&self, i: usize) -> &Symbol {
        &self.coords[i - 1]
    }
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Chart(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variance {
    Up,
    Down,
}

/// Iterates all 1-based index tuples of the given rank over an n-chart.
pub fn index_tuples(dim: usize, rank: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = Some(vec![1; rank]);
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let cur = current.as_mut().expect("checked");
        let mut k = rank;
        loop {
            if k == 0 {
                current = None;
                break;
            }
            if cur[k - 1] < dim {
                cur[k - 1] += 1;
                break;
            }
            cur[k - 1] = 1;
            k -= 1;
        }
        Some(out)
    })
}

/// A dense tensor of canonical expressions with declared index variances.
#[derive(Clone, PartialEq, Eq)]
pub struct IndexedTensor {
    chart: Chart,
    variance: Arc<Vec<Variance>>,
    components: Arc<Vec<Expression>>,
}

impl IndexedTensor {
    pub fn from_fn(
        chart: &Chart,
        variance: &[Variance],
        mut f: impl FnMut(&[usize]) -> Expression,
    ) -> IndexedTensor {
        let n = chart.dim();
        let components = index_tuples(n, variance.len()).map(|idx| f(&idx)).collect();
        IndexedTensor {
            chart: chart.clone(),
            variance: Arc::new(variance.to_vec()),
            components: Arc::new(components),
        }
    }

    pub fn zeros(chart: &Chart, variance: &[Variance]) -> IndexedTensor {
        IndexedTensor::from_fn(chart, variance, |_| Expression::zero())
    }

    /// Rank-0 tensor holding a single scalar.
    pub fn scalar(chart: &Chart, value: Expression) -> IndexedTensor {
        IndexedTensor {
            chart: chart.clone(),
            variance: Arc::new(Vec::new()),
            components: Arc::new(vec![value]),
        }
    }

    /// The Kronecker delta as an (up, down) tensor.
    pub fn delta(chart: &Chart) -> IndexedTensor {
        IndexedTensor::from_fn(chart, &[Variance::Up, Variance::Down], |idx| {
            if idx[0] == idx[1] {
                Expression::one()
            } else {
                Expression::zero()
            }
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    fn offset(&self, idx: &[usize]) -> usize {
        let n = self.chart.dim();
        let mut off = 0;
        for &i in idx {
            off = off * n + (i - 1);
        }
        off
    }

    /// Component at a validated 1-based index tuple.
    pub fn get(&self, idx: &[usize]) -> Result<&Expression, TensorError> {
        if idx.len() != self.rank() {
            return Err(TensorError::RankMismatch { expected: self.rank(), got: idx.len() });
        }
        let n = self.chart.dim();
        for (slot, &i) in idx.iter().enumerate() {
            if i < 1 || i > n {
                return Err(TensorError::IndexOutOfRange { slot: slot + 1, index: i, dim: n });
            }
        }
        Ok(&self.components[self.offset(idx)])
    }

    /// Unchecked 1-based access for internal loops over valid tuples.
    pub(crate) fn at(&self, idx: &[usize]) -> &Expression {
        &self.components[self.offset(idx)]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &Expression)> {
        index_tuples(self.chart.dim(), self.rank()).zip(self.components.iter())
    }

    pub fn map(&self, mut f: impl FnMut(&Expression) -> Expression) -> IndexedTensor {
        IndexedTensor {
            chart: self.chart.clone(),
            variance: self.variance.clone(),
            components: Arc::new(self.components.iter().map(|e| f(e)).collect()),
        }
    }

    /// Componentwise map that can fail (e.g. substitution).
    pub fn try_map<E>(
        &self,
        mut f: impl FnMut(&Expression) -> Result<Expression, E>,
    ) -> Result<IndexedTensor, E> {
        let components: Result<Vec<Expression>, E> = self.components.iter().map(|e| f(e)).collect();
        Ok(IndexedTensor {
            chart: self.chart.clone(),
            variance: self.variance.clone(),
            components: Arc::new(components?),
        })
    }

    pub fn add(&self, other: &IndexedTensor) -> Result<IndexedTensor, TensorError> {
        if self.chart != other.chart {
            return Err(TensorError::ChartMismatch);
        }
        if self.variance != other.variance {
            return Err(TensorError::ShapeMismatch {
                left: self.variance.to_vec(),
                right: other.variance.to_vec(),
            });
        }
        let components = self
            .components
            .iter()
            .zip(other.components.iter())
            .map(|(a, b)| a + b)
            .collect();
        Ok(IndexedTensor {
            chart: self.chart.clone(),
            variance: self.variance.clone(),
            components: Arc::new(components),
        })
    }

    pub fn sub(&self, other: &IndexedTensor) -> Result<IndexedTensor, TensorError> {
        self.add(&other.scale(&-Expression::one()))
    }

    pub fn scale(&self, factor: &Expression) -> IndexedTensor {
        self.map(|e| e * factor)
    }

    /// Outer product; variances concatenate.
    pub fn outer(&self, other: &IndexedTensor) -> Result<IndexedTensor, TensorError> {
        if self.chart != other.chart {
            return Err(TensorError::ChartMismatch);
        }
        let variance: Vec<Variance> = self
            .variance
            .iter()
            .chain(other.variance.iter())
            .copied()
            .collect();
        let (ra, chart) = (self.rank(), self.chart.clone());
        let t = IndexedTensor::from_fn(&chart, &variance, |idx| {
            self.at(&idx[..ra]) * other.at(&idx[ra..])
        });
        Ok(t)
    }

    /// Contracts an up/down slot pair (1-based slots); rank drops by two.
    pub fn contract(&self, slot_a: usize, slot_b: usize) -> Result<IndexedTensor, TensorError> {
        let rank = self.rank();
        for slot in [slot_a, slot_b] {
            if slot < 1 || slot > rank {
                return Err(TensorError::SlotOutOfRange { slot, rank });
            }
        }
        if slot_a == slot_b
            || self.variance[slot_a - 1] == self.variance[slot_b - 1]
        {
            return Err(TensorError::VarianceMismatch { a: slot_a, b: slot_b });
        }
        let n = self.chart.dim();
        let mut variance: Vec<Variance> = Vec::with_capacity(rank - 2);
        for (i, v) in self.variance.iter().enumerate() {
            if i + 1 != slot_a && i + 1 != slot_b {
                variance.push(*v);
            }
        }
        let t = IndexedTensor::from_fn(&self.chart.clone(), &variance, |idx| {
            let mut full = vec![0usize; rank];
            let mut src = idx.iter();
            for (i, f) in full.iter_mut().enumerate() {
                if i + 1 != slot_a && i + 1 != slot_b {
                    *f = *src.next().expect("enough indices");
                }
            }
            let mut acc = Expression::zero();
            for k in 1..=n {
                full[slot_a - 1] = k;
                full[slot_b - 1] = k;
                acc = acc + self.at(&full);
            }
            acc
        });
        Ok(t)
    }

    /// Reorders slots: `perm[i]` (1-based) is the source slot for result
    /// slot i.
    pub fn permute(&self, perm: &[usize]) -> Result<IndexedTensor, TensorError> {
        let rank = self.rank();
        if perm.len() != rank {
            return Err(TensorError::RankMismatch { expected: rank, got: perm.len() });
        }
        let mut seen = vec![false; rank];
        for &p in perm {
            if p < 1 || p > rank || seen[p - 1] {
                return Err(TensorError::SlotOutOfRange { slot: p, rank });
            }
            seen[p - 1] = true;
        }
        let variance: Vec<Variance> = perm.iter().map(|&p| self.variance[p - 1]).collect();
        let t = IndexedTensor::from_fn(&self.chart.clone(), &variance, |idx| {
            let mut src = vec![0usize; rank];
            for (i, &p) in perm.iter().enumerate() {
                src[p - 1] = idx[i];
            }
            self.at(&src).clone()
        });
        Ok(t)
    }

    /// Lowers an up slot by contraction with the metric `g` (a (0,2)
    /// tensor), placing the new down slot at 1-based position `target` —
    /// the middle-position lowering `R_(ijkl) = g_(mk) R^m_(ijl)` is
    /// `lower_index(riem, 1, 3, g)`.
    pub fn lower_index(
        &self,
        slot: usize,
        target: usize,
        g: &IndexedTensor,
    ) -> Result<IndexedTensor, TensorError> {
        self.move_index(slot, target, g, Variance::Up)
    }

    /// Raises a down slot by contraction with the inverse metric `g_inv`
    /// (a (2,0) tensor), placing the new up slot at position `target`.
    pub fn raise_index(
        &self,
        slot: usize,
        target: usize,
        g_inv: &IndexedTensor,
    ) -> Result<IndexedTensor, TensorError> {
        self.move_index(slot, target, g_inv, Variance::Down)
    }

    fn move_index(
        &self,
        slot: usize,
        target: usize,
        metric: &IndexedTensor,
        expect: Variance,
    ) -> Result<IndexedTensor, TensorError> {
        let rank = self.rank();
        if slot < 1 || slot > rank {
            return Err(TensorError::SlotOutOfRange { slot, rank });
        }
        if target < 1 || target > rank {
            return Err(TensorError::SlotOutOfRange { slot: target, rank });
        }
        if self.variance[slot - 1] != expect {
            return Err(TensorError::VarianceMismatch { a: slot, b: slot });
        }
        let metric_var = match expect {
            Variance::Up => [Variance::Down, Variance::Down],
            Variance::Down => [Variance::Up, Variance::Up],
        };
        if metric.chart != self.chart {
            return Err(TensorError::ChartMismatch);
        }
        if metric.variance() != metric_var {
            return Err(TensorError::ShapeMismatch {
                left: metric.variance().to_vec(),
                right: metric_var.to_vec(),
            });
        }
        let new_var = match expect {
            Variance::Up => Variance::Down,
            Variance::Down => Variance::Up,
        };
        let mut variance: Vec<Variance> = Vec::with_capacity(rank);
        for (i, v) in self.variance.iter().enumerate() {
            if i + 1 != slot {
                variance.push(*v);
            }
        }
        variance.insert(target - 1, new_var);
        let n = self.chart.dim();
        let t = IndexedTensor::from_fn(&self.chart.clone(), &variance, |idx| {
            let contracted = idx[target - 1];
            let mut rest: Vec<usize> = Vec::with_capacity(rank - 1);
            for (i, &v) in idx.iter().enumerate() {
                if i + 1 != target {
                    rest.push(v);
                }
            }
            let mut src = rest;
            src.insert(slot - 1, 0);
            let mut acc = Expression::zero();
            for m in 1..=n {
                src[slot - 1] = m;
                acc = acc + &(metric.at(&[m, contracted]) * self.at(&src));
            }
            acc
        });
        Ok(t)
    }

    /// Errors unless the tensor is symmetric in the (1-based) slot pair.
    pub fn check_symmetric(&self, a: usize, b: usize) -> Result<(), TensorError> {
        self.check_pair(a, b, "symmetric", false)
    }

    /// Errors unless the tensor is antisymmetric in the slot pair.
    pub fn check_antisymmetric(&self, a: usize, b: usize) -> Result<(), TensorError> {
        self.check_pair(a, b, "antisymmetric", true)
    }

    fn check_pair(
        &self,
        a: usize,
        b: usize,
        kind: &'static str,
        anti: bool,
    ) -> Result<(), TensorError> {
        let rank = self.rank();
        for slot in [a, b] {
            if slot < 1 || slot > rank {
                return Err(TensorError::SlotOutOfRange { slot, rank });
            }
        }
        for (idx, e) in self.iter() {
            let mut swapped = idx.clone();
            swapped.swap(a - 1, b - 1);
            let other = self.at(&swapped);
            let ok = if anti {
                (e + other).is_canonical_zero()
            } else {
                (e - other).is_canonical_zero()
            };
            if !ok {
                return Err(TensorError::SymmetryViolated { kind, a, b, index: idx });
            }
        }
        Ok(())
    }

    pub fn is_canonical_zero(&self) -> bool {
        self.components.iter().all(|e| e.is_canonical_zero())
    }

    /// Componentwise zero test. `Zero` only when every component is
    /// canonically zero; the first witness found is tagged with its
    /// component tuple.
    pub fn zero_verdict(&self, params: &ZeroParams) -> ZeroVerdict {
        let mut saw_unknown = false;
        for (idx, e) in self.iter() {
            if e.is_canonical_zero() {
                continue;
            }
            let v = e.is_zero(params);
            match v.verdict {
                Verdict::Zero => {}
                Verdict::NonZero => {
                    let mut witness = v.witness.expect("NonZero carries witness");
                    witness.component = Some(idx);
                    return ZeroVerdict { verdict: Verdict::NonZero, witness: Some(witness) };
                }
                Verdict::Unknown => saw_unknown = true,
            }
        }
        if saw_unknown {
            ZeroVerdict { verdict: Verdict::Unknown, witness: None }
        } else {
            ZeroVerdict::zero()
        }
    }

    /// JSON dump with zero components omitted.
    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        let variance: Vec<&str> = self
            .variance
            .iter()
            .map(|v| match v {
                Variance::Up => "up",
                Variance::Down => "down",
            })
            .collect();
        let mut components = serde_json::Map::new();
        for (idx, e) in self.iter() {
            if e.is_canonical_zero() {
                continue;
            }
            let key = format!(
                "[{}]",
                idx.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
            );
            components.insert(key, json!(e.render(crate::expr::Format::Text)));
        }
        json!({
            "variance": variance,
            "dim": self.chart.dim(),
            "components": components,
        })
    }
}

impl fmt::Debug for IndexedTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IndexedTensor({:?}, {:?})", self.chart, self.variance)?;
        for (idx, e) in self.iter() {
            if !e.is_canonical_zero() {
                writeln!(f, "  {idx:?} = {e}")?;
            }
        }
        Ok(())
    }
}
