//! The curvature pipeline: exact metric inversion, Christoffel symbols,
//! Riemann/Ricci/scalar curvature, covariant derivatives, and tensor
//! Laplacians on explicit charts.
//!
//! Index layout follows one fixed convention throughout:
//!
//! * `Γ^k_(ij) = ½ g^(kl) (∂_i g_(jl) + ∂_j g_(il) − ∂_l g_(ij))`, slots
//!   `(k, i, j)`;
//! * `R^l_(ijk) = ∂_i Γ^l_(jk) − ∂_j Γ^l_(ik) + Γ^l_(im)Γ^m_(jk) −
//!   Γ^l_(jm)Γ^m_(ik)`, slots `(l, i, j, k)`, antisymmetric in `(i, j)`;
//! * the (0,4) form lowers the upper index into the third position:
//!   `R_(ijkl) = g_(mk) R^m_(ijl)`;
//! * `Ric_(kj) = Σ_a R^a_(ajk)` in the standard convention; the paper
//!   convention is its negative (see [`RicciConvention`]).

use crate::expr::Expression;
use crate::symbol::Symbol;
use crate::tensor::{Chart, IndexedTensor, TensorError, Variance};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("metric is singular (canonically zero determinant)")]
    SingularMetric,
    #[error("expected a metric-shaped (0,2) tensor")]
    NotMetricShaped,
    #[error("operation requires a fully covariant tensor")]
    NotCovariant,
}

/// Sign convention for the Ricci contraction. `Paper` is the sign-flipped
/// contraction (−1 × `Standard` on every component), under which a
/// hyperbolic plane gets Ricci `+diag(1/y², 1/y²)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RicciConvention {
    #[default]
    Standard,
    Paper,
}

impl RicciConvention {
    pub fn sign(&self) -> i64 {
        match self {
            RicciConvention::Standard => 1,
            RicciConvention::Paper => -1,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            RicciConvention::Standard => "standard",
            RicciConvention::Paper => "paper",
        }
    }
}

impl std::str::FromStr for RicciConvention {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "standard" => Ok(RicciConvention::Standard),
            "paper" => Ok(RicciConvention::Paper),
            other => Err(format!("unknown convention `{other}` (expected standard or paper)")),
        }
    }
}

impl std::fmt::Display for RicciConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A symmetric metric with its exact inverse and determinant.
#[derive(Clone, Debug)]
pub struct MetricStructure {
    chart: Chart,
    g: IndexedTensor,
    g_inv: IndexedTensor,
    det: Expression,
}

impl MetricStructure {
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn g(&self) -> &IndexedTensor {
        &self.g
    }

    pub fn g_inv(&self) -> &IndexedTensor {
        &self.g_inv
    }

    pub fn det(&self) -> &Expression {
        &self.det
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }
}

/// Exact inverse via Gauss–Jordan elimination over the expression field.
/// Errors when the metric is not symmetric or has canonically zero
/// determinant.
pub fn invert_metric(g: &IndexedTensor) -> Result<MetricStructure, GeometryError> {
    if g.variance() != [Variance::Down, Variance::Down] {
        return Err(GeometryError::NotMetricShaped);
    }
    g.check_symmetric(1, 2)?;
    let chart = g.chart().clone();
    let n = chart.dim();
    let mut a: Vec<Vec<Expression>> = (1..=n)
        .map(|i| (1..=n).map(|j| g.at(&[i, j]).clone()).collect())
        .collect();
    let mut inv: Vec<Vec<Expression>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Expression::one() } else { Expression::zero() })
                .collect()
        })
        .collect();
    let mut det = Expression::one();
    for col in 0..n {
        let pivot_row = (col..n).find(|&r| !a[r][col].is_canonical_zero());
        let Some(pivot_row) = pivot_row else {
            return Err(GeometryError::SingularMetric);
        };
        if pivot_row != col {
            a.swap(pivot_row, col);
            inv.swap(pivot_row, col);
            det = -det;
        }
        let pivot = a[col][col].clone();
        det = det * &pivot;
        for j in 0..n {
            a[col][j] = a[col][j].checked_div(&pivot).expect("pivot nonzero");
            inv[col][j] = inv[col][j].checked_div(&pivot).expect("pivot nonzero");
        }
        for r in 0..n {
            if r == col || a[r][col].is_canonical_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for j in 0..n {
                a[r][j] = &a[r][j] - &(&factor * &a[col][j]);
                inv[r][j] = &inv[r][j] - &(&factor * &inv[col][j]);
            }
        }
    }
    let g_inv = IndexedTensor::from_fn(&chart, &[Variance::Up, Variance::Up], |idx| {
        inv[idx[0] - 1][idx[1] - 1].clone()
    });
    debug_assert!({
        let mut ok = true;
        'outer: for i in 1..=n {
            for j in 1..=n {
                let mut acc = Expression::zero();
                for k in 1..=n {
                    acc = acc + &(g_inv.at(&[i, k]) * g.at(&[k, j]));
                }
                let expect = if i == j { Expression::one() } else { Expression::zero() };
                if acc != expect {
                    ok = false;
                    break 'outer;
                }
            }
        }
        ok
    });
    Ok(MetricStructure { chart, g: g.clone(), g_inv, det })
}

/// A torsion-free affine connection: Γ^k_(ij), symmetric in (i, j).
#[derive(Clone, Debug)]
pub struct Connection {
    chart: Chart,
    gamma: IndexedTensor,
}

impl Connection {
    /// Wraps directly specified coefficients, enforcing lower-index symmetry.
    pub fn new(gamma: IndexedTensor) -> Result<Connection, GeometryError> {
        if gamma.variance() != [Variance::Up, Variance::Down, Variance::Down] {
            return Err(GeometryError::NotMetricShaped);
        }
        gamma.check_symmetric(2, 3)?;
        Ok(Connection { chart: gamma.chart().clone(), gamma })
    }

    pub fn flat(chart: &Chart) -> Connection {
        Connection {
            chart: chart.clone(),
            gamma: IndexedTensor::zeros(chart, &[Variance::Up, Variance::Down, Variance::Down]),
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn gamma(&self) -> &IndexedTensor {
        &self.gamma
    }
}

/// Levi-Civita connection of a metric.
pub fn christoffel(m: &MetricStructure) -> Connection {
    let chart = m.chart().clone();
    let n = chart.dim();
    // dg[l][i][j] = ∂_l g_(ij), 0-based storage.
    let mut dg = vec![vec![vec![Expression::zero(); n]; n]; n];
    for l in 1..=n {
        let sym = chart.coord(l).clone();
        for i in 1..=n {
            for j in i..=n {
                let d = m.g().at(&[i, j]).derive(&sym);
                dg[l - 1][i - 1][j - 1] = d.clone();
                dg[l - 1][j - 1][i - 1] = d;
            }
        }
    }
    let half = Expression::rational(1, 2);
    let gamma = IndexedTensor::from_fn(
        &chart,
        &[Variance::Up, Variance::Down, Variance::Down],
        |idx| {
            let (k, i, j) = (idx[0], idx[1], idx[2]);
            let mut acc = Expression::zero();
            for l in 1..=n {
                let sum = &(&dg[i - 1][j - 1][l - 1] + &dg[j - 1][i - 1][l - 1])
                    - &dg[l - 1][i - 1][j - 1];
                acc = acc + &(m.g_inv().at(&[k, l]) * &sum);
            }
            &half * &acc
        },
    );
    Connection { chart, gamma }
}

/// Riemann curvature R^l_(ijk) of a connection, slots (l, i, j, k).
pub fn riemann(c: &Connection) -> IndexedTensor {
    let chart = c.chart().clone();
    let n = chart.dim();
    let gamma = c.gamma();
    IndexedTensor::from_fn(
        &chart,
        &[Variance::Up, Variance::Down, Variance::Down, Variance::Down],
        |idx| {
            let (l, i, j, k) = (idx[0], idx[1], idx[2], idx[3]);
            let xi = chart.coord(i).clone();
            let xj = chart.coord(j).clone();
            let mut acc = &gamma.at(&[l, j, k]).derive(&xi) - &gamma.at(&[l, i, k]).derive(&xj);
            for m in 1..=n {
                acc = acc
                    + &(gamma.at(&[l, i, m]) * gamma.at(&[m, j, k]))
                    - &(gamma.at(&[l, j, m]) * gamma.at(&[m, i, k]));
            }
            acc
        },
    )
}

/// The (0,4) curvature with the upper index lowered into the third slot:
/// R_(ijkl) = g_(mk) R^m_(ijl).
pub fn riemann04(riem13: &IndexedTensor, m: &MetricStructure) -> Result<IndexedTensor, GeometryError> {
    Ok(riem13.lower_index(1, 3, m.g())?)
}

/// Ricci tensor Ric_(kj) = sign · Σ_a R^a_(ajk).
pub fn ricci(riem13: &IndexedTensor, conv: RicciConvention) -> Result<IndexedTensor, GeometryError> {
    let contracted = riem13.contract(1, 2)?; // C_(jk) = Σ_a R^a_(ajk)
    let ric = contracted.permute(&[2, 1])?; // Ric_(kj) = C_(jk)
    Ok(match conv {
        RicciConvention::Standard => ric,
        RicciConvention::Paper => ric.scale(&-Expression::one()),
    })
}

/// Scalar curvature R = g^(jk) Ric_(jk).
pub fn scalar_curvature(m: &MetricStructure, ric: &IndexedTensor) -> Expression {
    let n = m.dim();
    let mut acc = Expression::zero();
    for j in 1..=n {
        for k in 1..=n {
            acc = acc + &(m.g_inv().at(&[j, k]) * ric.at(&[j, k]));
        }
    }
    acc
}

/// Covariant derivative of a fully covariant tensor; the derivative slot is
/// appended last: (∇T)_(i₁..i_k m) = ∂_m T − Σ_s Γ^a_(i_s m) T_(..a..).
pub fn covariant_derivative(
    c: &Connection,
    t: &IndexedTensor,
) -> Result<IndexedTensor, GeometryError> {
    if t.variance().iter().any(|v| *v != Variance::Down) {
        return Err(GeometryError::NotCovariant);
    }
    if t.chart() != c.chart() {
        return Err(GeometryError::Tensor(TensorError::ChartMismatch));
    }
    let chart = c.chart().clone();
    let n = chart.dim();
    let rank = t.rank();
    let mut variance = t.variance().to_vec();
    variance.push(Variance::Down);
    let gamma = c.gamma();
    Ok(IndexedTensor::from_fn(&chart, &variance, |idx| {
        let m = idx[rank];
        let base = &idx[..rank];
        let xm = chart.coord(m).clone();
        let mut acc = t.at(base).derive(&xm);
        let mut probe = base.to_vec();
        for s in 0..rank {
            let orig = probe[s];
            for a in 1..=n {
                probe[s] = a;
                acc = acc - &(gamma.at(&[a, orig, m]) * t.at(&probe));
            }
            probe[s] = orig;
        }
        acc
    }))
}

/// Tensor Laplacian ΔT = g^(kl) (∇∇T)_(.. k l).
pub fn laplacian(
    m: &MetricStructure,
    c: &Connection,
    t: &IndexedTensor,
) -> Result<IndexedTensor, GeometryError> {
    let dd = covariant_derivative(c, &covariant_derivative(c, t)?)?;
    let chart = m.chart().clone();
    let n = chart.dim();
    let rank = t.rank();
    Ok(IndexedTensor::from_fn(&chart, t.variance(), |idx| {
        let mut full = idx.to_vec();
        full.push(0);
        full.push(0);
        let mut acc = Expression::zero();
        for k in 1..=n {
            for l in 1..=n {
                full[rank] = k;
                full[rank + 1] = l;
                acc = acc + &(m.g_inv().at(&[k, l]) * dd.at(&full));
            }
        }
        acc
    }))
}

/// All curvature objects of a metric computed in one pass.
#[derive(Clone, Debug)]
pub struct CurvatureData {
    pub connection: Connection,
    pub riemann13: IndexedTensor,
    pub riemann04: IndexedTensor,
    pub ricci: IndexedTensor,
    pub scalar: Expression,
}

pub fn curvature_data(
    m: &MetricStructure,
    conv: RicciConvention,
) -> Result<CurvatureData, GeometryError> {
    let connection = christoffel(m);
    let riemann13 = riemann(&connection);
    let riemann04 = riemann04(&riemann13, m)?;
    let ric = ricci(&riemann13, conv)?;
    let scalar = scalar_curvature(m, &ric);
    Ok(CurvatureData { connection, riemann13, riemann04, ricci: ric, scalar })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ZeroParams;

    use crate::testutil::{hyperbolic_plane, metric_from_entries, sphere_stereographic};

    fn e(src: &str) -> Expression {
        Expression::parse(src).unwrap()
    }

    #[test]
    fn diagonal_inverse_is_exact() {
        let m = hyperbolic_plane();
        assert_eq!(*m.g_inv().at(&[1, 1]), e("y^2"));
        assert_eq!(*m.g_inv().at(&[2, 2]), e("y^2"));
        assert!(m.g_inv().at(&[1, 2]).is_canonical_zero());
        assert_eq!(*m.det(), e("1/y^4"));
    }

    #[test]
    fn degenerate_metric_rejected() {
        let chart = Chart::from_names(&["x", "y"]).unwrap();
        let g = IndexedTensor::from_fn(&chart, &[Variance::Down, Variance::Down], |_| {
            Expression::one()
        });
        assert!(matches!(invert_metric(&g), Err(GeometryError::SingularMetric)));
    }

    #[test]
    fn flat_metric_has_no_christoffels() {
        let m = metric_from_entries(&["x", "y"], &[(1, 1, "1"), (2, 2, "1")]);
        let c = christoffel(&m);
        assert!(c.gamma().is_canonical_zero());
        assert!(riemann(&c).is_canonical_zero());
    }

    #[test]
    fn hyperbolic_christoffels_match_closed_form() {
        let m = hyperbolic_plane();
        let c = christoffel(&m);
        let g = c.gamma();
        assert_eq!(*g.at(&[1, 1, 2]), e("-1/y"));
        assert_eq!(*g.at(&[1, 2, 1]), e("-1/y"));
        assert_eq!(*g.at(&[2, 1, 1]), e("1/y"));
        assert_eq!(*g.at(&[2, 2, 2]), e("-1/y"));
        for idx in [[1, 1, 1], [1, 2, 2], [2, 1, 2], [2, 2, 1]] {
            assert!(g.at(&idx).is_canonical_zero(), "Γ{idx:?} should vanish");
        }
    }

    #[test]
    fn sphere_stereographic_christoffel() {
        let c = christoffel(&sphere_stereographic());
        assert_eq!(*c.gamma().at(&[1, 1, 1]), e("-2*x/(1 + x^2 + y^2)"));
    }

    #[test]
    fn hyperbolic_riemann_components() {
        let m = hyperbolic_plane();
        let r = riemann(&christoffel(&m));
        assert_eq!(*r.at(&[1, 1, 2, 2]), e("-1/y^2"));
        assert_eq!(*r.at(&[1, 2, 1, 2]), e("1/y^2"));
        assert_eq!(*r.at(&[2, 1, 2, 1]), e("1/y^2"));
        // Antisymmetry in (i, j) is forced by the construction.
        r.check_antisymmetric(2, 3).unwrap();
    }

    #[test]
    fn riemann04_matches_constant_curvature_closed_form() {
        // For curvature K: R_(ijkl) = K (g_(ik) g_(jl) − g_(il) g_(jk))
        // under the middle-slot lowering. Hyperbolic plane has K = −1.
        let m = hyperbolic_plane();
        let r04 = riemann04(&riemann(&christoffel(&m)), &m).unwrap();
        let g = m.g();
        let k = -Expression::one();
        for (idx, comp) in r04.iter() {
            let (i, j, kk, l) = (idx[0], idx[1], idx[2], idx[3]);
            let closed = &k
                * &(&(g.at(&[i, kk]) * g.at(&[j, l])) - &(g.at(&[i, l]) * g.at(&[j, kk])));
            assert_eq!(*comp, closed, "component {idx:?}");
        }
    }

    #[test]
    fn hyperbolic_ricci_both_conventions() {
        let m = hyperbolic_plane();
        let r13 = riemann(&christoffel(&m));
        let standard = ricci(&r13, RicciConvention::Standard).unwrap();
        assert_eq!(*standard.at(&[1, 1]), e("-1/y^2"));
        assert_eq!(*standard.at(&[2, 2]), e("-1/y^2"));
        assert!(standard.at(&[1, 2]).is_canonical_zero());
        let paper = ricci(&r13, RicciConvention::Paper).unwrap();
        assert_eq!(*paper.at(&[1, 1]), e("1/y^2"));
        // paper = −standard, exactly.
        assert!(paper.add(&standard).unwrap().is_canonical_zero());
        // Ricci symmetry.
        standard.check_symmetric(1, 2).unwrap();
    }

    #[test]
    fn hyperbolic_scalar_curvature() {
        let m = hyperbolic_plane();
        let ric = ricci(&riemann(&christoffel(&m)), RicciConvention::Standard).unwrap();
        assert_eq!(scalar_curvature(&m, &ric), e("-2"));
    }

    #[test]
    fn lower_then_raise_roundtrip() {
        let m = hyperbolic_plane();
        let r13 = riemann(&christoffel(&m));
        let lowered = r13.lower_index(1, 3, m.g()).unwrap();
        let back = lowered.raise_index(3, 1, m.g_inv()).unwrap();
        assert_eq!(back, r13);
    }

    #[test]
    fn sphere_ricci_two_contraction_paths_agree() {
        // Cross-check of the two contraction routes through the lowered
        // Riemann tensor: with the middle-slot lowering, contracting slots
        // (1,3) with the inverse metric reproduces the standard Ricci, and
        // contracting slots (1,4) reproduces its negative (the paper-mode
        // Ricci).
        let m = sphere_stereographic();
        let r13 = riemann(&christoffel(&m));
        let standard = ricci(&r13, RicciConvention::Standard).unwrap();
        let paper = ricci(&r13, RicciConvention::Paper).unwrap();
        let r04 = riemann04(&r13, &m).unwrap();
        let raised = r04.raise_index(1, 1, m.g_inv()).unwrap();
        assert_eq!(raised.contract(1, 3).unwrap(), standard);
        assert_eq!(raised.contract(1, 4).unwrap(), paper);
    }

    #[test]
    fn metric_compatibility() {
        for m in [hyperbolic_plane(), sphere_stereographic()] {
            let c = christoffel(&m);
            let nabla_g = covariant_derivative(&c, m.g()).unwrap();
            assert!(nabla_g.is_canonical_zero());
        }
    }

    #[test]
    fn first_bianchi_identity() {
        for m in [hyperbolic_plane(), sphere_stereographic()] {
            let r = riemann(&christoffel(&m));
            let cyc = r
                .add(&r.permute(&[1, 3, 4, 2]).unwrap())
                .unwrap()
                .add(&r.permute(&[1, 4, 2, 3]).unwrap())
                .unwrap();
            assert!(cyc.is_canonical_zero());
        }
    }

    #[test]
    fn covariant_derivative_simple_cases() {
        let chart = Chart::from_names(&["x", "y"]).unwrap();
        let flat = Connection::flat(&chart);
        // ∇ of a constant scalar is the zero 1-tensor.
        let c = IndexedTensor::scalar(&chart, Expression::int(7));
        assert!(covariant_derivative(&flat, &c).unwrap().is_canonical_zero());
        // ∇ of a constant (0,2) tensor on a flat chart vanishes.
        let t = IndexedTensor::from_fn(&chart, &[Variance::Down, Variance::Down], |idx| {
            Expression::int((idx[0] + idx[1]) as i64)
        });
        assert!(covariant_derivative(&flat, &t).unwrap().is_canonical_zero());
        // Mixed-variance input is rejected.
        let up = IndexedTensor::delta(&chart);
        assert!(matches!(
            covariant_derivative(&flat, &up),
            Err(GeometryError::NotCovariant)
        ));
    }

    #[test]
    fn laplacian_simple_cases() {
        // Δ applied to x² on a flat 1-d chart gives 2.
        let m = metric_from_entries(&["x"], &[(1, 1, "1")]);
        let c = christoffel(&m);
        let f = IndexedTensor::scalar(m.chart(), e("x^2"));
        let lap = laplacian(&m, &c, &f).unwrap();
        assert_eq!(*lap.get(&[]).unwrap(), Expression::int(2));
        // Constant-component tensor on a flat chart: Δ = 0.
        let m2 = metric_from_entries(&["x", "y"], &[(1, 1, "1"), (2, 2, "1")]);
        let c2 = christoffel(&m2);
        let t = IndexedTensor::from_fn(&m2.chart().clone(), &[Variance::Down, Variance::Down], |_| {
            Expression::int(3)
        });
        assert!(laplacian(&m2, &c2, &t).unwrap().is_canonical_zero());
    }

    #[test]
    fn finite_difference_oracle_confirms_christoffels() {
        // Independent check of the Levi-Civita formula: compare symbolic
        // Christoffels against centered finite differences of the metric at
        // random rational points, with the inverse metric evaluated
        // numerically.
        use crate::ratfun::rat;
        use rand::Rng as _;
        use rand::SeedableRng as _;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for m in [hyperbolic_plane(), sphere_stereographic()] {
            let n = m.dim();
            let gamma = christoffel(&m);
            let h = 1e-6f64;
            let mut checked = 0;
            'points: while checked < 5 {
                let mut point = std::collections::BTreeMap::new();
                for s in m.chart().coords() {
                    point.insert(s.clone(), rat(rng.gen_range(80..=300), rng.gen_range(64..=96)));
                }
                // numeric metric and inverse at the point
                let mut gnum = vec![vec![0.0f64; n]; n];
                for i in 1..=n {
                    for j in 1..=n {
                        match m.g().at(&[i, j]).eval(&point) {
                            Ok(v) => gnum[i - 1][j - 1] = v.as_f64(),
                            Err(_) => continue 'points,
                        }
                    }
                }
                let det = gnum[0][0] * gnum[1][1] - gnum[0][1] * gnum[1][0];
                let ginv = [
                    [gnum[1][1] / det, -gnum[0][1] / det],
                    [-gnum[1][0] / det, gnum[0][0] / det],
                ];
                // centered finite differences dg[l][i][j] ≈ ∂_l g_(ij)
                let mut dg = vec![vec![vec![0.0f64; n]; n]; n];
                for l in 1..=n {
                    let sym = m.chart().coord(l).clone();
                    let base = point.get(&sym).unwrap().clone();
                    let hr = rat(1, 1_000_000);
                    for (sign, scale) in [(1.0, &base + &hr), (-1.0, &base - &hr)] {
                        let mut shifted = point.clone();
                        shifted.insert(sym.clone(), scale);
                        for i in 1..=n {
                            for j in 1..=n {
                                let v = m.g().at(&[i, j]).eval(&shifted).unwrap().as_f64();
                                dg[l - 1][i - 1][j - 1] += sign * v / (2.0 * h);
                            }
                        }
                    }
                }
                for k in 1..=n {
                    for i in 1..=n {
                        for j in 1..=n {
                            let mut fd = 0.0;
                            for l in 1..=n {
                                fd += 0.5
                                    * ginv[k - 1][l - 1]
                                    * (dg[i - 1][j - 1][l - 1] + dg[j - 1][i - 1][l - 1]
                                        - dg[l - 1][i - 1][j - 1]);
                            }
                            let sym_val = gamma.gamma().at(&[k, i, j]).eval(&point).unwrap().as_f64();
                            assert!(
                                (sym_val - fd).abs() <= 1e-4 * (1.0 + sym_val.abs()),
                                "Γ^{k}_({i}{j}): symbolic {sym_val} vs fd {fd}"
                            );
                        }
                    }
                }
                checked += 1;
            }
        }
    }
}
