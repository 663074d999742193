//! Modified Riemann extensions: the cotangent-bundle metric of a base
//! geometry with a torsion-free connection, deformed by a symmetric
//! c-tensor.
//!
//! For a base chart (x¹..xⁿ) with connection Γ and fiber coordinates
//! (ω₁..ω_n), the extended metric on the 2n chart is block-structured:
//!
//! ```text
//! ḡ_(ij)   = −2 ω_l Γ^l_(ij) + c_(ij)      (base block)
//! ḡ_(i j*) = ḡ_(i* j) = δ_(ij)             (off-diagonal block)
//! ḡ_(i* j*) = 0                            (fiber block)
//! ```
//!
//! Extended curvature is always computed from ḡ from first principles via
//! the geometry module; the block identities it satisfies are verified by
//! [`verify_extension_identities`], not assumed.

use crate::curvature::{concircular, conharmonic, weyl, CurvatureError};
use crate::expr::{Expression, ZeroParams};
use crate::geometry::{
    curvature_data, invert_metric, ricci, riemann, Connection, GeometryError, MetricStructure,
    RicciConvention,
};
use crate::report::{Check, Report};
use crate::symbol::Symbol;
use crate::tensor::{index_tuples, Chart, IndexedTensor, TensorError, Variance};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtensionError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error("need {expected} fiber coordinate names, got {got}")]
    OmegaCount { expected: usize, got: usize },
    #[error("fiber coordinate `{0}` collides with a base symbol")]
    OmegaCollision(Symbol),
    #[error("c-tensor depends on fiber coordinate `{0}`")]
    CDependsOnOmega(Symbol),
    #[error("c-tensor lives on a different chart than the base")]
    ChartMismatch,
    #[error("chart dimension {0} is odd; an extension has dimension 2n")]
    OddDimension(usize),
    #[error("the first half of the chart does not match the base connection's chart")]
    HalvesMismatch,
}

/// A base manifold with a torsion-free affine connection, optionally the
/// Levi-Civita connection of a metric.
#[derive(Clone, Debug)]
pub struct BaseGeometry {
    chart: Chart,
    connection: Connection,
    metric: Option<MetricStructure>,
}

impl BaseGeometry {
    pub fn from_metric(metric: MetricStructure) -> BaseGeometry {
        let connection = crate::geometry::christoffel(&metric);
        BaseGeometry { chart: metric.chart().clone(), connection, metric: Some(metric) }
    }

    pub fn from_connection(connection: Connection) -> BaseGeometry {
        BaseGeometry { chart: connection.chart().clone(), connection, metric: None }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn connection(&self) -> &Connection {
        &self.connection
    }

    pub fn metric(&self) -> Option<&MetricStructure> {
        self.metric.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }
}

/// A symmetric (0,2) tensor on the base chart.
#[derive(Clone, Debug)]
pub struct CTensor {
    tensor: IndexedTensor,
}

impl CTensor {
    pub fn new(tensor: IndexedTensor) -> Result<CTensor, ExtensionError> {
        if tensor.variance() != [Variance::Down, Variance::Down] {
            return Err(ExtensionError::Tensor(TensorError::ShapeMismatch {
                left: tensor.variance().to_vec(),
                right: vec![Variance::Down, Variance::Down],
            }));
        }
        tensor.check_symmetric(1, 2)?;
        Ok(CTensor { tensor })
    }

    pub fn zero(chart: &Chart) -> CTensor {
        CTensor { tensor: IndexedTensor::zeros(chart, &[Variance::Down, Variance::Down]) }
    }

    pub fn tensor(&self) -> &IndexedTensor {
        &self.tensor
    }
}

/// A modified Riemann extension: base, c-tensor, fiber names, and the
/// induced 2n-dimensional metric structure.
#[derive(Clone, Debug)]
pub struct ExtendedSpace {
    base: BaseGeometry,
    c: CTensor,
    omega: Vec<Symbol>,
    metric: MetricStructure,
}

impl ExtendedSpace {
    pub fn base(&self) -> &BaseGeometry {
        &self.base
    }

    pub fn c(&self) -> &CTensor {
        &self.c
    }

    pub fn omega(&self) -> &[Symbol] {
        &self.omega
    }

    pub fn metric(&self) -> &MetricStructure {
        &self.metric
    }

    pub fn chart(&self) -> &Chart {
        self.metric.chart()
    }

    pub fn base_dim(&self) -> usize {
        self.base.dim()
    }
}

/// Default fiber names p1..pn.
fn default_omega(n: usize) -> Vec<Symbol> {
    (1..=n).map(|i| Symbol::new(&format!("p{i}"))).collect()
}

/// Builds the modified Riemann extension of a base geometry.
pub fn extend(
    base: &BaseGeometry,
    c: &CTensor,
    omega_names: Option<Vec<Symbol>>,
) -> Result<ExtendedSpace, ExtensionError> {
    let n = base.dim();
    if c.tensor().chart() != base.chart() {
        return Err(ExtensionError::ChartMismatch);
    }
    let omega = omega_names.unwrap_or_else(|| default_omega(n));
    if omega.len() != n {
        return Err(ExtensionError::OmegaCount { expected: n, got: omega.len() });
    }
    // Fiber names must be fresh: distinct, not base coordinates, not free in
    // the connection or the c-tensor.
    let mut used: std::collections::BTreeSet<Symbol> =
        base.chart().coords().iter().cloned().collect();
    for (_, e) in base.connection().gamma().iter() {
        used.extend(e.free_symbols());
    }
    for (i, w) in omega.iter().enumerate() {
        if omega[..i].contains(w) || used.contains(w) {
            return Err(ExtensionError::OmegaCollision(w.clone()));
        }
    }
    for (_, e) in c.tensor().iter() {
        let free = e.free_symbols();
        for w in &omega {
            if free.contains(w) {
                return Err(ExtensionError::CDependsOnOmega(w.clone()));
            }
        }
    }
    let mut coords: Vec<Symbol> = base.chart().coords().to_vec();
    coords.extend(omega.iter().cloned());
    let chart = Chart::new(coords)?;
    let gamma = base.connection().gamma();
    let g_bar = IndexedTensor::from_fn(&chart, &[Variance::Down, Variance::Down], |idx| {
        let (a, b) = (idx[0], idx[1]);
        match (a <= n, b <= n) {
            (true, true) => {
                let mut acc = c.tensor().at(&[a, b]).clone();
                for l in 1..=n {
                    let w = Expression::var(omega[l - 1].clone());
                    acc = acc - &(&(&w * gamma.at(&[l, a, b])) * &Expression::int(2));
                }
                acc
            }
            (true, false) => {
                if b - n == a {
                    Expression::one()
                } else {
                    Expression::zero()
                }
            }
            (false, true) => {
                if a - n == b {
                    Expression::one()
                } else {
                    Expression::zero()
                }
            }
            (false, false) => Expression::zero(),
        }
    });
    let metric = invert_metric(&g_bar)?;
    Ok(ExtendedSpace { base: base.clone(), c: c.clone(), omega, metric })
}

/// Recognizes a 2n metric as a modified Riemann extension over the given
/// base connection: block conditions plus fiber-independence of the
/// candidate c-tensor. Returns the recovered c-tensor, or `None`.
pub fn recognize_extension(
    m: &MetricStructure,
    base_conn: &Connection,
) -> Result<Option<CTensor>, ExtensionError> {
    let dim = m.dim();
    if dim % 2 != 0 {
        return Err(ExtensionError::OddDimension(dim));
    }
    let n = dim / 2;
    if base_conn.chart().dim() != n
        || base_conn.chart().coords() != &m.chart().coords()[..n]
    {
        return Err(ExtensionError::HalvesMismatch);
    }
    let omega: Vec<Symbol> = m.chart().coords()[n..].to_vec();
    // Block conditions: identity off-diagonal, zero fiber block.
    for i in 1..=n {
        for j in 1..=n {
            let expected = if i == j { Expression::one() } else { Expression::zero() };
            if *m.g().at(&[i, j + n]) != expected || *m.g().at(&[i + n, j]) != expected {
                return Ok(None);
            }
            if !m.g().at(&[i + n, j + n]).is_canonical_zero() {
                return Ok(None);
            }
        }
    }
    // Candidate c_(ij) = m_(ij) + 2 ω_l Γ^l_(ij), which must be
    // fiber-independent (derive-and-check).
    let gamma = base_conn.gamma();
    let base_chart = base_conn.chart().clone();
    let candidate = IndexedTensor::from_fn(&base_chart, &[Variance::Down, Variance::Down], |idx| {
        let (i, j) = (idx[0], idx[1]);
        let mut acc = m.g().at(&[i, j]).clone();
        for l in 1..=n {
            let w = Expression::var(omega[l - 1].clone());
            acc = acc + &(&(&w * gamma.at(&[l, i, j])) * &Expression::int(2));
        }
        acc
    });
    for (_, e) in candidate.iter() {
        for w in &omega {
            if !e.derive(w).is_canonical_zero() {
                return Ok(None);
            }
        }
    }
    Ok(Some(CTensor::new(candidate)?))
}

/// Runs the block-structure identity checks on an extension, computing all
/// extended curvature from first principles.
pub fn verify_extension_identities(
    ext: &ExtendedSpace,
    conv: RicciConvention,
    params: &ZeroParams,
) -> Result<Report, ExtensionError> {
    let n = ext.base_dim();
    let chart = ext.chart().clone();
    let mut report = Report::new("extension-identities", conv);
    report.star_from = Some(n);

    let bar = curvature_data(ext.metric(), conv)?;
    let base_riem = riemann(ext.base().connection());
    let base_ric = ricci(&base_riem, conv)?;
    let gamma = ext.base().connection().gamma();

    let up3 = [Variance::Up, Variance::Down, Variance::Down];
    // (a) Christoffel blocks.
    let residual = |pred: &dyn Fn(&[usize]) -> bool, diff: &dyn Fn(&[usize]) -> Expression| {
        IndexedTensor::from_fn(&chart, &up3, |idx| {
            if pred(idx) {
                diff(idx)
            } else {
                Expression::zero()
            }
        })
    };
    let gbar = bar.connection.gamma();
    let a1 = residual(
        &|idx| idx.iter().all(|&i| i <= n),
        &|idx| gbar.at(idx) - gamma.at(idx),
    );
    report.push(Check::from_verdict("christoffel-base-block", a1.zero_verdict(params)));
    let a2 = residual(
        &|idx| idx[0] <= n && (idx[1] > n) != (idx[2] > n),
        &|idx| gbar.at(idx).clone(),
    );
    report.push(Check::from_verdict("christoffel-base-upper-mixed", a2.zero_verdict(params)));
    let a3 = residual(
        &|idx| idx[0] <= n && idx[1] > n && idx[2] > n,
        &|idx| gbar.at(idx).clone(),
    );
    report.push(Check::from_verdict("christoffel-base-upper-fiber", a3.zero_verdict(params)));
    let a4 = residual(
        &|idx| idx.iter().all(|&i| i > n),
        &|idx| gbar.at(idx).clone(),
    );
    report.push(Check::from_verdict("christoffel-fiber-upper-fiber", a4.zero_verdict(params)));

    // (b) Base-block Riemann agrees with the base connection's curvature.
    let up4 = [Variance::Up, Variance::Down, Variance::Down, Variance::Down];
    let b = IndexedTensor::from_fn(&chart, &up4, |idx| {
        if idx.iter().all(|&i| i <= n) {
            bar.riemann13.at(idx) - base_riem.at(idx)
        } else {
            Expression::zero()
        }
    });
    report.push(Check::from_verdict("riemann-base-block", b.zero_verdict(params)));

    // (c) Starred Ricci components vanish.
    let down2 = [Variance::Down, Variance::Down];
    let c1 = IndexedTensor::from_fn(&chart, &down2, |idx| {
        if (idx[0] > n) != (idx[1] > n) {
            bar.ricci.at(idx).clone()
        } else {
            Expression::zero()
        }
    });
    report.push(Check::from_verdict("ricci-starred-mixed", c1.zero_verdict(params)));
    let c2 = IndexedTensor::from_fn(&chart, &down2, |idx| {
        if idx[0] > n && idx[1] > n {
            bar.ricci.at(idx).clone()
        } else {
            Expression::zero()
        }
    });
    report.push(Check::from_verdict("ricci-fiber-block", c2.zero_verdict(params)));

    // (d) Base-block Ricci doubles the symmetrized base Ricci.
    let d = IndexedTensor::from_fn(&chart, &down2, |idx| {
        if idx.iter().all(|&i| i <= n) {
            let (i, j) = (idx[0], idx[1]);
            bar.ricci.at(&[i, j]) - &(base_ric.at(&[i, j]) + base_ric.at(&[j, i]))
        } else {
            Expression::zero()
        }
    });
    report.push(Check::from_verdict("ricci-base-block-sum", d.zero_verdict(params)));

    // (e) R̄_(i* j k* l) = 0.
    let down4 = [Variance::Down; 4];
    let e = IndexedTensor::from_fn(&chart, &down4, |idx| {
        if idx[0] > n && idx[1] <= n && idx[2] > n && idx[3] <= n {
            bar.riemann04.at(idx).clone()
        } else {
            Expression::zero()
        }
    });
    report.push(Check::from_verdict("riemann04-star-base-star-base", e.zero_verdict(params)));

    // (f) Scalar curvature of the extension vanishes.
    report.push(Check::from_verdict("scalar-curvature", bar.scalar.is_zero(params)));

    // (g) With zero scalar curvature, concircular = Riemann and
    // conharmonic = Weyl; asserted independently of (f).
    if chart.dim() >= 3 {
        let cc = concircular(ext.metric(), &bar.riemann04, &bar.scalar)?;
        report.push(Check::from_verdict(
            "concircular-equals-riemann",
            cc.sub(&bar.riemann04)?.zero_verdict(params),
        ));
        let l = conharmonic(ext.metric(), &bar.riemann04, &bar.ricci)?;
        let w = weyl(ext.metric(), &bar.riemann04, &bar.ricci, &bar.scalar)?;
        report.push(Check::from_verdict(
            "conharmonic-equals-weyl",
            l.sub(&w)?.zero_verdict(params),
        ));
    } else {
        report.push(Check::precondition(
            "concircular-equals-riemann",
            "conharmonic/Weyl need chart dimension >= 3",
        ));
    }
    Ok(report)
}

/// The fiber coordinates do not enter ḡ beyond first order: all second
/// ω-derivatives vanish canonically.
pub fn check_omega_affine(ext: &ExtendedSpace) -> bool {
    for (_, e) in ext.metric().g().iter() {
        for w1 in ext.omega() {
            let d1 = e.derive(w1);
            for w2 in ext.omega() {
                if !d1.derive(w2).is_canonical_zero() {
                    return false;
                }
            }
        }
    }
    true
}

/// Contravariant block check data: the paper-form inverse blocks
/// (ḡ^(ij) = 0, ḡ^(i j*) = δ, ḡ^(i* j*) = 2ω_lΓ^l − c) compared against
/// the computed exact inverse; used by tests and the identity suite.
pub fn inverse_block_residual(ext: &ExtendedSpace) -> Result<IndexedTensor, ExtensionError> {
    let n = ext.base_dim();
    let chart = ext.chart().clone();
    let gamma = ext.base().connection().gamma();
    let expected = IndexedTensor::from_fn(&chart, &[Variance::Up, Variance::Up], |idx| {
        let (a, b) = (idx[0], idx[1]);
        match (a <= n, b <= n) {
            (true, true) => Expression::zero(),
            (true, false) => {
                if b - n == a {
                    Expression::one()
                } else {
                    Expression::zero()
                }
            }
            (false, true) => {
                if a - n == b {
                    Expression::one()
                } else {
                    Expression::zero()
                }
            }
            (false, false) => {
                let (i, j) = (a - n, b - n);
                let mut acc = -ext.c().tensor().at(&[i, j]).clone();
                for l in 1..=n {
                    let w = Expression::var(ext.omega()[l - 1].clone());
                    acc = acc + &(&(&w * gamma.at(&[l, i, j])) * &Expression::int(2));
                }
                acc
            }
        }
    });
    Ok(ext.metric().g_inv().sub(&expected)?)
}

/// Determinant magnitude of any extension metric is 1 (block determinant up
/// to sign).
pub fn det_is_unit(ext: &ExtendedSpace) -> bool {
    let d = ext.metric().det();
    (d - &Expression::one()).is_canonical_zero() || (d + &Expression::one()).is_canonical_zero()
}

/// All index tuples of the extension chart whose entries are all fiber
/// indices, base indices, etc., are enumerable through this helper pair.
pub fn starred_count(idx: &[usize], base_dim: usize) -> usize {
    idx.iter().filter(|&&i| i > base_dim).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Verdict;
    use crate::report::CheckStatus;
    use crate::testutil::{hyperbolic_plane, metric_from_entries};

    fn e(src: &str) -> Expression {
        Expression::parse(src).unwrap()
    }

    fn hyperbolic_extension() -> ExtendedSpace {
        let base = BaseGeometry::from_metric(hyperbolic_plane());
        let c = CTensor::zero(base.chart());
        extend(&base, &c, Some(vec![Symbol::new("P"), Symbol::new("Q")])).unwrap()
    }

    #[test]
    fn flat_line_extension_is_off_diagonal() {
        let chart = Chart::from_names(&["x"]).unwrap();
        let base = BaseGeometry::from_connection(Connection::flat(&chart));
        let ext = extend(&base, &CTensor::zero(&chart), None).unwrap();
        assert_eq!(ext.chart().coords()[1].name(), "p1");
        let g = ext.metric().g();
        assert!(g.at(&[1, 1]).is_canonical_zero());
        assert_eq!(*g.at(&[1, 2]), Expression::one());
        assert_eq!(*g.at(&[2, 1]), Expression::one());
        assert!(g.at(&[2, 2]).is_canonical_zero());
    }

    #[test]
    fn hyperbolic_extension_metric_blocks() {
        let ext = hyperbolic_extension();
        let g = ext.metric().g();
        assert_eq!(*g.at(&[1, 1]), e("-2*Q/y"));
        assert_eq!(*g.at(&[1, 2]), e("2*P/y"));
        assert_eq!(*g.at(&[2, 2]), e("2*Q/y"));
        assert_eq!(*g.at(&[1, 3]), Expression::one());
        assert_eq!(*g.at(&[2, 4]), Expression::one());
        assert!(g.at(&[1, 4]).is_canonical_zero());
        assert!(g.at(&[3, 3]).is_canonical_zero());
        assert!(g.at(&[3, 4]).is_canonical_zero());
    }

    #[test]
    fn contravariant_blocks_match_paper_form() {
        let ext = hyperbolic_extension();
        assert!(inverse_block_residual(&ext).unwrap().is_canonical_zero());
        assert!(det_is_unit(&ext));
    }

    #[test]
    fn omega_affinity() {
        assert!(check_omega_affine(&hyperbolic_extension()));
    }

    #[test]
    fn collision_and_dependence_errors() {
        let base = BaseGeometry::from_metric(hyperbolic_plane());
        let err = extend(
            &base,
            &CTensor::zero(base.chart()),
            Some(vec![Symbol::new("x"), Symbol::new("Q")]),
        )
        .unwrap_err();
        assert!(matches!(err, ExtensionError::OmegaCollision(_)));

        let cq = CTensor::new(IndexedTensor::from_fn(
            base.chart(),
            &[Variance::Down, Variance::Down],
            |idx| if idx == [1, 1] { e("Q") } else { Expression::zero() },
        ))
        .unwrap();
        let err = extend(&base, &cq, Some(vec![Symbol::new("P"), Symbol::new("Q")])).unwrap_err();
        assert!(matches!(err, ExtensionError::CDependsOnOmega(_)));

        let other_chart = Chart::from_names(&["a", "b"]).unwrap();
        let err = extend(&base, &CTensor::zero(&other_chart), None).unwrap_err();
        assert!(matches!(err, ExtensionError::ChartMismatch));
    }

    #[test]
    fn identities_pass_on_hyperbolic_extension() {
        let ext = hyperbolic_extension();
        let zp = ZeroParams { trials: 4, ..ZeroParams::default() };
        let report = verify_extension_identities(&ext, RicciConvention::Paper, &zp).unwrap();
        assert!(report.passed(), "{:#?}", report.checks);
        for check in &report.checks {
            assert_eq!(check.status, CheckStatus::Pass, "{}", check.name);
        }
    }

    #[test]
    fn paper_mode_extended_ricci_reproduces_printed_values() {
        let ext = hyperbolic_extension();
        let bar = curvature_data(ext.metric(), RicciConvention::Paper).unwrap();
        assert_eq!(*bar.ricci.at(&[1, 1]), e("2/y^2"));
        assert_eq!(*bar.ricci.at(&[2, 2]), e("2/y^2"));
        for (idx, comp) in bar.ricci.iter() {
            if idx != [1, 1] && idx != [2, 2] {
                assert!(comp.is_canonical_zero(), "Ricci{idx:?} = {comp}");
            }
        }
        assert!(bar.scalar.is_canonical_zero());
    }

    #[test]
    fn flat_base_constant_c_extension_is_flat() {
        let base = BaseGeometry::from_metric(metric_from_entries(
            &["x", "y"],
            &[(1, 1, "1"), (2, 2, "1")],
        ));
        let c = CTensor::new(IndexedTensor::from_fn(
            base.chart(),
            &[Variance::Down, Variance::Down],
            |idx| match (idx[0], idx[1]) {
                (1, 1) => Expression::one(),
                (1, 2) | (2, 1) => Expression::one(),
                (2, 2) => Expression::int(2),
                _ => Expression::zero(),
            },
        ))
        .unwrap();
        let ext = extend(&base, &c, None).unwrap();
        let bar = curvature_data(ext.metric(), RicciConvention::Standard).unwrap();
        assert!(bar.riemann13.is_canonical_zero());
        let zp = ZeroParams { trials: 4, ..ZeroParams::default() };
        let report = verify_extension_identities(&ext, RicciConvention::Standard, &zp).unwrap();
        assert!(report.passed());
    }

    #[test]
    fn recognize_roundtrip() {
        let base = BaseGeometry::from_metric(hyperbolic_plane());
        let c = CTensor::new(IndexedTensor::from_fn(
            base.chart(),
            &[Variance::Down, Variance::Down],
            |idx| match (idx[0], idx[1]) {
                (1, 1) => e("1/y"),
                (2, 2) => e("3"),
                _ => Expression::zero(),
            },
        ))
        .unwrap();
        let ext = extend(&base, &c, Some(vec![Symbol::new("P"), Symbol::new("Q")])).unwrap();
        let back = recognize_extension(ext.metric(), base.connection())
            .unwrap()
            .expect("extension should be recognized");
        assert_eq!(*back.tensor(), *c.tensor());
    }

    #[test]
    fn recognize_rejects_bad_blocks() {
        let ext = hyperbolic_extension();
        let chart = ext.chart().clone();
        // Perturb the fiber block.
        let bad = IndexedTensor::from_fn(&chart, &[Variance::Down, Variance::Down], |idx| {
            if idx == [3, 4] || idx == [4, 3] {
                Expression::one()
            } else {
                ext.metric().g().at(idx).clone()
            }
        });
        let m = invert_metric(&bad).unwrap();
        let found = recognize_extension(&m, ext.base().connection()).unwrap();
        assert!(found.is_none());
        // ω-dependent base block is rejected too.
        let baddep = IndexedTensor::from_fn(&chart, &[Variance::Down, Variance::Down], |idx| {
            if idx == [1, 1] {
                ext.metric().g().at(idx) + &e("P^2")
            } else {
                ext.metric().g().at(idx).clone()
            }
        });
        let m = invert_metric(&baddep).unwrap();
        assert!(recognize_extension(&m, ext.base().connection()).unwrap().is_none());
        // Odd dimension errors.
        let m3 = metric_from_entries(&["a", "b", "cc"], &[(1, 1, "1"), (2, 2, "1"), (3, 3, "1")]);
        assert!(matches!(
            recognize_extension(&m3, ext.base().connection()),
            Err(ExtensionError::OddDimension(3))
        ));
    }

    #[test]
    fn nonmetric_affine_base_extends() {
        // A direct-entry connection with no metric: Γ^1_(11) = x.
        let chart = Chart::from_names(&["x"]).unwrap();
        let gamma = IndexedTensor::from_fn(
            &chart,
            &[Variance::Up, Variance::Down, Variance::Down],
            |_| e("x"),
        );
        let conn = Connection::new(gamma).unwrap();
        let base = BaseGeometry::from_connection(conn);
        let ext = extend(&base, &CTensor::zero(&chart), Some(vec![Symbol::new("w")])).unwrap();
        assert_eq!(*ext.metric().g().at(&[1, 1]), e("-2*w*x"));
        let zp = ZeroParams { trials: 4, ..ZeroParams::default() };
        let report = verify_extension_identities(&ext, RicciConvention::Standard, &zp).unwrap();
        assert!(report.passed(), "{:#?}", report.checks);
    }

    #[test]
    fn verdict_example_star_display() {
        let ext = hyperbolic_extension();
        let zp = ZeroParams { trials: 4, ..ZeroParams::default() };
        let report = verify_extension_identities(&ext, RicciConvention::Paper, &zp).unwrap();
        let v = report.to_json();
        assert_eq!(v["suite"], "extension-identities");
        assert_eq!(v["checks"][0]["status"], "pass");
        assert_eq!(report.checks.iter().filter(|c| c.status == CheckStatus::Pass).count(),
            report.checks.len());
        let _ = Verdict::Zero;
        let _ = index_tuples(2, 1);
        let _ = starred_count(&[1, 3], 2);
    }
}
