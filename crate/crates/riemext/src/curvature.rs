//! Concircular, conharmonic, and Weyl conformal curvature tensors, and the
//! linear relation tying them to the Riemann tensor.
//!
//! All three act on the (0,4) curvature in the middle-slot-lowered layout
//! produced by [`crate::geometry::riemann04`], in which a constant-curvature
//! space has `R_(ijkl) = K·B_(ijkl)` with the bivector
//! `B_(ijkl) = g_(ik)g_(jl) − g_(il)g_(jk)`. The correction terms use that
//! same bivector so the defining properties hold exactly:
//!
//! * `C_(ijkl) = R_(ijkl) − R/(n(n−1)) · B_(ijkl)` — vanishes on constant
//!   curvature, equals Riemann when the scalar curvature vanishes;
//! * `L_(ijkl) = R_(ijkl) − 1/(n−2) · (g_(ik)R_(jl) + g_(jl)R_(ik) −
//!   g_(il)R_(jk) − g_(jk)R_(il))` — equals Riemann on Ricci-flat input;
//! * `W_(ijkl) = L_(ijkl) + R/((n−1)(n−2)) · B_(ijkl)` — trace-free,
//!   vanishes on constant curvature.
//!
//! They satisfy `(W − L) = −n/(n−2) · (C − R)` identically. (Sources that
//! write the corrections with the bivector `g_(il)g_(jk) − g_(jl)g_(ik)`
//! assume the opposite curvature sign layout; with the layout produced by
//! the middle-slot lowering here, those verbatim brackets would *not*
//! vanish on constant curvature.)

use crate::expr::{Expression, ZeroParams, ZeroVerdict};
use crate::geometry::MetricStructure;
use crate::tensor::{IndexedTensor, TensorError, Variance};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CurvatureError {
    #[error("operation needs chart dimension >= {need}, got {got}")]
    DimensionTooSmall { need: usize, got: usize },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

const RIEM04_VARIANCE: [Variance; 4] =
    [Variance::Down, Variance::Down, Variance::Down, Variance::Down];

fn check_riem04(t: &IndexedTensor) -> Result<(), CurvatureError> {
    if t.variance() != RIEM04_VARIANCE {
        return Err(CurvatureError::Tensor(TensorError::ShapeMismatch {
            left: t.variance().to_vec(),
            right: RIEM04_VARIANCE.to_vec(),
        }));
    }
    Ok(())
}

/// The bivector B_(ijkl) = g_(ik)g_(jl) − g_(il)g_(jk), normalized so a
/// constant-curvature space has R_(ijkl) = K·B_(ijkl).
fn bivector(g: &IndexedTensor, idx: &[usize]) -> Expression {
    let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
    &(g.at(&[i, k]) * g.at(&[j, l])) - &(g.at(&[i, l]) * g.at(&[j, k]))
}

/// Concircular curvature tensor (Riemann minus the scalar-curvature multiple
/// of the metric bivector). Needs n >= 2; equals Riemann when the scalar
/// curvature vanishes.
pub fn concircular(
    m: &MetricStructure,
    riem04: &IndexedTensor,
    scalar: &Expression,
) -> Result<IndexedTensor, CurvatureError> {
    let n = m.dim();
    if n < 2 {
        return Err(CurvatureError::DimensionTooSmall { need: 2, got: n });
    }
    check_riem04(riem04)?;
    let coeff = scalar
        .checked_div(&Expression::int((n * (n - 1)) as i64))
        .expect("nonzero integer");
    Ok(IndexedTensor::from_fn(&m.chart().clone(), &RIEM04_VARIANCE, |idx| {
        riem04.at(idx) - &(&coeff * &bivector(m.g(), idx))
    }))
}

/// Conharmonic curvature tensor. Needs n >= 3 for the 1/(n−2) factor.
pub fn conharmonic(
    m: &MetricStructure,
    riem04: &IndexedTensor,
    ric: &IndexedTensor,
) -> Result<IndexedTensor, CurvatureError> {
    let n = m.dim();
    if n < 3 {
        return Err(CurvatureError::DimensionTooSmall { need: 3, got: n });
    }
    check_riem04(riem04)?;
    let coeff = Expression::rational(1, (n - 2) as i64);
    let g = m.g();
    Ok(IndexedTensor::from_fn(&m.chart().clone(), &RIEM04_VARIANCE, |idx| {
        let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
        let bracket = &(&(g.at(&[i, k]) * ric.at(&[j, l])) + &(g.at(&[j, l]) * ric.at(&[i, k])))
            - &(&(g.at(&[i, l]) * ric.at(&[j, k])) + &(g.at(&[j, k]) * ric.at(&[i, l])));
        riem04.at(idx) - &(&coeff * &bracket)
    }))
}

/// Weyl conformal tensor. Needs n >= 3.
pub fn weyl(
    m: &MetricStructure,
    riem04: &IndexedTensor,
    ric: &IndexedTensor,
    scalar: &Expression,
) -> Result<IndexedTensor, CurvatureError> {
    let n = m.dim();
    if n < 3 {
        return Err(CurvatureError::DimensionTooSmall { need: 3, got: n });
    }
    let l = conharmonic(m, riem04, ric)?;
    let coeff = scalar
        .checked_div(&Expression::int(((n - 1) * (n - 2)) as i64))
        .expect("nonzero integer");
    Ok(IndexedTensor::from_fn(&m.chart().clone(), &RIEM04_VARIANCE, |idx| {
        l.at(idx) + &(&coeff * &bivector(m.g(), idx))
    }))
}

/// Verdict on the linear relation (W − L) + n/(n−2)·(C − R) = 0.
pub fn check_linear_relation(
    c: &IndexedTensor,
    l: &IndexedTensor,
    w: &IndexedTensor,
    riem04: &IndexedTensor,
    params: &ZeroParams,
) -> Result<ZeroVerdict, CurvatureError> {
    let n = c.chart().dim();
    if n < 3 {
        return Err(CurvatureError::DimensionTooSmall { need: 3, got: n });
    }
    for t in [c, l, w, riem04] {
        check_riem04(t)?;
    }
    let ratio = Expression::rational(n as i64, (n - 2) as i64);
    let residual = w.sub(l)?.add(&c.sub(riem04)?.scale(&ratio))?;
    Ok(residual.zero_verdict(params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Verdict;
    use crate::geometry::{curvature_data, RicciConvention};
    use crate::testutil::{schwarzschild, sphere3_einstein, sphere_stereographic};
    use crate::tensor::Chart;

    #[test]
    fn flat_metric_gives_zero_tensors() {
        let m = crate::testutil::metric_from_entries(
            &["x1", "x2", "x3"],
            &[(1, 1, "1"), (2, 2, "1"), (3, 3, "1")],
        );
        let data = curvature_data(&m, RicciConvention::Standard).unwrap();
        let c = concircular(&m, &data.riemann04, &data.scalar).unwrap();
        let l = conharmonic(&m, &data.riemann04, &data.ricci).unwrap();
        let w = weyl(&m, &data.riemann04, &data.ricci, &data.scalar).unwrap();
        assert!(c.is_canonical_zero());
        assert!(l.is_canonical_zero());
        assert!(w.is_canonical_zero());
        let verdict =
            check_linear_relation(&c, &l, &w, &data.riemann04, &ZeroParams::default()).unwrap();
        assert_eq!(verdict.verdict, Verdict::Zero);
    }

    #[test]
    fn concircular_vanishes_on_constant_curvature() {
        for m in [sphere_stereographic(), sphere3_einstein()] {
            let data = curvature_data(&m, RicciConvention::Standard).unwrap();
            let c = concircular(&m, &data.riemann04, &data.scalar).unwrap();
            assert!(c.is_canonical_zero());
        }
    }

    #[test]
    fn weyl_vanishes_on_constant_curvature() {
        let m = sphere3_einstein();
        let data = curvature_data(&m, RicciConvention::Standard).unwrap();
        let w = weyl(&m, &data.riemann04, &data.ricci, &data.scalar).unwrap();
        assert!(w.is_canonical_zero());
    }

    #[test]
    fn ricci_flat_input_gives_conharmonic_equal_riemann() {
        // Schwarzschild is Ricci-flat, so the conharmonic correction term
        // vanishes and L = R; with scalar 0, also W = L.
        let m = schwarzschild();
        let data = curvature_data(&m, RicciConvention::Standard).unwrap();
        assert!(data.ricci.is_canonical_zero());
        assert!(data.scalar.is_canonical_zero());
        let l = conharmonic(&m, &data.riemann04, &data.ricci).unwrap();
        assert_eq!(l, data.riemann04);
        let w = weyl(&m, &data.riemann04, &data.ricci, &data.scalar).unwrap();
        assert_eq!(w, l);
        assert!(!data.riemann04.is_canonical_zero(), "Schwarzschild is curved");
    }

    #[test]
    fn scalar_flat_makes_concircular_equal_riemann() {
        let m = schwarzschild();
        let data = curvature_data(&m, RicciConvention::Standard).unwrap();
        let c = concircular(&m, &data.riemann04, &data.scalar).unwrap();
        assert_eq!(c, data.riemann04);
    }

    #[test]
    fn dimension_two_rejected() {
        let m = sphere_stereographic();
        let data = curvature_data(&m, RicciConvention::Standard).unwrap();
        assert!(matches!(
            conharmonic(&m, &data.riemann04, &data.ricci),
            Err(CurvatureError::DimensionTooSmall { need: 3, got: 2 })
        ));
        assert!(matches!(
            weyl(&m, &data.riemann04, &data.ricci, &data.scalar),
            Err(CurvatureError::DimensionTooSmall { need: 3, got: 2 })
        ));
    }

    #[test]
    fn linear_relation_holds_and_detects_perturbation() {
        let m = sphere3_einstein();
        let data = curvature_data(&m, RicciConvention::Standard).unwrap();
        let c = concircular(&m, &data.riemann04, &data.scalar).unwrap();
        let l = conharmonic(&m, &data.riemann04, &data.ricci).unwrap();
        let w = weyl(&m, &data.riemann04, &data.ricci, &data.scalar).unwrap();
        let zp = ZeroParams::default();
        let ok = check_linear_relation(&c, &l, &w, &data.riemann04, &zp).unwrap();
        assert_eq!(ok.verdict, Verdict::Zero);
        // Negative control: bump one Weyl component by 1.
        let chart: Chart = m.chart().clone();
        let perturbed = IndexedTensor::from_fn(&chart, w.variance(), |idx| {
            let v = w.at(idx).clone();
            if idx == [1, 2, 1, 2] {
                v + Expression::one()
            } else {
                v
            }
        });
        let bad = check_linear_relation(&c, &l, &perturbed, &data.riemann04, &zp).unwrap();
        assert_eq!(bad.verdict, Verdict::NonZero);
        let witness = bad.witness.unwrap();
        assert_eq!(witness.component, Some(vec![1, 2, 1, 2]));
    }

    #[test]
    fn antisymmetry_inherited_from_riemann() {
        let m = sphere3_einstein();
        let data = curvature_data(&m, RicciConvention::Standard).unwrap();
        let c = concircular(&m, &data.riemann04, &data.scalar).unwrap();
        let l = conharmonic(&m, &data.riemann04, &data.ricci).unwrap();
        c.check_antisymmetric(1, 2).unwrap();
        l.check_antisymmetric(1, 2).unwrap();
    }
}
