//! Metric constructors shared by unit tests across modules.

use crate::expr::Expression;
use crate::geometry::{invert_metric, MetricStructure};
use crate::tensor::{Chart, IndexedTensor, Variance};

pub(crate) fn metric_from_entries(
    names: &[&str],
    entries: &[(usize, usize, &str)],
) -> MetricStructure {
    let chart = Chart::from_names(names).unwrap();
    let g = IndexedTensor::from_fn(&chart, &[Variance::Down, Variance::Down], |idx| {
        let (i, j) = (idx[0].min(idx[1]), idx[0].max(idx[1]));
        entries
            .iter()
            .find(|(a, b, _)| (*a, *b) == (i, j))
            .map(|(_, _, src)| Expression::parse(src).unwrap())
            .unwrap_or_else(Expression::zero)
    });
    invert_metric(&g).unwrap()
}

/// Poincaré upper half-plane, curvature −1.
pub(crate) fn hyperbolic_plane() -> MetricStructure {
    metric_from_entries(&["x", "y"], &[(1, 1, "1/y^2"), (2, 2, "1/y^2")])
}

/// Unit round 2-sphere in stereographic coordinates, curvature +1.
pub(crate) fn sphere_stereographic() -> MetricStructure {
    metric_from_entries(
        &["x", "y"],
        &[(1, 1, "4/(1 + x^2 + y^2)^2"), (2, 2, "4/(1 + x^2 + y^2)^2")],
    )
}

/// Round 3-sphere normalized so Ric = g (curvature 1/2), conformal chart.
pub(crate) fn sphere3_einstein() -> MetricStructure {
    let phi = "64/(8 + x1^2 + x2^2 + x3^2)^2";
    metric_from_entries(&["x1", "x2", "x3"], &[(1, 1, phi), (2, 2, phi), (3, 3, phi)])
}

/// Schwarzschild in rational coordinates: the polar angle is replaced by
/// u = cos(theta), so every component is a rational function of (r, u) with
/// the mass as a free constant symbol.
pub(crate) fn schwarzschild() -> MetricStructure {
    metric_from_entries(
        &["tau", "r", "u", "phi"],
        &[
            (1, 1, "(2*m - r)/r"),
            (2, 2, "r/(r - 2*m)"),
            (3, 3, "r^2/(1 - u^2)"),
            (4, 4, "r^2*(1 - u^2)"),
        ],
    )
}
