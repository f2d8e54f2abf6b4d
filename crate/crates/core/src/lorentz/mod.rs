//! Curved-spacetime machinery: metric plug-ins, null geodesic integration,
//! Jacobi field propagation, conjugate point detection, canonical relation
//! diagnostics and the travel time linearization check.

pub mod conjugate;
pub mod geodesic;
pub mod jacobi;
pub mod metric;
pub mod relation;
pub mod traveltime;
pub mod vec4;

pub use conjugate::{detect_conjugate, ConjugatePoint, ConjugateReport, TOL_CONJ};
pub use geodesic::{shoot_null_geodesic, GeodesicRecord, DEFAULT_STEPS};
pub use jacobi::{propagate_jacobi, shoot_with_jacobi, FieldKind, JacobiBundle, JacobiField};
pub use metric::{chart_initial, LorentzMetric};
pub use relation::{canonical_relation_data, lightlike_statistic, RelationData};
pub use traveltime::{
    direction_seed, solve_arrival, travel_time_linearization_check, ArrivalTime, TravelTimeReport,
};

use crate::geometry::covector::{classify_quadratic, CausalClass, Covector};
use crate::error::{Error, Result};

/// Causal classification of a covector with respect to a metric: the sign of
/// `g⁻¹(c, c)`, which for product metrics is `-τ² + g'⁻¹(ξ, ξ)` at the base
/// point.
pub fn classify_in(c: &Covector, metric: &LorentzMetric) -> Result<CausalClass> {
    if c.is_zero() {
        return Err(Error::ZeroCovector);
    }
    let Some((t, x)) = c.base else {
        if matches!(metric, LorentzMetric::Minkowski { .. }) {
            return crate::geometry::covector::classify(c);
        }
        return Err(Error::MissingBasePoint);
    };
    let n = metric.n();
    let h = metric.spatial_metric_chart(t, &x[..n]);
    let mut hm = nalgebra::DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            hm[(i, j)] = h[i][j];
        }
    }
    let hinv = hm
        .try_inverse()
        .ok_or_else(|| Error::InvalidParam("degenerate spatial metric".into()))?;
    let mut q = -c.tau * c.tau;
    let mut scale = c.tau * c.tau;
    for i in 0..n {
        for j in 0..n {
            q += hinv[(i, j)] * c.xi[i] * c.xi[j];
        }
    }
    scale += c.xi[..n].iter().map(|v| v * v).sum::<f64>();
    Ok(classify_quadratic(q, scale))
}
