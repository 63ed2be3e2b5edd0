use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::IntegrationControls;
use crate::shoot::{classify, Verdict};
use crate::system::ProblemParams;

/// Log-grid scan of the "escapes with no zero" verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessScan {
    pub grid: Vec<f64>,
    pub nodeless: Vec<bool>,
    /// Number of changes of the verdict along the grid.
    pub transitions: usize,
    /// Grid neighbours around the first transition.
    pub boundary: Option<(f64, f64)>,
}

/// Scans `points` log-spaced initial values on `[lo, hi]`. A unique ground
/// state shows as exactly one transition from "more than zero nodes" to
/// "escapes positive without a zero".
pub fn ground_state_transitions(
    p: &ProblemParams,
    c: &IntegrationControls,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<UniquenessScan> {
    if !(lo > 0.0 && lo < hi) || points < 2 {
        return Err(Error::InvalidParameter(format!(
            "need 0 < lo < hi and at least 2 points, got [{lo}, {hi}] with {points}"
        )));
    }
    let ratio = (hi / lo).ln() / (points - 1) as f64;
    let grid: Vec<f64> = (0..points).map(|k| lo * (ratio * k as f64).exp()).collect();
    let mut nodeless = Vec::with_capacity(points);
    for &u0 in &grid {
        let cl = classify(u0, p, c)?;
        nodeless.push(cl.nodes == 0 && cl.verdict == Verdict::EscapedPositive);
    }
    let mut transitions = 0;
    let mut boundary = None;
    for k in 1..points {
        if nodeless[k] != nodeless[k - 1] {
            transitions += 1;
            boundary.get_or_insert((grid[k - 1], grid[k]));
        }
    }
    Ok(UniquenessScan {
        grid,
        nodeless,
        transitions,
        boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_ranges() {
        let p = ProblemParams::new(2, 0.0).unwrap();
        let c = IntegrationControls::default();
        assert!(ground_state_transitions(&p, &c, 0.0, 1.0, 10).is_err());
        assert!(ground_state_transitions(&p, &c, 2.0, 1.0, 10).is_err());
        assert!(ground_state_transitions(&p, &c, 1.0, 2.0, 1).is_err());
    }

    #[test]
    fn grid_is_log_spaced_with_endpoints() {
        let p = ProblemParams::new(2, 0.0).unwrap();
        let c = IntegrationControls::default();
        let s = ground_state_transitions(&p, &c, 5.0, 20.0, 3).unwrap();
        assert!((s.grid[1] - 10.0).abs() < 1e-12);
        assert!((s.grid[2] - 20.0).abs() < 1e-12);
        assert_eq!(s.nodeless, vec![true; 3]);
        assert_eq!(s.transitions, 0);
        assert!(s.boundary.is_none());
    }
}
