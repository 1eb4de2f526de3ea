use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How to build a [`ScaleSequence`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleKind {
    /// `b_j = b0 · q^j`, `j = 0..count`.
    Geometric { b0: f64, q: f64, count: usize },
    /// Strictly decreasing scales. The closing ratio sets the weight of the
    /// last scale; when absent the final ratio of the list is reused.
    Explicit {
        scales: Vec<f64>,
        closing_ratio: Option<f64>,
    },
}

/// Decreasing scales `b_j` with weights `ν_j = log(b_j / b_{j+1})`.
///
/// The sum over scales is infinite in the continuous setting; the last
/// weight uses a closing ratio and is flagged in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSequence {
    scales: Vec<f64>,
    nu: Vec<f64>,
}

impl ScaleSequence {
    /// Rebuilds a sequence from stored scales and weights without
    /// recomputing anything (keeps serialised bits intact).
    pub fn from_parts(scales: Vec<f64>, nu: Vec<f64>) -> Result<Self> {
        if scales.is_empty() || scales.len() != nu.len() {
            return Err(Error::config(
                "scales",
                "scales and weights must be nonempty and of equal length",
            ));
        }
        if scales.iter().any(|b| !(*b > 0.0) || !b.is_finite()) || nu.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::config("scales", "scales and weights must be positive"));
        }
        if scales.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(Error::config("scales", "scales must be strictly decreasing"));
        }
        Ok(ScaleSequence { scales, nu })
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    /// Ratios `b_j / b_{j+1}` including the closing ratio `exp(ν_last)`.
    pub fn ratios(&self) -> Vec<f64> {
        self.nu.iter().map(|v| v.exp()).collect()
    }

    /// Smallest ratio `δ̃`.
    pub fn delta_lo(&self) -> f64 {
        self.ratios().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Largest ratio `δ`.
    pub fn delta_hi(&self) -> f64 {
        self.ratios().into_iter().fold(0.0, f64::max)
    }

    /// True when the last weight comes from a closing ratio rather than an
    /// actual next scale (always, since the sequence is finite).
    pub fn closing_weight_used(&self) -> bool {
        true
    }

    /// A single scale cannot bracket anything; reports flag it.
    pub fn is_single(&self) -> bool {
        self.scales.len() == 1
    }
}

pub fn make_scales(kind: &ScaleKind) -> Result<ScaleSequence> {
    match kind {
        ScaleKind::Geometric { b0, q, count } => {
            if !(*b0 > 0.0) || !b0.is_finite() {
                return Err(Error::config("b0", format!("must be positive, got {b0}")));
            }
            if !(*q > 0.0 && *q < 1.0) {
                return Err(Error::config("q", format!("must lie in (0, 1), got {q}")));
            }
            if *count == 0 {
                return Err(Error::config("J", "at least one scale is required"));
            }
            let nu = -q.ln();
            let scales: Vec<f64> = (0..*count).map(|j| b0 * q.powi(j as i32)).collect();
            if scales.last().is_some_and(|b| !(*b > 0.0)) {
                return Err(Error::config("J", "scales underflow to zero"));
            }
            ScaleSequence::from_parts(scales, vec![nu; *count])
        }
        ScaleKind::Explicit { scales, closing_ratio } => {
            if scales.windows(2).any(|w| !(w[0] > w[1])) {
                return Err(Error::config("scales", "explicit scales must be strictly decreasing"));
            }
            let closing = match (closing_ratio, scales.len()) {
                (Some(r), _) => *r,
                (None, len) if len >= 2 => scales[len - 2] / scales[len - 1],
                _ => return Err(Error::config("scales", "a single explicit scale needs a closing ratio")),
            };
            if !(closing > 1.0) {
                return Err(Error::config("closing_ratio", "closing ratio must exceed 1"));
            }
            let mut nu: Vec<f64> = scales.windows(2).map(|w| (w[0] / w[1]).ln()).collect();
            nu.push(closing.ln());
            ScaleSequence::from_parts(scales.clone(), nu)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn geometric_scales() {
        let s = make_scales(&ScaleKind::Geometric {
            b0: 1.0,
            q: 0.9,
            count: 3,
        })
        .unwrap();
        assert_eq!(s.scales(), &[1.0, 0.9, 0.9 * 0.9]);
        assert_relative_eq!(s.nu()[0], 0.105_360_515_657_826_3, max_relative = 1e-14);
        assert!(s.nu().iter().all(|v| *v == s.nu()[0]));
        for r in s.ratios() {
            assert_relative_eq!(r, 1.0 / 0.9, max_relative = 1e-14);
        }
    }

    #[test]
    fn single_scale_is_flagged() {
        let s = make_scales(&ScaleKind::Geometric {
            b0: 2.0,
            q: 0.5,
            count: 1,
        })
        .unwrap();
        assert!(s.is_single());
        assert_relative_eq!(s.nu()[0], 2f64.ln());
    }

    #[test]
    fn explicit_scales() {
        let s = make_scales(&ScaleKind::Explicit {
            scales: vec![4.0, 2.0, 1.5],
            closing_ratio: None,
        })
        .unwrap();
        assert_relative_eq!(s.nu()[0], 2f64.ln());
        assert_relative_eq!(s.nu()[2], (2.0f64 / 1.5).ln());
        assert_relative_eq!(s.delta_hi(), 2.0);
        assert_relative_eq!(s.delta_lo(), 4.0 / 3.0, max_relative = 1e-14);
        assert!(make_scales(&ScaleKind::Explicit {
            scales: vec![1.0, 2.0],
            closing_ratio: None
        })
        .is_err());
        assert!(make_scales(&ScaleKind::Explicit {
            scales: vec![1.0],
            closing_ratio: None
        })
        .is_err());
        assert!(make_scales(&ScaleKind::Explicit {
            scales: vec![1.0],
            closing_ratio: Some(1.1)
        })
        .is_ok());
    }

    #[test]
    fn rejects_bad_geometric() {
        for q in [0.0, 1.0, 1.5] {
            assert!(matches!(
                make_scales(&ScaleKind::Geometric { b0: 1.0, q, count: 3 }),
                Err(Error::Config { field, .. }) if field == "q"
            ));
        }
        assert!(make_scales(&ScaleKind::Geometric {
            b0: 1.0,
            q: 0.9,
            count: 0
        })
        .is_err());
    }
}
