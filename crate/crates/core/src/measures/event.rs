use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::{AxisBox, Site};

/// How a constraint's box is matched against the configuration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Semantics {
    /// The event looks at the point set only: each box must contain a point,
    /// with distinct boxes served by distinct points. The `site` of a
    /// constraint is a nominal tag.
    #[default]
    Projected,
    /// The point carried by the named site must lie in the box.
    Labeled,
}

/// One box constraint of a cylinder event.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constraint {
    pub site: Site,
    pub region: AxisBox,
}

/// A finite cylinder event inside the window `K = [-M, M]^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderEvent {
    dim: usize,
    window: f64,
    semantics: Semantics,
    constraints: Vec<Constraint>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstraint {
    site: Vec<i64>,
    #[serde(rename = "box")]
    region: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvent {
    window: f64,
    #[serde(default)]
    semantics: Semantics,
    #[serde(default)]
    constraints: Vec<RawConstraint>,
    /// Only needed for events without constraints.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
}

impl CylinderEvent {
    /// The event with no constraints: every configuration belongs to it.
    pub fn unconstrained(dim: usize, window: f64) -> Result<Self> {
        Self::new(dim, window, Semantics::Projected, Vec::new())
    }

    pub fn new(dim: usize, window: f64, semantics: Semantics, constraints: Vec<Constraint>) -> Result<Self> {
        if dim == 0 || dim > crate::lattice::MAX_DIM {
            return Err(invalid(format!("event dimension {dim} out of range")));
        }
        if !(window > 0.0) || !window.is_finite() {
            return Err(invalid(format!("window half-width must be positive, got {window}")));
        }
        let k = AxisBox::centered(dim, window);
        for c in &constraints {
            c.site.check_dim(dim)?;
            if c.region.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.region.dim(),
                });
            }
            if !c.region.is_subset_of(&k) {
                return Err(invalid(format!(
                    "box {:?} of site {:?} leaves the window [-{window}, {window}]^{dim}",
                    c.region, c.site
                )));
            }
        }
        if semantics == Semantics::Labeled {
            for (i, a) in constraints.iter().enumerate() {
                if constraints[..i].iter().any(|b| b.site == a.site) {
                    return Err(invalid(format!("site {:?} constrained twice", a.site)));
                }
            }
        }
        Ok(Self {
            dim,
            window,
            semantics,
            constraints,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Half-width `M` of the window.
    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn window_box(&self) -> AxisBox {
        AxisBox::centered(self.dim, self.window)
    }

    pub fn semantics(&self) -> Semantics {
        self.semantics
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn has_empty_box(&self) -> bool {
        self.constraints.iter().any(|c| c.region.is_empty())
    }

    /// Checks that every constrained site lies in `T(K)`, i.e. that
    /// `J(z) = z + [-L, L]^d` meets the window.
    pub fn validate_for(&self, amplitude: f64) -> Result<()> {
        let reach = self.window + amplitude;
        for c in &self.constraints {
            if c.site.coords().iter().any(|&x| (x as f64).abs() > reach) {
                return Err(invalid(format!(
                    "site {:?} is outside T(K): J(z) misses [-{}, {}]^{} at L = {amplitude}",
                    c.site, self.window, self.window, self.dim
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawEvent = serde_json::from_str(text).map_err(|e| Error::EventFile(e.to_string()))?;
        let dim = match (raw.constraints.first(), raw.dim) {
            (Some(c), _) => c.site.len(),
            (None, Some(d)) => d,
            (None, None) => return Err(Error::EventFile("an event without constraints needs \"dim\"".into())),
        };
        let mut constraints = Vec::with_capacity(raw.constraints.len());
        for c in raw.constraints {
            let low: Vec<f64> = c.region.iter().map(|b| b[0]).collect();
            let high: Vec<f64> = c.region.iter().map(|b| b[1]).collect();
            constraints.push(Constraint {
                site: Site::new(&c.site)?,
                region: AxisBox::new(&low, &high)?,
            });
        }
        Self::new(dim, raw.window, raw.semantics, constraints)
    }

    fn to_raw(&self) -> RawEvent {
        RawEvent {
            window: self.window,
            semantics: self.semantics,
            constraints: self
                .constraints
                .iter()
                .map(|c| RawConstraint {
                    site: c.site.coords().to_vec(),
                    region: (0..self.dim).map(|i| [c.region.low()[i], c.region.high()[i]]).collect(),
                })
                .collect(),
            dim: self.constraints.is_empty().then_some(self.dim),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("event serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::EventFile(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

impl Serialize for CylinderEvent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_raw().serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let text = r#"{"window": 1.5, "semantics": "labeled",
            "constraints": [{"site": [1, 0], "box": [[0.5, 1.5], [-1, 0.25]]}]}"#;
        let e = CylinderEvent::from_json(text).unwrap();
        assert_eq!(e.dim(), 2);
        assert_eq!(e.semantics(), Semantics::Labeled);
        assert_eq!(e.constraints()[0].region.high(), &[1.5, 0.25]);
        assert_eq!(CylinderEvent::from_json(&e.to_json()).unwrap(), e);

        let u = CylinderEvent::unconstrained(3, 2.0).unwrap();
        assert_eq!(CylinderEvent::from_json(&u.to_json()).unwrap(), u);
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            r#"{"window": 1, "constraints": [{"site": [0, 0], "box": [[0, 2], [0, 1]]}]}"#,
            r#"{"window": 0, "dim": 2}"#,
            r#"{"window": 1}"#,
            r#"{"window": 1, "constraints": [{"site": [0], "box": [[0, 1], [0, 1]]}]}"#,
            r#"{"window": 1, "extra": 3, "dim": 1}"#,
            r#"{"window": 1, "semantics": "labeled", "constraints": [
                {"site": [0], "box": [[0, 1]]}, {"site": [0], "box": [[-1, 0]]}]}"#,
            "not json",
        ] {
            assert!(CylinderEvent::from_json(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn empty_box_is_allowed() {
        let e = CylinderEvent::from_json(r#"{"window": 1, "constraints": [{"site": [0], "box": [[0.5, 0.2]]}]}"#).unwrap();
        assert!(e.has_empty_box());
    }

    #[test]
    fn window_reach() {
        let e = CylinderEvent::from_json(r#"{"window": 1, "constraints": [{"site": [3, 0], "box": [[0, 1], [0, 1]]}]}"#).unwrap();
        assert!(e.validate_for(1.0).is_err());
        assert!(e.validate_for(2.0).is_ok());
    }
}
