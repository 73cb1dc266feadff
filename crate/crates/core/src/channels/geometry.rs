use std::fmt;

/// A position in normalized cell-radius units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeometryError {
    /// A distance was zero, negative or not finite.
    Distance { name: &'static str, value: f64 },
    /// Path-loss exponent below 2 or not finite.
    Exponent(f64),
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Distance { name, value } => {
                write!(f, "distance {name} = {value} must be positive and finite")
            }
            Self::Exponent(e) => write!(f, "path-loss exponent {e} must be at least 2"),
        }
    }
}

impl std::error::Error for GeometryError {}

/// Link distances of the two-way relaying cell.
///
/// `s`: BS1–PU1 (relay), `l`: SU1–PU1, `r`: PU4–PU1, `q`: PU4–BS1,
/// `z`: PU4–SU1, `d`: SU1–BS2 (the protected primary receiver).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioGeometry {
    s: f64,
    l: f64,
    r: f64,
    q: f64,
    z: f64,
    d: f64,
    epsilon: f64,
}

impl ScenarioGeometry {
    pub fn new(s: f64, l: f64, r: f64, q: f64, z: f64, d: f64, epsilon: f64) -> Result<Self, GeometryError> {
        for (name, value) in [("s", s), ("l", l), ("r", r), ("q", q), ("z", z), ("d", d)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(GeometryError::Distance { name, value });
            }
        }
        if !(epsilon >= 2.0 && epsilon.is_finite()) {
            return Err(GeometryError::Exponent(epsilon));
        }
        Ok(Self { s, l, r, q, z, d, epsilon })
    }

    /// Distances from node coordinates.
    pub fn from_positions(
        bs1: Point,
        bs2: Point,
        su1: Point,
        pu1: Point,
        pu4: Point,
        epsilon: f64,
    ) -> Result<Self, GeometryError> {
        Self::new(
            bs1.distance(pu1),
            su1.distance(pu1),
            pu4.distance(pu1),
            pu4.distance(bs1),
            pu4.distance(su1),
            su1.distance(bs2),
            epsilon,
        )
    }

    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn l(&self) -> f64 {
        self.l
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn z(&self) -> f64 {
        self.z
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Same distances with another path-loss exponent.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self, GeometryError> {
        Self::new(self.s, self.l, self.r, self.q, self.z, self.d, epsilon)
    }

    pub fn path_gains(&self) -> PathGains {
        let g = |x: f64| x.powf(-self.epsilon);
        PathGains { s: g(self.s), l: g(self.l), r: g(self.r), q: g(self.q), z: g(self.z), d: g(self.d) }
    }

    /// True when PU4 is equidistant from BS1 and the relay, which switches
    /// the interference-sum law to its repeated-rate form.
    pub fn equal_interferer_distances(&self) -> bool {
        self.q == self.r
    }
}

/// Distance-dependent power attenuations `x^{-ε}` for each link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGains {
    pub s: f64,
    pub l: f64,
    pub r: f64,
    pub q: f64,
    pub z: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedEtas {
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    pub eta4: f64,
    /// `1/(q^{-ε} - r^{-ε})`; absent when `q = r`.
    pub c1: Option<f64>,
}

pub fn derive_etas(geom: &ScenarioGeometry) -> DerivedEtas {
    let e = geom.epsilon;
    let pg = geom.path_gains();
    DerivedEtas {
        eta1: (geom.s / geom.q).powf(-e),
        eta2: (geom.l / geom.z).powf(-e),
        eta3: (geom.s / geom.r).powf(-e),
        eta4: (geom.d / geom.l).powf(-e),
        c1: if geom.equal_interferer_distances() { None } else { Some(1.0 / (pg.q - pg.r)) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_ratio_gives_unit_eta() {
        let g = ScenarioGeometry::new(1.0, 0.5, 2.0, 1.0, 0.5, 3.0, 3.0).unwrap();
        let etas = derive_etas(&g);
        assert_eq!(etas.eta1, 1.0);
        assert_eq!(etas.eta2, 1.0);
    }

    #[test]
    fn square_law_example() {
        let g = ScenarioGeometry::new(1.0, 1.0, 1.0, 0.5, 1.0, 1.0, 2.0).unwrap();
        assert!((derive_etas(&g).eta1 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn c1_absent_only_for_equal_distances() {
        let g = ScenarioGeometry::new(1.0, 1.0, 1.3, 1.3, 1.0, 1.0, 4.0).unwrap();
        assert!(derive_etas(&g).c1.is_none());
        let g = g.with_epsilon(3.0).unwrap();
        assert!(derive_etas(&g).c1.is_none());
        let g = ScenarioGeometry::new(1.0, 1.0, 1.3, 1.2, 1.0, 1.0, 4.0).unwrap();
        let c1 = derive_etas(&g).c1.unwrap();
        assert!((c1 - 1.0 / (1.2f64.powi(-4) - 1.3f64.powi(-4))).abs() < 1e-12 * c1.abs());
    }

    #[test]
    fn invalid_geometry_is_rejected() {
        assert!(matches!(
            ScenarioGeometry::new(0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 4.0),
            Err(GeometryError::Distance { name: "s", .. })
        ));
        assert!(matches!(
            ScenarioGeometry::new(1.0, 1.0, 1.0, 1.0, 1.0, f64::NAN, 4.0),
            Err(GeometryError::Distance { name: "d", .. })
        ));
        assert_eq!(ScenarioGeometry::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.5), Err(GeometryError::Exponent(1.5)));
    }

    #[test]
    fn distances_from_positions() {
        let g = ScenarioGeometry::from_positions(
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.75, 0.0),
            Point::new(1.2, 0.4 * 30f64.to_radians().cos()),
            4.0,
        )
        .unwrap();
        assert!((g.s() - 0.75).abs() < 1e-15);
        assert!((g.l() - 0.25).abs() < 1e-15);
        assert!((g.z() - 0.4).abs() < 1e-15);
        assert!((g.d() - 1.0).abs() < 1e-15);
        assert!((g.q() - 1.2490).abs() < 1e-3);
        assert!((g.r() - 0.5679).abs() < 1e-3);
    }
}
