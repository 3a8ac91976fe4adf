//! Site arrangements and their invariants.

use crate::error::{CoreError, Result};

/// A site position, in units of the cube side r0.
pub type Point = [f64; 3];

/// Minimal allowed pairwise site distance. The dipolar coupling diverges at
/// zero separation; draws below the floor are rejected.
pub const COINCIDENCE_FLOOR: f64 = 1e-9;

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub(crate) fn scale(a: Point, c: f64) -> Point {
    [a[0] * c, a[1] * c, a[2] * c]
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn distance(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

/// An arrangement of `n` excitable sites. Site 0 is the input, site `n-1`
/// the output. Campaign structures live in the unit cube with the input at
/// the origin and the output at the opposite corner `(1,1,1)`; derived
/// structures (displaced copies, aligned superpositions, ablation remnants)
/// reuse the type without the box constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct Structure {
    pub id: u64,
    pub coords: Vec<Point>,
}

impl Structure {
    /// Builds a structure and checks the campaign invariants: corner sites
    /// exactly at `(0,0,0)` and `(1,1,1)`, intermediates inside the unit
    /// cube, all pairwise distances above [`COINCIDENCE_FLOOR`].
    pub fn new(id: u64, coords: Vec<Point>) -> Result<Self> {
        let s = Structure { id, coords };
        s.validate()?;
        Ok(s)
    }

    /// Builds a structure without validation.
    pub fn raw(id: u64, coords: Vec<Point>) -> Self {
        Structure { id, coords }
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn input(&self) -> Point {
        self.coords[0]
    }

    pub fn output(&self) -> Point {
        self.coords[self.coords.len() - 1]
    }

    /// Distance between the input and output sites.
    pub fn in_out_distance(&self) -> f64 {
        distance(self.input(), self.output())
    }

    /// Checks the campaign invariants (see [`Structure::new`]).
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n < 2 {
            return Err(CoreError::InvalidStructure(format!(
                "need at least 2 sites, got {n}"
            )));
        }
        if self.coords[0] != [0.0, 0.0, 0.0] {
            return Err(CoreError::InvalidStructure(format!(
                "input site must sit at the origin, found {:?}",
                self.coords[0]
            )));
        }
        if self.coords[n - 1] != [1.0, 1.0, 1.0] {
            return Err(CoreError::InvalidStructure(format!(
                "output site must sit at (1,1,1), found {:?}",
                self.coords[n - 1]
            )));
        }
        for (i, c) in self.coords.iter().enumerate().take(n - 1).skip(1) {
            if c.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(CoreError::InvalidStructure(format!(
                    "site {i} lies outside the unit cube: {c:?}"
                )));
            }
        }
        self.check_distance_floor()?;
        Ok(())
    }

    /// Errors if any pair of sites sits below the coincidence floor.
    pub fn check_distance_floor(&self) -> Result<()> {
        for i in 0..self.n() {
            for j in (i + 1)..self.n() {
                let d = distance(self.coords[i], self.coords[j]);
                if d < COINCIDENCE_FLOOR {
                    return Err(CoreError::CoincidentSites {
                        i,
                        j,
                        dist: d,
                        floor: COINCIDENCE_FLOOR,
                    });
                }
            }
        }
        Ok(())
    }
}
