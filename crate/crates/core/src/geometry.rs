//! Random structure generation and symmetry-reduced structural alignment.
//!
//! The similarity S between two structures is the RMS site mismatch
//! minimized over relabelings of the intermediate sites, rotations about
//! the input-output axis and a mirror reflection. Both structures are first
//! brought to a canonical frame (input at the origin, input-output diagonal
//! on the +z axis); the remaining rotation freedom about z is solved in
//! closed form per candidate permutation, which turns the three-level
//! minimization into an exhaustive scan over (n-2)! * 2 candidates.

use crate::error::{CoreError, Result};
use crate::structure::{
    add, cross, distance, dot, norm, scale, sub, Point, Structure, COINCIDENCE_FLOOR,
};
use itertools::Itertools;
use rand::Rng;
use std::collections::BTreeMap;

const REDRAW_CAP: usize = 10_000;

/// Draws a structure with `n - 2` intermediate sites i.i.d. uniform in the
/// unit cube. Draws violating the coincidence floor are rejected and
/// redrawn, so the result is valid by construction.
pub fn generate_structure(rng: &mut impl Rng, n: usize, id: u64) -> Result<Structure> {
    if n < 2 {
        return Err(CoreError::InvalidInput(format!(
            "need at least 2 sites, got {n}"
        )));
    }
    let output = [1.0, 1.0, 1.0];
    let mut coords: Vec<Point> = Vec::with_capacity(n);
    coords.push([0.0, 0.0, 0.0]);
    for _ in 0..n - 2 {
        let mut redraws = 0;
        loop {
            let p: Point = [rng.random(), rng.random(), rng.random()];
            let ok = distance(p, output) >= COINCIDENCE_FLOOR
                && coords.iter().all(|&q| distance(p, q) >= COINCIDENCE_FLOOR);
            if ok {
                coords.push(p);
                break;
            }
            redraws += 1;
            if redraws > REDRAW_CAP {
                return Err(CoreError::InvalidInput(
                    "distance-floor rejection loop exceeded".into(),
                ));
            }
        }
    }
    coords.push(output);
    Ok(Structure { id, coords })
}

/// Shifts sites by independent uniform draws from a cube of side `side`
/// centered on each original position. Displaced configurations violating
/// the coincidence floor are redrawn wholesale.
pub fn displace(s: &Structure, rng: &mut impl Rng, side: f64) -> Result<Structure> {
    displace_with(s, rng, side, true)
}

/// [`displace`] with control over whether the input/output sites move too.
pub fn displace_with(
    s: &Structure,
    rng: &mut impl Rng,
    side: f64,
    move_endpoints: bool,
) -> Result<Structure> {
    if side < 0.0 {
        return Err(CoreError::InvalidInput(format!(
            "displacement side must be nonnegative, got {side}"
        )));
    }
    let n = s.n();
    for _attempt in 0..REDRAW_CAP {
        let coords: Vec<Point> = s
            .coords
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                if !move_endpoints && (i == 0 || i == n - 1) {
                    return p;
                }
                let off: Point = [
                    side * (rng.random::<f64>() - 0.5),
                    side * (rng.random::<f64>() - 0.5),
                    side * (rng.random::<f64>() - 0.5),
                ];
                add(p, off)
            })
            .collect();
        let candidate = Structure::raw(s.id, coords);
        if candidate.check_distance_floor().is_ok() {
            return Ok(candidate);
        }
    }
    Err(CoreError::InvalidInput(
        "displacement rejection loop exceeded".into(),
    ))
}

type Mat3 = [[f64; 3]; 3];

fn mat_apply(m: &Mat3, p: Point) -> Point {
    [
        m[0][0] * p[0] + m[0][1] * p[1] + m[0][2] * p[2],
        m[1][0] * p[0] + m[1][1] * p[1] + m[1][2] * p[2],
        m[2][0] * p[0] + m[2][1] * p[1] + m[2][2] * p[2],
    ]
}

fn mat_transpose(m: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            t[j][i] = *v;
        }
    }
    t
}

/// Rotation taking the (translated) in-out direction onto +z.
fn canonical_rotation(s: &Structure) -> Mat3 {
    let identity: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let d = sub(s.output(), s.input());
    let dn = norm(d);
    if dn == 0.0 {
        return identity;
    }
    let dir = scale(d, 1.0 / dn);
    let z = [0.0, 0.0, 1.0];
    let axis = cross(dir, z);
    let sin_phi = norm(axis);
    let cos_phi = dot(dir, z);
    if sin_phi < 1e-15 {
        if cos_phi > 0.0 {
            identity
        } else {
            // Antiparallel: half turn about x.
            [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]]
        }
    } else {
        let a = scale(axis, 1.0 / sin_phi);
        // Rodrigues formula, one row per output component.
        let mut m = [[0.0; 3]; 3];
        for (col, e) in [
            [1.0, 0.0, 0.0] as Point,
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ]
        .iter()
        .enumerate()
        {
            let r = add(
                add(scale(*e, cos_phi), scale(cross(a, *e), sin_phi)),
                scale(a, dot(a, *e) * (1.0 - cos_phi)),
            );
            m[0][col] = r[0];
            m[1][col] = r[1];
            m[2][col] = r[2];
        }
        m
    }
}

/// Rigidly moves a structure to the canonical frame: input at the origin,
/// input-output diagonal along +z. Pairwise distances are preserved.
pub fn canonical_frame(s: &Structure) -> Structure {
    let origin = s.input();
    let rot = canonical_rotation(s);
    let coords = s
        .coords
        .iter()
        .map(|&p| mat_apply(&rot, sub(p, origin)))
        .collect();
    Structure::raw(s.id, coords)
}

fn rotate_xy(p: Point, theta: f64) -> Point {
    let (sin, cos) = theta.sin_cos();
    [cos * p[0] - sin * p[1], sin * p[0] + cos * p[1], p[2]]
}

fn mirror_y(p: Point) -> Point {
    [p[0], -p[1], p[2]]
}

/// Angle of the rotation about the axis minimizing the planar mismatch
/// `sum_i |R(theta) b_i - a_i|^2` for index-matched point lists, in
/// `[0, 2*pi)`. Returns 0 when the configuration is rotationally
/// degenerate (all points on the axis).
pub fn optimal_rotation(planar_a: &[[f64; 2]], planar_b: &[[f64; 2]]) -> f64 {
    let mut cross_sum = 0.0;
    let mut dot_sum = 0.0;
    for (a, b) in planar_a.iter().zip(planar_b) {
        cross_sum += a[1] * b[0] - a[0] * b[1];
        dot_sum += a[0] * b[0] + a[1] * b[1];
    }
    if cross_sum == 0.0 && dot_sum == 0.0 {
        return 0.0;
    }
    let theta = cross_sum.atan2(dot_sum);
    if theta < 0.0 {
        theta + 2.0 * std::f64::consts::PI
    } else {
        theta
    }
}

/// The symmetry operation aligning one structure onto another: a relabeling
/// of the intermediate sites, an optional mirror reflection (y -> -y in the
/// canonical frame, applied first) and a rotation about the in-out axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentTransform {
    /// Full-length site map: aligned site `i` comes from source site
    /// `permutation[i]`. Fixes 0 and `n - 1`.
    pub permutation: Vec<usize>,
    /// Rotation angle about the in-out axis, in `[0, 2*pi)`.
    pub angle: f64,
    pub mirror: bool,
}

impl AlignmentTransform {
    pub fn identity(n: usize) -> Self {
        AlignmentTransform {
            permutation: (0..n).collect(),
            angle: 0.0,
            mirror: false,
        }
    }
}

/// Minimized similarity between two structures plus the transform
/// achieving it.
#[derive(Debug, Clone)]
pub struct SimilarityResult {
    /// RMS site mismatch, in units of r0.
    pub s: f64,
    pub transform: AlignmentTransform,
}

/// Moves `b` to the canonical frame and applies an alignment transform to
/// it. Feeding the transform from [`similarity`]`(a, b)` yields the copy of
/// `b` that matches `canonical_frame(a)` site by site.
pub fn apply_alignment(b: &Structure, t: &AlignmentTransform) -> Structure {
    let cb = canonical_frame(b);
    let coords = t
        .permutation
        .iter()
        .map(|&src| {
            let mut p = cb.coords[src];
            if t.mirror {
                p = mirror_y(p);
            }
            rotate_xy(p, t.angle)
        })
        .collect();
    Structure::raw(b.id, coords)
}

/// Similarity S of Eq-style RMS mismatch: exhaustive minimization over all
/// `(n-2)!` intermediate relabelings and both mirror states, with the
/// rotation about the in-out axis solved analytically per candidate.
pub fn similarity(a: &Structure, b: &Structure) -> Result<SimilarityResult> {
    let n = a.n();
    if n != b.n() {
        return Err(CoreError::SizeMismatch { a: n, b: b.n() });
    }
    let ca = canonical_frame(a);
    let cb = canonical_frame(b);
    let m = n - 2;

    let mut best_cost = f64::INFINITY;
    let mut best: Option<AlignmentTransform> = None;
    for mirror in [false, true] {
        let b_sites: Vec<Point> = if mirror {
            cb.coords.iter().map(|&p| mirror_y(p)).collect()
        } else {
            cb.coords.clone()
        };
        let perms: Box<dyn Iterator<Item = Vec<usize>>> = if m == 0 {
            Box::new(std::iter::once(Vec::new()))
        } else {
            Box::new((0..m).permutations(m))
        };
        for perm in perms {
            let mut full = Vec::with_capacity(n);
            full.push(0);
            full.extend(perm.iter().map(|&j| j + 1));
            full.push(n - 1);

            let planar_a: Vec<[f64; 2]> = ca.coords[1..n - 1]
                .iter()
                .map(|p| [p[0], p[1]])
                .collect();
            let planar_b: Vec<[f64; 2]> = full[1..n - 1]
                .iter()
                .map(|&src| [b_sites[src][0], b_sites[src][1]])
                .collect();
            let angle = optimal_rotation(&planar_a, &planar_b);

            let mut cost = 0.0;
            for (i, &src) in full.iter().enumerate() {
                let d = sub(rotate_xy(b_sites[src], angle), ca.coords[i]);
                cost += dot(d, d);
            }
            if cost < best_cost {
                best_cost = cost;
                best = Some(AlignmentTransform {
                    permutation: full,
                    angle,
                    mirror,
                });
            }
        }
    }
    Ok(SimilarityResult {
        s: (best_cost / n as f64).max(0.0).sqrt(),
        transform: best.expect("at least one candidate"),
    })
}

/// Aligns every member of a cluster onto its most connected structure and
/// denoises by averaging each aligned copy with two other aligned members
/// drawn at random. Outputs are mapped back to the reference's original
/// frame. Clusters with fewer than three members skip the averaging step.
pub fn superpose_cluster(
    members: &[Structure],
    degrees: &BTreeMap<u64, usize>,
    rng: &mut impl Rng,
) -> Result<Vec<Structure>> {
    if members.is_empty() {
        return Err(CoreError::InvalidInput("empty cluster".into()));
    }
    let n = members[0].n();
    for m in members {
        if m.n() != n {
            return Err(CoreError::SizeMismatch { a: n, b: m.n() });
        }
        if !degrees.contains_key(&m.id) {
            return Err(CoreError::InvalidInput(format!(
                "degree map does not cover structure {}",
                m.id
            )));
        }
    }

    let mut ref_idx = 0;
    for (i, m) in members.iter().enumerate() {
        let (deg, best_deg) = (degrees[&m.id], degrees[&members[ref_idx].id]);
        if deg > best_deg || (deg == best_deg && m.id < members[ref_idx].id) {
            ref_idx = i;
        }
    }
    let reference = &members[ref_idx];

    let aligned: Vec<Structure> = members
        .iter()
        .map(|m| {
            let t = similarity(reference, m)?.transform;
            Ok(apply_alignment(m, &t))
        })
        .collect::<Result<_>>()?;

    // Map back from the reference's canonical frame to its original frame.
    let back_rot = mat_transpose(&canonical_rotation(reference));
    let back_origin = reference.input();
    let restore =
        |p: Point| -> Point { add(mat_apply(&back_rot, p), back_origin) };

    let k = members.len();
    let averaged: Vec<Structure> = if k < 3 {
        aligned
            .iter()
            .map(|s| Structure::raw(s.id, s.coords.iter().map(|&p| restore(p)).collect()))
            .collect()
    } else {
        (0..k)
            .map(|i| {
                let mut j = rng.random_range(0..k);
                while j == i {
                    j = rng.random_range(0..k);
                }
                let mut l = rng.random_range(0..k);
                while l == i || l == j {
                    l = rng.random_range(0..k);
                }
                let coords = (0..n)
                    .map(|site| {
                        let sum = add(
                            add(aligned[i].coords[site], aligned[j].coords[site]),
                            aligned[l].coords[site],
                        );
                        restore(scale(sum, 1.0 / 3.0))
                    })
                    .collect();
                Structure::raw(aligned[i].id, coords)
            })
            .collect()
    };
    Ok(averaged)
}
