//! Points of `S(F_q)`, the permutation `phi` induces on them, and its cycles.

use std::collections::{BTreeMap, HashMap};
use std::thread;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{enumerate_projective_plane, FiniteField, ProjectivePlane, TableField};
use crate::fiber::{conjugate, describe_point, fiber_by_scan, fiber_size, solve_fiber};
use crate::surface::{FieldSurface, Side, SurfaceCoefficients, SurfacePoint};

/// Residue coordinates `[[x0, x1, x2], [y0, y1, y2]]` of a normalized point
/// over a prime field.
pub type ResiduePoint = [[u64; 3]; 2];

/// Position of a normalized triple in the canonical order of `P^2(F_q)`.
pub fn plane_index<F: FiniteField>(field: &F, v: &[F::Elem; 3]) -> u64 {
    let q = field.order();
    if !field.is_zero(&v[0]) {
        field.index_of(&v[1]) * q + field.index_of(&v[2])
    } else if !field.is_zero(&v[1]) {
        q * q + field.index_of(&v[2])
    } else {
        q * q + q
    }
}

fn point_key<F: FiniteField>(field: &F, pt: &SurfacePoint<F::Elem>) -> (u64, u64) {
    (plane_index(field, &pt.x), plane_index(field, &pt.y))
}

pub fn to_residues<F: FiniteField>(field: &F, pt: &SurfacePoint<F::Elem>) -> ResiduePoint {
    [
        pt.x.clone().map(|c| field.index_of(&c)),
        pt.y.clone().map(|c| field.index_of(&c)),
    ]
}

fn degenerate_at<F: FiniteField>(
    surface: &FieldSurface<'_, F>,
    a: &[F::Elem; 3],
    side: Side,
) -> Error {
    let f = surface.field();
    Error::DegenerateFiber {
        side,
        point: format!(
            "[{},{},{}]",
            f.format(&a[0]),
            f.format(&a[1]),
            f.format(&a[2])
        ),
    }
}

fn fiber_points<F: FiniteField>(
    surface: &FieldSurface<'_, F>,
    a: &[F::Elem; 3],
) -> Result<Vec<SurfacePoint<F::Elem>>> {
    if surface.field().characteristic() == 2 {
        if surface.is_degenerate_fiber(a, Side::X) {
            return Err(degenerate_at(surface, a, Side::X));
        }
        return Ok(fiber_by_scan(surface, a, Side::X));
    }
    let sol = solve_fiber(surface, a, Side::X)?;
    if sol.degenerate {
        return Err(degenerate_at(surface, a, Side::X));
    }
    Ok(sol.points)
}

/// All points of `S(F_q)`, sorted by their canonical `(x, y)` plane indices.
pub fn enumerate_points<F: FiniteField>(
    surface: &FieldSurface<'_, F>,
) -> Result<Vec<SurfacePoint<F::Elem>>>
where
    F::Elem: Send + Sync,
{
    enumerate_points_sharded(surface, 1)
}

pub fn enumerate_points_sharded<F: FiniteField>(
    surface: &FieldSurface<'_, F>,
    shards: usize,
) -> Result<Vec<SurfacePoint<F::Elem>>>
where
    F::Elem: Send + Sync,
{
    let f = surface.field();
    let parts = ProjectivePlane::shards(f, shards);
    let results: Vec<Result<Vec<SurfacePoint<F::Elem>>>> = if parts.len() == 1 {
        parts
            .into_iter()
            .map(|part| collect_shard(surface, part))
            .collect()
    } else {
        thread::scope(|scope| {
            let handles: Vec<_> = parts
                .into_iter()
                .map(|part| scope.spawn(move || collect_shard(surface, part)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect()
        })
    };
    let mut points = Vec::new();
    for r in results {
        points.extend(r?);
    }
    points.sort_by_key(|pt| point_key(f, pt));
    Ok(points)
}

fn collect_shard<F: FiniteField>(
    surface: &FieldSurface<'_, F>,
    part: ProjectivePlane<'_, F>,
) -> Result<Vec<SurfacePoint<F::Elem>>> {
    let mut out = Vec::new();
    for x in part {
        out.extend(fiber_points(surface, &x)?);
    }
    Ok(out)
}

/// `#S(F_q)` summed over the fibers of one projection, split across `shards`
/// threads. Points are never stored.
pub fn count_on_field<F: FiniteField>(
    surface: &FieldSurface<'_, F>,
    side: Side,
    shards: usize,
) -> Result<u64>
where
    F::Elem: Sync,
{
    let f = surface.field();
    let count_part = |part: ProjectivePlane<'_, F>| -> Result<u64> {
        let mut total = 0u64;
        if f.characteristic() == 2 {
            for a in part {
                if surface.is_degenerate_fiber(&a, side) {
                    return Err(degenerate_at(surface, &a, side));
                }
                total += fiber_by_scan(surface, &a, side).len() as u64;
            }
        } else {
            for a in part {
                total += fiber_size(surface, &a, side)?;
            }
        }
        Ok(total)
    };
    let parts = ProjectivePlane::shards(f, shards);
    if parts.len() == 1 {
        return parts.into_iter().map(count_part).sum();
    }
    thread::scope(|scope| {
        let handles: Vec<_> = parts
            .into_iter()
            .map(|part| scope.spawn(move || count_part(part)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .sum()
    })
}

/// `N_m = #S(F_{p^m})`.
pub fn count_points(coeffs: &SurfaceCoefficients, p: u64, m: u32, shards: usize) -> Result<u64> {
    let field = TableField::for_prime_power(p, m)?;
    count_on_field(&coeffs.over(&field), Side::X, shards)
}

/// First base point (in plane order) whose fiber on `side` is degenerate
/// modulo `p`, as residues. A surface whose reduction vanishes is reported
/// through [`SurfaceCoefficients::reduce_mod_p`].
pub fn find_degenerate_fiber(
    coeffs: &SurfaceCoefficients,
    p: u64,
    side: Side,
) -> Result<Option<[u64; 3]>> {
    let reduced = coeffs.reduce_mod_p(p)?;
    let field = TableField::for_prime_power(p, 1)?;
    let surface = reduced.over(&field);
    Ok(enumerate_projective_plane(&field)
        .find(|a| surface.is_degenerate_fiber(a, side))
        .map(|a| a.map(|c| field.index_of(&c))))
}

/// The permutation `phi` on `S(F_p)` and its cycle structure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleTable {
    pub prime: u64,
    /// Digest of the integer coefficients; see [`SurfaceCoefficients::digest`].
    pub surface_id: String,
    pub degenerate: bool,
    pub points: Vec<ResiduePoint>,
    pub phi_image: Vec<usize>,
    pub cycle_id: Vec<usize>,
    pub cycle_length: Vec<usize>,
}

impl CycleTable {
    fn degenerate(prime: u64, surface_id: String) -> Self {
        CycleTable {
            prime,
            surface_id,
            degenerate: true,
            points: Vec::new(),
            phi_image: Vec::new(),
            cycle_id: Vec::new(),
            cycle_length: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of a normalized residue point.
    pub fn find(&self, pt: &ResiduePoint) -> Option<usize> {
        self.points.iter().position(|p| p == pt)
    }

    /// Cycle length -> number of cycles of that length.
    pub fn spectrum(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for (i, &len) in self.cycle_length.iter().enumerate() {
            // count each cycle once, at its smallest member
            if self.cycle_id[i] == i {
                *out.entry(len).or_insert(0) += 1;
            }
        }
        out
    }

    /// Indices of the points in the cycle with the given id, in `phi` order.
    pub fn cycle(&self, id: usize) -> Vec<usize> {
        let mut out = vec![id];
        let mut cur = self.phi_image[id];
        while cur != id {
            out.push(cur);
            cur = self.phi_image[cur];
        }
        out
    }
}

/// Cycle decomposition of `phi` on `S(F_p)`.
///
/// A surface that reduces to something degenerate (a degenerate fiber on
/// either side, or a coefficient vector collapsing to zero) yields a table
/// with the `degenerate` flag set and no points.
pub fn cycle_decomposition(coeffs: &SurfaceCoefficients, p: u64) -> Result<CycleTable> {
    let id = coeffs.digest();
    let Ok(reduced) = coeffs.reduce_mod_p(p) else {
        return Ok(CycleTable::degenerate(p, id));
    };
    let field = TableField::for_prime_power(p, 1)?;
    let surface = reduced.over(&field);
    for a in enumerate_projective_plane(&field) {
        if surface.is_degenerate_fiber(&a, Side::X) || surface.is_degenerate_fiber(&a, Side::Y) {
            return Ok(CycleTable::degenerate(p, id));
        }
    }
    let points = match enumerate_points_sharded(&surface, 1) {
        Ok(pts) => pts,
        Err(Error::DegenerateFiber { .. }) => return Ok(CycleTable::degenerate(p, id)),
        Err(e) => return Err(e),
    };
    let index: HashMap<&SurfacePoint<u32>, usize> =
        points.iter().enumerate().map(|(i, pt)| (pt, i)).collect();

    let image_of = |pt: &SurfacePoint<u32>| -> Result<SurfacePoint<u32>> {
        if p == 2 {
            let mid = conjugate_by_scan(&surface, pt, Side::Y)?;
            conjugate_by_scan(&surface, &mid, Side::X)
        } else {
            let mid = conjugate(&surface, pt, Side::Y)?;
            conjugate(&surface, &mid, Side::X)
        }
    };
    let mut phi_image = Vec::with_capacity(points.len());
    for pt in &points {
        let img = image_of(pt)?;
        let j = *index.get(&img).ok_or_else(|| {
            Error::Inconsistent(format!(
                "phi image {} not enumerated",
                describe_point(&field, &img)
            ))
        })?;
        phi_image.push(j);
    }

    let n = points.len();
    let mut cycle_id = vec![usize::MAX; n];
    let mut cycle_length = vec![0; n];
    for start in 0..n {
        if cycle_id[start] != usize::MAX {
            continue;
        }
        let mut members = vec![start];
        let mut cur = phi_image[start];
        while cur != start {
            if cycle_id[cur] != usize::MAX || members.len() > n {
                return Err(Error::Inconsistent(
                    "phi is not a permutation of S(F_p)".into(),
                ));
            }
            members.push(cur);
            cur = phi_image[cur];
        }
        for &m in &members {
            cycle_id[m] = start;
            cycle_length[m] = members.len();
        }
    }

    Ok(CycleTable {
        prime: p,
        surface_id: id,
        degenerate: false,
        points: points.iter().map(|pt| to_residues(&field, pt)).collect(),
        phi_image,
        cycle_id,
        cycle_length,
    })
}

/// The involution by exhaustive lookup in the scanned fiber.
fn conjugate_by_scan<F: FiniteField>(
    surface: &FieldSurface<'_, F>,
    pt: &SurfacePoint<F::Elem>,
    side: Side,
) -> Result<SurfacePoint<F::Elem>> {
    let fiber = fiber_by_scan(surface, pt.side(side), side);
    match fiber.as_slice() {
        [only] if only == pt => Ok(pt.clone()),
        [a, b] if a == pt => Ok(b.clone()),
        [a, b] if b == pt => Ok(a.clone()),
        _ => Err(Error::Inconsistent(format!(
            "fiber through {} has {} points",
            describe_point(surface.field(), pt),
            fiber.len()
        ))),
    }
}

/// Points whose `phi`-period divides `n`, with their periods.
pub fn points_with_period_dividing(table: &CycleTable, n: usize) -> Vec<(ResiduePoint, usize)> {
    table
        .points
        .iter()
        .zip(&table.cycle_length)
        .filter(|(_, &len)| n.is_multiple_of(len))
        .map(|(pt, &len)| (*pt, len))
        .collect()
}
