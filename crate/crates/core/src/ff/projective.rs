use std::ops::Range;

use super::FiniteField;

/// `q^2 + q + 1`.
pub fn plane_size(q: u64) -> u64 {
    q * q + q + 1
}

/// The point of `P^2(F_q)` at position `index` of the canonical order:
/// `(1, a, b)` for all `a, b`, then `(0, 1, a)`, then `(0, 0, 1)`.
pub fn projective_point<F: FiniteField>(field: &F, index: u64) -> [F::Elem; 3] {
    let q = field.order();
    let (zero, one) = (field.zero(), field.one());
    if index < q * q {
        [one, field.element(index / q), field.element(index % q)]
    } else if index < q * q + q {
        [zero, one, field.element(index - q * q)]
    } else {
        debug_assert_eq!(index, q * q + q);
        [zero.clone(), zero, one]
    }
}

/// Iterator over a contiguous index range of `P^2(F_q)`.
pub struct ProjectivePlane<'a, F> {
    field: &'a F,
    range: Range<u64>,
}

impl<'a, F: FiniteField> ProjectivePlane<'a, F> {
    pub fn range(field: &'a F, range: Range<u64>) -> Self {
        let end = range.end.min(plane_size(field.order()));
        ProjectivePlane {
            field,
            range: range.start.min(end)..end,
        }
    }

    /// Split `[0, q^2+q+1)` into `parts` contiguous ranges of nearly equal size.
    pub fn shards(field: &'a F, parts: usize) -> Vec<Self> {
        let total = plane_size(field.order());
        let parts = parts.max(1) as u64;
        (0..parts)
            .map(|i| Self::range(field, total * i / parts..total * (i + 1) / parts))
            .collect()
    }
}

impl<F: FiniteField> Iterator for ProjectivePlane<'_, F> {
    type Item = [F::Elem; 3];

    fn next(&mut self) -> Option<Self::Item> {
        let i = self.range.next()?;
        Some(projective_point(self.field, i))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.range.size_hint()
    }
}

pub fn enumerate_projective_plane<F: FiniteField>(field: &F) -> ProjectivePlane<'_, F> {
    ProjectivePlane::range(field, 0..plane_size(field.order()))
}
