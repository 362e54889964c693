use std::cmp::Ordering;

use super::{ArrayOccupancy, Movement, Site};

fn order_kept(existing: (usize, usize), candidate: (usize, usize)) -> bool {
    let (e0, e1) = existing;
    let (c0, c1) = candidate;
    match c0.cmp(&e0) {
        Ordering::Less => c1 < e1,
        Ordering::Greater => c1 > e1,
        Ordering::Equal => c1 == e1,
    }
}

/// Whether a candidate row trajectory `(y_start, y_end)` keeps its order
/// relative to a committed one `(y0, y1)`.
pub fn row_rule_ok(existing: (usize, usize), candidate: (usize, usize)) -> bool {
    order_kept(existing, candidate)
}

/// Column analogue of [`row_rule_ok`].
pub fn col_rule_ok(existing: (usize, usize), candidate: (usize, usize)) -> bool {
    order_kept(existing, candidate)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Zone {
    /// No committed movement of the cycle touches this band.
    OrderFree,
    /// Movements whose span covers this band.
    OrderPreserving(Vec<Movement>),
}

impl Zone {
    pub fn is_free(&self) -> bool {
        matches!(self, Zone::OrderFree)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZoneMap {
    pub cycle: usize,
    pub columns: Vec<Zone>,
    pub rows: Vec<Zone>,
}

impl ZoneMap {
    /// True when every column and row the candidate spans is order-free.
    pub fn order_free_path(&self, from: Site, to: Site) -> bool {
        let (x0, x1) = (from.x.min(to.x), from.x.max(to.x));
        let (y0, y1) = (from.y.min(to.y), from.y.max(to.y));
        (x0..=x1).all(|x| self.columns.get(x).is_none_or(Zone::is_free))
            && (y0..=y1).all(|y| self.rows.get(y).is_none_or(Zone::is_free))
    }
}

/// Classifies every column and row band for cycle `k`.
///
/// A committed movement from `(x0, y0)` to `(x1, y1)` marks columns
/// `min(x0,x1)..=max(x0,x1)` and rows `min(y0,y1)..=max(y0,y1)`, including its
/// stationary axis: crossing that line would break the order rule too.
pub fn compute_zones(occ: &ArrayOccupancy, k: usize) -> ZoneMap {
    let mut columns = vec![Zone::OrderFree; occ.grid.x_sites];
    let mut rows = vec![Zone::OrderFree; occ.grid.y_sites];
    let mark = |zones: &mut Vec<Zone>, a: usize, b: usize, m: &Movement| {
        for z in zones.iter_mut().take(a.max(b) + 1).skip(a.min(b)) {
            match z {
                Zone::OrderFree => *z = Zone::OrderPreserving(vec![*m]),
                Zone::OrderPreserving(ms) => ms.push(*m),
            }
        }
    };
    for m in occ.movements(k) {
        mark(&mut columns, m.from.x, m.to.x, m);
        mark(&mut rows, m.from.y, m.to.y, m);
    }
    ZoneMap {
        cycle: k,
        columns,
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{Cycle, Exclusivity, ExecutionSequence, GridSpec};
    use proptest::prelude::*;

    #[test]
    fn rule_examples() {
        assert!(row_rule_ok((2, 4), (1, 3)));
        assert!(!row_rule_ok((2, 4), (1, 5)));
        assert!(row_rule_ok((2, 4), (2, 4)));
        assert!(col_rule_ok((3, 1), (4, 2)));
        assert!(!col_rule_ok((3, 1), (4, 0)));
        assert!(!col_rule_ok((3, 3), (3, 5)));
    }

    fn occupancy_with(moves: &[(Site, Site)], grid: GridSpec, k: usize) -> ArrayOccupancy {
        let mut occ = ArrayOccupancy::new(grid);
        let mut cycles: Vec<Cycle> = (0..=k)
            .map(|index| Cycle {
                index,
                ..Cycle::default()
            })
            .collect();
        cycles[k].movements = moves
            .iter()
            .enumerate()
            .map(|(i, &(from, to))| Movement {
                circuit: 0,
                cycle: k,
                index: i,
                qubit: i,
                from,
                to,
            })
            .collect();
        occ.committed.push(ExecutionSequence {
            circuit: 0,
            name: "committed".into(),
            num_qubits: moves.len(),
            initial: vec![],
            cycles,
            exclusivity: Exclusivity::Strengthened,
        });
        occ
    }

    #[test]
    fn blocked_crossing_lies_in_preserving_band() {
        // A committed atom moves from column 2 to column 3. A new atom in column
        // 1 that wants to reach column 4 would have to cross it.
        let occ = occupancy_with(&[(Site::new(2, 1), Site::new(3, 1))], GridSpec::new(6, 3), 1);
        let zones = compute_zones(&occ, 1);
        assert!(!col_rule_ok((2, 3), (1, 4)));
        assert!(!zones.order_free_path(Site::new(1, 0), Site::new(4, 0)));
        assert!(zones.columns[0].is_free() && zones.columns[4].is_free());
        assert!(!zones.rows[1].is_free());
        assert!(!zones.order_free_path(Site::new(0, 0), Site::new(0, 2)));
        assert!(!zones.order_free_path(Site::new(4, 0), Site::new(5, 2)));
        assert!(zones.order_free_path(Site::new(4, 2), Site::new(5, 2)));
        assert!(compute_zones(&occ, 0).columns.iter().all(Zone::is_free));
    }

    proptest! {
        #[test]
        fn order_free_paths_pass_every_rule(
            moves in prop::collection::vec(((0usize..6, 0usize..6), (0usize..6, 0usize..6)), 0..4),
            cand in ((0usize..6, 0usize..6), (0usize..6, 0usize..6)),
        ) {
            let moves: Vec<(Site, Site)> = moves
                .into_iter()
                .map(|((a, b), (c, d))| (Site::new(a, b), Site::new(c, d)))
                .collect();
            let occ = occupancy_with(&moves, GridSpec::new(6, 6), 1);
            let zones = compute_zones(&occ, 1);
            let (from, to) = (Site::new(cand.0 .0, cand.0 .1), Site::new(cand.1 .0, cand.1 .1));
            if zones.order_free_path(from, to) {
                for &(f, t) in &moves {
                    prop_assert!(col_rule_ok((f.x, t.x), (from.x, to.x)));
                    prop_assert!(row_rule_ok((f.y, t.y), (from.y, to.y)));
                }
            }
        }
    }
}
