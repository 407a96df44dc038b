//! Dense, index-based view of a problem for the search hot path.

use crate::model::{total_time, TouristProblem, RESTAURANT};

/// POIs occupy indices `0..n`; the three special locations follow.
#[derive(Debug, Clone)]
pub(crate) struct Indexed {
    pub n: usize,
    /// Location ids, `n + 3` entries: POIs, restaurant, start, final.
    pub ids: Vec<String>,
    /// Position of each location id in lexicographic order (tie-breaking).
    pub rank: Vec<u32>,
    pub value: Vec<u64>,
    pub dmin: Vec<u32>,
    pub dmax: Vec<u32>,
    pub open: Vec<u32>,
    pub close: Vec<u32>,
    /// Allowed durations per POI, ascending.
    pub grid: Vec<Vec<u32>>,
    travel: Vec<u32>,
    /// Cheapest arrival into each location from anywhere.
    pub min_in: Vec<u32>,
    /// Longest single travel leg between any two locations.
    pub max_edge: u32,
    pub t_start: u32,
    pub t_end: u32,
    pub total: u32,
    /// `(l_start, l_end)` when a lunch stop is required.
    pub lunch: Option<(u32, u32)>,
    pub vmax: u32,
    pub total_value: u64,
}

impl Indexed {
    pub fn rest(&self) -> usize {
        self.n
    }

    pub fn start(&self) -> usize {
        self.n + 1
    }

    pub fn fin(&self) -> usize {
        self.n + 2
    }

    pub fn lunch_len(&self) -> u32 {
        self.lunch.map_or(0, |(s, e)| e - s)
    }

    #[inline]
    pub fn tr(&self, from: usize, to: usize) -> u32 {
        self.travel[from * (self.n + 3) + to]
    }

    pub fn new(problem: &TouristProblem, grid_step: u32) -> Self {
        let route = problem.route();
        let n = problem.visits().len();
        let mut ids: Vec<String> = problem.visits().iter().map(|r| r.poi_id.clone()).collect();
        ids.push(RESTAURANT.to_string());
        ids.push(route.start_loc.clone());
        ids.push(route.final_loc.clone());

        let mut order: Vec<usize> = (0..n + 3).collect();
        order.sort_by(|&a, &b| ids[a].cmp(&ids[b]).then(a.cmp(&b)));
        let mut rank = vec![0u32; n + 3];
        for (pos, &i) in order.iter().enumerate() {
            rank[i] = pos as u32;
        }

        let recs = problem.visits();
        let hours: Vec<_> = recs.iter().map(|r| problem.hours_of(&r.poi_id).expect("validated problem")).collect();

        let m = n + 3;
        let lunch = route.lunch.map(|l| (l.l_start, l.l_end));
        let mut travel = vec![0u32; m * m];
        for a in 0..m {
            for b in 0..m {
                let uses_rest = a == n || b == n;
                if uses_rest && lunch.is_none() {
                    continue;
                }
                travel[a * m + b] = problem.travel().get(&ids[a], &ids[b]).expect("validated travel table");
            }
        }
        let min_in = (0..m)
            .map(|b| {
                (0..m)
                    .filter(|&a| a != b && (lunch.is_some() || a != n) && a != n + 2)
                    .map(|a| travel[a * m + b])
                    .min()
                    .unwrap_or(0)
            })
            .collect();

        let max_edge = travel.iter().copied().max().unwrap_or(0);
        Indexed {
            n,
            max_edge,
            rank,
            value: recs.iter().map(|r| u64::from(r.value)).collect(),
            dmin: recs.iter().map(|r| r.dmin).collect(),
            dmax: recs.iter().map(|r| r.dmax).collect(),
            open: hours.iter().map(|h| h.open).collect(),
            close: hours.iter().map(|h| h.close).collect(),
            grid: recs.iter().map(|r| super::duration_grid(r.dmin, r.dmax, grid_step)).collect(),
            travel,
            min_in,
            t_start: route.t_start,
            t_end: route.t_end,
            total: total_time(problem),
            lunch,
            vmax: problem.vmax(),
            total_value: problem.total_value(),
            ids,
        }
    }
}
