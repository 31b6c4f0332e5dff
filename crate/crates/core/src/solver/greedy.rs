//! Marginal-efficiency greedy for fast, approximate assignment.
//!
//! Every core starts at `f_0`. Each step applies the single-core upgrade
//! with the highest Δf/Δp that still fits, until no upgrade fits. Candidate
//! upgrades live in a max-heap keyed on exact rational efficiency. Since the
//! remaining budget only shrinks, an upgrade that does not fit now never
//! will, and is dropped for good.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::Result;

use super::{Item, Method, SolveRequest, SolveResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Upgrade {
    gain: u64,
    cost: u64,
    class: usize,
    from: usize,
    to: usize,
}

impl Ord for Upgrade {
    fn cmp(&self, other: &Self) -> Ordering {
        // gain/cost vs other.gain/other.cost; a free upgrade beats any other.
        let lhs = self.gain as u128 * other.cost as u128;
        let rhs = other.gain as u128 * self.cost as u128;
        lhs.cmp(&rhs)
            .then(self.gain.cmp(&other.gain))
            .then(other.class.cmp(&self.class))
            .then(other.to.cmp(&self.to))
            .then(other.from.cmp(&self.from))
    }
}

impl PartialOrd for Upgrade {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Drops every item that some other item matches or beats on both frequency
/// and power. What remains ascends strictly in both.
fn undominated(items: &[Item]) -> Vec<usize> {
    let mut keep: Vec<usize> = Vec::new();
    let mut order: Vec<usize> = (0..items.len()).collect();
    // Highest value first; among equal values the cheapest first.
    order.sort_by(|&a, &b| {
        items[b]
            .value
            .cmp(&items[a].value)
            .then(items[a].cost.cmp(&items[b].cost))
    });
    let mut cheapest = u64::MAX;
    for j in order {
        if items[j].cost < cheapest {
            cheapest = items[j].cost;
            keep.push(j);
        }
    }
    keep.reverse();
    keep
}

pub fn solve_greedy(req: &SolveRequest<'_>) -> Result<SolveResult> {
    let inst = req.instance()?;
    let items = &inst.items;
    let frontier = undominated(items);
    let mut level = vec![0usize; inst.classes];
    let mut remaining = inst.capacity;
    let mut heap = BinaryHeap::new();

    let push_from = |heap: &mut BinaryHeap<Upgrade>, class: usize, from: usize| {
        for &to in &frontier {
            if items[to].value > items[from].value {
                heap.push(Upgrade {
                    gain: items[to].value - items[from].value,
                    cost: items[to].cost.saturating_sub(items[from].cost),
                    class,
                    from,
                    to,
                });
            }
        }
    };

    for class in 0..inst.classes {
        push_from(&mut heap, class, 0);
    }
    while let Some(up) = heap.pop() {
        if level[up.class] != up.from || up.cost > remaining {
            continue;
        }
        remaining -= up.cost;
        level[up.class] = up.to;
        push_from(&mut heap, up.class, up.to);
    }
    Ok(req.result(&level, Method::Greedy, false))
}
