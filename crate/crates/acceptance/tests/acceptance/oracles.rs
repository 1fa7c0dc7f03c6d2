//! Reference computations written without reference to the library code.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

/// SUS by table lookup: per-position contribution for each answer 1..=5.
pub fn sus_oracle(items: &[i64; 10]) -> f64 {
    const ODD: [i64; 6] = [0, 0, 1, 2, 3, 4];
    const EVEN: [i64; 6] = [0, 4, 3, 2, 1, 0];
    let mut total = 0i64;
    for (pos, &v) in items.iter().enumerate() {
        // Positions are 1-based in the questionnaire; index 0 is item 1 (odd).
        total += if pos % 2 == 0 { ODD[v as usize] } else { EVEN[v as usize] };
    }
    total as f64 * 2.5
}

/// One contact as the oracle sees it.
#[derive(Debug, Clone)]
pub struct Meeting {
    pub time: f64,
    pub a: String,
    pub b: String,
}

/// Depth-first search over journeys: sequences of meetings, in processing
/// order, each at or after `created`, consecutive meetings sharing the
/// current holder. The holder may skip any meeting.
pub fn temporally_reachable(meetings: &[Meeting], origin: &str, dest: &str, created: f64) -> bool {
    let mut order: Vec<&Meeting> = meetings.iter().collect();
    order.sort_by(|x, y| {
        x.time
            .partial_cmp(&y.time)
            .unwrap()
            .then_with(|| x.a.cmp(&y.a))
            .then_with(|| x.b.cmp(&y.b))
    });
    let start = order.iter().position(|m| m.time >= created).unwrap_or(order.len());
    let mut seen = HashSet::new();
    let mut stack = vec![(origin.to_string(), start)];
    while let Some((holder, from)) = stack.pop() {
        if holder == dest {
            return true;
        }
        if !seen.insert((holder.clone(), from)) {
            continue;
        }
        for (j, m) in order.iter().enumerate().skip(from) {
            let next = if m.a == holder {
                &m.b
            } else if m.b == holder {
                &m.a
            } else {
                continue;
            };
            stack.push((next.clone(), j + 1));
        }
    }
    false
}

pub fn diameter(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut adj: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for &(a, b) in edges {
        adj.entry(a).or_default().insert(b);
        adj.entry(b).or_default().insert(a);
    }
    let mut best = 0;
    for s in 0..n {
        let mut dist = vec![usize::MAX; n];
        dist[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &v in adj.get(&u).into_iter().flatten() {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    q.push_back(v);
                }
            }
        }
        best = best.max(dist.into_iter().max().unwrap());
    }
    best
}

pub fn sanity() {
    assert_eq!(sus_oracle(&[3; 10]), 50.0);
    assert_eq!(sus_oracle(&[5, 1, 5, 1, 5, 1, 5, 1, 5, 1]), 100.0);
    let m = |t: f64, a: &str, b: &str| Meeting { time: t, a: a.into(), b: b.into() };
    let relay = [m(10.0, "P", "R"), m(20.0, "C", "R")];
    assert!(temporally_reachable(&relay, "P", "C", 0.0));
    assert!(!temporally_reachable(&relay, "C", "P", 0.0));
    assert!(!temporally_reachable(&relay, "P", "C", 11.0));
    assert_eq!(diameter(3, &[(0, 1), (1, 2)]), 2);
}
