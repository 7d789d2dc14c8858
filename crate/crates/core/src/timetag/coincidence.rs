use super::{CoincidenceTable, DriftModel, GatedOutcome};

/// Matched `(a index, b index)` pairs.
pub type Pairing = Vec<(usize, usize)>;

type EdgeKey = (u64, i64, i64, usize, usize);

fn edge(a: &[i64], b: &[i64], i: usize, j: usize) -> EdgeKey {
    let (ta, tb) = (a[i], b[j]);
    (ta.abs_diff(tb), ta.min(tb), ta.max(tb), i, j)
}

fn greedy(mut edges: Vec<EdgeKey>, used_a: &mut [bool], used_b: &mut [bool], out: &mut Pairing) {
    edges.sort_unstable();
    for (_, _, _, i, j) in edges {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            out.push((i, j));
        }
    }
}

/// Pair events of two ascending timestamp lists whose separation is at most
/// `window`. Pairs are accepted greedily in order of separation, then
/// earlier timestamp; each event is used at most once.
///
/// Candidates are confined to clusters of events separated by gaps of at
/// most `window`, so the cost is linear in stream length at sparse rates.
pub fn match_pairs(a: &[i64], b: &[i64], window: u64) -> Pairing {
    debug_assert!(a.windows(2).all(|w| w[0] <= w[1]) && b.windows(2).all(|w| w[0] <= w[1]));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut out = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        // grow one cluster from the earlier head
        let (i0, j0) = (i, j);
        let mut last = a[i].min(b[j]);
        loop {
            let next_a = a.get(i).copied();
            let next_b = b.get(j).copied();
            let t = match (next_a, next_b) {
                (Some(x), Some(y)) => x.min(y),
                (Some(x), None) => x,
                (None, Some(y)) => y,
                (None, None) => break,
            };
            if t.abs_diff(last) > window {
                break;
            }
            last = t;
            if next_a == Some(t) {
                i += 1;
            } else {
                j += 1;
            }
        }
        if i - i0 > 0 && j - j0 > 0 {
            let mut edges = Vec::new();
            for ii in i0..i {
                for jj in j0..j {
                    if a[ii].abs_diff(b[jj]) <= window {
                        edges.push(edge(a, b, ii, jj));
                    }
                }
            }
            greedy(edges, &mut used_a, &mut used_b, &mut out);
        }
    }
    out.sort_unstable();
    out
}

/// Quadratic reference implementation of [`match_pairs`].
pub fn brute_force_pairs(a: &[i64], b: &[i64], window: u64) -> Pairing {
    let mut edges = Vec::new();
    for i in 0..a.len() {
        for j in 0..b.len() {
            if a[i].abs_diff(b[j]) <= window {
                edges.push(edge(a, b, i, j));
            }
        }
    }
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut out = Vec::new();
    greedy(edges, &mut used_a, &mut used_b, &mut out);
    out.sort_unstable();
    out
}

/// `(time on A's clock, index)` per side.
type Keyed = Vec<(i64, usize)>;

fn prepare(gated_a: &[GatedOutcome], gated_b: &[GatedOutcome], drift: &DriftModel) -> (Keyed, Keyed) {
    let a: Vec<(i64, usize)> = gated_a
        .iter()
        .enumerate()
        .filter(|(_, g)| g.valid)
        .map(|(k, g)| (g.event.timestamp_ps as i64, k))
        .collect();
    let mut b: Vec<(i64, usize)> = gated_b
        .iter()
        .enumerate()
        .filter(|(_, g)| g.valid)
        .map(|(k, g)| (drift.to_a_time(g.event.timestamp_ps), k))
        .collect();
    b.sort_by_key(|&(t, _)| t);
    (a, b)
}

fn tabulate(
    gated_a: &[GatedOutcome],
    gated_b: &[GatedOutcome],
    a: &[(i64, usize)],
    b: &[(i64, usize)],
    pairs: &Pairing,
) -> CoincidenceTable {
    let mut table = CoincidenceTable::default();
    for &(i, j) in pairs {
        let ga = &gated_a[a[i].1];
        let gb = &gated_b[b[j].1];
        if let (Some(sa), Some(sb)) = (ga.setting, gb.setting) {
            table.add(sa, sb, ga.event.outcome.index(), gb.event.outcome.index(), 1);
        }
    }
    table
}

/// Coincidence table from valid gated outcomes, B mapped onto A's clock.
pub fn match_coincidences(
    gated_a: &[GatedOutcome],
    gated_b: &[GatedOutcome],
    window_ps: u64,
    drift: &DriftModel,
) -> CoincidenceTable {
    let (a, b) = prepare(gated_a, gated_b, drift);
    let ta: Vec<i64> = a.iter().map(|p| p.0).collect();
    let tb: Vec<i64> = b.iter().map(|p| p.0).collect();
    let pairs = match_pairs(&ta, &tb, window_ps);
    tabulate(gated_a, gated_b, &a, &b, &pairs)
}

/// [`match_coincidences`] through the quadratic matcher.
pub fn brute_force_coincidences(
    gated_a: &[GatedOutcome],
    gated_b: &[GatedOutcome],
    window_ps: u64,
    drift: &DriftModel,
) -> CoincidenceTable {
    let (a, b) = prepare(gated_a, gated_b, drift);
    let ta: Vec<i64> = a.iter().map(|p| p.0).collect();
    let tb: Vec<i64> = b.iter().map(|p| p.0).collect();
    let pairs = brute_force_pairs(&ta, &tb, window_ps);
    tabulate(gated_a, gated_b, &a, &b, &pairs)
}
