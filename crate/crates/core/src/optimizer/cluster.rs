//! Objective-space clustering and ranking of a population.

/// Min-max normalization per objective over the population; constant
/// objectives map to 0.
pub fn normalize(points: &[[f64; 3]], n: usize) -> Vec<[f64; 3]> {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for i in 0..n {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    points
        .iter()
        .map(|p| {
            let mut q = [0.0; 3];
            for i in 0..n {
                let r = hi[i] - lo[i];
                q[i] = if r > 0.0 { (p[i] - lo[i]) / r } else { 0.0 };
            }
            q
        })
        .collect()
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]) * (a[i] - b[i])).sum()
}

const KMEANS_ITERATIONS: usize = 10;

/// Balanced k-means: every cluster holds at most `ceil(n / k)` points.
/// Centers start from farthest-point seeding (first seed: the point with
/// the largest first coordinate); each round assigns point-center pairs
/// greedily by increasing distance under the capacity limit. Returns the
/// cluster of every point.
pub fn balanced_kmeans(points: &[[f64; 3]], k: usize) -> Vec<usize> {
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }
    let k = k.clamp(1, n);
    let capacity = n.div_ceil(k);

    let first = (0..n)
        .max_by(|&a, &b| points[a][0].total_cmp(&points[b][0]).then(b.cmp(&a)))
        .unwrap();
    let mut centers = vec![points[first]];
    while centers.len() < k {
        let next = (0..n)
            .max_by(|&a, &b| {
                let da = centers
                    .iter()
                    .map(|c| dist2(&points[a], c))
                    .fold(f64::INFINITY, f64::min);
                let db = centers
                    .iter()
                    .map(|c| dist2(&points[b], c))
                    .fold(f64::INFINITY, f64::min);
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .unwrap();
        centers.push(points[next]);
    }

    let mut assignment = vec![usize::MAX; n];
    for _ in 0..KMEANS_ITERATIONS {
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * k);
        for (i, p) in points.iter().enumerate() {
            for (c, center) in centers.iter().enumerate() {
                pairs.push((dist2(p, center), i, c));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut next = vec![usize::MAX; n];
        let mut fill = vec![0usize; k];
        for (_, i, c) in pairs {
            if next[i] == usize::MAX && fill[c] < capacity {
                next[i] = c;
                fill[c] += 1;
            }
        }
        let converged = next == assignment;
        assignment = next;
        if converged {
            break;
        }
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<&[f64; 3]> = (0..n)
                .filter(|&i| assignment[i] == c)
                .map(|i| &points[i])
                .collect();
            if members.is_empty() {
                continue;
            }
            let mut m = [0.0; 3];
            for p in &members {
                for d in 0..3 {
                    m[d] += p[d];
                }
            }
            *center = m.map(|x| x / members.len() as f64);
        }
    }
    assignment
}

/// Non-domination rank (0 = non-dominated) of each point over the first
/// `n` objectives.
pub fn nondomination_ranks(points: &[[f64; 3]], n: usize) -> Vec<usize> {
    let m = points.len();
    let dominates =
        |a: &[f64; 3], b: &[f64; 3]| (0..n).all(|i| a[i] <= b[i]) && (0..n).any(|i| a[i] < b[i]);
    let mut dominated_by = vec![0usize; m];
    let mut dominating: Vec<Vec<usize>> = vec![Vec::new(); m];
    for i in 0..m {
        for j in 0..m {
            if i != j && dominates(&points[i], &points[j]) {
                dominating[i].push(j);
                dominated_by[j] += 1;
            }
        }
    }
    let mut rank = vec![0usize; m];
    let mut front: Vec<usize> = (0..m).filter(|&i| dominated_by[i] == 0).collect();
    let mut r = 0;
    while !front.is_empty() {
        let mut next = Vec::new();
        for &i in &front {
            rank[i] = r;
            for &j in &dominating[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        r += 1;
        front = next;
    }
    rank
}

/// Indices of the best `ceil(fraction * len)` members of `members`, ordered
/// by non-domination rank, then by the sum of normalized objectives, then
/// by index.
pub fn truncation_select(
    normalized: &[[f64; 3]],
    members: &[usize],
    n: usize,
    fraction: f64,
) -> Vec<usize> {
    if members.is_empty() {
        return Vec::new();
    }
    let pts: Vec<[f64; 3]> = members.iter().map(|&i| normalized[i]).collect();
    let ranks = nondomination_ranks(&pts, n);
    let mut order: Vec<usize> = (0..members.len()).collect();
    let score = |i: usize| pts[i][..n].iter().sum::<f64>();
    order.sort_by(|&a, &b| {
        ranks[a]
            .cmp(&ranks[b])
            .then(score(a).total_cmp(&score(b)))
            .then(members[a].cmp(&members[b]))
    });
    let keep = ((fraction * members.len() as f64).ceil() as usize).clamp(1, members.len());
    order.into_iter().take(keep).map(|i| members[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalize_maps_to_unit_range() {
        let n = normalize(&[[1.0, 5.0, 0.0], [3.0, 5.0, 0.0], [2.0, 5.0, 0.0]], 3);
        assert_eq!(n[0], [0.0, 0.0, 0.0]);
        assert_eq!(n[1], [1.0, 0.0, 0.0]);
        assert_eq!(n[2], [0.5, 0.0, 0.0]);
    }

    #[test]
    fn ranks_of_layered_fronts() {
        let pts = [
            [0.0, 1.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [2.0, 2.0, 0.0],
        ];
        assert_eq!(nondomination_ranks(&pts, 2), vec![0, 0, 1, 2]);
    }

    #[test]
    fn well_separated_groups_are_found() {
        let mut pts = Vec::new();
        for g in 0..3 {
            for i in 0..4 {
                pts.push([g as f64 * 10.0 + i as f64 * 0.1, 0.0, 0.0]);
            }
        }
        let a = balanced_kmeans(&pts, 3);
        for g in 0..3 {
            let c = a[g * 4];
            assert!(a[g * 4..g * 4 + 4].iter().all(|&x| x == c));
        }
    }

    #[test]
    fn truncation_picks_best() {
        let pts = [
            [0.9, 0.9, 0.0],
            [0.0, 0.1, 0.0],
            [0.5, 0.5, 0.0],
            [0.1, 0.0, 0.0],
        ];
        let sel = truncation_select(&pts, &[0, 1, 2, 3], 2, 0.35);
        assert_eq!(sel.len(), 2);
        assert!(sel.contains(&1) && sel.contains(&3));
    }

    proptest! {
        #[test]
        fn clusters_are_balanced(
            pts in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64), 1..120),
            k in 1usize..8,
        ) {
            let pts: Vec<[f64; 3]> = pts.into_iter().map(|(a, b, c)| [a, b, c]).collect();
            let a = balanced_kmeans(&pts, k);
            let kk = k.min(pts.len());
            let cap = pts.len().div_ceil(kk);
            for c in 0..kk {
                prop_assert!(a.iter().filter(|&&x| x == c).count() <= cap);
            }
            prop_assert!(a.iter().all(|&x| x < kk));
        }
    }
}
