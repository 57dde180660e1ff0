//! Independent oracles and fixture builders shared by the integration and
//! acceptance suites. Every oracle here recomputes its quantity from first
//! principles (exhaustive enumeration or closed form) without touching the
//! implementation paths it checks.

#![allow(dead_code)]

use mapcd::map::{BoundaryType, ElementClass, Fov, LaneSegment, LocalMap, Point2, Polyline};

fn dist(a: Point2, b: Point2) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Discrete Fréchet distance by explicit enumeration of every monotone
/// coupling path through the index lattice. Exponential; fixtures only.
pub fn frechet_by_coupling_enumeration(p: &[Point2], q: &[Point2]) -> f64 {
    let (n, m) = (p.len(), q.len());
    let mut best = f64::INFINITY;
    // Depth-first walk over paths from (0,0) to (n-1,m-1) with steps
    // (+1,0), (0,+1), (+1,+1), carrying the running max distance.
    let mut stack = vec![(0usize, 0usize, dist(p[0], q[0]))];
    while let Some((i, j, max_d)) = stack.pop() {
        if max_d >= best {
            continue;
        }
        if i == n - 1 && j == m - 1 {
            best = best.min(max_d);
            continue;
        }
        let mut push = |ni: usize, nj: usize| {
            let d = dist(p[ni], q[nj]);
            stack.push((ni, nj, max_d.max(d)));
        };
        if i + 1 < n {
            push(i + 1, j);
        }
        if j + 1 < m {
            push(i, j + 1);
        }
        if i + 1 < n && j + 1 < m {
            push(i + 1, j + 1);
        }
    }
    best
}

/// Chamfer distance by exhaustive nearest-neighbor search.
pub fn chamfer_by_nearest_neighbor(a: &[Point2], b: &[Point2]) -> f64 {
    let directed = |from: &[Point2], to: &[Point2]| {
        let total: f64 = from
            .iter()
            .map(|p| to.iter().map(|q| dist(*p, *q)).fold(f64::INFINITY, f64::min))
            .sum();
        total / from.len() as f64
    };
    0.5 * (directed(a, b) + directed(b, a))
}

/// Minimum-cost maximal assignment by brute force over all permutations of
/// the padded square, returning the total finite cost and the
/// lexicographically smallest optimal (row, col) pair sequence.
pub fn assignment_by_permutations(
    rows: usize,
    cols: usize,
    cost: &dyn Fn(usize, usize) -> f64,
) -> (f64, Vec<(usize, usize)>) {
    let dim = rows.max(cols);
    let mut finite_sum = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let c = cost(i, j);
            if c.is_finite() {
                finite_sum += c;
            }
        }
    }
    let big = finite_sum + 1.0;
    let padded = |i: usize, j: usize| -> f64 {
        if i < rows && j < cols {
            let c = cost(i, j);
            if c.is_finite() {
                c
            } else {
                big
            }
        } else {
            big
        }
    };

    // Exact comparisons: intended for fixtures whose costs are exactly
    // representable (small grids), where equal-cost optima tie exactly.
    let mut best_total = f64::INFINITY;
    let mut best_pairs: Vec<(usize, usize)> = Vec::new();
    let mut perm: Vec<usize> = (0..dim).collect();
    permute(&mut perm, 0, &mut |perm| {
        let mut total = 0.0;
        for (i, &j) in perm.iter().enumerate() {
            total += padded(i, j);
        }
        let mut pairs: Vec<(usize, usize)> = perm
            .iter()
            .enumerate()
            .filter(|&(i, &j)| i < rows && j < cols && cost(i, j).is_finite())
            .map(|(i, &j)| (i, j))
            .collect();
        pairs.sort_unstable();
        if total < best_total || (total == best_total && pairs < best_pairs) {
            best_total = total;
            best_pairs = pairs;
        }
    });
    let finite_total = best_pairs.iter().map(|&(i, j)| cost(i, j)).sum();
    (finite_total, best_pairs)
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Analytic IoU of two axis-aligned rectangles given as (x0, y0, x1, y1).
pub fn rectangle_iou_analytic(a: [f64; 4], b: [f64; 4]) -> f64 {
    let overlap = |lo_a: f64, hi_a: f64, lo_b: f64, hi_b: f64| {
        (hi_a.min(hi_b) - lo_a.max(lo_b)).max(0.0)
    };
    let inter = overlap(a[0], a[2], b[0], b[2]) * overlap(a[1], a[3], b[1], b[3]);
    let area = |r: [f64; 4]| (r[2] - r[0]) * (r[3] - r[1]);
    let union = area(a) + area(b) - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Brute-force AP: re-sorts detections, re-runs the greedy matching with a
/// naive rescan, and integrates the PR curve by scanning every achieved
/// recall level for its best precision.
pub fn ap_by_pr_scan(
    detections: &[(f64, usize, usize)], // (score, frame, element order)
    distances: &dyn Fn(usize, usize, usize) -> f64, // (frame, det order, gt index)
    gt_counts: &[usize],
    threshold: f64,
) -> f64 {
    let gt_total: usize = gt_counts.iter().sum();
    if gt_total == 0 {
        panic!("oracle needs ground truth");
    }
    if detections.is_empty() {
        return 0.0;
    }
    let mut ranked: Vec<(f64, usize, usize)> = detections.to_vec();
    ranked.sort_by(|a, b| {
        b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
    });

    let mut consumed: Vec<Vec<bool>> = gt_counts.iter().map(|&n| vec![false; n]).collect();
    let mut hits = Vec::with_capacity(ranked.len());
    for &(_, frame, order) in &ranked {
        let mut best: Option<(f64, usize)> = None;
        for (gi, used) in consumed[frame].iter().enumerate() {
            if *used {
                continue;
            }
            let d = distances(frame, order, gi);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, gi));
            }
        }
        match best {
            Some((d, gi)) if d <= threshold => {
                consumed[frame][gi] = true;
                hits.push(true);
            }
            _ => hits.push(false),
        }
    }

    // Every operating point of the ranked list.
    let mut points = Vec::new(); // (recall, precision)
    let mut tp = 0usize;
    for (k, &hit) in hits.iter().enumerate() {
        if hit {
            tp += 1;
        }
        points.push((tp as f64 / gt_total as f64, tp as f64 / (k + 1) as f64));
    }
    // Integrate over distinct achieved recall levels with the best
    // precision at or beyond each level.
    let mut recalls: Vec<f64> = points.iter().map(|&(r, _)| r).collect();
    recalls.dedup();
    let mut ap = 0.0;
    let mut prev_r = 0.0;
    for &r in &recalls {
        if r <= prev_r {
            continue;
        }
        let best_p = points
            .iter()
            .filter(|&&(pr, _)| pr >= r)
            .map(|&(_, p)| p)
            .fold(0.0, f64::max);
        ap += (r - prev_r) * best_p;
        prev_r = r;
    }
    ap
}

/// Apply one rigid motion (rotation then translation) to a point list.
pub fn rigid_motion(points: &[Point2], angle: f64, tx: f64, ty: f64) -> Vec<Point2> {
    let (sin, cos) = angle.sin_cos();
    points
        .iter()
        .map(|p| Point2::new(p.x * cos - p.y * sin + tx, p.x * sin + p.y * cos + ty))
        .collect()
}

pub fn straight_polyline(y: f64, x0: f64, x1: f64, n: usize) -> Polyline {
    let pts = (0..n)
        .map(|i| Point2::new(x0 + (x1 - x0) * i as f64 / (n - 1) as f64, y))
        .collect();
    Polyline::new(pts).unwrap()
}

/// A straight lane with the given boundary offsets.
pub fn straight_lane(id: &str, x0: f64, x1: f64, y_right: f64, width: f64) -> LaneSegment {
    LaneSegment {
        id: id.into(),
        class: ElementClass::Lane,
        centerline: straight_polyline(y_right + width / 2.0, x0, x1, 10),
        left_boundary: straight_polyline(y_right + width, x0, x1, 10),
        right_boundary: straight_polyline(y_right, x0, x1, 10),
        left_type: BoundaryType::Dashed,
        right_type: BoundaryType::Solid,
        successors: vec![],
    }
}

/// An axis-aligned rectangular crossing spanning x in [x0, x1], y in
/// [y0, y0 + height].
pub fn rect_crossing(id: &str, x0: f64, x1: f64, y0: f64, height: f64) -> LaneSegment {
    let vertical = |x: f64| {
        let pts = (0..10)
            .map(|i| Point2::new(x, y0 + height * i as f64 / 9.0))
            .collect();
        Polyline::new(pts).unwrap()
    };
    LaneSegment {
        id: id.into(),
        class: ElementClass::PedestrianCrossing,
        centerline: vertical(0.5 * (x0 + x1)),
        left_boundary: vertical(x0),
        right_boundary: vertical(x1),
        left_type: BoundaryType::NonVisible,
        right_type: BoundaryType::NonVisible,
        successors: vec![],
    }
}

pub fn simple_world(frame_id: &str) -> LocalMap {
    LocalMap::new(
        frame_id,
        Fov::standard(),
        vec![
            straight_lane("lane_0", -20.0, 20.0, 0.0, 3.5),
            straight_lane("lane_1", -20.0, 20.0, 3.5, 3.5),
            rect_crossing("crossing_0", -2.0, 2.0, 0.0, 7.0),
        ],
    )
}
