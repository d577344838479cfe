use super::MetricsError;

/// Whether `a` Pareto-dominates `b` (all objectives minimized).
pub fn pareto_dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// Exact dominated hypervolume of `front` with respect to `nadir`.
///
/// Supports one to three objectives. Every point must lie inside the box
/// spanned by the nadir point.
pub fn hypervolume(front: &[Vec<f64>], nadir: &[f64]) -> Result<f64, MetricsError> {
    let d = nadir.len();
    if !(1..=3).contains(&d) {
        return Err(MetricsError::UnsupportedArity(d));
    }
    for p in front {
        if p.len() != d {
            return Err(MetricsError::ArityMismatch {
                expected: d,
                found: p.len(),
            });
        }
        if p.iter().zip(nadir).any(|(x, r)| x > r || x.is_nan()) {
            return Err(MetricsError::OutsideNadir {
                point: p.clone(),
                nadir: nadir.to_vec(),
            });
        }
    }
    if front.is_empty() {
        return Ok(0.0);
    }
    Ok(match d {
        1 => nadir[0] - front.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min),
        2 => {
            let pts: Vec<(f64, f64)> = front.iter().map(|p| (p[0], p[1])).collect();
            hv2(pts, nadir[0], nadir[1])
        }
        _ => hv3(front, nadir),
    })
}

fn hv2(mut pts: Vec<(f64, f64)>, rx: f64, ry: f64) -> f64 {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut area = 0.0;
    let mut prev_y = ry;
    for (x, y) in pts {
        if y < prev_y {
            area += (rx - x) * (prev_y - y);
            prev_y = y;
        }
    }
    area
}

/// Slices along the third objective and sums 2-D areas times slab depth.
fn hv3(front: &[Vec<f64>], nadir: &[f64]) -> f64 {
    let mut pts: Vec<&Vec<f64>> = front.iter().collect();
    pts.sort_by(|a, b| a[2].total_cmp(&b[2]));
    let mut volume = 0.0;
    let mut active: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    let mut i = 0;
    while i < pts.len() {
        let z = pts[i][2];
        while i < pts.len() && pts[i][2] == z {
            active.push((pts[i][0], pts[i][1]));
            i += 1;
        }
        let next_z = if i < pts.len() { pts[i][2] } else { nadir[2] };
        volume += hv2(active.clone(), nadir[0], nadir[1]) * (next_z - z);
    }
    volume
}
