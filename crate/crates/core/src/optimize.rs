//! Derivative-free scalar minimisation.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a minimum of `f` on `[lo, hi]`, stopping once
/// the bracket is narrower than `tol`. Returns `(x_min, f(x_min))`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    // the bracket shrinks by 1/φ per step; cap iterations against tol = 0
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    let fm = f(mid);
    [(x1, f1), (x2, f2), (mid, fm)]
        .into_iter()
        .fold((mid, fm), |best, cand| if cand.1 < best.1 { cand } else { best })
}

/// Minimises `f` on `[lo, hi]` by first scanning `grid` evenly spaced points
/// and then running golden-section inside the cell pair around the best
/// grid point. Guards against a golden-section run locking onto a shallow
/// local minimum when the objective is not unimodal over the whole range.
pub fn grid_then_golden_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, grid: usize, tol: f64) -> (f64, f64) {
    let grid = grid.max(3);
    let step = (hi - lo) / (grid - 1) as f64;
    let (best_idx, _) =
        (0..grid)
            .map(|i| (i, f(lo + step * i as f64)))
            .fold(
                (0, f64::INFINITY),
                |best, cand| if cand.1 < best.1 { cand } else { best },
            );
    let a = lo + step * best_idx.saturating_sub(1) as f64;
    let b = (lo + step * (best_idx + 1) as f64).min(hi);
    golden_section_min(f, a, b, tol)
}
