//! Derivative-free bounded maximization: a two-parameter Nelder-Mead on a
//! sigmoid-transformed box, and a golden-section line search.

/// Rectangular parameter box.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Box2 {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Box2 {
    fn to_unconstrained(self, theta: [f64; 2]) -> [f64; 2] {
        let mut t = [0.0; 2];
        for i in 0..2 {
            let span = self.hi[i] - self.lo[i];
            let frac = ((theta[i] - self.lo[i]) / span).clamp(1e-9, 1.0 - 1e-9);
            t[i] = (frac / (1.0 - frac)).ln();
        }
        t
    }

    fn to_box(self, t: [f64; 2]) -> [f64; 2] {
        let mut theta = [0.0; 2];
        for i in 0..2 {
            let sig = 1.0 / (1.0 + (-t[i]).exp());
            theta[i] = self.lo[i] + (self.hi[i] - self.lo[i]) * sig;
        }
        theta
    }
}

/// Maximize `f` over the box from several starts; returns the best point,
/// its value, and whether the winning run met the relative tolerance.
pub(crate) fn maximize_box_2d<F>(
    f: F,
    bounds: Box2,
    starts: &[[f64; 2]],
    rel_tol: f64,
    max_iter: usize,
) -> ([f64; 2], f64, bool)
where
    F: Fn([f64; 2]) -> f64,
{
    let mut best_theta = starts[0];
    let mut best_val = f64::NEG_INFINITY;
    let mut best_conv = false;
    for &start in starts {
        let (theta, val, conv) = nelder_mead_2d(&f, bounds, start, rel_tol, max_iter);
        if val > best_val {
            best_theta = theta;
            best_val = val;
            best_conv = conv;
        }
    }
    (best_theta, best_val, best_conv)
}

fn nelder_mead_2d<F>(
    f: &F,
    bounds: Box2,
    start: [f64; 2],
    rel_tol: f64,
    max_iter: usize,
) -> ([f64; 2], f64, bool)
where
    F: Fn([f64; 2]) -> f64,
{
    let eval = |t: [f64; 2]| f(bounds.to_box(t));
    let t0 = bounds.to_unconstrained(start);
    let mut simplex = [
        (t0, eval(t0)),
        ([t0[0] + 0.5, t0[1]], eval([t0[0] + 0.5, t0[1]])),
        ([t0[0], t0[1] + 0.5], eval([t0[0], t0[1] + 0.5])),
    ];

    let mut converged = false;
    for _ in 0..max_iter {
        // Descending by value: simplex[0] best, simplex[2] worst.
        simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
        let spread = simplex[0].1 - simplex[2].1;
        if spread.is_finite() && spread <= rel_tol * (simplex[0].1.abs() + 1e-10) {
            converged = true;
            break;
        }
        let centroid = [
            0.5 * (simplex[0].0[0] + simplex[1].0[0]),
            0.5 * (simplex[0].0[1] + simplex[1].0[1]),
        ];
        let worst = simplex[2];
        let reflect = [
            centroid[0] + (centroid[0] - worst.0[0]),
            centroid[1] + (centroid[1] - worst.0[1]),
        ];
        let fr = eval(reflect);
        if fr > simplex[0].1 {
            // Try to expand.
            let expand = [
                centroid[0] + 2.0 * (centroid[0] - worst.0[0]),
                centroid[1] + 2.0 * (centroid[1] - worst.0[1]),
            ];
            let fe = eval(expand);
            simplex[2] = if fe > fr { (expand, fe) } else { (reflect, fr) };
        } else if fr > simplex[1].1 {
            simplex[2] = (reflect, fr);
        } else {
            // Contract toward the centroid.
            let contract = [
                centroid[0] + 0.5 * (worst.0[0] - centroid[0]),
                centroid[1] + 0.5 * (worst.0[1] - centroid[1]),
            ];
            let fc = eval(contract);
            if fc > worst.1 {
                simplex[2] = (contract, fc);
            } else {
                // Shrink toward the best vertex.
                for k in 1..3 {
                    let shrunk = [
                        simplex[0].0[0] + 0.5 * (simplex[k].0[0] - simplex[0].0[0]),
                        simplex[0].0[1] + 0.5 * (simplex[k].0[1] - simplex[0].0[1]),
                    ];
                    simplex[k] = (shrunk, eval(shrunk));
                }
            }
        }
    }
    simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    (bounds.to_box(simplex[0].0), simplex[0].1, converged)
}

/// Golden-section maximization of a unimodal function on [lo, hi].
pub(crate) fn golden_max<F>(f: F, lo: f64, hi: f64, iters: usize) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-10 * (a.abs() + b.abs() + 1e-10) {
            break;
        }
    }
    let mid = 0.5 * (a + b);
    (mid, f(mid))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_quadratic_maximum_inside_box() {
        let f = |p: [f64; 2]| -((p[0] - 1.7).powi(2) + 3.0 * (p[1] - 0.4).powi(2));
        let bounds = Box2 {
            lo: [0.0, 0.0],
            hi: [5.0, 2.0],
        };
        let (arg, val, conv) =
            maximize_box_2d(f, bounds, &[[1.0, 1.0], [4.0, 0.1], [0.5, 1.9]], 1e-12, 500);
        assert!(conv);
        assert!((arg[0] - 1.7).abs() < 1e-4, "{arg:?}");
        assert!((arg[1] - 0.4).abs() < 1e-4, "{arg:?}");
        assert!(val > -1e-7);
    }

    #[test]
    fn respects_bounds_when_maximum_outside() {
        let f = |p: [f64; 2]| p[0] + p[1];
        let bounds = Box2 {
            lo: [0.0, 0.0],
            hi: [1.0, 1.0],
        };
        let (arg, _, _) = maximize_box_2d(f, bounds, &[[0.5, 0.5]], 1e-10, 500);
        assert!(arg[0] <= 1.0 && arg[1] <= 1.0);
        assert!(arg[0] > 0.99 && arg[1] > 0.99);
    }

    #[test]
    fn golden_section_finds_peak() {
        let (x, v) = golden_max(|x| -(x - 2.3f64).powi(2), 0.0, 10.0, 200);
        assert!((x - 2.3).abs() < 1e-6);
        assert!(v > -1e-10);
    }
}
