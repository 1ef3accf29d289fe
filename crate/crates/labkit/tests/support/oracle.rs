//! Brute-force minimizer for the weighted log-space attenuation objective.
//! Uses no normal equations: nested grid scans refined by golden-section
//! search, relying only on convexity of the objective.

use belnet_labkit::AttenuationPoint;

#[allow(dead_code)]
pub struct GridFit {
    pub mu: f64,
    pub n0: f64,
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while (hi - lo).abs() > tol * (1.0 + c.abs()) {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = f(d);
        }
    }
    (lo + hi) / 2.0
}

/// Scans `steps` cells over `[lo, hi]` and refines around the best grid node.
fn grid_then_golden(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, steps: usize) -> f64 {
    let h = (hi - lo) / steps as f64;
    let best = (0..=steps).map(|i| lo + h * i as f64).min_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap();
    golden_min(f, best - h, best + h, 1e-14)
}

pub fn grid_search_fit(points: &[AttenuationPoint]) -> GridFit {
    let data: Vec<(f64, f64, f64)> = points
        .iter()
        .map(|p| {
            let w = (p.counts.value / p.counts.sigma).powi(2);
            (p.thickness, p.counts.value.ln(), w)
        })
        .collect();

    let sse = |a: f64, mu: f64| -> f64 { data.iter().map(|(x, y, w)| w * (y - a + mu * x).powi(2)).sum() };
    let best_a = |mu: f64| -> f64 {
        let shifted: Vec<f64> = data.iter().map(|(x, y, _)| y + mu * x).collect();
        let lo = shifted.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = shifted.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo < 1e-300 {
            return lo;
        }
        grid_then_golden(&|a| sse(a, mu), lo, hi, 40)
    };
    let profile = |mu: f64| sse(best_a(mu), mu);

    // The fitted slope is a positively weighted average of pairwise slopes.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, (xi, yi, _)) in data.iter().enumerate() {
        for (xj, yj, _) in &data[i + 1..] {
            if xi != xj {
                let s = -(yj - yi) / (xj - xi);
                lo = lo.min(s);
                hi = hi.max(s);
            }
        }
    }
    let pad = (hi - lo).max(1e-12) * 0.01;
    let mu = grid_then_golden(&profile, lo - pad, hi + pad, 40);
    GridFit { mu, n0: best_a(mu).exp() }
}
