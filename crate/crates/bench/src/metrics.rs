//! Latency percentiles and the derived service metrics.

use crate::error::BenchError;

/// Nearest-rank percentile: the smallest sample such that at least `k`
/// percent of the samples are less than or equal to it.
pub fn percentile(samples: &[f64], k: f64) -> Result<f64, BenchError> {
    if samples.is_empty() {
        return Err(BenchError::Metrics("percentile of an empty sample".into()));
    }
    if !(k > 0.0 && k <= 100.0) {
        return Err(BenchError::Metrics(format!("percentile rank {k} outside (0, 100]")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[rank(sorted.len(), k) - 1])
}

/// Percentiles of one sample for several ranks, sorting once.
pub fn percentiles(samples: &[f64], ks: &[f64]) -> Result<Vec<f64>, BenchError> {
    if samples.is_empty() {
        return Err(BenchError::Metrics("percentile of an empty sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    ks.iter()
        .map(|&k| {
            if !(k > 0.0 && k <= 100.0) {
                return Err(BenchError::Metrics(format!("percentile rank {k} outside (0, 100]")));
            }
            Ok(sorted[rank(sorted.len(), k) - 1])
        })
        .collect()
}

/// 1-based nearest rank `ceil(k/100 · n)`. The product is nudged down
/// before rounding up so that e.g. 50% of 4 is rank 2, not 3 from
/// floating-point noise.
fn rank(n: usize, k: f64) -> usize {
    let exact = k / 100.0 * n as f64;
    let r = (exact - 1e-9 * exact.max(1.0)).ceil() as usize;
    r.clamp(1, n)
}

/// Threshold percentile `(t+1)/n · 100`.
pub fn theta(n: u16, t: u16) -> f64 {
    (t as f64 + 1.0) / n as f64 * 100.0
}

fn check_pair(l95: f64, l_theta: f64) -> Result<(), BenchError> {
    if !(l_theta > 0.0) {
        return Err(BenchError::Metrics(format!("threshold latency {l_theta} is not positive")));
    }
    if l95 < l_theta {
        return Err(BenchError::Metrics(format!("L95 {l95} below threshold latency {l_theta}")));
    }
    Ok(())
}

/// `(L95 − Lθ) / Lθ`.
pub fn residual_delay_factor(l95: f64, l_theta: f64) -> Result<f64, BenchError> {
    check_pair(l95, l_theta)?;
    Ok((l95 - l_theta) / l_theta)
}

/// `Lθ / L95`.
pub fn latency_fairness_index(l_theta: f64, l95: f64) -> Result<f64, BenchError> {
    check_pair(l95, l_theta)?;
    Ok(l_theta / l95)
}

/// Completed requests per second.
///
/// `completions` are completion times in seconds from the experiment
/// start. The elapsed time is the last completion, accepted up to
/// `(1 + grace) · duration`; past that, or when `unfinished` requests are
/// left, the nominal duration is used instead.
pub fn throughput(completions: &[f64], duration: f64, unfinished: usize, grace: f64) -> f64 {
    if completions.is_empty() || duration <= 0.0 {
        return 0.0;
    }
    let last = completions.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let elapsed = if unfinished == 0 && last > 0.0 && last <= duration * (1.0 + grace) {
        last
    } else {
        duration
    };
    completions.len() as f64 / elapsed
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub rate: f64,
    pub throughput: f64,
    pub l95: f64,
}

/// Rate maximizing throughput / L95. Ties go to the lower rate.
pub fn knee_capacity(curve: &[CurvePoint]) -> Result<f64, BenchError> {
    let mut points: Vec<&CurvePoint> = curve.iter().collect();
    if points.is_empty() {
        return Err(BenchError::Metrics("knee of an empty curve".into()));
    }
    points.sort_by(|a, b| a.rate.total_cmp(&b.rate));
    let mut best = points[0];
    let mut best_ratio = ratio(best);
    for p in &points[1..] {
        let r = ratio(p);
        if r > best_ratio {
            best = p;
            best_ratio = r;
        }
    }
    Ok(best.rate)
}

fn ratio(p: &CurvePoint) -> f64 {
    if p.l95 > 0.0 {
        p.throughput / p.l95
    } else if p.throughput > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Largest rate whose L95 stays within `factor` times the L95 at the knee.
pub fn usable_capacity(curve: &[CurvePoint], factor: f64) -> Result<f64, BenchError> {
    let knee = knee_capacity(curve)?;
    let knee_l95 = curve
        .iter()
        .find(|p| p.rate == knee)
        .map(|p| p.l95)
        .expect("knee is a curve point");
    Ok(curve
        .iter()
        .filter(|p| p.l95 <= factor * knee_l95)
        .map(|p| p.rate)
        .fold(knee, f64::max))
}
