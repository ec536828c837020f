//! Small sample-statistics helpers shared by the estimators and tests.

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population variance (divides by `n`).
/// Shifted by the first sample, so constant input gives exactly zero.
pub fn variance(xs: &[f64]) -> f64 {
    let Some(&s) = xs.first() else {
        return f64::NAN;
    };
    let m = xs.iter().map(|x| x - s).sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - s - m) * (x - s - m)).sum::<f64>() / xs.len() as f64
}

/// Population covariance of two equal-length sequences.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    let (mx, my) = (mean(xs), mean(ys));
    xs.iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / xs.len() as f64
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    covariance(xs, ys) / (variance(xs) * variance(ys)).sqrt()
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    covariance(xs, ys) / variance(xs)
}

/// Centered moving average; the window is truncated at the edges.
pub fn moving_average<T>(xs: &[T], window: usize) -> Vec<T>
where
    T: Copy
        + Default
        + std::ops::Add<Output = T>
        + std::ops::Sub<Output = T>
        + std::ops::Div<f64, Output = T>,
{
    let n = xs.len();
    if window <= 1 || n == 0 {
        return xs.to_vec();
    }
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(T::default());
    let mut acc = T::default();
    for &x in xs {
        acc = acc + x;
        prefix.push(acc);
    }
    let half = window / 2;
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + window - half).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
