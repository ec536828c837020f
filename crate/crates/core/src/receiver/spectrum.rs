//! FFT helpers shared by the receiver stages.

use num_complex::Complex64;
use rustfft::FftPlanner;

pub(crate) fn fft(buf: &mut [Complex64]) {
    FftPlanner::new().plan_fft_forward(buf.len()).process(buf);
}

/// Unnormalized inverse transform.
pub(crate) fn ifft(buf: &mut [Complex64]) {
    FftPlanner::new().plan_fft_inverse(buf.len()).process(buf);
}

/// Signed frequency of FFT bin `k` for a length-`n` transform.
pub(crate) fn bin_freq(k: usize, n: usize, fs: f64) -> f64 {
    let k = k as f64;
    let n_f = n as f64;
    if k < n_f / 2.0 {
        k * fs / n_f
    } else {
        (k - n_f) * fs / n_f
    }
}

/// Wraps a frequency into `[-fs/2, fs/2)`.
pub(crate) fn wrap_freq(f: f64, fs: f64) -> f64 {
    (f + fs / 2.0).rem_euclid(fs) - fs / 2.0
}

/// Ideal low-pass: keeps `|f| <= cutoff` (circular).
pub(crate) fn brickwall(samples: &[Complex64], fs: f64, cutoff: f64) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    fft(&mut buf);
    let tol = 1e-9 * fs / n as f64;
    for (k, v) in buf.iter_mut().enumerate() {
        if bin_freq(k, n, fs).abs() > cutoff + tol {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    ifft(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// As [`brickwall`], applied to the even extension `[x, reverse(x)]` so the
/// filter sees no jump where the frame wraps around.
pub(crate) fn brickwall_reflect(samples: &[Complex64], fs: f64, cutoff: f64) -> Vec<Complex64> {
    let n = samples.len();
    let mut ext = Vec::with_capacity(2 * n);
    ext.extend_from_slice(samples);
    ext.extend(samples.iter().rev());
    let mut out = brickwall(&ext, fs, cutoff);
    out.truncate(n);
    out
}

/// Band-limited interpolation of `x` by an integer factor via zero padding.
/// Output sample `m·factor` equals `x[m]`.
pub(crate) fn interpolate(x: &[Complex64], factor: usize) -> Vec<Complex64> {
    let n = x.len();
    if factor == 1 || n == 0 {
        return x.to_vec();
    }
    let mut bins = x.to_vec();
    fft(&mut bins);
    let big = n * factor;
    let mut padded = vec![Complex64::new(0.0, 0.0); big];
    let half = n / 2;
    if n % 2 == 0 {
        padded[..half].copy_from_slice(&bins[..half]);
        padded[big - half + 1..].copy_from_slice(&bins[half + 1..]);
        // Split the Nyquist bin between the two sides.
        padded[half] = bins[half] * 0.5;
        padded[big - half] = bins[half] * 0.5;
    } else {
        padded[..=half].copy_from_slice(&bins[..=half]);
        padded[big - half..].copy_from_slice(&bins[half + 1..]);
    }
    ifft(&mut padded);
    let scale = 1.0 / n as f64;
    padded.iter_mut().for_each(|v| *v *= scale);
    padded
}

/// Power spectrum averaged into `bins` equal-width cells, ordered from
/// `-fs/2` to `fs/2`. Returns `(center_hz, power)` pairs. Power is
/// `|X_k|²/N`, summed within a cell divided by the cell size.
pub fn power_spectrum(samples: &[Complex64], fs: f64, bins: usize) -> Vec<(f64, f64)> {
    let n = samples.len();
    if n == 0 || bins == 0 {
        return Vec::new();
    }
    let mut buf = samples.to_vec();
    fft(&mut buf);
    let bins = bins.min(n);
    let mut acc = vec![(0.0, 0usize); bins];
    for (k, v) in buf.iter().enumerate() {
        // Shift so index 0 is the most negative frequency.
        let shifted = (k + n - n / 2) % n;
        let cell = shifted * bins / n;
        acc[cell].0 += v.norm_sqr() / n as f64;
        acc[cell].1 += 1;
    }
    acc.iter()
        .enumerate()
        .map(|(i, &(p, c))| {
            let center = -fs / 2.0 + (i as f64 + 0.5) * fs / bins as f64;
            (center, if c > 0 { p / c as f64 } else { 0.0 })
        })
        .collect()
}
