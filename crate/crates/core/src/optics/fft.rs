//! Square 2-D FFTs built from rustfft row transforms and a transpose.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

type Plan = Arc<dyn Fft<f64>>;

fn plan(n: usize, direction: FftDirection) -> Plan {
    static PLANS: OnceLock<Mutex<HashMap<(usize, bool), Plan>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry((n, direction == FftDirection::Forward))
        .or_insert_with(|| FftPlanner::new().plan_fft(n, direction))
        .clone()
}

/// In-place transpose of a square row-major matrix.
pub(crate) fn transpose(data: &mut [Complex64], n: usize) {
    for r in 0..n {
        for c in (r + 1)..n {
            data.swap(r * n + c, c * n + r);
        }
    }
}

fn transform(data: &mut [Complex64], n: usize, direction: FftDirection) {
    assert_eq!(data.len(), n * n, "fft2 expects an n x n buffer");
    let fft = plan(n, direction);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(data, &mut scratch);
    transpose(data, n);
    fft.process_with_scratch(data, &mut scratch);
    transpose(data, n);
}

/// Unnormalized forward 2-D DFT.
pub fn fft2(data: &mut [Complex64], n: usize) {
    transform(data, n, FftDirection::Forward);
}

/// Inverse 2-D DFT including the 1/N² factor, so `ifft2(fft2(x)) == x`.
pub fn ifft2(data: &mut [Complex64], n: usize) {
    transform(data, n, FftDirection::Inverse);
    let scale = 1.0 / (n * n) as f64;
    data.iter_mut().for_each(|v| *v *= scale);
}

/// Signed frequency index of DFT bin `i` (0, 1, …, n/2-1, -n/2, …, -1).
#[inline]
pub fn freq_index(i: usize, n: usize) -> f64 {
    if i < n / 2 {
        i as f64
    } else {
        i as f64 - n as f64
    }
}
