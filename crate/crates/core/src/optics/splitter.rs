use num_complex::Complex64;

use super::field::ComplexField;

/// Reverse the column order of a row-major square buffer.
pub(crate) fn mirror_columns<T: Copy>(data: &[T], width: usize) -> Vec<T> {
    data.chunks_exact(width)
        .flat_map(|row| row.iter().rev().copied())
        .collect()
}

/// Lossless 50:50 beam splitter.
///
/// Returns `(transmitted, reflected)`: the transmitted arm is `E/√2`; the
/// reflected arm is `i·E/√2` mirrored left–right, as a camera behind a single
/// reflection sees it.
pub fn beam_split(field: &ComplexField) -> (ComplexField, ComplexField) {
    let t = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let r = Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
    let transmitted = field.scaled(t);
    let reflected_amps: Vec<Complex64> = mirror_columns(field.amplitudes(), field.n())
        .into_iter()
        .map(|a| a * r)
        .collect();
    let reflected =
        ComplexField::from_parts(field.n(), field.pitch(), field.wavelength(), reflected_amps);
    (transmitted, reflected)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirror_reverses_columns() {
        let data = [1, 2, 3, 4, 5, 6];
        assert_eq!(mirror_columns(&data, 3), vec![3, 2, 1, 6, 5, 4]);
    }
}
