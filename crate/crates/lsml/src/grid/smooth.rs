//! Separable Gaussian smoothing.

use super::field::ScalarField;
use crate::error::{Error, Result};

/// Convolves `f` with a discrete Gaussian of parameter `sigma`, truncated at
/// radius `ceil(4 sigma)` and applied separably along each axis.
///
/// The kernel is renormalized per voxel where it overhangs the volume faces,
/// so constant fields are preserved exactly. `sigma = 0` returns the input
/// unchanged.
pub fn gaussian_smooth(f: &ScalarField, sigma: f64) -> Result<ScalarField> {
    if !(sigma >= 0.0) {
        return Err(Error::Argument(format!("sigma must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(f.clone());
    }
    let radius = (4.0 * sigma).ceil() as usize;
    let mut kernel = Vec::with_capacity(2 * radius + 1);
    for t in -(radius as isize)..=(radius as isize) {
        let x = t as f64;
        kernel.push((-x * x / (2.0 * sigma * sigma)).exp());
    }
    let total: f64 = kernel.iter().sum();
    for w in &mut kernel {
        *w /= total;
    }

    let (ni, nj, nk) = f.dims();
    let mut out = f.clone();
    // axis = 0, 1, 2 in turn; each pass reads `out` and writes a fresh buffer.
    for axis in 0..3 {
        let n = [ni, nj, nk][axis];
        if n == 1 {
            continue;
        }
        let src = out.clone();
        for i in 0..ni {
            for j in 0..nj {
                for k in 0..nk {
                    let x = [i, j, k][axis] as isize;
                    let mut acc = 0.0;
                    let mut wsum = 0.0;
                    for (t, &w) in kernel.iter().enumerate() {
                        let p = x + t as isize - radius as isize;
                        if p < 0 || p >= n as isize {
                            continue;
                        }
                        let p = p as usize;
                        let v = match axis {
                            0 => src.get(p, j, k),
                            1 => src.get(i, p, k),
                            _ => src.get(i, j, p),
                        };
                        acc += w * v;
                        wsum += w;
                    }
                    out.set(i, j, k, acc / wsum);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::field::ScalarField;

    #[test]
    fn sigma_zero_is_identity() {
        let f = ScalarField::from_fn((4, 4, 4), |i, j, k| (i + 2 * j + 3 * k) as f64).unwrap();
        let s = gaussian_smooth(&f, 0.0).unwrap();
        assert_eq!(f.data(), s.data());
    }

    #[test]
    fn constants_are_preserved() {
        let f = ScalarField::filled((9, 9, 9), 3.5).unwrap();
        let s = gaussian_smooth(&f, 3.0).unwrap();
        for &v in s.data() {
            assert!((v - 3.5).abs() < 1e-12, "got {v}");
        }
    }

    #[test]
    fn impulse_mass_is_preserved() {
        let mut f = ScalarField::zeros((21, 21, 21)).unwrap();
        f.set(10, 10, 10, 1.0);
        let s = gaussian_smooth(&f, 1.0).unwrap();
        let sum: f64 = s.data().iter().sum();
        assert!((sum - 1.0).abs() < 1e-9, "sum = {sum}");
    }

    #[test]
    fn negative_sigma_rejected() {
        let f = ScalarField::zeros((3, 3, 3)).unwrap();
        assert!(gaussian_smooth(&f, -1.0).is_err());
    }

    #[test]
    fn smoothing_is_linear() {
        let a = ScalarField::from_fn((7, 7, 7), |i, j, k| (i * j + k) as f64).unwrap();
        let b = ScalarField::from_fn((7, 7, 7), |i, j, k| ((i + j) * k) as f64 * 0.25).unwrap();
        let combo = ScalarField::from_vec(
            (7, 7, 7),
            a.data()
                .iter()
                .zip(b.data())
                .map(|(&x, &y)| 2.0 * x - 3.0 * y)
                .collect(),
        )
        .unwrap();
        let sa = gaussian_smooth(&a, 2.0).unwrap();
        let sb = gaussian_smooth(&b, 2.0).unwrap();
        let sc = gaussian_smooth(&combo, 2.0).unwrap();
        for idx in 0..sc.len() {
            let expect = 2.0 * sa.data()[idx] - 3.0 * sb.data()[idx];
            assert!((sc.data()[idx] - expect).abs() < 1e-9);
        }
    }
}
