//! sRGB → CIELAB (D65).

use std::sync::OnceLock;

const SRGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412_456_4, 0.357_576_1, 0.180_437_5],
    [0.212_672_9, 0.715_152_2, 0.072_175_0],
    [0.019_333_9, 0.119_192_0, 0.950_304_1],
];

/// IEC 61966-2-1 transfer function inverse.
pub fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.040_45 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn linear_table() -> &'static [f64; 256] {
    static TABLE: OnceLock<[f64; 256]> = OnceLock::new();
    TABLE.get_or_init(|| std::array::from_fn(|i| srgb_to_linear(i as f64 / 255.0)))
}

fn to_xyz(lin: [f64; 3]) -> [f64; 3] {
    std::array::from_fn(|r| SRGB_TO_XYZ[r][0] * lin[0] + SRGB_TO_XYZ[r][1] * lin[1] + SRGB_TO_XYZ[r][2] * lin[2])
}

/// D65 reference white: the XYZ of sRGB white under the same matrix, so
/// white maps to L* = 100 exactly.
fn white() -> &'static [f64; 3] {
    static WHITE: OnceLock<[f64; 3]> = OnceLock::new();
    WHITE.get_or_init(|| to_xyz([linear_table()[255]; 3]))
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// `(L*, a*, b*)` of an 8-bit sRGB colour.
pub fn rgb_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    let table = linear_table();
    let lin = [table[rgb[0] as usize], table[rgb[1] as usize], table[rgb[2] as usize]];
    let xyz = to_xyz(lin);
    let w = white();
    let fx = lab_f(xyz[0] / w[0]);
    let fy = lab_f(xyz[1] / w[1]);
    let fz = lab_f(xyz[2] / w[2]);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn black_is_origin() {
        assert_eq!(rgb_to_lab([0, 0, 0]), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn white_is_l100() {
        let [l, a, b] = rgb_to_lab([255, 255, 255]);
        assert!((l - 100.0).abs() < 1e-9, "{l}");
        assert!(a.abs() < 0.01 && b.abs() < 0.01, "{a} {b}");
    }

    #[test]
    fn primaries_match_reference_colorimetry() {
        // Reference values computed independently with scikit-image's
        // rgb2lab (D65, 2° observer).
        let cases: [([u8; 3], [f64; 3]); 4] = [
            ([255, 0, 0], [53.2406, 80.0923, 67.2028]),
            ([0, 255, 0], [87.7351, -86.1830, 83.1797]),
            ([0, 0, 255], [32.2957, 79.1856, -107.8573]),
            ([128, 64, 32], [34.7248, 24.9996, 31.3728]),
        ];
        for (rgb, want) in cases {
            let got = rgb_to_lab(rgb);
            for c in 0..3 {
                assert!((got[c] - want[c]).abs() < 0.05, "{rgb:?}: {got:?} vs {want:?}");
            }
        }
    }
}
