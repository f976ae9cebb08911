//! Deterministic synthetic digit images in MNIST layout (28x28 grayscale,
//! labels 0-9). Used by tests and offline runs when the real IDX files are
//! not available; generation is pure in (n, seed).

use crate::numkit::SeededRng;

/// 7x5 bitmap font, one row string per glyph row.
const GLYPHS: [[&str; 7]; 10] = [
    [
        "01110", "10001", "10011", "10101", "11001", "10001", "01110",
    ],
    [
        "00100", "01100", "00100", "00100", "00100", "00100", "01110",
    ],
    [
        "01110", "10001", "00001", "00010", "00100", "01000", "11111",
    ],
    [
        "11111", "00010", "00100", "00010", "00001", "10001", "01110",
    ],
    [
        "00010", "00110", "01010", "10010", "11111", "00010", "00010",
    ],
    [
        "11111", "10000", "11110", "00001", "00001", "10001", "01110",
    ],
    [
        "00110", "01000", "10000", "11110", "10001", "10001", "01110",
    ],
    [
        "11111", "00001", "00010", "00100", "01000", "01000", "01000",
    ],
    [
        "01110", "10001", "10001", "01110", "10001", "10001", "01110",
    ],
    [
        "01110", "10001", "10001", "01111", "00001", "00010", "01100",
    ],
];

const SIDE: usize = 28;
const CELL: usize = 4; // 7x5 glyph upscaled by 4 into 28x20, centered

/// Glyph coverage at an absolute 28x28 position.
fn glyph_pixel(digit: usize, row: i64, col: i64) -> bool {
    if !(0..SIDE as i64).contains(&row) {
        return false;
    }
    let col = col - 4; // horizontal centering margin
    if !(0..(5 * CELL) as i64).contains(&col) {
        return false;
    }
    let gr = row as usize / CELL;
    let gc = col as usize / CELL;
    GLYPHS[digit][gr].as_bytes()[gc] == b'1'
}

/// Per-sample style: slant and stroke weight, the dominant axes of
/// handwriting variation.
struct Style {
    dx: i64,
    dy: i64,
    shear: f64,
    weight: i8, // -1 thin, 0 normal, 1 thick
}

/// Stroke coverage at a canvas position under a sample's style.
fn styled_pixel(digit: usize, r: i64, c: i64, style: &Style) -> bool {
    let rr = r - style.dy;
    let cc = c - style.dx + (style.shear * (rr as f64 - 13.5)).round() as i64;
    let base = glyph_pixel(digit, rr, cc);
    match style.weight {
        1 => {
            base || glyph_pixel(digit, rr - 1, cc)
                || glyph_pixel(digit, rr + 1, cc)
                || glyph_pixel(digit, rr, cc - 1)
                || glyph_pixel(digit, rr, cc + 1)
        }
        -1 => base && glyph_pixel(digit, rr, cc - 1) && glyph_pixel(digit, rr, cc + 1),
        _ => base,
    }
}

/// Renders `n` digit images on a near-black background with sparse
/// speckle, varying position, slant, stroke weight, and intensity per
/// sample and shading per pixel, mimicking the contrast statistics and
/// intra-class variability of scanned handwriting. Returns
/// `(pixels, labels)` with pixels flattened `[n][28][28]`.
pub fn synthesize_digits(n: usize, seed: u64) -> (Vec<u8>, Vec<u8>) {
    let mut rng = SeededRng::new(seed);
    let mut pixels = Vec::with_capacity(n * SIDE * SIDE);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let digit = rng.below(10) as usize;
        let style = Style {
            dx: rng.below(7) as i64 - 3,
            dy: rng.below(7) as i64 - 3,
            shear: 0.4 * rng.uniform() - 0.2,
            weight: match rng.below(20) {
                0..=6 => 1,
                7..=10 => -1,
                _ => 0,
            },
        };
        let intensity = 0.7 + 0.3 * rng.uniform();
        for r in 0..SIDE as i64 {
            for c in 0..SIDE as i64 {
                let v = if styled_pixel(digit, r, c, &style) {
                    // Stroke with per-pixel shade jitter and rare gaps.
                    let shade = 0.8 + 0.2 * rng.uniform();
                    let gap = if rng.uniform() < 0.05 { 0.2 } else { 1.0 };
                    intensity * shade * gap
                } else if rng.uniform() < 0.02 {
                    0.3 * rng.uniform()
                } else {
                    0.0
                };
                pixels.push((v.clamp(0.0, 1.0) * 255.0).round() as u8);
            }
        }
        labels.push(digit as u8);
    }
    (pixels, labels)
}
