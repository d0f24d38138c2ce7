use crate::error::Result;

use super::{normalize, Field, RiskGrid};

/// 8-bit RGB raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }
}

/// Hue in half-degrees (0..180, so 0 is red and 120 is blue), saturation
/// and value in `[0, 1]`.
pub fn hsv_to_rgb(hue: f64, sat: f64, val: f64) -> [u8; 3] {
    let h = (hue * 2.0).rem_euclid(360.0) / 60.0;
    let c = val * sat;
    let x = c * (1.0 - (h % 2.0 - 1.0).abs());
    let (r, g, b) = match h as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = val - c;
    let q = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    [q(r), q(g), q(b)]
}

/// Per-cell risk level in `[0, 120]`: `normalize(max(G, 2 S), 0, 120)`.
pub fn risk_levels(tracking: &Field, combined: &Field) -> Result<Field> {
    let raw = tracking.zip_with(combined, |g, s| g.max(2.0 * s))?;
    Ok(normalize(&raw, 0.0, 120.0))
}

/// Heat map at full saturation and value. Zero risk is blue, the hottest
/// cell red.
pub fn render_heatmap(tracking: &RiskGrid, combined: &Field) -> Result<RgbImage> {
    render_levels(&risk_levels(tracking.field(), combined)?)
}

/// Renders precomputed risk levels in `[0, 120]`.
pub fn render_levels(levels: &Field) -> Result<RgbImage> {
    Ok(RgbImage {
        width: levels.width(),
        height: levels.height(),
        pixels: levels
            .values()
            .iter()
            .map(|&r| hsv_to_rgb(120.0 - r, 1.0, 1.0))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::risk::GridSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const BLUE: [u8; 3] = [0, 0, 255];
    const RED: [u8; 3] = [255, 0, 0];

    #[test]
    fn primaries() {
        assert_eq!(hsv_to_rgb(0.0, 1.0, 1.0), RED);
        assert_eq!(hsv_to_rgb(60.0, 1.0, 1.0), [0, 255, 0]);
        assert_eq!(hsv_to_rgb(120.0, 1.0, 1.0), BLUE);
        assert_eq!(hsv_to_rgb(30.0, 1.0, 1.0), [255, 255, 0]);
        assert_eq!(hsv_to_rgb(50.0, 0.0, 0.5), [128, 128, 128]);
    }

    #[test]
    fn max_of_tracking_and_double_violation() {
        let g = Field::from_vec(2, 1, vec![3.0, 0.0]).unwrap();
        let s = Field::from_vec(2, 1, vec![5.0, 0.0]).unwrap();
        let raw = g.zip_with(&s, |g, s| g.max(2.0 * s)).unwrap();
        assert_eq!(raw.values(), &[10.0, 0.0]);
        assert_eq!(risk_levels(&g, &s).unwrap().values(), &[120.0, 0.0]);
    }

    #[test]
    fn zero_input_is_blue() {
        let g = RiskGrid::new(GridSpec::new(4, 3));
        let img = render_heatmap(&g, &Field::zeros(4, 3)).unwrap();
        assert!(img.pixels.iter().all(|&p| p == BLUE));
    }

    #[test]
    fn shape_mismatch() {
        let g = RiskGrid::new(GridSpec::new(4, 3));
        assert!(render_heatmap(&g, &Field::zeros(3, 4)).is_err());
    }

    #[test]
    fn hottest_red_coldest_blue() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let mut g = RiskGrid::new(GridSpec::new(9, 7));
            for _ in 0..rng.random_range(1..20) {
                g.stamp_kernel(rng.random_range(0..9), rng.random_range(0..7));
            }
            let s: Vec<f64> = (0..63).map(|_| rng.random_range(0.0..3.0)).collect();
            let s = Field::from_vec(9, 7, s).unwrap();
            let raw: Vec<f64> = g
                .field()
                .values()
                .iter()
                .zip(s.values())
                .map(|(&a, &b)| a.max(2.0 * b))
                .collect();
            let hot = (0..raw.len()).max_by(|&i, &j| raw[i].total_cmp(&raw[j])).unwrap();
            let cold = (0..raw.len()).min_by(|&i, &j| raw[i].total_cmp(&raw[j])).unwrap();
            let img = render_heatmap(&g, &s).unwrap();
            assert_eq!(img.pixels[hot], RED);
            assert_eq!(img.pixels[cold], BLUE);
        }
    }
}
