//! Synthetic panoramic-radiograph phantoms with known filling masks.
//!
//! A phantom is a dark background crossed by a horizontal "tooth" band with
//! bright elliptical fillings inside it. The ground-truth mask is exact, so
//! segmentation areas and overlaps can be checked against it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::{Image, Mask};

/// Axis-aligned ellipse in pixel coordinates. A pixel `(r, c)` is inside
/// when `((r - cy) / ry)² + ((c - cx) / rx)² <= 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipse {
    pub center_row: f64,
    pub center_col: f64,
    pub radius_row: f64,
    pub radius_col: f64,
}

impl Ellipse {
    pub fn contains(&self, row: usize, col: usize) -> bool {
        let dr = (row as f64 - self.center_row) / self.radius_row;
        let dc = (col as f64 - self.center_col) / self.radius_col;
        dr * dr + dc * dc <= 1.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhantomSpec {
    pub width: usize,
    pub height: usize,
    pub background: u8,
    /// Half-open row range covered by the tooth band.
    pub band_rows: (usize, usize),
    pub band_value: u8,
    pub filling_value: u8,
    pub fillings: Vec<Ellipse>,
    /// Uniform noise amplitude; 0 disables noise.
    pub noise: u8,
    pub seed: u64,
}

impl PhantomSpec {
    /// 400×300 phantom: background 40, band 120, one filling of value 230
    /// covering exactly 500 pixels.
    pub fn opg() -> Self {
        PhantomSpec {
            width: 400,
            height: 300,
            background: 40,
            band_rows: (100, 200),
            band_value: 120,
            filling_value: 230,
            fillings: vec![Ellipse {
                center_row: 150.0,
                center_col: 200.5,
                radius_row: 9.9,
                radius_col: 16.2,
            }],
            noise: 0,
            seed: 0,
        }
    }

    /// Same layout as [`PhantomSpec::opg`] with two disjoint fillings.
    pub fn opg_two_fillings() -> Self {
        let mut spec = Self::opg();
        spec.fillings = vec![
            Ellipse {
                center_row: 140.0,
                center_col: 110.0,
                radius_row: 9.0,
                radius_col: 14.0,
            },
            Ellipse {
                center_row: 160.0,
                center_col: 290.0,
                radius_row: 10.0,
                radius_col: 18.0,
            },
        ];
        spec
    }

    /// Member `index` of a reproducible family of phantoms with varying
    /// filling sizes and positions; odd members carry a second filling.
    pub fn series(index: usize) -> Self {
        let mut spec = Self::opg();
        let i = index as f64;
        let mut fillings = vec![Ellipse {
            center_row: 135.0 + (index % 3) as f64 * 10.0,
            center_col: 70.0 + (index % 5) as f64 * 25.0,
            radius_row: 8.0 + (index % 4) as f64 * 0.8,
            radius_col: 12.0 + (index % 6) as f64 * 1.5,
        }];
        if index % 2 == 1 {
            fillings.push(Ellipse {
                center_row: 165.0 - (index % 3) as f64 * 5.0,
                center_col: 280.0 + (i * 7.0) % 50.0,
                radius_row: 9.0,
                radius_col: 10.0 + (index % 5) as f64,
            });
        }
        spec.fillings = fillings;
        spec
    }

    pub fn generate(&self) -> Phantom {
        let truth = Mask::from_fn(self.width, self.height, |r, c| {
            self.fillings.iter().any(|e| e.contains(r, c))
        });
        let (band_start, band_end) = self.band_rows;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let noise = i16::from(self.noise);
        let image = Image::from_fn(self.width, self.height, |r, c| {
            let base = if truth.get(r, c) {
                self.filling_value
            } else if (band_start..band_end).contains(&r) {
                self.band_value
            } else {
                self.background
            };
            if noise == 0 {
                base
            } else {
                let jitter = rng.gen_range(-noise..=noise);
                (i16::from(base) + jitter).clamp(0, 255) as u8
            }
        });
        Phantom { image, truth }
    }
}

/// A generated phantom and its exact filling mask.
#[derive(Clone, Debug)]
pub struct Phantom {
    pub image: Image,
    pub truth: Mask,
}

impl Phantom {
    pub fn area_px(&self) -> usize {
        self.truth.count()
    }

    pub fn area_mm2(&self, pixel_area_mm2: f64) -> f64 {
        self.area_px() as f64 * pixel_area_mm2
    }
}
