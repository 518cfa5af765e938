//! Training-set augmentation: horizontal flip, additive Gaussian noise and
//! brightness/contrast jitter, with boxes carried through each transform.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::geometry::BBox;
use crate::raster::{round_to_u8, Raster};
use crate::rng::{derive_seed, derive_stream, CounterRng};

/// Which transform produced an augmented sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Variant {
    Original,
    Hflip,
    Noise,
    BrightnessContrast,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Original,
        Variant::Hflip,
        Variant::Noise,
        Variant::BrightnessContrast,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Original => "original",
            Variant::Hflip => "hflip",
            Variant::Noise => "noise",
            Variant::BrightnessContrast => "brightness_contrast",
        }
    }
}

impl core::fmt::Display for Variant {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Augmentation ranges. Noise is additive with standard deviation `sigma`
/// in intensity levels; the photometric jitter draws `alpha` and `beta`
/// uniformly from their ranges.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct AugmentParams {
    pub sigma: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub beta_min: f64,
    pub beta_max: f64,
}

impl Default for AugmentParams {
    fn default() -> Self {
        Self {
            sigma: 10.0,
            alpha_min: 0.8,
            alpha_max: 1.2,
            beta_min: -30.0,
            beta_max: 30.0,
        }
    }
}

impl AugmentParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| {
            Err(CoreError::InvalidParameter {
                name,
                reason: String::from(reason),
            })
        };
        if !(self.sigma >= 0.0) {
            return bad("sigma", "must be non-negative");
        }
        if !(self.alpha_min > 0.0 && self.alpha_min <= self.alpha_max) {
            return bad("alpha", "range must be positive and ordered");
        }
        if !(self.beta_min <= self.beta_max) {
            return bad("beta", "range must be ordered");
        }
        Ok(())
    }
}

/// Photometric settings actually applied to a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Applied {
    None,
    Flip,
    Noise { sigma: f64 },
    Jitter { alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSample {
    pub source_page_id: String,
    pub variant: Variant,
    pub image: Raster,
    pub boxes: Vec<BBox>,
    /// Seed of the stream that drove this sample's randomness.
    pub seed: u64,
    pub applied: Applied,
}

impl AugmentedSample {
    /// `{page_id}_{variant}`; unique within an augmented set.
    pub fn sample_id(&self) -> String {
        alloc::format!("{}_{}", self.source_page_id, self.variant)
    }
}

/// Mirrors the image left-to-right; box `x` becomes `W - x - w`.
pub fn hflip(image: &Raster, boxes: &[BBox]) -> (Raster, Vec<BBox>) {
    let w = image.width();
    let flipped = Raster::from_fn(w, image.height(), |x, y| image.get(w - 1 - x, y))
        .expect("same dimensions as the input");
    let boxes = boxes
        .iter()
        .map(|b| BBox::new(w - b.right(), b.y(), b.w(), b.h()).expect("flip keeps size"))
        .collect();
    (flipped, boxes)
}

/// Adds independent `N(0, sigma^2)` noise to every pixel, rounding half-up
/// and clamping to `[0, 255]`.
pub fn gaussian_noise(image: &Raster, sigma: f64, seed: u64) -> Raster {
    if sigma == 0.0 {
        return image.clone();
    }
    let mut rng = CounterRng::new(seed);
    let mut out = image.clone();
    for pair in out.pixels_mut().chunks_mut(2) {
        let (z0, z1) = rng.normal_pair();
        pair[0] = round_to_u8(f64::from(pair[0]) + sigma * z0);
        if let Some(p) = pair.get_mut(1) {
            *p = round_to_u8(f64::from(*p) + sigma * z1);
        }
    }
    out
}

/// `clamp(round(alpha * p + beta), 0, 255)` per pixel.
pub fn brightness_contrast(image: &Raster, alpha: f64, beta: f64) -> Raster {
    image.map(|p| round_to_u8(alpha * f64::from(p) + beta))
}

/// Per-page seed: the page id hashed and mixed into the corpus seed.
pub fn page_seed(corpus_seed: u64, page_id: &str) -> u64 {
    derive_seed(corpus_seed, page_id)
}

/// Produces the four training variants of one page, in [`Variant::ALL`]
/// order. Randomness comes only from `page_seed(corpus_seed, page_id)`.
pub fn augment_page(
    page_id: &str,
    image: &Raster,
    boxes: &[BBox],
    params: &AugmentParams,
    corpus_seed: u64,
) -> Result<[AugmentedSample; 4]> {
    params.validate()?;
    for b in boxes {
        b.check_within(image.width(), image.height())?;
    }
    let base = page_seed(corpus_seed, page_id);
    let noise_seed = derive_stream(base, 1);
    let jitter_seed = derive_stream(base, 2);

    let mut jitter_rng = CounterRng::new(jitter_seed);
    let alpha = jitter_rng.uniform(params.alpha_min, params.alpha_max);
    let beta = jitter_rng.uniform(params.beta_min, params.beta_max);

    let (flipped, flipped_boxes) = hflip(image, boxes);
    let sample = |variant, image, boxes: Vec<BBox>, seed, applied| AugmentedSample {
        source_page_id: String::from(page_id),
        variant,
        image,
        boxes,
        seed,
        applied,
    };
    Ok([
        sample(Variant::Original, image.clone(), boxes.to_vec(), base, Applied::None),
        sample(Variant::Hflip, flipped, flipped_boxes, base, Applied::Flip),
        sample(
            Variant::Noise,
            gaussian_noise(image, params.sigma, noise_seed),
            boxes.to_vec(),
            noise_seed,
            Applied::Noise {
                sigma: params.sigma,
            },
        ),
        sample(
            Variant::BrightnessContrast,
            brightness_contrast(image, alpha, beta),
            boxes.to_vec(),
            jitter_seed,
            Applied::Jitter { alpha, beta },
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn gradient(w: u32, h: u32) -> Raster {
        Raster::from_fn(w, h, |x, y| ((x * 5 + y * 11) % 256) as u8).unwrap()
    }

    fn bb(x: u32, y: u32, w: u32, h: u32) -> BBox {
        BBox::new(x, y, w, h).unwrap()
    }

    #[test]
    fn hflip_box_arithmetic() {
        let img = Raster::filled(100, 40, 0).unwrap();
        let (_, b) = hflip(&img, &[bb(10, 5, 20, 30), bb(40, 0, 20, 10)]);
        assert_eq!(b, vec![bb(70, 5, 20, 30), bb(40, 0, 20, 10)]);
    }

    #[test]
    fn hflip_moves_pixels() {
        let img = gradient(7, 3);
        let (f, _) = hflip(&img, &[]);
        for y in 0..3 {
            for x in 0..7 {
                assert_eq!(f.get(x, y), img.get(6 - x, y));
            }
        }
    }

    #[test]
    fn noise_zero_sigma_is_identity() {
        let img = gradient(20, 20);
        assert_eq!(gaussian_noise(&img, 0.0, 3), img);
    }

    #[test]
    fn noise_sample_statistics() {
        let img = Raster::filled(350, 500, 128).unwrap();
        let out = gaussian_noise(&img, 10.0, 12345);
        let n = out.len() as f64;
        let mean = out.pixels().iter().map(|&p| f64::from(p)).sum::<f64>() / n;
        let var = out
            .pixels()
            .iter()
            .map(|&p| (f64::from(p) - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        assert!((mean - 128.0).abs() <= 0.5, "mean {mean}");
        assert!((var.sqrt() - 10.0).abs() <= 0.5, "sd {}", var.sqrt());
    }

    #[test]
    fn noise_clamps_at_zero() {
        let img = Raster::filled(50, 50, 0).unwrap();
        let out = gaussian_noise(&img, 10.0, 1);
        // u8 cannot go negative; clamping shows up as many exact zeros
        let zeros = out.pixels().iter().filter(|&&p| p == 0).count();
        assert!(zeros > out.len() / 3);
        assert!(out.pixels().iter().any(|&p| p > 0));
    }

    #[test]
    fn noise_is_seeded() {
        let img = gradient(30, 30);
        assert_eq!(gaussian_noise(&img, 10.0, 9), gaussian_noise(&img, 10.0, 9));
        assert_ne!(gaussian_noise(&img, 10.0, 9), gaussian_noise(&img, 10.0, 10));
    }

    #[test]
    fn brightness_contrast_arithmetic() {
        let img = Raster::from_pixels(3, 1, vec![100, 200, 0]).unwrap();
        assert_eq!(brightness_contrast(&img, 1.0, 0.0), img);
        assert_eq!(brightness_contrast(&img, 1.5, 10.0).get(0, 0), 160);
        assert_eq!(brightness_contrast(&img, 2.0, 0.0).get(1, 0), 255);
        assert_eq!(brightness_contrast(&img, 1.0, -30.0).get(2, 0), 0);
    }

    #[test]
    fn augment_produces_four_consistent_variants() {
        let img = gradient(60, 40);
        let boxes = [bb(2, 3, 10, 10), bb(40, 20, 20, 20)];
        let out = augment_page("p1", &img, &boxes, &AugmentParams::default(), 7).unwrap();
        let variants: Vec<Variant> = out.iter().map(|s| s.variant).collect();
        assert_eq!(variants, Variant::ALL.to_vec());
        for s in &out {
            assert_eq!((s.image.width(), s.image.height()), (60, 40));
            assert_eq!(s.boxes.len(), 2);
            assert!(s.boxes.iter().all(|b| b.fits_within(60, 40)));
        }
        assert_eq!(out[0].image, img);
        assert_eq!(out[1].boxes[0], bb(48, 3, 10, 10));
        assert_eq!(out[2].boxes, boxes.to_vec());
        match out[3].applied {
            Applied::Jitter { alpha, beta } => {
                assert!((0.8..=1.2).contains(&alpha));
                assert!((-30.0..=30.0).contains(&beta));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn augment_is_deterministic_per_page() {
        let img = gradient(30, 30);
        let p = AugmentParams::default();
        let a = augment_page("a", &img, &[], &p, 1).unwrap();
        let b = augment_page("a", &img, &[], &p, 1).unwrap();
        assert_eq!(a, b);
        let c = augment_page("b", &img, &[], &p, 1).unwrap();
        assert_ne!(a[2].image, c[2].image);
    }

    #[test]
    fn rejects_invalid_params() {
        let img = gradient(5, 5);
        let p = AugmentParams {
            alpha_min: 0.0,
            ..AugmentParams::default()
        };
        assert!(augment_page("a", &img, &[], &p, 1).is_err());
    }

    proptest::proptest! {
        #[test]
        fn hflip_is_involution(w in 1u32..40, h in 1u32..20, seed: u64, bx in 0u32..40, bw in 1u32..40) {
            let mut rng = CounterRng::new(seed);
            let img = Raster::from_fn(w, h, |_, _| rng.next_u64() as u8).unwrap();
            let bx = bx % w;
            let bw = bw.min(w - bx);
            let boxes = [BBox::new(bx, 0, bw, h).unwrap()];
            let (f1, b1) = hflip(&img, &boxes);
            let (f2, b2) = hflip(&f1, &b1);
            proptest::prop_assert_eq!(f2, img);
            proptest::prop_assert_eq!(b2, boxes.to_vec());
        }

        #[test]
        fn photometric_keeps_shape(alpha in 0.1f64..3.0, beta in -100f64..100.0, sigma in 0f64..50.0, seed: u64) {
            let img = gradient(13, 7);
            let a = brightness_contrast(&img, alpha, beta);
            let b = gaussian_noise(&img, sigma, seed);
            proptest::prop_assert_eq!((a.width(), a.height()), (13, 7));
            proptest::prop_assert_eq!((b.width(), b.height()), (13, 7));
        }
    }
}
