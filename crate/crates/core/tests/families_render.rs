use num_complex::Complex64;
use proptest::prelude::*;
use qrmap_core::render::{components, count_components, render_parameter_space, ColorMode, RasterImage, BLACK, GREEN, RED};
use qrmap_core::{BasinGridConfig, Family, IterConfig, ParamWindow, Preset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn param(family: Family, t: Complex64, name: &str) -> Complex64 {
    let map = family.map_for(t).unwrap();
    map.params().into_iter().find(|(k, _)| *k == name).unwrap().1
}

fn p4(b: Complex64, c: Complex64) -> Complex64 {
    1.0 + 3.0 * b + 2.0 * b * b + 3.0 * c + 3.0 * b * c + c * c
}

fn random_t(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

#[test]
fn family_maps_lie_on_their_curves() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let t = random_t(&mut rng, 10.0);
        let (b, c) = (param(Family::V3, t, "b"), param(Family::V3, t, "c"));
        assert!((1.0 + b + c).norm() < 1e-12, "v3 at {t}");
        for f in [Family::V4A, Family::V4B] {
            let Ok(_) = f.map_for(t) else { continue };
            let (b, c) = (param(f, t, "b"), param(f, t, "c"));
            let scale = 1.0 + b.norm_sqr() + c.norm_sqr();
            assert!(p4(b, c).norm() < 1e-9 * scale, "{f} at {t}: P4 = {}", p4(b, c));
        }
    }
}

#[test]
fn projections_are_injective_on_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for f in [Family::V4A, Family::V4B] {
        let pts: Vec<(Complex64, Complex64, Complex64)> = (0..300)
            .map(|_| random_t(&mut rng, 5.0))
            .filter(|t| f.map_for(*t).is_ok())
            .map(|t| (t, param(f, t, "b"), param(f, t, "c")))
            .collect();
        for (i, (s, b1, c1)) in pts.iter().enumerate() {
            for (t, b2, c2) in &pts[i + 1..] {
                // t is recovered from (b, c) as a slope, so distinct slopes
                // must give distinct points
                let gap = (b1 - b2).norm() + (c1 - c2).norm();
                assert!(gap > 1e-9 * (s - t).norm(), "{f}: {s} and {t} both map to {b1}, {c1}");
            }
        }
    }
}

#[test]
fn v3_excludes_only_zero() {
    assert!(Family::V3.map_for(Complex64::new(0.0, 0.0)).is_err());
    assert!(Family::V3.map_for(Complex64::new(1e-12, 0.0)).is_ok());
    assert!(Family::V2.map_for(Complex64::new(0.0, 0.0)).is_err());
}

proptest! {
    #[test]
    fn pixel_to_parameter_is_affine(
        cx in -10.0..10.0f64, cy in -10.0..10.0f64, hw in 1e-6..20.0f64,
        w in 2u32..300, h in 2u32..300, i in 0u32..299, j in 0u32..299,
    ) {
        let window = ParamWindow::new(Complex64::new(cx, cy), hw, w, h).unwrap();
        let (i, j) = (i % (w - 1), j % (h - 1));
        let at = |i, j| window.pixel_to_parameter(i, j).unwrap();
        let dx = at(i + 1, j) - at(i, j);
        let dy = at(i, j + 1) - at(i, j);
        // one rounding of center + offset per coordinate
        let tol = 4.0 * f64::EPSILON * (cx.abs() + cy.abs() + hw + window.half_height());
        prop_assert!((dx - at(1, 0) + at(0, 0)).norm() <= tol);
        prop_assert!((dy - at(0, 1) + at(0, 0)).norm() <= tol);
        prop_assert!((dx.re - 2.0 * hw / w as f64).abs() <= tol && dx.im.abs() <= tol);
        prop_assert!((dy.im + 2.0 * window.half_height() / h as f64).abs() <= tol && dy.re.abs() <= tol);
        prop_assert!(window.pixel_to_parameter(w, 0).is_err());
    }

    #[test]
    fn component_count_ignores_black_padding(
        w in 1u32..12, h in 1u32..12,
        cells in prop::collection::vec(0u8..3, 144),
        left in 0u32..5, top in 0u32..5, right in 0u32..5, bottom in 0u32..5,
        min in 1usize..4,
    ) {
        let palette = [BLACK, RED, GREEN];
        let mut img = RasterImage::filled(w, h, BLACK);
        for j in 0..h {
            for i in 0..w {
                img.set(i, j, palette[cells[(j * 12 + i) as usize] as usize]);
            }
        }
        let mut padded = RasterImage::filled(w + left + right, h + top + bottom, BLACK);
        for j in 0..h {
            for i in 0..w {
                padded.set(i + left, j + top, img.get(i, j));
            }
        }
        for color in [RED, GREEN] {
            prop_assert_eq!(count_components(&padded, color, min), count_components(&img, color, min));
            let total: usize = components(&img, color).iter().map(|c| c.pixels.len()).sum();
            prop_assert_eq!(total, img.count_color(color));
        }
    }
}

fn assert_mirror_symmetric(img: &RasterImage, what: &str) {
    let (w, h) = (img.width, img.height);
    let mut off = Vec::new();
    // the outermost ring is excluded
    for j in 1..h / 2 {
        for i in 1..w - 1 {
            if img.get(i, j) != img.get(i, h - 1 - j) {
                off.push((i, j));
            }
        }
    }
    assert!(off.is_empty(), "{what}: {} asymmetric pixels, first {:?}", off.len(), off.first());
}

#[test]
fn type_images_are_conjugation_symmetric() {
    let cfg = IterConfig::default();
    for (family, hw) in [(Family::V1, 1.6), (Family::V3, 4.0)] {
        let p = Preset::for_family(family);
        let window = ParamWindow::new(Complex64::new(p.center.re, 0.0), hw, 90, 70).unwrap();
        let img = render_parameter_space(family, &window, ColorMode::Type, &cfg, &p.grid);
        assert_mirror_symmetric(&img, family.tag());
    }
}

#[test]
fn phase_images_are_conjugation_symmetric() {
    let window = ParamWindow::new(Complex64::new(0.0, 0.0), 4.0, 80, 80).unwrap();
    let img = render_parameter_space(Family::V2, &window, ColorMode::Phase, &IterConfig::default(), &BasinGridConfig::default());
    assert_mirror_symmetric(&img, "v2 phase");
}
