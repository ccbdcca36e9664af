use num_complex::Complex64;
use qrmap_core::classifier::{flood_fill_test, segment_test};
use qrmap_core::{
    chordal_distance, classify, detect_attraction, BasinGridConfig, Family, IterConfig, Kind, Method, Preset,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn grid(size: u32) -> BasinGridConfig {
    BasinGridConfig { grid_size: size, ..BasinGridConfig::default() }
}

/// Parameters in the family's preset window whose free critical point is
/// attracted to the critical cycle.
fn attracted_fixtures(family: Family, count: usize, seed: u64) -> Vec<Complex64> {
    let p = Preset::for_family(family);
    let cfg = IterConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let t = p.center + c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * p.half_width;
        let Ok(map) = family.map_for(t) else { continue };
        let cycle = map.critical_cycle(family.period()).unwrap();
        if detect_attraction(&map, map.free_critical_point(), &cycle, &cfg).is_some() {
            out.push(t);
        }
    }
    out
}

#[test]
fn v3_type3_fixture() {
    let cfg = IterConfig::default();
    for t in [c(-3.0, 0.0), c(3.0, 0.0)] {
        let r = classify(Family::V3, t, &cfg, &BasinGridConfig::default());
        assert_eq!(r.kind, Kind::Type3, "v3 at {t}");
        let map = Family::V3.map_for(t).unwrap();
        let cycle = map.critical_cycle(3).unwrap();
        let phase = r.phase.unwrap();
        let z = map.free_critical_point();
        assert!(!segment_test(&map, &cycle, phase, z, &cfg, &BasinGridConfig::default()));
        assert!(!flood_fill_test(&map, &cycle, phase, z, &cfg, &BasinGridConfig::default()));
    }
}

#[test]
fn phase_indexes_the_attracting_cycle_point() {
    let cfg = IterConfig::default();
    for family in [Family::V2, Family::V3, Family::V4A, Family::V4B] {
        let n = family.period();
        for t in attracted_fixtures(family, 40, 11) {
            let r = classify(family, t, &cfg, &BasinGridConfig::default());
            let phase = r.phase.unwrap_or_else(|| panic!("{family} at {t}: {r:?}"));
            assert!(phase < n);
            let map = family.map_for(t).unwrap();
            let cycle = map.critical_cycle(n).unwrap();
            // steps rounded up to whole periods, then three more periods
            let k = (r.steps as usize).div_ceil(n) * n + 3 * n;
            let w = map.iterate(map.free_critical_point(), k);
            assert!(chordal_distance(w, cycle[phase]) < cfg.eps_attract, "{family} at {t}");
        }
    }
}

#[test]
fn classification_is_stable_between_grid_512_and_1024() {
    let cfg = IterConfig::default();
    for family in [Family::V2, Family::V3, Family::V4A, Family::V4B] {
        for t in attracted_fixtures(family, 50, 12) {
            let coarse = classify(family, t, &cfg, &grid(512));
            let fine = classify(family, t, &cfg, &grid(1024));
            assert_eq!(coarse, fine, "{family} at {t}");
        }
    }
}

// Expected to fail: a 200x200 sweep of the preset window finds six such
// parameters, stable from grid 1024 to 4096. See the pinned case below.
#[test]
#[ignore = "counterexamples exist near -0.42±0.62i, 0.14±1.74i, -0.38±1.1i"]
fn v2_has_no_type2_found_only_by_flood_fill() {
    let p = Preset::for_family(Family::V2);
    let window = p.window_sized(200, 200);
    let cfg = IterConfig::default();
    let g = BasinGridConfig::default();
    let hits: Vec<Complex64> = (0..200u32 * 200)
        .into_par_iter()
        .filter_map(|k| {
            let t = window.pixel_to_parameter(k % 200, k / 200).unwrap();
            let r = classify(Family::V2, t, &cfg, &g);
            (r.kind == Kind::Type2 && r.method == Method::Floodfill).then_some(t)
        })
        .collect();
    assert!(hits.is_empty(), "{} parameters, first {:?}", hits.len(), hits.first());
}

#[test]
fn v2_type2_reached_only_by_flood_fill() {
    let cfg = IterConfig::default();
    for a in [c(-0.42, 0.62), c(-0.42, -0.62)] {
        let map = Family::V2.map_for(a).unwrap();
        let cycle = map.critical_cycle(2).unwrap();
        let z = map.free_critical_point();
        let reference = classify(Family::V2, a, &cfg, &grid(1024));
        assert_eq!((reference.kind, reference.method), (Kind::Type2, Method::Floodfill), "v2 at {a}");
        assert_eq!(classify(Family::V2, a, &cfg, &grid(2048)), reference, "v2 at {a}");
        assert!(!segment_test(&map, &cycle, reference.phase.unwrap(), z, &cfg, &grid(1024)));
    }
}

#[test]
fn nonpositive_settings_are_rejected() {
    assert!(grid(1).validate().is_err());
    assert!(BasinGridConfig { confirm_grid_size: Some(32), ..grid(64) }.validate().is_err());
    assert!(IterConfig { max_iter: 0, ..IterConfig::default() }.validate().is_err());
    assert!(IterConfig { eps_attract: f64::NAN, ..IterConfig::default() }.validate().is_err());
}
