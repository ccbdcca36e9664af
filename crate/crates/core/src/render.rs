//! Images of parameter space and of dynamical planes, component counting,
//! and PPM/PNG encoding.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{classify_map, BasinGridConfig, Kind};
use crate::families::{Family, ParamWindow};
use crate::sphere::{detect_attraction, IterConfig, MapFamily, QuadMap, SpherePoint};

pub type Rgb = [u8; 3];

pub const RED: Rgb = [255, 0, 0];
pub const GREEN: Rgb = [0, 255, 0];
pub const BLUE: Rgb = [0, 0, 255];
pub const WHITE: Rgb = [255, 255, 255];
pub const BLACK: Rgb = [0, 0, 0];
pub const DARK_GRAY: Rgb = [64, 64, 64];

/// Colors for cycle points past `f(1)`, used in order and then repeated.
pub const EXTRA_PHASE_COLORS: [Rgb; 8] = [
    [255, 255, 0],
    [0, 255, 255],
    [255, 0, 255],
    [255, 128, 0],
    [128, 0, 255],
    [0, 128, 64],
    [128, 128, 255],
    [160, 82, 45],
];

/// Overlay marks in dynamical-plane images.
pub const FREE_CRITICAL_MARK: Rgb = [255, 255, 0];
pub const ATTRACTOR_MARK: Rgb = [255, 0, 255];
pub const SEGMENT_MARK: Rgb = [0, 255, 255];

pub fn named_color(name: &str) -> Option<Rgb> {
    Some(match name.to_ascii_lowercase().as_str() {
        "red" => RED,
        "green" => GREEN,
        "blue" => BLUE,
        "white" => WHITE,
        "black" => BLACK,
        "gray" | "grey" | "darkgray" | "dark-gray" => DARK_GRAY,
        _ => return None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorMode {
    Phase,
    Type,
}

impl FromStr for ColorMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "phase" => Ok(ColorMode::Phase),
            "type" => Ok(ColorMode::Type),
            _ => Err(format!("unknown mode {s:?} (expected phase or type)")),
        }
    }
}

impl fmt::Display for ColorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColorMode::Phase => "phase",
            ColorMode::Type => "type",
        })
    }
}

/// Color of cycle index `k` by the role of that cycle point: infinity red,
/// 0 green, 1 blue, f(1) white, then the extra table.
pub fn phase_color(family: MapFamily, k: usize) -> Rgb {
    match (family, k) {
        (MapFamily::V1, _) => RED,
        (_, 0) => GREEN,
        (_, 1) => RED,
        (_, 2) => BLUE,
        (_, 3) => WHITE,
        (_, k) => EXTRA_PHASE_COLORS[(k - 4) % EXTRA_PHASE_COLORS.len()],
    }
}

pub fn type_color(kind: Kind) -> Rgb {
    match kind {
        Kind::Type1 => WHITE,
        Kind::Type2 => RED,
        Kind::Type3 => GREEN,
        Kind::NotAttracted => BLACK,
        Kind::InvalidParam => DARK_GRAY,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RasterImage {
    pub width: u32,
    pub height: u32,
    /// Row-major RGB, top row first.
    pub pixels: Vec<u8>,
}

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("malformed PPM: {0}")]
    Ppm(String),
    #[error("PNG decode: {0}")]
    PngDecode(#[from] png::DecodingError),
    #[error("PNG encode: {0}")]
    PngEncode(#[from] png::EncodingError),
    #[error("unsupported PNG layout {0:?}")]
    PngLayout(png::ColorType),
    #[error("unrecognized image format")]
    UnknownFormat,
}

impl RasterImage {
    pub fn filled(width: u32, height: u32, color: Rgb) -> Self {
        let pixels = color
            .iter()
            .copied()
            .cycle()
            .take(3 * width as usize * height as usize)
            .collect();
        RasterImage { width, height, pixels }
    }

    pub fn get(&self, i: u32, j: u32) -> Rgb {
        let k = 3 * (j as usize * self.width as usize + i as usize);
        [self.pixels[k], self.pixels[k + 1], self.pixels[k + 2]]
    }

    pub fn set(&mut self, i: u32, j: u32, color: Rgb) {
        let k = 3 * (j as usize * self.width as usize + i as usize);
        self.pixels[k..k + 3].copy_from_slice(&color);
    }

    pub fn count_color(&self, color: Rgb) -> usize {
        self.pixels.chunks_exact(3).filter(|p| *p == color).count()
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn from_ppm(bytes: &[u8]) -> Result<Self, ImageError> {
        let bad = |m: &str| ImageError::Ppm(m.to_string());
        let mut fields = Vec::new();
        let mut pos = 0;
        if !bytes.starts_with(b"P6") {
            return Err(bad("missing P6 magic"));
        }
        pos += 2;
        while fields.len() < 3 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            let start = pos;
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            if start == pos {
                return Err(bad("truncated header"));
            }
            let text = std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("header"))?;
            fields.push(text.parse::<u32>().map_err(|_| bad("header number"))?);
        }
        if fields[2] != 255 {
            return Err(bad("only maxval 255 is supported"));
        }
        // exactly one whitespace byte separates the header from the raster
        pos += 1;
        let (width, height) = (fields[0], fields[1]);
        let len = 3 * width as usize * height as usize;
        if bytes.len() < pos + len {
            return Err(bad("truncated raster"));
        }
        Ok(RasterImage { width, height, pixels: bytes[pos..pos + len].to_vec() })
    }

    pub fn to_png(&self) -> Result<Vec<u8>, ImageError> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width, self.height);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            let mut writer = enc.write_header()?;
            writer.write_image_data(&self.pixels)?;
        }
        Ok(out)
    }

    pub fn from_png(bytes: &[u8]) -> Result<Self, ImageError> {
        let mut decoder = png::Decoder::new(bytes);
        decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
        let mut reader = decoder.read_info()?;
        let mut buf = vec![0; reader.output_buffer_size()];
        let info = reader.next_frame(&mut buf)?;
        buf.truncate(info.buffer_size());
        let pixels = match info.color_type {
            png::ColorType::Rgb => buf,
            png::ColorType::Rgba => buf.chunks_exact(4).flat_map(|p| [p[0], p[1], p[2]]).collect(),
            png::ColorType::Grayscale => buf.iter().flat_map(|&g| [g, g, g]).collect(),
            png::ColorType::GrayscaleAlpha => buf.chunks_exact(2).flat_map(|p| [p[0], p[0], p[0]]).collect(),
            other => return Err(ImageError::PngLayout(other)),
        };
        Ok(RasterImage { width: info.width, height: info.height, pixels })
    }

    /// Decodes PPM or PNG by magic bytes.
    pub fn decode(bytes: &[u8]) -> Result<Self, ImageError> {
        if bytes.starts_with(b"P6") {
            Self::from_ppm(bytes)
        } else if bytes.starts_with(b"\x89PNG") {
            Self::from_png(bytes)
        } else {
            Err(ImageError::UnknownFormat)
        }
    }
}

/// Fills rows in parallel; each pixel depends only on its coordinates, so
/// the bytes do not depend on the number of workers.
fn render_rows<F>(width: u32, height: u32, pixel: F) -> RasterImage
where
    F: Fn(u32, u32) -> Rgb + Sync,
{
    let mut pixels = vec![0u8; 3 * width as usize * height as usize];
    pixels
        .par_chunks_mut(3 * width as usize)
        .enumerate()
        .for_each(|(j, row)| {
            for i in 0..width {
                let c = pixel(i, j as u32);
                row[3 * i as usize..3 * i as usize + 3].copy_from_slice(&c);
            }
        });
    RasterImage { width, height, pixels }
}

/// Runs `f` on a dedicated pool of `workers` threads (0 means the default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    pool.install(f)
}

/// Color of one parameter.
pub fn parameter_color(
    family: Family,
    t: Complex64,
    mode: ColorMode,
    cfg: &IterConfig,
    grid: &BasinGridConfig,
) -> Rgb {
    let Ok(map) = family.map_for(t) else {
        return DARK_GRAY;
    };
    let Ok(cycle) = map.critical_cycle(family.period()) else {
        return DARK_GRAY;
    };
    match mode {
        ColorMode::Type => type_color(classify_map(&map, family, &cycle, cfg, grid).kind),
        // the phase picture needs no basin tests
        ColorMode::Phase => match detect_attraction(&map, map.free_critical_point(), &cycle, cfg) {
            Some(a) => phase_color(map.family(), a.phase),
            None => BLACK,
        },
    }
}

pub fn render_parameter_space(
    family: Family,
    window: &ParamWindow,
    mode: ColorMode,
    cfg: &IterConfig,
    grid: &BasinGridConfig,
) -> RasterImage {
    render_rows(window.pixels_x, window.pixels_y, |i, j| {
        parameter_color(family, window.pixel_center(i, j), mode, cfg, grid)
    })
}

/// Everything that determines a parameter-space image. Two equal specs
/// render to identical bytes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamRender {
    pub family: Family,
    pub mode: ColorMode,
    pub window: ParamWindow,
    pub iter: IterConfig,
    pub grid: BasinGridConfig,
}

impl ParamRender {
    /// The shipped preset view of `family`.
    pub fn preset(family: Family, mode: ColorMode) -> Self {
        let preset = crate::presets::Preset::for_family(family);
        ParamRender {
            family,
            mode,
            window: preset.window(),
            iter: IterConfig::default(),
            grid: preset.grid,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        self.window.validate().map_err(|e| e.to_string())?;
        self.iter.validate()?;
        self.grid.validate()
    }

    pub fn render(&self) -> RasterImage {
        render_parameter_space(self.family, &self.window, self.mode, &self.iter, &self.grid)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Overlay {
    None,
    /// Free critical point and its attractor.
    Markers,
    /// Markers plus the straight segment between them.
    Segment,
}

impl FromStr for Overlay {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Overlay::None),
            "markers" => Ok(Overlay::Markers),
            "segment" => Ok(Overlay::Segment),
            _ => Err(format!("unknown overlay {s:?} (expected none, markers or segment)")),
        }
    }
}

/// Pixel containing `z`, if it lies in the window.
pub fn point_to_pixel(window: &ParamWindow, z: Complex64) -> Option<(u32, u32)> {
    let (w, h) = (window.pixels_x as f64, window.pixels_y as f64);
    let x = ((z.re - window.center.re) / window.half_width + 1.0) * 0.5 * w;
    let y = (1.0 - (z.im - window.center.im) / window.half_height()) * 0.5 * h;
    (x >= 0.0 && x < w && y >= 0.0 && y < h).then(|| (x as u32, y as u32))
}

fn mark(img: &mut RasterImage, window: &ParamWindow, z: SpherePoint, color: Rgb) {
    let Some((i, j)) = z.finite().and_then(|z| point_to_pixel(window, z)) else {
        return;
    };
    for d in -3i64..=3 {
        for (x, y) in [(i as i64 + d, j as i64), (i as i64, j as i64 + d)] {
            if x >= 0 && y >= 0 && x < img.width as i64 && y < img.height as i64 {
                img.set(x as u32, y as u32, color);
            }
        }
    }
}

/// Basins of the critical cycle of `map`, colored by phase, with optional
/// marks at the free critical point, its attractor, and the segment joining
/// them (drawn in the chart used by the segment test).
pub fn render_dynamical_plane(
    map: &QuadMap,
    n: usize,
    window: &ParamWindow,
    cfg: &IterConfig,
    overlay: Overlay,
) -> Result<RasterImage, crate::sphere::DynamicsError> {
    let cycle = map.critical_cycle(n)?;
    let mut img = render_rows(window.pixels_x, window.pixels_y, |i, j| {
        let z = SpherePoint::new(window.pixel_center(i, j));
        match detect_attraction(map, z, &cycle, cfg) {
            Some(a) => phase_color(map.family(), a.phase),
            None => BLACK,
        }
    });
    if overlay == Overlay::None {
        return Ok(img);
    }
    let z_star = map.free_critical_point();
    let attractor = detect_attraction(map, z_star, &cycle, cfg).map(|a| cycle[a.phase]);
    if let (Overlay::Segment, Some(p_star)) = (overlay, attractor) {
        let invert = !matches!(p_star, SpherePoint::Finite(p) if p.norm() <= crate::classifier::CHART_SWITCH_RADIUS);
        let chart = |z: SpherePoint| if invert { z.invert() } else { z };
        if let (Some(a), Some(b)) = (chart(z_star).finite(), chart(p_star).finite()) {
            let samples = 4 * window.pixels_x.max(window.pixels_y);
            for s in 0..=samples {
                let w = a + (b - a) * (s as f64 / samples as f64);
                let z = chart(SpherePoint::new(w));
                if let Some((i, j)) = z.finite().and_then(|z| point_to_pixel(window, z)) {
                    img.set(i, j, SEGMENT_MARK);
                }
            }
        }
    }
    if let Some(p_star) = attractor {
        mark(&mut img, window, p_star, ATTRACTOR_MARK);
    }
    mark(&mut img, window, z_star, FREE_CRITICAL_MARK);
    Ok(img)
}

/// A 4-connected region of one color.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub pixels: Vec<(u32, u32)>,
}

impl Component {
    pub fn contains(&self, p: (u32, u32)) -> bool {
        self.pixels.contains(&p)
    }
}

/// All 4-connected components of exactly `color`, in raster order of their
/// first pixel.
pub fn components(img: &RasterImage, color: Rgb) -> Vec<Component> {
    let (w, h) = (img.width as usize, img.height as usize);
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    for start in 0..w * h {
        if seen[start] || img.pixels[3 * start..3 * start + 3] != color {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut pixels = Vec::new();
        while let Some(k) = queue.pop_front() {
            let (i, j) = (k % w, k / w);
            pixels.push((i as u32, j as u32));
            let mut visit = |n: usize| {
                if !seen[n] && img.pixels[3 * n..3 * n + 3] == color {
                    seen[n] = true;
                    queue.push_back(n);
                }
            };
            if i > 0 {
                visit(k - 1);
            }
            if i + 1 < w {
                visit(k + 1);
            }
            if j > 0 {
                visit(k - w);
            }
            if j + 1 < h {
                visit(k + w);
            }
        }
        out.push(Component { pixels });
    }
    out
}

/// `max(8, w h / 32000)`: 20 at 800x800.
pub fn default_min_pixels(width: u32, height: u32) -> usize {
    (width as usize * height as usize / 32000).max(8)
}

pub fn count_components(img: &RasterImage, color: Rgb, min_pixels: usize) -> usize {
    components(img, color)
        .iter()
        .filter(|c| c.pixels.len() >= min_pixels)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppm_header_and_roundtrip() {
        let mut img = RasterImage::filled(3, 2, BLACK);
        img.set(2, 1, RED);
        let bytes = img.to_ppm();
        assert!(bytes.starts_with(b"P6\n3 2\n255\n"));
        assert_eq!(bytes.len(), 11 + 18);
        assert_eq!(RasterImage::from_ppm(&bytes).unwrap(), img);
        assert_eq!(RasterImage::decode(&img.to_png().unwrap()).unwrap(), img);
    }

    #[test]
    fn component_examples() {
        assert_eq!(count_components(&RasterImage::filled(10, 10, RED), RED, 1), 1);
        let mut checker = RasterImage::filled(10, 10, BLACK);
        for j in 0..10 {
            for i in 0..10 {
                if (i + j) % 2 == 0 {
                    checker.set(i, j, RED);
                }
            }
        }
        assert_eq!(count_components(&checker, RED, 2), 0);
        assert_eq!(count_components(&checker, RED, 1), 50);
        assert_eq!(count_components(&RasterImage::filled(4, 4, BLACK), RED, 1), 0);
        assert_eq!(default_min_pixels(800, 800), 20);
        assert_eq!(default_min_pixels(10, 10), 8);
    }

    #[test]
    fn single_pixel_render() {
        let w = ParamWindow::new(Complex64::new(1.0, 0.0), 0.01, 1, 1).unwrap();
        let img = render_parameter_space(
            Family::V3,
            &w,
            ColorMode::Type,
            &IterConfig::default(),
            &BasinGridConfig::default(),
        );
        assert_eq!(img.pixels, RED.to_vec());
    }

    #[test]
    fn phase_palette_roles() {
        assert_eq!(phase_color(MapFamily::V1, 0), RED);
        assert_eq!(phase_color(MapFamily::V2, 0), GREEN);
        assert_eq!(phase_color(MapFamily::V2, 1), RED);
        assert_eq!(phase_color(MapFamily::Vbc, 2), BLUE);
        assert_eq!(phase_color(MapFamily::Vbc, 3), WHITE);
        assert_eq!(phase_color(MapFamily::Vbc, 4), EXTRA_PHASE_COLORS[0]);
    }
}
