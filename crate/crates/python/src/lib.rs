//! Python module `qrmap`. Images come back as encoded PPM or PNG bytes and
//! classifications as dicts shaped like the CLI's JSON.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};
use qrmap_core::algebra::curve::{genus_of_curve, iterate_critical, projective_period_curve};
use qrmap_core::render::{
    count_components as count, default_min_pixels, named_color, render_dynamical_plane, ColorMode, Overlay,
    ParamRender, RasterImage,
};
use qrmap_core::{inspect, BasinGridConfig, Family, IterConfig, ParamWindow, Preset};

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn family(tag: &str) -> PyResult<Family> {
    tag.parse().map_err(value_error)
}

fn iter_config(max_iter: Option<u32>, eps: Option<f64>) -> PyResult<IterConfig> {
    let d = IterConfig::default();
    let cfg = IterConfig {
        max_iter: max_iter.unwrap_or(d.max_iter),
        eps_attract: eps.unwrap_or(d.eps_attract),
        ..d
    };
    cfg.validate().map_err(value_error)?;
    Ok(cfg)
}

fn encode<'py>(py: Python<'py>, img: &RasterImage, format: &str) -> PyResult<Bound<'py, PyBytes>> {
    let bytes = match format.to_ascii_lowercase().as_str() {
        "ppm" => img.to_ppm(),
        "png" => img.to_png().map_err(value_error)?,
        other => return Err(value_error(format!("unknown format {other:?} (expected ppm or png)"))),
    };
    Ok(PyBytes::new_bound(py, &bytes))
}

/// Tags of the parametrized families.
#[pyfunction]
fn families() -> Vec<&'static str> {
    qrmap_core::families::ALL_FAMILIES.iter().map(|f| f.tag()).collect()
}

#[pyfunction]
#[pyo3(signature = (family_tag, re, im=0.0, max_iter=None, eps=None, grid=None))]
fn classify<'py>(
    py: Python<'py>,
    family_tag: &str,
    re: f64,
    im: f64,
    max_iter: Option<u32>,
    eps: Option<f64>,
    grid: Option<u32>,
) -> PyResult<Bound<'py, PyAny>> {
    let f = family(family_tag)?;
    let cfg = iter_config(max_iter, eps)?;
    let d = BasinGridConfig::default();
    let grid = BasinGridConfig { grid_size: grid.unwrap_or(d.grid_size), ..d };
    grid.validate().map_err(value_error)?;
    let summary = py.allow_threads(|| inspect(f, Complex64::new(re, im), &cfg, &grid).summary());
    let text = serde_json::to_string(&summary).map_err(value_error)?;
    py.import_bound("json")?.call_method1("loads", (text,))
}

/// Parameter-space image; unset settings fall back to the family preset,
/// so equal arguments give the same bytes as `qrmap render-param`.
#[pyfunction]
#[pyo3(signature = (family_tag, mode="type", center=None, half_width=None, size=None, max_iter=None, eps=None, grid=None, confirm_grid=None, format="ppm"))]
#[allow(clippy::too_many_arguments)]
fn render_param<'py>(
    py: Python<'py>,
    family_tag: &str,
    mode: &str,
    center: Option<(f64, f64)>,
    half_width: Option<f64>,
    size: Option<(u32, u32)>,
    max_iter: Option<u32>,
    eps: Option<f64>,
    grid: Option<u32>,
    confirm_grid: Option<u32>,
    format: &str,
) -> PyResult<Bound<'py, PyBytes>> {
    let f = family(family_tag)?;
    let preset = Preset::for_family(f);
    let (w, h) = size.unwrap_or((preset.size, preset.size));
    let spec = ParamRender {
        family: f,
        mode: mode.parse::<ColorMode>().map_err(value_error)?,
        window: ParamWindow {
            center: center.map_or(preset.center, |(re, im)| Complex64::new(re, im)),
            half_width: half_width.unwrap_or(preset.half_width),
            pixels_x: w,
            pixels_y: h,
        },
        iter: iter_config(max_iter, eps)?,
        grid: BasinGridConfig {
            grid_size: grid.unwrap_or(preset.grid.grid_size),
            confirm_grid_size: match confirm_grid {
                Some(0) => None,
                Some(g) => Some(g),
                None => preset.grid.confirm_grid_size,
            },
            ..preset.grid
        },
    };
    spec.validate().map_err(value_error)?;
    let img = py.allow_threads(|| spec.render());
    encode(py, &img, format)
}

#[pyfunction]
#[pyo3(signature = (family_tag, re, im=0.0, center=(0.0, 0.0), half_width=3.0, size=512, overlay="segment", max_iter=None, eps=None, format="ppm"))]
#[allow(clippy::too_many_arguments)]
fn render_dynamical<'py>(
    py: Python<'py>,
    family_tag: &str,
    re: f64,
    im: f64,
    center: (f64, f64),
    half_width: f64,
    size: u32,
    overlay: &str,
    max_iter: Option<u32>,
    eps: Option<f64>,
    format: &str,
) -> PyResult<Bound<'py, PyBytes>> {
    let f = family(family_tag)?;
    let map = f.map_for(Complex64::new(re, im)).map_err(value_error)?;
    let window = ParamWindow::new(Complex64::new(center.0, center.1), half_width, size, size).map_err(value_error)?;
    let overlay: Overlay = overlay.parse().map_err(value_error)?;
    let cfg = iter_config(max_iter, eps)?;
    let img = py
        .allow_threads(|| render_dynamical_plane(&map, f.period(), &window, &cfg, overlay))
        .map_err(value_error)?;
    encode(py, &img, format)
}

/// Number of 4-connected regions of `color` with at least `min_pixels` pixels.
#[pyfunction]
#[pyo3(signature = (image, color="red", min_pixels=None))]
fn count_components(image: &[u8], color: &str, min_pixels: Option<usize>) -> PyResult<usize> {
    let img = RasterImage::decode(image).map_err(value_error)?;
    let rgb = named_color(color).ok_or_else(|| value_error(format!("unknown color {color:?}")))?;
    Ok(count(&img, rgb, min_pixels.unwrap_or_else(|| default_min_pixels(img.width, img.height))))
}

/// Geometric genus of the period-n curve with its singular points and
/// multiplicity sequences.
#[pyfunction]
fn genus<'py>(py: Python<'py>, n: u32) -> PyResult<Bound<'py, PyDict>> {
    if !(3..=5).contains(&n) {
        return Err(value_error(format!("genus is computed for n = 3, 4, 5, got {n}")));
    }
    let report = py.allow_threads(|| projective_period_curve(n).and_then(|h| genus_of_curve(&h)));
    let report = report.map_err(value_error)?;
    let out = PyDict::new_bound(py);
    out.set_item("degree", report.degree)?;
    out.set_item("genus", report.genus)?;
    let points: Vec<(String, Vec<u32>)> = report
        .resolutions
        .iter()
        .map(|r| (r.point.to_string(), r.multiplicity_sequence.clone()))
        .collect();
    out.set_item("singular_points", points)?;
    Ok(out)
}

/// `P_n` as text.
#[pyfunction]
fn period_polynomial(n: u32) -> PyResult<String> {
    Ok(iterate_critical(n).map_err(value_error)?.p.to_string())
}

#[pymodule]
fn qrmap(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(families, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(render_param, m)?)?;
    m.add_function(wrap_pyfunction!(render_dynamical, m)?)?;
    m.add_function(wrap_pyfunction!(count_components, m)?)?;
    m.add_function(wrap_pyfunction!(genus, m)?)?;
    m.add_function(wrap_pyfunction!(period_polynomial, m)?)?;
    Ok(())
}
