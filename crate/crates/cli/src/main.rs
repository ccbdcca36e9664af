//! `qrmap`: render parameter spaces and dynamical planes, classify single
//! parameters, and run the period-curve computations.
//!
//! Exit status: 0 on success, 1 on a runtime failure, 2 on bad usage.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use qrmap_core::algebra::curve::{genus_of_curve, homogenize, iterate_critical, projective_period_curve};
use qrmap_core::render::{
    components, default_min_pixels, named_color, render_dynamical_plane, with_workers, ColorMode, Overlay,
    ParamRender, RasterImage,
};
use qrmap_core::{inspect, BasinGridConfig, Family, IterConfig, ParamWindow, Preset};
use serde_json::json;

#[derive(Parser)]
#[command(name = "qrmap", version, about = "Hyperbolic components of quadratic rational maps with a periodic critical point")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a parameter space image.
    RenderParam(RenderParamArgs),
    /// Render the basins of one map's critical cycle.
    RenderDyn(RenderDynArgs),
    /// Classify one parameter and print the result as JSON.
    Classify(ClassifyArgs),
    /// Singular points, multiplicity sequences and genus of the period-n curve.
    Genus {
        #[arg(value_parser = clap::value_parser!(u32).range(3..=5))]
        n: u32,
    },
    /// Print P_n, Q_n and the homogenization of P_n.
    Pn {
        #[arg(value_parser = clap::value_parser!(u32).range(3..=8))]
        n: u32,
    },
    /// Count the 4-connected components of one color in an image.
    Components(ComponentsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Ppm,
    Png,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Ppm => "ppm",
            Format::Png => "png",
        }
    }
}

#[derive(Args)]
struct IterArgs {
    /// Iteration budget per orbit.
    #[arg(long)]
    max_iter: Option<u32>,
    /// Chordal radius counted as reaching a cycle point.
    #[arg(long)]
    eps: Option<f64>,
}

impl IterArgs {
    fn config(&self) -> IterConfig {
        let d = IterConfig::default();
        IterConfig {
            eps_attract: self.eps.unwrap_or(d.eps_attract),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            ..d
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long)]
    out: PathBuf,
    /// Defaults to png for a .png path, ppm otherwise.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Rendering threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

impl OutputArgs {
    fn format(&self) -> Format {
        self.format.unwrap_or_else(|| match self.out.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("png") => Format::Png,
            _ => Format::Ppm,
        })
    }
}

#[derive(Args)]
struct RenderParamArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    #[arg(long, default_value = "type", value_parser = parse_mode)]
    mode: ColorMode,
    /// Window center as RE,IM (default: the family's preset).
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    center: Option<Complex64>,
    #[arg(long)]
    half_width: Option<f64>,
    /// N or NxM pixels (default: the preset size).
    #[arg(long, value_parser = parse_size)]
    size: Option<(u32, u32)>,
    #[command(flatten)]
    iter: IterArgs,
    /// Flood-fill grid size (default: the preset's render grid).
    #[arg(long)]
    grid: Option<u32>,
    /// Finer grid for rechecking flood-fill joins; 0 turns it off.
    #[arg(long)]
    confirm_grid: Option<u32>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct RenderDynArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    /// Parameter t as RE,IM.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    param: Complex64,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0,0")]
    center: Complex64,
    #[arg(long, default_value_t = 3.0)]
    half_width: f64,
    #[arg(long, value_parser = parse_size, default_value = "800")]
    size: (u32, u32),
    #[arg(long, default_value = "segment", value_parser = parse_overlay)]
    overlay: Overlay,
    #[command(flatten)]
    iter: IterArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    /// Parameter t as RE,IM.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    param: Complex64,
    #[command(flatten)]
    iter: IterArgs,
    /// Flood-fill grid size.
    #[arg(long, default_value_t = BasinGridConfig::default().grid_size)]
    grid: u32,
}

#[derive(Args)]
struct ComponentsArgs {
    /// PPM or PNG image.
    image: PathBuf,
    #[arg(long, default_value = "red", value_parser = parse_color)]
    color: [u8; 3],
    /// Smallest component counted (default: max(8, width*height/32000)).
    #[arg(long)]
    min_pixels: Option<usize>,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: qrmap_core::families::FamilyParseError| e.to_string())
}

fn parse_mode(s: &str) -> Result<ColorMode, String> {
    s.parse()
}

fn parse_overlay(s: &str) -> Result<Overlay, String> {
    s.parse()
}

fn parse_color(s: &str) -> Result<[u8; 3], String> {
    named_color(s).ok_or_else(|| format!("unknown color {s:?}"))
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected RE,IM, got {s:?}"))?;
    let part = |p: &str| {
        p.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("not a finite number: {p:?}"))
    };
    Ok(Complex64::new(part(re)?, part(im)?))
}

fn parse_size(s: &str) -> Result<(u32, u32), String> {
    let dim = |p: &str| match p.trim().parse::<u32>() {
        Ok(0) => Err("size must be positive".to_string()),
        Ok(n) => Ok(n),
        Err(_) => Err(format!("not a pixel count: {p:?}")),
    };
    match s.split_once(['x', 'X']) {
        Some((w, h)) => Ok((dim(w)?, dim(h)?)),
        None => dim(s).map(|n| (n, n)),
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial image.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    // temp files are created 0600; give the output ordinary permissions
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644))?;
    }
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn encode(img: &RasterImage, format: Format) -> Result<Vec<u8>> {
    Ok(match format {
        Format::Ppm => img.to_ppm(),
        Format::Png => img.to_png()?,
    })
}

fn iter_json(cfg: &IterConfig) -> serde_json::Value {
    json!({ "max_iter": cfg.max_iter, "eps": cfg.eps_attract })
}

fn render_param(args: RenderParamArgs) -> Result<()> {
    let preset = Preset::for_family(args.family);
    let (w, h) = args.size.unwrap_or((preset.size, preset.size));
    let confirm = match args.confirm_grid {
        Some(0) => None,
        Some(g) => Some(g),
        None => preset.grid.confirm_grid_size,
    };
    let spec = ParamRender {
        family: args.family,
        mode: args.mode,
        window: ParamWindow {
            center: args.center.unwrap_or(preset.center),
            half_width: args.half_width.unwrap_or(preset.half_width),
            pixels_x: w,
            pixels_y: h,
        },
        iter: args.iter.config(),
        grid: BasinGridConfig {
            grid_size: args.grid.unwrap_or(preset.grid.grid_size),
            confirm_grid_size: confirm,
            ..preset.grid
        },
    };
    spec.validate().map_err(|e| anyhow!(e))?;
    let format = args.output.format();
    let mut settings = json!({
        "command": "render-param",
        "family": spec.family,
        "mode": spec.mode,
        "center": [spec.window.center.re, spec.window.center.im],
        "half_width": spec.window.half_width,
        "size": [w, h],
        "grid": spec.grid.grid_size,
        "confirm_grid": spec.grid.confirm_grid_size.unwrap_or(0),
        "format": format.name(),
        "out": args.output.out,
    });
    settings.as_object_mut().expect("object").extend(iter_json(&spec.iter).as_object().expect("object").clone());
    println!("{settings}");
    let img = with_workers(args.output.workers, || spec.render());
    write_atomic(&args.output.out, &encode(&img, format)?)
}

fn render_dyn(args: RenderDynArgs) -> Result<()> {
    let map = args.family.map_for(args.param).map_err(|e| anyhow!("{e}"))?;
    let window = ParamWindow::new(args.center, args.half_width, args.size.0, args.size.1)?;
    let cfg = args.iter.config();
    cfg.validate().map_err(|e| anyhow!(e))?;
    let format = args.output.format();
    let mut settings = json!({
        "command": "render-dyn",
        "family": args.family,
        "param": [args.param.re, args.param.im],
        "center": [window.center.re, window.center.im],
        "half_width": window.half_width,
        "size": [window.pixels_x, window.pixels_y],
        "overlay": args.overlay,
        "format": format.name(),
        "out": args.output.out,
    });
    settings.as_object_mut().expect("object").extend(iter_json(&cfg).as_object().expect("object").clone());
    println!("{settings}");
    let img = with_workers(args.output.workers, || {
        render_dynamical_plane(&map, args.family.period(), &window, &cfg, args.overlay)
    })?;
    write_atomic(&args.output.out, &encode(&img, format)?)
}

fn classify(args: ClassifyArgs) -> Result<()> {
    let cfg = args.iter.config();
    cfg.validate().map_err(|e| anyhow!(e))?;
    let grid = BasinGridConfig { grid_size: args.grid, ..BasinGridConfig::default() };
    grid.validate().map_err(|e| anyhow!(e))?;
    let report = inspect(args.family, args.param, &cfg, &grid);
    let mut out = serde_json::to_value(report.summary())?;
    out["settings"] = json!({ "grid": grid.grid_size, "max_iter": cfg.max_iter, "eps": cfg.eps_attract });
    println!("{out}");
    Ok(())
}

fn genus(n: u32) -> Result<()> {
    let h = projective_period_curve(n)?;
    let report = genus_of_curve(&h)?;
    println!("curve: P{n} = 0, homogenized: {h}");
    println!("degree: {}", report.degree);
    if report.resolutions.is_empty() {
        println!("singular points: none");
    }
    for r in &report.resolutions {
        println!("singular point {} (chart {} = 1): multiplicities {:?}", r.point, r.chart, r.multiplicity_sequence);
        for step in &r.steps {
            println!(
                "  depth {}: {}; local equation {}; multiplicity {}; tangents {}",
                step.depth,
                step.substitution,
                step.local_equation,
                step.multiplicity,
                step.directions.join(", ")
            );
        }
    }
    println!("genus: {}", report.genus);
    Ok(())
}

fn pn(n: u32) -> Result<()> {
    let q = iterate_critical(n)?;
    let d = q.p.total_degree().unwrap_or(0);
    println!("P{n} = {}", q.p);
    println!("Q{n} = {}", q.q);
    println!("H{n} = {}", homogenize(&q.p, d)?);
    Ok(())
}

fn count_components(args: ComponentsArgs) -> Result<()> {
    let bytes = std::fs::read(&args.image).with_context(|| format!("reading {}", args.image.display()))?;
    let img = RasterImage::decode(&bytes)?;
    let min = args.min_pixels.unwrap_or_else(|| default_min_pixels(img.width, img.height));
    let n = components(&img, args.color).iter().filter(|c| c.pixels.len() >= min).count();
    println!("{n}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::RenderParam(a) => render_param(a),
        Command::RenderDyn(a) => render_dyn(a),
        Command::Classify(a) => classify(a),
        Command::Genus { n } => genus(n),
        Command::Pn { n } => pn(n),
        Command::Components(a) => count_components(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
