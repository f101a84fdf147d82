//! One function per subcommand. Results go to `out`; warnings to stderr.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use dualprec::dataset::csv::{read_csv_file, write_csv_file};
use dualprec::dataset::glb::extract_points_from_glb_file;
use dualprec::fractal::{
    gen_random_2d, julia_quat_points, mandelbulb_points, menger_points, sierpinski_points,
    JuliaParams, MandelbrotView, MandelbulbParams, MengerParams, SierpinskiParams,
};
use dualprec::precision::{
    collapse_ratio, error_report, render_mandelbrot_image, zoom_iterations, ErrorReport,
    TransformStack,
};
use dualprec::{dataset_stats, Dataset, Precision};
use dualprec_render::{
    build_pipeline, init_context, release_buffer, render_and_measure, upload_dataset, CameraState,
    Context, ContextOptions, Pipeline, PipelineVariant, RenderError, SoftwareConfig,
};

use crate::cli::{
    AnalyzeArgs, BenchArgs, Command, ConvertArgs, GenerateArgs, Generator, MandelbrotArgs,
    StackKind, ViewArgs,
};
use crate::error::{CliError, Result};
use crate::report::{BenchReport, BenchRow, RowStatus};
use crate::suite::{suite_dataset, SUITE};

pub fn tool_version() -> String {
    format!("dpbench {}", env!("CARGO_PKG_VERSION"))
}

pub fn execute(command: &Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Generate(a) => generate(a, out),
        Command::Convert(a) => convert(a, out),
        Command::Analyze(a) => analyze(a, out),
        Command::Bench(a) => bench(a, out).map(|_| ()),
        Command::Mandelbrot(a) => mandelbrot(a, out),
        Command::View(a) => view(a, out),
    }
}

fn say(out: &mut dyn Write, line: impl std::fmt::Display) -> Result<()> {
    writeln!(out, "{line}").map_err(CliError::io(Path::new("<stdout>")))
}

/// CSV, or GLB when the extension says so.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let glb = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("glb"));
    if glb {
        extract_points_from_glb_file(path)
    } else {
        read_csv_file(path)
    }
    .map_err(CliError::dataset(path))
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            fs::create_dir_all(dir).map_err(CliError::io(dir))
        }
        _ => Ok(()),
    }
}

fn write_dataset(d: &Dataset, path: &Path, out: &mut dyn Write) -> Result<()> {
    create_parent(path)?;
    write_csv_file(d, path).map_err(CliError::dataset(path))?;
    say(
        out,
        format_args!("{}: {} ({})", path.display(), dataset_stats(d)?, d.source),
    )
}

fn generate(a: &GenerateArgs, out: &mut dyn Write) -> Result<()> {
    let d = match a.generator {
        Generator::Random2d => gen_random_2d(a.count, a.seed)?,
        Generator::Mandelbulb => {
            let mut p = MandelbulbParams {
                resolution: a.resolution,
                power: a.power,
                ..Default::default()
            };
            p.max_iterations = a.iterations.unwrap_or(p.max_iterations);
            mandelbulb_points(&p)?
        }
        Generator::Julia => {
            let mut p = JuliaParams {
                resolution: a.resolution,
                ..Default::default()
            };
            p.max_iter = a.iterations.unwrap_or(p.max_iter);
            julia_quat_points(&p)?
        }
        Generator::Menger => {
            let mut p = MengerParams {
                cube_size: a.size,
                dedup: a.dedup,
                ..Default::default()
            };
            p.max_iterations = a.iterations.unwrap_or(p.max_iterations);
            menger_points(&p)?
        }
        Generator::Sierpinski => sierpinski_points(&SierpinskiParams {
            n: a.depth,
            ..Default::default()
        })?,
        Generator::Suite => {
            for entry in &SUITE {
                let d = suite_dataset(entry, a.scale)?;
                write_dataset(&d, &a.out_dir.join(format!("{}.csv", d.name)), out)?;
            }
            return Ok(());
        }
    };
    if d.is_empty() {
        return Err(CliError::Usage(format!(
            "{} produced no points with these parameters",
            d.source
        )));
    }
    let path = a
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", d.name)));
    write_dataset(&d, &path, out)
}

fn convert(a: &ConvertArgs, out: &mut dyn Write) -> Result<()> {
    let d = extract_points_from_glb_file(&a.input).map_err(CliError::dataset(&a.input))?;
    let path = a
        .out
        .clone()
        .unwrap_or_else(|| a.input.with_extension("csv"));
    write_dataset(&d, &path, out)
}

fn analyze(a: &AnalyzeArgs, out: &mut dyn Write) -> Result<()> {
    let d = load_dataset(&a.dataset)?;
    let viewport = (a.width, a.height);
    let stack = match a.stack {
        StackKind::Identity => TransformStack::identity(viewport)?,
        StackKind::Far => TransformStack::far_translated(a.offset, viewport)?,
        StackKind::Camera => {
            let camera = CameraState::framing(&dataset_stats(&d)?);
            TransformStack::new(camera.mvp(a.width as f64 / a.height as f64), viewport)?
        }
    };
    let reports = [Precision::Binary32, Precision::Df64]
        .map(|p| error_report(&d, &stack, p))
        .into_iter()
        .collect::<dualprec::Result<Vec<ErrorReport>>>()?;
    let mut csv = format!("{}\n", ErrorReport::CSV_HEADER);
    for r in &reports {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    create_parent(&a.out)?;
    fs::write(&a.out, csv).map_err(CliError::io(&a.out))?;
    let stack_name = format!("{:?}", a.stack).to_lowercase();
    say(
        out,
        format_args!(
            "{} under the {stack_name} stack at {}x{}:",
            d.name, a.width, a.height
        ),
    )?;
    for r in &reports {
        say(out, format_args!("  {r}"))?;
    }
    say(out, format_args!("wrote {}", a.out.display()))
}

fn context_options(a: &BenchArgs) -> ContextOptions {
    let d = &a.device;
    ContextOptions {
        headless: true,
        backend: d.backend,
        device_index: d.device_index,
        shader_dir: d.shader_dir.clone(),
        resolution: (d.width, d.height),
        software: SoftwareConfig {
            shader_float64: !d.no_fp64,
            ..Default::default()
        },
        validation: d.validation,
    }
}

fn unsupported(e: &RenderError) -> Option<String> {
    matches!(e, RenderError::Feature { .. }).then(|| e.to_string())
}

fn bench_dataset(
    ctx: &mut Context,
    pipelines: &mut Vec<(PipelineVariant, Pipeline)>,
    a: &BenchArgs,
    d: &Dataset,
    rows: &mut Vec<BenchRow>,
) -> Result<()> {
    let stats = dataset_stats(d)?;
    let camera = CameraState::framing(&stats);
    for &kind in &a.variants.0 {
        let variant = PipelineVariant::new(kind, d.dims);
        let mut row = BenchRow {
            dataset: d.name.clone(),
            vertices: stats.count as u64,
            variant: kind,
            gpu_render_ms: None,
            fps: None,
            timing: None,
            status: RowStatus::Ok,
        };
        let measured = (|| {
            let pipeline = match pipelines.iter().find(|(v, _)| *v == variant) {
                Some((_, p)) => p.clone(),
                None => {
                    let p = build_pipeline(ctx, &variant)?;
                    pipelines.push((variant.clone(), p.clone()));
                    p
                }
            };
            let buffer = upload_dataset(ctx, d, &variant)?;
            // one untimed frame first, so first-touch costs stay out of the median
            let m = render_and_measure(ctx, &pipeline, &buffer, &camera, 1)
                .and_then(|_| render_and_measure(ctx, &pipeline, &buffer, &camera, a.frames));
            release_buffer(ctx, buffer);
            m
        })();
        match measured {
            Ok(m) => {
                if ctx.last_draw_vertex_count() != Some(stats.count as u32) {
                    return Err(CliError::Usage(format!(
                        "{}: drew {:?} vertices, dataset has {}",
                        d.name,
                        ctx.last_draw_vertex_count(),
                        stats.count
                    )));
                }
                row.gpu_render_ms = Some(m.gpu_render_ms);
                row.fps = Some(m.fps);
                row.timing = Some(m.timing);
            }
            Err(e) => match unsupported(&e) {
                Some(why) => {
                    eprintln!("warning: {} / {kind}: {why}", d.name);
                    row.status = RowStatus::Unsupported(why);
                }
                None => return Err(e.into()),
            },
        }
        rows.push(row);
    }
    Ok(())
}

/// Runs every dataset with every variant and writes the CSV and Markdown reports.
pub fn bench(a: &BenchArgs, out: &mut dyn Write) -> Result<BenchReport> {
    if a.datasets.is_empty() && !a.suite {
        return Err(CliError::Usage(
            "bench needs dataset files, --suite, or both".into(),
        ));
    }
    let mut ctx = init_context(&context_options(a))?;
    if let Some(why) = ctx.fallback_reason() {
        eprintln!("warning: using the software rasterizer: {why}");
    }
    let mut pipelines = Vec::new();
    let mut rows = Vec::new();
    for path in &a.datasets {
        let d = load_dataset(path)?;
        bench_dataset(&mut ctx, &mut pipelines, a, &d, &mut rows)?;
    }
    if a.suite {
        for entry in &SUITE {
            let d = suite_dataset(entry, a.scale)?;
            bench_dataset(&mut ctx, &mut pipelines, a, &d, &mut rows)?;
        }
    }
    // one block per variant, datasets in run order within it
    let rank = |r: &BenchRow| a.variants.0.iter().position(|&v| v == r.variant);
    rows.sort_by_key(rank);
    let report = BenchReport {
        tool_version: tool_version(),
        device: ctx.info().descriptor(),
        timestamp: chrono::Local::now().to_rfc3339(),
        frames: a.frames,
        resolution: ctx.resolution(),
        rows,
    };
    report.check()?;
    create_parent(&a.out)?;
    fs::write(&a.out, report.to_csv()).map_err(CliError::io(&a.out))?;
    let md_path = a
        .markdown
        .clone()
        .unwrap_or_else(|| a.out.with_extension("md"));
    let md = report.to_markdown();
    create_parent(&md_path)?;
    fs::write(&md_path, &md).map_err(CliError::io(&md_path))?;
    say(out, &md)?;
    say(
        out,
        format_args!("wrote {} and {}", a.out.display(), md_path.display()),
    )?;
    Ok(report)
}

fn mandelbrot(a: &MandelbrotArgs, out: &mut dyn Write) -> Result<()> {
    fs::create_dir_all(&a.out_dir).map_err(CliError::io(&a.out_dir))?;
    let mut csv = String::from("precision,zoom,width,max_iterations,collapse_ratio,image\n");
    for &zoom in &a.zooms.0 {
        let iterations = a.iterations.unwrap_or_else(|| zoom_iterations(zoom));
        let view = MandelbrotView::new(a.center_re, a.center_im, zoom, a.width, iterations)?;
        for &precision in &a.precisions.0 {
            let name = format!("mandelbrot_{precision}_{zoom:e}.ppm");
            let path = a.out_dir.join(&name);
            let file = fs::File::create(&path).map_err(CliError::io(&path))?;
            render_mandelbrot_image(&view, precision, BufWriter::new(file))
                .map_err(CliError::dataset(&path))?;
            let ratio = collapse_ratio(&view, precision)?;
            csv.push_str(&format!(
                "{precision},{zoom:e},{},{iterations},{ratio},{name}\n",
                a.width
            ));
            say(
                out,
                format_args!(
                    "{precision:<8} zoom {zoom:e}: collapse {ratio:.4}, {}",
                    path.display()
                ),
            )?;
        }
    }
    let path = a.out_dir.join("collapse.csv");
    fs::write(&path, csv).map_err(CliError::io(&path))
}

#[cfg(feature = "window")]
fn view(a: &ViewArgs, out: &mut dyn Write) -> Result<()> {
    use dualprec_render::viewer::{run_viewer, ViewerOptions};

    let d = load_dataset(&a.dataset)?;
    let mut variant = PipelineVariant::new(a.variant, d.dims);
    if a.pairwise {
        variant = variant.with_pairwise_product()?;
    }
    let mut options = ViewerOptions::new(variant);
    options.size = (a.width, a.height);
    options.device_index = a.device_index;
    options.shader_dir = a.shader_dir.clone();
    options.validation = a.validation;
    options.max_frames = a.max_frames;
    let summary = run_viewer(&d, options)?;
    match summary.last {
        Some(m) => say(out, format_args!("{} frames, last {m}", summary.frames)),
        None => say(out, format_args!("{} frames", summary.frames)),
    }
}

#[cfg(not(feature = "window"))]
fn view(_: &ViewArgs, _: &mut dyn Write) -> Result<()> {
    Err(RenderError::Device(
        "built without the window feature; run `dpbench bench --headless` instead".into(),
    )
    .into())
}
