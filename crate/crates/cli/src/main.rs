//! Command-line front end: estimation, overlay rendering, pipeline timing
//! simulation, estimator comparison, and offset-table dumping.

mod render;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ridgefield::geometry::{DirectionSet, OffsetRom};
use ridgefield::gradient::{error_metric, gradient_orientation, AngleField};
use ridgefield::image::{load_pgm, partition_blocks, Image};
use ridgefield::orientation::{estimate_orientation_field, BlockDirectionImage};
use ridgefield::pipeline::{run_pipeline_with_block_size, PipelineConfig};
use ridgefield::synth;

#[derive(Parser)]
#[command(name = "ridgefield", version, about = "Ridge orientation estimation from grayscale images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the block orientation field of an image
    Estimate(EstimateArgs),
    /// Draw an orientation field as line segments (SVG and/or PPM overlay)
    Render(RenderArgs),
    /// Run the pipeline timing model and report delays
    Simulate(SimulateArgs),
    /// Compare the pixel-based estimator against the gradient baseline
    Compare(CompareArgs),
    /// Dump the per-direction offset table
    GenOffsets(GenOffsetsArgs),
}

#[derive(Args)]
struct ParamArgs {
    /// Sample pixels per direction (even)
    #[arg(long = "n", default_value_t = 8)]
    n: usize,
    /// Number of quantized directions (even)
    #[arg(long = "N", default_value_t = 16)]
    directions: usize,
    /// Block side length in pixels
    #[arg(long = "block-size", default_value_t = 16)]
    block_size: usize,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SynthKind {
    Stripe,
    Sinusoid,
    Noise,
    Uniform,
}

#[derive(Args)]
struct InputArgs {
    /// Input image (PGM, binary or ASCII)
    image: Option<PathBuf>,
    /// Generate a synthetic pattern instead of reading an image
    #[arg(long, value_enum)]
    synth: Option<SynthKind>,
    /// Ridge angle in degrees for synthetic patterns
    #[arg(long, default_value_t = 0.0)]
    angle: f64,
    /// Ridge period in pixels for synthetic patterns
    #[arg(long, default_value_t = 8.0)]
    period: f64,
    /// Side length of synthetic images
    #[arg(long, default_value_t = 256)]
    size: usize,
    /// Seed for the noise pattern
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Gray level for the uniform pattern
    #[arg(long, default_value_t = 128)]
    level: u8,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    params: ParamArgs,
    /// Directory for field.txt, field.nib and field.mask
    #[arg(short, long, default_value = ".")]
    output: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    /// Orientation field in the text format written by `estimate`
    field: PathBuf,
    #[command(flatten)]
    params: ParamArgs,
    /// Background image for the PPM overlay
    #[arg(long)]
    image: Option<PathBuf>,
    /// Write a vector rendering to this path
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Write a raster overlay (requires --image) to this path
    #[arg(long)]
    ppm: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    params: ParamArgs,
    /// Image RAM instances feeding stage 0 (1 or 8)
    #[arg(long, default_value_t = 1)]
    rams: usize,
    /// Model the 128 inter-stage registers between fetch and compute
    #[arg(long)]
    registers: bool,
    /// CLK1 period in nanoseconds, for wall-time reporting
    #[arg(long = "clk1-ns", default_value_t = 10.0)]
    clk1_ns: f64,
    /// Directory for reservation.csv and the field files
    #[arg(short, long, default_value = ".")]
    output: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct GenOffsetsArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Write the dump here instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
}

enum CliError {
    /// Bad flags or unusable input: exit 2.
    Usage(String),
    /// A self-check the program performs on its own results failed: exit 3.
    Internal(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Internal(m) => write!(f, "{m}"),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Render(args) => cmd_render(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Compare(args) => cmd_compare(args),
        Command::GenOffsets(args) => cmd_gen_offsets(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn build_geometry(params: &ParamArgs) -> Result<(DirectionSet, OffsetRom), CliError> {
    let dirs = DirectionSet::new(params.directions).map_err(|e| usage(e.to_string()))?;
    let rom = OffsetRom::generate(&dirs, params.n).map_err(|e| usage(e.to_string()))?;
    Ok((dirs, rom))
}

fn load_input(input: &InputArgs) -> Result<Image, CliError> {
    match (&input.image, input.synth) {
        (Some(_), Some(_)) => Err(usage("give either an image path or --synth, not both")),
        (None, None) => Err(usage("an input image path or --synth is required")),
        (Some(path), None) => {
            let bytes = fs::read(path)
                .map_err(|e| usage(format!("cannot open {}: {e}", path.display())))?;
            load_pgm(&bytes).map_err(|e| usage(format!("{}: {e}", path.display())))
        }
        (None, Some(kind)) => {
            if input.size == 0 {
                return Err(usage("--size must be at least 1"));
            }
            if input.period <= 0.0 && matches!(kind, SynthKind::Stripe | SynthKind::Sinusoid) {
                return Err(usage("--period must be positive"));
            }
            let (h, w) = (input.size, input.size);
            Ok(match kind {
                SynthKind::Stripe => synth::stripes(h, w, input.angle, input.period),
                SynthKind::Sinusoid => synth::sinusoid(h, w, input.angle, input.period),
                SynthKind::Noise => synth::noise(h, w, input.seed),
                SynthKind::Uniform => synth::uniform(h, w, input.level),
            })
        }
    }
}

fn check_block_fit(img: &Image, block_size: usize) -> Result<(), CliError> {
    if block_size == 0 {
        return Err(usage("--block-size must be at least 1"));
    }
    if img.height() < block_size || img.width() < block_size {
        return Err(usage(format!(
            "image {}x{} is smaller than one {block_size}x{block_size} block",
            img.height(),
            img.width()
        )));
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn write_field_files(
    dir: &Path,
    field: &BlockDirectionImage,
    dirs: &DirectionSet,
) -> Result<(PathBuf, PathBuf, PathBuf), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
    let text_path = dir.join("field.txt");
    let nib_path = dir.join("field.nib");
    let mask_path = dir.join("field.mask");
    write_file(&text_path, field.to_text(dirs).as_bytes())?;
    write_file(&nib_path, &field.to_packed())?;
    write_file(&mask_path, field.to_mask_text().as_bytes())?;
    Ok((text_path, nib_path, mask_path))
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), CliError> {
    let (dirs, rom) = build_geometry(&args.params)?;
    let img = load_input(&args.input)?;
    check_block_fit(&img, args.params.block_size)?;
    let field = estimate_orientation_field(&img, &rom, args.params.block_size);
    let valid = (field.valid_fraction() * field.len() as f64).round() as usize;
    let (text, nib, mask) = write_field_files(&args.output, &field, &dirs)?;
    println!(
        "blocks: {}x{} ({} total), {valid} valid",
        field.rows(),
        field.cols(),
        field.len()
    );
    println!("wrote {} {} {}", text.display(), nib.display(), mask.display());
    Ok(())
}

fn cmd_render(args: RenderArgs) -> Result<(), CliError> {
    if args.svg.is_none() && args.ppm.is_none() {
        return Err(usage("nothing to render: pass --svg and/or --ppm"));
    }
    if args.params.block_size == 0 {
        return Err(usage("--block-size must be at least 1"));
    }
    let dirs = DirectionSet::new(args.params.directions).map_err(|e| usage(e.to_string()))?;
    let text = fs::read_to_string(&args.field)
        .map_err(|e| usage(format!("cannot open {}: {e}", args.field.display())))?;
    let field = BlockDirectionImage::from_text(&text, args.params.block_size)
        .map_err(|e| usage(format!("{}: {e}", args.field.display())))?;
    let f = &field;
    let max_d = (0..f.rows())
        .flat_map(|bi| (0..f.cols()).map(move |bj| f.direction(bi, bj)))
        .max()
        .unwrap_or(0);
    if max_d as usize >= dirs.len() {
        return Err(usage(format!(
            "field references direction index {max_d}, outside 0..{}; pass the --N it was estimated with",
            dirs.len()
        )));
    }

    if let Some(svg_path) = &args.svg {
        let svg = render::field_svg(&field, &dirs);
        write_file(svg_path, svg.as_bytes())?;
        println!("wrote {}", svg_path.display());
    }
    if let Some(ppm_path) = &args.ppm {
        let image_path = args
            .image
            .as_ref()
            .ok_or_else(|| usage("--ppm needs --image for the background"))?;
        let bytes = fs::read(image_path)
            .map_err(|e| usage(format!("cannot open {}: {e}", image_path.display())))?;
        let img = load_pgm(&bytes).map_err(|e| usage(format!("{}: {e}", image_path.display())))?;
        let grid = partition_blocks(&img, args.params.block_size);
        if (grid.rows(), grid.cols()) != (field.rows(), field.cols()) {
            return Err(usage(format!(
                "grid mismatch: field is {}x{} blocks but image {}x{} yields {}x{}",
                field.rows(),
                field.cols(),
                img.height(),
                img.width(),
                grid.rows(),
                grid.cols()
            )));
        }
        let ppm = render::field_ppm_overlay(&field, &dirs, &img);
        write_file(ppm_path, &ppm)?;
        println!("wrote {}", ppm_path.display());
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let (dirs, rom) = build_geometry(&args.params)?;
    let img = load_input(&args.input)?;
    check_block_fit(&img, args.params.block_size)?;
    let cfg = PipelineConfig::new(args.rams, args.registers, args.clk1_ns)
        .map_err(|e| usage(e.to_string()))?;

    let (h, w) = (img.height(), img.width());
    println!("image: {h}x{w}, offset table: {} entries", rom.len());
    println!("processing delays for all configurations:");
    for (rams, regs, label) in [
        (1, false, "1 RAM,  no registers"),
        (1, true, "1 RAM,  registers   "),
        (8, false, "8 RAMs, no registers"),
        (8, true, "8 RAMs, registers   "),
    ] {
        let c = PipelineConfig::new(rams, regs, args.clk1_ns).expect("fixed configs are valid");
        println!(
            "  {label}: {} x {} x {} = {} CLK1 ticks",
            h,
            w,
            c.clk2_in_clk1(rom.len()),
            c.total_delay(h, w, rom.len())
        );
    }

    let run = run_pipeline_with_block_size(&img, &rom, &cfg, args.params.block_size);
    let direct = estimate_orientation_field(&img, &rom, args.params.block_size);
    if run.field != direct {
        return Err(CliError::Internal(
            "pipeline output disagrees with the direct estimator".into(),
        ));
    }

    fs::create_dir_all(&args.output)
        .map_err(|e| usage(format!("cannot create {}: {e}", args.output.display())))?;
    let csv_path = args.output.join("reservation.csv");
    write_file(&csv_path, run.table.to_csv().as_bytes())?;
    write_field_files(&args.output, &run.field, &dirs)?;

    let ns = run.clk1_ticks as f64 * cfg.clk1_period_ns();
    println!(
        "selected run: {} CLK1 ticks (+{} drain), {:.3} ms at {} ns per tick",
        run.clk1_ticks,
        run.drain_clk1_ticks,
        ns / 1e6,
        cfg.clk1_period_ns()
    );
    println!("block pulses: {}", run.block_pulses);
    println!("functional check: pipeline matches direct estimator");
    println!("wrote {}", csv_path.display());
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let (dirs, rom) = build_geometry(&args.params)?;
    let img = load_input(&args.input)?;
    check_block_fit(&img, args.params.block_size)?;
    let pixel_field = estimate_orientation_field(&img, &rom, args.params.block_size);
    let p = AngleField::from_blocks(&pixel_field, &dirs);
    let g = gradient_orientation(&img, args.params.block_size);
    let report = error_metric(&g, &p);
    if report.valid_blocks == 0 {
        println!("no valid blocks to compare");
        return Ok(());
    }
    println!(
        "mse={:.4} deg^2 rms={:.4} deg mean_abs={:.4} deg over {} blocks",
        report.mean_squared_error, report.rms_error, report.mean_abs_error, report.valid_blocks
    );
    println!("row,col,g_deg,p_deg,diff_deg");
    for bi in 0..g.rows() {
        for bj in 0..g.cols() {
            if !g.is_valid(bi, bj) || !p.is_valid(bi, bj) {
                continue;
            }
            let gd = g.angle(bi, bj);
            let pd = p.angle(bi, bj);
            println!(
                "{bi},{bj},{gd:.4},{pd:.4},{:.4}",
                ridgefield::gradient::circular_diff_deg(gd, pd)
            );
        }
    }
    Ok(())
}

fn cmd_gen_offsets(args: GenOffsetsArgs) -> Result<(), CliError> {
    let (_, rom) = build_geometry(&args.params)?;
    let dump = rom.dump();
    match &args.output {
        Some(path) => {
            write_file(path, dump.as_bytes())?;
            println!("wrote {}", path.display());
        }
        None => print!("{dump}"),
    }
    Ok(())
}
