use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use splatslice_core::compiler::{compile, decode_asset, encode_asset};
use splatslice_core::ingest::{load_state_sequence, Manifest};
use splatslice_core::metrics::compare;
use splatslice_core::render::render_linear;
use splatslice_core::synth::{write_case, SynthParams};
use splatslice_core::{CameraPose, FrameImage, DEFAULT_K_SIGMA};
use splatslice_service::{CameraSpec, PlaneSpec, RenderRequest};

const EXIT_INPUT: u8 = 2;
const EXIT_MISMATCH: u8 = 3;
const EXIT_ENVIRONMENT: u8 = 4;
const THREADS_VAR: &str = "SPLATSLICE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "splatslice", version, about = "Compile, render and compare sliced Gaussian-splat assets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Consolidate a manifest of per-state PLY files into one asset.
    Compile {
        manifest: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Render an asset under a slicing plane to PNG.
    Render(RenderArgs),
    /// Print PSNR/SSIM of two PNGs as JSON.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Exit with status 3 when PSNR falls below this.
        #[arg(long)]
        min_psnr: Option<f64>,
        /// Exit with status 3 when SSIM falls below this.
        #[arg(long)]
        min_ssim: Option<f64>,
    },
    /// Write a seeded synthetic case (PLY states plus manifest.json).
    Synth {
        #[arg(long, default_value_t = 8)]
        states: usize,
        #[arg(long, default_value_t = 1000)]
        primitives: usize,
        #[arg(long, default_value_t = 0.95)]
        shared: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        sh_degree: u8,
        /// Give every per-state primitive its own SH payload.
        #[arg(long)]
        unique_sh: bool,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Serve a directory of .cgsa assets over HTTP.
    Serve {
        dir: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

#[derive(Debug, Args)]
struct RenderArgs {
    asset: PathBuf,
    /// Plane normal, normalized after parsing.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vec::<3>, default_value = "0,0,1")]
    normal: [f64; 3],
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    offset: f64,
    /// Camera position in world space.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vec::<3>, default_value = "0,-4,0")]
    position: [f64; 3],
    /// Camera-to-world rotation `w,x,y,z` (+x right, +y down, +z forward).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vec::<4>, conflicts_with = "target")]
    orientation: Option<[f64; 4]>,
    /// Look at this point instead of giving an orientation.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vec::<3>)]
    target: Option<[f64; 3]>,
    /// World up direction used with --target.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vec::<3>, default_value = "0,0,1", requires = "target")]
    up: [f64; 3],
    /// Vertical field of view in radians.
    #[arg(long, default_value_t = 0.8)]
    fov: f64,
    #[arg(long, default_value_t = 256)]
    width: u32,
    #[arg(long, default_value_t = 256)]
    height: u32,
    /// unsliced, hard or modulated.
    #[arg(long, default_value = "modulated")]
    mode: String,
    #[arg(long, default_value_t = DEFAULT_K_SIGMA)]
    k_sigma: f64,
    #[arg(short, long)]
    out: PathBuf,
}

fn parse_vec<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got {s:?}"));
    }
    let mut out = [0.0; N];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|_| format!("{p:?} is not a number"))?;
    }
    Ok(out)
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.to_string(),
        }
    }

    fn environment(message: impl ToString) -> Self {
        Self {
            code: EXIT_ENVIRONMENT,
            message: message.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure::environment(format!("{}: {e}", path.display())))
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json value serializes"));
}

fn thread_cap() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::input(format!("{THREADS_VAR} must be a positive integer, got {v:?}"))),
        },
    }
}

fn cmd_compile(manifest_path: &Path, out: &Path) -> Result<(), Failure> {
    let manifest = Manifest::read(manifest_path).map_err(Failure::input)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let input_bytes: u64 = manifest
        .states
        .iter()
        .map(|s| std::fs::metadata(base.join(&s.path)).map(|m| m.len()).unwrap_or(0))
        .sum();
    let seq = load_state_sequence(manifest_path).map_err(Failure::input)?;
    let asset = compile(&seq).map_err(Failure::input)?;
    let bytes = encode_asset(&asset);
    write(out, &bytes)?;
    let delta: usize = asset.delta_layers().iter().map(Vec::len).sum();
    print_json(&serde_json::json!({
        "input_bytes": input_bytes,
        "output_bytes": bytes.len(),
        "ratio": if input_bytes > 0 { bytes.len() as f64 / input_bytes as f64 } else { 0.0 },
        "states": asset.state_count(),
        "base_primitives": asset.base_layer().len(),
        "delta_primitives": delta,
        "sh_entries": asset.sh_table().len(),
    }));
    Ok(())
}

fn camera_spec(args: &RenderArgs) -> Result<CameraSpec, Failure> {
    let orientation = match args.target {
        Some(target) => {
            let cam = CameraPose::look_at(
                args.position.into(),
                target.into(),
                args.up.into(),
                args.fov,
                args.width.max(1),
                args.height.max(1),
            )
            .map_err(|e| Failure::input(format!("--target: {e}")))?;
            let q = cam.orientation.into_inner();
            [q.w, q.i, q.j, q.k]
        }
        None => args.orientation.unwrap_or([1.0, 0.0, 0.0, 0.0]),
    };
    Ok(CameraSpec {
        position: args.position,
        orientation,
        vertical_fov: args.fov,
        width: args.width,
        height: args.height,
    })
}

fn cmd_render(args: &RenderArgs) -> Result<(), Failure> {
    let request = RenderRequest {
        case_id: String::new(),
        plane: PlaneSpec {
            normal: args.normal,
            offset: args.offset,
        },
        camera: camera_spec(args)?,
        mode: args.mode.clone(),
        k_sigma: args.k_sigma,
    };
    let inputs = request.inputs().map_err(|e| {
        let flag = match e.field.as_str() {
            "plane.normal" => "--normal".to_string(),
            "plane.offset" => "--offset".to_string(),
            "k_sigma" => "--k-sigma".to_string(),
            "camera.vertical_fov" => "--fov".to_string(),
            f => format!("--{}", f.trim_start_matches("camera.")),
        };
        Failure::input(format!("{flag}: {}", e.message))
    })?;
    let asset = decode_asset(&read(&args.asset)?)
        .map_err(|e| Failure::input(format!("{}: {e}", args.asset.display())))?;
    let start = Instant::now();
    let (image, state_index) =
        render_linear(&asset, &inputs.plane, &inputs.camera, &inputs.options).map_err(Failure::input)?;
    let png = image.to_frame().to_png().map_err(Failure::environment)?;
    write(&args.out, &png)?;
    print_json(&serde_json::json!({
        "state_index": state_index,
        "render_ms": start.elapsed().as_secs_f64() * 1e3,
    }));
    Ok(())
}

fn cmd_compare(a: &Path, b: &Path, min_psnr: Option<f64>, min_ssim: Option<f64>) -> Result<(), Failure> {
    let load = |p: &Path| FrameImage::from_png(&read(p)?).map_err(|e| Failure::input(format!("{}: {e}", p.display())));
    let (fa, fb) = (load(a)?, load(b)?);
    if (fa.width(), fa.height()) != (fb.width(), fb.height()) {
        return Err(Failure {
            code: EXIT_MISMATCH,
            message: format!(
                "size mismatch: {}x{} vs {}x{}",
                fa.width(),
                fa.height(),
                fb.width(),
                fb.height()
            ),
        });
    }
    let report = compare(&fa, &fb).map_err(Failure::input)?;
    print_json(&serde_json::to_value(report).expect("report serializes"));
    let below = |v: f64, min: Option<f64>| min.is_some_and(|m| v < m);
    if below(report.psnr_db, min_psnr) || below(report.ssim, min_ssim) {
        return Err(Failure {
            code: EXIT_MISMATCH,
            message: "images differ beyond the requested thresholds".into(),
        });
    }
    Ok(())
}

fn cmd_serve(dir: &Path, host: &str, port: u16, threads: Option<usize>) -> Result<(), Failure> {
    if !dir.is_dir() {
        return Err(Failure::input(format!("{} is not a directory", dir.display())));
    }
    let listener = std::net::TcpListener::bind((host, port))
        .map_err(|e| Failure::environment(format!("cannot bind {host}:{port}: {e}")))?;
    listener.set_nonblocking(true).map_err(Failure::environment)?;
    let addr = listener.local_addr().map_err(Failure::environment)?;
    let mut runtime = tokio::runtime::Builder::new_multi_thread();
    if let Some(n) = threads {
        runtime.worker_threads(n);
    }
    let runtime = runtime.enable_all().build().map_err(Failure::environment)?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::from_std(listener).map_err(Failure::environment)?;
        eprintln!("serving {} on http://{addr}", dir.display());
        splatslice_service::serve(listener, dir).await.map_err(Failure::environment)
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    let threads = thread_cap()?;
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(Failure::environment)?;
    }
    match cli.command {
        Command::Compile { manifest, out } => cmd_compile(&manifest, &out),
        Command::Render(args) => cmd_render(&args),
        Command::Compare { a, b, min_psnr, min_ssim } => cmd_compare(&a, &b, min_psnr, min_ssim),
        Command::Synth {
            states,
            primitives,
            shared,
            seed,
            sh_degree,
            unique_sh,
            out,
        } => {
            let params = SynthParams {
                states,
                primitives,
                shared_fraction: shared,
                seed,
                sh_degree,
                unique_sh,
            };
            params.validate().map_err(Failure::input)?;
            let case = write_case(&params, &out).map_err(Failure::environment)?;
            print_json(&serde_json::json!({
                "manifest": case.manifest_path,
                "states": case.manifest.states.len(),
                "ply_bytes": case.ply_bytes,
            }));
            Ok(())
        }
        Command::Serve { dir, port, host } => cmd_serve(&dir, &host, port, threads),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
