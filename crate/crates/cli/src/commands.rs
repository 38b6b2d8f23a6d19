use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use dbar_core::dataset::{
    dtn_from_array, dtn_to_array, generate_dataset, image_to_array, images_from_array, mean_report,
    measured_dtn, metrics, read_array, split_counts, write_array, DatasetSpec, Manifest,
    MetricsReport, PipelineConfig,
};
use dbar_core::dbar::{
    build_kgrid, direct_solve_oracle, reconstruct as reconstruct_field, residual, richardson_with,
    DbarOperator, Solver, SpectralKernel, MAX_DIRECT_LEVEL,
};
use dbar_core::error::Error;
use dbar_core::forward::homogeneous_dtn;
use dbar_core::phantom::{
    generate_act4, generate_kit4, potential_q, Act4Config, Kit4Config, Phantom, Style,
};
use dbar_core::scattering::{
    assemble_t_field, default_boundary_points, kpoints, scattering_from_dtn,
    scattering_from_potential, CgoMode, Region, ScatteringField,
};
use dbar_core::Complex64;
use serde::Serialize;

use crate::colormap::write_png;
use crate::config::{data_dir, RunConfig};
use crate::{
    BenchArgs, CgoArg, DatasetArgs, EvalArgs, Failure, ReconstructArgs, SimulateArgs, SolverArg,
    SplitArg, StyleArg,
};

type Outcome = Result<(), Failure>;

fn style(s: StyleArg) -> Style {
    match s {
        StyleArg::Kit4 => Style::Kit4,
        StyleArg::Act4 => Style::Act4,
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn ensure_parent(path: &Path) -> std::io::Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => fs::create_dir_all(p),
        _ => Ok(()),
    }
}

fn log_config<T: Serialize>(subcommand: &'static str, threads: Option<usize>, settings: T) {
    RunConfig {
        subcommand,
        threads,
        data_dir: data_dir(),
        settings,
    }
    .log();
}

fn read_phantom(path: &Path) -> Result<Phantom, Failure> {
    Ok(Phantom::from_json(&fs::read_to_string(path)?)?)
}

#[derive(Serialize)]
struct SimulateResolved<'a> {
    #[serde(flatten)]
    args: &'a SimulateArgs,
    noise_seed: u64,
    out: &'a Path,
}

pub fn simulate(args: &SimulateArgs, threads: Option<usize>) -> Outcome {
    if !(args.noise >= 0.0) {
        return Err(usage("--noise must be non-negative"));
    }
    let (phantom, tag) = match (&args.phantom, args.seed) {
        (Some(path), _) => (
            read_phantom(path)?,
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "phantom".into()),
        ),
        (None, Some(seed)) => {
            let p = match style(args.style) {
                Style::Kit4 => generate_kit4(seed, &Kit4Config::default()),
                Style::Act4 => generate_act4(seed, &Act4Config::default()),
            }?;
            (p, format!("{}_{seed}", style(args.style)))
        }
        (None, None) => return Err(usage("either --seed or --phantom is required")),
    };
    let noise_seed = args
        .noise_seed
        .unwrap_or_else(|| args.seed.unwrap_or(0).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| data_dir().join(format!("dtn_{tag}.dbar")));
    log_config(
        "simulate",
        threads,
        SimulateResolved {
            args,
            noise_seed,
            out: &out,
        },
    );
    let config = PipelineConfig {
        mesh_level: args.mesh_level,
        patterns: args.patterns,
        ..PipelineConfig::default()
    };
    let dtn = measured_dtn(&phantom, args.noise, noise_seed, &config)?;
    ensure_parent(&out)?;
    write_array(&out, &dtn_to_array(&dtn))?;
    let phantom_path = out.with_extension("phantom.json");
    fs::write(&phantom_path, phantom.to_json()?)?;
    println!("{}", out.display());
    println!("{}", phantom_path.display());
    Ok(())
}

#[derive(Serialize)]
struct ReconstructResolved<'a> {
    #[serde(flatten)]
    args: &'a ReconstructArgs,
    r: f64,
    boundary_points: usize,
    out: &'a Path,
}

pub fn reconstruct(args: &ReconstructArgs, threads: Option<usize>) -> Outcome {
    let r = args.r.unwrap_or(args.r_delta);
    if !(args.r_delta > 0.0) || r < args.r_delta {
        return Err(usage("need 0 < --Rdelta <= --R"));
    }
    if r > args.r_delta && args.phantom.is_none() {
        return Err(usage(
            "--R above --Rdelta needs --phantom for the asymptotic transform",
        ));
    }
    if args.iters == 0 || args.zgrid == 0 {
        return Err(usage("--iters and --zgrid must be positive"));
    }
    let solver = match args.solver {
        SolverArg::Richardson => Solver::Richardson,
        SolverArg::Direct => Solver::Direct,
    };
    if solver == Solver::Direct && args.level > MAX_DIRECT_LEVEL {
        return Err(Error::ResourceGuard(args.level).into());
    }
    let out = args.out.clone().unwrap_or_else(|| {
        let stem = args
            .dtn
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dtn".into());
        data_dir().join(format!("{stem}_sigma.dbar"))
    });
    let dtn = dtn_from_array(read_array(&args.dtn)?, &args.dtn)?;
    let boundary_points = default_boundary_points(dtn.patterns);
    log_config(
        "reconstruct",
        threads,
        ReconstructResolved {
            args,
            r,
            boundary_points,
            out: &out,
        },
    );
    let mode = match args.cgo {
        CgoArg::Full => CgoMode::Full,
        CgoArg::Born => CgoMode::Born,
    };
    let l_one = homogeneous_dtn(dtn.patterns)?;
    let disk = kpoints(
        Region::Disk {
            radius: args.r_delta,
        },
        args.k_spacing,
    )?;
    let texp = scattering_from_dtn(&dtn, &l_one, &disk, boundary_points, mode)
        .map_err(|e| e.in_stage("scattering"))?;
    let tasym = match &args.phantom {
        Some(path) if r > args.r_delta => {
            let phantom = read_phantom(path)?;
            let q = potential_q(&phantom, dbar_core::phantom::DEFAULT_SMOOTHING)
                .map_err(|e| e.in_stage("potential"))?;
            let ring = kpoints(
                Region::Annulus {
                    inner: args.r_delta,
                    outer: r,
                },
                args.k_spacing,
            )?;
            Some(scattering_from_potential(&q, &ring))
        }
        _ => None,
    };
    let grid = build_kgrid(r, dbar_core::dbar::DEFAULT_EXTENT_FACTOR, args.level)?;
    let field = assemble_t_field(&texp, tasym.as_ref(), args.r_delta, r, &grid)
        .map_err(|e| e.in_stage("assemble"))?;
    let rec = reconstruct_field(&field, args.zgrid, args.iters, solver)
        .map_err(|e| e.in_stage("reconstruct"))?;
    ensure_parent(&out)?;
    write_array(&out, &image_to_array(&rec.conductivity))?;
    let png = out.with_extension("png");
    write_png(&rec.conductivity, &png)?;
    eprintln!(
        "sigma range [{:.4}, {:.4}], max |Im m²| {:.2e}",
        rec.conductivity.min(),
        rec.conductivity.max(),
        rec.imaginary.max()
    );
    println!("{}", out.display());
    println!("{}", png.display());
    Ok(())
}

#[derive(Serialize)]
struct DatasetResolved<'a> {
    #[serde(flatten)]
    args: &'a DatasetArgs,
    count: usize,
    first_seed: u64,
    out: &'a Path,
    pipeline: &'a PipelineConfig,
}

pub fn dataset(args: &DatasetArgs, threads: Option<usize>) -> Outcome {
    let st = style(args.style);
    let (train, validation) = split_counts(st);
    let (default_count, default_seed, split) = match args.split {
        SplitArg::Train => (train, 0, "train"),
        SplitArg::Validation => (validation, 1_000_000, "validation"),
    };
    let count = args.count.unwrap_or(default_count);
    let first_seed = args.seed.unwrap_or(default_seed);
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| data_dir().join(format!("{st}_{split}")));
    let mut spec = DatasetSpec::new(st, count, first_seed);
    spec.radii = args.radii.clone();
    spec.level = args.level;
    spec.width = args.zgrid;
    spec.pipeline.mesh_level = args.mesh_level;
    spec.pipeline.k_spacing = args.k_spacing;
    if count > 0 {
        spec.meta(0).map_err(|e| usage(e.to_string()))?;
    }
    log_config(
        "dataset",
        threads,
        DatasetResolved {
            args,
            count,
            first_seed,
            out: &out,
            pipeline: &spec.pipeline,
        },
    );
    let start = Instant::now();
    let manifest = generate_dataset(&spec, &out, args.resume)?;
    eprintln!(
        "{} samples in {:.1}s",
        manifest.entries.len(),
        start.elapsed().as_secs_f64()
    );
    println!("{}", out.join(dbar_core::dataset::MANIFEST_NAME).display());
    Ok(())
}

fn load_image(path: &Path, channel: usize) -> Result<dbar_core::image::Image, Failure> {
    let mut images = images_from_array(read_array(path)?, path)?;
    if images.len() == 1 {
        return Ok(images.remove(0));
    }
    if channel >= images.len() {
        return Err(usage(format!(
            "{} has {} channels, --channel {channel} requested",
            path.display(),
            images.len()
        )));
    }
    Ok(images.swap_remove(channel))
}

#[derive(Serialize)]
struct EvalResolved<'a> {
    #[serde(flatten)]
    args: &'a EvalArgs,
    csv: &'a Path,
}

pub fn eval(args: &EvalArgs, threads: Option<usize>) -> Outcome {
    let csv = args
        .csv
        .clone()
        .unwrap_or_else(|| data_dir().join("metrics.csv"));
    log_config("eval", threads, EvalResolved { args, csv: &csv });
    let manifest = Manifest::read(&args.gt)?;
    let mut rows = Vec::with_capacity(manifest.entries.len());
    for entry in &manifest.entries {
        let gt_path = args.gt.join(&entry.file);
        let gt = load_image(&gt_path, 0)?;
        let pred = load_image(&args.pred.join(&entry.file), args.channel)?;
        if !pred.same_shape(&gt) {
            return Err(Error::GridMismatch(format!(
                "{}: prediction {}x{}, ground truth {}x{}",
                entry.file,
                pred.width(),
                pred.height(),
                gt.width(),
                gt.height()
            ))
            .into());
        }
        rows.push((entry.file.clone(), metrics(&pred, &gt)?));
    }
    let mut table = format!(
        "{:<24} {:>10} {:>8} {:>10}\n",
        "sample", "psnr", "ssim", "rmse"
    );
    let mut text = String::from("file,psnr,ssim,rmse\n");
    for (file, m) in &rows {
        writeln!(
            table,
            "{file:<24} {:>10.4} {:>8.5} {:>10.6}",
            m.psnr, m.ssim, m.rmse
        )
        .unwrap();
        writeln!(text, "{file},{},{},{}", m.psnr, m.ssim, m.rmse).unwrap();
    }
    let reports: Vec<MetricsReport> = rows.iter().map(|(_, m)| *m).collect();
    match mean_report(&reports) {
        Some(m) => writeln!(
            table,
            "{:<24} {:>10.4} {:>8.5} {:>10.6}",
            "mean", m.psnr, m.ssim, m.rmse
        )
        .unwrap(),
        None => table.push_str("no samples\n"),
    }
    print!("{table}");
    ensure_parent(&csv)?;
    fs::write(&csv, text)?;
    eprintln!("wrote {}", csv.display());
    Ok(())
}

/// Deterministic smooth field `t(k) = -0.6 e^{-|k|²/8}` on `|k| ≤ R`.
fn bench_field(r: f64, level: u32) -> Result<ScatteringField, Failure> {
    let grid = build_kgrid(r, dbar_core::dbar::DEFAULT_EXTENT_FACTOR, level)?;
    let mut field = ScatteringField::zeros(grid);
    for (idx, v) in field.values.iter_mut().enumerate() {
        let k = grid.point_at(idx);
        if k.norm() <= r {
            *v = Complex64::new(-0.6 * (-k.norm_sqr() / 8.0).exp(), 0.0);
        }
    }
    Ok(field)
}

pub fn bench(args: &BenchArgs, threads: Option<usize>) -> Outcome {
    if args.points == 0 || args.iters == 0 || args.levels.is_empty() {
        return Err(usage(
            "--points, --iters and --l must be non-empty and positive",
        ));
    }
    log_config("bench", threads, args);
    let zs: Vec<Complex64> = (0..args.points)
        .map(|i| Complex64::from_polar(0.8 * (i + 1) as f64 / args.points as f64, 2.4 * i as f64))
        .collect();
    let mut table = format!(
        "{:>3} {:>11} {:>12} {:>14} {:>12}\n",
        "l", "solver", "ms/point", "max residual", "max rel diff"
    );
    let mut csv = String::from("l,solver,ms_per_point,max_residual,max_rel_diff\n");
    for &level in &args.levels {
        let field = bench_field(args.r, level)?;
        let kernel = SpectralKernel::new(&field.grid);
        let start = Instant::now();
        let iterated: Vec<Vec<Complex64>> = zs
            .iter()
            .map(|&z| {
                let mut op = DbarOperator::new(&kernel, &field, z)?;
                richardson_with(&mut op, args.iters)
            })
            .collect::<Result<_, _>>()?;
        let rich_ms = start.elapsed().as_secs_f64() * 1e3 / zs.len() as f64;
        let rich_res = zs
            .iter()
            .zip(&iterated)
            .map(|(&z, m)| {
                let mut op = DbarOperator::new(&kernel, &field, z)?;
                Ok(residual(&mut op, m))
            })
            .collect::<Result<Vec<f64>, Error>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let mut rows = vec![(
            String::from("richardson"),
            Some(rich_ms),
            Some(rich_res),
            None,
        )];
        if level <= MAX_DIRECT_LEVEL {
            let start = Instant::now();
            let direct: Vec<Vec<Complex64>> = zs
                .iter()
                .map(|&z| direct_solve_oracle(z, &field))
                .collect::<Result<_, _>>()?;
            let ms = start.elapsed().as_secs_f64() * 1e3 / zs.len() as f64;
            let mut res = 0.0f64;
            let mut rel = 0.0f64;
            for ((&z, d), m) in zs.iter().zip(&direct).zip(&iterated) {
                let mut op = DbarOperator::new(&kernel, &field, z)?;
                res = res.max(residual(&mut op, d));
                let num: f64 = d.iter().zip(m).map(|(a, b)| (a - b).norm_sqr()).sum();
                let den: f64 = d.iter().map(|a| a.norm_sqr()).sum();
                rel = rel.max((num / den).sqrt());
            }
            rows[0].3 = Some(rel);
            rows.push(("direct".into(), Some(ms), Some(res), Some(0.0)));
        } else {
            rows.push(("direct".into(), None, None, None));
        }
        let show = |v: Option<f64>, prec: usize, exp: bool| match v {
            Some(x) if exp => format!("{x:.prec$e}"),
            Some(x) => format!("{x:.prec$}"),
            None => "skipped".into(),
        };
        for (name, ms, res, rel) in rows {
            writeln!(
                table,
                "{level:>3} {name:>11} {:>12} {:>14} {:>12}",
                show(ms, 2, false),
                show(res, 3, true),
                show(rel, 3, true)
            )
            .unwrap();
            let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            writeln!(
                csv,
                "{level},{name},{},{},{}",
                cell(ms),
                cell(res),
                cell(rel)
            )
            .unwrap();
        }
    }
    print!("{table}");
    if let Some(path) = &args.csv {
        ensure_parent(path)?;
        fs::write(path, csv)?;
    }
    Ok(())
}
