use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, bail, ensure, Context, Result};
use torus_layer::design::{
    compare, default_target, fold_spacing_for_radius, lifting_sweep, MAX_LIFTING_W,
};
use torus_layer::sim::{
    analytic_low_noise, ChannelConfig, GaussianRoute, NoiseConvention, SimulationResult, SweepOptions,
};
use torus_layer::{
    aligned_windings, linear_baseline, load_code, permutation_code, run_sweep,
    scaled_lifting, solve_t, AmbientPoint, RectLattice, SeparationPolicy, SourceModel, SphericalCodePlus,
    TorusLayerCode, WindingVector,
};

use crate::{CodecArgs, Command, CompareArgs, DesignArgs, Noise, RoundtripArgs, SimulateArgs, Source};

/// Largest acceptable noiseless round-trip error.
const ROUNDTRIP_TOL: f64 = 1e-9;

pub fn run(command: Command, header: &[String]) -> Result<ExitCode> {
    match command {
        Command::Design(a) => design(a, header),
        Command::Simulate(a) => simulate(a, header),
        Command::Compare(a) => compare_cmd(a, header),
        Command::Roundtrip(a) => roundtrip(a),
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode(a),
    }
    .map(|()| ExitCode::SUCCESS)
    .or_else(|e| match e.downcast::<RoundtripFailure>() {
        Ok(f) => {
            eprintln!("error: {f}");
            Ok(ExitCode::from(1))
        }
        Err(e) => Err(e),
    })
}

#[derive(Debug)]
struct RoundtripFailure(f64, f64);

impl std::fmt::Display for RoundtripFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "round trip error {:e} at x = {} exceeds {ROUNDTRIP_TOL:e}", self.0, self.1)
    }
}

impl std::error::Error for RoundtripFailure {}

fn commented(header: &[String]) -> String {
    header.iter().map(|l| format!("# {l}\n")).collect()
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Parses `0,5,10` or `0:40:5` (inclusive), or any comma-separated mix.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| anyhow!("bad number `{t}` in grid `{s}`"));
        match parts.as_slice() {
            [v] => out.push(num(v)?),
            [a, b, step] => {
                let (a, b, step) = (num(a)?, num(b)?, num(step)?);
                ensure!(step > 0.0 && b >= a, "range `{item}` needs start <= stop and a positive step");
                let count = ((b - a) / step + 1e-9).floor() as usize;
                ensure!(count < 1_000_000, "range `{item}` has too many points");
                out.extend((0..=count).map(|i| a + i as f64 * step));
            }
            _ => bail!("grid item `{item}` is neither a value nor start:stop:step"),
        }
    }
    ensure!(!out.is_empty(), "empty grid `{s}`");
    ensure!(out.iter().all(|v| v.is_finite()), "grid `{s}` has non-finite values");
    Ok(out)
}

fn load(path: &Path) -> Result<TorusLayerCode> {
    TorusLayerCode::load(path).with_context(|| format!("loading code file {}", path.display()))
}

fn design_layers(a: &DesignArgs) -> Result<SphericalCodePlus> {
    if let Some(path) = &a.layers {
        let layers = load_code(path).with_context(|| format!("loading layers {}", path.display()))?;
        if let Some(n) = a.n {
            ensure!(n == layers.dim(), "--n {n} disagrees with the layer file (N = {})", layers.dim());
        }
        return Ok(layers);
    }
    let n = a.n.ok_or_else(|| anyhow!("give --n with --t or --d0, or --layers"))?;
    let t = match (a.t, a.d0) {
        (Some(t), _) => t,
        (None, Some(d0)) => solve_t(n, d0)?,
        (None, None) => bail!("give --t or --d0"),
    };
    Ok(permutation_code(n, t)?)
}

/// Winding of the first layer, and whether its radius was matched to the
/// layer distance on purpose.
fn design_winding(a: &DesignArgs, layers: &SphericalCodePlus) -> Result<(WindingVector, bool)> {
    if let Some(u) = &a.winding {
        ensure!(
            u.len() == layers.dim(),
            "winding has {} entries, layers have N = {}",
            u.len(),
            layers.dim()
        );
        return Ok((WindingVector::new(u.clone())?, false));
    }
    let first = &layers.codewords()[0];
    let target = default_target(layers.dim() - 1)?;
    if let Some(w) = a.w {
        ensure!(w >= 1, "--w must be positive");
        return Ok((scaled_lifting(&target, &RectLattice::from(first), w)?, false));
    }
    let (r_target, matched) = match (a.r_target, a.delta) {
        (Some(r), _) => (r, false),
        (None, Some(delta)) => (fold_spacing_for_radius(delta, first.c_min())?, false),
        (None, None) => {
            ensure!(layers.len() > 1, "a single layer needs --winding, --w, --delta or --r-target");
            (fold_spacing_for_radius(layers.min_distance() / 2.0, first.c_min())?, true)
        }
    };
    ensure!(r_target > 0.0, "fold spacing target must be positive");
    let choice = lifting_sweep(first.coords(), &target, r_target)?.ok_or_else(|| {
        anyhow!("no lifted winding with w <= {MAX_LIFTING_W} reaches fold spacing {r_target}")
    })?;
    log::info!("lifting sweep picked w = {} with r = {}", choice.w, choice.r);
    Ok((choice.winding, matched))
}

fn design(a: DesignArgs, header: &[String]) -> Result<()> {
    let layers = design_layers(&a)?;
    let (base, matched) = design_winding(&a, &layers)?;
    let windings = aligned_windings(&layers, &base);
    let policy = if matched { SeparationPolicy::Ignore } else { SeparationPolicy::Warn };
    let code = TorusLayerCode::build(layers, windings, a.power, a.alpha, policy)?;
    if let Some(out) = &a.out {
        write_output(Some(out), &(commented(header) + &code.to_text()))?;
        println!("wrote {}", out.display());
    }
    print!("{}", code.summary());
    Ok(())
}

fn source_model(source: Source, sigma_s: f64) -> Result<SourceModel> {
    Ok(match source {
        Source::Uniform => SourceModel::Uniform,
        Source::Gaussian => {
            ensure!(sigma_s > 0.0 && sigma_s.is_finite(), "--sigma-s must be positive");
            SourceModel::Gaussian { sigma_s }
        }
    })
}

fn simulate(a: SimulateArgs, header: &[String]) -> Result<()> {
    let grid = parse_grid(&a.snr)?;
    ensure!(a.samples > 0, "--samples must be positive");
    let mut opts = SweepOptions::new(a.samples, a.seed);
    opts.noise = match a.noise {
        Noise::PerDimension => NoiseConvention::PerDimension,
        Noise::Total => NoiseConvention::Total,
    };
    let source = source_model(a.source, a.sigma_s)?;
    let code = match &a.code {
        Some(p) => {
            let c = load(p)?;
            Some(match a.power {
                Some(pw) => c.with_power(pw)?,
                None => c,
            })
        }
        None => None,
    };

    if let Some(code) = &code {
        let result = run_sweep(code, &source, &grid, &opts)?;
        write_output(a.out.as_deref(), &result.to_csv(header))?;
        report_threshold(&result, code, &source, opts.noise, a.out.is_some());
    }
    if a.linear {
        ensure!(
            matches!(source, SourceModel::Uniform),
            "the linear baseline is defined for a uniform source only"
        );
        let n = match (&code, a.n) {
            (Some(c), None) => c.dim(),
            (Some(c), Some(n)) => {
                ensure!(n == c.dim(), "--n {n} disagrees with the code (N = {})", c.dim());
                n
            }
            (None, Some(n)) => n,
            (None, None) => bail!("--linear without --code needs --n"),
        };
        ensure!(n >= 1, "--n must be positive");
        let power = code.as_ref().map_or(a.power.unwrap_or(1.0), |c| c.power());
        let result = linear_baseline(power, n, &grid, &opts)?;
        let path = match (&code, &a.linear_out) {
            (_, Some(p)) => Some(p.as_path()),
            (None, None) => a.out.as_deref(),
            (Some(_), None) if a.out.is_none() => None,
            (Some(_), None) => bail!("--linear with --code and --out also needs --linear-out"),
        };
        write_output(path, &result.to_csv(header))?;
    }
    Ok(())
}

fn report_threshold(
    result: &SimulationResult,
    code: &TorusLayerCode,
    source: &SourceModel,
    noise: NoiseConvention,
    to_stdout: bool,
) {
    let dim = 2 * code.dim();
    let threshold = result.threshold_snr(|db| {
        ChannelConfig::from_snr_db(db, code.power(), noise, dim)
            .and_then(|ch| analytic_low_noise(code, source, ch.sigma2))
            .unwrap_or(f64::NAN)
    });
    let msg = match threshold {
        Some(db) => format!("threshold snr: {db} dB"),
        None => "threshold snr: not reached on this grid".to_string(),
    };
    if to_stdout {
        println!("{msg}");
    } else {
        eprintln!("{msg}");
    }
}

fn compare_cmd(a: CompareArgs, header: &[String]) -> Result<()> {
    let deltas = parse_grid(&a.deltas)?;
    ensure!(deltas.iter().all(|&d| d > 0.0), "radii must be positive");
    let rows = compare(a.n, &deltas)?;
    let mut s = commented(header);
    s.push_str("delta,scheme,M,total_length,w,winding\n");
    for r in rows {
        let winding: Vec<String> = r.winding.iter().map(i64::to_string).collect();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.delta,
            r.scheme.name(),
            r.m,
            r.total_length,
            r.w,
            winding.join(" ")
        );
    }
    write_output(a.out.as_deref(), &s)
}

/// Grid points plus both ends of every curve's interval.
fn roundtrip_points(code: &TorusLayerCode, points: usize) -> Vec<f64> {
    let mut xs: Vec<f64> = match points {
        0 => Vec::new(),
        1 => vec![0.0],
        p => (0..p).map(|i| i as f64 / (p - 1) as f64).collect(),
    };
    for k in 0..code.len() {
        let (lo, hi) = code.interval(k);
        xs.push(lo);
        xs.push(hi.next_down());
    }
    xs.retain(|&x| x < 1.0);
    xs
}

fn roundtrip(a: RoundtripArgs) -> Result<()> {
    let code = load(&a.code)?;
    let mut worst = (0.0f64, 0.0f64);
    let xs = roundtrip_points(&code, a.points);
    for &x in &xs {
        let err = (code.decode(&code.encode(x)?)? - x).abs();
        if err > worst.0 || err.is_nan() {
            worst = (err, x);
        }
    }
    println!("points: {}", xs.len());
    println!("max error: {:e} at x = {}", worst.0, worst.1);
    if !(worst.0 <= ROUNDTRIP_TOL) {
        return Err(RoundtripFailure(worst.0, worst.1).into());
    }
    println!("round trip ok");
    Ok(())
}

/// Non-empty, non-comment stdin lines split on whitespace or commas.
fn for_each_input(mut f: impl FnMut(usize, Vec<f64>) -> Result<()>) -> Result<()> {
    for (i, line) in std::io::stdin().lock().lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let values = t
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|_| anyhow!("line {}: bad number `{s}`", i + 1)))
            .collect::<Result<Vec<_>>>()?;
        f(i + 1, values)?;
    }
    Ok(())
}

fn encode(a: CodecArgs) -> Result<()> {
    let code = load(&a.code)?;
    let route = gaussian_route(&a, &code)?;
    let mut out = std::io::stdout().lock();
    for_each_input(|line, v| {
        ensure!(v.len() == 1, "line {line}: expected one source value, got {}", v.len());
        let y = match &route {
            Some(r) => r.encode(&code, v[0]),
            None => code.encode(v[0]).with_context(|| format!("line {line}"))?,
        };
        let text: Vec<String> = y.as_slice().iter().map(f64::to_string).collect();
        writeln!(out, "{}", text.join(" "))?;
        Ok(())
    })
}

fn decode(a: CodecArgs) -> Result<()> {
    let code = load(&a.code)?;
    let route = gaussian_route(&a, &code)?;
    let mut out = std::io::stdout().lock();
    for_each_input(|line, v| {
        let dim = 2 * code.dim();
        ensure!(v.len() == dim, "line {line}: expected {dim} coordinates, got {}", v.len());
        let y = AmbientPoint(v);
        let x = match &route {
            Some(r) => r.decode(&code, &y),
            None => code.decode(&y),
        }
        .with_context(|| format!("line {line}"))?;
        writeln!(out, "{x}")?;
        Ok(())
    })
}

fn gaussian_route(a: &CodecArgs, code: &TorusLayerCode) -> Result<Option<GaussianRoute>> {
    Ok(match source_model(a.source, a.sigma_s)? {
        SourceModel::Uniform => None,
        SourceModel::Gaussian { sigma_s } => Some(GaussianRoute::new(
            torus_layer::companding(sigma_s)?,
            code,
        )),
    })
}
