use clap::{Args, Parser, Subcommand};
use expoly_core::exceptional::{e2_csv_row, ExceptionalSets, E2_CSV_HEADER};
use expoly_core::grid::{self, build_tiling, GoodSquareTest, DENSITY_CSV_HEADER};
use expoly_core::hypotheses::{check_hypotheses, DEFAULT_ANGLE_TOL};
use expoly_core::measure::{self, CounterexampleParams, HeadlineOptions, HEADLINE_CSV_HEADER};
use expoly_core::orbit::ClassifyParams;
use expoly_core::raster::{self, Palette, Viewport};
use expoly_core::{library, verify, Complex64, Error, ExpPoly};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "expoly", version, about = "Dynamics of exponential polynomials f(z) = sum Q_j(z) exp(b_j z^d + P_j(z))")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Function definition: a JSON file or a bundled name (sin_z, sin_z2, sin_z3, example_h, cosh_cube, hemke, cube_roots)
    #[arg(long = "fn", global = true, value_name = "PATH|NAME")]
    function: Option<String>,

    /// Output file; text reports go to stdout when omitted
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Seed for every random or low-discrepancy stream
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads (default: hardware parallelism); results do not depend on it
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the argument-order hypotheses and print the report as JSON
    Check {
        /// Tolerance for equal arguments and for gaps equal to pi
        #[arg(long, default_value_t = DEFAULT_ANGLE_TOL)]
        angle_tol: f64,
    },
    /// Render the orbit classification of a viewport as a binary PPM
    Render {
        #[command(flatten)]
        view: ViewArgs,
        #[command(flatten)]
        classify: ClassifyArgs,
    },
    /// Render E1 (dark grey) and E2 (light grey) as a binary PPM
    Exceptional {
        #[command(flatten)]
        view: ViewArgs,
    },
    /// Area of E2 in consecutive annuli, as CSV
    E2measure {
        /// Annulus boundaries; each consecutive pair is one annulus
        #[arg(long, value_delimiter = ',', default_value = "10,20,40,80,160")]
        radii: Vec<f64>,
        /// Radial quadrature nodes per annulus
        #[arg(long, default_value_t = 64)]
        nr: usize,
        /// Angular quadrature nodes per circle
        #[arg(long, default_value_t = 512)]
        ntheta: usize,
    },
    /// Classify samples of the annuli r <= |z| <= 2r and summarize, as CSV
    AnnulusScan {
        /// Inner radii r
        #[arg(long, value_delimiter = ',', default_value = "5,10,20")]
        radii: Vec<f64>,
        /// Samples per annulus (at least 1000)
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Add the analytic non-escaping wedge starting at this radius (for example_h)
        #[arg(long)]
        wedge_r0: Option<f64>,
        #[command(flatten)]
        classify: ClassifyArgs,
    },
    /// Density bounds for the grid square at radius r and angle theta, as CSV
    GridBound {
        /// Radii at which a square is picked; the tiling covers r <= |z| <= 2r
        #[arg(long, value_delimiter = ',', default_value = "10,15,20,30,40")]
        radii: Vec<f64>,
        /// Angle of the picked squares
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        /// Square-size constant sigma (default 1/(8 d max|b|))
        #[arg(long)]
        sigma: Option<f64>,
        /// Growth exponent in the reference bound exp(-|z|^alpha / 2)
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Sample the wedge B of example_h and check |h| bounds, as JSON
    Counterexample {
        /// Inner radius of the wedge
        #[arg(long, default_value_t = 100.0)]
        r0: f64,
        /// Outer radius of the wedge
        #[arg(long = "R", default_value_t = 1e4)]
        r_max: f64,
        /// Radius of the disk around the attracting fixed point 0
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Sample count
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Run the invariant suites of every module and print PASS/FAIL lines
    LemmaVerify,
}

#[derive(Args, Debug, Clone, Copy)]
struct ViewArgs {
    /// Image width in pixels
    #[arg(long, default_value_t = 800)]
    width: usize,
    /// Image height in pixels (default: width)
    #[arg(long)]
    height: Option<usize>,
    /// Real part of the viewport center
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    center_re: f64,
    /// Imaginary part of the viewport center
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    center_im: f64,
    /// Half of the viewport width (default 4 for render, 20 for exceptional)
    #[arg(long)]
    half_width: Option<f64>,
    /// Half of the viewport height (default: keeps pixels square)
    #[arg(long)]
    half_height: Option<f64>,
}

impl ViewArgs {
    fn viewport(&self, default_half: f64) -> Viewport {
        let px_h = self.height.unwrap_or(self.width);
        let half_width = self.half_width.unwrap_or(default_half);
        let half_height = self.half_height.unwrap_or(half_width * px_h as f64 / self.width.max(1) as f64);
        Viewport { center: Complex64::new(self.center_re, self.center_im), half_width, half_height, px_w: self.width, px_h }
    }
}

#[derive(Args, Debug, Clone, Copy)]
struct ClassifyArgs {
    /// Growth exponent of the escape certificate (default nu/2, or 0.25 when d < 3)
    #[arg(long)]
    alpha: Option<f64>,
    /// Escape radius R
    #[arg(long)]
    escape_radius: Option<f64>,
    /// Iteration budget per orbit
    #[arg(long)]
    max_iter: Option<usize>,
    /// Consecutive certified steps needed for escape
    #[arg(long)]
    cert_steps: Option<usize>,
    /// log|z| above which orbit points are tracked in log form
    #[arg(long)]
    bail_logmod: Option<f64>,
}

impl ClassifyArgs {
    fn params(&self, f: &ExpPoly) -> Result<ClassifyParams, Error> {
        let mut p = ClassifyParams::for_function(f);
        p.alpha = self.alpha.unwrap_or(p.alpha);
        p.escape_radius = self.escape_radius.unwrap_or(p.escape_radius);
        p.max_iter = self.max_iter.unwrap_or(p.max_iter);
        p.cert_steps = self.cert_steps.unwrap_or(p.cert_steps);
        p.bail_logmod = self.bail_logmod.unwrap_or(p.bail_logmod);
        p.validate(f)?;
        Ok(p)
    }
}

enum Failure {
    Invalid(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Overflow(_) | Error::ZeroValue | Error::DegenerateQ(_) | Error::Io(_) => Failure::Internal(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

fn load_function(spec: Option<&str>) -> Result<ExpPoly, Failure> {
    let spec = spec.ok_or_else(|| Failure::Invalid("--fn is required for this subcommand".into()))?;
    if let Some(f) = library::by_name(spec) {
        return Ok(f);
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| Failure::Invalid(format!("--fn {spec}: not a bundled name and unreadable as a file ({e})")))?;
    Ok(ExpPoly::from_json(&text)?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Internal(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn require_out(out: Option<&Path>) -> Result<&Path, Failure> {
    out.ok_or_else(|| Failure::Invalid("--out is required for image output".into()))
}

fn check_radii(radii: &[f64], min_len: usize) -> Result<(), Failure> {
    if radii.len() < min_len || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Failure::Invalid(format!("--radii needs at least {min_len} positive finite values")));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Invalid("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Internal(e.to_string()))?;
    }
    let out = cli.out.as_deref();
    let fn_spec = cli.function.as_deref();

    match cli.command {
        Command::Check { angle_tol } => {
            let f = load_function(fn_spec)?;
            if !(0.0..0.1).contains(&angle_tol) {
                return Err(Failure::Invalid(format!("--angle-tol {angle_tol} outside [0, 0.1)")));
            }
            emit(out, &(check_hypotheses(&f, angle_tol).to_json() + "\n"))
        }
        Command::Render { view, classify } => {
            let f = load_function(fn_spec)?;
            let path = require_out(out)?;
            let img = raster::render_classification(&f, &view.viewport(4.0), classify.params(&f)?, &Palette::default())?;
            raster::write_ppm(&img, path).map_err(|e| Failure::Internal(e.to_string()))
        }
        Command::Exceptional { view } => {
            let f = load_function(fn_spec)?;
            let path = require_out(out)?;
            let img = raster::render_exceptional(&f, &view.viewport(20.0))?;
            raster::write_ppm(&img, path).map_err(|e| Failure::Internal(e.to_string()))
        }
        Command::E2measure { radii, nr, ntheta } => {
            let f = load_function(fn_spec)?;
            check_radii(&radii, 2)?;
            if f.degree() < 3 {
                return Err(Error::RequiresD3(f.degree()).into());
            }
            let sets = ExceptionalSets::new(&f);
            let mut text = format!("{E2_CSV_HEADER}\n");
            for w in radii.windows(2) {
                let m = sets.e2_measure(w[0], w[1], nr, ntheta)?;
                text += &e2_csv_row(w[0], w[1], nr, ntheta, m, sets.r0());
                text.push('\n');
            }
            emit(out, &text)
        }
        Command::AnnulusScan { radii, samples, wedge_r0, classify } => {
            let f = load_function(fn_spec)?;
            check_radii(&radii, 1)?;
            let opts = HeadlineOptions { samples, seed: cli.seed, wedge_r0 };
            let rows = measure::headline_summary(&f, &radii, classify.params(&f)?, opts)?;
            let mut text = format!("{HEADLINE_CSV_HEADER}\n");
            for row in &rows {
                text += &row.csv_row();
                text.push('\n');
            }
            emit(out, &text)
        }
        Command::GridBound { radii, theta, sigma, alpha } => {
            let f = load_function(fn_spec)?;
            check_radii(&radii, 1)?;
            if f.degree() < 3 {
                return Err(Error::RequiresD3(f.degree()).into());
            }
            let sigma = sigma.unwrap_or_else(|| grid::default_sigma(&f));
            let alpha = alpha.unwrap_or(ClassifyParams::for_function(&f).alpha);
            if !(alpha > 0.0 && alpha < f.nu()) {
                return Err(Failure::Invalid(format!("--alpha {alpha} outside (0, {})", f.nu())));
            }
            let good = GoodSquareTest::new(&f, sigma);
            let mut text = format!("{DENSITY_CSV_HEADER}\n");
            for &r in &radii {
                let tiling = build_tiling(&f, r, 2.0 * r, sigma)?;
                let z = Complex64::from_polar(r * (1.0 + 1e-12), theta);
                let square = tiling
                    .locate(z)
                    .ok_or_else(|| Failure::Internal(format!("no square contains {z}")))?;
                if !good.is_good(&square) {
                    return Err(Failure::Invalid(format!("square at r = {r}, theta = {theta} meets E1")));
                }
                text += &grid::square_density_report(&f, &square, alpha).csv_row();
                text.push('\n');
            }
            emit(out, &text)
        }
        Command::Counterexample { r0, r_max, eps, samples } => {
            if r_max.partial_cmp(&r0) != Some(std::cmp::Ordering::Greater) {
                return Err(Failure::Invalid(format!("--R {r_max} must exceed --r0 {r0}")));
            }
            let p = CounterexampleParams { r0, eps, samples, seed: cli.seed };
            let report = measure::counterexample_check(&p, r_max)?;
            emit(out, &(report.to_json() + "\n"))
        }
        Command::LemmaVerify => {
            let outcomes = verify::run_all(cli.seed);
            let mut text = String::new();
            for o in &outcomes {
                text += &o.line();
                text.push('\n');
            }
            emit(out, &text)?;
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            if failed > 0 {
                return Err(Failure::Internal(format!("{failed} invariant check(s) failed")));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("expoly: {}", first.trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(m)) => {
            eprintln!("expoly: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("expoly: internal error: {m}");
            ExitCode::from(2)
        }
    }
}
