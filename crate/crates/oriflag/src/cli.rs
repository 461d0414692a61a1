//! Command-line front end: reproducible experiments over the library with
//! stable output formats.

use crate::bruhat::{
    hasse_dot, involution_action, position_space, sphere_data, trivial_type, ParabolicType,
};
use crate::domain::{render_sphere, RenderOptions};
use crate::flag::{bruhat_factorize, canonicalize, relative_position};
use crate::ideal::{
    enumerate_balanced, grassmannian_exists, grassmannian_fixed_point_oracle,
};
use crate::io;
use crate::mat::Mat;
use crate::rep;
use crate::weyl::GroupContext;
use crate::{Error, Result};
use clap::{Args, Parser, Subcommand};
use num::BigRational;
use rand::{Rng, SeedableRng};
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Parser)]
#[command(
    name = "oriflag",
    about = "Oriented flag combinatorics of SL(n,R): refined Bruhat order, balanced ideals, domains of discontinuity",
    version
)]
struct Cli {
    /// Worker threads for parallel sections (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Re-run every closed-form result against its brute-force oracle.
    #[arg(long)]
    verify: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Bruhat order of the full extended Weyl group as a Hasse diagram.
    Weyl {
        #[command(subcommand)]
        sub: WeylCommand,
    },
    /// Build a space of relative positions R\W/S.
    Positions(PositionsArgs),
    /// Enumerate balanced ideals.
    Ideals(IdealsArgs),
    /// Existence table for balanced ideals in oriented Grassmannians.
    Grassmannian {
        #[arg(long)]
        n: usize,
    },
    /// Relative position of two explicit flags.
    Relpos(RelposArgs),
    /// Block transversality type: computed vs closed form.
    Wk {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Domains of discontinuity on the sphere.
    Domain {
        #[command(subcommand)]
        sub: DomainCommand,
    },
    /// Re-run closed-form results against brute-force oracles.
    Verify {
        /// Largest rank for the Grassmannian table.
        #[arg(long, default_value_t = 8)]
        max_n: usize,
        /// Seed for the randomized factorization round trips.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum WeylCommand {
    /// Hasse diagram of the full group, with an optional involution overlay.
    Order(WeylOrderArgs),
}

#[derive(Args)]
struct WeylOrderArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    projective: bool,
    /// Transverse element (e.g. `antidiag:+,-,+`) drawn as an involution.
    #[arg(long)]
    w0: Option<String>,
    /// DOT output path (`-` for stdout).
    #[arg(long)]
    dot: Option<PathBuf>,
    /// JSON dump path (`-` for stdout).
    #[arg(long)]
    json: Option<PathBuf>,
    /// Allow the full poset for n >= 5 (large).
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct PositionsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    projective: bool,
    /// Left type, e.g. `theta=1,2;E=min` or `E=all`.
    #[arg(long = "R", visible_alias = "r", default_value = "")]
    r: String,
    /// Right type.
    #[arg(long = "S", visible_alias = "s", default_value = "")]
    s: String,
    #[arg(long)]
    dot: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct IdealsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    projective: bool,
    /// Transverse element, e.g. `antidiag:+,-,+`.
    #[arg(long)]
    w0: String,
    /// Left type, e.g. `theta=1,2;E=min` or `E=all`.
    #[arg(long = "R", visible_alias = "r", default_value = "")]
    r: String,
    /// Right type.
    #[arg(long = "S", visible_alias = "s", default_value = "")]
    s: String,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct RelposArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    projective: bool,
    /// Matrix files (text rows or JSON {"rows": ...}); first matrix of each.
    a: PathBuf,
    b: PathBuf,
    /// Left type, e.g. `theta=1,2;E=min` or `E=all`.
    #[arg(long = "R", visible_alias = "r", default_value = "")]
    r: String,
    /// Right type.
    #[arg(long = "S", visible_alias = "s", default_value = "")]
    s: String,
}

#[derive(Subcommand)]
enum DomainCommand {
    /// Rasterize the removed set of a balanced ideal over the sphere.
    Render(RenderArgs),
}

#[derive(Args)]
struct RenderArgs {
    /// Group spec JSON: {n, rank, generators, via}.
    #[arg(long)]
    spec: PathBuf,
    /// Maximum word length sampled.
    #[arg(long, default_value_t = 6)]
    l: usize,
    /// Which balanced ideal of the census to use.
    #[arg(long, default_value_t = 0)]
    ideal_index: usize,
    #[arg(long, default_value_t = 400)]
    width: usize,
    #[arg(long, default_value_t = 200)]
    height: usize,
    /// Output PPM path.
    #[arg(long)]
    out: PathBuf,
    /// Global sign twist (e.g. `+--+`) applied to all sampled lifts.
    #[arg(long)]
    twist: Option<String>,
    /// Power-iteration cap.
    #[arg(long, default_value_t = 3000)]
    iters: usize,
    /// Flag convergence tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Angular width for rasterizing removed strata (default: pixel size).
    #[arg(long)]
    band: Option<f64>,
    /// Chart: `equirect` covers the sphere, `gnomonic` one affine hemisphere.
    #[arg(long, default_value = "equirect")]
    chart: String,
    /// Visible half-width of the plane window in the gnomonic chart.
    #[arg(long, default_value_t = 2.0)]
    chart_scale: f64,
}

fn default_eps() -> f64 {
    std::env::var("ORIFLAG_EPS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(crate::flag::DEFAULT_EPS)
}

/// Parses argv and runs; output goes to the writer. The process exit code is
/// 0 for success, 2 for usage errors, 3 for verification mismatches.
pub fn run(args: &[String], out: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(out, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if cli.jobs > 0 {
        // Ignore failure: the global pool may already exist in-process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global();
    }
    let command = match (cli.command, cli.verify) {
        (None, true) => Command::Verify {
            max_n: 8,
            seed: 0,
        },
        (Some(cmd), _) => cmd,
        (None, false) => {
            let _ = writeln!(out, "a subcommand is required; see --help");
            return EXIT_USAGE;
        }
    };
    match dispatch(command, out) {
        Ok(code) => code,
        Err(Error::VerificationMismatch(msg)) => {
            let _ = writeln!(out, "verification mismatch: {msg}");
            EXIT_MISMATCH
        }
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn emit(path: &Option<PathBuf>, content: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        None => Ok(()),
        Some(p) if p.as_os_str() == "-" => {
            write!(out, "{content}")?;
            Ok(())
        }
        Some(p) => {
            std::fs::write(p, content)?;
            Ok(())
        }
    }
}

fn build_types(
    ctx: &GroupContext,
    r: &str,
    s: &str,
) -> Result<(ParabolicType, ParabolicType)> {
    let r = if r.is_empty() {
        trivial_type(ctx)
    } else {
        io::parse_type_spec(ctx, r)?
    };
    let s = if s.is_empty() {
        trivial_type(ctx)
    } else {
        io::parse_type_spec(ctx, s)?
    };
    Ok((r, s))
}

fn guard_size(ctx: &GroupContext, r: &ParabolicType, s: &ParabolicType, force: bool) -> Result<()> {
    // The full-group poset gets big quickly; require an explicit opt-in.
    if ctx.n() >= 5 && r.len() * s.len() < 4 && !force {
        return Err(Error::Parse(format!(
            "the poset for n = {} with small R, S is large; pass --force to build it",
            ctx.n()
        )));
    }
    Ok(())
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Weyl {
            sub: WeylCommand::Order(args),
        } => {
            let ctx = GroupContext::new(args.n, args.projective)?;
            let triv = trivial_type(&ctx);
            guard_size(&ctx, &triv, &triv, args.force)?;
            let space = position_space(&ctx, &triv, &triv);
            let action = match &args.w0 {
                Some(spec) => Some(involution_action(&space, &io::parse_w0(&ctx, spec)?)?),
                None => None,
            };
            writeln!(out, "elements: {}", space.len())?;
            let dot = hasse_dot(&space, action.as_ref());
            if args.dot.is_none() && args.json.is_none() {
                write!(out, "{dot}")?;
            }
            emit(&args.dot, &dot, out)?;
            emit(
                &args.json,
                &serde_json::to_string_pretty(&io::space_json(&space))?,
                out,
            )?;
            Ok(EXIT_OK)
        }
        Command::Positions(args) => {
            let ctx = GroupContext::new(args.n, args.projective)?;
            let (r, s) = build_types(&ctx, &args.r, &args.s)?;
            guard_size(&ctx, &r, &s, args.force)?;
            let space = position_space(&ctx, &r, &s);
            writeln!(out, "classes: {}", space.len())?;
            for (i, rep) in space.classes().iter().enumerate() {
                writeln!(out, "  [{i}] {} (length {})", rep, rep.length())?;
            }
            emit(&args.dot, &hasse_dot(&space, None), out)?;
            emit(
                &args.json,
                &serde_json::to_string_pretty(&io::space_json(&space))?,
                out,
            )?;
            Ok(EXIT_OK)
        }
        Command::Ideals(args) => {
            let ctx = GroupContext::new(args.n, args.projective)?;
            let (r, s) = build_types(&ctx, &args.r, &args.s)?;
            guard_size(&ctx, &r, &s, args.force)?;
            let w0 = io::parse_w0(&ctx, &args.w0)?;
            let space = position_space(&ctx, &r, &s);
            let action = involution_action(&space, &w0)?;
            let census = enumerate_balanced(&space, &action);
            writeln!(
                out,
                "count={} classes={}",
                census.count(),
                census.mbar_classes().len()
            )?;
            emit(
                &args.json,
                &serde_json::to_string_pretty(&io::census_json(&census, &space))?,
                out,
            )?;
            Ok(EXIT_OK)
        }
        Command::Grassmannian { n } => {
            let mut code = EXIT_OK;
            for k in 1..n {
                let closed = grassmannian_exists(n, k)?;
                let oracle = grassmannian_fixed_point_oracle(n, k)?;
                let verdict = if closed { "exists" } else { "no" };
                if closed == oracle {
                    writeln!(out, "k={k}: {verdict}")?;
                } else {
                    writeln!(out, "k={k}: {verdict} (ORACLE DISAGREES)")?;
                    code = EXIT_MISMATCH;
                }
            }
            Ok(code)
        }
        Command::Relpos(args) => {
            let eps = default_eps();
            let ctx = GroupContext::new(args.n, args.projective)?;
            let (r, s) = build_types(&ctx, &args.r, &args.s)?;
            let space = position_space(&ctx, &r, &s);
            let load = |p: &PathBuf| -> Result<Mat<f64>> {
                let text = std::fs::read_to_string(p)?;
                io::parse_matrix_file(&text)?
                    .into_iter()
                    .next()
                    .ok_or_else(|| Error::Parse(format!("no matrix in {}", p.display())))
            };
            let f1 = canonicalize(&load(&args.a)?, eps)?;
            let f2 = canonicalize(&load(&args.b)?, eps)?;
            let class = relative_position(&f1, &f2, &space, eps)?;
            let rep = space.class_rep(class);
            if *rep == ctx.identity() {
                writeln!(out, "class [{class}]: identity")?;
            } else {
                writeln!(out, "class [{class}]: {rep}")?;
            }
            Ok(EXIT_OK)
        }
        Command::Wk { n, k } => {
            let formula = rep::wk_formula(n, k)?;
            write_matrix(out, "formula", &formula)?;
            match rep::block_transversality(n, k) {
                Ok(computed) => {
                    write_matrix(out, "computed", &computed)?;
                    writeln!(out, "verdict: match")?;
                    Ok(EXIT_OK)
                }
                Err(Error::VerificationMismatch(msg)) => {
                    writeln!(out, "verdict: MISMATCH ({msg})")?;
                    Ok(EXIT_MISMATCH)
                }
                Err(e) => Err(e),
            }
        }
        Command::Domain {
            sub: DomainCommand::Render(args),
        } => {
            let eps = default_eps();
            let text = std::fs::read_to_string(&args.spec)?;
            let spec = io::parse_group_spec(&text, eps)?;
            let ctx = GroupContext::new(spec.n(), false)?;
            let (r, s, w0) = sphere_data(&ctx)?;
            let space = position_space(&ctx, &r, &s);
            let action = involution_action(&space, &w0)?;
            let census = enumerate_balanced(&space, &action);
            if args.ideal_index >= census.count() {
                return Err(Error::Parse(format!(
                    "ideal index {} out of range: {} balanced ideals",
                    args.ideal_index,
                    census.count()
                )));
            }
            let ideal = &census.ideals()[args.ideal_index];
            let chart = match args.chart.as_str() {
                "equirect" => crate::domain::Chart::Equirectangular,
                "gnomonic" => crate::domain::Chart::Gnomonic,
                other => return Err(Error::Parse(format!("unknown chart `{other}`"))),
            };
            let opts = RenderOptions {
                iters: args.iters,
                tol: args.tol,
                eps,
                band: args.band,
                chart,
                chart_scale: args.chart_scale,
                normalize_to: Some(w0.clone()),
                twist: match &args.twist {
                    Some(spec) => Some(io::parse_diagonal(&ctx, spec)?),
                    None => None,
                },
            };
            let (img, set) = render_sphere(
                &spec,
                args.l,
                ideal,
                &space,
                args.width,
                args.height,
                &opts,
            )?;
            let file = std::fs::File::create(&args.out)?;
            img.write_ppm(std::io::BufWriter::new(file))?;
            writeln!(
                out,
                "samples: {} (skipped {}), image: {}x{} -> {}",
                set.samples.len(),
                set.skipped,
                args.width,
                args.height,
                args.out.display()
            )?;
            Ok(EXIT_OK)
        }
        Command::Verify { max_n, seed } => verify(max_n, seed, out),
    }
}

fn write_matrix(out: &mut dyn Write, label: &str, w: &crate::weyl::SignedPermutation) -> Result<()> {
    writeln!(out, "{label}: {w}")?;
    let n = w.rank();
    for i in 0..n {
        let row: Vec<String> = (0..n)
            .map(|j| format!("{:>2}", w.entry(i, j)))
            .collect();
        writeln!(out, "  [{}]", row.join(" "))?;
    }
    Ok(())
}

/// Cross-checks every closed-form result against its oracle; returns exit
/// code 3 on the first batch of mismatches.
fn verify(max_n: usize, seed: u64, out: &mut dyn Write) -> Result<i32> {
    let mut ok = true;
    let mut check = |name: &str, pass: bool, out: &mut dyn Write| -> Result<()> {
        writeln!(out, "{name}: {}", if pass { "ok" } else { "MISMATCH" })?;
        ok &= pass;
        Ok(())
    };

    for n in 3..=max_n {
        let mut pass = true;
        for k in 1..n {
            pass &= grassmannian_exists(n, k)? == grassmannian_fixed_point_oracle(n, k)?;
        }
        check(&format!("grassmannian criterion vs oracle (n={n})"), pass, out)?;
    }

    let mut pass = true;
    for n in 2..=9 {
        let w = bruhat_factorize(&rep::irreducible_rep_exact(n, &rep::rot90_q())?, 0.0)?;
        pass &= w == rep::hitchin_w0(n)?;
    }
    check("hitchin type vs factorized irreducible image (n<=9)", pass, out)?;

    let mut pass = true;
    for n in [3usize, 5, 7, 9] {
        for k in 1..n {
            pass &= rep::block_transversality(n, k).is_ok();
        }
    }
    check("block transversality vs closed form (odd n<=9)", pass, out)?;

    {
        let ctx = GroupContext::new(3, false)?;
        let triv = trivial_type(&ctx);
        let space = position_space(&ctx, &triv, &triv);
        let w0 = ctx.antidiagonal(&[1, -1, 1])?;
        let census = enumerate_balanced(&space, &involution_action(&space, &w0)?);
        check(
            "sl3 census (21 ideals, 7 classes)",
            census.count() == 21 && census.mbar_classes().len() == 7,
            out,
        )?;

        let (r, s, w0s) = sphere_data(&ctx)?;
        let sphere = position_space(&ctx, &r, &s);
        let census = enumerate_balanced(&sphere, &involution_action(&sphere, &w0s)?);
        check(
            "sphere diamond (4 classes, 2 ideals)",
            sphere.len() == 4 && census.count() == 2,
            out,
        )?;
    }

    {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut pass = true;
        for n in [3usize, 4, 5] {
            let ctx = GroupContext::new(n, false)?;
            let elements = ctx.elements();
            for _ in 0..200 {
                let w = &elements[rng.gen_range(0..elements.len())];
                let b1 = random_b0(n, &mut rng);
                let b2 = random_b0(n, &mut rng);
                let wm: Mat<BigRational> = Mat::from_signed_permutation(w);
                let g = b1.mul(&wm).mul(&b2);
                pass &= bruhat_factorize(&g, 0.0).ok().as_ref() == Some(w);
            }
        }
        check("exact factorization round trips (200 per n in 3..=5)", pass, out)?;

        let mut pass = true;
        for _ in 0..100_000 {
            let g = random_sl(3, &mut rng);
            pass &= bruhat_factorize(&g, 1e-9).is_ok();
        }
        check("float factorization totality (1e5 samples, n=3)", pass, out)?;
    }

    Ok(if ok { EXIT_OK } else { EXIT_MISMATCH })
}

/// Uniform entries rescaled to determinant exactly +1 (up to rounding).
pub(crate) fn random_sl(n: usize, rng: &mut impl Rng) -> Mat<f64> {
    loop {
        let mut g = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0f64));
        let det = g.det();
        if det.abs() < 1e-6 {
            continue;
        }
        let scale = det.abs().powf(1.0 / n as f64);
        if det < 0.0 {
            for i in 0..n {
                g[(i, 0)] = -g[(i, 0)];
            }
        }
        return g.map(|x| x / scale);
    }
}

fn random_b0(n: usize, rng: &mut impl Rng) -> Mat<BigRational> {
    Mat::from_fn(n, n, |i, j| {
        if i == j {
            BigRational::new(rng.gen_range(1..=4).into(), rng.gen_range(1..=4).into())
        } else if i < j {
            BigRational::new(rng.gen_range(-9..=9).into(), rng.gen_range(1..=9).into())
        } else {
            num::Zero::zero()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String) {
        let argv: Vec<String> = std::iter::once("oriflag".to_string())
            .chain(args.iter().map(|s| s.to_string()))
            .collect();
        let mut out = Vec::new();
        let code = run(&argv, &mut out);
        (code, String::from_utf8(out).unwrap())
    }

    #[test]
    fn ideals_census_line() {
        let (code, out) = run_capture(&["ideals", "--n", "3", "--w0", "antidiag:+,-,+"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("count=21 classes=7"), "got: {out}");
    }

    #[test]
    fn ideals_case_two() {
        let (code, out) = run_capture(&[
            "ideals",
            "--n",
            "3",
            "--w0",
            "antidiag:-,+,+",
            "--r",
            "E=-+-",
        ]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("count=1 "), "got: {out}");
        // Uppercase spelling and comma-separated components.
        let (code, out) = run_capture(&[
            "ideals",
            "--n",
            "3",
            "--w0",
            "antidiag:-,+,+",
            "--R",
            "theta=,E=-+-",
        ]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("count=1 "), "got: {out}");
    }

    #[test]
    fn grassmannian_table() {
        let (code, out) = run_capture(&["grassmannian", "--n", "5"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("k=1: no"));
        assert!(out.contains("k=2: exists"));
        assert!(out.contains("k=3: exists")); // 3·10/2 = 15 odd
        assert!(out.contains("k=4: no"));
    }

    #[test]
    fn wk_verdict() {
        let (code, out) = run_capture(&["wk", "--n", "7", "--k", "2"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("verdict: match"));
        let (code, _) = run_capture(&["wk", "--n", "6", "--k", "2"]);
        assert_eq!(code, EXIT_USAGE); // even n is a usage error
    }

    #[test]
    fn relpos_identity() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.mat");
        std::fs::write(&a, "1 0 0\n0 1 0\n0 0 1\n").unwrap();
        let b = dir.path().join("b.mat");
        std::fs::write(&b, "2 1 0\n0 1 3\n0 0 0.5\n").unwrap();
        let (code, out) = run_capture(&[
            "relpos",
            "--n",
            "3",
            a.to_str().unwrap(),
            b.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("identity"), "got: {out}");
    }

    #[test]
    fn weyl_order_gate_and_output() {
        let (code, out) = run_capture(&["weyl", "order", "--n", "3"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("elements: 24"));
        assert!(out.contains("digraph"));

        let (code, out) = run_capture(&["weyl", "order", "--n", "5"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(out.contains("--force"));
    }

    #[test]
    fn unknown_flags_are_rejected() {
        let (code, _) = run_capture(&["ideals", "--n", "3", "--w0", "antidiag:+,-,+", "--bogus"]);
        assert_eq!(code, EXIT_USAGE);
        let (code, _) = run_capture(&["nonsense"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn verify_small() {
        let (code, out) = run_capture(&["verify", "--max-n", "4", "--seed", "7"]);
        assert_eq!(code, EXIT_OK, "verify output:\n{out}");
        assert!(out.contains("sl3 census"));
        assert!(!out.contains("MISMATCH"));
    }

    #[test]
    fn positions_unoriented_collapse() {
        let (code, out) = run_capture(&["positions", "--n", "3", "--r", "E=all", "--s", "E=all"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("classes: 6"));
    }
}
