use std::path::{Path, PathBuf};

use mu_uncertainty::continuum::{effective_volume, refine_sequence};
use mu_uncertainty::counting::uniform_grid;
use mu_uncertainty::density::{effnum_of_spectrum, hermitian_eigen_with, reduced_density};
use mu_uncertainty::entropy::dfd_gamma_scan;
use mu_uncertainty::measurement::{plugin_mu_estimate, sample_outcomes, GENERATOR};
use mu_uncertainty::state::metric_uncertainty;
use mu_uncertainty::{
    effnum, subspace_probs, validate_counting_function, weights_from_probs,
    BipartiteStructure, CountingFunction, DensityMatrix, Error, PureState, Side,
};

use crate::args::{Command, Common, LogBase};
use crate::error::CliResult;
use crate::input::{self, FileKind, Source, Tolerances};
use crate::report::{Report, Value};

/// Tolerance for calling the two μ-entanglement sides equal.
const SIDE_AGREEMENT_TOL: f64 = 1e-9;
const CHECK_GRID_MAX: f64 = 8.0;
const CHECK_GRID_POINTS: usize = 10_000;

struct Ctx<'a> {
    cf: &'a CountingFunction,
    tol: Tolerances,
    log: LogBase,
}

impl Ctx<'_> {
    fn header(&self, command: &str) -> Report {
        let mut r = Report::new(command);
        r.scalar("cf", self.cf.label());
        r
    }

    fn entropy(&self, effnum: f64) -> f64 {
        self.log.convert(effnum.ln())
    }
}

pub fn run(command: &Command, common: &Common) -> CliResult<Report> {
    let ctx = Ctx {
        cf: &common.cf,
        tol: Tolerances::from_overrides(&common.tol),
        log: common.log_base,
    };
    match command {
        Command::Mu {
            state,
            decomposition,
        } => mu(&ctx, state, decomposition),
        Command::Qnum { density } => qnum(&ctx, density),
        Command::Entangle { state, dims } => entangle(&ctx, state, *dims),
        Command::Effvol { grid } => effvol(&ctx, grid),
        Command::Refine {
            problem,
            levels,
            order,
            fit_last,
        } => refine(&ctx, problem, *levels, *order, *fit_last),
        Command::Simulate {
            state,
            decomposition,
            trials,
            seed,
            resamples,
        } => simulate(&ctx, state, decomposition, trials, *seed, *resamples),
        Command::Dfd { family, fit_last } => dfd(&ctx, family, *fit_last),
        Command::Check { files } => check(&ctx, files),
    }
}

fn load_state_and_decomposition(
    ctx: &Ctx,
    state: &Path,
    decomposition: &Path,
) -> CliResult<(PureState, input::Decomposition)> {
    let psi = input::load_state(&Source::read(state)?, &ctx.tol)?;
    let dec = input::load_decomposition(&Source::read(decomposition)?, Some(psi.dim()))?;
    Ok((psi, dec))
}

fn mu(ctx: &Ctx, state: &Path, decomposition: &Path) -> CliResult<Report> {
    let (psi, dec) = load_state_and_decomposition(ctx, state, decomposition)?;
    let p = subspace_probs(&psi, &dec.decomposition, &dec.basis)?;
    let w = weights_from_probs(&p);
    let value = effnum(&w, ctx.cf);
    let star = effnum(&w, &CountingFunction::Minimal);

    let mut r = ctx.header("mu");
    r.scalar("N", psi.dim())
        .scalar("M", p.n())
        .scalar("mu", value)
        .scalar("mu_star", star)
        .scalar("log_base", ctx.log.label())
        .scalar("mu_entropy", ctx.entropy(value))
        .scalar("mu_entropy_star", ctx.entropy(star));
    if let Some(setup) = &dec.setup {
        r.scalar("metric_uncertainty", metric_uncertainty(&psi, setup, &dec.basis)?);
    }
    r.columns(&["block", "p", "weight"]);
    for (m, (&pm, &wm)) in p.as_slice().iter().zip(w.as_slice()).enumerate() {
        r.row(vec![Value::Index(m), pm.into(), wm.into()]);
    }
    Ok(r)
}

struct Spectral {
    spectrum: Vec<f64>,
    value: f64,
    star: f64,
}

fn spectral(ctx: &Ctx, rho: &DensityMatrix) -> CliResult<Spectral> {
    let eig = hermitian_eigen_with(rho, ctx.tol.density.psd_tol)?;
    Ok(Spectral {
        value: effnum_of_spectrum(&eig.eigenvalues, ctx.cf),
        star: effnum_of_spectrum(&eig.eigenvalues, &CountingFunction::Minimal),
        spectrum: eig.eigenvalues,
    })
}

fn qnum(ctx: &Ctx, density: &Path) -> CliResult<Report> {
    let rho = input::load_density(&Source::read(density)?, &ctx.tol)?;
    let s = spectral(ctx, &rho)?;
    let mut r = ctx.header("qnum");
    r.scalar("N", rho.dim())
        .scalar("spectrum", s.spectrum)
        .scalar("qnum", s.value)
        .scalar("qnum_star", s.star)
        .scalar("log_base", ctx.log.label())
        .scalar("mu_entropy", ctx.entropy(s.value))
        .scalar("mu_entropy_star", ctx.entropy(s.star));
    Ok(r)
}

fn entangle(ctx: &Ctx, state: &Path, (da, db): (usize, usize)) -> CliResult<Report> {
    let src = Source::read(state)?;
    let psi = input::load_state(&src, &ctx.tol)?;
    let bp = BipartiteStructure::new(da, db).map_err(|e| src.at("dim", e))?;
    if bp.dim() != psi.dim() {
        return Err(src.at(
            "dim",
            Error::DimensionMismatch {
                expected: bp.dim(),
                found: psi.dim(),
            },
        ));
    }
    let a = spectral(ctx, &reduced_density(&psi, &bp, Side::A)?)?;
    let b = spectral(ctx, &reduced_density(&psi, &bp, Side::B)?)?;
    let agree = (a.value - b.value).abs() <= SIDE_AGREEMENT_TOL
        && (a.star - b.star).abs() <= SIDE_AGREEMENT_TOL;

    let mut r = ctx.header("entangle");
    r.scalar("dim_a", da)
        .scalar("dim_b", db)
        .scalar("sides_agree", agree)
        .scalar("log_base", ctx.log.label())
        .columns(&["side", "dim", "qnum", "qnum_star", "mu_entropy", "spectrum"]);
    for (side, dim, s) in [("A", da, a), ("B", db, b)] {
        r.row(vec![
            side.into(),
            dim.into(),
            s.value.into(),
            s.star.into(),
            ctx.entropy(s.value).into(),
            s.spectrum.into(),
        ]);
    }
    Ok(r)
}

fn effvol(ctx: &Ctx, grid: &Path) -> CliResult<Report> {
    let psi = input::load_grid(&Source::read(grid)?, &ctx.tol)?;
    let v = psi.grid().volume();
    let value = effective_volume(&psi, ctx.cf);
    let star = effective_volume(&psi, &CountingFunction::Minimal);
    let mut r = ctx.header("effvol");
    r.scalar("d", psi.grid().d())
        .scalar("cells", psi.grid().cells())
        .scalar("volume", v)
        .scalar("effvol", value)
        .scalar("effvol_star", star)
        .scalar("fraction", value / v)
        .scalar("fraction_star", star / v);
    Ok(r)
}

fn refine(
    ctx: &Ctx,
    problem: &Path,
    levels: Option<usize>,
    order: f64,
    fit_last: Option<usize>,
) -> CliResult<Report> {
    let src = Source::read(problem)?;
    let p = input::load_problem(&src)?;
    let levels = levels.or(p.available).unwrap_or(5);
    if let Some(have) = p.available.filter(|&have| have < levels) {
        return Err(src.at(
            "levels",
            Error::TooFew {
                need: levels,
                got: have,
            },
        ));
    }
    let t = refine_sequence(p.problem.as_ref(), levels, ctx.cf, order, fit_last)?;
    let mut r = ctx.header("refine");
    r.scalar("levels", levels)
        .scalar("order", t.order)
        .scalar("fitted", t.fitted)
        .scalar("extrapolated", t.extrapolated)
        .scalar("slope", t.slope)
        .scalar("residual", t.residual)
        .columns(&["level", "M", "spacing", "effnum", "ratio"]);
    for row in t.rows {
        r.row(vec![
            Value::Index(row.level),
            row.m.into(),
            row.spacing.into(),
            row.effnum.into(),
            row.ratio.into(),
        ]);
    }
    Ok(r)
}

fn simulate(
    ctx: &Ctx,
    state: &Path,
    decomposition: &Path,
    trials: &[usize],
    seed: u64,
    resamples: usize,
) -> CliResult<Report> {
    let (psi, dec) = load_state_and_decomposition(ctx, state, decomposition)?;
    let exact = effnum(
        &weights_from_probs(&subspace_probs(&psi, &dec.decomposition, &dec.basis)?),
        ctx.cf,
    );
    let mut r = ctx.header("simulate");
    r.scalar("seed", Value::Int(seed))
        .scalar("resamples", resamples)
        .scalar("generator", GENERATOR)
        .scalar("exact", exact)
        .columns(&["T", "estimate", "stderr", "exact", "abs_error"]);
    for &t in trials {
        let seq = sample_outcomes(&psi, &dec.decomposition, &dec.basis, t, seed)?;
        let est = plugin_mu_estimate(&seq, ctx.cf, resamples)?;
        r.row(vec![
            t.into(),
            est.estimate.into(),
            est.stderr.into(),
            exact.into(),
            (est.estimate - exact).abs().into(),
        ]);
    }
    Ok(r)
}

fn dfd(ctx: &Ctx, family: &Path, fit_last: Option<usize>) -> CliResult<Report> {
    let src = Source::read(family)?;
    let members = input::load_family(&src)?;
    let scan = dfd_gamma_scan(&members, ctx.cf, fit_last).map_err(|e| src.at("members", e))?;
    let mut r = ctx.header("dfd");
    r.scalar("members", members.len())
        .scalar("fitted", scan.fitted)
        .scalar("gamma", scan.gamma)
        .scalar("residual", scan.residual)
        .columns(&["member", "n", "effnum", "fraction", "k_eq"]);
    for (i, s) in scan.steps.into_iter().enumerate() {
        r.row(vec![
            Value::Index(i),
            s.n.into(),
            s.effnum.into(),
            s.fraction.into(),
            s.k_eq.into(),
        ]);
    }
    Ok(r)
}

fn check(ctx: &Ctx, files: &[PathBuf]) -> CliResult<Report> {
    let report = validate_counting_function(ctx.cf, &uniform_grid(CHECK_GRID_MAX, CHECK_GRID_POINTS));
    let mut r = ctx.header("check");
    r.scalar("files", files.len())
        .columns(&["item", "check", "passed", "detail"]);
    for c in &report.checks {
        r.row(vec![
            report.label.clone().into(),
            c.name.into(),
            c.passed.into(),
            c.detail.clone().into(),
        ]);
    }
    if let Some(failed) = report.checks.iter().find(|c| !c.passed) {
        return Err(Error::Invalid(format!(
            "counting function {} fails {}: {}",
            report.label, failed.name, failed.detail
        ))
        .into());
    }
    for path in files {
        let src = Source::read(path)?;
        let kind = input::detect_kind(&src)?;
        let detail = match kind {
            FileKind::State => format!("dim {}", input::load_state(&src, &ctx.tol)?.dim()),
            FileKind::Density => format!("dim {}", input::load_density(&src, &ctx.tol)?.dim()),
            FileKind::Decomposition => {
                let d = input::load_decomposition(&src, None)?;
                format!("dim {}, {} blocks", d.decomposition.dim(), d.decomposition.m_count())
            }
            FileKind::Grid => format!("{} cells", input::load_grid(&src, &ctx.tol)?.grid().cells()),
            FileKind::Problem => match input::load_problem(&src)?.available {
                Some(n) => format!("{n} explicit levels"),
                None => "generated levels".into(),
            },
            FileKind::Family => format!("{} members", input::load_family(&src)?.len()),
        };
        r.row(vec![
            src.path().display().to_string().into(),
            kind.name().into(),
            true.into(),
            detail.into(),
        ]);
    }
    Ok(r)
}
