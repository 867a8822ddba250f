//! Dispatch from a run configuration to the computation modules.

use std::time::Instant;

use bayes_assurance::closed_form::{closed_form_assurance, frequentist_power, power_assurance_curve, TwoPriorSpec};
use bayes_assurance::conjugate::{
    simulate_assurance, simulate_assurance_unbalanced, simulate_assurance_unknown_var, ConjugateModelSpec,
    HypothesisSpec, IGPriorPair,
};
use bayes_assurance::design::{
    block_diagonal_cov, gen_design, gen_design_longitudinal, DesignMatrix, LongitudinalSpec,
};
use bayes_assurance::goal::{
    power_rstar_pairs, rate_correct_classification, rate_correct_classification_design, GoalSpec,
};
use bayes_assurance::kernels::CovarianceMatrix;
use bayes_assurance::special::{adcock_assurance, betabin_assurance, AdcockSpec, BetaBinSpec};
use bayes_assurance::{Alternative, AssuranceTable, ContourGrid, McSettings, SampleSize};
use nalgebra::DVector;

use crate::config::{Command, RunConfig};
use crate::error::{usage, CliError, Result};
use crate::params::Params;
use crate::plot::{contour_plot, line_plot, Series};
use crate::report::{Bundle, Cell, Metadata, Plot, Table};

/// Runs the configured command. Unknown keys are rejected before any work.
pub fn run(config: &RunConfig) -> Result<Bundle> {
    let start = Instant::now();
    let mut bundle = Bundle {
        metadata: Metadata {
            command: config.command.name().to_string(),
            ..Metadata::default()
        },
        ..Bundle::default()
    };
    let p = &config.params;
    let ctx = Ctx {
        config,
        bundle: &mut bundle,
    };
    match config.command {
        Command::Power => power(p, ctx)?,
        Command::AssuranceClosed => assurance_closed(p, ctx)?,
        Command::Curve => curve(p, ctx)?,
        Command::AssuranceSim => assurance_sim(p, ctx)?,
        Command::AssuranceUnbalanced => assurance_unbalanced(p, ctx)?,
        Command::AssuranceUnknownvar => assurance_unknownvar(p, ctx)?,
        Command::Adcock => adcock(p, ctx)?,
        Command::Betabin => betabin(p, ctx)?,
        Command::Goal => goal(p, ctx)?,
        Command::GenDesign => gen_design_cmd(p, ctx)?,
    }
    bundle.metadata.wall_time_s = start.elapsed().as_secs_f64();
    bundle.check()?;
    Ok(bundle)
}

struct Ctx<'a> {
    config: &'a RunConfig,
    bundle: &'a mut Bundle,
}

impl Ctx<'_> {
    fn name(&self) -> &'static str {
        self.config.command.name()
    }

    fn fail(&self, err: bayes_assurance::Error) -> CliError {
        CliError::numerical(self.name(), err)
    }

    /// Monte Carlo settings: flags over section keys over defaults.
    fn mc(&mut self, p: &Params, nested: bool) -> Result<McSettings> {
        let flags = self.config.mc;
        let defaults = McSettings::default();
        let mc_iter = flags.mc_iter.unwrap_or(p.usize_or("mc_iter", defaults.mc_iter)?);
        let seed = flags.seed.unwrap_or(p.opt_u64("seed")?.unwrap_or(defaults.seed));
        let mut mc = McSettings::new(mc_iter, seed);
        if nested {
            mc = mc.with_datasets(flags.datasets.unwrap_or(p.usize_or("datasets", defaults.datasets)?));
        }
        if let Some(w) = flags.workers.or(p.opt_usize("workers")?) {
            mc = mc.with_workers(w);
        }
        mc.validate().map_err(|e| self.fail(e))?;
        let m = &mut self.bundle.metadata;
        m.seed = Some(mc.seed);
        m.mc_iter = Some(mc.mc_iter);
        m.datasets = nested.then_some(mc.datasets);
        m.workers = mc.workers;
        Ok(mc)
    }

    fn add_table(&mut self, table: Table) {
        self.bundle.tables.push(table);
    }

    /// Line or overlay plot over `x`; a single point gets a note instead.
    fn add_line_plot(&mut self, table: &str, x: Vec<f64>, series: &[(&str, Vec<f64>)], y_label: &str) -> Result<()> {
        if x.len() < 2 {
            self.bundle
                .notes
                .push(format!("{}: single sample size, no plot produced", self.name()));
            return Ok(());
        }
        let series: Vec<Series<'_>> = series.iter().map(|(label, values)| Series { label, values }).collect();
        let svg = line_plot(self.name(), &x, &series, y_label)?;
        self.bundle.plots.push(Plot {
            name: table.to_string(),
            table: table.to_string(),
            svg,
        });
        Ok(())
    }
}

fn two_prior(p: &Params, with_priors: bool) -> Result<TwoPriorSpec> {
    let (n_a, n_d) = if with_priors {
        (p.f64("n_a")?, p.f64("n_d")?)
    } else {
        (0.0, 0.0)
    };
    Ok(TwoPriorSpec {
        theta_0: p.f64("theta_0")?,
        theta_1: p.f64("theta_1")?,
        sigsq: p.f64("sigsq")?,
        n_a,
        n_d,
        alt: p.alt_or(Alternative::Greater)?,
        alpha: p.f64_or("alpha", 0.05)?,
    })
}

fn power(p: &Params, mut ctx: Ctx<'_>) -> Result<()> {
    let grid = p.reals("n")?;
    let spec = two_prior(p, false)?;
    p.finish()?;
    let mut t = Table::new("power", &["n", "power"]);
    let mut values = Vec::new();
    for &n in &grid.values {
        let v = frequentist_power(n, &spec).map_err(|e| ctx.fail(e))?;
        values.push(v);
        t.push(vec![size_cell(n), v.into()]);
    }
    ctx.add_table(t);
    ctx.add_line_plot("power", grid.values, &[("power", values)], "power")
}

fn assurance_closed(p: &Params, mut ctx: Ctx<'_>) -> Result<()> {
    let grid = p.reals("n")?;
    let spec = two_prior(p, true)?;
    p.finish()?;
    let mut t = Table::new("assurance", &["n", "assurance"]);
    let mut values = Vec::new();
    for &n in &grid.values {
        let v = closed_form_assurance(n, &spec).map_err(|e| ctx.fail(e))?;
        values.push(v);
        t.push(vec![size_cell(n), v.into()]);
    }
    ctx.add_table(t);
    ctx.add_line_plot("assurance", grid.values, &[("assurance", values)], "assurance")
}

fn curve(p: &Params, mut ctx: Ctx<'_>) -> Result<()> {
    let grid = p.reals("n")?;
    let spec = two_prior(p, true)?;
    let sim = p.bool_or("sim", false)?;
    let mc = ctx.mc(p, false)?;
    p.finish()?;
    if !sim {
        ctx.bundle.metadata = Metadata {
            command: ctx.name().to_string(),
            ..Metadata::default()
        };
    }
    let rows = power_assurance_curve(&grid.values, &spec, sim, &mc).map_err(|e| ctx.fail(e))?;
    let mut t = Table::new("curve", &["n", "power", "assurance_exact", "assurance_sim"]);
    for r in &rows {
        t.push(vec![
            size_cell(r.n),
            r.power.into(),
            r.assurance_exact.into(),
            r.assurance_sim.into(),
        ]);
    }
    ctx.add_table(t);
    let mut series = vec![
        ("power", rows.iter().map(|r| r.power).collect::<Vec<_>>()),
        ("assurance (exact)", rows.iter().map(|r| r.assurance_exact).collect()),
    ];
    if sim {
        series.push((
            "assurance (simulated)",
            rows.iter().filter_map(|r| r.assurance_sim).collect(),
        ));
    }
    ctx.add_line_plot("curve", grid.values, &series, "probability")
}

/// Conjugate-model keys shared by the simulation commands.
struct ModelKeys {
    model: ConjugateModelSpec,
    hyp: HypothesisSpec,
}

fn covariance(ctx: &Ctx<'_>, p: &Params, key: &str) -> Result<Option<CovarianceMatrix>> {
    p.opt_matrix(key)?
        .map(|m| CovarianceMatrix::new(m).map_err(|e| CliError::numerical(&format!("{} ({key})", ctx.name()), e)))
        .transpose()
}

fn model_keys(ctx: &Ctx<'_>, p: &Params, sigsq_default: Option<f64>, allow_design: bool) -> Result<ModelKeys> {
    let u = p.vector("u")?;
    let c = p.f64_or("c", 0.0)?;
    let mu_beta_d = p.vector("mu_beta_d")?;
    let vbeta_d = covariance(ctx, p, "vbeta_d")?
        .ok_or_else(|| usage(format!("missing required key `vbeta_d` for command {}", ctx.name())))?;
    let sigsq = match sigsq_default {
        Some(d) => p.f64_or("sigsq", d)?,
        None => p.f64("sigsq")?,
    };
    let dim = u.len();
    let vbeta_a_inv = covariance(ctx, p, "vbeta_a_inv")?.unwrap_or_else(|| CovarianceMatrix::zeros(dim));
    let mu_beta_a = p.opt_vector("mu_beta_a")?.unwrap_or_else(|| DVector::zeros(dim));
    let alt = p.alt_or(Alternative::Greater)?;
    let alpha = p.f64_or("alpha", 0.05)?;

    let mut model = ConjugateModelSpec::new(vbeta_d, mu_beta_d, sigsq)
        .with_analysis_prior(vbeta_a_inv, mu_beta_a)
        .with_alternative(alt, alpha);
    if allow_design {
        if let Some(x) = p.opt_matrix("xn")? {
            model = model.with_design(DesignMatrix::from_matrix(x).map_err(|e| ctx.fail(e))?);
        }
        model.p = p.opt_usize("p")?;
    }
    let vn = covariance(ctx, p, "vn")?;
    let blocks = p.opt_blocks("vn_blocks")?;
    match (vn, blocks) {
        (Some(_), Some(_)) => return Err(usage("give either `vn` or `vn_blocks`, not both")),
        (Some(v), None) => model = model.with_vn(v),
        (None, Some(b)) => model = model.with_vn(block_diagonal_cov(&b).map_err(|e| ctx.fail(e))?),
        (None, None) => {}
    }
    let hyp = HypothesisSpec::new(u, c).map_err(|e| ctx.fail(e))?;
    Ok(ModelKeys { model, hyp })
}

/// Longitudinal design keys; the number of measures comes from the grid.
fn longitudinal(ctx: &Ctx<'_>, p: &Params, first_n: usize) -> Result<Option<LongitudinalSpec>> {
    let Some(ids) = p.opt_ints("ids")? else {
        for key in ["from", "to", "poly_degree"] {
            if p.has(key) {
                return Err(usage(format!("`{key}` needs `ids` for a longitudinal design")));
            }
        }
        return Ok(None);
    };
    let spec = LongitudinalSpec::new(ids, p.f64("from")?, p.f64("to")?, first_n as f64)
        .map_err(|e| ctx.fail(e))?
        .with_poly_degree(p.usize_or("poly_degree", 1)?);
    Ok(Some(spec))
}

fn single_rows(name: &str, table: &AssuranceTable) -> (Table, Vec<f64>, Vec<f64>) {
    let mut t = Table::new(name, &["n", "assurance", "mc_se"]);
    let mut x = Vec::new();
    for r in &table.rows {
        let n = match r.size {
            SampleSize::Single(n) => n,
            SampleSize::Pair(a, b) => a + b,
        };
        x.push(n as f64);
        t.push(vec![n.into(), r.assurance.into(), r.mc_se.into()]);
    }
    (t, x, table.assurances())
}

/// Pair tables are plotted against `n1` when both arms match, else the total.
fn pair_rows(name: &str, table: &AssuranceTable) -> (Table, Vec<f64>, Vec<f64>) {
    let mut t = Table::new(name, &["n1", "n2", "assurance", "mc_se"]);
    let pairs: Vec<(usize, usize)> = table
        .rows
        .iter()
        .map(|r| match r.size {
            SampleSize::Pair(a, b) => (a, b),
            SampleSize::Single(n) => (n, n),
        })
        .collect();
    let equal = pairs.iter().all(|(a, b)| a == b);
    for (r, (a, b)) in table.rows.iter().zip(&pairs) {
        t.push(vec![(*a).into(), (*b).into(), r.assurance.into(), r.mc_se.into()]);
    }
    let x = pairs
        .iter()
        .map(|&(a, b)| if equal { a } else { a + b } as f64)
        .collect();
    (t, x, table.assurances())
}

fn assurance_sim(p: &Params, mut ctx: Ctx<'_>) -> Result<()> {
    let grid = p.sizes("n")?;
    let keys = model_keys(&ctx, p, None, true)?;
    let long = longitudinal(&ctx, p, grid.values[0])?;
    let mc = ctx.mc(p, false)?;
    p.finish()?;
    let table =
        simulate_assurance(&keys.model, &keys.hyp, &grid.values, &mc, long.as_ref()).map_err(|e| ctx.fail(e))?;
    ctx.bundle.metadata.method = Some(table.method.to_string());
    let (t, x, y) = single_rows("assurance", &table);
    ctx.add_table(t);
    ctx.add_line_plot("assurance", x, &[("assurance", y)], "assurance")
}

fn assurance_unknownvar(p: &Params, mut ctx: Ctx<'_>) -> Result<()> {
    let grid = p.sizes("n")?;
    let keys = model_keys(&ctx, p, Some(1.0), true)?;
    let ig = IGPriorPair {
        a_sig_d: p.f64("a_sig_d")?,
        b_sig_d: p.f64("b_sig_d")?,
        a_sig_a: p.f64("a_sig_a")?,
        b_sig_a: p.f64("b_sig_a")?,
    };
    let long = longitudinal(&ctx, p, grid.values[0])?;
    let mc = ctx.mc(p, true)?;
    p.finish()?;
    let table = simulate_assurance_unknown_var(&keys.model, &keys.hyp, &ig, &grid.values, &mc, long.as_ref())
        .map_err(|e| ctx.fail(e))?;
    ctx.bundle.metadata.method = Some(table.method.to_string());
    let (t, x, y) = single_rows("assurance", &table);
    ctx.add_table(t);
    ctx.add_line_plot("assurance", x, &[("assurance", y)], "assurance")
}

fn contour_table(grid: &ContourGrid) -> Table {
    let mut t = Table::new("contour", &["n1", "n2", "assurance"]);
    for (i, &a) in grid.n1.iter().enumerate() {
        for (j, &b) in grid.n2.iter().enumerate() {
            t.push(vec![a.into(), b.into(), grid.values[i][j].into()]);
        }
    }
    t
}

fn paired_grids(p: &Params) -> Result<(Vec<usize>, Vec<usize>)> {
    if p.has("n") {
        if p.has("n1") || p.has("n2") {
            return Err(usage("give either `n` or `n1` and `n2`, not both"));
        }
        let n = p.sizes("n")?.values;
        return Ok((n.clone(), n));
    }
    Ok((p.sizes("n1")?.values, p.sizes("n2")?.values))
}

fn assurance_unbalanced(p: &Params, mut ctx: Ctx<'_>) -> Result<()> {
    let (n1, n2) = paired_grids(p)?;
    let repeats = p.usize_or("repeats", 1)?;
    let surface = p.bool_or("surface", false)?;
    let keys = model_keys(&ctx, p, None, true)?;
    let mc = ctx.mc(p, false)?;
    p.finish()?;
    let (table, contour) = simulate_assurance_unbalanced(&n1, &n2, repeats, &keys.model, &keys.hyp, &mc, surface)
        .map_err(|e| ctx.fail(e))?;
    ctx.bundle.metadata.method = Some(table.method.to_string());
    let (t, x, y) = pair_rows("assurance", &table);
    ctx.add_table(t);
    ctx.add_line_plot("assurance", x, &[("assurance", y)], "assurance")?;
    if let Some(grid) = contour {
        ctx.add_table(contour_table(&grid));
        let svg = contour_plot(ctx.name(), &grid.n1, &grid.n2, &grid.values, "assurance")?;
        ctx.bundle.plots.push(Plot {
            name: "contour".into(),
            table: "contour".into(),
            svg,
        });
    }
    Ok(())
}

fn adcock(p: &Params, mut ctx: Ctx<'_>) -> Result<()> {
    let grid = p.sizes("n")?;
    let spec = AdcockSpec {
        d: p.f64("d")?,
        mu_beta_a: p.f64("mu_beta_a")?,
        mu_beta_d: p.f64("mu_beta_d")?,
        n_a: p.f64("n_a")?,
        n_d: p.f64("n_d")?,
        sig_sq: p.f64("sigsq")?,
        alpha: p.f64_or("alpha", 0.05)?,
    };
    let mc = ctx.mc(p, false)?;
    p.finish()?;
    let table = adcock_assurance(&grid.values, &spec, &mc).map_err(|e| ctx.fail(e))?;
    ctx.bundle.metadata.method = Some(table.method.to_string());
    let (t, x, y) = single_rows("assurance", &table);
    ctx.add_table(t);
    ctx.add_line_plot("assurance", x, &[("assurance", y)], "assurance")
}

fn betabin(p: &Params, mut ctx: Ctx<'_>) -> Result<()> {
    let (n1, n2) = paired_grids(p)?;
    let spec = BetaBinSpec {
        p1: p.opt_f64("p1")?,
        p2: p.opt_f64("p2")?,
        alpha_1: p.f64("alpha_1")?,
        beta_1: p.f64("beta_1")?,
        alpha_2: p.f64("alpha_2")?,
        beta_2: p.f64("beta_2")?,
        sig_level: p.f64_or("sig_level", 0.05)?,
        alt: p.alt_or(Alternative::TwoSided)?,
    };
    let mc = ctx.mc(p, false)?;
    p.finish()?;
    let table = betabin_assurance(&n1, &n2, &spec, &mc).map_err(|e| ctx.fail(e))?;
    ctx.bundle.metadata.method = Some(table.method.to_string());
    let (t, x, y) = pair_rows("assurance", &table);
    ctx.add_table(t);
    ctx.add_line_plot("assurance", x, &[("assurance", y)], "assurance")
}

fn goal(p: &Params, mut ctx: Ctx<'_>) -> Result<()> {
    let spec = GoalSpec {
        k: p.f64_or("k", 1.0)?,
        pi: p.f64_or("pi", 0.5)?,
        u: p.vector("u")?,
        beta_0: p.vector("beta_0")?,
        beta_1: p.vector("beta_1")?,
        sigsq: p.f64("sigsq")?,
    };
    let design = p.opt_matrix("xn")?;
    let grid = if design.is_some() {
        if p.has("n") {
            return Err(usage("give either `n` or `xn`, not both"));
        }
        None
    } else {
        Some(p.sizes("n")?)
    };
    let beta_grid = p.opt_reals("beta_grid")?;
    let alpha = p.opt_f64("alpha")?;
    if alpha.is_some() && beta_grid.is_none() {
        return Err(usage("`alpha` applies only together with `beta_grid`"));
    }
    p.finish()?;

    let rates = match design {
        Some(x) => {
            let x = DesignMatrix::from_matrix(x).map_err(|e| ctx.fail(e))?;
            vec![(
                x.rows(),
                rate_correct_classification_design(&spec, &x).map_err(|e| ctx.fail(e))?,
            )]
        }
        None => rate_correct_classification(&spec, &grid.expect("grid or design").values).map_err(|e| ctx.fail(e))?,
    };
    let mut t = Table::new("goal", &["n", "rate_correct_classification"]);
    for &(n, r) in &rates {
        t.push(vec![n.into(), r.into()]);
    }
    ctx.add_table(t);
    let x = rates.iter().map(|&(n, _)| n as f64).collect();
    ctx.add_line_plot(
        "goal",
        x,
        &[("r*", rates.iter().map(|r| r.1).collect())],
        "rate of correct classification",
    )?;

    if let Some(betas) = beta_grid {
        let delta = spec.delta().map_err(|e| ctx.fail(e))?;
        let pairs = power_rstar_pairs(&betas, alpha.unwrap_or(0.05), spec.sigsq.sqrt(), delta, spec.k, spec.pi)
            .map_err(|e| ctx.fail(e))?;
        let mut t = Table::new("pairs", &["n", "r_star", "beta"]);
        for r in &pairs {
            t.push(vec![r.n.into(), r.r_star.into(), r.beta.into()]);
        }
        ctx.add_table(t);
    }
    Ok(())
}

fn gen_design_cmd(p: &Params, mut ctx: Ctx<'_>) -> Result<()> {
    let groups = p.opt_ints("group_sizes")?;
    let design = match groups {
        Some(sizes) => {
            for key in ["ids", "from", "to", "measures", "poly_degree"] {
                if p.has(key) {
                    return Err(usage(format!("`{key}` cannot be combined with `group_sizes`")));
                }
            }
            p.finish()?;
            let sizes = sizes
                .into_iter()
                .map(|s| usize::try_from(s).map_err(|_| usage(format!("group size {s} is negative"))))
                .collect::<Result<Vec<_>>>()?;
            gen_design(&sizes).map_err(|e| ctx.fail(e))?
        }
        None => {
            let ids = p
                .opt_ints("ids")?
                .ok_or_else(|| usage("gen-design needs `group_sizes`, or `ids`, `from`, `to` and `measures`"))?;
            let spec = LongitudinalSpec::new(ids, p.f64("from")?, p.f64("to")?, p.f64("measures")?)
                .map_err(|e| ctx.fail(e))?
                .with_poly_degree(p.usize_or("poly_degree", 1)?);
            p.finish()?;
            gen_design_longitudinal(&spec).map_err(|e| ctx.fail(e))?
        }
    };
    let x = design.entries();
    let mut t = Table {
        name: "design".into(),
        header: None,
        rows: Vec::new(),
    };
    for i in 0..x.nrows() {
        t.push(x.row(i).iter().map(|&v| Cell::Real(v)).collect());
    }
    ctx.add_table(t);
    Ok(())
}

/// Whole-number sizes print as integers.
fn size_cell(n: f64) -> Cell {
    if n.fract() == 0.0 && n.abs() < 1e15 {
        Cell::Int(n as i64)
    } else {
        Cell::Real(n)
    }
}
