//! One runner per experiment kind. Runners only call library operations and
//! arrange their results into tables; they do no arithmetic of their own.

use serde::Deserialize;

use crate::env::{self, EnvLltOptions};
use crate::error::{Error, Result};
use crate::experiments::config::{params, ExperimentConfig, Kind};
use crate::experiments::output::{Axis, Outputs, PlotSpec, Table};
use crate::gibbs::{self, build_gibbs, GibbsFamily};
use crate::limits::{self, EsseenOptions, LdpOptions};
use crate::linalg::{c, C64};
use crate::row;
use crate::rpf::convergence::convergence_rate_fit;
use crate::rpf::nonsingular::nonsingular_check;
use crate::rpf::pressure::pressure_sequence;
use crate::rpf::stability::stability_sweep;
use crate::rpf::triplet::{solve_family, SolverOptions};
use crate::systems::catalog::seeded_measures;
use crate::systems::operator::TransferFamily;
use crate::systems::sft::{recode_to_memory_one, SftSpec};

struct Ctx<'a> {
    config: &'a ExperimentConfig,
    seed: u64,
    solver: SolverOptions,
}

pub fn run_kind(kind: Kind, config: &ExperimentConfig, seed: u64) -> Result<Outputs> {
    let ctx = Ctx { config, seed, solver: config.solver.options() };
    match kind {
        Kind::Rpf => run_rpf(&ctx),
        Kind::Stability => run_stability(&ctx),
        Kind::Gibbs => run_gibbs(&ctx),
        Kind::Mixing => run_mixing(&ctx),
        Kind::Moments => run_moments(&ctx),
        Kind::BerryEsseen => run_berry_esseen(&ctx),
        Kind::Llt => run_llt(&ctx),
        Kind::Concentration => run_concentration(&ctx),
        Kind::Cumulants => run_cumulants(&ctx),
        Kind::Ldp => run_ldp(&ctx),
        Kind::Variance => run_variance(&ctx),
        Kind::Nonsingular => run_nonsingular(&ctx),
        Kind::EnvPhi => run_env_phi(&ctx),
        Kind::EnvGrowth => run_env_growth(&ctx),
        Kind::EnvLlt => run_env_llt(&ctx),
        Kind::EnvPressure => run_env_pressure(&ctx),
        Kind::EnvH => run_env_h(&ctx),
    }
}

impl Ctx<'_> {
    fn spec(&self) -> Result<SftSpec> {
        self.config.system.as_ref().ok_or_else(|| Error::Config("missing table `system`".into()))?.build()
    }

    /// Memory-one spec for the Gibbs-based kinds.
    fn memory_one(&self) -> Result<SftSpec> {
        let spec = self.spec()?;
        if spec.memory == 1 {
            Ok(spec)
        } else {
            Ok(recode_to_memory_one(&spec)?.0)
        }
    }

    fn family(&self) -> Result<GibbsFamily> {
        build_gibbs(&self.memory_one()?, 0, 0, &self.solver)
    }

    fn env(&self) -> Result<&env::EnvSpec> {
        self.config.environment.as_ref().ok_or_else(|| Error::Config("missing table `environment`".into()))
    }
}

fn z_list(z: &[[f64; 2]]) -> Vec<C64> {
    z.iter().map(|p| c(p[0], p[1])).collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RpfParams {
    start: i64,
    len: Option<usize>,
    z: Vec<[f64; 2]>,
    horizons: Vec<usize>,
}

impl Default for RpfParams {
    fn default() -> Self {
        RpfParams { start: 0, len: None, z: vec![[0.0, 0.0]], horizons: (1..=10).map(|k| 4 * k).collect() }
    }
}

fn rpf_tables<F: TransferFamily + ?Sized>(fam: &F, p: &RpfParams, solver: &SolverOptions, out: &mut Outputs) -> Result<()> {
    let len = p.len.unwrap_or_else(|| fam.period().unwrap_or(16));
    let zs = z_list(&p.z);
    let pressure = pressure_sequence(fam, p.start, len, &zs, solver)?;
    let mut triplets = Table::new("triplets", &["z_re", "z_im", "j", "lambda_re", "lambda_im", "pressure_re", "pressure_im"]);
    let mut residual_rows = Vec::new();
    for (zi, &z) in zs.iter().enumerate() {
        let t = solve_family(fam, p.start, len, z, solver)?;
        for i in 0..len {
            let pv = pressure.values[zi][i];
            triplets.push(row![z.re, z.im, p.start + i as i64, t.lambda[i].re, t.lambda[i].im, pv.re, pv.im]);
        }
        residual_rows.push(serde_json::json!({
            "z": [z.re, z.im],
            "max_residual_eigen": t.max_residual_eigen,
            "max_residual_dual": t.max_residual_dual,
        }));
    }
    out.put("residuals", residual_rows);
    let fit = convergence_rate_fit(fam, p.start, zs.first().copied().unwrap_or(c(0.0, 0.0)), &fam.ones(p.start), &p.horizons, solver)?;
    let mut conv = Table::new("convergence", &["horizon", "residual"]);
    for (h, r) in fit.horizons.iter().zip(&fit.residuals) {
        conv.push(row![*h, *r]);
    }
    out.put("fit_slope", fit.slope);
    out.put("fit_delta", fit.delta());
    out.put("fit_r_squared", fit.r_squared);
    out.put("fit_degenerate", fit.degenerate);
    if fit.degenerate {
        out.warn("convergence fit is degenerate: residuals reach rounding level immediately");
    }
    out.tables.push(triplets);
    out.tables.push(conv);
    out.plots.push(PlotSpec::new("residual_decay.svg", "convergence", "Residual decay", "horizon", &["residual"], Axis::Linear, Axis::Log10));
    Ok(())
}

fn run_rpf(ctx: &Ctx) -> Result<Outputs> {
    let p: RpfParams = params(ctx.config)?;
    let mut out = Outputs::default();
    let system = ctx.config.system.as_ref().ok_or_else(|| Error::Config("missing table `system`".into()))?;
    if system.is_circle() {
        rpf_tables(&system.build_circle()?, &p, &ctx.solver, &mut out)?;
    } else {
        rpf_tables(&ctx.spec()?, &p, &ctx.solver, &mut out)?;
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct StabilityParams {
    deltas: Vec<f64>,
    z: Vec<[f64; 2]>,
    noise_seed: Option<u64>,
}

impl Default for StabilityParams {
    fn default() -> Self {
        StabilityParams { deltas: vec![0.1, 0.01, 0.001], z: vec![[0.0, 0.0]], noise_seed: None }
    }
}

fn run_stability(ctx: &Ctx) -> Result<Outputs> {
    let p: StabilityParams = params(ctx.config)?;
    let rows = stability_sweep(&ctx.spec()?, &p.deltas, &z_list(&p.z), p.noise_seed.unwrap_or(ctx.seed), &ctx.solver)?;
    let mut t = Table::new("stability", &["delta", "lambda_diff", "h_diff", "nu_diff", "response"]);
    for r in &rows {
        t.push(row![r.delta, r.lambda_diff, r.h_diff, r.nu_diff, r.response()]);
    }
    let mut out = Outputs::default();
    out.tables.push(t);
    out.plots.push(PlotSpec::new("stability.svg", "stability", "Triplet response", "delta", &["response"], Axis::Log10, Axis::Log10));
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct GibbsParams {
    band_window: usize,
    band_max_len: usize,
}

impl Default for GibbsParams {
    fn default() -> Self {
        GibbsParams { band_window: 16, band_max_len: 6 }
    }
}

fn run_gibbs(ctx: &Ctx) -> Result<Outputs> {
    let p: GibbsParams = params(ctx.config)?;
    let g = ctx.family()?;
    let mut t = Table::new("marginals", &["j", "symbol", "h", "nu", "marginal"]);
    for i in 0..g.len {
        let j = g.start + i as i64;
        for a in 0..g.marginal(j).len() {
            t.push(row![j, a, g.h(j)[a], g.nu(j)[a], g.marginal(j)[a]]);
        }
    }
    let band = gibbs::gibbs_ratio_band(&g, g.start, p.band_window, p.band_max_len);
    let mut out = Outputs::default();
    out.put("ratio_band", &band);
    out.put("pushforward_error", g.pushforward_error);
    out.tables.push(t);
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct MixingParams {
    start: i64,
    r_max: usize,
    n_list: Vec<usize>,
    correlation: Option<[Vec<f64>; 2]>,
}

impl Default for MixingParams {
    fn default() -> Self {
        MixingParams { start: 0, r_max: 3, n_list: (1..=12).collect(), correlation: None }
    }
}

fn run_mixing(ctx: &Ctx) -> Result<Outputs> {
    let p: MixingParams = params(ctx.config)?;
    let g = ctx.family()?;
    let rep = gibbs::psi_mixing_report(&g, p.start, p.r_max, &p.n_list);
    let mut t = Table::new("psi", &["n", "psi"]);
    for (n, v) in rep.gaps.iter().zip(&rep.psi) {
        t.push(row![*n, *v]);
    }
    let mut out = Outputs::default();
    out.put("c", rep.c);
    out.put("delta", rep.delta);
    out.put("fit_degenerate", rep.fit.degenerate);
    if let Some([gf, ff]) = &p.correlation {
        let fit = gibbs::correlation_decay_check(&g, p.start, gf, ff, &p.n_list);
        let mut ct = Table::new("correlation", &["n", "correlation"]);
        for (n, v) in fit.horizons.iter().zip(&fit.residuals) {
            ct.push(row![*n, *v]);
        }
        out.put("correlation_delta", fit.delta());
        out.tables.push(ct);
    }
    out.tables.push(t);
    out.plots.push(PlotSpec::new("psi.svg", "psi", "psi-mixing coefficient", "n", &["psi"], Axis::Linear, Axis::Log10));
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct MomentParams {
    start: i64,
    n_list: Vec<usize>,
    kmax: usize,
}

impl Default for MomentParams {
    fn default() -> Self {
        MomentParams { start: 0, n_list: (6..=12).map(|k| 1 << k).collect(), kmax: 4 }
    }
}

fn run_moments(ctx: &Ctx) -> Result<Outputs> {
    let p: MomentParams = params(ctx.config)?;
    let rep = limits::moments_report(&ctx.family()?, p.start, &p.n_list, p.kmax, &ctx.solver)?;
    let mut t = Table::new("moments", &["n", "k", "gamma", "predicted", "gap"]);
    for r in &rep.rows {
        t.push(row![r.n, r.k, r.gamma, r.predicted, r.gap]);
    }
    let mut out = Outputs::default();
    out.put("slopes", &rep.slopes);
    out.put("mean_identity", &rep.mean_identity);
    out.put("c", &rep.c);
    out.put("d", &rep.d);
    out.tables.push(t);
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct BerryEsseenParams {
    start: i64,
    n_list: Vec<usize>,
    nodes: usize,
    t_fraction: f64,
    samples: usize,
}

impl Default for BerryEsseenParams {
    fn default() -> Self {
        let e = EsseenOptions::default();
        BerryEsseenParams { start: 0, n_list: (6..=12).map(|k| 1 << k).collect(), nodes: e.nodes, t_fraction: e.t_fraction, samples: e.samples }
    }
}

fn run_berry_esseen(ctx: &Ctx) -> Result<Outputs> {
    let p: BerryEsseenParams = params(ctx.config)?;
    let o = EsseenOptions { nodes: p.nodes, t_fraction: p.t_fraction, samples: p.samples, seed: ctx.seed };
    let rep = limits::berry_esseen_report(&ctx.family()?, p.start, &p.n_list, &o)?;
    let mut t = Table::new("berry_esseen", &["n", "sigma", "d_n", "sqrt_n_d_n", "esseen_bound", "esseen_t"]);
    for r in &rep.rows {
        t.push(row![r.n, r.sigma, r.d_n, r.scaled, r.esseen_bound, r.esseen_t]);
    }
    let mut out = Outputs::default();
    out.put("lattice", rep.lattice);
    out.put("band_ratio", rep.band_ratio);
    out.put("certified", rep.certified);
    out.put("degenerate", &rep.degenerate);
    if !rep.degenerate.is_empty() {
        out.warn(format!("zero variance at n = {:?}", rep.degenerate));
    }
    out.tables.push(t);
    out.plots.push(PlotSpec::new("kolmogorov.svg", "berry_esseen", "Kolmogorov distance", "n", &["d_n", "esseen_bound"], Axis::Log10, Axis::Log10));
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct LltParams {
    start: i64,
    n_list: Vec<usize>,
    c0: f64,
    slack: f64,
}

impl Default for LltParams {
    fn default() -> Self {
        LltParams { start: 0, n_list: (7..=13).map(|k| 1 << k).collect(), c0: 0.01, slack: 0.1 }
    }
}

fn llt_table(rep: &limits::LltReport) -> Table {
    let mut t = Table::new("llt", &["n", "sigma", "span", "gap"]);
    for r in &rep.rows {
        t.push(row![r.n, r.sigma, r.span, r.gap]);
    }
    t
}

fn run_llt(ctx: &Ctx) -> Result<Outputs> {
    let p: LltParams = params(ctx.config)?;
    let rep = limits::llt_report(&ctx.family()?, p.start, &p.n_list, p.c0, p.slack)?;
    let mut out = Outputs::default();
    out.put("monotone", rep.monotone);
    if !rep.monotone {
        out.warn("local limit gap is not monotone within the slack");
    }
    out.tables.push(llt_table(&rep));
    out.plots.push(PlotSpec::new("llt_gap.svg", "llt", "Local limit gap", "n", &["gap"], Axis::Log10, Axis::Log10));
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ConcentrationParams {
    start: i64,
    n_list: Vec<usize>,
    t_count: usize,
}

impl Default for ConcentrationParams {
    fn default() -> Self {
        ConcentrationParams { start: 0, n_list: vec![64, 256, 1024], t_count: 50 }
    }
}

fn run_concentration(ctx: &Ctx) -> Result<Outputs> {
    let p: ConcentrationParams = params(ctx.config)?;
    let rep = limits::concentration_report(&ctx.family()?, p.start, &p.n_list, p.t_count)?;
    let mut t = Table::new("concentration", &["n", "t", "tail", "bound", "azuma", "violated"]);
    for r in &rep.rows {
        t.push(row![r.n, r.t, r.tail, r.bound, r.azuma, r.violated]);
    }
    let mut out = Outputs::default();
    out.put("c", rep.c);
    out.put("c1", rep.c1);
    out.put("violations", rep.violations);
    if rep.violations > 0 {
        out.warn(format!("{} tail values exceed the bound", rep.violations));
    }
    out.tables.push(t);
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct CumulantParams {
    start: i64,
    kmax: usize,
    n_list: Vec<usize>,
    nodes: usize,
}

impl Default for CumulantParams {
    fn default() -> Self {
        CumulantParams { start: 0, kmax: 6, n_list: (8..=12).map(|k| 1 << k).collect(), nodes: 64 }
    }
}

fn run_cumulants(ctx: &Ctx) -> Result<Outputs> {
    let p: CumulantParams = params(ctx.config)?;
    let rep = limits::cumulant_report(&ctx.family()?, p.start, p.kmax, &p.n_list, p.nodes)?;
    let mut t = Table::new("cumulants", &["n", "k", "gamma", "per_step"]);
    for r in &rep.rows {
        t.push(row![r.n, r.k, r.gamma, r.per_step]);
    }
    let mut out = Outputs::default();
    out.put("radius", rep.radius);
    out.put("c0", rep.c0);
    out.put("variation", &rep.variation);
    out.tables.push(t);
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct LdpParams {
    start: i64,
    delta: f64,
    s_points: usize,
    t_grid: Vec<f64>,
    n_list: Vec<usize>,
    x_local: Vec<f64>,
    eps: Option<f64>,
    x_moderate: f64,
    a_exponent: f64,
    b_exponent: f64,
}

impl Default for LdpParams {
    fn default() -> Self {
        LdpParams {
            start: 0,
            delta: 0.3,
            s_points: 9,
            t_grid: Vec::new(),
            n_list: vec![256, 1024, 4096],
            x_local: Vec::new(),
            eps: None,
            x_moderate: 1.0,
            a_exponent: 0.1,
            b_exponent: 0.75,
        }
    }
}

fn run_ldp(ctx: &Ctx) -> Result<Outputs> {
    let p: LdpParams = params(ctx.config)?;
    let o = LdpOptions {
        delta: p.delta,
        s_points: p.s_points,
        t_grid: p.t_grid,
        n_list: p.n_list,
        x_local: p.x_local,
        eps: p.eps,
        x_moderate: p.x_moderate,
        a_exponent: p.a_exponent,
        b_exponent: p.b_exponent,
    };
    let rep = limits::ldp_report(&ctx.family()?, p.start, &o, &ctx.solver)?;
    let mut pt = Table::new("pressure", &["s", "pi", "derivative", "duality_gap", "limit_gap"]);
    for r in &rep.pressure {
        pt.push(row![r.s, r.pi, r.derivative, r.duality_gap, r.limit_gap]);
    }
    let mut lt = Table::new("legendre", &["t", "rate", "argmax", "out_of_range"]);
    for r in &rep.legendre {
        lt.push(row![r.t, r.value, r.argmax, r.out_of_range]);
    }
    let mut local = Table::new("local", &["n", "x", "eps", "log_prob_rate", "rate_min", "gap"]);
    for r in &rep.local {
        local.push(row![r.n, r.x, r.eps, r.log_prob_rate, r.rate_min, r.gap]);
    }
    let mut md = Table::new("moderate", &["n", "x", "gap_a", "gap_b"]);
    for r in &rep.moderate {
        md.push(row![r.n, r.x, r.gap_a, r.gap_b]);
    }
    let mut out = Outputs::default();
    out.put("delta", rep.delta);
    out.put("sigma2", rep.sigma2);
    out.put("max_duality_gap", rep.max_duality_gap);
    out.put("nonconvex", rep.nonconvex);
    let outside = rep.legendre.iter().filter(|l| l.out_of_range).count();
    if outside > 0 {
        out.warn(format!("{outside} Legendre points lie outside the range of the pressure derivative"));
    }
    out.tables.extend([pt, lt, local, md]);
    out.plots.push(PlotSpec::new("rate_function.svg", "legendre", "Rate function", "t", &["rate"], Axis::Linear, Axis::Linear));
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct VarianceParams {
    start: i64,
    n_list: Vec<usize>,
    coboundary: bool,
    coboundary_len: usize,
    horizon: usize,
    tail_tol: f64,
}

impl Default for VarianceParams {
    fn default() -> Self {
        VarianceParams { start: 0, n_list: (3..=9).map(|k| 1 << k).collect(), coboundary: false, coboundary_len: 16, horizon: 80, tail_tol: 1e-10 }
    }
}

fn run_variance(ctx: &Ctx) -> Result<Outputs> {
    let p: VarianceParams = params(ctx.config)?;
    let g = ctx.family()?;
    let v = limits::variance_growth(&g, p.start, &p.n_list)?;
    let mut t = Table::new("variance", &["n", "variance", "per_step"]);
    for i in 0..v.n_list.len() {
        t.push(row![v.n_list[i], v.variance[i], v.per_step[i]]);
    }
    let mut out = Outputs::default();
    out.put("class", v.class);
    if p.coboundary {
        let w = limits::coboundary_solve(&g, p.coboundary_len, p.horizon, p.tail_tol)?;
        out.put("coboundary_residual", w.residual);
        out.put("coboundary_tail", w.tail);
        out.put("coboundary_sup_norm", w.sup_norm);
    }
    out.tables.push(t);
    out.plots.push(PlotSpec::new("variance.svg", "variance", "Variance growth", "n", &["variance"], Axis::Log10, Axis::Log10));
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct NonsingularParams {
    measure_seed: Option<u64>,
    floor: f64,
    tol: f64,
}

impl Default for NonsingularParams {
    fn default() -> Self {
        NonsingularParams { measure_seed: None, floor: 0.05, tol: 1e-10 }
    }
}

fn run_nonsingular(ctx: &Ctx) -> Result<Outputs> {
    let p: NonsingularParams = params(ctx.config)?;
    let spec = ctx.spec()?;
    let m = seeded_measures(p.measure_seed.unwrap_or(ctx.seed), &spec.alphabet, p.floor);
    let rep = nonsingular_check(&spec, &m, p.tol, &ctx.solver)?;
    let mut t = Table::new("nonsingular", &["max_lambda_error", "max_nu_error", "passed"]);
    t.push(row![rep.max_lambda_error, rep.max_nu_error, rep.passed]);
    let mut out = Outputs::default();
    out.put("passed", rep.passed);
    if !rep.passed {
        out.warn("solver triplet differs from the matched measure beyond tolerance");
    }
    out.tables.push(t);
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct PhiParams {
    n_max: usize,
}

impl Default for PhiParams {
    fn default() -> Self {
        PhiParams { n_max: 20 }
    }
}

fn run_env_phi(ctx: &Ctx) -> Result<Outputs> {
    let p: PhiParams = params(ctx.config)?;
    let rep = env::phi_mixing_exact(ctx.env()?, p.n_max)?;
    let mut t = Table::new("phi", &["n", "phi", "partial_sum"]);
    for (i, (v, s)) in rep.phi.iter().zip(&rep.partial_sums).enumerate() {
        t.push(row![i + 1, *v, *s]);
    }
    let mut out = Outputs::default();
    out.put("origins", rep.origins);
    out.tables.push(t);
    out.plots.push(PlotSpec::new("phi.svg", "phi", "phi-mixing coefficient", "n", &["phi"], Axis::Linear, Axis::Log10));
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct GrowthParams {
    s: usize,
    n_list: Vec<usize>,
    mc_samples: usize,
}

impl Default for GrowthParams {
    fn default() -> Self {
        GrowthParams { s: 1, n_list: (4..=12).map(|k| 1 << k).collect(), mc_samples: 0 }
    }
}

fn run_env_growth(ctx: &Ctx) -> Result<Outputs> {
    let p: GrowthParams = params(ctx.config)?;
    let e = ctx.env()?;
    let rep = env::propgrowth_report(e, p.s, &p.n_list)?;
    let mut t = Table::new("growth", &["n", "sum", "reference", "ratio"]);
    for r in &rep.rows {
        t.push(row![r.n, r.sum, r.reference, r.ratio]);
    }
    let mut out = Outputs::default();
    out.put("compliant", rep.compliant);
    out.put("unreachable", rep.unreachable);
    if rep.unreachable {
        out.warn("marked block is unreachable");
    }
    if p.mc_samples > 0 {
        if let Some(last) = rep.rows.last() {
            let (mean, se) = env::propgrowth_monte_carlo(e, p.s, last.n, p.mc_samples, ctx.seed)?;
            out.put("monte_carlo", serde_json::json!({ "n": last.n, "mean": mean, "std_error": se, "exact": last.sum }));
        }
    }
    out.tables.push(t);
    out.plots.push(PlotSpec::new("growth.svg", "growth", "Marked block visits", "n", &["sum", "reference"], Axis::Log10, Axis::Log10));
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct EnvLltParams {
    t_grid: Vec<f64>,
    s: usize,
    delta0: f64,
    n_list: Vec<usize>,
    llt_n_list: Vec<usize>,
    c0: f64,
    slack: f64,
}

impl Default for EnvLltParams {
    fn default() -> Self {
        let pi = std::f64::consts::PI;
        EnvLltParams {
            t_grid: (0..17).map(|i| pi / 2.0 + pi * i as f64 / 16.0).collect(),
            s: 1,
            delta0: 0.1,
            n_list: (8..=14).map(|k| 1 << k).collect(),
            llt_n_list: vec![128, 256, 512, 1024],
            c0: 0.01,
            slack: 0.1,
        }
    }
}

fn run_env_llt(ctx: &Ctx) -> Result<Outputs> {
    let p: EnvLltParams = params(ctx.config)?;
    let o = EnvLltOptions { t_grid: p.t_grid, s: p.s, delta0: p.delta0, n_list: p.n_list, llt_n_list: p.llt_n_list, c0: p.c0, slack: p.slack };
    let rep = env::env_llt_pipeline(ctx.env()?, ctx.seed, &o, &ctx.solver)?;
    let mut rt = Table::new("radius", &["t", "radius", "converged"]);
    for r in &rep.radius {
        rt.push(row![r.t, r.radius, r.converged]);
    }
    let mut ct = Table::new("block_counts", &["n", "ln_n", "count", "ratio"]);
    for r in &rep.counts {
        ct.push(row![r.n, r.ln_n, r.count, r.ratio]);
    }
    let mut out = Outputs::default();
    out.put("max_radius", rep.max_radius);
    out.put("b_j", rep.b_j);
    out.put("increasing", rep.increasing);
    out.put("compliant", rep.compliant);
    if let Some(e) = &rep.llt_error {
        out.warn(format!("local limit table skipped: {e}"));
    }
    if !rep.compliant {
        out.warn("environment is not compliant: block counts or spectral radius fail");
    }
    out.tables.push(rt);
    out.tables.push(ct);
    if let Some(l) = &rep.llt {
        out.put("llt_monotone", l.monotone);
        out.tables.push(llt_table(l));
        out.plots.push(PlotSpec::new("llt_gap.svg", "llt", "Local limit gap", "n", &["gap"], Axis::Log10, Axis::Log10));
    }
    out.plots.push(PlotSpec::new("block_count.svg", "block_counts", "Block count", "ln_n", &["count"], Axis::Linear, Axis::Linear));
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct EnvPressureParams {
    z: f64,
    seeds: usize,
    n_list: Vec<usize>,
    locality_radii: Vec<usize>,
}

impl Default for EnvPressureParams {
    fn default() -> Self {
        EnvPressureParams { z: 0.2, seeds: 64, n_list: (6..=12).map(|k| 1 << k).collect(), locality_radii: vec![2, 4, 8, 16, 32] }
    }
}

fn run_env_pressure(ctx: &Ctx) -> Result<Outputs> {
    let p: EnvPressureParams = params(ctx.config)?;
    let seeds: Vec<u64> = (0..p.seeds as u64).map(|i| ctx.seed.wrapping_add(i)).collect();
    let rep = env::pressure_concentration_report(ctx.env()?, p.z, &seeds, &p.n_list, &p.locality_radii, &ctx.solver)?;
    let mut t = Table::new("pressure_concentration", &["n", "mean", "deviation", "rate"]);
    for r in &rep.rows {
        t.push(row![r.n, r.mean, r.deviation, r.rate]);
    }
    let mut lt = Table::new("locality", &["radius", "gap"]);
    for r in &rep.locality {
        lt.push(row![r.radius, r.gap]);
    }
    let mut out = Outputs::default();
    out.put("z", rep.z);
    out.put("exponent", rep.exponent);
    out.put("seeds", rep.seeds.len());
    out.tables.push(t);
    out.tables.push(lt);
    out.plots.push(PlotSpec::new("pressure_deviation.svg", "pressure_concentration", "Cross-seed deviation", "n", &["deviation", "rate"], Axis::Log10, Axis::Log10));
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvHParams {
    measure: Vec<f64>,
    #[serde(default = "default_h_seeds")]
    seeds: usize,
    #[serde(default = "default_h_window")]
    window: usize,
    #[serde(default = "default_h_tol")]
    tol: f64,
}

fn default_h_seeds() -> usize {
    8
}

fn default_h_window() -> usize {
    64
}

fn default_h_tol() -> f64 {
    1e-8
}

impl Default for EnvHParams {
    fn default() -> Self {
        EnvHParams { measure: Vec::new(), seeds: default_h_seeds(), window: default_h_window(), tol: default_h_tol() }
    }
}

fn run_env_h(ctx: &Ctx) -> Result<Outputs> {
    let p: EnvHParams = params(ctx.config)?;
    if p.measure.is_empty() {
        return Err(Error::Config("params: missing field `measure`".into()));
    }
    let seeds: Vec<u64> = (0..p.seeds as u64).map(|i| ctx.seed.wrapping_add(i)).collect();
    let rep = env::deterministic_h_check(ctx.env()?, &p.measure, &seeds, p.window, p.tol, &ctx.solver)?;
    let mut t = Table::new("density", &["symbol", "h"]);
    for (a, v) in rep.h.iter().enumerate() {
        t.push(row![a, *v]);
    }
    let mut out = Outputs::default();
    out.put("max_h_error", rep.max_h_error);
    out.put("max_lambda_error", rep.max_lambda_error);
    out.put("max_nu_error", rep.max_nu_error);
    out.put("passed", rep.passed);
    out.tables.push(t);
    Ok(out)
}
