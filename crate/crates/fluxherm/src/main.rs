use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fluxherm::experiments::{self, ConvergeConfig, EnsembleSeeding};
use fluxherm::io::{load_field_dump, write_field_dump, DumpError};
use fluxherm::output::{f, CsvOut};
use fluxherm_core::analytic::{sample_analytic_field, AnalyticFieldSpec, FieldKind};
use fluxherm_core::field::{eval_b, fd_divergence};
use fluxherm_core::ode::{
    integrate_adaptive, order_reduction_experiment, order_slopes, AdaptiveSettings,
};
use fluxherm_core::poincare::SeedSpec;
use fluxherm_core::pusher::{gc_rhs, invariants, GCParams, GCState, Reconstructed};
use fluxherm_core::vecpot::VectorPotential;
use fluxherm_core::{FieldDump, Grid2D};

#[derive(Parser, Debug)]
#[command(
    name = "fluxherm",
    version,
    about = "Divergence-free Hermite field reconstruction, guiding-center pushing and Poincaré sections"
)]
struct Cli {
    /// Worker threads (default: all cores). `1` gives bitwise-reproducible reductions.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Sample an analytic field into a dump file.
    Gen(GenArgs),
    /// Reconstruct the vector potential and tabulate ψ and χ on the Hermite nodes.
    Build(BuildArgs),
    /// Evaluate the reconstructed field at points.
    Eval(EvalArgs),
    /// Finite-difference divergence at random interior points.
    DivCheck(DivArgs),
    /// Follow one guiding center and record every accepted step.
    Trace(TraceArgs),
    /// Poincaré section of field lines.
    Poincare(PoincareArgs),
    /// Push a random particle ensemble and report invariant drifts.
    Gc(GcArgs),
    /// Fixed-step DP45 on the piecewise test ODE.
    OrderReduction(OrderArgs),
    /// Interpolation convergence on the circular analytic field.
    Converge(ConvergeArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Kind {
    Circular,
    Perturbed,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "circular")]
    kind: Kind,
    #[arg(long, default_value_t = 2.0)]
    q0: f64,
    #[arg(long, default_value_t = 2.1)]
    q2: f64,
    #[arg(long, default_value_t = 3.0)]
    rbphi: f64,
    /// Magnetic axis `R,Z`.
    #[arg(long, default_value = "3,0", value_parser = parse_pair)]
    axis: (f64, f64),
    /// Toroidal mode number of the perturbation.
    #[arg(long, default_value_t = 2)]
    mode: u32,
    #[arg(long, default_value_t = 1e-2)]
    amplitude: f64,
    /// Sample points in R.
    #[arg(long, default_value_t = 21)]
    nr: usize,
    /// Sample points in Z.
    #[arg(long, default_value_t = 41)]
    nz: usize,
    /// Toroidal planes (0 = axisymmetric; perturbed fields default to 8).
    #[arg(long)]
    nphi: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    rmin: f64,
    #[arg(long, default_value_t = 6.0)]
    rmax: f64,
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    zmin: f64,
    #[arg(long, default_value_t = 5.0)]
    zmax: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Clone)]
struct FieldOpts {
    /// Field dump file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Continuity order in both directions.
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long)]
    m_r: Option<usize>,
    #[arg(long)]
    m_z: Option<usize>,
    /// Sample grid spacing over Hermite grid spacing.
    #[arg(long, default_value_t = 4)]
    fine_ratio: usize,
    /// Integration center `R,Z` (default: central dual point).
    #[arg(long, value_parser = parse_pair)]
    center: Option<(f64, f64)>,
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[command(flatten)]
    field: FieldOpts,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    field: FieldOpts,
    /// `R,φ,Z`; repeatable.
    #[arg(long = "point", value_parser = parse_triple, required = true)]
    points: Vec<(f64, f64, f64)>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DivArgs {
    #[command(flatten)]
    field: FieldOpts,
    #[arg(long, default_value_t = 1000)]
    n_points: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Two step sizes, larger first.
    #[arg(long, value_delimiter = ',', default_value = "1e-3,1e-4")]
    deltas: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Copy)]
struct ParticleOpts {
    #[arg(long, default_value_t = 1.0)]
    omega_c: f64,
    /// Charge sign, +1 or -1.
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    charge: f64,
    #[arg(long, default_value_t = 1e-8)]
    rtol: f64,
    #[arg(long, default_value_t = 1e-10)]
    atol: f64,
}

#[derive(Args, Debug)]
struct TraceArgs {
    #[command(flatten)]
    field: FieldOpts,
    #[command(flatten)]
    particle: ParticleOpts,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    xi: f64,
    /// Start position `R,φ,Z`.
    #[arg(long, default_value = "3.5,0,0", value_parser = parse_triple)]
    start: (f64, f64, f64),
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PoincareArgs {
    #[command(flatten)]
    field: FieldOpts,
    /// `line:R,Z,offset,length,angle,count` or `points:R,Z;R,Z`.
    #[arg(long, default_value = "line:3,0,0.025,0.5,0deg,21")]
    seeds: String,
    #[arg(long, default_value_t = 100)]
    transits: usize,
    #[arg(long, default_value_t = 0.0)]
    phi0: f64,
    #[arg(long, default_value_t = 1e-10)]
    rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    atol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GcArgs {
    #[command(flatten)]
    field: FieldOpts,
    #[command(flatten)]
    particle: ParticleOpts,
    #[arg(long, default_value_t = 64)]
    n_particles: usize,
    #[arg(long, default_value_t = 0.5)]
    t_end: f64,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value_t = -0.9, allow_hyphen_values = true)]
    xi_min: f64,
    #[arg(long, default_value_t = 0.9, allow_hyphen_values = true)]
    xi_max: f64,
    /// Seeding annulus center `R,Z`.
    #[arg(long, default_value = "3,0", value_parser = parse_pair)]
    axis: (f64, f64),
    #[arg(long, default_value_t = 0.1)]
    r_inner: f64,
    #[arg(long, default_value_t = 0.6)]
    r_outer: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OrderArgs {
    #[arg(long, default_value_t = 10.0)]
    eps: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    #[arg(long, value_delimiter = ',', default_value = "2")]
    m: Vec<usize>,
    /// Sample point counts, e.g. `21x41,41x81`.
    #[arg(long, value_delimiter = ',', value_parser = parse_size, default_value = "21x41,41x81,81x161,161x321")]
    ladder: Vec<(usize, usize)>,
    #[arg(long, default_value_t = 4)]
    fine_ratio: usize,
    /// Oversampling points per unit area.
    #[arg(long, default_value_t = 1e4)]
    density: f64,
    #[arg(long, default_value_t = 2.0)]
    q0: f64,
    #[arg(long, default_value_t = 2.1)]
    q2: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_floats<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x}: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into()
        .map_err(|_| format!("expected {N} comma-separated numbers"))
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    parse_floats::<2>(s).map(|[a, b]| (a, b))
}

fn parse_triple(s: &str) -> Result<(f64, f64, f64), String> {
    parse_floats::<3>(s).map(|[a, b, c]| (a, b, c))
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once('x').ok_or("expected NRxNZ")?;
    Ok((
        a.trim().parse().map_err(|_| "bad NR")?,
        b.trim().parse().map_err(|_| "bad NZ")?,
    ))
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{1}")]
    Config(&'static str, String),
    #[error(transparent)]
    Dump(#[from] DumpError),
    #[error(transparent)]
    Numeric(#[from] fluxherm_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn name(&self) -> &'static str {
        match self {
            CliError::Config(n, _) => n,
            CliError::Dump(e) => e.name(),
            CliError::Numeric(e) => e.name(),
            CliError::Io(_) => "Io",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Numeric(_) => 3,
            _ => 2,
        }
    }
}

type Res<T> = Result<T, CliError>;

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config("ConfigError", msg.into())
}

fn check_m(m: usize) -> Res<()> {
    if (1..=4).contains(&m) {
        Ok(())
    } else {
        Err(config(format!(
            "continuity order {m} outside the supported range 1..=4"
        )))
    }
}

fn load(opts: &FieldOpts) -> Res<(FieldDump, VectorPotential)> {
    let (m_r, m_z) = (opts.m_r.unwrap_or(opts.m), opts.m_z.unwrap_or(opts.m));
    check_m(m_r)?;
    check_m(m_z)?;
    if !opts.input.exists() {
        return Err(config(format!(
            "input file {} does not exist",
            opts.input.display()
        )));
    }
    let dump = load_field_dump(&opts.input)?;
    let vp = VectorPotential::from_dump(&dump, m_r, m_z, opts.fine_ratio, opts.center)?;
    Ok((dump, vp))
}

fn out_path(p: &Option<PathBuf>) -> Option<&Path> {
    p.as_deref()
}

fn run(cli: &Cli) -> Res<()> {
    let cfg = format!("{cli:?}");
    match &cli.cmd {
        Cmd::Gen(a) => gen(a),
        Cmd::Build(a) => build(a, &cfg),
        Cmd::Eval(a) => eval(a, &cfg),
        Cmd::DivCheck(a) => div_check(a, &cfg),
        Cmd::Trace(a) => trace(a, &cfg),
        Cmd::Poincare(a) => poincare(a, &cfg),
        Cmd::Gc(a) => gc(a, &cfg),
        Cmd::OrderReduction(a) => order_reduction(a, &cfg),
        Cmd::Converge(a) => converge(a, &cfg),
    }
}

fn gen(a: &GenArgs) -> Res<()> {
    let mut spec = match a.kind {
        Kind::Circular => AnalyticFieldSpec::default(),
        Kind::Perturbed => AnalyticFieldSpec::perturbed(a.mode, a.amplitude),
    };
    spec.q0 = a.q0;
    spec.q2 = a.q2;
    spec.rbphi = a.rbphi;
    spec.axis = a.axis;
    let nphi = a
        .nphi
        .unwrap_or(if spec.kind == FieldKind::PerturbedQProfile {
            8
        } else {
            0
        });
    if a.nr < 2 || a.nz < 2 {
        return Err(config("need at least two sample points per direction"));
    }
    let grid = Grid2D::spanning((a.rmin, a.rmax), (a.zmin, a.zmax), a.nr - 1, a.nz - 1, nphi)?;
    let dump = sample_analytic_field(&spec, &grid)?;
    write_field_dump(&dump, &a.out)?;
    eprintln!(
        "wrote {} ({}x{} points, {} planes)",
        a.out.display(),
        a.nr,
        a.nz,
        grid.n_planes()
    );
    Ok(())
}

fn build(a: &BuildArgs, cfg: &str) -> Res<()> {
    let (dump, vp) = load(&a.field)?;
    let g = *vp.grid();
    let (m_r, m_z) = vp.orders();
    eprintln!("source: {}", dump.provenance);
    eprintln!(
        "hermite grid {}x{} cells, h = ({}, {}), planes {}, m = ({m_r}, {m_z}), center = ({}, {})",
        g.n_r,
        g.n_z,
        g.h_r,
        g.h_z,
        g.n_planes(),
        vp.center.0,
        vp.center.1
    );
    let mut out = CsvOut::create(
        out_path(&a.out),
        "build",
        cfg,
        &["plane", "phi", "R", "Z", "psi", "chi"],
    )?;
    for p in 0..g.n_planes() {
        let phi = g.plane_phi(p);
        for iz in 0..=g.n_z {
            for ir in 0..=g.n_r {
                let (r, z) = (g.r(ir), g.z(iz));
                out.row([
                    p.to_string(),
                    f(phi),
                    f(r),
                    f(z),
                    f(vp.psi(r, phi, z)?),
                    f(vp.chi(r, phi, z)?),
                ])?;
            }
        }
    }
    Ok(out.finish()?)
}

fn eval(a: &EvalArgs, cfg: &str) -> Res<()> {
    let (_, vp) = load(&a.field)?;
    let cols = [
        "R",
        "phi",
        "Z",
        "B_R",
        "B_phi",
        "B_Z",
        "absB",
        "psi",
        "chi",
        "fd_div_1e-4",
    ];
    let mut out = CsvOut::create(out_path(&a.out), "eval", cfg, &cols)?;
    for &(r, phi, z) in &a.points {
        let b = eval_b(&vp, r, phi, z)?;
        let div = fd_divergence(&vp, r, phi, z, 1e-4).unwrap_or(f64::NAN);
        let bmag = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
        out.row(
            [
                r,
                phi,
                z,
                b[0],
                b[1],
                b[2],
                bmag,
                vp.psi(r, phi, z)?,
                vp.chi(r, phi, z)?,
                div,
            ]
            .map(f),
        )?;
    }
    Ok(out.finish()?)
}

fn div_check(a: &DivArgs, cfg: &str) -> Res<()> {
    if a.deltas.len() != 2 || !(a.deltas[0] > a.deltas[1] && a.deltas[1] > 0.0) {
        return Err(config("--deltas needs two positive values, larger first"));
    }
    let (_, vp) = load(&a.field)?;
    let rows = experiments::div_check(&vp, a.n_points, a.seed, &a.deltas)?;
    let s = experiments::div_summary(&rows, &a.deltas);
    let mut out = CsvOut::create(
        out_path(&a.out),
        "div-check",
        cfg,
        &["R", "phi", "Z", "absB", "div_d1", "div_d2"],
    )?;
    for r in &rows {
        out.row([r.r, r.phi, r.z, r.bmag, r.div[0], r.div[1]].map(f))?;
    }
    out.finish()?;
    eprintln!(
        "{} points: {} scale as delta^2, {} on plateau (<= {:e} |B|), {} fail; median ratio {:.3e}; max |div|/|B| at smallest delta {:.3e}",
        s.n,
        s.n_scaling,
        s.n_plateau,
        experiments::DIV_PLATEAU,
        s.n_fail,
        s.median_ratio,
        s.max_rel_small
    );
    Ok(())
}

fn gc_params(p: &ParticleOpts) -> Res<GCParams> {
    let params = GCParams {
        omega_c: p.omega_c,
        charge_sign: p.charge,
    };
    params.validate().map_err(|e| config(e.to_string()))?;
    Ok(params)
}

fn trace(a: &TraceArgs, cfg: &str) -> Res<()> {
    let (_, vp) = load(&a.field)?;
    let field = Reconstructed {
        vp: &vp,
        lenient: vp.orders().0.min(vp.orders().1) <= 1,
    };
    let params = gc_params(&a.particle)?;
    let init = GCState::new(a.p, a.xi, a.start.0, a.start.1, a.start.2);
    init.validate().map_err(|e| config(e.to_string()))?;
    let s = AdaptiveSettings {
        rtol: a.particle.rtol,
        atol: a.particle.atol,
        record: true,
        ..AdaptiveSettings::default()
    };
    let mut rhs = |_t: f64, y: &[f64], dy: &mut [f64]| -> fluxherm_core::Result<()> {
        dy.copy_from_slice(&gc_rhs(y, &field, &params)?);
        Ok(())
    };
    let traj = integrate_adaptive(&mut rhs, 0.0, &init.to_array(), a.t_end, &s)?;
    let mut out = CsvOut::create(
        out_path(&a.out),
        "trace",
        cfg,
        &["t", "p", "xi", "R", "phi", "Z", "p_phi", "mu"],
    )?;
    let mut write = |st: GCState| -> Res<()> {
        let (pphi, mu) = invariants(&st, &field, &params)?;
        out.row([st.t, st.p, st.xi, st.r, st.phi, st.z, pphi, mu].map(f))?;
        Ok(())
    };
    write(init)?;
    for step in traj.steps.iter().filter(|s| s.accepted) {
        write(GCState::from_array(&step.y, step.t))?;
    }
    Ok(out.finish()?)
}

fn poincare(a: &PoincareArgs, cfg: &str) -> Res<()> {
    let seeds: SeedSpec = a
        .seeds
        .parse()
        .map_err(|e: fluxherm_core::Error| config(e.to_string()))?;
    if a.transits == 0 {
        return Err(config("--transits must be at least 1"));
    }
    let (_, vp) = load(&a.field)?;
    let s = AdaptiveSettings {
        rtol: a.rtol,
        atol: a.atol,
        ..AdaptiveSettings::default()
    };
    let traces = experiments::trace_poincare_par(&vp, &seeds, a.transits, a.phi0, &s);
    let spreads = experiments::psi_spreads(&vp, &traces, a.phi0);
    let mut out = CsvOut::create(
        out_path(&a.out),
        "poincare",
        cfg,
        &["seed", "transit", "R", "Z", "termination"],
    )?;
    for (i, t) in traces.iter().enumerate() {
        out.row([
            i.to_string(),
            "0".into(),
            f(t.seed.0),
            f(t.seed.1),
            t.termination.as_str().into(),
        ])?;
        for c in &t.crossings {
            out.row([
                i.to_string(),
                c.transit.to_string(),
                f(c.r),
                f(c.z),
                t.termination.as_str().into(),
            ])?;
        }
    }
    out.finish()?;
    for (i, (t, sp)) in traces.iter().zip(&spreads).enumerate() {
        eprintln!(
            "seed {i:3} ({:.4}, {:.4}): {} crossings, {}, psi spread {sp:.3e}",
            t.seed.0,
            t.seed.1,
            t.crossings.len(),
            t.termination.as_str()
        );
    }
    Ok(())
}

fn gc(a: &GcArgs, cfg: &str) -> Res<()> {
    let (_, vp) = load(&a.field)?;
    let field = Reconstructed {
        vp: &vp,
        lenient: vp.orders().0.min(vp.orders().1) <= 1,
    };
    let params = gc_params(&a.particle)?;
    if !(a.xi_min >= -1.0 && a.xi_max <= 1.0 && a.xi_min <= a.xi_max)
        || !(0.0 <= a.r_inner && a.r_inner <= a.r_outer)
    {
        return Err(config(
            "pitch range must lie in [-1, 1] and radii must satisfy 0 <= inner <= outer",
        ));
    }
    let seeding = EnsembleSeeding {
        n: a.n_particles,
        seed: a.seed,
        p: a.p,
        xi: (a.xi_min, a.xi_max),
        axis: a.axis,
        radius: (a.r_inner, a.r_outer),
    };
    let states = experiments::seed_particles(&seeding);
    let s = AdaptiveSettings {
        rtol: a.particle.rtol,
        atol: a.particle.atol,
        ..AdaptiveSettings::default()
    };
    let rep = experiments::push_ensemble_par(&states, &field, &params, a.t_end, &s);
    let cols = [
        "particle",
        "dpphi_rel",
        "dmu_rel",
        "lost",
        "exit_time",
        "error",
        "pitch_clamps",
        "steps",
    ];
    let mut out = CsvOut::create(out_path(&a.report), "gc", cfg, &cols)?;
    for (i, p) in rep.particles.iter().enumerate() {
        out.row([
            i.to_string(),
            f(p.dpphi_rel),
            f(p.dmu_rel),
            p.lost.to_string(),
            p.exit_time.map(f).unwrap_or_default(),
            p.error
                .as_ref()
                .map(|e| e.name().to_string())
                .unwrap_or_default(),
            p.clamp.count.to_string(),
            p.n_accepted.to_string(),
        ])?;
    }
    out.finish()?;
    eprintln!(
        "{} particles, {} lost, {} failed; mean |dp_phi|/|p_phi| = {:.3e}, mean |dmu|/mu = {:.3e}",
        rep.particles.len(),
        rep.n_lost,
        rep.n_failed,
        rep.mean_dpphi_rel,
        rep.mean_dmu_rel
    );
    Ok(())
}

fn order_reduction(a: &OrderArgs, cfg: &str) -> Res<()> {
    let even: Vec<usize> = (4..=9).map(|k| 1usize << k).collect();
    let odd: Vec<usize> = even.iter().map(|n| n + 1).collect();
    let re = order_reduction_experiment(a.eps, &even);
    let ro = order_reduction_experiment(a.eps, &odd);
    let mut out = CsvOut::create(
        out_path(&a.out),
        "order-reduction",
        cfg,
        &["n", "err5", "err4"],
    )?;
    for r in re.iter().chain(&ro) {
        out.row([r.n.to_string(), f(r.err5), f(r.err4)])?;
    }
    out.finish()?;
    let (e5, e4) = order_slopes(&re);
    let (o5, o4) = order_slopes(&ro);
    eprintln!("even n: order {e5:.3} (5th-order solution), {e4:.3} (embedded)");
    eprintln!("odd n:  order {o5:.3} (5th-order solution), {o4:.3} (embedded)");
    Ok(())
}

fn converge(a: &ConvergeArgs, cfg: &str) -> Res<()> {
    for &m in &a.m {
        check_m(m)?;
    }
    if a.ladder.len() < 2 {
        return Err(config("the ladder needs at least two resolutions"));
    }
    let spec = AnalyticFieldSpec { q0: a.q0, q2: a.q2, ..AnalyticFieldSpec::default() };
    let cols = [
        "m",
        "pts_r",
        "pts_z",
        "h_z",
        "err_B_R",
        "err_B_phi",
        "err_B_Z",
        "err_psi",
        "err_gradB",
    ];
    let mut out = CsvOut::create(out_path(&a.out), "converge", cfg, &cols)?;
    for &m in &a.m {
        let c = ConvergeConfig {
            spec: spec.clone(),
            ladder: a.ladder.clone(),
            m,
            fine_ratio: a.fine_ratio,
            density: a.density,
        };
        let rows = experiments::converge(&c)?;
        for r in &rows {
            out.row([
                m.to_string(),
                r.pts.0.to_string(),
                r.pts.1.to_string(),
                f(r.h_z),
                f(r.br),
                f(r.bphi),
                f(r.bz),
                f(r.psi),
                f(r.grad_b),
            ])?;
        }
        let s = experiments::converge_slopes(&rows);
        eprintln!(
            "m={m}: slopes B_R {:.3}, B_Z {:.3}, psi {:.3}, gradB {:.3}",
            s.br, s.bz, s.psi, s.grad_b
        );
    }
    Ok(out.finish()?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error[ConfigError]: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.name());
            ExitCode::from(e.exit_code())
        }
    }
}
