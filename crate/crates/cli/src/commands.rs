use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use torus_hydro::exact::verify_displayed_identities;
use torus_hydro::flow::{conservation_report, integrate, FlowOptions, PhaseState, Scheme};
use torus_hydro::integral::{bracket_residual, IntegralCoeffs};
use torus_hydro::reducibility::{
    quartic_from_quadratic, simple_wave, verify_cubic_identity, verify_quartic_identity, ReductionCertificate,
};
use torus_hydro::regions::{constancy_and_transport_check, scan_torus, ConstancyReport, RegionMap};
use torus_hydro::roots::DEFAULT_CLASS_TOL;
use torus_hydro::{Metric, Profile, SemiGeodesicMetric, TorusPoint};

use crate::config::{parse_integral, parse_metric, read_text, LoadedMetric};
use crate::output::{f17, sibling, write, Header};
use crate::{CliError, Command, FieldArgs, IdentityKind, SchemeArg};

const ELIMINATED_TOL: f64 = 1e-10;
const SIMPLE_WAVE_FD_STEP: f64 = 1e-5;

/// The command as hashed into headers: output paths do not affect results.
fn hash_key(cmd: &Command) -> String {
    let mut c = cmd.clone();
    match &mut c {
        Command::Classify { out, .. } | Command::SimpleWave { out, .. } | Command::Flow { out, .. } => {
            *out = PathBuf::new()
        }
        Command::VerifyBracket { out, .. }
        | Command::VerifyIdentity { out, .. }
        | Command::ExactCheck { out, .. }
        | Command::EllipticCheck { out, .. } => *out = None,
    }
    format!("{c:?}")
}

struct Loaded {
    metric: LoadedMetric,
    integral: IntegralCoeffs,
    header: Header,
}

fn load(cmd: &Command, fields: &FieldArgs, seed: u64) -> Result<Loaded, CliError> {
    let mt = read_text(&fields.metric)?;
    let it = read_text(&fields.integral)?;
    let metric = parse_metric(&mt)?;
    let integral = parse_integral(&it, &metric)?;
    Ok(Loaded {
        metric,
        integral,
        header: Header::new(&hash_key(cmd), &[&mt, &it], seed),
    })
}

fn semi(m: &LoadedMetric, what: &str) -> Result<SemiGeodesicMetric, CliError> {
    match &m.metric {
        Metric::SemiGeodesic(s) => Ok(s.clone()),
        Metric::Conformal(_) => Err(CliError::Usage(format!("{what} needs a semigeodesic metric"))),
    }
}

fn status(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

/// Print a report and optionally save it with the header.
fn emit(header: &Header, out: Option<&Path>, body: &str) -> Result<(), CliError> {
    print!("{body}");
    if let Some(p) = out {
        header.write_text(p, body)?;
    }
    Ok(())
}

pub fn run(cmd: &Command, seed: u64) -> Result<(), CliError> {
    match cmd {
        Command::Classify { fields, out } => classify(cmd, fields, out, seed),
        Command::VerifyBracket { fields, out } => verify_bracket(cmd, fields, out.as_deref(), seed),
        Command::SimpleWave {
            lambda,
            profile,
            nodes,
            tol,
            out,
        } => simple_wave_cmd(cmd, *lambda, profile, *nodes, tol.unwrap_or(1e-8), out, seed),
        Command::VerifyIdentity { kind, .. } => match kind {
            IdentityKind::Cubic => cubic_identity(cmd, seed),
            IdentityKind::Quartic => quartic_identity(cmd, seed),
        },
        Command::Flow { .. } => flow(cmd, seed),
        Command::ExactCheck { trials, out } => exact_check(cmd, *trials, out.as_deref(), seed),
        Command::EllipticCheck { fields, out } => elliptic_check(cmd, fields, out.as_deref(), seed),
    }
}

fn map_csv(map: &RegionMap) -> String {
    let n = map.degree;
    let mut s = String::from("i,j,u1,u2,class");
    for k in 0..n {
        write!(s, ",s{k}_re,s{k}_im,r{k}_re,r{k}_im").unwrap();
    }
    s.push('\n');
    for i in 0..map.nx {
        for j in 0..map.ny {
            let node = &map.nodes[i * map.ny + j];
            let q = map.point(i, j);
            write!(s, "{i},{j},{},{},{}", f17(q.u1), f17(q.u2), node.class.label()).unwrap();
            for k in 0..n {
                match node.roots.get(k) {
                    Some(z) => write!(s, ",{},{}", f17(z.re), f17(z.im)).unwrap(),
                    None => s.push_str(",,"),
                }
                match node.invariants.get(k) {
                    Some(z) => write!(s, ",{},{}", f17(z.re), f17(z.im)).unwrap(),
                    None => s.push_str(",,"),
                }
            }
            s.push('\n');
        }
    }
    s
}

fn classify(cmd: &Command, fields: &FieldArgs, out: &Path, seed: u64) -> Result<(), CliError> {
    let l = load(cmd, fields, seed)?;
    let m = semi(&l.metric, "classify")?;
    let (nx, ny) = fields.grid.unwrap_or((64, 64));
    let map = scan_torus(&l.integral, &m, nx, ny, fields.tol.unwrap_or(DEFAULT_CLASS_TOL))?;
    write(&sibling(out, "pgm"), &map.to_pgm(&l.header.lines()))?;
    l.header.write_text(&sibling(out, "csv"), &map_csv(&map))?;
    let mut body = format!("grid = \"{nx}x{ny}\"\n");
    for c in [
        torus_hydro::roots::RootClass::Hyperbolic,
        torus_hydro::roots::RootClass::Elliptic,
        torus_hydro::roots::RootClass::Degenerate,
    ] {
        writeln!(body, "{} = {}", c.label(), map.count(c)).unwrap();
    }
    print!("{body}");
    Ok(())
}

fn verify_bracket(cmd: &Command, fields: &FieldArgs, out: Option<&Path>, seed: u64) -> Result<(), CliError> {
    let l = load(cmd, fields, seed)?;
    let (nx, ny) = fields.grid.unwrap_or((32, 32));
    let tol = fields.tol.unwrap_or(1e-8);
    let lat = l.metric.metric.lattice();
    let per_node: Vec<(f64, TorusPoint)> = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            let q = lat.grid_point(k / ny, k % ny, nx, ny);
            let r = bracket_residual(&l.integral, &l.metric.metric, q)?;
            Ok((r.iter().fold(0.0f64, |m, c| m.max(c.abs())), q))
        })
        .collect::<Result<_, torus_hydro::Error>>()?;
    let (worst, at) = per_node
        .iter()
        .copied()
        .fold((0.0f64, TorusPoint::new(0.0, 0.0)), |acc, x| if x.0 > acc.0 { x } else { acc });
    let pass = worst <= tol;
    let mut body = String::new();
    writeln!(body, "degree = {}", l.integral.degree()).unwrap();
    writeln!(body, "grid = \"{nx}x{ny}\"").unwrap();
    writeln!(body, "max_residual = {}", f17(worst)).unwrap();
    writeln!(body, "at = [{}, {}]", f17(at.u1), f17(at.u2)).unwrap();
    writeln!(body, "tolerance = {}", f17(tol)).unwrap();
    writeln!(body, "status = \"{}\"", status(pass)).unwrap();
    emit(&l.header, out, &body)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Verification(format!("bracket residual {worst:e} exceeds {tol:e}")))
    }
}

#[allow(clippy::too_many_arguments)]
fn simple_wave_cmd(
    cmd: &Command,
    lambda: f64,
    profile: &str,
    nodes: usize,
    tol: f64,
    out: &Path,
    seed: u64,
) -> Result<(), CliError> {
    if nodes == 0 {
        return Err(CliError::Usage("--nodes must be positive".into()));
    }
    let header = Header::new(&hash_key(cmd), &[], seed);
    let sol = simple_wave(lambda, Profile::parse(profile)?)?;
    let mut csv = String::from("xi,a0,a1,a2,a3,system0,system1,system2,eliminated,eigenvector\n");
    let (mut sys, mut elim, mut eig) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..nodes {
        let xi = k as f64 / nodes as f64;
        let a = sol.coeffs(xi);
        let r = sol.system_residual(xi, SIMPLE_WAVE_FD_STEP);
        let e = sol.eliminated_residual(xi);
        let v = sol.eigenvector_residual(xi, SIMPLE_WAVE_FD_STEP);
        sys = r.iter().fold(sys, |m, x| m.max(x.abs()));
        elim = elim.max(e.abs());
        eig = eig.max(v);
        let row: Vec<String> = [xi, a[0], a[1], a[2], a[3], r[0], r[1], r[2], e, v].iter().map(|x| f17(*x)).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    header.write_text(out, &csv)?;
    let cert = verify_cubic_identity(&sol, nodes);
    let pass = sys <= tol && eig <= tol && elim <= ELIMINATED_TOL && cert.passed();
    let mut body = String::new();
    writeln!(body, "lambda = {}", f17(lambda)).unwrap();
    writeln!(body, "c1 = {}", f17(sol.c1)).unwrap();
    writeln!(body, "c2 = {}", f17(sol.c2)).unwrap();
    writeln!(body, "c3 = {}", f17(sol.c3)).unwrap();
    writeln!(body, "system_residual = {}", f17(sys)).unwrap();
    writeln!(body, "eliminated_residual = {}", f17(elim)).unwrap();
    writeln!(body, "eigenvector_residual = {}", f17(eig)).unwrap();
    writeln!(body, "tolerance = {}", f17(tol)).unwrap();
    writeln!(body, "status = \"{}\"", status(pass)).unwrap();
    writeln!(body, "[certificate]").unwrap();
    write!(body, "{cert}").unwrap();
    emit(&header, Some(&sibling(out, "cert")), &body)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Verification("simple-wave residuals exceed tolerance".into()))
    }
}

fn certificate_result(header: &Header, out: Option<&Path>, cert: &ReductionCertificate) -> Result<(), CliError> {
    emit(header, out, &cert.to_string())?;
    if cert.passed() {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "identity residual {:e} exceeds {:e}",
            cert.residual, cert.tolerance
        )))
    }
}

fn cubic_identity(cmd: &Command, seed: u64) -> Result<(), CliError> {
    let Command::VerifyIdentity {
        lambda,
        profile,
        nodes,
        out,
        ..
    } = cmd
    else {
        unreachable!()
    };
    let lambda = lambda.ok_or_else(|| CliError::Usage("cubic identity needs --lambda".into()))?;
    let profile = profile
        .as_deref()
        .ok_or_else(|| CliError::Usage("cubic identity needs --profile".into()))?;
    let sol = simple_wave(lambda, Profile::parse(profile)?)?;
    let header = Header::new(&hash_key(cmd), &[], seed);
    certificate_result(&header, out.as_deref(), &verify_cubic_identity(&sol, *nodes))
}

fn quartic_identity(cmd: &Command, seed: u64) -> Result<(), CliError> {
    let Command::VerifyIdentity {
        metric,
        integral,
        quartic,
        k,
        grid,
        out,
        ..
    } = cmd
    else {
        unreachable!()
    };
    let metric = metric
        .as_ref()
        .ok_or_else(|| CliError::Usage("quartic identity needs --metric".into()))?;
    let integral = integral
        .as_ref()
        .ok_or_else(|| CliError::Usage("quartic identity needs --integral (the quadratic F2)".into()))?;
    let mt = read_text(metric)?;
    let it = read_text(integral)?;
    let lm = parse_metric(&mt)?;
    let f2 = parse_integral(&it, &lm)?;
    let (f4, qt) = match (quartic, k) {
        (Some(p), None) => {
            let qt = read_text(p)?;
            (parse_integral(&qt, &lm)?, qt)
        }
        (None, Some(k)) if k.len() != 3 => return Err(CliError::Usage("--k needs k1,k2,k3".into())),
        (None, Some(k)) => (quartic_from_quadratic(&f2, &lm.metric, [k[0], k[1], k[2]])?, String::new()),
        _ => return Err(CliError::Usage("quartic identity needs exactly one of --quartic or --k".into())),
    };
    let header = Header::new(&hash_key(cmd), &[&mt, &it, &qt], seed);
    let (nx, ny) = grid.unwrap_or((16, 16));
    let lat = lm.metric.lattice();
    let nodes: Vec<TorusPoint> = (0..nx * ny).map(|i| lat.grid_point(i / ny, i % ny, nx, ny)).collect();
    let cert = verify_quartic_identity(&f4, &f2, &lm.metric, &nodes).map_err(|e| match e {
        torus_hydro::Error::Precondition(m) | torus_hydro::Error::Singular(m) => CliError::Verification(m),
        other => other.into(),
    })?;
    certificate_result(&header, out.as_deref(), &cert)
}

fn flow(cmd: &Command, seed: u64) -> Result<(), CliError> {
    let Command::Flow {
        metric,
        integral,
        initial,
        t_end,
        dt,
        scheme,
        stride,
        tol,
        out,
    } = cmd
    else {
        unreachable!()
    };
    if initial.len() != 4 {
        return Err(CliError::Usage("--initial needs u1,u2,p1,p2".into()));
    }
    let mt = read_text(metric)?;
    let lm = parse_metric(&mt)?;
    let texts = integral.iter().map(|p| read_text(p)).collect::<Result<Vec<_>, _>>()?;
    let monitors = texts
        .iter()
        .map(|t| parse_integral(t, &lm))
        .collect::<Result<Vec<_>, _>>()?;
    let mut inputs: Vec<&str> = vec![&mt];
    inputs.extend(texts.iter().map(String::as_str));
    let header = Header::new(&hash_key(cmd), &inputs, seed);
    let scheme = match scheme {
        SchemeArg::Gauss4 => Scheme::Gauss4,
        SchemeArg::Midpoint => Scheme::ImplicitMidpoint,
    };
    let opts = FlowOptions::new(*t_end, *dt).with_scheme(scheme).with_stride(*stride);
    let start = PhaseState::new(initial[0], initial[1], initial[2], initial[3]);
    let traj = integrate(&lm.metric, start, &opts, &monitors).map_err(|e| match e {
        torus_hydro::Error::Invalid(m) => CliError::Usage(m),
        other => CliError::Verification(other.to_string()),
    })?;
    let mut nd = header.comment_block();
    for (i, st) in traj.states.iter().enumerate() {
        let rec = serde_json::json!({
            "time": st.time,
            "u1": st.q.u1,
            "u2": st.q.u2,
            "p1": st.p[0],
            "p2": st.p[1],
            "H": traj.energy[i],
            "monitors": traj.monitors[i],
        });
        nd.push_str(&rec.to_string());
        nd.push('\n');
    }
    write(out, nd.as_bytes())?;
    let tol = tol.unwrap_or(1e-8);
    let drifts = conservation_report(&traj);
    let mut body = format!("samples = {}\n", traj.states.len());
    let mut pass = true;
    for d in &drifts {
        let ok = d.max_drift <= tol;
        pass &= ok;
        writeln!(body, "[{}]", d.name).unwrap();
        writeln!(body, "initial = {}", f17(d.initial)).unwrap();
        writeln!(body, "max_drift = {}", f17(d.max_drift)).unwrap();
        writeln!(body, "relative_drift = {}", f17(d.relative_drift)).unwrap();
        writeln!(body, "status = \"{}\"", status(ok)).unwrap();
    }
    print!("{body}");
    if pass {
        Ok(())
    } else {
        Err(CliError::Verification(format!("conserved quantity drifted beyond {tol:e}")))
    }
}

fn exact_check(cmd: &Command, trials: usize, out: Option<&Path>, seed: u64) -> Result<(), CliError> {
    if trials == 0 {
        return Err(CliError::Usage("--trials must be positive".into()));
    }
    let header = Header::new(&hash_key(cmd), &[], seed);
    let rep = verify_displayed_identities(trials, seed);
    emit(&header, out, &rep.to_string())?;
    if rep.all_identities_hold() {
        Ok(())
    } else {
        Err(CliError::Verification("an exact identity failed; see the witness".into()))
    }
}

fn constancy_body(rep: &ConstancyReport, tol: f64) -> (String, bool) {
    let mut body = String::new();
    writeln!(body, "applicable = {}", rep.applicable).unwrap();
    writeln!(body, "message = \"{}\"", rep.message).unwrap();
    writeln!(body, "bracket_max = {}", f17(rep.bracket_max)).unwrap();
    let mut pass = rep.applicable;
    for (k, c) in rep.components.iter().enumerate() {
        let mut ok = c.u_deviation <= tol && c.v_deviation <= tol;
        ok &= c.max_abs_v.is_none_or(|v| v <= tol);
        pass &= ok;
        writeln!(body, "[component.{k}]").unwrap();
        writeln!(body, "nodes = {}", c.size).unwrap();
        writeln!(body, "boundary = {}", c.touches_boundary).unwrap();
        writeln!(body, "u_deviation = {}", f17(c.u_deviation)).unwrap();
        writeln!(body, "v_deviation = {}", f17(c.v_deviation)).unwrap();
        if let Some(v) = c.max_abs_v {
            writeln!(body, "max_abs_v = {}", f17(v)).unwrap();
        }
        writeln!(body, "status = \"{}\"", status(ok)).unwrap();
    }
    (body, pass)
}

fn elliptic_check(cmd: &Command, fields: &FieldArgs, out: Option<&Path>, seed: u64) -> Result<(), CliError> {
    let l = load(cmd, fields, seed)?;
    let m = semi(&l.metric, "elliptic-check")?;
    let (nx, ny) = fields.grid.unwrap_or((64, 64));
    let tol = fields.tol.unwrap_or(1e-8);
    let coarse = scan_torus(&l.integral, &m, nx, ny, DEFAULT_CLASS_TOL)?;
    let rep = constancy_and_transport_check(&coarse, &m, &l.integral);
    let (mut body, mut pass) = constancy_body(&rep, tol);
    if rep.applicable {
        let fine = scan_torus(&l.integral, &m, 2 * nx, 2 * ny, DEFAULT_CLASS_TOL)?;
        let rf = constancy_and_transport_check(&fine, &m, &l.integral);
        // below this the residual is rounding noise and the ratio is meaningless
        let floor = 1e-9;
        let ratio = rep.transport_max / rf.transport_max.max(f64::MIN_POSITIVE);
        let ok = rf.transport_max <= floor || ratio >= 3.0;
        pass &= ok;
        writeln!(body, "[transport]").unwrap();
        writeln!(body, "nodes = {}", rep.transport_nodes).unwrap();
        writeln!(body, "residual_h = {}", f17(rep.transport_max)).unwrap();
        writeln!(body, "residual_h2 = {}", f17(rf.transport_max)).unwrap();
        writeln!(body, "ratio = {}", f17(ratio)).unwrap();
        writeln!(body, "status = \"{}\"", status(ok)).unwrap();
    }
    writeln!(body, "status = \"{}\"", status(pass)).unwrap();
    emit(&l.header, out, &body)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Verification(if rep.applicable {
            "constancy or transport check failed".into()
        } else {
            rep.message
        }))
    }
}
