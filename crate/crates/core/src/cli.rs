//! Command-line front end: emit matrices and local profiles as JSON or text,
//! and run the verification suites.
//!
//! Exit codes: 0 on success, 1 when a verification case fails, 2 on usage
//! errors (bad flags, invalid prime, parity violation, enumeration guard).
//! `EISFE_MAX_ENUM` overrides the enumeration guard.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::degree2::{
    f_local_p, reduced_forms, stabilized_series, verify_f_local_fe, BinaryForm, Deg2Error, LocalProfile, SeriesKind,
};
use crate::fpforms::{
    orth_order_bruteforce, orth_order_closed, w_count_bruteforce, w_count_closed, CharacterKind, OrthForm,
    DEFAULT_MAX_ENUM,
};
use crate::functeq::{check_involution, check_t_involution, fe_matrix_from, t_matrix, FeMatrixJson};
use crate::ratfunc::{RatFunc, RatFuncJson};
use crate::upoperator::{
    b_matrix, eigen_data, lambda_matrix, normalized_eigenvalue, triangular_eigenvectors, up_matrix, EisensteinContext,
    RFMatrix, UpOperatorJson,
};

pub const MAX_ENUM_ENV: &str = "EISFE_MAX_ENUM";

/// The enumeration limit, from `EISFE_MAX_ENUM` when set.
pub fn max_enum_from_env() -> u64 {
    std::env::var(MAX_ENUM_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_MAX_ENUM)
}

#[derive(Parser, Debug)]
#[command(name = "eisfe", version, about = "Exact U(p) and functional-equation matrices for Siegel Eisenstein series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// U(p) transition matrix M and the prefactor exponent
    UpMatrix(CtxArgs),
    /// M together with the eigenbasis matrix B and its inverse
    EigenBasis(CtxArgs),
    /// Anti-diagonal matrix T and the functional-equation matrix
    FeMatrix(CtxArgs),
    /// Local profile and p-local factor of a binary form
    Deg2(Deg2Args),
    /// Run a verification suite
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Character {
    Trivial,
    Quadratic,
}

impl From<Character> for CharacterKind {
    fn from(c: Character) -> Self {
        match c {
            Character::Trivial => CharacterKind::Trivial,
            Character::Quadratic => CharacterKind::Quadratic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    WCounts,
    OrthOrders,
    Eigen,
    Involution,
    Deg2,
}

#[derive(Args, Debug)]
struct CtxArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    n: u32,
    /// Weight; defaults to the smallest weight with the right parity
    #[arg(long, allow_negative_numbers = true)]
    k: Option<i64>,
    #[arg(long, value_enum, default_value = "trivial")]
    character: Character,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
struct Deg2Args {
    #[arg(long)]
    p: u64,
    /// Coefficients a,b,c of N = [[a, b/2], [b/2, c]]
    #[arg(long, allow_hyphen_values = true)]
    form: String,
    /// Skip the brute-force oracle
    #[arg(long)]
    no_oracle: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    /// Primes to check, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    p: Vec<u64>,
    /// Restrict to one character (default: both)
    #[arg(long, value_enum)]
    character: Option<Character>,
    #[arg(long, default_value_t = 3)]
    max_l: u32,
    #[arg(long, default_value_t = 2)]
    max_m: u32,
    #[arg(long, default_value_t = 3)]
    max_n: u32,
    #[arg(long, default_value_t = 60)]
    max_det: i64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

/// Runs the CLI on `argv` and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return if code == 0 { 0 } else { 2 };
        }
    };
    let limit = max_enum_from_env();
    let result = match cli.command {
        Command::UpMatrix(a) => cmd_up(&a, false, out),
        Command::EigenBasis(a) => cmd_up(&a, true, out),
        Command::FeMatrix(a) => cmd_fe(&a, out),
        Command::Deg2(a) => cmd_deg2(&a, limit, out),
        Command::Verify(a) => cmd_verify(&a, limit, out),
    };
    match result {
        Ok(code) => code,
        Err(Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn context(a: &CtxArgs) -> Result<EisensteinContext, Usage> {
    let psi = a.character.into();
    let k = a.k.unwrap_or_else(|| EisensteinContext::minimal_weight(a.p, psi));
    Ok(EisensteinContext::new(a.p, a.n, k, psi)?)
}

fn write_json(out: &mut dyn Write, v: &impl Serialize) -> Result<(), Usage> {
    writeln!(out, "{}", serde_json::to_string_pretty(v)?)?;
    Ok(())
}

fn write_matrix(out: &mut dyn Write, name: &str, m: &RFMatrix) -> Result<(), Usage> {
    for (i, j, e) in m.entries() {
        writeln!(out, "{name}[{i}][{j}] = {e}")?;
    }
    Ok(())
}

fn write_header(out: &mut dyn Write, ctx: &EisensteinContext) -> Result<(), Usage> {
    writeln!(out, "context: p={} n={} k={} psi={}", ctx.p, ctx.n, ctx.k, ctx.psi.name())?;
    writeln!(out, "X = p^(-2s)")?;
    Ok(())
}

fn cmd_up(a: &CtxArgs, with_basis: bool, out: &mut dyn Write) -> Result<i32, Usage> {
    let ctx = context(a)?;
    let (m, prefactor) = up_matrix(&ctx);
    let eig = eigen_data(&ctx)?;
    let basis = with_basis.then(|| {
        let b = b_matrix(&ctx);
        let b_inv = b.unit_upper_inverse();
        (b, b_inv)
    });
    match a.format {
        Format::Json => {
            let doc = UpOperatorJson {
                context: ctx,
                prefactor: prefactor.to_json(),
                m: m.to_json(),
                b: basis.as_ref().map(|(b, _)| b.to_json()),
                b_inv: basis.as_ref().map(|(_, bi)| bi.to_json()),
                eigen_exponents: eig.exponents.iter().map(|e| e.to_json()).collect(),
            };
            write_json(out, &doc)?;
        }
        Format::Text => {
            write_header(out, &ctx)?;
            writeln!(out, "prefactor: p^({prefactor})")?;
            write_matrix(out, "M", &m)?;
            if let Some((b, bi)) = &basis {
                write_matrix(out, "B", b)?;
                write_matrix(out, "B_inv", bi)?;
            }
            for (j, e) in eig.exponents.iter().enumerate() {
                writeln!(out, "l(s,{j}) = {e}")?;
            }
        }
    }
    Ok(0)
}

fn cmd_fe(a: &CtxArgs, out: &mut dyn Write) -> Result<i32, Usage> {
    let ctx = context(a)?;
    let t = t_matrix(&ctx);
    let fe = fe_matrix_from(&ctx, &b_matrix(&ctx), &t);
    let ok = check_involution(&ctx, &fe);
    match a.format {
        Format::Json => {
            write_json(out, &FeMatrixJson { context: ctx, t: t.to_json(), fe: fe.to_json(), involution_ok: ok })?
        }
        Format::Text => {
            write_header(out, &ctx)?;
            write_matrix(out, "T", &t)?;
            write_matrix(out, "FE", &fe)?;
            writeln!(out, "involution_ok = {ok}")?;
        }
    }
    Ok(if ok { 0 } else { 1 })
}

fn parse_form(s: &str) -> Result<BinaryForm, Usage> {
    let parts: Vec<i64> = s
        .split(',')
        .map(|x| x.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Usage(format!("--form expects a,b,c, got {s:?}")))?;
    let [a, b, c] = parts[..] else { return Err(Usage(format!("--form expects three integers, got {s:?}"))) };
    Ok(BinaryForm::new(a, b, c)?)
}

/// JSON document emitted by `deg2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deg2Json {
    pub form: BinaryForm,
    pub profile: LocalProfile,
    #[serde(rename = "F")]
    pub f: RatFuncJson,
    #[serde(rename = "S")]
    pub s: RatFuncJson,
    pub fe_ok: bool,
    pub oracle_ok: Option<bool>,
}

fn cmd_deg2(a: &Deg2Args, limit: u64, out: &mut dyn Write) -> Result<i32, Usage> {
    let n = parse_form(&a.form)?;
    let lf = f_local_p(&n, a.p)?;
    let fe_ok = verify_f_local_fe(&n, a.p)?;
    let oracle_ok = if a.no_oracle {
        None
    } else {
        let kind = SeriesKind::Stratified { nu: 1, psi: CharacterKind::Quadratic };
        let st = stabilized_series(&n, a.p, kind, limit)?;
        Some(RatFunc::from_poly(st.series) == lf.s_full)
    };
    match a.format {
        Format::Json => write_json(
            out,
            &Deg2Json {
                form: n,
                profile: lf.profile.clone(),
                f: lf.f.to_json(),
                s: lf.s_full.to_json(),
                fe_ok,
                oracle_ok,
            },
        )?,
        Format::Text => {
            let pr = &lf.profile;
            writeln!(out, "form: {n}  p = {}", pr.p)?;
            writeln!(
                out,
                "D_N = {}  f = {}  m = {}  t = {}  chi_p(alpha) = {}",
                pr.d_n, pr.f, pr.m, pr.t, pr.alpha_class
            )?;
            writeln!(out, "chi_N*(p) = {}  l_N = {}  D_N* = {}", pr.chi_n_star_at_p, pr.l_n, pr.d_n_star)?;
            writeln!(out, "X = p^(-2s)")?;
            writeln!(out, "F = {}", lf.f)?;
            writeln!(out, "S = {}", lf.s_full)?;
            writeln!(out, "fe_ok = {fe_ok}")?;
            match oracle_ok {
                Some(v) => writeln!(out, "oracle_ok = {v}")?,
                None => writeln!(out, "oracle_ok = skipped")?,
            }
        }
    }
    Ok(if fe_ok && oracle_ok != Some(false) { 0 } else { 1 })
}

#[derive(Serialize)]
struct Case {
    id: String,
    pass: bool,
    detail: Value,
}

fn characters(c: Option<Character>) -> Vec<CharacterKind> {
    match c {
        Some(c) => vec![c.into()],
        None => vec![CharacterKind::Trivial, CharacterKind::Quadratic],
    }
}

fn check_prime(p: u64) -> Result<(), Usage> {
    if p == 2 || !crate::fpforms::is_prime(p) {
        return Err(Usage(format!("p = {p} is not an odd prime")));
    }
    Ok(())
}

fn suite_w_counts(a: &VerifyArgs, limit: u64) -> Result<Vec<Case>, Usage> {
    let mut cases = Vec::new();
    for &p in &a.p {
        for l in 1..=a.max_l {
            for m in 0..=l {
                for psi in characters(a.character) {
                    let closed = w_count_closed(l, m, psi, p);
                    let brute = w_count_bruteforce(l, m, psi, p, limit)?;
                    cases.push(Case {
                        id: format!("w-counts/p={p}/l={l}/m={m}/{}", psi.name()),
                        pass: closed == brute,
                        detail: json!({"l": l, "m": m, "psi": psi.name(), "p": p,
                            "closed": closed.to_string(), "brute": brute.to_string(), "match": closed == brute}),
                    });
                }
            }
        }
    }
    Ok(cases)
}

fn suite_orth(a: &VerifyArgs, limit: u64) -> Result<Vec<Case>, Usage> {
    let mut cases = Vec::new();
    for &p in &a.p {
        for m in 1..=a.max_m {
            for form in [OrthForm::Identity, OrthForm::E] {
                let closed = orth_order_closed(m, form, p);
                let brute = orth_order_bruteforce(&form.matrix(p, m as usize), limit)?;
                let ok = closed == brute.into();
                cases.push(Case {
                    id: format!("orth-orders/p={p}/m={m}/{form:?}"),
                    pass: ok,
                    detail: json!({"m": m, "form": format!("{form:?}"), "p": p,
                        "closed": closed.to_string(), "brute": brute.to_string(), "match": ok}),
                });
            }
        }
    }
    Ok(cases)
}

fn checkerboard(m: &RFMatrix) -> bool {
    m.entries().all(|(i, j, e)| (i + j) % 2 == 0 || e.is_zero())
}

fn suite_eigen(a: &VerifyArgs) -> Result<Vec<Case>, Usage> {
    let mut cases = Vec::new();
    for &p in &a.p {
        for psi in characters(a.character) {
            for n in 1..=a.max_n {
                let ctx = EisensteinContext::new(p, n, EisensteinContext::minimal_weight(p, psi), psi)?;
                let (m, _) = up_matrix(&ctx);
                let b = b_matrix(&ctx);
                let b_inv = b.unit_upper_inverse();
                let lam = lambda_matrix(&ctx);
                let eig_ok = b.mul(&m) == lam.mul(&b);
                let eigs: Vec<RatFunc> = (0..ctx.size()).map(|i| normalized_eigenvalue(p, i)).collect();
                let lemma_ok = triangular_eigenvectors(&m.transpose(), &eigs).is_ok_and(|v| v == b.transpose());
                let inv_ok = b.mul(&b_inv).is_identity() && b_inv.mul(&b).is_identity();
                let sparse_ok = psi == CharacterKind::Trivial || (checkerboard(&m) && checkerboard(&b));
                let id = format!("eigen/p={p}/n={n}/{}", psi.name());
                for (name, ok) in [("BM=LB", eig_ok), ("lemma", lemma_ok), ("inverse", inv_ok), ("sparsity", sparse_ok)]
                {
                    cases.push(Case { id: format!("{id}/{name}"), pass: ok, detail: Value::Null });
                }
            }
        }
    }
    Ok(cases)
}

fn suite_involution(a: &VerifyArgs) -> Result<Vec<Case>, Usage> {
    let mut cases = Vec::new();
    for &p in &a.p {
        for psi in characters(a.character) {
            for n in 1..=a.max_n {
                let ctx = EisensteinContext::new(p, n, EisensteinContext::minimal_weight(p, psi), psi)?;
                let t = t_matrix(&ctx);
                let fe = fe_matrix_from(&ctx, &b_matrix(&ctx), &t);
                let id = format!("involution/p={p}/n={n}/{}", psi.name());
                cases.push(Case { id: format!("{id}/T"), pass: check_t_involution(&ctx, &t), detail: Value::Null });
                cases.push(Case { id: format!("{id}/FE"), pass: check_involution(&ctx, &fe), detail: Value::Null });
            }
        }
    }
    Ok(cases)
}

fn suite_deg2(a: &VerifyArgs, limit: u64) -> Result<Vec<Case>, Usage> {
    let mut cases = Vec::new();
    for &p in &a.p {
        for n in reduced_forms(a.max_det) {
            let fe_ok = verify_f_local_fe(&n, p)?;
            cases.push(Case { id: format!("deg2/p={p}/form={n}/fe"), pass: fe_ok, detail: Value::Null });
            let kind = SeriesKind::Stratified { nu: 1, psi: CharacterKind::Quadratic };
            let id = format!("deg2/p={p}/form={n}/oracle");
            match stabilized_series(&n, p, kind, limit) {
                Ok(st) => {
                    let ok = RatFunc::from_poly(st.series) == f_local_p(&n, p)?.s_full;
                    let detail =
                        json!({"checked_depth": st.checked_depth, "first_stable_depth": st.first_stable_depth});
                    cases.push(Case { id, pass: ok, detail });
                }
                Err(e @ Deg2Error::Enum(_)) => return Err(Usage(format!("{e}; raise {MAX_ENUM_ENV} to proceed"))),
                Err(e) => cases.push(Case { id, pass: false, detail: json!({"error": e.to_string()}) }),
            }
        }
    }
    Ok(cases)
}

fn cmd_verify(a: &VerifyArgs, limit: u64, out: &mut dyn Write) -> Result<i32, Usage> {
    for &p in &a.p {
        check_prime(p)?;
    }
    let cases = match a.suite {
        Suite::WCounts => suite_w_counts(a, limit)?,
        Suite::OrthOrders => suite_orth(a, limit)?,
        Suite::Eigen => suite_eigen(a)?,
        Suite::Involution => suite_involution(a)?,
        Suite::Deg2 => suite_deg2(a, limit)?,
    };
    let all = cases.iter().all(|c| c.pass);
    match a.format {
        Format::Text => {
            for c in &cases {
                writeln!(out, "{} {}", if c.pass { "PASS" } else { "FAIL" }, c.id)?;
            }
            writeln!(out, "{} of {} cases passed", cases.iter().filter(|c| c.pass).count(), cases.len())?;
        }
        Format::Json => write_json(out, &json!({"cases": cases, "all_pass": all}))?,
    }
    Ok(if all { 0 } else { 1 })
}
