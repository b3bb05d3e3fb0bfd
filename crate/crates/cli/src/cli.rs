//! Argument parsing and dispatch. `run` is the whole program minus process
//! exit, so tests drive it directly.

use std::collections::BTreeMap;
use std::io::Read;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use qsym::hierarchy::{casimir, constraint_stability, lax_rhs, LaxFlowSpec};
use qsym::logsymbol::{lift, log_derivation, winfty_bracket, winfty_map};
use qsym::poisson::{dirac_reduce, jmap, kernel, BracketKernel, PhaseWindow};
use qsym::rmatrix::{project, Side, Splitting};
use qsym::{Basis, LaurentField, QScalar, Symbol};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::output::{log_symbol_json, log_symbol_text, symbol_json, Mode, Rendered};
use crate::parse::{self, ParseError};
use crate::suites;

type S = Symbol<LaurentField>;

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum BasisArg {
    #[value(name = "T")]
    T,
    #[value(name = "D")]
    D,
}

impl From<BasisArg> for Basis {
    fn from(b: BasisArg) -> Basis {
        match b {
            BasisArg::T => Basis::T,
            BasisArg::D => Basis::D,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum SideArg {
    Plus,
    Minus,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum Fault {
    Qbinomial,
}

/// Exact calculus of q-pseudodifferential symbols.
///
/// Symbols are written `basis=T floor=-8 : z*T^1 + 1`; the header is optional
/// and `-` reads a symbol from standard input.
#[derive(Parser, Debug)]
#[command(name = "qsym", version, allow_negative_numbers = true)]
pub struct Cli {
    /// Basis of symbols without a header or operator letter
    #[arg(long, global = true, value_enum, default_value = "T")]
    pub basis: BasisArg,
    /// Splitting of the symbol algebra
    #[arg(long, global = true, allow_hyphen_values = true, default_value_t = -1, value_parser = clap::value_parser!(i8).range(-1..=1))]
    pub sigma: i8,
    /// Poisson structure (1 linear, 2 quadratic, 3 cubic)
    #[arg(long, global = true, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub structure: u8,
    /// Reliability floor of symbols without a header
    #[arg(long, global = true, allow_hyphen_values = true, default_value_t = -8)]
    pub floor: i64,
    /// Phase window `n,m` (`*` for an open edge; D basis: `n` or `n,0`)
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Evaluate results at this rational value of q
    #[arg(long = "q-value", global = true, allow_hyphen_values = true)]
    pub q_value: Option<String>,
    /// Output format
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub output: Mode,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Product A*B
    Mul {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// Commutator [A,B]
    Comm {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// Trace of A
    Trace {
        #[arg(allow_hyphen_values = true)]
        a: String,
    },
    /// Pairing <A,B> = Tr(AB)
    Pair {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// Rewrite A in the other basis
    Convert {
        #[arg(allow_hyphen_values = true)]
        a: String,
        /// Target basis [default: the other one]
        #[arg(long, value_enum)]
        to: Option<BasisArg>,
    },
    /// Projection of A onto one side of the splitting
    Project {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(long, value_enum, default_value = "plus")]
        side: SideArg,
    },
    /// Formal adjoint of A
    Adjoint {
        #[arg(allow_hyphen_values = true)]
        a: String,
    },
    /// Monic N-th root of A
    Root {
        #[arg(allow_hyphen_values = true)]
        a: String,
        /// Root degree [default: the order of A]
        #[arg(long)]
        n: Option<u32>,
    },
    /// Hamiltonian map J(L)(X)
    Jmap {
        #[arg(allow_hyphen_values = true)]
        l: String,
        #[arg(allow_hyphen_values = true)]
        x: String,
    },
    /// Bracket kernels J_ij on a window
    Kernel {
        #[arg(long, allow_hyphen_values = true)]
        i: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        j: Option<i64>,
        /// Set the field with this index to 1
        #[arg(long, allow_hyphen_values = true)]
        unit: Option<i64>,
        /// Also print the q -> 1 limit of field-free kernels
        #[arg(long)]
        classical: bool,
    },
    /// Dirac reduction of the kernels to a unit field
    Dirac {
        /// Index of the constrained field [default: the top field]
        #[arg(long, allow_hyphen_values = true)]
        constrained: Option<i64>,
    },
    /// Right-hand side of the Lax flow dL/dt_p
    Flow {
        #[arg(allow_hyphen_values = true)]
        l: String,
        /// Flow power p, an integer or a fraction
        #[arg(long, default_value = "1")]
        power: String,
    },
    /// Casimir (1/p) Tr L^p
    Casimir {
        #[arg(allow_hyphen_values = true)]
        l: String,
        #[arg(long, default_value_t = 2)]
        power: u32,
    },
    /// Logarithmic derivation [log D, A]
    Logcomm {
        #[arg(allow_hyphen_values = true)]
        a: String,
    },
    /// Extended map at L = c*log D + L0, or the bracket with --with
    Winfty {
        #[arg(allow_hyphen_values = true)]
        l0: String,
        /// One-form component `j=field` (repeatable)
        #[arg(long = "form", required = true, allow_hyphen_values = true)]
        form: Vec<String>,
        /// Second one-form for the bracket (repeatable)
        #[arg(long = "with", allow_hyphen_values = true)]
        with: Vec<String>,
        /// Central charge c
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        charge: String,
    },
    /// Value of A at q (default q = 1)
    Limit {
        #[arg(allow_hyphen_values = true)]
        a: String,
    },
    /// Run a verification suite
    Verify {
        /// algebra, trace, myb, kernels, dirac, trihamiltonian, jacobi, logderivation or all
        #[arg(default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<Fault>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Mul { .. } => "mul",
            Command::Comm { .. } => "comm",
            Command::Trace { .. } => "trace",
            Command::Pair { .. } => "pair",
            Command::Convert { .. } => "convert",
            Command::Project { .. } => "project",
            Command::Adjoint { .. } => "adjoint",
            Command::Root { .. } => "root",
            Command::Jmap { .. } => "jmap",
            Command::Kernel { .. } => "kernel",
            Command::Dirac { .. } => "dirac",
            Command::Flow { .. } => "flow",
            Command::Casimir { .. } => "casimir",
            Command::Logcomm { .. } => "logcomm",
            Command::Winfty { .. } => "winfty",
            Command::Limit { .. } => "limit",
            Command::Verify { .. } => "verify",
        }
    }
}

// ---- exit codes ----

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug)]
enum Failure {
    Usage(String),
    Parse(ParseError),
    Domain(qsym::Error),
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::Parse(e)
    }
}

impl From<qsym::Error> for Failure {
    fn from(e: qsym::Error) -> Self {
        Failure::Domain(e)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I, stdin: &mut dyn Read) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome { code: EXIT_OK, stdout: text, stderr: String::new() }
                }
                _ => Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: text },
            };
        }
    };
    let name = cli.command.name();
    let mut ctx = Ctx { cli: &cli, stdin, stdin_used: false };
    let result = ctx.dispatch();
    match result {
        Ok((rendered, passed)) => Outcome {
            code: if passed { EXIT_OK } else { EXIT_VERIFY },
            stdout: rendered.render(name, cli.output),
            stderr: String::new(),
        },
        Err(Failure::Usage(m)) => Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: format!("usage error: {m}\n") },
        Err(Failure::Parse(e)) => Outcome { code: EXIT_PARSE, stdout: String::new(), stderr: format!("{e}\n") },
        Err(Failure::Domain(e)) => Outcome { code: EXIT_DOMAIN, stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    stdin: &'a mut dyn Read,
    stdin_used: bool,
}

type Done = Result<(Rendered, bool), Failure>;

impl Ctx<'_> {
    fn text(&mut self, arg: &str) -> Result<String, Failure> {
        if arg != "-" {
            return Ok(arg.to_string());
        }
        if self.stdin_used {
            return Err(Failure::Usage("only one argument can be read from standard input".into()));
        }
        self.stdin_used = true;
        let mut s = String::new();
        self.stdin.read_to_string(&mut s).map_err(|e| Failure::Usage(format!("reading standard input: {e}")))?;
        Ok(s)
    }

    fn symbol(&mut self, arg: &str) -> Result<S, Failure> {
        let t = self.text(arg)?;
        Ok(parse::parse_symbol(&t, self.cli.basis.into(), self.cli.floor)?)
    }

    fn split(&self, basis: Basis) -> Splitting {
        Splitting { sigma: self.cli.sigma, basis }
    }

    fn q_value(&self) -> Result<Option<BigRational>, Failure> {
        self.cli.q_value.as_deref().map(parse::parse_rational).transpose().map_err(Failure::Parse)
    }

    fn window(&self, basis: Basis) -> Result<Option<PhaseWindow>, Failure> {
        self.cli.window.as_deref().map(|w| parse::parse_window(w, basis)).transpose().map_err(Failure::Parse)
    }

    fn need_window(&self) -> Result<PhaseWindow, Failure> {
        self.window(self.cli.basis.into())?.ok_or_else(|| Failure::Usage("this command needs --window".into()))
    }

    /// A symbol result, evaluated at `--q-value` when given.
    fn symbol_out(&self, s: S) -> Done {
        let s = match self.q_value()? {
            Some(r) => s.eval_at_q(&r)?,
            None => s,
        };
        Ok((Rendered::new(s.to_text(), symbol_json(&s)), true))
    }

    fn scalar_out(&self, v: QScalar) -> Done {
        let v = match self.q_value()? {
            Some(r) => v.eval(&r)?.to_string(),
            None => v.to_string(),
        };
        Ok((Rendered::new(v.clone(), json!({"value": v})), true))
    }

    fn dispatch(&mut self) -> Done {
        let cli = self.cli;
        match &cli.command {
            Command::Mul { a, b } => {
                let (a, b) = (self.symbol(a)?, self.symbol(b)?);
                self.symbol_out(a.mul(&b)?)
            }
            Command::Comm { a, b } => {
                let (a, b) = (self.symbol(a)?, self.symbol(b)?);
                self.symbol_out(a.commutator(&b)?)
            }
            Command::Trace { a } => {
                let a = self.symbol(a)?;
                self.scalar_out(a.trace()?)
            }
            Command::Pair { a, b } => {
                let (a, b) = (self.symbol(a)?, self.symbol(b)?);
                self.scalar_out(a.pairing(&b)?)
            }
            Command::Convert { a, to } => {
                let a = self.symbol(a)?;
                let target = match to {
                    Some(t) => (*t).into(),
                    None if a.basis() == Basis::T => Basis::D,
                    None => Basis::T,
                };
                self.symbol_out(a.convert(target, a.floor())?)
            }
            Command::Project { a, side } => {
                let a = self.symbol(a)?;
                let side = match side {
                    SideArg::Plus => Side::Plus,
                    SideArg::Minus => Side::Minus,
                };
                self.symbol_out(project(&a, side, self.split(a.basis()))?)
            }
            Command::Adjoint { a } => {
                let a = self.symbol(a)?;
                self.symbol_out(a.adjoint(a.floor())?)
            }
            Command::Root { a, n } => {
                let a = self.symbol(a)?;
                let n = match n {
                    Some(n) => *n,
                    None => u32::try_from(a.top().unwrap_or(0)).ok().filter(|n| *n > 0).ok_or(qsym::Error::NotMonic)?,
                };
                self.symbol_out(a.nth_root(n)?)
            }
            Command::Jmap { l, x } => {
                let (l, x) = (self.symbol(l)?, self.symbol(x)?);
                self.symbol_out(jmap(cli.structure, self.split(l.basis()), &l, &x)?)
            }
            Command::Kernel { i, j, unit, classical } => self.kernels(*i, *j, *unit, *classical),
            Command::Dirac { constrained } => self.dirac(*constrained),
            Command::Flow { l, power } => {
                let l = self.symbol(l)?;
                self.flow(l, power)
            }
            Command::Casimir { l, power } => {
                let l = self.symbol(l)?;
                self.scalar_out(casimir(&l, *power)?)
            }
            Command::Logcomm { a } => {
                let a = self.symbol(a)?;
                let r = log_derivation(&lift(&a))?;
                Ok((Rendered::new(log_symbol_text(&r), log_symbol_json(&r)), true))
            }
            Command::Winfty { l0, form, with, charge } => {
                let mut l0 = self.symbol(l0)?;
                if l0.basis() != Basis::D {
                    l0 = parse::parse_symbol(&format!("basis=D floor={} : {}", l0.floor(), l0), Basis::D, l0.floor())?;
                }
                let w = PhaseWindow::d(0);
                let c = parse::parse_scalar(charge)?;
                let x = parse::parse_oneform(form, w)?;
                if with.is_empty() {
                    let r = winfty_map(&c, &l0, &x)?;
                    Ok((Rendered::new(log_symbol_text(&r), log_symbol_json(&r)), true))
                } else {
                    let y = parse::parse_oneform(with, w)?;
                    let v = winfty_bracket(&c, &l0, &x, &y)?;
                    Ok((Rendered::new(v.to_string(), json!({"value": v.to_string()})), true))
                }
            }
            Command::Limit { a } => {
                let a = self.symbol(a)?;
                let r = self.q_value()?.unwrap_or_else(|| BigRational::from_integer(1.into()));
                let v = a.eval_at_q(&r)?;
                Ok((Rendered::new(v.to_text(), symbol_json(&v)), true))
            }
            Command::Verify { suite, seed, inject_fault } => {
                qsym::fault::corrupt_qbinomial(matches!(inject_fault, Some(Fault::Qbinomial)));
                let report = suites::run(suite, *seed).map_err(Failure::Usage);
                qsym::fault::corrupt_qbinomial(false);
                let report = report?;
                let passed = report.passed();
                Ok((Rendered::new(report.to_text(), report.to_json()), passed))
            }
        }
    }

    fn kernels(&self, i: Option<i64>, j: Option<i64>, unit: Option<i64>, classical: bool) -> Done {
        let w = self.need_window()?;
        let split = self.split(w.basis);
        let s = self.cli.structure;
        let idx = window_indices(&w, i.into_iter().chain(j).max())?;
        let is: Vec<i64> = i.map_or(idx.clone(), |i| vec![i]);
        let js: Vec<i64> = j.map_or(idx, |j| vec![j]);
        let pairs: Vec<(i64, i64)> = is.iter().flat_map(|&i| js.iter().map(move |&j| (i, j))).collect();
        let name = w.field_name();
        let ks: Vec<qsym::Result<BracketKernel>> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let k = kernel(s, split, &w, i, j)?;
                Ok(match unit {
                    Some(u) => k.substitute(&|c, k| (c == name && k == u).then(<qsym::expr::FieldExpr as qsym::Coeff>::one)),
                    None => k,
                })
            })
            .collect();
        let mut text = String::new();
        let mut entries = Vec::new();
        for (&(i, j), k) in pairs.iter().zip(ks) {
            let k = k?;
            let mut line = format!("J^({s})_({i},{j}) = {k}");
            let mut e = serde_json::Map::new();
            e.insert("i".into(), json!(i));
            e.insert("j".into(), json!(j));
            e.insert("kernel".into(), json!(k.to_string()));
            if classical && k.terms()?.iter().all(|t| t.proj.is_none() && t.left.is_one()) {
                let lim = k.classical_limit()?;
                line.push_str(&format!("   [q->1: {lim}]"));
                e.insert("classical".into(), json!(lim.to_string()));
            }
            text.push_str(&line);
            text.push('\n');
            entries.push(Value::Object(e));
        }
        let json = json!({
            "structure": s,
            "sigma": self.cli.sigma,
            "window": window_json(&w),
            "entries": entries,
        });
        Ok((Rendered::new(text, json), true))
    }

    fn dirac(&self, constrained: Option<i64>) -> Done {
        let w = self.need_window()?;
        if w.hi.is_none() || w.lo.is_none() {
            return Err(Failure::Usage("Dirac reduction needs a finite window".into()));
        }
        let split = self.split(w.basis);
        let s = self.cli.structure;
        let idx = window_indices(&w, None)?;
        let c = constrained.unwrap_or(match w.basis {
            Basis::T => w.hi.unwrap_or(0),
            Basis::D => 0,
        });
        let pairs: Vec<(i64, i64)> = idx.iter().flat_map(|&i| idx.iter().map(move |&j| (i, j))).collect();
        let ks: Vec<qsym::Result<((i64, i64), BracketKernel)>> =
            pairs.par_iter().map(|&(i, j)| Ok(((i, j), kernel(s, split, &w, i, j)?))).collect();
        let mat: BTreeMap<(i64, i64), BracketKernel> = ks.into_iter().collect::<qsym::Result<_>>()?;
        let red = dirac_reduce(&mat, c)?;
        let mut text = String::new();
        let mut entries = Vec::new();
        for ((i, j), r) in &red {
            let diag: Vec<String> = r.diag.coeffs.iter().map(|(a, c)| format!("({c})*T^{a}")).collect();
            let vanishes = if r.is_field_free() { Some(r.vanishes_identically()?) } else { None };
            text.push_str(&format!("({i},{j}): {} - [{}] o ({})^-1 o [{}]", r.local, r.left, diag.join(" + "), r.right));
            if let Some(v) = vanishes {
                text.push_str(if v { "   = 0" } else { "   != 0" });
            }
            text.push('\n');
            entries.push(json!({
                "i": i,
                "j": j,
                "local": r.local.to_string(),
                "left": r.left.to_string(),
                "diagonal": diag.join(" + "),
                "right": r.right.to_string(),
                "vanishes": vanishes,
            }));
        }
        let json =
            json!({"structure": s, "sigma": self.cli.sigma, "window": window_json(&w), "constrained": c, "entries": entries});
        Ok((Rendered::new(text, json), true))
    }

    fn flow(&self, l: S, power: &str) -> Done {
        let (num, den) = parse::parse_power(power)?;
        let w = match self.window(l.basis())? {
            Some(w) => w,
            None => match l.basis() {
                Basis::T => PhaseWindow::t(l.top().unwrap_or(0), l.lowest().unwrap_or(0)),
                Basis::D => PhaseWindow::d(l.top().unwrap_or(0)),
            },
        };
        let spec = LaxFlowSpec::new(self.split(l.basis()), w, num, den)?;
        let rhs = lax_rhs(&spec, &l)?;
        let stab = constraint_stability(&spec, &l)?;
        let name = w.field_name();
        let mut text = String::new();
        let mut fields = Vec::new();
        let lo = w.lo.unwrap_or(rhs.floor()).max(rhs.floor());
        let hi = w.hi.unwrap_or(rhs.effective_top());
        for o in (lo..=hi).rev() {
            let idx = w.index_of(o);
            let c = rhs.coeff(o);
            text.push_str(&format!("d{name}{idx}/dt = {c}\n"));
            fields.push(json!({"field": format!("{name}{idx}"), "order": o, "rhs": c.to_string()}));
        }
        let cons: Vec<Value> = stab.entries.iter().map(|(o, c)| json!({"order": o, "rate": c.to_string()})).collect();
        for (o, c) in &stab.entries {
            text.push_str(&format!("constrained order {o}: rate {c}\n"));
        }
        let json = json!({
            "power": if den == 1 { num.to_string() } else { format!("{num}/{den}") },
            "sigma": self.cli.sigma,
            "window": window_json(&w),
            "floor": rhs.floor(),
            "fields": fields,
            "constraints": cons,
        });
        Ok((Rendered::new(text, json), true))
    }
}

fn window_json(w: &PhaseWindow) -> Value {
    json!({"basis": w.basis.to_string(), "hi": w.hi, "lo": w.lo})
}

/// Field indices of a window; unbounded D windows are cut at `reach` or 3.
fn window_indices(w: &PhaseWindow, reach: Option<i64>) -> Result<Vec<i64>, Failure> {
    match (w.basis, w.hi, w.lo) {
        (Basis::T, Some(h), Some(l)) => Ok((l..=h).collect()),
        (Basis::D, Some(n), Some(_)) => Ok((0..=n).collect()),
        (Basis::D, Some(n), None) => Ok((0..=reach.unwrap_or(n + 3).max(n + 3)).collect()),
        _ => Err(Failure::Usage("kernels on an open T window need explicit --i and --j".into())),
    }
}
