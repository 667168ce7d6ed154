//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Every arithmetic check is paired with an oracle
//! written here rather than borrowed from the library.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kaisar::arith::lie::lie_derivative;
use kaisar::arith::linear::{fourier_motzkin, Constraint, Feasibility, Rel};
use kaisar::arith::poly::Poly;
use kaisar::arith::ratfun::{normalize, normalize_poly};
use kaisar::arith::valid::Backend;
use kaisar::ast::{Cmp, Formula, Rat, Term, Var};
use kaisar::check::{check, Config};
use kaisar::driver::{run_file, run_files, Options, Status};
use kaisar::elab::{elaborate, unssa_formula, unssa_term, Elaborated, IDom, IKind, IStmt};
use kaisar::ode;
use kaisar::parser::{parse_document, parse_formula, parse_term};
use kaisar::printer;
use kaisar::refine::proves;
use kaisar::reify::reify;
use kaisar::span::Span;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Outcome {
        Outcome { pass, detail: detail.into() }
    }
}

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

fn kaisar_files(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "kaisar"))
        .collect();
    files.sort();
    files
}

fn corpus() -> Vec<PathBuf> {
    kaisar_files(&corpus_dir())
}

fn stem(p: &Path) -> String {
    p.file_stem().unwrap().to_string_lossy().into_owned()
}

fn backend() -> Backend {
    let mut b = Backend::default();
    if b.solver.is_none() && Path::new("/usr/local/bin/z3").exists() {
        b.solver = Some("/usr/local/bin/z3".into());
    }
    b
}

fn elab_file(p: &Path) -> Elaborated {
    let src = std::fs::read_to_string(p).unwrap();
    elaborate(&parse_document(&src).unwrap()).unwrap_or_else(|e| panic!("{}: {:?}", p.display(), e))
}

fn flat(stmts: &[IStmt], out: &mut Vec<IStmt>) {
    for s in stmts {
        out.push(s.clone());
        match &s.kind {
            IKind::Loop { body, .. } | IKind::Ghost(body) | IKind::InverseGhost(body) | IKind::Block(body) => {
                flat(body, out)
            }
            IKind::For(f) => flat(&f.body, out),
            IKind::Choice { branches, .. } => branches.iter().for_each(|b| flat(b, out)),
            IKind::Switch { cases, .. } => cases.iter().for_each(|c| flat(&c.body, out)),
            _ => {}
        }
    }
}

fn all(el: &Elaborated) -> Vec<IStmt> {
    let mut out = vec![];
    flat(&el.stmts, &mut out);
    out
}

fn same_value(a: &Term, b: &Term) -> bool {
    let d = Term::Sub(Box::new(a.clone()), Box::new(b.clone()));
    normalize(&d).map(|r| r.num.is_zero()).unwrap_or(false)
}

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

fn c1_corpus() -> Outcome {
    let files = corpus();
    let opts = Options { backend: backend(), ..Options::default() };
    let start = Instant::now();
    let reports = run_files(&files, &opts);
    let secs = start.elapsed().as_secs_f64();
    let bad: Vec<String> = reports
        .iter()
        .filter(|r| r.status != Status::Ok)
        .map(|r| {
            let first = r.errors().next().map(|d| format!("line {}: {}", d.span.line, d.message)).unwrap_or_default();
            format!("{} ({})", stem(Path::new(&r.path)), first)
        })
        .collect();
    let detail = format!("{} files, {} failing, {:.2} s{}", files.len(), bad.len(), secs,
        if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) });
    Outcome::new(bad.is_empty() && secs < 10.0 && files.len() >= 18, detail)
}

fn c2_labels() -> Outcome {
    let mut fails = vec![];

    let mpc = elab_file(&corpus_dir().join("mpc.kaisar"));
    let env = all(&mpc).into_iter().find_map(|s| match s.kind {
        IKind::Assume { name: Some(n), fml } if n == "env" => Some(fml),
        _ => None,
    });
    let want = parse_formula("(v + acc*T)^2/(2*B) <= d - (x + v*T + acc*T^2/2)").unwrap();
    let safe_ok = env.map(|f| {
        let f = unssa_formula(&f);
        match (f.conjuncts().last().copied(), &want) {
            (Some(Formula::Cmp(o1, a1, b1)), Formula::Cmp(o2, a2, b2)) => o1 == o2 && same_value(a1, a2) && same_value(b1, b2),
            _ => false,
        }
    });
    if safe_ok != Some(true) {
        fails.push("safe()@ode(T)");
    }

    let fin = elab_file(&corpus_dir().join("forward-final.kaisar"));
    let fin_ok = all(&fin).into_iter().any(|s| match s.kind {
        IKind::Assert { fml: Formula::Cmp(Cmp::Lt, l, r), .. } => {
            same_value(&r, &Term::Add(Box::new(l), Box::new(Term::num(3))))
        }
        _ => false,
    });
    if !fin_ok {
        fails.push("x@final");
    }

    let mid = elab_file(&corpus_dir().join("forward-mid.kaisar"));
    let mid_ok = all(&mid).into_iter().any(|s| match s.kind {
        IKind::Assign { var, rhs: Some(t), .. } if var.name == "y" => {
            let t = t.map_vars(&mut |v| (v.name == "x").then(|| Term::num(0)));
            same_value(&t, &Term::num(3))
        }
        _ => false,
    });
    if !mid_ok {
        fails.push("x@mid");
    }
    Outcome::new(fails.is_empty(), if fails.is_empty() { "all three resolve exactly".to_string() } else { format!("wrong: {}", fails.join(", ")) })
}

const MUTATIONS: &[(&str, u32)] = &[
    ("nonlinear-ghost", 2),
    ("ghost-mention", 4),
    ("cyclic-label", 1),
    ("variable-increment", 5),
    ("switch-sign", 2),
    ("angelic-assume", 5),
    ("missing-reassert", 3),
    ("rcf-non-harrop", 2),
    ("inverse-fact", 1),
    ("non-clock-duration", 7),
];

fn c3_mutations() -> Outcome {
    let opts = Options { backend: backend(), ..Options::default() };
    let dir = corpus_dir().join("mutations");
    let mut bad = vec![];
    for (name, line) in MUTATIONS {
        let r = run_file(&dir.join(format!("{}.kaisar", name)), &opts);
        let at_line = r.errors().any(|d| d.span.line == *line);
        if r.status.code() != 1 || !at_line {
            let lines: Vec<u32> = r.errors().map(|d| d.span.line).collect();
            bad.push(format!("{} (exit {}, error lines {:?})", name, r.status.code(), lines));
        }
    }
    let detail = if bad.is_empty() { format!("{} mutants rejected at the edit", MUTATIONS.len()) } else { bad.join("; ") };
    Outcome::new(bad.is_empty() && MUTATIONS.len() >= 10, detail)
}

/// Classical RK4 on `t' = 1, x' = v, v' = acc`.
fn rk4(state: [f64; 3], acc: f64, dur: f64, steps: usize) -> [f64; 3] {
    let f = |s: [f64; 3]| [1.0, s[2], acc];
    let h = dur / steps as f64;
    let mut s = state;
    let add = |s: [f64; 3], k: [f64; 3], c: f64| [s[0] + c * k[0], s[1] + c * k[1], s[2] + c * k[2]];
    for _ in 0..steps {
        let k1 = f(s);
        let k2 = f(add(s, k1, h / 2.0));
        let k3 = f(add(s, k2, h / 2.0));
        let k4 = f(add(s, k3, h));
        for i in 0..3 {
            s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    s
}

fn c4_ode() -> Outcome {
    let eqs: Vec<(Var, Term)> =
        [("t", "1"), ("x", "v"), ("v", "acc")].iter().map(|(x, t)| (Var::new(*x), parse_term(t).unwrap())).collect();
    let pre: BTreeMap<Var, Var> = ["t", "x", "v"].iter().map(|x| (Var::new(*x), Var::new(format!("{}0", x)))).collect();
    let dur = Var::new("s");
    let Some(sol) = ode::solve(&eqs, &pre, &dur) else { return Outcome::new(false, "no solution computed") };
    let identities = ode::verify_solution(&eqs, &pre, &dur, &sol);

    // the closed form, written out by hand
    let closed = [("t", "t0 + s"), ("x", "x0 + v0*s + acc*s^2/2"), ("v", "v0 + acc*s")];
    let closed_ok = closed.iter().all(|(x, t)| {
        normalize_poly(&parse_term(t).unwrap()).ok().flatten().as_ref() == sol.get(&Var::new(*x))
    });

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0f64;
    for _ in 0..20 {
        let vals: Vec<Rat> = (0..5).map(|_| rat(rng.gen_range(-2000..=2000), 200)).collect();
        let s = rat(rng.gen_range(0..=400), 200);
        let env: BTreeMap<Var, Rat> = [("t0", 0), ("x0", 1), ("v0", 2), ("acc", 3)]
            .iter()
            .map(|(n, i)| (Var::new(*n), vals[*i].clone()))
            .chain([(dur.clone(), s.clone())])
            .collect();
        let at = |x: &str| sol[&Var::new(x)].eval(&|v| env.get(v).cloned()).unwrap().to_f64().unwrap();
        let f = |r: &Rat| r.to_f64().unwrap();
        let num = rk4([f(&vals[0]), f(&vals[1]), f(&vals[2])], f(&vals[3]), f(&s), 2000);
        for (i, x) in ["t", "x", "v"].iter().enumerate() {
            worst = worst.max((at(x) - num[i]).abs());
        }
    }
    Outcome::new(
        identities && closed_ok && worst <= 1e-6,
        format!("identities {}, closed form {}, max RK4 deviation {:.2e} over 20 states", identities, closed_ok, worst),
    )
}

/// The polynomial `a - b` of the first asserted equation in the document's
/// first ODE, and that ODE's vector field with ghost equations included.
fn ode_invariant(el: &Elaborated) -> Option<(Poly, BTreeMap<Var, Poly>)> {
    all(el).into_iter().find_map(|s| match s.kind {
        IKind::Ode(o) => {
            let eqs: Vec<(Var, Term)> = o.eqs.iter().map(|e| (e.var.base(), unssa_term(&e.rhs))).collect();
            let field = ode::field(&eqs)?;
            let inv = o.dom.iter().find_map(|(d, _)| match d {
                IDom::Assert { fml, .. } => match unssa_formula(fml) {
                    Formula::Cmp(Cmp::Eq, a, b) => normalize_poly(&Term::Sub(Box::new(a), Box::new(b))).ok().flatten(),
                    _ => None,
                },
                _ => None,
            })?;
            Some((inv, field))
        }
        _ => None,
    })
}

/// `d/dh p(z + h·f(z))` at `h = 0`, exactly, from forward differences of the
/// restriction to the line, which is a polynomial of degree at most `deg`.
fn directional(p: &Poly, field: &BTreeMap<Var, Poly>, z: &BTreeMap<Var, Rat>, deg: u32) -> Rat {
    let fz: BTreeMap<Var, Rat> = field.iter().map(|(x, f)| (x.clone(), f.eval(&|v| z.get(v).cloned()).unwrap())).collect();
    let q = |h: i64| {
        let pt: BTreeMap<Var, Rat> = z
            .iter()
            .map(|(x, v)| (x.clone(), v + fz.get(x).cloned().unwrap_or_else(Rat::zero) * Rat::from_integer(h.into())))
            .collect();
        p.eval(&|v| pt.get(v).cloned()).unwrap()
    };
    let mut diffs: Vec<Rat> = (0..=deg as i64).map(q).collect();
    // q'(0) = Σ_k (-1)^(k+1) Δ^k q(0) / k
    let mut out = Rat::zero();
    for k in 1..=deg as i64 {
        diffs = diffs.windows(2).map(|w| &w[1] - &w[0]).collect();
        let term = &diffs[0] / Rat::from_integer(k.into());
        if k % 2 == 1 {
            out += term;
        } else {
            out -= term;
        }
    }
    out
}

fn c5_lie() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut details = vec![];
    let mut pass = true;
    for (file, want) in [("circle", "x^2 + y^2 - 1"), ("diff-ghost", "x*y^2 - 1")] {
        let el = elab_file(&corpus_dir().join(format!("{}.kaisar", file)));
        let Some((inv, field)) = ode_invariant(&el) else {
            details.push(format!("{}: no ODE invariant found", file));
            pass = false;
            continue;
        };
        let want = normalize_poly(&parse_term(want).unwrap()).unwrap().unwrap();
        let shape = inv == want || inv == -&want;
        let lie = lie_derivative(&inv, &field);
        let mut oracle_zero = true;
        for _ in 0..20 {
            let z: BTreeMap<Var, Rat> =
                inv.vars().into_iter().map(|v| (v, rat(rng.gen_range(-50..=50), rng.gen_range(1..=7)))).collect();
            oracle_zero &= directional(&inv, &field, &z, inv.degree()).is_zero();
        }
        pass &= shape && lie.is_zero() && oracle_zero;
        details.push(format!("{}: invariant {} lie {} oracle {}", file, shape, if lie.is_zero() { "0" } else { "nonzero" }, oracle_zero));
    }
    Outcome::new(pass, details.join("; "))
}

const BELLEROPHON_DEFS: &str = "let bounds() <-> (V > 0 & eps > 0);
let init(d, v, t) <-> (d >= 0 & bounds() & v = 0 & t = 0);
let safe(d) <-> (d >= 0);
let ctrl ::= {{{?d >= V*eps; v := V; {?0 <= v & v <= V;}^@} ++ {v := 0;}}^@};
let plant ::= {t := 0; {d' = -v, t' = 1 & t <= eps}};";

const BELLEROPHON_PROBLEM: &str =
    "init(d, v, t) -> [time := 0; {{{?(time <= 10000); ctrl; plant; time := time + 600;}^@}*}^@] safe(d)";

fn c6_refinement() -> Outcome {
    let b = backend();
    let mut bad = vec![];
    let mut unchecked = vec![];
    let files = corpus();
    for p in &files {
        let src = std::fs::read_to_string(p).unwrap();
        let el = elaborate(&parse_document(&src).unwrap()).unwrap();
        let checked = check(&el, &Config { backend: b.clone(), ..Config::default() });
        if !checked.ok() {
            unchecked.push(stem(p));
        }
        let outcome = reify(&el, &checked.facts, None, Span::default()).and_then(|c| {
            let target = parse_formula(&c.render()).map_err(|d| d)?;
            proves(&el, &c, &target, &b, Span::default())
        });
        if let Err(d) = outcome {
            bad.push(format!("{}: {}", stem(p), d.message));
        }
    }
    let pldi = std::fs::read_to_string(corpus_dir().join("pldi-tac.kaisar")).unwrap();
    let src = format!("{}\n{}", pldi, BELLEROPHON_DEFS);
    let el = elaborate(&parse_document(&src).unwrap()).unwrap();
    let checked = check(&el, &Config { backend: b.clone(), ..Config::default() });
    let plays = checked.ok()
        && reify(&el, &checked.facts, None, Span::default())
            .and_then(|c| proves(&el, &c, &parse_formula(BELLEROPHON_PROBLEM).unwrap(), &b, Span::default()))
            .is_ok();
    let mut detail = format!("{}/{} documents prove their own conclusion, the PLDI tactic proof plays the Bellerophon problem: {}", files.len() - bad.len(), files.len(), plays);
    if !unchecked.is_empty() {
        detail.push_str(&format!("; reified despite failed obligations: {}", unchecked.join(", ")));
    }
    if !bad.is_empty() {
        detail.push_str(&format!("; {}", bad.join("; ")));
    }
    Outcome::new(bad.is_empty() && plays, detail)
}

/// Rows `a·z + b >= 0` over the system's variables plus a slack `ε`.
struct Lp {
    rows: Vec<(Vec<Rat>, Rat)>,
    dim: usize,
    strict: bool,
}

fn lp(cons: &[Constraint], vars: &[Var]) -> Lp {
    let n = vars.len();
    let mut rows = vec![];
    let mut strict = false;
    let big = Rat::from_integer(10_000_000.into());
    for c in cons {
        let a: Vec<Rat> = vars.iter().map(|v| c.coeffs.get(v).cloned().unwrap_or_else(Rat::zero)).collect();
        let mut row = a.clone();
        row.push(Rat::zero());
        match c.rel {
            Rel::Ge => rows.push((row, c.constant.clone())),
            Rel::Gt => {
                strict = true;
                row[n] = -Rat::one();
                rows.push((row, c.constant.clone()));
            }
            Rel::Eq => {
                let neg: Vec<Rat> = row.iter().map(|x| -x).collect();
                rows.push((row, c.constant.clone()));
                rows.push((neg, -c.constant.clone()));
            }
        }
    }
    for i in 0..=n {
        let bound = if i == n { Rat::one() } else { big.clone() };
        for s in [Rat::one(), -Rat::one()] {
            let mut row = vec![Rat::zero(); n + 1];
            row[i] = s;
            rows.push((row, bound.clone()));
        }
    }
    Lp { rows, dim: n + 1, strict }
}

/// Unique solution of the square system `A z = -b`, if any.
fn solve_square(rows: &[&(Vec<Rat>, Rat)]) -> Option<Vec<Rat>> {
    let n = rows.len();
    let mut m: Vec<Vec<Rat>> = rows
        .iter()
        .map(|(a, b)| {
            let mut r = a.clone();
            r.push(-b.clone());
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let p = m[col][col].clone();
        for x in m[col].iter_mut() {
            *x = &*x / &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let k = m[r][col].clone();
                for c in col..=n {
                    let v = &m[col][c] * &k;
                    m[r][c] -= v;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n].clone()).collect())
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![];
    go(0, n, k, &mut vec![], &mut out);
    out
}

/// Feasibility by vertex enumeration: maximize `ε` over the boxed
/// polytope; strict rows hold with margin `ε`, so the system is feasible
/// iff the polytope is nonempty and, when some row is strict, `max ε > 0`.
fn vertex_feasible(cons: &[Constraint], vars: &[Var]) -> bool {
    let lp = lp(cons, vars);
    let mut best: Option<Rat> = None;
    for idx in subsets(lp.rows.len(), lp.dim) {
        let pick: Vec<&(Vec<Rat>, Rat)> = idx.iter().map(|&i| &lp.rows[i]).collect();
        let Some(z) = solve_square(&pick) else { continue };
        let inside = lp.rows.iter().all(|(a, b)| {
            let v: Rat = a.iter().zip(&z).map(|(x, y)| x * y).sum::<Rat>() + b;
            !v.is_negative()
        });
        if inside {
            let eps = z[lp.dim - 1].clone();
            if best.as_ref().map_or(true, |b| eps > *b) {
                best = Some(eps);
            }
        }
    }
    match best {
        None => false,
        Some(e) => !lp.strict || e.is_positive(),
    }
}

fn random_system(rng: &mut ChaCha8Rng) -> (Vec<Constraint>, Vec<Var>) {
    let vars: Vec<Var> = (0..rng.gen_range(1..=3)).map(|i| Var::new(format!("x{}", i))).collect();
    let cons = (0..rng.gen_range(1..=6))
        .map(|_| {
            let coeffs = vars
                .iter()
                .filter_map(|v| {
                    let c: i64 = rng.gen_range(-3..=3);
                    (c != 0).then(|| (v.clone(), Rat::from_integer(c.into())))
                })
                .collect();
            let rel = [Rel::Ge, Rel::Gt, Rel::Eq][rng.gen_range(0..3)];
            Constraint::new(coeffs, Rat::from_integer(rng.gen_range(-6i64..=6).into()), rel)
        })
        .collect();
    (cons, vars)
}

fn c7a_fourier_motzkin() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut agree, mut sat, mut bad_models) = (0, 0, 0);
    let mut disagreements = vec![];
    for i in 0..200 {
        let (cons, vars) = random_system(&mut rng);
        let want = vertex_feasible(&cons, &vars);
        let got = match fourier_motzkin(&cons) {
            Feasibility::Sat(env) => {
                if !cons.iter().all(|c| c.rel.holds(&c.value(&env))) {
                    bad_models += 1;
                }
                Some(true)
            }
            Feasibility::Unsat => Some(false),
            Feasibility::TooLarge => None,
        };
        if got == Some(want) {
            agree += 1;
        } else {
            disagreements.push(i);
        }
        sat += want as usize;
    }
    let detail = format!("FM agrees on {}/200 systems ({} feasible), {} bad models{}", agree, sat, bad_models,
        if disagreements.is_empty() { String::new() } else { format!(", disagreements at {:?}", disagreements) });
    (agree == 200 && bad_models == 0, detail)
}

fn ev_term(t: &Term, env: &BTreeMap<Var, Rat>) -> Option<Rat> {
    let bin = |a: &Term, b: &Term| Some((ev_term(a, env)?, ev_term(b, env)?));
    Some(match t {
        Term::Num(r) => r.clone(),
        Term::Var(v) => env.get(v)?.clone(),
        Term::Neg(a) => -ev_term(a, env)?,
        Term::Add(a, b) => bin(a, b).map(|(x, y)| x + y)?,
        Term::Sub(a, b) => bin(a, b).map(|(x, y)| x - y)?,
        Term::Mul(a, b) => bin(a, b).map(|(x, y)| x * y)?,
        Term::Div(a, b) => {
            let (x, y) = bin(a, b)?;
            if y.is_zero() {
                return None;
            }
            x / y
        }
        Term::Pow(a, e) => {
            if !e.is_integer() {
                return None;
            }
            let base = ev_term(a, env)?;
            let n = e.to_integer().to_i32()?;
            if n < 0 && base.is_zero() {
                return None;
            }
            num_traits::pow::Pow::pow(base, n)
        }
        Term::Min(a, b) => bin(a, b).map(|(x, y)| if x <= y { x } else { y })?,
        Term::Max(a, b) => bin(a, b).map(|(x, y)| if x >= y { x } else { y })?,
        Term::App(..) | Term::At(..) => return None,
    })
}

fn ev_formula(f: &Formula, env: &BTreeMap<Var, Rat>) -> Option<bool> {
    Some(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Cmp(op, a, b) => {
            let (x, y) = (ev_term(a, env)?, ev_term(b, env)?);
            match op {
                Cmp::Le => x <= y,
                Cmp::Lt => x < y,
                Cmp::Eq => x == y,
                Cmp::Ge => x >= y,
                Cmp::Gt => x > y,
                Cmp::Ne => x != y,
            }
        }
        Formula::Not(a) => !ev_formula(a, env)?,
        Formula::And(a, b) => ev_formula(a, env)? && ev_formula(b, env)?,
        Formula::Or(a, b) => ev_formula(a, env)? || ev_formula(b, env)?,
        Formula::Imply(a, b) => !ev_formula(a, env)? || ev_formula(b, env)?,
        Formula::Iff(a, b) => ev_formula(a, env)? == ev_formula(b, env)?,
        _ => return None,
    })
}

fn top_conjuncts<'f>(f: &'f Formula, out: &mut Vec<&'f Formula>) {
    match f {
        Formula::And(a, b) => {
            top_conjuncts(a, out);
            top_conjuncts(b, out);
        }
        _ => out.push(f),
    }
}

/// Samples `hyps -> goal`; equations `x = t` in the hypotheses define `x`
/// so that equational contexts are actually exercised. Returns the number
/// of samples satisfying the hypotheses, or the violating assignment.
fn sample(hyps: &[Formula], goal: &Formula, n: usize, rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let mut vars = goal.free_vars();
    hyps.iter().for_each(|h| vars.extend(h.free_vars()));
    let mut conj = vec![];
    hyps.iter().for_each(|h| top_conjuncts(h, &mut conj));
    let mut defs: Vec<(Var, Term)> = vec![];
    for c in conj {
        if let Formula::Cmp(Cmp::Eq, a, b) = c {
            for (l, r) in [(a, b), (b, a)] {
                if let Term::Var(x) = l {
                    if !r.free_vars().contains(x) && !defs.iter().any(|(y, _)| y == x) {
                        defs.push((x.clone(), r.clone()));
                        break;
                    }
                }
            }
        }
    }
    let mut relevant = 0;
    for _ in 0..n {
        let mut env: BTreeMap<Var, Rat> = vars
            .iter()
            .map(|v| {
                let num: i64 = if rng.gen_bool(0.5) { rng.gen_range(-5..=5) } else { rng.gen_range(-500..=500) };
                (v.clone(), rat(num, *[1, 1, 2, 3, 10].get(rng.gen_range(0..5)).unwrap()))
            })
            .collect();
        for _ in 0..defs.len() {
            for (x, t) in &defs {
                if let Some(v) = ev_term(t, &env) {
                    env.insert(x.clone(), v);
                }
            }
        }
        if hyps.iter().all(|h| ev_formula(h, &env) == Some(true)) {
            match ev_formula(goal, &env) {
                Some(true) => relevant += 1,
                Some(false) => {
                    let shown: Vec<String> = env.iter().map(|(x, v)| format!("{} = {}", x, v)).collect();
                    return Err(shown.join(", "));
                }
                None => {}
            }
        }
    }
    Ok(relevant)
}

fn c7b_sampling() -> (bool, String) {
    let b = backend();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut valid, mut exercised, mut samples) = (0, 0, 0);
    let mut bad = vec![];
    for p in corpus() {
        let el = elab_file(&p);
        let checked = check(&el, &Config { backend: b.clone(), ..Config::default() });
        for o in checked.obligations.iter().filter(|o| o.valid()) {
            valid += 1;
            match sample(&o.hyps, &o.goal, 1000, &mut rng) {
                Ok(n) => {
                    samples += n;
                    exercised += (n > 0) as usize;
                }
                Err(env) => bad.push(format!("{}:{} {} at {}", stem(&p), o.span.line, printer::formula(&o.goal), env)),
            }
        }
    }
    let detail = format!("{} valid corpus verdicts, {} exercised by {} satisfying samples, {} refuted{}", valid, exercised, samples, bad.len(),
        if bad.is_empty() { String::new() } else { format!(": {}", bad.join("; ")) });
    (bad.is_empty() && valid > 0, detail)
}

fn c7_arithmetic() -> Outcome {
    let (a, da) = c7a_fourier_motzkin();
    let (b, db) = c7b_sampling();
    Outcome::new(a && b, format!("{}; {}", da, db))
}

fn c8_roundtrip() -> Outcome {
    let mut files = corpus();
    files.extend(kaisar_files(&corpus_dir().join("mutations")));
    let mut bad = vec![];
    for p in &files {
        let src = std::fs::read_to_string(p).unwrap();
        let doc = parse_document(&src).unwrap();
        let text = printer::document(&doc);
        match parse_document(&text) {
            Ok(again) if again == doc && printer::document(&again) == text => {}
            _ => bad.push(stem(p)),
        }
    }
    Outcome::new(bad.is_empty(), format!("{}/{} files reach a fixpoint{}", files.len() - bad.len(), files.len(),
        if bad.is_empty() { String::new() } else { format!("; not: {}", bad.join(", ")) }))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("corpus acceptance", c1_corpus),
        ("label resolution", c2_labels),
        ("mutation rejection", c3_mutations),
        ("ODE solution identity", c4_ode),
        ("Lie derivative checks", c5_lie),
        ("refinement reflexivity", c6_refinement),
        ("arithmetic backend", c7_arithmetic),
        ("parse/print roundtrip", c8_roundtrip),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failed += !o.pass as usize;
        println!("criterion {} {}: {}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, name, o.detail);
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
