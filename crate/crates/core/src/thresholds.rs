//! Asymptotic conditions on rate functions and the resulting phase diagram.
//!
//! Rate functions are finite sums of monomials `c * ell^a * log^b * loglog^g`
//! with rational exponents; `log` is base `2m-1`. Limits of such sums follow
//! from the leading monomial in the order `(a, b, g)`, which makes every
//! symbolic verdict here exact. Numeric traces are reported alongside as a
//! heuristic cross-check.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

fn ratio_str(r: &Rational64) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn ser_ratio<S: Serializer>(r: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&ratio_str(r))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Term {
    pub coeff: f64,
    #[serde(serialize_with = "ser_ratio")]
    pub ell: Rational64,
    #[serde(serialize_with = "ser_ratio")]
    pub log: Rational64,
    #[serde(serialize_with = "ser_ratio")]
    pub loglog: Rational64,
}

impl Term {
    fn key(&self) -> (Rational64, Rational64, Rational64) {
        (self.ell, self.log, self.loglog)
    }

    fn is_constant(&self) -> bool {
        self.ell.is_zero() && self.log.is_zero() && self.loglog.is_zero()
    }

    fn eval(&self, ell: f64, m: u32) -> f64 {
        let base = f64::from(2 * m - 1).ln();
        let log = ell.ln() / base;
        let mut v = self.coeff;
        if !self.ell.is_zero() {
            v *= ell.powf(self.ell.to_f64().unwrap_or(f64::NAN));
        }
        if !self.log.is_zero() {
            v *= log.powf(self.log.to_f64().unwrap_or(f64::NAN));
        }
        if !self.loglog.is_zero() {
            v *= (log.ln() / base).powf(self.loglog.to_f64().unwrap_or(f64::NAN));
        }
        v
    }
}

/// Limit of an expression as `ell -> infinity`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "limit", content = "value", rename_all = "kebab-case")]
pub enum Limit {
    PosInfinity,
    NegInfinity,
    Finite(f64),
    Indeterminate,
}

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Limit::PosInfinity => write!(f, "+inf"),
            Limit::NegInfinity => write!(f, "-inf"),
            Limit::Finite(v) => write!(f, "{v}"),
            Limit::Indeterminate => write!(f, "indeterminate"),
        }
    }
}

/// A finite sum of monomials, kept merged and sorted by decreasing growth.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Expr {
    terms: Vec<Term>,
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::default()
    }

    pub fn constant(c: f64) -> Expr {
        Expr::monomial(c, 0, 0, 0)
    }

    /// `c * ell^a * log^b * loglog^g` with integer exponents.
    pub fn monomial(c: f64, a: i64, b: i64, g: i64) -> Expr {
        Expr::term(c, Rational64::from(a), Rational64::from(b), Rational64::from(g))
    }

    pub fn term(c: f64, ell: Rational64, log: Rational64, loglog: Rational64) -> Expr {
        Expr::from_terms(vec![Term { coeff: c, ell, log, loglog }])
    }

    pub fn from_terms(mut raw: Vec<Term>) -> Expr {
        raw.sort_by_key(|t| std::cmp::Reverse(t.key()));
        let mut terms: Vec<Term> = Vec::new();
        let mut scale: Vec<f64> = Vec::new();
        for t in raw {
            match terms.last_mut() {
                Some(last) if last.key() == t.key() => {
                    last.coeff += t.coeff;
                    *scale.last_mut().expect("parallel") += t.coeff.abs();
                }
                _ => {
                    scale.push(t.coeff.abs());
                    terms.push(t);
                }
            }
        }
        let terms = terms
            .into_iter()
            .zip(scale)
            .filter(|(t, s)| t.coeff != 0.0 && t.coeff.abs() > 1e-12 * s)
            .map(|(t, _)| t)
            .collect();
        Expr { terms }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<&Term> {
        self.terms.first()
    }

    /// The single term, if the expression is a monomial.
    pub fn as_monomial(&self) -> Option<&Term> {
        match self.terms.as_slice() {
            [t] => Some(t),
            _ => None,
        }
    }

    pub fn add(&self, other: &Expr) -> Expr {
        Expr::from_terms(self.terms.iter().chain(&other.terms).copied().collect())
    }

    pub fn scale(&self, c: f64) -> Expr {
        Expr::from_terms(self.terms.iter().map(|t| Term { coeff: t.coeff * c, ..*t }).collect())
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        let mut out = Vec::new();
        for x in &self.terms {
            for y in &other.terms {
                out.push(Term {
                    coeff: x.coeff * y.coeff,
                    ell: x.ell + y.ell,
                    log: x.log + y.log,
                    loglog: x.loglog + y.loglog,
                });
            }
        }
        Expr::from_terms(out)
    }

    /// Eventual sign: `Equal` only for the zero expression.
    pub fn eventual_sign(&self) -> Ordering {
        match self.leading() {
            None => Ordering::Equal,
            Some(t) => t.coeff.partial_cmp(&0.0).unwrap_or(Ordering::Equal),
        }
    }

    pub fn limit(&self) -> Limit {
        match self.leading() {
            None => Limit::Finite(0.0),
            Some(t) => match t.key().cmp(&Default::default()) {
                Ordering::Greater if t.coeff > 0.0 => Limit::PosInfinity,
                Ordering::Greater => Limit::NegInfinity,
                Ordering::Equal => Limit::Finite(t.coeff),
                Ordering::Less => Limit::Finite(0.0),
            },
        }
    }

    /// Tends to zero.
    pub fn is_o1(&self) -> bool {
        self.leading().is_none_or(|t| t.key() < Default::default())
    }

    /// Value at `ell` with logs in base `2m-1`; needs `log ell > 1` when a
    /// `loglog` factor is present.
    pub fn eval(&self, ell: f64, m: u32) -> f64 {
        self.terms.iter().map(|t| t.eval(ell, m)).sum()
    }
}

fn fmt_exp(name: &str, e: &Rational64, out: &mut Vec<String>) {
    if e.is_zero() {
        return;
    }
    if *e == Rational64::from(1) {
        out.push(name.to_string());
    } else if e.is_integer() && e.is_positive() {
        out.push(format!("{name}^{}", ratio_str(e)));
    } else {
        out.push(format!("{name}^({})", ratio_str(e)));
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let mut factors = Vec::new();
            let c = t.coeff.abs();
            if c != 1.0 || t.is_constant() {
                factors.push(format!("{c}"));
            }
            fmt_exp("ell", &t.ell, &mut factors);
            fmt_exp("log", &t.log, &mut factors);
            fmt_exp("loglog", &t.loglog, &mut factors);
            let sign = if t.coeff < 0.0 { "-" } else { "+" };
            match (i, sign) {
                (0, "+") => write!(f, "{}", factors.join("*"))?,
                (0, _) => write!(f, "-{}", factors.join("*"))?,
                _ => write!(f, " {sign} {}", factors.join("*"))?,
            }
        }
        Ok(())
    }
}

/// `c0 * log^beta / ell^alpha`.
pub fn param_family(alpha: Rational64, beta: Rational64, c0: f64) -> Expr {
    Expr::term(c0, -alpha, beta, Rational64::zero())
}

/// `log ell / (4 ell) - log log ell / ell`: at or below it, trivial.
pub fn trivial_threshold() -> Expr {
    Expr::monomial(0.25, -1, 1, 0).add(&Expr::monomial(-1.0, -1, 0, 1))
}

/// `10^5 log^(1/3) ell / ell^(1/3)`: at or above it, hyperbolic.
pub fn hyperbolic_threshold() -> Expr {
    param_family(Rational64::new(1, 3), Rational64::new(1, 3), 1e5)
}

/// `k = log ell / 2 - log log ell`.
pub fn corollary_k() -> Expr {
    Expr::monomial(0.5, 0, 1, 0).add(&Expr::monomial(-1.0, 0, 0, 1))
}

/// `K = c' ell^(1/3) / log^(1/3) ell`.
pub fn k_hyperbolicity(c_prime: f64) -> Expr {
    Expr::term(c_prime, Rational64::new(1, 3), Rational64::new(-1, 3), Rational64::zero())
}

/// `K = ell^(1/3) / log^(2/3) ell`.
pub fn k_delta() -> Expr {
    Expr::term(1.0, Rational64::new(1, 3), Rational64::new(-2, 3), Rational64::zero())
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::InvalidParams(msg.into())
}

fn parse_decimal(s: &str) -> Result<Rational64> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() {
        return Err(parse_err(format!("empty number in {s:?}")));
    }
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 12 {
        return Err(parse_err(format!("not a plain decimal: {s:?}")));
    }
    let den = 10i64.pow(frac.len() as u32);
    let int_v: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| parse_err(format!("bad number {s:?}")))? };
    let frac_v: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| parse_err(format!("bad number {s:?}")))? };
    let v = int_v
        .checked_mul(den)
        .and_then(|x| x.checked_add(frac_v))
        .ok_or_else(|| parse_err(format!("number out of range: {s:?}")))?;
    Ok(Rational64::new(if neg { -v } else { v }, den))
}

/// `p/q`, an integer, or a decimal.
pub fn parse_rational(s: &str) -> Result<Rational64> {
    let s = s.trim().trim_start_matches('(').trim_end_matches(')');
    match s.split_once('/') {
        Some((p, q)) => {
            let (p, q) = (parse_decimal(p)?, parse_decimal(q)?);
            if q.is_zero() {
                return Err(parse_err("zero denominator"));
            }
            Ok(p / q)
        }
        None => parse_decimal(s),
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let n = rest.find(|c: char| !c.is_ascii_alphabetic()).unwrap_or(rest.len());
        (n > 0).then(|| {
            self.pos += n;
            &rest[..n]
        })
    }

    fn number(&mut self) -> Option<f64> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let mut n = 0;
        let bytes = rest.as_bytes();
        while n < bytes.len() && (bytes[n].is_ascii_digit() || bytes[n] == b'.') {
            n += 1;
        }
        if n == 0 {
            return None;
        }
        if n < bytes.len() && (bytes[n] == b'e' || bytes[n] == b'E') {
            let mut k = n + 1;
            if k < bytes.len() && (bytes[k] == b'-' || bytes[k] == b'+') {
                k += 1;
            }
            let digits = bytes[k..].iter().take_while(|b| b.is_ascii_digit()).count();
            if digits > 0 {
                n = k + digits;
            }
        }
        let v = rest[..n].parse().ok()?;
        self.pos += n;
        Some(v)
    }

    fn exponent(&mut self) -> Result<Rational64> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let n = if rest.starts_with('(') {
            rest.find(')').map(|i| i + 1).ok_or_else(|| parse_err("unclosed exponent"))?
        } else {
            let mut n = usize::from(rest.starts_with('-'));
            n += rest[n..].find(|c: char| !(c.is_ascii_digit() || c == '.')).unwrap_or(rest.len() - n);
            n
        };
        let r = parse_rational(&rest[..n])?;
        self.pos += n;
        Ok(r)
    }

    fn factor(&mut self) -> Result<Expr> {
        if let Some(v) = self.number() {
            if self.eat('^') {
                let e = self.exponent()?.to_f64().unwrap_or(f64::NAN);
                return Ok(Expr::constant(v.powf(e)));
            }
            return Ok(Expr::constant(v));
        }
        if self.eat('(') {
            let e = self.expr()?;
            if !self.eat(')') {
                return Err(parse_err("missing ')'"));
            }
            return Ok(e);
        }
        let name = self.ident().ok_or_else(|| parse_err(format!("unexpected input at {:?}", &self.src[self.pos..])))?;
        let e = if self.eat('^') { self.exponent()? } else { Rational64::from(1) };
        let z = Rational64::zero();
        Ok(match name {
            "ell" | "l" => Expr::term(1.0, e, z, z),
            "log" => Expr::term(1.0, z, e, z),
            "loglog" => Expr::term(1.0, z, z, e),
            other => return Err(parse_err(format!("unknown symbol {other:?}; use ell, log, loglog"))),
        })
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.factor()?);
            } else if self.eat('/') {
                let d = self.factor()?;
                let t = d.as_monomial().ok_or_else(|| parse_err("can only divide by a single monomial"))?;
                acc = acc.mul(&Expr::term(1.0 / t.coeff, -t.ell, -t.log, -t.loglog));
            } else {
                return Ok(acc);
            }
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = if self.eat('-') { self.term()?.scale(-1.0) } else { self.term()? };
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }
}

impl FromStr for Expr {
    type Err = Error;

    /// Keywords `zero`, `trivial-threshold`, `hyperbolic-threshold`,
    /// `corollary-k`, `param:ALPHA,BETA,C0`, or a sum of products of numbers
    /// and `ell^r`, `log^r`, `loglog^r` (`r` rational, e.g. `(-1/3)`).
    fn from_str(s: &str) -> Result<Expr> {
        let s = s.trim();
        match s {
            "zero" | "0" => return Ok(Expr::zero()),
            "trivial-threshold" => return Ok(trivial_threshold()),
            "hyperbolic-threshold" => return Ok(hyperbolic_threshold()),
            "corollary-k" => return Ok(corollary_k()),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("param:") {
            let parts: Vec<&str> = rest.split(',').collect();
            let [a, b, c] = parts.as_slice() else {
                return Err(parse_err("param needs ALPHA,BETA,C0"));
            };
            let c0: f64 = c.trim().parse().map_err(|_| parse_err(format!("bad coefficient {c:?}")))?;
            return Ok(param_family(parse_rational(a)?, parse_rational(b)?, c0));
        }
        let mut p = Parser { src: s, pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != s.len() {
            return Err(parse_err(format!("trailing input {:?}", &s[p.pos..])));
        }
        Ok(e)
    }
}

/// `ell = 2^j` for `10 <= j <= 40`.
pub fn default_grid() -> Vec<f64> {
    (10..=40).map(|j| 2f64.powi(j)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TracePoint {
    pub ell: f64,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Increasing,
    Decreasing,
    Mixed,
}

/// Direction of the last `window` points of a trace.
pub fn trend(trace: &[TracePoint], window: usize) -> Trend {
    let tail = &trace[trace.len().saturating_sub(window)..];
    let diffs: Vec<f64> = tail.windows(2).map(|w| w[1].value - w[0].value).collect();
    if !diffs.is_empty() && diffs.iter().all(|&d| d > 0.0) {
        Trend::Increasing
    } else if !diffs.is_empty() && diffs.iter().all(|&d| d < 0.0) {
        Trend::Decreasing
    } else {
        Trend::Mixed
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: &'static str,
    /// Expression whose limit decides the condition.
    pub symbolic: Expr,
    pub terms: Vec<(String, Expr)>,
    pub limit: Limit,
    /// Whether the condition (divergence in the required direction) holds.
    pub holds: Option<bool>,
    pub trace: Vec<TracePoint>,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|&l| !(l.is_finite() && l >= 16.0)) {
        return Err(Error::InvalidParams("grid points must be finite and at least 16".into()));
    }
    Ok(())
}

/// `k - 2 ell f -> +inf`.
pub fn star_condition(k: &Expr, f: &Expr, grid: &[f64], m: u32) -> Result<ConditionReport> {
    check_grid(grid)?;
    let ell = Expr::monomial(1.0, 1, 0, 0);
    if ell.sub(k).eventual_sign() == Ordering::Less || grid.iter().any(|&l| k.eval(l, m) > l) {
        return Err(Error::Precondition(format!("k = {k} exceeds ell")));
    }
    let two_ell_f = ell.mul(f).scale(2.0);
    let symbolic = k.sub(&two_ell_f);
    let limit = symbolic.limit();
    let trace = grid.iter().map(|&l| TracePoint { ell: l, value: k.eval(l, m) - 2.0 * l * f.eval(l, m) }).collect();
    Ok(ConditionReport {
        condition: "star",
        terms: vec![("k".into(), k.clone()), ("-2 ell f".into(), two_ell_f.scale(-1.0))],
        holds: Some(limit == Limit::PosInfinity),
        symbolic,
        limit,
        trace,
    })
}

/// `b = (ell - 2) / ((2k+2)(2m-1)^(2k)) -> +inf`, decided through
/// `log b = log(ell-2) - log(2k+2) - 2k`.
pub fn spade_condition(k: &Expr, m: u32, grid: &[f64]) -> Result<ConditionReport> {
    check_grid(grid)?;
    let base = f64::from(2 * m - 1).ln();
    let lead = k.leading().copied();
    // log(2k + 2) up to o(1): for growing k it is log 2c + a log + b loglog
    // plus g log loglog, which has no monomial form.
    let (log_2k2, dropped_logloglog) = match lead {
        Some(t) if t.key() > Default::default() => {
            if t.coeff <= 0.0 {
                return Err(Error::Precondition(format!("k = {k} is eventually negative")));
            }
            let z = Rational64::zero();
            let e = Expr::constant((2.0 * t.coeff).ln() / base)
                .add(&Expr::term(t.ell.to_f64().unwrap_or(f64::NAN), z, Rational64::from(1), z))
                .add(&Expr::term(t.log.to_f64().unwrap_or(f64::NAN), z, z, Rational64::from(1)));
            (e, !t.loglog.is_zero())
        }
        _ => {
            let c = match k.limit() {
                Limit::Finite(c) => c,
                _ => 0.0,
            };
            (Expr::constant((2.0 * c + 2.0).ln() / base), false)
        }
    };
    let log_ell = Expr::monomial(1.0, 0, 1, 0);
    let two_k = k.scale(-2.0);
    let symbolic = log_ell.sub(&log_2k2).add(&two_k);
    let mut limit = symbolic.limit();
    let sym_lead_key = symbolic.leading().map(|t| t.key()).unwrap_or_default();
    if dropped_logloglog && sym_lead_key <= (Rational64::zero(), Rational64::zero(), Rational64::from(1)) {
        limit = Limit::Indeterminate;
    }
    let trace = grid
        .iter()
        .map(|&l| {
            let kv = k.eval(l, m);
            TracePoint { ell: l, value: ((l - 2.0).ln() - (2.0 * kv + 2.0).ln()) / base - 2.0 * kv }
        })
        .collect();
    Ok(ConditionReport {
        condition: "spade",
        terms: vec![
            ("log(ell-2)".into(), log_ell),
            ("-log(2k+2)".into(), log_2k2.scale(-1.0)),
            ("-2k".into(), two_k),
        ],
        holds: match limit {
            Limit::Indeterminate => None,
            l => Some(l == Limit::PosInfinity),
        },
        symbolic,
        limit,
        trace,
    })
}

/// `3000 K^2 log(K ell) + 10^4 ell / K - ell f -> -inf`, with `K` a single
/// monomial without a `loglog` factor.
pub fn asterisk_condition(big_k: &Expr, f: &Expr, grid: &[f64], m: u32) -> Result<ConditionReport> {
    check_grid(grid)?;
    let t = big_k
        .as_monomial()
        .filter(|t| t.coeff > 0.0 && t.loglog.is_zero())
        .ok_or_else(|| Error::Precondition(format!("K = {big_k} must be a positive monomial without loglog")))?;
    let base = f64::from(2 * m - 1).ln();
    let z = Rational64::zero();
    let one = Rational64::from(1);
    // log(K ell) = log c' + (a+1) log + b loglog, exactly
    let log_k_ell = Expr::constant(t.coeff.ln() / base)
        .add(&Expr::term((t.ell + one).to_f64().unwrap_or(f64::NAN), z, one, z))
        .add(&Expr::term(t.log.to_f64().unwrap_or(f64::NAN), z, z, one));
    let first = big_k.mul(big_k).mul(&log_k_ell).scale(3000.0);
    let second = Expr::term(1e4 / t.coeff, one - t.ell, -t.log, z);
    let ell = Expr::monomial(1.0, 1, 0, 0);
    let third = ell.mul(f).scale(-1.0);
    let symbolic = first.add(&second).add(&third);
    let limit = symbolic.limit();
    let trace = grid
        .iter()
        .map(|&l| {
            let kv = big_k.eval(l, m);
            let value = 3000.0 * kv * kv * (kv * l).ln() / base + 1e4 * l / kv - l * f.eval(l, m);
            TracePoint { ell: l, value }
        })
        .collect();
    Ok(ConditionReport {
        condition: "asterisk",
        terms: vec![
            ("3000 K^2 log(K ell)".into(), first),
            ("10^4 ell / K".into(), second),
            ("-ell f".into(), third),
        ],
        holds: Some(limit == Limit::NegInfinity),
        symbolic,
        limit,
        trace,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Trivial,
    Hyperbolic,
    Unknown,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Trivial => "trivial",
            Phase::Hyperbolic => "hyperbolic",
            Phase::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseVerdict {
    pub outcome: Phase,
    pub clause: String,
}

/// Phase of `f = c0 log^beta / ell^alpha` by comparing `f` with the two
/// thresholds through their leading monomials.
pub fn classify_phase(alpha: Rational64, beta: Rational64, c0: f64) -> Result<PhaseVerdict> {
    if !c0.is_finite() {
        return Err(Error::InvalidParams("coefficient must be finite".into()));
    }
    if c0 == 0.0 {
        return Ok(PhaseVerdict { outcome: Phase::Trivial, clause: "f = 0: density exactly one half".into() });
    }
    classify_rate(&param_family(alpha, beta, c0))
}

/// Phase of an arbitrary rate expression `f`.
pub fn classify_rate(f: &Expr) -> Result<PhaseVerdict> {
    if f.is_zero() {
        return Ok(PhaseVerdict { outcome: Phase::Trivial, clause: "f = 0: density exactly one half".into() });
    }
    if f.eventual_sign() == Ordering::Less {
        return Ok(PhaseVerdict { outcome: Phase::Trivial, clause: format!("f = {f} < 0: density above one half") });
    }
    if !f.is_o1() {
        return Err(Error::InvalidParams(format!("f = {f} does not tend to 0")));
    }
    let above = f.sub(&hyperbolic_threshold());
    if above.eventual_sign() != Ordering::Less {
        return Ok(PhaseVerdict {
            outcome: Phase::Hyperbolic,
            clause: format!("f - 10^5 log^(1/3)/ell^(1/3) = {above} is eventually >= 0"),
        });
    }
    let below = trivial_threshold().sub(f);
    if below.eventual_sign() != Ordering::Less {
        return Ok(PhaseVerdict {
            outcome: Phase::Trivial,
            clause: format!("log/(4 ell) - loglog/ell - f = {below} is eventually >= 0"),
        });
    }
    Ok(PhaseVerdict {
        outcome: Phase::Unknown,
        clause: format!("f = {f} lies strictly between the two thresholds"),
    })
}

/// Inclusive `start:stop:step` grid parsed exactly.
pub fn parse_range(spec: &str) -> Result<Vec<Rational64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(parse_err(format!("range {spec:?} must be start:stop:step")));
    };
    let (start, stop, step) = (parse_rational(start)?, parse_rational(stop)?, parse_rational(step)?);
    if !step.is_positive() || stop < start {
        return Err(parse_err(format!("range {spec:?} needs step > 0 and stop >= start")));
    }
    let count = ((stop - start) / step).floor().to_integer();
    if count > 1_000_000 {
        return Err(Error::ResourceLimit { what: "grid points", needed: count as u128, budget: 1_000_000 });
    }
    Ok((0..=count).map(|i| start + step * Rational64::from(i)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseCell {
    #[serde(serialize_with = "ser_ratio")]
    pub alpha: Rational64,
    #[serde(serialize_with = "ser_ratio")]
    pub beta: Rational64,
    /// `None` when `f` does not tend to zero.
    pub verdict: Option<PhaseVerdict>,
}

pub fn phase_map(alphas: &[Rational64], betas: &[Rational64], c0: f64) -> Vec<PhaseCell> {
    let cells: Vec<(Rational64, Rational64)> =
        alphas.iter().flat_map(|&a| betas.iter().map(move |&b| (a, b))).collect();
    crate::rng::map_indices(cells.len(), |i| {
        let (alpha, beta) = cells[i];
        PhaseCell { alpha, beta, verdict: classify_phase(alpha, beta, c0).ok() }
    })
}

fn check_kappa(kappa: f64, n: u64) -> Result<()> {
    if n == 0 || !(kappa * n as f64 > 1.0) {
        return Err(Error::Precondition(format!("need kappa > 1/N, got kappa = {kappa}, N = {n}")));
    }
    Ok(())
}

/// `delta = 120 kappa^2 N^3`.
pub fn delta_constant(kappa: f64, n: u64) -> Result<f64> {
    check_kappa(kappa, n)?;
    let n = n as f64;
    Ok(120.0 * kappa * kappa * n * n * n)
}

/// Area above which the linear inequality is required: `18 kappa^2 N^2`.
pub fn corollary_area_threshold(kappa: f64, n: u64) -> Result<f64> {
    check_kappa(kappa, n)?;
    let n = n as f64;
    Ok(18.0 * kappa * kappa * n * n)
}

/// `delta` with `kappa = c'' ell^(-2/3)` and `N = ell`.
pub fn delta_for_ell(ell: u64, c2: f64) -> Result<f64> {
    delta_constant(c2 * (ell as f64).powf(-2.0 / 3.0), ell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(p: i64, q: i64) -> Rational64 {
        Rational64::new(p, q)
    }

    #[test]
    fn parse_and_display() {
        let e: Expr = "0.5*log - loglog".parse().unwrap();
        assert_eq!(e, corollary_k());
        let f: Expr = "log/(4*ell) - loglog/ell".parse().unwrap();
        assert_eq!(f, trivial_threshold());
        let h: Expr = "1e5*ell^(-1/3)*log^(1/3)".parse().unwrap();
        assert_eq!(h, hyperbolic_threshold());
        assert_eq!("10^5 * log^(1/3) / ell^(1/3)".parse::<Expr>().unwrap(), h);
        assert_eq!("param:1/3,1/3,100000".parse::<Expr>().unwrap(), h);
        assert_eq!(corollary_k().to_string(), "0.5*log - loglog");
        assert!("ell + foo".parse::<Expr>().is_err());
        assert!("ell / (ell + 1)".parse::<Expr>().is_err());
        for s in ["0.25*ell - 3", "2*ell^(1/3)*log^(-2/3)", "-loglog + 7", "0"] {
            let e: Expr = s.parse().unwrap();
            assert_eq!(e.to_string().parse::<Expr>().unwrap(), e);
        }
    }

    #[test]
    fn star_examples() {
        let grid = default_grid();
        let rep = star_condition(&corollary_k(), &trivial_threshold(), &grid, 2).unwrap();
        assert_eq!(rep.symbolic, Expr::monomial(1.0, 0, 0, 1));
        assert_eq!(rep.limit, Limit::PosInfinity);
        assert_eq!(trend(&rep.trace, 30), Trend::Increasing);
        let flat = star_condition(&Expr::constant(3.0), &Expr::zero(), &grid, 2).unwrap();
        assert_eq!(flat.limit, Limit::Finite(3.0));
        let neg = star_condition(&Expr::monomial(0.5, 0, 1, 0), &Expr::monomial(1.0, -1, 1, 0), &grid, 2).unwrap();
        assert_eq!(neg.symbolic, Expr::monomial(-1.5, 0, 1, 0));
        assert_eq!(neg.limit, Limit::NegInfinity);
        assert!(star_condition(&Expr::monomial(2.0, 1, 0, 0), &Expr::zero(), &grid, 2).is_err());
    }

    #[test]
    fn spade_examples() {
        let grid = default_grid();
        let rep = spade_condition(&corollary_k(), 2, &grid).unwrap();
        // log b = loglog - C
        assert_eq!(rep.symbolic.leading().unwrap().key(), (r(0, 1), r(0, 1), r(1, 1)));
        assert_eq!(rep.symbolic.leading().unwrap().coeff, 1.0);
        assert_eq!(rep.limit, Limit::PosInfinity);
        let steep = spade_condition(&Expr::monomial(0.25, 1, 0, 0), 2, &grid).unwrap();
        assert_eq!(steep.limit, Limit::NegInfinity);
        assert_eq!(steep.holds, Some(false));
        let one = spade_condition(&Expr::constant(1.0), 2, &grid).unwrap();
        assert_eq!(one.limit, Limit::PosInfinity);
        assert_eq!(trend(&one.trace, 30), Trend::Increasing);
        let odd = spade_condition(&Expr::monomial(1.0, 0, 0, 1), 2, &grid).unwrap();
        assert_eq!(odd.limit, Limit::PosInfinity);
    }

    #[test]
    fn asterisk_examples() {
        let grid = default_grid();
        let f = param_family(r(1, 3), r(1, 3), 1e5);
        let rep = asterisk_condition(&k_hyperbolicity(1.0), &f, &grid, 2).unwrap();
        let lead = rep.symbolic.leading().unwrap();
        assert_eq!(lead.key(), (r(2, 3), r(1, 3), r(0, 1)));
        assert!((lead.coeff - (4000.0 + 1e4 - 1e5)).abs() < 1e-6);
        assert_eq!(rep.limit, Limit::NegInfinity);
        let zero = asterisk_condition(&k_hyperbolicity(1.0), &Expr::zero(), &grid, 2).unwrap();
        assert_eq!(zero.limit, Limit::PosInfinity);
        // 4000 c'^2 + 10^4 / c' = 14000 > 10^4
        let weak = asterisk_condition(&k_hyperbolicity(1.0), &param_family(r(1, 3), r(1, 3), 1e4), &grid, 2).unwrap();
        assert_eq!(weak.limit, Limit::PosInfinity);
        assert!(asterisk_condition(&corollary_k(), &f, &grid, 2).is_err());
    }

    #[test]
    fn named_functions() {
        assert_eq!(classify_phase(r(1, 3), r(1, 3), 1e5).unwrap().outcome, Phase::Hyperbolic);
        assert_eq!(classify_phase(r(1, 3), r(1, 3), 9.9e4).unwrap().outcome, Phase::Unknown);
        assert_eq!(classify_phase(r(1, 1), r(1, 2), 7.0).unwrap().outcome, Phase::Trivial);
        assert_eq!(classify_phase(r(1, 2), r(0, 1), 1.0).unwrap().outcome, Phase::Unknown);
        assert_eq!(classify_phase(r(1, 1), r(1, 1), 1.0).unwrap().outcome, Phase::Unknown);
        assert_eq!(classify_phase(r(1, 1), r(1, 1), 0.25).unwrap().outcome, Phase::Unknown);
        assert_eq!(classify_phase(r(1, 1), r(1, 1), 0.2).unwrap().outcome, Phase::Trivial);
        assert_eq!(classify_phase(r(2, 1), r(5, 1), 1e9).unwrap().outcome, Phase::Trivial);
        assert_eq!(classify_phase(r(1, 4), r(-3, 1), 1e-9).unwrap().outcome, Phase::Hyperbolic);
        assert_eq!(classify_phase(r(0, 1), r(-1, 1), 1.0).unwrap().outcome, Phase::Hyperbolic);
        assert!(classify_phase(r(0, 1), r(0, 1), 1.0).is_err());
        assert_eq!(classify_phase(r(0, 1), r(0, 1), 0.0).unwrap().outcome, Phase::Trivial);
        assert_eq!(classify_rate(&trivial_threshold()).unwrap().outcome, Phase::Trivial);
        assert_eq!(classify_rate(&hyperbolic_threshold()).unwrap().outcome, Phase::Hyperbolic);
        assert_eq!(classify_rate(&Expr::zero()).unwrap().outcome, Phase::Trivial);
    }

    #[test]
    fn map_regions() {
        let alphas = parse_range("0:1.5:0.05").unwrap();
        let betas = parse_range("-1:2:0.05").unwrap();
        assert_eq!(alphas.len(), 31);
        assert_eq!(alphas[20], r(1, 1));
        let cells = phase_map(&alphas, &betas, 1.0);
        for c in &cells {
            let Some(v) = &c.verdict else {
                assert!(c.alpha.is_zero() && !c.beta.is_negative());
                continue;
            };
            let expect = if c.alpha < r(1, 3) {
                Phase::Hyperbolic
            } else if c.alpha > r(1, 1) || (c.alpha == r(1, 1) && c.beta < r(1, 1)) {
                Phase::Trivial
            } else {
                Phase::Unknown
            };
            assert_eq!(v.outcome, expect, "alpha {} beta {}", c.alpha, c.beta);
        }
    }

    #[test]
    fn delta_values() {
        assert!(delta_constant(1.0, 1).is_err());
        assert_eq!(delta_constant(1.0, 2).unwrap(), 960.0);
        assert_eq!(corollary_area_threshold(1.0, 2).unwrap(), 72.0);
        let base = delta_for_ell(1000, 1.0).unwrap() / 1000f64.powf(5.0 / 3.0);
        for e in 3..=9 {
            let l = 10u64.pow(e);
            let ratio = delta_for_ell(l, 1.0).unwrap() / (l as f64).powf(5.0 / 3.0);
            assert!(((ratio - base) / base).abs() < 1e-12);
        }
    }

    #[test]
    fn range_parsing() {
        assert_eq!(parse_range("0:1:0.5").unwrap(), vec![r(0, 1), r(1, 2), r(1, 1)]);
        assert_eq!(parse_range("-1/3:1/3:1/3").unwrap().len(), 3);
        assert!(parse_range("1:0:0.1").is_err());
        assert!(parse_range("0:1:0").is_err());
        assert!(parse_range("0:1").is_err());
    }

    fn small_ratio() -> impl Strategy<Value = Rational64> {
        (-24i64..=48, 1i64..=12).prop_map(|(p, q)| Rational64::new(p, q))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]

        #[test]
        fn monotone_phases(a in small_ratio(), b in small_ratio(), da in small_ratio(), db in small_ratio(), c in 1e-3f64..1e6) {
            let a = a.abs();
            let (da, db) = (da.abs(), db.abs());
            let Ok(v) = classify_phase(a, b, c) else { return Ok(()); };
            if v.outcome == Phase::Trivial {
                for (a2, b2) in [(a + da + r(1, 100), b + db), (a, b - db)] {
                    prop_assert_eq!(classify_phase(a2, b2, c).unwrap().outcome, Phase::Trivial);
                }
            }
            if v.outcome == Phase::Hyperbolic {
                let a2 = a - da - r(1, 100);
                if a2 > r(0, 1) {
                    prop_assert_eq!(classify_phase(a2, b + db, c).unwrap().outcome, Phase::Hyperbolic);
                }
                prop_assert_eq!(classify_phase(a, b + db, c).map(|v| v.outcome).unwrap_or(Phase::Hyperbolic), Phase::Hyperbolic);
            }
        }

        #[test]
        fn expr_eval_is_additive(c1 in -5.0f64..5.0, c2 in -5.0f64..5.0, a in -6i64..6, b in -6i64..6, ell in 100f64..1e9) {
            let (a, b) = (Rational64::new(a, 3), Rational64::new(b, 2));
            let x = Expr::term(c1, a, b, Rational64::zero());
            let y = Expr::term(c2, b, a, Rational64::from(1));
            let sum = x.add(&y).eval(ell, 2);
            let direct = x.eval(ell, 2) + y.eval(ell, 2);
            prop_assert!((sum - direct).abs() <= 1e-9 * (1.0 + direct.abs()));
        }
    }
}
