//! Line-oriented model text format.
//!
//! ```text
//! #vars
//! x continuous 0 inf
//! y binary 0 1
//! #obj
//! max 3*x + 2*y
//! #cons
//! c1: 1*x + 1*y <= 4
//! c2: 2*x + CONE(0.2; 1*x, 3*y; 100) <= 10
//! ```
//!
//! Numbers are written with Rust's shortest round-trip representation, so
//! `import_text(&export_text(m))` reproduces every coefficient exactly.

use std::fmt::Write as _;

use super::{ConeTerm, LinExpr, Model, ObjSense, Sense, VarId, VarKind};
use crate::error::{Error, Result};

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn write_expr(out: &mut String, model: &Model, expr: &LinExpr) {
    let mut first = true;
    for &(var, coef) in expr.terms() {
        let name = model.variable(var).name();
        if first {
            let _ = write!(out, "{}*{}", num(coef), name);
            first = false;
        } else if coef.is_sign_negative() {
            let _ = write!(out, " - {}*{}", num(-coef), name);
        } else {
            let _ = write!(out, " + {}*{}", num(coef), name);
        }
    }
    let c = expr.constant_term();
    if first {
        out.push_str(&num(c));
    } else if c != 0.0 {
        if c.is_sign_negative() {
            let _ = write!(out, " - {}", num(-c));
        } else {
            let _ = write!(out, " + {}", num(c));
        }
    }
}

pub fn export_text(model: &Model) -> String {
    let mut out = String::from("#vars\n");
    for v in model.variables() {
        let _ = writeln!(
            out,
            "{} {} {} {}",
            v.name(),
            v.kind().as_str(),
            num(v.lower()),
            num(v.upper())
        );
    }
    out.push_str("#obj\n");
    out.push_str(match model.objective().sense {
        ObjSense::Maximize => "max ",
        ObjSense::Minimize => "min ",
    });
    write_expr(&mut out, model, &model.objective().expr);
    out.push_str("\n#cons\n");
    for con in model.constraints() {
        let _ = write!(out, "{}: ", con.label());
        write_expr(&mut out, model, con.lhs());
        if let Some(cone) = con.cone() {
            let comps: Vec<String> = cone
                .components()
                .iter()
                .map(|&(v, c)| format!("{}*{}", num(c), model.variable(v).name()))
                .collect();
            let _ = write!(
                out,
                " + CONE({}; {}; {})",
                num(cone.scale()),
                comps.join(", "),
                num(cone.constant_inside())
            );
        }
        let _ = writeln!(out, " {} {}", con.sense().symbol(), num(con.rhs()));
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Star,
    Plus,
    Minus,
    Colon,
    Semi,
    Comma,
    LParen,
    RParen,
    Sense(Sense),
}

struct Lexed {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    end_col: usize,
}

fn lex(line_no: usize, text: &str) -> Result<Lexed> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '*' => Some(Tok::Star),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            ':' => Some(Tok::Colon),
            ';' => Some(Tok::Semi),
            ',' => Some(Tok::Comma),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '=' => Some(Tok::Sense(Sense::Eq)),
            _ => None,
        };
        if let Some(t) = single {
            toks.push((t, col));
            i += 1;
        } else if c == '<' || c == '>' {
            if chars.get(i + 1) != Some(&'=') {
                return Err(Error::parse(line_no, col, format!("expected `{c}=`")));
            }
            let s = if c == '<' { Sense::Le } else { Sense::Ge };
            toks.push((Tok::Sense(s), col));
            i += 2;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let s: String = chars[start..i].iter().collect();
            let value = s
                .parse::<f64>()
                .map_err(|_| Error::parse(line_no, col, format!("malformed number `{s}`")))?;
            toks.push((Tok::Num(value), col));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '.')
            {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            toks.push((Tok::Ident(s), col));
        } else {
            return Err(Error::parse(line_no, col, format!("unexpected character `{c}`")));
        }
    }
    Ok(Lexed {
        toks,
        pos: 0,
        line: line_no,
        end_col: chars.len() + 1,
    })
}

impl Lexed {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|&(_, c)| c).unwrap_or(self.end_col)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::parse(self.line, self.col(), message)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<()> {
        if self.peek() == Some(want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }

    /// Optionally signed number; `inf` is accepted as a number.
    fn number(&mut self) -> Result<f64> {
        let mut sign = 1.0;
        match self.peek() {
            Some(Tok::Minus) => {
                sign = -1.0;
                self.pos += 1;
            }
            Some(Tok::Plus) => self.pos += 1,
            _ => {}
        }
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(sign * v)
            }
            Some(Tok::Ident(s)) if s == "inf" || s == "infinity" => {
                self.pos += 1;
                Ok(sign * f64::INFINITY)
            }
            _ => Err(self.err("expected a number")),
        }
    }

    fn variable(&mut self, model: &Model) -> Result<VarId> {
        let col = self.col();
        match self.next() {
            Some(Tok::Ident(name)) => model
                .var_by_name(&name)
                .ok_or_else(|| Error::parse(self.line, col, format!("unknown variable `{name}`"))),
            _ => Err(Error::parse(self.line, col, "expected a variable name")),
        }
    }

    /// `coef*name`, optionally signed.
    fn product(&mut self, model: &Model) -> Result<(VarId, f64)> {
        let coef = self.number()?;
        self.expect(&Tok::Star, "`*`")?;
        let var = self.variable(model)?;
        Ok((var, coef))
    }

    fn cone(&mut self, model: &Model) -> Result<ConeTerm> {
        let start = self.col();
        self.expect(&Tok::LParen, "`(` after CONE")?;
        let scale = self.number()?;
        self.expect(&Tok::Semi, "`;`")?;
        let mut comps = Vec::new();
        if self.peek() != Some(&Tok::Semi) {
            loop {
                comps.push(self.product(model)?);
                if self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.expect(&Tok::Semi, "`;`")?;
        let constant = self.number()?;
        self.expect(&Tok::RParen, "`)`")?;
        ConeTerm::new(scale, comps, constant)
            .map_err(|e| Error::parse(self.line, start, e.to_string()))
    }

    /// Expression up to a sense token or end of line.
    fn expr(&mut self, model: &Model, allow_cone: bool) -> Result<(LinExpr, Option<ConeTerm>)> {
        let mut terms = Vec::new();
        let mut constant = 0.0;
        let mut cone = None;
        let mut first = true;
        loop {
            let mut sign = 1.0;
            match self.peek() {
                Some(Tok::Plus) => self.pos += 1,
                Some(Tok::Minus) => {
                    sign = -1.0;
                    self.pos += 1;
                }
                None | Some(Tok::Sense(_)) if !first => break,
                _ if first => {}
                _ => return Err(self.err("expected `+`, `-`, or a comparison")),
            }
            first = false;
            match self.peek().cloned() {
                Some(Tok::Ident(s)) if s == "CONE" => {
                    let col = self.col();
                    self.pos += 1;
                    if !allow_cone {
                        return Err(Error::parse(self.line, col, "CONE not allowed here"));
                    }
                    if cone.is_some() {
                        return Err(Error::parse(self.line, col, "at most one CONE per row"));
                    }
                    if sign < 0.0 {
                        return Err(Error::parse(self.line, col, "CONE must be added, not subtracted"));
                    }
                    cone = Some(self.cone(model)?);
                }
                Some(Tok::Ident(_)) => {
                    let var = self.variable(model)?;
                    terms.push((var, sign));
                }
                _ => {
                    let v = self.number()?;
                    if self.peek() == Some(&Tok::Star) {
                        self.pos += 1;
                        let var = self.variable(model)?;
                        terms.push((var, sign * v));
                    } else {
                        constant += sign * v;
                    }
                }
            }
        }
        Ok((LinExpr::from_terms(terms).with_constant(constant), cone))
    }
}

#[derive(PartialEq, PartialOrd, Clone, Copy)]
enum Section {
    Preamble,
    Vars,
    Obj,
    Cons,
}

pub fn import_text(text: &str) -> Result<Model> {
    let mut model = Model::new();
    let mut section = Section::Preamble;
    let mut seen_obj = false;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            let next = match header.trim() {
                "vars" => Section::Vars,
                "obj" => Section::Obj,
                "cons" => Section::Cons,
                other => {
                    return Err(Error::parse(line_no, 1, format!("unknown section `#{other}`")))
                }
            };
            let expected = match section {
                Section::Preamble => Section::Vars,
                Section::Vars => Section::Obj,
                Section::Obj => Section::Cons,
                Section::Cons => {
                    return Err(Error::parse(line_no, 1, "unexpected section after #cons"))
                }
            };
            if next != expected {
                return Err(Error::parse(line_no, 1, "sections must appear as #vars, #obj, #cons"));
            }
            if section == Section::Obj && !seen_obj {
                return Err(Error::parse(line_no, 1, "missing objective line"));
            }
            section = next;
            continue;
        }
        let lead = raw.len() - raw.trim_start().len();
        let lead_cols = raw[..lead].chars().count();
        let shift = |e: Error| match e {
            Error::Parse { line, column, message } => Error::Parse {
                line,
                column: column + lead_cols,
                message,
            },
            other => other,
        };
        match section {
            Section::Preamble => {
                return Err(Error::parse(line_no, 1 + lead_cols, "expected `#vars`"));
            }
            Section::Vars => parse_var_line(&mut model, line_no, line).map_err(shift)?,
            Section::Obj => {
                if seen_obj {
                    return Err(Error::parse(line_no, 1 + lead_cols, "duplicate objective line"));
                }
                parse_obj_line(&mut model, line_no, line).map_err(shift)?;
                seen_obj = true;
            }
            Section::Cons => parse_con_line(&mut model, line_no, line).map_err(shift)?,
        }
    }
    let eof = last_line + 1;
    match section {
        Section::Cons => Ok(model),
        Section::Obj if !seen_obj => Err(Error::parse(eof, 1, "unexpected end of input: missing objective")),
        Section::Preamble => Err(Error::parse(eof, 1, "unexpected end of input: missing `#vars`")),
        Section::Vars => Err(Error::parse(eof, 1, "unexpected end of input: missing `#obj`")),
        Section::Obj => Err(Error::parse(eof, 1, "unexpected end of input: missing `#cons`")),
    }
}

fn parse_var_line(model: &mut Model, line_no: usize, line: &str) -> Result<()> {
    let mut lx = lex(line_no, line)?;
    let name_col = lx.col();
    let name = match lx.next() {
        Some(Tok::Ident(n)) => n,
        _ => return Err(Error::parse(line_no, name_col, "expected a variable name")),
    };
    let kind_col = lx.col();
    let kind = match lx.next() {
        Some(Tok::Ident(k)) if k == "continuous" => VarKind::Continuous,
        Some(Tok::Ident(k)) if k == "binary" => VarKind::Binary,
        Some(Tok::Ident(k)) if k == "integer" => VarKind::Integer,
        _ => {
            return Err(Error::parse(
                line_no,
                kind_col,
                "expected `continuous`, `binary`, or `integer`",
            ))
        }
    };
    let lower = lx.number()?;
    let upper = lx.number()?;
    if !lx.done() {
        return Err(lx.err("trailing input after bounds"));
    }
    model
        .add_variable(&name, kind, lower, upper)
        .map_err(|e| Error::parse(line_no, name_col, e.to_string()))?;
    Ok(())
}

fn parse_obj_line(model: &mut Model, line_no: usize, line: &str) -> Result<()> {
    let mut lx = lex(line_no, line)?;
    let sense = match lx.next() {
        Some(Tok::Ident(s)) if s == "max" => ObjSense::Maximize,
        Some(Tok::Ident(s)) if s == "min" => ObjSense::Minimize,
        _ => return Err(Error::parse(line_no, 1, "expected `max` or `min`")),
    };
    if lx.done() {
        return Err(lx.err("expected an objective expression"));
    }
    let (expr, _) = lx.expr(model, false)?;
    if !lx.done() {
        return Err(lx.err("unexpected token in objective"));
    }
    model
        .set_objective(sense, expr)
        .map_err(|e| Error::parse(line_no, 1, e.to_string()))
}

fn parse_con_line(model: &mut Model, line_no: usize, line: &str) -> Result<()> {
    let mut lx = lex(line_no, line)?;
    let label = match lx.next() {
        Some(Tok::Ident(l)) => l,
        _ => return Err(Error::parse(line_no, 1, "expected a constraint label")),
    };
    lx.expect(&Tok::Colon, "`:` after label")?;
    if lx.done() {
        return Err(lx.err("expected a constraint expression"));
    }
    let (lhs, cone) = lx.expr(model, true)?;
    let sense = match lx.next() {
        Some(Tok::Sense(s)) => s,
        _ => {
            lx.pos -= 1;
            return Err(lx.err("expected `<=`, `>=`, or `=`"));
        }
    };
    let rhs = lx.number()?;
    if !lx.done() {
        return Err(lx.err("trailing input after right-hand side"));
    }
    let result = match cone {
        Some(cone) => model.add_cone_constraint(&label, lhs, cone, sense, rhs),
        None => model.add_constraint(&label, lhs, sense, rhs),
    };
    result.map_err(|e| Error::parse(line_no, 1, e.to_string()))?;
    Ok(())
}
