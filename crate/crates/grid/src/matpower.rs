//! MATPOWER case-format (`.m`) reader.
//!
//! Understands the matrix assignments `mpc.baseMVA`, `mpc.bus`, `mpc.gen`,
//! `mpc.branch` and `mpc.gencost` with the standard column order; `%`
//! comments and unknown `mpc.*` assignments are tolerated. Loads are
//! lifted out of bus rows with nonzero (Pd, Qd). Out-of-service branches
//! are preserved with `status = false`; out-of-service generators carry no
//! usable limits for dispatch and are dropped. Only polynomial cost curves
//! up to quadratic are supported.

use std::collections::{HashMap, HashSet};

use crate::case::{Branch, Bus, BusType, CostCurve, Gen, GridCase, Load};
use crate::{GridError, Result};

// MATPOWER column positions.
const BUS_I: usize = 0;
const BUS_TYPE: usize = 1;
const BUS_PD: usize = 2;
const BUS_QD: usize = 3;
const BUS_GS: usize = 4;
const BUS_BS: usize = 5;
const BUS_VMAX: usize = 11;
const BUS_VMIN: usize = 12;

const GEN_BUS: usize = 0;
const GEN_QMAX: usize = 3;
const GEN_QMIN: usize = 4;
const GEN_STATUS: usize = 7;
const GEN_PMAX: usize = 8;
const GEN_PMIN: usize = 9;

const BR_F: usize = 0;
const BR_T: usize = 1;
const BR_R: usize = 2;
const BR_X: usize = 3;
const BR_B: usize = 4;
const BR_RATE_A: usize = 5;
const BR_STATUS: usize = 10;

const COST_MODEL: usize = 0;
const COST_NCOST: usize = 3;

pub fn parse_matpower(text: &str) -> Result<GridCase> {
    let raw = RawCase::parse(text)?;

    let base = raw.base_mva;
    let bus_rows = raw.require("bus")?;
    let gen_rows = raw.require("gen")?;
    let branch_rows = raw.require("branch")?;
    let cost_rows = raw.require("gencost")?;

    let mut buses = Vec::with_capacity(bus_rows.len());
    let mut loads = Vec::new();
    let mut index_of = HashMap::new();
    let mut seen = HashSet::new();
    for row in bus_rows {
        let id = row.get(BUS_I)? as usize;
        if !seen.insert(id) {
            return Err(GridError::DuplicateBusId(id));
        }
        let bus_type = match row.get(BUS_TYPE)? as i64 {
            2 => BusType::Pv,
            3 => BusType::Slack,
            _ => BusType::Pq,
        };
        index_of.insert(id, buses.len());
        let pd = row.get(BUS_PD)? / base;
        let qd = row.get(BUS_QD)? / base;
        if pd != 0.0 || qd != 0.0 {
            loads.push(Load { bus: buses.len(), pd, qd });
        }
        buses.push(Bus {
            id,
            bus_type,
            vm_min: row.get(BUS_VMIN)?,
            vm_max: row.get(BUS_VMAX)?,
            gs: row.get(BUS_GS)? / base,
            bs: row.get(BUS_BS)? / base,
        });
    }

    let resolve = |id: f64| -> Result<usize> {
        index_of
            .get(&(id as usize))
            .copied()
            .ok_or(GridError::UnresolvedBus(id as usize))
    };

    if cost_rows.len() != gen_rows.len() {
        return Err(GridError::UnsupportedCost(format!(
            "gencost has {} rows for {} generators",
            cost_rows.len(),
            gen_rows.len()
        )));
    }

    let mut gens = Vec::new();
    for (row, cost) in gen_rows.iter().zip(cost_rows) {
        if row.get(GEN_STATUS)? <= 0.0 {
            continue;
        }
        let model = cost.get(COST_MODEL)? as i64;
        if model != 2 {
            return Err(GridError::UnsupportedCost(format!(
                "cost model {model} (only polynomial model 2 is supported)"
            )));
        }
        let ncost = cost.get(COST_NCOST)? as usize;
        if ncost > 3 {
            return Err(GridError::UnsupportedCost(format!(
                "polynomial degree {} above quadratic",
                ncost.saturating_sub(1)
            )));
        }
        // Highest order first; convert $/MWh-coefficients to per-unit power.
        let mut c = [0.0; 3]; // c2, c1, c0
        for k in 0..ncost {
            c[3 - ncost + k] = cost.get(4 + k)?;
        }
        gens.push(Gen {
            bus: resolve(row.get(GEN_BUS)?)?,
            p_min: row.get(GEN_PMIN)? / base,
            p_max: row.get(GEN_PMAX)? / base,
            q_min: row.get(GEN_QMIN)? / base,
            q_max: row.get(GEN_QMAX)? / base,
            cost: CostCurve {
                c2: c[0] * base * base,
                c1: c[1] * base,
                c0: c[2],
            },
        });
    }

    let mut branches = Vec::with_capacity(branch_rows.len());
    for row in branch_rows {
        let rate = row.get(BR_RATE_A)?;
        branches.push(Branch {
            from: resolve(row.get(BR_F)?)?,
            to: resolve(row.get(BR_T)?)?,
            r: row.get(BR_R)?,
            x: row.get(BR_X)?,
            b: row.get(BR_B)?,
            rate_a: if rate > 0.0 { Some(rate / base) } else { None },
            status: row.get(BR_STATUS)? != 0.0,
        });
    }

    let case = GridCase {
        name: raw.name,
        base_mva: base,
        buses,
        loads,
        gens,
        branches,
    };
    case.validate()?;
    Ok(case)
}

/// A numeric matrix row tagged with its source line for error reporting.
struct Row {
    line: usize,
    values: Vec<f64>,
}

impl Row {
    fn get(&self, col: usize) -> Result<f64> {
        self.values.get(col).copied().ok_or(GridError::Syntax {
            line: self.line,
            col: col + 1,
            msg: format!("row has {} columns, need at least {}", self.values.len(), col + 1),
        })
    }
}

struct RawCase {
    name: String,
    base_mva: f64,
    matrices: HashMap<String, Vec<Row>>,
}

impl RawCase {
    fn require(&self, key: &'static str) -> Result<&Vec<Row>> {
        self.matrices.get(key).ok_or(GridError::MissingMatrix(key))
    }

    fn parse(text: &str) -> Result<RawCase> {
        let mut lex = Lexer::new(text);
        let mut name = String::from("case");
        let mut base_mva = None;
        let mut matrices = HashMap::new();

        while let Some(tok) = lex.next_token()? {
            match tok {
                Token::Word(w) if w == "function" => {
                    // `function mpc = <name>`
                    lex.skip_until_newline();
                    if let Some(n) = w_last_ident(&lex.current_line_text) {
                        name = n;
                    }
                }
                Token::Word(w) if w.starts_with("mpc.") => {
                    let field = w[4..].to_string();
                    lex.expect_char('=')?;
                    match field.as_str() {
                        "baseMVA" => base_mva = Some(lex.scalar()?),
                        "version" => lex.skip_statement(),
                        "bus" | "gen" | "branch" | "gencost" => {
                            let rows = lex.matrix()?;
                            matrices.insert(field, rows);
                        }
                        _ => lex.skip_statement(),
                    }
                }
                // Anything else at statement level is ignored (MATLAB
                // scripts may carry arbitrary code around the mpc fields).
                _ => lex.skip_until_newline(),
            }
        }

        let base_mva = base_mva.ok_or(GridError::MissingMatrix("baseMVA"))?;
        Ok(RawCase { name, base_mva, matrices })
    }
}

fn w_last_ident(line: &str) -> Option<String> {
    line.rsplit(|c: char| !(c.is_alphanumeric() || c == '_'))
        .find(|s| !s.is_empty())
        .map(|s| s.to_string())
}

enum Token {
    Word(String),
    Other,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
    current_line_text: String,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
            current_line_text: String::new(),
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
            self.current_line_text.clear();
        } else {
            self.col += 1;
            self.current_line_text.push(c);
        }
        Some(c)
    }

    fn skip_ws_and_comments(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == '%' {
                while let Some(&c2) = self.chars.peek() {
                    if c2 == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Result<Option<Token>> {
        self.skip_ws_and_comments();
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        if c.is_alphabetic() || c == '_' {
            let mut w = String::new();
            while let Some(&c2) = self.chars.peek() {
                if c2.is_alphanumeric() || c2 == '_' || c2 == '.' {
                    w.push(c2);
                    self.bump();
                } else {
                    break;
                }
            }
            Ok(Some(Token::Word(w)))
        } else {
            self.bump();
            Ok(Some(Token::Other))
        }
    }

    fn expect_char(&mut self, want: char) -> Result<()> {
        self.skip_ws_and_comments();
        let (line, col) = (self.line, self.col);
        match self.bump() {
            Some(c) if c == want => Ok(()),
            got => Err(GridError::Syntax {
                line,
                col,
                msg: format!("expected `{want}`, found `{}`", got.map_or(String::from("end of input"), |c| c.to_string())),
            }),
        }
    }

    fn skip_until_newline(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == '\n' {
                break;
            }
            self.bump();
        }
    }

    /// Skip the remainder of an uninteresting `mpc.x = ...;` statement,
    /// including bracketed matrix or cell-array bodies.
    fn skip_statement(&mut self) {
        let mut depth = 0i32;
        while let Some(&c) = self.chars.peek() {
            match c {
                '%' => self.skip_ws_and_comments(),
                '[' | '{' => {
                    depth += 1;
                    self.bump();
                }
                ']' | '}' => {
                    depth -= 1;
                    self.bump();
                }
                ';' if depth == 0 => {
                    self.bump();
                    return;
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn number_token(&mut self) -> Result<f64> {
        self.skip_ws_and_comments();
        let (line, col) = (self.line, self.col);
        let mut tok = String::new();
        while let Some(&c) = self.chars.peek() {
            if c.is_ascii_digit()
                || c == '.'
                || c == '-'
                || c == '+'
                || c == 'e'
                || c == 'E'
                || c == 'i' // tolerate stray unit suffixes
            {
                // Sign is only part of the number at its start or after an exponent.
                if (c == '-' || c == '+') && !tok.is_empty() {
                    let prev = tok.chars().last().unwrap();
                    if prev != 'e' && prev != 'E' {
                        break;
                    }
                }
                tok.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if tok.is_empty() {
            // Grab the offending run for the message.
            let mut bad = String::new();
            while let Some(&c) = self.chars.peek() {
                if c.is_whitespace() || c == ';' || c == ']' {
                    break;
                }
                bad.push(c);
                self.bump();
            }
            return Err(GridError::NonNumeric { line, col, token: bad });
        }
        tok.trim_end_matches('i')
            .parse::<f64>()
            .map_err(|_| GridError::NonNumeric { line, col, token: tok })
    }

    fn scalar(&mut self) -> Result<f64> {
        let v = self.number_token()?;
        self.skip_ws_and_comments();
        if self.chars.peek() == Some(&';') {
            self.bump();
        }
        Ok(v)
    }

    /// Parse `[ row ; row ; ... ];` where rows are whitespace- or
    /// comma-separated numbers, optionally terminated by newlines.
    fn matrix(&mut self) -> Result<Vec<Row>> {
        self.expect_char('[')?;
        let mut rows = Vec::new();
        let mut current: Vec<f64> = Vec::new();
        let mut row_line = self.line;
        loop {
            self.skip_inline_ws_and_comments();
            match self.chars.peek() {
                None => {
                    return Err(GridError::Syntax {
                        line: self.line,
                        col: self.col,
                        msg: "unterminated matrix".into(),
                    })
                }
                Some(']') => {
                    self.bump();
                    self.skip_ws_and_comments();
                    if self.chars.peek() == Some(&';') {
                        self.bump();
                    }
                    if !current.is_empty() {
                        rows.push(Row { line: row_line, values: std::mem::take(&mut current) });
                    }
                    return Ok(rows);
                }
                Some(';') | Some('\n') => {
                    self.bump();
                    if !current.is_empty() {
                        rows.push(Row { line: row_line, values: std::mem::take(&mut current) });
                    }
                    row_line = self.line;
                }
                Some(',') => {
                    self.bump();
                }
                _ => {
                    if current.is_empty() {
                        row_line = self.line;
                    }
                    current.push(self.number_token()?);
                }
            }
        }
    }

    /// Within a matrix, newlines are row separators and must not be skipped.
    fn skip_inline_ws_and_comments(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == '%' {
                while let Some(&c2) = self.chars.peek() {
                    if c2 == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c.is_whitespace() && c != '\n' {
                self.bump();
            } else {
                break;
            }
        }
    }
}
