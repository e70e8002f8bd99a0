//! Grid emitters and golden-file comparison.
//!
//! Golden grids are tab-separated. The first non-comment line is the header
//! `n\m` followed by column labels (`3`, `d`, `d+2`, `2d+1`); every further
//! line starts with `n` and holds one cell per column. An empty cell is a
//! zero coefficient, `.` marks a cell that is not part of the table. Lines
//! starting with `#` are comments, except the directive `# sign: (-1)^d`,
//! which says the printed cells are coefficients of `(-1)^d s^m t^n`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::repring::{SoGroup, VirtualRep};

/// Column label `a*d + b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColLabel {
    pub times_d: u32,
    pub offset: u32,
}

impl ColLabel {
    pub fn resolve(&self, d: u32) -> u32 {
        self.times_d * d + self.offset
    }

    fn parse(s: &str) -> Option<ColLabel> {
        let s = s.trim();
        let (head, offset) = match s.split_once('+') {
            Some((h, o)) => (h.trim(), o.trim().parse().ok()?),
            None => (s, 0),
        };
        if let Some(k) = head.strip_suffix('d') {
            let times_d = if k.is_empty() { 1 } else { k.parse().ok()? };
            Some(ColLabel { times_d, offset })
        } else if s.contains('+') {
            None
        } else {
            Some(ColLabel {
                times_d: 0,
                offset: head.parse().ok()?,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cell {
    Zero,
    NotPrinted,
    Value(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Golden {
    pub sign_d: bool,
    pub cols: Vec<ColLabel>,
    /// `(n, cells)` in file order.
    pub rows: Vec<(u32, Vec<Cell>)>,
}

pub fn parse_golden(src: &str) -> Result<Golden> {
    let err = |line: usize, msg: String| Error::Parse { pos: line, msg };
    let mut sign_d = false;
    let mut cols: Option<Vec<ColLabel>> = None;
    let mut rows = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if let Some(c) = line.strip_prefix('#') {
            if let Some(v) = c.trim().strip_prefix("sign:") {
                if v.trim() != "(-1)^d" {
                    return Err(err(i + 1, format!("unknown sign directive `{}`", v.trim())));
                }
                sign_d = true;
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        match &cols {
            None => {
                if fields[0].trim() != "n\\m" {
                    return Err(err(i + 1, "header must start with `n\\m`".into()));
                }
                let c = fields[1..]
                    .iter()
                    .map(|f| ColLabel::parse(f).ok_or_else(|| err(i + 1, format!("bad column `{f}`"))))
                    .collect::<Result<Vec<_>>>()?;
                cols = Some(c);
            }
            Some(c) => {
                let n: u32 = fields[0]
                    .trim()
                    .parse()
                    .map_err(|_| err(i + 1, format!("bad row label `{}`", fields[0])))?;
                if fields.len() - 1 > c.len() {
                    return Err(err(i + 1, "more cells than columns".into()));
                }
                let mut cells: Vec<Cell> = fields[1..]
                    .iter()
                    .map(|f| match f.trim() {
                        "" => Cell::Zero,
                        "." => Cell::NotPrinted,
                        v => Cell::Value(v.to_string()),
                    })
                    .collect();
                cells.resize(c.len(), Cell::NotPrinted);
                rows.push((n, cells));
            }
        }
    }
    let cols = cols.ok_or_else(|| err(0, "missing header".into()))?;
    Ok(Golden { sign_d, cols, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldenMismatch {
    pub m: u32,
    pub n: u32,
    pub expected: String,
    pub computed: String,
}

impl Golden {
    /// Every printed cell as `((m, n), expected value)` at dimension `d`.
    pub fn expected(&self, group: SoGroup) -> Result<Vec<((u32, u32), VirtualRep)>> {
        let d = group.d() as u32;
        let sign = if self.sign_d && d % 2 == 1 { -1 } else { 1 };
        let mut out = Vec::new();
        for (n, cells) in &self.rows {
            for (c, cell) in self.cols.iter().zip(cells) {
                let v = match cell {
                    Cell::NotPrinted => continue,
                    Cell::Zero => VirtualRep::zero(group),
                    Cell::Value(s) => VirtualRep::parse(group, s)?.scale(sign),
                };
                out.push(((c.resolve(d), *n), v));
            }
        }
        Ok(out)
    }

    /// Largest `m` and `n` of a printed cell.
    pub fn extent(&self, d: u32) -> (u32, u32) {
        let mut mm = 0;
        let mut nn = 0;
        for (n, cells) in &self.rows {
            for (c, cell) in self.cols.iter().zip(cells) {
                if *cell != Cell::NotPrinted {
                    mm = mm.max(c.resolve(d));
                    nn = nn.max(*n);
                }
            }
        }
        (mm, nn)
    }

    /// Compares every printed cell with `computed(m, n)`.
    pub fn compare(
        &self,
        group: SoGroup,
        computed: impl Fn(u32, u32) -> VirtualRep,
    ) -> Result<Vec<GoldenMismatch>> {
        Ok(self
            .expected(group)?
            .into_iter()
            .filter_map(|((m, n), e)| {
                let c = computed(m, n);
                (c != e).then(|| GoldenMismatch {
                    m,
                    n,
                    expected: e.to_string(),
                    computed: c.to_string(),
                })
            })
            .collect())
    }
}

/// Tab-separated grid, rows `n` descending, columns `m` ascending; zero
/// cells are left empty.
pub fn emit_tsv(ms: &[u32], ns: &[u32], cell: impl Fn(u32, u32) -> VirtualRep) -> String {
    let mut out = String::from("n\\m");
    for m in ms {
        write!(out, "\t{m}").unwrap();
    }
    out.push('\n');
    let mut rows = ns.to_vec();
    rows.sort_unstable_by(|a, b| b.cmp(a));
    for n in rows {
        write!(out, "{n}").unwrap();
        for &m in ms {
            let c = cell(m, n);
            out.push('\t');
            if !c.is_zero() {
                write!(out, "{c}").unwrap();
            }
        }
        out.push('\n');
    }
    out
}

/// One JSON object per non-zero cell, sorted by `(m + n, n)`.
pub fn emit_json(ms: &[u32], ns: &[u32], cell: impl Fn(u32, u32) -> VirtualRep) -> String {
    let mut pts: Vec<(u32, u32)> = ms.iter().flat_map(|&m| ns.iter().map(move |&n| (m, n))).collect();
    pts.sort_by_key(|&(m, n)| (m + n, n, m));
    let rows: Vec<serde_json::Value> = pts
        .into_iter()
        .filter_map(|(m, n)| {
            let c = cell(m, n);
            (!c.is_zero()).then(|| serde_json::json!({"m": m, "n": n, "coeff": c.to_string()}))
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("json of strings")
}
