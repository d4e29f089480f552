//! Line-oriented text format for configurations.
//!
//! ```text
//! lines -2 3
//! time -6 6
//! periodic_tb false
//! side_bc free
//! slit 1
//! D -2 0.125
//! B 0 -3.5
//! ```
//!
//! `slit none` marks a box without slit. Blank lines and `#` comments are
//! ignored. Times are written in Rust's shortest round-trip form, so reading
//! back what was written reproduces every value bit for bit.

use std::fmt::Write as _;

use super::{BoxSpec, Event, GeometryError, RcConfig, SideBc};

pub fn write_config(bx: &BoxSpec, cfg: &RcConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "lines {} {}", bx.first_line(), bx.last_line());
    let _ = writeln!(out, "time {:?} {:?}", bx.start(), bx.end());
    let _ = writeln!(out, "periodic_tb {}", bx.is_periodic());
    let bc = match bx.bc() {
        SideBc::Free => "free",
        SideBc::Wired => "wired",
    };
    let _ = writeln!(out, "side_bc {bc}");
    match bx.slit() {
        Some(l) => {
            let _ = writeln!(out, "slit {l}");
        }
        None => out.push_str("slit none\n"),
    }
    for ev in cfg.events(bx) {
        let _ = match ev {
            Event::Death { line, time } => writeln!(out, "D {line} {time:?}"),
            Event::Bridge { line, time } => writeln!(out, "B {line} {time:?}"),
        };
    }
    out
}

pub fn read_config(text: &str) -> Result<(BoxSpec, RcConfig), GeometryError> {
    let mut lines = None;
    let mut time = None;
    let mut periodic = false;
    let mut bc = SideBc::Free;
    let mut slit = None;
    let mut events = Vec::new();

    for (no, raw) in text.lines().enumerate() {
        let no = no + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| GeometryError::Parse { line: no, msg: msg.to_string() };
        let tok: Vec<&str> = line.split_whitespace().collect();
        let int = |s: &str| s.parse::<i64>().map_err(|_| err(&format!("bad integer {s:?}")));
        let real = |s: &str| s.parse::<f64>().map_err(|_| err(&format!("bad number {s:?}")));
        match (tok[0], tok.len()) {
            ("lines", 3) => lines = Some((int(tok[1])?, int(tok[2])?)),
            ("time", 3) => time = Some((real(tok[1])?, real(tok[2])?)),
            ("periodic_tb", 2) => {
                periodic = tok[1].parse().map_err(|_| err("expected true or false"))?
            }
            ("side_bc", 2) => {
                bc = match tok[1] {
                    "free" => SideBc::Free,
                    "wired" => SideBc::Wired,
                    _ => return Err(err("side_bc must be free or wired")),
                }
            }
            ("slit", 2) => {
                slit = match tok[1] {
                    "none" => None,
                    s => Some(s.parse::<usize>().map_err(|_| err("bad slit length"))?),
                }
            }
            ("D", 3) => events.push(Event::Death { line: int(tok[1])?, time: real(tok[2])? }),
            ("B", 3) => events.push(Event::Bridge { line: int(tok[1])?, time: real(tok[2])? }),
            _ => return Err(err(&format!("unrecognised record {line:?}"))),
        }
    }
    let missing = |what: &str| GeometryError::Parse { line: 0, msg: format!("missing {what} header") };
    let (a, b) = lines.ok_or_else(|| missing("lines"))?;
    let (s, t) = time.ok_or_else(|| missing("time"))?;
    let mut bx = BoxSpec::new(a, b, s, t)?.periodic(periodic).side_bc(bc);
    if let Some(l) = slit {
        bx = bx.with_slit(l)?;
    }
    let cfg = RcConfig::from_events(&bx, &events)?;
    Ok((bx, cfg))
}
