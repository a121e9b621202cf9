//! Plan files: a text header followed by raw complex blocks.
//!
//! ```text
//! pftycho-plan 1
//! axes 2
//! axis n=512 p=64 q=8 r=13 m=64 eps=1e-7
//! axis n=512 p=64 q=8 r=13 m=64 eps=1e-7
//! end
//! <B block, W block> per axis in the raw complex format
//! ```
//!
//! On load the coefficients are read back from the first row of `B`
//! (where `1 - 2l/q = 1`) and both blocks are checked against a rebuild.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{check_axis, PftAxis, PftPlan1D, PftPlan2D};
use crate::error::{Error, Result};
use crate::field::raw::{read_complex, write_complex};
use crate::field::ComplexField;

const MAGIC_LINE: &str = "pftycho-plan 1";
const REBUILD_TOL: f64 = 1e-12;

fn write_axes<W: Write>(w: &mut W, axes: &[&PftAxis]) -> Result<()> {
    writeln!(w, "{MAGIC_LINE}")?;
    writeln!(w, "axes {}", axes.len())?;
    for a in axes {
        writeln!(w, "axis n={} p={} q={} r={} m={} eps={:e}", a.n, a.p, a.q, a.r, a.m, a.eps)?;
    }
    writeln!(w, "end")?;
    for a in axes {
        write_complex(w, &a.b)?;
        write_complex(w, &a.w)?;
    }
    Ok(())
}

struct AxisHeader {
    n: usize,
    p: usize,
    q: usize,
    r: usize,
    m: usize,
    eps: f64,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn read_line<R: BufRead>(r: &mut R) -> Result<String> {
    let mut line = String::new();
    if r.read_line(&mut line)? == 0 {
        return Err(bad("plan header ended early"));
    }
    Ok(line.trim().to_string())
}

fn parse_axis(line: &str) -> Result<AxisHeader> {
    let mut fields = line.split_whitespace();
    if fields.next() != Some("axis") {
        return Err(bad(format!("expected an axis line, got {line:?}")));
    }
    let mut get = |key: &str| -> Result<String> {
        let f = fields.next().ok_or_else(|| bad(format!("axis line missing {key}")))?;
        f.strip_prefix(key)
            .and_then(|s| s.strip_prefix('='))
            .map(str::to_string)
            .ok_or_else(|| bad(format!("expected {key}=..., got {f:?}")))
    };
    let count = |s: String| s.parse::<usize>().map_err(|_| bad(format!("bad count {s:?}")));
    Ok(AxisHeader {
        n: count(get("n")?)?,
        p: count(get("p")?)?,
        q: count(get("q")?)?,
        r: count(get("r")?)?,
        m: count(get("m")?)?,
        eps: get("eps")?.parse().map_err(|_| bad("bad eps"))?,
    })
}

fn read_axes<R: BufRead>(r: &mut R, expect: usize) -> Result<Vec<PftAxis>> {
    if read_line(r)? != MAGIC_LINE {
        return Err(bad("not a plan file"));
    }
    let count: usize = read_line(r)?
        .strip_prefix("axes ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("missing axes line"))?;
    if count != expect {
        return Err(bad(format!("expected a {expect}-axis plan, found {count}")));
    }
    let headers = (0..count).map(|_| parse_axis(&read_line(r)?)).collect::<Result<Vec<_>>>()?;
    if read_line(r)? != "end" {
        return Err(bad("missing end of header"));
    }
    headers.into_iter().map(|h| read_axis(r, h)).collect()
}

fn read_axis<R: BufRead>(r: &mut R, h: AxisHeader) -> Result<PftAxis> {
    check_axis(h.n, h.m, h.p).map_err(|e| bad(format!("inconsistent plan header: {e}")))?;
    if h.q != h.n / h.p || h.r == 0 || !(h.eps > 0.0) {
        return Err(bad("inconsistent plan header"));
    }
    let b = read_complex(r)?;
    let w = read_complex(r)?;
    if b.shape() != (h.q, h.r) || w.shape() != (2 * h.m + 1, h.r) {
        return Err(bad("plan block shapes do not match the header"));
    }
    let axis = PftAxis::from_coeffs(h.n, h.m, h.p, h.eps, b.row(0).to_vec());
    if !close(&axis.b, &b) || !close(&axis.w, &w) {
        return Err(bad("plan blocks are not consistent with each other"));
    }
    Ok(axis)
}

fn close(a: &ComplexField, b: &ComplexField) -> bool {
    a.data().iter().zip(b.data()).all(|(x, y)| (x - y).norm() <= REBUILD_TOL * (1.0 + x.norm()))
}

pub fn write_plan_1d<W: Write>(w: &mut W, plan: &PftPlan1D) -> Result<()> {
    write_axes(w, &[&plan.axis])
}

pub fn write_plan_2d<W: Write>(w: &mut W, plan: &PftPlan2D) -> Result<()> {
    write_axes(w, &[&plan.axes[0], &plan.axes[1]])
}

pub fn read_plan_1d<R: BufRead>(r: &mut R) -> Result<PftPlan1D> {
    let mut axes = read_axes(r, 1)?;
    Ok(PftPlan1D { axis: axes.remove(0) })
}

pub fn read_plan_2d<R: BufRead>(r: &mut R) -> Result<PftPlan2D> {
    let mut axes = read_axes(r, 2)?.into_iter();
    let (a1, a2) = (axes.next().unwrap(), axes.next().unwrap());
    Ok(PftPlan2D { axes: [a1, a2] })
}

pub fn save_plan_1d(path: impl AsRef<Path>, plan: &PftPlan1D) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_plan_1d(&mut w, plan)?;
    w.flush()?;
    Ok(())
}

pub fn save_plan_2d(path: impl AsRef<Path>, plan: &PftPlan2D) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_plan_2d(&mut w, plan)?;
    w.flush()?;
    Ok(())
}

pub fn load_plan_1d(path: impl AsRef<Path>) -> Result<PftPlan1D> {
    read_plan_1d(&mut BufReader::new(File::open(path)?))
}

pub fn load_plan_2d(path: impl AsRef<Path>) -> Result<PftPlan2D> {
    read_plan_2d(&mut BufReader::new(File::open(path)?))
}
