//! Canonical text outputs: CSV with 12 significant digits and LF line
//! endings, and the 1-based bands JSON.

use std::io::Write;

use serde_json::{json, Value};

use crate::curvature::CurvatureEval;
use crate::error::Result;
use crate::numeric::fmt_sig12;
use crate::piplot::{ModalityBands, PiCurve};
use crate::ridgeline::{ProfileSample, SimplexGrid};

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn rows<W: Write>(out: W, header: &[String], body: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = writer(out);
    w.write_record(header)?;
    for r in body {
        w.write_record(&r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// `alpha,arclength,x_1..x_D,h`.
pub fn profile_csv<W: Write>(out: W, samples: &[ProfileSample]) -> Result<()> {
    let d = samples.first().map_or(0, |s| s.x.len());
    let mut head = header(&["alpha", "arclength"]);
    head.extend((1..=d).map(|k| format!("x_{k}")));
    head.push("h".into());
    rows(
        out,
        &head,
        samples.iter().map(|s| {
            let mut r = vec![fmt_sig12(s.alpha), fmt_sig12(s.arclength)];
            r.extend(s.x.iter().map(|&v| fmt_sig12(v)));
            r.push(fmt_sig12(s.h));
            r
        }),
    )
}

/// `a1,a2,a3,tx,ty,h,is_local_max`.
pub fn triangle_csv<W: Write>(out: W, grid: &SimplexGrid) -> Result<()> {
    rows(
        out,
        &header(&["a1", "a2", "a3", "tx", "ty", "h", "is_local_max"]),
        grid.nodes.iter().map(|n| {
            let mut r: Vec<String> = n.alpha.iter().map(|&a| fmt_sig12(a)).collect();
            r.extend([fmt_sig12(n.tx), fmt_sig12(n.ty), fmt_sig12(n.h)]);
            r.push(if n.is_local_max { "1" } else { "0" }.into());
            r
        }),
    )
}

/// `alpha,pi`.
pub fn pi_csv<W: Write>(out: W, curve: &PiCurve) -> Result<()> {
    rows(
        out,
        &header(&["alpha", "pi"]),
        curve.samples.iter().map(|&(a, p)| vec![fmt_sig12(a), fmt_sig12(p)]),
    )
}

/// `alpha,p,q,kappa`.
pub fn curvature_csv<W: Write>(out: W, evals: &[CurvatureEval]) -> Result<()> {
    rows(
        out,
        &header(&["alpha", "p", "q", "kappa"]),
        evals
            .iter()
            .map(|e| vec![fmt_sig12(e.alpha), fmt_sig12(e.p), fmt_sig12(e.q), fmt_sig12(e.kappa)]),
    )
}

/// Bands with 1-based component labels.
pub fn bands_json(b: &ModalityBands) -> Value {
    json!({
        "pair": [b.pair.0 + 1, b.pair.1 + 1],
        "breakpoints": b.breakpoints,
        "bands": b.bands.iter().map(|x| json!({"lo": x.lo, "hi": x.hi, "modes": x.modes})).collect::<Vec<_>>(),
        "zero_alphas": b.zero_alphas,
    })
}

pub fn to_string_with<F>(f: F) -> Result<String>
where
    F: FnOnce(&mut Vec<u8>) -> Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(String::from_utf8(buf).expect("formatted numbers are ASCII"))
}
