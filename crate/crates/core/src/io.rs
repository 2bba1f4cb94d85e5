//! Plot-ready dumps: trajectory records, per-iterate summaries and axis slices.
//!
//! Numbers are written as the nearest double in shortest round-trip form, so
//! identical runs produce identical files.

use std::io::Write;

use serde::Serialize;

use crate::algorithms::Trajectory;
use crate::embed::HardInstance;
use crate::error::Result;
use crate::hard1d::fmt_num;
use crate::scalar::Real;
use crate::verify::flow::DecreaseCertificate;
use crate::verify::progress::ProgressProcess;

/// One line of `trajectory.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterateRecord {
    pub t: usize,
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_norm: f64,
    /// Progress `Z_t`.
    pub z: usize,
}

pub fn iterate_records<S: Real>(trajectory: &Trajectory<S>, progress: &ProgressProcess) -> Vec<IterateRecord> {
    trajectory
        .iterates
        .iter()
        .zip(&trajectory.responses)
        .enumerate()
        .map(|(i, (x, r))| IterateRecord {
            t: i + 1,
            x: x.iter().map(|v| v.to_f64_lossy()).collect(),
            f: r.value.to_f64_lossy(),
            grad_norm: r.grad_norm().to_f64_lossy(),
            z: progress.z[i + 1],
        })
        .collect()
}

pub fn write_trajectory_jsonl<W: Write>(records: &[IterateRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// `summary.csv`: `t,f,grad_norm,z,f_ge_1`, then for each radius `δ` the
/// columns `certified_δ,decrease_δ,required_δ,witness_f_δ` (empty when
/// `f < 1`).
pub fn write_summary_csv<S: Real, W: Write>(
    records: &[IterateRecord],
    certificates: &[Option<Vec<DecreaseCertificate<S>>>],
    deltas: &[S],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["t", "f", "grad_norm", "z", "f_ge_1"].iter().map(|s| s.to_string()).collect();
    for &d in deltas {
        let tag = fmt_num(d);
        for col in ["certified", "decrease", "required", "witness_f"] {
            header.push(format!("{col}_{tag}"));
        }
    }
    w.write_record(&header)?;
    for (r, certs) in records.iter().zip(certificates) {
        let mut row = vec![
            r.t.to_string(),
            fmt_num(r.f),
            fmt_num(r.grad_norm),
            r.z.to_string(),
            (r.f >= 1.0).to_string(),
        ];
        match certs {
            Some(cs) => {
                for c in cs {
                    row.push(c.certified.to_string());
                    row.push(fmt_num(c.decrease));
                    row.push(fmt_num(c.required));
                    row.push(fmt_num(c.witness_value));
                }
            }
            None => row.extend(std::iter::repeat_n(String::new(), 4 * deltas.len())),
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `f` along each coordinate axis through `x*`: columns `axis,offset,f` for
/// `n` offsets in `[−half_width, half_width]`.
pub fn write_slices_csv<S: Real, W: Write>(inst: &HardInstance<S>, half_width: f64, n: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["axis", "offset", "f"])?;
    let n = n.max(2);
    for axis in 0..inst.d() {
        for j in 0..n {
            let off = S::lit(-half_width + 2.0 * half_width * j as f64 / (n - 1) as f64);
            let mut x = inst.x_star().to_vec();
            x[axis] = x[axis] + off;
            w.write_record([axis.to_string(), fmt_num(off), fmt_num(inst.eval_f(&x))])?;
        }
    }
    w.flush()?;
    Ok(())
}
