//! CSV renderings of kernels, spectra and transforms.
//!
//! Every table starts with a `# config_sha256=<hash>` comment line followed by
//! a header row. Floats use Rust's shortest round-trip formatting, so equal
//! values always render to equal bytes.

use num_complex::Complex64;

use crate::projector::KernelSample;
use crate::spectral::SpectrumLine;
use crate::{Error, Result};

fn finish(hash: &str, header: Vec<String>, rows: Vec<Vec<String>>) -> Result<String> {
    let mut out = format!("# config_sha256={hash}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(&header)?;
        for r in &rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    String::from_utf8(out).map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn f(x: f64) -> String {
    format!("{x}")
}

/// Columns `u, k2, k3, s, s_tilde` then `re_ij, im_ij` for the 16 entries.
pub fn kernel_csv(samples: &[KernelSample], config_hash: &str) -> Result<String> {
    let mut header: Vec<String> = ["u", "k2", "k3", "s", "s_tilde"].iter().map(|s| s.to_string()).collect();
    for i in 0..4 {
        for j in 0..4 {
            header.push(format!("re_{i}{j}"));
            header.push(format!("im_{i}{j}"));
        }
    }
    let rows = samples
        .iter()
        .map(|k| {
            let mut r = vec![f(k.mode.u), f(k.mode.k2), f(k.mode.k3), f(k.s), f(k.s_tilde)];
            for row in &k.value.0 {
                for c in row {
                    r.push(f(c.re));
                    r.push(f(c.im));
                }
            }
            r
        })
        .collect();
    finish(config_hash, header, rows)
}

/// Columns `n, v_n, re_amp, im_amp, abs_amp`.
pub fn spectrum_csv(lines: &[SpectrumLine], config_hash: &str) -> Result<String> {
    let header = ["n", "v_n", "re_amp", "im_amp", "abs_amp"].iter().map(|s| s.to_string()).collect();
    let rows = lines
        .iter()
        .map(|l| vec![l.n.to_string(), f(l.v), f(l.amplitude.re), f(l.amplitude.im), f(l.amplitude.norm())])
        .collect();
    finish(config_hash, header, rows)
}

/// Columns `v, re_F, im_F`.
pub fn transform_csv(v: &[f64], values: &[Complex64], config_hash: &str) -> Result<String> {
    if v.len() != values.len() {
        return Err(Error::GridMismatch("frequency grid and values differ in length".into()));
    }
    let header = ["v", "re_F", "im_F"].iter().map(|s| s.to_string()).collect();
    let rows = v.iter().zip(values).map(|(&v, c)| vec![f(v), f(c.re), f(c.im)]).collect();
    finish(config_hash, header, rows)
}

/// A generic numeric table with the same framing.
pub fn table_csv(header: &[&str], rows: &[Vec<f64>], config_hash: &str) -> Result<String> {
    if rows.iter().any(|r| r.len() != header.len()) {
        return Err(Error::GridMismatch("row width differs from header".into()));
    }
    let rows = rows.iter().map(|r| r.iter().map(|&x| f(x)).collect()).collect();
    finish(config_hash, header.iter().map(|s| s.to_string()).collect(), rows)
}
