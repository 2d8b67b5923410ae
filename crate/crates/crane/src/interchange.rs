//! Plain-text interchange format for designs and channel sets.
//!
//! Every matrix is written column-major after a header line
//! `<kind> <name> <rows> <cols>`, where `kind` is `real` (one value per line)
//! or `complex` (`re im` per line). Values use Rust's shortest round-trip
//! exponent formatting, so reading a file back reproduces every bit.
//!
//! A design holds `receive_strength` (K x D), `beamformers` (MN x D, complex),
//! `quantization` (MN x 1), `aux_gain` (D x 1) and `aux_energy` (K x D), in
//! that order. A channel set holds `layout` (2 x 1: M and N) followed by
//! `channels` (MN x K, complex).

use std::io::{BufRead, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use crane_core::linalg::Matrix;
use crane_core::{ChannelSet, DesignSolution};
use num_complex::Complex64;

fn write_real<W: Write>(w: &mut W, name: &str, rows: usize, cols: usize, at: impl Fn(usize, usize) -> f64) -> Result<()> {
    writeln!(w, "real {name} {rows} {cols}")?;
    for c in 0..cols {
        for r in 0..rows {
            writeln!(w, "{:e}", at(r, c))?;
        }
    }
    Ok(())
}

fn write_complex<W: Write>(
    w: &mut W,
    name: &str,
    rows: usize,
    cols: usize,
    at: impl Fn(usize, usize) -> Complex64,
) -> Result<()> {
    writeln!(w, "complex {name} {rows} {cols}")?;
    for c in 0..cols {
        for r in 0..rows {
            let z = at(r, c);
            writeln!(w, "{:e} {:e}", z.re, z.im)?;
        }
    }
    Ok(())
}

struct Reader<R> {
    lines: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> Reader<R> {
    fn next_line(&mut self) -> Result<String> {
        loop {
            self.line_no += 1;
            let line = self.lines.next().context("unexpected end of file")??;
            let t = line.trim();
            if !t.is_empty() && !t.starts_with('#') {
                return Ok(t.to_string());
            }
        }
    }

    fn header(&mut self, kind: &str, name: &str) -> Result<(usize, usize)> {
        let line = self.next_line()?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        ensure!(
            parts.len() == 4 && parts[0] == kind && parts[1] == name,
            "line {}: expected `{kind} {name} <rows> <cols>`, found `{line}`",
            self.line_no
        );
        Ok((parts[2].parse()?, parts[3].parse()?))
    }

    fn value(&mut self, s: &str) -> Result<f64> {
        s.parse().with_context(|| format!("line {}: bad number `{s}`", self.line_no))
    }

    fn real(&mut self, name: &str) -> Result<Matrix> {
        let (rows, cols) = self.header("real", name)?;
        let mut m = Matrix::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                let line = self.next_line()?;
                let v = self.value(&line)?;
                m.set(r, c, v);
            }
        }
        Ok(m)
    }

    fn complex(&mut self, name: &str) -> Result<(usize, usize, Vec<Complex64>)> {
        let (rows, cols) = self.header("complex", name)?;
        let mut out = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            let line = self.next_line()?;
            let mut it = line.split_whitespace();
            let (re, im) = match (it.next(), it.next(), it.next()) {
                (Some(a), Some(b), None) => (self.value(a)?, self.value(b)?),
                _ => bail!("line {}: expected `re im`", self.line_no),
            };
            out.push(Complex64::new(re, im));
        }
        Ok((rows, cols, out))
    }
}

fn reader<R: BufRead>(r: R) -> Reader<R> {
    Reader { lines: r.lines(), line_no: 0 }
}

pub fn write_design<W: Write>(w: &mut W, sol: &DesignSolution) -> Result<()> {
    let (k, d, mn) = (sol.devices(), sol.dims(), sol.mn());
    write_real(w, "receive_strength", k, d, |r, c| sol.receive_strength.get(r, c))?;
    write_complex(w, "beamformers", mn, d, |r, c| sol.beamformers[c][r])?;
    write_real(w, "quantization", mn, 1, |r, _| sol.quantization[r])?;
    write_real(w, "aux_gain", d, 1, |r, _| sol.aux_gain[r])?;
    write_real(w, "aux_energy", k, d, |r, c| sol.aux_energy.get(r, c))
}

pub fn read_design<R: BufRead>(r: R) -> Result<DesignSolution> {
    let mut rd = reader(r);
    let receive_strength = rd.real("receive_strength")?;
    let (k, d) = (receive_strength.rows(), receive_strength.cols());
    let (mn, bd, flat) = rd.complex("beamformers")?;
    ensure!(bd == d, "beamformers have {bd} columns, expected {d}");
    let beamformers = flat.chunks(mn.max(1)).take(d).map(|c| c[..mn].to_vec()).collect();
    let q = rd.real("quantization")?;
    ensure!(q.rows() == mn && q.cols() == 1, "quantization must be {mn} x 1");
    let g = rd.real("aux_gain")?;
    ensure!(g.rows() == d && g.cols() == 1, "aux_gain must be {d} x 1");
    let aux_energy = rd.real("aux_energy")?;
    ensure!(aux_energy.rows() == k && aux_energy.cols() == d, "aux_energy must be {k} x {d}");
    Ok(DesignSolution {
        receive_strength,
        beamformers: if mn == 0 { vec![Vec::new(); d] } else { beamformers },
        quantization: q.column(0),
        aux_gain: g.column(0),
        aux_energy,
    })
}

pub fn write_channels<W: Write>(w: &mut W, ch: &ChannelSet) -> Result<()> {
    write_real(w, "layout", 2, 1, |r, _| if r == 0 { ch.rrhs() as f64 } else { ch.antennas() as f64 })?;
    write_complex(w, "channels", ch.mn(), ch.devices(), |r, c| ch.device(c)[r])
}

pub fn read_channels<R: BufRead>(r: R) -> Result<ChannelSet> {
    let mut rd = reader(r);
    let layout = rd.real("layout")?;
    ensure!(layout.rows() == 2 && layout.cols() == 1, "layout must be 2 x 1");
    let (m, n) = (layout.get(0, 0) as usize, layout.get(1, 0) as usize);
    let (mn, k, flat) = rd.complex("channels")?;
    ensure!(mn == m * n, "channels have {mn} rows, layout gives {}", m * n);
    let h = flat.chunks(mn.max(1)).take(k).map(|c| c.to_vec()).collect();
    ChannelSet::new(m, n, h).map_err(|e| anyhow::anyhow!("{e}"))
}

pub fn save_design(path: &Path, sol: &DesignSolution) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?);
    write_design(&mut w, sol)?;
    w.flush()?;
    Ok(())
}

pub fn load_design(path: &Path) -> Result<DesignSolution> {
    let f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_design(std::io::BufReader::new(f)).with_context(|| format!("in {}", path.display()))
}
