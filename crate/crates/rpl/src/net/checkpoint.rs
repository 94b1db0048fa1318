//! Flat-file persistence for networks and optimizer state.
//!
//! `RPLNET v1 <layer_sizes comma-separated>` followed by all parameters in
//! layer order (weight matrix row-major, then bias vector, per layer), one
//! decimal value per line printed at 17 significant digits, which round-trips
//! every finite `f64` bit-exactly.
//!
//! `RPLADAM v1` extends the same layout with the step counter and both
//! moment buffers so training can resume exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::net::{AdamState, GradientTape, Mlp};
use crate::{Error, Result};

/// 17 significant digits: exact round-trip for every finite f64.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Format(format!("{what}: bad float {s:?}")))
}

fn parse_sizes(field: &str) -> Result<Vec<usize>> {
    let sizes: Vec<usize> = field
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Format(format!("bad layer sizes {field:?}")))?;
    if sizes.len() < 2 || sizes.iter().any(|&s| s == 0) {
        return Err(Error::Format(format!("invalid layer sizes {sizes:?}")));
    }
    Ok(sizes)
}

impl Mlp {
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        let sizes: Vec<String> = self.layer_sizes().iter().map(|s| s.to_string()).collect();
        writeln!(w, "RPLNET v1 {}", sizes.join(","))?;
        for v in self.param_iter() {
            writeln!(w, "{}", fmt_f64(v))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Mlp> {
        let mut lines = BufReader::new(File::open(path)?).lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty network file".into()))??;
        let rest = header
            .strip_prefix("RPLNET v1 ")
            .ok_or_else(|| Error::Format(format!("bad network header {header:?}")))?;
        let sizes = parse_sizes(rest)?;
        let mut net = Mlp::new(&sizes, 0);
        let expected = net.param_count();
        let mut values = Vec::with_capacity(expected);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            values.push(parse_f64(&line, "network parameter")?);
        }
        if values.len() != expected {
            return Err(Error::Format(format!(
                "network file holds {} values, architecture {:?} needs {}",
                values.len(),
                sizes,
                expected
            )));
        }
        let mut it = values.into_iter();
        net.for_each_param_mut(|v| *v = it.next().unwrap());
        Ok(net)
    }
}

impl AdamState {
    pub fn save(&self, path: &Path, net: &Mlp) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        let sizes: Vec<String> = net.layer_sizes().iter().map(|s| s.to_string()).collect();
        writeln!(
            w,
            "RPLADAM v1 {} {} {} {} {} {}",
            sizes.join(","),
            self.step_count,
            fmt_f64(self.learning_rate),
            fmt_f64(self.beta1),
            fmt_f64(self.beta2),
            fmt_f64(self.epsilon),
        )?;
        let (m, v) = self.moments();
        for g in m.iter().chain(v.iter()) {
            writeln!(w, "{}", fmt_f64(g))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path, net: &Mlp) -> Result<AdamState> {
        let mut lines = BufReader::new(File::open(path)?).lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty optimizer file".into()))??;
        let rest = header
            .strip_prefix("RPLADAM v1 ")
            .ok_or_else(|| Error::Format(format!("bad optimizer header {header:?}")))?;
        let fields: Vec<&str> = rest.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(Error::Format(format!("bad optimizer header {header:?}")));
        }
        let sizes = parse_sizes(fields[0])?;
        if sizes != net.layer_sizes() {
            return Err(Error::Format(format!(
                "optimizer file architecture {:?} does not match network {:?}",
                sizes,
                net.layer_sizes()
            )));
        }
        let mut state = AdamState::new(net, parse_f64(fields[2], "learning rate")?);
        state.step_count = fields[1]
            .parse()
            .map_err(|_| Error::Format(format!("bad step count {:?}", fields[1])))?;
        state.beta1 = parse_f64(fields[3], "beta1")?;
        state.beta2 = parse_f64(fields[4], "beta2")?;
        state.epsilon = parse_f64(fields[5], "epsilon")?;

        let mut values = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            values.push(parse_f64(&line, "moment value")?);
        }
        let expected = 2 * net.param_count();
        if values.len() != expected {
            return Err(Error::Format(format!(
                "optimizer file holds {} values, expected {}",
                values.len(),
                expected
            )));
        }
        let mut it = values.into_iter();
        let (m, v) = state.moments_mut();
        fill_tape(m, &mut it);
        fill_tape(v, &mut it);
        Ok(state)
    }
}

fn fill_tape(tape: &mut GradientTape, it: &mut impl Iterator<Item = f64>) {
    for w in &mut tape.d_weights {
        for g in w.iter_mut() {
            *g = it.next().unwrap();
        }
    }
    for b in &mut tape.d_biases {
        for g in b.iter_mut() {
            *g = it.next().unwrap();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::adam_step;

    #[test]
    fn network_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("actor.net");
        let net = Mlp::new(&[3, 17, 5], 0xBEEF);
        net.save(&path).unwrap();
        let loaded = Mlp::load(&path).unwrap();
        assert_eq!(net, loaded);
        let header = std::fs::read_to_string(&path).unwrap();
        assert!(header.starts_with("RPLNET v1 3,17,5\n"));
    }

    #[test]
    fn adam_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("actor.adam");
        let mut net = Mlp::new(&[2, 6, 1], 4);
        let mut state = AdamState::new(&net, 1e-3);
        for _ in 0..3 {
            let (tape, _) = net.backward_new(&[0.5, -1.2], &[1.0]);
            adam_step(&mut net, &mut state, &tape).unwrap();
        }
        state.save(&path, &net).unwrap();
        let loaded = AdamState::load(&path, &net).unwrap();
        assert_eq!(state, loaded);
    }

    #[test]
    fn wrong_value_count_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("broken.net");
        std::fs::write(&path, "RPLNET v1 2,2\n1.0\n2.0\n").unwrap();
        assert!(Mlp::load(&path).is_err());
    }
}
