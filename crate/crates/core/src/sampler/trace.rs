//! Trace CSV: `chain,iteration,<coefficient names...>`, one row per kept draw.

use std::io::{Read, Write};

use super::PosteriorChain;
use crate::error::{Error, Result};

pub fn write_trace<W: Write>(out: W, chains: &[PosteriorChain], names: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["chain".to_string(), "iteration".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header)?;
    for chain in chains {
        if chain.dim != names.len() {
            return Err(Error::DimensionMismatch {
                expected: names.len(),
                got: chain.dim,
            });
        }
        for k in 0..chain.len() {
            let mut row = vec![
                chain.chain_index.to_string(),
                (chain.burn_in + k).to_string(),
            ];
            row.extend(chain.draw(k).iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(|e| Error::io("<trace>", e))?;
    Ok(())
}

/// Read a trace back as chains, in order of first appearance.
pub fn read_trace<R: Read>(input: R) -> Result<(Vec<String>, Vec<PosteriorChain>)> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.len() < 3 || &header[0] != "chain" || &header[1] != "iteration" {
        return Err(Error::Invalid(
            "trace header must start with chain,iteration".into(),
        ));
    }
    let names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let dim = names.len();
    let mut chains: Vec<(usize, usize, Vec<f64>)> = Vec::new();
    for record in r.records() {
        let record = record?;
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Invalid(format!("bad number `{s}` in trace")))
        };
        let chain: usize = record[0]
            .parse()
            .map_err(|_| Error::Invalid(format!("bad chain index `{}`", &record[0])))?;
        let iteration: usize = record[1]
            .parse()
            .map_err(|_| Error::Invalid(format!("bad iteration `{}`", &record[1])))?;
        let values = (2..record.len())
            .map(|i| parse(&record[i]))
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: values.len(),
            });
        }
        match chains.iter_mut().find(|(c, _, _)| *c == chain) {
            Some((_, _, draws)) => draws.extend(values),
            None => chains.push((chain, iteration, values)),
        }
    }
    let chains = chains
        .into_iter()
        .map(|(c, first_iter, draws)| {
            let mut pc = PosteriorChain::from_draws(c, dim, draws)?;
            pc.burn_in = first_iter;
            Ok(pc)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((names, chains))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_round_trips_exactly() {
        let mut a = PosteriorChain::from_draws(0, 2, vec![0.1, -2.5, 1e-17, 3.0]).unwrap();
        a.burn_in = 10;
        let mut b = PosteriorChain::from_draws(1, 2, vec![std::f64::consts::PI, 7.0]).unwrap();
        b.burn_in = 10;
        let names = vec!["(intercept)".to_string(), "age".to_string()];
        let mut buf = Vec::new();
        write_trace(&mut buf, &[a.clone(), b.clone()], &names).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("chain,iteration,(intercept),age\n0,10,"));
        let (read_names, chains) = read_trace(buf.as_slice()).unwrap();
        assert_eq!(read_names, names);
        assert_eq!(chains[0].draws, a.draws);
        assert_eq!(chains[1].draws, b.draws);
        assert_eq!(chains[1].chain_index, 1);
    }
}
