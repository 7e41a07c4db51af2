use std::io::{BufRead, Write};

use super::{LatticeParams, LatticeRegime, LatticeState};
use crate::error::{Error, Result};
use crate::spectral::signed_index;

/// CSV dump of a state: `#` header lines with the model, then
/// `j1,j2,Q,P` rows over signed site indices.
pub fn write_snapshot_csv<W: Write>(state: &LatticeState, params: &LatticeParams, mut w: W) -> Result<()> {
    writeln!(w, "# regime={}", params.regime)?;
    writeln!(w, "# N1={}", params.big_n1)?;
    writeln!(w, "# N2={}", params.big_n2)?;
    writeln!(w, "# alpha={:.16e}", params.alpha)?;
    writeln!(w, "# beta={:.16e}", params.beta)?;
    writeln!(w, "# t={:.16e}", state.t)?;
    writeln!(w, "j1,j2,Q,P")?;
    let (n1, n2) = state.extents();
    for o in 0..n1 * n2 {
        writeln!(
            w,
            "{},{},{:.16e},{:.16e}",
            signed_index(o / n2, n1),
            signed_index(o % n2, n2),
            state.q[o],
            state.p[o]
        )?;
    }
    Ok(())
}

/// Inverse of [`write_snapshot_csv`].
pub fn read_snapshot_csv<R: BufRead>(r: R) -> Result<(LatticeParams, LatticeState)> {
    let mut regime = None;
    let (mut b1, mut b2, mut alpha, mut beta, mut t) = (None, None, None, None, None);
    let mut rows = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let bad = |msg: &str| Error::Parse { line: i + 1, msg: msg.to_string() };
        if let Some(h) = line.strip_prefix('#') {
            let (k, v) = h.trim().split_once('=').ok_or_else(|| bad("header needs key=value"))?;
            let num = || v.parse::<f64>().map_err(|_| bad("bad number"));
            match k {
                "regime" => {
                    regime = Some(match v {
                        "ETL" => LatticeRegime::Etl,
                        "KG" => LatticeRegime::Kg,
                        _ => return Err(bad("unknown regime")),
                    })
                }
                "N1" => b1 = Some(v.parse::<usize>().map_err(|_| bad("bad N1"))?),
                "N2" => b2 = Some(v.parse::<usize>().map_err(|_| bad("bad N2"))?),
                "alpha" => alpha = Some(num()?),
                "beta" => beta = Some(num()?),
                "t" => t = Some(num()?),
                _ => return Err(bad("unknown header key")),
            }
            continue;
        }
        if line == "j1,j2,Q,P" || line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(bad("expected 4 columns"));
        }
        let j1 = f[0].parse::<i64>().map_err(|_| bad("bad j1"))?;
        let j2 = f[1].parse::<i64>().map_err(|_| bad("bad j2"))?;
        let q = f[2].parse::<f64>().map_err(|_| bad("bad Q"))?;
        let p = f[3].parse::<f64>().map_err(|_| bad("bad P"))?;
        rows.push((j1, j2, q, p));
    }
    let missing = |k: &str| Error::Parse { line: 0, msg: format!("missing header {k}") };
    let params = LatticeParams::new(
        regime.ok_or_else(|| missing("regime"))?,
        b1.ok_or_else(|| missing("N1"))?,
        b2.ok_or_else(|| missing("N2"))?,
        alpha.ok_or_else(|| missing("alpha"))?,
        beta.ok_or_else(|| missing("beta"))?,
    )?;
    let mut s = LatticeState::zeros(&params);
    if rows.len() != params.sites() {
        return Err(Error::Parse { line: 0, msg: format!("expected {} rows, got {}", params.sites(), rows.len()) });
    }
    for (j1, j2, q, p) in rows {
        let o = s.offset(j1, j2);
        s.q[o] = q;
        s.p[o] = p;
    }
    s.t = t.ok_or_else(|| missing("t"))?;
    Ok((params, s))
}
