//! Supercell dump: orbital coefficients, orbital energies and the basis
//! overlap of the supercell, in the lexical style of PFCIDUMP.
//!
//! ```text
//! &SCELL NBASIS=<n> NORB=<n> NKPT=<n>
//! KPT <idx> <fx> <fy> <fz>          (NKPT lines)
//! ORBK <k_1> ... <k_NORB>
//! CMO <row> <col> <re> <im>         (coefficient of basis row in orbital col)
//! EIG <col> <re>                    (orbital energy)
//! SOV <row> <col> <re>              (basis overlap)
//! ```
//!
//! Indices are 1-based and unlisted entries are zero, except that a file
//! without any `SOV` record has an orthonormal basis (identity overlap).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use super::OrbitalSet;
use crate::hamiltonian::{fmt_real, parse_real, KMesh};
use crate::{Error, Result, C64};

pub fn load_supercell_dump(path: impl AsRef<Path>) -> Result<OrbitalSet> {
    let path = path.as_ref();
    read_supercell_dump(&fs::read_to_string(path)?, path)
}

pub fn read_supercell_dump(text: &str, path: &Path) -> Result<OrbitalSet> {
    let err = |line: usize, msg: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        msg,
    };
    let mut dims: Option<(usize, usize, usize)> = None;
    let mut kpts: Vec<Option<[f64; 3]>> = Vec::new();
    let mut orb_k: Option<Vec<usize>> = None;
    let mut c = DMatrix::<C64>::zeros(0, 0);
    let mut s = DMatrix::<C64>::zeros(0, 0);
    let mut energies: Vec<Option<f64>> = Vec::new();
    let mut any_overlap = false;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let Some((nb, no, nk)) = dims else {
            let body = content
                .strip_prefix("&SCELL")
                .ok_or_else(|| err(lineno, "expected '&SCELL' header".into()))?;
            let mut fields = HashMap::new();
            for tok in body.split(|ch: char| ch.is_whitespace() || ch == ',') {
                let tok = tok.trim().trim_end_matches('/');
                if tok.is_empty() || tok == "&END" {
                    continue;
                }
                let (k, v) = tok
                    .split_once('=')
                    .ok_or_else(|| err(lineno, format!("malformed header field '{tok}'")))?;
                let v: usize = v
                    .parse()
                    .map_err(|_| err(lineno, format!("bad integer for {k}")))?;
                fields.insert(k.to_ascii_uppercase(), v);
            }
            let get = |k: &str| {
                fields
                    .get(k)
                    .copied()
                    .filter(|&v| v > 0)
                    .ok_or_else(|| err(lineno, format!("header needs a positive {k}")))
            };
            let d = (get("NBASIS")?, get("NORB")?, get("NKPT")?);
            kpts = vec![None; d.2];
            c = DMatrix::zeros(d.0, d.1);
            s = DMatrix::zeros(d.0, d.0);
            energies = vec![None; d.1];
            dims = Some(d);
            continue;
        };
        let index = |tok: &str, max: usize| {
            tok.parse::<usize>()
                .ok()
                .filter(|&v| v >= 1 && v <= max)
                .map(|v| v - 1)
                .ok_or_else(|| err(lineno, format!("bad index '{tok}'")))
        };
        let real = |tok: &str| parse_real(tok).ok_or_else(|| err(lineno, format!("bad real '{tok}'")));
        let arity = |n: usize| {
            if toks.len() == n {
                Ok(())
            } else {
                Err(err(lineno, format!("{} needs {} fields", toks[0], n - 1)))
            }
        };
        match toks[0] {
            "KPT" => {
                arity(5)?;
                let k = index(toks[1], nk)?;
                let p = [real(toks[2])?, real(toks[3])?, real(toks[4])?];
                if kpts[k].replace(p).is_some() {
                    return Err(err(lineno, format!("k-point {} given twice", k + 1)));
                }
            }
            "ORBK" => {
                arity(no + 1)?;
                orb_k = Some(toks[1..].iter().map(|t| index(t, nk)).collect::<Result<_>>()?);
            }
            "CMO" => {
                arity(5)?;
                c[(index(toks[1], nb)?, index(toks[2], no)?)] = C64::new(real(toks[3])?, real(toks[4])?);
            }
            "EIG" => {
                arity(3)?;
                energies[index(toks[1], no)?] = Some(real(toks[2])?);
            }
            "SOV" => {
                arity(4)?;
                s[(index(toks[1], nb)?, index(toks[2], nb)?)] = C64::new(real(toks[3])?, 0.0);
                any_overlap = true;
            }
            other => return Err(err(lineno, format!("unknown record '{other}'"))),
        }
    }
    let (nb, no, nk) = dims.ok_or_else(|| err(0, "missing &SCELL header".into()))?;
    let points = kpts
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or_else(|| err(0, format!("k-point {} missing", i + 1))))
        .collect::<Result<Vec<_>>>()?;
    let energies = energies
        .into_iter()
        .enumerate()
        .map(|(i, e)| e.ok_or_else(|| err(0, format!("orbital energy {} missing", i + 1))))
        .collect::<Result<Vec<_>>>()?;
    let orb_k = match orb_k {
        Some(k) => k,
        None if nk == 1 => vec![0; no],
        None => return Err(err(0, "ORBK line missing".into())),
    };
    if !any_overlap {
        s = DMatrix::identity(nb, nb);
    }
    Ok(OrbitalSet {
        coefficients: c,
        energies,
        overlap: s,
        orb_k,
        kmesh: KMesh::new(points).map_err(|e| err(0, e.to_string()))?,
    })
}

pub fn write_supercell_dump_to(set: &OrbitalSet, out: &mut String) {
    let (nb, no) = (set.n_basis(), set.n_orbitals());
    let _ = writeln!(out, "&SCELL NBASIS={nb} NORB={no} NKPT={}", set.kmesh.nkpt());
    for (i, p) in set.kmesh.points().iter().enumerate() {
        let _ = writeln!(out, "KPT {} {} {} {}", i + 1, fmt_real(p[0]), fmt_real(p[1]), fmt_real(p[2]));
    }
    out.push_str("ORBK");
    for k in &set.orb_k {
        let _ = write!(out, " {}", k + 1);
    }
    out.push('\n');
    for j in 0..no {
        for i in 0..nb {
            let v = set.coefficients[(i, j)];
            if v.norm() > 0.0 {
                let _ = writeln!(out, "CMO {} {} {} {}", i + 1, j + 1, fmt_real(v.re), fmt_real(v.im));
            }
        }
    }
    for (j, e) in set.energies.iter().enumerate() {
        let _ = writeln!(out, "EIG {} {}", j + 1, fmt_real(*e));
    }
    for i in 0..nb {
        for j in 0..nb {
            let v = set.overlap[(i, j)].re;
            if v != 0.0 {
                let _ = writeln!(out, "SOV {} {} {}", i + 1, j + 1, fmt_real(v));
            }
        }
    }
}

pub fn write_supercell_dump(set: &OrbitalSet, path: impl AsRef<Path>) -> Result<()> {
    let mut s = String::new();
    write_supercell_dump_to(set, &mut s);
    fs::write(path, s)?;
    Ok(())
}
