//! PFCIDUMP: an FCIDUMP-style text format carrying complex integrals and
//! k-point labels.
//!
//! ```text
//! &PFCI NORB=<n> NELEC=<n> MS2=<n> NKPT=<n> ECORE=<real>
//! KPT <idx> <fx> <fy> <fz>          (NKPT lines)
//! ORBK <k_1> ... <k_NORB>
//! <re> <im> <p> <q> <r> <s>         (integral records, 1-based)
//! ```
//!
//! `r = s = 0` marks a one-body entry `h^p_q`, all-zero indices an addend to
//! the core energy. Integrals that are not listed are zero. `#` starts a
//! comment.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use super::{IntegralSet, KMesh, Tensor4};
use crate::{Error, Result, C64};

/// Entries below this magnitude are not written.
pub const WRITE_TOL: f64 = 1e-12;

/// Hermiticity violations above this are rejected on load.
pub const LOAD_HERM_TOL: f64 = 1e-8;

pub fn load_pfcidump(path: impl AsRef<Path>) -> Result<IntegralSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    read_pfcidump(&text, path)
}

pub(crate) fn parse_real(tok: &str) -> Option<f64> {
    tok.replace(['D', 'd'], "E").parse().ok()
}

struct Header {
    norb: usize,
    nelec: usize,
    ms2: i32,
    nkpt: usize,
    ecore: f64,
}

fn parse_header(line: &str) -> std::result::Result<Header, String> {
    let body = line
        .trim()
        .strip_prefix("&PFCI")
        .ok_or("expected '&PFCI' header")?;
    let mut fields = std::collections::HashMap::new();
    for tok in body.split(|c: char| c.is_whitespace() || c == ',') {
        let tok = tok.trim().trim_end_matches('/');
        if tok.is_empty() || tok == "&END" {
            continue;
        }
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| format!("malformed header field '{tok}'"))?;
        fields.insert(k.to_ascii_uppercase(), v.to_string());
    }
    let get = |k: &str| fields.get(k).ok_or_else(|| format!("header is missing {k}"));
    let int = |k: &str| -> std::result::Result<i64, String> {
        get(k)?.parse().map_err(|_| format!("bad integer for {k}"))
    };
    let norb = int("NORB")?;
    let nelec = int("NELEC")?;
    let nkpt = int("NKPT")?;
    if norb < 1 || nelec < 0 || nkpt < 1 {
        return Err("NORB and NKPT must be positive, NELEC non-negative".into());
    }
    Ok(Header {
        norb: norb as usize,
        nelec: nelec as usize,
        ms2: int("MS2")? as i32,
        nkpt: nkpt as usize,
        ecore: match fields.get("ECORE") {
            Some(v) => parse_real(v).ok_or("bad real for ECORE")?,
            None => 0.0,
        },
    })
}

/// Parses PFCIDUMP text; `path` is used for error messages only.
pub fn read_pfcidump(text: &str, path: &Path) -> Result<IntegralSet> {
    let err = |line: usize, msg: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        msg,
    };

    let mut header: Option<Header> = None;
    let mut basis_label = String::new();
    let mut kpts: Vec<Option<[f64; 3]>> = Vec::new();
    let mut orb_k: Option<Vec<usize>> = None;
    let mut h1: Option<DMatrix<C64>> = None;
    let mut h2: Option<Tensor4> = None;
    let mut ecore_add = 0.0;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let (content, comment) = match raw.split_once('#') {
            Some((a, b)) => (a, Some(b)),
            None => (raw, None),
        };
        if let Some(c) = comment {
            if let Some(label) = c.trim().strip_prefix("basis:") {
                basis_label = label.trim().to_string();
            }
        }
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let Some(hd) = header.as_ref() else {
            let hd = parse_header(content).map_err(|m| err(lineno, m))?;
            kpts = vec![None; hd.nkpt];
            h1 = Some(DMatrix::zeros(hd.norb, hd.norb));
            h2 = Some(Tensor4::zeros(hd.norb));
            header = Some(hd);
            continue;
        };
        let toks: Vec<&str> = content.split_whitespace().collect();
        match toks[0] {
            "KPT" => {
                if toks.len() != 5 {
                    return Err(err(lineno, "KPT needs an index and three coordinates".into()));
                }
                let idx: usize = toks[1]
                    .parse()
                    .ok()
                    .filter(|&k| k >= 1 && k <= hd.nkpt)
                    .ok_or_else(|| err(lineno, format!("bad k-point index '{}'", toks[1])))?;
                let mut p = [0.0; 3];
                for c in 0..3 {
                    p[c] = parse_real(toks[2 + c])
                        .ok_or_else(|| err(lineno, format!("bad coordinate '{}'", toks[2 + c])))?;
                }
                if kpts[idx - 1].replace(p).is_some() {
                    return Err(err(lineno, format!("k-point {idx} given twice")));
                }
            }
            "ORBK" => {
                if toks.len() != hd.norb + 1 {
                    return Err(err(lineno, format!("ORBK needs {} entries", hd.norb)));
                }
                let ks = toks[1..]
                    .iter()
                    .map(|t| {
                        t.parse::<usize>()
                            .ok()
                            .filter(|&k| k >= 1 && k <= hd.nkpt)
                            .map(|k| k - 1)
                            .ok_or_else(|| err(lineno, format!("bad k index '{t}'")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                orb_k = Some(ks);
            }
            _ => {
                if toks.len() != 6 {
                    return Err(err(lineno, "integral record needs 're im p q r s'".into()));
                }
                let re = parse_real(toks[0]).ok_or_else(|| err(lineno, format!("bad real '{}'", toks[0])))?;
                let im = parse_real(toks[1]).ok_or_else(|| err(lineno, format!("bad real '{}'", toks[1])))?;
                let mut idx = [0usize; 4];
                for c in 0..4 {
                    idx[c] = toks[2 + c]
                        .parse()
                        .ok()
                        .filter(|&v| v <= hd.norb)
                        .ok_or_else(|| err(lineno, format!("bad orbital index '{}'", toks[2 + c])))?;
                }
                let v = C64::new(re, im);
                match idx {
                    [0, 0, 0, 0] => {
                        if im.abs() > LOAD_HERM_TOL {
                            return Err(err(lineno, "core energy must be real".into()));
                        }
                        ecore_add += re;
                    }
                    [p, q, 0, 0] if p > 0 && q > 0 => {
                        h1.as_mut().unwrap()[(p - 1, q - 1)] = v;
                    }
                    [p, q, r, s] if p > 0 && q > 0 && r > 0 && s > 0 => {
                        h2.as_mut().unwrap().set(p - 1, q - 1, r - 1, s - 1, v);
                    }
                    _ => return Err(err(lineno, "invalid index pattern".into())),
                }
            }
        }
    }

    let hd = header.ok_or_else(|| err(0, "missing &PFCI header".into()))?;
    let points = kpts
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or_else(|| err(0, format!("k-point {} missing", i + 1))))
        .collect::<Result<Vec<_>>>()?;
    let kmesh = KMesh::new(points).map_err(|e| err(0, e.to_string()))?;
    let orb_k = match orb_k {
        Some(k) => k,
        None if hd.nkpt == 1 => vec![0; hd.norb],
        None => return Err(err(0, "ORBK line missing".into())),
    };
    let ints = IntegralSet {
        norb: hd.norb,
        nelec: hd.nelec,
        ms2: hd.ms2,
        kmesh,
        orb_k,
        h1: h1.unwrap(),
        h2: h2.unwrap(),
        ecore: hd.ecore + ecore_add,
        basis_label,
    };
    ints.validate(LOAD_HERM_TOL)?;
    Ok(ints)
}

pub(crate) fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_pfcidump_to(ints: &IntegralSet, out: &mut String) {
    let n = ints.norb;
    let _ = writeln!(
        out,
        "&PFCI NORB={} NELEC={} MS2={} NKPT={} ECORE={}",
        n,
        ints.nelec,
        ints.ms2,
        ints.kmesh.nkpt(),
        fmt_real(ints.ecore)
    );
    if !ints.basis_label.is_empty() {
        let _ = writeln!(out, "# basis: {}", ints.basis_label);
    }
    let _ = writeln!(out, "# two-body: h^{{pq}}_{{rs}} = (p s | q r), H = 1/2 sum h^{{pq}}_{{rs}} a+_p a+_q a_r a_s");
    for (i, p) in ints.kmesh.points().iter().enumerate() {
        let _ = writeln!(
            out,
            "KPT {} {} {} {}",
            i + 1,
            fmt_real(p[0]),
            fmt_real(p[1]),
            fmt_real(p[2])
        );
    }
    out.push_str("ORBK");
    for k in &ints.orb_k {
        let _ = write!(out, " {}", k + 1);
    }
    out.push('\n');
    for ([p, q, r, s], v) in ints.h2.iter_indexed() {
        if v.norm() >= WRITE_TOL {
            let _ = writeln!(
                out,
                "{} {} {} {} {} {}",
                fmt_real(v.re),
                fmt_real(v.im),
                p + 1,
                q + 1,
                r + 1,
                s + 1
            );
        }
    }
    for p in 0..n {
        for q in 0..n {
            let v = ints.h1[(p, q)];
            if v.norm() >= WRITE_TOL {
                let _ = writeln!(out, "{} {} {} {} 0 0", fmt_real(v.re), fmt_real(v.im), p + 1, q + 1);
            }
        }
    }
}

pub fn write_pfcidump(ints: &IntegralSet, path: impl AsRef<Path>) -> Result<()> {
    let mut s = String::new();
    write_pfcidump_to(ints, &mut s);
    fs::write(path, s)?;
    Ok(())
}
