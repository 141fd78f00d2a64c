//! Text file formats: layers, approximants, quadrature rules, point lists,
//! and value lists. All floating-point output carries 17 significant digits
//! so files round-trip losslessly; writes go through a temp file plus rename.

use crate::errors::{CmdError, CmdResult};
use sphlsq::fitting::Approximant;
use sphlsq::harmonics::BasisSpec;
use sphlsq::points::{Layer, UnitPoint};
use sphlsq::quadrature::QuadratureRule;
use std::fmt::Write as _;
use std::path::Path;

/// 17 significant digits; parses back to the identical bits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn atomic_write(path: &Path, content: &str) -> CmdResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| CmdError::io(format!("creating temp file in {}: {e}", dir.display())))?;
    std::io::Write::write_all(&mut tmp, content.as_bytes())
        .map_err(|e| CmdError::io(format!("writing {}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| CmdError::io(format!("renaming into {}: {e}", path.display())))?;
    Ok(())
}

fn read_to_string(path: &Path) -> CmdResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CmdError::io(format!("reading {}: {e}", path.display())))
}

fn parse_f64(tok: &str, what: &str, line_no: usize) -> CmdResult<f64> {
    tok.parse::<f64>()
        .map_err(|_| CmdError::validation(format!("line {line_no}: bad {what} `{tok}`")))
}

/// Layer format: header `d n l_n`, then `x1 x2 x3 tau` per point.
pub fn write_layer(path: &Path, layer: &Layer) -> CmdResult<()> {
    let mut out = String::new();
    let _ = writeln!(out, "2 {} {}", layer.degree, layer.len());
    for (p, tau) in layer.points.iter().zip(&layer.weights) {
        let [x, y, z] = p.coords();
        let _ = writeln!(out, "{} {} {} {}", fmt_f64(x), fmt_f64(y), fmt_f64(z), fmt_f64(*tau));
    }
    atomic_write(path, &out)
}

pub fn read_layer(path: &Path) -> CmdResult<Layer> {
    let text = read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CmdError::validation("empty layer file".to_string()))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 3 || head[0] != "2" {
        return Err(CmdError::validation(format!(
            "layer header must be `2 n l_n`, got `{header}`"
        )));
    }
    let degree: u32 = head[1]
        .parse()
        .map_err(|_| CmdError::validation(format!("bad degree `{}`", head[1])))?;
    let count: usize = head[2]
        .parse()
        .map_err(|_| CmdError::validation(format!("bad point count `{}`", head[2])))?;
    let mut points = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 4 {
            return Err(CmdError::validation(format!(
                "line {}: expected `x1 x2 x3 tau`",
                idx + 1
            )));
        }
        let x = parse_f64(toks[0], "coordinate", idx + 1)?;
        let y = parse_f64(toks[1], "coordinate", idx + 1)?;
        let z = parse_f64(toks[2], "coordinate", idx + 1)?;
        let tau = parse_f64(toks[3], "weight", idx + 1)?;
        let p = UnitPoint::new(x, y, z)
            .map_err(|e| CmdError::validation(format!("line {}: {e}", idx + 1)))?;
        points.push(p);
        weights.push(tau);
    }
    if points.len() != count {
        return Err(CmdError::validation(format!(
            "header promises {count} points, file has {}",
            points.len()
        )));
    }
    Layer::new(degree, points, weights, format!("file:{}", path.display()))
        .map_err(|e| CmdError::validation(e.to_string()))
}

/// Approximant format: header `d n`, then one coefficient per line in the
/// frozen basis ordering.
pub fn write_approximant(path: &Path, a: &Approximant) -> CmdResult<()> {
    let mut out = String::new();
    let _ = writeln!(out, "2 {}", a.degree());
    for c in &a.coefficients {
        let _ = writeln!(out, "{}", fmt_f64(*c));
    }
    atomic_write(path, &out)
}

pub fn read_approximant(path: &Path) -> CmdResult<Approximant> {
    let text = read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CmdError::validation("empty approximant file".to_string()))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 2 || head[0] != "2" {
        return Err(CmdError::validation(format!(
            "approximant header must be `2 n`, got `{header}`"
        )));
    }
    let degree: u32 = head[1]
        .parse()
        .map_err(|_| CmdError::validation(format!("bad degree `{}`", head[1])))?;
    let mut coeffs = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        coeffs.push(parse_f64(line.trim(), "coefficient", idx + 1)?);
    }
    Approximant::new(BasisSpec::new(2, degree), coeffs)
        .map_err(|e| CmdError::validation(e.to_string()))
}

/// Rule format: header `d n l_n exactness_degree`, then `x1 x2 x3 w`.
pub fn write_rule(path: &Path, rule: &QuadratureRule) -> CmdResult<()> {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "2 {} {} {}",
        rule.layer.degree,
        rule.len(),
        rule.exactness_degree
    );
    for (p, w) in rule.layer.points.iter().zip(&rule.weights) {
        let [x, y, z] = p.coords();
        let _ = writeln!(out, "{} {} {} {}", fmt_f64(x), fmt_f64(y), fmt_f64(z), fmt_f64(*w));
    }
    atomic_write(path, &out)
}

/// Point list: `x1 x2 x3` per line.
pub fn read_points(path: &Path) -> CmdResult<Vec<UnitPoint>> {
    let text = read_to_string(path)?;
    let mut pts = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(CmdError::validation(format!("line {}: expected `x1 x2 x3`", idx + 1)));
        }
        let p = UnitPoint::new(
            parse_f64(toks[0], "coordinate", idx + 1)?,
            parse_f64(toks[1], "coordinate", idx + 1)?,
            parse_f64(toks[2], "coordinate", idx + 1)?,
        )
        .map_err(|e| CmdError::validation(format!("line {}: {e}", idx + 1)))?;
        pts.push(p);
    }
    Ok(pts)
}

/// Value list: one number per line, aligned with a layer's point order.
pub fn read_values(path: &Path) -> CmdResult<Vec<f64>> {
    let text = read_to_string(path)?;
    let mut vals = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        vals.push(parse_f64(line.trim(), "value", idx + 1)?);
    }
    Ok(vals)
}
