//! Stable text and JSON formats: matrix files, group specifications, position
//! space dumps and balanced ideal censuses.

use crate::bruhat::{ParabolicType, PositionSpace};
use crate::domain::MatrixGroupSpec;
use crate::ideal::BalancedCensus;
use crate::mat::Mat;
use crate::rep;
use crate::weyl::{GroupContext, SignedPermutation};
use crate::{Error, Result};
use serde::Deserialize;
use serde_json::{json, Value};

/// Parses whitespace-separated matrices: one row per line, blank lines
/// separate matrices, `#` starts a comment.
pub fn parse_matrices(text: &str) -> Result<Vec<Mat<f64>>> {
    let mut out = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            if !rows.is_empty() {
                out.push(Mat::from_rows(std::mem::take(&mut rows))?);
            }
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split_whitespace().map(str::parse::<f64>).collect();
        rows.push(row.map_err(|e| Error::Parse(format!("bad number: {e}")))?);
    }
    if !rows.is_empty() {
        out.push(Mat::from_rows(rows)?);
    }
    Ok(out)
}

/// Accepts either the plain text format or the JSON form `{"rows": [[...]]}`.
pub fn parse_matrix_file(text: &str) -> Result<Vec<Mat<f64>>> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        #[derive(Deserialize)]
        struct JsonMatrix {
            rows: Vec<Vec<f64>>,
        }
        if trimmed.starts_with('[') {
            let many: Vec<JsonMatrix> = serde_json::from_str(trimmed)?;
            return many.into_iter().map(|m| Mat::from_rows(m.rows)).collect();
        }
        let one: JsonMatrix = serde_json::from_str(trimmed)?;
        return Ok(vec![Mat::from_rows(one.rows)?]);
    }
    parse_matrices(text)
}

/// JSON group specification:
/// `{n, rank, generators: [[[...]]], via: "direct" | "irreducible" | "block:k"}`.
#[derive(Deserialize)]
struct GroupSpecJson {
    n: usize,
    rank: usize,
    generators: Vec<Vec<Vec<f64>>>,
    #[serde(default = "default_via")]
    via: String,
}

fn default_via() -> String {
    "direct".into()
}

/// Builds the matrix group of a JSON spec, composing 2×2 generators through
/// the irreducible or interlaced block embedding when requested.
pub fn parse_group_spec(text: &str, eps: f64) -> Result<MatrixGroupSpec> {
    let spec: GroupSpecJson = serde_json::from_str(text)?;
    if spec.generators.len() != spec.rank {
        return Err(Error::Parse(format!(
            "rank {} but {} generators",
            spec.rank,
            spec.generators.len()
        )));
    }
    let raw: Result<Vec<Mat<f64>>> = spec
        .generators
        .into_iter()
        .map(Mat::from_rows)
        .collect();
    let raw = raw?;
    let generators: Result<Vec<Mat<f64>>> = match spec.via.as_str() {
        "direct" => Ok(raw),
        "irreducible" => raw.iter().map(|a| rep::irreducible_rep(spec.n, a)).collect(),
        other => {
            let Some(k) = other.strip_prefix("block:").and_then(|s| s.parse::<usize>().ok())
            else {
                return Err(Error::Parse(format!("unknown via `{other}`")));
            };
            let ctx = GroupContext::new(spec.n, false)?;
            let z = rep::interlacer(spec.n, k)?;
            let zmat: Mat<f64> = Mat::from_signed_permutation(&z);
            let zinv: Mat<f64> = Mat::from_signed_permutation(&ctx.inverse(&z));
            raw.iter()
                .map(|a| Ok(zmat.mul(&rep::block_embedding(spec.n, k, a)?).mul(&zinv)))
                .collect()
        }
    };
    MatrixGroupSpec::new(spec.n, generators?, eps)
}

fn type_json(t: &ParabolicType) -> Value {
    json!({
        "theta": t.theta(),
        "E": t.e_subgroup().iter().map(|m| m.to_string()).collect::<Vec<_>>(),
    })
}

/// Dump of a position space with its order matrix.
pub fn space_json(space: &PositionSpace) -> Value {
    let n = space.len();
    let leq: Vec<Vec<bool>> = (0..n)
        .map(|a| (0..n).map(|b| space.leq(a, b)).collect())
        .collect();
    json!({
        "n": space.ctx().n(),
        "projective": space.ctx().projective(),
        "R": type_json(space.r()),
        "S": type_json(space.s()),
        "classes": space.classes().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "leq": leq,
    })
}

/// Census dump: member classes of each balanced ideal, plus the partition
/// into right sign-group orbits.
pub fn census_json(census: &BalancedCensus, space: &PositionSpace) -> Value {
    json!({
        "count": census.count(),
        "ideals": census
            .ideals()
            .iter()
            .map(|i| {
                i.class_indices()
                    .iter()
                    .map(|&c| space.class_rep(c).to_string())
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>(),
        "mbar_classes": census.mbar_classes(),
    })
}

/// Parses the transverse-element encoding `antidiag:+,-,+` (signs from the
/// top-right entry to the bottom-left), or a full signed one-line permutation.
pub fn parse_w0(ctx: &GroupContext, text: &str) -> Result<SignedPermutation> {
    if let Some(spec) = text.strip_prefix("antidiag:") {
        let signs: Result<Vec<i8>> = spec
            .split(',')
            .map(|tok| match tok.trim() {
                "+" | "+1" | "1" => Ok(1),
                "-" | "-1" => Ok(-1),
                other => Err(Error::Parse(format!("bad sign `{other}`"))),
            })
            .collect();
        return ctx.antidiagonal(&signs?);
    }
    let w: SignedPermutation = text.parse()?;
    if w.rank() != ctx.n() {
        return Err(Error::RankMismatch(w.rank(), ctx.n()));
    }
    Ok(ctx.canonize(w))
}

/// Parses a sign-string diagonal like `++-+` or `+,-,+`.
pub fn parse_diagonal(ctx: &GroupContext, text: &str) -> Result<SignedPermutation> {
    let signs: Result<Vec<i8>> = if text.contains(',') {
        text.split(',')
            .map(|tok| match tok.trim() {
                "+" | "+1" | "1" => Ok(1),
                "-" | "-1" => Ok(-1),
                other => Err(Error::Parse(format!("bad sign `{other}`"))),
            })
            .collect()
    } else {
        text.chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(Error::Parse(format!("bad sign `{other}`"))),
            })
            .collect()
    };
    ctx.diagonal(&signs?)
}

/// Parses a parabolic type spec `theta=1,2;E=++-+,--+-` (either part may be
/// omitted; `E=all` means the whole sign group, `E=min` the part forced by
/// theta).
pub fn parse_type_spec(ctx: &GroupContext, text: &str) -> Result<ParabolicType> {
    // A comma is also accepted as the separator in front of a component key,
    // so `theta=1,2,E=min` parses the same as `theta=1,2;E=min`.
    let text = text.replace(",E=", ";E=").replace(",theta=", ";theta=");
    let mut theta: Vec<usize> = Vec::new();
    let mut e_spec: Option<String> = None;
    for part in text.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if let Some(list) = part.strip_prefix("theta=") {
            if !list.trim().is_empty() {
                let parsed: std::result::Result<Vec<usize>, _> =
                    list.split(',').map(|t| t.trim().parse::<usize>()).collect();
                theta = parsed.map_err(|e| Error::Parse(format!("bad theta: {e}")))?;
            }
        } else if let Some(spec) = part.strip_prefix("E=") {
            e_spec = Some(spec.trim().to_string());
        } else {
            return Err(Error::Parse(format!("unknown type component `{part}`")));
        }
    }
    let e: Vec<SignedPermutation> = match e_spec.as_deref() {
        None | Some("min") => crate::bruhat::mbar_theta(ctx, &theta)?,
        Some("all") => ctx.mbar_elements(),
        Some(list) => list
            .split(',')
            .map(|tok| parse_diagonal(ctx, tok.trim()))
            .collect::<Result<Vec<_>>>()?,
    };
    crate::bruhat::make_parabolic_type(ctx, &theta, &e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bruhat::{position_space, sphere_data, trivial_type};

    #[test]
    fn matrix_text_round_trip() {
        let text = "# comment\n1 0\n0 1\n\n2 0 # trailing\n0 0.5\n";
        let mats = parse_matrices(text).unwrap();
        assert_eq!(mats.len(), 2);
        assert_eq!(mats[0][(0, 0)], 1.0);
        assert_eq!(mats[1][(1, 1)], 0.5);

        let js = r#"{"rows": [[1, 2], [3, 4]]}"#;
        let mats = parse_matrix_file(js).unwrap();
        assert_eq!(mats[0][(1, 0)], 3.0);
    }

    #[test]
    fn group_spec_via_irreducible() {
        let js = r#"{
            "n": 3, "rank": 1,
            "generators": [[[2, 0], [0, 0.5]]],
            "via": "irreducible"
        }"#;
        let spec = parse_group_spec(js, 1e-9).unwrap();
        assert_eq!(spec.n(), 3);
        let g = spec.generator(0);
        assert!((g[(0, 0)] - 4.0).abs() < 1e-12);
        assert!((g[(2, 2)] - 0.25).abs() < 1e-12);

        let js_block = r#"{
            "n": 3, "rank": 1,
            "generators": [[[2, 0], [0, 0.5]]],
            "via": "block:1"
        }"#;
        let spec = parse_group_spec(js_block, 1e-9).unwrap();
        // Interlaced block embedding sorts the weights 2 > 1 > 1/2.
        let g = spec.generator(0);
        assert!((g[(0, 0)] - 2.0).abs() < 1e-12);
        assert!((g[(1, 1)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn w0_and_type_specs() {
        let c = GroupContext::new(3, false).unwrap();
        let w0 = parse_w0(&c, "antidiag:+,-,+").unwrap();
        assert_eq!(w0, c.antidiagonal(&[1, -1, 1]).unwrap());
        let w0b = parse_w0(&c, "+3 -2 +1").unwrap();
        assert_eq!(w0b, w0);
        assert!(parse_w0(&c, "antidiag:+,?").is_err());

        let t = parse_type_spec(&c, "theta=1;E=min").unwrap();
        assert_eq!(t.len(), 4);
        let t = parse_type_spec(&c, "E=all").unwrap();
        assert_eq!(t.len(), 4);
        let t = parse_type_spec(&c, "E=-+-").unwrap();
        assert_eq!(t.len(), 2);
        let t = parse_type_spec(&c, "").unwrap();
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn space_and_census_dumps() {
        let c = GroupContext::new(3, false).unwrap();
        let (r, s, w0) = sphere_data(&c).unwrap();
        let space = position_space(&c, &r, &s);
        let dump = space_json(&space);
        assert_eq!(dump["n"], 3);
        assert_eq!(dump["classes"].as_array().unwrap().len(), 4);
        assert_eq!(dump["leq"][0].as_array().unwrap().len(), 4);

        let action = crate::bruhat::involution_action(&space, &w0).unwrap();
        let census = crate::ideal::enumerate_balanced(&space, &action);
        let cj = census_json(&census, &space);
        assert_eq!(cj["count"], 2);
        assert_eq!(cj["ideals"].as_array().unwrap().len(), 2);

        let triv = trivial_type(&c);
        let _ = position_space(&c, &triv, &triv);
    }
}
