use anyhow::{anyhow, Result};
use hsmoments::exactnum::{parse_rat, Rat};
use hsmoments::moments::MomentVector;
use serde::Deserialize;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MomentFile {
    support: [Value; 2],
    moments: Vec<Value>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Value {
    Text(String),
    Int(i64),
}

/// 1-based line of the first occurrence of `needle`, or of the document end.
fn line_of(text: &str, needle: &str) -> usize {
    let offset = text.find(needle).unwrap_or(text.len());
    text[..offset].matches('\n').count() + 1
}

fn to_rat(text: &str, v: &Value) -> Result<Rat> {
    match v {
        Value::Int(n) => Ok(Rat::from_integer((*n).into())),
        Value::Text(s) => parse_rat(s).map_err(|e| {
            let line = line_of(text, &format!("\"{s}\""));
            anyhow!("moment file line {line}: {e}")
        }),
    }
}

/// Parses `{"support": [a, b], "moments": ["p/q", ...]}`; rationals may be
/// strings or JSON integers.
pub fn parse_moment_file(text: &str) -> Result<MomentVector> {
    let file: MomentFile = serde_json::from_str(text)
        .map_err(|e| anyhow!("moment file line {}: {}", e.line(), e))?;
    let a = to_rat(text, &file.support[0])?;
    let b = to_rat(text, &file.support[1])?;
    let moments = file
        .moments
        .iter()
        .map(|v| to_rat(text, v))
        .collect::<Result<Vec<_>>>()?;
    MomentVector::new((a, b), moments).map_err(|e| anyhow!("moment file line {}: {e}", line_of(text, "support")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use hsmoments::exactnum::rat;

    #[test]
    fn parses_strings_and_integers() {
        let mv = parse_moment_file(r#"{"support": [0, "1"], "moments": ["1/2", "1/3"]}"#).unwrap();
        assert_eq!(mv.support(), &(rat(0, 1), rat(1, 1)));
        assert_eq!(mv.raw(), &[rat(1, 2), rat(1, 3)]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "{\n  \"support\": [0, 1],\n  \"moments\": [\n    \"1/2\",\n    \"one third\"\n  ]\n}\n";
        let e = parse_moment_file(text).unwrap_err().to_string();
        assert!(e.starts_with("moment file line 5:"), "{e}");
        let e = parse_moment_file("{\n\"support\": [0, 1],\n\"moments\": [1/2]\n}").unwrap_err().to_string();
        assert!(e.starts_with("moment file line 3:"), "{e}");
        let e = parse_moment_file("{\"support\": [1, 0], \"moments\": []}").unwrap_err().to_string();
        assert!(e.contains("line 1"), "{e}");
    }
}
