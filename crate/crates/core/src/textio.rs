use std::io::BufRead;

use crate::error::{PrmError, Result};

/// Calls `f` with the 1-based line number and whitespace-separated fields
/// of every non-blank line that is not a `#` comment.
pub(crate) fn for_each_record<R, F>(reader: R, mut f: F) -> Result<()>
where
    R: BufRead,
    F: FnMut(usize, &[&str]) -> Result<()>,
{
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        f(i + 1, &fields)?;
    }
    Ok(())
}

type Annotated<'a> = (&'a [&'a str], Vec<(&'a str, &'a str)>);

/// Splits trailing `key=value` annotations off a record.
pub(crate) fn split_annotations<'a>(
    line: usize,
    fields: &'a [&'a str],
    positional: usize,
    allowed: &[&str],
) -> Result<Annotated<'a>> {
    if fields.len() < positional {
        return Err(PrmError::parse(
            line,
            format!("expected {positional} fields, found {}", fields.len()),
        ));
    }
    let (head, tail) = fields.split_at(positional);
    let mut notes = Vec::with_capacity(tail.len());
    for field in tail {
        match field.split_once('=') {
            Some((key, value)) if allowed.contains(&key) && !value.is_empty() => {
                notes.push((key, value))
            }
            _ => {
                return Err(PrmError::parse(
                    line,
                    format!(
                        "expected {positional} fields, found {} (unrecognised trailing field {field:?})",
                        fields.len()
                    ),
                ))
            }
        }
    }
    Ok((head, notes))
}

/// Parses an integer level, clamping negative values to 0.
pub(crate) fn parse_level(line: usize, field: &str) -> Result<usize> {
    let value: i64 = field
        .parse()
        .map_err(|_| PrmError::parse(line, format!("level {field:?} is not an integer")))?;
    Ok(value.max(0) as usize)
}
