use std::fmt;

#[derive(Debug, PartialEq, Eq)]
pub struct ValuesError(String);

impl fmt::Display for ValuesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ValuesError {}

fn number(s: &str, whole: &str) -> Result<u32, ValuesError> {
    s.trim().parse().map_err(|_| {
        ValuesError(format!(
            "`{}` in `{whole}` is not a non-negative integer",
            s.trim()
        ))
    })
}

/// Parses `start:stop:step` (stop inclusive) or a comma-separated list.
pub fn parse_values(spec: &str) -> Result<Vec<u32>, ValuesError> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(ValuesError("no sweep values given".into()));
    }
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(ValuesError(format!(
                "range `{spec}` must look like start:stop:step"
            )));
        };
        let (start, stop, step) = (
            number(start, spec)?,
            number(stop, spec)?,
            number(step, spec)?,
        );
        if step == 0 {
            return Err(ValuesError(format!("range `{spec}` has a zero step")));
        }
        if stop < start {
            return Err(ValuesError(format!("range `{spec}` ends before it starts")));
        }
        return Ok((start..=stop).step_by(step as usize).collect());
    }
    spec.split(',').map(|v| number(v, spec)).collect()
}
