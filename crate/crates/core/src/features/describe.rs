use super::FeatureDef;

pub const WEEK_DAYS: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("feature description needs {WEEK_DAYS} daily values, got {0}")]
pub struct DescribeError(pub usize);

/// Render a number for prompt text: integers without a decimal point, other
/// values rounded to two decimals with trailing zeros trimmed.
pub fn format_value(x: f64) -> String {
    let r = (x * 100.0).round() / 100.0;
    if r == r.trunc() {
        let s = format!("{r:.0}");
        if s == "-0" {
            "0".to_string()
        } else {
            s
        }
    } else {
        let s = format!("{r:.2}");
        s.trim_end_matches('0').to_string()
    }
}

/// `<description>, <v1>, ..., <v7> (weekly average <avg>)`
pub fn describe_feature(def: &FeatureDef, daily_values: &[f64]) -> Result<String, DescribeError> {
    if daily_values.len() != WEEK_DAYS {
        return Err(DescribeError(daily_values.len()));
    }
    let mut s = def.description.clone();
    for v in daily_values {
        s.push_str(", ");
        s.push_str(&format_value(*v));
    }
    let avg = daily_values.iter().sum::<f64>() / WEEK_DAYS as f64;
    s.push_str(&format!(" (weekly average {})", format_value(avg)));
    Ok(s)
}
