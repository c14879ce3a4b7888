use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

/// A rendered command result. `ok` drives the exit status.
#[derive(Debug)]
pub struct Outcome {
    pub json: String,
    pub ok: bool,
    /// Preferred text rendering; otherwise the JSON is flattened.
    pub text: Option<String>,
}

impl Outcome {
    pub fn new<T: Serialize>(doc: &T, ok: bool) -> Result<Self, String> {
        Ok(Outcome {
            json: serde_json::to_string_pretty(doc).map_err(|e| e.to_string())?,
            ok,
            text: None,
        })
    }

    pub fn with_text(mut self, text: String) -> Self {
        self.text = Some(text);
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.json.clone(),
            Format::Text => self.text.clone().unwrap_or_else(|| {
                let value: Value = serde_json::from_str(&self.json).expect("we produced this JSON");
                let mut rows = Vec::new();
                flatten("", &value, &mut rows);
                table(&rows)
            }),
        }
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_owned()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                flatten(&key(k), child, rows);
            }
        }
        Value::Array(items) => {
            if let Some(parts) = items.iter().map(scalar).collect::<Option<Vec<_>>>() {
                rows.push((prefix.to_owned(), parts.join(", ")));
            } else {
                for (i, child) in items.iter().enumerate() {
                    flatten(&format!("{prefix}[{i}]"), child, rows);
                }
            }
        }
        other => rows.push((prefix.to_owned(), scalar(other).unwrap_or_default())),
    }
}

/// Two or more columns padded to the widest cell of each column.
pub fn table_rows(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    rows.iter()
        .map(|r| {
            let line: Vec<String> = r
                .iter()
                .enumerate()
                .map(|(c, cell)| format!("{cell:<w$}", w = widths[c]))
                .collect();
            line.join("  ").trim_end().to_owned()
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn table(rows: &[(String, String)]) -> String {
    let rows: Vec<Vec<String>> = rows.iter().map(|(k, v)| vec![k.clone(), v.clone()]).collect();
    table_rows(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flattens_nested_json() {
        let out = Outcome {
            json: r#"{"k":"36","audit":{"naive":"138","per_class":{"1+1":"81"}},"xs":[1,2],"fit":null}"#.into(),
            ok: true,
            text: None,
        };
        let text = out.render(Format::Text);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "k                    36");
        assert_eq!(lines[1], "audit.naive          138");
        assert_eq!(lines[2], "audit.per_class.1+1  81");
        assert_eq!(lines[3], "xs                   1, 2");
        assert_eq!(lines[4], "fit                  -");
    }
}
