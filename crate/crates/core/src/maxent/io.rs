//! Text model format:
//!
//! ```text
//! slm-maxent v1
//! # key=value            (optional metadata lines)
//! alpha <float>
//! outcomes <n>
//! <outcome>              (n lines)
//! templates <n>
//! <template>             (n lines, verbatim)
//! features <n>
//! <template idx>\t<bound value>...\t<outcome>\t<weight>
//! ```
//!
//! Fields escape backslash, tab and newline. Weights are written with 17
//! significant digits and features are sorted by (template, binding,
//! outcome), so save/load is bit-exact.

use std::io::Write;

use super::{CondMaxEntModel, Feature, MaxEntError};

pub const MAGIC: &str = "slm-maxent v1";

fn escape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out
}

fn unescape_field(s: &str) -> Option<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next()? {
            '\\' => out.push('\\'),
            't' => out.push('\t'),
            'n' => out.push('\n'),
            _ => return None,
        }
    }
    Some(out)
}

/// 17 significant digits.
pub fn format_weight(w: f64) -> String {
    format!("{w:.16e}")
}

impl CondMaxEntModel {
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{MAGIC}")?;
        for m in &self.meta {
            writeln!(out, "# {}", escape_field(m))?;
        }
        writeln!(out, "alpha {}", self.alpha)?;
        writeln!(out, "outcomes {}", self.outcomes.len())?;
        for o in &self.outcomes {
            writeln!(out, "{}", escape_field(o))?;
        }
        writeln!(out, "templates {}", self.template_text.len())?;
        for t in &self.template_text {
            writeln!(out, "{t}")?;
        }
        writeln!(out, "features {}", self.features.len())?;
        for f in &self.features {
            write!(out, "{}", f.template)?;
            for b in &f.binding {
                write!(out, "\t{}", escape_field(b))?;
            }
            writeln!(
                out,
                "\t{}\t{}",
                escape_field(&f.outcome),
                format_weight(f.weight)
            )?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("model text is UTF-8")
    }

    pub fn from_text(text: &str) -> Result<Self, MaxEntError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).peekable();
        let mut last_line = 0;
        let mut next = |what: &str| -> Result<(usize, &str), MaxEntError> {
            match lines.next() {
                Some((n, l)) => {
                    last_line = n;
                    Ok((n, l))
                }
                None => Err(MaxEntError::Format {
                    line: last_line + 1,
                    message: format!("unexpected end of file, expected {what}"),
                }),
            }
        };
        let fmt_err = |line: usize, message: String| MaxEntError::Format { line, message };

        let (n, l) = next("header")?;
        if l != MAGIC {
            return Err(fmt_err(n, format!("expected `{MAGIC}`")));
        }
        let mut meta = Vec::new();
        let (mut n, mut l) = next("alpha")?;
        while let Some(m) = l.strip_prefix("# ") {
            meta.push(unescape_field(m).ok_or_else(|| fmt_err(n, "bad escape".into()))?);
            (n, l) = next("alpha")?;
        }
        let alpha: f64 = l
            .strip_prefix("alpha ")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| fmt_err(n, "expected `alpha <float>`".into()))?;

        let mut counted = |key: &str| -> Result<Vec<(usize, String)>, MaxEntError> {
            let (n, l) = next(key)?;
            let count: usize = l
                .strip_prefix(key)
                .and_then(|v| v.strip_prefix(' '))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| fmt_err(n, format!("expected `{key} <n>`")))?;
            (0..count)
                .map(|_| next(key).map(|(n, l)| (n, l.to_string())))
                .collect()
        };
        let outcomes = counted("outcomes")?
            .into_iter()
            .map(|(n, l)| unescape_field(&l).ok_or_else(|| fmt_err(n, "bad escape".into())))
            .collect::<Result<Vec<_>, _>>()?;
        let templates: Vec<String> = counted("templates")?.into_iter().map(|(_, l)| l).collect();
        let parsed: Vec<super::FeatureTemplate> = templates
            .iter()
            .map(|t| t.parse())
            .collect::<Result<_, _>>()?;
        let mut features = Vec::new();
        for (n, l) in counted("features")? {
            let fields: Vec<&str> = l.split('\t').collect();
            if fields.len() < 3 {
                return Err(fmt_err(n, "feature line needs at least 3 fields".into()));
            }
            let template: usize = fields[0]
                .parse()
                .map_err(|_| fmt_err(n, "bad template index".into()))?;
            let tpl = parsed
                .get(template)
                .ok_or_else(|| fmt_err(n, format!("template {template} out of range")))?;
            if fields.len() != tpl.match_count() + 3 {
                return Err(fmt_err(n, "binding arity does not match template".into()));
            }
            let weight: f64 = fields[fields.len() - 1]
                .parse()
                .map_err(|_| fmt_err(n, "bad weight".into()))?;
            let unesc = |s: &str| unescape_field(s).ok_or_else(|| fmt_err(n, "bad escape".into()));
            features.push(Feature {
                template,
                binding: fields[1..fields.len() - 2]
                    .iter()
                    .map(|s| unesc(s))
                    .collect::<Result<_, _>>()?,
                outcome: unesc(fields[fields.len() - 2])?,
                weight,
            });
        }
        if let Some((n, _)) = lines.next() {
            return Err(fmt_err(n, "trailing content".into()));
        }
        let mut model = CondMaxEntModel::new(templates, outcomes, features, alpha)
            .map_err(|e| fmt_err(0, e.to_string()))?;
        model.meta = meta;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy() -> CondMaxEntModel {
        let feats = vec![
            Feature {
                template: 1,
                binding: vec!["dog\tx".into()],
                outcome: "barked".into(),
                weight: 0.1 + 0.2,
            },
            Feature {
                template: 0,
                binding: vec![],
                outcome: "barked".into(),
                weight: -1.0 / 3.0,
            },
        ];
        let mut m = CondMaxEntModel::new(
            vec!["4 <= <*>_<*> <?>".into(), "2 <= <?>_<*> <?>".into()],
            vec!["barked".into(), "</s>".into()],
            feats,
            1e-3,
        )
        .unwrap();
        m.push_meta("scheme=W");
        m
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = toy();
        let text = m.to_text();
        let back = CondMaxEntModel::from_text(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_text(), text);
        assert_eq!(back.meta_value("scheme"), Some("W"));
        let ctx = vec![("dog\tx".to_string(), "NN".to_string())];
        assert_eq!(back.cond_dist(&ctx), m.cond_dist(&ctx));
    }

    #[test]
    fn truncated_file_reports_line() {
        let text = toy().to_text();
        let cut: String = text.lines().take(8).collect::<Vec<_>>().join("\n");
        assert!(matches!(
            CondMaxEntModel::from_text(&cut),
            Err(MaxEntError::Format { line: 9, .. })
        ));
        assert!(matches!(
            CondMaxEntModel::from_text("nope"),
            Err(MaxEntError::Format { line: 1, .. })
        ));
    }

    proptest! {
        #[test]
        fn seventeen_digits_round_trip(bits in any::<u64>()) {
            let w = f64::from_bits(bits);
            prop_assume!(w.is_finite());
            let back: f64 = format_weight(w).parse().unwrap();
            prop_assert_eq!(back.to_bits(), w.to_bits());
        }
    }
}
