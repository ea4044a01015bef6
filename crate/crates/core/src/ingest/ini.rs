//! Minimal reader for the INI-style text used by BrainVision headers and
//! marker files.

use crate::error::IngestError;

#[derive(Debug, Clone, Default)]
pub(crate) struct IniSection {
    pub name: String,
    pub entries: Vec<(String, String)>,
}

impl IniSection {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(key))
            .map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str, IngestError> {
        self.get(key).ok_or_else(|| IngestError::MissingKey {
            section: self.name.clone(),
            key: key.to_string(),
        })
    }
}

#[derive(Debug, Clone, Default)]
pub(crate) struct IniDocument {
    /// First non-empty line, the identification banner.
    pub banner: Option<String>,
    pub sections: Vec<IniSection>,
}

impl IniDocument {
    pub fn parse(text: &str) -> Result<Self, IngestError> {
        let mut doc = IniDocument::default();
        // Free-text sections whose lines need not be key=value pairs.
        let free_text = |name: &str| name.eq_ignore_ascii_case("Comment");

        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim_start_matches('\u{feff}').trim();
            if line.is_empty() {
                continue;
            }
            if doc.banner.is_none() && doc.sections.is_empty() && !line.starts_with('[') {
                doc.banner = Some(line.to_string());
                continue;
            }
            if line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return Err(IngestError::Syntax {
                        line: n + 1,
                        message: format!("unterminated section header `{line}`"),
                    });
                };
                doc.sections.push(IniSection {
                    name: name.trim().to_string(),
                    entries: Vec::new(),
                });
                continue;
            }
            let Some(section) = doc.sections.last_mut() else {
                // text between the banner and the first section
                continue;
            };
            if free_text(&section.name) {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(IngestError::Syntax {
                    line: n + 1,
                    message: format!("expected key=value, found `{line}`"),
                });
            };
            section
                .entries
                .push((key.trim().to_string(), value.trim().to_string()));
        }
        Ok(doc)
    }

    pub fn section(&self, name: &str) -> Option<&IniSection> {
        self.sections
            .iter()
            .find(|s| s.name.eq_ignore_ascii_case(name))
    }

    pub fn require_section(&self, name: &str) -> Result<&IniSection, IngestError> {
        self.section(name)
            .ok_or_else(|| IngestError::MissingSection(name.to_string()))
    }
}
