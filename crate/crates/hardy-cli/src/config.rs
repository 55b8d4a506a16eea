//! Flat key=value config files. Keys mirror the long flag names (dashes or
//! underscores both accepted); command-line flags override file entries.

use std::collections::HashMap;
use std::path::Path;

pub struct ConfigFile {
    entries: HashMap<String, String>,
}

impl ConfigFile {
    pub fn empty() -> ConfigFile {
        ConfigFile {
            entries: HashMap::new(),
        }
    }

    pub fn load(path: &Path) -> Result<ConfigFile, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut entries = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!(
                    "config line {} is not key=value: `{raw}`",
                    lineno + 1
                ));
            };
            entries.insert(normalize(key.trim()), value.trim().to_string());
        }
        Ok(ConfigFile { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(&normalize(key)).map(String::as_str)
    }

    /// Flag value if present, else the config entry parsed with `parse`.
    pub fn merge<T, F>(
        &self,
        flag: Option<T>,
        key: &str,
        parse: F,
    ) -> Result<Option<T>, String>
    where
        F: FnOnce(&str) -> Result<T, String>,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => match self.get(key) {
                Some(raw) => parse(raw).map(Some).map_err(|e| format!("config {key}: {e}")),
                None => Ok(None),
            },
        }
    }
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-").to_ascii_lowercase()
}

pub fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| format!("invalid number `{s}`: {e}"))
}

pub fn parse_usize(s: &str) -> Result<usize, String> {
    s.trim()
        .parse::<usize>()
        .map_err(|e| format!("invalid integer `{s}`: {e}"))
}

pub fn parse_u64(s: &str) -> Result<u64, String> {
    s.trim()
        .parse::<u64>()
        .map_err(|e| format!("invalid integer `{s}`: {e}"))
}

pub fn parse_u32(s: &str) -> Result<u32, String> {
    s.trim()
        .parse::<u32>()
        .map_err(|e| format!("invalid integer `{s}`: {e}"))
}

/// "a,b,c" → vector of numbers.
pub fn parse_vector(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|part| parse_f64(part))
        .collect::<Result<Vec<f64>, String>>()
        .and_then(|v| {
            if v.is_empty() {
                Err("empty vector".to_string())
            } else {
                Ok(v)
            }
        })
}

/// Bump syntax "c1,..,cn:r" (shared radius) or "c1,..,cn:r1,..,rn".
pub fn parse_bump(s: &str) -> Result<(Vec<f64>, Vec<f64>), String> {
    let Some((centers, radii)) = s.split_once(':') else {
        return Err(format!("bump `{s}` must be `c1,..,cn:r` or `c1,..,cn:r1,..,rn`"));
    };
    let center = parse_vector(centers)?;
    let radii = parse_vector(radii)?;
    let radii = if radii.len() == 1 {
        vec![radii[0]; center.len()]
    } else if radii.len() == center.len() {
        radii
    } else {
        return Err(format!(
            "bump has {} centers but {} radii",
            center.len(),
            radii.len()
        ));
    };
    Ok((center, radii))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_values_with_comments() {
        let dir = std::env::temp_dir().join("hardy-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("a.cfg");
        std::fs::write(&path, "# comment\n p = 2.0 \nquad_order=16\nmode=halfspace\n").unwrap();
        let cfg = ConfigFile::load(&path).unwrap();
        assert_eq!(cfg.get("p"), Some("2.0"));
        assert_eq!(cfg.get("quad-order"), Some("16"));
        assert_eq!(cfg.merge(Some(3.0), "p", parse_f64).unwrap(), Some(3.0));
        assert_eq!(cfg.merge(None, "p", parse_f64).unwrap(), Some(2.0));
    }

    #[test]
    fn bump_syntax_variants() {
        assert_eq!(
            parse_bump("0,0,1:0.25").unwrap(),
            (vec![0.0, 0.0, 1.0], vec![0.25, 0.25, 0.25])
        );
        assert_eq!(
            parse_bump("1,2:0.5,0.75").unwrap(),
            (vec![1.0, 2.0], vec![0.5, 0.75])
        );
        assert!(parse_bump("1,2").is_err());
        assert!(parse_bump("1,2:0.1,0.2,0.3").is_err());
    }
}
