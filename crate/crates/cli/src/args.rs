//! Tiny flag parser: `--name value` pairs and bare `--switch` flags.

use std::collections::BTreeMap;

use vicert_core::{Error, Result};

pub struct Args {
    values: BTreeMap<String, String>,
    switches: Vec<String>,
}

impl Args {
    pub fn parse(raw: &[String], switch_names: &[&str]) -> Result<Self> {
        let mut values = BTreeMap::new();
        let mut switches = Vec::new();
        let mut i = 0;
        while i < raw.len() {
            let arg = &raw[i];
            let Some(name) = arg.strip_prefix("--") else {
                return Err(Error::InvalidArgument(format!(
                    "unexpected positional argument {arg:?}"
                )));
            };
            if switch_names.contains(&name) {
                switches.push(name.to_string());
                i += 1;
                continue;
            }
            let Some(value) = raw.get(i + 1) else {
                return Err(Error::InvalidArgument(format!("--{name} needs a value")));
            };
            values.insert(name.to_string(), value.clone());
            i += 2;
        }
        Ok(Args { values, switches })
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(|s| s.as_str())
    }

    pub fn has_switch(&self, name: &str) -> bool {
        self.switches.iter().any(|s| s == name)
    }

    pub fn require(&self, name: &str) -> Result<&str> {
        self.get(name)
            .ok_or_else(|| Error::InvalidArgument(format!("missing required flag --{name}")))
    }

    pub fn parse_f64(&self, name: &str) -> Result<Option<f64>> {
        self.get(name)
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| Error::InvalidArgument(format!("--{name} {s:?}: {e}")))
            })
            .transpose()
    }

    pub fn parse_usize(&self, name: &str) -> Result<Option<usize>> {
        self.get(name)
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|e| Error::InvalidArgument(format!("--{name} {s:?}: {e}")))
            })
            .transpose()
    }

    pub fn parse_u64(&self, name: &str) -> Result<Option<u64>> {
        self.get(name)
            .map(|s| {
                s.parse::<u64>()
                    .map_err(|e| Error::InvalidArgument(format!("--{name} {s:?}: {e}")))
            })
            .transpose()
    }

    pub fn require_f64(&self, name: &str) -> Result<f64> {
        self.require(name)?;
        Ok(self.parse_f64(name)?.unwrap())
    }

    pub fn require_usize(&self, name: &str) -> Result<usize> {
        self.require(name)?;
        Ok(self.parse_usize(name)?.unwrap())
    }

    pub fn require_u64(&self, name: &str) -> Result<u64> {
        self.require(name)?;
        Ok(self.parse_u64(name)?.unwrap())
    }

    pub fn usize_list(&self, name: &str) -> Result<Option<Vec<usize>>> {
        self.get(name)
            .map(|s| {
                s.split(',')
                    .map(|c| {
                        c.trim().parse::<usize>().map_err(|e| {
                            Error::InvalidArgument(format!("--{name} entry {c:?}: {e}"))
                        })
                    })
                    .collect()
            })
            .transpose()
    }
}
