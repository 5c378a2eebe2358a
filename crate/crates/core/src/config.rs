//! Run parameters and the `key = value` configuration format.

use std::fmt;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lattice::CouplingPattern;
use crate::Real;

/// How the stored spin state is initialised.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum InitMode {
    #[default]
    Random,
    /// Spins read from a file (`+`/`-` string or `1`/`-1` tokens).
    File(PathBuf),
}

impl fmt::Display for InitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitMode::Random => f.write_str("random"),
            InitMode::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for InitMode {
    type Err = Error;

    /// `random`, `file:PATH` or `file(PATH)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "random" {
            return Ok(InitMode::Random);
        }
        let path = s
            .strip_prefix("file:")
            .or_else(|| s.strip_prefix("file(").and_then(|r| r.strip_suffix(')')));
        match path.map(str::trim) {
            Some(p) if !p.is_empty() => Ok(InitMode::File(PathBuf::from(p))),
            _ => Err(Error::Config(format!(
                "init `{s}` is neither `random` nor `file:PATH`"
            ))),
        }
    }
}

/// Normalisation of the sublattice magnetisations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MsNorm {
    /// `m_s = sum_{i in s} s_i / |s|`, so full polarisation gives 1.
    #[default]
    PerSublattice,
    /// `m_s = sum_{i in s} s_i / N`.
    Literal,
}

impl fmt::Display for MsNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MsNorm::PerSublattice => f.write_str("per_sublattice"),
            MsNorm::Literal => f.write_str("literal"),
        }
    }
}

impl FromStr for MsNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "per_sublattice" => Ok(MsNorm::PerSublattice),
            "literal" => Ok(MsNorm::Literal),
            other => Err(Error::Config(format!(
                "msnorm `{other}` (expected per_sublattice or literal)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig<T> {
    pub lx: usize,
    pub ly: usize,
    pub beta: T,
    pub g: T,
    /// Thermalisation sweeps (cutoff may grow).
    pub isteps: usize,
    pub nbins: usize,
    /// Measurement sweeps per bin.
    pub mstep: usize,
    pub seed: u64,
    pub init: InitMode,
    pub pattern: CouplingPattern,
    /// Keep every `thin`-th sweep in the sample stream.
    pub thin: usize,
    pub out_dir: PathBuf,
    pub msnorm: MsNorm,
}

const KEYS: [&str; 13] = [
    "lx", "ly", "beta", "g", "isteps", "nbins", "mstep", "seed", "init", "pattern", "thin",
    "out_dir", "msnorm",
];

impl<T: Real> RunConfig<T> {
    /// Config with the given required values and every default filled in.
    pub fn new(lx: usize, ly: usize, beta: T, g: T) -> Self {
        RunConfig {
            lx,
            ly,
            beta,
            g,
            isteps: default_isteps(lx, ly),
            nbins: 20,
            mstep: 1000,
            seed: 1,
            init: InitMode::Random,
            pattern: CouplingPattern::Default,
            thin: 1,
            out_dir: PathBuf::from("."),
            msnorm: MsNorm::PerSublattice,
        }
    }

    /// Names accepted by [`RunConfig::parse`].
    pub fn keys() -> &'static [&'static str] {
        &KEYS
    }

    /// Parses `key = value` lines, then applies `overrides` in order.
    pub fn parse(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut values: Vec<(String, String, usize)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| Error::Parse {
                line,
                msg: format!("expected `key = value`, found `{body}`"),
            })?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown key `{key}`"),
                });
            }
            if values.iter().any(|(k, _, _)| k == key) {
                return Err(Error::Parse {
                    line,
                    msg: format!("key `{key}` given twice"),
                });
            }
            values.push((key.to_string(), value.trim().to_string(), line));
        }
        for (key, value) in overrides {
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!("unknown key `{key}`")));
            }
            values.retain(|(k, _, _)| k != key);
            values.push((key.clone(), value.trim().to_string(), 0));
        }

        let lookup = |key: &str| values.iter().find(|(k, _, _)| k == key);
        let wrap = |line: usize, key: &str, msg: String| {
            if line == 0 {
                Error::Config(format!("{key}: {msg}"))
            } else {
                Error::Parse {
                    line,
                    msg: format!("{key}: {msg}"),
                }
            }
        };
        let required = |key: &str| {
            lookup(key).ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
        };
        fn num<V: FromStr>(v: &str) -> std::result::Result<V, String>
        where
            V::Err: fmt::Display,
        {
            v.parse::<V>().map_err(|e| format!("`{v}`: {e}"))
        }
        let int = |key: &str, (_, v, line): &(String, String, usize)| {
            num::<usize>(v).map_err(|m| wrap(*line, key, m))
        };
        let real = |key: &str, (_, v, line): &(String, String, usize)| {
            num::<f64>(v).map(T::lit).map_err(|m| wrap(*line, key, m))
        };

        let lx = int("lx", required("lx")?)?;
        let ly = int("ly", required("ly")?)?;
        let mut cfg = RunConfig::new(
            lx,
            ly,
            real("beta", required("beta")?)?,
            real("g", required("g")?)?,
        );
        for entry in &values {
            let (key, v, line) = entry;
            match key.as_str() {
                "isteps" => cfg.isteps = int(key, entry)?,
                "nbins" => cfg.nbins = int(key, entry)?,
                "mstep" => cfg.mstep = int(key, entry)?,
                "thin" => cfg.thin = int(key, entry)?,
                "seed" => cfg.seed = num::<u64>(v).map_err(|m| wrap(*line, key, m))?,
                "init" => {
                    cfg.init = v
                        .parse()
                        .map_err(|e: Error| wrap(*line, key, e.to_string()))?
                }
                "pattern" => {
                    cfg.pattern = v
                        .parse()
                        .map_err(|e: Error| wrap(*line, key, e.to_string()))?
                }
                "msnorm" => {
                    cfg.msnorm = v
                        .parse()
                        .map_err(|e: Error| wrap(*line, key, e.to_string()))?
                }
                "out_dir" => cfg.out_dir = PathBuf::from(v),
                _ => {}
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range checks; each error names the offending key.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: String| Err(Error::Config(format!("{key}: {msg}")));
        if !(self.beta > T::zero()) || !self.beta.is_finite() {
            return bad("beta", format!("{} must be finite and > 0", self.beta));
        }
        if !(self.g >= T::zero()) || !self.g.is_finite() {
            return bad("g", format!("{} must be finite and >= 0", self.g));
        }
        for (key, v) in [
            ("lx", self.lx),
            ("ly", self.ly),
            ("isteps", self.isteps),
            ("mstep", self.mstep),
            ("thin", self.thin),
        ] {
            if v == 0 {
                return bad(key, "must be positive".into());
            }
        }
        if self.nbins < 2 {
            return bad("nbins", format!("{} must be at least 2", self.nbins));
        }
        Ok(())
    }

    /// Inverse of [`RunConfig::parse`].
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: &dyn fmt::Display| {
            let _ = writeln!(out, "{k} = {v}");
        };
        line("lx", &self.lx);
        line("ly", &self.ly);
        line("beta", &self.beta.to_f64_lossy());
        line("g", &self.g.to_f64_lossy());
        line("isteps", &self.isteps);
        line("nbins", &self.nbins);
        line("mstep", &self.mstep);
        line("seed", &self.seed);
        line("init", &self.init);
        line("pattern", &self.pattern);
        line("thin", &self.thin);
        line("out_dir", &self.out_dir.display());
        line("msnorm", &self.msnorm);
        out
    }
}

/// Thermalisation sweeps proportional to the lattice area.
pub fn default_isteps(lx: usize, ly: usize) -> usize {
    (1000 * lx * ly).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_file_fills_defaults() {
        let cfg = RunConfig::<f64>::parse("lx = 5\nly = 2\nbeta = 3.3\ng = 0.2", &[]).unwrap();
        assert_eq!((cfg.lx, cfg.ly), (5, 2));
        assert_eq!(cfg.beta, 3.3);
        assert_eq!(cfg.g, 0.2);
        assert_eq!(cfg.isteps, 10_000);
        assert_eq!((cfg.nbins, cfg.mstep, cfg.thin, cfg.seed), (20, 1000, 1, 1));
        assert_eq!(cfg.init, InitMode::Random);
        assert_eq!(cfg.pattern, CouplingPattern::Default);
        assert_eq!(cfg.msnorm, MsNorm::PerSublattice);
    }

    #[test]
    fn override_wins() {
        let o = vec![("g".to_string(), "0.6".to_string())];
        let cfg = RunConfig::<f64>::parse("lx = 5\nly = 2\nbeta = 3.3\ng = 0.2", &o).unwrap();
        assert_eq!(cfg.g, 0.6);
    }

    #[test]
    fn errors_name_key_and_line() {
        let err = RunConfig::<f64>::parse("lx = 5\nly = 2\nbeta = -1\ng = 0", &[]).unwrap_err();
        assert!(err.to_string().contains("beta"), "{err}");
        let err = RunConfig::<f64>::parse("lx = 5\n\nfoo = 1\n", &[]).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = RunConfig::<f64>::parse("lx = 5\nly = 2\ng = 0", &[]).unwrap_err();
        assert!(err.to_string().contains("beta"), "{err}");
        let err = RunConfig::<f64>::parse("lx = 5\nly = x\nbeta = 1\ng = 0", &[]).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn comments_and_init_forms() {
        let text = "# header\nlx = 5 # six columns\nly = 2\nbeta = 1\ng = 0\ninit = file(gs.txt)\n";
        let cfg = RunConfig::<f64>::parse(text, &[]).unwrap();
        assert_eq!(cfg.init, InitMode::File("gs.txt".into()));
        assert_eq!(
            "file:a/b".parse::<InitMode>().unwrap(),
            InitMode::File("a/b".into())
        );
        assert!("file:".parse::<InitMode>().is_err());
    }

    fn arb_config() -> impl Strategy<Value = RunConfig<f64>> {
        (
            (1usize..40, 1usize..40, 1e-3f64..100.0, 0.0f64..5.0),
            (1usize..100_000, 2usize..100, 1usize..10_000, any::<u64>()),
            (
                prop::bool::ANY,
                prop::bool::ANY,
                1usize..50,
                prop::bool::ANY,
                "[a-z]{1,8}",
            ),
        )
            .prop_map(
                |(
                    (lx, ly, beta, g),
                    (isteps, nbins, mstep, seed),
                    (file, ferro, thin, lit, name),
                )| {
                    RunConfig {
                        lx,
                        ly,
                        beta,
                        g,
                        isteps,
                        nbins,
                        mstep,
                        seed,
                        init: if file {
                            InitMode::File(PathBuf::from(format!("{name}.txt")))
                        } else {
                            InitMode::Random
                        },
                        pattern: if ferro {
                            CouplingPattern::Ferro
                        } else {
                            CouplingPattern::Default
                        },
                        thin,
                        out_dir: PathBuf::from(format!("out/{name}")),
                        msnorm: if lit {
                            MsNorm::Literal
                        } else {
                            MsNorm::PerSublattice
                        },
                    }
                },
            )
    }

    proptest! {
        #[test]
        fn render_then_parse_is_identity(cfg in arb_config()) {
            let back = RunConfig::<f64>::parse(&cfg.render(), &[]).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
