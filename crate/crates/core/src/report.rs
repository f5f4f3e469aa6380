//! Input bundles, named sets and point-cloud export shared by the CLI and
//! the replay tests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::composite::{image_cloud, milnor_set, sets_equal_by_sampling, sing_set, zero_set, CheckResult};
use crate::config::AnalysisConfig;
use crate::error::{Error, Result};
use crate::minors::Rho;
use crate::poly::{PolyMap, VarList};
use crate::semialg::sampler::sample_compiled;
use crate::semialg::{write_cloud_csv, ConstructibleSet, PieceText, SampleCloud};

/// Variable names of each space in the chain `R^M → R^N → R^K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceVars {
    pub source: Vec<String>,
    #[serde(default)]
    pub middle: Option<Vec<String>>,
    #[serde(default)]
    pub target: Option<Vec<String>>,
}

/// Which space a named set lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Source,
    Middle,
}

/// User-supplied decomposition of a named set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetOverride {
    #[serde(default = "default_space")]
    pub space: Space,
    pub pieces: Vec<PieceText>,
}

fn default_space() -> Space {
    Space::Source
}

/// The input document: maps as polynomial strings plus configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapBundle {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub variables: SpaceVars,
    pub f: Vec<String>,
    #[serde(default)]
    pub g: Option<Vec<String>>,
    /// Control function on the source; Euclidean when absent.
    #[serde(default)]
    pub rho: Option<String>,
    /// Control function on the middle space, used for `G`.
    #[serde(default)]
    pub rho_g: Option<String>,
    #[serde(default)]
    pub sets: BTreeMap<String, SetOverride>,
    #[serde(default)]
    pub config: AnalysisConfig,
    /// Stored verdicts replayed by the golden tests, keyed by command target
    /// (`F`, `G`, `H`, `composite`).
    #[serde(default)]
    pub expected: BTreeMap<String, String>,
}

/// One of the three maps of a bundle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    F,
    G,
    H,
}

impl std::str::FromStr for Which {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "F" | "f" => Ok(Which::F),
            "G" | "g" => Ok(Which::G),
            "H" | "h" => Ok(Which::H),
            _ => Err(Error::Input(format!("unknown map `{s}`; expected F, G or H"))),
        }
    }
}

/// A parsed and validated bundle.
#[derive(Clone, Debug)]
pub struct Bundle {
    pub name: String,
    pub f: PolyMap,
    pub g: Option<PolyMap>,
    pub rho: Rho,
    pub rho_g: Option<Rho>,
    pub overrides: BTreeMap<String, ConstructibleSet>,
    pub config: AnalysisConfig,
    pub expected: BTreeMap<String, String>,
}

/// Names of the sets every composite bundle can export.
pub const BUILTIN_SETS: [&str; 10] = [
    "v_f", "sing_f", "m_f", "v_g", "sing_g", "m_g", "v_h", "sing_h", "m_h", "image",
];

fn override_set(vars: &VarList, o: &SetOverride) -> Result<ConstructibleSet> {
    let pieces = o
        .pieces
        .iter()
        .map(|p| (p.equations.clone(), p.inequations.clone()))
        .collect::<Vec<_>>();
    ConstructibleSet::parse(vars, &pieces)
}

impl MapBundle {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("bundle: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        MapBundle::from_json(&text)
    }

    /// Parses every polynomial and checks dimensions.
    pub fn resolve(&self) -> Result<Bundle> {
        let src = VarList::new(&self.variables.source);
        let f = PolyMap::parse(&src, &self.f)?;
        let mid = match (&self.variables.middle, &self.g) {
            (Some(m), _) => Some(VarList::new(m)),
            (None, Some(_)) => return Err(Error::Input("a bundle with G must name the middle variables".into())),
            (None, None) => None,
        };
        let g = match (&self.g, &mid) {
            (Some(g), Some(m)) => {
                if m.len() != f.target_dim() {
                    return Err(Error::DimensionMismatch {
                        expected: f.target_dim(),
                        found: m.len(),
                    });
                }
                Some(PolyMap::parse(m, g)?)
            }
            _ => None,
        };
        if let (Some(g), Some(t)) = (&g, &self.variables.target) {
            if t.len() != g.target_dim() {
                return Err(Error::DimensionMismatch {
                    expected: g.target_dim(),
                    found: t.len(),
                });
            }
        }
        let rho = match &self.rho {
            Some(t) => Rho::parse(t, &src)?,
            None => Rho::euclidean(&src),
        };
        let rho_g = match (&self.rho_g, &mid) {
            (Some(t), Some(m)) => Some(Rho::parse(t, m)?),
            (Some(_), None) => return Err(Error::Input("rho_g needs the middle variables".into())),
            _ => None,
        };
        let mut overrides = BTreeMap::new();
        for (name, o) in &self.sets {
            let vars = match o.space {
                Space::Source => &src,
                Space::Middle => mid
                    .as_ref()
                    .ok_or_else(|| Error::Input(format!("set `{name}` lives in the middle space, which is not named")))?,
            };
            overrides.insert(name.clone(), override_set(vars, o)?);
        }
        self.config.validate()?;
        Ok(Bundle {
            name: self.name.clone(),
            f,
            g,
            rho,
            rho_g,
            overrides,
            config: self.config.clone(),
            expected: self.expected.clone(),
        })
    }
}

impl Bundle {
    pub fn load(path: &Path) -> Result<Self> {
        MapBundle::load(path)?.resolve()
    }

    /// `(F, G)`, requiring `M ≥ N ≥ K ≥ 2`.
    pub fn composite(&self) -> Result<(&PolyMap, &PolyMap)> {
        let g = self
            .g
            .as_ref()
            .ok_or_else(|| Error::Input("this command needs a bundle with G".into()))?;
        let (m, n, k) = (self.f.source_dim(), self.f.target_dim(), g.target_dim());
        if !(m >= n && n >= k && k >= 2) {
            return Err(Error::Input(format!(
                "dimensions {m} -> {n} -> {k} violate M >= N >= K >= 2"
            )));
        }
        Ok((&self.f, g))
    }

    pub fn h(&self) -> Result<PolyMap> {
        let (f, g) = self.composite()?;
        PolyMap::compose(g, f)
    }

    pub fn map(&self, which: Which) -> Result<PolyMap> {
        match which {
            Which::F => Ok(self.f.clone()),
            Which::G => self
                .g
                .clone()
                .ok_or_else(|| Error::Input("the bundle has no G".into())),
            Which::H => self.h(),
        }
    }

    /// The control function for `which`: `rho` on the source, `rho_g` (or
    /// Euclidean) on the middle space.
    pub fn rho_for(&self, which: Which) -> Result<Rho> {
        match which {
            Which::F | Which::H => Ok(self.rho.clone()),
            Which::G => {
                let g = self.map(Which::G)?;
                Ok(self.rho_g.clone().unwrap_or_else(|| Rho::euclidean(g.source())))
            }
        }
    }

    /// Computed set by built-in name; `image` is not a constructible set and
    /// is rejected here.
    pub fn builtin_set(&self, name: &str) -> Result<ConstructibleSet> {
        let (which, kind) = name
            .split_once('_')
            .filter(|(k, w)| ["v", "sing", "m"].contains(k) && ["f", "g", "h"].contains(w))
            .map(|(k, w)| (w.parse::<Which>(), k))
            .ok_or_else(|| Error::Input(format!("unknown set `{name}`")))?;
        let which = which?;
        let map = self.map(which)?;
        match kind {
            "v" => Ok(zero_set(&map)),
            "sing" => Ok(sing_set(&map)),
            _ => milnor_set(&map, &self.rho_for(which)?),
        }
    }

    /// Named set: a bundle override first, then a built-in.
    pub fn named_set(&self, name: &str) -> Result<ConstructibleSet> {
        match self.overrides.get(name) {
            Some(s) => Ok(s.clone()),
            None => self.builtin_set(name),
        }
    }

    /// Each override named like a built-in set is compared with the computed
    /// set by bidirectional sampling.
    pub fn check_overrides(&self) -> Result<Vec<CheckResult>> {
        let mut out = Vec::new();
        for (k, (name, s)) in self.overrides.iter().enumerate() {
            let Ok(computed) = self.builtin_set(name) else {
                continue;
            };
            let mut r = sets_equal_by_sampling(
                &format!("override_{name}"),
                &computed,
                s,
                &self.config,
                0x0f00 + k as u64,
            )?;
            let note = format!("{name}: computed set against the bundle's decomposition");
            r.detail = if r.detail.is_empty() { note } else { format!("{note}. {}", r.detail) };
            out.push(r);
        }
        Ok(out)
    }
}

/// Output format of exported clouds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CloudFormat {
    Csv,
    Json,
}

/// One written cloud.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExportedCloud {
    pub set: String,
    pub radius: f64,
    pub count: usize,
    pub path: PathBuf,
}

fn name_tag(name: &str) -> u64 {
    name.bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

fn file_stem(set: &str, radius: f64) -> String {
    let safe: String = set
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect();
    format!("{safe}_r{radius}")
}

/// Samples `set` on each sphere of `radii` and writes one file per radius.
///
/// `image` is the image `F(M(H) ∖ Sing H)` in the middle space; every other
/// name resolves through [`Bundle::named_set`].
pub fn export_cloud(
    bundle: &Bundle,
    set: &str,
    radii: &[f64],
    count: usize,
    out_dir: &Path,
    format: CloudFormat,
) -> Result<Vec<ExportedCloud>> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::Input("radii must be positive numbers".into()));
    }
    if count == 0 {
        return Err(Error::Input("count must be at least 1".into()));
    }
    fs::create_dir_all(out_dir)?;
    let cfg = &bundle.config;
    let mut out = Vec::new();
    for (k, &r) in radii.iter().enumerate() {
        let seed = cfg.stream(name_tag(set) ^ ((k as u64) << 32));
        let cloud = if set == "image" {
            let (f, g) = bundle.composite()?;
            let h = bundle.h()?;
            let one = AnalysisConfig {
                radii: vec![r],
                points_per_radius: count,
                ..cfg.clone()
            };
            let img = image_cloud(f, Some(g.source()), &milnor_set(&h, &bundle.rho)?, &sing_set(&h), &one)?;
            let mut c = img.as_sample_cloud(seed, &one);
            c.radius = r;
            c
        } else {
            let s = bundle.named_set(set)?;
            sample_compiled(s.vars().names().to_vec(), &s.compile(), None, r, count, seed, &cfg.sampler)
        };
        let path = out_dir.join(format!(
            "{}.{}",
            file_stem(set, r),
            match format {
                CloudFormat::Csv => "csv",
                CloudFormat::Json => "json",
            }
        ));
        write_cloud(&cloud, &path, format)?;
        out.push(ExportedCloud {
            set: set.to_string(),
            radius: r,
            count: cloud.len(),
            path,
        });
    }
    Ok(out)
}

fn write_cloud(cloud: &SampleCloud, path: &Path, format: CloudFormat) -> Result<()> {
    match format {
        CloudFormat::Csv => write_cloud_csv(cloud, path),
        CloudFormat::Json => {
            let text = serde_json::to_string_pretty(cloud).map_err(|e| Error::Io(e.to_string()))?;
            fs::write(path, text)?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BUNDLE: &str = r#"{
        "name": "tame pair",
        "variables": {"source": ["x","y","z","w"], "middle": ["u","v","t"]},
        "f": ["x", "y", "z*(x^2+y^2+z^2+w^2)"],
        "g": ["u*t", "v*t"],
        "sets": {"m_h": {"pieces": [{"equations": ["z"]}, {"equations": ["w", "z^2-x^2-y^2"]}]}},
        "config": {"radii": [0.2, 0.1], "points_per_radius": 16}
    }"#;

    #[test]
    fn bundle_resolves_and_checks_overrides() {
        let b = MapBundle::from_json(BUNDLE).unwrap().resolve().unwrap();
        assert_eq!(b.h().unwrap().to_strings().len(), 2);
        let checks = b.check_overrides().unwrap();
        assert_eq!(checks.len(), 1);
        assert_eq!(checks[0].status, crate::composite::CheckStatus::Holds, "{:?}", checks[0]);
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        let bad = BUNDLE.replace("\"u*t\"", "\"u*)t\"");
        let err = MapBundle::from_json(&bad).unwrap().resolve().unwrap_err();
        assert_eq!(err.kind(), "SyntaxError");
        assert!(matches!(MapBundle::from_json("{\"f\": []}"), Err(Error::Input(_))));
        let b = MapBundle::from_json(BUNDLE).unwrap().resolve().unwrap();
        assert!(b.named_set("m_q").is_err());
    }

    #[test]
    fn export_writes_csv_with_sidecar() {
        let b = MapBundle::from_json(BUNDLE).unwrap().resolve().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = export_cloud(&b, "sing_h", &[0.1], 8, dir.path(), CloudFormat::Csv).unwrap();
        assert_eq!(files[0].count, 8);
        assert!(files[0].path.exists());
        assert!(files[0].path.with_extension("json").exists());
        let img = export_cloud(&b, "image", &[0.1], 8, dir.path(), CloudFormat::Json).unwrap();
        assert!(img[0].count > 0);
    }
}
