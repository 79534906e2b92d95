//! Run configuration: a TOML file of namespaced keys, resolved against the
//! library defaults into a fully explicit [`RunConfig`].

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use synthphase::alternating_projections::{ApConfig, LineSearchSpec, PhaseUpdate, PipelineConfig};
use synthphase::stage1_lift::Stage1Config;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    scenario: Option<RawScenario>,
    #[serde(default)]
    stage1: RawStage1,
    #[serde(default)]
    stage2: RawStage2,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    frequency_hz: Option<f64>,
    rows: Option<usize>,
    cols: Option<usize>,
    spacing_wavelengths: Option<f64>,
    #[serde(default)]
    sources: Vec<SourceConfig>,
    #[serde(default)]
    noise: RawNoise,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    sigma: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    rows: Option<usize>,
    cols: Option<usize>,
    extent: Option<[f64; 2]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStage1 {
    #[serde(default)]
    grid: RawGrid,
    l1_weight: Option<f64>,
    lp_tol: Option<f64>,
    lp_max_iter: Option<usize>,
    power_iters: Option<usize>,
    power_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLineSearch {
    initial_rotation: Option<f64>,
    growth: Option<f64>,
    tol: Option<f64>,
    max_evals: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStage2 {
    #[serde(default)]
    grid: RawGrid,
    k_hat: Option<usize>,
    nu: Option<f64>,
    n_cg: Option<usize>,
    n_ap: Option<usize>,
    stop_tol: Option<f64>,
    phase_update: Option<String>,
    l1_weight: Option<f64>,
    lp_tol: Option<f64>,
    lp_max_iter: Option<usize>,
    #[serde(default)]
    line_search: RawLineSearch,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    emit_svg: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub position_mm: [f64; 3],
    pub power_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseConfig {
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub frequency_hz: f64,
    pub rows: usize,
    pub cols: usize,
    pub spacing_wavelengths: f64,
    pub sources: Vec<SourceConfig>,
    pub noise: NoiseConfig,
}

/// Square sine-space lattice; `extent` bounds both `u` and `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    pub rows: usize,
    pub cols: usize,
    pub extent: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage1Section {
    pub grid: GridConfig,
    pub l1_weight: f64,
    pub lp_tol: f64,
    pub lp_max_iter: usize,
    pub power_iters: usize,
    pub power_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineSearchSection {
    pub initial_rotation: f64,
    pub growth: f64,
    pub tol: f64,
    pub max_evals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage2Section {
    pub grid: GridConfig,
    pub k_hat: usize,
    /// `None` loads `1e-6·‖b‖²/N`, recomputed every outer iteration.
    pub nu: Option<f64>,
    pub n_cg: usize,
    pub n_ap: usize,
    /// `None` is `1e-8·max intensity`, fixed once the measurements exist.
    pub stop_tol: Option<f64>,
    pub phase_update: String,
    pub l1_weight: f64,
    pub lp_tol: f64,
    pub lp_max_iter: usize,
    pub line_search: LineSearchSection,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub emit_svg: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub scenario: ScenarioConfig,
    pub stage1: Stage1Section,
    pub stage2: Stage2Section,
    pub output: OutputConfig,
}

/// One problem with one key.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Io(PathBuf, std::io::Error),
    Parse(String),
    Invalid(Vec<Violation>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(p, e) => write!(f, "cannot read {}: {e}", p.display()),
            ConfigError::Parse(msg) => write!(f, "{msg}"),
            ConfigError::Invalid(v) => {
                let lines: Vec<String> = v.iter().map(|v| v.to_string()).collect();
                write!(f, "{}", lines.join("; "))
            }
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub no_svg: bool,
}

#[derive(Default)]
struct Checker {
    violations: Vec<Violation>,
}

impl Checker {
    fn fail(&mut self, field: &str, message: impl Into<String>) {
        self.violations.push(Violation {
            field: field.to_string(),
            message: message.into(),
        });
    }

    fn positive(&mut self, field: &str, x: f64) -> f64 {
        if !(x.is_finite() && x > 0.0) {
            self.fail(field, format!("must be a positive finite number, got {x}"));
        }
        x
    }

    fn non_negative(&mut self, field: &str, x: f64) -> f64 {
        if !(x.is_finite() && x >= 0.0) {
            self.fail(field, format!("must be a finite number >= 0, got {x}"));
        }
        x
    }

    fn at_least(&mut self, field: &str, n: usize, min: usize) -> usize {
        if n < min {
            self.fail(field, format!("must be at least {min}, got {n}"));
        }
        n
    }

    fn grid(&mut self, prefix: &str, raw: &RawGrid, rows: usize, cols: usize) -> GridConfig {
        let g = GridConfig {
            rows: self.at_least(&format!("{prefix}.rows"), raw.rows.unwrap_or(rows), 1),
            cols: self.at_least(&format!("{prefix}.cols"), raw.cols.unwrap_or(cols), 1),
            extent: raw.extent.unwrap_or([-1.0, 1.0]),
        };
        let [lo, hi] = g.extent;
        if !(lo.is_finite() && hi.is_finite() && -1.0 <= lo && lo <= hi && hi <= 1.0) {
            self.fail(
                &format!("{prefix}.extent"),
                format!("must be [lo, hi] with -1 <= lo <= hi <= 1, got [{lo}, {hi}]"),
            );
        }
        g
    }
}

fn resolve(raw: RawConfig, overrides: &Overrides) -> Result<RunConfig, Vec<Violation>> {
    let mut c = Checker::default();
    let seed = overrides.seed.or(raw.seed).unwrap_or(0);

    let sc = match raw.scenario {
        Some(s) => s,
        None => {
            c.fail("scenario", "section is required");
            RawScenario::default()
        }
    };
    let frequency_hz = match sc.frequency_hz {
        Some(f) => c.positive("scenario.frequency_hz", f),
        None => {
            c.fail("scenario.frequency_hz", "is required");
            f64::NAN
        }
    };
    if sc.sources.is_empty() {
        c.fail("scenario.sources", "at least one source is required");
    }
    for (i, s) in sc.sources.iter().enumerate() {
        if s.position_mm.iter().any(|x| !x.is_finite()) {
            c.fail(&format!("scenario.sources[{i}].position_mm"), "must be finite");
        }
        if !s.power_db.is_finite() {
            c.fail(&format!("scenario.sources[{i}].power_db"), "must be finite");
        }
    }
    let n_sources = sc.sources.len();
    let scenario = ScenarioConfig {
        frequency_hz,
        rows: c.at_least("scenario.rows", sc.rows.unwrap_or(7), 1),
        cols: c.at_least("scenario.cols", sc.cols.unwrap_or(7), 1),
        spacing_wavelengths: c.positive("scenario.spacing_wavelengths", sc.spacing_wavelengths.unwrap_or(0.5)),
        sources: sc.sources,
        noise: NoiseConfig {
            sigma: c.non_negative("scenario.noise.sigma", sc.noise.sigma.unwrap_or(0.0)),
            seed: overrides.seed.or(sc.noise.seed).unwrap_or(seed),
        },
    };

    let s1d = Stage1Config::default();
    let r1 = raw.stage1;
    let stage1 = Stage1Section {
        grid: c.grid("stage1.grid", &r1.grid, 11, 11),
        l1_weight: c.non_negative("stage1.l1_weight", r1.l1_weight.unwrap_or(s1d.l1_weight)),
        lp_tol: c.positive("stage1.lp_tol", r1.lp_tol.unwrap_or(s1d.lp_tol)),
        lp_max_iter: c.at_least("stage1.lp_max_iter", r1.lp_max_iter.unwrap_or(s1d.lp_max_iter), 1),
        power_iters: c.at_least("stage1.power_iters", r1.power_iters.unwrap_or(s1d.power_iters), 1),
        power_tol: c.positive("stage1.power_tol", r1.power_tol.unwrap_or(s1d.power_tol)),
    };

    let apd = ApConfig::default();
    let r2 = raw.stage2;
    let phase_update = r2.phase_update.unwrap_or_else(|| "accumulate".into());
    if !matches!(phase_update.as_str(), "accumulate" | "replace") {
        c.fail(
            "stage2.phase_update",
            format!("must be \"accumulate\" or \"replace\", got {phase_update:?}"),
        );
    }
    let ls = r2.line_search;
    let line_search = LineSearchSection {
        initial_rotation: c.positive(
            "stage2.line_search.initial_rotation",
            ls.initial_rotation.unwrap_or(apd.line_search.initial_rotation),
        ),
        growth: ls.growth.unwrap_or(apd.line_search.growth),
        tol: c.positive("stage2.line_search.tol", ls.tol.unwrap_or(apd.line_search.tol)),
        max_evals: c.at_least("stage2.line_search.max_evals", ls.max_evals.unwrap_or(apd.line_search.max_evals), 3),
    };
    if !(line_search.growth.is_finite() && line_search.growth > 1.0) {
        c.fail("stage2.line_search.growth", format!("must be > 1, got {}", line_search.growth));
    }
    let stage2 = Stage2Section {
        grid: c.grid("stage2.grid", &r2.grid, 21, 21),
        k_hat: c.at_least("stage2.k_hat", r2.k_hat.unwrap_or(n_sources.max(1)), 1),
        nu: r2.nu.map(|v| c.positive("stage2.nu", v)),
        n_cg: c.at_least("stage2.n_cg", r2.n_cg.unwrap_or(apd.n_cg), 1),
        n_ap: c.at_least("stage2.n_ap", r2.n_ap.unwrap_or(apd.n_ap), 1),
        stop_tol: r2.stop_tol.map(|v| c.positive("stage2.stop_tol", v)),
        phase_update,
        l1_weight: c.non_negative("stage2.l1_weight", r2.l1_weight.unwrap_or(apd.stage2_l1_weight)),
        lp_tol: c.positive("stage2.lp_tol", r2.lp_tol.unwrap_or(apd.lp_tol)),
        lp_max_iter: c.at_least("stage2.lp_max_iter", r2.lp_max_iter.unwrap_or(apd.lp_max_iter), 1),
        line_search,
    };

    let dir = overrides.out.clone().or(raw.output.dir).unwrap_or_else(|| PathBuf::from("out"));
    if dir.exists() && !dir.is_dir() {
        c.fail("output.dir", format!("{} exists and is not a directory", dir.display()));
    }
    let output = OutputConfig {
        dir,
        emit_svg: raw.output.emit_svg.unwrap_or(true) && !overrides.no_svg,
    };

    if c.violations.is_empty() {
        Ok(RunConfig {
            seed,
            scenario,
            stage1,
            stage2,
            output,
        })
    } else {
        Err(c.violations)
    }
}

pub fn parse(text: &str, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string().trim_end().to_string()))?;
    resolve(raw, overrides).map_err(ConfigError::Invalid)
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
    parse(&text, overrides)
}

impl RunConfig {
    /// Allowed but unusual settings.
    pub fn warnings(&self) -> Vec<String> {
        let (g1, g2) = (self.stage1.grid, self.stage2.grid);
        let mut out = Vec::new();
        if g1.rows > g2.rows || g1.cols > g2.cols {
            out.push(format!(
                "stage1 grid {}x{} is larger than stage2 grid {}x{}; the lifted program grows with the square of its grid",
                g1.rows, g1.cols, g2.rows, g2.cols
            ));
        }
        if self.stage2.k_hat != self.scenario.sources.len() {
            out.push(format!(
                "stage2.k_hat = {} differs from the {} configured sources",
                self.stage2.k_hat,
                self.scenario.sources.len()
            ));
        }
        out
    }

    pub fn wavelength(&self) -> f64 {
        synthphase::SPEED_OF_LIGHT / self.scenario.frequency_hz
    }

    pub fn spacing_m(&self) -> f64 {
        self.scenario.spacing_wavelengths * self.wavelength()
    }

    /// Library configuration with the stopping tolerance fixed to `stop_tol`.
    pub fn pipeline(&self, stop_tol: f64) -> PipelineConfig {
        let s1 = &self.stage1;
        let s2 = &self.stage2;
        PipelineConfig {
            stage1: Stage1Config {
                l1_weight: s1.l1_weight,
                lp_tol: s1.lp_tol,
                lp_max_iter: s1.lp_max_iter,
                power_iters: s1.power_iters,
                power_tol: s1.power_tol,
            },
            ap: ApConfig {
                k_hat: s2.k_hat,
                nu: s2.nu,
                n_cg: s2.n_cg,
                n_ap: s2.n_ap,
                line_search: LineSearchSpec {
                    initial_rotation: s2.line_search.initial_rotation,
                    growth: s2.line_search.growth,
                    tol: s2.line_search.tol,
                    max_evals: s2.line_search.max_evals,
                },
                stop_tol: Some(stop_tol),
                phase_update: if s2.phase_update == "replace" {
                    PhaseUpdate::Replace
                } else {
                    PhaseUpdate::Accumulate
                },
                lp_tol: s2.lp_tol,
                lp_max_iter: s2.lp_max_iter,
                stage2_l1_weight: s2.l1_weight,
            },
        }
    }

    /// Effective settings as TOML, with the automatic values spelled out.
    pub fn to_toml(&self) -> String {
        let mut text = toml::to_string(self).expect("config serializes");
        if self.stage2.nu.is_none() {
            text.push_str("# stage2.nu: auto, 1e-6 * |b|^2 / N each outer iteration\n");
        }
        if self.stage2.stop_tol.is_none() {
            text.push_str("# stage2.stop_tol: auto, 1e-8 * max intensity\n");
        }
        text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
scenario.frequency_hz = 40e9
scenario.sources = [{ position_mm = [0.0, 3000.0, 0.0], power_db = 10.0 }]
"#;

    fn fields(err: ConfigError) -> Vec<String> {
        match err {
            ConfigError::Invalid(v) => v.into_iter().map(|v| v.field).collect(),
            other => panic!("expected violations, got {other}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse(MINIMAL, &Overrides::default()).unwrap();
        assert_eq!((c.scenario.rows, c.scenario.cols), (7, 7));
        assert_eq!(c.scenario.spacing_wavelengths, 0.5);
        assert_eq!((c.stage1.grid.rows, c.stage2.grid.rows), (11, 21));
        assert_eq!(c.stage2.k_hat, 1);
        assert_eq!(c.stage2.phase_update, "accumulate");
        assert_eq!(c.stage1.l1_weight, 1.0);
        assert_eq!(c.stage2.l1_weight, 0.0);
        assert!(c.output.emit_svg);
        assert!(c.warnings().is_empty());
        assert!((c.spacing_m() - 3.7474e-3).abs() < 1e-7);
    }

    #[test]
    fn overrides_win() {
        let o = Overrides {
            seed: Some(9),
            out: Some("elsewhere".into()),
            no_svg: true,
        };
        let c = parse(&format!("seed = 3\n{MINIMAL}"), &o).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.scenario.noise.seed, 9);
        assert_eq!(c.output.dir, PathBuf::from("elsewhere"));
        assert!(!c.output.emit_svg);
        let c = parse(&format!("seed = 3\n{MINIMAL}"), &Overrides::default()).unwrap();
        assert_eq!(c.scenario.noise.seed, 3);
    }

    #[test]
    fn missing_frequency_is_a_violation() {
        let text = "scenario.sources = [{ position_mm = [0.0, 1.0, 0.0], power_db = 0.0 }]";
        assert_eq!(fields(parse(text, &Overrides::default()).unwrap_err()), ["scenario.frequency_hz"]);
    }

    #[test]
    fn range_violations_name_their_field() {
        let text = format!(
            "{MINIMAL}\nstage1.grid.extent = [0.5, -0.5]\nstage2.lp_tol = 0.0\nstage2.phase_update = \"sideways\"\nstage2.line_search.growth = 1.0\n"
        );
        let got = fields(parse(&text, &Overrides::default()).unwrap_err());
        assert_eq!(
            got,
            [
                "stage1.grid.extent",
                "stage2.phase_update",
                "stage2.line_search.growth",
                "stage2.lp_tol"
            ]
        );
        let neg = MINIMAL.replace("40e9", "-40e9");
        assert_eq!(fields(parse(&neg, &Overrides::default()).unwrap_err()), ["scenario.frequency_hz"]);
    }

    #[test]
    fn unknown_and_mistyped_keys_are_rejected() {
        let err = parse(&format!("{MINIMAL}\nstage2.khat = 2\n"), &Overrides::default()).unwrap_err();
        assert!(matches!(err, ConfigError::Parse(ref m) if m.contains("khat")), "{err}");
        let err = parse("scenario.frequency_hz = \"fast\"", &Overrides::default()).unwrap_err();
        assert!(matches!(err, ConfigError::Parse(ref m) if m.contains("frequency_hz")), "{err}");
    }

    #[test]
    fn large_stage1_grid_warns() {
        let c = parse(&format!("{MINIMAL}\nstage1.grid.rows = 25\n"), &Overrides::default()).unwrap();
        assert_eq!(c.warnings().len(), 1);
    }

    #[test]
    fn effective_toml_round_trips_through_parse() {
        let c = parse(MINIMAL, &Overrides::default()).unwrap();
        let again = parse(&c.to_toml(), &Overrides::default()).unwrap();
        assert_eq!(again, c);
    }
}
