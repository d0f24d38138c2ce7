//! Run configuration: a TOML calibration file plus `SDMON_<SECTION>_<KEY>`
//! environment overrides.
//!
//! ```toml
//! [homography]            # or [intrinsics], never both
//! m = [1, 0, 0, 0, 1, 0, 0, 0, 1]
//!
//! [policy]
//! xi_px_per_m = 10.204    # ground pixels per meter
//! r_px = 20               # or r_m
//! couple_d_m = 1.0
//! couple_eps_s = 5.0
//! fps = 25
//! couples_enabled = true
//!
//! [tracker]
//! iou_gate = 0.3
//! min_hits = 3
//! max_age = 30
//! conf_threshold = 0.3
//!
//! [risk]
//! alpha = 1.0
//! beta = 0.1
//! delta = 0.5
//! decay_gamma = 0.99
//! long_term_smoothing = 0.999
//! grid_width = 1920
//! grid_height = 1080
//! cell_scale = 1.0
//! origin_x = 0.0
//! origin_y = 0.0
//! crowd_enabled = true
//!
//! [output]
//! dir = "out"
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::distancing::DistancePolicy;
use crate::error::{Error, Result};
use crate::geometry::{build_projection, CameraModel, GroundPoint, Homography, PixelPoint};
use crate::risk::GridSpec;
use crate::tracking::TrackerConfig;

pub const ENV_PREFIX: &str = "SDMON_";

/// Where the pixel to ground mapping comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum GroundSource {
    /// Camera parameters; ground coordinates come out in meters and are
    /// scaled by the pixel metric.
    Intrinsics(CameraModel),
    /// Pixel to ground-pixel homography, used as is.
    Homography(Homography),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskConfig {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub decay_gamma: f64,
    /// `None` disables the long-term crowd map.
    pub long_term_smoothing: Option<f64>,
    pub grid: GridSpec,
    pub crowd_enabled: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub ground: GroundSource,
    pub policy: DistancePolicy,
    pub couples_enabled: bool,
    pub tracker: TrackerConfig,
    /// Detections below this confidence are dropped on ingest.
    pub conf_threshold: f64,
    pub risk: RiskConfig,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    /// Documented defaults with an identity homography.
    fn default() -> Self {
        let file = FileConfig {
            homography: Some(HomographySection {
                m: vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            }),
            ..FileConfig::default()
        };
        file.resolve().expect("defaults are valid")
    }
}

impl RunConfig {
    /// Pixel to ground-pixel mapping used for every track.
    pub fn ground_homography(&self) -> Result<Homography> {
        match &self.ground {
            GroundSource::Homography(m) => Ok(*m),
            GroundSource::Intrinsics(cam) => {
                build_projection(cam)?.inverse()?.scaled(self.policy.xi)
            }
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    intrinsics: Option<IntrinsicsSection>,
    homography: Option<HomographySection>,
    #[serde(default)]
    policy: PolicySection,
    #[serde(default)]
    tracker: TrackerSection,
    #[serde(default)]
    risk: RiskSection,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntrinsicsSection {
    f: f64,
    ku: f64,
    kv: f64,
    #[serde(default)]
    skew: f64,
    cx: f64,
    cy: f64,
    theta_deg: f64,
    height_m: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HomographySection {
    m: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PolicySection {
    xi_px_per_m: f64,
    r_px: Option<f64>,
    r_m: Option<f64>,
    couple_d_m: f64,
    couple_eps_s: f64,
    fps: f64,
    couples_enabled: bool,
}

impl Default for PolicySection {
    fn default() -> Self {
        let p = DistancePolicy::oxford_town_centre();
        PolicySection {
            xi_px_per_m: p.xi,
            r_px: None,
            r_m: None,
            couple_d_m: p.couple_d,
            couple_eps_s: p.couple_eps,
            fps: p.fps,
            couples_enabled: true,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TrackerSection {
    iou_gate: f64,
    min_hits: u32,
    max_age: u32,
    conf_threshold: f64,
}

impl Default for TrackerSection {
    fn default() -> Self {
        let t = TrackerConfig::default();
        TrackerSection {
            iou_gate: t.iou_gate,
            min_hits: t.min_hits,
            max_age: t.max_age,
            conf_threshold: 0.3,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RiskSection {
    alpha: f64,
    beta: f64,
    delta: f64,
    decay_gamma: f64,
    long_term_smoothing: f64,
    long_term_enabled: bool,
    grid_width: usize,
    grid_height: usize,
    cell_scale: f64,
    origin_x: f64,
    origin_y: f64,
    crowd_enabled: bool,
}

impl Default for RiskSection {
    fn default() -> Self {
        RiskSection {
            alpha: 1.0,
            beta: 0.1,
            delta: 0.5,
            decay_gamma: 0.99,
            long_term_smoothing: 0.999,
            long_term_enabled: true,
            grid_width: 1920,
            grid_height: 1080,
            cell_scale: 1.0,
            origin_x: 0.0,
            origin_y: 0.0,
            crowd_enabled: true,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct OutputSection {
    dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: "out".into() }
    }
}

fn check(key: &str, ok: bool, value: impl std::fmt::Display, want: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(key, format!("{value} is out of range, expected {want}")))
    }
}

impl FileConfig {
    fn resolve(self) -> Result<RunConfig> {
        let ground = match (self.intrinsics, self.homography) {
            (Some(_), Some(_)) => {
                return Err(Error::config(
                    "intrinsics",
                    "give either an intrinsics or a homography block, not both",
                ))
            }
            (None, None) => {
                return Err(Error::config(
                    "homography",
                    "an intrinsics or a homography block is required",
                ))
            }
            (Some(i), None) => {
                let cam = CameraModel {
                    f: i.f,
                    ku: i.ku,
                    kv: i.kv,
                    skew: i.skew,
                    cx: i.cx,
                    cy: i.cy,
                    theta: i.theta_deg.to_radians(),
                    height: i.height_m,
                };
                cam.validate().map_err(|e| Error::config("intrinsics", e.to_string()))?;
                build_projection(&cam).map_err(|e| Error::config("intrinsics", e.to_string()))?;
                GroundSource::Intrinsics(cam)
            }
            (None, Some(h)) => {
                let m: [f64; 9] = h.m.as_slice().try_into().map_err(|_| {
                    Error::config("homography.m", format!("needs 9 numbers, got {}", h.m.len()))
                })?;
                let m = Homography::from_row_major(m)
                    .map_err(|e| Error::config("homography.m", e.to_string()))?;
                GroundSource::Homography(m)
            }
        };

        let p = self.policy;
        let r = match (p.r_px, p.r_m) {
            (Some(_), Some(_)) => {
                return Err(Error::config("policy.r_px", "set r_px or r_m, not both"))
            }
            (Some(px), None) => px,
            (None, Some(m)) => m * p.xi_px_per_m,
            (None, None) => DistancePolicy::oxford_town_centre().r,
        };
        let policy = DistancePolicy {
            xi: p.xi_px_per_m,
            r,
            couple_d: p.couple_d_m,
            couple_eps: p.couple_eps_s,
            fps: p.fps,
        };
        policy.validate().map_err(|e| match e {
            Error::Config { key, message } => Error::config(format!("policy.{key}"), message),
            e => e,
        })?;

        let t = self.tracker;
        check("tracker.iou_gate", (0.0..=1.0).contains(&t.iou_gate), t.iou_gate, "[0, 1]")?;
        check("tracker.min_hits", t.min_hits >= 1, t.min_hits, ">= 1")?;
        check(
            "tracker.conf_threshold",
            (0.0..=1.0).contains(&t.conf_threshold),
            t.conf_threshold,
            "[0, 1]",
        )?;
        let tracker = TrackerConfig {
            iou_gate: t.iou_gate,
            min_hits: t.min_hits,
            max_age: t.max_age,
            ..TrackerConfig::default()
        };

        let k = self.risk;
        for (key, v) in [("risk.alpha", k.alpha), ("risk.beta", k.beta), ("risk.delta", k.delta)] {
            check(key, v >= 0.0 && v.is_finite(), v, ">= 0")?;
        }
        check("risk.decay_gamma", k.decay_gamma > 0.0 && k.decay_gamma <= 1.0, k.decay_gamma, "(0, 1]")?;
        check(
            "risk.long_term_smoothing",
            (0.0..1.0).contains(&k.long_term_smoothing),
            k.long_term_smoothing,
            "[0, 1)",
        )?;
        check("risk.grid_width", k.grid_width >= 1, k.grid_width, ">= 1")?;
        check("risk.grid_height", k.grid_height >= 1, k.grid_height, ">= 1")?;
        check(
            "risk.cell_scale",
            k.cell_scale > 0.0 && k.cell_scale.is_finite(),
            k.cell_scale,
            "> 0",
        )?;
        for (key, v) in [("risk.origin_x", k.origin_x), ("risk.origin_y", k.origin_y)] {
            check(key, v.is_finite(), v, "a finite number")?;
        }
        let risk = RiskConfig {
            alpha: k.alpha,
            beta: k.beta,
            delta: k.delta,
            decay_gamma: k.decay_gamma,
            long_term_smoothing: k.long_term_enabled.then_some(k.long_term_smoothing),
            grid: GridSpec {
                width: k.grid_width,
                height: k.grid_height,
                cell_scale: k.cell_scale,
                origin: (k.origin_x, k.origin_y),
            },
            crowd_enabled: k.crowd_enabled,
        };

        Ok(RunConfig {
            ground,
            policy,
            couples_enabled: p.couples_enabled,
            tracker,
            conf_threshold: t.conf_threshold,
            risk,
            output_dir: self.output.dir,
        })
    }
}

/// Reads an override value: TOML syntax first (`25`, `true`, `[1, 2]`),
/// then a bare comma list, then a plain string.
fn env_value(raw: &str) -> toml::Value {
    for candidate in [raw.to_string(), format!("[{raw}]")] {
        if let Ok(mut t) = format!("v = {candidate}").parse::<toml::Table>() {
            return t.remove("v").unwrap();
        }
    }
    toml::Value::String(raw.to_string())
}

fn apply_env(
    table: &mut toml::Table,
    vars: impl IntoIterator<Item = (String, String)>,
) -> Result<()> {
    let mut vars: Vec<_> = vars
        .into_iter()
        .filter(|(k, _)| k.starts_with(ENV_PREFIX))
        .collect();
    vars.sort();
    for (name, raw) in vars {
        let rest = name[ENV_PREFIX.len()..].to_ascii_lowercase();
        let Some((section, key)) = rest.split_once('_') else {
            return Err(Error::config(name, "expected <PREFIX><SECTION>_<KEY>"));
        };
        let entry = table
            .entry(section.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        let toml::Value::Table(section_table) = entry else {
            return Err(Error::config(name, format!("`{section}` is not a section")));
        };
        section_table.insert(key.to_string(), env_value(&raw));
    }
    Ok(())
}

/// Parses configuration text, applying overrides from `vars`.
pub fn parse_config(
    text: &str,
    vars: impl IntoIterator<Item = (String, String)>,
) -> Result<RunConfig> {
    let mut table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config("<file>", e.message().to_string()))?;
    apply_env(&mut table, vars)?;
    let file: FileConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::config("<file>", e.message().to_string()))?;
    file.resolve()
}

/// Loads `path` with overrides from the process environment.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, std::env::vars())
}

/// Reads `u v x y` lines (image point, then ground point), separated by
/// whitespace or commas. `#` starts a comment.
pub fn parse_correspondences(text: &str) -> Result<Vec<(PixelPoint, GroundPoint)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<f64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        let [u, v, x, y] = nums[..] else {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected 4 numbers, got {}", nums.len()),
            });
        };
        out.push((PixelPoint::new(u, v), GroundPoint::new(x, y)));
    }
    Ok(out)
}

/// A `[homography]` block loadable by [`parse_config`].
pub fn format_homography_block(m: &Homography) -> String {
    let nums: Vec<String> = m.to_row_major().iter().map(|v| format!("{v:?}")).collect();
    format!("[homography]\nm = [{}]\n", nums.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        parse_config(text, [])
    }

    const IDENTITY: &str = "[homography]\nm = [1, 0, 0, 0, 1, 0, 0, 0, 1]\n";

    fn config_key(r: Result<RunConfig>) -> String {
        match r {
            Err(Error::Config { key, .. }) => key,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn otc_preset_accepted() {
        let c = parse(&format!(
            "{IDENTITY}[policy]\nxi_px_per_m = {}\nr_px = 20\ncouple_eps_s = 5\n",
            10.0 / 0.98
        ))
        .unwrap();
        assert!((0.98 * c.policy.xi - 10.0).abs() < 1e-12);
        assert_eq!(c.policy.r, 20.0);
        assert_eq!(c.policy.couple_frames(), 125.0);
    }

    #[test]
    fn minimal_file_gets_documented_defaults() {
        let c = parse(&format!("{IDENTITY}[policy]\nxi_px_per_m = 10\nr_px = 25\nfps = 30\n")).unwrap();
        assert_eq!(c.policy.xi, 10.0);
        assert_eq!(c.policy.r, 25.0);
        assert_eq!(c.policy.fps, 30.0);
        assert_eq!(c.policy.couple_d, 1.0);
        assert_eq!(c.policy.couple_eps, 5.0);
        assert!(c.couples_enabled);
        assert_eq!(c.tracker, TrackerConfig::default());
        assert_eq!((c.tracker.iou_gate, c.tracker.min_hits, c.tracker.max_age), (0.3, 3, 30));
        assert_eq!(c.conf_threshold, 0.3);
        assert_eq!((c.risk.alpha, c.risk.beta, c.risk.delta), (1.0, 0.1, 0.5));
        assert_eq!(c.risk.decay_gamma, 0.99);
        assert_eq!(c.risk.long_term_smoothing, Some(0.999));
        assert_eq!(c.risk.grid, GridSpec::new(1920, 1080));
        assert!(c.risk.crowd_enabled);
        assert_eq!(c.output_dir, PathBuf::from("out"));
        assert_eq!(c.ground_homography().unwrap(), Homography::identity());
    }

    #[test]
    fn exactly_one_ground_block() {
        let both = format!("{IDENTITY}[intrinsics]\nf = 1\nku = 1\nkv = 1\ncx = 0\ncy = 0\ntheta_deg = 60\nheight_m = 3\n");
        assert_eq!(config_key(parse(&both)), "intrinsics");
        assert_eq!(config_key(parse("[policy]\nr_px = 3\n")), "homography");
    }

    #[test]
    fn out_of_range_values_name_the_key() {
        let cases = [
            ("[policy]\nr_px = -1\n", "policy.r_px"),
            ("[policy]\nfps = 0\n", "policy.fps"),
            ("[tracker]\niou_gate = 1.5\n", "tracker.iou_gate"),
            ("[tracker]\nmin_hits = 0\n", "tracker.min_hits"),
            ("[risk]\ndecay_gamma = 1.5\n", "risk.decay_gamma"),
            ("[risk]\ncell_scale = 0\n", "risk.cell_scale"),
            ("[risk]\nbeta = -0.1\n", "risk.beta"),
        ];
        for (body, key) in cases {
            assert_eq!(config_key(parse(&format!("{IDENTITY}{body}"))), key, "{body}");
        }
        assert_eq!(
            config_key(parse("[homography]\nm = [1, 0, 0, 0, 1, 0, 0, 0]\n")),
            "homography.m"
        );
        assert_eq!(
            config_key(parse("[homography]\nm = [0, 0, 0, 0, 0, 0, 0, 0, 1]\n")),
            "homography.m"
        );
        assert!(parse(&format!("{IDENTITY}[policy]\nradius = 3\n")).is_err());
    }

    #[test]
    fn metric_safe_distance() {
        let c = parse(&format!("{IDENTITY}[policy]\nxi_px_per_m = 10\nr_m = 2\n")).unwrap();
        assert_eq!(c.policy.r, 20.0);
        assert_eq!(
            config_key(parse(&format!("{IDENTITY}[policy]\nr_m = 2\nr_px = 2\n"))),
            "policy.r_px"
        );
    }

    #[test]
    fn env_overrides() {
        let vars = [
            ("SDMON_POLICY_R_PX".to_string(), "33".to_string()),
            ("SDMON_TRACKER_MAX_AGE".to_string(), "5".to_string()),
            ("SDMON_RISK_CROWD_ENABLED".to_string(), "false".to_string()),
            ("SDMON_OUTPUT_DIR".to_string(), "/tmp/x y".to_string()),
            ("UNRELATED".to_string(), "1".to_string()),
        ];
        let c = parse_config(IDENTITY, vars).unwrap();
        assert_eq!(c.policy.r, 33.0);
        assert_eq!(c.tracker.max_age, 5);
        assert!(!c.risk.crowd_enabled);
        assert_eq!(c.output_dir, PathBuf::from("/tmp/x y"));

        let vars = [("SDMON_HOMOGRAPHY_M".to_string(), "2,0,0,0,2,0,0,0,1".to_string())];
        let c = parse_config("", vars).unwrap();
        assert_eq!(c.ground_homography().unwrap().to_row_major()[0], 2.0);

        let bad = [("SDMON_TRACKER_MIN_HITS".to_string(), "0".to_string())];
        assert_eq!(config_key(parse_config(IDENTITY, bad)), "tracker.min_hits");
    }

    #[test]
    fn intrinsics_give_metric_ground_scaled_by_xi() {
        let text = "[intrinsics]\nf = 1\nku = 800\nkv = 800\ncx = 640\ncy = 360\ntheta_deg = 60\nheight_m = 4\n[policy]\nxi_px_per_m = 10\n";
        let c = parse(text).unwrap();
        let GroundSource::Intrinsics(cam) = c.ground else {
            panic!("not intrinsics");
        };
        let world_to_image = build_projection(&cam).unwrap();
        let to_ground = c.ground_homography().unwrap();
        // Ground point (1.5 m, 2 m) seen in the image, mapped back, times xi.
        let img = world_to_image.matrix() * nalgebra::Vector3::new(1.5, 2.0, 1.0);
        let px = crate::geometry::PixelPoint::new(img.x / img.z, img.y / img.z);
        let g = crate::geometry::project_to_bev(&to_ground, px).unwrap();
        assert!((g.xw - 15.0).abs() < 1e-9 && (g.yw - 20.0).abs() < 1e-9, "{g:?}");
    }

    #[test]
    fn correspondences_and_block_round_trip() {
        let pts = parse_correspondences("# u v x y\n0 0 0 0\n1,0, 2,0\n0 1 0 2 # c\n\n1 1 2 2\n").unwrap();
        assert_eq!(pts.len(), 4);
        assert_eq!((pts[1].0.x, pts[1].1.xw), (1.0, 2.0));
        assert!(matches!(parse_correspondences("1 2 3\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_correspondences("\n1 2 3 x\n"), Err(Error::Parse { line: 2, .. })));

        let m = crate::geometry::estimate_homography(&pts).unwrap();
        let c = parse(&format_homography_block(&m)).unwrap();
        assert_eq!(c.ground_homography().unwrap(), m);
    }

    #[test]
    fn defaults_constructor() {
        let c = RunConfig::default();
        assert_eq!(c.policy, DistancePolicy::oxford_town_centre());
        assert_eq!(c.ground_homography().unwrap(), Homography::identity());
    }
}
