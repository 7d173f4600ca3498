//! Line-oriented text data banks.
//!
//! ```text
//! kpzpf-bank=1 model=cfbm rule=coinflip alpha=- hurst=0.6666666666666666 ... version=0.1.0
//! replica=0 field=U positions=-1.2345678901234567e0,...
//! replica=0 field=L positions=...
//! replica=0 survivors=0:1601,1:1512,2:1320,...
//! replica=1 skipped=too-few-points
//! ```
//!
//! Positions are written with 17 significant digits so they read back to the
//! same bits. Every header value is deterministic in the experiment spec, so
//! rerunning a spec reproduces the file byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{ExperimentSpec, HarnessError, Model};
use crate::coalesce::{CoalescenceRule, SpawnPoint};
use crate::fgn::HurstIndex;
use crate::fields::{FieldKind, LowerPlacement, PointField};
use crate::lpp::{Boundary, Geometry};

pub const BANK_FORMAT_VERSION: &str = "1";
const JUMP_WINDOWS: &str = "overlapping";
const RESCALE: &str = "n^(2/3)";

#[derive(Debug, Clone, PartialEq)]
pub struct BankHeader {
    pub model: Model,
    pub n: usize,
    pub k: Option<usize>,
    pub replicas: usize,
    pub root_seed: u64,
    pub trim_per_end: usize,
    pub lower_placement: LowerPlacement,
    pub jump_windows: String,
    pub rescale: String,
    pub version: String,
}

impl BankHeader {
    pub fn for_spec(spec: &ExperimentSpec) -> Self {
        Self {
            model: spec.model.clone(),
            n: spec.n,
            k: spec.half_width(),
            replicas: spec.replicas,
            root_seed: spec.root_seed,
            trim_per_end: spec.trim_per_end,
            lower_placement: spec.lower_placement,
            jump_windows: JUMP_WINDOWS.to_string(),
            rescale: RESCALE.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn label(&self) -> String {
        self.model.label()
    }

    /// Settings two banks must share before their statistics are comparable.
    pub fn conventions(&self) -> [(&'static str, String); 4] {
        [
            ("trim_per_end", self.trim_per_end.to_string()),
            ("lower_placement", self.lower_placement.as_str().to_string()),
            ("jump_windows", self.jump_windows.clone()),
            ("rescale", self.rescale.clone()),
        ]
    }

    fn to_line(&self) -> String {
        let dash = || "-".to_string();
        let (model, rule, alpha, hurst, spawn, boundary, rho, geometry) = match &self.model {
            Model::CfBm { rule, hurst, spawn } => {
                let (name, alpha) = match rule {
                    CoalescenceRule::CoinFlip => ("coinflip", dash()),
                    CoalescenceRule::Regenerate => ("regenerate", dash()),
                    CoalescenceRule::PolyaUrn(a) => ("polya", format_alpha(*a)),
                };
                (
                    "cfbm",
                    name.to_string(),
                    alpha,
                    hurst.value().to_string(),
                    spawn.as_str().to_string(),
                    dash(),
                    dash(),
                    dash(),
                )
            }
            Model::Lpp { boundary, geometry } => {
                let (b, rho) = match boundary {
                    Boundary::None => ("none", dash()),
                    Boundary::Stationary { rho } => ("stationary", rho.to_string()),
                };
                ("lpp", dash(), dash(), dash(), dash(), b.to_string(), rho, geometry.as_str().to_string())
            }
        };
        let k = self.k.map_or_else(dash, |k| k.to_string());
        format!(
            "kpzpf-bank={BANK_FORMAT_VERSION} model={model} rule={rule} alpha={alpha} hurst={hurst} spawn={spawn} \
             boundary={boundary} rho={rho} geometry={geometry} n={} k={k} replicas={} root_seed={} trim_per_end={} \
             lower_placement={} jump_windows={} rescale={} version={}",
            self.n,
            self.replicas,
            self.root_seed,
            self.trim_per_end,
            self.lower_placement.as_str(),
            self.jump_windows,
            self.rescale,
            self.version,
        )
    }

    fn parse(line: &str) -> Result<Self, HarnessError> {
        let err = |msg: String| HarnessError::Parse { line: 1, msg };
        let kv: BTreeMap<&str, &str> = line
            .split_whitespace()
            .map(|tok| tok.split_once('=').ok_or_else(|| err(format!("expected key=value, got `{tok}`"))))
            .collect::<Result<_, _>>()?;
        let get = |key: &str| kv.get(key).copied().ok_or_else(|| err(format!("missing header key `{key}`")));
        let num = |key: &str| -> Result<u64, HarnessError> {
            get(key)?.parse().map_err(|_| err(format!("`{key}` is not an integer")))
        };
        let real = |key: &str| -> Result<f64, HarnessError> {
            get(key)?.parse().map_err(|_| err(format!("`{key}` is not a number")))
        };

        if get("kpzpf-bank")? != BANK_FORMAT_VERSION {
            return Err(err("unsupported bank format version".into()));
        }
        let model = match get("model")? {
            "cfbm" => {
                let rule = match get("rule")? {
                    "coinflip" => CoalescenceRule::CoinFlip,
                    "regenerate" => CoalescenceRule::Regenerate,
                    "polya" => CoalescenceRule::PolyaUrn(real("alpha")?),
                    other => return Err(err(format!("unknown rule `{other}`"))),
                };
                let hurst = HurstIndex::new(real("hurst")?).map_err(|e| err(e.to_string()))?;
                let spawn = SpawnPoint::parse(get("spawn")?).ok_or_else(|| err("unknown spawn point".into()))?;
                Model::CfBm { rule, hurst, spawn }
            }
            "lpp" => {
                let boundary = match get("boundary")? {
                    "none" => Boundary::None,
                    "stationary" => Boundary::Stationary { rho: real("rho")? },
                    other => return Err(err(format!("unknown boundary `{other}`"))),
                };
                let geometry = Geometry::parse(get("geometry")?).ok_or_else(|| err("unknown geometry".into()))?;
                Model::Lpp { boundary, geometry }
            }
            other => return Err(err(format!("unknown model `{other}`"))),
        };
        let k = match get("k")? {
            "-" => None,
            _ => Some(num("k")? as usize),
        };
        Ok(Self {
            model,
            n: num("n")? as usize,
            k,
            replicas: num("replicas")? as usize,
            root_seed: num("root_seed")?,
            trim_per_end: num("trim_per_end")? as usize,
            lower_placement: LowerPlacement::parse(get("lower_placement")?)
                .ok_or_else(|| err("unknown lower_placement".into()))?,
            jump_windows: get("jump_windows")?.to_string(),
            rescale: get("rescale")?.to_string(),
            version: get("version")?.to_string(),
        })
    }
}

fn format_alpha(alpha: f64) -> String {
    if alpha.is_infinite() {
        "inf".to_string()
    } else {
        alpha.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReplicaOutcome {
    Completed {
        replica: usize,
        /// Trimmed, rescaled positions.
        upper: Vec<f64>,
        lower: Vec<f64>,
        /// `(t, live particles)` at the recorded times; cfBM only.
        survivors: Option<Vec<(usize, usize)>>,
    },
    Skipped {
        replica: usize,
        reason: String,
    },
}

impl ReplicaOutcome {
    pub fn replica(&self) -> usize {
        match self {
            Self::Completed { replica, .. } | Self::Skipped { replica, .. } => *replica,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataBank {
    header: BankHeader,
    records: Vec<ReplicaOutcome>,
}

impl DataBank {
    pub fn new(header: BankHeader, records: Vec<ReplicaOutcome>) -> Self {
        Self { header, records }
    }

    pub fn header(&self) -> &BankHeader {
        &self.header
    }

    pub fn records(&self) -> &[ReplicaOutcome] {
        &self.records
    }

    pub fn completed(&self) -> impl Iterator<Item = &ReplicaOutcome> {
        self.records.iter().filter(|r| matches!(r, ReplicaOutcome::Completed { .. }))
    }

    pub fn skipped(&self) -> impl Iterator<Item = &ReplicaOutcome> {
        self.records.iter().filter(|r| matches!(r, ReplicaOutcome::Skipped { .. }))
    }

    /// One point field per completed replica.
    pub fn fields(&self, kind: FieldKind) -> Vec<PointField> {
        self.records
            .iter()
            .filter_map(|r| match r {
                ReplicaOutcome::Completed { upper, lower, .. } => {
                    let positions = match kind {
                        FieldKind::Upper => upper,
                        FieldKind::Lower => lower,
                    };
                    Some(PointField::from_positions(positions.clone(), kind, self.header.n, true))
                }
                ReplicaOutcome::Skipped { .. } => None,
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = self.header.to_line();
        out.push('\n');
        for record in &self.records {
            match record {
                ReplicaOutcome::Completed { replica, upper, lower, survivors } => {
                    for (kind, positions) in [(FieldKind::Upper, upper), (FieldKind::Lower, lower)] {
                        let _ = write!(out, "replica={replica} field={} positions=", kind.tag());
                        for (i, x) in positions.iter().enumerate() {
                            if i > 0 {
                                out.push(',');
                            }
                            let _ = write!(out, "{x:.16e}");
                        }
                        out.push('\n');
                    }
                    if let Some(samples) = survivors {
                        let joined: Vec<String> = samples.iter().map(|(t, c)| format!("{t}:{c}")).collect();
                        let _ = writeln!(out, "replica={replica} survivors={}", joined.join(","));
                    }
                }
                ReplicaOutcome::Skipped { replica, reason } => {
                    let _ = writeln!(out, "replica={replica} skipped={reason}");
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, HarnessError> {
        let mut lines = text.lines();
        let header = BankHeader::parse(lines.next().ok_or(HarnessError::Parse { line: 1, msg: "empty bank".into() })?)?;

        #[derive(Default)]
        struct Partial {
            upper: Option<Vec<f64>>,
            lower: Option<Vec<f64>>,
            survivors: Option<Vec<(usize, usize)>>,
            skipped: Option<String>,
        }
        let mut partial: BTreeMap<usize, Partial> = BTreeMap::new();

        for (idx, line) in lines.enumerate() {
            let lineno = idx + 2;
            if line.trim().is_empty() {
                continue;
            }
            let err = |msg: &str| HarnessError::Parse { line: lineno, msg: msg.to_string() };
            let mut toks = line.split_whitespace();
            let replica: usize = toks
                .next()
                .and_then(|t| t.strip_prefix("replica="))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| err("expected replica=<index>"))?;
            let entry = partial.entry(replica).or_default();
            let second = toks.next().ok_or_else(|| err("truncated record"))?;
            if let Some(reason) = second.strip_prefix("skipped=") {
                entry.skipped = Some(reason.to_string());
            } else if let Some(list) = second.strip_prefix("survivors=") {
                let samples = list
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(|pair| {
                        let (t, c) = pair.split_once(':')?;
                        Some((t.parse().ok()?, c.parse().ok()?))
                    })
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| err("bad survivor sample"))?;
                entry.survivors = Some(samples);
            } else if let Some(tag) = second.strip_prefix("field=") {
                let kind = FieldKind::from_tag(tag).ok_or_else(|| err("field must be U or L"))?;
                let list = toks
                    .next()
                    .and_then(|t| t.strip_prefix("positions="))
                    .ok_or_else(|| err("expected positions=<list>"))?;
                let positions = list
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(str::parse::<f64>)
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| err("bad position value"))?;
                if !positions.windows(2).all(|w| w[0] < w[1]) {
                    return Err(err("positions must be strictly increasing"));
                }
                match kind {
                    FieldKind::Upper => entry.upper = Some(positions),
                    FieldKind::Lower => entry.lower = Some(positions),
                }
            } else {
                return Err(err("unknown record kind"));
            }
        }

        let records = partial
            .into_iter()
            .map(|(replica, p)| match (p.skipped, p.upper, p.lower) {
                (Some(reason), _, _) => Ok(ReplicaOutcome::Skipped { replica, reason }),
                (None, Some(upper), Some(lower)) => {
                    Ok(ReplicaOutcome::Completed { replica, upper, lower, survivors: p.survivors })
                }
                _ => Err(HarnessError::Parse {
                    line: 0,
                    msg: format!("replica {replica} lacks an upper or lower field"),
                }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { header, records })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), HarnessError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}
