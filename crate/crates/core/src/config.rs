//! INI-style scenario documents.
//!
//! ```text
//! # comment
//! preset = fig3_g_mid
//! regimes = qq, sc
//!
//! [params]
//! g = 0.2
//!
//! [integrator]
//! t_final = 50
//! ```
//!
//! A `preset` line is applied first wherever it appears; every other key
//! then overrides it in document order. Missing keys keep the defaults
//! (`m = omega = 1`, `levels = 4`, `dt = 1e-3`, `t_final = 10`, initial
//! phase point at the origin with spins `|++⟩`).

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::model::{ModelParams, OscillatorForm};
use crate::observables::{EntropyMeasure, Regime};
use crate::quantum::{BasisLayout, QuantumState};
use crate::scenarios::{
    angular_guesses, build_ghz_with_levels, preset, InitialData, ScenarioConfig,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Section {
    Top,
    Params,
    Initial,
    Integrator,
    Output,
    Statics,
    Manifest,
}

impl Section {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "params" => Section::Params,
            "initial" => Section::Initial,
            "integrator" => Section::Integrator,
            "output" => Section::Output,
            "statics" => Section::Statics,
            "manifest" => Section::Manifest,
            _ => return None,
        })
    }
}

struct Entry {
    line: usize,
    section: Section,
    key: String,
    value: String,
}

fn split_entries(text: &str) -> Result<Vec<Entry>> {
    let mut section = Section::Top;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| Error::Parse {
                line,
                msg: "unterminated section header".into(),
            })?;
            section = Section::parse(name.trim()).ok_or_else(|| Error::Parse {
                line,
                msg: format!("unknown section [{}]", name.trim()),
            })?;
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            msg: format!("expected 'key = value', got '{content}'"),
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Parse {
                line,
                msg: "empty key".into(),
            });
        }
        out.push(Entry {
            line,
            section,
            key: key.to_string(),
            value: value.trim().to_string(),
        });
    }
    Ok(out)
}

fn num(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| invalid(key, format!("'{v}' is not a number")))?;
    if !x.is_finite() {
        return Err(invalid(key, "must be finite"));
    }
    Ok(x)
}

fn count(key: &str, v: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| invalid(key, format!("'{v}' is not a non-negative integer")))
}

fn flag(key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(invalid(key, format!("'{v}' is not a boolean"))),
    }
}

fn list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn numbers(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

/// Interleaved `re im re im …` into a state.
fn amplitudes(key: &str, v: &str, layout: BasisLayout) -> Result<QuantumState> {
    let vals = numbers(key, v)?;
    if vals.len() != 2 * layout.dim() {
        return Err(invalid(
            key,
            format!(
                "expected {} numbers (re im pairs), got {}",
                2 * layout.dim(),
                vals.len()
            ),
        ));
    }
    let amps = vals
        .chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect();
    QuantumState::new(amps, layout)
}

/// Named two-spin states: `++`, `+-`, `-+`, `--`, and
/// `bell = (|++⟩ + |−−⟩)/√2`.
pub fn named_spin_state(name: &str) -> Result<QuantumState> {
    let up = |c: u8| c == b'+';
    match name {
        "++" | "+-" | "-+" | "--" => {
            let b = name.as_bytes();
            Ok(QuantumState::spin_product(up(b[0]), up(b[1])))
        }
        "bell" => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let amps = vec![
                Complex64::new(h, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(h, 0.0),
            ];
            QuantumState::new(amps, BasisLayout::Spins)
        }
        other => Err(invalid("spin", format!("unknown spin state '{other}'"))),
    }
}

pub fn parse_oscillator_form(v: &str) -> Result<OscillatorForm> {
    match v {
        "number" => Ok(OscillatorForm::NumberOperator),
        "quadrature" => Ok(OscillatorForm::Quadrature),
        other => Err(invalid(
            "oscillator_form",
            format!("unknown form '{other}'"),
        )),
    }
}

fn oscillator_form_name(f: OscillatorForm) -> &'static str {
    match f {
        OscillatorForm::NumberOperator => "number",
        OscillatorForm::Quadrature => "quadrature",
    }
}

/// Full-state sources resolved once `levels` is final.
enum PendingState {
    Ghz,
    Amplitudes(String),
}

fn default_config() -> ScenarioConfig {
    ScenarioConfig::new(
        "scenario",
        ModelParams::default(),
        InitialData::Matched {
            x0: 0.0,
            p0: 0.0,
            spin: QuantumState::spin_product(true, true),
        },
    )
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let entries = split_entries(text)?;

    let presets: Vec<&Entry> = entries
        .iter()
        .filter(|e| e.section == Section::Top && e.key == "preset")
        .collect();
    let mut cfg = match presets.as_slice() {
        [] => default_config(),
        [one] => preset(&one.value)?,
        [_, second, ..] => {
            return Err(Error::Parse {
                line: second.line,
                msg: "preset given more than once".into(),
            })
        }
    };

    let (mut x0, mut p0, mut spin, mut pending, mut regimes_set) = match &cfg.initial {
        InitialData::Matched { x0, p0, spin } => (*x0, *p0, spin.clone(), None, false),
        InitialData::Explicit(s) => (
            0.0,
            0.0,
            QuantumState::spin_product(true, true),
            Some(s.clone()),
            false,
        ),
    };
    let mut explicit: Option<PendingState> = match &pending {
        Some(s) if *s == build_ghz_with_levels(s.dim() / 4) => Some(PendingState::Ghz),
        _ => None,
    };
    let mut matched_touched = false;
    let mut guess_radii: Option<Vec<f64>> = None;
    let mut guess_angles: Option<usize> = None;
    let mut guesses_explicit = false;

    for e in &entries {
        let (k, v) = (e.key.as_str(), e.value.as_str());
        let unknown = || Error::Parse {
            line: e.line,
            msg: format!("unknown key '{k}'"),
        };
        match e.section {
            Section::Manifest => {}
            Section::Top => match k {
                "preset" => {}
                "label" => cfg.label = v.to_string(),
                "regimes" => {
                    cfg.regimes = list(v).map(str::parse).collect::<Result<Vec<Regime>>>()?;
                    regimes_set = true;
                }
                _ => return Err(unknown()),
            },
            Section::Params => {
                let p = &mut cfg.params;
                match k {
                    "m" => p.m = num(k, v)?,
                    "omega" => p.omega = num(k, v)?,
                    "omega_s" => p.omega_s = num(k, v)?,
                    "g1" => p.g1 = num(k, v)?,
                    "g2" => p.g2 = num(k, v)?,
                    "g" => {
                        p.g1 = num(k, v)?;
                        p.g2 = p.g1;
                    }
                    "lambda" => p.lambda = num(k, v)?,
                    "levels" => p.levels = count(k, v)?,
                    "oscillator_form" => p.oscillator_form = parse_oscillator_form(v)?,
                    _ => return Err(unknown()),
                }
            }
            Section::Initial => match k {
                "x0" => {
                    x0 = num(k, v)?;
                    matched_touched = true;
                    explicit = None;
                }
                "p0" => {
                    p0 = num(k, v)?;
                    matched_touched = true;
                    explicit = None;
                }
                "spin" => {
                    spin = named_spin_state(v)?;
                    matched_touched = true;
                    explicit = None;
                }
                "spin_amplitudes" => {
                    spin = amplitudes(k, v, BasisLayout::Spins)?;
                    matched_touched = true;
                    explicit = None;
                }
                "state" => match v {
                    "ghz" => explicit = Some(PendingState::Ghz),
                    "matched" => {
                        pending = None;
                        matched_touched = true;
                        explicit = None;
                    }
                    other => return Err(invalid(k, format!("unknown state '{other}'"))),
                },
                "state_amplitudes" => explicit = Some(PendingState::Amplitudes(v.to_string())),
                _ => return Err(unknown()),
            },
            Section::Integrator => {
                let it = &mut cfg.integrator;
                match k {
                    "dt" => it.dt = num(k, v)?,
                    "t_final" => it.t_final = num(k, v)?,
                    "sample_every" => it.sample_every = count(k, v)?,
                    "method" => it.method = v.parse()?,
                    "adaptive_tol" => it.adaptive_tol = num(k, v)?,
                    "auto_dt" => it.auto_dt = flag(k, v)?,
                    _ => return Err(unknown()),
                }
            }
            Section::Output => match k {
                "observables" => cfg.outputs = list(v).map(str::to_string).collect(),
                "entropy" => cfg.entropy = v.parse::<EntropyMeasure>()?,
                _ => return Err(unknown()),
            },
            Section::Statics => match k {
                "branches" => {
                    cfg.statics.branches = list(v).map(|b| count(k, b)).collect::<Result<_>>()?;
                }
                "guess_radii" => guess_radii = Some(numbers(k, v)?),
                "guess_angles" => guess_angles = Some(count(k, v)?),
                "guesses" => {
                    let mut pts = Vec::new();
                    for pair in v.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                        match numbers(k, pair)?.as_slice() {
                            [x, p] => pts.push((*x, *p)),
                            _ => return Err(invalid(k, format!("'{pair}' is not an 'x p' pair"))),
                        }
                    }
                    cfg.statics.guesses = pts;
                    guesses_explicit = true;
                }
                _ => return Err(unknown()),
            },
        }
    }

    if guess_radii.is_some() || guess_angles.is_some() {
        if guesses_explicit {
            return Err(invalid(
                "guesses",
                "give either explicit guesses or radii/angles, not both",
            ));
        }
        let radii = guess_radii.unwrap_or_else(|| vec![1.0]);
        let angles = guess_angles.unwrap_or(8);
        if angles == 0 {
            return Err(invalid("guess_angles", "must be at least 1"));
        }
        cfg.statics.guesses = angular_guesses(&radii, angles);
    }

    let layout = BasisLayout::OscillatorSpins {
        levels: cfg.params.levels,
    };
    let full = match explicit {
        Some(PendingState::Ghz) => Some(if cfg.params.levels >= 2 {
            build_ghz_with_levels(cfg.params.levels)
        } else {
            return Err(invalid("levels", "truncation needs at least 2 levels"));
        }),
        Some(PendingState::Amplitudes(v)) => Some(amplitudes("state_amplitudes", &v, layout)?),
        None if matched_touched => None,
        None => pending,
    };
    cfg.initial = match full {
        Some(state) => {
            if !regimes_set {
                cfg.regimes = vec![Regime::Qq];
            }
            InitialData::Explicit(state)
        }
        None => {
            if !regimes_set && matches!(cfg.initial, InitialData::Explicit(_)) {
                cfg.regimes = Regime::ALL.to_vec();
            }
            InitialData::Matched { x0, p0, spin }
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

fn join_complex(amps: &[Complex64]) -> String {
    amps.iter()
        .map(|z| format!("{:?} {:?}", z.re, z.im))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Fully resolved document; [`parse_config`] on it gives back an equal
/// config.
pub fn to_config_string(cfg: &ScenarioConfig) -> String {
    let mut s = String::new();
    let regimes: Vec<&str> = cfg.regimes.iter().map(Regime::as_str).collect();
    let _ = writeln!(s, "label = {}", cfg.label);
    let _ = writeln!(s, "regimes = {}", regimes.join(", "));

    let p = &cfg.params;
    let _ = writeln!(s, "\n[params]");
    let _ = writeln!(s, "m = {:?}", p.m);
    let _ = writeln!(s, "omega = {:?}", p.omega);
    let _ = writeln!(s, "omega_s = {:?}", p.omega_s);
    let _ = writeln!(s, "g1 = {:?}", p.g1);
    let _ = writeln!(s, "g2 = {:?}", p.g2);
    let _ = writeln!(s, "lambda = {:?}", p.lambda);
    let _ = writeln!(s, "levels = {}", p.levels);
    let _ = writeln!(
        s,
        "oscillator_form = {}",
        oscillator_form_name(p.oscillator_form)
    );

    let _ = writeln!(s, "\n[initial]");
    match &cfg.initial {
        InitialData::Matched { x0, p0, spin } => {
            let _ = writeln!(s, "x0 = {x0:?}");
            let _ = writeln!(s, "p0 = {p0:?}");
            let _ = writeln!(s, "spin_amplitudes = {}", join_complex(spin.amplitudes()));
        }
        InitialData::Explicit(state) => {
            let _ = writeln!(s, "state_amplitudes = {}", join_complex(state.amplitudes()));
        }
    }

    let it = &cfg.integrator;
    let _ = writeln!(s, "\n[integrator]");
    let _ = writeln!(s, "dt = {:?}", it.dt);
    let _ = writeln!(s, "t_final = {:?}", it.t_final);
    let _ = writeln!(s, "sample_every = {}", it.sample_every);
    let _ = writeln!(s, "method = {}", it.method.as_str());
    let _ = writeln!(s, "adaptive_tol = {:?}", it.adaptive_tol);
    let _ = writeln!(s, "auto_dt = {}", it.auto_dt);

    let _ = writeln!(s, "\n[output]");
    let _ = writeln!(s, "observables = {}", cfg.outputs.join(", "));
    let _ = writeln!(s, "entropy = {}", cfg.entropy.as_str());

    let _ = writeln!(s, "\n[statics]");
    let branches: Vec<String> = cfg.statics.branches.iter().map(|b| b.to_string()).collect();
    let _ = writeln!(s, "branches = {}", branches.join(", "));
    let guesses: Vec<String> = cfg
        .statics
        .guesses
        .iter()
        .map(|(x, p)| format!("{x:?} {p:?}"))
        .collect();
    let _ = writeln!(s, "guesses = {}", guesses.join("; "));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Method;

    #[test]
    fn preset_only_document() {
        let cfg = parse_config("preset = fig3_g_mid\n").unwrap();
        assert_eq!(cfg, preset("fig3_g_mid").unwrap());
    }

    #[test]
    fn defaults_and_overrides() {
        let cfg = parse_config("[params]\ng1 = -0.5\n").unwrap();
        assert_eq!(cfg.params.g1, -0.5);
        assert_eq!(
            (cfg.params.m, cfg.params.omega, cfg.integrator.dt),
            (1.0, 1.0, 1e-3)
        );

        let doc = "label = x # trailing\n[integrator]\nt_final = 5\n\npreset = fig3_g_small\n";
        assert!(
            parse_config(doc).is_err(),
            "preset belongs to the top level"
        );

        let doc =
            "label = mine\npreset = fig3_g_large\n[params]\ng = 0.3\n[integrator]\nmethod = rk45\n";
        let cfg = parse_config(doc).unwrap();
        assert_eq!(
            (cfg.label.as_str(), cfg.params.g1, cfg.params.g2),
            ("mine", 0.3, 0.3)
        );
        assert_eq!(cfg.integrator.method, Method::Rk45);
        assert_eq!(cfg.params.omega_s, 2.0);
    }

    #[test]
    fn errors_carry_location() {
        match parse_config("[params]\nlevels = 1\n") {
            Err(Error::Validation { key, .. }) => assert_eq!(key, "levels"),
            other => panic!("{other:?}"),
        }
        match parse_config("# c\n[params]\nwidth = 2\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_config("[params]\nm = heavy\n") {
            Err(Error::Validation { key, .. }) => assert_eq!(key, "m"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_config("[nope]\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("just text\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("preset = fig9\n"),
            Err(Error::UnknownPreset(_))
        ));
    }

    #[test]
    fn explicit_state_switches_regime() {
        let cfg = parse_config("[initial]\nstate = ghz\n[params]\nlevels = 3\n").unwrap();
        assert_eq!(cfg.regimes, vec![Regime::Qq]);
        match &cfg.initial {
            InitialData::Explicit(s) => assert_eq!(s.dim(), 12),
            other => panic!("{other:?}"),
        }
        let cfg = parse_config("preset = fig2_tl\n[initial]\nx0 = 0.2\n").unwrap();
        assert_eq!(cfg.regimes, Regime::ALL.to_vec());
        assert!(parse_config("regimes = qq, sc\n[initial]\nstate = ghz\n").is_err());
        let cfg = parse_config("preset = fig2_br\n[params]\nlevels = 5\n").unwrap();
        assert_eq!(cfg.initial, InitialData::Explicit(build_ghz_with_levels(5)));
    }

    #[test]
    fn statics_guesses() {
        let cfg =
            parse_config("[statics]\nbranches = 0, 3\nguess_radii = 1, 2\nguess_angles = 4\n")
                .unwrap();
        assert_eq!(cfg.statics.branches, vec![0, 3]);
        assert_eq!(cfg.statics.guesses.len(), 8);
        let cfg = parse_config("[statics]\nguesses = 1 0; 0 -1.5\n").unwrap();
        assert_eq!(cfg.statics.guesses, vec![(1.0, 0.0), (0.0, -1.5)]);
        assert!(parse_config("[statics]\nbranches = 4\n").is_err());
    }

    #[test]
    fn echo_round_trips() {
        for name in crate::scenarios::PRESET_NAMES {
            let cfg = preset(name).unwrap();
            assert_eq!(
                parse_config(&to_config_string(&cfg)).unwrap(),
                cfg,
                "{name}"
            );
        }
        let doc = "[params]\nm = 0.3\nomega = 3.3\nomega_s = 0.1\ng1 = 0.7\noscillator_form = quadrature\n\
                   [initial]\nx0 = 0.05\np0 = -0.07\nspin = bell\n[output]\nentropy = spin_pair\n";
        let cfg = parse_config(doc).unwrap();
        let mut echoed = to_config_string(&cfg);
        echoed.push_str("\n[manifest]\nduration_s = 0.5\n");
        assert_eq!(parse_config(&echoed).unwrap(), cfg);
    }
}
