//! `key = value` scenario descriptions. Blank lines and text after `#` are
//! ignored; `kind` selects the generator and every other key must belong to
//! it. Omitted keys take their defaults.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex;

use super::{
    random_spectrum, FourModeVideoParams, LinearSystemParams, MovingGaussiansParams, ScenarioSpec,
    TravelingWaveParams,
};
use crate::error::{Error, Result};

struct Entries {
    map: BTreeMap<String, (String, usize)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parameter(format!("line {line_no}: expected `key = value`")))?;
            let key = k.trim().to_ascii_lowercase();
            if key.is_empty() {
                return Err(Error::Parameter(format!("line {line_no}: empty key")));
            }
            if map.insert(key.clone(), (v.trim().to_string(), line_no)).is_some() {
                return Err(Error::Parameter(format!("line {line_no}: duplicate key `{key}`")));
            }
        }
        Ok(Self { map })
    }

    fn take_str(&mut self, key: &str) -> Option<(String, usize)> {
        self.map.remove(key)
    }

    fn take<T: FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        match self.map.remove(key) {
            None => Ok(default),
            Some((v, line)) => v
                .parse()
                .map_err(|_| Error::Parameter(format!("line {line}: cannot parse `{key} = {v}`"))),
        }
    }

    fn finish(self) -> Result<()> {
        match self.map.into_iter().next() {
            None => Ok(()),
            Some((k, (_, line))) => Err(Error::Parameter(format!("line {line}: unknown key `{k}`"))),
        }
    }
}

/// Parses a scenario description.
pub fn parse_scenario(text: &str) -> Result<ScenarioSpec> {
    let mut e = Entries::parse(text)?;
    let (kind, _) = e
        .take_str("kind")
        .ok_or_else(|| Error::Parameter("scenario config needs a `kind` key".into()))?;
    let spec = match kind.as_str() {
        "four_mode_video" => {
            let d = FourModeVideoParams::default();
            ScenarioSpec::FourModeVideo(FourModeVideoParams {
                nx: e.take("nx", d.nx)?,
                ny: e.take("ny", d.ny)?,
                m: e.take("m", d.m)?,
                record: e.take("record", d.record)?,
                extent: e.take("extent", d.extent)?,
                width: e.take("width", d.width)?,
                wavenumber: e.take("wavenumber", d.wavenumber)?,
                period2: e.take("period2", d.period2)?,
                period3: e.take("period3", d.period3)?,
                period4: e.take("period4", d.period4)?,
                amplitude2: e.take("amplitude2", d.amplitude2)?,
                t_off: e.take("t_off", d.t_off)?,
                t_on: e.take("t_on", d.t_on)?,
            })
        }
        "moving_gaussians" => {
            let d = MovingGaussiansParams::default();
            ScenarioSpec::MovingGaussians(MovingGaussiansParams {
                nx: e.take("nx", d.nx)?,
                ny: e.take("ny", d.ny)?,
                m: e.take("m", d.m)?,
                duration: e.take("duration", d.duration)?,
                extent: e.take("extent", d.extent)?,
                sigma: e.take("sigma", d.sigma)?,
                fast_center: (e.take("fast_x", d.fast_center.0)?, e.take("fast_y", d.fast_center.1)?),
                slow_center: (e.take("slow_x", d.slow_center.0)?, e.take("slow_y", d.slow_center.1)?),
                velocity: e.take("velocity", d.velocity)?,
                speed_ratio: e.take("speed_ratio", d.speed_ratio)?,
            })
        }
        "linear_system" => {
            let d = LinearSystemParams::default();
            let seed = e.take("seed", d.seed)?;
            let eigenvalues = match (e.take_str("eigenvalues"), e.take_str("rank")) {
                (Some(_), Some((_, line))) => {
                    return Err(Error::Parameter(format!(
                        "line {line}: give either `eigenvalues` or `rank`, not both"
                    )))
                }
                (Some((v, line)), None) => parse_complex_list(&v)
                    .map_err(|msg| Error::Parameter(format!("line {line}: {msg}")))?,
                (None, Some((v, line))) => {
                    let r: usize = v
                        .parse()
                        .map_err(|_| Error::Parameter(format!("line {line}: cannot parse `rank = {v}`")))?;
                    if r == 0 {
                        return Err(Error::Parameter(format!("line {line}: rank must be at least 1")));
                    }
                    random_spectrum(r, seed)
                }
                (None, None) => d.eigenvalues.clone(),
            };
            ScenarioSpec::LinearSystem(LinearSystemParams {
                n: e.take("n", d.n)?,
                m: e.take("m", d.m)?,
                dt: e.take("dt", d.dt)?,
                eigenvalues,
                seed,
            })
        }
        "traveling_wave" => {
            let d = TravelingWaveParams::default();
            ScenarioSpec::TravelingWave(TravelingWaveParams {
                n: e.take("n", d.n)?,
                m: e.take("m", d.m)?,
                dt: e.take("dt", d.dt)?,
                x_min: e.take("x_min", d.x_min)?,
                x_max: e.take("x_max", d.x_max)?,
                x0: e.take("x0", d.x0)?,
                speed: e.take("speed", d.speed)?,
                width: e.take("width", d.width)?,
            })
        }
        other => return Err(Error::Parameter(format!("unknown scenario kind `{other}`"))),
    };
    e.finish()?;
    Ok(spec)
}

/// Serializes every parameter explicitly; `parse_scenario` inverts it
/// exactly (floats are written in shortest round-trip form).
pub fn scenario_to_config(spec: &ScenarioSpec) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    kv("kind", spec.kind().to_string());
    match spec {
        ScenarioSpec::FourModeVideo(p) => {
            kv("nx", p.nx.to_string());
            kv("ny", p.ny.to_string());
            kv("m", p.m.to_string());
            kv("record", p.record.to_string());
            kv("extent", p.extent.to_string());
            kv("width", p.width.to_string());
            kv("wavenumber", p.wavenumber.to_string());
            kv("period2", p.period2.to_string());
            kv("period3", p.period3.to_string());
            kv("period4", p.period4.to_string());
            kv("amplitude2", p.amplitude2.to_string());
            kv("t_off", p.t_off.to_string());
            kv("t_on", p.t_on.to_string());
        }
        ScenarioSpec::MovingGaussians(p) => {
            kv("nx", p.nx.to_string());
            kv("ny", p.ny.to_string());
            kv("m", p.m.to_string());
            kv("duration", p.duration.to_string());
            kv("extent", p.extent.to_string());
            kv("sigma", p.sigma.to_string());
            kv("fast_x", p.fast_center.0.to_string());
            kv("fast_y", p.fast_center.1.to_string());
            kv("slow_x", p.slow_center.0.to_string());
            kv("slow_y", p.slow_center.1.to_string());
            kv("velocity", p.velocity.to_string());
            kv("speed_ratio", p.speed_ratio.to_string());
        }
        ScenarioSpec::LinearSystem(p) => {
            kv("n", p.n.to_string());
            kv("m", p.m.to_string());
            kv("dt", p.dt.to_string());
            kv("seed", p.seed.to_string());
            let list: Vec<String> = p.eigenvalues.iter().map(format_complex).collect();
            kv("eigenvalues", list.join(", "));
        }
        ScenarioSpec::TravelingWave(p) => {
            kv("n", p.n.to_string());
            kv("m", p.m.to_string());
            kv("dt", p.dt.to_string());
            kv("x_min", p.x_min.to_string());
            kv("x_max", p.x_max.to_string());
            kv("x0", p.x0.to_string());
            kv("speed", p.speed.to_string());
            kv("width", p.width.to_string());
        }
    }
    s
}

fn format_complex(z: &Complex<f64>) -> String {
    if z.im == 0.0 {
        z.re.to_string()
    } else if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Comma-separated complex numbers: `0.5`, `0.9+0.3i`, `-2i`, `1e-3-4i`.
pub(crate) fn parse_complex_list(s: &str) -> std::result::Result<Vec<Complex<f64>>, String> {
    s.split(',').map(|t| parse_complex(t.trim())).collect()
}

fn parse_complex(t: &str) -> std::result::Result<Complex<f64>, String> {
    let t: String = t.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse complex number `{t}`");
    let Some(body) = t.strip_suffix('i') else {
        return t.parse().map(|re| Complex::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |s: &str| -> std::result::Result<f64, String> {
        match s {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => s.parse().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => Ok(Complex::new(body[..k].parse().map_err(|_| bad())?, imag(&body[k..])?)),
        None => Ok(Complex::new(0.0, imag(body)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        let got = parse_complex_list("0.5, 0.9+0.3i, 0.9-0.3i, -2i, i, 1e-3-4e-2i").unwrap();
        let want = [
            Complex::new(0.5, 0.0),
            Complex::new(0.9, 0.3),
            Complex::new(0.9, -0.3),
            Complex::new(0.0, -2.0),
            Complex::new(0.0, 1.0),
            Complex::new(1e-3, -4e-2),
        ];
        assert_eq!(got, want);
        assert!(parse_complex_list("0.5+").is_err());
    }

    #[test]
    fn defaults_and_comments() {
        let spec = parse_scenario("# video\nkind = four_mode_video  # defaults\n\nm = 128\n").unwrap();
        match spec {
            ScenarioSpec::FourModeVideo(p) => {
                assert_eq!(p.m, 128);
                assert_eq!(p.nx, 64);
            }
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn round_trip_all_kinds() {
        let specs = [
            ScenarioSpec::FourModeVideo(FourModeVideoParams::default()),
            ScenarioSpec::MovingGaussians(MovingGaussiansParams::default()),
            ScenarioSpec::LinearSystem(LinearSystemParams { eigenvalues: random_spectrum(5, 2), ..Default::default() }),
            ScenarioSpec::TravelingWave(TravelingWaveParams::default()),
        ];
        for s in specs {
            assert_eq!(parse_scenario(&scenario_to_config(&s)).unwrap(), s);
        }
    }

    #[test]
    fn errors() {
        assert!(parse_scenario("m = 3").is_err());
        assert!(parse_scenario("kind = nope").is_err());
        assert!(parse_scenario("kind = traveling_wave\nspeed = fast").is_err());
        assert!(parse_scenario("kind = traveling_wave\ncolour = red").is_err());
        assert!(parse_scenario("kind = traveling_wave\nn = 3\nn = 4").is_err());
        assert!(parse_scenario("kind = linear_system\nrank = 3\neigenvalues = 1").is_err());
        assert!(parse_scenario("just text").is_err());
    }

    #[test]
    fn random_rank_uses_seed() {
        let a = parse_scenario("kind = linear_system\nrank = 4\nseed = 7").unwrap();
        let b = parse_scenario("kind = linear_system\nseed = 7\nrank = 4").unwrap();
        assert_eq!(a, b);
    }
}
