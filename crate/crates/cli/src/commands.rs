use std::io::Write;

use b92_core::attacks::full_info_region;
use b92_core::bounds::shannon_upper_bound;
use b92_core::estimation::estimate_channel;
use b92_core::eve_bound::{build_ab, flipped_bit_gain, min_q};
use b92_core::keyrate::{b_point, distance_sweep, optimal_angle, secret_key_gain, EstimationMode, KeyGainReport};
use b92_core::oracle::oracle_min_q_lossy;
use b92_core::sim::{run_simulation, SimResult};
use b92_core::{deg, to_deg, ChannelTriple, Error};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use crate::config::{CountsRecord, LinkFile, SimFile};
use crate::error::{input, CliError, CliResult};
use crate::grid::Grid;

/// Largest analytic/oracle disagreement accepted by `oracle-check`.
pub const ORACLE_TOLERANCE: f64 = 1e-3;

pub struct Schema {
    pub name: &'static str,
    pub version: u32,
    pub columns: &'static [(&'static str, &'static str)],
}

impl Schema {
    pub fn header(&self) -> Vec<&'static str> {
        self.columns.iter().map(|c| c.0).collect()
    }

    pub fn print(&self, out: &mut dyn Write) -> CliResult<()> {
        writeln!(out, "{} schema v{}", self.name, self.version)?;
        for (col, desc) in self.columns {
            writeln!(out, "  {col}: {desc}")?;
        }
        Ok(())
    }
}

pub const INFOGAIN: Schema = Schema {
    name: "infogain",
    version: 1,
    columns: &[
        ("eps", "depolarization noise"),
        (
            "q_min",
            "smallest overlap |Q| of Eve's probe states (empty if the channel is unreachable)",
        ),
        ("i_gc", "collision-probability information gain log2(2 - Q^2)"),
        ("i_gc_shannon", "Shannon information gain 1 - h((1 - sqrt(1 - Q^2))/2)"),
        (
            "i_s_upper",
            "mutual-information upper bound, unclamped (only for theta = 0, alpha' = alpha, correct bits)",
        ),
    ],
};

pub const REGION: Schema = Schema {
    name: "region",
    version: 1,
    columns: &[
        ("alpha_deg", "row angle"),
        (
            "<eps>...",
            "one column per noise value: 1 inside the full-information region, else 0",
        ),
    ],
};

pub const KEYGAIN: Schema = Schema {
    name: "keygain",
    version: 1,
    columns: &[
        ("eps", "depolarization noise"),
        ("alpha_deg", "protocol angle"),
        ("p_conc", "probability of a conclusive result per pulse"),
        ("e", "bit error rate of conclusive results"),
        ("i_gc", "Eve's gain on correct bits"),
        ("i_gf", "Eve's gain on flipped bits"),
        ("g_correct", "key gain from correct bits"),
        ("g_flipped", "key gain from flipped bits"),
        (
            "g_total",
            "secret key gain per pulse after error correction (empty if undefined)",
        ),
    ],
};

pub const OPTANGLE: Schema = Schema {
    name: "optangle",
    version: 1,
    columns: &[
        ("eps", "depolarization noise"),
        (
            "alpha_opt_deg",
            "angle maximizing the key gain (0 when no angle gives a positive gain)",
        ),
        ("g_opt", "gain at that angle"),
    ],
};

pub const BPOINT: Schema = Schema {
    name: "bpoint",
    version: 1,
    columns: &[
        ("T", "transmission"),
        ("alpha_a_deg", "optimal angle of the noiseless channel"),
        ("g_a", "gain at that angle"),
        ("eps_b", "largest noise with a positive optimized gain"),
        ("alpha_b_deg", "optimal angle just below eps_b"),
    ],
};

pub const DISTANCE: Schema = Schema {
    name: "distance",
    version: 1,
    columns: &[
        ("l_km", "fiber length"),
        ("g_b92", "B92 secret key gain per pulse"),
        ("g_bb84", "single-photon BB84 secret key gain per pulse"),
        ("log10_g_b92", "log10 of g_b92 (empty when not positive)"),
        ("log10_g_bb84", "log10 of g_bb84 (empty when not positive)"),
    ],
};

pub const COUNTS: Schema = Schema {
    name: "counts",
    version: 1,
    columns: &[
        ("n00", "Alice sent 0, Bob saw outcome 0"),
        ("n01", "Alice sent 0, Bob saw outcome 1"),
        ("n0b0", "Alice sent 0, Bob saw conclusive outcome 0-bar (an error)"),
        ("n0b1", "Alice sent 0, Bob saw conclusive outcome 1-bar"),
        ("n10", "Alice sent 1, Bob saw outcome 0"),
        ("n11", "Alice sent 1, Bob saw outcome 1"),
        ("n1b0", "Alice sent 1, Bob saw conclusive outcome 0-bar"),
        ("n1b1", "Alice sent 1, Bob saw conclusive outcome 1-bar (an error)"),
        ("n_total", "pulses sent, including vacuum results"),
    ],
};

pub const ORACLE_CHECK: Schema = Schema {
    name: "oracle-check",
    version: 1,
    columns: &[
        ("sample", "index"),
        ("alpha_deg", "protocol angle (alpha' = alpha)"),
        ("theta_deg", "channel tilt"),
        ("eps", "depolarization noise"),
        ("T", "transmission"),
        ("analytic", "closed-form min |Q| (empty if unreachable)"),
        ("oracle", "brute-force min |Q| (empty if infeasible)"),
        ("diff", "|analytic - oracle|"),
        ("status", "ok, unreachable or mismatch"),
    ],
};

fn cell(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(cell).unwrap_or_default()
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::Writer::from_writer(out)
}

pub fn check_angle(name: &str, degrees: f64) -> CliResult<f64> {
    if degrees.is_finite() && degrees > 0.0 && degrees < 90.0 {
        Ok(deg(degrees))
    } else {
        Err(input(format!("{name} = {degrees} deg must lie in (0, 90)")))
    }
}

pub fn check_unit(name: &str, v: f64) -> CliResult<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(input(format!("{name} = {v} must lie in [0, 1]")))
    }
}

fn check_unit_grid(name: &str, g: &Grid) -> CliResult<()> {
    g.0.iter().try_for_each(|&v| check_unit(name, v).map(|_| ()))
}

/// Which bits Eve's gain refers to in `infogain`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Bits {
    Correct,
    Flipped,
}

pub struct InfoGainArgs {
    pub alpha: f64,
    pub alpha_prime: f64,
    pub theta: f64,
    pub transmission: f64,
    pub eps: Grid,
    pub bits: Bits,
}

pub fn infogain(a: &InfoGainArgs, out: &mut dyn Write) -> CliResult<()> {
    let alpha = check_angle("alpha", a.alpha)?;
    let alpha_prime = check_angle("alpha-prime", a.alpha_prime)?;
    let theta = deg(a.theta);
    check_unit("T", a.transmission)?;
    check_unit_grid("eps", &a.eps)?;
    let bound_applies = a.theta == 0.0 && a.alpha_prime == a.alpha && a.bits == Bits::Correct;
    let mut w = csv_writer(out);
    w.write_record(INFOGAIN.header())?;
    for &eps in &a.eps.0 {
        let triple = ChannelTriple::new(theta, eps, a.transmission)?;
        let r = match a.bits {
            Bits::Correct => min_q(alpha_prime, alpha, &triple),
            Bits::Flipped => flipped_bit_gain(alpha_prime, alpha, &triple),
        }
        .ok();
        let upper = bound_applies
            .then(|| shannon_upper_bound(alpha, eps, a.transmission).ok())
            .flatten()
            .map(|b| b.i_s_upper);
        w.write_record([
            cell(eps),
            opt(r.map(|r| r.q_min_abs)),
            opt(r.map(|r| r.i_gc)),
            opt(r.map(|r| r.i_gc_shannon)),
            opt(upper),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn region(alphas: &Grid, eps: &Grid, transmission: f64, out: &mut dyn Write) -> CliResult<()> {
    let radians = alphas
        .0
        .iter()
        .map(|&a| check_angle("alpha", a))
        .collect::<CliResult<Vec<_>>>()?;
    check_unit_grid("eps", eps)?;
    check_unit("T", transmission)?;
    let matrix = full_info_region(&radians, &eps.0, transmission);
    let mut w = csv_writer(out);
    let mut header = vec!["alpha_deg".to_string()];
    header.extend(eps.0.iter().map(|&e| cell(e)));
    w.write_record(&header)?;
    for (a, row) in alphas.0.iter().zip(matrix) {
        let mut rec = vec![cell(*a)];
        rec.extend(row.into_iter().map(|b| u8::from(b).to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn keygain(
    alpha: f64,
    theta: f64,
    transmission: f64,
    eps: &Grid,
    mode: EstimationMode,
    out: &mut dyn Write,
) -> CliResult<()> {
    let alpha_rad = check_angle("alpha", alpha)?;
    check_unit("T", transmission)?;
    check_unit_grid("eps", eps)?;
    let mut w = csv_writer(out);
    w.write_record(KEYGAIN.header())?;
    for &e in &eps.0 {
        let triple = ChannelTriple::new(deg(theta), e, transmission)?;
        let r: Option<KeyGainReport> = secret_key_gain(alpha_rad, &triple, mode).ok();
        w.write_record([
            cell(e),
            cell(alpha),
            opt(r.map(|r| r.p_conc)),
            opt(r.map(|r| r.e)),
            opt(r.map(|r| r.i_gc)),
            opt(r.map(|r| r.i_gf)),
            opt(r.map(|r| r.g_correct)),
            opt(r.map(|r| r.g_flipped)),
            opt(r.map(|r| r.g_total)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn optangle(transmission: f64, eps: &Grid, mode: EstimationMode, out: &mut dyn Write) -> CliResult<()> {
    check_unit("T", transmission)?;
    check_unit_grid("eps", eps)?;
    let mut w = csv_writer(out);
    w.write_record(OPTANGLE.header())?;
    for &e in &eps.0 {
        let o = optimal_angle(&ChannelTriple::new(0.0, e, transmission)?, mode)?;
        w.write_record([cell(e), cell(to_deg(o.alpha)), cell(o.gain)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn bpoint(ts: &Grid, mode: EstimationMode, out: &mut dyn Write) -> CliResult<()> {
    check_unit_grid("T", ts)?;
    let mut w = csv_writer(out);
    w.write_record(BPOINT.header())?;
    for &t in &ts.0 {
        let a = optimal_angle(&ChannelTriple::new(0.0, 0.0, t)?, mode)?;
        let b = b_point(t, mode, 1e-7)?;
        w.write_record([
            cell(t),
            cell(to_deg(a.alpha)),
            cell(a.gain),
            cell(b.epsilon),
            cell(to_deg(b.alpha)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn distance(
    link: &LinkFile,
    alpha: f64,
    lengths: &Grid,
    mode: EstimationMode,
    out: &mut dyn Write,
) -> CliResult<()> {
    let alpha = check_angle("alpha", alpha)?;
    if lengths.0.iter().any(|&l| l < 0.0) {
        return Err(input("lengths must be non-negative"));
    }
    let rows = distance_sweep(&link.link()?, &lengths.0, alpha, mode)?;
    let log = |g: f64| (g > 0.0).then(|| g.log10());
    let mut w = csv_writer(out);
    w.write_record(DISTANCE.header())?;
    for r in rows {
        w.write_record([
            cell(r.l_km),
            cell(r.g_b92),
            cell(r.g_bb84),
            opt(log(r.g_b92)),
            opt(log(r.g_bb84)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Serialize)]
struct SimReport {
    result: SimResult,
    counts: CountsRecord,
    /// Key gain of the estimated channel.
    key_gain: Option<KeyGainReport>,
}

pub fn simulate(file: &SimFile, format: Format, mode: EstimationMode, out: &mut dyn Write) -> CliResult<()> {
    let config = file.to_config()?;
    let result = run_simulation(&config)?;
    let counts = CountsRecord::from(&result.counts);
    match format {
        Format::Csv => {
            let mut w = csv_writer(out);
            w.serialize(counts)?;
            w.flush()?;
        }
        Format::Json => {
            let key_gain = result
                .estimated
                .and_then(|e| secret_key_gain(config.alpha, &e.triple, mode).ok());
            serde_json::to_writer_pretty(
                &mut *out,
                &SimReport {
                    result,
                    counts,
                    key_gain,
                },
            )?;
            writeln!(out)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct EstimateReport {
    theta_deg: f64,
    epsilon: f64,
    transmission: f64,
    /// A slightly negative noise estimate was set to 0.
    clamped: bool,
    key_gain: Option<KeyGainReport>,
}

pub fn estimate(counts_text: &str, alpha: f64, mode: EstimationMode, out: &mut dyn Write) -> CliResult<()> {
    let alpha = check_angle("alpha", alpha)?;
    let counts = CountsRecord::parse(counts_text)?.to_counts()?;
    let est = estimate_channel(&counts, alpha)?;
    let t = est.triple;
    let report = EstimateReport {
        theta_deg: to_deg(t.theta),
        epsilon: t.epsilon,
        transmission: t.transmission,
        clamped: est.clamped,
        key_gain: secret_key_gain(alpha, &t, mode).ok(),
    };
    serde_json::to_writer_pretty(&mut *out, &report)?;
    writeln!(out)?;
    Ok(())
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    lo + (hi - lo) * u
}

/// Compares the closed-form minimum with the brute-force search on random
/// channels; fails with exit code 4 on any disagreement.
pub fn oracle_check(samples: usize, resolution: usize, seed: u64, out: &mut dyn Write) -> CliResult<()> {
    if resolution < 2 {
        return Err(input("resolution must be at least 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = csv_writer(out);
    w.write_record(ORACLE_CHECK.header())?;
    let mut bad = Vec::new();
    for i in 0..samples {
        let alpha = deg(uniform(&mut rng, 2.0, 80.0));
        let theta = deg(uniform(&mut rng, -30.0, 30.0));
        let eps = uniform(&mut rng, 0.01, 0.9);
        let t = uniform(&mut rng, 0.2, 1.0);
        let analytic = min_q(alpha, alpha, &ChannelTriple::new(theta, eps, t)?);
        let (a, b) = build_ab(alpha, theta, eps)?;
        let oracle = oracle_min_q_lossy(&a, &b, alpha, t, resolution);
        let (an, or, diff, status) = match (&analytic, &oracle) {
            (Ok(x), Ok(y)) => {
                let d = (x.q_min_abs - y.q_min).abs();
                let s = if d <= ORACLE_TOLERANCE { "ok" } else { "mismatch" };
                (Some(x.q_min_abs), Some(y.q_min), Some(d), s)
            }
            (Err(Error::Unreachable { .. }), Err(Error::Unreachable { .. } | Error::OracleInfeasible { .. })) => {
                (None, None, None, "unreachable")
            }
            (x, y) => (
                x.as_ref().ok().map(|r| r.q_min_abs),
                y.as_ref().ok().map(|r| r.q_min),
                None,
                "mismatch",
            ),
        };
        if status == "mismatch" {
            bad.push(i);
        }
        w.write_record([
            i.to_string(),
            cell(to_deg(alpha)),
            cell(to_deg(theta)),
            cell(eps),
            cell(t),
            opt(an),
            opt(or),
            opt(diff),
            status.to_string(),
        ])?;
    }
    w.flush()?;
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Mismatch(format!(
            "oracle disagrees with the closed form beyond {ORACLE_TOLERANCE} at samples {bad:?}"
        )))
    }
}
