use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use ifdma::allocation::group_by_node;
use ifdma::complexity::{compare, count, footnotes, Scenario};
use ifdma::verify::{self, Scope, VerifyOptions};
use ifdma::waveform::{qpsk_ber_theory, run_ber, run_ccdf, ExperimentConfig, Scheme};
use ifdma::{allocate, allocate_composite, DecompositionPlan, RequestProfile, StreamAllocation};
use serde_json::json;

use crate::config::RunConfig;
use crate::manifest::RunManifest;

/// A mistake in how the tool was invoked, reported with exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

/// Run the property suites; returns whether all passed.
pub fn verify(scope: Scope, options: &VerifyOptions) -> bool {
    let outcomes = verify::run(scope, options);
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} properties, {} failed", outcomes.len(), failed);
    failed == 0
}

/// `NAME=COUNT` or a bare count. Bare counts are named A, B, C, ... by
/// position.
pub fn parse_requests(args: &[String]) -> Result<Vec<(String, usize)>> {
    if args.is_empty() {
        return Err(usage("allocate needs at least one request"));
    }
    args.iter()
        .enumerate()
        .map(|(i, arg)| {
            let (name, count) = match arg.split_once('=') {
                Some((name, count)) => (name.to_owned(), count),
                None => (default_name(i), arg.as_str()),
            };
            let count = count.parse().map_err(|_| usage(format!("bad request '{arg}': expected NAME=COUNT or COUNT")))?;
            Ok((name, count))
        })
        .collect()
}

fn default_name(i: usize) -> String {
    if i < 26 {
        char::from(b'A' + i as u8).to_string()
    } else {
        format!("N{i}")
    }
}

pub fn parse_plan(text: &str) -> Result<DecompositionPlan> {
    let factors = text
        .split(',')
        .map(|f| f.trim().parse::<usize>().map_err(|_| usage(format!("bad plan '{text}': expected e.g. 2,3,2"))))
        .collect::<Result<Vec<_>>>()?;
    DecompositionPlan::new(factors).map_err(|e| usage(format!("bad plan '{text}': {e}")))
}

pub fn allocate_cmd(band: usize, requests: &[String], plan: Option<&str>, format: Format) -> Result<String> {
    let profile = RequestProfile::new(band, parse_requests(requests)?);
    let streams = match plan {
        Some(text) => {
            let plan = parse_plan(text)?;
            if plan.size() != band {
                return Err(usage(format!("plan {text} has size {}, not M = {band}", plan.size())));
            }
            allocate_composite(&profile, &plan)?
        }
        None => allocate(&profile)?,
    };
    Ok(match format {
        Format::Text => allocation_text(band, &streams),
        Format::Csv => allocation_csv(&streams),
    })
}

fn joined(items: &[usize]) -> String {
    items.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

fn allocation_text(band: usize, streams: &[StreamAllocation]) -> String {
    let mut s = format!("M = {band}\n");
    let _ = writeln!(s, "{:<8} {:>5} {:>6} {:>8} {:>9}  subcarriers", "node", "size", "shift", "spacing", "bins");
    for a in streams {
        let bins = format!("{}..{}", a.bins.start, a.bins.end);
        let _ = writeln!(
            s,
            "{:<8} {:>5} {:>6} {:>8} {:>9}  {}",
            a.node.to_string(),
            a.size,
            a.shift,
            a.spacing(),
            bins,
            joined(&a.subcarriers)
        );
    }
    let nodes = group_by_node(streams);
    if nodes.len() < streams.len() {
        s.push('\n');
        for n in &nodes {
            let _ = writeln!(s, "{:<8} {:>5} streams, subcarriers {}", n.node.to_string(), n.streams.len(), joined(&n.subcarriers()));
        }
    }
    let mut free: Vec<usize> = (0..band).collect();
    free.retain(|k| !streams.iter().any(|a| a.subcarriers.contains(k)));
    let _ = writeln!(s, "free: {}", if free.is_empty() { "none".to_owned() } else { joined(&free) });
    s
}

fn allocation_csv(streams: &[StreamAllocation]) -> String {
    let mut s = String::from("node,size,shift,spacing,bin_start,bin_end,subcarriers\n");
    for a in streams {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            a.node, a.size, a.shift, a.spacing(), a.bins.start, a.bins.end, joined(&a.subcarriers)
        );
    }
    s
}

pub fn complexity_cmd(sizes: &[usize], format: Format, scenarios: bool) -> Result<String> {
    let rows = compare(sizes)?;
    let mut s = String::new();
    match format {
        Format::Csv => {
            if scenarios {
                s.push_str("M,system,link,role,exact_multipliers,approx_formula,approx_value,switches,switches_half\n");
                for &size in sizes {
                    for sc in Scenario::all() {
                        let r = count(sc, size)?;
                        let opt = |v: Option<u64>| v.map(|v| v.to_string()).unwrap_or_default();
                        let _ = writeln!(
                            s,
                            "{size},{},{},{},{},\"{}\",{},{},{}",
                            sc.system, sc.link, sc.role, r.exact_multipliers, r.approx_formula, r.approx_value,
                            opt(r.switch_count), opt(r.switch_count_half)
                        );
                    }
                }
            } else {
                s.push_str("M,log2_M,conventional_tx,conventional_rx,unified_tx,unified_rx_fde,unified_rx_nofde,switches,rx_ratio,rx_ratio_with_fde,tx_ratio,threshold\n");
                for r in &rows {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{},{},{:.4},{:.4},{:.4},{:.4}",
                        r.size, r.log2_size, r.conventional_tx, r.conventional_rx, r.unified_tx, r.unified_rx_fde,
                        r.unified_rx_nofde, r.size * (r.log2_size as usize + 1), r.rx_ratio, r.rx_ratio_with_fde,
                        r.tx_ratio, r.threshold
                    );
                }
            }
        }
        Format::Text => {
            s.push_str("Multi-stream downlink, complex multiplications\n");
            let _ = writeln!(
                s,
                "{:>6} {:>3} {:>10} {:>10} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>6}",
                "M", "m", "conv tx", "conv rx", "uni tx", "uni rx", "uni rx*", "switches", "rx x", "rx* x", "tx x", "m/3"
            );
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{:>6} {:>3} {:>10} {:>10} {:>8} {:>8} {:>8} {:>8} {:>8.3} {:>8.3} {:>8.3} {:>6.3}",
                    r.size, r.log2_size, r.conventional_tx, r.conventional_rx, r.unified_tx, r.unified_rx_nofde,
                    r.unified_rx_fde, r.size * (r.log2_size as usize + 1), r.rx_ratio, r.rx_ratio_with_fde, r.tx_ratio,
                    r.threshold
                );
            }
            s.push_str("uni rx: receiver without equalization; uni rx*: with equalization (forward and inverse transform)\n");
            if scenarios {
                for &size in sizes {
                    let _ = writeln!(s, "\nM = {size}");
                    for sc in Scenario::all() {
                        let r = count(sc, size)?;
                        let _ = writeln!(
                            s,
                            "  {:<6} {:<2} {:<16} {:>10}   {} = {}",
                            sc.system.to_string(), sc.link.to_string(), sc.role.to_string(), r.exact_multipliers,
                            r.approx_formula, r.approx_value
                        );
                    }
                }
            }
            if let Some(&last) = sizes.last() {
                s.push('\n');
                for note in footnotes(last)? {
                    let _ = writeln!(s, "note: {note}");
                }
            }
        }
    }
    Ok(s)
}

fn ccdf_name(config: &ExperimentConfig, clipped: bool) -> String {
    let tail = if clipped { "_clipped" } else { "" };
    format!("ccdf_{}_N{}{tail}.csv", config.scheme.label(), config.subcarriers)
}

fn ber_name(config: &ExperimentConfig, clipped: bool, several_n: bool) -> String {
    let n = if several_n { format!("_N{}", config.subcarriers) } else { String::new() };
    let tail = if clipped { "_clipped" } else { "" };
    format!("ber_{}{n}{tail}.csv", config.scheme.label())
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn papr_cmd(config: &RunConfig, manifest: &mut RunManifest, out: &Path) -> Result<()> {
    let mut percentiles = Vec::new();
    for exp in config.papr.experiments(manifest.master_seed) {
        exp.validate()?;
        let run = run_ccdf(&exp, manifest.workers)?;
        let curve = run.curve();
        let name = ccdf_name(&exp, false);
        write(out, &name, &curve.to_csv())?;
        let mut line = format!("{:<12} M={} N={:<4} 99.9% PAPR {:6.2} dB", exp.scheme.label(), exp.band_size, exp.subcarriers, curve.percentile_999());
        let mut entry = json!({
            "scheme": exp.scheme,
            "M": exp.band_size,
            "N": exp.subcarriers,
            "packets": exp.packets,
            "file": name,
            "papr_999_db": curve.percentile_999(),
        });
        if let Some(clipped) = run.clipped_curve() {
            let name = ccdf_name(&exp, true);
            write(out, &name, &clipped.to_csv())?;
            let _ = write!(
                line,
                ", clipped {:6.2} dB ({} of {} samples clipped)",
                clipped.percentile_999(),
                run.clipped_samples,
                run.total_samples
            );
            entry["clipped_file"] = json!(name);
            entry["clipped_papr_999_db"] = json!(clipped.percentile_999());
            entry["clipped_samples"] = json!(run.clipped_samples);
            entry["total_samples"] = json!(run.total_samples);
        }
        println!("{line}");
        percentiles.push((exp.subcarriers, exp.scheme, curve.percentile_999()));
        manifest.results.push(entry);
    }
    for &n in &config.papr.subcarriers {
        let at = |scheme| percentiles.iter().find(|p| p.0 == n && p.1 == scheme).map(|p| p.2);
        if let Some(base) = at(Scheme::MultiIfdma) {
            for other in [Scheme::Lfdma, Scheme::Ofdma] {
                if let Some(v) = at(other) {
                    println!("gain N={n}: multi-ifdma over {other} {:+.2} dB", v - base);
                }
            }
        }
    }
    Ok(())
}

pub fn ber_cmd(config: &RunConfig, manifest: &mut RunManifest, out: &Path) -> Result<()> {
    if config.ber.base.snr_db_grid.is_empty() {
        return Err(usage("snr_db_grid is empty: give at least one Eb/N0 point"));
    }
    let several_n = config.ber.subcarriers.len() > 1;
    for exp in config.ber.experiments(manifest.master_seed) {
        exp.validate()?;
        let alpha = exp.clipping_alpha;
        let mut runs = vec![(ExperimentConfig { clipping_alpha: None, ..exp.clone() }, false)];
        if alpha.is_some() {
            runs.push((exp.clone(), true));
        }
        for (cfg, clipped) in runs {
            let curve = run_ber(&cfg, manifest.workers)?;
            let name = ber_name(&cfg, clipped, several_n);
            write(out, &name, &curve.to_csv())?;
            println!("{:<12} M={} N={}{}", cfg.scheme.label(), cfg.band_size, cfg.subcarriers, if clipped { " clipped" } else { "" });
            for p in &curve.points {
                println!(
                    "  Eb/N0 {:5.1} dB  BER {:.3e}  theory {:.3e}  ({} errors in {} bits)",
                    p.snr_db,
                    p.ber(),
                    qpsk_ber_theory(p.snr_db),
                    p.bit_errors,
                    p.bits
                );
            }
            manifest.results.push(json!({
                "scheme": cfg.scheme,
                "M": cfg.band_size,
                "N": cfg.subcarriers,
                "clipped": clipped,
                "file": name,
                "points": curve.points,
            }));
        }
    }
    Ok(())
}

pub fn parse_scope(text: &str) -> Result<Scope> {
    text.parse().map_err(|e: String| usage(e))
}

pub fn check_sizes(sizes: &[usize]) -> Result<()> {
    if let Some(bad) = sizes.iter().find(|s| **s < 2 || !s.is_power_of_two()) {
        bail!(UsageError(format!("M = {bad} is not a power of two of at least 2")));
    }
    Ok(())
}
