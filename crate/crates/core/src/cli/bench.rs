//! Benchmark suite: every requested variant on the built-in non-isomorphic
//! pairs plus permuted copies of each graph as soundness controls.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::Serialize;

use super::Global;
use wlgt_core::graph::{apply_permutation, builtin_pair, random_permutation, Graph, BUILTIN_PAIRS};
use wlgt_core::nn::block_rng;
use wlgt_core::wl::{distinguish, Variant};
use wlgt_core::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value = "builtin")]
    suite: String,
    /// Comma-separated `1wl`, `NAME:k` or `ks-local:k:s` entries.
    #[arg(long, default_value = "1wl,kwl:2,delta:2,delta-local:2,ks-local:2:1,kwl:3")]
    variants: String,
    /// Restrict to these built-in pairs.
    #[arg(long, value_delimiter = ',')]
    pairs: Vec<String>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Worker threads; 0 uses the available parallelism.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Report zero wall time so repeated runs are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct VariantChoice {
    variant: Variant,
    k: usize,
    s: usize,
}

impl VariantChoice {
    fn label(&self) -> String {
        match (self.variant, self.k, self.s) {
            (Variant::Kwl, 1, 1) => "1wl".to_string(),
            (v, k, s) if k == s => format!("{}:{k}", v.cli_name()),
            (v, k, s) => format!("{}:{k}:{s}", v.cli_name()),
        }
    }
}

fn parse_choice(text: &str) -> Result<VariantChoice, Error> {
    let text = text.trim();
    if text == "1wl" {
        return Ok(VariantChoice { variant: Variant::Kwl, k: 1, s: 1 });
    }
    let mut parts = text.split(':');
    let variant: Variant = parts.next().unwrap_or_default().parse()?;
    let number = |p: Option<&str>| -> Result<Option<usize>, Error> {
        p.map(|x| x.parse().map_err(|_| Error::InvalidArgument(format!("bad order in `{text}`")))).transpose()
    };
    let k = number(parts.next())?.unwrap_or(1);
    let s = number(parts.next())?.unwrap_or(k);
    if parts.next().is_some() {
        return Err(Error::InvalidArgument(format!("bad variant entry `{text}`")));
    }
    variant.check_space(k, s)?;
    Ok(VariantChoice { variant, k, s })
}

struct Case {
    name: String,
    category: &'static str,
    g: Graph,
    h: Graph,
}

fn cases(pairs: &[String], seed: u64) -> Result<Vec<Case>, Error> {
    let names: Vec<String> =
        if pairs.is_empty() { BUILTIN_PAIRS.iter().map(|s| s.to_string()).collect() } else { pairs.to_vec() };
    let mut out = Vec::new();
    for name in &names {
        let (g, h) = builtin_pair(name)?;
        out.push(Case { name: name.clone(), category: "non_isomorphic", g: g.clone(), h: h.clone() });
        for (side, graph) in [("g1", g), ("g2", h)] {
            let label = format!("{name}/{side}_vs_permuted");
            let perm = random_permutation(graph.num_nodes(), &mut block_rng(seed, &label));
            let permuted = apply_permutation(&graph, &perm)?;
            out.push(Case { name: label, category: "control", g: graph, h: permuted });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
struct Row {
    pair: String,
    category: &'static str,
    variant: String,
    k: usize,
    s: usize,
    distinguished: bool,
    at_iteration: Option<usize>,
    wall_time_ms: f64,
}

#[derive(Debug, Serialize)]
struct Total {
    category: &'static str,
    variant: String,
    distinguished: usize,
    total: usize,
}

#[derive(Debug, Serialize)]
struct Table<'a> {
    suite: &'a str,
    rows: &'a [Row],
    totals: Vec<Total>,
}

/// Runs `tasks` on `threads` workers; results come back in task order.
fn run_parallel<T, R, F>(tasks: &[T], threads: usize, work: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..tasks.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads.max(1).min(tasks.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(task) = tasks.get(i) else { break };
                let result = work(task);
                slots.lock().expect("worker panicked")[i] = Some(result);
            });
        }
    });
    slots.into_inner().expect("worker panicked").into_iter().map(|r| r.expect("every task ran")).collect()
}

/// Returns the rendered table and whether every control stayed
/// undistinguished.
pub fn run(args: &BenchArgs, global: &Global) -> Result<(String, bool), Error> {
    if args.suite != "builtin" {
        return Err(Error::InvalidArgument(format!("unknown suite `{}`", args.suite)));
    }
    let choices =
        args.variants.split(',').filter(|s| !s.trim().is_empty()).map(parse_choice).collect::<Result<Vec<_>, _>>()?;
    if choices.is_empty() {
        return Err(Error::InvalidArgument("no variants given".into()));
    }
    let cases = cases(&args.pairs, global.seed)?;
    let tasks: Vec<(usize, VariantChoice)> =
        (0..cases.len()).flat_map(|c| choices.iter().map(move |&v| (c, v))).collect();
    let threads = match args.threads {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        t => t,
    };

    let results = run_parallel(&tasks, threads, |&(c, choice)| {
        let case = &cases[c];
        let start = Instant::now();
        let verdict = distinguish(&case.g, &case.h, choice.variant, choice.k, choice.s)?;
        let elapsed = if args.no_timing { 0.0 } else { start.elapsed().as_secs_f64() * 1e3 };
        Ok::<_, Error>(Row {
            pair: case.name.clone(),
            category: case.category,
            variant: choice.label(),
            k: choice.k,
            s: choice.s,
            distinguished: verdict.distinguished,
            at_iteration: verdict.at_iteration,
            wall_time_ms: elapsed,
        })
    });
    let rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let sound = rows.iter().all(|r| r.category != "control" || !r.distinguished);
    let output = match args.format {
        Format::Csv => {
            let mut out = String::from("pair,variant,k,s,distinguished,at_iteration,wall_time_ms\n");
            for r in &rows {
                let at = r.at_iteration.map(|t| t.to_string()).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{:.3}",
                    r.pair, r.variant, r.k, r.s, r.distinguished, at, r.wall_time_ms
                );
            }
            out
        }
        Format::Json => {
            let mut totals = Vec::new();
            for category in ["non_isomorphic", "control"] {
                for choice in &choices {
                    let label = choice.label();
                    let matching = rows.iter().filter(|r| r.category == category && r.variant == label);
                    let (total, distinguished) =
                        matching.fold((0, 0), |(t, d), r| (t + 1, d + usize::from(r.distinguished)));
                    totals.push(Total { category, variant: label, distinguished, total });
                }
            }
            serde_json::to_string(&Table { suite: &args.suite, rows: &rows, totals }).expect("table serializes")
        }
    };
    Ok((output, sound))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_variant_entries() {
        assert_eq!(parse_choice("1wl").unwrap(), VariantChoice { variant: Variant::Kwl, k: 1, s: 1 });
        assert_eq!(parse_choice("delta:2").unwrap(), VariantChoice { variant: Variant::DeltaKwl, k: 2, s: 2 });
        assert_eq!(parse_choice("ks-local:3:1").unwrap().label(), "ks-local:3:1");
        assert!(parse_choice("kwl:2:1").is_err());
        assert!(parse_choice("nope:2").is_err());
        assert!(parse_choice("kwl:x").is_err());
    }

    #[test]
    fn parallel_results_keep_task_order() {
        let tasks: Vec<u64> = (0..50).collect();
        let out = run_parallel(&tasks, 7, |&t| {
            std::thread::sleep(std::time::Duration::from_micros((50 - t) * 20));
            t * 2
        });
        assert_eq!(out, tasks.iter().map(|t| t * 2).collect::<Vec<_>>());
    }
}
