use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use markres_core::algebra::{parse_rational, render_rational, Ideal, Rational};
use markres_core::error::Error;
use markres_core::invariant::{analyze, Settings};
use markres_core::problem::{Mode, ProblemFile};
use markres_core::resolver::{self, ResolutionTree, RunOptions};
use markres_core::testseq::{apply_sequence, equivalence_probe, Stage, TestSequence};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "markres", version, about = "Resolution of singularities of marked ideals, in exact arithmetic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Resolve the marked ideal and verify the result.
    Resolve {
        file: PathBuf,
        #[arg(long, default_value_t = 64)]
        max_steps: u32,
        /// Print the recursion levels behind every center.
        #[arg(long)]
        trace: bool,
        /// Print the chart tree as a DOT digraph instead.
        #[arg(long)]
        dot: bool,
        #[arg(long, default_value_t = 32)]
        shear_rounds: u32,
        /// Report smoothness of the strict transform of V(I), taken to have
        /// this codimension (1 by default in hypersurface mode).
        #[arg(long)]
        strict: Option<usize>,
    },
    /// The invariant, its mu and J at the maximum, and the center chosen.
    Invariant {
        file: PathBuf,
        #[arg(long, default_value_t = 32)]
        shear_rounds: u32,
    },
    /// Orders of I at points and along the divisors through them.
    Order {
        file: PathBuf,
        /// Comma-separated coordinates; repeatable. Defaults to the origin.
        #[arg(long = "at")]
        points: Vec<String>,
    },
    /// Replay a test sequence such as `P;B(x,y)@x;E(1,2)@t`.
    Testseq { file: PathBuf, sequence: String },
    /// Look for a test sequence telling two marked ideals apart.
    Probe {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, default_value_t = 2)]
        depth: u32,
        #[arg(long, default_value_t = 32)]
        trials: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load(path: &Path) -> anyhow::Result<ProblemFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ProblemFile::parse(&text).with_context(|| format!("in {}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let diagnostic = e.chain().any(|c| c.downcast_ref::<Error>().is_some_and(Error::is_diagnostic));
            ExitCode::from(if diagnostic { 2 } else { 1 })
        }
    }
}

fn emit_tree(t: &ResolutionTree, format: Format, trace: bool, dot: bool) {
    if dot {
        print!("{}", resolver::to_dot(t));
    } else if format == Format::Json {
        println!("{}", serde_json::to_string_pretty(&resolver::to_json(t)).expect("serializable"));
    } else {
        print!("{}", resolver::render_text(t, trace));
    }
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    match &cli.command {
        Command::Resolve { file, max_steps, trace, dot, shear_rounds, strict } => {
            let p = load(file)?;
            let (chart, m) = p.build()?;
            let opts = RunOptions { max_steps: *max_steps, shear_rounds: *shear_rounds };
            let codim = strict.or((p.mode == Mode::Hypersurface).then_some(1));
            match resolver::resolve(&chart, &m, &opts) {
                Ok(t) => {
                    emit_tree(&t, cli.format, *trace, *dot);
                    if let Some(c) = codim {
                        print_strict(&t, c, cli.format);
                    }
                    Ok(if resolver::verify_resolved(&t).ok() { ExitCode::SUCCESS } else { ExitCode::from(2) })
                }
                Err(e) => {
                    if let Some(t) = e.partial_tree() {
                        emit_tree(t, cli.format, *trace, *dot);
                        if let Some(c) = codim {
                            print_strict(t, c, cli.format);
                        }
                    }
                    Err(e.into())
                }
            }
        }
        Command::Invariant { file, shear_rounds } => {
            let p = load(file)?;
            let (chart, m) = p.build()?;
            let a = analyze(&m, &chart.vars, 0, None, &Settings { shear_rounds: *shear_rounds })?;
            match (a, cli.format) {
                (None, Format::Text) => println!("cosupport is empty"),
                (None, Format::Json) => println!("{}", json!({"inv": null})),
                (Some(a), Format::Text) => {
                    println!("inv {}", a.inv);
                    println!("mu {}", a.mu_string());
                    let j: Vec<&str> = a.j.iter().map(|l| l.name.as_str()).collect();
                    println!("J {{{}}}", j.join(","));
                    if let Some(c) = &a.center {
                        println!("center {}", c.render(&chart.vars));
                    }
                }
                (Some(a), Format::Json) => {
                    let j: Vec<&str> = a.j.iter().map(|l| l.name.as_str()).collect();
                    let c = a.center.as_ref().map(|c| c.render(&chart.vars));
                    println!("{}", json!({"inv": a.inv.to_string(), "mu": a.mu_string(), "J": j, "center": c}));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Order { file, points } => {
            let p = load(file)?;
            let (chart, m) = p.build()?;
            let n = chart.nvars();
            let pts: Vec<Vec<Rational>> = if points.is_empty() {
                vec![vec![Rational::from_integer(0.into()); n]]
            } else {
                points.iter().map(|s| parse_point(s, n)).collect::<anyhow::Result<_>>()?
            };
            let d = Rational::from_integer(m.d.into());
            let mut rows = Vec::new();
            for a in &pts {
                let shown: Vec<String> = a.iter().map(render_rational).collect();
                let ord = m.ideal.order_at_point(a);
                let mut along = Vec::new();
                for h in chart.e.iter().filter(|h| a[h.coord] == Rational::from_integer(0.into())) {
                    along.push((h.label.name.clone(), m.ideal.valuation_in(h.coord)));
                }
                let ratio = |o: Option<u32>| match o {
                    None => "inf".to_string(),
                    Some(o) => render_rational(&(Rational::from_integer(o.into()) / &d)),
                };
                let whole = |o: Option<u32>| o.map_or("inf".to_string(), |o| o.to_string());
                match cli.format {
                    Format::Text => {
                        println!("at ({}): ord {} mu {} in cosupport {}", shown.join(", "), whole(ord), ratio(ord), m.in_cosupport(a));
                        for (l, v) in &along {
                            println!("  along {l}: ord {} mu {}", whole(*v), ratio(*v));
                        }
                    }
                    Format::Json => rows.push(json!({
                        "point": shown,
                        "ord": whole(ord),
                        "mu": ratio(ord),
                        "in_cosupport": m.in_cosupport(a),
                        "along": along.iter().map(|(l, v)| json!({"label": l, "ord": whole(*v), "mu": ratio(*v)})).collect::<Vec<_>>(),
                    })),
                }
            }
            if cli.format == Format::Json {
                println!("{}", serde_json::to_string_pretty(&rows).expect("serializable"));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Testseq { file, sequence } => {
            let p = load(file)?;
            let (chart, m) = p.build()?;
            let seq = TestSequence::parse(sequence)?;
            let out = apply_sequence(&Stage::new(chart, m), &seq)?;
            let names = &out.chart.vars;
            let e: Vec<String> =
                out.chart.e.iter().filter(|h| h.alive).map(|h| format!("{}={}", h.label.name, names[h.coord])).collect();
            let (ideal, d, cos) = match &out.marked {
                Some(m) => (m.ideal.render(names), Some(m.d), Some(!m.cosupport_is_empty())),
                None => ("N misses this chart".to_string(), None, None),
            };
            match cli.format {
                Format::Text => {
                    println!("chart {} ({})", out.chart.id, names.join(", "));
                    println!("E {{{}}}", e.join(", "));
                    match d {
                        Some(d) => println!("ideal {ideal} marked {d}, cosupport nonempty {}", cos.unwrap_or(false)),
                        None => println!("{ideal}"),
                    }
                }
                Format::Json => println!(
                    "{}",
                    json!({"sequence": seq.to_string(), "chart_id": out.chart.id, "vars": names, "E": e, "ideal": ideal, "d": d, "cosupport_nonempty": cos})
                ),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Probe { first, second, depth, trials, seed } => {
            let (ca, a) = load(first)?.build()?;
            let (cb, b) = load(second)?.build()?;
            if ca.vars != cb.vars {
                anyhow::bail!("the two problems use different variables");
            }
            let r = equivalence_probe(&ca, &a, &b, *depth, *trials, *seed)?;
            match (cli.format, &r.distinction) {
                (Format::Text, None) => println!("no distinction found ({} sequences)", r.sequences),
                (Format::Text, Some(w)) => println!("distinguished by `{}`: {}", w.sequence, w.reason),
                (Format::Json, w) => println!(
                    "{}",
                    json!({
                        "sequences": r.sequences,
                        "distinguished": w.is_some(),
                        "witness": w.as_ref().map(|w| w.sequence.to_string()),
                        "reason": w.as_ref().map(|w| w.reason.clone()),
                    })
                ),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn print_strict(t: &ResolutionTree, codim: usize, format: Format) {
    let report = resolver::strict_transform_report(t, codim);
    match format {
        Format::Text => {
            println!("strict transform (codimension {codim}):");
            for r in &report {
                let names = &t.find(&r.chart_id).expect("reported chart").chart.vars;
                let snc = match r.snc {
                    Some(true) => ", snc",
                    Some(false) => ", not snc",
                    None => "",
                };
                let state = if r.smooth { "smooth".to_string() } else { singular_text(&r.singular, names) };
                println!("  {}{}: {} {state}{snc}", r.chart_id, if r.leaf { " (leaf)" } else { "" }, r.strict.render(names));
            }
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = report
                .iter()
                .map(|r| {
                    let names = &t.find(&r.chart_id).expect("reported chart").chart.vars;
                    json!({"chart_id": r.chart_id, "leaf": r.leaf, "strict": r.strict.render(names), "smooth": r.smooth, "snc": r.snc})
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&json!({"strict_transform": rows})).expect("serializable"));
        }
    }
}

fn singular_text(singular: &Ideal, names: &[String]) -> String {
    let shown = singular.compacted().render(names);
    if shown.len() <= 160 {
        format!("singular along V{shown}")
    } else {
        format!("singular along a locus with {} basis elements", singular.basis().len())
    }
}

fn parse_point(s: &str, n: usize) -> anyhow::Result<Vec<Rational>> {
    let coords: Vec<Rational> =
        s.split(',').map(|c| parse_rational(c).map_err(|e| anyhow::anyhow!("point {s}: {e}"))).collect::<anyhow::Result<_>>()?;
    if coords.len() != n {
        anyhow::bail!("point {s} has {} coordinates, expected {n}", coords.len());
    }
    Ok(coords)
}
