use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use eqlines_cli::cache::{sha256_hex, Cache, RunManifest};
use eqlines_cli::reproduce::{narrative, paper_hypothesis, reproduce_paper};
use eqlines_cli::settings::{Overrides, Settings, CACHE_ENV, DEFAULT_EXPONENT};
use eqlines_cli::suite::{run_suite, SuiteConfig};
use eqlines_cli::CliError;
use eqlines_core::classes::ClassStore;
use eqlines_core::nonexist::{verdict, Conclusion, SpectrumCandidate, VerdictOptions};
use eqlines_core::pipeline::{expected_tables_csv, prepare, run_pipeline, FactorCatalog, LineHypothesis};
use eqlines_core::poly::SurdInterval;
use eqlines_core::tpenum::{enumerate, EnumSpec};

#[derive(Parser)]
#[command(name = "eqlines", version, about = "Exact computations ruling out 50 equiangular lines in R^17")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// TOML file with cache_dir, seed, budget, jobs, search_limit, depth.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Cache directory (default: $EQLINES_CACHE_DIR or ./.cache).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// RNG seed for class discovery and random checks (default 1)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the main output here instead of stdout.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Discover congruence classes of Seidel characteristic polynomials mod 2^e.
    Classes {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_EXPONENT)]
        e: u32,
        /// Maximum number of sampled matrices
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Enumerate totally positive polynomials from a JSON spec or flags.
    TpEnum {
        /// JSON spec file; overrides the flags below.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long)]
        trace: Option<i64>,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        lo: i64,
        #[arg(long, allow_negative_numbers = true)]
        hi: Option<i64>,
        /// Impose a_i = C(d,i) mod 2.
        #[arg(long)]
        binomial_parity: bool,
        #[arg(long)]
        distinct: bool,
    },
    /// Emit the factor tables as CSV and compare with the expected lists.
    Tables {
        #[arg(long)]
        skip_slow: bool,
    },
    /// Catalog, assembly, lifting and the final parity filter.
    Pipeline {
        #[arg(long, default_value_t = 50)]
        lines: usize,
        #[arg(long, default_value_t = 17)]
        dim: usize,
        #[arg(long, default_value_t = -5, allow_negative_numbers = true)]
        lambda_min: i64,
        #[arg(long)]
        skip_slow: bool,
    },
    /// Decide whether a Seidel spectrum survives the one-vertex deletion test.
    Nonexist {
        /// Factored characteristic polynomial, e.g. "(x+5)^33*(x-9)^12*(x-11)^4*(x-13)".
        spectrum: String,
        /// Recursion depth for forced submatrix spectra (default 2)
        #[arg(long)]
        depth: Option<u32>,
        /// Directory holding class-set caches (defaults to the cache directory).
        #[arg(long)]
        class_cache: Option<PathBuf>,
        /// Node cap for the integer solution search
        #[arg(long)]
        search_limit: Option<u64>,
    },
    /// Run the invariant suite on random and exhaustive small cases.
    VerifyCongruences {
        #[arg(long, default_value_t = 500)]
        samples: usize,
    },
    /// Full run from the hypothesis to the nonexistence verdicts.
    ReproducePaper {
        #[arg(long)]
        skip_slow: bool,
        /// Print the JSON report instead of the narrative.
        #[arg(long)]
        json: bool,
    },
}

struct Ctx {
    settings: Settings,
    cache: Cache,
    manifest: RunManifest,
    out: Option<PathBuf>,
    started: Instant,
}

impl Ctx {
    fn emit(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        self.manifest.outputs.insert(name.to_string(), sha256_hex(text.as_bytes()));
        match &self.out {
            Some(p) => std::fs::write(p, text).map_err(CliError::io(p)),
            None => {
                let mut so = std::io::stdout().lock();
                so.write_all(text.as_bytes()).map_err(CliError::io("stdout"))
            }
        }
    }

    fn finish(mut self) -> Result<(), CliError> {
        self.manifest.wall_time_secs = self.started.elapsed().as_secs_f64();
        self.cache.append_manifest(&self.manifest)
    }

    fn catalog(&mut self, h: &LineHypothesis, skip_slow: bool) -> Result<FactorCatalog, CliError> {
        let budget = prepare(h)?;
        let (catalog, digest) = self.cache.catalog(&budget, skip_slow, |s, t| {
            eprintln!(
                "catalog d={} k={}: {} found, {} irreducible ({:.1}s)",
                s.degree,
                s.excess,
                s.enumerated,
                s.irreducible.len(),
                t.as_secs_f64()
            );
        })?;
        let key = Cache::catalog_name(&budget);
        if skip_slow {
            self.manifest.inputs.insert(key, digest);
        } else {
            self.manifest.outputs.insert(key, digest);
        }
        Ok(catalog)
    }

    fn class_store(&mut self, orders: &[usize]) -> Result<ClassStore, CliError> {
        let s = &self.settings;
        let store = ClassStore::new(None, DEFAULT_EXPONENT, s.seed, s.budget);
        for &n in orders {
            let (cs, digest) = self.cache.classes(n, DEFAULT_EXPONENT, s.seed, s.budget)?;
            self.manifest.inputs.insert(Cache::classes_name(n, DEFAULT_EXPONENT), digest);
            store.insert(cs);
        }
        Ok(store)
    }
}

fn run(cli: Cli, argv: Vec<String>) -> Result<(), CliError> {
    let g = cli.global;
    let mut flags = Overrides { cache_dir: g.cache_dir, seed: g.seed, jobs: g.jobs, ..Default::default() };
    match &cli.command {
        Command::Classes { budget, .. } => flags.budget = *budget,
        Command::Nonexist { depth, class_cache, search_limit, .. } => {
            flags.depth = *depth;
            flags.search_limit = *search_limit;
            if class_cache.is_some() {
                flags.cache_dir = class_cache.clone();
            }
        }
        _ => {}
    }
    let file = g.config.as_deref().map(Overrides::from_file).transpose()?;
    let settings = Settings::resolve(flags, file, std::env::var_os(CACHE_ENV).map(PathBuf::from));
    if let Some(j) = settings.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .map_err(|e| CliError::Usage(format!("--jobs: {e}")))?;
    }
    let mut ctx = Ctx {
        cache: Cache::new(&settings.cache_dir),
        manifest: RunManifest::new(argv, settings.config_hash(), settings.seed),
        settings,
        out: g.out,
        started: Instant::now(),
    };

    match cli.command {
        Command::Classes { n, e, .. } => {
            let (cs, _) = ctx.cache.classes(n, e, ctx.settings.seed, ctx.settings.budget)?;
            ctx.manifest.count("classes", cs.len());
            ctx.manifest.count("complete", cs.complete);
            ctx.emit("classes.json", &format!("{}\n", cs.to_json()))?;
            eprintln!("{} classes for order {n} mod 2^{e} (bound {}), complete: {}", cs.len(), cs.bound, cs.complete);
            let complete = cs.complete;
            ctx.finish()?;
            if !complete {
                return Err(CliError::Incomplete(format!("stopped below the bound after {} matrices", cs.budget_used)));
            }
        }
        Command::TpEnum { spec, degree, trace, lo, hi, binomial_parity, distinct } => {
            let spec = match spec {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(CliError::io(&p))?;
                    ctx.manifest.inputs.insert(p.display().to_string(), sha256_hex(text.as_bytes()));
                    EnumSpec::from_json(&text)?
                }
                None => {
                    let (Some(d), Some(t)) = (degree, trace) else {
                        return Err(CliError::Usage("give --spec or both --degree and --trace".into()));
                    };
                    let hi = hi.unwrap_or(t.max(lo));
                    if hi < lo {
                        return Err(CliError::Usage("--hi must be at least --lo".into()));
                    }
                    let mut s = EnumSpec::new(d, t, SurdInterval::ints(lo, hi)).distinct(distinct);
                    if binomial_parity {
                        s = s.with_binomial_parity();
                    }
                    s
                }
            };
            let res = enumerate(&spec)?;
            if let Some(d) = &res.diagnostic {
                eprintln!("{d}");
            }
            let mut text = String::new();
            for p in &res.polynomials {
                text.push_str(&serde_json::to_string(p)?);
                text.push('\n');
            }
            ctx.manifest.count("polynomials", res.polynomials.len());
            ctx.manifest.count("nodes_visited", res.nodes_visited);
            ctx.emit("polynomials.jsonl", &text)?;
            eprintln!("{} polynomials, {} nodes", res.polynomials.len(), res.nodes_visited);
            ctx.finish()?;
        }
        Command::Tables { skip_slow } => {
            let catalog = ctx.catalog(&paper_hypothesis(), skip_slow)?;
            let csv = catalog.to_csv();
            let matches = csv == expected_tables_csv();
            ctx.manifest.count("rows", csv.lines().count() - 1);
            ctx.manifest.count("matches_expected", matches);
            ctx.emit("tables.csv", &csv)?;
            ctx.finish()?;
            if !matches {
                return Err(CliError::Mismatch("tables differ from the expected lists".into()));
            }
        }
        Command::Pipeline { lines, dim, lambda_min, skip_slow } => {
            let h = LineHypothesis::new(lines, dim, lambda_min)?;
            let catalog = ctx.catalog(&h, skip_slow)?;
            let t = Instant::now();
            let report = run_pipeline(&h, &catalog)?;
            let mut json = serde_json::to_value(&report)?;
            json["seconds"] = serde_json::json!(t.elapsed().as_secs_f64());
            json["survivors_factored"] =
                serde_json::json!(report.survivors.iter().map(|c| c.factored()).collect::<Vec<_>>());
            ctx.manifest.count("g_count", report.g_count);
            ctx.manifest.count("candidate_count", report.candidate_count);
            ctx.manifest.count("survivors", report.survivors.len());
            ctx.emit("pipeline.json", &format!("{}\n", serde_json::to_string_pretty(&json)?))?;
            ctx.finish()?;
        }
        Command::Nonexist { spectrum, .. } => {
            let s: SpectrumCandidate = spectrum.parse()?;
            let orders: Vec<usize> = if s.order.is_multiple_of(2) { vec![s.order - 1] } else { vec![] };
            let store = ctx.class_store(&orders)?;
            let opts = VerdictOptions { classes: &store, search_limit: ctx.settings.search_limit };
            let v = verdict(&s, ctx.settings.depth, &opts)?;
            ctx.manifest.count("enumerated", v.enumerated_count);
            ctx.manifest.count("survivors", v.survivors.len());
            ctx.manifest.count("conclusion", v.conclusion);
            ctx.emit("verdict.json", &format!("{}\n", serde_json::to_string_pretty(&v)?))?;
            let conclusion = v.conclusion;
            ctx.finish()?;
            if conclusion != Conclusion::Nonexistent {
                return Err(CliError::Incomplete("the spectrum was not ruled out".into()));
            }
        }
        Command::VerifyCongruences { samples } => {
            let outcomes = run_suite(&SuiteConfig { samples, seed: ctx.settings.seed });
            let mut counts = BTreeMap::new();
            for o in &outcomes {
                eprintln!("{} {} ({} cases)", if o.passed() { "PASS" } else { "FAIL" }, o.name, o.cases);
                counts.insert(o.name.clone(), o.cases);
            }
            ctx.manifest.count("cases", counts);
            ctx.emit("congruences.json", &format!("{}\n", serde_json::to_string_pretty(&outcomes)?))?;
            let failed = outcomes.iter().filter(|o| !o.passed()).count();
            ctx.finish()?;
            if failed > 0 {
                return Err(CliError::Mismatch(format!("{failed} invariant checks failed")));
            }
        }
        Command::ReproducePaper { skip_slow, json } => {
            let catalog = ctx.catalog(&paper_hypothesis(), skip_slow)?;
            let store = ctx.class_store(&[49])?;
            let report = reproduce_paper(&catalog, &store, ctx.settings.search_limit, ctx.settings.depth)?;
            let text = if json { format!("{}\n", serde_json::to_string_pretty(&report)?) } else { narrative(&report) };
            ctx.manifest.count("g_count", report.pipeline.g_count);
            ctx.manifest.count("candidate_count", report.pipeline.candidate_count);
            ctx.manifest.count("survivors", report.survivors.len());
            ctx.manifest.count("conclusion", &report.conclusion);
            ctx.emit(if json { "report.json" } else { "report.txt" }, &text)?;
            let verified = report.verified;
            ctx.finish()?;
            if !verified {
                return Err(CliError::Mismatch("the reproduction did not close".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
