//! `catparc`: contact inference and benchmarking for multiple sequence
//! alignments.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use catparc::aa_level::{aa_group_strength, normalized_partial_corr, ResidueGrouping};
use catparc::align::{
    filter_gap_fraction, one_hot_encode, parse_alignment, trim_rare_residues, Alignment,
    AlignmentFormat,
};
use catparc::baselines::{graphical_lasso, l2_statistic, linf_statistic, mutual_information, psicov_score};
use catparc::bench::{rate_at_level, roc_curve, ScoreDirection};
use catparc::dist::TailMethod;
use catparc::error::Error;
use catparc::features::{delta_features, partial_cov_map, precision_cov_map, spearman};
use catparc::io::{
    encoded_sidecar, read_mutants_csv, read_ranking_tsv, read_truth_tsv, write_aa_tsv,
    write_encoded_tsv, write_features_csv, write_group_strength_tsv, write_pair_tsv,
    write_ranking_tsv, write_roc_tsv, write_truth_tsv, RunManifest,
};
use catparc::pairwise::{benjamini_hochberg, one_vs_rest_all, pair_residuals, test_all_pairs_cached};
use catparc::simulate::{
    latent_gaussian_generator, multinomial_generator, permute_groups, truth_labels,
    LatentGaussianDesign, MultinomialDesign, MultinomialTable,
};
use catparc::{GroupPenaltySpec, TestOptions};

#[derive(Parser)]
#[command(name = "catparc", version, about = "Partial-correlation contact inference for MSAs")]
struct Cli {
    /// Worker threads for the pair sweep (default: all cores, or
    /// CATPARC_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Fasta,
    Stockholm,
    Raw,
}

impl From<FormatArg> for AlignmentFormat {
    fn from(f: FormatArg) -> AlignmentFormat {
        match f {
            FormatArg::Fasta => AlignmentFormat::Fasta,
            FormatArg::Stockholm => AlignmentFormat::Stockholm,
            FormatArg::Raw => AlignmentFormat::RawRows,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TailArg {
    Chisq,
    Weighted,
}

#[derive(Args)]
struct MsaArgs {
    /// Input alignment file.
    #[arg(long)]
    msa: PathBuf,

    #[arg(long, value_enum, default_value = "fasta")]
    format: FormatArg,

    /// Rare-residue trimming threshold (fraction of sequences); 0 disables.
    #[arg(long, default_value_t = 0.0)]
    trim: f64,

    /// Drop positions whose gap fraction exceeds this value.
    #[arg(long, default_value_t = 1.0)]
    max_gap_frac: f64,
}

#[derive(Args)]
struct PenaltyArgs {
    /// Penalty constant A of the lambda schedule.
    #[arg(long = "A", default_value_t = 2.0)]
    a: f64,

    /// Penalty constant C of the lambda schedule.
    #[arg(long = "C", default_value_t = 0.07)]
    c: f64,
}

#[derive(Subcommand)]
enum Command {
    /// One-hot encode an alignment and dump the standardized matrix.
    Encode {
        #[command(flatten)]
        msa: MsaArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Test all position pairs for partial correlation.
    Contacts {
        #[command(flatten)]
        msa: MsaArgs,
        #[command(flatten)]
        penalty: PenaltyArgs,
        /// Nominal test level.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Reference distribution for the reported ranking p-value.
        #[arg(long, value_enum, default_value = "chisq")]
        tail: TailArg,
        /// Also compute weighted chi-squared p-values.
        #[arg(long)]
        weighted: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Amino-acid-level statistics for one position pair.
    AaPairs {
        #[command(flatten)]
        msa: MsaArgs,
        #[command(flatten)]
        penalty: PenaltyArgs,
        /// First position (original alignment index).
        #[arg(long)]
        i: usize,
        /// Second position (original alignment index).
        #[arg(long)]
        j: usize,
        /// Residue grouping file (one group per line); default: 8-category
        /// reduced alphabet.
        #[arg(long)]
        grouping: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Baseline scores: MI, PSICOV, l2, linf.
    Baselines {
        #[command(flatten)]
        msa: MsaArgs,
        #[command(flatten)]
        penalty: PenaltyArgs,
        /// Comma-separated subset of mi,psicov,l2,linf.
        #[arg(long, default_value = "mi,psicov,l2,linf")]
        methods: String,
        /// Graphical-lasso regularization for the PSICOV score.
        #[arg(long, default_value_t = 0.01)]
        glasso_rho: f64,
        /// MI pseudocount per joint cell.
        #[arg(long, default_value_t = 0.5)]
        pseudocount: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic alignment with known truth labels.
    Simulate {
        /// permute | latent | multinomial
        #[arg(long)]
        mode: String,
        /// Source alignment (permute mode).
        #[arg(long)]
        source: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "fasta")]
        format: FormatArg,
        /// Rare-residue trim threshold applied to the source before
        /// permuting.
        #[arg(long, default_value_t = 0.0)]
        trim: f64,
        /// Group count.
        #[arg(long, default_value_t = 6)]
        u: usize,
        /// Positions per group.
        #[arg(long, default_value_t = 5)]
        h: usize,
        /// Sequences to draw (latent/multinomial modes).
        #[arg(long, default_value_t = 2000)]
        n: usize,
        /// Within-group latent correlation (latent mode).
        #[arg(long, default_value_t = 0.5)]
        r: f64,
        /// Comma-separated quantile cut points (latent mode).
        #[arg(long, default_value = "0.3333333333333333,0.6666666666666666")]
        cutpoints: String,
        /// Category symbols, one per quantile slice (latent mode).
        #[arg(long, default_value = "A,C,-")]
        categories: String,
        /// Joint table JSON (multinomial mode): list of per-group
        /// {"outcomes": ["AC", ...], "probs": [...]} objects.
        #[arg(long)]
        tables: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate rankings against truth labels: ROC, AUC, Type-I and power.
    Bench {
        /// Truth TSV (`i j label`).
        #[arg(long)]
        truth: PathBuf,
        /// Ranking TSVs (`[method] i j score`), one file per method.
        #[arg(long, num_args = 1..)]
        rankings: Vec<PathBuf>,
        /// Interpret scores as p-values (lower is positive) and report
        /// Type-I error and power at --alpha.
        #[arg(long)]
        pvalues: bool,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Coupling features for mutant sequences.
    Features {
        #[command(flatten)]
        msa: MsaArgs,
        #[command(flatten)]
        penalty: PenaltyArgs,
        /// Mutant CSV: `id,sequence[,effect]` with full-length sequences.
        #[arg(long)]
        mutants: PathBuf,
        /// Wild-type sequence (full alignment length).
        #[arg(long)]
        wildtype: String,
        /// Coupling source: catparc residual covariances or psicov
        /// precision blocks.
        #[arg(long, default_value = "catparc")]
        method: String,
        /// Graphical-lasso regularization (psicov method).
        #[arg(long, default_value_t = 0.01)]
        glasso_rho: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            std::process::exit(if is_help { 0 } else { 64 });
        }
    };

    let threads = cli
        .threads
        .or_else(|| std::env::var("CATPARC_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(t) = threads {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .is_err()
        {
            eprintln!("warning: thread pool already initialized");
        }
    }

    if let Err(e) = run(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn load_msa(args: &MsaArgs) -> Result<Alignment, Error> {
    let file = File::open(&args.msa)?;
    let mut a = parse_alignment(BufReader::new(file), args.format.into())?;
    if args.max_gap_frac < 1.0 {
        a = filter_gap_fraction(&a, args.max_gap_frac)?;
    }
    if args.trim > 0.0 {
        a = trim_rare_residues(&a, args.trim)?;
    }
    Ok(a)
}

fn out_file(dir: &Path, name: &str) -> Result<BufWriter<File>, Error> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn msa_options(args: &MsaArgs, opts: &mut BTreeMap<String, String>) {
    opts.insert("msa".into(), args.msa.display().to_string());
    opts.insert("trim".into(), args.trim.to_string());
    opts.insert("max_gap_frac".into(), args.max_gap_frac.to_string());
}

fn finish_manifest(
    mut manifest: RunManifest,
    dir: &Path,
    started: Instant,
    warnings: Vec<String>,
) -> Result<(), Error> {
    manifest
        .timings_ms
        .insert("total".into(), started.elapsed().as_millis());
    manifest.warnings = warnings;
    let mut w = out_file(dir, "manifest.json")?;
    manifest.write(&mut w)?;
    Ok(())
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Encode { msa, out } => {
            let started = Instant::now();
            let a = load_msa(&msa)?;
            let enc = one_hot_encode::<f64>(&a)?;
            let mut w = out_file(&out, "encoded.tsv")?;
            write_encoded_tsv(&mut w, &enc)?;
            let mut w = out_file(&out, "encoded.json")?;
            serde_json::to_writer_pretty(&mut w, &encoded_sidecar(&enc))
                .map_err(|e| Error::Format(e.to_string()))?;
            writeln!(w)?;
            let mut manifest = RunManifest::new("encode");
            msa_options(&msa, &mut manifest.options);
            manifest.digest_input(&msa.msa)?;
            finish_manifest(manifest, &out, started, vec![])
        }
        Command::Contacts {
            msa,
            penalty,
            alpha,
            tail,
            weighted,
            out,
        } => {
            let started = Instant::now();
            let a = load_msa(&msa)?;
            let enc = one_hot_encode::<f64>(&a)?;
            let spec = GroupPenaltySpec { a: penalty.a, c: penalty.c };
            let opts = TestOptions {
                weighted: weighted || matches!(tail, TailArg::Weighted),
                tail: TailMethod::Imhof,
                ..TestOptions::default()
            };
            let cache = one_vs_rest_all(&enc, &spec, &opts)?;
            let sweep = test_all_pairs_cached(&enc, &cache, &spec, &opts)?;
            let mut w = out_file(&out, "contacts.tsv")?;
            write_pair_tsv(&mut w, &sweep.results, None)?;
            let rejected = sweep
                .results
                .iter()
                .filter(|r| {
                    let p = match tail {
                        TailArg::Chisq => r.p_chisq,
                        TailArg::Weighted => r.ranking_p(),
                    };
                    p <= alpha
                })
                .count();
            eprintln!(
                "{} pairs tested, {} contacts at alpha = {alpha}, {} failures",
                sweep.results.len(),
                rejected,
                sweep.failures.len()
            );
            let mut manifest = RunManifest::new("contacts");
            msa_options(&msa, &mut manifest.options);
            manifest.options.insert("A".into(), penalty.a.to_string());
            manifest.options.insert("C".into(), penalty.c.to_string());
            manifest.options.insert("alpha".into(), alpha.to_string());
            manifest.options.insert(
                "tail".into(),
                match tail {
                    TailArg::Chisq => "chisq".into(),
                    TailArg::Weighted => "weighted".into(),
                },
            );
            manifest.options.insert("weighted".into(), opts.weighted.to_string());
            manifest.digest_input(&msa.msa)?;
            let mut warnings = sweep.warnings.clone();
            warnings.extend(sweep.failures.iter().map(|(i, j, e)| {
                format!("pair ({i}, {j}) failed: {e}")
            }));
            finish_manifest(manifest, &out, started, warnings)
        }
        Command::AaPairs {
            msa,
            penalty,
            i,
            j,
            grouping,
            out,
        } => {
            let started = Instant::now();
            let a = load_msa(&msa)?;
            let enc = one_hot_encode::<f64>(&a)?;
            let ri = enc
                .positions
                .iter()
                .position(|&p| p == i)
                .ok_or_else(|| Error::Input(format!("position {i} not retained")))?;
            let rj = enc
                .positions
                .iter()
                .position(|&p| p == j)
                .ok_or_else(|| Error::Input(format!("position {j} not retained")))?;
            if ri == rj {
                return Err(Error::Input("need two distinct positions".into()));
            }
            let (ri, rj) = (ri.min(rj), ri.max(rj));
            let spec = GroupPenaltySpec { a: penalty.a, c: penalty.c };
            let opts = TestOptions::default();
            let cache = one_vs_rest_all(&enc, &spec, &opts)?;
            let (ei, ej, _, _) = pair_residuals(&cache, &enc, &spec, &opts, ri, rj)?;
            let aa = normalized_partial_corr(
                &ei,
                &ej,
                enc.positions[ri],
                enc.positions[rj],
                enc.residues(ri),
                enc.residues(rj),
            )?;
            let grouping = match grouping {
                Some(path) => ResidueGrouping::from_text(&std::fs::read_to_string(path)?)?,
                None => ResidueGrouping::murphy8(),
            };
            let strength = aa_group_strength(&aa, &grouping)?;

            let mut rows = Vec::new();
            for t1 in 0..aa.rho_hat.nrows() {
                for t2 in 0..aa.rho_hat.ncols() {
                    let z = aa.rho_hat[[t1, t2]];
                    if z.is_finite() {
                        rows.push((
                            aa.row_labels[t1],
                            aa.col_labels[t2],
                            z,
                            aa.pvals[[t1, t2]],
                        ));
                    }
                }
            }
            rows.sort_by(|a, b| b.2.abs().partial_cmp(&a.2.abs()).unwrap());
            let bh = benjamini_hochberg(&rows.iter().map(|r| r.3).collect::<Vec<_>>());
            let table: Vec<(char, char, f64, f64, f64)> = rows
                .iter()
                .zip(&bh)
                .map(|(&(ri, rj, z, p), &b)| (ri, rj, z, p, b))
                .collect();
            let mut w = out_file(&out, &format!("aa_pair_{i}_{j}.tsv"))?;
            write_aa_tsv(&mut w, &table)?;
            let mut w = out_file(&out, &format!("aa_strength_{i}_{j}.tsv"))?;
            write_group_strength_tsv(&mut w, &strength.group_names, &strength.strength)?;

            let mut manifest = RunManifest::new("aa-pairs");
            msa_options(&msa, &mut manifest.options);
            manifest.options.insert("i".into(), i.to_string());
            manifest.options.insert("j".into(), j.to_string());
            manifest.digest_input(&msa.msa)?;
            let warnings = aa
                .missing
                .iter()
                .map(|(t1, t2)| format!("degenerate entry ({t1}, {t2}) skipped"))
                .collect();
            finish_manifest(manifest, &out, started, warnings)
        }
        Command::Baselines {
            msa,
            penalty,
            methods,
            glasso_rho,
            pseudocount,
            out,
        } => {
            let started = Instant::now();
            let a = load_msa(&msa)?;
            let enc = one_hot_encode::<f64>(&a)?;
            let m = enc.m();
            let wanted: Vec<&str> = methods.split(',').map(|s| s.trim()).collect();
            for w in &wanted {
                if !["mi", "psicov", "l2", "linf"].contains(w) {
                    return Err(Error::Parameter(format!("unknown method: {w}")));
                }
            }
            let mut warnings = Vec::new();

            if wanted.contains(&"mi") {
                let mut rows = Vec::new();
                for ri in 0..m {
                    for rj in (ri + 1)..m {
                        let mi = mutual_information(
                            &a,
                            enc.positions[ri],
                            enc.positions[rj],
                            pseudocount,
                        )?;
                        if mi.degenerate {
                            warnings.push(format!(
                                "mi: no non-gap co-occurrence for ({}, {})",
                                enc.positions[ri], enc.positions[rj]
                            ));
                        }
                        rows.push((enc.positions[ri], enc.positions[rj], mi.value));
                    }
                }
                let mut w = out_file(&out, "ranking_mi.tsv")?;
                write_ranking_tsv(&mut w, &rows, "mi")?;
            }

            if wanted.contains(&"psicov") {
                let est = graphical_lasso(&enc, glasso_rho, 1e-6, 500)?;
                if !est.converged {
                    warnings.push("graphical lasso did not converge".into());
                }
                let mut rows = Vec::new();
                for ri in 0..m {
                    for rj in (ri + 1)..m {
                        let score = psicov_score(&est, &enc.groups, ri, rj)?;
                        rows.push((enc.positions[ri], enc.positions[rj], score));
                    }
                }
                let mut w = out_file(&out, "ranking_psicov.tsv")?;
                write_ranking_tsv(&mut w, &rows, "psicov")?;
            }

            if wanted.contains(&"l2") || wanted.contains(&"linf") {
                let spec = GroupPenaltySpec { a: penalty.a, c: penalty.c };
                let opts = TestOptions::default();
                let cache = one_vs_rest_all(&enc, &spec, &opts)?;
                let mut l2_rows = Vec::new();
                let mut linf_rows = Vec::new();
                for ri in 0..m {
                    for rj in (ri + 1)..m {
                        match pair_residuals(&cache, &enc, &spec, &opts, ri, rj) {
                            Ok((ei, ej, _, _)) => {
                                if wanted.contains(&"l2") {
                                    let r = l2_statistic(&ei, &ej)?;
                                    l2_rows.push((enc.positions[ri], enc.positions[rj], r.p));
                                }
                                if wanted.contains(&"linf") {
                                    match linf_statistic(&ei, &ej) {
                                        Ok(r) => linf_rows.push((
                                            enc.positions[ri],
                                            enc.positions[rj],
                                            r.p,
                                        )),
                                        Err(e) => warnings.push(format!(
                                            "linf ({}, {}): {e}",
                                            enc.positions[ri], enc.positions[rj]
                                        )),
                                    }
                                }
                            }
                            Err(e) => warnings.push(format!(
                                "residuals ({}, {}): {e}",
                                enc.positions[ri], enc.positions[rj]
                            )),
                        }
                    }
                }
                if wanted.contains(&"l2") {
                    let mut w = out_file(&out, "ranking_l2.tsv")?;
                    write_ranking_tsv(&mut w, &l2_rows, "l2")?;
                }
                if wanted.contains(&"linf") {
                    let mut w = out_file(&out, "ranking_linf.tsv")?;
                    write_ranking_tsv(&mut w, &linf_rows, "linf")?;
                }
            }

            let mut manifest = RunManifest::new("baselines");
            msa_options(&msa, &mut manifest.options);
            manifest.options.insert("methods".into(), methods.clone());
            manifest
                .options
                .insert("glasso_rho".into(), glasso_rho.to_string());
            manifest.digest_input(&msa.msa)?;
            finish_manifest(manifest, &out, started, warnings)
        }
        Command::Simulate {
            mode,
            source,
            format,
            trim,
            u,
            h,
            n,
            r,
            cutpoints,
            categories,
            tables,
            seed,
            out,
        } => {
            let started = Instant::now();
            let mut manifest = RunManifest::new("simulate");
            manifest.seed = Some(seed);
            manifest.options.insert("mode".into(), mode.clone());
            manifest.options.insert("u".into(), u.to_string());
            manifest.options.insert("h".into(), h.to_string());
            manifest.options.insert("seed".into(), seed.to_string());

            let (sim, truth) = match mode.as_str() {
                "permute" => {
                    let path = source
                        .ok_or_else(|| Error::Parameter("--source required for permute".into()))?;
                    let file = File::open(&path)?;
                    let mut a = parse_alignment(BufReader::new(file), format.into())?;
                    if trim > 0.0 {
                        a = trim_rare_residues(&a, trim)?;
                    }
                    manifest.digest_input(&path)?;
                    manifest.options.insert("trim".into(), trim.to_string());
                    (permute_groups(&a, u, h, seed)?, truth_labels(u, h))
                }
                "latent" => {
                    let cutpoints: Vec<f64> = cutpoints
                        .split(',')
                        .map(|s| {
                            s.trim()
                                .parse()
                                .map_err(|_| Error::Parameter(format!("bad cut point: {s}")))
                        })
                        .collect::<Result<_, _>>()?;
                    let categories: Vec<char> = categories
                        .split(',')
                        .map(|s| {
                            let s = s.trim();
                            let mut chars = s.chars();
                            match (chars.next(), chars.next()) {
                                (Some(c), None) => Ok(c),
                                _ => Err(Error::Parameter(format!("bad category: {s}"))),
                            }
                        })
                        .collect::<Result<_, _>>()?;
                    manifest.options.insert("n".into(), n.to_string());
                    manifest.options.insert("r".into(), r.to_string());
                    let design = LatentGaussianDesign {
                        u,
                        h,
                        n,
                        r,
                        cutpoints,
                        categories,
                        seed,
                    };
                    (latent_gaussian_generator(&design)?, truth_labels(u, h))
                }
                "multinomial" => {
                    let path = tables
                        .ok_or_else(|| Error::Parameter("--tables required for multinomial".into()))?;
                    #[derive(serde::Deserialize)]
                    struct TableSpec {
                        outcomes: Vec<String>,
                        probs: Vec<f64>,
                    }
                    let specs: Vec<TableSpec> =
                        serde_json::from_reader(BufReader::new(File::open(&path)?))
                            .map_err(|e| Error::Format(e.to_string()))?;
                    manifest.digest_input(&path)?;
                    let tables: Vec<MultinomialTable> = specs
                        .into_iter()
                        .map(|t| MultinomialTable {
                            outcomes: t.outcomes.iter().map(|o| o.chars().collect()).collect(),
                            probs: t.probs,
                        })
                        .collect();
                    let group_count = tables.len();
                    let width = tables
                        .first()
                        .and_then(|t| t.outcomes.first())
                        .map(|o| o.len())
                        .unwrap_or(0);
                    let design = MultinomialDesign { n, tables, seed };
                    manifest.options.insert("n".into(), n.to_string());
                    (
                        multinomial_generator(&design)?,
                        truth_labels(group_count, width),
                    )
                }
                other => {
                    return Err(Error::Parameter(format!(
                        "unknown mode: {other} (permute | latent | multinomial)"
                    )))
                }
            };

            let mut w = out_file(&out, "sim.fasta")?;
            for k in 0..sim.n() {
                writeln!(w, ">{}", sim.ids[k])?;
                writeln!(w, "{}", sim.sequences[k])?;
            }
            let mut w = out_file(&out, "truth.tsv")?;
            write_truth_tsv(&mut w, &truth)?;
            finish_manifest(manifest, &out, started, vec![])
        }
        Command::Bench {
            truth,
            rankings,
            pvalues,
            alpha,
            out,
        } => {
            let started = Instant::now();
            let truth_rows = read_truth_tsv(BufReader::new(File::open(&truth)?))?;
            let labels: BTreeMap<(usize, usize), bool> = truth_rows.iter().copied().collect();
            let direction = if pvalues {
                ScoreDirection::LowerPositive
            } else {
                ScoreDirection::HigherPositive
            };
            let mut summary = BTreeMap::new();
            let mut manifest = RunManifest::new("bench");
            manifest.digest_input(&truth)?;
            let mut warnings = Vec::new();
            for path in &rankings {
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "ranking".into());
                let rows = read_ranking_tsv(BufReader::new(File::open(path)?))?;
                let mut scored = Vec::new();
                for (i, j, s) in rows {
                    match labels.get(&(i, j)).or_else(|| labels.get(&(j, i))) {
                        Some(&t) => scored.push((s, t)),
                        None => warnings.push(format!("{name}: pair ({i}, {j}) not in truth")),
                    }
                }
                let roc = roc_curve(&scored, direction)?;
                let mut w = out_file(&out, &format!("roc_{name}.tsv"))?;
                write_roc_tsv(&mut w, &roc)?;
                let mut entry = BTreeMap::new();
                entry.insert("auc".to_string(), roc.auc);
                if pvalues {
                    let (type1, power) = rate_at_level(&scored, alpha)?;
                    entry.insert("type1".into(), type1);
                    entry.insert("power".into(), power);
                }
                summary.insert(name.clone(), entry);
                manifest.digest_input(path)?;
            }
            let mut w = out_file(&out, "summary.json")?;
            serde_json::to_writer_pretty(&mut w, &summary)
                .map_err(|e| Error::Format(e.to_string()))?;
            writeln!(w)?;
            manifest.options.insert("alpha".into(), alpha.to_string());
            manifest.options.insert("pvalues".into(), pvalues.to_string());
            finish_manifest(manifest, &out, started, warnings)
        }
        Command::Features {
            msa,
            penalty,
            mutants,
            wildtype,
            method,
            glasso_rho,
            out,
        } => {
            let started = Instant::now();
            let a = load_msa(&msa)?;
            let enc = one_hot_encode::<f64>(&a)?;
            let spec = GroupPenaltySpec { a: penalty.a, c: penalty.c };
            let opts = TestOptions::default();
            let map = match method.as_str() {
                "catparc" => {
                    let cache = one_vs_rest_all(&enc, &spec, &opts)?;
                    partial_cov_map(&cache, &enc, &spec, &opts, None)?
                }
                "psicov" => {
                    let est = graphical_lasso(&enc, glasso_rho, 1e-6, 500)?;
                    precision_cov_map(&est, &enc)?
                }
                other => {
                    return Err(Error::Parameter(format!(
                        "unknown method: {other} (catparc | psicov)"
                    )))
                }
            };

            // project full-length sequences down to the retained positions
            let project = |seq: &str| -> Result<String, Error> {
                let chars: Vec<char> = seq.chars().collect();
                if chars.len() != a.m() {
                    return Err(Error::Input(format!(
                        "sequence length {} does not match alignment width {}",
                        chars.len(),
                        a.m()
                    )));
                }
                Ok(enc.positions.iter().map(|&p| chars[p]).collect())
            };

            let rows = read_mutants_csv(BufReader::new(File::open(&mutants)?))?;
            let projected: Vec<(String, String)> = rows
                .iter()
                .map(|(id, seq, _)| Ok((id.clone(), project(seq)?)))
                .collect::<Result<_, Error>>()?;
            let features = delta_features(&projected, &project(&wildtype)?, &map)?;
            let mut w = out_file(&out, "features.csv")?;
            write_features_csv(&mut w, &features)?;

            let effects: Vec<(f64, f64, f64)> = rows
                .iter()
                .zip(&features)
                .filter_map(|((_, _, e), f)| e.map(|e| (f.delta_c, f.delta_m, e)))
                .collect();
            if effects.len() >= 2 {
                let dc: Vec<f64> = effects.iter().map(|r| r.0).collect();
                let dm: Vec<f64> = effects.iter().map(|r| r.1).collect();
                let eff: Vec<f64> = effects.iter().map(|r| r.2).collect();
                match (spearman(&dc, &eff), spearman(&dm, &eff)) {
                    (Ok(sc), Ok(sm)) => {
                        println!("spearman deltaC vs effect: {sc:.4}");
                        println!("spearman deltaM vs effect: {sm:.4}");
                    }
                    (c, m) => {
                        if let Err(e) = c {
                            eprintln!("warning: spearman(deltaC) failed: {e}");
                        }
                        if let Err(e) = m {
                            eprintln!("warning: spearman(deltaM) failed: {e}");
                        }
                    }
                }
            }

            let mut manifest = RunManifest::new("features");
            msa_options(&msa, &mut manifest.options);
            manifest.options.insert("method".into(), method.clone());
            manifest.digest_input(&msa.msa)?;
            manifest.digest_input(&mutants)?;
            let warnings = map
                .missing
                .iter()
                .map(|(i, j)| format!("pair ({i}, {j}) missing from coupling map"))
                .collect();
            finish_manifest(manifest, &out, started, warnings)
        }
    }
}
