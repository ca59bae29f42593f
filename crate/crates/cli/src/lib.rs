//! Command-line driver for the corolla triple store.
//!
//! [`run`] parses arguments, writes data to `out` and diagnostics to `err`,
//! and returns the process exit code: 0 on success, 1 when a graph or input
//! fails validation, 2 on usage errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use corolla_core::corolla::{CorollaGraph, TripleId};
use corolla_core::entangle::{self, JointState};
use corolla_core::qla::{von_neumann_entropy, DensityMatrix, LogBase};
use corolla_core::qusym::Vocabulary;
use corolla_core::store::{self, Store};
use corolla_core::vsa::{self, HyperVector};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "corolla", version, about = "Quantum-corolla triple store")]
pub struct Cli {
    #[command(flatten)]
    pub source: Source,
    #[command(subcommand)]
    pub command: Command,
}

/// Where the graph comes from: a snapshot directory, or the three input files.
#[derive(Debug, Args)]
pub struct Source {
    /// Snapshot directory (written by `ingest`, read by the other commands)
    #[arg(long, global = true, value_name = "DIR")]
    pub store: Option<PathBuf>,
    /// Node vocabulary file, one symbol per line
    #[arg(long, global = true, value_name = "PATH")]
    pub vocab: Option<PathBuf>,
    /// Converse registry file with `forward <-> backward = p` lines
    #[arg(long, global = true, value_name = "PATH")]
    pub registry: Option<PathBuf>,
    /// Triples file with `s p o .` lines
    #[arg(long, global = true, value_name = "PATH")]
    pub triples: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest the input files and, with --store, write a snapshot
    Ingest,
    /// Check the involution and weight laws of the graph
    Validate,
    /// List a node's corollas, partners and both readings of each triple
    Query { node: String },
    /// Synthesize the joint state of a triple
    Entangle { triple: String },
    /// Sample a triple's joint state in the computational basis
    Measure {
        triple: String,
        #[arg(long)]
        shots: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Entropy of a triple's joint state or of the node vocabulary
    Entropy {
        #[arg(long, value_name = "T", conflicts_with = "node_vocab", required_unless_present = "node_vocab")]
        triple: Option<String>,
        /// Maximal entropy of one node qusym (log of the vocabulary size)
        #[arg(long)]
        node_vocab: bool,
        /// Logarithm base
        #[arg(long, value_name = "D", default_value_t = 2.0)]
        base: f64,
    },
    /// Bind two hex-encoded hypervectors
    Bind {
        #[arg(long, conflicts_with = "tensor", required_unless_present = "tensor")]
        xor: bool,
        /// Outer product, printed compressed back to n bits
        #[arg(long)]
        tensor: bool,
        /// With --tensor, print the n x n sign matrix instead
        #[arg(long, requires = "tensor")]
        matrix: bool,
        /// Vector length in bits (default: 4 per hex digit)
        #[arg(long, value_name = "N")]
        bits: Option<usize>,
        a: String,
        b: String,
    },
    /// Write one JSON object per edge (`-` for standard output)
    Export {
        #[arg(long, value_name = "PATH")]
        jsonl: PathBuf,
    },
    /// Round a noisy amplitude vector to the nearest vocabulary symbol
    Round {
        /// Comma-separated amplitudes, e.g. `0.1,0.9` or `0.5+0.1i,0.2i`
        #[arg(long, value_name = "CSV", allow_hyphen_values = true)]
        vector: String,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) | CliError::Io(_) => 1,
        }
    }
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    2
                }
            };
        }
    };
    match dispatch(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let CliError::Usage(_) = e {
                let _ = writeln!(err, "usage: corolla [--store DIR | --vocab PATH --registry PATH --triples PATH] <COMMAND>");
            }
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let src = &cli.source;
    match cli.command {
        Command::Ingest => ingest(src, out, err),
        Command::Validate => {
            let g = load_graph(src)?;
            let report = g.validate_graph();
            if !report.is_valid() {
                return Err(CliError::Failed(format!("graph invalid:\n{report}")));
            }
            writeln!(out, "graph valid: {} nodes, {} edges", g.node_count(), g.triple_count())?;
            Ok(())
        }
        Command::Query { node } => {
            let g = load_graph(src)?;
            write!(out, "{}", store::query_node(&g, &node).map_err(failed)?)?;
            Ok(())
        }
        Command::Entangle { triple } => {
            let g = load_graph(src)?;
            let joint = joint_state(&g, &triple)?;
            print_joint(&g, &joint, out)
        }
        Command::Measure { triple, shots, seed } => {
            let g = load_graph(src)?;
            let joint = joint_state(&g, &triple)?;
            let record = entangle::measure_joint(&joint, shots, seed).map_err(failed)?;
            writeln!(out, "{}", serde_json::to_string(&record).expect("records serialize"))?;
            Ok(())
        }
        Command::Entropy { triple, node_vocab, base } => {
            let base = LogBase::new(base).map_err(|e| CliError::Usage(format!("--base: {e}")))?;
            let g = load_graph(src)?;
            let value = match triple {
                Some(t) => entangle::measure_entanglement_in(&joint_state(&g, &t)?, base),
                None if node_vocab => {
                    let mixed = DensityMatrix::maximally_mixed(g.vocabulary().d()).map_err(failed)?;
                    von_neumann_entropy(&mixed, base)
                }
                None => return Err(CliError::Usage("entropy needs --triple T or --node-vocab".into())),
            };
            writeln!(out, "{value:.6}")?;
            Ok(())
        }
        Command::Bind { xor, matrix, bits, a, b, .. } => {
            let parse = |hex: &str| {
                match bits {
                    Some(n) => HyperVector::from_hex_bits(hex, n),
                    None => HyperVector::from_hex(hex),
                }
                .map_err(|e| CliError::Usage(format!("{hex:?}: {e}")))
            };
            let (a, b) = (parse(&a)?, parse(&b)?);
            if xor {
                writeln!(out, "{}", vsa::bind_xor(&a, &b).map_err(failed)?.to_hex())?;
                return Ok(());
            }
            let op = vsa::bind_tensor(&a, &b).map_err(failed)?;
            if matrix {
                let n = a.dim();
                for i in 0..n {
                    let row: String = (0..n).map(|j| if op.get(i, j) > 0 { '+' } else { '-' }).collect();
                    writeln!(out, "{row}")?;
                }
            } else {
                writeln!(out, "{}", vsa::compress_outer(&op).to_hex())?;
            }
            Ok(())
        }
        Command::Export { jsonl } => {
            let g = load_graph(src)?;
            let n = if jsonl.as_os_str() == "-" {
                store::write_jsonl(&g, &mut *out).map_err(failed)?
            } else {
                store::export_jsonl(&g, &jsonl).map_err(failed)?
            };
            writeln!(err, "exported {n} edges")?;
            Ok(())
        }
        Command::Round { vector } => {
            let path = src
                .vocab
                .as_deref()
                .ok_or_else(|| CliError::Usage("round needs --vocab PATH".into()))?;
            let voc = read_vocabulary(path)?;
            let amps = parse_vector(&vector)?;
            let (symbol, fidelity) = entangle::tessellate_round(&amps, &voc).map_err(failed)?;
            writeln!(out, "{symbol}\t{fidelity:.6}")?;
            Ok(())
        }
    }
}

fn ingest(src: &Source, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let (vocab, registry, triples) = input_files(src)?
        .ok_or_else(|| CliError::Usage("ingest needs --vocab, --registry and --triples".into()))?;
    let ing = store::ingest(vocab, registry, triples).map_err(failed)?;
    if ing.duplicates > 0 {
        writeln!(err, "warning: {} duplicate statement(s) dropped", ing.duplicates)?;
    }
    let g = &ing.graph;
    writeln!(
        out,
        "ingested {} nodes, {} edges, {} half-edges ({} converse statement(s) folded)",
        g.node_count(),
        g.triple_count(),
        g.half_edge_count(),
        ing.folded
    )?;
    if let Some(dir) = &src.store {
        Store::new(ing.graph).save(dir).map_err(failed)?;
        writeln!(err, "snapshot written to {}", dir.display())?;
    }
    Ok(())
}

type Inputs<'a> = (&'a Path, &'a Path, &'a Path);

fn input_files(src: &Source) -> Result<Option<Inputs<'_>>, CliError> {
    match (&src.vocab, &src.registry, &src.triples) {
        (Some(v), Some(r), Some(t)) => Ok(Some((v, r, t))),
        (None, None, None) => Ok(None),
        _ => Err(CliError::Usage("--vocab, --registry and --triples must be given together".into())),
    }
}

fn load_graph(src: &Source) -> Result<CorollaGraph, CliError> {
    if let Some((v, r, t)) = input_files(src)? {
        return Ok(store::ingest(v, r, t).map_err(failed)?.graph);
    }
    match &src.store {
        Some(dir) => Ok(Store::load(dir).map_err(failed)?.graph),
        None => Err(CliError::Usage("no graph: pass --store DIR or --vocab, --registry and --triples".into())),
    }
}

fn joint_state(g: &CorollaGraph, triple: &str) -> Result<JointState, CliError> {
    let id: TripleId = triple.parse().map_err(CliError::Usage)?;
    entangle::synthesize_joint_state(g, id, None).map_err(failed)
}

fn print_joint(g: &CorollaGraph, joint: &JointState, out: &mut dyn Write) -> Result<(), CliError> {
    let t = joint.triple;
    writeln!(out, "{t}: {}", g.triple(t).map_err(failed)?)?;
    writeln!(out, "converse: {}", g.converse_of(t).map_err(failed)?)?;
    writeln!(out, "target_entropy: {:.6}", joint.target_entropy)?;
    writeln!(out, "lambda: {:.6}", joint.lambda)?;
    writeln!(out, "dims: {}x{}", joint.dims.0, joint.dims.1)?;
    writeln!(out, "entanglement_entropy: {:.6}", entangle::measure_entanglement(joint))?;
    writeln!(out, "amplitudes:")?;
    for (k, a) in joint.local.amplitudes().iter().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let idx = joint.outcome_index(k);
        let (l, r) = joint.outcome_symbols(idx);
        writeln!(out, "  {:+.6}{:+.6}i  |{l}>|{r}>  (index {idx})", a.re, a.im)?;
    }
    Ok(())
}

fn read_vocabulary(path: &Path) -> Result<Arc<Vocabulary>, CliError> {
    let text = store::read_file(path).map_err(failed)?;
    Ok(Arc::new(Vocabulary::parse(&text).map_err(|e| failed(format!("{}: {e}", path.display())))?))
}

fn parse_vector(csv: &str) -> Result<Vec<Complex64>, CliError> {
    csv.split(',')
        .map(|field| {
            let field = field.trim();
            field
                .parse::<Complex64>()
                .map_err(|_| CliError::Usage(format!("--vector: cannot parse {field:?} as a complex number")))
        })
        .collect()
}
