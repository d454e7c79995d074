//! Command-line surface of the `k3lat` binary.
//!
//! Lattices are given inline (`"2 1; 1 2"` or `"[[2,1],[1,2]]"`) or as a path
//! to a file holding the same text. Exit codes: 0 success, 1 input error,
//! 2 internal invariant violation.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use num_bigint::BigInt;

use crate::classify::{classify, good_isometries, polarization_and_transcendental, ClassifyOptions};
use crate::dataset::{load_dataset, Dataset};
use crate::enumerate::{automorphism_group, short_vectors, Isometry};
use crate::error::{Error, Result};
use crate::exact::IntMatrix;
use crate::fqm::{anti_embeddings, k3sq_glue_admissible};
use crate::glue::{check_extendable, GlueMap, Mode};
use crate::hilb2::{minus10_obstruction_grams_bounded, minus2_wall_scan_bounded, obstruction_report, line_free_excludes};
use crate::lattice::Lattice;
use crate::table::{emit_table, run_table, Format};

#[derive(Parser, Debug)]
#[command(name = "k3lat", version, about = "Exact lattice tools for symmetric K3^[2]-type fourfolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Discriminant group and quadratic form.
    Disc {
        #[arg(allow_hyphen_values = true)]
        gram: String,
    },
    /// Order and generators of the isometry group of a definite lattice.
    Autgroup {
        #[arg(allow_hyphen_values = true)]
        gram: String,
    },
    /// Nonzero vectors of norm at most the bound.
    Shortvec {
        #[arg(allow_hyphen_values = true)]
        gram: String,
        #[arg(long)]
        bound: i64,
    },
    /// Good isometries of a rank-3 lattice with their polarization data.
    GoodIsos {
        #[arg(allow_hyphen_values = true)]
        gram: String,
    },
    /// Whether an isometry of N extends across each glue to M.
    GlueCheck {
        #[arg(long, allow_hyphen_values = true)]
        n: String,
        #[arg(long, allow_hyphen_values = true)]
        m: String,
        /// Matrix of the isometry of N (columns are images of basis vectors).
        #[arg(long, allow_hyphen_values = true)]
        f: String,
    },
    /// Classification rows for one group of a dataset.
    Classify {
        group: String,
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, default_value = "permissive")]
        mode: Mode,
        #[arg(long, default_value = "markdown")]
        format: Format,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Obstructions to ampleness of h − ξ on a Hilbert square.
    Hilb2 {
        #[arg(long)]
        h_sq: i64,
        /// Search bound on |l|, required when the system is unbounded.
        #[arg(long)]
        l_bound: Option<i64>,
    },
    /// The full classification table.
    Table {
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, default_value = "permissive")]
        mode: Mode,
        #[arg(long, default_value = "markdown")]
        format: Format,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

/// Parses `"a b; c d"`, `"[[a,b],[c,d]]"` or the contents of a file path.
pub fn parse_gram(arg: &str) -> Result<IntMatrix> {
    let path = std::path::Path::new(arg);
    let text = if path.is_file() {
        std::fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{arg}: {e}")))?
    } else {
        arg.to_string()
    };
    let norm = text.replace("],", ";").replace(['[', ']'], "").replace(',', " ").replace('\n', ";");
    let rows = norm
        .split(';')
        .filter(|r| !r.trim().is_empty())
        .map(|r| {
            r.split_whitespace()
                .map(|t| t.parse::<BigInt>().map_err(|_| Error::InvalidArgument(format!("bad integer '{t}'"))))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    IntMatrix::from_rows(rows)
}

fn parse_lattice(arg: &str) -> Result<Lattice> {
    Lattice::new(parse_gram(arg)?)
}

fn dataset(path: &Option<PathBuf>) -> Result<Dataset> {
    match path {
        Some(p) => load_dataset(p),
        None => Ok(Dataset::builtin()),
    }
}

/// Output of a command: text for stdout and warnings for stderr.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    pub warnings: Vec<String>,
}

pub fn run(cmd: &Command) -> Result<Output> {
    let mut out = Output::default();
    let s = &mut out.stdout;
    match cmd {
        Command::Disc { gram } => {
            let l = parse_lattice(gram)?;
            let d = l.discriminant()?;
            let _ = writeln!(s, "det {}", l.det());
            let _ = writeln!(s, "{}", d.form());
        }
        Command::Autgroup { gram } => {
            let g = automorphism_group(&parse_lattice(gram)?)?;
            let _ = writeln!(s, "order {}", g.order());
            for f in g.generators() {
                let _ = writeln!(s, "{f}");
            }
        }
        Command::Shortvec { gram, bound } => {
            for (v, n) in short_vectors(&parse_lattice(gram)?, &BigInt::from(*bound))? {
                let coords: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                let _ = writeln!(s, "{n}: ({})", coords.join(", "));
            }
        }
        Command::GoodIsos { gram } => {
            let n = parse_lattice(gram)?;
            for f in good_isometries(&n)? {
                let p = polarization_and_transcendental(&n, &f)?;
                let h: Vec<String> = p.h.iter().map(|x| x.to_string()).collect();
                let _ = writeln!(
                    s,
                    "order {} trace {} h ({}) h² {} T {}",
                    f.order(12).unwrap_or(0),
                    f.trace(),
                    h.join(", "),
                    p.h_sq,
                    crate::classify::gram_to_inline(&p.t_gram)
                );
            }
        }
        Command::GlueCheck { n, m, f } => {
            let n = parse_lattice(n)?;
            let m = parse_lattice(m)?;
            let f = Isometry::new(&n, parse_gram(f)?)?;
            let dm = m.discriminant()?;
            let dn = n.discriminant()?;
            let mut seen = std::collections::HashSet::new();
            for gamma in anti_embeddings(dm.form(), dn.form())? {
                let glue = GlueMap::with_lattice(&n, &m, gamma)?;
                if !seen.insert(glue.image().key().to_vec()) {
                    continue;
                }
                let ext = check_extendable(&glue, &f, None)?;
                let _ = writeln!(
                    s,
                    "image of order {}: extendable {} (K3^[2] glue {})",
                    glue.image().order(),
                    ext.extendable,
                    k3sq_glue_admissible(dn.form(), glue.image())?
                );
            }
            if seen.is_empty() {
                let _ = writeln!(s, "no anti-embedding of D_M into D_N");
            }
        }
        Command::Classify { group, dataset: path, mode, format, jobs } => {
            let ds = dataset(path)?;
            let g = ds.group(group).ok_or_else(|| Error::InvalidArgument(format!("unknown group '{group}'")))?;
            let res = classify(
                &g.invariant_lattices()?,
                &g.coinvariant_data()?,
                &g.name,
                &ClassifyOptions { mode: *mode, jobs: *jobs },
            )?;
            s.push_str(&emit_table(&res.rows, *format));
            out.warnings = res.warnings;
        }
        Command::Hilb2 { h_sq, l_bound } => match obstruction_report(*h_sq) {
            Ok(r) => {
                for g in &r.minus10_grams {
                    let _ = writeln!(s, "-10 {}", crate::classify::gram_to_inline(g));
                }
                for w in &r.walls.interior {
                    let _ = writeln!(s, "-2 t={} k={} l={} {}", w.t, w.k, w.l, crate::classify::gram_to_inline(&w.gram));
                }
                for w in &r.walls.endpoint {
                    let _ = writeln!(s, "-2 endpoint k={} l={} {}", w.k, w.l, crate::classify::gram_to_inline(&w.gram));
                }
                let _ = writeln!(s, "excluded without lines: {}", r.line_class_needed);
            }
            Err(Error::Unbounded(msg)) => {
                let b = l_bound.ok_or_else(|| Error::Unbounded(format!("{msg}; pass --l-bound")))?;
                out.warnings.push(format!("{msg}; results truncated at |l| ≤ {b}"));
                for g in minus10_obstruction_grams_bounded(*h_sq, b)? {
                    let _ = writeln!(s, "-10 {} line-free-excluded {}", crate::classify::gram_to_inline(&g), line_free_excludes(&g)?);
                }
                for w in minus2_wall_scan_bounded(*h_sq, b)?.all() {
                    let _ = writeln!(s, "-2 t={} k={} l={} {}", w.t, w.k, w.l, crate::classify::gram_to_inline(&w.gram));
                }
            }
            Err(e) => return Err(e),
        },
        Command::Table { dataset: path, mode, format, jobs } => {
            let res = run_table(&dataset(path)?, &ClassifyOptions { mode: *mode, jobs: *jobs })?;
            s.push_str(&emit_table(&res.rows, *format));
            out.warnings = res.warnings;
            out.warnings.push(format!("{} warning(s)", out.warnings.len()));
        }
    }
    Ok(out)
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Internal(_) => 2,
        _ => 1,
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli.command) {
        Ok(out) => {
            print!("{}", out.stdout);
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
