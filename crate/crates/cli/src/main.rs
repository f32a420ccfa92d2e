use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use kneser::glue::{
    anti_isometries, anti_isometry_orbits, count_embeddings, first_embedding, glue,
    groupoid_shares, GluePair,
};
use kneser::isometry::{automorphisms, is_isometric};
use kneser::lattice::{builtin, read_lat, to_lat_string, write_lat, Lattice, Sublattice};
use kneser::neighbors::{
    count_isotropic_lines, enumerate_genus, line_enumerator, neighbor, GenusCatalog, GenusOptions,
    IsotropicLine,
};
use kneser::stats::{
    biased_counts, convergence_report, neighbor_matrix, petersson_check, spectrum,
    write_biased_csv, write_report_csv, write_stats_csv, StatsMode, StatsOptions,
};

/// Exact integral lattices: neighbors, genera, automorphisms, glueing and neighbor statistics.
///
/// A lattice argument is a `.lat` file or a built-in name such as `Z9`, `A2`,
/// `D4`, `E8`, `D16+`, or a sum like `E8+E8`.
#[derive(Parser)]
#[command(name = "kneser", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Sample,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
    /// lines per row in sample mode
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// work units per row; sampled results depend on it
    #[arg(long, default_value_t = 64)]
    chunks: usize,
    /// enumerate every line instead of one per automorphism orbit
    #[arg(long)]
    no_orbits: bool,
}

impl RunArgs {
    fn mode(&self) -> StatsMode {
        match self.mode {
            Mode::Exact => StatsMode::Exact,
            Mode::Sample => StatsMode::Sampled {
                seed: self.seed,
                count: self.samples,
            },
        }
    }

    fn options(&self) -> StatsOptions {
        StatsOptions {
            chunks: self.chunks,
            orbit_reduction: !self.no_orbits,
            ..Default::default()
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Isotropic lines mod p and the neighbor at a chosen line.
    Neighbors {
        lattice: String,
        #[arg(short)]
        p: u64,
        /// line vector, comma separated; prints the neighbor's Gram matrix
        #[arg(long, value_delimiter = ',')]
        line: Option<Vec<u64>>,
        #[arg(long)]
        count_only: bool,
        /// largest number of lines to list
        #[arg(long, default_value_t = 20)]
        limit: usize,
    },
    /// Enumerates the genus by p-neighbor steps and writes a JSON catalog.
    Genus {
        lattice: String,
        #[arg(short)]
        p: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1000)]
        max_classes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Order and generators of the automorphism group.
    Aut {
        lattice: String,
        /// print every generator
        #[arg(long)]
        generators: bool,
    },
    /// An isometry between two lattices, or NOT ISOMETRIC.
    Isom { a: String, b: String },
    /// Anti-isometries of the discriminant forms and the glued lattices.
    Glue {
        a: String,
        b: String,
        #[arg(long)]
        quadratic_only: bool,
        /// directory for the glued lattices (`glue_<i>.lat`)
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Isometric embeddings of A into U.
    Embed {
        a: String,
        u: String,
        #[arg(long)]
        saturated: bool,
        /// print only the number of embeddings
        #[arg(long)]
        count: bool,
    },
    /// Neighbor-count matrix over a catalog.
    Stats {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(short)]
        p: u64,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Counts over the p-neighbors of L containing a saturated copy of A.
    BiasedStats {
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        sub: String,
        #[arg(short)]
        p: u64,
        /// catalog of the genus of L; enumerated when absent
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Eigenvalues of the mass-symmetrized neighbor matrix.
    Spectrum {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(short)]
        p: u64,
    },
    /// Ratio N_p(from, to)/c_V(p) against the mass fraction over several primes.
    Convergence {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[arg(long, value_delimiter = ',', default_value = "3,5,7")]
        primes: Vec<u64>,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(arg: &str) -> Result<Lattice> {
    if Path::new(arg).exists() {
        return read_lat(arg).with_context(|| format!("reading {arg}"));
    }
    // split "E8+E8" into summands; a trailing '+' belongs to the name (D16+)
    let mut names: Vec<String> = Vec::new();
    for part in arg.split('+') {
        match (part.is_empty(), names.last_mut()) {
            (true, Some(last)) => last.push('+'),
            (true, None) => bail!("bad lattice name {arg:?}"),
            (false, _) => names.push(part.to_string()),
        }
    }
    let mut out: Option<Lattice> = None;
    for nm in &names {
        let l = builtin(nm)
            .with_context(|| format!("{arg:?} is neither a file nor a known lattice"))?;
        out = Some(match out {
            None => l,
            Some(acc) => acc.direct_sum(&l),
        });
    }
    Ok(out.expect("at least one summand").with_label(arg))
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn genus_prime(l: &Lattice) -> u64 {
    if l.is_even() && l.is_unimodular() {
        return 2;
    }
    let det = l.det();
    (3u64..)
        .step_by(2)
        .find(|&q| (2..q).all(|d| q % d != 0) && (&det % q) != 0.into())
        .unwrap()
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Neighbors {
            lattice,
            p,
            line,
            count_only,
            limit,
        } => {
            let l = load(&lattice)?;
            let c = count_isotropic_lines(l.rank(), &l.det(), p)?;
            if let Some(v) = line {
                if v.len() != l.rank() {
                    bail!(
                        "line has {} coordinates, lattice has rank {}",
                        v.len(),
                        l.rank()
                    );
                }
                let line =
                    IsotropicLine::from_vector(p, &v).context("the zero vector spans no line")?;
                let nb = neighbor(&l, &line)?;
                print!("{}", to_lat_string(&nb.lattice));
                return Ok(());
            }
            println!("{c} isotropic lines mod {p}");
            if count_only {
                return Ok(());
            }
            let e = line_enumerator(&l, p)?;
            let mut shown = 0;
            e.for_each(|v| {
                if shown < limit {
                    let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                    println!("{}", s.join(","));
                    shown += 1;
                }
            })?;
        }
        Cmd::Genus {
            lattice,
            p,
            out,
            max_classes,
            seed,
        } => {
            let l = load(&lattice)?;
            let opts = GenusOptions {
                max_classes,
                seed,
                ..Default::default()
            };
            let cat = enumerate_genus(&l, p, &opts)?;
            for (i, c) in cat.classes.iter().enumerate() {
                println!("{i}\t{}\t|O| = {}", c.label(), c.aut_order);
            }
            println!("{} classes, total mass {}", cat.len(), cat.total_mass());
            cat.write(&out)?;
        }
        Cmd::Aut {
            lattice,
            generators,
        } => {
            let l = load(&lattice)?;
            let g = automorphisms(&l);
            println!("order {}", g.order);
            println!("{} generators", g.generators.len());
            if generators {
                for m in &g.generators {
                    println!("{m}");
                }
            }
        }
        Cmd::Isom { a, b } => {
            let (a, b) = (load(&a)?, load(&b)?);
            match is_isometric(&a, &b) {
                Some(m) => println!("{m}"),
                None => println!("NOT ISOMETRIC"),
            }
        }
        Cmd::Glue {
            a,
            b,
            quadratic_only,
            out_dir,
        } => {
            let (a, b) = (load(&a)?, load(&b)?);
            let mut sigmas = anti_isometries(&a, &b)?;
            if quadratic_only {
                sigmas.retain(|s| s.quadratic);
            }
            let orbits = anti_isometry_orbits(&b, &sigmas)?;
            let mut orbit_of = vec![0; sigmas.len()];
            for (k, o) in orbits.iter().enumerate() {
                for &i in o {
                    orbit_of[i] = k;
                }
            }
            println!(
                "{} anti-isometries in {} O(B)-orbits",
                sigmas.len(),
                orbits.len()
            );
            std::fs::create_dir_all(&out_dir)?;
            for (i, s) in sigmas.into_iter().enumerate() {
                let quadratic = s.quadratic;
                let images = format!("{:?}", s.images);
                let l = glue(&GluePair::new(a.clone(), b.clone(), s)?)?;
                let path = out_dir.join(format!("glue_{i}.lat"));
                write_lat(&path, &l)?;
                println!(
                    "{i}\torbit {}\tquadratic {quadratic}\timages {images}\t{} det {}\t{}",
                    orbit_of[i],
                    l.parity(),
                    l.det(),
                    path.display()
                );
            }
        }
        Cmd::Embed {
            a,
            u,
            saturated,
            count,
        } => {
            let (a, u) = (load(&a)?, load(&u)?);
            let n = count_embeddings(&a, &u, saturated)?;
            if count {
                println!("{n}");
            } else {
                let kind = if saturated {
                    "saturated embeddings"
                } else {
                    "embeddings"
                };
                println!("{n} {kind}");
                if let Some(e) = first_embedding(&a, &u, saturated)? {
                    println!("first: {e}");
                }
            }
        }
        Cmd::Stats {
            catalog,
            p,
            run,
            out,
        } => {
            let cat = GenusCatalog::read(&catalog)?;
            let s = neighbor_matrix(&cat, p, run.mode(), &run.options())?;
            if s.mode.is_exact() {
                let r = petersson_check(&s)?;
                info!("Petersson identity holds on {} pairs", r.pairs_checked);
            }
            write_stats_csv(&s, sink(&out)?)?;
        }
        Cmd::BiasedStats {
            lattice,
            sub,
            p,
            catalog,
            run,
            out,
        } => {
            let l = load(&lattice)?;
            let a = load(&sub)?;
            let e = first_embedding(&a, &l, true)?
                .context("no saturated embedding of the sublattice")?;
            let sub = Sublattice::new(l.clone(), e)?;
            let cat = match catalog {
                Some(c) => GenusCatalog::read(c)?,
                None => enumerate_genus(&l, genus_prime(&l), &GenusOptions::default())?,
            };
            let s = biased_counts(&cat, &sub, p, run.mode(), &run.options())?;
            let shares = groupoid_shares(&a, &cat)?;
            write_biased_csv(&s, &shares, sink(&out)?)?;
        }
        Cmd::Spectrum { catalog, p } => {
            let cat = GenusCatalog::read(&catalog)?;
            let s = neighbor_matrix(&cat, p, StatsMode::Exact, &StatsOptions::default())?;
            petersson_check(&s)?;
            let r = spectrum(&s)?;
            println!("c_V({p}) = {}", r.c_v);
            for l in &r.eigenvalues {
                println!("{l:.6}");
            }
            if let Some(l2) = &r.second_exact {
                println!("lambda_2 = {l2} (exact)");
            }
            if let Some(poly) = &r.char_poly {
                let s: Vec<String> = poly.iter().map(|c| c.to_string()).collect();
                println!("charpoly (ascending) {}", s.join(" "));
            }
            println!("gap ratio {:.6}", r.gap_ratio);
        }
        Cmd::Convergence {
            catalog,
            from,
            to,
            primes,
            run,
            out,
        } => {
            let cat = GenusCatalog::read(&catalog)?;
            let rows = convergence_report(&cat, from, to, &primes, run.mode(), &run.options())?;
            write_report_csv(&rows, sink(&out)?)?;
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
