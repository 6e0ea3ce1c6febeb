use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use repairscope::kb::DEFAULT_MAX_ROUNDS;
use repairscope::session::ClusteringParams;
use repairscope::{
    to_json, MdsOptions, QueryRequest, Result, ScopeSpec, Semantics, Session, SessionConfig,
    WeightScheme,
};

pub const PORT_ENV: &str = "REPAIRSCOPE_PORT";
pub const DEFAULT_PORT: u16 = 8080;

#[derive(Debug, Parser)]
#[command(
    name = "repairscope",
    version,
    about = "Cluster the repairs of an inconsistent knowledge base and query them"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the repairs of a knowledge base.
    Repairs(PipelineArgs),
    /// Print the pairwise repair distance matrix.
    Distances {
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Emit CSV instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// Print the 2D embedding of the repairs.
    Embed(PipelineArgs),
    /// Partition the repairs and print the blocks.
    Cluster {
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[command(flatten)]
        clustering: ClusterArgs,
    },
    /// Print the full analysis document (repairs, matrix, embedding, partition).
    Analyze {
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[command(flatten)]
        clustering: ClusterArgs,
    },
    /// Answer a Boolean conjunctive query over a scope of repairs.
    Query {
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Query text, e.g. "baby(X), get_ill(X)".
        #[arg(long = "q", visible_alias = "query")]
        q: String,
        #[arg(long, default_value = "AR")]
        semantics: Semantics,
        /// all | partition | cluster:<i> | repairs:<label>,<label>...
        #[arg(long, default_value = "all")]
        scope: ScopeSpec,
        #[command(flatten)]
        clustering: ClusterArgs,
        /// Print the answer document instead of the bare answer.
        #[arg(long)]
        json: bool,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = PORT_ENV, default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    /// Knowledge base file.
    pub kb: PathBuf,
    /// Distance weights as p,c,v,lambda.
    #[arg(long, default_value = "1,1,0,5")]
    pub weights: WeightScheme,
    #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS)]
    pub max_rounds: usize,
    /// Iteration cap for stress majorization.
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    /// Relative stress improvement below which majorization stops.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodKind {
    Spectral,
    Threshold,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ClusterArgs {
    #[arg(long, value_enum)]
    pub method: Option<MethodKind>,
    /// Number of clusters (spectral).
    #[arg(long)]
    pub k: Option<usize>,
    /// Kernel width (spectral); defaults to half the median distance.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// k-means tie-break seed (spectral).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Distance threshold (threshold).
    #[arg(long)]
    pub tau: Option<f64>,
}

impl ClusterArgs {
    pub fn params(&self) -> ClusteringParams {
        ClusteringParams {
            method: self.method.map(|m| match m {
                MethodKind::Spectral => "spectral".to_owned(),
                MethodKind::Threshold => "threshold".to_owned(),
            }),
            k: self.k,
            sigma: self.sigma,
            seed: self.seed,
            tau: self.tau,
        }
    }
}

impl PipelineArgs {
    pub fn config(&self) -> SessionConfig {
        SessionConfig {
            weights: self.weights,
            mds: MdsOptions {
                max_iters: self.max_iters,
                tol: self.tol,
                ..MdsOptions::default()
            },
            max_rounds: self.max_rounds,
            ..SessionConfig::default()
        }
    }

    pub fn session(&self) -> Result<Session> {
        let text = std::fs::read_to_string(&self.kb)?;
        Session::create(&text, self.config())
    }
}

/// Runs a one-shot subcommand and returns what it prints. `Serve` is
/// handled by the binary.
pub fn run(command: &Command) -> Result<String> {
    let mut out = match command {
        Command::Repairs(p) => to_json(&p.session()?.repairs_document()),
        Command::Distances { pipeline, csv } => {
            let s = pipeline.session()?;
            if *csv {
                return Ok(s.matrix().to_csv());
            }
            to_json(s.matrix())
        }
        Command::Embed(p) => to_json(p.session()?.embedding()),
        Command::Cluster {
            pipeline,
            clustering,
        } => {
            let method = clustering.params().to_method()?;
            to_json(&pipeline.session()?.clustering_document(method.as_ref())?)
        }
        Command::Analyze {
            pipeline,
            clustering,
        } => {
            let method = clustering.params().to_method()?;
            to_json(&pipeline.session()?.analysis(method.as_ref())?)
        }
        Command::Query {
            pipeline,
            q,
            semantics,
            scope,
            clustering,
            json,
        } => {
            let request = QueryRequest {
                query: q.clone(),
                semantics: *semantics,
                scope: scope.clone(),
                clustering: clustering.params().to_method()?,
            };
            let answer = pipeline.session()?.answer_query(&request)?;
            if *json {
                to_json(&answer)
            } else {
                answer.render()
            }
        }
        Command::Serve { .. } => unreachable!("serve is not a one-shot command"),
    };
    out.push('\n');
    Ok(out)
}
