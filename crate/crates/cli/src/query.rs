//! Turning command line options and query declarations into engine queries.

use adverse_core::correctness::{CorrectnessQuery, Kind, Method};
use adverse_core::graph::Graph;
use adverse_core::regulation::JointModel;
use adverse_core::statespace::ExplorationLimits;

use crate::dsl::Model;
use crate::error::CliError;

/// Query settings given on the command line. Unset fields fall back to the
/// selected query declaration, then to defaults.
#[derive(Clone, Debug, Default)]
pub struct QueryOptions {
    pub query: Option<String>,
    pub automaton: Option<String>,
    pub kind: Option<String>,
    pub k: Option<usize>,
    pub pre: Option<String>,
    pub post: Option<String>,
    pub inits: Vec<String>,
    pub method: Option<String>,
    pub max_states: Option<usize>,
    pub max_depth: Option<usize>,
    pub max_graph_size: Option<usize>,
}

impl QueryOptions {
    /// Fills unset fields from the named query declaration.
    pub fn merged(&self, model: &Model) -> Result<QueryOptions, CliError> {
        let Some(name) = &self.query else {
            return Ok(self.clone());
        };
        let d = model.query(name)?;
        let pick = |a: &Option<String>, b: &Option<String>| a.clone().or_else(|| b.clone());
        Ok(QueryOptions {
            query: self.query.clone(),
            automaton: pick(&self.automaton, &d.automaton),
            kind: pick(&self.kind, &d.kind),
            k: self.k.or(d.k),
            pre: pick(&self.pre, &d.pre),
            post: pick(&self.post, &d.post),
            inits: if self.inits.is_empty() {
                d.inits.clone()
            } else {
                self.inits.clone()
            },
            method: pick(&self.method, &d.method),
            max_states: self.max_states.or(d.max_states),
            max_depth: self.max_depth.or(d.max_depth),
            max_graph_size: self.max_graph_size.or(d.max_graph_size),
        })
    }

    pub fn limits(&self) -> ExplorationLimits {
        let mut l = ExplorationLimits::default();
        if let Some(n) = self.max_states {
            l.max_states = n;
        }
        if let Some(n) = self.max_depth {
            l.max_depth = n;
        }
        if let Some(n) = self.max_graph_size {
            l.max_graph_size = n;
        }
        l
    }

    pub fn init_graphs(&self, model: &Model) -> Result<Vec<Graph>, CliError> {
        if self.inits.is_empty() {
            return Err(CliError::Usage("no initial graph given (use --init)".into()));
        }
        self.inits
            .iter()
            .map(|n| model.graph(n).cloned().map_err(CliError::from))
            .collect()
    }

    pub fn joint_model(&self, model: &Model) -> Result<JointModel, CliError> {
        Ok(model.joint_model(self.automaton.as_deref())?)
    }

    pub fn method(&self) -> Result<Method, CliError> {
        match &self.method {
            Some(m) => m.parse().map_err(CliError::Usage),
            None => Ok(Method::Direct),
        }
    }
}

/// Resolves merged options into a correctness query.
pub fn correctness_query(model: &Model, o: &QueryOptions) -> Result<CorrectnessQuery, CliError> {
    let kind: Kind = match &o.kind {
        Some(k) => k.parse().map_err(CliError::Usage)?,
        None => return Err(CliError::Usage("no correctness kind given (use --kind)".into())),
    };
    let required = |v: &Option<String>, flag: &str| -> Result<String, CliError> {
        v.clone()
            .ok_or_else(|| CliError::Usage(format!("missing --{flag}")))
    };
    let pre = model.prop(&required(&o.pre, "pre")?)?.clone();
    let post = model.prop(&required(&o.post, "post")?)?.clone();
    Ok(CorrectnessQuery {
        model: o.joint_model(model)?,
        pre,
        post,
        kind,
        k: o.k.unwrap_or(0),
        inits: o.init_graphs(model)?,
        limits: o.limits(),
        method: o.method()?,
    })
}
