//! Loading a domain together with its grammars, and the domains shipped
//! with the crate.

use std::sync::Arc;

use crate::domain::{AssetSource, Domain, DomainSpec};
use crate::error::{Error, Result};
use crate::grammar::Grammar;
use crate::querylog::LogCorpus;

static BONDS: &[(&str, &str)] = &[
    ("domain.toml", include_str!("../domains/bonds/domain.toml")),
    ("grammar.g", include_str!("../domains/bonds/grammar.g")),
    ("templates.g", include_str!("../domains/bonds/templates.g")),
    ("lexicons/values.tsv", include_str!("../domains/bonds/lexicons/values.tsv")),
    ("lexicons/fields.tsv", include_str!("../domains/bonds/lexicons/fields.tsv")),
    ("lexicons/units.tsv", include_str!("../domains/bonds/lexicons/units.tsv")),
    ("running_log.tsv", include_str!("../domains/bonds/running_log.tsv")),
];

static NEWS: &[(&str, &str)] = &[
    ("domain.toml", include_str!("../domains/news/domain.toml")),
    ("grammar.g", include_str!("../domains/news/grammar.g")),
    ("templates.g", include_str!("../domains/news/templates.g")),
    ("lexicons/entities.tsv", include_str!("../domains/news/lexicons/entities.tsv")),
    ("lexicons/phrases.tsv", include_str!("../domains/news/lexicons/phrases.tsv")),
    ("headlines.tsv", include_str!("../domains/news/headlines.tsv")),
];

/// Asset table of a bundled domain (`bonds` or `news`).
pub fn bundled_source(name: &str) -> Option<AssetSource> {
    match name {
        "bonds" => Some(AssetSource::Embedded(BONDS)),
        "news" => Some(AssetSource::Embedded(NEWS)),
        _ => None,
    }
}

/// A domain with its question-answering grammar and optional templates.
#[derive(Clone, Debug)]
pub struct DomainBundle {
    pub domain: Arc<Domain>,
    pub grammar: Arc<Grammar>,
    pub templates: Option<Arc<Grammar>>,
    pub source: AssetSource,
    pub sample_log: Option<String>,
}

impl DomainBundle {
    pub fn load(source: AssetSource) -> Result<Self> {
        Self::from_spec(&DomainSpec::load(source)?)
    }

    /// A bundled domain by name, or a domain directory path.
    pub fn open(name_or_dir: &str) -> Result<Self> {
        match bundled_source(name_or_dir) {
            Some(src) => Self::load(src),
            None => {
                let dir = std::path::PathBuf::from(name_or_dir);
                if !dir.join("domain.toml").exists() {
                    return Err(Error::Domain(format!(
                        "`{name_or_dir}` is neither a bundled domain nor a domain directory"
                    )));
                }
                Self::load(AssetSource::Dir(dir))
            }
        }
    }

    pub fn from_spec(spec: &DomainSpec) -> Result<Self> {
        let domain = Domain::build(spec)?;
        let grammar = Arc::new(Grammar::load(domain.clone(), &spec.source, &spec.grammar)?);
        let templates = match &spec.templates {
            Some(t) => Some(Arc::new(Grammar::load(domain.clone(), &spec.source, t)?)),
            None => None,
        };
        Ok(DomainBundle {
            domain,
            grammar,
            templates,
            source: spec.source.clone(),
            sample_log: spec.sample_log.clone(),
        })
    }

    pub fn read_asset(&self, rel: &str) -> Result<String> {
        self.source.read(rel)
    }

    /// The domain's sample log, or an empty log when it has none.
    pub fn sample_log(&self) -> Result<LogCorpus> {
        let name = &self.domain.name;
        match &self.sample_log {
            Some(rel) => LogCorpus::parse(name, rel, &self.read_asset(rel)?),
            None => Ok(LogCorpus::new(name, Vec::new())),
        }
    }
}
