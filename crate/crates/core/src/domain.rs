//! Domain definitions: fields, semantic types, units and lexicon sources.
//!
//! A domain is described by a `domain.toml` next to its lexicon and grammar
//! files. [`DomainSpec`] is the loaded, still-mutable description (tests use
//! it to scale lexicons up); [`Domain`] is the resolved, immutable form.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};
use crate::lexicon::{self, Lexicon};
use crate::semantics::{FieldDescriptor, Sym, TemporalUnit, ValueKind};

/// Where domain files come from: a directory or an embedded file table.
#[derive(Clone, Debug)]
pub enum AssetSource {
    Dir(PathBuf),
    Embedded(&'static [(&'static str, &'static str)]),
}

impl AssetSource {
    pub fn read(&self, rel: &str) -> Result<String> {
        match self {
            AssetSource::Dir(dir) => {
                let p = dir.join(rel);
                std::fs::read_to_string(&p).map_err(io_err(p))
            }
            AssetSource::Embedded(files) => files
                .iter()
                .find(|(name, _)| *name == rel)
                .map(|(_, text)| text.to_string())
                .ok_or_else(|| Error::Domain(format!("missing embedded asset `{rel}`"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldSpec {
    pub id: String,
    pub kind: ValueKind,
    #[serde(default)]
    pub enum_type: Option<String>,
    #[serde(default)]
    pub units: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TypeSpec {
    pub id: String,
    pub default_field: String,
    #[serde(default)]
    pub values: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UnitSpec {
    pub id: String,
    #[serde(default)]
    pub temporal: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LexiconFormat {
    /// `surface<TAB>target<TAB>tags<TAB>weight`
    #[default]
    Tsv,
    /// `phrase<TAB>count`, keyword semantics.
    Phrases,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LexiconSpec {
    pub name: String,
    pub path: String,
    #[serde(default)]
    pub format: LexiconFormat,
    /// File contents, filled in by [`DomainSpec::load`].
    #[serde(skip)]
    pub text: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DomainSpec {
    pub name: String,
    pub grammar: String,
    #[serde(default)]
    pub templates: Option<String>,
    #[serde(default)]
    pub keyword_field: Option<String>,
    /// A small query log shipped with the domain, used when no training log
    /// is given.
    #[serde(default)]
    pub sample_log: Option<String>,
    /// Fields whose atoms may be juxtaposed with an atom of the same field.
    #[serde(default)]
    pub juxtaposition_whitelist: Vec<String>,
    #[serde(default = "default_anchor")]
    pub anchor: String,
    #[serde(default)]
    pub units: Vec<UnitSpec>,
    #[serde(default)]
    pub types: Vec<TypeSpec>,
    #[serde(default)]
    pub fields: Vec<FieldSpec>,
    #[serde(default)]
    pub lexicons: Vec<LexiconSpec>,
    #[serde(skip, default = "default_source")]
    pub source: AssetSource,
}

fn default_anchor() -> String {
    "NOW".into()
}

fn default_source() -> AssetSource {
    AssetSource::Embedded(&[])
}

impl DomainSpec {
    /// Reads `domain.toml` and every lexicon it names.
    pub fn load(source: AssetSource) -> Result<Self> {
        let text = source.read("domain.toml")?;
        let mut spec: DomainSpec = toml::from_str(&text).map_err(|e| Error::Domain(format!("domain.toml: {e}")))?;
        for lex in &mut spec.lexicons {
            lex.text = source.read(&lex.path)?;
        }
        spec.source = source;
        Ok(spec)
    }

    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        Self::load(AssetSource::Dir(dir.as_ref().to_path_buf()))
    }

    pub fn lexicon_mut(&mut self, name: &str) -> Option<&mut LexiconSpec> {
        self.lexicons.iter_mut().find(|l| l.name == name)
    }

    pub fn type_mut(&mut self, id: &str) -> Option<&mut TypeSpec> {
        self.types.iter_mut().find(|t| t.id == id)
    }
}

/// What a lexicon entry denotes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    Field(Sym),
    Value {
        id: Sym,
        ty: Sym,
    },
    Unit(Sym),
    /// Free keyword; the surface itself is the value.
    Keyword,
}

impl Target {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Target::Field(_) => "field",
            Target::Value { .. } => "value",
            Target::Unit(_) => "unit",
            Target::Keyword => "keyword",
        }
    }

    pub fn id(&self) -> Option<&Sym> {
        match self {
            Target::Field(s) | Target::Unit(s) => Some(s),
            Target::Value { id, .. } => Some(id),
            Target::Keyword => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TypeDef {
    pub id: Sym,
    pub default_field: Sym,
    pub values: Vec<Sym>,
}

#[derive(Clone, Debug)]
pub struct Domain {
    pub name: String,
    pub fields: IndexMap<Sym, FieldDescriptor>,
    /// Enum type of each enum field.
    pub field_types: HashMap<Sym, Sym>,
    pub types: IndexMap<Sym, TypeDef>,
    pub units: IndexMap<Sym, Option<TemporalUnit>>,
    value_types: HashMap<Sym, Sym>,
    pub keyword_field: Option<Sym>,
    pub whitelist: HashSet<Sym>,
    pub anchor: Sym,
    pub lexicons: IndexMap<String, Lexicon>,
}

impl Domain {
    pub fn build(spec: &DomainSpec) -> Result<Arc<Domain>> {
        let mut d = Domain {
            name: spec.name.clone(),
            fields: IndexMap::new(),
            field_types: HashMap::new(),
            types: IndexMap::new(),
            units: IndexMap::new(),
            value_types: HashMap::new(),
            keyword_field: spec.keyword_field.as_deref().map(Sym::new),
            whitelist: spec.juxtaposition_whitelist.iter().map(|s| Sym::new(s)).collect(),
            anchor: Sym::new(&spec.anchor),
            lexicons: IndexMap::new(),
        };
        let mut ids: HashSet<String> = HashSet::new();
        let mut claim = |id: &str, what: &str| -> Result<()> {
            if !ids.insert(id.to_string()) {
                return Err(Error::Domain(format!("duplicate identifier `{id}` ({what})")));
            }
            Ok(())
        };
        for u in &spec.units {
            claim(&u.id, "unit")?;
            let temporal = match (u.temporal, TemporalUnit::from_id(&u.id)) {
                (true, Some(t)) => Some(t),
                (true, None) => {
                    return Err(Error::Domain(format!(
                        "temporal unit `{}` must be one of DAY, WEEK, MONTH, YEAR",
                        u.id
                    )))
                }
                (false, _) => None,
            };
            d.units.insert(Sym::new(&u.id), temporal);
        }
        for t in &spec.types {
            let values: Vec<Sym> = t.values.iter().map(|v| Sym::new(v)).collect();
            for v in &values {
                claim(v.as_str(), "value")?;
                d.value_types.insert(v.clone(), Sym::new(&t.id));
            }
            d.types.insert(
                Sym::new(&t.id),
                TypeDef { id: Sym::new(&t.id), default_field: Sym::new(&t.default_field), values },
            );
        }
        for f in &spec.fields {
            claim(&f.id, "field")?;
            let id = Sym::new(&f.id);
            let mut enum_domain = Vec::new();
            let mut compatible_units = Vec::new();
            match f.kind {
                ValueKind::Enum => {
                    let ty = f
                        .enum_type
                        .as_deref()
                        .ok_or_else(|| Error::Domain(format!("enum field `{}` needs enum_type", f.id)))?;
                    let def = d
                        .types
                        .get(&Sym::new(ty))
                        .ok_or_else(|| Error::Domain(format!("field `{}`: unknown type `{ty}`", f.id)))?;
                    if def.values.is_empty() {
                        return Err(Error::Domain(format!("enum field `{}` has no values", f.id)));
                    }
                    enum_domain = def.values.clone();
                    d.field_types.insert(id.clone(), def.id.clone());
                }
                ValueKind::Numeric | ValueKind::Date => {
                    for u in &f.units {
                        let u = Sym::new(u);
                        if !d.units.contains_key(&u) {
                            return Err(Error::Domain(format!("field `{}`: unknown unit `{u}`", f.id)));
                        }
                        compatible_units.push(u);
                    }
                    if f.kind == ValueKind::Date && !compatible_units.is_empty() {
                        return Err(Error::Domain(format!("date field `{}` cannot declare units", f.id)));
                    }
                }
                ValueKind::String | ValueKind::Boolean => {}
            }
            d.fields.insert(id.clone(), FieldDescriptor { id, value_kind: f.kind, compatible_units, enum_domain });
        }
        for t in d.types.values() {
            if !d.fields.contains_key(&t.default_field) {
                return Err(Error::Domain(format!("type `{}`: unknown default field `{}`", t.id, t.default_field)));
            }
        }
        if let Some(k) = &d.keyword_field {
            match d.fields.get(k) {
                Some(f) if f.value_kind == ValueKind::String => {}
                _ => return Err(Error::Domain(format!("keyword field `{k}` must be a string field"))),
            }
        }
        for ls in &spec.lexicons {
            let entries = lexicon::parse_source(ls, &d)?;
            let lex = Lexicon::new(&ls.name, entries.into_iter().map(Arc::new).collect());
            if d.lexicons.insert(ls.name.clone(), lex).is_some() {
                return Err(Error::Domain(format!("duplicate lexicon `{}`", ls.name)));
            }
        }
        Ok(Arc::new(d))
    }

    /// Resolves a lexicon target identifier.
    pub fn resolve(&self, id: &str) -> Option<Target> {
        let s = Sym::new(id);
        if self.fields.contains_key(&s) {
            Some(Target::Field(s))
        } else if let Some(ty) = self.value_types.get(&s) {
            Some(Target::Value { id: s, ty: ty.clone() })
        } else if self.units.contains_key(&s) {
            Some(Target::Unit(s))
        } else {
            None
        }
    }

    pub fn field(&self, id: &Sym) -> Option<&FieldDescriptor> {
        self.fields.get(id)
    }

    pub fn value_type(&self, v: &Sym) -> Option<&Sym> {
        self.value_types.get(v)
    }

    pub fn temporal(&self, unit: &Sym) -> Option<TemporalUnit> {
        self.units.get(unit).copied().flatten()
    }

    pub fn lexicon(&self, name: &str) -> Option<&Lexicon> {
        self.lexicons.get(name)
    }

    pub fn has_type(&self, ty: &Sym) -> bool {
        self.types.contains_key(ty)
    }

    /// Whether an atom of `field` may directly follow another atom of the same field.
    pub fn juxtaposition_allowed(&self, field: &Sym) -> bool {
        self.whitelist.contains(field)
    }

    /// Entries of all lexicons, for diagnostics.
    pub fn entry_count(&self) -> usize {
        self.lexicons.values().map(Lexicon::len).sum()
    }
}
