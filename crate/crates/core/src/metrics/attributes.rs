use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reserved token for "no label / no consensus".
pub const UNKNOWN: &str = "unknown";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub classes: Vec<String>,
}

impl AttributeSpec {
    pub fn new(name: &str, classes: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            classes: classes.iter().map(|c| c.to_string()).collect(),
        }
    }
}

/// Ordered attribute names with the class tokens each one accepts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub attributes: Vec<AttributeSpec>,
}

impl AttributeSchema {
    pub fn new(attributes: Vec<AttributeSpec>) -> Result<Self> {
        for (i, a) in attributes.iter().enumerate() {
            if attributes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::SchemaMismatch(format!("attribute {:?} listed twice", a.name)));
            }
            if a.classes.iter().any(|c| c == UNKNOWN) {
                return Err(Error::SchemaMismatch(format!(
                    "attribute {:?} declares the reserved class {UNKNOWN:?}",
                    a.name
                )));
            }
        }
        Ok(Self { attributes })
    }

    /// The ten face attributes used for vision-language annotation of RFW,
    /// with their class vocabularies.
    pub fn face_attributes() -> Self {
        Self {
            attributes: vec![
                AttributeSpec::new("gender", &["male", "female"]),
                AttributeSpec::new("age", &["young", "middle-aged", "senior"]),
                AttributeSpec::new("skin_color", &["light", "medium", "dark"]),
                AttributeSpec::new(
                    "ancestry",
                    &[
                        "asian",
                        "south_asian",
                        "black",
                        "latino/hispanic",
                        "middle_eastern",
                        "white",
                        "indigenous",
                    ],
                ),
                AttributeSpec::new("hair_color", &["black", "brown", "red", "blonde", "gray", "other"]),
                AttributeSpec::new("bangs", &["yes", "no"]),
                AttributeSpec::new("bald", &["yes", "no"]),
                AttributeSpec::new("beard", &["no", "mustache", "stubble", "full"]),
                AttributeSpec::new("glasses", &["no", "regular", "sun"]),
                AttributeSpec::new(
                    "headwear",
                    &["no", "beanie", "cap", "hat", "headband", "hijab", "helmet", "turban"],
                ),
            ],
        }
    }

    /// Two-class (`yes`/`no`) schema.
    pub fn binary(names: &[String]) -> Self {
        Self {
            attributes: names.iter().map(|n| AttributeSpec::new(n, &["yes", "no"])).collect(),
        }
    }

    /// Builds a schema from observed string rows, collecting classes in
    /// order of first appearance.
    pub fn infer<S: AsRef<str>>(names: &[String], rows: &[Vec<S>]) -> Result<Self> {
        let mut attributes: Vec<AttributeSpec> = names
            .iter()
            .map(|n| AttributeSpec {
                name: n.clone(),
                classes: Vec::new(),
            })
            .collect();
        for row in rows {
            if row.len() != names.len() {
                return Err(Error::SchemaMismatch(format!(
                    "row has {} values for {} attributes",
                    row.len(),
                    names.len()
                )));
            }
            for (spec, tok) in attributes.iter_mut().zip(row) {
                let tok = tok.as_ref();
                if tok != UNKNOWN && !spec.classes.iter().any(|c| c == tok) {
                    spec.classes.push(tok.to_string());
                }
            }
        }
        Self::new(attributes)
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.attributes.iter().map(|a| a.name.as_str())
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    /// Parses a token for attribute `attr`. `None` means unknown.
    pub fn parse_token(&self, attr: usize, token: &str) -> Result<Option<u16>> {
        if token == UNKNOWN {
            return Ok(None);
        }
        let spec = &self.attributes[attr];
        spec.classes
            .iter()
            .position(|c| c == token)
            .map(|p| Some(p as u16))
            .ok_or_else(|| Error::UnknownClassToken {
                attribute: spec.name.clone(),
                token: token.to_string(),
            })
    }

    pub fn token(&self, attr: usize, value: Option<u16>) -> &str {
        match value {
            Some(c) => &self.attributes[attr].classes[c as usize],
            None => UNKNOWN,
        }
    }
}

/// One image's attribute values in schema order; `None` is unknown.
pub type AttributeRow = Vec<Option<u16>>;

/// Per-image categorical attributes keyed by image id. Used for evaluation
/// only, never during discovery.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeTable {
    schema: AttributeSchema,
    image_ids: Vec<String>,
    rows: Vec<AttributeRow>,
    index: HashMap<String, usize>,
}

impl AttributeTable {
    pub fn new(schema: AttributeSchema) -> Self {
        Self {
            schema,
            image_ids: Vec::new(),
            rows: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn image_ids(&self) -> &[String] {
        &self.image_ids
    }

    /// Adds a row of string tokens, validating each against the schema.
    pub fn insert_tokens<S: AsRef<str>>(&mut self, image_id: &str, tokens: &[S]) -> Result<()> {
        if tokens.len() != self.schema.len() {
            return Err(Error::SchemaMismatch(format!(
                "{image_id}: {} values for {} attributes",
                tokens.len(),
                self.schema.len()
            )));
        }
        let row = tokens
            .iter()
            .enumerate()
            .map(|(a, t)| self.schema.parse_token(a, t.as_ref()))
            .collect::<Result<AttributeRow>>()?;
        self.insert_row(image_id, row)
    }

    pub fn insert_row(&mut self, image_id: &str, row: AttributeRow) -> Result<()> {
        if row.len() != self.schema.len() {
            return Err(Error::SchemaMismatch(format!(
                "{image_id}: {} values for {} attributes",
                row.len(),
                self.schema.len()
            )));
        }
        for (a, v) in row.iter().enumerate() {
            if let Some(c) = v {
                if *c as usize >= self.schema.attributes[a].classes.len() {
                    return Err(Error::SchemaMismatch(format!(
                        "{image_id}: class index {c} out of range for {:?}",
                        self.schema.attributes[a].name
                    )));
                }
            }
        }
        if self.index.contains_key(image_id) {
            return Err(Error::InvalidArgument(format!(
                "duplicate attribute row for {image_id:?}"
            )));
        }
        self.index.insert(image_id.to_string(), self.rows.len());
        self.image_ids.push(image_id.to_string());
        self.rows.push(row);
        Ok(())
    }

    pub fn row(&self, image_id: &str) -> Option<&[Option<u16>]> {
        self.index.get(image_id).map(|&i| self.rows[i].as_slice())
    }

    pub fn row_at(&self, i: usize) -> &[Option<u16>] {
        &self.rows[i]
    }

    pub fn token(&self, image_id: &str, attr: usize) -> Option<&str> {
        self.row(image_id).map(|r| self.schema.token(attr, r[attr]))
    }
}

/// Number of attributes where both values are known and differ. Attributes
/// with an unknown value on either side are skipped.
pub fn attribute_distance(a: &[Option<u16>], b: &[Option<u16>]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::SchemaMismatch(format!(
            "rows have {} and {} attributes",
            a.len(),
            b.len()
        )));
    }
    Ok(known_mismatches(a, b))
}

#[inline]
pub(crate) fn known_mismatches(a: &[Option<u16>], b: &[Option<u16>]) -> usize {
    a.iter()
        .zip(b)
        .filter(|(x, y)| matches!((x, y), (Some(p), Some(q)) if p != q))
        .count()
}
