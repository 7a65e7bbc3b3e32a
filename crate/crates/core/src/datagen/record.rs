use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const NUM_FIELDS: usize = 13;

/// Feature ids of one exposure, indexed by [`Field::index`].
pub type FeatureRow = [u32; NUM_FIELDS];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    UserId,
    ItemId,
    Hour,
    Weekday,
    Page,
    Connection,
    Age,
    Gender,
    Occupation,
    Cat1,
    Cat2,
    Cat3,
    Business,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldGroup {
    User,
    Item,
    Context,
}

impl Field {
    /// Log column order.
    pub const ALL: [Field; NUM_FIELDS] = [
        Field::UserId,
        Field::ItemId,
        Field::Hour,
        Field::Weekday,
        Field::Page,
        Field::Connection,
        Field::Age,
        Field::Gender,
        Field::Occupation,
        Field::Cat1,
        Field::Cat2,
        Field::Cat3,
        Field::Business,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Field::UserId => "user_id",
            Field::ItemId => "item_id",
            Field::Hour => "hour",
            Field::Weekday => "weekday",
            Field::Page => "page",
            Field::Connection => "connection",
            Field::Age => "age",
            Field::Gender => "gender",
            Field::Occupation => "occupation",
            Field::Cat1 => "cat1",
            Field::Cat2 => "cat2",
            Field::Cat3 => "cat3",
            Field::Business => "business",
        }
    }

    pub fn from_name(name: &str) -> Option<Field> {
        Field::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn group(self) -> FieldGroup {
        match self {
            Field::UserId | Field::Age | Field::Gender | Field::Occupation => FieldGroup::User,
            Field::ItemId | Field::Cat1 | Field::Cat2 | Field::Cat3 | Field::Business => {
                FieldGroup::Item
            }
            Field::Hour | Field::Weekday | Field::Page | Field::Connection => FieldGroup::Context,
        }
    }
}

/// One exposure of an item to a user, with the target-domain purchase label and
/// one purchase label per source domain.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InteractionRecord {
    pub features: FeatureRow,
    pub y_target: u8,
    pub y_sources: Vec<u8>,
}

impl InteractionRecord {
    pub fn feature(&self, field: Field) -> u32 {
        self.features[field.index()]
    }

    pub fn user_id(&self) -> u32 {
        self.feature(Field::UserId)
    }

    pub fn item_id(&self) -> u32 {
        self.feature(Field::ItemId)
    }
}

/// Vocabulary size of every feature field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocab {
    pub sizes: [usize; NUM_FIELDS],
}

impl Vocab {
    pub fn size(&self, field: Field) -> usize {
        self.sizes[field.index()]
    }

    /// Confirms every id of `row` lies inside its field's vocabulary.
    pub fn check(&self, row: &FeatureRow) -> Result<()> {
        for field in Field::ALL {
            let id = row[field.index()] as usize;
            let size = self.size(field);
            if id >= size {
                return Err(Error::Encoding(format!(
                    "{} id {id} outside vocabulary of size {size}",
                    field.name()
                )));
            }
        }
        Ok(())
    }
}
