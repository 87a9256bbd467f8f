//! The class catalog: repair classes ordered by training frequency.

use super::mining::{ClassKey, RepairKind};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairClass {
    pub id: usize,
    pub key: ClassKey,
    pub count: usize,
}

impl RepairClass {
    pub fn kind(&self) -> RepairKind {
        self.key.kind
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassCatalog {
    classes: Vec<RepairClass>,
    #[serde(skip)]
    index: HashMap<ClassKey, usize>,
}

impl ClassCatalog {
    /// Counts keys and assigns dense ids by descending count, ties going to
    /// the key seen first.
    pub fn build<'a>(keys: impl IntoIterator<Item = &'a ClassKey>) -> Self {
        let mut order: Vec<(ClassKey, usize)> = Vec::new();
        let mut seen: HashMap<&ClassKey, usize> = HashMap::new();
        for key in keys {
            match seen.get(key) {
                Some(&i) => order[i].1 += 1,
                None => {
                    seen.insert(key, order.len());
                    order.push((key.clone(), 1));
                }
            }
        }
        order.sort_by_key(|e| std::cmp::Reverse(e.1));
        Self::from_classes(
            order.into_iter().enumerate().map(|(id, (key, count))| RepairClass { id, key, count }).collect(),
        )
    }

    pub fn from_classes(classes: Vec<RepairClass>) -> Self {
        let index = classes.iter().map(|c| (c.key.clone(), c.id)).collect();
        ClassCatalog { classes, index }
    }

    /// Rebuilds the lookup map after deserialization.
    pub fn reindex(mut self) -> Self {
        self.index = self.classes.iter().map(|c| (c.key.clone(), c.id)).collect();
        self
    }

    pub fn id_of(&self, key: &ClassKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn get(&self, id: usize) -> Option<&RepairClass> {
        self.classes.get(id)
    }

    pub fn classes(&self) -> &[RepairClass] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c.count).collect()
    }
}
