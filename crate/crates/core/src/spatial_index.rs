//! Spatial index over the global bounding boxes of finished submaps.
//!
//! Backed by an R-tree; the contract is only that intersection queries are
//! exact (touching boxes count) and run in O(log |S| + k). The index is
//! rebuilt from scratch after pose graph optimization, since every box moves.

use crate::geometry::BoundingBox;
use crate::grid::SubmapId;
use rstar::{RTree, RTreeObject, AABB};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("submap {0} already present in bounding box index")]
    DuplicateId(SubmapId),
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    id: SubmapId,
    envelope: AABB<[f64; 2]>,
}

impl RTreeObject for Entry {
    type Envelope = AABB<[f64; 2]>;

    fn envelope(&self) -> Self::Envelope {
        self.envelope
    }
}

fn envelope_of(b: &BoundingBox) -> AABB<[f64; 2]> {
    AABB::from_corners([b.min.x, b.min.y], [b.max.x, b.max.y])
}

/// Index of (submap id, global bounding box) pairs.
#[derive(Debug, Default)]
pub struct BoundingBoxIndex {
    tree: RTree<Entry>,
    ids: BTreeSet<SubmapId>,
}

impl BoundingBoxIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: SubmapId) -> bool {
        self.ids.contains(&id)
    }

    pub fn insert(&mut self, id: SubmapId, bounding_box: BoundingBox) -> Result<(), IndexError> {
        if !self.ids.insert(id) {
            return Err(IndexError::DuplicateId(id));
        }
        self.tree.insert(Entry {
            id,
            envelope: envelope_of(&bounding_box),
        });
        Ok(())
    }

    /// Ids of all entries whose boxes intersect the query box, in ascending
    /// order. Touching edges intersect.
    pub fn query_intersecting(&self, query: &BoundingBox) -> Vec<SubmapId> {
        let mut ids: Vec<SubmapId> = self
            .tree
            .locate_in_envelope_intersecting(&envelope_of(query))
            .map(|e| e.id)
            .collect();
        ids.sort_unstable();
        ids
    }

    /// Replace the whole index; equivalent to inserting the entries into a
    /// fresh index.
    pub fn rebuild(
        &mut self,
        entries: impl IntoIterator<Item = (SubmapId, BoundingBox)>,
    ) -> Result<(), IndexError> {
        let mut ids = BTreeSet::new();
        let mut items = Vec::new();
        for (id, bounding_box) in entries {
            if !ids.insert(id) {
                return Err(IndexError::DuplicateId(id));
            }
            items.push(Entry {
                id,
                envelope: envelope_of(&bounding_box),
            });
        }
        self.tree = RTree::bulk_load(items);
        self.ids = ids;
        Ok(())
    }
}
