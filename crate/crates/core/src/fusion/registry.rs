use alloc::vec::Vec;

use super::localize::ObjectInstance;

/// Outcome of offering an instance to the registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DedupOutcome {
    Merged(u64),
    Inserted(u64),
}

impl DedupOutcome {
    pub fn id(self) -> u64 {
        match self {
            Self::Merged(id) | Self::Inserted(id) => id,
        }
    }
}

/// Object layer store; instances are only ever added or merged.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObjectRegistry {
    objects: Vec<ObjectInstance>,
    next_id: u64,
}

impl ObjectRegistry {
    pub fn new() -> Self {
        Self { objects: Vec::new(), next_id: 1 }
    }

    /// Merges `obj` into the nearest same-class instance within `radius`
    /// (support-weighted position, summed support) or stores it under a new
    /// id.
    pub fn dedup(&mut self, mut obj: ObjectInstance, radius: f64) -> DedupOutcome {
        let r2 = radius * radius;
        let nearest = self
            .objects
            .iter_mut()
            .filter(|o| o.class_name == obj.class_name)
            .map(|o| (o.position.distance_squared(&obj.position), o))
            .filter(|(d2, _)| *d2 <= r2)
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.id.cmp(&b.1.id)));
        if let Some((_, o)) = nearest {
            let wa = o.support.max(1) as f64;
            let wb = obj.support.max(1) as f64;
            o.position = (o.position * wa + obj.position * wb) * (1.0 / (wa + wb));
            o.support += obj.support;
            o.first_seen = o.first_seen.min(obj.first_seen);
            o.last_seen = o.last_seen.max(obj.last_seen);
            return DedupOutcome::Merged(o.id);
        }
        if self.next_id == 0 {
            self.next_id = 1;
        }
        obj.id = self.next_id;
        self.next_id += 1;
        self.objects.push(obj);
        DedupOutcome::Inserted(self.next_id - 1)
    }

    pub fn get(&self, id: u64) -> Option<&ObjectInstance> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn objects(&self) -> &[ObjectInstance] {
        &self.objects
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Point3;

    fn obj(class: &str, x: f64, support: u32) -> ObjectInstance {
        ObjectInstance {
            id: 0,
            class_id: 0,
            class_name: class.into(),
            position: Point3::new(x, 0.0, 0.0),
            support,
            first_seen: x,
            last_seen: x,
        }
    }

    #[test]
    fn close_same_class_merges() {
        let mut r = ObjectRegistry::new();
        r.dedup(obj("chair", 0.0, 10), 1.0);
        let out = r.dedup(obj("chair", 0.5, 30), 1.0);
        assert_eq!(out, DedupOutcome::Merged(1));
        assert_eq!(r.len(), 1);
        let o = &r.objects()[0];
        assert!((o.position.x - 0.375).abs() < 1e-12);
        assert_eq!(o.support, 40);
        assert_eq!((o.first_seen, o.last_seen), (0.0, 0.5));
    }

    #[test]
    fn far_or_other_class_inserts() {
        let mut r = ObjectRegistry::new();
        r.dedup(obj("chair", 0.0, 10), 1.0);
        assert_eq!(r.dedup(obj("chair", 2.0, 10), 1.0), DedupOutcome::Inserted(2));
        assert_eq!(r.dedup(obj("desk", 0.1, 10), 1.0), DedupOutcome::Inserted(3));
        assert_eq!(r.len(), 3);
    }
}
