//! Last-value-wins publication of navigation feedback to channel threads.

use std::sync::{Arc, RwLock};

/// Single-slot mailbox. Writers replace the slot; readers clone the `Arc`
/// out, so a read holds the lock only for a pointer copy.
#[derive(Debug)]
pub struct FeedbackBus<T> {
    slot: RwLock<Option<Arc<T>>>,
}

impl<T> Default for FeedbackBus<T> {
    fn default() -> Self {
        Self { slot: RwLock::new(None) }
    }
}

impl<T> FeedbackBus<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn publish(&self, value: T) {
        let value = Arc::new(value);
        let mut slot = self.slot.write().unwrap_or_else(|e| e.into_inner());
        *slot = Some(value);
    }

    pub fn latest(&self) -> Option<Arc<T>> {
        self.slot.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn clear(&self) {
        *self.slot.write().unwrap_or_else(|e| e.into_inner()) = None;
    }
}
